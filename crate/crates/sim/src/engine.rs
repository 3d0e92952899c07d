//! Seeded, sharded Monte Carlo runs and per-setting measurements.

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qdcnot_core::analysis::{BellAnalysis, CorrelationSet, TruthTable, BELL_INPUT};
use qdcnot_core::experiment::{
    overlap_correction, CorrelationHistogram, GateExperiment, HbtExperiment, PairModeUnit,
    PeakAreas,
};
use qdcnot_core::gate::{AnalysisSetting, Basis, InputState, LOGICAL_BASIS};

/// Streams per experiment; shard `s` of stream `k` draws from
/// `k * SHARD_STREAMS + s`.
const SHARD_STREAMS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub n_periods: u64,
    pub shards: u32,
    pub seed: u64,
}

impl McSettings {
    pub fn rng(&self, stream: u64, shard: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream * SHARD_STREAMS + shard as u64);
        rng
    }

    /// Contiguous `(first_period, n_periods)` ranges, one per shard.
    pub fn shard_ranges(&self) -> Vec<(u64, u64)> {
        let k = self.shards.max(1) as u64;
        let base = self.n_periods / k;
        let extra = self.n_periods % k;
        let mut start = 0;
        (0..k)
            .map(|i| {
                let n = base + u64::from(i < extra);
                let r = (start, n);
                start += n;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShardedHistogram {
    pub merged: CorrelationHistogram,
    pub shards: Vec<CorrelationHistogram>,
}

fn merge(shards: Vec<CorrelationHistogram>) -> Result<ShardedHistogram> {
    let mut it = shards.iter();
    let mut merged = it.next().expect("at least one shard").clone();
    for h in it {
        merged.merge(h)?;
    }
    Ok(ShardedHistogram { merged, shards })
}

pub fn run_gate(exp: &GateExperiment, mc: &McSettings, stream: u64) -> Result<ShardedHistogram> {
    let shards = mc
        .shard_ranges()
        .into_par_iter()
        .enumerate()
        .map(|(s, (first, n))| exp.simulate(first, n, &mut mc.rng(stream, s as u32)))
        .collect::<Result<Vec<_>, _>>()?;
    merge(shards)
}

pub fn run_hbt(exp: &HbtExperiment, mc: &McSettings, stream: u64) -> Result<ShardedHistogram> {
    let shards = mc
        .shard_ranges()
        .into_par_iter()
        .enumerate()
        .map(|(s, (first, n))| exp.simulate(first, n, &mut mc.rng(stream, s as u32)))
        .collect::<Result<Vec<_>, _>>()?;
    merge(shards)
}

/// Normalized zero-delay area and its variance for one setting.
pub type Measurement = (f64, f64);

/// Simulates several settings sharing one input and normalizes them with a
/// common pair-mode unit taken from all their uncorrelated peaks.
pub fn measure_group(
    exps: &[GateExperiment],
    mc: &McSettings,
    stream_base: u64,
) -> Result<Vec<Measurement>> {
    let mut corrected: Vec<PeakAreas> = Vec::with_capacity(exps.len());
    let mut expected = Vec::with_capacity(exps.len());
    for (i, exp) in exps.iter().enumerate() {
        let h = run_gate(exp, mc, stream_base + i as u64)?;
        let raw = h.merged.peak_areas(&exp.bin);
        corrected.push(overlap_correction(&raw, &exp.peak_shape()));
        expected.push(exp.expected()?);
    }
    let shape = exps[0].peak_shape();
    let sets: Vec<_> = corrected.iter().zip(&expected).collect();
    let unit = PairModeUnit::pooled(&sets, &shape)?;
    Ok(corrected
        .iter()
        .map(|a| {
            let n = unit.apply(a);
            (n.correlated[2], n.correlated_err[2].powi(2))
        })
        .collect())
}

/// Truth table from sixteen simulated settings, normalized row by row.
pub fn mc_truth_table(
    make: impl Fn(InputState, AnalysisSetting) -> Result<GateExperiment>,
    mc: &McSettings,
    stream_base: u64,
) -> Result<TruthTable> {
    let mut rows = Vec::with_capacity(4);
    for (i, input) in LOGICAL_BASIS.into_iter().enumerate() {
        let exps = LOGICAL_BASIS
            .into_iter()
            .map(|out| make(input, out))
            .collect::<Result<Vec<_>>>()?;
        rows.push(measure_group(&exps, mc, stream_base + 4 * i as u64)?);
    }
    Ok(TruthTable::measure(|input, output| {
        let i = LOGICAL_BASIS.iter().position(|&s| s == input).expect("logical input");
        let j = LOGICAL_BASIS.iter().position(|&s| s == output).expect("logical output");
        Ok(rows[i][j])
    })?)
}

/// Correlations of all nine basis pairs from simulated settings, each
/// basis pair normalized on its own.
pub fn mc_bell(
    make: impl Fn(InputState, AnalysisSetting) -> Result<GateExperiment>,
    mc: &McSettings,
    stream_base: u64,
) -> Result<BellAnalysis> {
    let mut sets = Vec::with_capacity(9);
    for (i, (control, target)) in Basis::ALL
        .into_iter()
        .flat_map(|c| Basis::ALL.into_iter().map(move |t| (c, t)))
        .enumerate()
    {
        let settings = CorrelationSet::settings(control, target);
        let exps = settings
            .iter()
            .map(|&s| make(BELL_INPUT, s))
            .collect::<Result<Vec<_>>>()?;
        let m = measure_group(&exps, mc, stream_base + 4 * i as u64)?;
        sets.push(CorrelationSet {
            control,
            target,
            areas: [m[0].0, m[1].0, m[2].0, m[3].0],
            variances: [m[0].1, m[1].1, m[2].1, m[3].1],
        });
    }
    Ok(BellAnalysis { sets })
}

/// Mean and standard error of `f` evaluated on each shard.
pub fn shard_statistic(
    h: &ShardedHistogram,
    mut f: impl FnMut(&CorrelationHistogram) -> f64,
) -> (f64, f64) {
    let xs: Vec<f64> = h.shards.iter().map(&mut f).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
