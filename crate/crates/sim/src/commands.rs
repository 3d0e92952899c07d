//! The four experiment commands. Each returns its artifacts in memory;
//! nothing touches the filesystem here.

use anyhow::{Context, Result};
use serde_json::{json, Value};

use qdcnot_core::analysis::{
    analytic_bell, analytic_truth_table, BellAnalysis, CorrelationSet, GateReport,
    TruthTable,
};
use qdcnot_core::experiment::{overlap_correction, PairModeUnit};
use qdcnot_core::gate::{build_cnot_with, AnalysisSetting, InputState, LOGICAL_BASIS};
use qdcnot_core::matrix::Matrix;
use qdcnot_core::source::{brightness_in_bin, effective_overlap, OverlapModel};

use crate::config::{Mode, OverlapConfig, RunConfig, SweepVariable};
use crate::engine::{mc_bell, mc_truth_table, run_gate, shard_statistic, McSettings};
use crate::output::{Artifact, Provenance};

/// Stream offsets so that every simulated setting of a run draws from its
/// own random stream.
const STREAMS_PER_POINT: u64 = 64;
const BELL_STREAMS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    TruthTable,
    Bell,
    Histogram,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::TruthTable => "truth-table",
            Command::Bell => "bell",
            Command::Histogram => "histogram",
            Command::Sweep => "sweep",
        }
    }
}

pub fn provenance(cfg: &RunConfig, command: Command) -> Provenance {
    Provenance {
        command: command.as_str().into(),
        mode: cfg.experiment.mode.as_str().into(),
        seed: cfg.experiment.seed,
        config_sha256: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

pub fn run(cfg: &RunConfig, command: Command) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let prov = provenance(cfg, command);
    match command {
        Command::TruthTable => truth_table(cfg, &prov),
        Command::Bell => bell(cfg, &prov),
        Command::Histogram => histogram(cfg, &prov),
        Command::Sweep => sweep(cfg),
    }
}

fn mc_settings(cfg: &RunConfig) -> McSettings {
    McSettings {
        n_periods: cfg.experiment.n_periods,
        shards: cfg.experiment.shards,
        seed: cfg.experiment.seed,
    }
}

fn matrix_json(m: &Matrix<f64>) -> Value {
    json!((0..m.rows()).map(|r| m.row(r).to_vec()).collect::<Vec<_>>())
}

fn labels(settings: &[AnalysisSetting]) -> Vec<String> {
    settings.iter().map(|s| s.to_string()).collect()
}

/// Figures of merit at one time bin.
struct BinResult {
    overlap_m: f64,
    brightness: f64,
    truth: TruthTable,
    bell: Option<BellAnalysis>,
}

fn evaluate_bin(cfg: &RunConfig, bin_ps: f64, stream_base: u64, with_bell: bool) -> Result<BinResult> {
    let source = cfg.source_params();
    let overlap_m = effective_overlap(&source, bin_ps)?;
    let brightness = brightness_in_bin(&source, bin_ps);
    let circuit = build_cnot_with(cfg.placement());
    let (truth, bell) = match cfg.experiment.mode {
        Mode::Analytic => (
            analytic_truth_table(&circuit, overlap_m)?,
            if with_bell {
                Some(analytic_bell(&circuit, overlap_m)?)
            } else {
                None
            },
        ),
        Mode::Mc => {
            let mc = mc_settings(cfg);
            let make = |i: InputState, a: AnalysisSetting| cfg.gate_experiment(i, a, bin_ps);
            let truth = mc_truth_table(make, &mc, stream_base)?;
            let bell = if with_bell {
                Some(mc_bell(make, &mc, stream_base + BELL_STREAMS)?)
            } else {
                None
            };
            (truth, bell)
        }
    };
    Ok(BinResult {
        overlap_m,
        brightness,
        truth,
        bell,
    })
}

fn truth_table(cfg: &RunConfig, prov: &Provenance) -> Result<Vec<Artifact>> {
    let mut rows = Vec::new();
    let mut bins = Vec::new();
    for (i, &bin_ps) in cfg.experiment.time_bins_ps.iter().enumerate() {
        let r = evaluate_bin(cfg, bin_ps, i as u64 * STREAMS_PER_POINT, false)?;
        let overlap = r.truth.overlap()?;
        let overlap_err = r.truth.overlap_error()?;
        rows.push(vec![bin_ps, overlap, overlap_err, r.brightness]);
        bins.push(json!({
            "bin_ps": bin_ps,
            "overlap_M": r.overlap_m,
            "brightness": r.brightness,
            "inputs": labels(&LOGICAL_BASIS),
            "outputs": labels(&LOGICAL_BASIS),
            "truth_table": matrix_json(&r.truth.values),
            "truth_table_err": matrix_json(&r.truth.variances.map(f64::sqrt)),
            "overlap": overlap,
            "overlap_err": overlap_err,
        }));
    }
    Ok(vec![
        Artifact::json(
            "truth_table.json",
            json!({ "provenance": prov, "time_bins": bins }),
            &["provenance", "time_bins"],
        ),
        Artifact::csv(
            "overlap_vs_timebin.csv",
            &["bin_ps", "overlap", "overlap_err", "brightness"],
            rows,
        ),
    ])
}

fn report_json(r: &GateReport) -> Value {
    json!({
        "truth_table": matrix_json(&r.truth_table.values),
        "overlap": r.overlap,
        "E_HV": r.e_values[0],
        "E_DA": r.e_values[1],
        "E_RL": r.e_values[2],
        "fidelity": r.fidelity,
        "brightness": r.brightness,
        "M_estimate": r.m_estimate,
        "errors": {
            "truth_table": matrix_json(&r.truth_table.variances.map(f64::sqrt)),
            "overlap": r.overlap_err,
            "E_HV": r.e_errors[0],
            "E_DA": r.e_errors[1],
            "E_RL": r.e_errors[2],
            "fidelity": r.fidelity_err,
        },
    })
}

fn bell(cfg: &RunConfig, prov: &Provenance) -> Result<Vec<Artifact>> {
    let mut rows = Vec::new();
    let mut bins = Vec::new();
    let mut reports = Vec::new();
    for (i, &bin_ps) in cfg.experiment.time_bins_ps.iter().enumerate() {
        let r = evaluate_bin(cfg, bin_ps, i as u64 * STREAMS_PER_POINT, true)?;
        let bell = r.bell.as_ref().expect("bell requested");
        let report = GateReport::assemble(r.truth.clone(), bell, r.brightness)?;
        let [hv, da, rl] = report.e_values;
        rows.push(vec![
            bin_ps,
            report.fidelity,
            report.fidelity_err,
            hv,
            da,
            rl,
            r.brightness,
            report.m_estimate,
        ]);
        let sets = bell
            .sets
            .iter()
            .map(|s| {
                Ok(json!({
                    "control_basis": s.control.name(),
                    "target_basis": s.target.name(),
                    "settings": labels(&CorrelationSet::settings(s.control, s.target)),
                    "areas": s.areas,
                    "errors": s.variances.map(f64::sqrt),
                    "E": s.e()?,
                    "E_err": s.e_err()?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        bins.push(json!({
            "bin_ps": bin_ps,
            "overlap_M": r.overlap_m,
            "correlations": sets,
        }));
        let mut rep = report_json(&report);
        rep["bin_ps"] = json!(bin_ps);
        reports.push(rep);
    }
    Ok(vec![
        Artifact::csv(
            "fidelity_vs_timebin.csv",
            &[
                "bin_ps",
                "fidelity",
                "fidelity_err",
                "E_HV",
                "E_DA",
                "E_RL",
                "brightness",
                "M_estimate",
            ],
            rows,
        ),
        Artifact::json(
            "correlations.json",
            json!({ "provenance": prov, "input": "DH", "time_bins": bins }),
            &["provenance", "time_bins"],
        ),
        Artifact::json(
            "gate_report.json",
            json!({ "provenance": prov, "reports": reports }),
            &["provenance", "reports"],
        ),
    ])
}

fn histogram(cfg: &RunConfig, prov: &Provenance) -> Result<Vec<Artifact>> {
    let bin_ps = cfg.experiment.time_bins_ps[0];
    let exp = cfg.gate_experiment(cfg.input()?, cfg.analysis()?, bin_ps)?;
    let mc = mc_settings(cfg);
    let h = run_gate(&exp, &mc, 0)?;
    let shape = exp.peak_shape();
    let raw = h.merged.peak_areas(&exp.bin);
    let corrected = overlap_correction(&raw, &shape);
    let expected = exp.expected()?;
    let normalized = PairModeUnit::pooled(&[(&corrected, &expected)], &shape)
        .map(|u| u.apply(&corrected))
        .ok();

    let rows = (0..h.merged.counts().len())
        .map(|i| vec![h.merged.bin_center(i), h.merged.counts()[i] as f64])
        .collect();

    let layout = *h.merged.layout();
    let correlated: Vec<Value> = (-2..=2)
        .map(|k: i32| {
            let i = (k + 2) as usize;
            json!({
                "k": k,
                "delay_ps": layout.peak_center(0, k),
                "raw": raw.get(0, k),
                "corrected": corrected.get(0, k),
                "corrected_err": corrected.variance(0, k).sqrt(),
                "normalized": normalized.map(|n| n.correlated[i]),
                "normalized_err": normalized.map(|n| n.correlated_err[i]),
            })
        })
        .collect();
    let uncorrelated: Vec<Value> = corrected
        .uncorrelated_offsets()
        .map(|p| {
            json!({
                "p": p,
                "raw": (-2..=2).map(|k| raw.get(p, k)).collect::<Vec<_>>(),
                "corrected": (-2..=2).map(|k| corrected.get(p, k)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut mean = Vec::new();
    let mut mean_err = Vec::new();
    let mut analytic = Vec::new();
    for k in -2..=2 {
        let (m, e) = if h.shards.len() >= 2 {
            shard_statistic(&h, |s| {
                overlap_correction(&s.peak_areas(&exp.bin), &shape)
                    .uncorrelated_rate(k)
                    .0
            })
        } else {
            corrected.uncorrelated_rate(k)
        };
        mean.push(m);
        mean_err.push(e);
        analytic.push(expected.windowed_uncorrelated(k, bin_ps, &shape));
    }
    let ratio: Vec<Option<f64>> = mean
        .iter()
        .zip(&analytic)
        .map(|(m, a)| (*a > 0.0).then(|| m / a))
        .collect();

    Ok(vec![
        Artifact::csv("histogram.csv", &["bin_center_ps", "counts"], rows),
        Artifact::json(
            "peak_areas.json",
            json!({
                "provenance": prov,
                "input": exp.input.to_string(),
                "analysis": exp.analysis.to_string(),
                "bin_ps": bin_ps,
                "n_periods": h.merged.n_periods(),
                "max_period_offset": layout.max_period_offset,
                "overlap_M": exp.overlap()?,
                "correlated": correlated,
                "uncorrelated": uncorrelated,
                "uncorrelated_mean": {
                    "per_period_pair": mean,
                    "per_period_pair_err": mean_err,
                    "analytic": analytic,
                    "ratio": ratio,
                },
            }),
            &["provenance", "correlated", "uncorrelated", "uncorrelated_mean"],
        ),
    ])
}

fn sweep(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let sweep = cfg.sweep.as_ref().context("sweep command needs a sweep block")?;
    let grid = sweep.grid()?;
    let mut header = vec![
        "value",
        "M",
        "time_bin_ps",
        "brightness",
        "g2_zero",
        "overlap_analytic",
        "fidelity_analytic",
    ];
    if sweep.monte_carlo {
        header.extend(["overlap_mc", "overlap_mc_err", "fidelity_mc", "fidelity_mc_err"]);
    }
    let mut rows = Vec::new();
    for (i, &value) in grid.iter().enumerate() {
        let mut point = cfg.clone();
        point.sweep = None;
        let mut bin_ps = cfg.experiment.time_bins_ps[0];
        match sweep.variable {
            SweepVariable::M => point.source.overlap_model = OverlapConfig::Constant(value),
            SweepVariable::TimeBin => bin_ps = value,
            SweepVariable::G2 => point.source.g2_zero = value,
            SweepVariable::Brightness => point.source.brightness_max = value,
        }
        point.experiment.time_bins_ps = vec![bin_ps];
        point
            .validate()
            .with_context(|| format!("sweep point {value}"))?;
        let source = point.source_params();
        let m = match &source.overlap_model {
            OverlapModel::Constant(m) => *m,
            _ => effective_overlap(&source, bin_ps)?,
        };
        let circuit = build_cnot_with(point.placement());
        let truth = analytic_truth_table(&circuit, m)?;
        let bell = analytic_bell(&circuit, m)?;
        let mut row = vec![
            value,
            m,
            bin_ps,
            brightness_in_bin(&source, bin_ps),
            source.g2_zero,
            truth.overlap()?,
            bell.fidelity()?,
        ];
        if sweep.monte_carlo {
            point.experiment.mode = Mode::Mc;
            let r = evaluate_bin(&point, bin_ps, i as u64 * STREAMS_PER_POINT, true)?;
            let bell = r.bell.expect("bell requested");
            row.extend([
                r.truth.overlap()?,
                r.truth.overlap_error()?,
                bell.fidelity()?,
                bell.fidelity_err()?,
            ]);
        }
        rows.push(row);
    }
    Ok(vec![Artifact::csv("sweep.csv", &header, rows)])
}
