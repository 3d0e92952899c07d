//! Binned delay histograms and windowed peak areas.

use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, floor};

use super::timing::TimeBinSpec;
use crate::error::{Error, Result};

/// Geometry shared by every histogram of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramLayout {
    pub resolution_ps: f64,
    pub rep_period_ps: f64,
    pub delay_ps: f64,
    /// Pairs of clicks whose periods differ by more than this are not
    /// correlated.
    pub max_period_offset: u32,
}

impl HistogramLayout {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.resolution_ps > 0.0) {
            return bad("resolution_ps", "must be positive");
        }
        if !(self.rep_period_ps > 0.0) {
            return bad("rep_period_ps", "must be positive");
        }
        if !(self.delay_ps >= 0.0) || 4.0 * self.delay_ps >= self.rep_period_ps {
            return bad("excitation_delay", "five peaks must fit inside one period");
        }
        Ok(())
    }

    /// Number of bins on each side of zero delay.
    fn half_bins(&self) -> usize {
        let reach = self.max_period_offset as f64 * self.rep_period_ps + 0.5 * self.rep_period_ps;
        ceil(reach / self.resolution_ps) as usize
    }

    pub fn n_bins(&self) -> usize {
        2 * self.half_bins()
    }

    pub fn lower_edge(&self) -> f64 {
        -(self.half_bins() as f64) * self.resolution_ps
    }

    pub fn peak_center(&self, p: i32, k: i32) -> f64 {
        p as f64 * self.rep_period_ps + k as f64 * self.delay_ps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    layout: HistogramLayout,
    counts: Vec<u64>,
    n_periods: u64,
    /// Number of period pairs available at each offset `|p|`.
    exposure: Vec<u64>,
}

impl CorrelationHistogram {
    pub fn new(layout: HistogramLayout) -> Result<Self> {
        layout.validate()?;
        Ok(CorrelationHistogram {
            counts: vec![0; layout.n_bins()],
            exposure: vec![0; layout.max_period_offset as usize + 1],
            n_periods: 0,
            layout,
        })
    }

    pub fn from_counts(layout: HistogramLayout, counts: Vec<u64>, n_periods: u64) -> Result<Self> {
        let mut h = CorrelationHistogram::new(layout)?;
        if counts.len() != h.counts.len() {
            return Err(Error::Dimension {
                expected: h.counts.len(),
                got: counts.len(),
            });
        }
        h.counts = counts;
        h.add_periods(n_periods);
        Ok(h)
    }

    pub fn layout(&self) -> &HistogramLayout {
        &self.layout
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_periods(&self) -> u64 {
        self.n_periods
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn exposure(&self, p: i32) -> u64 {
        self.exposure
            .get(p.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0)
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.layout.lower_edge() + (i as f64 + 0.5) * self.layout.resolution_ps
    }

    pub fn record(&mut self, delay_ps: f64) {
        let x = (delay_ps - self.layout.lower_edge()) / self.layout.resolution_ps;
        if x >= 0.0 && x < self.counts.len() as f64 {
            self.counts[x as usize] += 1;
        }
    }

    /// Accounts for a contiguous run of `n` simulated periods.
    pub fn add_periods(&mut self, n: u64) {
        self.n_periods += n;
        for (p, e) in self.exposure.iter_mut().enumerate() {
            *e += n.saturating_sub(p as u64);
        }
    }

    /// Adds another histogram with the same layout.
    pub fn merge(&mut self, other: &CorrelationHistogram) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::InvalidParameter {
                name: "histogram",
                reason: "layouts differ",
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.exposure.iter_mut().zip(&other.exposure) {
            *a += b;
        }
        self.n_periods += other.n_periods;
        Ok(())
    }

    /// Histogram with the detector roles exchanged.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.counts.reverse();
        out
    }

    /// Counts in `[lo, hi)`, splitting edge bins by overlap length.
    pub fn window_sum(&self, lo: f64, hi: f64) -> f64 {
        let res = self.layout.resolution_ps;
        let edge = self.layout.lower_edge();
        let first = floor((lo - edge) / res).max(0.0) as usize;
        let last = (ceil((hi - edge) / res).max(0.0) as usize).min(self.counts.len());
        let mut total = 0.0;
        for i in first..last {
            let a = edge + i as f64 * res;
            let overlap = (hi.min(a + res) - lo.max(a)).max(0.0);
            total += self.counts[i] as f64 * overlap / res;
        }
        total
    }

    /// Window areas for every `(p, k)` on the peak grid.
    pub fn peak_areas(&self, bin: &TimeBinSpec) -> PeakAreas {
        let p_max = self.layout.max_period_offset as i32;
        let half = 0.5 * bin.width_ps;
        let mut areas = PeakAreas::zeros(self.layout, bin.width_ps);
        for p in -p_max..=p_max {
            areas.exposure[(p + p_max) as usize] = self.exposure(p) as f64;
            for k in -2..=2 {
                let c = self.layout.peak_center(p, k);
                let a = self.window_sum(c - half, c + half);
                let i = areas.index(p, k);
                areas.areas[i] = a;
                areas.variances[i] = a;
            }
        }
        areas
    }
}

/// Peak areas on the `(p, k)` grid with variances and exposures.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakAreas {
    pub layout: HistogramLayout,
    pub width_ps: f64,
    areas: Vec<f64>,
    variances: Vec<f64>,
    exposure: Vec<f64>,
}

impl PeakAreas {
    pub fn zeros(layout: HistogramLayout, width_ps: f64) -> Self {
        let n_p = 2 * layout.max_period_offset as usize + 1;
        PeakAreas {
            layout,
            width_ps,
            areas: vec![0.0; 5 * n_p],
            variances: vec![0.0; 5 * n_p],
            exposure: vec![0.0; n_p],
        }
    }

    pub fn max_period_offset(&self) -> i32 {
        self.layout.max_period_offset as i32
    }

    fn index(&self, p: i32, k: i32) -> usize {
        let p_max = self.max_period_offset();
        debug_assert!(p.abs() <= p_max && k.abs() <= 2);
        ((p + p_max) * 5 + k + 2) as usize
    }

    pub fn get(&self, p: i32, k: i32) -> f64 {
        self.areas[self.index(p, k)]
    }

    pub fn variance(&self, p: i32, k: i32) -> f64 {
        self.variances[self.index(p, k)]
    }

    pub fn set(&mut self, p: i32, k: i32, area: f64, variance: f64) {
        let i = self.index(p, k);
        self.areas[i] = area;
        self.variances[i] = variance;
    }

    pub fn exposure(&self, p: i32) -> f64 {
        self.exposure[(p + self.max_period_offset()) as usize]
    }

    pub fn set_exposure(&mut self, p: i32, value: f64) {
        let i = (p + self.max_period_offset()) as usize;
        self.exposure[i] = value;
    }

    pub fn correlated(&self) -> [f64; 5] {
        core::array::from_fn(|i| self.get(0, i as i32 - 2))
    }

    pub fn correlated_variance(&self) -> [f64; 5] {
        core::array::from_fn(|i| self.variance(0, i as i32 - 2))
    }

    /// Period offsets of the uncorrelated sets.
    pub fn uncorrelated_offsets(&self) -> impl Iterator<Item = i32> {
        let p_max = self.max_period_offset();
        (-p_max..=p_max).filter(|&p| p != 0)
    }

    /// Uncorrelated area at intra-period index `k` per period pair,
    /// pooled over all sets, with its Poisson standard error.
    pub fn uncorrelated_rate(&self, k: i32) -> (f64, f64) {
        let mut area = 0.0;
        let mut var = 0.0;
        let mut exposure = 0.0;
        for p in self.uncorrelated_offsets() {
            area += self.get(p, k);
            var += self.variance(p, k);
            exposure += self.exposure(p);
        }
        if exposure == 0.0 {
            return (0.0, 0.0);
        }
        (area / exposure, libm::sqrt(var) / exposure)
    }

    /// Multiplies areas by `factor` (variances by its square).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.areas.iter_mut().for_each(|a| *a *= factor);
        out.variances.iter_mut().for_each(|v| *v *= factor * factor);
        out
    }
}
