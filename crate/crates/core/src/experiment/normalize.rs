//! Conversion of peak areas to units of the input pair mode.

use libm::sqrt;

use super::expected::ExpectedAreas;
use super::histogram::PeakAreas;
use super::timing::PeakShape;
use crate::error::{Error, Result};

/// Minimum number of uncorrelated sets required for normalization.
pub const MIN_UNCORRELATED_SETS: usize = 10;

/// Observed own-window counts that correspond to one input pair mode
/// event per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModeUnit {
    pub per_period: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedAreas {
    /// Correlated (p = 0) set, indexed by `k + 2`.
    pub correlated: [f64; 5],
    pub correlated_err: [f64; 5],
    /// Mean uncorrelated set in the same units.
    pub uncorrelated: [f64; 5],
}

impl PairModeUnit {
    /// Calibrates from the central uncorrelated peaks of one or more
    /// histograms. Each entry pairs overlap-corrected areas with the
    /// analytic expectation of the same configuration.
    pub fn pooled(sets: &[(&PeakAreas, &ExpectedAreas)], shape: &PeakShape) -> Result<Self> {
        let mut observed = 0.0;
        let mut variance = 0.0;
        let mut expected = 0.0;
        let mut pair_mode = None;
        for (areas, exp) in sets {
            let n_sets = areas.uncorrelated_offsets().count();
            if n_sets < MIN_UNCORRELATED_SETS {
                return Err(Error::InsufficientSidePeaks {
                    needed: MIN_UNCORRELATED_SETS,
                    have: n_sets,
                });
            }
            let (rate, err) = areas.uncorrelated_rate(0);
            observed += rate;
            variance += err * err;
            expected += exp.windowed_uncorrelated(0, areas.width_ps, shape);
            pair_mode.get_or_insert(exp.input_pair_mode);
        }
        let pair_mode = pair_mode.ok_or(Error::NoUncorrelatedSignal)?;
        if !(observed > 0.0 && expected > 0.0 && pair_mode > 0.0) {
            return Err(Error::NoUncorrelatedSignal);
        }
        let capture = sets
            .first()
            .map_or(1.0, |(a, _)| shape.capture(a.width_ps));
        Ok(PairModeUnit {
            per_period: observed / expected * capture * pair_mode,
            relative_error: sqrt(variance) / observed,
        })
    }

    pub fn apply(&self, areas: &PeakAreas) -> NormalizedAreas {
        let scale = areas.exposure(0) * self.per_period;
        let mut out = NormalizedAreas {
            correlated: [0.0; 5],
            correlated_err: [0.0; 5],
            uncorrelated: [0.0; 5],
        };
        if scale <= 0.0 {
            return out;
        }
        for k in -2..=2 {
            let i = (k + 2) as usize;
            let a = areas.get(0, k);
            let v = areas.variance(0, k);
            out.correlated[i] = a / scale;
            let rel = out.correlated[i] * self.relative_error;
            out.correlated_err[i] = sqrt(v / (scale * scale) + rel * rel);
            out.uncorrelated[i] = areas.uncorrelated_rate(k).0 / self.per_period;
        }
        out
    }
}

/// Normalizes one histogram by its own central uncorrelated peaks.
pub fn normalize(
    areas: &PeakAreas,
    expected: &ExpectedAreas,
    shape: &PeakShape,
) -> Result<NormalizedAreas> {
    Ok(PairModeUnit::pooled(&[(areas, expected)], shape)?.apply(areas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::histogram::HistogramLayout;
    use approx::assert_abs_diff_eq;

    fn synthetic(scale: f64, p_max: u32) -> (PeakAreas, ExpectedAreas) {
        let layout = HistogramLayout {
            resolution_ps: 50.0,
            rep_period_ps: 12200.0,
            delay_ps: 2300.0,
            max_period_offset: p_max,
        };
        let exp = ExpectedAreas {
            correlated: [0.05, 0.1, 1.0 / 36.0, 0.1, 0.05],
            uncorrelated: [0.05, 0.15, 0.2, 0.15, 0.05],
            input_pair_mode: 0.25,
            dark_density_per_ps: 0.0,
        };
        let n = 1e6;
        let mut a = PeakAreas::zeros(layout, 2300.0);
        for p in -(p_max as i32)..=p_max as i32 {
            a.set_exposure(p, n);
            for k in -2..=2 {
                let v = if p == 0 {
                    exp.correlated[(k + 2) as usize]
                } else {
                    exp.uncorrelated[(k + 2) as usize]
                };
                a.set(p, k, scale * n * v, scale * n * v);
            }
        }
        (a, exp)
    }

    #[test]
    fn recovers_pair_mode_probability() {
        let (a, exp) = synthetic(0.8, 5);
        let shape = PeakShape::new(0.0, 0.0);
        let out = normalize(&a, &exp, &shape).unwrap();
        // a 1/9 coincidence probability in the interfering slot
        assert_abs_diff_eq!(out.correlated[2], 1.0 / 9.0, epsilon = 1e-12);
        assert!(out.correlated_err[2] > 0.0);
    }

    #[test]
    fn scale_invariant() {
        let shape = PeakShape::new(0.0, 0.0);
        let (a, exp) = synthetic(1.0, 5);
        let (b, _) = synthetic(2.0, 5);
        let x = normalize(&a, &exp, &shape).unwrap();
        let y = normalize(&b, &exp, &shape).unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(x.correlated[i], y.correlated[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_and_short_histograms_rejected() {
        let shape = PeakShape::new(0.0, 0.0);
        let (a, exp) = synthetic(0.0, 5);
        assert_eq!(normalize(&a, &exp, &shape), Err(Error::NoUncorrelatedSignal));
        let (a, exp) = synthetic(1.0, 4);
        assert!(matches!(
            normalize(&a, &exp, &shape),
            Err(Error::InsufficientSidePeaks { .. })
        ));
    }
}
