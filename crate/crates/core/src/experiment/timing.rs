//! Peak positions and peak shapes.

use libm::{erfc, exp, log, sqrt};

use crate::error::{Error, Result};

/// FWHM to standard deviation for a Gaussian.
pub const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Short,
    Long,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Short, Arm::Long];

    /// Slot offset in units of the excitation delay.
    pub fn slot(self) -> i32 {
        match self {
            Arm::Short => 0,
            Arm::Long => 1,
        }
    }
}

/// Arms taken by the photons of the first and second excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathConfig {
    pub first: Arm,
    pub second: Arm,
}

impl PathConfig {
    pub fn all() -> [PathConfig; 4] {
        let mut out = [PathConfig {
            first: Arm::Short,
            second: Arm::Short,
        }; 4];
        let mut i = 0;
        for first in Arm::BOTH {
            for second in Arm::BOTH {
                out[i] = PathConfig { first, second };
                i += 1;
            }
        }
        out
    }

    /// Arrival of the second photon minus arrival of the first, in units of
    /// the excitation delay.
    pub fn relative_slot(self) -> i32 {
        1 + self.second.slot() - self.first.slot()
    }
}

/// Relative delays of one photon pair split by the fiber splitter, with
/// their probabilities. Each nonzero separation is shared equally between
/// the two detector orderings.
pub fn enumerate_delays(excitation_delay: f64) -> [(f64, f64); 5] {
    let mut prob = [0.0; 5];
    for cfg in PathConfig::all() {
        let s = cfg.relative_slot();
        if s == 0 {
            prob[2] += 0.25;
        } else {
            prob[(2 + s) as usize] += 0.125;
            prob[(2 - s) as usize] += 0.125;
        }
    }
    let mut out = [(0.0, 0.0); 5];
    for (i, o) in out.iter_mut().enumerate() {
        *o = ((i as f64 - 2.0) * excitation_delay, prob[i]);
    }
    out
}

/// Five integration windows of equal width on the peak grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinSpec {
    pub width_ps: f64,
    pub delay_ps: f64,
}

impl TimeBinSpec {
    pub fn new(width_ps: f64, delay_ps: f64) -> Result<Self> {
        if !(delay_ps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "excitation_delay",
                reason: "must be positive",
            });
        }
        if !(width_ps > 0.0 && width_ps <= delay_ps) {
            return Err(Error::InvalidParameter {
                name: "time_bin_ps",
                reason: "must lie in (0, excitation delay]",
            });
        }
        Ok(TimeBinSpec { width_ps, delay_ps })
    }

    pub fn centers(&self, period_offset: i32, rep_period_ps: f64) -> [f64; 5] {
        let base = period_offset as f64 * rep_period_ps;
        core::array::from_fn(|i| base + (i as f64 - 2.0) * self.delay_ps)
    }
}

/// Neighbouring-peak tail fraction `exp(-delay / tau)` of a one-sided
/// exponential decay.
pub fn tail_fraction(delay_ps: f64, decay_ps: f64) -> f64 {
    if decay_ps <= 0.0 {
        return 0.0;
    }
    exp(-delay_ps / decay_ps)
}

/// Shape of one coincidence peak: difference of two exponential emission
/// delays (a Laplace distribution) convolved with the Gaussian timing
/// jitter of both detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakShape {
    pub decay_ps: f64,
    pub sigma_ps: f64,
}

impl PeakShape {
    pub fn new(decay_ps: f64, detector_jitter_fwhm_ps: f64) -> Self {
        PeakShape {
            decay_ps: decay_ps.max(0.0),
            sigma_ps: core::f64::consts::SQRT_2 * detector_jitter_fwhm_ps.max(0.0) / FWHM_TO_SIGMA,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let b = self.decay_ps;
        let s = self.sigma_ps;
        if b == 0.0 && s == 0.0 {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        if s == 0.0 {
            return if x < 0.0 {
                0.5 * exp(x / b)
            } else {
                1.0 - 0.5 * exp(-x / b)
            };
        }
        if b == 0.0 {
            return normal_cdf(x / s);
        }
        let shift = s * s / (2.0 * b * b);
        let right = exp(-x / b + shift + ln_normal_cdf(x / s - s / b));
        let left = exp(x / b + shift + ln_normal_cdf(-x / s - s / b));
        (normal_cdf(x / s) - 0.5 * right + 0.5 * left).clamp(0.0, 1.0)
    }

    /// Probability mass of a peak centred at 0 inside `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }

    /// Fraction of a peak captured by a centred window of `width`.
    pub fn capture(&self, width: f64) -> f64 {
        self.mass_between(-0.5 * width, 0.5 * width)
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / core::f64::consts::SQRT_2)
}

fn ln_normal_cdf(z: f64) -> f64 {
    let u = -z / core::f64::consts::SQRT_2;
    if u < 20.0 {
        return log(0.5 * erfc(u));
    }
    // asymptotic erfc for large arguments
    let u2 = u * u;
    log(0.5) - u2 - log(u * sqrt(core::f64::consts::PI))
        + log(1.0 - 1.0 / (2.0 * u2) + 3.0 / (4.0 * u2 * u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn five_delays() {
        let d = enumerate_delays(2.3);
        let pos: [f64; 5] = core::array::from_fn(|i| d[i].0);
        for (a, b) in pos.iter().zip([-4.6, -2.3, 0.0, 2.3, 4.6]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_eq!(d[2].1, 0.25);
        assert_abs_diff_eq!(d.iter().map(|x| x.1).sum::<f64>(), 1.0);
        assert_eq!(enumerate_delays(1.0)[0].0, -2.0);
    }

    #[test]
    fn tail() {
        assert_abs_diff_eq!(tail_fraction(2300.0, 750.0), 0.046_576, epsilon = 1e-6);
        assert_eq!(tail_fraction(2300.0, 0.0), 0.0);
    }

    #[test]
    fn bin_spec_bounds() {
        assert!(TimeBinSpec::new(0.0, 2300.0).is_err());
        assert!(TimeBinSpec::new(2301.0, 2300.0).is_err());
        let b = TimeBinSpec::new(2300.0, 2300.0).unwrap();
        assert_eq!(b.centers(1, 12200.0)[4], 12200.0 + 4600.0);
    }

    #[test]
    fn cdf_limits() {
        let p = PeakShape::new(750.0, 350.0);
        assert_abs_diff_eq!(p.cdf(0.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cdf(1e6), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cdf(-1e6), 0.0, epsilon = 1e-12);
        for x in [-3000.0, -500.0, 100.0, 2000.0] {
            assert_abs_diff_eq!(p.cdf(x) + p.cdf(-x), 1.0, epsilon = 1e-12);
        }
        let pure = PeakShape::new(750.0, 0.0);
        assert_abs_diff_eq!(pure.mass_between(1150.0, f64::INFINITY), 0.5 * tail_fraction(1150.0, 750.0), epsilon = 1e-15);
    }

    #[test]
    fn narrow_jitter_matches_pure_laplace() {
        let a = PeakShape { decay_ps: 750.0, sigma_ps: 1e-3 };
        let b = PeakShape { decay_ps: 750.0, sigma_ps: 0.0 };
        for x in [-2000.0, -10.0, 10.0, 2000.0] {
            assert_abs_diff_eq!(a.cdf(x), b.cdf(x), epsilon = 1e-6);
        }
    }
}
