//! Closed-form expected peak areas from path enumeration.

use super::routing::{DetectorPair, GateRouting};
use super::timing::{Arm, PeakShape};
use super::DetectionParams;
use crate::error::Result;
use crate::source::{PhotonMoments, SourceParams};

/// Expected coincidences per period (correlated set) or per period pair
/// (each uncorrelated set), before any time windowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedAreas {
    /// Indexed by `k + 2`.
    pub correlated: [f64; 5],
    pub uncorrelated: [f64; 5],
    /// Rate of periods delivering one signal photon to each gate input in
    /// the overlapping slot, times the detection efficiency squared.
    pub input_pair_mode: f64,
    /// Flat dark-count contribution per ps of delay window, per period.
    pub dark_density_per_ps: f64,
}

fn port(routing: &GateRouting, arm: Arm) -> DetectorPair {
    match arm {
        Arm::Short => routing.control_port,
        Arm::Long => routing.target_port,
    }
}

impl ExpectedAreas {
    pub fn compute(
        source: &SourceParams,
        routing: &GateRouting,
        detection: &DetectionParams,
    ) -> Result<Self> {
        source.validate()?;
        detection.validate()?;
        let PhotonMoments {
            mean,
            pairs,
            signal,
        } = source.moments(true)?;
        let eta = detection.efficiency;
        let eta2 = eta * eta;

        // mean clicks per slot (0, 1, 2) at each detector
        let mut lambda = [[0.0; 3]; 2];
        for e in 0..2 {
            for arm in Arm::BOTH {
                let q = port(routing, arm);
                let slot = (e + arm.slot()) as usize;
                for d in 0..2 {
                    lambda[d][slot] += 0.5 * mean * eta * q[d];
                }
            }
        }
        let mut uncorrelated = [0.0; 5];
        for sc in 0..3 {
            for st in 0..3 {
                uncorrelated[st + 2 - sc] += lambda[0][sc] * lambda[1][st];
            }
        }

        let mut correlated = [0.0; 5];
        for ec in 0..2i32 {
            for et in 0..2i32 {
                for ac in Arm::BOTH {
                    for at in Arm::BOTH {
                        let k = (et + at.slot()) - (ec + ac.slot());
                        let interfering = ec != et
                            && ec + ac.slot() == 1
                            && et + at.slot() == 1;
                        let weight = if ec == et {
                            pairs
                        } else if interfering {
                            // handled below as a whole
                            continue;
                        } else {
                            mean * mean
                        };
                        correlated[(k + 2) as usize] +=
                            0.25 * weight * eta2 * port(routing, ac)[0] * port(routing, at)[1];
                    }
                }
            }
        }
        let s2 = signal * signal;
        correlated[2] += 0.25
            * eta2
            * (s2 * routing.pair_coincidence(routing.overlap)
                + (mean * mean - s2) * routing.pair_coincidence_distinguishable());

        let period = source.rep_period_ps();
        let r = detection.dark_rate_per_ps();
        let (rc, rt) = (r, r);
        let clicks_c: f64 = lambda[0].iter().sum();
        let clicks_t: f64 = lambda[1].iter().sum();
        let dark_density_per_ps = rc * clicks_t + rt * clicks_c + rc * rt * period;

        Ok(ExpectedAreas {
            correlated,
            uncorrelated,
            input_pair_mode: 0.25 * s2 * eta2,
            dark_density_per_ps,
        })
    }

    /// Expected own-window uncorrelated area at index `k` per period pair,
    /// as measured with a centred window of `width_ps`.
    pub fn windowed_uncorrelated(&self, k: i32, width_ps: f64, shape: &PeakShape) -> f64 {
        shape.capture(width_ps) * self.uncorrelated[(k + 2) as usize]
            + self.dark_density_per_ps * width_ps
    }

    pub fn windowed_correlated(&self, k: i32, width_ps: f64, shape: &PeakShape) -> f64 {
        shape.capture(width_ps) * self.correlated[(k + 2) as usize]
            + self.dark_density_per_ps * width_ps
    }
}

/// Closed-form uncorrelated set for one input and analysis setting.
pub fn analytic_uncorrelated_areas(
    source: &SourceParams,
    routing: &GateRouting,
    detection: &DetectionParams,
) -> Result<[f64; 5]> {
    Ok(ExpectedAreas::compute(source, routing, detection)?.uncorrelated)
}
