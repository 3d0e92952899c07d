//! Pulsed quantum-dot single-photon source.
//!
//! Each repetition period holds two excitations `excitation_delay` apart.
//! An excitation yields a photon with probability `brightness_max`, emitted
//! after an exponentially distributed delay of mean `decay_time`. Residual
//! multi-photon emission is an extra, fully distinguishable photon with
//! probability `p_bg`, chosen so the Hanbury Brown–Twiss zero-delay ratio
//! equals `g2_zero`.

use alloc::vec::Vec;

use libm::{exp, sqrt};
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::{Error, Result};
use crate::fock::Polarization;

#[derive(Debug, Clone, PartialEq)]
pub enum OverlapModel {
    Constant(f64),
    /// `(time_bin_ps, M)` anchor points, linearly interpolated.
    Table(Vec<(f64, f64)>),
}

impl OverlapModel {
    pub fn evaluate(&self, t_bin_ps: f64) -> Result<f64> {
        let m = match self {
            OverlapModel::Constant(m) => *m,
            OverlapModel::Table(points) => interpolate(points, t_bin_ps)?,
        };
        Ok(m.clamp(0.0, 1.0))
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyOverlapTable);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
    if x <= first.0 {
        return Ok(first.1);
    }
    if x >= last.0 {
        return Ok(last.1);
    }
    let i = sorted.partition_point(|p| p.0 <= x);
    let (x0, y0) = sorted[i - 1];
    let (x1, y1) = sorted[i];
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Photon-number statistics per excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhotonStatistics {
    /// At most one signal photon plus a rare background photon.
    #[default]
    SubPoissonian,
    /// Poissonian photon number of mean `brightness_max` (coherent-light
    /// reference). The first photon is the signal photon, the rest count as
    /// background.
    Poissonian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceParams {
    /// Collected photons per excitation pulse.
    pub brightness_max: f64,
    pub decay_time_ps: f64,
    pub g2_zero: f64,
    pub rep_period_ns: f64,
    pub excitation_delay_ns: f64,
    pub overlap_model: OverlapModel,
    pub statistics: PhotonStatistics,
}

impl Default for SourceParams {
    /// Operating point of the truth-table measurement.
    fn default() -> Self {
        SourceParams {
            brightness_max: 0.75,
            decay_time_ps: 750.0,
            g2_zero: 0.01,
            rep_period_ns: 12.2,
            excitation_delay_ns: 2.3,
            overlap_model: OverlapModel::Constant(0.5),
            statistics: PhotonStatistics::SubPoissonian,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(0.0..=1.0).contains(&self.brightness_max) {
            return bad("brightness_max", "must lie in [0, 1]");
        }
        if !(self.decay_time_ps > 0.0) {
            return bad("decay_time_ps", "must be positive");
        }
        if !(self.g2_zero >= 0.0) {
            return bad("g2_zero", "must be non-negative");
        }
        if self.statistics == PhotonStatistics::SubPoissonian && self.g2_zero > 0.5 {
            return bad("g2_zero", "a single background photon reaches at most 0.5");
        }
        if !(self.rep_period_ns > 0.0) {
            return bad("rep_period_ns", "must be positive");
        }
        if !(self.excitation_delay_ns > 0.0 && self.excitation_delay_ns < self.rep_period_ns / 2.0)
        {
            return bad("excitation_delay_ns", "must lie in (0, rep_period_ns / 2)");
        }
        match &self.overlap_model {
            OverlapModel::Constant(m) if !(0.0..=1.0).contains(m) => {
                bad("overlap_model", "M must lie in [0, 1]")
            }
            OverlapModel::Table(t) if t.is_empty() => Err(Error::EmptyOverlapTable),
            OverlapModel::Table(t) if t.iter().any(|&(b, m)| !(b > 0.0) || !(0.0..=1.0).contains(&m)) => {
                bad("overlap_model", "entries need a positive bin and M in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    pub fn rep_period_ps(&self) -> f64 {
        self.rep_period_ns * 1e3
    }

    pub fn excitation_delay_ps(&self) -> f64 {
        self.excitation_delay_ns * 1e3
    }

    /// Per-excitation probability of the extra photon.
    pub fn background_probability(&self) -> Result<f64> {
        calibrate_background(self.g2_zero, self.brightness_max)
    }

    /// Photon-number moments per excitation. `polarizer` drops the half of
    /// the randomly polarized background that an H polarizer blocks.
    pub fn moments(&self, polarizer: bool) -> Result<PhotonMoments> {
        let b = self.brightness_max;
        Ok(match self.statistics {
            PhotonStatistics::SubPoissonian => {
                let mut p = self.background_probability()?;
                if polarizer {
                    p *= 0.5;
                }
                PhotonMoments {
                    mean: b + p,
                    pairs: 2.0 * b * p,
                    signal: b,
                }
            }
            PhotonStatistics::Poissonian => PhotonMoments {
                mean: b,
                pairs: b * b,
                signal: 1.0 - exp(-b),
            },
        })
    }
}

/// `mean = E[n]`, `pairs = E[n(n-1)]`, `signal = P(signal photon present)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    pub mean: f64,
    pub pairs: f64,
    pub signal: f64,
}

/// Collected photons per pulse when only emission within `t_bin_ps` of the
/// excitation is kept: `I_max (1 - exp(-t_bin / tau))`.
pub fn brightness_in_bin(params: &SourceParams, t_bin_ps: f64) -> f64 {
    if t_bin_ps <= 0.0 {
        return 0.0;
    }
    params.brightness_max * (1.0 - exp(-t_bin_ps / params.decay_time_ps))
}

pub fn effective_overlap(params: &SourceParams, t_bin_ps: f64) -> Result<f64> {
    if !(t_bin_ps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_bin_ps",
            reason: "must be positive",
        });
    }
    params.overlap_model.evaluate(t_bin_ps)
}

/// HBT zero-delay ratio `E[n(n-1)] / E[n]^2` for a signal photon with
/// probability `brightness` plus an independent background photon with
/// probability `p_bg`.
pub fn hbt_g2(brightness: f64, p_bg: f64) -> f64 {
    let mean = brightness + p_bg;
    if mean <= 0.0 {
        return 0.0;
    }
    2.0 * brightness * p_bg / (mean * mean)
}

/// Inverse of [`hbt_g2`] in `p_bg` on the branch through the origin.
pub fn calibrate_background(g2: f64, brightness: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&g2) {
        return Err(Error::InvalidParameter {
            name: "g2_zero",
            reason: "must lie in [0, 0.5] for a single background photon",
        });
    }
    if g2 == 0.0 {
        return Ok(0.0);
    }
    Ok(brightness * ((1.0 - g2) - sqrt(1.0 - 2.0 * g2)) / g2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionEvent {
    pub pulse_index: u64,
    /// 0 for the first excitation of the period, 1 for the delayed one.
    pub excitation: u8,
    /// Absolute emission time, ps; pulse epoch plus the exponential delay.
    pub emission_time_ps: f64,
    pub is_background: bool,
    pub polarization: Polarization,
}

/// Pre-built sampling distributions for one source configuration.
#[derive(Debug, Clone)]
pub struct SourceSampler {
    params: SourceParams,
    p_bg: f64,
    decay: Exp<f64>,
    poisson: Option<Poisson<f64>>,
}

impl SourceSampler {
    pub fn new(params: &SourceParams) -> Result<Self> {
        params.validate()?;
        let p_bg = match params.statistics {
            PhotonStatistics::SubPoissonian => params.background_probability()?,
            PhotonStatistics::Poissonian => 0.0,
        };
        let decay = Exp::new(1.0 / params.decay_time_ps).map_err(|_| Error::InvalidParameter {
            name: "decay_time_ps",
            reason: "must be positive",
        })?;
        let poisson = match params.statistics {
            PhotonStatistics::Poissonian if params.brightness_max > 0.0 => {
                Some(Poisson::new(params.brightness_max).map_err(|_| {
                    Error::InvalidParameter {
                        name: "brightness_max",
                        reason: "invalid Poisson mean",
                    }
                })?)
            }
            _ => None,
        };
        Ok(SourceSampler {
            params: params.clone(),
            p_bg,
            decay,
            poisson,
        })
    }

    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    pub fn background_probability(&self) -> f64 {
        self.p_bg
    }

    /// Photons from a single excitation at `epoch_ps`, appended to `out`.
    pub fn sample_excitation<R: Rng + ?Sized>(
        &self,
        pulse_index: u64,
        excitation: u8,
        epoch_ps: f64,
        rng: &mut R,
        out: &mut Vec<EmissionEvent>,
    ) {
        let mut emit = |rng: &mut R, is_background: bool, polarization| {
            out.push(EmissionEvent {
                pulse_index,
                excitation,
                emission_time_ps: epoch_ps + self.decay.sample(rng),
                is_background,
                polarization,
            });
        };
        match self.params.statistics {
            PhotonStatistics::SubPoissonian => {
                if rng.random::<f64>() < self.params.brightness_max {
                    emit(rng, false, Polarization::H);
                }
                if self.p_bg > 0.0 && rng.random::<f64>() < self.p_bg {
                    let pol = if rng.random::<bool>() {
                        Polarization::H
                    } else {
                        Polarization::V
                    };
                    emit(rng, true, pol);
                }
            }
            PhotonStatistics::Poissonian => {
                let n = self.poisson.map_or(0, |p| p.sample(rng) as u64);
                for k in 0..n {
                    emit(rng, k > 0, Polarization::H);
                }
            }
        }
    }

    /// Both excitations of period `pulse_index`.
    pub fn sample_pulse_pair<R: Rng + ?Sized>(
        &self,
        pulse_index: u64,
        rng: &mut R,
        out: &mut Vec<EmissionEvent>,
    ) {
        let epoch = pulse_index as f64 * self.params.rep_period_ps();
        self.sample_excitation(pulse_index, 0, epoch, rng, out);
        self.sample_excitation(
            pulse_index,
            1,
            epoch + self.params.excitation_delay_ps(),
            rng,
            out,
        );
    }
}

/// Convenience wrapper returning the events of one period.
pub fn sample_pulse_pair<R: Rng + ?Sized>(
    params: &SourceParams,
    pulse_index: u64,
    rng: &mut R,
) -> Result<Vec<EmissionEvent>> {
    let sampler = SourceSampler::new(params)?;
    let mut out = Vec::new();
    sampler.sample_pulse_pair(pulse_index, rng, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(b: f64, g2: f64) -> SourceParams {
        SourceParams {
            brightness_max: b,
            g2_zero: g2,
            ..SourceParams::default()
        }
    }

    #[test]
    fn brightness_limits() {
        let p = SourceParams::default();
        assert_eq!(brightness_in_bin(&p, 0.0), 0.0);
        assert_abs_diff_eq!(brightness_in_bin(&p, 1e9), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(
            brightness_in_bin(&p, 750.0),
            0.75 * (1.0 - (-1.0f64).exp()),
            epsilon = 1e-15
        );
        assert!((brightness_in_bin(&p, 750.0) - 0.4741).abs() < 5e-5);
    }

    #[test]
    fn overlap_models() {
        let mut p = SourceParams::default();
        assert_eq!(effective_overlap(&p, 123.0).unwrap(), 0.5);
        p.overlap_model = OverlapModel::Table(alloc::vec![(2000.0, 0.5), (400.0, 0.76)]);
        assert_abs_diff_eq!(effective_overlap(&p, 400.0).unwrap(), 0.76, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_overlap(&p, 1200.0).unwrap(), 0.63, epsilon = 1e-12);
        // clamped outside the anchors
        assert_abs_diff_eq!(effective_overlap(&p, 100.0).unwrap(), 0.76, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_overlap(&p, 5000.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(effective_overlap(&p, 0.0).is_err());
        p.overlap_model = OverlapModel::Table(alloc::vec![]);
        assert_eq!(effective_overlap(&p, 100.0), Err(Error::EmptyOverlapTable));
    }

    #[test]
    fn calibration_inverts_g2() {
        for &b in &[0.1, 0.5, 0.75, 1.0] {
            for &g in &[0.0, 1e-4, 0.01, 0.1, 0.3, 0.5] {
                let p = calibrate_background(g, b).unwrap();
                assert_abs_diff_eq!(hbt_g2(b, p), g, epsilon = 1e-12);
            }
        }
        assert!(calibrate_background(0.7, 0.5).is_err());
    }

    #[test]
    fn validation() {
        assert!(SourceParams::default().validate().is_ok());
        assert!(params(1.2, 0.0).validate().is_err());
        let mut p = SourceParams::default();
        p.excitation_delay_ns = 7.0;
        assert!(p.validate().is_err());
        p = SourceParams::default();
        p.decay_time_ps = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn perfect_source_emits_two_photons() {
        let p = params(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..100 {
            let ev = sample_pulse_pair(&p, n, &mut rng).unwrap();
            assert_eq!(ev.len(), 2);
            let epoch = n as f64 * 12_200.0;
            assert!(ev[0].emission_time_ps >= epoch);
            assert!(ev[1].emission_time_ps >= epoch + 2_300.0);
            assert!(!ev[0].is_background && !ev[1].is_background);
        }
    }

    #[test]
    fn dark_source_is_empty() {
        let p = params(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(sample_pulse_pair(&p, 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn mean_photon_number_and_decay() {
        let p = params(0.6, 0.0);
        let sampler = SourceSampler::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000u64;
        let mut out = Vec::new();
        for k in 0..n {
            sampler.sample_excitation(k, 0, 0.0, &mut rng, &mut out);
        }
        let mean = out.len() as f64 / n as f64;
        assert!((mean - 0.6).abs() < 4.0 / (n as f64).sqrt());
        let mean_delay = out.iter().map(|e| e.emission_time_ps).sum::<f64>() / out.len() as f64;
        assert!((mean_delay - 750.0).abs() < 10.0, "{mean_delay}");
    }

    #[test]
    fn poissonian_moments() {
        let p = SourceParams {
            statistics: PhotonStatistics::Poissonian,
            g2_zero: 1.0,
            brightness_max: 0.4,
            ..SourceParams::default()
        };
        let m = p.moments(false).unwrap();
        assert_abs_diff_eq!(m.pairs / (m.mean * m.mean), 1.0, epsilon = 1e-15);
    }
}
