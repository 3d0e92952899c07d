//! Monte Carlo generation of correlation histograms.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::expected::ExpectedAreas;
use super::histogram::{CorrelationHistogram, HistogramLayout};
use super::routing::{DetectorPair, GateRouting};
use super::timing::{PeakShape, TimeBinSpec, FWHM_TO_SIGMA};
use crate::error::{Error, Result};
use crate::fock::Polarization;
use crate::gate::{AnalysisSetting, GateCircuit, InputState};
use crate::source::{effective_overlap, EmissionEvent, SourceParams, SourceSampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    /// Probability that a photon reaching a detector produces a click.
    pub efficiency: f64,
    /// Per-detector timing resolution (FWHM), ps.
    pub jitter_fwhm_ps: f64,
    pub dark_count_rate_hz: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            efficiency: 1.0,
            jitter_fwhm_ps: 350.0,
            dark_count_rate_hz: 0.0,
        }
    }
}

impl DetectionParams {
    /// Unit efficiency, no jitter, no dark counts.
    pub fn ideal() -> Self {
        DetectionParams {
            efficiency: 1.0,
            jitter_fwhm_ps: 0.0,
            dark_count_rate_hz: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(0.0..=1.0).contains(&self.efficiency) {
            return bad("efficiency", "must lie in [0, 1]");
        }
        if !(self.jitter_fwhm_ps >= 0.0 && self.jitter_fwhm_ps.is_finite()) {
            return bad("jitter_fwhm_ps", "must be non-negative");
        }
        if !(self.dark_count_rate_hz >= 0.0 && self.dark_count_rate_hz.is_finite()) {
            return bad("dark_count_rate_hz", "must be non-negative");
        }
        Ok(())
    }

    pub fn dark_rate_per_ps(&self) -> f64 {
        self.dark_count_rate_hz * 1e-12
    }

    pub fn jitter_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / FWHM_TO_SIGMA
    }
}

/// One measurement configuration of the gate: a logical input, an analysis
/// setting and a time bin.
#[derive(Debug, Clone, PartialEq)]
pub struct GateExperiment {
    pub source: SourceParams,
    pub circuit: GateCircuit,
    pub input: InputState,
    pub analysis: AnalysisSetting,
    pub detection: DetectionParams,
    pub bin: TimeBinSpec,
    pub resolution_ps: f64,
    pub max_period_offset: u32,
}

impl GateExperiment {
    pub fn layout(&self) -> HistogramLayout {
        HistogramLayout {
            resolution_ps: self.resolution_ps,
            rep_period_ps: self.source.rep_period_ps(),
            delay_ps: self.source.excitation_delay_ps(),
            max_period_offset: self.max_period_offset,
        }
    }

    /// Wavepacket overlap of photons accepted in the configured time bin.
    pub fn overlap(&self) -> Result<f64> {
        effective_overlap(&self.source, self.bin.width_ps)
    }

    pub fn peak_shape(&self) -> PeakShape {
        PeakShape::new(self.source.decay_time_ps, self.detection.jitter_fwhm_ps)
    }

    pub fn routing(&self) -> Result<GateRouting> {
        GateRouting::new(&self.circuit, self.input, self.analysis, self.overlap()?)
    }

    pub fn expected(&self) -> Result<ExpectedAreas> {
        ExpectedAreas::compute(&self.source, &self.routing()?, &self.detection)
    }

    /// Simulates periods `first_period .. first_period + n_periods`.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        first_period: u64,
        n_periods: u64,
        rng: &mut R,
    ) -> Result<CorrelationHistogram> {
        let mut run = GateRun::new(self)?;
        let mut hist = CorrelationHistogram::new(self.layout())?;
        let mut correlator = Correlator::new(self.max_period_offset);
        for n in first_period..first_period + n_periods {
            let clicks = correlator.next_slot();
            run.period(n, rng, clicks);
            correlator.correlate(&mut hist);
        }
        hist.add_periods(n_periods);
        Ok(hist)
    }
}

/// Free-function form of [`GateExperiment::simulate`] starting at period 0.
pub fn simulate_histogram<R: Rng + ?Sized>(
    experiment: &GateExperiment,
    n_periods: u64,
    rng: &mut R,
) -> Result<CorrelationHistogram> {
    if n_periods == 0 {
        return Err(Error::InvalidParameter {
            name: "n_periods",
            reason: "must be at least 1",
        });
    }
    experiment.simulate(0, n_periods, rng)
}

/// Click timestamps of one period at the two detectors.
#[derive(Debug, Clone, Default)]
pub struct PeriodClicks {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl PeriodClicks {
    fn clear(&mut self) {
        self.first.clear();
        self.second.clear();
    }
}

/// Full cross-correlation of clicks from periods at most
/// `max_period_offset` apart. Delays are `second - first`.
#[derive(Debug)]
struct Correlator {
    window: VecDeque<PeriodClicks>,
    depth: usize,
}

impl Correlator {
    fn new(max_period_offset: u32) -> Self {
        let depth = max_period_offset as usize + 1;
        Correlator {
            window: VecDeque::with_capacity(depth),
            depth,
        }
    }

    /// Recycles the oldest slot for the next period.
    fn next_slot(&mut self) -> &mut PeriodClicks {
        let mut slot = if self.window.len() == self.depth {
            self.window.pop_front().unwrap_or_default()
        } else {
            PeriodClicks::default()
        };
        slot.clear();
        self.window.push_back(slot);
        self.window.back_mut().expect("just pushed")
    }

    fn correlate(&self, hist: &mut CorrelationHistogram) {
        let Some(current) = self.window.back() else {
            return;
        };
        for (i, past) in self.window.iter().enumerate() {
            let is_current = i + 1 == self.window.len();
            for &t in &current.second {
                for &c in &past.first {
                    hist.record(t - c);
                }
            }
            if !is_current {
                for &c in &current.first {
                    for &t in &past.second {
                        hist.record(t - c);
                    }
                }
            }
        }
    }
}

/// Per-run sampling state.
struct GateRun {
    sampler: SourceSampler,
    routing: GateRouting,
    overlap: f64,
    efficiency: f64,
    delay_ps: f64,
    period_ps: f64,
    jitter: Option<Normal<f64>>,
    dark: Option<Poisson<f64>>,
    events: Vec<EmissionEvent>,
}

#[derive(Clone, Copy)]
enum Detector {
    First,
    Second,
}

impl GateRun {
    fn new(exp: &GateExperiment) -> Result<Self> {
        exp.detection.validate()?;
        let routing = exp.routing()?;
        Ok(GateRun {
            sampler: SourceSampler::new(&exp.source)?,
            overlap: routing.overlap,
            routing,
            efficiency: exp.detection.efficiency,
            delay_ps: exp.source.excitation_delay_ps(),
            period_ps: exp.source.rep_period_ps(),
            jitter: jitter_distribution(&exp.detection)?,
            dark: dark_distribution(&exp.detection, exp.source.rep_period_ps())?,
            events: Vec::new(),
        })
    }

    fn period<R: Rng + ?Sized>(&mut self, n: u64, rng: &mut R, clicks: &mut PeriodClicks) {
        let mut events = core::mem::take(&mut self.events);
        events.clear();
        self.sampler.sample_pulse_pair(n, rng, &mut events);

        // the polarizer ahead of state preparation only passes H
        events.retain(|e| e.polarization == Polarization::H);
        let mut pair: [Option<f64>; 2] = [None, None];
        for e in &events {
            let long = rng.random::<bool>();
            let arrival = e.emission_time_ps + if long { self.delay_ps } else { 0.0 };
            if !e.is_background {
                // first excitation via the long arm meets the second via the short arm
                match (e.excitation, long) {
                    (0, true) => {
                        pair[1] = Some(arrival);
                        continue;
                    }
                    (1, false) => {
                        pair[0] = Some(arrival);
                        continue;
                    }
                    _ => {}
                }
            }
            let q = if long {
                self.routing.target_port
            } else {
                self.routing.control_port
            };
            if let Some(d) = route_single(q, rng) {
                self.click(d, arrival, rng, clicks);
            }
        }
        match pair {
            [Some(c), Some(t)] => self.route_pair(c, t, rng, clicks),
            [Some(c), None] => {
                if let Some(d) = route_single(self.routing.control_port, rng) {
                    self.click(d, c, rng, clicks);
                }
            }
            [None, Some(t)] => {
                if let Some(d) = route_single(self.routing.target_port, rng) {
                    self.click(d, t, rng, clicks);
                }
            }
            [None, None] => {}
        }
        self.events = events;

        if let Some(dark) = &self.dark {
            let epoch = n as f64 * self.period_ps;
            for d in [Detector::First, Detector::Second] {
                let k = dark.sample(rng) as u64;
                for _ in 0..k {
                    let t = epoch + rng.random::<f64>() * self.period_ps;
                    push(clicks, d, t);
                }
            }
        }
    }

    /// `c` and `t` are the arrival times of the photons at the control and
    /// target inputs.
    fn route_pair<R: Rng + ?Sized>(&self, c: f64, t: f64, rng: &mut R, clicks: &mut PeriodClicks) {
        if rng.random::<f64>() >= self.overlap {
            for (time, q) in [(c, self.routing.control_port), (t, self.routing.target_port)] {
                if let Some(d) = route_single(q, rng) {
                    self.click(d, time, rng, clicks);
                }
            }
            return;
        }
        let (n_first, n_second) = sample_pair_outcome(&self.routing.pair_indist, rng);
        let mut times = [c, t];
        if rng.random::<bool>() {
            times.swap(0, 1);
        }
        let mut it = times.into_iter();
        for _ in 0..n_first {
            if let Some(x) = it.next() {
                self.click(Detector::First, x, rng, clicks);
            }
        }
        for _ in 0..n_second {
            if let Some(x) = it.next() {
                self.click(Detector::Second, x, rng, clicks);
            }
        }
    }

    fn click<R: Rng + ?Sized>(&self, d: Detector, time: f64, rng: &mut R, clicks: &mut PeriodClicks) {
        if self.efficiency < 1.0 && rng.random::<f64>() >= self.efficiency {
            return;
        }
        let jitter = self.jitter.map_or(0.0, |j| j.sample(rng));
        push(clicks, d, time + jitter);
    }
}

fn push(clicks: &mut PeriodClicks, d: Detector, t: f64) {
    match d {
        Detector::First => clicks.first.push(t),
        Detector::Second => clicks.second.push(t),
    }
}

fn route_single<R: Rng + ?Sized>(q: DetectorPair, rng: &mut R) -> Option<Detector> {
    let u = rng.random::<f64>();
    if u < q[0] {
        Some(Detector::First)
    } else if u < q[0] + q[1] {
        Some(Detector::Second)
    } else {
        None
    }
}

fn sample_pair_outcome<R: Rng + ?Sized>(table: &[[f64; 3]; 3], rng: &mut R) -> (usize, usize) {
    let mut u = rng.random::<f64>();
    for (a, row) in table.iter().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            if u < p {
                return (a, b);
            }
            u -= p;
        }
    }
    (0, 0)
}

fn jitter_distribution(det: &DetectionParams) -> Result<Option<Normal<f64>>> {
    if det.jitter_fwhm_ps == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, det.jitter_sigma_ps())
        .map(Some)
        .map_err(|_| Error::InvalidParameter {
            name: "jitter_fwhm_ps",
            reason: "invalid jitter width",
        })
}

fn dark_distribution(det: &DetectionParams, period_ps: f64) -> Result<Option<Poisson<f64>>> {
    let mean = det.dark_rate_per_ps() * period_ps;
    if mean == 0.0 {
        return Ok(None);
    }
    Poisson::new(mean)
        .map(Some)
        .map_err(|_| Error::InvalidParameter {
            name: "dark_count_rate_hz",
            reason: "invalid dark count rate",
        })
}

/// Hanbury Brown and Twiss measurement of the bare source: one excitation
/// per period, a 50/50 splitter and two detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HbtExperiment {
    pub source: SourceParams,
    pub detection: DetectionParams,
    pub resolution_ps: f64,
    pub max_period_offset: u32,
}

impl HbtExperiment {
    pub fn layout(&self) -> HistogramLayout {
        HistogramLayout {
            resolution_ps: self.resolution_ps,
            rep_period_ps: self.source.rep_period_ps(),
            delay_ps: 0.0,
            max_period_offset: self.max_period_offset,
        }
    }

    pub fn simulate<R: Rng + ?Sized>(
        &self,
        first_period: u64,
        n_periods: u64,
        rng: &mut R,
    ) -> Result<CorrelationHistogram> {
        self.detection.validate()?;
        let sampler = SourceSampler::new(&self.source)?;
        let period_ps = self.source.rep_period_ps();
        let jitter = jitter_distribution(&self.detection)?;
        let dark = dark_distribution(&self.detection, period_ps)?;
        let eta = self.detection.efficiency;
        let mut hist = CorrelationHistogram::new(self.layout())?;
        let mut correlator = Correlator::new(self.max_period_offset);
        let mut events = Vec::new();
        for n in first_period..first_period + n_periods {
            events.clear();
            let epoch = n as f64 * period_ps;
            sampler.sample_excitation(n, 0, epoch, rng, &mut events);
            let clicks = correlator.next_slot();
            for e in &events {
                let d = if rng.random::<bool>() {
                    Detector::First
                } else {
                    Detector::Second
                };
                if eta < 1.0 && rng.random::<f64>() >= eta {
                    continue;
                }
                let j = jitter.map_or(0.0, |j| j.sample(rng));
                push(clicks, d, e.emission_time_ps + j);
            }
            if let Some(dark) = &dark {
                for d in [Detector::First, Detector::Second] {
                    for _ in 0..dark.sample(rng) as u64 {
                        push(clicks, d, epoch + rng.random::<f64>() * period_ps);
                    }
                }
            }
            correlator.correlate(&mut hist);
        }
        hist.add_periods(n_periods);
        Ok(hist)
    }
}

/// Free-function form of [`HbtExperiment::simulate`] starting at period 0.
pub fn simulate_hbt<R: Rng + ?Sized>(
    experiment: &HbtExperiment,
    n_periods: u64,
    rng: &mut R,
) -> Result<CorrelationHistogram> {
    experiment.simulate(0, n_periods, rng)
}
