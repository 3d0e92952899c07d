//! The measurement chain: fiber splitter with a delay arm, gate, detectors,
//! correlation histogram, peak windows, overlap correction and
//! normalization by the uncorrelated peaks.
//!
//! Times are in ps. Delays are second detector minus first detector, where
//! the first detector watches the control output and the second the target
//! output. Period `n` has excitations at `n T` and `n T + delta`; the short
//! fiber arm feeds the control input and the long arm (delayed by `delta`)
//! the target input, so photons can meet at the gate only when the first
//! excitation takes the long arm and the second the short arm.

mod correction;
mod expected;
mod histogram;
mod normalize;
mod routing;
mod simulate;
mod timing;

pub use correction::{deconvolve_peaks, overlap_correction};
pub use expected::{analytic_uncorrelated_areas, ExpectedAreas};
pub use histogram::{CorrelationHistogram, HistogramLayout, PeakAreas};
pub use normalize::{normalize, NormalizedAreas, PairModeUnit, MIN_UNCORRELATED_SETS};
pub use routing::{DetectorPair, GateRouting};
pub use simulate::{
    simulate_hbt, simulate_histogram, DetectionParams, GateExperiment, HbtExperiment,
    PeriodClicks,
};
pub use timing::{
    enumerate_delays, tail_fraction, Arm, PathConfig, PeakShape, TimeBinSpec, FWHM_TO_SIGMA,
};
