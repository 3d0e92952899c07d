//! Figures of merit: truth table and its overlap with the ideal CNOT,
//! two-detector correlations, Bell-state fidelity and g².

use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::experiment::CorrelationHistogram;
use crate::gate::{
    AnalysisSetting, Basis, GateCircuit, InputState, PolarizationState, Projector, LOGICAL_BASIS,
};
use crate::matrix::Matrix;

/// Column of the correct output for each logical input row (HH, HV, VH, VV).
pub const CNOT_OUTPUT: [usize; 4] = [0, 1, 3, 2];

/// Coincidences normalized to the input pair mode, rows are inputs and
/// columns outputs in the order HH, HV, VH, VV.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    pub values: Matrix<f64>,
    pub variances: Matrix<f64>,
}

impl TruthTable {
    pub fn exact(values: Matrix<f64>) -> Self {
        let variances = Matrix::zeros(values.rows(), values.cols());
        TruthTable { values, variances }
    }

    /// Runs `measure(input, output)` over the sixteen settings. The closure
    /// returns an area and its variance.
    pub fn measure(mut measure: impl FnMut(InputState, AnalysisSetting) -> Result<(f64, f64)>) -> Result<Self> {
        let mut values = Matrix::zeros(4, 4);
        let mut variances = Matrix::zeros(4, 4);
        for (i, input) in LOGICAL_BASIS.into_iter().enumerate() {
            for (j, output) in LOGICAL_BASIS.into_iter().enumerate() {
                let (a, v) = measure(input, output)?;
                values[(i, j)] = a;
                variances[(i, j)] = v;
            }
        }
        Ok(TruthTable { values, variances })
    }

    pub fn overlap(&self) -> Result<f64> {
        truth_table_overlap(&self.values)
    }

    /// First-order propagation of the entry variances to the overlap.
    pub fn overlap_error(&self) -> Result<f64> {
        let mut var = 0.0;
        for r in 0..4 {
            let row = self.values.row(r);
            let sum: f64 = row.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::ZeroRow(r));
            }
            let good = row[CNOT_OUTPUT[r]];
            for (c, _) in row.iter().enumerate() {
                let d = if c == CNOT_OUTPUT[r] {
                    (sum - good) / (sum * sum)
                } else {
                    -good / (sum * sum)
                };
                var += d * d * self.variances[(r, c)] / 16.0;
            }
        }
        Ok(sqrt(var))
    }
}

/// Mean over inputs of the correct-output share of each row.
pub fn truth_table_overlap(t: &Matrix<f64>) -> Result<f64> {
    if (t.rows(), t.cols()) != (4, 4) {
        return Err(Error::Dimension {
            expected: 16,
            got: t.rows() * t.cols(),
        });
    }
    let mut total = 0.0;
    for r in 0..4 {
        let sum: f64 = t.row(r).iter().sum();
        if !(sum > 0.0) {
            return Err(Error::ZeroRow(r));
        }
        total += t[(r, CNOT_OUTPUT[r])] / sum;
    }
    Ok(total / 4.0)
}

/// Overlap of the ideal-optics gate as a function of `M`.
pub fn overlap_vs_m(m: f64) -> f64 {
    0.5 * (1.0 + 1.0 / (3.0 - 2.0 * m))
}

/// Inverse of [`overlap_vs_m`].
pub fn estimate_m_from_overlap(overlap: f64) -> Result<f64> {
    if !(2.0 / 3.0 - 1e-12..=1.0 + 1e-12).contains(&overlap) {
        return Err(Error::OverlapOutOfModel(overlap));
    }
    Ok((0.5 * (3.0 - 1.0 / (2.0 * overlap - 1.0))).clamp(0.0, 1.0))
}

/// Four zero-delay areas of one basis pair: both detectors on the first
/// projector, both on the second, then the two mixed settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSet {
    pub control: Basis,
    pub target: Basis,
    /// `[A_aa, A_bb, A_ab, A_ba]`
    pub areas: [f64; 4],
    pub variances: [f64; 4],
}

impl CorrelationSet {
    pub fn settings(control: Basis, target: Basis) -> [AnalysisSetting; 4] {
        let s = |a, b| AnalysisSetting::new(control.state(a), target.state(b));
        [
            s(Projector::First, Projector::First),
            s(Projector::Second, Projector::Second),
            s(Projector::First, Projector::Second),
            s(Projector::Second, Projector::First),
        ]
    }

    pub fn measure(
        control: Basis,
        target: Basis,
        mut measure: impl FnMut(AnalysisSetting) -> Result<(f64, f64)>,
    ) -> Result<Self> {
        let mut areas = [0.0; 4];
        let mut variances = [0.0; 4];
        for (i, s) in Self::settings(control, target).into_iter().enumerate() {
            (areas[i], variances[i]) = measure(s)?;
        }
        Ok(CorrelationSet {
            control,
            target,
            areas,
            variances,
        })
    }

    pub fn e(&self) -> Result<f64> {
        let [aa, bb, ab, ba] = self.areas;
        correlation_e(aa, bb, ab, ba)
    }

    pub fn e_err(&self) -> Result<f64> {
        let e = self.e()?;
        let s: f64 = self.areas.iter().sum();
        let same = (1.0 - e) / s;
        let diff = -(1.0 + e) / s;
        let v = same * same * (self.variances[0] + self.variances[1])
            + diff * diff * (self.variances[2] + self.variances[3]);
        Ok(sqrt(v))
    }
}

pub fn correlation_e(aa: f64, bb: f64, ab: f64, ba: f64) -> Result<f64> {
    let s = aa + bb + ab + ba;
    if !(s > 0.0) {
        return Err(Error::ZeroCorrelation);
    }
    Ok((aa + bb - ab - ba) / s)
}

pub fn bell_fidelity(e_hv: f64, e_da: f64, e_rl: f64) -> f64 {
    (1.0 + e_hv + e_da - e_rl) / 4.0
}

pub fn fidelity_vs_m(m: f64) -> f64 {
    (1.0 + m) / (2.0 * (2.0 - m))
}

/// Inverse of [`fidelity_vs_m`] on `[0.25, 1]`.
pub fn estimate_m_from_fidelity(f: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&f) {
        return Err(Error::FidelityOutOfModel(f));
    }
    Ok((4.0 * f - 1.0) / (2.0 * f + 1.0))
}

/// Smallest `M` whose fidelity exceeds `level`, by bisection on `[0, 1]`.
pub fn fidelity_threshold(level: f64, mut fidelity: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    if fidelity(lo)? > level || fidelity(hi)? < level {
        return Err(Error::FidelityOutOfModel(level));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fidelity(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Control in `|D>`, target in `|H>`: the gate outputs Φ⁺.
pub const BELL_INPUT: InputState = AnalysisSetting::new(PolarizationState::D, PolarizationState::H);

/// Correlations for all nine basis pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BellAnalysis {
    pub sets: Vec<CorrelationSet>,
}

impl BellAnalysis {
    pub fn measure(mut measure: impl FnMut(AnalysisSetting) -> Result<(f64, f64)>) -> Result<Self> {
        let mut sets = Vec::with_capacity(9);
        for control in Basis::ALL {
            for target in Basis::ALL {
                sets.push(CorrelationSet::measure(control, target, &mut measure)?);
            }
        }
        Ok(BellAnalysis { sets })
    }

    pub fn set(&self, control: Basis, target: Basis) -> Option<&CorrelationSet> {
        self.sets
            .iter()
            .find(|s| s.control == control && s.target == target)
    }

    fn diagonal(&self, b: Basis) -> Result<&CorrelationSet> {
        self.set(b, b)
            .ok_or(Error::InvalidParameter {
                name: "bell",
                reason: "missing diagonal basis pair",
            })
    }

    /// `(E_HV, E_DA, E_RL)`
    pub fn e_values(&self) -> Result<[f64; 3]> {
        Ok([
            self.diagonal(Basis::HV)?.e()?,
            self.diagonal(Basis::DA)?.e()?,
            self.diagonal(Basis::RL)?.e()?,
        ])
    }

    pub fn e_errors(&self) -> Result<[f64; 3]> {
        Ok([
            self.diagonal(Basis::HV)?.e_err()?,
            self.diagonal(Basis::DA)?.e_err()?,
            self.diagonal(Basis::RL)?.e_err()?,
        ])
    }

    pub fn fidelity(&self) -> Result<f64> {
        let [hv, da, rl] = self.e_values()?;
        Ok(bell_fidelity(hv, da, rl))
    }

    pub fn fidelity_err(&self) -> Result<f64> {
        let [a, b, c] = self.e_errors()?;
        Ok(sqrt(a * a + b * b + c * c) / 4.0)
    }
}

pub fn analytic_truth_table(circuit: &GateCircuit, m: f64) -> Result<TruthTable> {
    TruthTable::measure(|input, output| Ok((circuit.coincidence_probability(input, output, m)?, 0.0)))
}

pub fn analytic_bell(circuit: &GateCircuit, m: f64) -> Result<BellAnalysis> {
    BellAnalysis::measure(|s| Ok((circuit.coincidence_probability(BELL_INPUT, s, m)?, 0.0)))
}

pub fn analytic_fidelity(circuit: &GateCircuit, m: f64) -> Result<f64> {
    analytic_bell(circuit, m)?.fidelity()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Estimate {
    pub value: f64,
    pub err: f64,
    pub side_peaks: usize,
}

/// Minimum number of side peaks averaged by [`g2_from_histogram`].
pub const MIN_SIDE_PEAKS: usize = 20;

/// Zero-delay area over the mean side-peak area of a single-pulse HBT
/// histogram, using windows of `window_ps` centred on each period.
pub fn g2_from_histogram(h: &CorrelationHistogram, window_ps: f64) -> Result<G2Estimate> {
    let layout = h.layout();
    let p_max = layout.max_period_offset as i32;
    let side_peaks = 2 * p_max as usize;
    if side_peaks < MIN_SIDE_PEAKS {
        return Err(Error::InsufficientSidePeaks {
            needed: MIN_SIDE_PEAKS,
            have: side_peaks,
        });
    }
    let window_ps = window_ps.min(layout.rep_period_ps);
    let area = |p: i32| {
        let c = p as f64 * layout.rep_period_ps;
        h.window_sum(c - 0.5 * window_ps, c + 0.5 * window_ps)
    };
    let mut side = 0.0;
    let mut exposure = 0.0;
    for p in (-p_max..=p_max).filter(|&p| p != 0) {
        side += area(p);
        exposure += h.exposure(p) as f64;
    }
    if !(side > 0.0) {
        return Err(Error::NoUncorrelatedSignal);
    }
    let side_rate = side / exposure;
    let zero = area(0);
    let zero_rate = zero / h.exposure(0) as f64;
    let value = zero_rate / side_rate;
    let err = value * sqrt(1.0 / side + if zero > 0.0 { 1.0 / zero } else { 0.0 });
    let err = if zero > 0.0 {
        err
    } else {
        // one count upper scale when nothing was seen at zero delay
        (1.0 / h.exposure(0) as f64) / side_rate
    };
    Ok(G2Estimate {
        value,
        err,
        side_peaks,
    })
}

/// Summary of a full gate characterization.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub truth_table: TruthTable,
    pub overlap: f64,
    pub overlap_err: f64,
    pub e_values: [f64; 3],
    pub e_errors: [f64; 3],
    pub fidelity: f64,
    pub fidelity_err: f64,
    pub brightness: f64,
    pub m_estimate: f64,
}

impl GateReport {
    pub fn assemble(truth_table: TruthTable, bell: &BellAnalysis, brightness: f64) -> Result<Self> {
        let fidelity = bell.fidelity()?;
        Ok(GateReport {
            overlap: truth_table.overlap()?,
            overlap_err: truth_table.overlap_error()?,
            truth_table,
            e_values: bell.e_values()?,
            e_errors: bell.e_errors()?,
            fidelity,
            fidelity_err: bell.fidelity_err()?,
            brightness,
            m_estimate: estimate_m_from_fidelity(fidelity.clamp(0.25, 1.0))?,
        })
    }
}
