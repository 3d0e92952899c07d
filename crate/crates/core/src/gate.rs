//! Polarization optics and the post-selected CNOT circuit.
//!
//! Six flat modes: control H/V (0, 1), target H/V (2, 3) and two vacuum rails
//! (4, 5) that soak up the light the 1/3 "loss" beamsplitters divert. Photons
//! enter horizontally polarized; preparation waveplates set the logical input
//! and analysis waveplates rotate the chosen basis onto H/V, so a detector
//! behind a polarizer is simply one output mode.
//!
//! Waveplate convention: a plate with fast axis at `theta` from H acts as
//! `R(theta) J0 R(-theta)` with `R` the usual rotation and
//! `J0 = diag(1, -1)` (half) or `diag(1, -i)` (quarter). With it,
//! `half(pi/8) H = D` and `quarter(pi/4) H = R` up to global phase.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
use core::fmt;
use core::str::FromStr;

use libm::{cos, sin};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    beamsplitter, outcome_probability, post_selected_map, DetectionPattern, DualRailEncoding,
    GramMatrix, InternalLabel, ModeUnitary, Photon, PhotonicState,
};
use crate::matrix::{CMatrix, Matrix};

pub const N_MODES: usize = 6;
pub const CONTROL_H: usize = 0;
pub const CONTROL_V: usize = 1;
pub const TARGET_H: usize = 2;
pub const TARGET_V: usize = 3;
pub const VACUUM_A: usize = 4;
pub const VACUUM_B: usize = 5;

pub type Jones = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub kind: WaveplateKind,
    /// Fast-axis angle from H, radians.
    pub angle: f64,
}

impl WaveplateSetting {
    pub const fn half(angle: f64) -> Self {
        WaveplateSetting {
            kind: WaveplateKind::Half,
            angle,
        }
    }

    pub const fn quarter(angle: f64) -> Self {
        WaveplateSetting {
            kind: WaveplateKind::Quarter,
            angle,
        }
    }
}

pub fn jones_of(wp: WaveplateSetting) -> Jones {
    let (s, c) = (sin(wp.angle), cos(wp.angle));
    let phase = match wp.kind {
        WaveplateKind::Half => Complex64::new(-1.0, 0.0),
        WaveplateKind::Quarter => Complex64::new(0.0, -1.0),
    };
    // R(theta) diag(1, phase) R(-theta)
    let one = Complex64::new(1.0, 0.0);
    [
        [one * c * c + phase * s * s, (one - phase) * c * s],
        [(one - phase) * c * s, one * s * s + phase * c * c],
    ]
}

pub fn apply_jones(j: &Jones, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        j[0][0] * v[0] + j[0][1] * v[1],
        j[1][0] * v[0] + j[1][1] * v[1],
    ]
}

fn jones_product(a: &Jones, b: &Jones) -> Jones {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// The six polarization states used for preparation and analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolarizationState {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl PolarizationState {
    pub const ALL: [PolarizationState; 6] = [
        PolarizationState::H,
        PolarizationState::V,
        PolarizationState::D,
        PolarizationState::A,
        PolarizationState::R,
        PolarizationState::L,
    ];

    pub fn vector(self) -> [Complex64; 2] {
        let h = FRAC_1_SQRT_2;
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            PolarizationState::H => [re(1.0), re(0.0)],
            PolarizationState::V => [re(0.0), re(1.0)],
            PolarizationState::D => [re(h), re(h)],
            PolarizationState::A => [re(h), re(-h)],
            PolarizationState::R => [re(h), Complex64::new(0.0, h)],
            PolarizationState::L => [re(h), Complex64::new(0.0, -h)],
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            PolarizationState::H | PolarizationState::V => Basis::HV,
            PolarizationState::D | PolarizationState::A => Basis::DA,
            PolarizationState::R | PolarizationState::L => Basis::RL,
        }
    }

    pub fn projector(self) -> Projector {
        match self {
            PolarizationState::H | PolarizationState::D | PolarizationState::R => Projector::First,
            _ => Projector::Second,
        }
    }

    /// Waveplates turning an H photon into this state (up to global phase).
    pub fn preparation(self) -> Vec<WaveplateSetting> {
        match self {
            PolarizationState::H => vec![],
            PolarizationState::V => vec![WaveplateSetting::half(FRAC_PI_4)],
            PolarizationState::D => vec![WaveplateSetting::half(FRAC_PI_8)],
            PolarizationState::A => vec![WaveplateSetting::half(-FRAC_PI_8)],
            PolarizationState::R => vec![WaveplateSetting::quarter(FRAC_PI_4)],
            PolarizationState::L => vec![WaveplateSetting::quarter(-FRAC_PI_4)],
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c.to_ascii_uppercase() {
            'H' => PolarizationState::H,
            'V' => PolarizationState::V,
            'D' => PolarizationState::D,
            'A' => PolarizationState::A,
            'R' => PolarizationState::R,
            'L' => PolarizationState::L,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        match self {
            PolarizationState::H => 'H',
            PolarizationState::V => 'V',
            PolarizationState::D => 'D',
            PolarizationState::A => 'A',
            PolarizationState::R => 'R',
            PolarizationState::L => 'L',
        }
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    HV,
    DA,
    RL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Projector {
    First,
    Second,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::HV, Basis::DA, Basis::RL];

    pub fn state(self, projector: Projector) -> PolarizationState {
        use PolarizationState::*;
        match (self, projector) {
            (Basis::HV, Projector::First) => H,
            (Basis::HV, Projector::Second) => V,
            (Basis::DA, Projector::First) => D,
            (Basis::DA, Projector::Second) => A,
            (Basis::RL, Projector::First) => R,
            (Basis::RL, Projector::Second) => L,
        }
    }

    /// Waveplates rotating the first basis state onto H and the second onto V.
    pub fn analyzer(self) -> Vec<WaveplateSetting> {
        match self {
            Basis::HV => vec![],
            Basis::DA => vec![WaveplateSetting::half(FRAC_PI_8)],
            Basis::RL => vec![WaveplateSetting::quarter(-FRAC_PI_4)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::HV => "HV",
            Basis::DA => "DA",
            Basis::RL => "RL",
        }
    }
}

/// Polarization selected on each output qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnalysisSetting {
    pub control: PolarizationState,
    pub target: PolarizationState,
}

impl AnalysisSetting {
    pub const fn new(control: PolarizationState, target: PolarizationState) -> Self {
        AnalysisSetting { control, target }
    }

    /// Output modes watched by the control and target detectors after the
    /// analysis waveplates.
    pub fn detector_modes(&self) -> (usize, usize) {
        let c = match self.control.projector() {
            Projector::First => CONTROL_H,
            Projector::Second => CONTROL_V,
        };
        let t = match self.target.projector() {
            Projector::First => TARGET_H,
            Projector::Second => TARGET_V,
        };
        (c, t)
    }
}

impl FromStr for AnalysisSetting {
    type Err = Error;

    /// Two letters, control first: `"VH"`, `"DA"`, ...
    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let parsed = match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => PolarizationState::from_char(a)
                .zip(PolarizationState::from_char(b))
                .map(|(c, t)| AnalysisSetting::new(c, t)),
            _ => None,
        };
        parsed.ok_or(Error::InvalidParameter {
            name: "polarization pair",
            reason: "expected two letters from H, V, D, A, R, L",
        })
    }
}

impl fmt::Display for AnalysisSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.control, self.target)
    }
}

/// Logical input |control, target>, prepared from H photons.
pub type InputState = AnalysisSetting;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    Control,
    Target,
}

impl Qubit {
    fn modes(self) -> (usize, usize) {
        match self {
            Qubit::Control => (CONTROL_H, CONTROL_V),
            Qubit::Target => (TARGET_H, TARGET_V),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Waveplate { qubit: Qubit, setting: WaveplateSetting },
    /// Beamsplitter whose reflected port is taken as the continuation of
    /// each input rail, so a lone photon stays with amplitude `sqrt(R)`.
    Coupler { reflectivity: f64, a: usize, b: usize },
}

impl Element {
    fn unitary(&self) -> Result<ModeUnitary> {
        match *self {
            Element::Waveplate { qubit, setting } => {
                let (h, v) = qubit.modes();
                ModeUnitary::embed(jones_of(setting), h, v, N_MODES)
            }
            Element::Coupler { reflectivity, a, b } => {
                beamsplitter(reflectivity, a, b, N_MODES)?.then(&ModeUnitary::swap(a, b, N_MODES)?)
            }
        }
    }
}

/// Which qubit carries the basis-changing Hadamards around the controlled-Z
/// core. `Target` flips the second qubit conditioned on the first and
/// reproduces the tabulated coincidence rates with |control, target> labels;
/// `Control` is the transposed wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HadamardPlacement {
    #[default]
    Target,
    Control,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCircuit {
    elements: Vec<Element>,
    unitary: ModeUnitary,
}

impl GateCircuit {
    pub fn from_elements(elements: Vec<Element>) -> Result<Self> {
        let mut unitary = ModeUnitary::identity(N_MODES);
        for e in &elements {
            unitary = unitary.then(&e.unitary()?)?;
        }
        Ok(GateCircuit { elements, unitary })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn unitary(&self) -> &ModeUnitary {
        &self.unitary
    }

    /// Preparation, gate and analysis optics in one transfer matrix.
    pub fn setup_unitary(&self, input: InputState, analysis: AnalysisSetting) -> Result<ModeUnitary> {
        let mut u = ModeUnitary::identity(N_MODES);
        for (qubit, state) in [(Qubit::Control, input.control), (Qubit::Target, input.target)] {
            for setting in state.preparation() {
                u = u.then(&Element::Waveplate { qubit, setting }.unitary()?)?;
            }
        }
        u = u.then(&self.unitary)?;
        for (qubit, state) in [(Qubit::Control, analysis.control), (Qubit::Target, analysis.target)] {
            for setting in state.basis().analyzer() {
                u = u.then(&Element::Waveplate { qubit, setting }.unitary()?)?;
            }
        }
        Ok(u)
    }

    /// Coincidence probability for one logical input and one analysis setting,
    /// photons with mean wavepacket overlap `m`.
    pub fn coincidence_probability(
        &self,
        input: InputState,
        analysis: AnalysisSetting,
        m: f64,
    ) -> Result<f64> {
        let u = self.setup_unitary(input, analysis)?;
        let (c, t) = analysis.detector_modes();
        let pattern = DetectionPattern::coincidence(N_MODES, c, t)?;
        outcome_probability(&input_pair(), &u, &pattern, &GramMatrix::two_photon(m)?)
    }

    /// Single-photon output amplitudes for a photon entering `qubit`'s rail
    /// in state `prepared`.
    pub fn single_photon_output(
        &self,
        qubit: Qubit,
        prepared: PolarizationState,
        analysis: AnalysisSetting,
    ) -> Result<Vec<Complex64>> {
        let input = match qubit {
            Qubit::Control => AnalysisSetting::new(prepared, PolarizationState::H),
            Qubit::Target => AnalysisSetting::new(PolarizationState::H, prepared),
        };
        let u = self.setup_unitary(input, analysis)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); N_MODES];
        amps[qubit.modes().0] = Complex64::new(1.0, 0.0);
        u.propagate(&amps)
    }

    /// Post-selected logical action (`out` x `in`).
    pub fn logical_map(&self) -> Result<CMatrix> {
        post_selected_map(&self.unitary, &DualRailEncoding::POLARIZATION)
    }
}

/// Two H photons, control then target, with internal labels 0 and 1.
pub fn input_pair() -> PhotonicState {
    PhotonicState::product(vec![
        Photon::new(CONTROL_H, InternalLabel(0)),
        Photon::new(TARGET_H, InternalLabel(1)),
    ])
}

pub fn build_cnot() -> GateCircuit {
    build_cnot_with(HadamardPlacement::Target)
}

/// Hadamard, controlled-Z core of three 1/3 couplers, Hadamard. The central
/// coupler joins the two V rails (two-photon V-V amplitude -1/3); the other
/// two attenuate the H rails into the vacuum modes so every logical input
/// passes with amplitude 1/3.
pub fn build_cnot_with(placement: HadamardPlacement) -> GateCircuit {
    let flipped = match placement {
        HadamardPlacement::Target => Qubit::Target,
        HadamardPlacement::Control => Qubit::Control,
    };
    let hadamard = Element::Waveplate {
        qubit: flipped,
        setting: WaveplateSetting::half(FRAC_PI_8),
    };
    let third = 1.0 / 3.0;
    GateCircuit::from_elements(vec![
        hadamard,
        Element::Coupler {
            reflectivity: third,
            a: CONTROL_V,
            b: TARGET_V,
        },
        Element::Coupler {
            reflectivity: third,
            a: CONTROL_H,
            b: VACUUM_A,
        },
        Element::Coupler {
            reflectivity: third,
            a: TARGET_H,
            b: VACUUM_B,
        },
        hadamard,
    ])
    .expect("fixed circuit is well formed")
}

/// Computational-basis inputs and outputs in table order HH, HV, VH, VV.
pub const LOGICAL_BASIS: [AnalysisSetting; 4] = [
    AnalysisSetting::new(PolarizationState::H, PolarizationState::H),
    AnalysisSetting::new(PolarizationState::H, PolarizationState::V),
    AnalysisSetting::new(PolarizationState::V, PolarizationState::H),
    AnalysisSetting::new(PolarizationState::V, PolarizationState::V),
];

/// Coincidence rates normalized to the input pair mode: entry `(in, out)`
/// is the probability of detecting logical `out` given one photon in each
/// input with overlap `m`.
pub fn coincidence_table(circuit: &GateCircuit, m: f64) -> Result<Matrix<f64>> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::InvalidParameter {
            name: "M",
            reason: "mean wavepacket overlap must lie in [0, 1]",
        });
    }
    let mut table = Matrix::zeros(4, 4);
    for (i, input) in LOGICAL_BASIS.iter().enumerate() {
        for (o, output) in LOGICAL_BASIS.iter().enumerate() {
            table[(i, o)] = circuit.coincidence_probability(*input, *output, m)?;
        }
    }
    Ok(table)
}

/// Two-qubit pure state, amplitudes indexed `2 c + t` in the H/V basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(pub [Complex64; 4]);

impl TwoQubitState {
    pub fn product(control: PolarizationState, target: PolarizationState) -> Self {
        let (c, t) = (control.vector(), target.vector());
        TwoQubitState([c[0] * t[0], c[0] * t[1], c[1] * t[0], c[1] * t[1]])
    }

    pub fn phi_plus() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        TwoQubitState([h, z, z, h])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "zero vector",
            });
        }
        let s = libm::sqrt(n);
        Ok(TwoQubitState(self.0.map(|a| a / s)))
    }

    /// `map * self`, unnormalized.
    pub fn apply(&self, map: &CMatrix) -> Result<Self> {
        let v = map.mul_vec(&self.0)?;
        Ok(TwoQubitState([v[0], v[1], v[2], v[3]]))
    }

    pub fn fidelity(&self, other: &TwoQubitState) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
            .norm_sqr()
    }
}

/// Born-rule probability of the projector pair in `setting`.
pub fn project(state: &TwoQubitState, setting: AnalysisSetting) -> f64 {
    let p = TwoQubitState::product(setting.control, setting.target);
    p.fidelity(state)
}

/// Combined Jones matrix of a waveplate sequence (first element acts first).
pub fn jones_sequence(plates: &[WaveplateSetting]) -> Jones {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    plates
        .iter()
        .fold([[one, zero], [zero, one]], |acc, &wp| jones_product(&jones_of(wp), &acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// |<a|b>|^2 for 2-vectors.
    fn overlap(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
        (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr()
    }

    #[test]
    fn half_wave_at_zero() {
        let j = jones_of(WaveplateSetting::half(0.0));
        assert_abs_diff_eq!(j[0][0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[1][1].re, -1.0, epsilon = 1e-15);
        assert!(j[0][1].norm() < 1e-15 && j[1][0].norm() < 1e-15);
    }

    #[test]
    fn half_wave_hadamard() {
        let out = apply_jones(&jones_of(WaveplateSetting::half(FRAC_PI_8)), PolarizationState::H.vector());
        let d = PolarizationState::D.vector();
        assert!((out[0] - d[0]).norm() < 1e-15 && (out[1] - d[1]).norm() < 1e-15);
    }

    #[test]
    fn quarter_wave_makes_right_circular() {
        let j = jones_of(WaveplateSetting::quarter(FRAC_PI_4));
        // hand-multiplied: R(pi/4) diag(1,-i) R(-pi/4) = [[1-i, 1+i], [1+i, 1-i]] / 2
        let expect = [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]];
        for r in 0..2 {
            for k in 0..2 {
                assert!((j[r][k] - expect[r][k]).norm() < 1e-15);
            }
        }
        let out = apply_jones(&j, PolarizationState::H.vector());
        assert_abs_diff_eq!(overlap(PolarizationState::R.vector(), out), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn waveplates_unitary() {
        for k in 0..32 {
            let angle = k as f64 * 0.2 - 3.0;
            for wp in [WaveplateSetting::half(angle), WaveplateSetting::quarter(angle)] {
                let u = ModeUnitary::embed(jones_of(wp), 0, 1, 2).unwrap();
                assert!(u.unitarity_error() < 1e-12);
            }
        }
    }

    #[test]
    fn preparations_reach_their_states() {
        for s in PolarizationState::ALL {
            let out = apply_jones(&jones_sequence(&s.preparation()), PolarizationState::H.vector());
            assert_abs_diff_eq!(overlap(s.vector(), out), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn analyzers_map_basis_onto_h_and_v() {
        for b in Basis::ALL {
            let j = jones_sequence(&b.analyzer());
            let first = apply_jones(&j, b.state(Projector::First).vector());
            let second = apply_jones(&j, b.state(Projector::Second).vector());
            assert_abs_diff_eq!(first[0].norm_sqr(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(second[1].norm_sqr(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn basis_states_definitions() {
        let h = FRAC_1_SQRT_2;
        assert_eq!(PolarizationState::A.vector(), [c(h, 0.0), c(-h, 0.0)]);
        assert_eq!(PolarizationState::R.vector(), [c(h, 0.0), c(0.0, h)]);
        assert_eq!(PolarizationState::L.vector(), [c(h, 0.0), c(0.0, -h)]);
    }

    #[test]
    fn projections_of_phi_plus() {
        let phi = TwoQubitState::phi_plus();
        let p = |s: &str| project(&phi, s.parse().unwrap());
        assert_abs_diff_eq!(p("HH"), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p("RR"), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p("DD"), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p("RL"), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn parse_settings() {
        let s: AnalysisSetting = "vh".parse().unwrap();
        assert_eq!(s, AnalysisSetting::new(PolarizationState::V, PolarizationState::H));
        assert_eq!(s.to_string(), "VH");
        assert!("VHX".parse::<AnalysisSetting>().is_err());
        assert!("Q".parse::<AnalysisSetting>().is_err());
    }

    #[test]
    fn circuit_is_unitary() {
        for p in [HadamardPlacement::Target, HadamardPlacement::Control] {
            assert!(build_cnot_with(p).unitary().unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn table_rows_for_distinguishable_vh() {
        let t = coincidence_table(&build_cnot(), 0.0).unwrap();
        assert_abs_diff_eq!(t[(2, 2)], 2.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t[(2, 3)], 1.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn bell_state_from_diagonal_control() {
        let map = build_cnot().logical_map().unwrap();
        let input = TwoQubitState::product(PolarizationState::D, PolarizationState::H);
        let out = input.apply(&map).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0 / 9.0, epsilon = 1e-14);
        let f = out.normalized().unwrap().fidelity(&TwoQubitState::phi_plus());
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn transposed_wiring_swaps_qubit_roles() {
        let a = coincidence_table(&build_cnot(), 0.4).unwrap();
        let b = coincidence_table(&build_cnot_with(HadamardPlacement::Control), 0.4).unwrap();
        // relabel |ct> -> |tc>: index 2c+t -> 2t+c
        let swap = [0, 2, 1, 3];
        for i in 0..4 {
            for o in 0..4 {
                assert_abs_diff_eq!(a[(i, o)], b[(swap[i], swap[o])], epsilon = 1e-14);
            }
        }
    }
}
