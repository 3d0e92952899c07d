use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use num_complex::Complex64;

use super::permanent::permanent;
use super::state::{factorial_product, GramMatrix, PhotonicState};
use super::unitary::ModeUnitary;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Matrix};

/// Photon counts on the observed modes; unobserved modes are summed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionPattern {
    counts: Vec<u8>,
    observed: Vec<bool>,
}

impl DetectionPattern {
    /// Every mode observed.
    pub fn exact(counts: Vec<u8>) -> Self {
        let observed = vec![true; counts.len()];
        DetectionPattern { counts, observed }
    }

    pub fn marginal(counts: Vec<u8>, observed: Vec<bool>) -> Result<Self> {
        if counts.len() != observed.len() {
            return Err(Error::Dimension {
                expected: counts.len(),
                got: observed.len(),
            });
        }
        if counts.iter().zip(&observed).any(|(&c, &o)| c > 0 && !o) {
            return Err(Error::InvalidPattern("counts given on an unobserved mode"));
        }
        Ok(DetectionPattern { counts, observed })
    }

    /// One photon on each of two distinct detectors, everything else unobserved.
    pub fn coincidence(n_modes: usize, a: usize, b: usize) -> Result<Self> {
        for index in [a, b] {
            if index >= n_modes {
                return Err(Error::ModeOutOfRange { index, n_modes });
            }
        }
        if a == b {
            return Err(Error::InvalidPattern("coincidence needs two distinct modes"));
        }
        let mut counts = vec![0; n_modes];
        let mut observed = vec![false; n_modes];
        counts[a] = 1;
        counts[b] = 1;
        observed[a] = true;
        observed[b] = true;
        Ok(DetectionPattern { counts, observed })
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn detected_photons(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// All full occupation vectors compatible with this pattern for `n` photons.
    fn completions(&self, n: usize) -> Vec<Vec<u8>> {
        let rest = n - self.detected_photons();
        let free: Vec<usize> = (0..self.counts.len())
            .filter(|&i| !self.observed[i])
            .collect();
        let mut out = Vec::new();
        let mut occ = self.counts.clone();
        distribute(&free, 0, rest, &mut occ, &mut out);
        out
    }
}

fn distribute(free: &[usize], pos: usize, rest: usize, occ: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if rest == 0 {
        out.push(occ.clone());
        return;
    }
    if pos == free.len() {
        return;
    }
    for k in (0..=rest).rev() {
        occ[free[pos]] = k as u8;
        distribute(free, pos + 1, rest - k, occ, out);
    }
    occ[free[pos]] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Regime {
    Indistinguishable,
    Distinguishable,
    /// Two photons with squared overlap `M`.
    Partial(f64),
}

const REGIME_TOL: f64 = 1e-12;

fn regime(input: &PhotonicState, gram: &GramMatrix) -> Result<Regime> {
    let first = &input.terms()[0];
    for t in &input.terms()[1..] {
        if t.photons.iter().map(|p| p.label).ne(first.photons.iter().map(|p| p.label)) {
            return Err(Error::Unsupported(
                "superposition terms must assign the same internal labels to each photon",
            ));
        }
    }
    let n = first.photons.len();
    let mut all_one = true;
    let mut all_zero = true;
    let mut last = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = gram.squared_overlap(first.photons[i].label, first.photons[j].label)?;
            all_one &= s >= 1.0 - REGIME_TOL;
            all_zero &= s <= REGIME_TOL;
            last = s;
        }
    }
    if all_one {
        Ok(Regime::Indistinguishable)
    } else if all_zero {
        Ok(Regime::Distinguishable)
    } else if n == 2 {
        Ok(Regime::Partial(last))
    } else {
        Err(Error::Unsupported(
            "partial distinguishability is modelled for two photons only",
        ))
    }
}

fn slots(occupation: &[u8]) -> Vec<usize> {
    occupation
        .iter()
        .enumerate()
        .flat_map(|(m, &c)| core::iter::repeat_n(m, c as usize))
        .collect()
}

fn indistinguishable_probability(
    input: &PhotonicState,
    u: &ModeUnitary,
    out: &[u8],
) -> Result<f64> {
    let n_modes = u.n_modes();
    let out_slots = slots(out);
    let out_norm = factorial_product(out);
    let mut amp = Complex64::new(0.0, 0.0);
    for term in input.terms() {
        let in_slots = term.modes();
        let sub = u.matrix().select(&out_slots, &in_slots);
        let in_norm = factorial_product(&term.occupation(n_modes));
        amp += term.amplitude * permanent(&sub)? / sqrt(in_norm * out_norm);
    }
    Ok(amp.norm_sqr())
}

const MAX_ENUMERATED_PHOTONS: usize = 8;

fn distinguishable_probability(
    input: &PhotonicState,
    u: &ModeUnitary,
    out: &[u8],
) -> Result<f64> {
    let out_slots = slots(out);
    let out_norm = factorial_product(out);
    if let [term] = input.terms() {
        let sub: Matrix<f64> = u
            .matrix()
            .select(&out_slots, &term.modes())
            .map(|z| z.norm_sqr());
        return Ok(term.amplitude.norm_sqr() * permanent(&sub)? / out_norm);
    }
    // Coherent sum over terms for each assignment of labelled photons to
    // output slots; assignments differing only inside one mode repeat out! times.
    let n = out_slots.len();
    if n > MAX_ENUMERATED_PHOTONS {
        return Err(Error::Unsupported(
            "distinguishable superpositions are limited to 8 photons",
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut visit = |perm: &[usize]| {
        let mut amp = Complex64::new(0.0, 0.0);
        for term in input.terms() {
            let mut a = term.amplitude;
            for (i, p) in term.photons.iter().enumerate() {
                a *= u.get(out_slots[perm[i]], p.mode);
            }
            amp += a;
        }
        total += amp.norm_sqr();
    };
    heap_permutations(&mut perm, n, &mut visit);
    Ok(total / out_norm)
}

fn heap_permutations(a: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(a);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(a, k - 1, visit);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permutations(a, k - 1, visit);
}

/// Probability of observing `pattern` when `input` passes through `u`.
///
/// Two photons with squared overlap `M` (from `gram`) give
/// `M * P_indist + (1 - M) * P_dist`: the indistinguishable part sums
/// amplitudes coherently through permanents, the distinguishable part adds
/// single-photon path probabilities.
pub fn outcome_probability(
    input: &PhotonicState,
    u: &ModeUnitary,
    pattern: &DetectionPattern,
    gram: &GramMatrix,
) -> Result<f64> {
    let n_modes = u.n_modes();
    if pattern.counts.len() != n_modes {
        return Err(Error::Dimension {
            expected: n_modes,
            got: pattern.counts.len(),
        });
    }
    let n = input.n_photons();
    if pattern.detected_photons() > n {
        return Err(Error::InvalidPattern("more detected photons than input photons"));
    }
    for t in input.terms() {
        for p in &t.photons {
            if p.mode >= n_modes {
                return Err(Error::ModeOutOfRange {
                    index: p.mode,
                    n_modes,
                });
            }
        }
    }
    if n == 0 {
        return Ok(input.norm_sqr());
    }
    let regime = regime(input, gram)?;
    let mut total = 0.0;
    for out in pattern.completions(n) {
        total += match regime {
            Regime::Indistinguishable => indistinguishable_probability(input, u, &out)?,
            Regime::Distinguishable => distinguishable_probability(input, u, &out)?,
            Regime::Partial(m) => {
                m * indistinguishable_probability(input, u, &out)?
                    + (1.0 - m) * distinguishable_probability(input, u, &out)?
            }
        };
    }
    Ok(total)
}

/// Which two modes carry logical |0> and |1> of each qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualRailEncoding {
    pub control: [usize; 2],
    pub target: [usize; 2],
}

impl DualRailEncoding {
    /// Control on rail 0 and target on rail 1, |0> = H and |1> = V.
    pub const POLARIZATION: DualRailEncoding = DualRailEncoding {
        control: [0, 1],
        target: [2, 3],
    };

    /// Modes of logical basis state `index = 2 c + t`.
    pub fn modes(&self, index: usize) -> (usize, usize) {
        (self.control[index >> 1], self.target[index & 1])
    }
}

/// Post-selected logical action of `u`: entry `(out, in)` is the amplitude
/// `<c't'| U |ct>` restricted to one photon in each qubit's rails, with
/// logical index `2 c + t`.
pub fn post_selected_map(u: &ModeUnitary, encoding: &DualRailEncoding) -> Result<CMatrix> {
    let n_modes = u.n_modes();
    for &m in encoding.control.iter().chain(&encoding.target) {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { index: m, n_modes });
        }
    }
    let mut map = CMatrix::zeros(4, 4);
    for input in 0..4 {
        let (ic, it) = encoding.modes(input);
        for output in 0..4 {
            let (oc, ot) = encoding.modes(output);
            let sub = u.matrix().select(&[oc, ot], &[ic, it]);
            map[(output, input)] = permanent(&sub)?;
        }
    }
    Ok(map)
}

/// Probability that the two photons leave one in each qubit's rails.
pub fn post_selection_probability(
    input: &PhotonicState,
    u: &ModeUnitary,
    gram: &GramMatrix,
    encoding: &DualRailEncoding,
) -> Result<f64> {
    let mut total = 0.0;
    for output in 0..4 {
        let (oc, ot) = encoding.modes(output);
        let pattern = DetectionPattern::coincidence(u.n_modes(), oc, ot)?;
        total += outcome_probability(input, u, &pattern, gram)?;
    }
    Ok(total)
}
