use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use num_complex::Complex64;

use super::unitary::ModeUnitary;
use super::PRUNE_THRESHOLD;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Key into a [`GramMatrix`] row: photons with the same label are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InternalLabel(pub usize);

/// Pairwise overlaps `<phi_i|phi_j>` of the photons' internal (spectral and
/// temporal) states.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(CMatrix);

impl GramMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        const TOL: f64 = 1e-12;
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        for i in 0..n {
            if (m[(i, i)] - Complex64::new(1.0, 0.0)).norm() > TOL {
                return Err(Error::InvalidGram("diagonal must be 1"));
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > TOL {
                    return Err(Error::InvalidGram("not Hermitian"));
                }
            }
        }
        if !is_positive_semidefinite(&m) {
            return Err(Error::InvalidGram("not positive semi-definite"));
        }
        Ok(GramMatrix(m))
    }

    /// Every label describes the same internal state.
    pub fn identical(n: usize) -> Self {
        GramMatrix(CMatrix::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0)))
    }

    /// Mutually orthogonal internal states.
    pub fn orthogonal(n: usize) -> Self {
        GramMatrix(CMatrix::identity(n))
    }

    /// Two labels whose squared overlap is the mean wavepacket overlap `m`.
    pub fn two_photon(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidParameter {
                name: "M",
                reason: "mean wavepacket overlap must lie in [0, 1]",
            });
        }
        let s = Complex64::new(sqrt(m), 0.0);
        let one = Complex64::new(1.0, 0.0);
        Ok(GramMatrix(CMatrix::from_rows(&[[one, s], [s, one]])?))
    }

    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }

    pub fn overlap(&self, a: InternalLabel, b: InternalLabel) -> Result<Complex64> {
        for l in [a, b] {
            if l.0 >= self.len() {
                return Err(Error::UnknownLabel(l.0));
            }
        }
        Ok(self.0[(a.0, b.0)])
    }

    pub fn squared_overlap(&self, a: InternalLabel, b: InternalLabel) -> Result<f64> {
        Ok(self.overlap(a, b)?.norm_sqr())
    }
}

fn is_positive_semidefinite(m: &CMatrix) -> bool {
    // Cholesky of m + eps*I; succeeds iff m is PSD up to eps.
    const EPS: f64 = 1e-10;
    let n = m.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + EPS;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = sqrt(d);
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    /// Flat mode index.
    pub mode: usize,
    pub label: InternalLabel,
}

impl Photon {
    pub fn new(mode: impl Into<usize>, label: InternalLabel) -> Self {
        Photon {
            mode: mode.into(),
            label,
        }
    }
}

/// One product term: `amplitude` times the normalized Fock state holding
/// these photons. Photons are identified by list position across terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub amplitude: Complex64,
    pub photons: Vec<Photon>,
}

impl Term {
    pub(crate) fn occupation(&self, n_modes: usize) -> Vec<u8> {
        let mut occ = vec![0u8; n_modes];
        for p in &self.photons {
            occ[p.mode] += 1;
        }
        occ
    }

    /// Input mode of each photon, in list order.
    pub(crate) fn modes(&self) -> Vec<usize> {
        self.photons.iter().map(|p| p.mode).collect()
    }
}

/// Superposition of multi-photon product terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    terms: Vec<Term>,
}

impl PhotonicState {
    pub fn product(photons: Vec<Photon>) -> Self {
        PhotonicState {
            terms: vec![Term {
                amplitude: Complex64::new(1.0, 0.0),
                photons,
            }],
        }
    }

    pub fn superposition(terms: Vec<Term>) -> Result<Self> {
        let n = terms.first().map_or(0, |t| t.photons.len());
        if terms.iter().any(|t| t.photons.len() != n) {
            return Err(Error::Unsupported(
                "superposition terms must carry the same photon number",
            ));
        }
        let state = PhotonicState { terms };
        if state.norm_sqr() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "norm exceeds 1",
            });
        }
        Ok(state)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn n_photons(&self) -> usize {
        self.terms.first().map_or(0, |t| t.photons.len())
    }

    /// Squared norm, with terms describing the same photons in the same
    /// modes added coherently.
    pub fn norm_sqr(&self) -> f64 {
        let mut grouped: BTreeMap<Vec<(usize, usize)>, Complex64> = BTreeMap::new();
        for t in &self.terms {
            let mut key: Vec<(usize, usize)> =
                t.photons.iter().map(|p| (p.mode, p.label.0)).collect();
            key.sort_unstable();
            *grouped.entry(key).or_default() += t.amplitude;
        }
        grouped.values().map(|a| a.norm_sqr()).sum()
    }

    /// Evolves the state treating every photon as an identical boson
    /// (internal labels ignored). Amplitudes are expanded creation operator
    /// by creation operator, so this route never touches a permanent.
    pub fn evolve(&self, u: &ModeUnitary) -> Result<FockAmplitudes> {
        let n_modes = u.n_modes();
        let mut out = BTreeMap::new();
        for term in &self.terms {
            for p in &term.photons {
                if p.mode >= n_modes {
                    return Err(Error::ModeOutOfRange {
                        index: p.mode,
                        n_modes,
                    });
                }
            }
            // coefficients of unnormalized monomials prod (b†_k)^{n_k} |0>
            let in_norm = sqrt(factorial_product(&term.occupation(n_modes)));
            let mut monomials: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            monomials.insert(vec![0u8; n_modes], term.amplitude / in_norm);
            for p in &term.photons {
                let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
                for (occ, coeff) in &monomials {
                    for k in 0..n_modes {
                        let a = *coeff * u.get(k, p.mode);
                        if a.norm() < PRUNE_THRESHOLD {
                            continue;
                        }
                        let mut occ = occ.clone();
                        occ[k] += 1;
                        *next.entry(occ).or_default() += a;
                    }
                }
                monomials = next;
            }
            for (occ, coeff) in monomials {
                let amp = coeff * sqrt(factorial_product(&occ));
                *out.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
            }
        }
        out.retain(|_, a: &mut Complex64| a.norm() >= PRUNE_THRESHOLD);
        Ok(FockAmplitudes(out))
    }
}

/// Output Fock amplitudes keyed by occupation vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockAmplitudes(pub BTreeMap<Vec<u8>, Complex64>);

impl FockAmplitudes {
    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.0.get(occupation).copied().unwrap_or_default()
    }

    pub fn probability(&self, occupation: &[u8]) -> f64 {
        self.amplitude(occupation).norm_sqr()
    }

    pub fn total_probability(&self) -> f64 {
        self.0.values().map(|a| a.norm_sqr()).sum()
    }
}

pub(crate) fn factorial_product(occupation: &[u8]) -> f64 {
    occupation
        .iter()
        .map(|&n| (1..=n as u32).map(f64::from).product::<f64>())
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::beamsplitter;

    #[test]
    fn gram_validation() {
        assert!(GramMatrix::two_photon(0.3).is_ok());
        assert!(GramMatrix::two_photon(1.2).is_err());
        let bad_diag = CMatrix::identity(2).map(|z| z * 2.0);
        assert!(GramMatrix::new(bad_diag).is_err());
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let not_herm = CMatrix::from_rows(&[[one, i], [i, one]]).unwrap();
        assert!(GramMatrix::new(not_herm).is_err());
        // |overlap| > 1 makes the matrix indefinite
        let big = Complex64::new(1.5, 0.0);
        let indefinite = CMatrix::from_rows(&[[one, big], [big, one]]).unwrap();
        assert!(GramMatrix::new(indefinite).is_err());
        // rank-one (identical photons) is allowed
        assert!(GramMatrix::new(GramMatrix::identical(3).0).is_ok());
    }

    #[test]
    fn squared_overlap_is_m() {
        let g = GramMatrix::two_photon(0.64).unwrap();
        let m = g
            .squared_overlap(InternalLabel(0), InternalLabel(1))
            .unwrap();
        assert!((m - 0.64).abs() < 1e-15);
        assert_eq!(
            g.squared_overlap(InternalLabel(0), InternalLabel(2)),
            Err(Error::UnknownLabel(2))
        );
    }

    #[test]
    fn evolve_conserves_photon_number_and_norm() {
        let u = beamsplitter(0.5, 0, 1, 3).unwrap();
        let s = PhotonicState::product(vec![
            Photon::new(0usize, InternalLabel(0)),
            Photon::new(1usize, InternalLabel(0)),
        ]);
        let out = s.evolve(&u).unwrap();
        assert!((out.total_probability() - 1.0).abs() < 1e-12);
        for occ in out.0.keys() {
            assert_eq!(occ.iter().map(|&n| n as usize).sum::<usize>(), 2);
        }
        // Hong-Ou-Mandel: no |1,1> component
        assert!(out.probability(&[1, 1, 0]) < 1e-28);
        assert!((out.probability(&[2, 0, 0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn superposition_norm_checked() {
        let t = |amp: f64, mode: usize| Term {
            amplitude: Complex64::new(amp, 0.0),
            photons: vec![Photon::new(mode, InternalLabel(0))],
        };
        assert!(PhotonicState::superposition(vec![t(0.6, 0), t(0.8, 1)]).is_ok());
        assert!(PhotonicState::superposition(vec![t(0.9, 0), t(0.9, 1)]).is_err());
        // same mode: amplitudes add before squaring
        let s = PhotonicState::superposition(vec![t(0.3, 0), t(0.3, 0)]).unwrap();
        assert!((s.norm_sqr() - 0.36).abs() < 1e-15);
    }
}
