use alloc::vec::Vec;

use libm::sqrt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Construction-time unitarity check. Products of the few dozen elements in
/// a circuit stay well inside this.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Linear transfer matrix over optical modes, `U[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    matrix: CMatrix,
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let u = ModeUnitary { matrix };
        if u.unitarity_error() > UNITARITY_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: "not unitary within 1e-12",
            });
        }
        Ok(u)
    }

    pub fn identity(n_modes: usize) -> Self {
        ModeUnitary {
            matrix: CMatrix::identity(n_modes),
        }
    }

    /// Places a 2x2 block on modes `(a, b)` of an `n_modes` identity.
    pub fn embed(block: [[Complex64; 2]; 2], a: usize, b: usize, n_modes: usize) -> Result<Self> {
        for index in [a, b] {
            if index >= n_modes {
                return Err(Error::ModeOutOfRange { index, n_modes });
            }
        }
        if a == b {
            return Err(Error::SameMode(a));
        }
        let mut m = CMatrix::identity(n_modes);
        m[(a, a)] = block[0][0];
        m[(a, b)] = block[0][1];
        m[(b, a)] = block[1][0];
        m[(b, b)] = block[1][1];
        ModeUnitary::new(m)
    }

    /// Exchanges two modes.
    pub fn swap(a: usize, b: usize, n_modes: usize) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        ModeUnitary::embed([[zero, one], [one, zero]], a, b, n_modes)
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Amplitude for a photon entering `input` to leave in `output`.
    pub fn get(&self, output: usize, input: usize) -> Complex64 {
        self.matrix[(output, input)]
    }

    /// `next` applied after `self`.
    pub fn then(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        if next.n_modes() != self.n_modes() {
            return Err(Error::Dimension {
                expected: self.n_modes(),
                got: next.n_modes(),
            });
        }
        Ok(ModeUnitary {
            matrix: next.matrix.matmul(&self.matrix)?,
        })
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry of `|U U† - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.n_modes();
        let prod = self
            .matrix
            .matmul(&self.matrix.adjoint())
            .expect("square matrix");
        prod.max_abs_diff(&CMatrix::identity(n))
    }

    /// Output amplitudes of a single photon prepared as `amplitudes` over
    /// the input modes.
    pub fn propagate(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.mul_vec(amplitudes)
    }
}

/// Beamsplitter of intensity reflectivity `reflectivity` between modes
/// `mode_a` and `mode_b`, embedded in `n_modes`.
///
/// The block is `[[t, r], [r, -t]]` with `t = sqrt(1 - R)` and `r = sqrt(R)`,
/// so a photon stays in its own mode with amplitude `t` and crosses with `r`.
/// Two photons entering one per port leave one per port with amplitude
/// `r^2 - t^2 = 2R - 1`.
pub fn beamsplitter(
    reflectivity: f64,
    mode_a: usize,
    mode_b: usize,
    n_modes: usize,
) -> Result<ModeUnitary> {
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::Reflectivity(reflectivity));
    }
    let t = Complex64::new(sqrt(1.0 - reflectivity), 0.0);
    let r = Complex64::new(sqrt(reflectivity), 0.0);
    ModeUnitary::embed([[t, r], [r, -t]], mode_a, mode_b, n_modes)
}
