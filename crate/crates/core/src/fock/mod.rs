//! Fock-space linear optics.
//!
//! Modes are flat indices `0..n_modes`; [`ModeIndex`] names them as a
//! (spatial rail, polarization) pair. A [`ModeUnitary`] maps creation
//! operators as `a†_j -> sum_k U[k][j] b†_k`, so column `j` is the output
//! amplitude vector of a photon injected in mode `j`.
//!
//! Partial distinguishability is handled for two photons only: with squared
//! internal-state overlap `M` the detection probability is
//! `M * P_indist + (1 - M) * P_dist`. For `M` of exactly 0 or 1 any photon
//! number works, through permanents of `U` or of `|U|^2` respectively.

mod detection;
mod permanent;
mod state;
mod unitary;

pub use detection::{
    outcome_probability, post_selected_map, post_selection_probability, DetectionPattern,
    DualRailEncoding,
};
pub use permanent::{permanent, MAX_PERMANENT_SIZE};
pub use state::{FockAmplitudes, GramMatrix, InternalLabel, Photon, PhotonicState, Term};
pub use unitary::{beamsplitter, ModeUnitary, UNITARITY_TOLERANCE};

/// Amplitudes below this modulus are dropped while expanding superpositions.
/// Numerical cutoff only.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// A (spatial rail, polarization) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub spatial: u8,
    pub polarization: Polarization,
}

impl ModeIndex {
    pub const fn new(spatial: u8, polarization: Polarization) -> Self {
        ModeIndex {
            spatial,
            polarization,
        }
    }

    pub fn flat(self) -> usize {
        2 * self.spatial as usize + self.polarization.index()
    }

    pub fn from_flat(index: usize) -> Self {
        let polarization = if index % 2 == 0 {
            Polarization::H
        } else {
            Polarization::V
        };
        ModeIndex {
            spatial: (index / 2) as u8,
            polarization,
        }
    }
}

impl From<ModeIndex> for usize {
    fn from(m: ModeIndex) -> usize {
        m.flat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_index_round_trip() {
        for i in 0..16 {
            assert_eq!(ModeIndex::from_flat(i).flat(), i);
        }
        assert_eq!(ModeIndex::new(1, Polarization::V).flat(), 3);
    }
}
