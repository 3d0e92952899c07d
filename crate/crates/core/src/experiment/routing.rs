//! Detector routing probabilities of the gate for one input and analysis
//! setting.

use crate::error::Result;
use crate::fock::FockAmplitudes;
use crate::gate::{
    input_pair, AnalysisSetting, GateCircuit, InputState, CONTROL_H, TARGET_H,
};

/// Index 0 is the control-output detector, 1 the target-output detector.
pub type DetectorPair = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct GateRouting {
    /// Single photon entering the control input.
    pub control_port: DetectorPair,
    /// Single photon entering the target input.
    pub target_port: DetectorPair,
    /// Indistinguishable pair, one photon per input: probability of
    /// `[n_control][n_target]` detector photon numbers.
    pub pair_indist: [[f64; 3]; 3],
    pub overlap: f64,
}

impl GateRouting {
    pub fn new(
        circuit: &GateCircuit,
        input: InputState,
        analysis: AnalysisSetting,
        overlap: f64,
    ) -> Result<Self> {
        let u = circuit.setup_unitary(input, analysis)?;
        let (c, t) = analysis.detector_modes();
        let single = |mode: usize| -> Result<DetectorPair> {
            let mut amps = alloc::vec![crate::Complex64::new(0.0, 0.0); u.n_modes()];
            amps[mode] = crate::Complex64::new(1.0, 0.0);
            let out = u.propagate(&amps)?;
            Ok([out[c].norm_sqr(), out[t].norm_sqr()])
        };
        let FockAmplitudes(amps) = input_pair().evolve(&u)?;
        let mut pair_indist = [[0.0; 3]; 3];
        for (occ, a) in &amps {
            pair_indist[occ[c] as usize][occ[t] as usize] += a.norm_sqr();
        }
        Ok(GateRouting {
            control_port: single(CONTROL_H)?,
            target_port: single(TARGET_H)?,
            pair_indist,
            overlap,
        })
    }

    /// Coincidence probability for distinguishable photons, one per input.
    pub fn pair_coincidence_distinguishable(&self) -> f64 {
        self.control_port[0] * self.target_port[1] + self.control_port[1] * self.target_port[0]
    }

    /// Coincidence probability for one photon per input with overlap `m`.
    pub fn pair_coincidence(&self, m: f64) -> f64 {
        m * self.pair_indist[1][1] + (1.0 - m) * self.pair_coincidence_distinguishable()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{build_cnot, LOGICAL_BASIS};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pair_coincidence_matches_gate() {
        let circuit = build_cnot();
        for input in LOGICAL_BASIS {
            for analysis in LOGICAL_BASIS {
                let r = GateRouting::new(&circuit, input, analysis, 0.3).unwrap();
                let direct = circuit.coincidence_probability(input, analysis, 0.3).unwrap();
                assert_abs_diff_eq!(r.pair_coincidence(0.3), direct, epsilon = 1e-12);
                let total: f64 = r.pair_indist.iter().flatten().sum();
                assert!(total <= 1.0 + 1e-12);
            }
        }
    }
}
