//! Hardware imperfections: the parasitic C-phase riding on every two-qubit
//! gate, and classical readout bit-flips.

use crate::circuit::{Circuit, Moment, NativeGate};
use crate::shots::ShotTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Native two-qubit gates carry exp(-i phi/4 (1-Z1)(1-Z2)) with
/// phi = 0.138 +- 0.015 on the modelled hardware; readout misreads |0> at
/// about 2% and |1> at about 7%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub cphase_phi_mean: f64,
    #[serde(default)]
    pub cphase_phi_spread: f64,
    #[serde(default)]
    pub readout_p0: f64,
    #[serde(default)]
    pub readout_p1: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseParams {
    pub fn cphase(phi: f64) -> Self {
        Self {
            cphase_phi_mean: phi,
            cphase_phi_spread: 0.0,
            readout_p0: 0.0,
            readout_p1: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, p) in [("readout_p0", self.readout_p0), ("readout_p1", self.readout_p1)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(crate::Error::Config(format!(
                    "{name} = {p} outside [0, 1]"
                )));
            }
        }
        if self.cphase_phi_spread < 0.0 {
            return Err(crate::Error::Config(format!(
                "cphase_phi_spread = {} is negative",
                self.cphase_phi_spread
            )));
        }
        Ok(())
    }

    fn sample_phi(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.cphase_phi_spread == 0.0 {
            self.cphase_phi_mean
        } else {
            rng.gen_range(
                self.cphase_phi_mean - self.cphase_phi_spread
                    ..=self.cphase_phi_mean + self.cphase_phi_spread,
            )
        }
    }
}

/// Attach a C-phase residual to every two-qubit gate, inside the same
/// moment, directly after its parent. Moment count and the ordering of the
/// ideal gates are unchanged; with zero spread every residual carries the
/// mean angle, otherwise angles are drawn per gate from the seeded stream.
pub fn apply_cphase_noise(circuit: &Circuit, noise: &NoiseParams) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = Circuit::empty(circuit.num_qubits);
    out.global_phase = circuit.global_phase;
    for moment in &circuit.moments {
        let mut gates = Vec::with_capacity(moment.gates.len() * 2);
        for gate in &moment.gates {
            gates.push(gate.clone());
            if let NativeGate::SqrtISwapDag { a, b } = *gate {
                gates.push(NativeGate::CPhaseResidual {
                    a,
                    b,
                    phi: noise.sample_phi(&mut rng),
                });
            }
        }
        out.moments.push(Moment { gates });
    }
    out
}

/// Independently flip each measured bit: 0 -> 1 with probability p0,
/// 1 -> 0 with probability p1. Deterministic per seed.
pub fn apply_readout_noise(shots: &ShotTable, noise: &NoiseParams) -> ShotTable {
    if noise.readout_p0 == 0.0 && noise.readout_p1 == 0.0 {
        return shots.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed.wrapping_add(0x5eed_0f1d));
    let l = shots.num_qubits();
    let rows = shots
        .rows()
        .iter()
        .map(|&row| {
            let mut out = row;
            for q in 0..l {
                let bit = (row >> q) & 1;
                let p = if bit == 0 { noise.readout_p0 } else { noise.readout_p1 };
                if p > 0.0 && rng.gen::<f64>() < p {
                    out ^= 1 << q;
                }
            }
            out
        })
        .collect();
    ShotTable::new(rows, l, shots.basis())
}
