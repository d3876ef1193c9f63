//! Measured bitstrings.

use serde::{Deserialize, Serialize};

/// Basis the qubits were measured in. `GaugeX` means the gauge qubits were
/// rotated so that the recorded bit encodes the tau^x eigenvalue; matter
/// qubits are always read in the computational (sigma^z) basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    Computational,
    GaugeX,
}

/// Sampled measurement outcomes; each row packs the L measured bits with
/// qubit k at bit k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotTable {
    rows: Vec<u64>,
    num_qubits: usize,
    basis: MeasurementBasis,
}

impl ShotTable {
    pub fn new(rows: Vec<u64>, num_qubits: usize, basis: MeasurementBasis) -> Self {
        debug_assert!(num_qubits <= 64);
        Self {
            rows,
            num_qubits,
            basis,
        }
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn n_shots(&self) -> usize {
        self.rows.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn basis(&self) -> MeasurementBasis {
        self.basis
    }

    pub fn with_basis(mut self, basis: MeasurementBasis) -> Self {
        self.basis = basis;
        self
    }

    /// Measured bit of `qubit` in `row`.
    pub fn bit(&self, row: u64, qubit: usize) -> u8 {
        ((row >> qubit) & 1) as u8
    }

    /// Eigenvalue (+1/-1) recorded for `qubit` in `row` (bit b -> 1 - 2b).
    pub fn eigenvalue(&self, row: u64, qubit: usize) -> i32 {
        1 - 2 * i32::from(self.bit(row, qubit))
    }
}
