//! Numerically exact time evolution: matrix-free Pauli-sum Hamiltonians and
//! a Lanczos propagator with adaptive substeps. Serves as ground truth for
//! the Trotterized circuits.

use crate::dense;
use crate::error::{Error, Result};
use crate::lattice::{pauli_term_list, LatticeSpec, Model, ModelParams};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::StateVector;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Matrix-free application is capped here; memory stays modest because only
/// Krylov basis vectors are materialized.
pub const MAX_MATRIX_FREE_QUBITS: usize = 24;

/// Dense materialization cap: 2^12 x 2^12 complex doubles is 256 MiB;
/// anything larger does not fit desk-scale memory.
pub const MAX_DENSE_HAMILTONIAN_QUBITS: usize = 12;

/// Per-substep Lanczos residual tolerance.
const KRYLOV_TOL: f64 = 1e-10;

/// One Pauli string compiled to masks; see `state::CompiledPauli` for the
/// sign/phase conventions (kept separate: this path must stay independent of
/// the gate kernels it cross-checks).
#[derive(Debug, Clone, Copy)]
struct MaskedTerm {
    /// Real coefficient times i^{#Y}; Hermitian sums always combine the
    /// imaginary phases pairwise, but individual strings carry them.
    weight: Complex64,
    x_mask: usize,
    sign_mask: usize,
}

/// Hermitian operator as a list of masked Pauli terms over 2^L amplitudes.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    num_qubits: usize,
    terms: Vec<MaskedTerm>,
}

impl SparseHamiltonian {
    pub fn from_pauli_sum(sum: &PauliSum, num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_MATRIX_FREE_QUBITS {
            return Err(Error::ResourceCap(format!(
                "Hamiltonian application limited to {MAX_MATRIX_FREE_QUBITS} qubits, got {num_qubits}"
            )));
        }
        if let Some(q) = sum.max_qubit() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        let mut terms = Vec::with_capacity(sum.len());
        for (coeff, string) in sum.terms() {
            let mut x_mask = 0usize;
            let mut sign_mask = 0usize;
            let mut n_y = 0u32;
            for (q, p) in string.iter() {
                match p {
                    Pauli::X => x_mask |= 1 << q,
                    Pauli::Y => {
                        x_mask |= 1 << q;
                        sign_mask |= 1 << q;
                        n_y += 1;
                    }
                    Pauli::Z => sign_mask |= 1 << q,
                }
            }
            let phase = Complex64::new(0.0, 1.0).powu(n_y);
            terms.push(MaskedTerm {
                weight: phase * coeff,
                x_mask,
                sign_mask,
            });
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// out += H * input.
    pub fn apply_accumulate(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), 1 << self.num_qubits);
        debug_assert_eq!(out.len(), input.len());
        let terms = &self.terms;
        let kernel = |row: usize, acc: &mut Complex64| {
            for t in terms {
                let src = row ^ t.x_mask;
                // <row|P|src> with src = row ^ x_mask: the sign is evaluated
                // on the source basis state.
                let sign = if (src & t.sign_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *acc += t.weight * sign * input[src];
            }
        };
        if out.len() >= (1 << 17) {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(row, acc)| kernel(row, acc));
        } else {
            out.iter_mut()
                .enumerate()
                .for_each(|(row, acc)| kernel(row, acc));
        }
    }

    /// H * input as a fresh vector.
    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
        self.apply_accumulate(input, &mut out);
        out
    }

    /// <psi|H|psi>.
    pub fn expect(&self, state: &StateVector) -> f64 {
        let h_psi = self.apply(state.amplitudes());
        state
            .amplitudes()
            .iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Dense matrix (small registers only).
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.num_qubits > MAX_DENSE_HAMILTONIAN_QUBITS {
            return Err(Error::ResourceCap(format!(
                "dense Hamiltonian limited to {MAX_DENSE_HAMILTONIAN_QUBITS} qubits, got {}",
                self.num_qubits
            )));
        }
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for col in 0..dim {
                let row = col ^ t.x_mask;
                let sign = if (col & t.sign_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[(row, col)] += t.weight * sign;
            }
        }
        Ok(m)
    }
}

/// Build the model Hamiltonian on the qubit layout.
pub fn build_hamiltonian(
    params: &ModelParams,
    model: Model,
    lattice: &LatticeSpec,
) -> Result<SparseHamiltonian> {
    let sum = pauli_term_list(params, model, lattice)?;
    SparseHamiltonian::from_pauli_sum(&sum, lattice.num_qubits())
}

fn krylov_dim_for(num_qubits: usize) -> usize {
    // Basis vectors dominate memory at large L (each 2^L * 16 bytes).
    if num_qubits >= 20 {
        20
    } else {
        25
    }
}

/// e^{-iHt}|psi> by Lanczos projection with adaptive substeps.
///
/// Each substep builds an orthonormal Krylov basis (full reorthogonalization)
/// and exponentiates the projected tridiagonal matrix; the substep is halved
/// whenever the standard residual estimate beta_m |[e^{-i dt T}]_{m,1}|
/// exceeds the tolerance.
pub fn evolve_exact(state: &StateVector, h: &SparseHamiltonian, t: f64) -> Result<StateVector> {
    if state.num_qubits() != h.num_qubits() {
        return Err(Error::Config(format!(
            "state has {} qubits, Hamiltonian has {}",
            state.num_qubits(),
            h.num_qubits()
        )));
    }
    let mut out = state.clone();
    if t == 0.0 {
        return Ok(out);
    }
    let m_max = krylov_dim_for(h.num_qubits()).min(state.len());
    let mut remaining = t.abs();
    let direction = t.signum();
    let mut substep = remaining;
    let min_substep = t.abs() * 1e-12;
    while remaining > 1e-15 * t.abs() {
        let dt = substep.min(remaining) * direction;
        match lanczos_step(out.amplitudes(), h, dt, m_max)? {
            Some(next) => {
                out.amplitudes_mut().copy_from_slice(&next);
                remaining -= dt.abs();
            }
            None => {
                substep /= 2.0;
                if substep < min_substep {
                    return Err(Error::Convergence(format!(
                        "Krylov substep shrank below {min_substep:e} without meeting tolerance"
                    )));
                }
            }
        }
    }
    Ok(out)
}

/// One Lanczos substep; returns None when the residual estimate fails.
fn lanczos_step(
    input: &[Complex64],
    h: &SparseHamiltonian,
    dt: f64,
    m_max: usize,
) -> Result<Option<Vec<Complex64>>> {
    let dim = input.len();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
    let mut betas: Vec<f64> = Vec::with_capacity(m_max);

    let norm0 = l2_norm(input);
    if norm0 == 0.0 {
        return Err(Error::Convergence("zero state".into()));
    }
    basis.push(input.iter().map(|a| a / norm0).collect());

    let mut happy = false;
    for j in 0..m_max {
        let mut w = h.apply(&basis[j]);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        axpy(&mut w, -Complex64::new(alpha, 0.0), &basis[j]);
        if j > 0 {
            axpy(&mut w, -Complex64::new(betas[j - 1], 0.0), &basis[j - 1]);
        }
        // Full reorthogonalization keeps the basis orthonormal to machine
        // precision at these subspace sizes.
        for v in &basis {
            let overlap = dot(v, &w);
            axpy(&mut w, -overlap, v);
        }
        let beta = l2_norm(&w);
        if beta < 1e-12 {
            happy = true;
            break;
        }
        if j + 1 < m_max {
            betas.push(beta);
            basis.push(w.iter().map(|a| a / beta).collect());
        } else {
            betas.push(beta);
        }
    }

    let m = alphas.len();
    // exp(-i dt T) e1 through the real symmetric tridiagonal eigenproblem.
    let mut tri = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alphas[i];
        if i + 1 < m {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let eig = tri.symmetric_eigen();
    let mut w_small = DVector::<Complex64>::zeros(m);
    for col in 0..m {
        let phase = Complex64::from_polar(1.0, -dt * eig.eigenvalues[col]);
        let first = eig.eigenvectors[(0, col)];
        for row in 0..m {
            w_small[row] += eig.eigenvectors[(row, col)] * first * phase;
        }
    }

    if !happy {
        let residual = betas[m - 1] * w_small[m - 1].norm();
        if residual > KRYLOV_TOL {
            return Ok(None);
        }
    }

    let mut result = vec![Complex64::new(0.0, 0.0); dim];
    for (j, v) in basis.iter().enumerate() {
        let coeff = w_small[j] * norm0;
        if coeff.norm() == 0.0 {
            continue;
        }
        for (r, x) in result.iter_mut().zip(v) {
            *r += coeff * x;
        }
    }
    Ok(Some(result))
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// <a|b> with conjugation on the first argument.
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Medium-time averaged deviation of the electric field between Trotterized
/// and exact dynamics, Delta_E(dt) = (1/m) sum_{k=1..m} |E_dt(k dt) - E_0(k dt)|
/// with m = floor(t_f / dt), starting from the half-filling state.
///
/// Returns one (dt, Delta_E) row per grid entry. The model is the Z2 theory,
/// with protection included when the parameters carry a nonzero V.
pub fn trotter_error_study(
    params: &ModelParams,
    lattice: &LatticeSpec,
    dt_grid: &[f64],
    t_f: f64,
) -> Result<Vec<(f64, f64)>> {
    use crate::compile::build_trotter_step;
    use crate::lattice::{build_initial_state, InitialStateKind};
    use crate::observables::electric_field;

    let model = if params.protection_v == 0.0 {
        Model::Z2
    } else {
        Model::Z2Protected
    };
    let initial = build_initial_state(InitialStateKind::HalfFilling, lattice)?;
    let psi0 = StateVector::from_product_state(&initial, lattice)?;
    let mut table = Vec::with_capacity(dt_grid.len());
    for &dt in dt_grid {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt grid entry {dt} not positive")));
        }
        let steps = (t_f / dt + 1e-9).floor() as usize;
        if steps == 0 {
            return Err(Error::Config(format!(
                "dt = {dt} exceeds the final time {t_f}"
            )));
        }
        let mut p = params.clone();
        p.dt = dt;
        p.n_steps = steps;
        let h = build_hamiltonian(&p, model, lattice)?;
        let step_circuit = build_trotter_step(&p, lattice)?;
        let mut trotter = psi0.clone();
        let mut exact = psi0.clone();
        let mut acc = 0.0;
        for _ in 1..=steps {
            step_circuit.apply_to(&mut trotter)?;
            exact = evolve_exact(&exact, &h, dt)?;
            acc += (electric_field(&trotter, lattice)? - electric_field(&exact, lattice)?).abs();
        }
        table.push((dt, acc / steps as f64));
    }
    Ok(table)
}

/// Dense reference propagation for cross-checks: e^{-iHt}|psi> via full
/// eigendecomposition.
pub fn evolve_dense(state: &StateVector, h: &SparseHamiltonian, t: f64) -> Result<StateVector> {
    dense::check_dense_size(h.num_qubits())?;
    let hd = h.to_dense()?;
    let u = dense::expm_hermitian(&hd, Complex64::new(0.0, -t));
    let v = u * dense::state_to_vector(state);
    let mut out = state.clone();
    out.amplitudes_mut().copy_from_slice(v.as_slice());
    Ok(out)
}
