//! Dense matrix machinery: Kronecker embeddings, Hermitian matrix
//! exponentials and operator norms.
//!
//! This is the ground-truth path for small registers. It is deliberately
//! independent of the strided statevector kernels and of the Krylov
//! propagator: embeddings are built element-by-element from the bit layout
//! and exponentials go through a full eigendecomposition.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{StateVector, Unitary2, Unitary4};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense paths refuse registers above this size (2^12 x 2^12 complex).
pub const MAX_DENSE_QUBITS: usize = 12;

pub fn check_dense_size(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_DENSE_QUBITS {
        return Err(Error::ResourceCap(format!(
            "dense path limited to {MAX_DENSE_QUBITS} qubits, got {num_qubits}"
        )));
    }
    Ok(())
}

/// Embed a single-qubit unitary at qubit `q` of an L-qubit register.
pub fn embed_1q(u: &Unitary2, q: usize, num_qubits: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(num_qubits)?;
    let dim = 1usize << num_qubits;
    let bit = 1usize << q;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b_in = (col & bit != 0) as usize;
        for b_out in 0..2 {
            let row = (col & !bit) | (b_out << q);
            m[(row, col)] = u.m[b_out][b_in];
        }
    }
    Ok(m)
}

/// Embed a two-qubit unitary; `q1` is the low bit of the 2-bit subindex.
pub fn embed_2q(u: &Unitary4, q1: usize, q2: usize, num_qubits: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(num_qubits)?;
    if q1 == q2 {
        return Err(Error::QubitIndexClash(q1));
    }
    let dim = 1usize << num_qubits;
    let b1 = 1usize << q1;
    let b2 = 1usize << q2;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let s_in = (col & b1 != 0) as usize + 2 * (col & b2 != 0) as usize;
        for s_out in 0..4 {
            let mut row = col & !(b1 | b2);
            if s_out & 1 != 0 {
                row |= b1;
            }
            if s_out & 2 != 0 {
                row |= b2;
            }
            m[(row, col)] = u.m[s_out][s_in];
        }
    }
    Ok(m)
}

/// Dense matrix of a sparse Pauli string.
pub fn pauli_string_dense(string: &PauliString, num_qubits: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(num_qubits)?;
    let dim = 1usize << num_qubits;
    let mut x_mask = 0usize;
    let mut sign_mask = 0usize;
    let mut n_y = 0u32;
    for (q, p) in string.iter() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits,
            });
        }
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
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = col ^ x_mask;
        let sign = if (col & sign_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        m[(row, col)] = phase * sign;
    }
    Ok(m)
}

/// Dense Hermitian matrix of a Pauli sum.
pub fn pauli_sum_dense(sum: &PauliSum, num_qubits: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(num_qubits)?;
    let dim = 1usize << num_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for (coeff, string) in sum.terms() {
        m += pauli_string_dense(string, num_qubits)?
            * Complex64::new(*coeff, 0.0);
    }
    Ok(m)
}

/// exp(scale * H) for Hermitian H via eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<Complex64>, scale: Complex64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut exp_diag = DMatrix::zeros(dim, dim);
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        exp_diag[(i, i)] = (scale * lambda).exp();
    }
    &eig.eigenvectors * exp_diag * eig.eigenvectors.adjoint()
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values()[0]
}

/// Operator norm of [A, B].
pub fn commutator_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    operator_norm(&(a * b - b * a))
}

/// min over phases of ||A - e^{i phi} B||, with the optimal phase taken from
/// tr(B^dagger A).
pub fn phase_aligned_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let tr = (b.adjoint() * a).trace();
    let phase = if tr.norm() < 1e-300 {
        Complex64::new(1.0, 0.0)
    } else {
        tr / tr.norm()
    };
    operator_norm(&(a - b * phase))
}

/// Statevector as a dense column.
pub fn state_to_vector(state: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(state.amplitudes())
}

/// Elementwise max |a_i - b_i| between a statevector and a dense column.
pub fn max_amplitude_error(state: &StateVector, v: &DVector<Complex64>) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn random_unitary2(rng: &mut ChaCha8Rng) -> Unitary2 {
        // Random SU(2) from three angles.
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let (a, b): (f64, f64) = (rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28));
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        Unitary2::new([
            [
                Complex64::from_polar(ct, a),
                Complex64::from_polar(st, b),
            ],
            [
                Complex64::from_polar(-st, -b),
                Complex64::from_polar(ct, -a),
            ],
        ])
        .unwrap()
    }

    #[test]
    fn embed_x_matches_direct() {
        let x = Unitary2::new([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let m = embed_1q(&x, 1, 2).unwrap();
        // X on qubit 1: |00> -> |10> (index 0 -> 2).
        assert_eq!(m[(2, 0)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn pauli_y_dense() {
        let m = pauli_string_dense(&PauliString::single(0, Pauli::Y), 1).unwrap();
        assert_eq!(m[(1, 0)], c(0.0, 1.0));
        assert_eq!(m[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let h = DMatrix::<Complex64>::zeros(4, 4);
        let u = expm_hermitian(&h, c(0.0, -1.0));
        assert!((operator_norm(&(u - DMatrix::identity(4, 4)))) < 1e-12);
    }

    #[test]
    fn expm_pauli_z_rotation() {
        // exp(-i t Z) = diag(e^-it, e^it).
        let z = pauli_string_dense(&PauliString::single(0, Pauli::Z), 1).unwrap();
        let t = 0.37;
        let u = expm_hermitian(&z, c(0.0, -t));
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -t)).norm() < 1e-12);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, t)).norm() < 1e-12);
    }

    #[test]
    fn random_1q_kernel_matches_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let u = random_unitary2(&mut rng);
            let q = rng.gen_range(0..3);
            let mut sv = StateVector::zero_state(3).unwrap();
            // Scramble the state a little first.
            for k in 0..3 {
                let r = random_unitary2(&mut rng);
                sv.apply_1q(&r, k).unwrap();
            }
            let dense_in = state_to_vector(&sv);
            sv.apply_1q(&u, q).unwrap();
            let expected = embed_1q(&u, q, 3).unwrap() * dense_in;
            assert!(max_amplitude_error(&sv, &expected) < 1e-12);
        }
    }

    #[test]
    fn phase_aligned_distance_ignores_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = embed_1q(&random_unitary2(&mut rng), 0, 2).unwrap();
        let v = &u * c(0.0, 1.0);
        assert!(phase_aligned_distance(&u, &v) < 1e-12);
    }
}
