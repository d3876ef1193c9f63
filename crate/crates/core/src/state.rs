//! In-place statevector kernels: 1- and 2-qubit unitary application, Pauli
//! expectation values and measurement sampling.
//!
//! Amplitudes are stored little-endian: qubit k is bit k of the basis index.
//! For two-qubit gates the 4x4 matrix is indexed by the subindex
//! s = bit(q1) + 2*bit(q2), i.e. q1 is the low bit.
//!
//! Kernels partition the amplitude array across rayon workers with no
//! overlapping writes once the state exceeds [`PARALLEL_THRESHOLD`]
//! amplitudes; below that everything runs on the calling thread.

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ProductState};
use crate::pauli::{Pauli, PauliString};
use crate::shots::{MeasurementBasis, ShotTable};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Hard cap on the simulated register size (2^26 amplitudes = 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Minimum amplitude count before kernels fan out across threads.
const PARALLEL_THRESHOLD: usize = 1 << 17;

const UNITARITY_TOL: f64 = 1e-12;

/// Magic bytes of the amplitude dump format.
const DUMP_MAGIC: &[u8; 4] = b"GSSV";

/// Shared mutable pointer for partitioned writes; disjointness is the
/// caller's responsibility.
#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    // Accessor instead of field access so closures capture the wrapper,
    // not the raw pointer.
    fn get(self) -> *mut Complex64 {
        self.0
    }
}

/// Dense 2x2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[Complex64; 2]; 2],
}

/// Dense 4x4 unitary over the subindex s = bit(q1) + 2*bit(q2).
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary4 {
    pub m: [[Complex64; 4]; 4],
}

fn unitarity_deviation<const N: usize>(m: &[[Complex64; N]; N]) -> f64 {
    let mut dev = 0.0f64;
    for r in 0..N {
        for c in 0..N {
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..N {
                dot += m[k][r].conj() * m[k][c];
            }
            let expected = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((dot - expected).norm());
        }
    }
    dev
}

impl Unitary2 {
    /// Checked constructor: rejects matrices with U^dagger U far from identity.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: UNITARITY_TOL,
            });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self { m: [[o, z], [z, o]] }
    }
}

impl Unitary4 {
    pub fn new(m: [[Complex64; 4]; 4]) -> Result<Self> {
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: UNITARITY_TOL,
            });
        }
        Ok(Self { m })
    }

    /// The same operator with the roles of the two qubits exchanged
    /// (conjugation by SWAP on the subindex).
    pub fn swapped(&self) -> Self {
        let perm = [0usize, 2, 1, 3];
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.m[perm[r]][perm[c]];
            }
        }
        Self { m }
    }
}

/// 2^L complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// |0...0> on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "qubit count {num_qubits} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, num_qubits })
    }

    /// Basis state |index>.
    pub fn basis_state(num_qubits: usize, index: u64) -> Result<Self> {
        let mut s = Self::zero_state(num_qubits)?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Product state with matter qubits in sigma^z eigenstates and gauge
    /// qubits in tau^x eigenstates (built directly, without gates).
    pub fn from_product_state(state: &ProductState, lattice: &LatticeSpec) -> Result<Self> {
        let l = lattice.num_qubits();
        if state.matter_z.len() != lattice.n_matter() || state.gauge_x.len() != lattice.num_links()
        {
            return Err(Error::Config(
                "product state dimensions do not match lattice".into(),
            ));
        }
        let mut s = Self::zero_state(l)?;
        // Matter bit: |0> for sigma^z = +1, |1> for -1; fixed per basis state.
        let mut matter_mask = 0u64;
        for (site, &mz) in state.matter_z.iter().enumerate() {
            if mz == -1 {
                matter_mask |= 1 << lattice.matter_qubit(site);
            }
        }
        // Gauge qubits carry (|0> +- |1>)/sqrt(2).
        let gauge_qubits: Vec<(usize, f64)> = state
            .gauge_x
            .iter()
            .enumerate()
            .map(|(link, &gx)| (lattice.gauge_qubit(link), f64::from(gx)))
            .collect();
        let norm = (1.0 / 2.0f64.powi(gauge_qubits.len() as i32)).sqrt();
        s.amps[0] = Complex64::new(0.0, 0.0);
        for g_bits in 0u64..(1 << gauge_qubits.len()) {
            let mut index = matter_mask;
            let mut sign = 1.0;
            for (pos, &(q, gx)) in gauge_qubits.iter().enumerate() {
                if (g_bits >> pos) & 1 == 1 {
                    index |= 1 << q;
                    sign *= gx;
                }
            }
            s.amps[index as usize] = Complex64::new(sign * norm, 0.0);
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.par_iter().map(Complex64::norm_sqr).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Apply a single-qubit unitary to qubit `q`.
    pub fn apply_1q(&mut self, u: &Unitary2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let m = u.m;
        let pairs = self.amps.len() / 2;
        let low_mask = bit - 1;
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let kernel = move |p: usize| {
            let i0 = ((p & !low_mask) << 1) | (p & low_mask);
            let i1 = i0 | bit;
            // SAFETY: distinct p map to distinct (i0, i1) pairs.
            unsafe {
                let a = *ptr.get().add(i0);
                let b = *ptr.get().add(i1);
                *ptr.get().add(i0) = m[0][0] * a + m[0][1] * b;
                *ptr.get().add(i1) = m[1][0] * a + m[1][1] * b;
            }
        };
        if self.amps.len() >= PARALLEL_THRESHOLD {
            (0..pairs).into_par_iter().for_each(kernel);
        } else {
            (0..pairs).for_each(kernel);
        }
        Ok(())
    }

    /// Apply a two-qubit unitary; `q1` is the low bit of the matrix subindex.
    pub fn apply_2q(&mut self, u: &Unitary4, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::QubitIndexClash(q1));
        }
        let b1 = 1usize << q1;
        let b2 = 1usize << q2;
        let lo_mask = (1usize << q1.min(q2)) - 1;
        let hi_mask = (1usize << q1.max(q2)) - 1;
        let groups = self.amps.len() / 4;
        let m = u.m.clone();
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let kernel = move |g: usize| {
            // Spread g over the index bits, leaving zeros at q1 and q2.
            let t = ((g & !lo_mask) << 1) | (g & lo_mask);
            let i00 = ((t & !hi_mask) << 1) | (t & hi_mask);
            let idx = [i00, i00 | b1, i00 | b2, i00 | b1 | b2];
            // SAFETY: distinct g map to disjoint 4-element index groups.
            unsafe {
                let a = [
                    *ptr.get().add(idx[0]),
                    *ptr.get().add(idx[1]),
                    *ptr.get().add(idx[2]),
                    *ptr.get().add(idx[3]),
                ];
                for s_out in 0..4 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (s_in, amp) in a.iter().enumerate() {
                        acc += m[s_out][s_in] * amp;
                    }
                    *ptr.get().add(idx[s_out]) = acc;
                }
            }
        };
        if self.amps.len() >= PARALLEL_THRESHOLD {
            (0..groups).into_par_iter().for_each(kernel);
        } else {
            (0..groups).for_each(kernel);
        }
        Ok(())
    }

    /// <psi|P|psi> for a sparse Pauli string; the empty string gives the
    /// squared norm (1 for normalized states).
    pub fn expect_pauli(&self, string: &PauliString) -> Result<f64> {
        Ok(self.expect_pauli_complex(string)?.re)
    }

    /// Full complex expectation value; Hermitian strings have negligible
    /// imaginary part.
    pub fn expect_pauli_complex(&self, string: &PauliString) -> Result<Complex64> {
        let masks = CompiledPauli::compile(string, self.num_qubits)?;
        let amps = &self.amps;
        let term = |b: usize| -> Complex64 {
            let flipped = b ^ masks.x_mask;
            let sign = if (b & masks.sign_mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            amps[flipped].conj() * amps[b] * sign
        };
        let sum: Complex64 = if amps.len() >= PARALLEL_THRESHOLD {
            (0..amps.len())
                .into_par_iter()
                .map(term)
                .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b)
        } else {
            (0..amps.len()).map(term).sum()
        };
        Ok(sum * masks.phase)
    }

    /// Draw `n_shots` bitstrings i.i.d. from |amplitude|^2.
    ///
    /// Uses inverse-CDF sampling with sorted uniforms from a seeded ChaCha8
    /// stream, so results are identical across platforms and runs.
    pub fn sample_shots(&self, n_shots: usize, seed: u64) -> ShotTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draws: Vec<(f64, usize)> = (0..n_shots)
            .map(|i| (rng.gen::<f64>(), i))
            .collect();
        draws.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut rows = vec![0u64; n_shots];
        let mut cum = 0.0f64;
        let mut next = draws.iter().peekable();
        for (index, amp) in self.amps.iter().enumerate() {
            cum += amp.norm_sqr();
            while let Some(&&(u, shot)) = next.peek() {
                if u < cum {
                    rows[shot] = index as u64;
                    next.next();
                } else {
                    break;
                }
            }
        }
        // Rounding can leave the last draws just above the accumulated total.
        let last = (self.amps.len() - 1) as u64;
        for &(_, shot) in next {
            rows[shot] = last;
        }
        ShotTable::new(rows, self.num_qubits, MeasurementBasis::Computational)
    }

    /// Binary amplitude dump: magic, L as u32, then little-endian f64
    /// (re, im) pairs.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.num_qubits as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Config("bad amplitude dump magic".into()));
        }
        let mut lbuf = [0u8; 4];
        r.read_exact(&mut lbuf)?;
        let num_qubits = u32::from_le_bytes(lbuf) as usize;
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "dump claims {num_qubits} qubits"
            )));
        }
        let mut amps = Vec::with_capacity(1 << num_qubits);
        let mut buf = [0u8; 16];
        for _ in 0..(1usize << num_qubits) {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        Ok(Self { amps, num_qubits })
    }
}

/// Pauli string compiled to bit masks for the kernels: P|b> =
/// phase * (-1)^popcount(b & sign_mask) |b ^ x_mask> with phase = i^{#Y}.
struct CompiledPauli {
    x_mask: usize,
    sign_mask: usize,
    phase: Complex64,
}

impl CompiledPauli {
    fn compile(string: &PauliString, num_qubits: usize) -> Result<Self> {
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
        let phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Ok(Self {
            x_mask,
            sign_mask,
            phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_initial_state, Boundary, InitialStateKind, LatticeSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> Unitary2 {
        Unitary2::new([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]).unwrap()
    }

    #[test]
    fn identity_leaves_state() {
        let mut s = StateVector::basis_state(3, 0b101).unwrap();
        let before = s.clone();
        s.apply_1q(&Unitary2::identity(), 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn pauli_x_flips_bit() {
        let mut s = StateVector::zero_state(3).unwrap();
        s.apply_1q(&pauli_x(), 0).unwrap();
        assert_eq!(s.amplitudes()[0b001], c(1.0, 0.0));
    }

    #[test]
    fn swap_moves_basis_state() {
        // |01> (qubit 0 set) -> |10> under SWAP.
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let swap = Unitary4::new([
            [o, z, z, z],
            [z, z, o, z],
            [z, o, z, z],
            [z, z, z, o],
        ])
        .unwrap();
        let mut s = StateVector::basis_state(2, 0b01).unwrap();
        s.apply_2q(&swap, 0, 1).unwrap();
        assert_eq!(s.amplitudes()[0b10], o);
    }

    #[test]
    fn qubit_clash_rejected() {
        let mut s = StateVector::zero_state(2).unwrap();
        let swap = Unitary4::new([
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            s.apply_2q(&swap, 1, 1),
            Err(Error::QubitIndexClash(1))
        ));
        assert!(s.apply_1q(&Unitary2::identity(), 2).is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let res = Unitary2::new([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]]);
        assert!(matches!(res, Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn expect_z_and_x_on_zero() {
        let s = StateVector::zero_state(1).unwrap();
        assert!((s.expect_pauli(&PauliString::single(0, Pauli::Z)).unwrap() - 1.0).abs() < 1e-15);
        assert!(s.expect_pauli(&PauliString::single(0, Pauli::X)).unwrap().abs() < 1e-15);
        assert!((s.expect_pauli(&PauliString::identity()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_expectations() {
        let lat = LatticeSpec::new(4, Boundary::Periodic).unwrap();
        let ps = build_initial_state(InitialStateKind::Psi3, &lat).unwrap();
        let s = StateVector::from_product_state(&ps, &lat).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        for site in lat.sites() {
            let z = s
                .expect_pauli(&PauliString::single(lat.matter_qubit(site), Pauli::Z))
                .unwrap();
            assert!((z - f64::from(ps.matter_z[site])).abs() < 1e-12);
        }
        for link in lat.links() {
            let x = s
                .expect_pauli(&PauliString::single(lat.gauge_qubit(link), Pauli::X))
                .unwrap();
            assert!((x - f64::from(ps.gauge_x[link])).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_state_shots_are_constant() {
        let s = StateVector::basis_state(4, 0b0110).unwrap();
        let shots = s.sample_shots(100, 7);
        assert!(shots.rows().iter().all(|&r| r == 0b0110));
    }

    #[test]
    fn shots_deterministic_per_seed() {
        let lat = LatticeSpec::new(3, Boundary::Open).unwrap();
        let ps = build_initial_state(InitialStateKind::Defect, &lat).unwrap();
        let s = StateVector::from_product_state(&ps, &lat).unwrap();
        let a = s.sample_shots(500, 42);
        let b = s.sample_shots(500, 42);
        assert_eq!(a, b);
        let c = s.sample_shots(500, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_superposition_marginal() {
        // One qubit in |+>: P(1) = 0.5 +- 3 sigma at 50000 shots.
        let mut s = StateVector::zero_state(1).unwrap();
        let h = Unitary2::new([
            [c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
            [c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(-std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        ])
        .unwrap();
        s.apply_1q(&h, 0).unwrap();
        let n = 50_000usize;
        let shots = s.sample_shots(n, 11);
        let ones = shots.rows().iter().filter(|&&r| r == 1).count() as f64;
        let p = ones / n as f64;
        assert!((p - 0.5).abs() < 0.011, "p = {p}");
    }

    #[test]
    fn empty_shot_table() {
        let s = StateVector::zero_state(2).unwrap();
        let shots = s.sample_shots(0, 1);
        assert_eq!(shots.n_shots(), 0);
    }

    #[test]
    fn binary_dump_round_trip() {
        let lat = LatticeSpec::new(3, Boundary::Open).unwrap();
        let ps = build_initial_state(InitialStateKind::Defect, &lat).unwrap();
        let s = StateVector::from_product_state(&ps, &lat).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        let back = StateVector::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(s, back);
    }
}
