//! Observables and error mitigation: the average electric field, gauge
//! violations eta_Z2 / eta_U1, site-resolved excitations, and postselection
//! on the local Gauss law and the global charge.
//!
//! Every observable has two routes: exact expectation values on a
//! statevector, and per-shot arithmetic on measured bitstrings (which
//! requires the gauge qubits to have been rotated into the x basis before
//! measurement). Squared generators are expanded into Pauli strings for the
//! statevector route.

use crate::error::{Error, Result};
use crate::lattice::{
    gauge_generator_u1, gauge_generator_z2, stagger, GaugeSector, LatticeSpec,
};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::shots::{MeasurementBasis, ShotTable};
use crate::state::StateVector;
use serde::{Deserialize, Serialize};

/// Normalization of eta_U1: the largest (G_i - g_i^tar)^2 reachable from the
/// fully polarized target sector.
pub const KAPPA_U1: f64 = 9.0;

/// Normalization of eta_Z2: (G - g)^2 takes values {0, 4} for +-1 eigenvalues.
pub const KAPPA_Z2: f64 = 4.0;

/// Shot estimators below this retained count report insufficient statistics.
pub const MIN_RETAINED_SHOTS: usize = 100;

/// A point estimate. `value == None` flags insufficient statistics; exact
/// (statevector) estimates carry no standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub n: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value: Some(value),
            stderr: None,
            n: 0,
        }
    }

    pub fn insufficient(n: usize) -> Self {
        Self {
            value: None,
            stderr: None,
            n,
        }
    }

    /// Mean and standard error of per-shot samples, subject to the
    /// statistics floor.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n < MIN_RETAINED_SHOTS {
            return Self::insufficient(n);
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Self {
            value: Some(mean),
            stderr: Some((var / n as f64).sqrt()),
            n,
        }
    }
}

fn require_gauge_x(shots: &ShotTable) -> Result<()> {
    if shots.basis() != MeasurementBasis::GaugeX {
        return Err(Error::WrongBasis {
            found: shots.basis(),
            expected: MeasurementBasis::GaugeX,
        });
    }
    Ok(())
}

/// Per-shot G_i^Z2 eigenvalues: g_i = -(tau^x left)(sigma^z)(tau^x right),
/// with missing edge links read as +1. Bits encode eigenvalue 1 - 2b.
pub fn gauss_z2_per_shot(row: u64, lattice: &LatticeSpec) -> Vec<i8> {
    let eig = |q: usize| 1 - 2 * ((row >> q) & 1) as i32;
    let tau = |link: Option<usize>| link.map_or(1, |l| eig(lattice.gauge_qubit(l)));
    lattice
        .sites()
        .map(|i| {
            let g = -tau(lattice.link_left_of(i))
                * eig(lattice.matter_qubit(i))
                * tau(lattice.link_right_of(i));
            g as i8
        })
        .collect()
}

/// Per-shot G_i^U1 eigenvalues.
pub fn gauss_u1_per_shot(row: u64, lattice: &LatticeSpec) -> Vec<i32> {
    let eig = |q: usize| 1 - 2 * ((row >> q) & 1) as i32;
    let tau = |link: Option<usize>| link.map_or(1, |l| eig(lattice.gauge_qubit(l)));
    lattice
        .sites()
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            (tau(lattice.link_left_of(i)) - tau(lattice.link_right_of(i))
                + eig(lattice.matter_qubit(i))
                + sign)
                / 2
        })
        .collect()
}

/// Per-shot total matter charge sum_i sigma^z_i.
pub fn global_charge_per_shot(row: u64, lattice: &LatticeSpec) -> i32 {
    lattice
        .sites()
        .map(|i| 1 - 2 * ((row >> lattice.matter_qubit(i)) & 1) as i32)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    LocalGauss,
    GlobalCharge,
}

/// Retained fractions for each criterion alone and for their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostselectionFractions {
    pub local_gauss: f64,
    pub global_charge: f64,
    pub both: f64,
    /// Fraction retained by the criteria actually applied.
    pub applied: f64,
}

/// Filter shots whose Gauss-law eigenvalues and/or total charge match the
/// target sector. All three fractions are reported regardless of which
/// criteria were applied; the filter itself is the conjunction of `criteria`.
pub fn postselect(
    shots: &ShotTable,
    lattice: &LatticeSpec,
    target: &GaugeSector,
    criteria: &[Criterion],
) -> Result<(ShotTable, PostselectionFractions)> {
    require_gauge_x(shots)?;
    if target.g_z2.len() != lattice.n_matter() {
        return Err(Error::Config("target sector does not match lattice".into()));
    }
    let target_charge = target.global_charge(lattice);
    let use_gauss = criteria.contains(&Criterion::LocalGauss);
    let use_charge = criteria.contains(&Criterion::GlobalCharge);
    let mut n_gauss = 0usize;
    let mut n_charge = 0usize;
    let mut n_both = 0usize;
    let mut retained = Vec::new();
    for &row in shots.rows() {
        let gauss_ok = gauss_z2_per_shot(row, lattice)
            .iter()
            .zip(&target.g_z2)
            .all(|(a, b)| a == b);
        let charge_ok = global_charge_per_shot(row, lattice) == target_charge;
        n_gauss += usize::from(gauss_ok);
        n_charge += usize::from(charge_ok);
        n_both += usize::from(gauss_ok && charge_ok);
        let keep = (!use_gauss || gauss_ok) && (!use_charge || charge_ok);
        if keep {
            retained.push(row);
        }
    }
    let n = shots.n_shots().max(1) as f64;
    let fractions = PostselectionFractions {
        local_gauss: n_gauss as f64 / n,
        global_charge: n_charge as f64 / n,
        both: n_both as f64 / n,
        applied: retained.len() as f64 / n,
    };
    Ok((
        ShotTable::new(retained, shots.num_qubits(), shots.basis()),
        fractions,
    ))
}

/// Mean electric field over links, statevector route.
pub fn electric_field(state: &StateVector, lattice: &LatticeSpec) -> Result<f64> {
    let mut sum = 0.0;
    for link in lattice.links() {
        sum += state.expect_pauli(&PauliString::single(lattice.gauge_qubit(link), Pauli::X))?;
    }
    Ok(sum / lattice.num_links() as f64)
}

/// Mean electric field over links, shot route.
pub fn electric_field_shots(shots: &ShotTable, lattice: &LatticeSpec) -> Result<Estimate> {
    require_gauge_x(shots)?;
    let samples: Vec<f64> = shots
        .rows()
        .iter()
        .map(|&row| {
            lattice
                .links()
                .map(|l| f64::from(1 - 2 * ((row >> lattice.gauge_qubit(l)) & 1) as i32))
                .sum::<f64>()
                / lattice.num_links() as f64
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// eta = (1/(kappa N)) sum_i <(G_i - g_i^tar)^2> for a generator family.
fn eta_state(
    state: &StateVector,
    lattice: &LatticeSpec,
    target: &[f64],
    kappa: f64,
    generator: impl Fn(usize) -> PauliSum,
) -> Result<f64> {
    let mut total = 0.0;
    for site in lattice.sites() {
        let squared = generator(site).shifted_square(target[site]);
        for (coeff, string) in squared.terms() {
            total += coeff
                * if string.is_identity() {
                    1.0
                } else {
                    state.expect_pauli(string)?
                };
        }
    }
    Ok(total / (kappa * lattice.n_matter() as f64))
}

/// U(1) gauge violation of a statevector against a target sector.
pub fn eta_u1(state: &StateVector, lattice: &LatticeSpec, target: &GaugeSector) -> Result<f64> {
    let t: Vec<f64> = target.g_u1.iter().map(|&g| f64::from(g)).collect();
    eta_state(state, lattice, &t, KAPPA_U1, |site| {
        gauge_generator_u1(lattice, site)
    })
}

/// Z2 gauge violation of a statevector against a target sector.
pub fn eta_z2(state: &StateVector, lattice: &LatticeSpec, target: &GaugeSector) -> Result<f64> {
    let t: Vec<f64> = target.g_z2.iter().map(|&g| f64::from(g)).collect();
    eta_state(state, lattice, &t, KAPPA_Z2, |site| {
        let (coeff, string) = gauge_generator_z2(lattice, site);
        let mut sum = PauliSum::new();
        sum.push(coeff, string);
        sum
    })
}

/// U(1) gauge violation from shots.
pub fn eta_u1_shots(
    shots: &ShotTable,
    lattice: &LatticeSpec,
    target: &GaugeSector,
) -> Result<Estimate> {
    require_gauge_x(shots)?;
    let n = lattice.n_matter() as f64;
    let samples: Vec<f64> = shots
        .rows()
        .iter()
        .map(|&row| {
            gauss_u1_per_shot(row, lattice)
                .iter()
                .zip(&target.g_u1)
                .map(|(&g, &t)| f64::from(g - t).powi(2))
                .sum::<f64>()
                / (KAPPA_U1 * n)
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Z2 gauge violation from shots.
pub fn eta_z2_shots(
    shots: &ShotTable,
    lattice: &LatticeSpec,
    target: &GaugeSector,
) -> Result<Estimate> {
    require_gauge_x(shots)?;
    let n = lattice.n_matter() as f64;
    let samples: Vec<f64> = shots
        .rows()
        .iter()
        .map(|&row| {
            gauss_z2_per_shot(row, lattice)
                .iter()
                .zip(&target.g_z2)
                .map(|(&g, &t)| f64::from(i32::from(g - t)).powi(2))
                .sum::<f64>()
                / (KAPPA_Z2 * n)
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Inverse excitation per qubit: (1 + <sigma^z>)/2 on matter and
/// (1 + <tau^x>)/2 on gauge qubits; values in [0, 1].
pub fn site_resolved(state: &StateVector, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(lattice.num_qubits());
    for q in 0..lattice.num_qubits() {
        let p = match lattice.role(q) {
            crate::lattice::QubitRole::Matter(_) => PauliString::single(q, Pauli::Z),
            crate::lattice::QubitRole::Gauge(_) => PauliString::single(q, Pauli::X),
        };
        out.push((1.0 + state.expect_pauli(&p)?) / 2.0);
    }
    Ok(out)
}

/// Shot route of [`site_resolved`]: the fraction of 0 bits per qubit.
pub fn site_resolved_shots(shots: &ShotTable, lattice: &LatticeSpec) -> Result<Vec<Estimate>> {
    require_gauge_x(shots)?;
    let n = shots.n_shots();
    if n < MIN_RETAINED_SHOTS {
        return Ok(vec![Estimate::insufficient(n); lattice.num_qubits()]);
    }
    let mut out = Vec::with_capacity(lattice.num_qubits());
    for q in 0..lattice.num_qubits() {
        let zeros = shots.rows().iter().filter(|&&r| (r >> q) & 1 == 0).count();
        let p = zeros as f64 / n as f64;
        out.push(Estimate {
            value: Some(p),
            stderr: Some((p * (1.0 - p) / n as f64).sqrt()),
            n,
        });
    }
    Ok(out)
}

/// Project a statevector onto the target Z2 gauge sector (the infinite-shot
/// limit of local-Gauss postselection). Returns the projected, renormalized
/// state and the retained probability.
pub fn project_local_gauss(
    state: &StateVector,
    lattice: &LatticeSpec,
    target: &GaugeSector,
) -> Result<(StateVector, f64)> {
    let mut rotated = state.clone();
    for g in crate::compile::measurement_rotation_gates(lattice) {
        let (q, _) = g.qubits();
        rotated.apply_1q(&g.matrix_1q().unwrap(), q)?;
    }
    let mut weight = 0.0f64;
    for (index, amp) in rotated.amplitudes_mut().iter_mut().enumerate() {
        let ok = gauss_z2_per_shot(index as u64, lattice)
            .iter()
            .zip(&target.g_z2)
            .all(|(a, b)| a == b);
        if ok {
            weight += amp.norm_sqr();
        } else {
            *amp = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    if weight <= 0.0 {
        return Err(Error::Config(
            "projection annihilated the state (empty sector)".into(),
        ));
    }
    let scale = num_complex::Complex64::new(1.0 / weight.sqrt(), 0.0);
    rotated.scale(scale);
    // Rotate back to the simulation basis.
    for g in crate::compile::measurement_rotation_gates(lattice) {
        if let crate::circuit::NativeGate::Rxy {
            q,
            axis_angle,
            rotation_angle,
        } = g
        {
            let inverse = crate::circuit::NativeGate::Rxy {
                q,
                axis_angle,
                rotation_angle: -rotation_angle,
            };
            rotated.apply_1q(&inverse.matrix_1q().unwrap(), q)?;
        }
    }
    Ok((rotated, weight))
}

/// One record of an observable series; long CSV layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    pub observable: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub retained_fraction: Option<f64>,
}

/// Time series of observables, serialized to CSV and JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub rows: Vec<SeriesRow>,
}

impl ObservableSeries {
    pub fn push_exact(&mut self, step: usize, t: f64, observable: &str, value: f64) {
        self.rows.push(SeriesRow {
            step,
            t,
            observable: observable.to_string(),
            value: Some(value),
            stderr: None,
            retained_fraction: None,
        });
    }

    pub fn push_estimate(
        &mut self,
        step: usize,
        t: f64,
        observable: &str,
        est: Estimate,
        retained_fraction: Option<f64>,
    ) {
        self.rows.push(SeriesRow {
            step,
            t,
            observable: observable.to_string(),
            value: est.value,
            stderr: est.stderr,
            retained_fraction,
        });
    }

    pub fn values_of(&self, observable: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.observable == observable)
            .filter_map(|r| r.value.map(|v| (r.step, v)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,observable,value,stderr,retained_fraction\n");
        for r in &self.rows {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.step,
                r.t,
                r.observable,
                fmt(r.value),
                fmt(r.stderr),
                fmt(r.retained_fraction)
            ));
        }
        out
    }
}
