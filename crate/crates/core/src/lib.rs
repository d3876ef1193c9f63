//! Classical statevector simulation of Trotterized 1+1D Z2 lattice gauge
//! theory dynamics compiled to a sqrt-iSWAP-native gate set, with parasitic
//! C-phase noise, Gauss-law postselection, linear U(1) gauge protection and
//! a numerically exact evolution oracle.

pub mod circuit;
pub mod compile;
pub mod dense;
pub mod error;
pub mod lattice;
pub mod noise;
pub mod observables;
pub mod oracle;
pub mod pauli;
pub mod shots;
pub mod state;

pub use error::{Error, Result};
