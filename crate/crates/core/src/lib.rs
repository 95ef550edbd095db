//! Casimir-type interaction thermodynamics for quantum oscillators coupled
//! through mediating oscillators, and for retarded dipole pairs.
//!
//! * [`model`]: oscillator models, `D_j(zeta)`, determinants.
//! * [`spectrum`]: exact normal modes and mode-sum free energies (the oracle).
//! * [`matsubara`]: Matsubara summation with tail correction.
//! * [`thermo`]: `F`, `U`, `S`, sweeps, negative-entropy intervals.
//! * [`dipole`]: dipole kernels, pair free energy, identity checks.
//! * [`verify`]: the invariant and oracle suite behind `casimir verify`.

pub mod dipole;
pub mod error;
pub mod matsubara;
pub mod model;
pub mod poly;
pub mod spectrum;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    d_factors, q_determinant_direct, q_determinant_factored, response_factor, scattering_form_factor,
    validate_stability, BathGenerator, InteractionQuantities, Mediator, ModelKind, OscillatorModel, Polarization,
    StableModel,
};
pub use thermo::{SumOptions, ThermoCurve, ThermoPoint};
