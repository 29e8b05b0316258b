//! Open-system dynamics of a periodically driven qubit coupled to an Ohmic
//! bosonic bath.
//!
//! The system Hamiltonian is `H_S(t) = ω₀σ_z + Ω sin(ωt)σ_x` with `ħ = k_B = 1`.
//! The crate provides the closed-system propagator and its asymptotic forms,
//! the time-dependent master equation (TDME) with jump operators built from
//! that propagator, the adiabatic master equation (ADME), the unitary
//! reference, the closed-form interaction-picture solution and the regime
//! checks that decide whether the TDME applies.
//!
//! Every numerical routine is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases at the crate root fix the scalar to `f64`.

pub mod bath;
pub mod error;
pub mod master;

pub mod propagators;
pub mod quadrature;
pub mod qubit;
pub mod scalar;
pub mod special;
pub mod validity;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex2x2 = qubit::Complex2x2<f64>;
pub type DensityMatrix2 = qubit::DensityMatrix2<f64>;
pub type DriveParams = qubit::DriveParams<f64>;
pub type SpectralSnapshot = qubit::SpectralSnapshot<f64>;
pub type Observables = qubit::Observables<f64>;
pub type BathSpec = bath::BathSpec<f64>;
pub type RateTriple = bath::RateTriple<f64>;
pub type LambCoeffs = bath::LambCoeffs<f64>;
pub type LambShiftTable = bath::LambShiftTable<f64>;
pub type QuadratureConfig = quadrature::QuadratureConfig<f64>;
pub type PropagatorEntries = propagators::PropagatorEntries<f64>;
pub type JumpSet = master::JumpSet<f64>;
pub type Environment = master::Environment<f64>;
pub type EvolutionConfig = master::EvolutionConfig<f64>;
pub type BlochInteraction = master::BlochInteraction<f64>;
pub type Trajectory = master::Trajectory<f64>;
pub type ValidityReport = validity::ValidityReport<f64>;

/// Crate version, echoed in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
