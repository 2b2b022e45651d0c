//! Simulator for a dissipative three-level Landau-Zener-Stuckelberg-Majorana
//! level crossing.
//!
//! Two bare states sweep linearly through a crossing while one of them leaks
//! into an external level through a thermal bosonic bath with a flat
//! spectrum. The master equation keeps every cross term between the bath's
//! jump frequencies (no secular approximation), which is what makes the
//! crossing physics come out right: at zero temperature and weak damping the
//! survival probability is rate independent, strong damping dynamically
//! decouples the initial state, and high temperature amplifies the
//! decoupling through the thermal photon number.
//!
//! Everything is expressed in units of the coupling (`omega = 1`), with
//! times in inverse couplings and the detuning sweeping as
//! `Delta(t) = kappa^2 t` over `[-tau, tau]`.

pub mod dissipator;
pub mod hamiltonian;
pub mod hightemp;
pub mod linalg;
pub mod ode;
pub mod phenomenological;
pub mod propagator;

pub use dissipator::{
    assemble_liouvillian, assemble_liouvillian_with, jump_operators, rate, thermal_occupation,
    BathParams, DissipatorMode, JumpDecomposition, RateError,
};
pub use hamiltonian::{
    bohr_frequencies, detuning, hamiltonian_at, lz_survival, spectral_at, ParamError,
    ParamWarning, SpectralData, SystemParams,
};
pub use hightemp::{
    consistency_vs_full, eigenoperator_residual, hightemp_liouvillian,
    hightemp_liouvillian_derived, order_classification, ConsistencyReport, HighTempError,
    OrderClass, PerturbationScales,
};
pub use linalg::{
    devectorize, hermitian_eigenvalues3, sandwich_superop, vectorize, vectorize_matrix,
    DensityMatrix, LinalgError, Matrix3, StateVector9, Superoperator9,
};
pub use ode::{IntegratorMethod, IntegratorOptions, OdeError};
pub use phenomenological::{
    phenom_evolve, phenom_hamiltonian, PhenomError, PhenomParams, PhenomTrajectory,
};
pub use propagator::{
    closed_system_check, evolve, evolve_sampled, populations, propagate_generator,
    ClosedSystemCheck, EvolveError, TrajectoryRecord,
};
