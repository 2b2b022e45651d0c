//! The lossy two-level baseline: non-Hermitian Schrodinger evolution with an
//! imaginary energy `-i gamma_ph` on the second level.
//!
//! At zero bath temperature the microscopic three-level model reduces
//! exactly to this dynamics with `gamma_ph = gamma` (the flat-spectrum rate),
//! which fixes the cross-model comparison convention.

use crate::hamiltonian::ParamError;
use crate::ode::{self, IntegratorOptions, OdeError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhenomError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
}

/// Two-level sweep constants plus the phenomenological decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhenomParams {
    pub omega: f64,
    pub kappa: f64,
    pub tau: f64,
    pub gamma_ph: f64,
}

impl PhenomParams {
    pub fn new(omega: f64, kappa: f64, tau: f64, gamma_ph: f64) -> Result<Self, ParamError> {
        for (name, value) in [("omega", omega), ("kappa", kappa), ("tau", tau)] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name });
            }
            if value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        if !gamma_ph.is_finite() || gamma_ph < 0.0 {
            return Err(ParamError::NotPositive {
                name: "gamma_ph",
                value: gamma_ph,
            });
        }
        Ok(PhenomParams {
            omega,
            kappa,
            tau,
            gamma_ph,
        })
    }
}

/// The non-Hermitian two-level Hamiltonian
/// `((-Delta/2, omega), (omega, Delta/2 - i gamma_ph))` with
/// `Delta = kappa^2 t`.
pub fn phenom_hamiltonian(t: f64, p: &PhenomParams) -> [[Complex64; 2]; 2] {
    let d = p.kappa * p.kappa * t;
    [
        [Complex64::new(-d / 2.0, 0.0), Complex64::new(p.omega, 0.0)],
        [
            Complex64::new(p.omega, 0.0),
            Complex64::new(d / 2.0, -p.gamma_ph),
        ],
    ]
}

/// Sampled amplitudes of the lossy sweep started from `(1, 0)` at `-tau`.
/// The leaked norm `1 - |c1|^2 - |c2|^2` is the population lost to the
/// external continuum.
#[derive(Debug, Clone)]
pub struct PhenomTrajectory {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub norm: Vec<f64>,
    pub final_amplitudes: [Complex64; 2],
}

impl PhenomTrajectory {
    pub fn survival(&self) -> f64 {
        *self.p1.last().expect("at least one sample")
    }

    /// Norm leaked out of the two-level system by the end of the sweep.
    pub fn leaked(&self) -> f64 {
        1.0 - *self.norm.last().expect("at least one sample")
    }
}

pub fn phenom_evolve(
    p: &PhenomParams,
    opts: &IntegratorOptions,
) -> Result<PhenomTrajectory, PhenomError> {
    phenom_evolve_sampled(p, opts, crate::propagator::DEFAULT_SAMPLES)
}

pub fn phenom_evolve_sampled(
    p: &PhenomParams,
    opts: &IntegratorOptions,
    n_samples: usize,
) -> Result<PhenomTrajectory, PhenomError> {
    let n_samples = n_samples.max(2);
    let times: Vec<f64> = (0..n_samples)
        .map(|k| -p.tau + 2.0 * p.tau * k as f64 / (n_samples - 1) as f64)
        .collect();
    let max_step = opts.max_step.unwrap_or(1e-2);
    let mut p1 = Vec::with_capacity(n_samples);
    let mut p2 = Vec::with_capacity(n_samples);
    let mut norm = Vec::with_capacity(n_samples);
    let rhs = |t: f64, c: &[Complex64; 2]| {
        let h = phenom_hamiltonian(t, p);
        let minus_i = Complex64::new(0.0, -1.0);
        [
            minus_i * (h[0][0] * c[0] + h[0][1] * c[1]),
            minus_i * (h[1][0] * c[0] + h[1][1] * c[1]),
        ]
    };
    let final_amplitudes = ode::integrate(
        rhs,
        -p.tau,
        p.tau,
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        opts,
        max_step,
        &times,
        |_, _, c| {
            let a = c[0].norm_sqr();
            let b = c[1].norm_sqr();
            p1.push(a);
            p2.push(b);
            norm.push(a + b);
        },
    )?;
    Ok(PhenomTrajectory {
        times,
        p1,
        p2,
        norm,
        final_amplitudes,
    })
}
