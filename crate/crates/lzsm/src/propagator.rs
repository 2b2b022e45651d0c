//! Time integration of the vectorized master equation over `[-tau, tau]`
//! with invariant monitoring and observable extraction.

use crate::dissipator::{self, BathParams, RateError, RateLaw};
use crate::hamiltonian::{lz_survival, spectral_at, SystemParams};
use crate::linalg::{
    devectorize, hermitian_eigenvalues3, vectorize, DensityMatrix, Matrix3, StateVector9,
    Superoperator9,
};
use crate::ode::{self, IntegratorOptions, OdeError};
use num_complex::Complex64;
use std::f64::consts::TAU as TWO_PI;
use thiserror::Error;

/// Uniform sample count per trajectory; integrator steps are independent of
/// the sampling grid (dense output).
pub const DEFAULT_SAMPLES: usize = 600;

/// Positivity excursions below this abort the run: by then the state is not
/// a small transient defect but an integration-quality failure.
pub const MIN_EIG_ABORT: f64 = -1e-3;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("{source}; dominant relaxation rate gamma(1+2N) = {dominant_rate:.6e} at t = {t:.6}")]
    Integration {
        source: OdeError,
        t: f64,
        dominant_rate: f64,
    },
    #[error(
        "state lost positivity at t = {t:.6}: min eigenvalue {min_eig:.3e}; \
         dominant relaxation rate gamma(1+2N) = {dominant_rate:.6e} suggests a stiffness failure"
    )]
    PositivityLoss {
        t: f64,
        min_eig: f64,
        dominant_rate: f64,
    },
    #[error("invalid integrator options: {0}")]
    Options(OdeError),
}

/// Sampled evolution of one density matrix plus worst-case invariant
/// monitors over the whole trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// Strictly increasing sample grid spanning `[-tau, tau]`.
    pub times: Vec<f64>,
    /// Bare-basis populations `(P1, P2, P3)` per sample.
    pub populations: Vec<[f64; 3]>,
    /// Upper-triangle coherences `(rho_12, rho_13, rho_23)` per sample.
    pub coherences: Vec<[Complex64; 3]>,
    /// Max `|tr rho - 1|` over the trajectory.
    pub trace_error: f64,
    /// Max Hermiticity defect over the trajectory.
    pub herm_error: f64,
    /// Minimum eigenvalue of `rho` over the trajectory (may be slightly
    /// negative: the non-secular generator is not completely positive).
    pub min_eig: f64,
    /// State at the final time.
    pub final_state: Matrix3,
}

impl TrajectoryRecord {
    pub fn final_populations(&self) -> [f64; 3] {
        *self.populations.last().expect("at least one sample")
    }

    /// Survival probability `P1` at the final time.
    pub fn survival(&self) -> f64 {
        self.final_populations()[0]
    }
}

/// Bare-basis populations: real diagonal of the state.
pub fn populations(rho: &DensityMatrix) -> [f64; 3] {
    rho.matrix().diagonal_re()
}

/// Resolved step ceiling for the three-level model: the fastest coherence
/// oscillates near `omega3`, and the ceiling keeps it sampled.
pub fn resolve_max_step(params: &SystemParams, opts: &IntegratorOptions) -> f64 {
    opts.max_step
        .unwrap_or_else(|| (1e-2f64).min(0.1 * TWO_PI / params.omega3))
}

/// Integrates the full non-secular master equation from `rho(-tau) = rho0`
/// to `t = tau`, rebuilding the generator at every integrator evaluation
/// time.
pub fn evolve(
    params: &SystemParams,
    bath: &BathParams,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
) -> Result<TrajectoryRecord, EvolveError> {
    evolve_sampled(params, bath, rho0, opts, DEFAULT_SAMPLES)
}

pub fn evolve_sampled(
    params: &SystemParams,
    bath: &BathParams,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
    n_samples: usize,
) -> Result<TrajectoryRecord, EvolveError> {
    // The edge of the window has the largest splitting; if the external
    // level is crossed there, a jump frequency passes through zero.
    let eps_edge = spectral_at(params.tau, params).epsilon;
    if eps_edge >= params.omega3 {
        return Err(RateError::ScaleSeparation {
            t: params.tau,
            epsilon: eps_edge,
            omega3: params.omega3,
        }
        .into());
    }
    let generator =
        |t: f64| dissipator::build_liouvillian(t, params, bath, RateLaw::Bose, 1.0);
    let stiffness_rate = |t: f64| dissipator::dominant_rate(t, params, bath);
    propagate_with(
        generator,
        -params.tau,
        params.tau,
        rho0,
        opts,
        resolve_max_step(params, opts),
        n_samples,
        stiffness_rate,
    )
}

/// Propagates `d vec(rho)/dt = L(t) vec(rho)` for an arbitrary generator.
/// Used by the production path and by diagnostic comparisons (secular
/// assembly, reversed evolution).
pub fn propagate_generator(
    generator: impl Fn(f64) -> Superoperator9,
    t0: f64,
    t1: f64,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
    max_step: f64,
    n_samples: usize,
) -> Result<TrajectoryRecord, EvolveError> {
    propagate_with(generator, t0, t1, rho0, opts, max_step, n_samples, |_| {
        f64::NAN
    })
}

#[allow(clippy::too_many_arguments)]
fn propagate_with(
    generator: impl Fn(f64) -> Superoperator9,
    t0: f64,
    t1: f64,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
    max_step: f64,
    n_samples: usize,
    stiffness_rate: impl Fn(f64) -> f64,
) -> Result<TrajectoryRecord, EvolveError> {
    opts.validate().map_err(EvolveError::Options)?;
    let n_samples = n_samples.max(2);
    let span = t1 - t0;
    let times: Vec<f64> = (0..n_samples)
        .map(|k| t0 + span * k as f64 / (n_samples - 1) as f64)
        .collect();

    let mut states: Vec<[Complex64; 9]> = Vec::with_capacity(n_samples);
    let rhs = |t: f64, y: &[Complex64; 9]| generator(t).apply(&StateVector9(*y)).0;
    let y_final = ode::integrate(
        rhs,
        t0,
        t1,
        vectorize(rho0).0,
        opts,
        max_step,
        &times,
        |_, _, y| states.push(*y),
    )
    .map_err(|source| {
        let t = match &source {
            OdeError::StepSizeUnderflow { t, .. } => *t,
            OdeError::MaxStepsExceeded { t, .. } => *t,
            OdeError::NonFiniteState { t } => *t,
        };
        EvolveError::Integration {
            source,
            t,
            dominant_rate: stiffness_rate(t),
        }
    })?;
    debug_assert_eq!(states.len(), times.len());

    let mut populations = Vec::with_capacity(n_samples);
    let mut coherences = Vec::with_capacity(n_samples);
    let mut trace_error = 0.0f64;
    let mut herm_error = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut min_eig_t = t0;
    for (t, raw) in times.iter().zip(states.iter()) {
        let m = devectorize(&StateVector9(*raw));
        let tr = m.trace();
        trace_error = trace_error.max((tr.re - 1.0).hypot(tr.im));
        herm_error = herm_error.max(m.hermiticity_defect());
        let sym = symmetrize(&m);
        let eigs = hermitian_eigenvalues3(&sym).expect("symmetrized matrix is Hermitian");
        if eigs[0] < min_eig {
            min_eig = eigs[0];
            min_eig_t = *t;
        }
        populations.push(m.diagonal_re());
        coherences.push([m.0[0][1], m.0[0][2], m.0[1][2]]);
    }
    if min_eig < MIN_EIG_ABORT {
        return Err(EvolveError::PositivityLoss {
            t: min_eig_t,
            min_eig,
            dominant_rate: stiffness_rate(min_eig_t),
        });
    }
    Ok(TrajectoryRecord {
        times,
        populations,
        coherences,
        trace_error,
        herm_error,
        min_eig,
        final_state: devectorize(&StateVector9(y_final)),
    })
}

fn symmetrize(m: &Matrix3) -> Matrix3 {
    (*m + m.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Result of comparing a closed-system run against the asymptotic survival
/// formula.
#[derive(Debug, Clone, Copy)]
pub struct ClosedSystemCheck {
    pub p1_numeric: f64,
    pub p1_formula: f64,
    pub defect: f64,
}

/// Runs the closed system (`gamma = 0`) and compares the final survival
/// against the asymptotic formula. The defect is a finite-duration ripple,
/// not an integration error.
pub fn closed_system_check(
    params: &SystemParams,
    opts: &IntegratorOptions,
) -> Result<ClosedSystemCheck, EvolveError> {
    let bath = BathParams::zero_temperature(0.0).expect("zero bath is valid");
    let record = evolve(params, &bath, &DensityMatrix::pure(0), opts)?;
    let p1_numeric = record.survival();
    let p1_formula = lz_survival(params.omega, params.kappa);
    Ok(ClosedSystemCheck {
        p1_numeric,
        p1_formula,
        defect: (p1_numeric - p1_formula).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn populations_of_simple_states() {
        assert_eq!(populations(&DensityMatrix::pure(0)), [1.0, 0.0, 0.0]);
        let third = Complex64::new(1.0 / 3.0, 0.0);
        let mixed = DensityMatrix::new(Matrix3::identity().scale(third)).unwrap();
        let p = populations(&mixed);
        assert_relative_eq!(p[0], 1.0 / 3.0);
        assert_relative_eq!(p[1], 1.0 / 3.0);
        assert_relative_eq!(p[2], 1.0 / 3.0);
        let sup = DensityMatrix::new(Matrix3::from_real([
            [0.5, 0.5, 0.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.0, 0.0],
        ]))
        .unwrap();
        assert_eq!(populations(&sup), [0.5, 0.5, 0.0]);
    }

    #[test]
    fn resolve_max_step_tracks_fast_scale() {
        let p = SystemParams::canonical();
        let opts = IntegratorOptions::default();
        assert_relative_eq!(resolve_max_step(&p, &opts), 0.1 * TWO_PI / 1e3);
        let slow = SystemParams::new(1.0, 1.0, 10.0, 30.0).unwrap();
        assert_relative_eq!(resolve_max_step(&slow, &opts), 1e-2);
        let forced = IntegratorOptions {
            max_step: Some(3e-3),
            ..opts
        };
        assert_relative_eq!(resolve_max_step(&p, &forced), 3e-3);
    }

    #[test]
    fn decoupled_initial_state_is_stationary() {
        // omega -> 0: |1> is an eigenstate, nothing moves
        let p = SystemParams::new(1e-8, 1.0, 1e3, 5.0).unwrap();
        let bath = BathParams::zero_temperature(0.0).unwrap();
        let rec = evolve(&p, &bath, &DensityMatrix::pure(0), &IntegratorOptions::default())
            .unwrap();
        assert!(rec.survival() > 1.0 - 1e-8);
        assert!(rec.trace_error <= 1e-8);
        assert!(rec.herm_error <= 1e-10);
    }

    #[test]
    fn sample_grid_spans_window() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 2.0).unwrap();
        let bath = BathParams::zero_temperature(1.0).unwrap();
        let rec = evolve_sampled(&p, &bath, &DensityMatrix::pure(0), &Default::default(), 101)
            .unwrap();
        assert_eq!(rec.times.len(), 101);
        assert_eq!(rec.populations.len(), 101);
        assert_relative_eq!(rec.times[0], -2.0);
        assert_relative_eq!(*rec.times.last().unwrap(), 2.0);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        // populations sum to the trace at every sample
        for p3 in &rec.populations {
            let sum: f64 = p3.iter().sum();
            assert!((sum - 1.0).abs() <= rec.trace_error + 1e-10);
        }
    }

    #[test]
    fn scale_separation_rejected_up_front() {
        let p = SystemParams::new(1.0, 10.0, 50.0, 30.0).unwrap();
        let bath = BathParams::zero_temperature(1.0).unwrap();
        let err = evolve(&p, &bath, &DensityMatrix::pure(0), &Default::default());
        assert!(matches!(err, Err(EvolveError::Rate(_))));
    }

    #[test]
    fn rk4_fallback_agrees_with_adaptive() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 3.0).unwrap();
        let bath = BathParams::new(2.0, 10.0).unwrap();
        let adaptive = evolve(&p, &bath, &DensityMatrix::pure(0), &Default::default()).unwrap();
        let fixed = evolve(
            &p,
            &bath,
            &DensityMatrix::pure(0),
            &IntegratorOptions {
                method: crate::ode::IntegratorMethod::ClassicalRk4,
                ..Default::default()
            },
        )
        .unwrap();
        let a = adaptive.final_populations();
        let b = fixed.final_populations();
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-7, "component {k}: {} vs {}", a[k], b[k]);
        }
    }
}
