//! Shared test support: an independently coded unitary reference propagator
//! and grid helpers.
//!
//! The reference integrator is deliberately simple — a hand-rolled
//! fixed-step classical RK4 on the wavefunction — and shares no code with
//! the production integration path.

use lzsm::SystemParams;
use num_complex::Complex64;

/// Bare-basis populations of a pure state evolved under the closed
/// three-level Hamiltonian from `|1>` at `-tau`, sampled uniformly at
/// `n_samples` points. `substeps` fixed RK4 steps are taken between
/// consecutive samples.
pub fn schrodinger_populations(
    params: &SystemParams,
    n_samples: usize,
    substeps: usize,
) -> Vec<[f64; 3]> {
    let tau = params.tau;
    let dt_sample = 2.0 * tau / (n_samples - 1) as f64;
    let h = dt_sample / substeps as f64;
    let mut psi = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let mut out = Vec::with_capacity(n_samples);
    out.push(populations_of(&psi));
    let mut t = -tau;
    for _ in 1..n_samples {
        for _ in 0..substeps {
            psi = rk4_step(params, t, &psi, h);
            t += h;
        }
        out.push(populations_of(&psi));
    }
    out
}

fn populations_of(psi: &[Complex64; 3]) -> [f64; 3] {
    [psi[0].norm_sqr(), psi[1].norm_sqr(), psi[2].norm_sqr()]
}

fn rhs(params: &SystemParams, t: f64, psi: &[Complex64; 3]) -> [Complex64; 3] {
    let d = params.kappa * params.kappa * t;
    let minus_i = Complex64::new(0.0, -1.0);
    [
        minus_i * (-0.5 * d * psi[0] + params.omega * psi[1]),
        minus_i * (params.omega * psi[0] + 0.5 * d * psi[1]),
        minus_i * (-params.omega3 * psi[2]),
    ]
}

fn rk4_step(params: &SystemParams, t: f64, psi: &[Complex64; 3], h: f64) -> [Complex64; 3] {
    let k1 = rhs(params, t, psi);
    let k2 = rhs(params, t + h / 2.0, &add_scaled(psi, &k1, h / 2.0));
    let k3 = rhs(params, t + h / 2.0, &add_scaled(psi, &k2, h / 2.0));
    let k4 = rhs(params, t + h, &add_scaled(psi, &k3, h));
    let mut out = *psi;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn add_scaled(y: &[Complex64; 3], k: &[Complex64; 3], a: f64) -> [Complex64; 3] {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]]
}

/// Logarithmically spaced grid, inclusive of both endpoints.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && min > 0.0 && max > min);
    let (a, b) = (min.ln(), max.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}
