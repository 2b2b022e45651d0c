//! Adaptive Dormand-Prince 5(4) integration of small complex linear systems,
//! with dense output for sampling on a fixed grid, plus a fixed-step
//! classical RK4 fallback.
//!
//! The state is a const-generic array of complex components; the error norm
//! is a weighted RMS over component magnitudes.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t:.6} (h = {step:.3e}); the problem is too stiff")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("step budget exhausted at t = {t:.6} after {steps} steps")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("integrator produced a non-finite state at t = {t:.6}")]
    NonFiniteState { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorMethod {
    /// Adaptive embedded Runge-Kutta 5(4), Dormand-Prince coefficients.
    DormandPrince54,
    /// Fixed-step classical fourth-order Runge-Kutta at the step ceiling.
    ClassicalRk4,
}

/// Integration controls shared by every evolution in the crate.
///
/// `max_step = None` resolves to `min(1e-2, 0.1 * 2 pi / omega3)` for the
/// three-level model so the fastest coherence oscillation stays resolved,
/// and to `1e-2` for the two-level model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub method: IntegratorMethod,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            method: IntegratorMethod::DormandPrince54,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<(), OdeError> {
        // tolerances and ceiling must be positive; reuse the underflow error
        // for a degenerate configuration
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step.map_or(true, |h| h > 0.0 && h.is_finite());
        if ok {
            Ok(())
        } else {
            Err(OdeError::StepSizeUnderflow { t: f64::NAN, step: 0.0 })
        }
    }
}

// Dormand-Prince 5(4) tableau. The seventh stage is the FSAL evaluation at
// the 5th-order solution.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients for the 5-coefficient interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;
// Steps are accepted well below the nominal tolerance so the accumulated
// global error stays near the requested one over ~1e5-step windows.
const ERR_ACCEPT: f64 = 1e-3;

#[inline]
fn axpy<const N: usize>(y: &mut [Complex64; N], a: f64, x: &[Complex64; N]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += a * xi;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`), invoking
/// `on_sample(index, t, y)` for each requested sample time (strictly
/// increasing, inside `[t0, t1]`) via dense output. Returns the final state.
pub(crate) fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    opts: &IntegratorOptions,
    max_step: f64,
    sample_times: &[f64],
    mut on_sample: impl FnMut(usize, f64, &[Complex64; N]),
) -> Result<[Complex64; N], OdeError> {
    opts.validate()?;
    debug_assert!(t1 > t0 && max_step > 0.0);
    match opts.method {
        IntegratorMethod::DormandPrince54 => dopri5(
            &mut f,
            t0,
            t1,
            y0,
            opts,
            max_step,
            sample_times,
            &mut on_sample,
        ),
        IntegratorMethod::ClassicalRk4 => rk4(
            &mut f,
            t0,
            t1,
            y0,
            max_step,
            sample_times,
            &mut on_sample,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn dopri5<const N: usize>(
    f: &mut impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    opts: &IntegratorOptions,
    max_step: f64,
    sample_times: &[f64],
    on_sample: &mut impl FnMut(usize, f64, &[Complex64; N]),
) -> Result<[Complex64; N], OdeError> {
    let span = t1 - t0;
    let h_floor = span * 1e-14;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = max_step.min(span);
    let mut next_sample = 0;

    // emit samples that coincide with the start point
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }

    let mut steps = 0usize;
    while t < t1 {
        if steps >= MAX_STEPS {
            return Err(OdeError::MaxStepsExceeded { t, steps });
        }
        steps += 1;
        h = h.min(t1 - t);
        if h < h_floor {
            if t1 - t < h_floor.max(f64::EPSILON * span) {
                break; // numerically at the end point
            }
            return Err(OdeError::StepSizeUnderflow { t, step: h });
        }

        let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    axpy(&mut ys, h * a, kj);
                }
            }
            k[stage + 1] = f(t + C[stage] * h, &ys);
        }
        // 5th-order solution is the stage-6 argument (A row 5 equals B)
        let mut y_next = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[5][j];
            if a != 0.0 {
                axpy(&mut y_next, h * a, kj);
            }
        }

        // weighted RMS error estimate
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_next[i].norm());
            let r = h * e.norm() / scale;
            err_sq += r * r;
        }
        let err = (err_sq / N as f64).sqrt() / ERR_ACCEPT;

        if err <= 1.0 {
            if !y_next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(OdeError::NonFiniteState { t });
            }
            let t_next = t + h;
            // dense output over [t, t_next]
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_next {
                let ts = sample_times[next_sample];
                let ys = if ts >= t_next {
                    y_next
                } else {
                    interpolate(&y, &y_next, &k, h, (ts - t) / h)
                };
                on_sample(next_sample, ts, &ys);
                next_sample += 1;
            }
            y = y_next;
            t = t_next;
            k1 = k[6]; // FSAL
        }
        let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        h = (h * fac).min(max_step);
    }
    // any samples numerically at the end point
    while next_sample < sample_times.len() && sample_times[next_sample] <= t1 + h_floor {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }
    Ok(y)
}

/// Fifth-order dense-output interpolant on a completed step.
fn interpolate<const N: usize>(
    y: &[Complex64; N],
    y_next: &[Complex64; N],
    k: &[[Complex64; N]; 7],
    h: f64,
    s: f64,
) -> [Complex64; N] {
    let s1 = 1.0 - s;
    let mut out = [Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        let ydiff = y_next[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        let mut dsum = Complex64::new(0.0, 0.0);
        for (j, kj) in k.iter().enumerate() {
            if D[j] != 0.0 {
                dsum += D[j] * kj[i];
            }
        }
        let cont4 = ydiff - h * k[6][i] - bspl;
        let cont5 = h * dsum;
        out[i] = y[i] + s * (ydiff + s1 * (bspl + s * (cont4 + s1 * cont5)));
    }
    out
}

fn rk4<const N: usize>(
    f: &mut impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    max_step: f64,
    sample_times: &[f64],
    on_sample: &mut impl FnMut(usize, f64, &[Complex64; N]),
) -> Result<[Complex64; N], OdeError> {
    let span = t1 - t0;
    let n_steps = (span / max_step).ceil().max(1.0) as usize;
    if n_steps >= MAX_STEPS {
        return Err(OdeError::MaxStepsExceeded { t: t0, steps: n_steps });
    }
    let h = span / n_steps as f64;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }
    for step in 0..n_steps {
        let t_next = if step + 1 == n_steps { t1 } else { t0 + (step + 1) as f64 * h };
        let mut ys = y;
        axpy(&mut ys, h / 2.0, &k1);
        let k2 = f(t + h / 2.0, &ys);
        let mut ys = y;
        axpy(&mut ys, h / 2.0, &k2);
        let k3 = f(t + h / 2.0, &ys);
        let mut ys = y;
        axpy(&mut ys, h, &k3);
        let k4 = f(t + h, &ys);
        let mut y_next = y;
        axpy(&mut y_next, h / 6.0, &k1);
        axpy(&mut y_next, h / 3.0, &k2);
        axpy(&mut y_next, h / 3.0, &k3);
        axpy(&mut y_next, h / 6.0, &k4);
        if !y_next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(OdeError::NonFiniteState { t });
        }
        let k1_next = f(t_next, &y_next);
        // cubic Hermite dense output
        while next_sample < sample_times.len() && sample_times[next_sample] <= t_next {
            let ts = sample_times[next_sample];
            let s = ((ts - t) / h).clamp(0.0, 1.0);
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            let mut ysamp = [Complex64::new(0.0, 0.0); N];
            for i in 0..N {
                ysamp[i] = h00 * y[i] + h01 * y_next[i] + h * (h10 * k1[i] + h11 * k1_next[i]);
            }
            on_sample(next_sample, ts, &ysamp);
            next_sample += 1;
        }
        y = y_next;
        k1 = k1_next;
        t = t_next;
    }
    while next_sample < sample_times.len() {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }
    Ok(y)
}
