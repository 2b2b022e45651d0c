//! Thermal-bath rates, instantaneous jump operators and assembly of the full
//! non-secular Liouvillian.
//!
//! The bath couples through `A = |2><3| + |3><2|` with a flat spectrum, so a
//! single rate constant and the thermal occupation fix every transition rate.
//! The generator keeps all cross terms between jump frequencies; the secular
//! (rotating-wave) assembly exists only as a diagnostic.

use crate::hamiltonian::{spectral_at, SpectralData, SystemParams};
use crate::linalg::{add_sandwich, Matrix3, Superoperator9};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("thermal occupation requires omega > 0, got {omega}")]
    NonPositiveFrequency { omega: f64 },
    #[error("flat-spectrum rate is undefined at omega = 0")]
    ZeroFrequency,
    #[error("bath parameter `{name}` must be nonnegative and finite, got {value}")]
    InvalidBathParam { name: &'static str, value: f64 },
    #[error(
        "scale separation violated: epsilon({t}) = {epsilon} >= omega3 = {omega3}, \
         a jump frequency crosses zero"
    )]
    ScaleSeparation { t: f64, epsilon: f64, omega3: f64 },
}

/// Flat-spectrum bath: rate constant `gamma` and temperature `theta` (both in
/// units of the coupling; `theta = 0` is allowed and means spontaneous
/// emission only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    pub gamma: f64,
    pub theta: f64,
}

impl BathParams {
    pub fn new(gamma: f64, theta: f64) -> Result<Self, RateError> {
        for (name, value) in [("gamma", gamma), ("theta", theta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(RateError::InvalidBathParam { name, value });
            }
        }
        Ok(BathParams { gamma, theta })
    }

    /// Zero-temperature bath with the given rate.
    pub fn zero_temperature(gamma: f64) -> Result<Self, RateError> {
        Self::new(gamma, 0.0)
    }
}

/// Thermal-occupation law used when evaluating rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateLaw {
    /// Bose-Einstein occupation `N = 1/(exp(omega/theta) - 1)`.
    Bose,
    /// High-temperature form `N = theta/omega`, the limit used by the
    /// rate-equation analysis.
    HighTemperature,
}

/// Bose-Einstein occupation at positive frequency.
///
/// Exactly zero at `theta = 0`; evaluated through `exp_m1` so large
/// `omega/theta` underflows to zero instead of producing NaN.
pub fn thermal_occupation(omega: f64, theta: f64) -> Result<f64, RateError> {
    if !(omega > 0.0) {
        return Err(RateError::NonPositiveFrequency { omega });
    }
    if theta < 0.0 || !theta.is_finite() {
        return Err(RateError::InvalidBathParam {
            name: "theta",
            value: theta,
        });
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / theta).exp_m1())
}

/// Signed-frequency rate: `gamma (1 + N(omega))` for emission
/// (`omega > 0`), `gamma N(|omega|)` for absorption (`omega < 0`).
/// Always nonnegative; `omega = 0` is rejected (never reached while the
/// external level stays above the crossing scale).
pub fn rate(omega: f64, bath: &BathParams) -> Result<f64, RateError> {
    rate_with_law(omega, bath, RateLaw::Bose)
}

pub fn rate_with_law(omega: f64, bath: &BathParams, law: RateLaw) -> Result<f64, RateError> {
    if omega == 0.0 {
        return Err(RateError::ZeroFrequency);
    }
    let n = match law {
        RateLaw::Bose => thermal_occupation(omega.abs(), bath.theta)?,
        RateLaw::HighTemperature => bath.theta / omega.abs(),
    };
    Ok(if omega > 0.0 {
        bath.gamma * (1.0 + n)
    } else {
        bath.gamma * n
    })
}

/// One jump operator with its Bohr frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpTerm {
    pub omega: f64,
    pub op: Matrix3,
}

/// The four nonzero instantaneous jump operators of the coupling operator.
///
/// In the order `(+ -> 3, 3 -> +, - -> 3, 3 -> -)`:
/// `A(eps+omega3) = sin(phi) |3><+|`, `A(-(eps+omega3)) = sin(phi) |+><3|`,
/// `A(omega3-eps) = cos(phi) |3><-|`, `A(eps-omega3) = cos(phi) |-><3|`.
/// The vanishing pair at `+-2 eps` is omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDecomposition {
    pub terms: [JumpTerm; 4],
}

impl JumpDecomposition {
    /// Sum of all jump operators; equals the coupling operator by
    /// completeness of the eigenprojections.
    pub fn completeness_sum(&self) -> Matrix3 {
        let mut m = Matrix3::zeros();
        for t in &self.terms {
            m = m + t.op;
        }
        m
    }
}

/// The bath coupling operator `A = |2><3| + |3><2|` in the bare basis.
pub fn coupling_operator() -> Matrix3 {
    Matrix3::from_real([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
}

pub fn jump_operators(s: &SpectralData) -> JumpDecomposition {
    let (sin_phi, cos_phi) = s.phi.sin_cos();
    let plus = s.plus();
    let minus = s.minus();
    let third = [0.0, 0.0, 1.0];
    let eps = s.epsilon;
    let w3 = -s.energies[2];
    JumpDecomposition {
        terms: [
            JumpTerm {
                omega: eps + w3,
                op: Matrix3::outer(third, plus).scale(sin_phi.into()),
            },
            JumpTerm {
                omega: -(eps + w3),
                op: Matrix3::outer(plus, third).scale(sin_phi.into()),
            },
            JumpTerm {
                omega: w3 - eps,
                op: Matrix3::outer(third, minus).scale(cos_phi.into()),
            },
            JumpTerm {
                omega: eps - w3,
                op: Matrix3::outer(minus, third).scale(cos_phi.into()),
            },
        ],
    }
}

/// Which pairs of the jump-frequency double sum enter the dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorMode {
    /// All 16 frequency pairs, cross terms included. The production
    /// generator; the level crossing does not permit a secular
    /// approximation.
    Full,
    /// Diagonal pairs only (rotating-wave / secular form). Diagnostic.
    Secular,
}

/// Full Liouvillian at time `t`: commutator part plus the double-frequency-sum
/// dissipator evaluated with Bose rates. Rebuild this at every integrator
/// evaluation time; all coefficients are time-dependent.
pub fn assemble_liouvillian(
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
) -> Result<Superoperator9, RateError> {
    assemble_liouvillian_with(t, params, bath, DissipatorMode::Full)
}

pub fn assemble_liouvillian_with(
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
    mode: DissipatorMode,
) -> Result<Superoperator9, RateError> {
    let s = spectral_at(t, params);
    if s.epsilon >= params.omega3 {
        return Err(RateError::ScaleSeparation {
            t,
            epsilon: s.epsilon,
            omega3: params.omega3,
        });
    }
    let cross = match mode {
        DissipatorMode::Full => 1.0,
        DissipatorMode::Secular => 0.0,
    };
    Ok(build_liouvillian(t, params, bath, RateLaw::Bose, cross))
}

/// Core assembly. `cross_scale` multiplies the off-diagonal frequency pairs;
/// 1 is the full generator, 0 coincides exactly with the secular one.
/// Precondition (checked by the public wrappers): `epsilon(t) < omega3`.
pub(crate) fn build_liouvillian(
    t: f64,
    params: &SystemParams,
    bath: &BathParams,
    law: RateLaw,
    cross_scale: f64,
) -> Superoperator9 {
    let s = spectral_at(t, params);
    let mut l = commutator_superop(t, params);
    add_dissipator(&mut l, &s, bath, law, cross_scale);
    l
}

/// `-i [H(t), .]` as a superoperator.
pub fn commutator_superop(t: f64, params: &SystemParams) -> Superoperator9 {
    let h = crate::hamiltonian::hamiltonian_at(t, params);
    let id = Matrix3::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = Superoperator9::zeros();
    add_sandwich(&mut l, &h, &id, minus_i);
    add_sandwich(&mut l, &id, &h, -minus_i);
    l
}

/// Accumulates the dissipative double sum
/// `sum_{w,w'} Gamma(w) [A(w) rho A(w')^dag - A(w')^dag A(w) rho] + H.c.`
/// into `l`. The Hermitian-conjugate of each term is added explicitly so the
/// generator preserves Hermiticity for any input.
fn add_dissipator(
    l: &mut Superoperator9,
    s: &SpectralData,
    bath: &BathParams,
    law: RateLaw,
    cross_scale: f64,
) {
    if bath.gamma == 0.0 {
        return;
    }
    let jumps = jump_operators(s);
    let id = Matrix3::identity();
    let ops: [(f64, Matrix3, Matrix3); 4] = jumps.terms.map(|term| {
        let g = rate_with_law(term.omega, bath, law)
            .expect("jump frequencies are nonzero in the valid regime");
        (g, term.op, term.op.adjoint())
    });

    for (a, (ga, op_a, adj_a)) in ops.iter().enumerate() {
        if *ga == 0.0 {
            continue;
        }
        for (b, (_gb, op_b, adj_b)) in ops.iter().enumerate() {
            let weight = if a == b { *ga } else { ga * cross_scale };
            if weight == 0.0 {
                continue;
            }
            let w = Complex64::new(weight, 0.0);
            // Gamma(w_a) [A_a rho A_b^dag - A_b^dag A_a rho]
            add_sandwich(l, op_a, adj_b, w);
            add_sandwich(l, &(*adj_b * *op_a), &id, -w);
            // + H.c.: Gamma(w_a) [A_b rho A_a^dag - rho A_a^dag A_b]
            add_sandwich(l, op_b, adj_a, w);
            add_sandwich(l, &id, &(*adj_a * *op_b), -w);
        }
    }
}

/// Largest instantaneous relaxation scale, `gamma (1 + 2 N(omega3 - eps))`.
/// Quoted by stiffness diagnostics.
pub fn dominant_rate(t: f64, params: &SystemParams, bath: &BathParams) -> f64 {
    let s = spectral_at(t, params);
    let gap = (params.omega3 - s.epsilon).abs().max(f64::MIN_POSITIVE);
    let n = thermal_occupation(gap, bath.theta).unwrap_or(0.0);
    bath.gamma * (1.0 + 2.0 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::hamiltonian_at;
    use crate::linalg::{devectorize, vectorize_matrix};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> SystemParams {
        SystemParams::canonical()
    }

    fn random_hermitian(rng: &mut impl Rng) -> Matrix3 {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        (m + m.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn occupation_zero_temperature() {
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(thermal_occupation(123.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupation_ln2_is_one() {
        let n = thermal_occupation(2.0f64.ln(), 1.0).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn occupation_high_temperature_value() {
        // 1/(exp(1e-3) - 1) evaluated in extended precision
        let n = thermal_occupation(1e3, 1e6).unwrap();
        assert_relative_eq!(n, 999.50008333333194, max_relative = 1e-12);
    }

    #[test]
    fn occupation_underflows_cleanly() {
        let n = thermal_occupation(1e3, 1e-3).unwrap();
        assert_eq!(n, 0.0);
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn rates_at_zero_temperature() {
        let bath = BathParams::zero_temperature(0.7).unwrap();
        assert_relative_eq!(rate(1e3, &bath).unwrap(), 0.7, max_relative = 1e-15);
        assert_eq!(rate(-1e3, &bath).unwrap(), 0.0);
        assert!(rate(0.0, &bath).is_err());
    }

    #[test]
    fn rates_with_unit_occupation() {
        let bath = BathParams::new(0.5, 1.0).unwrap();
        let w = 2.0f64.ln();
        assert_relative_eq!(rate(w, &bath).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(rate(-w, &bath).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn detailed_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w = rng.gen_range(0.5..2e3);
            let theta = 10f64.powf(rng.gen_range(-1.0..4.0));
            let bath = BathParams::new(1.3, theta).unwrap();
            let ratio = rate(-w, &bath).unwrap() / rate(w, &bath).unwrap();
            assert_relative_eq!(ratio, (-w / theta).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn jump_operators_at_crossing() {
        // phi = pi/4: A(omega_{+3}) row on <1|,<2| from |3> is (1/2, 1/2).
        let s = spectral_at(0.0, &params());
        let j = jump_operators(&s);
        let a13 = &j.terms[0].op;
        assert_relative_eq!(a13.0[2][0].re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(a13.0[2][1].re, 0.5, max_relative = 1e-14);
        assert_eq!(j.terms[0].omega, 1001.0);
    }

    #[test]
    fn jump_completeness_and_adjoint_pairs() {
        let p = params();
        for t in [-30.0, -2.1, 0.0, 5.0, 30.0] {
            let j = jump_operators(&spectral_at(t, &p));
            let defect = (j.completeness_sum() - coupling_operator()).max_abs();
            assert!(defect <= 1e-12, "completeness defect {defect} at t={t}");
            // terms come in adjoint pairs at opposite frequencies
            for pair in [(0, 1), (2, 3)] {
                assert_relative_eq!(j.terms[pair.0].omega, -j.terms[pair.1].omega);
                let d = (j.terms[pair.0].op.adjoint() - j.terms[pair.1].op).max_abs();
                assert!(d <= 1e-15);
            }
            // rank 1: every 2x2 minor of each operator vanishes
            for term in &j.terms {
                let m = &term.op.0;
                for r1 in 0..3 {
                    for r2 in r1 + 1..3 {
                        for c1 in 0..3 {
                            for c2 in c1 + 1..3 {
                                let minor = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
                                assert!(minor.norm() <= 1e-14);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn jump_limit_large_detuning() {
        // Delta -> +inf: phi -> pi/2, the minus channel dominates is cut off
        let p = SystemParams::new(1.0, 3.0, 1e5, 300.0).unwrap();
        let j = jump_operators(&spectral_at(300.0, &p));
        // A(omega_{-3}) = cos(phi)|3><-| -> 0
        assert!(j.terms[2].op.max_abs() < 2e-3);
        // A(omega_{+3}) -> |3><+| with |+> -> |2>
        assert_relative_eq!(j.terms[0].op.0[2][1].re, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn closed_limit_is_pure_commutator() {
        let p = params();
        let bath = BathParams::zero_temperature(0.0).unwrap();
        let l = assemble_liouvillian(0.0, &p, &bath).unwrap();
        let lc = commutator_superop(0.0, &p);
        assert_eq!(l, lc);
        // and the commutator action matches -i[H, rho] directly
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_hermitian(&mut rng);
        let h = hamiltonian_at(0.0, &p);
        let direct = (h * rho - rho * h).scale(Complex64::new(0.0, -1.0));
        let via = devectorize(&l.apply(&vectorize_matrix(&rho)));
        assert!((direct - via).max_abs() <= 1e-13 * direct.max_abs().max(1.0));
    }

    #[test]
    fn generator_annihilates_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = params();
        for _ in 0..10 {
            let t = rng.gen_range(-30.0..30.0);
            let gamma = 10f64.powf(rng.gen_range(-2.0..3.0));
            let theta = 10f64.powf(rng.gen_range(-1.0..6.0));
            let bath = BathParams::new(gamma, theta).unwrap();
            let l = assemble_liouvillian(t, &p, &bath).unwrap();
            assert!(l.trace_row_defect() <= 1e-12 * l.max_abs());
            let rho = random_hermitian(&mut rng);
            let out = devectorize(&l.apply(&vectorize_matrix(&rho)));
            assert!(out.trace().norm() <= 1e-12 * l.max_abs());
        }
    }

    #[test]
    fn generator_preserves_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = params();
        for _ in 0..10 {
            let t = rng.gen_range(-30.0..30.0);
            let bath = BathParams::new(
                10f64.powf(rng.gen_range(-2.0..3.0)),
                10f64.powf(rng.gen_range(-1.0..6.0)),
            )
            .unwrap();
            let l = assemble_liouvillian(t, &p, &bath).unwrap();
            let rho = random_hermitian(&mut rng);
            let out = devectorize(&l.apply(&vectorize_matrix(&rho)));
            let scale = out.max_abs().max(1e-30);
            assert!(out.hermiticity_defect() <= 1e-12 * scale);
        }
    }

    #[test]
    fn zero_temperature_population_flows_into_third() {
        // Dissipative part alone, applied to adiabatic-basis projectors:
        // rho_33 gains from |+><+| and |-><-|, and never drains at theta=0.
        let p = params();
        let bath = BathParams::zero_temperature(2.0).unwrap();
        for t in [-11.0, 0.0, 7.0] {
            let s = spectral_at(t, &p);
            let mut d = Superoperator9::zeros();
            super::add_dissipator(&mut d, &s, &bath, RateLaw::Bose, 1.0);
            for vec_state in [
                Matrix3::outer(s.plus(), s.plus()),
                Matrix3::outer(s.minus(), s.minus()),
                third_projector(),
            ] {
                let out = devectorize(&d.apply(&vectorize_matrix(&vec_state)));
                let gain33 = out.0[2][2].re;
                assert!(
                    gain33 >= -1e-13,
                    "rho_33 must be nondecreasing, got {gain33} at t={t}"
                );
            }
            // the third level itself is dark at zero temperature
            let out = devectorize(&d.apply(&vectorize_matrix(&third_projector())));
            assert!(out.max_abs() <= 1e-13);
        }
    }

    fn third_projector() -> Matrix3 {
        Matrix3::outer([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
    }

    #[test]
    fn secular_equals_cross_terms_zeroed() {
        let p = params();
        let bath = BathParams::new(5.0, 100.0).unwrap();
        for t in [-3.0, 0.0, 3.0] {
            let zeroed = build_liouvillian(t, &p, &bath, RateLaw::Bose, 0.0);
            let secular =
                assemble_liouvillian_with(t, &p, &bath, DissipatorMode::Secular).unwrap();
            assert_eq!(zeroed, secular);
            let full = assemble_liouvillian(t, &p, &bath).unwrap();
            assert!((full - secular).max_abs() > 1.0, "cross terms must matter");
        }
    }

    #[test]
    fn scale_separation_guard() {
        // kappa^2 tau / 2 >> omega3 pushes epsilon past omega3
        let p = SystemParams::new(1.0, 10.0, 50.0, 30.0).unwrap();
        let bath = BathParams::new(1.0, 10.0).unwrap();
        assert!(matches!(
            assemble_liouvillian(30.0, &p, &bath),
            Err(RateError::ScaleSeparation { .. })
        ));
    }
}
