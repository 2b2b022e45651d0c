//! The ideal level-crossing system: time-dependent Hamiltonian, instantaneous
//! spectral decomposition, Bohr frequencies and the closed-system survival
//! formula.
//!
//! Canonical units fix the coupling as the frequency unit (`omega = 1`),
//! times are in inverse couplings, and the detuning sweeps linearly,
//! `Delta(t) = kappa^2 t`, over `[-tau, tau]`.

use crate::linalg::Matrix3;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be finite")]
    NotFinite { name: &'static str },
}

/// Model constants: coupling, chirp, external-level frequency and half
/// duration. The energy of the external level `|3>` is `-omega3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub kappa: f64,
    pub omega3: f64,
    pub tau: f64,
}

/// Non-fatal validity diagnostics; surfaced by the CLI, never enforced.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// `tau` is not large against the transition time `omega/kappa^2`, so the
    /// asymptotic survival formula is only approximate.
    FiniteDurationValidity { tau: f64, transition_time: f64 },
    /// The external level is not far above the crossing scale; the
    /// dissipative model assumes `epsilon(tau)/omega3` small.
    ScaleSeparation { ratio: f64 },
}

impl SystemParams {
    pub fn new(omega: f64, kappa: f64, omega3: f64, tau: f64) -> Result<Self, ParamError> {
        for (name, value) in [
            ("omega", omega),
            ("kappa", kappa),
            ("omega3", omega3),
            ("tau", tau),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name });
            }
            if value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        Ok(SystemParams {
            omega,
            kappa,
            omega3,
            tau,
        })
    }

    /// Canonical parameter set: unit coupling and chirp, `omega3 = 1e3`,
    /// `tau = 30`.
    pub fn canonical() -> Self {
        SystemParams {
            omega: 1.0,
            kappa: 1.0,
            omega3: 1e3,
            tau: 30.0,
        }
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut w = Vec::new();
        let transition_time = self.omega / (self.kappa * self.kappa);
        if self.tau < 10.0 * transition_time {
            w.push(ParamWarning::FiniteDurationValidity {
                tau: self.tau,
                transition_time,
            });
        }
        let eps_edge = spectral_at(self.tau, self).epsilon;
        let ratio = eps_edge / self.omega3;
        if ratio > 0.1 {
            w.push(ParamWarning::ScaleSeparation { ratio });
        }
        w
    }
}

/// Instantaneous eigensystem of the Hamiltonian at fixed time.
///
/// `energies` are ordered `(E_plus, E_minus, E_3) = (eps, -eps, -omega3)`;
/// `eigvecs` holds the orthonormal rows `|+>`, `|->`, `|3>` in the bare basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub epsilon: f64,
    pub phi: f64,
    pub energies: [f64; 3],
    pub eigvecs: [[f64; 3]; 3],
}

impl SpectralData {
    pub fn plus(&self) -> [f64; 3] {
        self.eigvecs[0]
    }

    pub fn minus(&self) -> [f64; 3] {
        self.eigvecs[1]
    }
}

/// Linear chirp `Delta(t) = kappa^2 t`.
pub fn detuning(t: f64, params: &SystemParams) -> f64 {
    params.kappa * params.kappa * t
}

/// The three-level Hamiltonian at time `t`:
/// `diag(-Delta/2, Delta/2, -omega3)` plus the coupling on the (1,2) block.
pub fn hamiltonian_at(t: f64, params: &SystemParams) -> Matrix3 {
    let d = detuning(t, params);
    Matrix3::from_real([
        [-d / 2.0, params.omega, 0.0],
        [params.omega, d / 2.0, 0.0],
        [0.0, 0.0, -params.omega3],
    ])
}

/// Instantaneous spectral decomposition.
///
/// `eps = sqrt(omega^2 + Delta^2/4)`, mixing angle
/// `tan(phi) = (Delta/2 + eps)/omega`, eigenstates
/// `|+> = cos(phi)|1> + sin(phi)|2>`, `|-> = -sin(phi)|1> + cos(phi)|2>`.
pub fn spectral_at(t: f64, params: &SystemParams) -> SpectralData {
    let d = detuning(t, params);
    let half_d = d / 2.0;
    let eps = params.omega.hypot(half_d);
    // Delta/2 + eps cancels catastrophically for large negative Delta;
    // rationalize there.
    let y = if d >= 0.0 {
        half_d + eps
    } else {
        params.omega * params.omega / (eps - half_d)
    };
    let phi = y.atan2(params.omega);
    let (s, c) = phi.sin_cos();
    SpectralData {
        epsilon: eps,
        phi,
        energies: [eps, -eps, -params.omega3],
        eigvecs: [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// One transition line between instantaneous eigenstates: its Bohr frequency
/// and whether the coupling operator has a vanishing component there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrLine {
    pub transition: Transition,
    pub omega: f64,
    pub vanishes: bool,
}

/// Ordered pair of instantaneous eigenstates, `(from, to)` in the jump sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    PlusToThird,
    ThirdToPlus,
    MinusToThird,
    ThirdToMinus,
    PlusToMinus,
    MinusToPlus,
}

/// Bohr frequencies of the coupling operator's jump decomposition.
///
/// Four lines carry nonzero operators:
/// `omega_{+3} = eps + omega3`, `omega_{-3} = omega3 - eps` and their
/// negatives. The `+- / -+` pair at `+-2 eps` is returned flagged as
/// vanishing: the bath couples only through the external level.
pub fn bohr_frequencies(s: &SpectralData, params: &SystemParams) -> [BohrLine; 6] {
    let eps = s.epsilon;
    let w3 = params.omega3;
    [
        BohrLine {
            transition: Transition::PlusToThird,
            omega: eps + w3,
            vanishes: false,
        },
        BohrLine {
            transition: Transition::ThirdToPlus,
            omega: -(eps + w3),
            vanishes: false,
        },
        BohrLine {
            transition: Transition::MinusToThird,
            omega: w3 - eps,
            vanishes: false,
        },
        BohrLine {
            transition: Transition::ThirdToMinus,
            omega: eps - w3,
            vanishes: false,
        },
        BohrLine {
            transition: Transition::PlusToMinus,
            omega: 2.0 * eps,
            vanishes: true,
        },
        BohrLine {
            transition: Transition::MinusToPlus,
            omega: -2.0 * eps,
            vanishes: true,
        },
    ]
}

/// Asymptotic survival probability `exp(-2 pi omega^2 / kappa^2)` of the
/// initial state for an ideal linear sweep. Valid for durations long against
/// `omega/kappa^2`.
pub fn lz_survival(omega: f64, kappa: f64) -> f64 {
    debug_assert!(omega > 0.0 && kappa > 0.0);
    let r = omega / kappa;
    (-2.0 * std::f64::consts::PI * r * r).exp()
}

/// Rebuilds the Hamiltonian from a spectral decomposition (test support for
/// eigendecomposition consistency).
pub fn reconstruct_hamiltonian(s: &SpectralData) -> Matrix3 {
    let mut h = Matrix3::zeros();
    for k in 0..3 {
        let proj = Matrix3::outer(s.eigvecs[k], s.eigvecs[k]);
        h = h + proj.scale(Complex64::new(s.energies[k], 0.0));
    }
    h
}

/// Mixing angle sanity range used across the crate.
pub fn phi_in_range(phi: f64) -> bool {
    phi > 0.0 && phi < FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn detuning_is_linear() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 30.0).unwrap();
        assert_eq!(detuning(0.0, &p), 0.0);
        assert_eq!(detuning(-30.0, &p), -30.0);
        let p2 = SystemParams::new(1.0, 2.0, 1e3, 30.0).unwrap();
        assert_eq!(detuning(5.0, &p2), 20.0);
    }

    #[test]
    fn hamiltonian_structure() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 30.0).unwrap();
        let h = hamiltonian_at(0.0, &p);
        let expect = Matrix3::from_real([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1000.0]]);
        assert_eq!(h, expect);

        for t in [-17.0, 3.3, 29.0] {
            let h = hamiltonian_at(t, &p);
            assert_eq!(h.0[2][2].re, -1e3);
            assert_eq!(h.0[0][2], Complex64::new(0.0, 0.0));
            assert_eq!(h.0[1][2], Complex64::new(0.0, 0.0));
            // trace independent of t: the detuning cancels
            assert_relative_eq!(h.trace().re, -1e3, max_relative = 1e-14);
            assert_eq!(h.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn spectral_symmetric_crossing() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 30.0).unwrap();
        let s = spectral_at(0.0, &p);
        assert_relative_eq!(s.epsilon, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s.phi, FRAC_PI_4, max_relative = 1e-15);
    }

    #[test]
    fn spectral_analytic_angles() {
        // Delta = +-2 omega: eps = sqrt(2), tan(phi) = 1 +- sqrt(2).
        let p = SystemParams::new(1.0, 1.0, 1e3, 30.0).unwrap();
        let s = spectral_at(2.0, &p);
        assert_relative_eq!(s.epsilon, 2.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.phi, 3.0 * PI / 8.0, max_relative = 1e-14);
        let s = spectral_at(-2.0, &p);
        assert_relative_eq!(s.epsilon, 2.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.phi, PI / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn spectral_reconstruction_and_orthonormality() {
        let p = SystemParams::new(1.0, 1.3, 2e3, 40.0).unwrap();
        for t in [-40.0, -1.7, 0.0, 0.4, 12.0, 40.0] {
            let s = spectral_at(t, &p);
            assert!(s.epsilon >= p.omega);
            assert!(phi_in_range(s.phi));
            for a in 0..3 {
                for b in 0..3 {
                    let dot: f64 = (0..3).map(|k| s.eigvecs[a][k] * s.eigvecs[b][k]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() <= 1e-12);
                }
            }
            let h = hamiltonian_at(t, &p);
            let defect = (reconstruct_hamiltonian(&s) - h).max_abs();
            assert!(defect <= 1e-12 * h.max_abs());
        }
    }

    #[test]
    fn epsilon_even_phi_mirror() {
        let p = SystemParams::new(1.0, 0.9, 1e3, 50.0).unwrap();
        for t in [0.3, 4.0, 17.5, 50.0] {
            let sp = spectral_at(t, &p);
            let sm = spectral_at(-t, &p);
            assert_relative_eq!(sp.epsilon, sm.epsilon, max_relative = 1e-12);
            assert_relative_eq!(sm.phi, FRAC_PI_2 - sp.phi, max_relative = 1e-12);
        }
    }

    #[test]
    fn bohr_frequency_labels() {
        let p = SystemParams::new(1.0, 1.0, 1e3, 30.0).unwrap();
        let s = spectral_at(0.0, &p);
        let lines = bohr_frequencies(&s, &p);
        let get = |tr: Transition| lines.iter().find(|l| l.transition == tr).unwrap();
        assert_eq!(get(Transition::PlusToThird).omega, 1001.0);
        assert_eq!(get(Transition::MinusToThird).omega, 999.0);
        assert_eq!(get(Transition::ThirdToPlus).omega, -1001.0);
        assert_eq!(get(Transition::ThirdToMinus).omega, -999.0);
        assert!(get(Transition::PlusToMinus).vanishes);
        assert!(get(Transition::MinusToPlus).vanishes);
        // frequencies come in +- pairs
        let sum: f64 = lines.iter().map(|l| l.omega).sum();
        assert_relative_eq!(sum, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lz_survival_values() {
        assert_relative_eq!(lz_survival(1.0, 1.0), (-2.0 * PI).exp(), max_relative = 1e-15);
        assert_relative_eq!(lz_survival(1.0, 1.0), 1.8674e-3, max_relative = 1e-4);
        assert_relative_eq!(lz_survival(1.0, 2.0), (-PI / 2.0).exp(), max_relative = 1e-15);
        assert_relative_eq!(lz_survival(1.0, 2.0), 0.20788, max_relative = 1e-4);
        assert_relative_eq!(lz_survival(1.0, 4.0), (-PI / 8.0).exp(), max_relative = 1e-15);
        assert_relative_eq!(lz_survival(1.0, 4.0), 0.67523, max_relative = 1e-4);
    }

    #[test]
    fn lz_survival_monotone_in_coupling() {
        let mut prev = lz_survival(1e-6, 1.0);
        assert!(prev > 1.0 - 1e-8, "omega -> 0 limit is 1");
        for omega in [0.2, 0.5, 1.0, 2.0, 4.0] {
            let p = lz_survival(omega, 1.0);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn param_validation_and_warnings() {
        assert!(SystemParams::new(0.0, 1.0, 1e3, 30.0).is_err());
        assert!(SystemParams::new(1.0, -1.0, 1e3, 30.0).is_err());
        // kappa = 0.5: transition time omega/kappa^2 = 4, tau = 30 < 40
        let p = SystemParams::new(1.0, 0.5, 1e3, 30.0).unwrap();
        assert!(p
            .warnings()
            .iter()
            .any(|w| matches!(w, ParamWarning::FiniteDurationValidity { .. })));
        // small omega3 violates scale separation
        let p = SystemParams::new(1.0, 1.0, 50.0, 30.0).unwrap();
        assert!(p
            .warnings()
            .iter()
            .any(|w| matches!(w, ParamWarning::ScaleSeparation { .. })));
        assert!(SystemParams::canonical().warnings().is_empty());
    }
}
