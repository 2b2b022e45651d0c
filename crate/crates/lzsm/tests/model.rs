//! Cross-model and integrator-quality checks that go beyond single modules.

use lzsm::{
    evolve, phenom_evolve, propagate_generator, BathParams, DensityMatrix, DissipatorMode,
    IntegratorOptions, PhenomParams, SystemParams,
};

/// At zero bath temperature the three-level master equation restricted to
/// the populated block reduces exactly to the lossy two-level model with the
/// same rate; the two implementations share no integration state, so
/// agreement pins the rate convention.
#[test]
fn zero_temperature_micro_equals_phenom() {
    let params = SystemParams::canonical();
    let opts = IntegratorOptions::default();
    for gamma in [0.5, 5.0, 50.0] {
        let bath = BathParams::zero_temperature(gamma).unwrap();
        let micro = evolve(&params, &bath, &DensityMatrix::pure(0), &opts).unwrap();
        let phenom =
            phenom_evolve(&PhenomParams::new(1.0, 1.0, 30.0, gamma).unwrap(), &opts).unwrap();
        let m = micro.final_populations();
        assert!(
            (m[0] - phenom.survival()).abs() < 1e-7,
            "gamma={gamma}: micro P1={} phenom P1={}",
            m[0],
            phenom.survival()
        );
        assert!((m[1] - phenom.p2.last().unwrap()).abs() < 1e-7);
        assert!((m[2] - phenom.leaked()).abs() < 1e-7);
    }
}

/// Closed-system evolution retraced backwards returns to the initial state.
#[test]
fn time_reversal_returns_to_start() {
    let params = SystemParams::new(1.0, 1.0, 1e3, 10.0).unwrap();
    let bath = BathParams::zero_temperature(0.0).unwrap();
    let opts = IntegratorOptions::default();
    let forward = evolve(&params, &bath, &DensityMatrix::pure(0), &opts).unwrap();
    let rho_end = DensityMatrix::new(forward.final_state).unwrap();
    // sigma(s) = rho(-s) satisfies d sigma/ds = -L(-s) sigma
    let reversed = propagate_generator(
        |s: f64| {
            lzsm::assemble_liouvillian(-s, &params, &bath)
                .unwrap()
                .scale((-1.0).into())
        },
        -params.tau,
        params.tau,
        &rho_end,
        &opts,
        lzsm::propagator::resolve_max_step(&params, &opts),
        101,
    )
    .unwrap();
    let back = reversed.final_populations();
    assert!((back[0] - 1.0).abs() < 1e-6, "P1 after return: {}", back[0]);
    assert!(back[1].abs() < 1e-6 && back[2].abs() < 1e-6);
}

/// Halving the tolerance moves the final survival by far less than any
/// acceptance bound.
#[test]
fn tolerance_convergence() {
    let params = SystemParams::canonical();
    let bath = BathParams::new(1.0, 100.0).unwrap();
    let loose = evolve(
        &params,
        &bath,
        &DensityMatrix::pure(0),
        &IntegratorOptions::default(),
    )
    .unwrap()
    .survival();
    let tight = evolve(
        &params,
        &bath,
        &DensityMatrix::pure(0),
        &IntegratorOptions {
            rel_tol: 0.5e-8,
            abs_tol: 0.5e-10,
            ..Default::default()
        },
    )
    .unwrap()
    .survival();
    assert!(
        (loose - tight).abs() < 1e-6,
        "survival moved by {} under tolerance halving",
        (loose - tight).abs()
    );
}

/// Frozen regression values for the strong-damping and thermal ends
/// (reference integrations agree with these to ~1e-5).
#[test]
fn survival_regression_values() {
    let params = SystemParams::canonical();
    let opts = IntegratorOptions::default();
    let run = |gamma: f64, theta: f64| {
        evolve(
            &params,
            &BathParams::new(gamma, theta).unwrap(),
            &DensityMatrix::pure(0),
            &opts,
        )
        .unwrap()
        .survival()
    };
    assert!((run(1000.0, 0.0) - 0.886954).abs() < 5e-4);
    assert!((run(1.0, 1e5) - 0.449644).abs() < 5e-4);
    assert!((run(0.1, 1e5) - 0.332603).abs() < 5e-4);
}

/// The secular (cross-term-free) generator visibly distorts the dynamics at
/// strong damping; keeping the cross terms is not optional at a crossing.
#[test]
fn secular_approximation_changes_the_answer() {
    let params = SystemParams::canonical();
    let bath = BathParams::zero_temperature(100.0).unwrap();
    let opts = IntegratorOptions::default();
    let full = evolve(&params, &bath, &DensityMatrix::pure(0), &opts)
        .unwrap()
        .survival();
    let secular = propagate_generator(
        |t: f64| {
            lzsm::assemble_liouvillian_with(t, &params, &bath, DissipatorMode::Secular).unwrap()
        },
        -params.tau,
        params.tau,
        &DensityMatrix::pure(0),
        &opts,
        lzsm::propagator::resolve_max_step(&params, &opts),
        101,
    )
    .unwrap()
    .survival();
    assert!(
        (full - secular).abs() > 0.01,
        "full={full} secular={secular}: cross terms should matter at gamma=100"
    );
}
