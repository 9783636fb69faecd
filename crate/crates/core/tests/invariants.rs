use std::f64::consts::{LN_2, PI};

use proptest::prelude::*;
use smm_decoherence::engine::rhs;
use smm_decoherence::scenarios::figures::figure_system;
use smm_decoherence::{bloch_analytic, evolve, EvolveConfig, InitialAngles, KernelSource};

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_stay_physical(
        ratio in 0.05..0.95f64,
        detuning in -20.0..20.0f64,
        temperature in 0.0..2.0f64,
        theta in 0.0..PI,
        phi in 0.0..2.0 * PI,
        nl in any::<bool>(),
        lamb in any::<bool>(),
    ) {
        let src = KernelSource::on_the_fly(figure_system(ratio, detuning, temperature).unwrap());
        let a = InitialAngles::new(theta, phi).unwrap();
        let mut cfg = EvolveConfig::new(3.0);
        cfg.include_nl = nl;
        cfg.include_lamb_shift = lamb;
        let t = grid(3.0, 150);
        let tr = evolve(&a.state(), &t, &cfg, &src).unwrap();
        let d = &tr.diagnostics;
        prop_assert!(d.trace_ok(), "trace drift {}", d.max_trace_drift);
        prop_assert!(d.hermiticity_ok(), "hermiticity {}", d.max_hermiticity_defect);
        prop_assert!(d.positivity_ok(), "min eigenvalue {}", d.min_eigenvalue);
        prop_assert!(d.purity_ok(), "purity {}", d.max_purity);
        for p in &tr.points {
            prop_assert!(p.entropy >= 0.0 && p.entropy <= LN_2 + 1e-12);
        }
    }

    #[test]
    fn analytic_bloch_vector_stays_in_ball(
        ratio in 0.05..0.95f64,
        detuning in -20.0..20.0f64,
        temperature in 0.0..2.0f64,
        theta in 0.0..PI,
    ) {
        let src = KernelSource::on_the_fly(figure_system(ratio, detuning, temperature).unwrap());
        let a = InitialAngles::new(theta, 0.3).unwrap();
        let tr = bloch_analytic(&a, &grid(10.0, 500), &src).unwrap();
        for p in &tr.points {
            let r = p.state.bloch();
            prop_assert!((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() <= 1.0 + 1e-12);
            prop_assert!(p.entropy >= 0.0 && p.entropy <= LN_2 + 1e-12);
        }
    }
}

#[test]
fn central_difference_converges_at_second_order() {
    let src = KernelSource::on_the_fly(figure_system(0.4, 10.0, 1.0).unwrap());
    let a = InitialAngles::new(PI / 3.0, 0.0).unwrap();
    let mut cfg = EvolveConfig::new(2.0).with_tolerance(1e-13);
    cfg.include_nl = true;
    let t0 = 1.0;
    let hs = [0.004, 0.002, 0.001, 0.0005];
    let mut logs = Vec::new();
    for h in hs {
        let tr = evolve(&a.state(), &[0.0, t0 - h, t0, t0 + h], &cfg, &src).unwrap();
        let (lo, mid, hi) = (&tr.points[1].state, &tr.points[2].state, &tr.points[3].state);
        let fd = (*hi.matrix() - *lo.matrix()) * (0.5 / h);
        let err = (fd - rhs(t0, mid, &src, &cfg).unwrap()).max_abs();
        logs.push((h.ln(), err.ln()));
    }
    let n = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0 / n, y + p.1 / n));
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((1.9..=2.1).contains(&slope), "slope {slope}");
}

#[test]
fn halving_tolerance_moves_final_state_little() {
    for (detuning, theta) in [(0.1, PI), (10.0, PI / 2.0)] {
        let src = KernelSource::on_the_fly(figure_system(0.4, detuning, 1.0).unwrap());
        let a = InitialAngles::new(theta, 0.0).unwrap();
        let t = grid(10.0, 100);
        let tol = 1e-10;
        let coarse = evolve(&a.state(), &t, &EvolveConfig::new(10.0).with_tolerance(tol), &src).unwrap();
        let fine =
            evolve(&a.state(), &t, &EvolveConfig::new(10.0).with_tolerance(tol / 2.0), &src).unwrap();
        let (x, y) = (coarse.final_bloch(), fine.final_bloch());
        let diff = (0..3).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max);
        assert!(diff <= 10.0 * tol, "detuning {detuning}: {diff:e}");
    }
}
