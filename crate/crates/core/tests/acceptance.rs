//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p smm-decoherence --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use smm_decoherence::bath::{kernel_sample, markovian_limits, KernelSource, RateSample};
use smm_decoherence::scenarios::figures::{
    fig2_config, fig3_config, figure_system, sign_changes, FIG3_SWEEP,
};
use smm_decoherence::scenarios::{run_figure, FigureName, Overrides, ScenarioConfig};
use smm_decoherence::solution::{
    entropy_of_norm, pointer_angle, time_average, DampingIntegrals, POINTER_T_MAX,
};
use smm_decoherence::verify::{compare_jc, compare_kernels, compare_paths, tolerance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

/// 1. Closed-form kernels vs brute-force quadrature at T = 0.
fn kernels() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [0.1, 10.0] {
        let sys = figure_system(0.4, d, 0.0).map_err(fail)?;
        for r in compare_kernels(&sys, &[0.5, 1.0, 5.0]).map_err(fail)? {
            worst = worst.max(r.max_rel);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= tolerance::KERNEL_REL && secs < 10.0,
        format!("max rel {worst:.2e} (tol {:.0e}), {secs:.2} s (< 10 s)", tolerance::KERNEL_REL),
    )
}

/// Resolved Fig. 2 runs and their analytic/ODE comparison reports.
fn fig2_paths() -> Result<Vec<(f64, f64, f64)>, String> {
    let mut out = Vec::new();
    for d in [0.1, 10.0] {
        let run = fig2_config(d).resolve().map_err(fail)?;
        let src = run.evolve.kernel_source(&run.system).map_err(fail)?;
        let (report, analytic, ode) =
            compare_paths("fig2", &src, &run.angles, &run.grid, &run.evolve).map_err(fail)?;
        let entropy = analytic
            .points
            .iter()
            .zip(&ode.points)
            .map(|(a, b)| (a.entropy - b.entropy).abs())
            .fold(0.0, f64::max);
        out.push((d, report.max_abs, entropy));
    }
    Ok(out)
}

/// 2. Analytic vs ODE on the Fig. 2 parameters.
fn paths() -> Outcome {
    let start = Instant::now();
    let devs = fig2_paths()?;
    let secs = start.elapsed().as_secs_f64();
    let worst = devs.iter().map(|d| d.1).fold(0.0, f64::max);
    check(
        worst <= tolerance::PATHS_ABS && secs < 30.0,
        format!(
            "max Bloch deviation {worst:.2e} (tol {:.0e}) over detunings 0.1 and 10, {secs:.2} s (< 30 s)",
            tolerance::PATHS_ABS
        ),
    )
}

/// 3. Invariants recorded in the manifest of every figure scenario.
fn invariants() -> Outcome {
    let dir = tempfile::tempdir().map_err(fail)?;
    let mut failures = Vec::new();
    let mut manifests = 0;
    let mut csvs = 0;
    for fig in FigureName::ALL {
        run_figure(fig, dir.path(), &Overrides::default()).map_err(fail)?;
    }
    for entry in std::fs::read_dir(dir.path()).map_err(fail)? {
        let path = entry.map_err(fail)?.path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.ends_with(".csv") {
            csvs += 1;
            let m = dir.path().join(name.replace(".csv", ".manifest.json"));
            if !m.exists() {
                failures.push(format!("{name}: no manifest"));
            }
        } else if name.ends_with(".manifest.json") {
            manifests += 1;
            let v: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&path).map_err(fail)?).map_err(fail)?;
            for c in v["invariants"].as_array().into_iter().flatten() {
                if c["pass"] != serde_json::Value::Bool(true) {
                    failures.push(format!("{name}: {}", c["name"]));
                }
            }
        }
    }
    check(
        failures.is_empty() && csvs == manifests && csvs > 0,
        format!("{csvs} CSV files, {manifests} manifests, failing: {failures:?}"),
    )
}

fn rate(r: &RateSample, k: usize) -> f64 {
    [r.gamma_z, r.gamma_plus, r.gamma_minus][k]
}

/// 4. Γ ≡ 0 at T = 0 and Markovian limits at λt = 20.
fn markov() -> Outcome {
    let mut max_gamma: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for d in [0.1, 10.0] {
        let sys = figure_system(0.4, d, 0.0).map_err(fail)?;
        for i in 0..=2000 {
            let k = kernel_sample(0.01 * i as f64, &sys).map_err(fail)?;
            for g in k.gamma {
                max_gamma = max_gamma.max(g.norm());
            }
        }
    }
    for t in [0.0, 1.0] {
        let sys = figure_system(0.4, 10.0, t).map_err(fail)?;
        let src = KernelSource::on_the_fly(sys);
        let at = src.rates(20.0).map_err(fail)?;
        let lim = markovian_limits(&sys).map_err(fail)?;
        for k in 0..3 {
            worst_rel = worst_rel.max((rate(&at, k) - rate(&lim, k)).abs() / rate(&lim, k).abs());
        }
    }
    check(
        max_gamma == 0.0 && worst_rel <= 0.05,
        format!("max |Γ_q| at T=0: {max_gamma:e}; detuning 10 rates at λt=20 within rel {worst_rel:.2e} of limits (tol 5e-2)"),
    )
}

/// 5. Qualitative shape of the Fig. 1 rates.
fn fig1_shape() -> Outcome {
    let grid: Vec<f64> = (0..=4000).map(|i| 0.005 * i as f64).collect();
    let series = |d: f64, t: f64| -> Result<Vec<RateSample>, String> {
        let src = KernelSource::on_the_fly(figure_system(0.4, d, t).map_err(fail)?);
        grid.iter().map(|&x| src.rates(x).map_err(fail)).collect()
    };
    let col = |s: &[RateSample], k: usize| s.iter().map(|r| rate(r, k)).collect::<Vec<_>>();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    let (a0, a1) = (series(0.1, 0.0)?, series(0.1, 1.0)?);
    let (b0, b1) = (series(10.0, 0.0)?, series(10.0, 1.0)?);
    let mut notes = Vec::new();
    let mut ok = true;

    for k in [1, 2] {
        let (p0, p1) = (sup(&col(&a0, k)), sup(&col(&a1, k)));
        ok &= p1 > p0;
        notes.push(format!("peak γ{} T1/T0 = {:.4}", ["z", "+", "-"][k], p1 / p0));
    }
    let mut worst_diff: f64 = 0.0;
    for k in 0..3 {
        let (c0, c1) = (col(&b0, k), col(&b1, k));
        let diff: Vec<f64> = c0.iter().zip(&c1).map(|(x, y)| x - y).collect();
        worst_diff = worst_diff.max(sup(&diff) / sup(&c0));
    }
    ok &= worst_diff < 0.05;
    notes.push(format!("detuning 10 sup-norm T difference {:.3}%", 100.0 * worst_diff));

    let mut min_changes = usize::MAX;
    for s in [&a0, &a1, &b0, &b1] {
        for k in [1, 2] {
            min_changes = min_changes.min(sign_changes(&col(s, k)));
        }
    }
    for s in [&b0, &b1] {
        min_changes = min_changes.min(sign_changes(&col(s, 0)));
    }
    ok &= min_changes >= 1;
    let gz_min = col(&a0, 0)
        .into_iter()
        .chain(col(&a1, 0))
        .fold(f64::INFINITY, f64::min);
    ok &= gz_min >= 0.0;
    notes.push(format!(
        "fewest sign changes {min_changes} (γ± both detunings, γz detuning 10); γz at detuning 0.1 stays ≥ 0 (min {gz_min:.2e})"
    ));
    check(ok, notes.join("; "))
}

fn mean_abs_rz(c: ScenarioConfig) -> Result<f64, String> {
    let run = c.resolve().map_err(fail)?;
    let src = run.evolve.kernel_source(&run.system).map_err(fail)?;
    let tr = smm_decoherence::evolve(&run.angles.state(), &run.grid, &run.evolve, &src)
        .map_err(fail)?;
    let rz: Vec<f64> = tr.points.iter().map(|p| p.state.bloch()[2].abs()).collect();
    Ok(time_average(&run.grid, &rz))
}

/// 6. Coherence ordering in Figs. 2 and 3.
fn coherence_order() -> Outcome {
    let low = mean_abs_rz(fig2_config(0.1))?;
    let high = mean_abs_rz(fig2_config(10.0))?;
    let sweep = FIG3_SWEEP
        .iter()
        .map(|&r| mean_abs_rz(fig3_config(r)))
        .collect::<Result<Vec<_>, _>>()?;
    let monotone = sweep.windows(2).all(|w| w[1] > w[0]);
    check(
        high > low && monotone,
        format!("<|R_z|> detuning 10: {high:.6} vs 0.1: {low:.6}; Δ_so/ω_s sweep {sweep:.6?}"),
    )
}

fn mean_entropy(d: f64, t: f64, theta: f64) -> Result<f64, String> {
    let src = KernelSource::on_the_fly(figure_system(0.9, d, t).map_err(fail)?);
    let grid: Vec<f64> = (0..=2000).map(|i| 0.01 * i as f64).collect();
    let ints = DampingIntegrals::build(&src, &grid).map_err(fail)?;
    Ok(time_average(&grid, &ints.entropy_series(theta).map_err(fail)?))
}

/// 7. Pointer states.
fn pointer() -> Outcome {
    let step = PI / 127.0;
    let cold = pointer_angle(
        &KernelSource::on_the_fly(figure_system(0.9, 0.1, 0.0).map_err(fail)?),
        POINTER_T_MAX,
        128,
    )
    .map_err(fail)?;
    let warm = pointer_angle(
        &KernelSource::on_the_fly(figure_system(0.9, 10.0, 1.0).map_err(fail)?),
        POINTER_T_MAX,
        128,
    )
    .map_err(fail)?;
    let e0 = mean_entropy(10.0, 0.0, PI / 2.0)?;
    let e1 = mean_entropy(10.0, 1.0, PI / 2.0)?;
    let fig4 = mean_entropy(0.1, 0.0, PI / 2.0)?;
    check(
        cold.theta_p == PI && (warm.theta_p - PI).abs() <= step + 1e-12 && e1 > e0,
        format!(
            "θ_p(T=0) = {:.6}, θ_p(T=1, detuning 10) = {:.6}; <E>(θ=π/2) at detuning 10: T=1 {e1:.6e} > T=0 {e0:.6e} (Fig. 4 set, T=0: {fig4:.6e})",
            cold.theta_p, warm.theta_p
        ),
    )
}

/// 8. Engine vs exact emitter solution.
fn jc() -> Outcome {
    let a = compare_jc(0.01, 0.0, 10.0, false).map_err(fail)?;
    let b = compare_jc(0.01, 0.0, 10.0, true).map_err(fail)?;
    check(
        a.pass == Some(true) && b.pass == Some(true),
        format!(
            "max |ΔP| {:.2e} (NL off), {:.2e} (NL on), tol {:.0e}",
            a.max_abs,
            b.max_abs,
            tolerance::JC_ABS
        ),
    )
}

/// 9. Entropy closed form and path agreement.
fn entropy() -> Outcome {
    let refs = [
        (1.0, 0.0),
        (0.0, 2f64.ln()),
        (0.5, -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln())),
    ];
    let mut worst: f64 = 0.0;
    for (n, e) in refs {
        worst = worst.max((entropy_of_norm(n).map_err(fail)? - e).abs());
    }
    let paths = fig2_paths()?;
    let worst_paths = paths.iter().map(|p| p.2).fold(0.0, f64::max);
    check(
        worst <= tolerance::ENTROPY_ABS && worst_paths <= tolerance::ENTROPY_PATHS_ABS,
        format!(
            "reference values within {worst:.1e}; analytic vs ODE entropy {worst_paths:.2e} (tol {:.0e})",
            tolerance::ENTROPY_PATHS_ABS
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("kernel closed form vs brute force", kernels),
        ("analytic vs ODE, Fig. 2 parameters", paths),
        ("invariants on every scenario", invariants),
        ("T=0 kernels and Markovian limit", markov),
        ("Fig. 1 qualitative shape", fig1_shape),
        ("Fig. 2/3 coherence ordering", coherence_order),
        ("pointer states", pointer),
        ("exact emitter reduction", jc),
        ("entropy", entropy),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (verdict, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {verdict} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
