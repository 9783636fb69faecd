//! The five figure scenarios and the single-series runner shared with
//! configuration-file runs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::bath::{kernel_sample, markovian_limits, KernelSource, OpenSystem, RateSample};
use crate::engine::{evolve, Trajectory};
use crate::error::{Error, Result};
use crate::solution::{
    bloch_analytic, pointer_angle, theta_grid, DampingIntegrals, InitialAngles, POINTER_T_MAX,
};
use crate::verify::{path_deviation, tolerance};

use super::config::{
    BathBlock, Overrides, PathChoice, ResolvedRun, RunBlock, ScenarioConfig, StrategyChoice,
    SystemBlock, TemperatureUnit, DEFAULT_U2,
};
use super::output::{trajectory_checks, CsvTable, InvariantCheck, Manifest, OutputSet};

pub const OMEGA_S: f64 = 100.0;
pub const DRIVE: f64 = 500.0;
pub const FIG1_DETUNINGS: [f64; 2] = [0.1, 10.0];
pub const FIG1_T_MAX: f64 = 20.0;
pub const FIG1_POINTS: usize = 2001;
pub const FIG2_DETUNINGS: [f64; 2] = [0.1, 10.0];
pub const FIG3_SWEEP: [f64; 4] = [0.1, 0.4, 0.7, 0.9];
pub const SERIES_T_MAX: f64 = 10.0;
pub const SERIES_POINTS: usize = 1001;
pub const SURFACE_THETAS: usize = 128;
pub const SURFACE_T_MAX: f64 = 20.0;
pub const SURFACE_POINTS: usize = 401;
pub const SLICE_POINTS: usize = 2001;
pub const FIG5_DETUNINGS: [f64; 8] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
/// Initial state of the R_z series: the lower dressed state.
pub const SERIES_THETA: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FigureName {
    pub const ALL: [FigureName; 5] = [
        FigureName::Fig1,
        FigureName::Fig2,
        FigureName::Fig3,
        FigureName::Fig4,
        FigureName::Fig5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig1 => "fig1",
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
        }
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// Configuration for one figure series: dressed splitting 100λ, drive 500λ,
/// u² = 0.1λ, temperature in units of ω_s.
pub fn figure_config(
    ratio: f64,
    detuning: f64,
    temperature: f64,
    t_max: f64,
    points: usize,
    theta: f64,
    path: PathChoice,
) -> ScenarioConfig {
    ScenarioConfig {
        system: SystemBlock {
            omega_so: None,
            d_eps: None,
            omega_s: Some(OMEGA_S),
            delta_so_over_omega_s: Some(ratio),
            drive: DRIVE,
        },
        bath: BathBlock {
            u2: DEFAULT_U2,
            detuning,
            temperature,
            temperature_unit: TemperatureUnit::OmegaS,
            strategy: StrategyChoice::Resonant,
            ir_cutoff: None,
            omega_max: None,
        },
        run: RunBlock {
            t_max,
            points,
            theta,
            phi: 0.0,
            path,
            ..RunBlock::default()
        },
    }
}

/// The configuration behind one Fig. 2 series.
pub fn fig2_config(detuning: f64) -> ScenarioConfig {
    figure_config(
        0.4,
        detuning,
        1.0,
        SERIES_T_MAX,
        SERIES_POINTS,
        SERIES_THETA,
        PathChoice::Both,
    )
}

/// The configuration behind one Fig. 3 series.
pub fn fig3_config(ratio: f64) -> ScenarioConfig {
    figure_config(
        ratio,
        0.1,
        1.0,
        SERIES_T_MAX,
        SERIES_POINTS,
        SERIES_THETA,
        PathChoice::Both,
    )
}

fn resolve_with(mut c: ScenarioConfig, o: &Overrides) -> Result<ResolvedRun> {
    o.apply(&mut c);
    c.resolve()
}

pub fn parameters_json(run: &ResolvedRun) -> serde_json::Value {
    let s = &run.system;
    let omega_s = s.dressed.omega_s;
    json!({
        "config": run.config,
        "resolved": {
            "lambda": s.bath.lambda,
            "omega_so": s.system.omega_so,
            "drive": s.system.drive,
            "d_eps": s.system.d_eps,
            "delta_so": s.dressed.delta_so,
            "omega_s": omega_s,
            "delta_plus": s.dressed.delta_plus,
            "delta_minus": s.dressed.delta_minus,
            "delta_0": s.dressed.delta_0,
            "u2": s.bath.u2,
            "omega_0": s.bath.omega_0,
            "detuning": s.bath.omega_0 - s.system.drive,
            "temperature_lambda": s.bath.temperature,
            "temperature_omega_s": s.bath.temperature / omega_s,
            "strategy": s.bath.strategy,
            "omega_max": s.omega_max(),
            "rate_source": run.evolve.rate_source,
            "t_max": run.evolve.t_max,
            "points": run.grid.len(),
            "theta": run.angles.theta,
            "phi": run.angles.phi,
            "include_nl": run.evolve.include_nl,
            "include_lamb": run.evolve.include_lamb_shift,
        }
    })
}

fn tolerances_json(run: &ResolvedRun) -> serde_json::Value {
    json!({
        "rtol": run.evolve.rtol,
        "atol": run.evolve.atol,
        "initial_step": run.evolve.initial_step,
        "paths_abs": tolerance::PATHS_ABS,
    })
}

/// Output of one trajectory series.
#[derive(Debug)]
pub struct SeriesResult {
    pub table: CsvTable,
    pub manifest: Manifest,
    pub ode: Option<Trajectory>,
    pub analytic: Option<Trajectory>,
}

/// Integrate one resolved run along the requested path(s) and tabulate it.
pub fn run_series(scenario: &str, csv_name: &str, run: &ResolvedRun) -> Result<SeriesResult> {
    let start = Instant::now();
    let path = run.config.run.path;
    let source = run.evolve.kernel_source(&run.system)?;
    let (ode, analytic) = rayon::join(
        || -> Result<Option<Trajectory>> {
            if path.wants_ode() {
                Ok(Some(evolve(&run.angles.state(), &run.grid, &run.evolve, &source)?))
            } else {
                Ok(None)
            }
        },
        || -> Result<Option<Trajectory>> {
            if path.wants_analytic() {
                Ok(Some(bloch_analytic(&run.angles, &run.grid, &source)?))
            } else {
                Ok(None)
            }
        },
    );
    let (ode, analytic) = (ode?, analytic?);

    let want_rates = run.config.run.rates;
    let want_entropy = run.config.run.entropy;
    let mut header: Vec<String> = vec!["lambda_t".into()];
    let mut trajs: Vec<(&str, &Trajectory)> = Vec::new();
    if let Some(t) = &ode {
        trajs.push(("ode", t));
    }
    if let Some(t) = &analytic {
        trajs.push(("analytic", t));
    }
    let both = trajs.len() == 2;
    let suffix = |tag: &str| if both { format!("_{tag}") } else { String::new() };
    for (tag, _) in &trajs {
        for c in ["R_x", "R_y", "R_z"] {
            header.push(format!("{c}{}", suffix(tag)));
        }
    }
    if want_rates {
        header.extend(["gamma_z", "gamma_plus", "gamma_minus"].map(String::from));
    }
    if want_entropy {
        for (tag, _) in &trajs {
            header.push(format!("entropy{}", suffix(tag)));
        }
    }
    let mut table = CsvTable::new(header);
    let first = trajs[0].1;
    for (i, &t) in run.grid.iter().enumerate() {
        let mut row = vec![t];
        for (_, tr) in &trajs {
            row.extend(tr.points[i].state.bloch());
        }
        if want_rates {
            let r = &first.points[i].rates;
            row.extend([r.gamma_z, r.gamma_plus, r.gamma_minus]);
        }
        if want_entropy {
            for (_, tr) in &trajs {
                row.push(tr.points[i].entropy);
            }
        }
        table.push(row);
    }

    let mut manifest = Manifest::new(scenario, csv_name);
    manifest.parameters = parameters_json(run);
    manifest.tolerances = tolerances_json(run);
    manifest.notes = run.notes.clone();
    for (tag, tr) in &trajs {
        manifest
            .invariants
            .extend(trajectory_checks(&format!("{tag}."), &tr.diagnostics));
        manifest.invariants.push(InvariantCheck::at_most(
            format!("{tag}.bloch_norm"),
            tr.diagnostics.max_bloch_norm,
            1.0 + 1e-9,
        ));
    }
    if let (Some(o), Some(a)) = (&ode, &analytic) {
        let (max_abs, max_rel, max_entropy) = path_deviation(a, o);
        let scored = !(run.evolve.include_nl || run.evolve.include_lamb_shift);
        let tol = if run.system.is_closed() {
            tolerance::CLOSED_PATHS_ABS
        } else {
            tolerance::PATHS_ABS
        };
        manifest.deviation = Some(json!({
            "compared": "analytic vs ode",
            "max_abs": max_abs,
            "max_rel": max_rel,
            "max_entropy_abs": max_entropy,
            "tolerance": tol,
            "pass": if scored { Some(max_abs <= tol) } else { None },
        }));
        log::info!("{csv_name}: max analytic/ODE Bloch deviation {max_abs:.3e}");
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    Ok(SeriesResult {
        table,
        manifest,
        ode,
        analytic,
    })
}

fn label(x: f64) -> String {
    format!("{x}")
}

/// Run one figure scenario and write its CSV files and manifests into `out`.
pub fn run_figure(name: FigureName, out: &Path, o: &Overrides) -> Result<Vec<PathBuf>> {
    let mut set = OutputSet::new(out)?;
    match name {
        FigureName::Fig1 => fig1(&mut set, o)?,
        FigureName::Fig2 => {
            let runs: Vec<(String, ResolvedRun)> = FIG2_DETUNINGS
                .iter()
                .map(|&d| Ok((format!("fig2_detuning_{}.csv", label(d)), resolve_with(fig2_config(d), o)?)))
                .collect::<Result<_>>()?;
            write_series(&mut set, "fig2", &runs)?;
        }
        FigureName::Fig3 => {
            let runs: Vec<(String, ResolvedRun)> = FIG3_SWEEP
                .iter()
                .map(|&r| Ok((format!("fig3_ratio_{}.csv", label(r)), resolve_with(fig3_config(r), o)?)))
                .collect::<Result<_>>()?;
            write_series(&mut set, "fig3", &runs)?;
        }
        FigureName::Fig4 => fig4(&mut set, o)?,
        FigureName::Fig5 => fig5(&mut set, o)?,
    }
    Ok(set.commit())
}

fn write_series(set: &mut OutputSet, scenario: &str, runs: &[(String, ResolvedRun)]) -> Result<()> {
    let results = runs
        .par_iter()
        .map(|(name, run)| run_series(scenario, name, run))
        .collect::<Result<Vec<_>>>()?;
    for ((name, _), r) in runs.iter().zip(results) {
        set.write_csv(name, &r.table, &r.manifest)?;
    }
    Ok(())
}

/// Run a configuration file; writes `trajectory.csv` and its manifest.
pub fn run_config(path: &Path, out: &Path, o: &Overrides) -> Result<Vec<PathBuf>> {
    let config = ScenarioConfig::load(path)?;
    let run = resolve_with(config, o)?;
    let mut set = OutputSet::new(out)?;
    let r = run_series("config", "trajectory.csv", &run)?;
    set.write_csv("trajectory.csv", &r.table, &r.manifest)?;
    Ok(set.commit())
}

fn rate_column(r: &RateSample, which: usize) -> f64 {
    match which {
        0 => r.gamma_z,
        1 => r.gamma_plus,
        _ => r.gamma_minus,
    }
}

fn fig1(set: &mut OutputSet, o: &Overrides) -> Result<()> {
    const NAMES: [&str; 3] = ["gamma_z", "gamma_plus", "gamma_minus"];
    let start = Instant::now();
    let grid: Vec<f64> = (0..FIG1_POINTS)
        .map(|i| FIG1_T_MAX * i as f64 / (FIG1_POINTS - 1) as f64)
        .collect();
    for &d in &FIG1_DETUNINGS {
        let runs: Vec<ResolvedRun> = [0.0, 1.0]
            .iter()
            .map(|&temp| {
                resolve_with(
                    figure_config(0.4, d, temp, FIG1_T_MAX, FIG1_POINTS, SERIES_THETA, PathChoice::Ode),
                    o,
                )
            })
            .collect::<Result<_>>()?;
        let rates: Vec<Vec<RateSample>> = runs
            .iter()
            .map(|r| {
                let src = KernelSource::on_the_fly(r.system);
                grid.par_iter().map(|&t| src.rates(t)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        // Zero temperature: every Γ_q vanishes identically.
        let t0 = &runs[0].system;
        let max_gamma_t0 = grid
            .par_iter()
            .map(|&t| {
                kernel_sample(t, t0).map(|k| k.gamma.iter().map(|g| g.norm()).fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);

        for (which, name) in NAMES.iter().enumerate() {
            let csv = format!("fig1_{name}_detuning_{}.csv", label(d));
            let mut table = CsvTable::new([
                "lambda_t".to_string(),
                format!("{name}_T0"),
                format!("{name}_T1"),
            ]);
            for (i, &t) in grid.iter().enumerate() {
                table.push(vec![
                    t,
                    rate_column(&rates[0][i], which),
                    rate_column(&rates[1][i], which),
                ]);
            }
            let mut m = Manifest::new("fig1", &csv);
            m.parameters = json!({
                "t0": parameters_json(&runs[0])["resolved"],
                "t1": parameters_json(&runs[1])["resolved"],
                "points": FIG1_POINTS,
            });
            m.tolerances = json!({ "markov_rel": 0.05 });
            let finite = rates
                .iter()
                .flatten()
                .all(|r| rate_column(r, which).is_finite());
            m.invariants.push(InvariantCheck {
                name: "rates_finite".into(),
                value: if finite { 1.0 } else { 0.0 },
                threshold: 1.0,
                pass: finite,
            });
            m.invariants.push(InvariantCheck::at_most(
                "t0_gamma_max_abs",
                max_gamma_t0,
                0.0,
            ));
            let mut summary = serde_json::Map::new();
            for (k, run) in runs.iter().enumerate() {
                let lim = rate_column(&markovian_limits(&run.system)?, which);
                let last = rate_column(rates[k].last().unwrap(), which);
                let rel = (last - lim).abs() / lim.abs().max(f64::MIN_POSITIVE);
                m.invariants.push(InvariantCheck::at_most(
                    format!("T{k}_markov_rel_dev_at_t_max"),
                    rel,
                    0.05,
                ));
                let series: Vec<f64> = rates[k].iter().map(|r| rate_column(r, which)).collect();
                summary.insert(
                    format!("T{k}"),
                    json!({
                        "markov_limit": lim,
                        "value_at_t_max": last,
                        "peak_abs": series.iter().fold(0.0f64, |a, v| a.max(v.abs())),
                        "sign_changes": sign_changes(&series),
                    }),
                );
            }
            m.deviation = Some(serde_json::Value::Object(summary));
            m.notes = runs[1].notes.clone();
            m.wall_time_s = start.elapsed().as_secs_f64();
            set.write_csv(&csv, &table, &m)?;
        }
    }
    Ok(())
}

/// Strict sign changes, ignoring exact zeros.
pub fn sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for &x in v {
        if x != 0.0 {
            if last != 0.0 && x.signum() != last.signum() {
                n += 1;
            }
            last = x;
        }
    }
    n
}

/// Entropy over (θ, t) from the closed-form path, long format.
pub fn entropy_surface(source: &KernelSource, thetas: &[f64], grid: &[f64]) -> Result<(CsvTable, f64)> {
    let ints = DampingIntegrals::build(source, grid)?;
    let series = thetas
        .par_iter()
        .map(|&th| ints.entropy_series(th))
        .collect::<Result<Vec<_>>>()?;
    let max_norm = thetas
        .iter()
        .flat_map(|&th| (0..grid.len()).map(move |i| (th, i)))
        .map(|(th, i)| ints.bloch_norm(i, th))
        .fold(0.0, f64::max);
    let mut table = CsvTable::new(["theta", "lambda_t", "entropy"]);
    for (th, es) in thetas.iter().zip(&series) {
        for (&t, &e) in grid.iter().zip(es) {
            table.push(vec![*th, t, e]);
        }
    }
    Ok((table, max_norm))
}

fn uniform(t_max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| t_max * i as f64 / (points - 1) as f64)
        .collect()
}

fn surface_config(detuning: f64, temperature: f64, o: &Overrides) -> Result<ResolvedRun> {
    resolve_with(
        figure_config(
            0.9,
            detuning,
            temperature,
            SURFACE_T_MAX,
            SLICE_POINTS,
            SERIES_THETA,
            PathChoice::Both,
        ),
        o,
    )
}

fn write_surface(
    set: &mut OutputSet,
    scenario: &str,
    csv: &str,
    run: &ResolvedRun,
    source: &KernelSource,
) -> Result<()> {
    let start = Instant::now();
    let thetas = theta_grid(SURFACE_THETAS);
    let grid = uniform(SURFACE_T_MAX, SURFACE_POINTS);
    let (table, max_norm) = entropy_surface(source, &thetas, &grid)?;
    let pointer = pointer_angle(source, POINTER_T_MAX, SURFACE_THETAS)?;
    let mut m = Manifest::new(scenario, csv);
    m.parameters = parameters_json(run);
    m.parameters["surface"] = json!({
        "thetas": SURFACE_THETAS,
        "t_max": SURFACE_T_MAX,
        "points": SURFACE_POINTS,
        "path": "analytic",
    });
    m.tolerances = json!({ "bloch_norm": 1.0 + 1e-9 });
    m.invariants
        .push(InvariantCheck::at_most("analytic.bloch_norm", max_norm, 1.0 + 1e-9));
    m.deviation = Some(json!({
        "pointer_theta": pointer.theta_p,
        "pointer_index": pointer.index,
        "pointer_t_max": POINTER_T_MAX,
    }));
    m.notes = run.notes.clone();
    m.wall_time_s = start.elapsed().as_secs_f64();
    set.write_csv(csv, &table, &m)
}

fn fig4(set: &mut OutputSet, o: &Overrides) -> Result<()> {
    let run = surface_config(0.1, 0.0, o)?;
    let source = run.evolve.kernel_source(&run.system)?;
    write_surface(set, "fig4", "fig4_entropy_surface.csv", &run, &source)?;

    // Slices at θ = 0, π/2, π on a finer time grid.
    let start = Instant::now();
    let path = run.config.run.path;
    let slice_thetas = [0.0, PI / 2.0, PI];
    let grid = &run.grid;
    let trajs = slice_thetas
        .par_iter()
        .map(|&th| -> Result<(Option<Trajectory>, Option<Trajectory>)> {
            let a = InitialAngles::new(th, 0.0)?;
            let ode = if path.wants_ode() {
                Some(evolve(&a.state(), grid, &run.evolve, &source)?)
            } else {
                None
            };
            let an = if path.wants_analytic() {
                Some(bloch_analytic(&a, grid, &source)?)
            } else {
                None
            };
            Ok((ode, an))
        })
        .collect::<Result<Vec<_>>>()?;

    let csv = "fig4_entropy_slices.csv";
    let mut table = CsvTable::new([
        "lambda_t",
        "entropy_theta_0",
        "entropy_theta_pi_2",
        "entropy_theta_pi",
    ]);
    let primary = |k: usize| -> &Trajectory {
        let (ode, an) = &trajs[k];
        an.as_ref().or(ode.as_ref()).expect("at least one path")
    };
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        for k in 0..3 {
            row.push(primary(k).points[i].entropy);
        }
        table.push(row);
    }
    let mut m = Manifest::new("fig4", csv);
    m.parameters = parameters_json(&run);
    m.parameters["slices"] = json!({ "thetas": slice_thetas });
    m.tolerances = tolerances_json(&run);
    let mut worst = 0.0f64;
    let mut worst_entropy = 0.0f64;
    for (k, (ode, an)) in trajs.iter().enumerate() {
        for (tag, tr) in [("ode", ode), ("analytic", an)] {
            if let Some(tr) = tr {
                m.invariants.extend(trajectory_checks(
                    &format!("theta_{k}.{tag}."),
                    &tr.diagnostics,
                ));
            }
        }
        if let (Some(o), Some(a)) = (ode, an) {
            let (dev, _, de) = path_deviation(a, o);
            worst = worst.max(dev);
            worst_entropy = worst_entropy.max(de);
        }
    }
    if path == PathChoice::Both {
        let scored = !(run.evolve.include_nl || run.evolve.include_lamb_shift);
        m.deviation = Some(json!({
            "compared": "analytic vs ode",
            "max_abs": worst,
            "max_entropy_abs": worst_entropy,
            "tolerance": tolerance::PATHS_ABS,
            "pass": if scored { Some(worst <= tolerance::PATHS_ABS) } else { None },
        }));
    }
    m.notes = run.notes.clone();
    m.wall_time_s = start.elapsed().as_secs_f64();
    set.write_csv(csv, &table, &m)
}

fn fig5(set: &mut OutputSet, o: &Overrides) -> Result<()> {
    let run = surface_config(10.0, 1.0, o)?;
    let source = run.evolve.kernel_source(&run.system)?;
    write_surface(set, "fig5", "fig5_entropy_surface.csv", &run, &source)?;

    let start = Instant::now();
    let scans = FIG5_DETUNINGS
        .par_iter()
        .map(|&d| {
            let r = surface_config(d, 1.0, o)?;
            let src = r.evolve.kernel_source(&r.system)?;
            pointer_angle(&src, POINTER_T_MAX, SURFACE_THETAS)
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = "fig5_pointer.csv";
    let mut table = CsvTable::new(["detuning", "theta_p", "min_mean_entropy"]);
    for (d, s) in FIG5_DETUNINGS.iter().zip(&scans) {
        table.push(vec![*d, s.theta_p, s.mean_entropy[s.index]]);
    }
    let mut m = Manifest::new("fig5", csv);
    m.parameters = parameters_json(&run);
    m.parameters["pointer"] = json!({
        "detunings": FIG5_DETUNINGS,
        "thetas": SURFACE_THETAS,
        "t_max": POINTER_T_MAX,
        "criterion": "argmin of time-averaged entropy, ties toward larger theta",
    });
    m.tolerances = json!({ "tie": crate::solution::POINTER_TIE_TOL });
    let in_range = scans.iter().all(|s| (0.0..=PI).contains(&s.theta_p));
    m.invariants.push(InvariantCheck {
        name: "theta_p_in_range".into(),
        value: if in_range { 1.0 } else { 0.0 },
        threshold: 1.0,
        pass: in_range,
    });
    m.notes = run.notes.clone();
    m.wall_time_s = start.elapsed().as_secs_f64();
    set.write_csv(csv, &table, &m)
}

/// Convenience for building an [`OpenSystem`] with figure defaults.
pub fn figure_system(ratio: f64, detuning: f64, temperature: f64) -> Result<OpenSystem> {
    Ok(figure_config(ratio, detuning, temperature, 1.0, 2, 0.0, PathChoice::Ode)
        .resolve()?
        .system)
}
