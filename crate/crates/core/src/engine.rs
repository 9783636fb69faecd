//! Direct integration of the second-order time-convolutionless master
//! equation in the dressed basis:
//!
//! ```text
//! dρ̄/dt = −i[H̄_eff + H̄_L, ρ̄] + L[ρ̄] + NL[ρ̄]
//! ```
//!
//! `H̄_eff = (ω_s/2) C̄_z`, `L` is the Lindblad dissipator with the
//! time-dependent rates from [`crate::bath`], `NL` the cross-channel
//! non-Lindblad term and `H̄_L` the Lamb shift. The last two are off by
//! default.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{Channel, KernelGrid, KernelSample, KernelSource, OpenSystem, RateSample};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, I};
use crate::model::{chiral, DressedParams, QubitState};
use crate::ode::{self, StepControl};
use crate::solution;

/// Abort thresholds applied to every accepted step.
pub const TRACE_DRIFT_ABORT: f64 = 1e-7;
pub const NEGATIVE_EIGENVALUE_ABORT: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSource {
    OnTheFly,
    /// Kernels tabulated every `spacing` and linearly interpolated.
    PrecomputedGrid { spacing: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_max: f64,
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub include_nl: bool,
    pub include_lamb_shift: bool,
    pub rate_source: RateSource,
}

impl EvolveConfig {
    pub fn new(t_max: f64) -> Self {
        EvolveConfig {
            t_max,
            initial_step: 1e-4,
            rtol: 1e-10,
            atol: 1e-12,
            include_nl: false,
            include_lamb_shift: false,
            rate_source: RateSource::OnTheFly,
        }
    }

    pub fn with_tolerance(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self.atol = 1e-2 * rtol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) {
            return Err(Error::param("t_max", "must be positive"));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.initial_step > 0.0) {
            return Err(Error::param("tolerance", "tolerances and initial step must be positive"));
        }
        if let RateSource::PrecomputedGrid { spacing } = self.rate_source {
            if !(spacing > 0.0) {
                return Err(Error::param("spacing", "must be positive"));
            }
        }
        Ok(())
    }

    /// Kernel access matching `rate_source`; a grid is built over `[0, t_max]`.
    pub fn kernel_source(&self, sys: &OpenSystem) -> Result<KernelSource> {
        Ok(match self.rate_source {
            RateSource::OnTheFly => KernelSource::on_the_fly(*sys),
            RateSource::PrecomputedGrid { spacing } => KernelSource::gridded(
                *sys,
                Arc::new(KernelGrid::build(sys, self.t_max, spacing)?),
            ),
        })
    }
}

/// Which terms of the generator are switched on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GeneratorTerms {
    pub nl: bool,
    pub lamb_shift: bool,
}

impl From<&EvolveConfig> for GeneratorTerms {
    fn from(c: &EvolveConfig) -> Self {
        GeneratorTerms {
            nl: c.include_nl,
            lamb_shift: c.include_lamb_shift,
        }
    }
}

/// `D[C]ρ = CρC† − ½{C†C, ρ}`.
pub fn dissipator(c: &Mat2, rho: &Mat2) -> Mat2 {
    let cd = c.dagger();
    *c * *rho * cd - (cd * *c).anticommutator(rho).scale_re(0.5)
}

/// Lindblad part with the given rates.
pub fn lindblad(rho: &Mat2, rates: &RateSample) -> Mat2 {
    dissipator(&chiral::z(), rho) * rates.gamma_z
        + dissipator(&chiral::plus(), rho) * rates.gamma_plus
        + dissipator(&chiral::minus(), rho) * rates.gamma_minus
}

/// `H̄_L = Im(Γ_0 − Γ′_0) δ_0² C̄_z² + Σ_{q=±} Im(Γ_q − Γ′_q) δ_q² C̄_q† C̄_q`.
pub fn lamb_shift_hamiltonian(k: &KernelSample, d: &DressedParams) -> Mat2 {
    let im = |ch: Channel| {
        let (g, gp) = k.get(ch);
        (g - gp).im
    };
    let z = chiral::z();
    let (p, m) = (chiral::plus(), chiral::minus());
    (z * z) * (im(Channel::Zero) * d.delta_0 * d.delta_0)
        + (p.dagger() * p) * (im(Channel::Plus) * d.delta_plus * d.delta_plus)
        + (m.dagger() * m) * (im(Channel::Minus) * d.delta_minus * d.delta_minus)
}

/// The six kernel-weighted groups of the non-Lindblad term, before the
/// Hermitian conjugate is added. Order: Γ_0, Γ_+, Γ_−, Γ′_0, Γ′_+, Γ′_−; the
/// overall minus signs of the Γ_− and Γ′_− groups are already applied.
pub fn nl_terms(rho: &Mat2, k: &KernelSample, d: &DressedParams) -> [Mat2; 6] {
    let z = chiral::z();
    let p = chiral::plus();
    let m = chiral::minus();
    let r = *rho;
    // A ρ B − ρ B A
    let sw = |a: &Mat2, b: &Mat2| *a * r * *b - r * *b * *a;
    let (d0, dp, dm) = (d.delta_0, d.delta_plus, d.delta_minus);
    let (g0, gp0) = k.get(Channel::Zero);
    let (gplus, gpplus) = k.get(Channel::Plus);
    let (gminus, gpminus) = k.get(Channel::Minus);

    [
        (sw(&z, &m) * (d0 * dp) - sw(&z, &p) * (d0 * dm)) * g0,
        (sw(&p, &z) * (d0 * dp) - sw(&p, &p) * (dp * dm)) * gplus,
        -((sw(&m, &z) * (d0 * dm) + sw(&m, &m) * (dp * dm)) * gminus),
        (sw(&m, &z) * (d0 * dp) - sw(&p, &z) * (d0 * dm)) * gp0,
        (sw(&z, &p) * (d0 * dp) - sw(&p, &p) * (dp * dm)) * gpplus,
        -((sw(&z, &m) * (d0 * dm) + sw(&m, &m) * (dp * dm)) * gpminus),
    ]
}

/// `NL[ρ̄] = X + X†` with X the sum of [`nl_terms`].
pub fn nl_superoperator(rho: &Mat2, k: &KernelSample, d: &DressedParams) -> Mat2 {
    let x = nl_terms(rho, k, d)
        .into_iter()
        .fold(Mat2::zero(), |acc, t| acc + t);
    x + x.dagger()
}

/// Right-hand side of the master equation for given kernels.
pub fn generator(rho: &Mat2, k: &KernelSample, d: &DressedParams, terms: GeneratorTerms) -> Mat2 {
    d.hamiltonian().commutator(rho).scale(-I) + bath_generator(rho, k, d, terms)
}

/// Everything in [`generator`] except the bare precession `-i[H̄, ρ̄]`.
fn bath_generator(rho: &Mat2, k: &KernelSample, d: &DressedParams, terms: GeneratorTerms) -> Mat2 {
    let rates = RateSample::from_kernels(k, d);
    let mut out = lindblad(rho, &rates);
    if terms.lamb_shift {
        out += lamb_shift_hamiltonian(k, d).commutator(rho).scale(-I);
    }
    if terms.nl {
        out += nl_superoperator(rho, k, d);
    }
    out
}

/// `e^{iH̄t} ρ e^{-iH̄t}` for the diagonal H̄ = ω_s C̄_z / 2: a phase on the coherence.
fn rotate(rho: &Mat2, omega_s: f64, t: f64) -> Mat2 {
    let phase = Complex64::from_polar(1.0, omega_s * t);
    let mut m = *rho;
    m.0[0][1] *= phase;
    m.0[1][0] *= phase.conj();
    m
}

/// `dρ̄/dt` at time t.
pub fn rhs(t: f64, rho: &QubitState, source: &KernelSource, cfg: &EvolveConfig) -> Result<Mat2> {
    let k = source.sample(t)?;
    Ok(generator(rho.matrix(), &k, &source.system.dressed, cfg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionPath {
    Ode,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: QubitState,
    pub rates: RateSample,
    pub entropy: f64,
}

/// Invariant bookkeeping collected while producing a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    /// Largest `max|ρ − ρ†|` seen at an output sample before re-Hermitizing.
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub max_purity: f64,
    pub max_bloch_norm: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            max_trace_drift: 0.0,
            max_hermiticity_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_purity: 0.0,
            max_bloch_norm: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }
}

impl Diagnostics {
    pub(crate) fn observe(&mut self, rho: &Mat2) {
        self.max_trace_drift = self.max_trace_drift.max((rho.trace().re - 1.0).abs());
        let [lo, _] = rho.hermitian_eigenvalues();
        self.min_eigenvalue = self.min_eigenvalue.min(lo);
        self.max_purity = self.max_purity.max((*rho * *rho).trace().re);
    }

    pub fn trace_ok(&self) -> bool {
        self.max_trace_drift <= 1e-9
    }

    pub fn hermiticity_ok(&self) -> bool {
        self.max_hermiticity_defect <= 1e-10
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_eigenvalue >= -1e-9
    }

    pub fn purity_ok(&self) -> bool {
        self.max_purity <= 1.0 + 1e-9
    }

    pub fn all_ok(&self) -> bool {
        self.trace_ok() && self.hermiticity_ok() && self.positivity_ok() && self.purity_ok()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub system: OpenSystem,
    pub config: Option<EvolveConfig>,
    pub path: EvolutionPath,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn bloch(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| p.state.bloch()).collect()
    }

    pub fn final_bloch(&self) -> [f64; 3] {
        self.points.last().map_or([0.0; 3], |p| p.state.bloch())
    }

    /// Largest component-wise Bloch deviation from another trajectory on the
    /// same grid.
    pub fn max_bloch_deviation(&self, other: &Trajectory) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .flat_map(|(a, b)| {
                let (ra, rb) = (a.state.bloch(), b.state.bloch());
                (0..3).map(move |i| (ra[i] - rb[i]).abs())
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::InvalidGrid("empty".into())),
        Some(&t0) if t0 != 0.0 => return Err(Error::InvalidGrid("must start at t = 0".into())),
        _ => {}
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Abort when an accepted step leaves the trace or positivity budget.
pub fn step_guard(t: f64, rho: &Mat2) -> Result<()> {
    let drift = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    if drift > TRACE_DRIFT_ABORT {
        return Err(Error::TraceDrift { t, drift });
    }
    let [lo, _] = rho.hermitian_eigenvalues();
    if lo < NEGATIVE_EIGENVALUE_ABORT {
        return Err(Error::PositivityViolation { t, value: lo });
    }
    Ok(())
}

/// Integrate from `rho0` at t = 0 and sample on `grid`.
pub fn evolve(
    rho0: &QubitState,
    grid: &[f64],
    cfg: &EvolveConfig,
    source: &KernelSource,
) -> Result<Trajectory> {
    cfg.validate()?;
    validate_grid(grid)?;
    let rho0 = QubitState::new(*rho0.matrix())?;
    let t_end = *grid.last().unwrap();
    if t_end > cfg.t_max * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid(format!(
            "grid ends at {t_end} beyond t_max = {}",
            cfg.t_max
        )));
    }
    let d = source.system.dressed;
    let terms = GeneratorTerms::from(cfg);
    let ctl = StepControl {
        rtol: cfg.rtol,
        atol: cfg.atol,
        h_init: cfg.initial_step,
        // Keep each step within about a radian of the fastest kernel phase.
        h_max: 1.0 / source.system.max_channel_detuning().max(source.system.bath.lambda),
        knot_spacing: source.grid().map(|g| g.spacing()),
        ..Default::default()
    };

    let mut diag = Diagnostics::default();
    diag.observe(rho0.matrix());
    // The solver works in the frame co-rotating with the bare precession, so
    // only the slow bath-driven dynamics set the step size.
    let (states, stats) = ode::integrate(
        |t, rho| {
            let lab = rotate(rho, d.omega_s, -t);
            Ok(rotate(&bath_generator(&lab, &source.sample(t)?, &d, terms), d.omega_s, t))
        },
        0.0,
        *rho0.matrix(),
        grid,
        &ctl,
        |t, rho| {
            diag.observe(rho);
            step_guard(t, rho)
        },
    )?;
    diag.accepted_steps = stats.accepted;
    diag.rejected_steps = stats.rejected;

    let mut points = Vec::with_capacity(grid.len());
    let mut max_correction: f64 = 0.0;
    for (i, (&t, rho)) in grid.iter().zip(&states).enumerate() {
        let rho = if i == 0 { *rho0.matrix() } else { rotate(rho, d.omega_s, -t) };
        let defect = rho.hermiticity_defect();
        diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(defect);
        let herm = rho.hermitian_part();
        max_correction = max_correction.max((herm - rho).max_abs());
        diag.observe(&herm);
        let state = QubitState::from_matrix_unchecked(herm);
        let r = state.bloch();
        diag.max_bloch_norm = diag
            .max_bloch_norm
            .max((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
        points.push(TrajectoryPoint {
            t,
            state,
            rates: source.rates(t)?,
            entropy: solution::entropy_of_state(&state),
        });
    }
    log::debug!(
        "evolve: {} accepted / {} rejected steps, max re-Hermitization {:e}",
        stats.accepted,
        stats.rejected,
        max_correction
    );

    Ok(Trajectory {
        points,
        system: source.system,
        config: Some(*cfg),
        path: EvolutionPath::Ode,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathSpec, OccupationStrategy};
    use crate::model::SystemParams;

    fn system(u2: f64, detuning: f64, temperature: f64, ratio: f64) -> OpenSystem {
        let s = SystemParams::from_dressed(100.0, ratio, 500.0).unwrap();
        OpenSystem::new(
            s,
            BathSpec {
                u2,
                lambda: 1.0,
                omega_0: 500.0 + detuning,
                temperature,
                strategy: OccupationStrategy::ResonantApprox,
            },
        )
        .unwrap()
    }

    fn random_kernels(seed: u64) -> KernelSample {
        // Small deterministic LCG; enough variety for algebraic checks.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut k = KernelSample {
            t: 1.0,
            gamma: [Complex64::new(0.0, 0.0); 3],
            gamma_prime: [Complex64::new(0.0, 0.0); 3],
            error: 0.0,
        };
        for c in 0..3 {
            k.gamma[c] = Complex64::new(next(), next());
            k.gamma_prime[c] = Complex64::new(next(), next());
        }
        k
    }

    fn random_state(seed: u64) -> Mat2 {
        let th = (seed as f64 * 0.731).rem_euclid(std::f64::consts::PI);
        let ph = (seed as f64 * 1.913).rem_euclid(std::f64::consts::TAU);
        let len = (seed as f64 * 0.377).rem_euclid(1.0);
        QubitState::from_bloch_unchecked([
            len * th.sin() * ph.cos(),
            len * th.sin() * ph.sin(),
            len * th.cos(),
        ])
        .matrix()
        .to_owned()
    }

    #[test]
    fn closed_system_is_pure_precession() {
        let d = system(0.1, 0.1, 0.0, 0.4).dressed;
        let rho = random_state(7);
        let k = KernelSample {
            t: 0.0,
            gamma: [Complex64::new(0.0, 0.0); 3],
            gamma_prime: [Complex64::new(0.0, 0.0); 3],
            error: 0.0,
        };
        let out = generator(&rho, &k, &d, GeneratorTerms { nl: true, lamb_shift: true });
        let expected = d.hamiltonian().commutator(&rho).scale(-I);
        assert!((out - expected).max_abs() < 1e-15);
    }

    #[test]
    fn balanced_pumping_leaves_mixed_population_fixed() {
        let rho = Mat2::identity().scale_re(0.5);
        let rates = RateSample {
            t: 0.0,
            gamma_z: 0.3,
            gamma_plus: 0.7,
            gamma_minus: 0.7,
        };
        let drho = lindblad(&rho, &rates);
        let dz = (drho.get(0, 0) - drho.get(1, 1)).re;
        assert!(dz.abs() < 1e-16);
    }

    #[test]
    fn lindblad_part_is_traceless() {
        for seed in 0..50 {
            let rho = random_state(seed);
            let k = random_kernels(seed);
            let d = system(0.1, 0.1, 0.0, 0.1 + 0.015 * seed as f64).dressed;
            let out = generator(&rho, &k, &d, GeneratorTerms::default());
            assert!(out.trace().norm() < 1e-14);
        }
    }

    #[test]
    fn nl_vanishes_without_mixing() {
        let s = SystemParams::new(150.0, 50.0, 0.0).unwrap();
        let d = crate::model::dressed_params(&s).unwrap();
        for seed in 0..20 {
            let out = nl_superoperator(&random_state(seed), &random_kernels(seed), &d);
            assert_eq!(out.max_abs(), 0.0);
        }
    }

    #[test]
    fn nl_is_hermitian_for_real_equal_kernels() {
        let d = system(0.1, 0.1, 0.0, 0.4).dressed;
        let g = Complex64::new(0.37, 0.0);
        let k = KernelSample {
            t: 1.0,
            gamma: [g; 3],
            gamma_prime: [g; 3],
            error: 0.0,
        };
        for seed in 0..20 {
            let out = nl_superoperator(&random_state(seed), &k, &d);
            assert!(out.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn nl_is_traceless_on_random_instances() {
        for seed in 0..100 {
            let d = system(0.1, 0.1, 0.0, -0.9 + 0.018 * seed as f64).dressed;
            let rho = random_state(seed + 1000);
            let k = random_kernels(seed);
            let terms = nl_terms(&rho, &k, &d);
            for t in &terms {
                assert!(t.trace().norm() < 1e-14);
            }
            assert!(nl_superoperator(&rho, &k, &d).trace().norm() < 1e-14);
        }
    }

    #[test]
    fn lamb_shift_is_hermitian_and_diagonal() {
        let d = system(0.1, 0.1, 0.0, 0.4).dressed;
        let h = lamb_shift_hamiltonian(&random_kernels(3), &d);
        assert!(h.hermiticity_defect() < 1e-16);
        assert_eq!(h.get(0, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn excited_state_is_stationary_without_bath() {
        let mut sys = system(0.1, 0.1, 0.0, 0.4);
        sys.bath.u2 = 0.0;
        let grid: Vec<f64> = (0..=100).map(|i| 0.05 * i as f64).collect();
        let cfg = EvolveConfig::new(5.0);
        let traj = evolve(&QubitState::excited(), &grid, &cfg, &KernelSource::on_the_fly(sys))
            .unwrap();
        for p in &traj.points {
            assert!((p.state.bloch()[2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn amplitude_damping_reduction() {
        // δ_0 = 0, δ_+ = 1, T = 0: R_z(t) = (1 + R_z(0)) e^{−p(t)} − 1 with p = ∫γ_−.
        let s = SystemParams::new(600.0, 500.0, 0.0).unwrap();
        let sys = OpenSystem::new(
            s,
            BathSpec {
                u2: 0.2,
                lambda: 1.0,
                omega_0: 602.0,
                temperature: 0.0,
                strategy: OccupationStrategy::ResonantApprox,
            },
        )
        .unwrap();
        let src = KernelSource::on_the_fly(sys);
        let grid: Vec<f64> = (0..=400).map(|i| 0.025 * i as f64).collect();
        let theta: f64 = 0.6;
        let traj = evolve(
            &QubitState::from_angles(theta, 0.0),
            &grid,
            &EvolveConfig::new(10.0),
            &src,
        )
        .unwrap();
        let gl = crate::quad::GaussLegendre::new(12);
        let mut p = 0.0;
        for (i, pt) in traj.points.iter().enumerate() {
            if i > 0 {
                p += gl.integrate(grid[i - 1], grid[i], |t| src.rates(t).unwrap().gamma_minus);
            }
            let expected = (1.0 + theta.cos()) * (-p).exp() - 1.0;
            assert!((pt.state.bloch()[2] - expected).abs() < 1e-8, "t = {}", pt.t);
        }
    }

    #[test]
    fn invariants_hold_with_nl_enabled() {
        let sys = system(0.1, 0.1, 100.0, 0.4);
        let grid: Vec<f64> = (0..=500).map(|i| 0.02 * i as f64).collect();
        let mut cfg = EvolveConfig::new(10.0);
        cfg.include_nl = true;
        cfg.include_lamb_shift = true;
        let traj = evolve(
            &QubitState::from_angles(1.0, 0.5),
            &grid,
            &cfg,
            &KernelSource::on_the_fly(sys),
        )
        .unwrap();
        let d = &traj.diagnostics;
        assert!(d.all_ok(), "{d:?}");
    }

    #[test]
    fn grid_must_start_at_zero_and_increase() {
        let sys = system(0.1, 0.1, 0.0, 0.4);
        let src = KernelSource::on_the_fly(sys);
        let cfg = EvolveConfig::new(1.0);
        let s = QubitState::excited();
        assert!(evolve(&s, &[0.1, 0.2], &cfg, &src).is_err());
        assert!(evolve(&s, &[0.0, 0.2, 0.2], &cfg, &src).is_err());
        assert!(evolve(&s, &[0.0, 2.0], &cfg, &src).is_err());
    }

    #[test]
    fn guard_rejects_drift_and_negative_populations() {
        assert!(step_guard(0.0, &Mat2::from_real(0.5, 0.0, 0.0, 0.5)).is_ok());
        assert!(matches!(
            step_guard(1.0, &Mat2::from_real(0.5, 0.0, 0.0, 0.5 + 1e-6)),
            Err(Error::TraceDrift { .. })
        ));
        assert!(matches!(
            step_guard(1.0, &Mat2::from_real(1.0 + 1e-5, 0.0, 0.0, -1e-5)),
            Err(Error::PositivityViolation { .. })
        ));
        // Small transient negativity is tolerated.
        assert!(step_guard(1.0, &Mat2::from_real(1.0 + 1e-8, 0.0, 0.0, -1e-8)).is_ok());
    }
}
