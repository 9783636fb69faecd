//! Closed-form Bloch vector for the Lindblad-only dynamics, von Neumann
//! entropy and pointer-state selection.
//!
//! With `r(t) = ½∫(γ_+ + γ_− + 4γ_z)`, `p(t) = ∫(γ_+ + γ_−)` and
//! `q(t) = ∫ e^{p}(γ_+ − γ_−)`:
//!
//! ```text
//! R_x = e^{−r} cos(ω_s t + φ) sinθ
//! R_y = e^{−r} sin(ω_s t + φ) sinθ
//! R_z = e^{−p} (cosθ + q)
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::KernelSource;
use crate::engine::{validate_grid, Diagnostics, EvolutionPath, Trajectory, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::model::QubitState;
use crate::quad::GaussLegendre;

/// Bloch norms up to this far above 1 are clipped; beyond it they are rejected.
pub const BLOCH_CLIP_TOL: f64 = 1e-6;

/// Gauss–Legendre order used on every sub-panel of the cumulative integrals.
const PANEL_ORDER: usize = 10;
/// Widest sub-panel, in units of 1/λ.
const MAX_PANEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialAngles {
    pub theta: f64,
    pub phi: f64,
}

impl InitialAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::param("theta", format!("{theta} outside [0, π]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::param("phi", format!("{phi} outside [0, 2π)")));
        }
        Ok(InitialAngles { theta, phi })
    }

    pub fn bloch(&self) -> [f64; 3] {
        let (s, c) = self.theta.sin_cos();
        [s * self.phi.cos(), s * self.phi.sin(), c]
    }

    pub fn state(&self) -> QubitState {
        QubitState::from_angles(self.theta, self.phi)
    }
}

/// `r`, `p`, `q` sampled on a caller-supplied time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingIntegrals {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl DampingIntegrals {
    /// Composite Gauss–Legendre on sub-panels no wider than
    /// `min(0.05/λ, 1/max|δ_q|)`. With a precomputed kernel grid the panels
    /// are also split at its nodes, where the interpolated rates have kinks.
    pub fn build(source: &KernelSource, grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        let sys = &source.system;
        let lambda = sys.bath.lambda;
        let max_detuning = sys.max_channel_detuning();
        let mut h_max = MAX_PANEL / lambda;
        if max_detuning > 0.0 {
            h_max = h_max.min(1.0 / max_detuning);
        }
        let knots = source.grid().map(|g| (g.spacing(), g.t_max()));

        let gl = GaussLegendre::new(PANEL_ORDER);
        let smat = gl.integration_matrix();
        let n = grid.len();
        let mut out = DampingIntegrals {
            t: grid.to_vec(),
            r: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
        };
        let (mut r, mut p, mut q) = (0.0, 0.0, 0.0);
        let mut nodes = Vec::with_capacity(PANEL_ORDER);
        for i in 1..n {
            for (a, b) in sub_panels(grid[i - 1], grid[i], h_max, knots) {
                nodes.clear();
                for (x, w) in gl.nodes_on(a, b) {
                    nodes.push((w, source.rates(x)?));
                }
                let half = 0.5 * (b - a);
                for (w, g) in &nodes {
                    r += 0.5 * w * (g.gamma_plus + g.gamma_minus + 4.0 * g.gamma_z);
                }
                let mut dq = 0.0;
                for (j, (w, g)) in nodes.iter().enumerate() {
                    let pj = p + half
                        * smat[j]
                            .iter()
                            .zip(&nodes)
                            .map(|(s, (_, gk))| s * (gk.gamma_plus + gk.gamma_minus))
                            .sum::<f64>();
                    dq += w * pj.exp() * (g.gamma_plus - g.gamma_minus);
                }
                q += dq;
                p += nodes
                    .iter()
                    .map(|(w, g)| w * (g.gamma_plus + g.gamma_minus))
                    .sum::<f64>();
            }
            out.r[i] = r;
            out.p[i] = p;
            out.q[i] = q;
        }
        Ok(out)
    }

    /// Bloch vector at grid index `i`.
    pub fn bloch(&self, i: usize, a: &InitialAngles, omega_s: f64) -> [f64; 3] {
        let t = self.t[i];
        let (st, ct) = a.theta.sin_cos();
        let env = (-self.r[i]).exp() * st;
        let ph = omega_s * t + a.phi;
        [
            env * ph.cos(),
            env * ph.sin(),
            (-self.p[i]).exp() * (ct + self.q[i]),
        ]
    }

    /// `|R|` at grid index `i`; independent of φ and ω_s.
    pub fn bloch_norm(&self, i: usize, theta: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let x = (-self.r[i]).exp() * st;
        let z = (-self.p[i]).exp() * (ct + self.q[i]);
        x.hypot(z)
    }

    /// Entropy along the grid for initial polar angle θ.
    pub fn entropy_series(&self, theta: f64) -> Result<Vec<f64>> {
        (0..self.t.len())
            .map(|i| entropy_of_norm(self.bloch_norm(i, theta)))
            .collect()
    }
}

/// Uniform subdivision of [a, b] into panels ≤ h_max, additionally split at
/// the nodes of a kernel grid `(spacing, t_max)`.
fn sub_panels(a: f64, b: f64, h_max: f64, knots: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut breaks = vec![a];
    if let Some((dx, t_end)) = knots {
        let mut k = (a / dx).floor() as usize + 1;
        while (k as f64) * dx < b && (k as f64) * dx <= t_end {
            let x = k as f64 * dx;
            if x - a > 1e-12 * dx && b - x > 1e-12 * dx {
                breaks.push(x);
            }
            k += 1;
        }
    }
    breaks.push(b);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let m = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / m as f64;
        for j in 0..m {
            let lo = w[0] + j as f64 * h;
            let hi = if j + 1 == m { w[1] } else { lo + h };
            out.push((lo, hi));
        }
    }
    out
}

/// Evaluate the closed-form Bloch vector on `grid`.
pub fn bloch_analytic(a: &InitialAngles, grid: &[f64], source: &KernelSource) -> Result<Trajectory> {
    let ints = DampingIntegrals::build(source, grid)?;
    trajectory_from_integrals(a, &ints, source)
}

pub fn trajectory_from_integrals(
    a: &InitialAngles,
    ints: &DampingIntegrals,
    source: &KernelSource,
) -> Result<Trajectory> {
    let omega_s = source.system.dressed.omega_s;
    let mut diag = Diagnostics::default();
    let mut points = Vec::with_capacity(ints.t.len());
    for (i, &t) in ints.t.iter().enumerate() {
        let state = if i == 0 {
            a.state()
        } else {
            let r = clip_bloch(ints.bloch(i, a, omega_s))?;
            QubitState::from_bloch(r)?
        };
        diag.observe(state.matrix());
        let r = state.bloch();
        diag.max_bloch_norm = diag.max_bloch_norm.max(norm3(r));
        points.push(TrajectoryPoint {
            t,
            state,
            rates: source.rates(t)?,
            entropy: entropy_of_bloch(r)?,
        });
    }
    Ok(Trajectory {
        points,
        system: source.system,
        config: None,
        path: EvolutionPath::Analytic,
        diagnostics: diag,
    })
}

fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn clip_bloch(r: [f64; 3]) -> Result<[f64; 3]> {
    let n = norm3(r);
    if n > 1.0 + BLOCH_CLIP_TOL {
        return Err(Error::BlochNormExceeded(n));
    }
    Ok(if n > 1.0 { r.map(|x| x / n) } else { r })
}

fn xlnx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `E = −Σ v ln v` with `v = (1 ± |R|)/2`, in nats.
pub fn entropy_of_norm(norm: f64) -> Result<f64> {
    if !(norm >= 0.0) || norm > 1.0 + BLOCH_CLIP_TOL {
        return Err(Error::BlochNormExceeded(norm));
    }
    let n = norm.min(1.0);
    Ok(0.0 - (xlnx(0.5 * (1.0 + n)) + xlnx(0.5 * (1.0 - n))))
}

pub fn entropy_of_bloch(r: [f64; 3]) -> Result<f64> {
    entropy_of_norm(norm3(r))
}

/// Entropy from the eigenvalues of ρ; negative eigenvalues count as zero.
pub fn entropy_of_state(s: &QubitState) -> f64 {
    let [a, b] = s.eigenvalues();
    0.0 - (xlnx(a) + xlnx(b))
}

/// `(1/(t_N − t_0)) ∫ f dt` by composite Simpson on a uniform grid with an
/// even number of intervals, trapezoid otherwise.
pub fn time_average(t: &[f64], f: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return f.first().copied().unwrap_or(0.0);
    }
    let span = t[n - 1] - t[0];
    let h = span / (n - 1) as f64;
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    let integral = if uniform && (n - 1).is_multiple_of(2) {
        let inner: f64 = (1..n - 1)
            .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f[i])
            .sum();
        h / 3.0 * (f[0] + f[n - 1] + inner)
    } else {
        t.windows(2)
            .zip(f.windows(2))
            .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
            .sum()
    };
    integral / span
}

/// Ties in the time-averaged entropy closer than this go to the larger θ.
pub const POINTER_TIE_TOL: f64 = 1e-12;
/// Default averaging window, in units of 1/λ.
pub const POINTER_T_MAX: f64 = 20.0;
/// Time samples used for the averaging.
const POINTER_TIME_INTERVALS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerScan {
    pub thetas: Vec<f64>,
    pub mean_entropy: Vec<f64>,
    pub index: usize,
    pub theta_p: f64,
}

/// θ grid with `resolution` points spanning [0, π] inclusive.
pub fn theta_grid(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| PI * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// The initial polar angle (φ = 0) whose time-averaged entropy over
/// `[0, t_max]` is smallest.
pub fn pointer_angle(source: &KernelSource, t_max: f64, resolution: usize) -> Result<PointerScan> {
    if resolution < 64 {
        return Err(Error::param("resolution", "θ grid needs at least 64 points"));
    }
    if !(t_max > 0.0) {
        return Err(Error::param("t_max", "must be positive"));
    }
    let grid: Vec<f64> = (0..=POINTER_TIME_INTERVALS)
        .map(|i| t_max * i as f64 / POINTER_TIME_INTERVALS as f64)
        .collect();
    let ints = DampingIntegrals::build(source, &grid)?;
    let thetas = theta_grid(resolution);
    let mean_entropy = thetas
        .par_iter()
        .map(|&th| Ok(time_average(&grid, &ints.entropy_series(th)?)))
        .collect::<Result<Vec<f64>>>()?;
    let index = argmin_toward_larger(&mean_entropy);
    Ok(PointerScan {
        theta_p: thetas[index],
        thetas,
        mean_entropy,
        index,
    })
}

fn argmin_toward_larger(v: &[f64]) -> usize {
    let mut best = v.len() - 1;
    for i in (0..v.len() - 1).rev() {
        if v[i] < v[best] - POINTER_TIE_TOL {
            best = i;
        }
    }
    best
}
