//! Lorentzian bosonic bath: spectral density, thermal occupation, the
//! second-order memory kernels Γ_q(t), Γ′_q(t) and the time-dependent decay
//! rates built from them.
//!
//! For a channel q ∈ {0, +, −} the kernels are
//!
//! ```text
//! Γ′_q(t) = ∫ dω′ J(ω′) (n̄(ω′) + 1) (e^{iΔ_q t} − 1) / (iΔ_q),   Δ_q = ω′ − ω − q ω_s
//! Γ_q(t)  = ∫ dω′ J(ω′)  n̄(ω′)      (e^{iΔ_q t} − 1) / (iΔ_q)
//! ```
//!
//! with the inner time integral always done in closed form. Two strategies
//! handle the frequency integral, see [`OccupationStrategy`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dressed_params, DressedParams, SystemParams};
use crate::quad::{integrate_adaptive, QuadOptions};

/// How the thermal occupation enters the frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OccupationStrategy {
    /// Freeze n̄ at the channel frequency ω + qω_s and integrate the
    /// Lorentzian over the whole real line in closed form.
    ResonantApprox,
    /// Integrate J(ω′)n̄(ω′) numerically over `[ir_cutoff, omega_max]`.
    /// `omega_max = None` selects `max(ω_0, ω + ω_s) + 50λ`.
    ExactQuadrature {
        ir_cutoff: f64,
        omega_max: Option<f64>,
    },
}

impl OccupationStrategy {
    pub fn exact_default(lambda: f64) -> Self {
        OccupationStrategy::ExactQuadrature {
            ir_cutoff: 1e-6 * lambda,
            omega_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Coupling weight u². Zero decouples the bath (closed system).
    pub u2: f64,
    /// Lorentzian width λ; the memory time is 1/λ.
    pub lambda: f64,
    /// Center frequency ω_0.
    pub omega_0: f64,
    /// Temperature in frequency units (k_B = 1).
    pub temperature: f64,
    pub strategy: OccupationStrategy,
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.u2 >= 0.0) || !self.u2.is_finite() {
            return Err(Error::param("u2", "must be non-negative and finite"));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", "must be positive"));
        }
        if !self.omega_0.is_finite() {
            return Err(Error::param("omega_0", "must be finite"));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::param("temperature", "must be non-negative"));
        }
        if let OccupationStrategy::ExactQuadrature {
            ir_cutoff,
            omega_max,
        } = self.strategy
        {
            if !(ir_cutoff > 0.0) {
                return Err(Error::param("ir_cutoff", "must be positive"));
            }
            if let Some(w) = omega_max {
                if !(w > ir_cutoff) {
                    return Err(Error::param("omega_max", "must exceed ir_cutoff"));
                }
            }
        }
        Ok(())
    }
}

/// Dissipation channel of the dressed interaction operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Zero,
    Plus,
    Minus,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Zero, Channel::Plus, Channel::Minus];

    /// q as a number: 0, +1, −1.
    pub fn sign(self) -> f64 {
        match self {
            Channel::Zero => 0.0,
            Channel::Plus => 1.0,
            Channel::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Channel::Zero => 0,
            Channel::Plus => 1,
            Channel::Minus => 2,
        }
    }
}

/// System, its dressed diagonalization and the bath it couples to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenSystem {
    pub system: SystemParams,
    pub dressed: DressedParams,
    pub bath: BathSpec,
}

impl OpenSystem {
    pub fn new(system: SystemParams, bath: BathSpec) -> Result<Self> {
        system.validate()?;
        bath.validate()?;
        let dressed = dressed_params(&system)?;
        Ok(OpenSystem {
            system,
            dressed,
            bath,
        })
    }

    /// Bath frequency resonant with channel q: ω + qω_s.
    pub fn channel_frequency(&self, ch: Channel) -> f64 {
        self.system.drive + ch.sign() * self.dressed.omega_s
    }

    /// δ_q = ω_0 − ω − qω_s.
    pub fn channel_detuning(&self, ch: Channel) -> f64 {
        self.bath.omega_0 - self.channel_frequency(ch)
    }

    /// Largest |δ_q|: the fastest oscillation in any kernel.
    pub fn max_channel_detuning(&self) -> f64 {
        Channel::ALL
            .iter()
            .map(|&ch| self.channel_detuning(ch).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_closed(&self) -> bool {
        self.bath.u2 == 0.0
    }

    /// Upper limit of the frequency integral under exact quadrature.
    pub fn omega_max(&self) -> Option<f64> {
        match self.bath.strategy {
            OccupationStrategy::ResonantApprox => None,
            OccupationStrategy::ExactQuadrature { omega_max, .. } => Some(omega_max.unwrap_or_else(
                || {
                    self.bath.omega_0.max(self.channel_frequency(Channel::Plus))
                        + 50.0 * self.bath.lambda
                },
            )),
        }
    }
}

/// `J(ω′) = u²λ² / (2π[(ω′ − ω_0)² + λ²])`.
pub fn spectral_density(omega: f64, b: &BathSpec) -> f64 {
    let x = omega - b.omega_0;
    b.u2 * b.lambda * b.lambda / (2.0 * PI * (x * x + b.lambda * b.lambda))
}

/// Bose–Einstein occupation `1/(e^{ω/T} − 1)`, zero at T = 0.
pub fn mean_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// `e^w − 1` without cancellation for small |w|.
pub(crate) fn cexpm1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let half_sin = (0.5 * b).sin();
    Complex64::new(
        a.exp_m1() * b.cos() - 2.0 * half_sin * half_sin,
        a.exp() * b.sin(),
    )
}

/// `(e^{iΔt} − 1)/(iΔ)`, continuous through Δ = 0 where it equals t.
pub(crate) fn phase_integral(delta: f64, t: f64) -> Complex64 {
    let x = delta * t;
    if x.abs() < 1e-4 {
        // t·(1 + ix/2 − x²/6 − ix³/24)
        let x2 = x * x;
        Complex64::new(1.0 - x2 / 6.0, 0.5 * x - x * x2 / 24.0) * t
    } else {
        cexpm1(Complex64::new(0.0, x)) / Complex64::new(0.0, delta)
    }
}

/// Zero-temperature kernel of a channel with detuning δ over the full real
/// line: `(u²λ/2)(1 − e^{−(λ−iδ)t})/(λ − iδ)`.
pub fn lorentzian_kernel(t: f64, detuning: f64, u2: f64, lambda: f64) -> Complex64 {
    let z = Complex64::new(lambda, -detuning);
    -cexpm1(-z * t) / z * (0.5 * u2 * lambda)
}

/// Γ_q(t), Γ′_q(t) and the numerical error estimate (zero for the closed form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelKernel {
    pub gamma: Complex64,
    pub gamma_prime: Complex64,
    pub error: f64,
}

/// Evaluate both kernels of one channel at time t.
pub fn kernels(t: f64, ch: Channel, sys: &OpenSystem) -> Result<ChannelKernel> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be non-negative"));
    }
    let zero = ChannelKernel {
        gamma: Complex64::new(0.0, 0.0),
        gamma_prime: Complex64::new(0.0, 0.0),
        error: 0.0,
    };
    if sys.is_closed() {
        return Ok(zero);
    }
    let b = &sys.bath;
    match b.strategy {
        OccupationStrategy::ResonantApprox => {
            let n = mean_occupation(sys.channel_frequency(ch), b.temperature)?;
            if t == 0.0 {
                return Ok(zero);
            }
            let k = lorentzian_kernel(t, sys.channel_detuning(ch), b.u2, b.lambda);
            Ok(ChannelKernel {
                gamma: k * n,
                gamma_prime: k * (n + 1.0),
                error: 0.0,
            })
        }
        OccupationStrategy::ExactQuadrature { ir_cutoff, .. } => {
            if t == 0.0 {
                return Ok(zero);
            }
            exact_kernels(t, ch, sys, ir_cutoff, sys.omega_max().unwrap())
        }
    }
}

fn exact_kernels(
    t: f64,
    ch: Channel,
    sys: &OpenSystem,
    ir_cutoff: f64,
    omega_max: f64,
) -> Result<ChannelKernel> {
    let b = &sys.bath;
    let wc = sys.channel_frequency(ch);
    let opts = QuadOptions {
        abs_tol: 1e-10 * b.u2,
        rel_tol: 1e-8,
        max_panel: Some(PI / (5.0 * t)),
        max_panels: 2_000_000,
    };
    let mut breaks = vec![
        b.omega_0,
        b.omega_0 - b.lambda,
        b.omega_0 + b.lambda,
        b.omega_0 - 5.0 * b.lambda,
        b.omega_0 + 5.0 * b.lambda,
        wc,
    ];
    let mut x = ir_cutoff * 10.0;
    while x < omega_max {
        breaks.push(x);
        x *= 10.0;
    }
    if b.temperature > 0.0 {
        breaks.extend([b.temperature, 5.0 * b.temperature, 20.0 * b.temperature]);
    }

    let vacuum = integrate_adaptive(
        |w| spectral_density(w, b) * phase_integral(w - wc, t),
        ir_cutoff,
        omega_max,
        &breaks,
        &opts,
    )?;
    let thermal = if b.temperature > 0.0 {
        integrate_adaptive(
            |w| {
                let n = 1.0 / (w / b.temperature).exp_m1();
                spectral_density(w, b) * n * phase_integral(w - wc, t)
            },
            ir_cutoff,
            omega_max,
            &breaks,
            &opts,
        )?
    } else {
        crate::quad::QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        }
    };

    // Lorentzian mass above ω_max times a bound on the phase factor there.
    let tail_mass =
        b.u2 * b.lambda / (2.0 * PI) * (0.5 * PI - ((omega_max - b.omega_0) / b.lambda).atan());
    let n_top = if b.temperature > 0.0 {
        1.0 / (omega_max / b.temperature).exp_m1()
    } else {
        0.0
    };
    let phase_bound = t.min(2.0 / (omega_max - wc).abs().max(f64::MIN_POSITIVE));
    let tail = (2.0 * n_top + 1.0) * phase_bound * tail_mass;

    Ok(ChannelKernel {
        gamma: thermal.value,
        gamma_prime: vacuum.value + thermal.value,
        error: vacuum.error + thermal.error + tail,
    })
}

/// All six kernels at one time point, indexed by [`Channel::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub gamma: [Complex64; 3],
    pub gamma_prime: [Complex64; 3],
    pub error: f64,
}

impl KernelSample {
    pub fn get(&self, ch: Channel) -> (Complex64, Complex64) {
        (self.gamma[ch.index()], self.gamma_prime[ch.index()])
    }
}

pub fn kernel_sample(t: f64, sys: &OpenSystem) -> Result<KernelSample> {
    let mut s = KernelSample {
        t,
        gamma: [Complex64::new(0.0, 0.0); 3],
        gamma_prime: [Complex64::new(0.0, 0.0); 3],
        error: 0.0,
    };
    for ch in Channel::ALL {
        let k = kernels(t, ch, sys)?;
        s.gamma[ch.index()] = k.gamma;
        s.gamma_prime[ch.index()] = k.gamma_prime;
        s.error += k.error;
    }
    Ok(s)
}

/// Decay rates of the three Lindblad channels. They may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub gamma_z: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl RateSample {
    /// γ_z = 2δ_0² Re(Γ_0 + Γ′_0),
    /// γ_+ = 2δ_+² Re Γ_+ + 2δ_−² Re Γ′_−,
    /// γ_− = 2δ_−² Re Γ_− + 2δ_+² Re Γ′_+.
    pub fn from_kernels(k: &KernelSample, d: &DressedParams) -> Self {
        let (g0, gp0) = k.get(Channel::Zero);
        let (gplus, gpplus) = k.get(Channel::Plus);
        let (gminus, gpminus) = k.get(Channel::Minus);
        let dp2 = d.delta_plus * d.delta_plus;
        let dm2 = d.delta_minus * d.delta_minus;
        RateSample {
            t: k.t,
            gamma_z: 2.0 * d.delta_0 * d.delta_0 * (g0 + gp0).re,
            gamma_plus: 2.0 * dp2 * gplus.re + 2.0 * dm2 * gpminus.re,
            gamma_minus: 2.0 * dm2 * gminus.re + 2.0 * dp2 * gpplus.re,
        }
    }
}

pub fn decay_rates(t: f64, sys: &OpenSystem) -> Result<RateSample> {
    Ok(RateSample::from_kernels(&kernel_sample(t, sys)?, &sys.dressed))
}

/// Long-time values of the rates: `Re Γ′_q → (n̄_q + 1) u²λ² / (2(λ² + δ_q²))`,
/// the Lorentzian evaluated at the channel frequency times π.
pub fn markovian_limits(sys: &OpenSystem) -> Result<RateSample> {
    let mut k = KernelSample {
        t: f64::INFINITY,
        gamma: [Complex64::new(0.0, 0.0); 3],
        gamma_prime: [Complex64::new(0.0, 0.0); 3],
        error: 0.0,
    };
    if !sys.is_closed() {
        for ch in Channel::ALL {
            let n = mean_occupation(sys.channel_frequency(ch), sys.bath.temperature)?;
            let re = PI * spectral_density(sys.channel_frequency(ch), &sys.bath);
            k.gamma[ch.index()] = Complex64::new(re * n, 0.0);
            k.gamma_prime[ch.index()] = Complex64::new(re * (n + 1.0), 0.0);
        }
    }
    Ok(RateSample::from_kernels(&k, &sys.dressed))
}

/// Kernels tabulated on a uniform grid, linearly interpolated in between.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    spacing: f64,
    samples: Vec<KernelSample>,
}

impl KernelGrid {
    pub fn build(sys: &OpenSystem, t_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::param("spacing", "must be positive"));
        }
        let n = (t_max / spacing).ceil() as usize + 1;
        let samples = (0..n)
            .into_par_iter()
            .map(|i| kernel_sample(i as f64 * spacing, sys))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelGrid { spacing, samples })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn t_max(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn at(&self, t: f64) -> Result<KernelSample> {
        if t < 0.0 || t > self.t_max() * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "t = {t} outside precomputed kernel grid [0, {}]",
                self.t_max()
            )));
        }
        let pos = t / self.spacing;
        let i = (pos.floor() as usize).min(self.samples.len().saturating_sub(2));
        let w = pos - i as f64;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let lerp = |x: Complex64, y: Complex64| x * (1.0 - w) + y * w;
        let mut out = *a;
        out.t = t;
        for c in 0..3 {
            out.gamma[c] = lerp(a.gamma[c], b.gamma[c]);
            out.gamma_prime[c] = lerp(a.gamma_prime[c], b.gamma_prime[c]);
        }
        out.error = a.error.max(b.error);
        Ok(out)
    }
}

/// Kernel access shared by the ODE and the analytic paths: either direct
/// evaluation or interpolation on a precomputed grid.
#[derive(Debug, Clone)]
pub struct KernelSource {
    pub system: OpenSystem,
    grid: Option<Arc<KernelGrid>>,
}

impl KernelSource {
    pub fn on_the_fly(system: OpenSystem) -> Self {
        KernelSource { system, grid: None }
    }

    pub fn gridded(system: OpenSystem, grid: Arc<KernelGrid>) -> Self {
        KernelSource {
            system,
            grid: Some(grid),
        }
    }

    pub fn grid(&self) -> Option<&KernelGrid> {
        self.grid.as_deref()
    }

    pub fn sample(&self, t: f64) -> Result<KernelSample> {
        match &self.grid {
            Some(g) => g.at(t),
            None => kernel_sample(t, &self.system),
        }
    }

    pub fn rates(&self, t: f64) -> Result<RateSample> {
        Ok(RateSample::from_kernels(&self.sample(t)?, &self.system.dressed))
    }
}
