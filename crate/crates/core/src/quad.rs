//! Numerical integration: Gauss–Legendre rules, a globally adaptive
//! Gauss–Kronrod (7/15) integrator for complex integrands with a panel-width
//! cap for oscillatory integrands, and Wynn's ε-algorithm for accelerating
//! alternating partial sums.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes mapped onto [a, b].
    pub fn nodes_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.nodes_on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Spectral integration matrix: `S[j][k] = ∫_{-1}^{x_j} ℓ_k(s) ds` where
    /// `ℓ_k` is the Lagrange basis polynomial on the Gauss nodes. Applied to
    /// node values of f it yields the running integral at each node.
    pub fn integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let x = &self.nodes;
        let lagrange = |k: usize, s: f64| -> f64 {
            (0..n)
                .filter(|&m| m != k)
                .map(|m| (s - x[m]) / (x[k] - x[m]))
                .product()
        };
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| self.integrate(-1.0, x[j], |s| lagrange(k, s)))
                    .collect()
            })
            .collect()
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Largest panel width; used to resolve oscillatory integrands.
    pub max_panel: Option<f64>,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panel: None,
            max_panels: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of a complex integrand over
/// [a, b], seeded with `breakpoints` (need not be sorted; points outside the
/// interval are ignored). Fails if the error target is not met within
/// `max_panels`.
pub fn integrate_adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    assert!(b >= a, "integration bounds reversed");
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = match opts.max_panel {
            Some(cap) if cap > 0.0 => ((hi - lo) / cap).ceil().max(1.0) as usize,
            _ => 1,
        };
        let step = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let pa = lo + step * k as f64;
            let pb = if k + 1 == pieces { hi } else { pa + step };
            let (v, e) = gk15(&mut f, pa, pb);
            value += v;
            error += e;
            heap.push(Panel {
                a: pa,
                b: pb,
                value: v,
                error: e,
            });
        }
    }

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::QuadratureNonConvergence {
                estimate: error,
                tolerance: target,
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNonConvergence {
                estimate: error,
                tolerance: target,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Re-sum to shed accumulated cancellation from the running updates.
    let panels = heap.len();
    let (value, error) = heap
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        error,
        panels,
    })
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<(f64, f64)> {
    let r = integrate_adaptive(|x| Complex64::new(f(x), 0.0), a, b, breakpoints, opts)?;
    Ok((r.value.re, r.error))
}

/// Wynn's ε-algorithm. Returns the best extrapolated limit of the sequence
/// of partial sums together with a crude error estimate (distance between
/// the last two even-column diagonal entries).
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = *partial_sums.last().unwrap_or(&0.0);
        return (last, f64::INFINITY);
    }
    // eps[k] holds column k of the ε-table, computed bottom-up.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut best_err = (partial_sums[n - 1] - partial_sums[n - 2]).abs();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                // Converged exactly along this diagonal.
                return (cur[i + 1], 0.0);
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        col += 1;
        if col % 2 == 0 && next.len() >= 2 {
            let k = next.len();
            let err = (next[k - 1] - next[k - 2]).abs();
            if err < best_err {
                best = next[k - 1];
                best_err = err;
            }
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(10);
        let weight_sum: f64 = gl.weights.iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-14);
        // Degree 19 is the exactness limit for n = 10.
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * 2f64.powi(20) / 20.0);
    }

    #[test]
    fn integration_matrix_gives_running_integral() {
        let gl = GaussLegendre::new(8);
        let s = gl.integration_matrix();
        // f(x) = 3x², running integral x³ + 1 from −1.
        let f: Vec<f64> = gl.nodes.iter().map(|x| 3.0 * x * x).collect();
        for (j, x) in gl.nodes.iter().enumerate() {
            let running: f64 = s[j].iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((running - (x.powi(3) + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_oscillation_and_peaks() {
        let opts = QuadOptions {
            max_panel: Some(0.1),
            ..Default::default()
        };
        let r = integrate_real(|x| (50.0 * x).cos(), 0.0, 3.0, &[], &opts).unwrap();
        assert!((r.0 - (150.0f64).sin() / 50.0).abs() < 1e-11);
        let r = integrate_real(|x| 1.0 / (x * x + 1e-4), -1.0, 1.0, &[0.0], &QuadOptions::default())
            .unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.0 - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions {
            max_panels: 4,
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            ..Default::default()
        };
        let r = integrate_real(|x| (1.0 / x).sin(), 1e-6, 1.0, &[], &opts);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 − 1/2 + 1/3 − ...
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        let (v, _) = wynn_epsilon(&sums);
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
    }
}
