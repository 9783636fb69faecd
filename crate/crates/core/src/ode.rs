//! Dormand–Prince 5(4) with step-size control and Hairer's fourth-order
//! continuous extension, specialized to 2×2 complex matrix states.

use crate::error::{Error, Result};
use crate::linalg::Mat2;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Steps never straddle a multiple of this spacing, where `f` may have kinks.
    pub knot_spacing: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
            knot_spacing: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn error_norm(err: &Mat2, y: &Mat2, y_new: &Mat2, ctl: &StepControl) -> f64 {
    let (e, a, b) = (err.as_reals(), y.as_reals(), y_new.as_reals());
    let sum: f64 = (0..8)
        .map(|i| {
            let sc = ctl.atol + ctl.rtol * a[i].abs().max(b[i].abs());
            (e[i] / sc).powi(2)
        })
        .sum();
    (sum / 8.0).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to the last entry of `outputs`,
/// returning the dense-output solution at every requested time. `outputs`
/// must be non-decreasing and start at or after `t0`. `on_step` sees every
/// accepted step and may abort the integration.
pub fn integrate<F, S>(
    mut f: F,
    t0: f64,
    y0: Mat2,
    outputs: &[f64],
    ctl: &StepControl,
    mut on_step: S,
) -> Result<(Vec<Mat2>, Stats)>
where
    F: FnMut(f64, &Mat2) -> Result<Mat2>,
    S: FnMut(f64, &Mat2) -> Result<()>,
{
    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(outputs.len());
    let Some(&t_end) = outputs.last() else {
        return Ok((out, stats));
    };
    if outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidGrid("output time precedes start".into()));
    }

    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        out.push(y0);
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = ctl.h_init.min(ctl.h_max).min(t_end - t0).max(0.0);
    let mut fac_prev_reject = false;

    while next_out < outputs.len() {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let h_proposed = h;
        let mut stop = t_end;
        if let Some(s) = ctl.knot_spacing {
            let knot = ((t / s + 1e-9).floor() + 1.0) * s;
            if knot < t_end {
                stop = knot;
            }
        }
        let last = t + h >= stop;
        if last {
            h = stop - t;
        }

        let k2 = f(t + C2 * h, &(y + k1 * (h * A21)))?;
        let k3 = f(t + C3 * h, &(y + (k1 * A31 + k2 * A32) * h))?;
        let k4 = f(t + C4 * h, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * h))?;
        let k5 = f(
            t + C5 * h,
            &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h),
        )?;
        let k6 = f(
            t + h,
            &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h),
        )?;
        let y_new = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        let k7 = f(t + h, &y_new)?;
        stats.evaluations += 6;

        let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let en = error_norm(&err, &y, &y_new, ctl);

        if en <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { stop } else { t + h };

            if next_out < outputs.len() && outputs[next_out] <= t_new {
                let diff = y_new - y;
                let bspl = k1 * h - diff;
                let r4 = diff - k7 * h - bspl;
                let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
                while next_out < outputs.len() && outputs[next_out] <= t_new {
                    let to = outputs[next_out];
                    let v = if to == t_new {
                        y_new
                    } else {
                        let th = (to - t) / h;
                        let th1 = 1.0 - th;
                        y + (diff + (bspl + (r4 + r5 * th1) * th) * th1) * th
                    };
                    out.push(v);
                    next_out += 1;
                }
            }

            on_step(t_new, &y_new)?;
            t = t_new;
            y = y_new;
            k1 = k7;

            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if fac_prev_reject {
                fac = fac.min(1.0);
            }
            fac_prev_reject = false;
            h = (h * fac).min(ctl.h_max);
            if last {
                h = h.max(h_proposed.min(ctl.h_max));
            }
        } else {
            stats.rejected += 1;
            fac_prev_reject = true;
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok((out, stats))
}
