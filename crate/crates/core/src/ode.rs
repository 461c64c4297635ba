//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with step-size control.
//!
//! The integrator is autonomous-only (the expander ODE has no explicit
//! arclength dependence) and works on fixed-size state arrays.

use crate::error::{Error, Result};

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

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Tolerance and budget settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub max_steps: usize,
    pub h_init: f64,
    pub h_max: f64,
}

/// Per-component error scale. Returns the allowed absolute error for
/// component `i` given the state before and after the step.
pub trait ErrorScale<const N: usize> {
    fn scale(&self, i: usize, before: &[f64; N], after: &[f64; N]) -> f64;
}

impl<const N: usize, F> ErrorScale<N> for F
where
    F: Fn(usize, &[f64; N], &[f64; N]) -> f64,
{
    fn scale(&self, i: usize, before: &[f64; N], after: &[f64; N]) -> f64 {
        self(i, before, after)
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step. Returns the 5th-order solution, the embedded
/// error vector and the derivative at the new point (FSAL).
fn dopri_step<const N: usize, F>(
    f: &F,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(
        y,
        h,
        &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ));
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(&y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err, k7)
}

/// Integrates `y' = f(y)` from `y0` through the increasing output grid
/// `outputs` (first entry is the start point), landing exactly on every
/// output. Returns the state at each output.
pub fn integrate_to_grid<const N: usize, F, S>(
    f: F,
    y0: [f64; N],
    outputs: &[f64],
    control: StepControl,
    scale: S,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(&[f64; N]) -> [f64; N],
    S: ErrorScale<N>,
{
    let mut states = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(states);
    }
    let mut t = outputs[0];
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = control.h_init.min(control.h_max);
    let mut steps = 0usize;
    states.push(y);

    for &target in &outputs[1..] {
        while t < target {
            if steps >= control.max_steps {
                return Err(Error::IntegrationFailure {
                    last_s: t,
                    reason: format!("step budget of {} exhausted", control.max_steps),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let (y_new, err, k_new) = dopri_step(&f, &y, &k1, h_try);
            steps += 1;
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericBlowup { s: t });
            }
            let mut norm = 0.0f64;
            for i in 0..N {
                let sc = scale.scale(i, &y, &y_new);
                let r = if sc > 0.0 {
                    err[i] / sc
                } else if err[i] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                norm = norm.max(r.abs());
            }
            if norm <= 1.0 {
                t = if last { target } else { t + h_try };
                y = y_new;
                k1 = k_new;
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the untruncated step size when the last step was clipped
                if !last || h_try * factor > h {
                    h = (h_try * factor).min(control.h_max);
                }
            } else {
                let factor = (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
                h = h_try * factor;
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::IntegrationFailure {
                        last_s: t,
                        reason: format!(
                            "step size underflow ({h:e}) at tolerance {:e}",
                            control.tol
                        ),
                    });
                }
            }
        }
        states.push(y);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn control(tol: f64) -> StepControl {
        StepControl {
            tol,
            max_steps: 1_000_000,
            h_init: 1e-3,
            h_max: 1.0,
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let tol = 1e-12;
        let out = integrate_to_grid(
            |y: &[f64; 1]| [-y[0]],
            [1.0],
            &grid,
            control(tol),
            |_i: usize, a: &[f64; 1], b: &[f64; 1]| tol * a[0].abs().max(b[0].abs()),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - (-t).exp()).abs() <= 1e-11 * (-t).exp(), "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_lands_on_outputs() {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let tol = 1e-11;
        let out = integrate_to_grid(
            |y: &[f64; 2]| [y[1], -y[0]],
            [0.0, 1.0],
            &grid,
            control(tol),
            |_i: usize, _a: &[f64; 2], _b: &[f64; 2]| tol,
        )
        .unwrap();
        assert_eq!(out.len(), grid.len());
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_exhaustion_reports_last_good_point() {
        let grid = [0.0, 10.0];
        let err = integrate_to_grid(
            |y: &[f64; 1]| [y[0].cos()],
            [0.0],
            &grid,
            StepControl {
                tol: 1e-14,
                max_steps: 5,
                h_init: 1e-3,
                h_max: 1e-3,
            },
            |_i: usize, _a: &[f64; 1], _b: &[f64; 1]| 1e-14,
        )
        .unwrap_err();
        match err {
            Error::IntegrationFailure { last_s, .. } => assert!(last_s > 0.0 && last_s < 10.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blowup_is_detected() {
        let grid = [0.0, 2.0];
        let err = integrate_to_grid(
            |y: &[f64; 1]| [y[0] * y[0]],
            [1.0],
            &grid,
            control(1e-6),
            |_i: usize, a: &[f64; 1], b: &[f64; 1]| 1e-6 * a[0].abs().max(b[0].abs()).max(1.0),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NumericBlowup { .. } | Error::IntegrationFailure { .. }
        ));
    }
}
