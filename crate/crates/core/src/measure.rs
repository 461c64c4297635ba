//! Gaussian-weighted volumes, ball-growth tables and the monotone
//! functionals used in volume-growth arguments.
//!
//! Integrals over a product `Γ × ℝ^k` are reduced to integrals along the
//! curve: the flat factor contributes the shell weight
//! `F_k(a, b) = ∫_{a ≤ |y| ≤ b} e^{-α|y|²/4} dy`, which is a regularized
//! incomplete gamma function for `α > 0` and a ball-volume difference for
//! `α = 0`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::curve::{Expander, ExpanderCurve};
use crate::error::{Error, Result};
use crate::fmt::num;
use crate::quadrature::{adaptive_simpson, Simpson};

/// Absolute tolerance handed to adaptive Simpson.
pub const QUAD_TOL: f64 = 1e-12;

/// Fraction of each arm used to estimate the tail slope of `|x|`.
const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Upper bound on the mass outside the integrated window.
    pub tail_bound: f64,
    pub panels: usize,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HPowerResult {
    #[serde(flatten)]
    pub integral: QuadratureResult,
    /// `a_j = j⁻² ∫_{B_2j ∖ B_j} |H|^δ e^{-α|x|²/4}` for `j = 1..=j_max`.
    pub annulus_sequence: Vec<f64>,
    pub tends_to_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    pub vol: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub t: f64,
    pub value: f64,
    /// Whether the step from the previous row respects the expected
    /// monotonicity (true on the first row).
    pub monotone_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub rows: Vec<ProbeRow>,
    pub monotone: bool,
    /// Whether the curvature growth hypothesis under which monotonicity is
    /// claimed holds on the probed region.
    pub hypothesis_holds: bool,
}

/// Coefficients of the curvature growth hypothesis `|H| ≤ a|x| + b`
/// (or `≥` for the divergence probe).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCoefficients {
    pub a: f64,
    pub b: f64,
}

fn check_alpha(alpha: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        alpha >= 0.0
    } else {
        alpha > 0.0
    };
    if ok && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            format!(
                "must be {} and finite, got {alpha}",
                if allow_zero { "≥ 0" } else { "> 0" }
            ),
        ))
    }
}

/// Evaluates a closure that can only fail outside the window, which the
/// callers never query.
fn local(curve: &ExpanderCurve, s: f64) -> (f64, f64, f64) {
    curve
        .local_at(s.clamp(-curve.s_max(), curve.s_max()))
        .expect("clamped into window")
}

/// `min d|x|/ds` over the outer tenth of both arms and `max |x|` at the ends.
pub fn tail_slope(curve: &ExpanderCurve) -> (f64, f64) {
    let s_max = curve.s_max();
    let mut slope = f64::INFINITY;
    for p in &curve.samples {
        if p.s.abs() >= (1.0 - TAIL_FRACTION) * s_max {
            let r = p.dist_sq().sqrt();
            let v = if r > 0.0 {
                p.xt * p.s.signum() / r
            } else {
                0.0
            };
            slope = slope.min(v);
        }
    }
    let first = curve
        .samples
        .first()
        .map(|p| p.dist_sq().sqrt())
        .unwrap_or(0.0);
    let last = curve
        .samples
        .last()
        .map(|p| p.dist_sq().sqrt())
        .unwrap_or(0.0);
    (slope, first.min(last))
}

/// `2∫_{s_max}^∞ e^{-α(ρ₀ + c(s - s_max))²/4} ds`.
fn gaussian_tail(curve: &ExpanderCurve, alpha: f64) -> Result<f64> {
    let (c, rho0) = tail_slope(curve);
    if !(c > 0.0) {
        return Err(Error::TailBoundUnavailable { slope: c });
    }
    Ok(2.0 / c * (PI / alpha).sqrt() * erfc(0.5 * rho0 * alpha.sqrt()))
}

/// `(4π/α)^{k/2}`, the Gaussian mass of `ℝ^k`.
fn flat_mass(alpha: f64, k: usize) -> f64 {
    (4.0 * PI / alpha).powf(0.5 * k as f64)
}

/// `∫_Σ e^{-α|x|²/4} dσ` truncated to the integrated window, with a bound on
/// the remainder.
pub fn weighted_volume<T: Expander>(target: &T, alpha: f64) -> Result<QuadratureResult> {
    check_alpha(alpha, false)?;
    let curve = target.curve();
    let tail = gaussian_tail(curve, alpha)?;
    let s_max = curve.s_max();
    let q = adaptive_simpson(
        |s| (-0.25 * alpha * local(curve, s).2).exp(),
        -s_max,
        s_max,
        QUAD_TOL,
    );
    let scale = flat_mass(alpha, target.flat_factors());
    Ok(QuadratureResult {
        value: q.value * scale,
        tail_bound: tail * scale,
        panels: q.panels,
        quadrature_error: q.error_estimate * scale,
    })
}

/// `∫ f(κ, ⟨x,T⟩, |x|²) e^{-α|x|²/4} ds / ∫ e^{-α|x|²/4} ds` over the window.
pub fn weighted_mean<F>(curve: &ExpanderCurve, alpha: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    check_alpha(alpha, false)?;
    let s_max = curve.s_max();
    let num = adaptive_simpson(
        |s| {
            let (k, u, r2) = local(curve, s);
            f(k, u, r2) * (-0.25 * alpha * r2).exp()
        },
        -s_max,
        s_max,
        QUAD_TOL,
    );
    let den = adaptive_simpson(
        |s| (-0.25 * alpha * local(curve, s).2).exp(),
        -s_max,
        s_max,
        QUAD_TOL,
    );
    Ok(num.value / den.value)
}

/// Arclength on the right (`sign = 1`) or left (`sign = -1`) arm where
/// `|x| = r`; zero when `r` does not exceed the distance to the vertex.
pub fn crossing(curve: &ExpanderCurve, r: f64, sign: f64) -> Result<f64> {
    let s_max = curve.s_max();
    let r_max = tail_slope(curve).1;
    if r > r_max {
        return Err(Error::OutOfRange {
            what: "radius".into(),
            value: r,
            lo: 0.0,
            hi: r_max,
        });
    }
    let r2 = r * r;
    if r2 <= local(curve, 0.0).2 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, s_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if local(curve, sign * mid).2 <= r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// `F_k(a, b) = ∫_{a ≤ |y| ≤ b} e^{-α|y|²/4} dy` on `ℝ^k`, `k ≥ 1`.
pub fn flat_shell_weight(k: usize, alpha: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let half = 0.5 * k as f64;
    if alpha == 0.0 {
        let unit_ball = PI.powf(half) / gamma(half + 1.0);
        unit_ball * (b.powi(k as i32) - a.powi(k as i32))
    } else {
        let p = |r: f64| {
            if r > 0.0 {
                gamma_lr(half, 0.25 * alpha * r * r)
            } else {
                0.0
            }
        };
        flat_mass(alpha, k) * (p(b) - p(a))
    }
}

/// Adaptive Simpson after the substitution `s = a + (b - a)(3w² - 2w³)`,
/// which flattens square-root behaviour at the piece ends.
fn smoothed_pieces<F>(f: F, breaks: &[f64], tol: f64) -> Simpson
where
    F: Fn(f64) -> f64,
{
    let mut total = Simpson {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    let span = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let len = b - a;
        let part = adaptive_simpson(
            |t| f(a + len * t * t * (3.0 - 2.0 * t)) * 6.0 * len * t * (1.0 - t),
            0.0,
            1.0,
            tol * len / span,
        );
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.panels += part.panels;
    }
    total
}

/// `∫_{Σ ∩ {r_lo ≤ |x| ≤ r_hi}} e^{-α|x|²/4} dσ`.
pub fn shell_integral<T: Expander>(target: &T, alpha: f64, r_lo: f64, r_hi: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    let curve = target.curve();
    let k = target.flat_factors();
    let right = [crossing(curve, r_lo, 1.0)?, crossing(curve, r_hi, 1.0)?];
    let left = [crossing(curve, r_lo, -1.0)?, crossing(curve, r_hi, -1.0)?];
    let weight = |r2: f64| (-0.25 * alpha * r2).exp();
    if k == 0 {
        let inner_empty = r_lo * r_lo <= local(curve, 0.0).2;
        let f = |s: f64| weight(local(curve, s).2);
        let breaks: Vec<f64> = if inner_empty {
            vec![left[1], right[1]]
        } else {
            vec![left[1], left[0]]
        };
        let mut v = smoothed_pieces(f, &breaks, QUAD_TOL).value;
        if !inner_empty {
            v += smoothed_pieces(f, &[right[0], right[1]], QUAD_TOL).value;
        }
        return Ok(v);
    }
    let f = |s: f64| {
        let g2 = local(curve, s).2;
        let a = (r_lo * r_lo - g2).max(0.0).sqrt();
        let b = (r_hi * r_hi - g2).max(0.0).sqrt();
        weight(g2) * flat_shell_weight(k, alpha, a, b)
    };
    let mut breaks = vec![left[1], left[0], 0.0, right[0], right[1]];
    breaks.dedup();
    Ok(smoothed_pieces(f, &breaks, QUAD_TOL).value)
}

/// `∫ |H|^δ e^{-α|x|²/4} ds` with the annulus sequence over dyadic shells.
pub fn weighted_h_power(curve: &ExpanderCurve, delta: u32, alpha: f64) -> Result<HPowerResult> {
    if delta % 2 != 0 {
        return Err(Error::invalid(
            "delta",
            format!("must be an even integer, got {delta}"),
        ));
    }
    check_alpha(alpha, false)?;
    let tail = gaussian_tail(curve, alpha)?;
    let s_max = curve.s_max();
    let pow = |k: f64| {
        if delta == 0 {
            1.0
        } else {
            k.abs().powi(delta as i32)
        }
    };
    let q = adaptive_simpson(
        |s| {
            let (k, _, r2) = local(curve, s);
            pow(k) * (-0.25 * alpha * r2).exp()
        },
        -s_max,
        s_max,
        QUAD_TOL,
    );
    let end_kappa = curve.samples.first().map(|p| p.kappa).unwrap_or(0.0).abs();

    let r_max = tail_slope(curve).1;
    let j_max = (r_max / 2.0).floor() as usize;
    let mut seq = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let (lo, hi) = (j as f64, 2.0 * j as f64);
        let mut acc = 0.0;
        for sign in [-1.0, 1.0] {
            let a = crossing(curve, lo, sign)?;
            let b = crossing(curve, hi, sign)?;
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            acc += adaptive_simpson(
                |s| {
                    let (k, _, r2) = local(curve, s);
                    pow(k) * (-0.25 * alpha * r2).exp()
                },
                a,
                b,
                QUAD_TOL,
            )
            .value;
        }
        seq.push(acc / (j * j) as f64);
    }
    let tends_to_zero = sequence_tends_to_zero(&seq);
    Ok(HPowerResult {
        integral: QuadratureResult {
            value: q.value,
            tail_bound: tail * pow(end_kappa),
            panels: q.panels,
            quadrature_error: q.error_estimate,
        },
        annulus_sequence: seq,
        tends_to_zero,
    })
}

/// Heuristic limit test for a nonnegative sequence: nonincreasing over its
/// second half and ending below `10⁻⁸` of its maximum (or exactly zero).
pub fn sequence_tends_to_zero(seq: &[f64]) -> bool {
    let Some(&last) = seq.last() else {
        return false;
    };
    let peak = seq.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return true;
    }
    let tail = &seq[seq.len() / 2..];
    tail.windows(2).all(|w| w[1] <= w[0]) && last <= 1e-8 * peak
}

/// `Vol(B_r(0) ∩ Σ)` against `C(α) e^{αr²/4}` with `C(α) = value + tail_bound`
/// of the weighted volume.
pub fn ball_growth<T: Expander>(target: &T, radii: &[f64], alpha: f64) -> Result<Vec<GrowthRow>> {
    let wv = weighted_volume(target, alpha)?;
    let c = wv.value + wv.tail_bound;
    let curve = target.curve();
    radii
        .iter()
        .map(|&r| {
            if !(r >= 0.0) {
                return Err(Error::invalid("radius", format!("must be ≥ 0, got {r}")));
            }
            let vol = if target.flat_factors() == 0 {
                crossing(curve, r, 1.0)? - crossing(curve, r, -1.0)?
            } else {
                shell_integral(target, 0.0, 0.0, r)?
            };
            let bound = c * (0.25 * alpha * r * r).exp();
            Ok(GrowthRow {
                r,
                vol,
                bound,
                pass: vol <= bound,
            })
        })
        .collect()
}

const MONOTONE_SLACK: f64 = 1e-12;

fn probe_rows(values: Vec<(f64, f64)>, nonincreasing: bool) -> ProbeResult {
    let mut rows = Vec::with_capacity(values.len());
    let mut prev: Option<f64> = None;
    for (t, value) in values {
        let flag = match prev {
            None => true,
            Some(p) => {
                let slack = MONOTONE_SLACK * p.abs().max(value.abs());
                if nonincreasing {
                    value <= p + slack
                } else {
                    value >= p - slack
                }
            }
        };
        rows.push(ProbeRow {
            t,
            value,
            monotone_flag: flag,
        });
        prev = Some(value);
    }
    let monotone = rows.iter().all(|r| r.monotone_flag);
    ProbeResult {
        rows,
        monotone,
        hypothesis_holds: true,
    }
}

/// Checks `|H| ≤ a|x| + b` (`upper`) or `|H| ≥ a|x| + b` on the samples
/// with `|x| ≤ r`.
pub fn curvature_growth_holds(
    curve: &ExpanderCurve,
    coeffs: GrowthCoefficients,
    r: f64,
    upper: bool,
) -> bool {
    curve
        .samples
        .iter()
        .filter(|p| p.dist_sq() <= r * r)
        .all(|p| {
            let line = coeffs.a * p.dist_sq().sqrt() + coeffs.b;
            if upper {
                p.kappa.abs() <= line
            } else {
                p.kappa.abs() >= line
            }
        })
}

/// `k(r) = a₂r² + a₁r + a₀` with `a₂ = (1+α)a²`, `a₁ = 2(1+α)ab`,
/// `a₀ = (1+α)b² + n/2`.
pub fn growth_exponent(alpha: f64, coeffs: GrowthCoefficients, n: usize, r: f64) -> f64 {
    let GrowthCoefficients { a, b } = coeffs;
    let a2 = (1.0 + alpha) * a * a;
    let a1 = 2.0 * (1.0 + alpha) * a * b;
    let a0 = (1.0 + alpha) * b * b + 0.5 * n as f64;
    a2 * r * r + a1 * r + a0
}

/// `I(t) = t^{-k(r)} ∫_{B̄_r ∩ Σ} e^{-α|x|²/(4t)}` on `t_grid`, expected to be
/// nonincreasing when `|H| ≤ a|x| + b` and `a₂ < α/4`.
pub fn functional_i<T: Expander>(
    target: &T,
    alpha: f64,
    coeffs: GrowthCoefficients,
    r: f64,
    t_grid: &[f64],
) -> Result<ProbeResult> {
    check_alpha(alpha, false)?;
    if coeffs.b < 0.0 || coeffs.a < 0.0 {
        return Err(Error::invalid("coeffs", "a and b must be ≥ 0"));
    }
    let curve = target.curve();
    if !(r > 0.0) || r * r < local(curve, 0.0).2 {
        return Err(Error::DegenerateDomain { r });
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::invalid(
            "t_grid",
            format!("entries must be > 0, got {t}"),
        ));
    }
    let n = 1 + target.flat_factors();
    let k = growth_exponent(alpha, coeffs, n, r);
    let values = t_grid
        .iter()
        .map(|&t| Ok((t, t.powf(-k) * shell_integral(target, alpha / t, 0.0, r)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut probe = probe_rows(values, true);
    let a2 = (1.0 + alpha) * coeffs.a * coeffs.a;
    probe.hypothesis_holds = a2 < 0.25 * alpha && curvature_growth_holds(curve, coeffs, r, true);
    Ok(probe)
}

/// `α = 4a²/(1 - 4a²)` for the divergence probe's slope `a < ½`.
pub fn divergence_alpha(a: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&a) {
        return Err(Error::invalid(
            "a",
            format!("must lie in [0, 1/2), got {a}"),
        ));
    }
    Ok(4.0 * a * a / (1.0 - 4.0 * a * a))
}

/// `φ(t) = t^{-n} ∫_{(B_t ∖ B_{r0}) ∩ Σ} e^{-α|x|²/4}` on `t_grid`, expected
/// to be nondecreasing when `|H| ≥ a|x| + b` outside `B_{r0}` and
/// `α = 4a²/(1 - 4a²)`.
pub fn divergence_probe<T: Expander>(
    target: &T,
    alpha: f64,
    coeffs: GrowthCoefficients,
    r0: f64,
    t_grid: &[f64],
) -> Result<ProbeResult> {
    check_alpha(alpha, true)?;
    if !(r0 >= 0.0) {
        return Err(Error::invalid("r0", format!("must be ≥ 0, got {r0}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > r0)) {
        return Err(Error::invalid(
            "t_grid",
            format!("radii must exceed r0 = {r0}, got {t}"),
        ));
    }
    let n = 1 + target.flat_factors() as i32;
    let values = t_grid
        .iter()
        .map(|&t| Ok((t, t.powi(-n) * shell_integral(target, alpha, r0, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut probe = probe_rows(values, false);
    let t_max = t_grid.iter().copied().fold(r0, f64::max);
    let curve = target.curve();
    let matches_alpha =
        divergence_alpha(coeffs.a).is_ok_and(|a| (a - alpha).abs() <= 1e-12 * a.max(1.0));
    probe.hypothesis_holds = matches_alpha
        && curve
            .samples
            .iter()
            .filter(|p| p.dist_sq() >= r0 * r0 && p.dist_sq() <= t_max * t_max)
            .all(|p| p.kappa.abs() >= coeffs.a * p.dist_sq().sqrt() + coeffs.b);
    Ok(probe)
}

pub fn write_growth_csv<W: Write>(rows: &[GrowthRow], mut out: W) -> std::io::Result<()> {
    out.write_all(b"r,vol,bound,pass\n")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            num(row.r),
            num(row.vol),
            num(row.bound),
            row.pass
        )?;
    }
    Ok(())
}

pub fn write_probe_csv<W: Write>(probe: &ProbeResult, mut out: W) -> std::io::Result<()> {
    out.write_all(b"t,value,monotone_flag\n")?;
    for row in &probe.rows {
        writeln!(
            out,
            "{},{},{}",
            num(row.t),
            num(row.value),
            row.monotone_flag
        )?;
    }
    Ok(())
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{integrate_curve, CurveParams, ProductExpander};

    fn line() -> ExpanderCurve {
        integrate_curve(CurveParams::new(0.0, 20.0)).unwrap()
    }

    #[test]
    fn shell_weight_closed_forms() {
        // k = 1: 2∫_a^b e^{-αρ²/4}
        let v = flat_shell_weight(1, 1.0, 0.0, 50.0);
        assert!((v - 2.0 * PI.sqrt()).abs() < 1e-12);
        // k = 2, α = 0: annulus area
        let v = flat_shell_weight(2, 0.0, 1.0, 2.0);
        assert!((v - 3.0 * PI).abs() < 1e-12);
        // k = 3, α = 0: ball volume
        let v = flat_shell_weight(3, 0.0, 0.0, 1.0);
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(flat_shell_weight(2, 1.0, 3.0, 2.0), 0.0);
    }

    #[test]
    fn line_crossings_are_radii() {
        let l = line();
        assert!((crossing(&l, 7.25, 1.0).unwrap() - 7.25).abs() < 1e-12);
        assert!((crossing(&l, 7.25, -1.0).unwrap() + 7.25).abs() < 1e-12);
        assert!(crossing(&l, 25.0, 1.0).is_err());
    }

    #[test]
    fn plane_disc_area() {
        let plane = ProductExpander::new(line(), 1);
        let rows = ball_growth(&plane, &[1.0, 3.0], 1.0).unwrap();
        assert!((rows[0].vol - PI).abs() < 1e-10, "{}", rows[0].vol - PI);
        assert!((rows[1].vol - 9.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        assert!(weighted_volume(&line(), 0.0).is_err());
        assert!(weighted_volume(&line(), -1.0).is_err());
    }

    #[test]
    fn odd_delta_rejected() {
        assert!(weighted_h_power(&line(), 1, 1.0).is_err());
    }

    #[test]
    fn degenerate_ball() {
        let c = integrate_curve(CurveParams::new(2.0, 10.0)).unwrap();
        let err =
            functional_i(&c, 1.0, GrowthCoefficients { a: 0.0, b: 0.0 }, 1.0, &[1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDomain { .. }));
    }

    #[test]
    fn divergence_alpha_range() {
        assert!((divergence_alpha(0.1).unwrap() - 0.04 / 0.96).abs() < 1e-15);
        assert!(divergence_alpha(0.5).is_err());
    }

    #[test]
    fn tends_to_zero_heuristic() {
        assert!(sequence_tends_to_zero(&[1.0, 0.5, 1e-3, 1e-9]));
        assert!(!sequence_tends_to_zero(&[1.0, 0.9, 0.8]));
        assert!(sequence_tends_to_zero(&[0.0, 0.0]));
        assert!(!sequence_tends_to_zero(&[]));
    }

    #[test]
    fn probe_csv_header() {
        let probe = probe_rows(vec![(1.0, 2.0), (2.0, 1.0)], false);
        assert!(!probe.monotone);
        let mut buf = Vec::new();
        write_probe_csv(&probe, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,value,monotone_flag\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
