//! Complete self-expander curves in the plane.
//!
//! The curve is parametrized by arclength with tangent `T = (cos θ, sin θ)`
//! and normal `n = (-sin θ, cos θ)`. The expander equation reads
//! `κ = ½⟨x, n⟩` with `κ = ⟨γ'', n⟩`, so the member at distance `d` from
//! the origin has its vertex at `(0, d)` with `κ(0) = d/2` and is an upward
//! convex even graph.
//!
//! The position is carried in moving-frame coordinates `u = ⟨x, T⟩` and
//! `p = ⟨x, n⟩`. Differentiating along the curve gives
//!
//! ```text
//! θ' = κ,   u' = 1 + κ p,   p' = -κ u,   κ = p / 2
//! ```
//!
//! which is `x' = T` rewritten in the rotating frame. Curvature is read off
//! the state algebraically (never evolved), and `p` keeps full relative
//! precision far out on the arms where `κ` drops below `1e-40`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::num;
use crate::ode::{integrate_to_grid, StepControl};

pub const DEFAULT_STEP_TOL: f64 = 1e-12;
/// Default output spacing in arclength.
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.005;
const MAX_STEPS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveParams {
    /// Distance of the vertex from the origin.
    pub d: f64,
    /// Half-length of the integration window.
    pub s_max: f64,
    pub step_tol: f64,
    /// Requested number of output samples; rounded up to an odd count so
    /// the vertex is always a sample.
    pub samples_hint: usize,
}

impl CurveParams {
    /// Parameters with the default tolerance and a sample spacing of 0.005.
    pub fn new(d: f64, s_max: f64) -> Self {
        let samples = (2.0 * s_max / DEFAULT_SAMPLE_SPACING).ceil() as usize + 1;
        CurveParams {
            d,
            s_max,
            step_tol: DEFAULT_STEP_TOL,
            samples_hint: samples.max(3),
        }
    }

    pub fn with_step_tol(mut self, tol: f64) -> Self {
        self.step_tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_hint = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::invalid(
                "d",
                format!("must be finite and >= 0, got {}", self.d),
            ));
        }
        if !(self.s_max.is_finite() && self.s_max > 0.0) {
            return Err(Error::invalid(
                "s_max",
                format!("must be finite and > 0, got {}", self.s_max),
            ));
        }
        if !(self.step_tol.is_finite() && self.step_tol > 0.0) {
            return Err(Error::invalid(
                "step_tol",
                format!("must be > 0, got {}", self.step_tol),
            ));
        }
        if self.samples_hint < 2 {
            return Err(Error::invalid("samples_hint", "must be at least 2"));
        }
        Ok(())
    }

    /// Number of samples on each arm, excluding the vertex.
    fn half_count(&self) -> usize {
        (self.samples_hint - 1).div_ceil(2).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub x: [f64; 2],
    pub theta: f64,
    pub kappa: f64,
    /// Tangential position component `⟨x, T⟩`.
    pub xt: f64,
    /// Normal position component `⟨x, n⟩` as carried by the integrator.
    pub xn: f64,
}

impl CurveSample {
    fn from_state(s: f64, state: [f64; 3]) -> Self {
        let [theta, u, p] = state;
        let (sin, cos) = theta.sin_cos();
        CurveSample {
            s,
            x: [u * cos - p * sin, u * sin + p * cos],
            theta,
            kappa: 0.5 * p,
            xt: u,
            xn: p,
        }
    }

    pub fn tangent(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    pub fn normal(&self) -> [f64; 2] {
        [-self.theta.sin(), self.theta.cos()]
    }

    /// `|x|²`, assembled from the frame components.
    pub fn dist_sq(&self) -> f64 {
        self.xt * self.xt + self.xn * self.xn
    }

    /// `|κ - ½⟨x, n⟩|` with `⟨x, n⟩` recomputed from the Cartesian position.
    pub fn expander_residual(&self) -> f64 {
        let n = self.normal();
        (self.kappa - 0.5 * (self.x[0] * n[0] + self.x[1] * n[1])).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpanderCurve {
    pub params: CurveParams,
    pub samples: Vec<CurveSample>,
    /// Constant `C` of the first integral `κ² e^{|x|²/2} = C`.
    pub first_integral_c: f64,
    /// Max relative deviation of `κ² e^{|x|²/2}` from `C` over the samples.
    pub max_invariant_drift: f64,
    /// Max of `|κ - ½⟨x, n⟩|` over the samples.
    pub max_expander_residual: f64,
}

/// Right-hand side of the frame-coordinate expander system.
fn rhs(y: &[f64; 3]) -> [f64; 3] {
    let [_, u, p] = *y;
    let kappa = 0.5 * p;
    [kappa, 1.0 + kappa * p, -kappa * u]
}

/// Integrates one arm from the vertex through the nonnegative arclength grid
/// `grid` (which must start at 0). Returns `(θ, u, p)` at every grid point.
pub(crate) fn integrate_arm(d: f64, grid: &[f64], step_tol: f64) -> Result<Vec<[f64; 3]>> {
    let spacing = if grid.len() > 1 {
        grid[1] - grid[0]
    } else {
        1.0
    };
    let control = StepControl {
        tol: step_tol,
        max_steps: MAX_STEPS,
        h_init: spacing.min(1e-2),
        h_max: 0.5,
    };
    integrate_to_grid(
        rhs,
        [0.0, 0.0, d],
        grid,
        control,
        |i: usize, a: &[f64; 3], b: &[f64; 3]| {
            if i == 2 {
                // p keeps its sign and decays like a Gaussian: relative control
                step_tol * a[2].abs().max(b[2].abs())
            } else {
                step_tol * a[i].abs().max(b[i].abs()).max(1.0)
            }
        },
    )
}

/// Builds the symmetric sample sequence from one integrated arm.
fn assemble(grid: &[f64], right: &[[f64; 3]], left: &[[f64; 3]]) -> Vec<CurveSample> {
    let mut samples = Vec::with_capacity(2 * grid.len() - 1);
    for i in (1..grid.len()).rev() {
        // the left arm is integrated in σ = -s, where (θ, u) change sign
        let [theta, u, p] = left[i];
        samples.push(CurveSample::from_state(-grid[i], [-theta, -u, p]));
    }
    for (s, y) in grid.iter().zip(right) {
        samples.push(CurveSample::from_state(*s, *y));
    }
    samples
}

/// Integrates the self-expander curve with vertex at `(0, d)`.
pub fn integrate_curve(params: CurveParams) -> Result<ExpanderCurve> {
    params.validate()?;
    let half = params.half_count();
    let spacing = params.s_max / half as f64;
    let grid: Vec<f64> = (0..=half)
        .map(|i| {
            if i == half {
                params.s_max
            } else {
                i as f64 * spacing
            }
        })
        .collect();

    if params.d == 0.0 {
        // the line through the origin, no ODE needed
        let states: Vec<[f64; 3]> = grid.iter().map(|&s| [0.0, s, 0.0]).collect();
        let samples = assemble(&grid, &states, &states);
        return Ok(ExpanderCurve {
            params,
            samples,
            first_integral_c: 0.0,
            max_invariant_drift: 0.0,
            max_expander_residual: 0.0,
        });
    }

    let right = integrate_arm(params.d, &grid, params.step_tol)?;
    let left = integrate_arm(params.d, &grid, params.step_tol)?;
    let samples = assemble(&grid, &right, &left);

    let d = params.d;
    let c = 0.25 * d * d * (0.5 * d * d).exp();
    let ln_c = c.ln();
    let mut drift = 0.0f64;
    let mut residual = 0.0f64;
    for smp in &samples {
        let dev = if smp.kappa > 0.0 {
            (2.0 * smp.kappa.ln() + 0.5 * smp.dist_sq() - ln_c)
                .exp_m1()
                .abs()
        } else {
            1.0
        };
        drift = drift.max(dev);
        residual = residual.max(smp.expander_residual());
    }
    Ok(ExpanderCurve {
        params,
        samples,
        first_integral_c: c,
        max_invariant_drift: drift,
        max_expander_residual: residual,
    })
}

/// Local geometry at an arbitrary arclength, in the sign convention `H = -κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointData {
    pub s: f64,
    pub x: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
    /// Scalar mean curvature `H = -½⟨x, n⟩ = -κ`.
    pub mean_curvature: f64,
    /// `|A|² = κ²`.
    pub norm_a_sq: f64,
    /// `⟨x, T⟩`.
    pub xt: f64,
    /// `A(xᵀ, xᵀ) = κ ⟨x, T⟩²`.
    pub a_xx: f64,
}

impl ExpanderCurve {
    pub fn d(&self) -> f64 {
        self.params.d
    }

    pub fn s_max(&self) -> f64 {
        self.params.s_max
    }

    pub fn spacing(&self) -> f64 {
        self.samples[1].s - self.samples[0].s
    }

    pub fn vertex_index(&self) -> usize {
        self.samples.len() / 2
    }

    /// Samples on the right arm, starting at the vertex.
    pub fn right_arm(&self) -> &[CurveSample] {
        &self.samples[self.vertex_index()..]
    }

    pub fn sup_kappa(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.kappa.abs())
            .fold(0.0, f64::max)
    }

    /// Cubic Lagrange interpolation of a sample field through the four
    /// nearest samples.
    pub fn interpolate<F>(&self, s: f64, field: F) -> Result<f64>
    where
        F: Fn(&CurveSample) -> f64,
    {
        let [v] = self.interpolate_fields(s, [&field as &dyn Fn(&CurveSample) -> f64])?;
        Ok(v)
    }

    /// Interpolates several fields at once, sharing the stencil.
    pub fn interpolate_fields<const K: usize>(
        &self,
        s: f64,
        fields: [&dyn Fn(&CurveSample) -> f64; K],
    ) -> Result<[f64; K]> {
        let s_max = self.s_max();
        if !(s.abs() <= s_max) {
            return Err(Error::OutOfRange {
                what: "s".into(),
                value: s,
                lo: -s_max,
                hi: s_max,
            });
        }
        let n = self.samples.len();
        let h = self.spacing();
        let k = (((s + s_max) / h).floor() as isize).clamp(0, n as isize - 2) as usize;
        for j in [k, k + 1] {
            if self.samples[j].s == s {
                return Ok(fields.map(|f| f(&self.samples[j])));
            }
        }
        let width = n.min(4);
        let start = k.saturating_sub(1).min(n - width);
        let t = (s - self.samples[start].s) / h;
        let mut weights = [0.0; 4];
        for (j, wj) in weights.iter_mut().enumerate().take(width) {
            let mut w = 1.0;
            for m in 0..width {
                if m != j {
                    w *= (t - m as f64) / (j as f64 - m as f64);
                }
            }
            *wj = w;
        }
        Ok(fields.map(|f| {
            (0..width)
                .map(|j| weights[j] * f(&self.samples[start + j]))
                .sum()
        }))
    }

    /// `(κ, ⟨x,T⟩, |x|²)` at arclength `s`.
    pub fn local_at(&self, s: f64) -> Result<(f64, f64, f64)> {
        let [k, u, p] = self.interpolate_fields(
            s,
            [
                &|q: &CurveSample| q.kappa,
                &|q: &CurveSample| q.xt,
                &|q: &CurveSample| q.xn,
            ],
        )?;
        Ok((k, u, u * u + p * p))
    }

    /// Geometry at arclength `s`, interpolated from the samples.
    pub fn pointwise(&self, s: f64) -> Result<PointData> {
        let theta = self.interpolate(s, |p| p.theta)?;
        let kappa = self.interpolate(s, |p| p.kappa)?;
        let xt = self.interpolate(s, |p| p.xt)?;
        let x = [
            self.interpolate(s, |p| p.x[0])?,
            self.interpolate(s, |p| p.x[1])?,
        ];
        let (sin, cos) = theta.sin_cos();
        Ok(PointData {
            s,
            x,
            tangent: [cos, sin],
            normal: [-sin, cos],
            kappa,
            mean_curvature: -kappa,
            norm_a_sq: kappa * kappa,
            xt,
            a_xx: kappa * xt * xt,
        })
    }

    /// `|x(s)|²` from the interpolated frame components.
    pub fn dist_sq_at(&self, s: f64) -> Result<f64> {
        Ok(self.local_at(s)?.2)
    }

    /// Writes the `s,x1,x2,theta,kappa` CSV export.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"s,x1,x2,theta,kappa\n")?;
        for p in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                num(p.s),
                num(p.x[0]),
                num(p.x[1]),
                num(p.theta),
                num(p.kappa)
            )?;
        }
        Ok(())
    }

    /// Fits the asymptotic cone from the outer tenth of each arm.
    pub fn asymptotic_cone(&self) -> Result<ConeFit> {
        if self.d() == 0.0 {
            return Ok(ConeFit {
                half_angle: std::f64::consts::FRAC_PI_2,
                ray_angle: 0.0,
                residual: 0.0,
            });
        }
        let arm = self.right_arm();
        let vertex_kappa = arm[0].kappa;
        let tail_kappa = arm[arm.len() - 1].kappa;
        let ratio = tail_kappa / vertex_kappa;
        if ratio > CONE_TAIL_RATIO {
            return Err(Error::NotAsymptotic {
                s_max: self.s_max(),
                ratio,
            });
        }
        let tail_len = (arm.len() / 10).max(2);
        let tail_start = arm.len() - tail_len;
        let left: Vec<[f64; 2]> = self.samples[..tail_len]
            .iter()
            .map(|p| [-p.x[0], p.x[1]])
            .collect();
        let right: Vec<[f64; 2]> = arm[tail_start..].iter().map(|p| p.x).collect();

        let mut angles = [0.0; 2];
        let mut residual = 0.0f64;
        for (slot, pts) in angles.iter_mut().zip([&right, &left]) {
            let dir = principal_direction(pts);
            *slot = dir[0].atan2(dir[1]);
            for x in pts.iter() {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let off = (x[0] * dir[1] - x[1] * dir[0]).abs();
                residual = residual.max(off / r);
            }
        }
        let half_angle = 0.5 * (angles[0] + angles[1]);
        Ok(ConeFit {
            half_angle,
            ray_angle: std::f64::consts::FRAC_PI_2 - half_angle,
            residual,
        })
    }
}

/// Tail curvature must have dropped below this fraction of the vertex
/// curvature before the cone fit is attempted.
pub const CONE_TAIL_RATIO: f64 = 1e-6;

/// Asymptotic cone of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeFit {
    /// Angle between the symmetry axis (positive `x2` axis) and the fitted
    /// asymptotic ray; `π/2` for the line.
    pub half_angle: f64,
    /// Angle between the positive `x1` axis and the right asymptotic ray,
    /// i.e. the total turning of one arm.
    pub ray_angle: f64,
    /// Max orthogonal distance of the tail samples from the ray over `|x|`.
    pub residual: f64,
}

/// Unit direction (oriented along the points) of the least-squares line
/// through the origin.
fn principal_direction(pts: &[[f64; 2]]) -> [f64; 2] {
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for x in pts {
        sxx += x[0] * x[0];
        sxy += x[0] * x[1];
        syy += x[1] * x[1];
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut dir = [phi.cos(), phi.sin()];
    let last = pts[pts.len() - 1];
    if dir[0] * last[0] + dir[1] * last[1] < 0.0 {
        dir = [-dir[0], -dir[1]];
    }
    dir
}

/// A hypersurface `Γ × ℝ^k` built from an expander curve.
#[derive(Debug, Clone)]
pub struct ProductExpander {
    pub curve: ExpanderCurve,
    pub flat_factors: usize,
}

impl ProductExpander {
    pub fn new(curve: ExpanderCurve, flat_factors: usize) -> Self {
        ProductExpander {
            curve,
            flat_factors,
        }
    }

    /// Intrinsic dimension `1 + k`.
    pub fn dim(&self) -> usize {
        1 + self.flat_factors
    }
}

/// Anything made of an expander curve and a number of flat factors.
pub trait Expander {
    fn curve(&self) -> &ExpanderCurve;
    fn flat_factors(&self) -> usize;
}

impl Expander for ExpanderCurve {
    fn curve(&self) -> &ExpanderCurve {
        self
    }
    fn flat_factors(&self) -> usize {
        0
    }
}

impl Expander for ProductExpander {
    fn curve(&self) -> &ExpanderCurve {
        &self.curve
    }
    fn flat_factors(&self) -> usize {
        self.flat_factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_is_exact() {
        let c = integrate_curve(CurveParams::new(0.0, 5.0)).unwrap();
        assert_eq!(c.first_integral_c, 0.0);
        for p in &c.samples {
            assert_eq!(p.kappa, 0.0);
            assert_eq!(p.x, [p.s, 0.0]);
        }
        let q = c.pointwise(3.0).unwrap();
        assert_eq!(q.mean_curvature, 0.0);
        assert_eq!(q.norm_a_sq, 0.0);
        assert_eq!(q.a_xx, 0.0);
    }

    #[test]
    fn vertex_data_for_unit_distance() {
        let c = integrate_curve(CurveParams::new(1.0, 4.0)).unwrap();
        assert!((c.first_integral_c - 0.25 * 0.5f64.exp()).abs() < 1e-16);
        let v = c.samples[c.vertex_index()];
        assert_eq!(v.s, 0.0);
        assert_eq!(v.x, [0.0, 1.0]);
        assert_eq!(v.kappa, 0.5);
        let q = c.pointwise(0.0).unwrap();
        assert_eq!(q.xt, 0.0);
        assert_eq!(q.a_xx, 0.0);
        assert_eq!(q.mean_curvature, -0.5);
    }

    #[test]
    fn samples_are_increasing_and_mirrored() {
        let c = integrate_curve(CurveParams::new(1.5, 6.0).with_samples(601)).unwrap();
        assert_eq!(c.samples.len() % 2, 1);
        assert!(c.samples.windows(2).all(|w| w[0].s < w[1].s));
        let n = c.samples.len();
        for i in 0..n / 2 {
            let (a, b) = (c.samples[i], c.samples[n - 1 - i]);
            assert_eq!(a.s, -b.s);
            assert!((a.x[0] + b.x[0]).abs() < 1e-14 && (a.x[1] - b.x[1]).abs() < 1e-14);
            assert_eq!(a.kappa, b.kappa);
            assert_eq!(a.theta, -b.theta);
        }
    }

    #[test]
    fn minimal_sample_count_still_interpolates() {
        let c = integrate_curve(CurveParams::new(0.0, 1.0).with_samples(2)).unwrap();
        assert_eq!(c.samples.len(), 3);
        assert!((c.pointwise(0.3).unwrap().x[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn out_of_window_query_fails() {
        let c = integrate_curve(CurveParams::new(1.0, 2.0)).unwrap();
        assert!(matches!(c.pointwise(2.5), Err(Error::OutOfRange { .. })));
        assert!(c.pointwise(-2.0).is_ok());
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(integrate_curve(CurveParams::new(-1.0, 2.0)).is_err());
        assert!(integrate_curve(CurveParams::new(1.0, 0.0)).is_err());
        assert!(integrate_curve(CurveParams::new(1.0, 2.0).with_step_tol(0.0)).is_err());
        assert!(integrate_curve(CurveParams::new(1.0, 2.0).with_samples(1)).is_err());
    }

    #[test]
    fn unreachable_tolerance_fails_with_last_good_s() {
        let err = integrate_curve(CurveParams::new(1.0, 20.0).with_step_tol(1e-300)).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }), "{err:?}");
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let c = integrate_curve(CurveParams::new(1.0, 1.0).with_samples(11)).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], "s,x1,x2,theta,kappa");
        assert_eq!(lines.len(), c.samples.len() + 2);
        assert_eq!(lines.last(), Some(&""));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn cone_of_line_is_flat() {
        let c = integrate_curve(CurveParams::new(0.0, 10.0)).unwrap();
        let fit = c.asymptotic_cone().unwrap();
        assert_eq!(fit.half_angle, std::f64::consts::FRAC_PI_2);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn short_window_is_not_asymptotic() {
        let c = integrate_curve(CurveParams::new(1.0, 3.0)).unwrap();
        assert!(matches!(
            c.asymptotic_cone(),
            Err(Error::NotAsymptotic { .. })
        ));
    }
}
