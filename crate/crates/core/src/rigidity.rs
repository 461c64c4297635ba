//! Pointwise audits of the hypotheses in the rigidity theorems for
//! self-expanders.
//!
//! Each rigidity statement says that a self-expander satisfying a pointwise
//! curvature inequality is a hyperplane. On the curve family only the line
//! is a hyperplane, so every other member must violate each hypothesis
//! somewhere; the audits locate the extremal violation.

use serde::Serialize;

use crate::curve::{CurveSample, ExpanderCurve, ProductExpander};
use crate::error::{Error, Result};
use crate::measure::weighted_h_power;
use crate::quadrature::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Hyperplane,
    None,
}

/// Curvature growth fit `|H| ≤ a|x| + b` used for the theorems' growth
/// hypotheses; bounded curvature gives `a = 0`, `b = sup|κ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub theorem: String,
    /// Max (for `≤ 0` hypotheses) or min (for `≥ 0`) over the samples.
    pub extremum: f64,
    pub witness_s: f64,
    pub hypothesis_holds: bool,
    pub conclusion_expected: Conclusion,
    pub growth_fit: GrowthFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inf_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annulus_sequence: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annulus_tends_to_zero: Option<bool>,
}

fn growth_fit(curve: &ExpanderCurve) -> GrowthFit {
    GrowthFit {
        a: 0.0,
        b: curve.sup_kappa(),
    }
}

/// Extremum of `f` over the samples. Ties go to the smallest `|s|`, then to
/// the nonnegative side, so witnesses are reproducible.
fn scan<F>(curve: &ExpanderCurve, f: F, maximize: bool) -> (f64, f64)
where
    F: Fn(&CurveSample) -> f64,
{
    let mut best = (
        if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        0.0f64,
    );
    for p in &curve.samples {
        let v = f(p);
        let better = if maximize { v > best.0 } else { v < best.0 };
        let tie = v == best.0
            && (p.s.abs() < best.1.abs() || (p.s.abs() == best.1.abs() && p.s > best.1));
        if better || tie {
            best = (v, p.s);
        }
    }
    best
}

fn conclusion(holds: bool) -> Conclusion {
    if holds {
        Conclusion::Hyperplane
    } else {
        Conclusion::None
    }
}

/// `|A|²H² + ½H² + βA(xᵀ,xᵀ)H ≤ 0`, i.e. `q₁ = κ⁴ + ½κ² - βκ²⟨x,T⟩² ≤ 0`.
pub fn audit_cubic_curvature(curve: &ExpanderCurve, beta: f64) -> Result<AuditReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    let (extremum, witness_s) = scan(
        curve,
        |p| {
            let k2 = p.kappa * p.kappa;
            k2 * k2 + 0.5 * k2 - beta * k2 * p.xt * p.xt
        },
        true,
    );
    let holds = extremum <= 0.0;
    Ok(AuditReport {
        theorem: format!("curvature_cubic_upper_beta_{beta}"),
        extremum,
        witness_s,
        hypothesis_holds: holds,
        conclusion_expected: conclusion(holds),
        growth_fit: growth_fit(curve),
        inf_h: None,
        annulus_sequence: None,
        annulus_tends_to_zero: None,
    })
}

/// `|A|²H + H/2 + (α+1)/4 A(xᵀ,xᵀ) ≥ 0`, i.e.
/// `q₂ = -κ³ - κ/2 + (α+1)/4 κ⟨x,T⟩² ≥ 0`, with the lower bound on `H` and
/// the extrinsic annulus condition on the Gaussian volume.
pub fn audit_linear_curvature(curve: &ExpanderCurve, alpha: f64) -> Result<AuditReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    let (extremum, witness_s) = scan(
        curve,
        |p| {
            let k = p.kappa;
            -k * k * k - 0.5 * k + 0.25 * (alpha + 1.0) * k * p.xt * p.xt
        },
        false,
    );
    let holds = extremum >= 0.0;
    let annulus = weighted_h_power(curve, 0, alpha)?;
    Ok(AuditReport {
        theorem: format!("curvature_linear_lower_alpha_{alpha}"),
        extremum,
        witness_s,
        hypothesis_holds: holds,
        conclusion_expected: conclusion(holds),
        growth_fit: growth_fit(curve),
        inf_h: Some(-curve.sup_kappa()),
        annulus_sequence: Some(annulus.annulus_sequence),
        annulus_tends_to_zero: Some(annulus.tends_to_zero),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusRecord {
    pub delta: u32,
    pub alpha: f64,
    /// `a_j = j⁻² ∫_{j ≤ |s| ≤ 2j} H^{δ+1} e^{-α|x|²/4} ds`.
    pub sequence: Vec<f64>,
    pub tends_to_zero: bool,
}

/// Ratio test on the second half of a nonnegative sequence: every ratio
/// below 1 and the last at most ½. All-zero sequences pass.
pub fn ratio_test(seq: &[f64]) -> bool {
    if seq.iter().all(|v| *v == 0.0) {
        return !seq.is_empty();
    }
    if seq.len() < 2 {
        return false;
    }
    let ratios: Vec<f64> = seq
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    let tail = &ratios[ratios.len() / 2..];
    tail.iter().all(|r| *r < 1.0) && ratios.last().is_some_and(|r| *r <= 0.5)
}

/// Intrinsic annulus sequence about the vertex for `j = 1..=j_max`.
pub fn audit_intrinsic_annulus(
    curve: &ExpanderCurve,
    delta: u32,
    alpha: f64,
    j_max: usize,
) -> Result<AnnulusRecord> {
    if delta % 2 != 1 {
        return Err(Error::invalid(
            "delta",
            format!("must be an odd positive integer, got {delta}"),
        ));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    if j_max == 0 {
        return Err(Error::invalid("j_max", "must be ≥ 1"));
    }
    let reach = 2.0 * j_max as f64;
    if reach > curve.s_max() {
        return Err(Error::OutOfRange {
            what: "2 j_max".into(),
            value: reach,
            lo: 0.0,
            hi: curve.s_max(),
        });
    }
    let power = delta as i32 + 1;
    let integrand = |s: f64| {
        let (k, _, r2) = curve.local_at(s).expect("inside window");
        k.powi(power) * (-0.25 * alpha * r2).exp()
    };
    let sequence: Vec<f64> = (1..=j_max)
        .map(|j| {
            let (lo, hi) = (j as f64, 2.0 * j as f64);
            let both = adaptive_simpson(integrand, lo, hi, 1e-14).value
                + adaptive_simpson(integrand, -hi, -lo, 1e-14).value;
            both / (j * j) as f64
        })
        .collect();
    let tends_to_zero = ratio_test(&sequence);
    Ok(AnnulusRecord {
        delta,
        alpha,
        sequence,
        tends_to_zero,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessRecord {
    pub max_abs_scal: f64,
    pub kappa_sq_min: f64,
    pub kappa_sq_max: f64,
    pub second_form_constant: bool,
}

/// Tolerance on the range of `|A|²` for calling it constant.
pub const CONSTANT_FORM_TOL: f64 = 1e-12;

/// Scalar curvature and `|A|²` on `Γ × ℝ^k`, which only see the curve.
pub fn scal_flatness(product: &ProductExpander) -> FlatnessRecord {
    let mut max_abs_scal = 0.0f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &product.curve.samples {
        let h = -p.kappa;
        let a2 = p.kappa * p.kappa;
        max_abs_scal = max_abs_scal.max((h * h - a2).abs());
        lo = lo.min(a2);
        hi = hi.max(a2);
    }
    FlatnessRecord {
        max_abs_scal,
        kappa_sq_min: lo,
        kappa_sq_max: hi,
        second_form_constant: hi - lo <= CONSTANT_FORM_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{integrate_curve, CurveParams};

    #[test]
    fn line_satisfies_both_hypotheses() {
        let l = integrate_curve(CurveParams::new(0.0, 10.0)).unwrap();
        let r = audit_cubic_curvature(&l, 1.0).unwrap();
        assert!(r.hypothesis_holds && r.extremum == 0.0 && r.witness_s == 0.0);
        assert_eq!(r.conclusion_expected, Conclusion::Hyperplane);
        let r = audit_linear_curvature(&l, 1.0).unwrap();
        assert!(r.hypothesis_holds && r.extremum == 0.0);
    }

    #[test]
    fn ratio_test_cases() {
        assert!(ratio_test(&[0.0, 0.0]));
        assert!(ratio_test(&[1.0, 0.3, 0.01, 1e-5]));
        assert!(!ratio_test(&[1.0, 0.9, 0.85]));
        assert!(!ratio_test(&[]));
    }

    #[test]
    fn parameter_checks() {
        let c = integrate_curve(CurveParams::new(1.0, 10.0)).unwrap();
        assert!(audit_cubic_curvature(&c, 0.0).is_err());
        assert!(audit_linear_curvature(&c, -1.0).is_err());
        assert!(audit_intrinsic_annulus(&c, 2, 1.0, 3).is_err());
        assert!(matches!(
            audit_intrinsic_annulus(&c, 1, 1.0, 6),
            Err(Error::OutOfRange { .. })
        ));
    }
}
