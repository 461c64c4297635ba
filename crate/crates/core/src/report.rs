//! Combined verification report for one member of the curve family.

use serde::Serialize;

use crate::curve::{integrate_curve, ConeFit, CurveParams, ExpanderCurve, ProductExpander};
use crate::error::Result;
use crate::identities::{all_residuals, convergence_factor, ResidualReport};
use crate::measure::{ball_growth, weighted_volume, GrowthRow, QuadratureResult};
use crate::rigidity::{
    audit_cubic_curvature, audit_intrinsic_annulus, audit_linear_curvature, scal_flatness,
    AnnulusRecord, AuditReport, FlatnessRecord,
};
use crate::spectral::{
    build_problem, check_bounds, solve_bottom, BoundInputs, BoundReport, OperatorKind,
    SpectrumResult,
};

/// Thresholds and parameter grids used by [`build_report`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub d: f64,
    pub s_max: f64,
    pub grid_step: f64,
    #[serde(rename = "S")]
    pub half_width: f64,
    pub m: usize,
    pub drift_tol: f64,
    pub residual_tol: f64,
    pub min_convergence_factor: f64,
    pub tail_tol: f64,
    pub eigenfunction_alphas: Vec<f64>,
    pub l_alpha_alphas: Vec<f64>,
    pub bound_alphas: Vec<f64>,
    pub volume_alphas: Vec<f64>,
    pub growth_radii: Vec<f64>,
    pub betas: Vec<f64>,
    pub audit_alphas: Vec<f64>,
    pub flat_factors: Vec<usize>,
}

impl ReportConfig {
    pub fn new(d: f64) -> Self {
        ReportConfig {
            d,
            s_max: 20.0,
            grid_step: 1e-3,
            half_width: 16.0,
            m: 4001,
            drift_tol: 1e-8,
            residual_tol: 1e-5,
            min_convergence_factor: 3.5,
            tail_tol: 1e-8,
            eigenfunction_alphas: vec![1.0, 2.0],
            l_alpha_alphas: vec![0.0, 1.0, 2.0],
            bound_alphas: vec![1.0, 2.0, 4.0],
            volume_alphas: vec![0.25, 0.5, 1.0, 2.0],
            growth_radii: (1..=10).map(f64::from).collect(),
            betas: vec![0.5, 1.0, 10.0],
            audit_alphas: vec![1.0, 2.0, 100.0],
            flat_factors: vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub first_integral_c: f64,
    pub max_invariant_drift: f64,
    pub max_expander_residual: f64,
    pub sup_kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeFit>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityEntry {
    pub report: ResidualReport,
    /// Residual at twice the grid step; the convergence factor is the
    /// ratio of this to the reported residual.
    pub doubled_step_residual: f64,
    /// `None` when both residuals sit at the rounding floor.
    pub convergence_factor: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEntry {
    pub operator: OperatorKind,
    pub bottom: f64,
    pub result: SpectrumResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundGroup {
    pub flat_factors: usize,
    pub alpha: f64,
    pub reports: Vec<BoundReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeEntry {
    pub alpha: f64,
    pub result: QuadratureResult,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Audits {
    pub curvature_cubic: Vec<AuditReport>,
    pub curvature_linear: Vec<AuditReport>,
    pub intrinsic_annulus: AnnulusRecord,
    pub product_flatness: FlatnessRecord,
    /// Hypotheses hold exactly when the curve is the line.
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: ReportConfig,
    pub curve: CurveSummary,
    pub identities: Vec<IdentityEntry>,
    pub spectra: Vec<SpectrumEntry>,
    pub bounds: Vec<BoundGroup>,
    pub volumes: Vec<VolumeEntry>,
    pub growth: Vec<GrowthRow>,
    pub audits: Audits,
    pub pass: bool,
}

fn curve_summary(curve: &ExpanderCurve, config: &ReportConfig) -> CurveSummary {
    CurveSummary {
        first_integral_c: curve.first_integral_c,
        max_invariant_drift: curve.max_invariant_drift,
        max_expander_residual: curve.max_expander_residual,
        sup_kappa: curve.sup_kappa(),
        cone: curve.asymptotic_cone().ok(),
        pass: curve.max_invariant_drift <= config.drift_tol,
    }
}

fn identity_entries(curve: &ExpanderCurve, config: &ReportConfig) -> Result<Vec<IdentityEntry>> {
    let (ea, la) = (&config.eigenfunction_alphas, &config.l_alpha_alphas);
    let doubled = all_residuals(curve, 2.0 * config.grid_step, ea, la)?;
    let at_step = all_residuals(curve, config.grid_step, ea, la)?;
    Ok(at_step
        .into_iter()
        .zip(doubled)
        .map(|(r, c)| {
            let factor = convergence_factor(&c, &r);
            let agreement_ok = r.form_agreement.is_none_or(|a| a <= 1e-10);
            let pass = r.max_abs_residual <= config.residual_tol
                && factor.is_none_or(|x| x >= config.min_convergence_factor)
                && agreement_ok;
            IdentityEntry {
                doubled_step_residual: c.max_abs_residual,
                convergence_factor: factor,
                report: r,
                pass,
            }
        })
        .collect())
}

/// Runs every module on the curve with parameter `d` and aggregates the
/// results. Individual check failures are recorded, not raised.
pub fn build_report(config: &ReportConfig) -> Result<Report> {
    let curve = integrate_curve(CurveParams::new(config.d, config.s_max))?;
    let curve_part = curve_summary(&curve, config);
    let identities = identity_entries(&curve, config)?;

    let mut spectra = Vec::new();
    for kind in [OperatorKind::Drifted, OperatorKind::Stability] {
        let problem = build_problem(&curve, kind, config.half_width, config.m)?;
        let result = solve_bottom(&problem, 3)?;
        spectra.push(SpectrumEntry {
            operator: kind,
            bottom: result.bottom(),
            result,
        });
    }
    let inputs = BoundInputs {
        curve_lambda1: Some(spectra[0].bottom),
        curve_mu1: Some(spectra[1].bottom),
    };
    let mut bounds = Vec::new();
    for &k in &config.flat_factors {
        for &alpha in &config.bound_alphas {
            bounds.push(BoundGroup {
                flat_factors: k,
                alpha,
                reports: check_bounds(&curve, k, alpha, inputs)?,
            });
        }
    }

    let mut volumes = Vec::new();
    for &alpha in &config.volume_alphas {
        let result = weighted_volume(&curve, alpha)?;
        let pass = result.value.is_finite() && result.tail_bound <= config.tail_tol;
        volumes.push(VolumeEntry {
            alpha,
            result,
            pass,
        });
    }
    let growth = ball_growth(&curve, &config.growth_radii, 1.0)?;

    let is_line = config.d == 0.0;
    let curvature_cubic = config
        .betas
        .iter()
        .map(|&b| audit_cubic_curvature(&curve, b))
        .collect::<Result<Vec<_>>>()?;
    let curvature_linear = config
        .audit_alphas
        .iter()
        .map(|&a| audit_linear_curvature(&curve, a))
        .collect::<Result<Vec<_>>>()?;
    let j_max = ((config.s_max / 2.0).floor() as usize).max(1);
    let intrinsic_annulus = audit_intrinsic_annulus(&curve, 1, 1.0, j_max)?;
    let product_flatness = scal_flatness(&ProductExpander::new(curve.clone(), 1));
    let audits_pass = curvature_cubic
        .iter()
        .chain(&curvature_linear)
        .all(|r| r.hypothesis_holds == is_line)
        && intrinsic_annulus.tends_to_zero
        && product_flatness.max_abs_scal <= 1e-14
        && product_flatness.second_form_constant == is_line;
    let audits = Audits {
        curvature_cubic,
        curvature_linear,
        intrinsic_annulus,
        product_flatness,
        pass: audits_pass,
    };

    let pass = curve_part.pass
        && identities.iter().all(|e| e.pass)
        && bounds.iter().all(|g| g.reports.iter().all(|r| r.pass))
        && volumes.iter().all(|v| v.pass)
        && growth.iter().all(|r| r.pass)
        && audits.pass;

    Ok(Report {
        config: config.clone(),
        curve: curve_part,
        identities,
        spectra,
        bounds,
        volumes,
        growth,
        audits,
        pass,
    })
}
