//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::Instant;

use expander_core::curve::{integrate_curve, CurveParams, ExpanderCurve, ProductExpander};
use expander_core::identities::{all_residuals, convergence_factor, residual_stability_eigenpair};
use expander_core::measure::{
    ball_growth, divergence_probe, functional_i, linspace, weighted_volume, GrowthCoefficients,
};
use expander_core::rigidity::{audit_cubic_curvature, audit_linear_curvature};
use expander_core::spectral::{
    check_bounds, curve_bottom, product_bottom, BoundInputs, BoundReport, OperatorKind,
};

type Outcome = Result<String, String>;

const S: f64 = 16.0;
const M: usize = 4001;

fn curve(d: f64, s_max: f64) -> ExpanderCurve {
    integrate_curve(CurveParams::new(d, s_max)).expect("curve integrates")
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn bottoms(c: &ExpanderCurve) -> (f64, f64) {
    let lambda = curve_bottom(c, OperatorKind::Drifted, S, M)
        .unwrap()
        .bottom();
    let mu = curve_bottom(c, OperatorKind::Stability, S, M)
        .unwrap()
        .bottom();
    (lambda, mu)
}

fn bounds(c: &ExpanderCurve, alpha: f64) -> Vec<BoundReport> {
    let (lambda, mu) = bottoms(c);
    let inputs = BoundInputs {
        curve_lambda1: Some(lambda),
        curve_mu1: Some(mu),
    };
    check_bounds(c, 0, alpha, inputs).unwrap()
}

fn hyperplane_spectrum() -> Outcome {
    let start = Instant::now();
    let line = curve(0.0, 20.0);
    let result = curve_bottom(&line, OperatorKind::Drifted, S, M).map_err(|e| e.to_string())?;
    let lambda = result.bottom();
    let plane = product_bottom(&result, 1);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        (lambda - 0.5).abs() <= 1e-6,
        format!("line lambda_1 = {lambda}"),
    )?;
    ensure(
        plane == lambda + 0.5 && (plane - 1.0).abs() <= 1e-6,
        format!("plane lambda_1 = {plane}"),
    )?;
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!(
        "lambda_1(line) = {lambda:.10}, lambda_1(plane) = {plane:.10}, {secs:.2} s"
    ))
}

fn stability_bottom_is_n_plus_one_half() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in [0.0, 0.5, 1.0, 2.0] {
        let c = curve(d, 20.0);
        let result = curve_bottom(&c, OperatorKind::Stability, S, M).map_err(|e| e.to_string())?;
        let mu = result.bottom();
        let mu_product = product_bottom(&result, 1);
        ensure((mu - 1.0).abs() <= 1e-3, format!("d = {d}: mu_1 = {mu}"))?;
        ensure(
            (mu_product - 1.5).abs() <= 1e-3,
            format!("d = {d}: mu_1 x R = {mu_product}"),
        )?;
        worst = worst.max((mu - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("took {secs:.2} s"))?;
    Ok(format!("max |mu_1 - 1| = {worst:.2e}, {secs:.2} s"))
}

fn exact_eigenpair() -> Outcome {
    let mut worst = 0.0f64;
    for d in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let r = residual_stability_eigenpair(&curve(d, 20.0), 1e-3).map_err(|e| e.to_string())?;
        ensure(
            r.max_abs_residual <= 1e-5,
            format!("d = {d}: residual {:e}", r.max_abs_residual),
        )?;
        worst = worst.max(r.max_abs_residual);
    }
    Ok(format!(
        "max residual {worst:.2e} over d in {{0, 0.5, 1, 2, 4}}"
    ))
}

fn first_integral() -> Outcome {
    let mut worst = 0.0f64;
    for d in [0.5, 1.0, 2.0, 4.0] {
        let drift = curve(d, 20.0).max_invariant_drift;
        ensure(drift <= 1e-8, format!("d = {d}: drift {drift:e}"))?;
        worst = worst.max(drift);
    }
    Ok(format!("max relative drift {worst:.2e}"))
}

fn identity_suite() -> Outcome {
    let (ea, la) = ([1.0, 2.0], [0.0, 1.0, 2.0]);
    let mut worst = 0.0f64;
    let mut slowest = f64::INFINITY;
    let mut count = 0;
    for d in [0.5, 1.0, 2.0] {
        let c = curve(d, 20.0);
        let coarse = all_residuals(&c, 2e-3, &ea, &la).map_err(|e| e.to_string())?;
        let fine = all_residuals(&c, 1e-3, &ea, &la).map_err(|e| e.to_string())?;
        for (a, b) in coarse.iter().zip(&fine) {
            let name = &b.identity_name;
            ensure(
                b.max_abs_residual <= 1e-5,
                format!("d = {d}, {name}: residual {:e}", b.max_abs_residual),
            )?;
            if let Some(f) = convergence_factor(a, b) {
                ensure(
                    f >= 3.5,
                    format!("d = {d}, {name}: convergence factor {f:.3}"),
                )?;
                slowest = slowest.min(f);
            }
            worst = worst.max(b.max_abs_residual);
            count += 1;
        }
    }
    Ok(format!(
        "{count} residuals, max {worst:.2e}, min convergence factor {slowest:.3}"
    ))
}

fn sandwich_bounds() -> Outcome {
    let mut notes = Vec::new();
    for d in [0.5, 1.0, 2.0] {
        let c = curve(d, 20.0);
        let reports = bounds(&c, 1.0);
        let lower = &reports[0];
        let upper = &reports[1];
        let versus = &reports[5];
        ensure(
            lower.margin > 1e-4,
            format!("d = {d}: lambda_1 - 1/2 = {:e}", lower.margin),
        )?;
        ensure(
            upper.pass,
            format!("d = {d}: upper margin {:e}", upper.margin),
        )?;
        ensure(
            versus.margin >= -1e-6,
            format!("d = {d}: mu_1 - lambda_1 - 1/2 = {:e}", -versus.margin),
        )?;
        notes.push(format!("d={d}: {:.3e}/{:.3e}", lower.margin, upper.margin));
    }
    Ok(format!("lower/upper margins {}", notes.join(", ")))
}

fn general_alpha_bounds() -> Outcome {
    let c = curve(1.0, 20.0);
    let mut least = f64::INFINITY;
    for alpha in [1.0, 2.0, 4.0] {
        let reports = bounds(&c, alpha);
        for r in [&reports[2], &reports[6]] {
            ensure(
                r.margin >= -1e-6,
                format!("alpha = {alpha}, {}: margin {:e}", r.name, r.margin),
            )?;
            least = least.min(r.margin);
        }
    }
    Ok(format!("smallest margin {least:.3e}"))
}

fn weighted_volumes() -> Outcome {
    let line = weighted_volume(&curve(0.0, 20.0), 1.0).map_err(|e| e.to_string())?;
    let exact = 2.0 * std::f64::consts::PI.sqrt();
    let err = (line.value - exact).abs();
    ensure(
        err <= 1e-8 + line.tail_bound,
        format!("line volume error {err:e}"),
    )?;
    let windows = [20.0, 22.0, 24.0];
    let curves: Vec<ExpanderCurve> = windows.iter().map(|&s| curve(1.0, s)).collect();
    let mut largest = 0.0f64;
    for alpha in [0.25, 0.5, 1.0, 2.0] {
        let values = curves
            .iter()
            .map(|c| weighted_volume(c, alpha).map(|r| r.value))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for w in values.windows(2) {
            let inc = (w[1] - w[0]).abs();
            ensure(inc <= 1e-8, format!("alpha = {alpha}: increment {inc:e}"))?;
            largest = largest.max(inc);
        }
    }
    Ok(format!(
        "line error {err:.1e}, largest Cauchy increment {largest:.1e}"
    ))
}

fn growth_table() -> Outcome {
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    for d in [0.0, 1.0] {
        let rows = ball_growth(&curve(d, 20.0), &radii, 1.0).map_err(|e| e.to_string())?;
        if let Some(row) = rows.iter().find(|r| !r.pass) {
            return Err(format!("d = {d}: row r = {} fails", row.r));
        }
    }
    let far: Vec<f64> = (10..=20).map(f64::from).collect();
    let rows = ball_growth(&curve(1.0, 24.0), &far, 1.0).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.vol / r.r).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    ensure(lo >= 1.8 && hi <= 2.2, format!("vol(r)/r in [{lo}, {hi}]"))?;
    Ok(format!(
        "all rows pass, vol(r)/r in [{lo:.4}, {hi:.4}] for r in [10, 20]"
    ))
}

fn monotone_functionals() -> Outcome {
    let zero = GrowthCoefficients { a: 0.0, b: 0.0 };
    let line = curve(0.0, 20.0);
    let d1 = curve(1.0, 20.0);
    let short = linspace(1.0, 0.1f64.exp(), 50);
    let configs = [
        (
            "line on [1, 1.2]",
            functional_i(&line, 1.0, zero, 4.0, &linspace(1.0, 1.2, 50)),
        ),
        (
            "line on [1, e^0.1]",
            functional_i(&line, 1.0, zero, 4.0, &short),
        ),
        (
            "d = 1 on [1, e^0.1]",
            functional_i(
                &d1,
                1.0,
                GrowthCoefficients {
                    a: 0.0,
                    b: d1.sup_kappa(),
                },
                4.0,
                &short,
            ),
        ),
    ];
    for (label, probe) in configs {
        let probe = probe.map_err(|e| e.to_string())?;
        ensure(
            probe.monotone,
            format!("functional I not monotone for {label}"),
        )?;
    }

    let radii = linspace(1.5, 19.0, 50);
    let mut worst = 0.0f64;
    let flat_line = divergence_probe(&line, 0.0, zero, 1.0, &radii).map_err(|e| e.to_string())?;
    let plane = divergence_probe(
        &ProductExpander::new(line.clone(), 1),
        0.0,
        zero,
        1.0,
        &radii,
    )
    .map_err(|e| e.to_string())?;
    for (probe, exact) in [
        (
            &flat_line,
            &(|t: f64| (2.0 * t - 2.0) / t) as &dyn Fn(f64) -> f64,
        ),
        (&plane, &|t: f64| {
            std::f64::consts::PI * (t * t - 1.0) / (t * t)
        }),
    ] {
        ensure(probe.monotone, "divergence probe not nondecreasing".into())?;
        for row in &probe.rows {
            worst = worst.max((row.value - exact(row.t)).abs());
        }
    }
    ensure(worst <= 1e-10, format!("closed-form error {worst:e}"))?;
    Ok(format!(
        "I nonincreasing on 3 grids, divergence closed-form error {worst:.1e}"
    ))
}

fn rigidity_contrapositives() -> Outcome {
    let (betas, alphas) = ([0.5, 1.0, 10.0], [1.0, 2.0, 100.0]);
    for d in [0.5, 1.0, 2.0] {
        let c = curve(d, 20.0);
        let q1 = d.powi(4) / 16.0 + d * d / 8.0;
        let q2 = -d.powi(3) / 8.0 - d / 4.0;
        for beta in betas {
            let r = audit_cubic_curvature(&c, beta).map_err(|e| e.to_string())?;
            ensure(
                !r.hypothesis_holds,
                format!("d = {d}, beta = {beta}: hypothesis holds"),
            )?;
            ensure(
                r.witness_s == 0.0 && (r.extremum - q1).abs() <= 1e-12 * q1,
                format!(
                    "d = {d}, beta = {beta}: extremum {} at s = {}",
                    r.extremum, r.witness_s
                ),
            )?;
        }
        for alpha in alphas {
            let r = audit_linear_curvature(&c, alpha).map_err(|e| e.to_string())?;
            ensure(
                !r.hypothesis_holds,
                format!("d = {d}, alpha = {alpha}: hypothesis holds"),
            )?;
            ensure(
                r.witness_s == 0.0 && (r.extremum - q2).abs() <= 1e-12 * q2.abs(),
                format!(
                    "d = {d}, alpha = {alpha}: extremum {} at s = {}",
                    r.extremum, r.witness_s
                ),
            )?;
        }
    }
    let line = curve(0.0, 20.0);
    for (beta, alpha) in betas.iter().zip(alphas) {
        let holds = audit_cubic_curvature(&line, *beta)
            .unwrap()
            .hypothesis_holds
            && audit_linear_curvature(&line, alpha)
                .unwrap()
                .hypothesis_holds;
        ensure(
            holds,
            format!("line: hypotheses fail at beta = {beta}, alpha = {alpha}"),
        )?;
    }
    Ok("vertex witnesses match closed forms; line satisfies both hypotheses".into())
}

fn deterministic_report() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_expander"))
            .args(["report", "--d", "1"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(
        a.status.success(),
        format!("report exited with {:?}", a.status.code()),
    )?;
    ensure(
        !a.stdout.is_empty() && a.stdout == b.stdout,
        "outputs differ".into(),
    )?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("hyperplane spectrum", hyperplane_spectrum),
        (
            "stability bottom (n+1)/2",
            stability_bottom_is_n_plus_one_half,
        ),
        ("exact stability eigenpair", exact_eigenpair),
        ("first integral drift", first_integral),
        ("identity residual suite", identity_suite),
        ("sandwich bounds", sandwich_bounds),
        ("general-alpha bounds", general_alpha_bounds),
        ("weighted volumes", weighted_volumes),
        ("growth table", growth_table),
        ("monotone functionals", monotone_functionals),
        ("rigidity contrapositives", rigidity_contrapositives),
        ("deterministic report", deterministic_report),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
