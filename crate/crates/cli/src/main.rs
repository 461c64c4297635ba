//! `expander`: command-line front end for the self-expander toolkit.
//!
//! Exit codes: 0 when every executed check passes, 1 on a failed check or a
//! computation error (error JSON on stderr), 2 on usage errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expander_core::curve::{integrate_curve, CurveParams, ExpanderCurve, ProductExpander};
use expander_core::fmt::to_json;
use expander_core::identities::{
    residual_l_alpha_h, residual_simo, residual_stability_eigenpair, residual_test_eigenfunction,
};
use expander_core::measure::{
    ball_growth, divergence_alpha, divergence_probe, functional_i, linspace, weighted_volume,
    write_growth_csv, write_probe_csv, GrowthCoefficients, ProbeResult,
};
use expander_core::report::{build_report, ReportConfig};
use expander_core::rigidity::{
    audit_cubic_curvature, audit_intrinsic_annulus, audit_linear_curvature, scal_flatness,
};
use expander_core::spectral::{
    build_problem, compute_bounds, product_spectrum, solve_bottom, OperatorKind,
};
use expander_core::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "expander",
    version,
    about = "Self-expander curves, weighted volumes and spectral bounds"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Flat key=value file of defaults; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CurveArgs {
    /// Distance of the vertex from the origin (0 gives the line).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    d: f64,
    #[arg(long, default_value_t = 20.0)]
    s_max: f64,
    #[arg(long, default_value_t = expander_core::curve::DEFAULT_STEP_TOL)]
    step_tol: f64,
}

impl CurveArgs {
    fn build(&self) -> Result<ExpanderCurve, Error> {
        integrate_curve(CurveParams::new(self.d, self.s_max).with_step_tol(self.step_tol))
    }
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Operator {
    Drifted,
    Stability,
}

impl From<Operator> for OperatorKind {
    fn from(op: Operator) -> Self {
        match op {
            Operator::Drifted => OperatorKind::Drifted,
            Operator::Stability => OperatorKind::Stability,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Audit {
    Hypotheses,
    Annulus,
    Flatness,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a curve and export its samples.
    Curve {
        #[command(flatten)]
        curve: CurveArgs,
        /// Number of samples over [-s_max, s_max].
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Finite-difference residuals of the pointwise identities.
    Identities {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
        alpha: Vec<f64>,
        /// Largest accepted normalized residual.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Gaussian-weighted volume with tail bound.
    Volume {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        flat_factors: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Volume of balls against the Gaussian growth bound.
    Growth {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        flat_factors: usize,
        /// Comma list or `lo:hi:step`.
        #[arg(long, default_value = "1:10:1")]
        radii: String,
        #[command(flatten)]
        output: Output,
    },
    /// The functional I(t) on a grid in t.
    ProbeI {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Defaults to sup |κ| of the curve.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 0.1f64.exp())]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        t_points: usize,
        #[command(flatten)]
        output: Output,
    },
    /// The divergence functional φ(t) on a grid of radii.
    ProbeDiv {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 0)]
        flat_factors: usize,
        /// Slope in |H| ≥ a|x| + b; sets α = 4a²/(1 - 4a²) unless --alpha is given.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 1.5)]
        t_min: f64,
        #[arg(long, default_value_t = 19.0)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        t_points: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Lowest eigenvalues of the drifted or stability operator.
    Spectrum {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t = Operator::Drifted)]
        operator: Operator,
        #[arg(long, default_value_t = 0)]
        flat_factors: usize,
        #[arg(long = "S", alias = "half-width", default_value_t = 16.0)]
        half_width: f64,
        #[arg(long, default_value_t = 4001)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Spectral inequalities as BoundReports.
    Bounds {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 0)]
        flat_factors: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long = "S", alias = "half-width", default_value_t = 16.0)]
        half_width: f64,
        #[arg(long, default_value_t = 4001)]
        m: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Hypothesis audits of the rigidity theorems.
    Rigidity {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t = Audit::Hypotheses)]
        audit: Audit,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 10.0])]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 100.0])]
        alpha: Vec<f64>,
        /// Odd exponent for the intrinsic annulus condition.
        #[arg(long, default_value_t = 1)]
        delta: u32,
        #[arg(long)]
        j_max: Option<usize>,
        #[arg(long, default_value_t = 1)]
        flat_factors: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Every check for one curve, as a single JSON document.
    Report {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        d: f64,
        #[arg(long, default_value_t = 20.0)]
        s_max: f64,
        #[arg(long = "S", alias = "half-width", default_value_t = 16.0)]
        half_width: f64,
        #[arg(long, default_value_t = 4001)]
        m: usize,
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[command(flatten)]
        output: Output,
    },
}

/// Failure modes that map to exit codes.
enum Failure {
    Compute(Error),
    Usage(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Rewrites `--config PATH` into the flags it contains, placed directly
/// after the subcommand so later explicit flags win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(it.next().ok_or("--config needs a path")?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
        let key = key.trim();
        let flag = if key == "S" {
            "S".to_string()
        } else {
            key.replace('_', "-")
        };
        injected.push(format!("--{flag}"));
        injected.push(value.trim().to_string());
    }
    // position of the subcommand: first argument after the program name
    // that is not a flag
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2);
    match at {
        Some(at) => {
            rest.splice(at..at, injected);
            Ok(rest)
        }
        None => Err("--config requires a subcommand".into()),
    }
}

fn writer(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(output: &Output, text: &str) -> Result<(), Failure> {
    if output.format == Some(Format::Csv) {
        return Err(Failure::Usage("this subcommand only writes JSON".into()));
    }
    let mut w = writer(&output.out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn emit_probe(output: &Output, probe: &ProbeResult) -> Result<(), Failure> {
    let mut w = writer(&output.out)?;
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            write_probe_csv(probe, &mut w)?;
            eprintln!(
                "monotone={} hypothesis_holds={}",
                probe.monotone, probe.hypothesis_holds
            );
        }
        Format::Json => w.write_all(to_json(probe).as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

fn parse_radii(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "invalid radii `{spec}`: use a comma list or lo:hi:step"
        ))
    };
    if let Some((lo, rest)) = spec.split_once(':') {
        let (hi, step) = rest.split_once(':').ok_or_else(bad)?;
        let (lo, hi, step): (f64, f64, f64) = (
            lo.parse().map_err(|_| bad())?,
            hi.parse().map_err(|_| bad())?,
            step.parse().map_err(|_| bad())?,
        );
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + step * i as f64).collect())
    } else {
        spec.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect()
    }
}

/// Runs one subcommand; `Ok(false)` means a check failed.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Curve {
            curve,
            samples,
            output,
        } => {
            let mut params = CurveParams::new(curve.d, curve.s_max).with_step_tol(curve.step_tol);
            if let Some(n) = samples {
                params = params.with_samples(n);
            }
            let c = integrate_curve(params)?;
            eprintln!("max_invariant_drift={:e}", c.max_invariant_drift);
            let mut w = writer(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => c.write_csv(&mut w)?,
                Format::Json => {
                    let doc = json!({
                        "d": c.d(),
                        "s_max": c.s_max(),
                        "samples": c.samples.len(),
                        "first_integral_c": c.first_integral_c,
                        "max_invariant_drift": c.max_invariant_drift,
                        "max_expander_residual": c.max_expander_residual,
                        "cone": c.asymptotic_cone().ok(),
                    });
                    w.write_all(to_json(&doc).as_bytes())?;
                }
            }
            w.flush()?;
            Ok(c.max_invariant_drift <= 1e-8)
        }
        Command::Identities {
            curve,
            grid_step,
            alpha,
            tol,
            output,
        } => {
            let c = curve.build()?;
            let mut reports = residual_simo(&c, grid_step)?;
            for &a in &alpha {
                reports.push(residual_test_eigenfunction(&c, a, grid_step)?);
            }
            for &a in &alpha {
                reports.push(residual_l_alpha_h(&c, a, grid_step)?);
            }
            reports.push(residual_stability_eigenpair(&c, grid_step)?);
            emit_json(&output, &to_json(&reports))?;
            Ok(reports.iter().all(|r| r.max_abs_residual <= tol))
        }
        Command::Volume {
            curve,
            alpha,
            flat_factors,
            output,
        } => {
            let c = curve.build()?;
            let result = weighted_volume(&ProductExpander::new(c, flat_factors), alpha)?;
            emit_json(&output, &to_json(&result))?;
            Ok(result.value.is_finite() && result.tail_bound.is_finite())
        }
        Command::Growth {
            curve,
            alpha,
            flat_factors,
            radii,
            output,
        } => {
            let radii = parse_radii(&radii)?;
            let c = curve.build()?;
            let rows = ball_growth(&ProductExpander::new(c, flat_factors), &radii, alpha)?;
            let mut w = writer(&output.out)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => write_growth_csv(&rows, &mut w)?,
                Format::Json => w.write_all(to_json(&rows).as_bytes())?,
            }
            w.flush()?;
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::ProbeI {
            curve,
            alpha,
            a,
            b,
            r,
            t_min,
            t_max,
            t_points,
            output,
        } => {
            let c = curve.build()?;
            let b = b.unwrap_or_else(|| c.sup_kappa());
            let grid = linspace(t_min, t_max, t_points);
            let probe = functional_i(&c, alpha, GrowthCoefficients { a, b }, r, &grid)?;
            emit_probe(&output, &probe)?;
            Ok(probe.monotone || !probe.hypothesis_holds)
        }
        Command::ProbeDiv {
            curve,
            flat_factors,
            a,
            b,
            alpha,
            r0,
            t_min,
            t_max,
            t_points,
            output,
        } => {
            let alpha = match alpha {
                Some(v) => v,
                None => divergence_alpha(a)?,
            };
            let c = curve.build()?;
            let grid = linspace(t_min, t_max, t_points);
            let probe = divergence_probe(
                &ProductExpander::new(c, flat_factors),
                alpha,
                GrowthCoefficients { a, b },
                r0,
                &grid,
            )?;
            emit_probe(&output, &probe)?;
            Ok(probe.monotone || !probe.hypothesis_holds)
        }
        Command::Spectrum {
            curve,
            operator,
            flat_factors,
            half_width,
            m,
            k,
            output,
        } => {
            let c = curve.build()?;
            let problem = build_problem(&c, operator.into(), half_width, m)?;
            let result = solve_bottom(&problem, k)?;
            let doc = json!({
                "operator": OperatorKind::from(operator).name(),
                "d": c.d(),
                "flat_factors": flat_factors,
                "S": half_width,
                "m": m,
                "eigenvalues": product_spectrum(&result.eigenvalues, flat_factors, k),
                "est_error": result.convergence.est_error,
                "richardson_estimate": result.convergence.richardson_estimate + 0.5 * flat_factors as f64,
                "rayleigh_gap": result.convergence.rayleigh_gap,
            });
            emit_json(&output, &to_json(&doc))?;
            Ok(true)
        }
        Command::Bounds {
            curve,
            flat_factors,
            alpha,
            half_width,
            m,
            output,
        } => {
            let c = curve.build()?;
            let reports = compute_bounds(&c, flat_factors, alpha, half_width, m)?;
            emit_json(&output, &to_json(&reports))?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Rigidity {
            curve,
            audit,
            beta,
            alpha,
            delta,
            j_max,
            flat_factors,
            output,
        } => {
            let c = curve.build()?;
            let is_line = c.d() == 0.0;
            match audit {
                Audit::Hypotheses => {
                    let mut reports = Vec::new();
                    for &b in &beta {
                        reports.push(audit_cubic_curvature(&c, b)?);
                    }
                    for &a in &alpha {
                        reports.push(audit_linear_curvature(&c, a)?);
                    }
                    emit_json(&output, &to_json(&reports))?;
                    // a non-line satisfying a hypothesis would contradict rigidity
                    Ok(reports.iter().all(|r| !r.hypothesis_holds || is_line))
                }
                Audit::Annulus => {
                    let j_max = j_max.unwrap_or(((c.s_max() / 2.0).floor() as usize).max(1));
                    let a = alpha.first().copied().unwrap_or(1.0);
                    let record = audit_intrinsic_annulus(&c, delta, a, j_max)?;
                    emit_json(&output, &to_json(&record))?;
                    Ok(true)
                }
                Audit::Flatness => {
                    let record = scal_flatness(&ProductExpander::new(c, flat_factors));
                    emit_json(&output, &to_json(&record))?;
                    Ok(record.max_abs_scal <= 1e-14 && record.second_form_constant == is_line)
                }
            }
        }
        Command::Report {
            d,
            s_max,
            half_width,
            m,
            grid_step,
            output,
        } => {
            let mut config = ReportConfig::new(d);
            config.s_max = s_max;
            config.half_width = half_width;
            config.m = m;
            config.grid_step = grid_step;
            let report = build_report(&config)?;
            emit_json(&output, &to_json(&report))?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Compute(e)) => {
            eprint!("{}", e.to_json());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
