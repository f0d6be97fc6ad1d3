//! Command-line front end. Every command writes one JSON report.
//!
//! Exit codes: 0 success, 1 invalid input, 2 hypotheses fail (strict mode),
//! 3 numeric failure, inconclusive result or failed verification.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::assumptions::{
    check_all, check_main_assumptions, check_parabolic_sheaf_conditions,
    check_stationary_phase_conditions,
};
use crate::error::{Error, Result};
use crate::json::{self, complex_json, rational_json, report_render, SCHEMA_VERSION};
use crate::lattice::{beta_refined_twists, frame_twists_f, frame_twists_g, minimal_extension};
use crate::puiseux::{
    branch_count_at, char_poly, inverse_branches, inversion_defect, puiseux_branches,
};
use crate::scalar::{parse_q, ComplexScalar, GaussQ, Q};
use crate::singularity_data::{ensure_valid, validate, ConnectionData};
use crate::stationary_phase::{
    full_transform, graded_dimension_match, grr_report, involution_defect, pardeg_report,
    TransformOptions,
};
use crate::weyl::{
    indicial_data, invariant_lattice_search, parse_operator, rank_one_model, singular_points,
    SingularPoint, WeylOperator,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_HYPOTHESES: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "nahmcalc",
    version,
    about = "Singularity data of Fourier–Laplace / Nahm transforms on the projective line"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Strict,
    BestEffort,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Input JSON file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = crate::scalar::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Series truncation order (default 8 for lattice search, 16 for spectral fields).
    #[arg(long, global = true)]
    pub truncation_order: Option<i64>,
    /// Number of Puiseux terms per branch.
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: usize,
    /// Assert the genericity condition of the local models.
    #[arg(long, global = true)]
    pub assume_generic: bool,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Strict)]
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    Main,
    Parabolic,
    Stationary,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structural validation of a datum.
    Validate,
    /// Hypothesis checks.
    Check {
        #[arg(long, value_enum)]
        theorem: Option<Theorem>,
    },
    /// Full transform of a de Rham datum.
    Transform,
    /// Frame twists, β-refined twists and the minimal extension.
    Lattice {
        #[arg(long)]
        beta: Option<String>,
    },
    /// Operators in the first Weyl algebra.
    #[command(subcommand)]
    Weyl(WeylCmd),
    /// Spectral curve expansions of local Higgs fields.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Cross-checks between independent routes.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
pub enum WeylCmd {
    /// Fourier–Laplace image of an operator.
    Fl { op: String },
    /// Product of two operators.
    Mul { p: String, q: String },
    /// Singular points of an operator.
    Singular { op: String },
    /// Indicial polynomial and exponents at a point (`inf` for infinity).
    Indicial {
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Search for sub-D-modules of a candidate lattice (input JSON).
    LatticeSearch,
}

#[derive(Subcommand, Debug)]
pub enum SpectralCmd {
    /// Puiseux branches of the characteristic polynomial of a local Higgs field.
    Branches {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
    },
    /// Inverse series at infinity, one per conjugacy class of pole-type branches.
    Invert,
    /// Branch count at a sample `ζ`, compared with the transformed rank.
    Count {
        #[arg(long, default_value = "40,10", allow_hyphen_values = true)]
        zeta: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Applies the transform twice and compares with the input.
    Involution,
    /// Parabolic degree on both sides.
    Pardeg,
    /// Rank and degree from both formulas.
    Grr,
    /// Rank-one comparison with the operator-level transform.
    Oracle,
}

/// Parses `"a"`, `"a,b"` or `"inf"`.
fn parse_point(text: &str) -> Result<SingularPoint> {
    let t = text.trim();
    if t == "inf" || t == "infinity" {
        return Ok(SingularPoint::Infinity);
    }
    Ok(SingularPoint::Finite(parse_complex_text(t)?))
}

fn parse_complex_text(t: &str) -> Result<ComplexScalar> {
    let (re, im) = t.split_once(',').unwrap_or((t, "0"));
    let re = parse_q(re).ok_or_else(|| Error::parse("point", format!("cannot parse '{re}'")))?;
    let im = parse_q(im).ok_or_else(|| Error::parse("point", format!("cannot parse '{im}'")))?;
    Ok(ComplexScalar::Exact(GaussQ::new(re, im)))
}

fn input_value(g: &GlobalOpts) -> Result<Value> {
    let path = g
        .input
        .as_ref()
        .ok_or_else(|| Error::parse("--input", "an input file is required"))?;
    json::parse_json_text(&json::read_text(path)?)
}

fn input_data(g: &GlobalOpts) -> Result<ConnectionData> {
    json::data_from_json(&input_value(g)?)
}

fn options(g: &GlobalOpts) -> TransformOptions {
    TransformOptions {
        tolerance: g.tolerance,
        assume_generic: g.assume_generic,
        best_effort: g.mode == Mode::BestEffort,
        include_infinity_modification: true,
    }
}

fn operator_json(op: &WeylOperator) -> Value {
    json!({"variable": op.var.name(), "text": op.to_string(), "order": op.order()})
}

fn point_json(p: &SingularPoint) -> Value {
    match p {
        SingularPoint::Finite(c) => complex_json(c),
        SingularPoint::Infinity => json!("infinity"),
    }
}

/// Runs a parsed command and returns `(exit code, report)`.
pub fn run(cli: &Cli) -> (i32, Value) {
    match dispatch(cli) {
        Ok((code, v)) => (code, v),
        Err(e) => error_report(&e),
    }
}

fn error_report(e: &Error) -> (i32, Value) {
    let (code, kind, details) = match e {
        Error::Invalid(r) => (EXIT_INVALID, "invalid", json::validation_json(r)),
        Error::Parse { .. } => (EXIT_INVALID, "parse", Value::Null),
        Error::Hypotheses(r) => (EXIT_HYPOTHESES, "hypotheses", json::assumptions_json(r)),
        Error::Inconsistent(_) => (EXIT_NUMERIC, "inconsistent", Value::Null),
        Error::Numeric(_) => (EXIT_NUMERIC, "numeric", Value::Null),
        Error::Inconclusive(_) => (EXIT_NUMERIC, "inconclusive", Value::Null),
    };
    (
        code,
        json!({"schema_version": SCHEMA_VERSION, "error": kind, "message": e.to_string(), "details": details}),
    )
}

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_NUMERIC
    }
}

fn dispatch(cli: &Cli) -> Result<(i32, Value)> {
    let g = &cli.global;
    let tol = g.tolerance;
    match &cli.command {
        Command::Validate => {
            let d = input_data(g)?;
            let r = validate(&d, tol);
            let code = if r.is_valid() { EXIT_OK } else { EXIT_INVALID };
            Ok((code, json::validation_json(&r)))
        }
        Command::Check { theorem } => {
            let d = input_data(g)?;
            ensure_valid(&d, tol)?;
            let mut r = match theorem {
                None => check_all(&d, tol, g.assume_generic),
                Some(Theorem::Main) => check_main_assumptions(&d, tol),
                Some(Theorem::Parabolic) => check_parabolic_sheaf_conditions(&d, tol),
                Some(Theorem::Stationary) => check_stationary_phase_conditions(&d, tol),
            };
            r.genericity_asserted = g.assume_generic;
            let code = if r.passes() { EXIT_OK } else { EXIT_HYPOTHESES };
            Ok((code, json::assumptions_json(&r)))
        }
        Command::Transform => {
            let d = input_data(g)?;
            let t = full_transform(&d, &options(g))?;
            let mut v = json::transformed_json(&t);
            v["graded_match"] = json::graded_match_json(&graded_dimension_match(&d, &t.datum, tol));
            Ok((EXIT_OK, v))
        }
        Command::Lattice { beta } => {
            let d = input_data(g)?;
            ensure_valid(&d, tol)?;
            let gs = frame_twists_g(&d);
            let fs = frame_twists_f(&d, tol);
            let mut v = json!({
                "schema_version": SCHEMA_VERSION,
                "G": json::lattice_spec_json("G", &gs, d.degree),
                "F": json::lattice_spec_json("F", &fs, d.degree),
                "minimal_extension": json::minimal_extension_json(&minimal_extension(&d, tol)?),
            });
            if let Some(b) = beta {
                let b: Q = parse_q(b)
                    .ok_or_else(|| Error::parse("--beta", format!("cannot parse '{b}'")))?;
                let gb = beta_refined_twists(&gs, &d, &b, tol)?;
                let fb = beta_refined_twists(&fs, &d, &b, tol)?;
                v["beta"] = rational_json(&b);
                v["G_beta"] = json::lattice_spec_json("G_beta", &gb, d.degree);
                v["F_beta"] = json::lattice_spec_json("F_beta", &fb, d.degree);
            }
            Ok((EXIT_OK, v))
        }
        Command::Weyl(cmd) => weyl(cmd, g),
        Command::Spectral(cmd) => spectral(cmd, g),
        Command::Verify(cmd) => verify(cmd, g),
    }
}

fn weyl(cmd: &WeylCmd, g: &GlobalOpts) -> Result<(i32, Value)> {
    let tol = g.tolerance;
    match cmd {
        WeylCmd::Fl { op } => {
            let p = parse_operator(op)?;
            let f = p.fourier_laplace();
            Ok((
                EXIT_OK,
                json!({"schema_version": SCHEMA_VERSION, "input": operator_json(&p), "transform": operator_json(&f)}),
            ))
        }
        WeylCmd::Mul { p, q } => {
            let (a, b) = (parse_operator(p)?, parse_operator(q)?);
            let prod = a.multiply(&b)?;
            Ok((
                EXIT_OK,
                json!({"schema_version": SCHEMA_VERSION, "product": operator_json(&prod)}),
            ))
        }
        WeylCmd::Singular { op } => {
            let p = parse_operator(op)?;
            let pts = singular_points(&p, tol)?;
            Ok((
                EXIT_OK,
                json!({"schema_version": SCHEMA_VERSION, "operator": operator_json(&p),
                       "singular_points": pts.iter().map(point_json).collect::<Vec<_>>()}),
            ))
        }
        WeylCmd::Indicial { op, point } => {
            let p = parse_operator(op)?;
            let pt = parse_point(point)?;
            let ind = indicial_data(&p, &pt, tol)?;
            Ok((
                EXIT_OK,
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "point": point_json(&pt),
                    "regular": ind.regular,
                    "indicial_polynomial": ind.polynomial.iter().map(complex_json).collect::<Vec<_>>(),
                    "exponents": ind.exponents.iter().map(complex_json).collect::<Vec<_>>(),
                }),
            ))
        }
        WeylCmd::LatticeSearch => {
            let inp = json::lattice_search_input(&input_value(g)?)?;
            let n = g.truncation_order.unwrap_or(8);
            let found =
                invariant_lattice_search(&inp.connection, &inp.candidate, &inp.subranks, n)?;
            let mut v = json::witnesses_json(&found);
            v["truncation_order"] = json!(n);
            Ok((EXIT_OK, v))
        }
    }
}

fn spectral(cmd: &SpectralCmd, g: &GlobalOpts) -> Result<(i32, Value)> {
    let n = g.truncation_order.unwrap_or(16);
    match cmd {
        SpectralCmd::Branches { center } => {
            let field = json::higgs_field_from_json(&input_value(g)?, n)?;
            let poly = char_poly(&field)?;
            let center = parse_complex_text(center)?;
            let branches = puiseux_branches(&poly, &center, g.depth)?;
            Ok((
                EXIT_OK,
                json!({"schema_version": SCHEMA_VERSION, "depth": g.depth,
                       "branches": branches.iter().map(json::branch_json).collect::<Vec<_>>()}),
            ))
        }
        SpectralCmd::Invert => {
            let field = json::higgs_field_from_json(&input_value(g)?, n)?;
            let poly = char_poly(&field)?;
            let branches = puiseux_branches(&poly, &ComplexScalar::zero(), g.depth)?;
            let pairs = inverse_branches(&branches, g.depth)?;
            let count: u32 = pairs.iter().map(|(_, inv)| inv.ramification).sum();
            let out: Vec<Value> = pairs
                .iter()
                .map(|(b, inv)| {
                    json!({"forward": json::branch_json(b), "inverse": json::branch_json(inv),
                           "defect": inversion_defect(b, inv, 1e-2)})
                })
                .collect();
            Ok((
                EXIT_OK,
                json!({"schema_version": SCHEMA_VERSION, "inverse_branch_count": count, "inversions": out}),
            ))
        }
        SpectralCmd::Count { zeta } => {
            let d = input_data(g)?;
            let z = parse_complex_text(zeta)?;
            let count = branch_count_at(&d, &z, g.tolerance)?;
            let r_hat = crate::stationary_phase::transformed_rank(&d, g.tolerance)?;
            Ok((
                verdict(count == r_hat),
                json!({"schema_version": SCHEMA_VERSION, "zeta": complex_json(&z), "branch_count": count,
                       "transformed_rank": r_hat, "agree": count == r_hat}),
            ))
        }
    }
}

/// Rank-one comparison between the operator-level transform and the predicted transform.
pub fn rank_one_oracle(d: &ConnectionData, opts: &TransformOptions) -> Result<Value> {
    if d.rank != 1 || d.log_points.len() != 1 || d.infinity.groups.len() != 1 {
        return Err(Error::Inconsistent(
            "oracle needs a rank-one datum with one point and one group".into(),
        ));
    }
    let exact = |c: &ComplexScalar, what: &str| {
        c.as_exact()
            .cloned()
            .ok_or_else(|| Error::Inconsistent(format!("{what} must be exact")))
    };
    let z1 = exact(&d.log_points[0].position, "position")?;
    let mu = exact(
        &d.log_points[0].pieces[0].blocks[0].eigenvalue,
        "eigenvalue",
    )?;
    let a = exact(&d.infinity.groups[0].leading, "leading")?;
    let op = rank_one_model(&z1, &mu, &a);
    let fl = op.fourier_laplace();
    let pts = singular_points(&fl, opts.tolerance)?;
    let t = full_transform(d, opts)?;
    let predicted_point = t.datum.log_points.first().map(|p| p.position.clone());
    let predicted_exponent = t
        .datum
        .log_points
        .first()
        .and_then(|p| p.pieces.first())
        .map(|p| p.blocks[0].eigenvalue.clone());
    let finite: Vec<&ComplexScalar> = pts
        .iter()
        .filter_map(|p| match p {
            SingularPoint::Finite(c) => Some(c),
            SingularPoint::Infinity => None,
        })
        .collect();
    let loci_match = finite.len() == 1 && predicted_point.as_ref() == Some(finite[0]);
    let exponent = if let Some(p) = finite.first() {
        indicial_data(&fl, &SingularPoint::Finite((*p).clone()), opts.tolerance)?
            .exponents
            .first()
            .cloned()
    } else {
        None
    };
    let shift = match (&predicted_exponent, &exponent) {
        (Some(p), Some(e)) => Some(p - e),
        _ => None,
    };
    let integral = shift.as_ref().is_some_and(|s| s.is_integer(opts.tolerance));
    Ok(json!({
        "operator": operator_json(&op),
        "transform": operator_json(&fl),
        "singular_points": pts.iter().map(point_json).collect::<Vec<_>>(),
        "predicted_point": predicted_point.as_ref().map(complex_json),
        "loci_match": loci_match,
        "exponent": exponent.as_ref().map(complex_json),
        "predicted_exponent": predicted_exponent.as_ref().map(complex_json),
        "shift": shift.as_ref().map(complex_json),
        "shift_integral": integral,
        "pass": loci_match && integral,
    }))
}

fn verify(cmd: &VerifyCmd, g: &GlobalOpts) -> Result<(i32, Value)> {
    let d = input_data(g)?;
    let tol = g.tolerance;
    match cmd {
        VerifyCmd::Involution => {
            let defects = involution_defect(&d, &options(g))?;
            Ok((verdict(defects.is_empty()), json::defects_json(&defects)))
        }
        VerifyCmd::Pardeg => {
            let r = pardeg_report(&d, tol)?;
            let pass =
                r.input != Q::from_integer(0.into()) || r.transformed == Q::from_integer(0.into());
            let mut v = json::pardeg_json(&r);
            v["pass"] = json!(pass);
            Ok((verdict(pass), v))
        }
        VerifyCmd::Grr => {
            let r = grr_report(&d, tol)?;
            Ok((verdict(r.passes()), json::grr_json(&r)))
        }
        VerifyCmd::Oracle => {
            let mut v = rank_one_oracle(&d, &options(g))?;
            let pass = v["pass"].as_bool().unwrap_or(false);
            v["schema_version"] = json!(SCHEMA_VERSION);
            Ok((verdict(pass), v))
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let (code, report) = run(&cli);
    let text = report_render(&report);
    match &cli.global.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    code
}
