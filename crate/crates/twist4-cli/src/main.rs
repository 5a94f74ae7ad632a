//! Command-line surface for the twist4 library.
//!
//! Every subcommand emits a single report document, as JSON (default) or as
//! an indented table (`--format table`). Reports embed the convention flags
//! (epsilon degree, normal-order side, kernel normalization), the truncation
//! caps, and the seed in use, so output is interpretable standalone and
//! reproducible: the same configuration and seed produce byte-identical
//! JSON.
//!
//! Exit codes: `0` success, `1` validation error (unknown names list the
//! catalogue, bad coordinates, malformed input), `2` internal check failure
//! (a differential failing to square to zero, a consistency suite reporting
//! a mismatch, quadrature that cannot reach its tolerance).
//!
//! The manifold catalogue is embedded in the binary; setting the
//! environment variable `TWIST4_MANIFOLDS` to a JSON file path replaces it.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use twist4::anomaly::{
    anomaly_vanishing_report, classify_graph, tadpole_weight, InteractionGraph,
};
use twist4::ce::{build_ce, ce_cohomology, CoeffSpec};
use twist4::conventions::{Conventions, DEFAULT_EPSILON_DEGREE};
use twist4::dglie::{
    cdga_preset, cdga_preset_names, preset, preset_names, vacuum_twisted_algebra, CdgAlgebra,
    DgLieAlgebra, DgLieError, TwistPoint,
};
use twist4::facthom::{
    classical_observable_dims, compactification_algebra, det_line_degree, det_line_for_vacuum,
    manifold_catalogue, manifold_catalogue_from_json, FactHomError, ManifoldData,
};
use twist4::heat::{
    antiholomorphic_coordinate, by_parts_vanishing, cauchy_reference, constant_one,
    gauge_condition_check, gaussian, moment_gaussian, propagator_eval, shifted_gaussian,
    HeatError, PlanarGrid, QuadratureSpec, TestFunction, BY_PARTS_TOL, NEGATIVE_CONTROL_TOL,
};
use twist4::spectral::{blocks_match_gr, pages, random_filtered_complex, SpectralError};
use twist4::vacua::{
    breaking_decomposition, broken_theory_check, coarse_moduli_map, vacuum_catalogue, VacuaError,
    VacuumPoint,
};
use twist4::weyl::dot_check;
use twist4::{Complex64, Rational};

/// Environment variable holding a replacement manifold-catalogue JSON path.
const MANIFOLD_ENV: &str = "TWIST4_MANIFOLDS";

#[derive(Parser)]
#[command(
    name = "twist4",
    version,
    about = "Exact homological algebra for a three-parameter twist family: axiom suites, cohomology, anomaly weights, vacua, determinant lines, compactification skeletons, spectral sequences, and the numeric propagator."
)]
struct Cli {
    /// Output format for the report document.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Run the structure axiom suite over presets and derived constructions.
    CheckAxioms(CheckAxiomsArgs),
    /// Lie algebra cohomology table of a preset, with optional coefficients.
    Cohomology(CohomologyArgs),
    /// One-loop wheel-weight vanishing report for a square-zero extension.
    Anomaly(AnomalyArgs),
    /// Vacuum moduli: catalogue, breaking decomposition, broken-theory comparison.
    Vacua(VacuaArgs),
    /// Determinant-line degree of a four-manifold against a gauge algebra.
    FactHom(FactHomArgs),
    /// Three-manifold compactification skeleton with its block consistency check.
    Compactify(CompactifyArgs),
    /// Evaluate the regulated propagator; optionally check gauge and by-parts identities.
    Propagator(PropagatorArgs),
    /// Spectral-sequence engine self-test on seeded random filtered complexes.
    Spectral(SpectralArgs),
    /// List the shipped algebra, cdga-model, and manifold catalogues.
    Catalogue,
}

#[derive(Args)]
struct CheckAxiomsArgs {
    /// Algebra preset to check; omit to run every shipped preset.
    #[arg(long)]
    algebra: Option<String>,
    /// Also check the twisted family over a deterministic grid of
    /// (vacuum, t1, t2, u) points with x = 0 or u = 0.
    #[arg(long)]
    twist_grid: bool,
    /// Cdga model used for the twisted-family grid.
    #[arg(long, default_value = "formal2")]
    cdga: String,
    /// Degree of the adjoined odd variable in square-zero extensions.
    #[arg(long, default_value_t = DEFAULT_EPSILON_DEGREE)]
    epsilon_degree: i8,
}

#[derive(Args)]
struct CohomologyArgs {
    /// Algebra preset.
    #[arg(long)]
    algebra: String,
    /// Coefficient module for the cochain complex.
    #[arg(long, value_enum, default_value_t = CoefficientChoice::Trivial)]
    coefficients: CoefficientChoice,
    /// Degree shift of the coadjoint coefficient module.
    #[arg(long, default_value_t = 0)]
    shift: i64,
    /// Maximum total cochain weight; defaults to the algebra dimension
    /// (plus one for coadjoint coefficients), which is exhaustive.
    #[arg(long)]
    max_weight: Option<usize>,
    /// Degree window "lo,hi"; defaults to a window covering everything.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CoefficientChoice {
    Trivial,
    Coadjoint,
}

#[derive(Args)]
struct AnomalyArgs {
    /// Base algebra preset; the report extends it by the odd square-zero variable.
    #[arg(long)]
    algebra: String,
    /// Degree of the adjoined variable (+1 or -1).
    #[arg(long, default_value_t = 1)]
    delta_degree: i64,
    /// Largest wheel valence to evaluate.
    #[arg(long, default_value_t = 5)]
    vmax: usize,
    /// Number of seeded random even elements to sample.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also list the per-basis tadpole weights of the base algebra.
    #[arg(long)]
    tadpole: bool,
    /// Classify an interaction graph read from a JSON file.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

#[derive(Args)]
struct VacuaArgs {
    /// Algebra preset.
    #[arg(long)]
    algebra: String,
    /// Rational coordinates "c1,c2,..." of a vacuum; omit to list the
    /// shipped vacuum catalogue with coarse moduli invariants.
    #[arg(long, allow_hyphen_values = true)]
    vacuum: Option<String>,
    /// Twist point "t1,t2,u" for the broken-theory comparison.
    #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
    twist: String,
    /// Cdga model tensored into the broken-theory comparison.
    #[arg(long, default_value = "point")]
    cdga: String,
    /// Degree of the adjoined odd variable.
    #[arg(long, default_value_t = DEFAULT_EPSILON_DEGREE)]
    epsilon_degree: i8,
}

#[derive(Args)]
struct FactHomArgs {
    /// Manifold name from the catalogue.
    #[arg(long)]
    manifold: String,
    /// Algebra preset.
    #[arg(long)]
    algebra: String,
    /// Vacuum coordinates: compute the line for the broken gauge algebra
    /// at this point instead of the full algebra.
    #[arg(long, allow_hyphen_values = true)]
    vacuum: Option<String>,
    /// Also tabulate classical observable dimensions up to this weight.
    #[arg(long)]
    observables: Option<usize>,
}

#[derive(Args)]
struct CompactifyArgs {
    /// Three-manifold name from the catalogue.
    #[arg(long)]
    manifold: String,
    /// Algebra preset.
    #[arg(long)]
    algebra: String,
    /// Total weight cap of the block table.
    #[arg(long, default_value_t = 3)]
    cap: usize,
}

#[derive(Args)]
struct PropagatorArgs {
    /// First point: one "re,im" pair per complex coordinate.
    #[arg(long = "z", required = true, allow_hyphen_values = true)]
    z: Vec<String>,
    /// Second point: one "re,im" pair per complex coordinate.
    #[arg(long = "w", required = true, allow_hyphen_values = true)]
    w: Vec<String>,
    /// Expected dimension; checked against the coordinate count when given.
    #[arg(long)]
    dim: Option<usize>,
    /// Proper-time cutoff of the regulated propagator.
    #[arg(long, default_value_t = 100.0)]
    lambda: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Points per Gauss-Legendre panel (2, 4, 8, or 16).
    #[arg(long, default_value_t = 8)]
    gauss_points: usize,
    /// Maximum number of panel doublings.
    #[arg(long, default_value_t = 30)]
    max_refinements: usize,
    /// Also run the gauge-condition check (symbolic plus finite differences).
    #[arg(long)]
    gauge: bool,
    /// Sample points for the finite-difference gauge check.
    #[arg(long, default_value_t = 6)]
    gauge_points: usize,
    /// Also run the integration-by-parts catalogue on the standard grid.
    #[arg(long)]
    by_parts: bool,
    #[arg(long, default_value_t = 17)]
    seed: u64,
}

#[derive(Args)]
struct SpectralArgs {
    /// Number of random filtered complexes to generate and check.
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Maximum number of cohomological degree slots per complex.
    #[arg(long, default_value_t = 6)]
    max_degree_slots: usize,
    /// Maximum dimension per degree slot.
    #[arg(long, default_value_t = 4)]
    max_dim_per_degree: usize,
    /// Maximum filtration level.
    #[arg(long, default_value_t = 3)]
    max_level: i64,
    /// Number of pages to compute explicitly.
    #[arg(long, default_value_t = 6)]
    pages: i64,
}

/// Error split by the exit code it maps to.
enum CliError {
    /// Bad input: exit 1.
    Validation(String),
    /// A library-internal consistency check failed: exit 2.
    Internal(String),
}

impl From<DgLieError> for CliError {
    fn from(e: DgLieError) -> CliError {
        match e {
            DgLieError::DifferentialSquareNonzero { .. } | DgLieError::ClosureFailure { .. } => {
                CliError::Internal(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<twist4::ce::CeError> for CliError {
    fn from(e: twist4::ce::CeError) -> CliError {
        use twist4::ce::CeError;
        match e {
            CeError::SquareNonzero { .. } | CeError::TruncatedTotalComplex { .. } => {
                CliError::Internal(e.to_string())
            }
            CeError::DgLie(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<VacuaError> for CliError {
    fn from(e: VacuaError) -> CliError {
        match e {
            VacuaError::CentralizerNotClosed { .. } => CliError::Internal(e.to_string()),
            VacuaError::DgLie(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<twist4::anomaly::AnomalyError> for CliError {
    fn from(e: twist4::anomaly::AnomalyError) -> CliError {
        use twist4::anomaly::AnomalyError;
        match e {
            AnomalyError::DgLie(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<twist4::weyl::WeylError> for CliError {
    fn from(e: twist4::weyl::WeylError) -> CliError {
        use twist4::weyl::WeylError;
        match e {
            WeylError::CountMismatch { .. }
            | WeylError::ActionMismatch { .. }
            | WeylError::NotAssociative { .. } => CliError::Internal(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FactHomError> for CliError {
    fn from(e: FactHomError) -> CliError {
        match e {
            FactHomError::DgLie(inner) => inner.into(),
            FactHomError::Ce(inner) => inner.into(),
            FactHomError::Vacua(inner) => inner.into(),
            FactHomError::Weyl(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> CliError {
        match e {
            SpectralError::InternalCheck { .. } => CliError::Internal(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<HeatError> for CliError {
    fn from(e: HeatError) -> CliError {
        match e {
            HeatError::NotConverged { .. } => CliError::Internal(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// A finished run: the rendered document plus whether every check the
/// command performed passed (failures exit 2 after printing).
struct Outcome {
    rendered: String,
    checks_passed: bool,
}

/// Report envelope shared by all subcommands.
#[derive(Serialize)]
struct Envelope {
    command: String,
    conventions: Conventions,
    caps: BTreeMap<String, Value>,
    seed: Option<u64>,
    report: Value,
}

fn finish(
    format: Format,
    command: &str,
    conventions: Conventions,
    caps: BTreeMap<String, Value>,
    seed: Option<u64>,
    report: Value,
    checks_passed: bool,
) -> Result<Outcome, CliError> {
    let envelope = Envelope {
        command: command.to_string(),
        conventions,
        caps,
        seed,
        report,
    };
    let value = serde_json::to_value(&envelope)
        .map_err(|e| CliError::Internal(format!("report serialization failed: {e}")))?;
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&value)
            .map_err(|e| CliError::Internal(format!("report serialization failed: {e}")))?,
        Format::Table => render_table(&value),
    };
    Ok(Outcome {
        rendered,
        checks_passed,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

fn parse_rational(text: &str) -> Result<Rational, CliError> {
    text.trim()
        .parse::<Rational>()
        .map_err(|e| CliError::Validation(format!("cannot parse {text:?} as a rational: {e}")))
}

fn parse_rational_list(text: &str) -> Result<Vec<Rational>, CliError> {
    text.split(',').map(parse_rational).collect()
}

fn parse_twist(text: &str) -> Result<TwistPoint, CliError> {
    let parts = parse_rational_list(text)?;
    if parts.len() != 3 {
        return Err(CliError::Validation(format!(
            "twist point needs exactly three components t1,t2,u; got {}",
            parts.len()
        )));
    }
    let mut it = parts.into_iter();
    Ok(TwistPoint::new(
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ))
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "complex coordinate must be \"re,im\"; got {text:?}"
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("bad real part {:?}: {e}", parts[0])))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("bad imaginary part {:?}: {e}", parts[1])))?;
    Ok(Complex64::new(re, im))
}

fn parse_window(text: &str) -> Result<(i64, i64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "degree window must be \"lo,hi\"; got {text:?}"
        )));
    }
    let lo: i64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("bad window bound {:?}: {e}", parts[0])))?;
    let hi: i64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("bad window bound {:?}: {e}", parts[1])))?;
    Ok((lo, hi))
}

fn resolve_algebra(name: &str) -> Result<DgLieAlgebra, CliError> {
    Ok(preset(name)?)
}

fn resolve_cdga(name: &str) -> Result<CdgAlgebra, CliError> {
    Ok(cdga_preset(name)?)
}

/// Load the manifold catalogue, honoring the environment override, and
/// report where it came from.
fn load_manifolds() -> Result<(Vec<ManifoldData>, String), CliError> {
    match std::env::var(MANIFOLD_ENV) {
        Ok(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Validation(format!("cannot read manifold catalogue {path}: {e}"))
            })?;
            Ok((manifold_catalogue_from_json(&text)?, path))
        }
        Err(_) => Ok((manifold_catalogue()?, "builtin".to_string())),
    }
}

fn find_manifold(name: &str) -> Result<(ManifoldData, String), CliError> {
    let (catalogue, source) = load_manifolds()?;
    match catalogue.iter().find(|m| m.name == name) {
        Some(m) => Ok((m.clone(), source)),
        None => Err(CliError::Validation(format!(
            "unknown manifold {name:?}; available: {}",
            catalogue
                .iter()
                .map(|m| m.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------------

/// Render a JSON document as indented key/value text, with arrays of flat
/// objects drawn as aligned column tables.
fn render_table(v: &Value) -> String {
    let mut out = String::new();
    render_value(v, 0, &mut out);
    out.pop();
    out
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render_value(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                if let Some(text) = scalar_text(val) {
                    out.push_str(&format!("{pad}{k}: {text}\n"));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_value(val, indent + 2, out);
                }
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{pad}(empty)\n"));
            } else if let Some(rows) = flat_rows(items) {
                render_columns(&rows, indent, out);
            } else if items.iter().all(|i| scalar_text(i).is_some()) {
                let joined: Vec<String> =
                    items.iter().map(|i| scalar_text(i).unwrap()).collect();
                out.push_str(&format!("{pad}[{}]\n", joined.join(", ")));
            } else {
                for item in items {
                    out.push_str(&format!("{pad}-\n"));
                    render_value(item, indent + 2, out);
                }
            }
        }
        other => {
            if let Some(text) = scalar_text(other) {
                out.push_str(&format!("{pad}{text}\n"));
            }
        }
    }
}

/// Rows of scalar-only objects sharing their key sets, for column layout.
fn flat_rows(items: &[Value]) -> Option<Vec<BTreeMap<String, String>>> {
    let mut rows = Vec::new();
    for item in items {
        let Value::Object(map) = item else {
            return None;
        };
        let mut row = BTreeMap::new();
        for (k, val) in map {
            row.insert(k.clone(), scalar_text(val)?);
        }
        rows.push(row);
    }
    Some(rows)
}

fn render_columns(rows: &[BTreeMap<String, String>], indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    let mut keys: Vec<String> = Vec::new();
    for row in rows {
        for k in row.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let mut widths: Vec<usize> = keys.iter().map(String::len).collect();
    for row in rows {
        for (i, k) in keys.iter().enumerate() {
            if let Some(text) = row.get(k) {
                widths[i] = widths[i].max(text.len());
            }
        }
    }
    let header: Vec<String> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| format!("{:width$}", k, width = widths[i]))
        .collect();
    out.push_str(&format!("{pad}{}\n", header.join("  ")));
    for row in rows {
        let cells: Vec<String> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| {
                format!(
                    "{:width$}",
                    row.get(k).map(String::as_str).unwrap_or("-"),
                    width = widths[i]
                )
            })
            .collect();
        out.push_str(&format!("{pad}{}\n", cells.join("  ").trim_end()));
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn complex_parts(c: Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

fn axiom_rows(report: &twist4::dglie::AxiomReport) -> Value {
    let rows: Vec<Value> = report
        .rows()
        .into_iter()
        .map(|(name, pass, detail)| {
            if detail.is_empty() {
                json!({ "check": name, "pass": pass })
            } else {
                json!({ "check": name, "pass": pass, "detail": detail })
            }
        })
        .collect();
    json!(rows)
}

fn run_check_axioms(format: Format, args: &CheckAxiomsArgs) -> Result<Outcome, CliError> {
    let names = match &args.algebra {
        Some(one) => vec![one.clone()],
        None => preset_names(),
    };
    let mut targets: Vec<Value> = Vec::new();
    let mut all_pass = true;
    let mut push_target = |name: String, report: twist4::dglie::AxiomReport| {
        let passed = report.passed();
        targets.push(json!({
            "target": name,
            "passed": passed,
            "checks": axiom_rows(&report),
        }));
        passed
    };
    for name in &names {
        let g = resolve_algebra(name)?;
        all_pass &= push_target(g.name().to_string(), g.check_axioms());
        let extended = g.epsilon_extend(args.epsilon_degree)?;
        all_pass &= push_target(extended.name().to_string(), extended.check_axioms());
        let hodge = g.hodge_family(&Rational::from_integer(1.into()))?;
        all_pass &= push_target(hodge.name().to_string(), hodge.check_axioms());
    }
    if args.twist_grid {
        let cdga = resolve_cdga(&args.cdga)?;
        // The grid needs a vacuum catalogue, which requires a defining
        // representation; default to sl2 when no algebra was named.
        let grid_algebra = resolve_algebra(args.algebra.as_deref().unwrap_or("sl2"))?;
        let zero = vec![Rational::from_integer(0.into()); grid_algebra.dim()];
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        // Origin vacuum at eight twists, including nonzero odd direction.
        let origin_twists = [
            (0, 1, 0, 1, 0, 1),
            (1, 1, 0, 1, 0, 1),
            (0, 1, 1, 1, 0, 1),
            (1, 1, 1, 1, 0, 1),
            (0, 1, 0, 1, 1, 1),
            (1, 1, 1, 1, 1, 1),
            (2, 1, -1, 1, 3, 1),
            (1, 2, 1, 3, 0, 1),
        ];
        for (a, b, c, d, e, f) in origin_twists {
            let point = TwistPoint::new(r(a, b), r(c, d), r(e, f));
            let v = vacuum_twisted_algebra(
                &cdga,
                &grid_algebra,
                &zero,
                &point,
                args.epsilon_degree,
            )?;
            all_pass &= push_target(v.name().to_string(), v.check_axioms());
        }
        // Catalogue vacua at twists with u = 0.
        let vacua = vacuum_catalogue(&grid_algebra)?;
        let even_twists = [(0, 0), (1, 1), (2, -1)];
        for p in vacua.iter().take(3) {
            for (t1, t2) in even_twists {
                let point = TwistPoint::new(r(t1, 1), r(t2, 1), r(0, 1));
                let v = vacuum_twisted_algebra(
                    &cdga,
                    &grid_algebra,
                    p.coords(),
                    &point,
                    args.epsilon_degree,
                )?;
                all_pass &= push_target(
                    format!("{} @ {}", v.name(), p.label()),
                    v.check_axioms(),
                );
            }
        }
    }
    let mut caps = BTreeMap::new();
    caps.insert("twist_grid".to_string(), json!(args.twist_grid));
    caps.insert("cdga".to_string(), json!(args.cdga));
    finish(
        format,
        "check-axioms",
        Conventions::with_epsilon_degree(args.epsilon_degree),
        caps,
        None,
        json!({ "targets": targets, "all_pass": all_pass }),
        all_pass,
    )
}

fn run_cohomology(format: Format, args: &CohomologyArgs) -> Result<Outcome, CliError> {
    let g = resolve_algebra(&args.algebra)?;
    let (coeffs, coeff_label, module_shift) = match args.coefficients {
        CoefficientChoice::Trivial => (CoeffSpec::Trivial, "trivial", 0),
        CoefficientChoice::Coadjoint => (
            CoeffSpec::Coadjoint { shift: args.shift },
            "coadjoint",
            args.shift,
        ),
    };
    let max_weight = args.max_weight.unwrap_or(
        g.dim() + usize::from(args.coefficients == CoefficientChoice::Coadjoint),
    );
    let window = match &args.window {
        Some(text) => parse_window(text)?,
        None => {
            // Generators of the cochain algebra sit in degrees 1 - |e|; a
            // coadjoint factor sits in -|e| + shift. Cover every product.
            let degs = g.space().degrees();
            let min_d = degs.iter().min().copied().unwrap_or(0);
            let max_d = degs.iter().max().copied().unwrap_or(0);
            let gen_lo = (1 - max_d).min(0).min(module_shift - max_d);
            let gen_hi = (1 - min_d).max(0).max(module_shift - min_d);
            (
                gen_lo * max_weight as i64,
                gen_hi * max_weight as i64,
            )
        }
    };
    let complex = build_ce(&g, &coeffs, max_weight, window)?;
    let rows = ce_cohomology(&complex)?;
    let mut by_degree: BTreeMap<i64, usize> = BTreeMap::new();
    for row in &rows {
        *by_degree.entry(row.degree).or_insert(0) += row.dim;
    }
    let row_values: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "degree": r.degree,
                "module_weight": r.module_weight,
                "dim": r.dim,
                "truncated": r.truncated,
            })
        })
        .collect();
    let cochain_blocks: Vec<Value> = complex
        .block_dims()
        .into_iter()
        .map(|(degree, weight, dim)| json!({ "degree": degree, "weight": weight, "dim": dim }))
        .collect();
    let mut caps = BTreeMap::new();
    caps.insert("max_weight".to_string(), json!(max_weight));
    caps.insert("degree_window".to_string(), json!([window.0, window.1]));
    finish(
        format,
        "cohomology",
        Conventions::default(),
        caps,
        None,
        json!({
            "algebra": g.name(),
            "coefficients": coeff_label,
            "cohomology": row_values,
            "dims_by_degree": by_degree,
            "cochain_blocks": cochain_blocks,
        }),
        true,
    )
}

fn run_anomaly(format: Format, args: &AnomalyArgs) -> Result<Outcome, CliError> {
    let g = resolve_algebra(&args.algebra)?;
    let report = anomaly_vanishing_report(
        &g,
        args.delta_degree,
        args.vmax,
        args.samples,
        args.seed,
    )?;
    let all_pass = report.all_pass;
    let mut doc = json!({ "anomaly": to_value(&report)? });
    if args.tadpole {
        let mut rows = Vec::new();
        for i in 0..g.dim() {
            if g.space().parity(i) != 0 {
                continue;
            }
            let mut x = vec![Rational::from_integer(0.into()); g.dim()];
            x[i] = Rational::from_integer(1.into());
            let weight = tadpole_weight(&g, &x)?;
            rows.push(json!({
                "basis_index": i,
                "weight": weight.to_string(),
            }));
        }
        doc["tadpole"] = json!(rows);
    }
    if let Some(path) = &args.graph_file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read graph file {}: {e}", path.display()))
        })?;
        let graph: InteractionGraph = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("malformed interaction graph: {e}")))?;
        let class = classify_graph(&graph)?;
        doc["graph"] = json!({
            "file": path.display().to_string(),
            "class": to_value(&class)?,
        });
    }
    let mut caps = BTreeMap::new();
    caps.insert("v_max".to_string(), json!(args.vmax));
    caps.insert("samples".to_string(), json!(args.samples));
    caps.insert("delta_degree".to_string(), json!(args.delta_degree));
    finish(
        format,
        "anomaly",
        Conventions::default(),
        caps,
        Some(args.seed),
        doc,
        all_pass,
    )
}

fn run_vacua(format: Format, args: &VacuaArgs) -> Result<Outcome, CliError> {
    let g = resolve_algebra(&args.algebra)?;
    let mut caps = BTreeMap::new();
    caps.insert("cdga".to_string(), json!(args.cdga));
    match &args.vacuum {
        None => {
            let mut rows = Vec::new();
            for p in vacuum_catalogue(&g)? {
                let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
                let moduli = coarse_moduli_map(&p)?;
                rows.push(json!({
                    "label": p.label(),
                    "coords": coords,
                    "moduli": to_value(&moduli)?,
                }));
            }
            finish(
                format,
                "vacua",
                Conventions::with_epsilon_degree(args.epsilon_degree),
                caps,
                None,
                json!({ "algebra": g.name(), "catalogue": rows }),
                true,
            )
        }
        Some(coord_text) => {
            let coords = parse_rational_list(coord_text)?;
            let point = VacuumPoint::new(g.clone(), coords, "cli")?;
            let twist = parse_twist(&args.twist)?;
            let cdga = resolve_cdga(&args.cdga)?;
            let (_centralizer_basis, _image_basis, breaking) = breaking_decomposition(&point)?;
            let moduli = coarse_moduli_map(&point)?;
            let comparison =
                broken_theory_check(&point, &cdga, &twist, args.epsilon_degree)?;
            let checks = breaking.passed() && comparison.dims_match.unwrap_or(true);
            finish(
                format,
                "vacua",
                Conventions::with_epsilon_degree(args.epsilon_degree),
                caps,
                None,
                json!({
                    "algebra": g.name(),
                    "breaking": to_value(&breaking)?,
                    "moduli": to_value(&moduli)?,
                    "broken_theory": to_value(&comparison)?,
                }),
                checks,
            )
        }
    }
}

fn run_fact_hom(format: Format, args: &FactHomArgs) -> Result<Outcome, CliError> {
    let (m, source) = find_manifold(&args.manifold)?;
    let g = resolve_algebra(&args.algebra)?;
    let line = match &args.vacuum {
        None => det_line_degree(&m, &g)?,
        Some(coord_text) => {
            let coords = parse_rational_list(coord_text)?;
            let point = VacuumPoint::new(g.clone(), coords, "cli")?;
            det_line_for_vacuum(&m, &point)?
        }
    };
    let checks = line.implementations_agree && line.parity_matches_chi;
    let mut doc = json!({
        "manifold_source": source,
        "det_line": to_value(&line)?,
    });
    let mut caps = BTreeMap::new();
    if let Some(weight) = args.observables {
        let degs = g.space().degrees();
        let min_d = degs.iter().min().copied().unwrap_or(0);
        let max_d = degs.iter().max().copied().unwrap_or(0);
        // Generator degrees are k + |e| - 1 and k - |e| - 2 over cohomology
        // degrees k of the manifold; cover all products up to the cap.
        let gen_lo = (min_d - 1).min(-(max_d) - 2).min(0);
        let gen_hi = ((m.dim as i64) + max_d - 1).max((m.dim as i64) - min_d - 2).max(0);
        let window = (gen_lo * weight as i64, gen_hi * weight as i64);
        let observables = classical_observable_dims(&m, &g, weight, window)?;
        doc["observables"] = to_value(&observables)?;
        caps.insert("observable_weight".to_string(), json!(weight));
    }
    finish(
        format,
        "fact-hom",
        Conventions::default(),
        caps,
        None,
        doc,
        checks,
    )
}

fn run_compactify(format: Format, args: &CompactifyArgs) -> Result<Outcome, CliError> {
    let (m, source) = find_manifold(&args.manifold)?;
    let g = resolve_algebra(&args.algebra)?;
    let dot = compactification_algebra(&m, &g, args.cap)?;
    let check = dot_check(&dot);
    let all_pass = check.all_pass;
    let mut caps = BTreeMap::new();
    caps.insert("cap".to_string(), json!(args.cap));
    finish(
        format,
        "compactify",
        Conventions::default(),
        caps,
        None,
        json!({
            "manifold_source": source,
            "name": dot.name(),
            "source": to_value(&dot.source())?,
            "blocks": to_value(&dot.blocks())?,
            "first_page": to_value(&dot.first_page())?,
            "check": to_value(&check)?,
        }),
        all_pass,
    )
}

fn run_propagator(format: Format, args: &PropagatorArgs) -> Result<Outcome, CliError> {
    let z: Vec<Complex64> = args
        .z
        .iter()
        .map(|t| parse_complex(t))
        .collect::<Result<_, _>>()?;
    let w: Vec<Complex64> = args
        .w
        .iter()
        .map(|t| parse_complex(t))
        .collect::<Result<_, _>>()?;
    if let Some(d) = args.dim {
        if d != z.len() {
            return Err(CliError::Validation(format!(
                "--dim {d} disagrees with the {} coordinates given",
                z.len()
            )));
        }
    }
    let spec = QuadratureSpec {
        lambda: args.lambda,
        abs_tol: args.tol,
        gauss_points: args.gauss_points,
        max_refinements: args.max_refinements,
    };
    spec.validate()?;
    let value = propagator_eval(&z, &w, &spec)?;
    let mut components = Vec::new();
    for j in 0..value.dim {
        let c = value.component(j);
        let word: Vec<usize> = (0..value.dim).filter(|&i| i != j).collect();
        components.push(json!({
            "omitted_direction": j,
            "word": word,
            "value": complex_parts(c),
            "magnitude": c.norm(),
        }));
    }
    let mut doc = json!({
        "dim": value.dim,
        "r_squared": value.r_squared,
        "components": components,
        "quadrature": to_value(&value.quadrature)?,
    });
    let mut checks = true;
    if value.dim == 1 {
        let reference = cauchy_reference(z[0], w[0], spec.lambda);
        let difference = (value.component(0) - reference).norm();
        doc["cauchy_reference"] = json!({
            "value": complex_parts(reference),
            "difference": difference,
        });
    }
    if args.gauge {
        let report = gauge_condition_check(z.len(), &spec, args.seed, args.gauge_points)?;
        checks &= report.pass;
        doc["gauge"] = to_value(&report)?;
    }
    if args.by_parts {
        let grid = PlanarGrid::standard();
        let mut rows = Vec::new();
        let vanishing: [(TestFunction, TestFunction); 2] = [
            (gaussian(), gaussian()),
            (moment_gaussian(), shifted_gaussian(Complex64::new(1.0, 0.0))),
        ];
        for (f, g) in &vanishing {
            let r = by_parts_vanishing(f, g, &grid)?;
            let pass = r.magnitude < BY_PARTS_TOL;
            checks &= pass;
            rows.push(json!({
                "f": f.name,
                "g": g.name,
                "first": complex_parts(r.first),
                "second": complex_parts(r.second),
                "sum_magnitude": r.magnitude,
                "tolerance": BY_PARTS_TOL,
                "pass": pass,
            }));
        }
        let (f, g) = (constant_one(), antiholomorphic_coordinate());
        let r = by_parts_vanishing(&f, &g, &grid)?;
        let area = 4.0 * grid.half_width * grid.half_width;
        let deviation = (r.sum - Complex64::new(area, 0.0)).norm();
        let pass = deviation < NEGATIVE_CONTROL_TOL;
        checks &= pass;
        rows.push(json!({
            "f": f.name,
            "g": g.name,
            "first": complex_parts(r.first),
            "second": complex_parts(r.second),
            "boundary_term": area,
            "deviation": deviation,
            "tolerance": NEGATIVE_CONTROL_TOL,
            "pass": pass,
        }));
        doc["by_parts"] = json!(rows);
    }
    let mut caps = BTreeMap::new();
    caps.insert("lambda".to_string(), json!(args.lambda));
    caps.insert("abs_tol".to_string(), json!(args.tol));
    caps.insert("gauss_points".to_string(), json!(args.gauss_points));
    caps.insert("max_refinements".to_string(), json!(args.max_refinements));
    let seed = args.gauge.then_some(args.seed);
    finish(
        format,
        "propagator",
        Conventions::default(),
        caps,
        seed,
        doc,
        checks,
    )
}

fn run_spectral(format: Format, args: &SpectralArgs) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    let mut all_pass = true;
    for index in 0..args.count {
        let complex = random_filtered_complex(
            &mut rng,
            args.max_degree_slots,
            args.max_dim_per_degree,
            args.max_level,
        );
        let result = pages(&complex, args.pages)?;
        let matches = blocks_match_gr(&result.stabilized, &complex)?;
        all_pass &= matches;
        let total_dim: usize = result
            .pages
            .first()
            .map(|p| p.blocks.values().map(|b| b.dim).sum())
            .unwrap_or(0);
        let stabilized_total: usize = result.stabilized.values().sum();
        rows.push(json!({
            "index": index,
            "total_dim": total_dim,
            "stabilized_total": stabilized_total,
            "stabilized_matches_gr_cohomology": matches,
        }));
    }
    let mut caps = BTreeMap::new();
    caps.insert("count".to_string(), json!(args.count));
    caps.insert("max_degree_slots".to_string(), json!(args.max_degree_slots));
    caps.insert(
        "max_dim_per_degree".to_string(),
        json!(args.max_dim_per_degree),
    );
    caps.insert("max_level".to_string(), json!(args.max_level));
    caps.insert("pages".to_string(), json!(args.pages));
    finish(
        format,
        "spectral",
        Conventions::default(),
        caps,
        Some(args.seed),
        json!({ "complexes": rows, "all_pass": all_pass }),
        all_pass,
    )
}

fn run_catalogue(format: Format) -> Result<Outcome, CliError> {
    let (manifolds, source) = load_manifolds()?;
    let manifold_rows: Vec<Value> = manifolds
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "dim": m.dim,
                "flavor": to_value(&m.flavor).unwrap_or(Value::Null),
                "chi": m.chi,
                "closed": m.closed,
                "oriented": m.oriented,
            })
        })
        .collect();
    finish(
        format,
        "catalogue",
        Conventions::default(),
        BTreeMap::new(),
        None,
        json!({
            "algebras": preset_names(),
            "cdga_models": cdga_preset_names(),
            "manifolds": manifold_rows,
            "manifold_source": source,
            "manifold_override_variable": MANIFOLD_ENV,
        }),
        true,
    )
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::CheckAxioms(args) => run_check_axioms(cli.format, args),
        Command::Cohomology(args) => run_cohomology(cli.format, args),
        Command::Anomaly(args) => run_anomaly(cli.format, args),
        Command::Vacua(args) => run_vacua(cli.format, args),
        Command::FactHom(args) => run_fact_hom(cli.format, args),
        Command::Compactify(args) => run_compactify(cli.format, args),
        Command::Propagator(args) => run_propagator(cli.format, args),
        Command::Spectral(args) => run_spectral(cli.format, args),
        Command::Catalogue => run_catalogue(cli.format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful output, not errors;
            // actual usage errors are validation failures.
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(io::stdout(), "{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            // A downstream reader closing the pipe early (e.g. `| head`)
            // must end the process quietly, not panic mid-print.
            let mut stdout = io::stdout();
            if let Err(e) = writeln!(stdout, "{}", outcome.rendered) {
                return if e.kind() == io::ErrorKind::BrokenPipe {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("error: cannot write report: {e}");
                    ExitCode::from(1)
                };
            }
            if outcome.checks_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal check failure: {message}");
            ExitCode::from(2)
        }
    }
}
