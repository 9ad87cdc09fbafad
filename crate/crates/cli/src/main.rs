//! Command-line front end for the real-calculus library: reads JSON files,
//! runs classification, isomorphism, connection and projection machinery,
//! and emits one JSON report per invocation on stdout.
//!
//! Exit codes: 0 pass, 1 fail or unknown, 2 I/O or parse problem, 3 input
//! outside the scope of the requested operation.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use realcalc::{
    anti_selfsimilar, canonical_diag_1d, check_isomorphism_witness, christoffel_free,
    count_classes, enumerate_classes, is_isomorphic_1d, is_orthogonal_projection, koszul_rhs,
    lc_abelian, lc_connection_1d, metric_symmetry_condition, project_connection, restrict_metric,
    search_witness, validate_calculus, validate_free_calculus, verify_pseudo_riemannian,
    zero_pattern, CVector, CalcError, CalculusInstance, ComplexMatrix, ConnectionSpec,
    FreeCalculusInstance, IsoWitness, MetricSpec, ProjectionSpec, PsrReport, Tolerance,
    VerifyTarget, C64,
};

#[derive(Parser)]
#[command(
    name = "realcalc",
    version,
    about = "Computations with real calculi over the matrix algebra Mat(N)"
)]
struct Cli {
    /// Absolute epsilon for all numerical comparisons (scaled by data size).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for randomized verification sampling and witness search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    json_only: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file: shapes, brackets, lift properties, generation.
    Validate {
        instance: PathBuf,
        /// Read the file as a free calculus (basis images instead of phi).
        #[arg(long)]
        free: bool,
    },
    /// Canonicalize a one-generator instance and report its class data.
    Classify { instance: PathBuf },
    /// Count isomorphism classes for k eigenvalue blocks.
    Count {
        #[arg(long)]
        k: usize,
        /// Count classes of anti-selfsimilar generators.
        #[arg(long)]
        anti: bool,
    },
    /// List one zero-pattern representative per isomorphism class.
    Enumerate {
        #[arg(long)]
        k: usize,
        /// Enumerate classes of anti-selfsimilar generators.
        #[arg(long)]
        anti: bool,
    },
    /// Decide isomorphism (exact for one generator), verify a witness, or search.
    Iso {
        a: PathBuf,
        b: PathBuf,
        /// Verify this witness file instead of deciding or searching.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Candidate budget for the witness search.
        #[arg(long)]
        search: Option<usize>,
    },
    /// Construct the Levi-Civita connection for a metric, if one exists.
    LeviCivita {
        instance: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// Read the instance as a free calculus and solve for Christoffel blocks.
        #[arg(long)]
        free: bool,
    },
    /// Evaluate one right-hand side 2 h(nabla_i e_j, e_k) of the Koszul identity.
    Koszul {
        instance: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// Generator index i, 1-based.
        #[arg(long)]
        i: usize,
        /// Generator index j, 1-based.
        #[arg(long)]
        j: usize,
        /// Generator index k, 1-based.
        #[arg(long)]
        k: usize,
    },
    /// Restrict a metric through a projection; optionally transport a connection.
    Project {
        instance: PathBuf,
        #[arg(long)]
        projection: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        connection: Option<PathBuf>,
    },
    /// Check symmetry, metric compatibility and torsion for a connection.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        connection: PathBuf,
        /// Read the instance as a free calculus.
        #[arg(long)]
        free: bool,
    },
}

/// One invocation, one report: command echo, pass/fail/unknown/error status,
/// named residuals, and any computed artifacts (connections, witnesses,
/// restricted metrics, representatives).
#[derive(Serialize)]
struct Report {
    command: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifacts: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

struct Outcome {
    status: &'static str,
    residuals: BTreeMap<String, f64>,
    artifacts: Option<Value>,
    message: Option<String>,
}

impl Outcome {
    fn new(status: &'static str) -> Self {
        Outcome {
            status,
            residuals: BTreeMap::new(),
            artifacts: None,
            message: None,
        }
    }

    fn pass() -> Self {
        Outcome::new("pass")
    }
}

enum CmdError {
    /// Unreadable or unparseable input file; exits 2.
    Io(String),
    /// Library rejection; status and exit code depend on the variant.
    Calc(CalcError),
}

impl From<CalcError> for CmdError {
    fn from(e: CalcError) -> Self {
        CmdError::Calc(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, code) = evaluate(&cli);
    let report = Report {
        command: command_name(&cli.command),
        status: outcome.status,
        residuals: outcome.residuals,
        artifacts: outcome.artifacts,
        message: outcome.message,
    };
    match serde_json::to_string_pretty(&report) {
        // Ignore write failures (closed pipes) so the exit code survives.
        Ok(text) => {
            let _ = writeln!(std::io::stdout(), "{text}");
        }
        Err(e) => {
            eprintln!("cannot serialize the report: {e}");
            return ExitCode::from(2);
        }
    }
    if !cli.json_only {
        summarize(&report);
    }
    ExitCode::from(code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Classify { .. } => "classify",
        Command::Count { .. } => "count",
        Command::Enumerate { .. } => "enumerate",
        Command::Iso { .. } => "iso",
        Command::LeviCivita { .. } => "levi-civita",
        Command::Koszul { .. } => "koszul",
        Command::Project { .. } => "project",
        Command::Verify { .. } => "verify",
    }
}

fn evaluate(cli: &Cli) -> (Outcome, u8) {
    let tol = match Tolerance::new(cli.tol) {
        Ok(t) => t,
        Err(e) => {
            let mut out = Outcome::new("error");
            out.message = Some(format!("bad --tol value: {e}"));
            return (out, 2);
        }
    };
    match dispatch(cli, &tol) {
        Ok(out) => {
            let code = if out.status == "pass" { 0 } else { 1 };
            (out, code)
        }
        Err(CmdError::Io(message)) => {
            let mut out = Outcome::new("error");
            out.message = Some(message);
            (out, 2)
        }
        Err(CmdError::Calc(e)) => {
            let (status, code) = match e {
                CalcError::Shape(_)
                | CalcError::Unsupported(_)
                | CalcError::MustCanonicalize(_)
                | CalcError::Resource(_) => ("error", 3),
                CalcError::Invalid(_)
                | CalcError::Degenerate(_)
                | CalcError::NoConnection(_)
                | CalcError::SingularMetric(_) => ("fail", 1),
            };
            let mut out = Outcome::new(status);
            out.message = Some(e.to_string());
            (out, code)
        }
    }
}

fn dispatch(cli: &Cli, tol: &Tolerance) -> Result<Outcome, CmdError> {
    match &cli.command {
        Command::Validate { instance, free } => cmd_validate(instance, *free, tol),
        Command::Classify { instance } => cmd_classify(instance, tol),
        Command::Count { k, anti } => cmd_count(*k, *anti),
        Command::Enumerate { k, anti } => cmd_enumerate(*k, *anti),
        Command::Iso {
            a,
            b,
            witness,
            search,
        } => cmd_iso(a, b, witness.as_deref(), *search, tol, cli.seed),
        Command::LeviCivita {
            instance,
            metric,
            free,
        } => cmd_levi_civita(instance, metric, *free, tol, cli.seed),
        Command::Koszul {
            instance,
            metric,
            i,
            j,
            k,
        } => cmd_koszul(instance, metric, *i, *j, *k),
        Command::Project {
            instance,
            projection,
            metric,
            connection,
        } => cmd_project(instance, projection, metric, connection.as_deref(), tol),
        Command::Verify {
            instance,
            metric,
            connection,
            free,
        } => cmd_verify(instance, metric, connection, *free, tol, cli.seed),
    }
}

fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CmdError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CmdError::Io(format!("cannot read {what} file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CmdError::Io(format!("cannot parse {what} file {}: {e}", path.display()))
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library artifacts serialize to JSON")
}

fn pattern_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn summarize(report: &Report) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}: {}", report.command, report.status);
    if let Some(m) = &report.message {
        let _ = writeln!(err, "  {m}");
    }
    for (name, value) in &report.residuals {
        let _ = writeln!(err, "  {name} = {value:.3e}");
    }
}

fn outcome_from_psr(rep: &PsrReport) -> Outcome {
    let mut out = Outcome::pass();
    out.residuals.insert("symmetry".into(), rep.symmetry_residual);
    out.residuals
        .insert("metric_compatibility".into(), rep.metric_residual);
    out.residuals.insert("torsion".into(), rep.torsion_residual);
    out.residuals.insert("threshold".into(), rep.threshold);
    if !rep.pass {
        out.status = "fail";
        out.message = Some("a pseudo-Riemannian residual exceeds the threshold".into());
    }
    out
}

fn cmd_validate(path: &Path, free: bool, tol: &Tolerance) -> Result<Outcome, CmdError> {
    let report = if free {
        let f: FreeCalculusInstance = load(path, "instance")?;
        validate_free_calculus(&f, tol)?
    } else {
        let c: CalculusInstance = load(path, "instance")?;
        validate_calculus(&c, tol)?
    };
    let mut out = Outcome::pass();
    for check in &report.checks {
        if let Some(r) = check.residual {
            out.residuals.insert(check.name.clone(), r);
        }
    }
    out.artifacts = Some(json!({ "checks": to_value(&report.checks) }));
    if !report.passed() {
        out.status = "fail";
        out.message = Some(format!("failed checks: {}", report.failures().join(", ")));
    }
    Ok(out)
}

fn cmd_classify(path: &Path, tol: &Tolerance) -> Result<Outcome, CmdError> {
    let c: CalculusInstance = load(path, "instance")?;
    let canonical = canonical_diag_1d(&c, tol)?;
    let pattern = zero_pattern(&canonical.instance, tol)?;
    let anti = anti_selfsimilar(&canonical.instance.rep.dhat[0], tol)?;
    let classes = count_classes(pattern.k(), anti)?;

    // Class representative: the canonical generator with an indicator phi
    // putting weight 1 on the first coordinate of each live block.
    let mut indicator = CVector::zeros(canonical.instance.n_dim());
    for (j, &live) in pattern.0.iter().enumerate() {
        if live {
            let (start, _) = canonical.blocks.block_range(j);
            indicator.0[start] = C64::new(1.0, 0.0);
        }
    }
    let representative = CalculusInstance {
        rep: canonical.instance.rep.clone(),
        module_rank: 1,
        phi: vec![indicator],
    };

    let mut out = Outcome::pass();
    out.artifacts = Some(json!({
        "blocks": to_value(&canonical.blocks.blocks),
        "pattern": pattern_string(&pattern.0),
        "anti_selfsimilar": anti,
        // u128 class counts overflow JSON numbers; always a decimal string.
        "classes": classes.to_string(),
        "representative": to_value(&representative),
    }));
    if !pattern.any_nonzero() {
        out.status = "fail";
        out.message =
            Some("phi vanishes on every eigenvalue block and does not generate the module".into());
    }
    Ok(out)
}

fn cmd_count(k: usize, anti: bool) -> Result<Outcome, CmdError> {
    let classes = count_classes(k, anti)?;
    let mut out = Outcome::pass();
    out.artifacts = Some(json!({
        "k": k,
        "anti_selfsimilar": anti,
        "classes": classes.to_string(),
    }));
    Ok(out)
}

fn cmd_enumerate(k: usize, anti: bool) -> Result<Outcome, CmdError> {
    let patterns = enumerate_classes(k, anti)?;
    let strings: Vec<String> = patterns.iter().map(|p| pattern_string(&p.0)).collect();
    let mut out = Outcome::pass();
    out.artifacts = Some(json!({
        "k": k,
        "anti_selfsimilar": anti,
        "classes": strings.len().to_string(),
        "patterns": strings,
    }));
    Ok(out)
}

fn cmd_iso(
    a_path: &Path,
    b_path: &Path,
    witness: Option<&Path>,
    search: Option<usize>,
    tol: &Tolerance,
    seed: u64,
) -> Result<Outcome, CmdError> {
    let a: CalculusInstance = load(a_path, "instance")?;
    let b: CalculusInstance = load(b_path, "instance")?;

    if let Some(wpath) = witness {
        let w: IsoWitness = load(wpath, "witness")?;
        let ok = check_isomorphism_witness(&a, &b, &w, tol)?;
        let mut out = Outcome::pass();
        out.artifacts = Some(json!({ "method": "witness" }));
        if !ok {
            out.status = "fail";
            out.message =
                Some("the supplied witness does not satisfy the isomorphism equations".into());
        }
        return Ok(out);
    }

    let one_generator =
        a.lie_dim() == 1 && b.lie_dim() == 1 && a.module_rank == 1 && b.module_rank == 1;
    if one_generator {
        let isomorphic = is_isomorphic_1d(&a, &b, tol)?;
        let mut out = Outcome::pass();
        if isomorphic {
            // The structured construction realizes the decision as a witness.
            let found = search_witness(&a, &b, search.unwrap_or(8), seed, tol)?;
            out.artifacts = Some(match found {
                Some(w) => json!({ "method": "closed_form", "witness": to_value(&w) }),
                None => json!({ "method": "closed_form" }),
            });
        } else {
            out.status = "fail";
            out.artifacts = Some(json!({ "method": "closed_form" }));
            out.message = Some("the instances are not isomorphic".into());
        }
        return Ok(out);
    }

    match search_witness(&a, &b, search.unwrap_or(64), seed, tol)? {
        Some(w) => {
            let mut out = Outcome::pass();
            out.artifacts = Some(json!({ "method": "search", "witness": to_value(&w) }));
            Ok(out)
        }
        None => {
            let mut out = Outcome::new("unknown");
            out.artifacts = Some(json!({ "method": "search" }));
            out.message = Some(
                "witness search exhausted its budget; this is not a proof of non-isomorphism"
                    .into(),
            );
            Ok(out)
        }
    }
}

/// Worst defect ‖v0 Dhat (1 - p)‖ over the given directions, the residual of
/// the eigenvector condition for a Levi-Civita connection.
fn anchor_defect(v0: &CVector, dhat: &[ComplexMatrix]) -> Result<f64, CmdError> {
    let nsq = v0.norm().powi(2);
    let p = v0.dagger_dot(v0).scale(C64::new(1.0 / nsq, 0.0));
    let eye = ComplexMatrix::identity(v0.len());
    let complement = eye.sub(&p)?;
    let mut worst = 0.0f64;
    for d in dhat {
        worst = worst.max(v0.mat_mul(d)?.mat_mul(&complement)?.norm());
    }
    Ok(worst)
}

fn no_connection_outcome(reason: &str, defect: f64) -> Outcome {
    let mut out = Outcome::new("fail");
    out.residuals.insert("anchor_defect".into(), defect);
    out.message = Some(format!(
        "no Levi-Civita connection: {reason}; failing condition: v0 Dhat (1 - p) != 0"
    ));
    out
}

fn cmd_levi_civita(
    path: &Path,
    metric_path: &Path,
    free: bool,
    tol: &Tolerance,
    seed: u64,
) -> Result<Outcome, CmdError> {
    let metric: MetricSpec = load(metric_path, "metric")?;

    if free {
        let f: FreeCalculusInstance = load(path, "instance")?;
        let MetricSpec::Free(h) = &metric else {
            return Err(CalcError::Unsupported(format!(
                "a free instance needs a metric of kind free, got {}",
                metric.kind_name()
            ))
            .into());
        };
        let conn = christoffel_free(&f, h, tol)?;
        let rep = verify_pseudo_riemannian(VerifyTarget::Free(&f), &metric, &conn, tol, seed)?;
        let mut out = outcome_from_psr(&rep);
        out.artifacts = Some(json!({ "connection": to_value(&conn) }));
        return Ok(out);
    }

    let c: CalculusInstance = load(path, "instance")?;
    match &metric {
        MetricSpec::Scalar(_) => match lc_connection_1d(&c, tol) {
            Ok(lc) => {
                let conn = ConnectionSpec::LambdaScalar {
                    lambda: C64::new(0.0, 0.0),
                };
                let rep =
                    verify_pseudo_riemannian(VerifyTarget::Vector(&c), &metric, &conn, tol, seed)?;
                let mut out = outcome_from_psr(&rep);
                out.artifacts = Some(json!({
                    "connection": to_value(&conn),
                    "lambda_partial": [lc.lambda_partial.re, lc.lambda_partial.im],
                }));
                Ok(out)
            }
            Err(CalcError::NoConnection(reason)) => {
                let defect = anchor_defect(&c.phi[0], &c.rep.dhat)?;
                Ok(no_connection_outcome(&reason, defect))
            }
            Err(e) => Err(e.into()),
        },
        MetricSpec::Aligned(am) => match lc_abelian(&c, am, tol) {
            Ok(lc) => {
                let rep = verify_pseudo_riemannian(
                    VerifyTarget::Vector(&c),
                    &metric,
                    &lc.connection,
                    tol,
                    seed,
                )?;
                let mut out = outcome_from_psr(&rep);
                out.artifacts = Some(json!({
                    "connection": to_value(&lc.connection),
                    "lambdas": to_value(&lc.lambdas),
                }));
                Ok(out)
            }
            Err(CalcError::NoConnection(reason)) => {
                let defect = anchor_defect(&am.v0, &c.rep.dhat)?;
                Ok(no_connection_outcome(&reason, defect))
            }
            Err(e) => Err(e.into()),
        },
        MetricSpec::Free(_) => Err(CalcError::Unsupported(
            "a metric of kind free needs --free and a free instance file".into(),
        )
        .into()),
    }
}

fn cmd_koszul(
    path: &Path,
    metric_path: &Path,
    i: usize,
    j: usize,
    k: usize,
) -> Result<Outcome, CmdError> {
    let f: FreeCalculusInstance = load(path, "instance")?;
    let metric: MetricSpec = load(metric_path, "metric")?;
    let MetricSpec::Free(h) = &metric else {
        return Err(CalcError::Unsupported(format!(
            "the Koszul identity needs a metric of kind free, got {}",
            metric.kind_name()
        ))
        .into());
    };
    if i == 0 || j == 0 || k == 0 {
        return Err(CalcError::Shape("generator indices are 1-based".into()).into());
    }
    let rhs = koszul_rhs(&f, h, i - 1, j - 1, k - 1)?;
    let mut out = Outcome::pass();
    out.residuals.insert("rhs_max_abs".into(), rhs.max_abs());
    out.artifacts = Some(json!({ "i": i, "j": j, "k": k, "rhs": to_value(&rhs) }));
    Ok(out)
}

fn cmd_project(
    path: &Path,
    projection_path: &Path,
    metric_path: &Path,
    connection_path: Option<&Path>,
    tol: &Tolerance,
) -> Result<Outcome, CmdError> {
    let f: FreeCalculusInstance = load(path, "instance")?;
    let proj: ProjectionSpec = load(projection_path, "projection")?;
    let metric: MetricSpec = load(metric_path, "metric")?;
    let MetricSpec::Free(h) = &metric else {
        return Err(CalcError::Unsupported(format!(
            "projection needs a metric of kind free, got {}",
            metric.kind_name()
        ))
        .into());
    };

    let orthogonal = is_orthogonal_projection(&proj, h, tol)?;
    let symmetry = metric_symmetry_condition(&proj, h, tol)?;

    let mut out = Outcome::pass();
    let mut artifacts = serde_json::Map::new();
    artifacts.insert("orthogonal".into(), Value::Bool(orthogonal));
    artifacts.insert("symmetry_condition".into(), Value::Bool(symmetry));

    if orthogonal {
        let restricted = restrict_metric(&proj, h, tol)?;
        artifacts.insert("restricted_metric".into(), to_value(&restricted));
    } else {
        out.status = "fail";
        out.message = Some(
            "the projection is not orthogonal for this metric; the restriction is undefined"
                .into(),
        );
    }
    if let Some(cpath) = connection_path {
        let conn: ConnectionSpec = load(cpath, "connection")?;
        let projected = project_connection(&proj, &conn, &f, tol)?;
        artifacts.insert("projected_connection".into(), to_value(&projected));
    }
    out.artifacts = Some(Value::Object(artifacts));
    Ok(out)
}

fn cmd_verify(
    path: &Path,
    metric_path: &Path,
    connection_path: &Path,
    free: bool,
    tol: &Tolerance,
    seed: u64,
) -> Result<Outcome, CmdError> {
    let metric: MetricSpec = load(metric_path, "metric")?;
    let conn: ConnectionSpec = load(connection_path, "connection")?;
    let rep = if free {
        let f: FreeCalculusInstance = load(path, "instance")?;
        verify_pseudo_riemannian(VerifyTarget::Free(&f), &metric, &conn, tol, seed)?
    } else {
        let c: CalculusInstance = load(path, "instance")?;
        verify_pseudo_riemannian(VerifyTarget::Vector(&c), &metric, &conn, tol, seed)?
    };
    Ok(outcome_from_psr(&rep))
}
