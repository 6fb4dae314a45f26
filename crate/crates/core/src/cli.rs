//! Command-line surface. `run_command` does all the work so the binary stays
//! a thin wrapper and tests can drive every exit path.
//!
//! Exit codes: 0 solved and certified (or a non-solving command succeeded),
//! 1 solved but some conclusion not certified, 2 hypothesis or premise
//! failure, 3 input error. With several instances the largest code wins.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::evp::{
    solve_evp_approx, solve_evp_general, solve_evp_ha, solve_evp_quasimetric, solve_evp_setdir, EvpCertificate, HaPremise,
    SolverError, TheoremTag,
};
use crate::geometry::{strictly_positive_functional, Point, Polytope};
use crate::io::builtin::{builtin, BuiltinError};
use crate::io::generate::{generate, Profile, Variant};
use crate::io::report::{Certificate, Report, Status, TraceSummary};
use crate::io::{load_validate, validate, InstanceBundle, IoError, InstanceFile, TOLERANCE_ENV};
use crate::model::probes::{epi_closed_probe, slm_probe};
use crate::model::{check_assumptions, relation_matrix, PerturbationFamily};
use crate::product::{
    domination_check, solve_minimal_point, solve_pareto_evp, solve_strict_minimal, FMap, ProductCertificate, ProductInstance,
};
use crate::scalarization::{default_bracket, gz_bisect_oracle, GerstewitzFn, Scalarizer};

#[derive(Debug, Parser)]
#[command(name = "evpkit", version, about = "Set-valued variational principles on finite instances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Instance files.
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    /// Start point label, overriding `params.x0`.
    #[arg(long)]
    pub x0: Option<String>,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solve the instances concurrently; reports keep input order.
    #[arg(long)]
    pub batch: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and check an instance.
    Validate(Common),
    /// Run a variational principle on `X`.
    SolveEvp {
        #[arg(long, value_parser = parse_evp_theorem)]
        theorem: TheoremTag,
        #[command(flatten)]
        common: Common,
    },
    /// Run a principle on the product space `X × Y`.
    SolveMinimalPoint {
        #[arg(long, value_parser = parse_product_theorem)]
        theorem: TheoremTag,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal points of the image `f(X)`.
    Pareto {
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Gerstewitz value of a point, with the bisection cross-check.
    Scalarize {
        /// Comma-separated coordinates.
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        y: Coords,
        /// Comma-separated direction; defaults to the instance's `k0`.
        #[arg(long, value_parser = parse_coords)]
        k0: Option<Coords>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate (D), (E), (E1), (E2), (E3) and (F).
    CheckAssumptions(Common),
    /// Emit a seeded random instance.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        values: usize,
        #[arg(long, default_value = "polytope")]
        variant: Variant,
        /// Include a product section.
        #[arg(long)]
        product: bool,
        /// Write the instance file here instead of embedding it in the report.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a named built-in instance.
    Builtin {
        name: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A comma-separated point given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn parse_coords(s: &str) -> Result<Coords, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("{c:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Coords)
}

fn parse_evp_theorem(s: &str) -> Result<TheoremTag, String> {
    let t: TheoremTag = s.parse().map_err(|e: crate::evp::UnknownTheorem| e.to_string())?;
    if t.is_product() {
        return Err(format!("{t} runs under solve-minimal-point"));
    }
    Ok(t)
}

fn parse_product_theorem(s: &str) -> Result<TheoremTag, String> {
    let t: TheoremTag = s.parse().map_err(|e: crate::evp::UnknownTheorem| e.to_string())?;
    if !t.is_product() {
        return Err(format!("{t} runs under solve-evp"));
    }
    Ok(t)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Solver(SolverError::Hypothesis { .. }) => Status::HypothesisFailed,
            CliError::Solver(SolverError::Premise { .. }) => Status::PremiseFailed,
            _ => Status::InputError,
        }
    }
}

fn missing(what: &str) -> CliError {
    CliError::Input(format!("instance lacks {what}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub reports: Vec<Report>,
    /// Human-readable text for stdout.
    pub rendered: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_command<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Status::InputError.exit_code() } else { 0 };
            return CommandOutcome {
                exit_code: code,
                reports: Vec::new(),
                rendered: e.render().to_string(),
            };
        }
    };
    let (reports, out) = dispatch(cli.command);
    let mut exit_code = reports.iter().map(Report::exit_code).max().unwrap_or(0);
    let mut rendered = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    if let Some(path) = out {
        if let Err(e) = write_machine_block(&path, &reports) {
            rendered.push_str(&format!("\nerror: {e}"));
            exit_code = exit_code.max(Status::InputError.exit_code());
        }
    }
    CommandOutcome {
        exit_code,
        reports,
        rendered,
    }
}

/// One report as an object, several as an array.
pub fn write_machine_block(path: &Path, reports: &[Report]) -> Result<(), IoError> {
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(reports)
    }
    .expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn dispatch(cmd: Command) -> (Vec<Report>, Option<PathBuf>) {
    match cmd {
        Command::Validate(c) => per_instance("validate", None, c, run_validate),
        Command::SolveEvp { theorem, common } => {
            per_instance("solve-evp", Some(theorem), common, move |b, x0| run_evp(b, theorem, x0))
        }
        Command::SolveMinimalPoint { theorem, common } => {
            per_instance("solve-minimal-point", Some(theorem), common, move |b, x0| run_product(b, theorem, x0))
        }
        Command::Pareto { strict, common } => per_instance("pareto", None, common, move |b, _| run_pareto(b, strict)),
        Command::Scalarize { y, k0, common } => {
            per_instance("scalarize", None, common, move |b, _| run_scalarize(b, &y.0, k0.as_ref().map(|k| k.0.as_slice())))
        }
        Command::CheckAssumptions(c) => per_instance("check-assumptions", None, c, run_check),
        Command::Generate {
            seed,
            n,
            m,
            values,
            variant,
            product,
            emit,
            out,
        } => {
            let start = Instant::now();
            let mut profile = Profile::new(n, m, values, variant);
            profile.product = product;
            let file = generate(seed, &profile);
            let mut r = emit_file("generate", &file, emit.as_deref());
            r.data = r.data.map(|mut d| {
                d["seed"] = json!(seed);
                d["profile"] = json!(profile);
                d
            });
            r.timing_ms = elapsed(start);
            (vec![r], out)
        }
        Command::Builtin { name, samples, emit, out } => {
            let start = Instant::now();
            let mut r = match builtin(&name, samples) {
                Ok(file) => {
                    let mut r = emit_file("builtin", &file, emit.as_deref());
                    if r.status == Status::Ok {
                        if let Some(d) = r.data.as_mut() {
                            d["probes"] = probe_outcomes(&file);
                        }
                    }
                    r
                }
                Err(e) => Report::failure("builtin", Status::InputError, e),
            };
            r.instance = Some(name);
            r.timing_ms = elapsed(start);
            (vec![r], out)
        }
    }
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn emit_file(command: &str, file: &InstanceFile, emit: Option<&Path>) -> Report {
    let env = std::env::var(TOLERANCE_ENV).ok();
    if let Err(e) = validate(file, env.as_deref()) {
        return Report::failure(command, Status::InputError, e);
    }
    let mut r = Report::new(command, Status::Ok);
    let mut data = json!({});
    match emit {
        Some(path) => {
            let text = serde_json::to_string_pretty(file).expect("instance serializes") + "\n";
            if let Err(source) = std::fs::write(path, text) {
                return Report::failure(command, Status::InputError, IoError::Write {
                    path: path.display().to_string(),
                    source,
                });
            }
            data["written"] = json!(path.display().to_string());
        }
        None => data["instance"] = serde_json::to_value(file).expect("instance serializes"),
    }
    r.data = Some(data);
    r
}

/// Runs the chain probes shipped with an instance.
fn probe_outcomes(file: &InstanceFile) -> serde_json::Value {
    let Ok(b) = validate(file, None) else { return serde_json::Value::Null };
    let Some(probes) = &b.probes else { return serde_json::Value::Null };
    let pts = |raw: &[Vec<f64>]| raw.iter().cloned().map(Point::new).collect::<Vec<_>>();
    let (cone, tol) = (&b.instance.cone, b.instance.tol);
    let mut out = json!({});
    if let Some(s) = &probes.slm {
        let chain: Vec<Vec<Point>> = s.chain.iter().map(|v| pts(v)).collect();
        out["slm"] = json!(slm_probe(&chain, &pts(&s.limit), cone, tol).ok());
        out["slm_expected"] = json!(s.expected);
    }
    if let Some(e) = &probes.epi {
        let chain: Vec<(Vec<Point>, Point)> = e.chain.iter().map(|(v, y)| (pts(v), Point::new(y.clone()))).collect();
        let got = epi_closed_probe(&chain, &pts(&e.limit_values), &Point::new(e.limit_y.clone()), cone, tol).ok();
        out["epi_closed"] = json!(got);
        out["epi_closed_expected"] = json!(e.expected);
    }
    out
}

type Job<'a> = dyn Fn(&InstanceBundle, usize) -> Result<Report, CliError> + Sync + 'a;

fn per_instance<F>(command: &str, theorem: Option<TheoremTag>, c: Common, job: F) -> (Vec<Report>, Option<PathBuf>)
where
    F: Fn(&InstanceBundle, usize) -> Result<Report, CliError> + Sync,
{
    let job: &Job<'_> = &job;
    let one = |path: &PathBuf| -> Report {
        let start = Instant::now();
        let result = load_validate(path).map_err(CliError::from).and_then(|b| {
            let x0 = match &c.x0 {
                Some(l) => b.instance.index_of(l).map_err(|e| CliError::Input(format!("--x0: {e}")))?,
                None => b.params.x0,
            };
            job(&b, x0)
        });
        let mut r = match result {
            Ok(mut r) => {
                r.command = command.to_string();
                r
            }
            Err(e) => Report::failure(command, e.status(), e),
        };
        r.theorem = theorem.map(|t| t.to_string());
        r.instance = Some(path.display().to_string());
        r.timing_ms = elapsed(start);
        r
    };
    let reports = if c.batch && c.instances.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = c.instances.iter().map(|p| s.spawn(move || one(p))).collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        })
    } else {
        c.instances.iter().map(one).collect()
    };
    (reports, c.out)
}

fn run_validate(b: &InstanceBundle, _x0: usize) -> Result<Report, CliError> {
    let mut r = Report::new("validate", Status::Ok);
    let variant = b.family.as_ref().map(|f| {
        serde_json::to_value(f)
            .ok()
            .and_then(|v| v.get("variant").cloned())
            .unwrap_or(serde_json::Value::Null)
    });
    r.data = Some(json!({
        "points": b.instance.len(),
        "dimension": b.instance.dim(),
        "values": b.instance.map.total_values(),
        "cone_pointed": b.instance.cone.is_pointed(),
        "perturbation": variant,
        "product_pairs": b.product.as_ref().map(ProductInstance::len),
        "tolerance": b.tol(),
    }));
    Ok(r)
}

fn family(b: &InstanceBundle) -> Result<&PerturbationFamily, CliError> {
    b.family.as_ref().ok_or_else(|| missing("a perturbation"))
}

fn directions(b: &InstanceBundle) -> Result<Polytope, CliError> {
    b.directions().ok_or_else(|| missing("perturbation directions (k0 or h)"))
}

fn need(v: Option<f64>, what: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| missing(what))
}

/// `xi` from the file, else a linear functional positive on the directions.
fn potential(b: &InstanceBundle) -> Result<Scalarizer, CliError> {
    if let Some(xi) = &b.xi {
        return Ok(xi.clone());
    }
    let h = directions(b)?;
    let w = strictly_positive_functional(&h, &b.instance.cone, b.tol())
        .map_err(SolverError::from)?
        .ok_or_else(|| SolverError::Hypothesis {
            name: "B1".into(),
            detail: "no functional in the dual cone is positive on the directions".into(),
        })?;
    Ok(Scalarizer::Linear(w))
}

fn evp_report(b: &InstanceBundle, cert: EvpCertificate) -> Report {
    let status = if cert.certified() { Status::Certified } else { Status::Uncertified };
    let mut r = Report::new("solve-evp", status);
    r.assumptions = Some(cert.assumptions.clone());
    r.trace_summary = Some(TraceSummary {
        steps: cert.trace.iterates.len(),
        start: b.instance.label(cert.trace.start).to_string(),
        terminal: b.instance.label(cert.trace.terminal).to_string(),
    });
    r.certificate = Some(Certificate::Evp(Box::new(cert)));
    r
}

fn run_evp(b: &InstanceBundle, theorem: TheoremTag, x0: usize) -> Result<Report, CliError> {
    let inst = &b.instance;
    let p = &b.params;
    let cert = match theorem {
        TheoremTag::T3_1 => solve_evp_general(inst, family(b)?, &potential(b)?, x0)?,
        TheoremTag::T3_5 | TheoremTag::T3_6 => {
            let k0 = b.ray().ok_or_else(|| missing("a single direction k0"))?;
            let premise = if theorem == TheoremTag::T3_5 { HaPremise::Pointwise } else { HaPremise::AgainstImage };
            solve_evp_ha(inst, &k0, need(p.epsilon, "params.epsilon")?, need(p.lambda, "params.lambda")?, x0, premise)?
        }
        TheoremTag::T4_1 | TheoremTag::T4_2 => {
            let open = theorem == TheoremTag::T4_1;
            solve_evp_setdir(inst, &directions(b)?, need(b.gamma(), "a rate gamma")?, x0, open)?
        }
        TheoremTag::T4_4 => match family(b)? {
            PerturbationFamily::QuasiMetricDirection { h, p } => solve_evp_quasimetric(inst, h, p, x0)?,
            _ => return Err(missing("a quasi_metric_direction perturbation")),
        },
        TheoremTag::T4_5 | TheoremTag::T4_6 => {
            let strict = theorem == TheoremTag::T4_6;
            solve_evp_approx(inst, &directions(b)?, need(p.epsilon, "params.epsilon")?, need(b.gamma(), "a rate gamma")?, x0, strict)?
        }
        other => return Err(CliError::Input(format!("{other} runs under solve-minimal-point"))),
    };
    Ok(evp_report(b, cert))
}

fn product_report(pi: &ProductInstance, cert: ProductCertificate) -> Report {
    let status = if cert.certified() { Status::Certified } else { Status::Uncertified };
    let mut r = Report::new("solve-minimal-point", status);
    r.trace_summary = Some(TraceSummary {
        steps: cert.trace.iterates.len(),
        start: pi.pair_label(cert.trace.start),
        terminal: pi.pair_label(cert.trace.terminal),
    });
    r.certificate = Some(Certificate::Product(Box::new(cert)));
    r
}

/// The product section, else `gr f` started at the first value of `x0`.
fn product_instance(b: &InstanceBundle, x0: usize) -> Result<ProductInstance, CliError> {
    match &b.product {
        Some(pi) if pi.x(pi.start) == x0 => Ok(pi.clone()),
        Some(pi) => {
            let first = pi
                .slice(x0)
                .first()
                .copied()
                .ok_or_else(|| CliError::Input(format!("no graph pair at {}", b.instance.label(x0))))?;
            let mut pi = pi.clone();
            pi.start = first;
            Ok(pi)
        }
        None => ProductInstance::graph_of(&b.instance, x0, 0).map_err(|e| CliError::Solver(e.into())),
    }
}

/// The file's `f` map, else one induced by a ray or polytope perturbation.
fn fmap(b: &InstanceBundle) -> Result<FMap, CliError> {
    if let Some(fm) = &b.fmap {
        return Ok(fm.clone());
    }
    let (cone, tol) = (&b.instance.cone, b.tol());
    match family(b)? {
        PerturbationFamily::SingletonDirection { k0, gamma } => Ok(FMap::ray(cone, k0.clone(), *gamma, tol)?),
        PerturbationFamily::PolytopeDirection { h, gamma } | PerturbationFamily::OpenPolytopeFamily { h, gamma } => {
            Ok(FMap::scaled(cone, h.clone(), *gamma, tol)?)
        }
        _ => Err(missing("product.f or a distance-scaled perturbation")),
    }
}

fn run_product(b: &InstanceBundle, theorem: TheoremTag, x0: usize) -> Result<Report, CliError> {
    let pi = product_instance(b, x0)?;
    let cert = match theorem {
        TheoremTag::T5_1 => solve_minimal_point(&pi, &fmap(b)?)?,
        TheoremTag::T5_2 => solve_strict_minimal(&pi, &fmap(b)?)?,
        TheoremTag::T5_6 => {
            let k0 = b.ray().ok_or_else(|| missing("a single direction k0"))?;
            solve_pareto_evp(&pi, &k0, need(b.params.epsilon, "params.epsilon")?, need(b.params.lambda, "params.lambda")?)?
        }
        other => return Err(CliError::Input(format!("{other} runs under solve-evp"))),
    };
    Ok(product_report(&pi, cert))
}

fn run_pareto(b: &InstanceBundle, strict: bool) -> Result<Report, CliError> {
    let inst = &b.instance;
    let mut owners = Vec::new();
    let mut image = Vec::new();
    for x in 0..inst.len() {
        for y in inst.f(x) {
            owners.push(x);
            image.push(y.clone());
        }
    }
    let outcome = domination_check(&image, &inst.cone, strict, inst.tol);
    let minima: Vec<_> = outcome
        .minima
        .iter()
        .map(|&i| json!({"x": inst.label(owners[i]), "y": image[i].coords()}))
        .collect();
    let mut r = Report::new("pareto", Status::Ok);
    r.data = Some(json!({
        "strict": strict,
        "minima": minima,
        "domination": outcome.holds,
        "uncovered": outcome.uncovered,
    }));
    Ok(r)
}

fn run_scalarize(b: &InstanceBundle, y: &[f64], k0: Option<&[f64]>) -> Result<Report, CliError> {
    let m = b.instance.dim();
    if y.len() != m {
        return Err(CliError::Input(format!("--y has {} coordinates, expected {m}", y.len())));
    }
    let k0 = match k0 {
        Some(k) => Point::new(k.to_vec()),
        None => b.ray().ok_or_else(|| missing("a single direction k0; pass --k0"))?,
    };
    let g = GerstewitzFn::new(b.instance.cone.clone(), k0, b.tol()).map_err(SolverError::from)?;
    let y = Point::new(y.to_vec());
    let value = g.gz_value(&y).map_err(SolverError::from)?;
    let (lo, hi) = default_bracket(&g, &y);
    let oracle = gz_bisect_oracle(&g, &y, lo, hi, b.tol());
    let mut r = Report::new("scalarize", Status::Ok);
    r.data = Some(json!({
        "y": y.coords(),
        "k0": g.k0().coords(),
        "value": value,
        "bisection": oracle.value,
        "bisection_capped": oracle.expansion_capped,
        "closed_form": g.value(&y),
    }));
    Ok(r)
}

fn run_check(b: &InstanceBundle, x0: usize) -> Result<Report, CliError> {
    let fam = family(b)?;
    let xi = potential(b)?;
    let rel = relation_matrix(&b.instance, fam).map_err(SolverError::from)?;
    let report = check_assumptions(&b.instance, fam, &rel, &xi, x0).map_err(SolverError::from)?;
    let mut r = match report.first_failure() {
        None => Report::new("check-assumptions", Status::Ok),
        Some(name) => Report::failure("check-assumptions", Status::HypothesisFailed, format!("assumption {name} fails")),
    };
    r.assumptions = Some(report);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(run_command(["evpkit", "--help"]).exit_code, 0);
        assert_eq!(run_command(["evpkit", "frobnicate"]).exit_code, 3);
        assert_eq!(run_command(["evpkit", "solve-evp", "--theorem", "9.9", "x.json"]).exit_code, 3);
        assert_eq!(run_command(["evpkit", "solve-evp", "--theorem", "5.1", "x.json"]).exit_code, 3);
    }

    #[test]
    fn missing_file_is_input_error() {
        let out = run_command(["evpkit", "validate", "/nonexistent/file.json"]);
        assert_eq!(out.exit_code, 3);
        assert_eq!(out.reports[0].status, Status::InputError);
    }

    #[test]
    fn builtin_and_generate_report_ok() {
        let out = run_command(["evpkit", "builtin", "example41", "--samples", "5"]);
        assert_eq!(out.exit_code, 0);
        let probes = &out.reports[0].data.as_ref().unwrap()["probes"];
        assert_eq!(probes["slm"], json!(true));
        assert_eq!(probes["epi_closed"], json!(false));
        assert_eq!(run_command(["evpkit", "builtin", "nope"]).exit_code, 3);
        let out = run_command(["evpkit", "generate", "--seed", "3", "--variant", "quasimetric"]);
        assert_eq!(out.exit_code, 0);
    }

    #[test]
    fn coordinate_lists_parse() {
        assert_eq!(parse_coords("1, -2.5").unwrap(), Coords(vec![1.0, -2.5]));
        assert!(parse_coords("1,x").is_err());
    }
}
