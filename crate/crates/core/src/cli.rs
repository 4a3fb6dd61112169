//! Command-line front end.
//!
//! Exit status: 0 for success or a positive verdict, 1 for a negative or
//! undecided verdict, 2 for unusable input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::catalog;
use crate::dependence::{classify, SearchParams};
use crate::error::Error;
use crate::io::{self, Document, LoadError};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::measurement::{povm_of, Measurement, Povm, QuantumState};
use crate::perfect::{build_retrodictor, check_perfect};
use crate::simulation::{run_trials, Retrodictor};
use crate::synthesis::synthesize;
use crate::unambiguous::{assess_measurement, retrodict_unambiguously, Feasibility};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "retroq", version, about = "Outcome retrodiction for generalised quantum measurements")]
pub struct Cli {
    /// Residual allowed in equality checks
    #[arg(long, global = true, default_value_t = Tolerance::default().eq_residual)]
    pub tol_eq: f64,
    /// Relative threshold for numerical rank
    #[arg(long, global = true, default_value_t = Tolerance::default().rank_rel)]
    pub tol_rank: f64,
    /// Seed for sampling and simulation
    #[arg(long, global = true, env = "RETROQ_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of simulated trials
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a file holds a valid measurement, POVM, state or retrodictor
    Validate { file: PathBuf },
    /// Test the perfect retrodiction condition for a measurement
    CheckPerfect { file: PathBuf },
    /// Emit the projective retrodictor of a perfectly retrodictable measurement
    BuildRetrodictor { file: PathBuf },
    /// Emit the unambiguous retrodictor for a fine-grained measurement and known pure input
    BuildUdRetrodictor { measurement: PathBuf, state: PathBuf },
    /// Realise a POVM as a perfectly retrodictable measurement
    Synthesize {
        file: PathBuf,
        #[arg(long)]
        d_out: usize,
    },
    /// Linear, local linear dependence and local linear independence of Kraus operators
    Classify { file: PathBuf },
    /// Decide whether an entangled input allows unambiguous retrodiction
    Assess { file: PathBuf },
    /// Monte Carlo run of measurement followed by retrodiction
    Simulate {
        measurement: PathBuf,
        retrodictor: PathBuf,
        state: PathBuf,
    },
    /// List the built-in examples, or dump one as a JSON document
    Examples { name: Option<String> },
}

enum Failure {
    Load(LoadError),
    Model(Error),
    Usage(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Self::Load(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Model(e)
    }
}

struct Outcome {
    code: i32,
    json: Value,
    text: String,
}

impl Outcome {
    fn new(code: i32, json: Value, text: impl Into<String>) -> Self {
        Self {
            code,
            json,
            text: text.into(),
        }
    }
}

fn load(path: &Path, tol: &Tolerance) -> Result<Document, Failure> {
    Ok(io::load_document(path, tol)?)
}

fn wrong_kind(path: &Path, expected: &'static str, found: &Document) -> Failure {
    Failure::Load(LoadError::WrongKind {
        path: path.display().to_string(),
        expected,
        found: found.kind(),
    })
}

fn load_measurement(path: &Path, tol: &Tolerance) -> Result<Measurement, Failure> {
    match load(path, tol)? {
        Document::Measurement(m) => Ok(m),
        other => Err(wrong_kind(path, "measurement", &other)),
    }
}

fn load_povm(path: &Path, tol: &Tolerance) -> Result<Povm, Failure> {
    match load(path, tol)? {
        Document::Povm(p) => Ok(p),
        Document::Measurement(m) => Ok(povm_of(&m)),
        other => Err(wrong_kind(path, "povm", &other)),
    }
}

fn load_state(path: &Path, tol: &Tolerance) -> Result<QuantumState, Failure> {
    match load(path, tol)? {
        Document::State(s) => Ok(s),
        other => Err(wrong_kind(path, "state", &other)),
    }
}

fn load_retrodictor(path: &Path, tol: &Tolerance) -> Result<Retrodictor, Failure> {
    match load(path, tol)? {
        Document::Projective(r) => Ok(r.into()),
        Document::Unambiguous(r) => Ok(r.into()),
        other => Err(wrong_kind(path, "retrodictor", &other)),
    }
}

fn describe(doc: &Document) -> String {
    match doc {
        Document::Measurement(m) => format!(
            "valid measurement: d_in={} d_out={} outcomes={} fine_grained={}",
            m.d_in(),
            m.d_out(),
            m.n_outcomes(),
            m.is_fine_grained()
        ),
        Document::Povm(p) => format!("valid POVM: d={} elements={}", p.d(), p.len()),
        Document::Operators(ops) => format!(
            "valid operator list: {} operators of shape {}x{}",
            ops.len(),
            ops[0].rows(),
            ops[0].cols()
        ),
        Document::State(s) => format!(
            "valid {} state: dim={} factors={:?}",
            if s.is_pure() { "pure" } else { "mixed" },
            s.dim(),
            s.factor_dims()
        ),
        Document::Projective(r) => format!(
            "valid projective retrodictor: d_out={} projectors={}",
            r.d_out(),
            r.projectors().len()
        ),
        Document::Unambiguous(r) => format!(
            "valid unambiguous retrodictor: d={} conclusive outcomes={}",
            r.d(),
            r.n_outcomes()
        ),
    }
}

fn validate(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let doc = load(path, tol)?;
    let mut json = json!({ "valid": true, "kind": doc.kind() });
    if let Document::Measurement(m) = &doc {
        json["d_in"] = json!(m.d_in());
        json["d_out"] = json!(m.d_out());
        json["outcomes"] = json!(m.n_outcomes());
        json["fine_grained"] = json!(m.is_fine_grained());
    }
    Ok(Outcome::new(EXIT_OK, json, describe(&doc)))
}

fn cmd_check_perfect(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let m = load_measurement(path, tol)?;
    let report = check_perfect(&m, tol);
    let mut text = format!(
        "retrodictable: {}\nmax residual: {:.6e} (raw {:.6e})",
        report.retrodictable, report.max_residual, report.max_raw_residual
    );
    if let Some(w) = report.witness {
        text.push_str(&format!(
            "\nworst pair: outcome {} operator {} vs outcome {} operator {}",
            w.k, w.r, w.k_prime, w.r_prime
        ));
    }
    let code = if report.retrodictable { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::new(code, serde_json::to_value(&report).expect("serialisable"), text))
}

fn document_outcome(doc: Document, summary: String) -> Outcome {
    let json = doc.to_json();
    let text = format!("{summary}\n{}", io::to_pretty(&json).trim_end());
    Outcome::new(EXIT_OK, json, text)
}

fn cmd_build_retrodictor(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let m = load_measurement(path, tol)?;
    let r = build_retrodictor(&m, tol)?;
    let summary = format!("projective retrodictor with {} projectors on C^{}", r.projectors().len(), r.d_out());
    Ok(document_outcome(Document::Projective(r), summary))
}

fn cmd_build_ud(mpath: &Path, spath: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let m = load_measurement(mpath, tol)?;
    let s = load_state(spath, tol)?;
    let r = retrodict_unambiguously(&m, &s, tol)?;
    let summary = format!(
        "unambiguous retrodictor on C^{}: p_inconclusive = {:.6e}, error residual = {:.3e}",
        r.retrodictor.d(),
        r.p_inconclusive,
        r.error_residual
    );
    Ok(document_outcome(Document::Unambiguous(r.retrodictor), summary))
}

fn cmd_synthesize(path: &Path, d_out: usize, tol: &Tolerance) -> Result<Outcome, Failure> {
    let p = load_povm(path, tol)?;
    let s = synthesize(&p, d_out, None, tol)?;
    let summary = format!(
        "perfectly retrodictable measurement C^{} -> C^{d_out} with {} outcomes",
        p.d(),
        p.len()
    );
    Ok(document_outcome(Document::Measurement(s.measurement), summary))
}

fn cmd_classify(path: &Path, tol: &Tolerance, params: &SearchParams) -> Result<Outcome, Failure> {
    let ops: Vec<ComplexMatrix> = match load(path, tol)? {
        Document::Measurement(m) => m.outcomes().iter().flatten().cloned().collect(),
        Document::Operators(ops) => ops,
        other => return Err(wrong_kind(path, "measurement or operators", &other)),
    };
    let v = classify(&ops, tol, params)?;
    let json = serde_json::to_value(&v).expect("serialisable");
    let text = format!(
        "linearly independent: {}\nlocally linearly dependent: {}\nlocally linearly independent: {}\nmin sigma: {:.6e}",
        v.linearly_independent,
        json["lld"].as_str().unwrap_or_default(),
        json["lli"].as_str().unwrap_or_default(),
        v.min_sigma
    );
    Ok(Outcome::new(EXIT_OK, json, text))
}

fn cmd_assess(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let m = load_measurement(path, tol)?;
    let a = assess_measurement(&m, tol)?;
    let json = json!({
        "feasible": a.feasible.as_str(),
        "linearly_independent": a.linearly_independent,
        "singular_outcomes": a.singular_outcomes,
        "recommended_state": a.recommended_state.as_ref().map(io::state_json),
        "p_inconclusive": a.p_inconclusive,
    });
    let mut text = format!("feasible: {}", a.feasible.as_str());
    if let (Some(s), Some(p)) = (&a.recommended_state, a.p_inconclusive) {
        text.push_str(&format!(
            "\nrecommended input: maximally entangled state on C^{0} x C^{0}\np_inconclusive: {p:.6e}",
            s.factor_dims().map_or(s.dim(), |f| f.0)
        ));
    }
    let code = if a.feasible == Feasibility::Yes { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::new(code, json, text))
}

fn cmd_simulate(
    mpath: &Path,
    rpath: &Path,
    spath: &Path,
    trials: u64,
    seed: u64,
    tol: &Tolerance,
) -> Result<Outcome, Failure> {
    let m = load_measurement(mpath, tol)?;
    let r = load_retrodictor(rpath, tol)?;
    let s = load_state(spath, tol)?;
    let report = run_trials(&m, &r, &s, trials, seed, tol)?;
    let text = format!(
        "trials: {} (seed {})\noutcome counts: {:?}\ncorrect: {} mismatched: {} inconclusive: {}\nagreement rate: {}\ninconclusive rate: {:.6}",
        report.n_trials,
        report.seed,
        report.outcome_counts,
        report.correct,
        report.mismatches,
        report.inconclusive,
        report.agreement_rate.map_or("n/a".to_string(), |a| format!("{a:.6}")),
        report.inconclusive_rate
    );
    Ok(Outcome::new(EXIT_OK, serde_json::to_value(&report).expect("serialisable"), text))
}

fn cmd_examples(name: Option<&str>) -> Result<Outcome, Failure> {
    match name {
        None => {
            let all = catalog::catalog();
            let json = Value::Array(
                all.iter()
                    .map(|e| json!({ "name": e.name, "description": e.description, "expected": e.expected }))
                    .collect(),
            );
            let text = all
                .iter()
                .map(|e| format!("{:<20} {}", e.name, e.description))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome::new(EXIT_OK, json, text))
        }
        Some(n) => {
            let e = catalog::find(n).ok_or_else(|| Failure::Usage(format!("unknown example `{n}`")))?;
            let json = io::example_document(&e).to_json();
            let text = io::to_pretty(&json).trim_end().to_string();
            Ok(Outcome::new(EXIT_OK, json, text))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = Tolerance::new(cli.tol_eq, cli.tol_rank, Tolerance::default().psd_floor)?;
    let params = SearchParams {
        seed: cli.seed,
        ..Default::default()
    };
    match &cli.command {
        Command::Validate { file } => validate(file, &tol),
        Command::CheckPerfect { file } => cmd_check_perfect(file, &tol),
        Command::BuildRetrodictor { file } => cmd_build_retrodictor(file, &tol),
        Command::BuildUdRetrodictor { measurement, state } => cmd_build_ud(measurement, state, &tol),
        Command::Synthesize { file, d_out } => cmd_synthesize(file, *d_out, &tol),
        Command::Classify { file } => cmd_classify(file, &tol, &params),
        Command::Assess { file } => cmd_assess(file, &tol),
        Command::Simulate {
            measurement,
            retrodictor,
            state,
        } => cmd_simulate(measurement, retrodictor, state, cli.trials, cli.seed, &tol),
        Command::Examples { name } => cmd_examples(name.as_deref()),
    }
}

/// Runs the tool and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let _ = match cli.format {
                Format::Json => write!(out, "{}", io::to_pretty(&o.json)),
                Format::Text => writeln!(out, "{}", o.text),
            };
            o.code
        }
        Err(f) => {
            let (code, kind, message) = match f {
                Failure::Load(e) => (EXIT_INPUT, "input_error", e.to_string()),
                Failure::Usage(m) => (EXIT_INPUT, "usage_error", m),
                Failure::Model(e) => {
                    let code = if e.is_verdict() { EXIT_NEGATIVE } else { EXIT_INPUT };
                    (code, e.code(), e.to_string())
                }
            };
            if cli.format == Format::Json {
                let _ = write!(out, "{}", io::to_pretty(&json!({ "error": kind, "message": message })));
            }
            let _ = writeln!(err, "error[{kind}]: {message}");
            code
        }
    }
}
