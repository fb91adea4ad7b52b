//! The `ctxkit` command-line tool.
//!
//! Exit status: 0 on success, 1 when a check the user asked about comes
//! out negative, 2 when the input cannot be read or parsed.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{classify_model, enumerate_deterministic, enumerate_extremal, EnumerationMethod};
use crate::bell::{bell_scenario, pr_box, BellStructure};
use crate::error::Error;
use crate::exactmath::rational::{format_rational, format_vector};
use crate::exactmath::null_space;
use crate::io::{model_from_value, parse_json, realization_from_value, scenario_from_value, ModelFile};
use crate::quantum::{
    certify_trivial, check_dilation_consistency, is_projective_realization, make_trivial_realization, naimark_dilate,
    validate_realization, LowerBlocks, OutcomeIndexing, QuantumRealization, Tolerances,
};
use crate::scenario::{validate_model, ContextualityScenario, ProbabilisticModel};
use crate::search::{dykstra_find_realization, random_full_rank_state, SearchConfig, StateChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ctxkit", version, about = "Analyze contextuality scenarios, models and quantum realizations")]
pub struct Cli {
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,

    /// Write output here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dd,
    Support,
}

impl From<Method> for EnumerationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Dd => Self::Dd,
            Method::Support => Self::Support,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// `1/d`.
    Mixed,
    /// Random full-rank state drawn from the run's seed.
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the scenario conditions, and optionally a model on it.
    Validate {
        scenario: String,
        #[arg(long)]
        model: Option<String>,
    },
    /// Extremal models (vertices of the model polytope).
    Vertices {
        scenario: String,
        #[arg(long, value_enum, default_value_t = Method::Dd)]
        method: Method,
    },
    /// Deterministic, classical, extremal and indeterministic flags.
    Classify { scenario: String, model: String },
    /// All {0,1}-valued models.
    Deterministic { scenario: String },
    /// Bell scenario and vertex labeling, e.g. `--structure "2,2;2,2"`
    /// (per party, outcome counts per setting).
    Bell {
        #[arg(long, default_value = "2,2;2,2")]
        structure: String,
    },
    /// PR box behavior for a two-party structure.
    Prbox {
        #[arg(long, default_value = "2,2;2,2")]
        structure: String,
    },
    /// Triviality certificate; builds the trivial realization when none
    /// is given.
    Certify {
        scenario: String,
        model: String,
        realization: Option<String>,
        /// Certificate tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Rank of the constructed state (defaults to the dimension).
        #[arg(long)]
        rank: Option<usize>,
        /// Exit with status 1 unless the verdict is trivial.
        #[arg(long)]
        expect_trivial: bool,
    },
    /// Idempotence residual of every effect.
    Projective {
        scenario: String,
        realization: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Per-edge Naimark dilations and cross-edge projector comparison.
    Dilate {
        scenario: String,
        realization: String,
        /// JSON array of per-edge block permutations; canonical order
        /// when absent.
        #[arg(long)]
        indexing: Option<String>,
        /// Completeness tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Dykstra search for a realization with a fixed state.
    Search {
        scenario: String,
        model: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Convergence tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of runs, with seeds `seed, seed + 1, ...`.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, value_enum, default_value_t = StateArg::Mixed)]
        state: StateArg,
        /// Exit with status 1 unless every run converges to a trivial
        /// realization.
        #[arg(long)]
        expect_trivial: bool,
    },
    /// Kernel of the incidence matrix.
    Nullspace { scenario: String },
}

/// Input plumbing: files, or standard input for "-".
struct Inputs<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Inputs<'_> {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        if path == "-" {
            if self.stdin_used {
                return Err(Failure::input("standard input can only be read once"));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|e| Failure::input(format!("<stdin>: {e}")))?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))
        }
    }

    fn json(&mut self, path: &str) -> Result<Value, Failure> {
        let text = self.read(path)?;
        parse_json(&text).map_err(|e| Failure::input(format!("{path}: {e}")))
    }

    fn scenario(&mut self, path: &str) -> Result<ContextualityScenario, Failure> {
        scenario_from_value(self.json(path)?).map_err(|e| Failure::input(format!("{path}: {e}")))
    }

    fn model(&mut self, h: &ContextualityScenario, path: &str) -> Result<ProbabilisticModel, Failure> {
        model_from_value(h, self.json(path)?).map_err(|e| Failure::input(format!("{path}: {e}")))
    }

    fn realization(&mut self, h: &ContextualityScenario, path: &str) -> Result<QuantumRealization, Failure> {
        realization_from_value(h, self.json(path)?).map_err(|e| Failure::input(format!("{path}: {e}")))
    }
}

#[derive(Debug)]
struct Failure {
    status: i32,
    message: String,
    report: Option<Value>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            status: EXIT_INPUT,
            message: message.into(),
            report: None,
        }
    }

    fn domain(message: impl Into<String>, report: Option<Value>) -> Self {
        Self {
            status: EXIT_NEGATIVE,
            message: message.into(),
            report,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::domain(e.to_string(), None)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Output document plus exit status.
struct Outcome {
    value: Value,
    status: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Self { value, status: EXIT_OK }
    }
}

fn model_file(h: &ContextualityScenario, p: &ProbabilisticModel) -> Value {
    to_value(&ModelFile::from_model(h, p))
}

fn parse_structure(text: &str) -> Result<BellStructure, Failure> {
    BellStructure::parse(text).map_err(|e| Failure::input(format!("--structure: {e}")))
}

fn execute(cmd: &Command, inputs: &mut Inputs<'_>) -> Result<Outcome, Failure> {
    match cmd {
        Command::Validate { scenario, model } => {
            let value = inputs.json(scenario)?;
            let file = serde_json::from_value(match value {
                Value::Object(ref m) if !m.contains_key("vertices") && m.contains_key("scenario") => m["scenario"].clone(),
                other => other,
            })
            .map_err(|e| Failure::input(format!("{scenario}: {e}")))?;
            let crate::scenario::ScenarioFile { vertices, edges } = file;
            let h = ContextualityScenario::unchecked(vertices, edges).map_err(|e| Failure::input(format!("{scenario}: {e}")))?;
            let violations = h.validate();
            let mut out = json!({ "valid": violations.is_empty(), "violations": to_value(&violations) });
            let mut ok = violations.is_empty();
            if let Some(path) = model {
                let p = inputs.model(&h, path)?;
                let mv = validate_model(&h, &p);
                ok &= mv.is_empty();
                out["model"] = json!({ "valid": mv.is_empty(), "violations": to_value(&mv) });
            }
            Ok(Outcome {
                value: out,
                status: if ok { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
        Command::Vertices { scenario, method } => {
            let h = inputs.scenario(scenario)?;
            let set = enumerate_extremal(&h, (*method).into())?;
            let vertices: Vec<Value> = set
                .iter()
                .map(|v| {
                    let p = ProbabilisticModel::new(v.clone());
                    let mut m = model_file(&h, &p);
                    m["vector"] = json!(format_vector(v));
                    m["deterministic"] = json!(p.is_deterministic());
                    m
                })
                .collect();
            Ok(Outcome::ok(json!({ "count": vertices.len(), "vertices": vertices })))
        }
        Command::Classify { scenario, model } => {
            let h = inputs.scenario(scenario)?;
            let p = inputs.model(&h, model)?;
            let report = classify_model(&h, &p)?;
            let status = if report.valid { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(Outcome {
                value: to_value(&report),
                status,
            })
        }
        Command::Deterministic { scenario } => {
            let h = inputs.scenario(scenario)?;
            let models: Vec<Value> = enumerate_deterministic(&h)
                .iter()
                .map(|d| model_file(&h, &d.to_model(h.num_vertices())))
                .collect();
            Ok(Outcome::ok(json!({ "count": models.len(), "models": models })))
        }
        Command::Bell { structure } => {
            let s = parse_structure(structure)?;
            let (h, labeling) = bell_scenario(&s).map_err(|e| Failure::input(e.to_string()))?;
            let labels: Vec<Value> = labeling
                .vertices()
                .iter()
                .map(|v| json!({ "label": v.label(), "outcomes": v.outcomes, "settings": v.settings }))
                .collect();
            Ok(Outcome::ok(json!({
                "structure": s.to_text(),
                "scenario": to_value(&h.to_file()),
                "labeling": labels,
            })))
        }
        Command::Prbox { structure } => {
            let s = parse_structure(structure)?;
            let pr = pr_box(&s).map_err(|e| Failure::input(e.to_string()))?;
            Ok(Outcome::ok(to_value(&pr.to_file())))
        }
        Command::Certify {
            scenario,
            model,
            realization,
            tol,
            dim,
            rank,
            expect_trivial,
        } => {
            let h = inputs.scenario(scenario)?;
            let p = inputs.model(&h, model)?;
            let tolerances = Tolerances {
                cert: *tol,
                ..Tolerances::default()
            };
            let r = match realization {
                Some(path) => inputs.realization(&h, path)?,
                None => make_trivial_realization(&h, &p, *dim, rank.unwrap_or(*dim), None, &LowerBlocks::Scaled, &tolerances)?,
            };
            // Checked at the certificate tolerance: search output is only
            // accurate to its own convergence tolerance.
            let violations = validate_realization(&h, &r, &Tolerances::uniform(tol.max(Tolerances::default().sum)));
            if !violations.is_empty() {
                return Err(Failure::domain(
                    "realization is invalid",
                    Some(json!({ "valid": false, "violations": to_value(&violations) })),
                ));
            }
            let cert = certify_trivial(&h, &p, &r, &tolerances)?;
            let status = if *expect_trivial && !cert.trivial { EXIT_NEGATIVE } else { EXIT_OK };
            Ok(Outcome {
                value: json!({ "certificate": to_value(&cert), "realization": to_value(&r.to_file(&h)) }),
                status,
            })
        }
        Command::Projective { scenario, realization, tol } => {
            let h = inputs.scenario(scenario)?;
            let r = inputs.realization(&h, realization)?;
            let report = is_projective_realization(&r, *tol);
            let per_vertex: Vec<Value> = h
                .labels()
                .iter()
                .zip(report.residuals.iter().zip(&report.projective))
                .map(|(l, (res, ok))| json!({ "vertex": l, "residual": res, "projective": ok }))
                .collect();
            Ok(Outcome::ok(json!({ "projective": report.all_projective, "vertices": per_vertex })))
        }
        Command::Dilate {
            scenario,
            realization,
            indexing,
            tol,
        } => {
            let h = inputs.scenario(scenario)?;
            let r = inputs.realization(&h, realization)?;
            let indexing = match indexing {
                None => OutcomeIndexing::Canonical,
                Some(path) => OutcomeIndexing::Explicit(
                    serde_json::from_value(inputs.json(path)?).map_err(|e| Failure::input(format!("{path}: {e}")))?,
                ),
            };
            let tolerances = Tolerances::uniform(*tol);
            let mut edges = Vec::new();
            for (i, edge) in h.edges().iter().enumerate() {
                let povm: Vec<_> = edge.iter().map(|&v| r.effects[v].clone()).collect();
                let dil = naimark_dilate(&povm, &tolerances)?;
                edges.push(json!({
                    "edge": i,
                    "vertices": h.edge_labels(i),
                    "dilation": to_value(&dil),
                    "isometry_error": dil.isometry_error(),
                    "idempotence_error": dil.idempotence_error(),
                    "completeness_error": dil.completeness_error(),
                    "reconstruction_error": dil.reconstruction_error(&povm),
                }));
            }
            let consistency = check_dilation_consistency(&h, &r, &indexing, &tolerances)?;
            Ok(Outcome::ok(json!({ "edges": edges, "consistency": to_value(&consistency) })))
        }
        Command::Search {
            scenario,
            model,
            dim,
            tol,
            max_iter,
            seed,
            runs,
            state,
            expect_trivial,
        } => {
            let h = inputs.scenario(scenario)?;
            let p = inputs.model(&h, model)?;
            if *runs == 0 {
                return Err(Failure::input("--runs must be at least 1"));
            }
            let configs: Vec<SearchConfig> = (0..*runs as u64)
                .map(|k| {
                    let s = seed.wrapping_add(k);
                    let state = match state {
                        StateArg::Mixed => StateChoice::MaximallyMixed,
                        StateArg::Random => StateChoice::Matrix(random_full_rank_state(*dim, s)),
                    };
                    SearchConfig {
                        max_iter: *max_iter,
                        tol: *tol,
                        ..SearchConfig::new(*dim).with_seed(s).with_state(state)
                    }
                })
                .collect();
            let results: Vec<Result<Value, Error>> = configs
                .par_iter()
                .map(|cfg| {
                    let res = dykstra_find_realization(&h, &p, cfg)?;
                    let r = res.realization();
                    let check = Tolerances::uniform(10.0 * cfg.tol);
                    let cert = certify_trivial(&h, &p, &r, &Tolerances::default())?;
                    Ok(json!({
                        "seed": cfg.seed,
                        "converged": res.converged,
                        "iterations": res.iterations,
                        "affine_residual": res.affine_residual,
                        "psd_residual": res.psd_residual,
                        "realization": to_value(&r.to_file(&h)),
                        "validation": to_value(&validate_realization(&h, &r, &check)),
                        "certificate": to_value(&cert),
                    }))
                })
                .collect();
            let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
            let all_good = results
                .iter()
                .all(|r| r["converged"] == json!(true) && r["certificate"]["trivial"] == json!(true));
            let status = if *expect_trivial && !all_good { EXIT_NEGATIVE } else { EXIT_OK };
            let value = if results.len() == 1 {
                results.into_iter().next().expect("one run")
            } else {
                json!({ "runs": results })
            };
            Ok(Outcome { value, status })
        }
        Command::Nullspace { scenario } => {
            let h = inputs.scenario(scenario)?;
            let a = h.incidence_matrix();
            let basis = null_space(&a);
            let vectors: Vec<Value> = basis
                .iter()
                .map(|v| json!({ "vector": format_vector(v), "entries": v.iter().map(format_rational).collect::<Vec<_>>() }))
                .collect();
            Ok(Outcome::ok(json!({
                "rank": a.rank(),
                "dimension": basis.len(),
                "basis": vectors,
            })))
        }
    }
}

fn render(value: &Value, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return status;
        }
    };
    let mut inputs = Inputs {
        stdin,
        stdin_used: false,
    };
    match execute(&cli.command, &mut inputs) {
        Ok(outcome) => match emit(cli.output.as_deref(), &render(&outcome.value, cli.pretty), stdout) {
            Ok(()) => outcome.status,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                EXIT_INPUT
            }
        },
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            if let Some(report) = f.report {
                let _ = emit(cli.output.as_deref(), &render(&report, cli.pretty), stdout);
            }
            f.status
        }
    }
}
