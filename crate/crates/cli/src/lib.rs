//! Command implementations behind the `moyforge` binary. Every command
//! produces a [`RunReport`] and an exit status.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use moyforge::graph::CanonicalForm;
use moyforge::knot::{self, InvariantError};
use moyforge::rewrite::{EngineStats, TraceStep};
use moyforge::states::count_colorings_exhaustive;
use moyforge::verify::{self, SUITES};
use moyforge::{count_colorings, ColoredGraph, Convention, Engine, EngineConfig, EngineError, LaurentPoly};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Graphs with at most this many edges are also counted by brute force
/// under `chi --cross-check`.
const EXHAUSTIVE_EDGE_LIMIT: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "moyforge", version, about = "Evaluate MOY graph polynomials, state counts and sl(N) link invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Include the rewrite derivation in the report.
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polynomial P_N of a closed graph.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        /// Overrides the "N" field of the graph file.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Number of subset colorings, the value of P_N at q = 1.
    Chi {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        n: Option<u32>,
        /// Also evaluate the polynomial and compare at q = 1.
        #[arg(long)]
        cross_check: bool,
    },
    /// sl(N) invariant of a link given as PD code.
    Knot {
        /// Crossings as X[a,b,c,d] / Y[a,b,c,d] and circles as O[k], separated by ';'.
        #[arg(long, conflicts_with = "pd_file", required_unless_present = "pd_file")]
        pd: Option<String>,
        /// File holding the PD code.
        #[arg(long)]
        pd_file: Option<PathBuf>,
        #[arg(long)]
        n: u32,
        #[arg(long, help = "Divide by the unknot value [N].")]
        normalize: bool,
        #[arg(long, value_enum, default_value_t = ConventionArg::A)]
        convention: ConventionArg,
    },
    /// Run a named property suite on generated inputs.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        size: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::A => Convention::A,
            ConventionArg::B => Convention::B,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

/// `result` is present exactly when `exit_code` is 0; otherwise `error` is.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub input_digest: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub timing_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<EngineStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The result polynomial, when the payload is one.
    pub fn polynomial(&self) -> Option<LaurentPoly> {
        serde_json::from_value(self.result.clone()?).ok()
    }
}

struct Failure {
    code: i32,
    info: ErrorInfo,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, info: ErrorInfo { kind: "input", message: message.to_string(), canonical_form: None, details: None } }
    }

    fn irreducible(message: impl ToString, canonical: &CanonicalForm) -> Self {
        Failure {
            code: EXIT_INCOMPLETE,
            info: ErrorInfo { kind: "irreducible", message: message.to_string(), canonical_form: Some(canonical.0.clone()), details: None },
        }
    }

    fn violation(message: impl ToString, details: Value) -> Self {
        Failure { code: EXIT_VIOLATION, info: ErrorInfo { kind: "violation", message: message.to_string(), canonical_form: None, details: Some(details) } }
    }

    fn engine(e: EngineError) -> Self {
        match &e {
            EngineError::Irreducible { canonical } => Failure::irreducible(&e, canonical),
            _ => Failure::input(e),
        }
    }
}

/// Exact integers above 2^53 are written as strings so JSON readers that
/// use doubles do not round them.
pub fn count_json(c: &BigUint) -> Value {
    match u64::try_from(c) {
        Ok(v) if v <= 1 << 53 => json!(v),
        _ => json!(c.to_string()),
    }
}

fn digest(bytes: &[u8]) -> String {
    let hex: String = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_graph(bytes: &[u8], n: Option<u32>) -> Result<(ColoredGraph, u32), Failure> {
    let text = std::str::from_utf8(bytes).map_err(Failure::input)?;
    let (g, file_n) = ColoredGraph::from_json(text).map_err(Failure::input)?;
    let n = n.or(file_n).ok_or_else(|| Failure::input("N is neither given by --n nor stored in the graph file"))?;
    if n < 1 {
        return Err(Failure::input("N must be positive"));
    }
    g.validate(n).map_err(Failure::input)?;
    if !g.is_closed() {
        return Err(Failure::input("graph has boundary legs"));
    }
    Ok((g, n))
}

struct Outcome {
    n: Option<u32>,
    digest: String,
    result: Result<Value, Failure>,
    stats: Option<EngineStats>,
    trace: Option<Vec<TraceStep>>,
}

impl Outcome {
    fn failed(digest: String, n: Option<u32>, f: Failure) -> Self {
        Outcome { n, digest, result: Err(f), stats: None, trace: None }
    }
}

fn engine(trace: bool) -> Engine {
    Engine::new(EngineConfig { trace, ..Default::default() })
}

fn finish(e: &Engine, trace: bool, n: u32, digest: String, result: Result<Value, Failure>) -> Outcome {
    Outcome { n: Some(n), digest, result, stats: Some(e.stats()), trace: trace.then(|| e.take_trace()) }
}

fn eval(graph: &Path, n: Option<u32>, trace: bool) -> Outcome {
    let bytes = match read_input(graph) {
        Ok(b) => b,
        Err(f) => return Outcome::failed(String::new(), n, f),
    };
    let d = digest(&bytes);
    let (g, n) = match load_graph(&bytes, n) {
        Ok(x) => x,
        Err(f) => return Outcome::failed(d, n, f),
    };
    let e = engine(trace);
    let result = e.evaluate(&g, n).map_err(Failure::engine).map(|p| serde_json::to_value(p).expect("polynomial json"));
    finish(&e, trace, n, d, result)
}

fn chi(graph: &Path, n: Option<u32>, cross_check: bool, trace: bool) -> Outcome {
    let bytes = match read_input(graph) {
        Ok(b) => b,
        Err(f) => return Outcome::failed(String::new(), n, f),
    };
    let d = digest(&bytes);
    let (g, n) = match load_graph(&bytes, n) {
        Ok(x) => x,
        Err(f) => return Outcome::failed(d, n, f),
    };
    if n > 63 {
        return Outcome::failed(d, Some(n), Failure::input("state counting supports N up to 63"));
    }
    let count = count_colorings(&g, n);
    if !cross_check {
        return Outcome { n: Some(n), digest: d, result: Ok(count_json(&count)), stats: None, trace: None };
    }
    let e = engine(trace);
    let result = (|| {
        let p = e.evaluate(&g, n).map_err(Failure::engine)?;
        let at_one = p.eval_at_one();
        let mut checks = json!({ "polynomial_at_one": at_one.to_string() });
        let mut agree = at_one == count.clone().into();
        if g.edges.len() <= EXHAUSTIVE_EDGE_LIMIT && n <= 16 {
            let brute = count_colorings_exhaustive(&g, n);
            checks["exhaustive"] = json!(brute);
            agree &= BigUint::from(brute) == count;
        }
        if agree {
            Ok(count_json(&count))
        } else {
            checks["count"] = json!(count.to_string());
            Err(Failure::violation("state count and polynomial at q = 1 disagree", checks))
        }
    })();
    finish(&e, trace, n, d, result)
}

fn knot_cmd(pd: Option<&str>, pd_file: Option<&Path>, n: u32, normalize: bool, conv: Convention, trace: bool) -> Outcome {
    let text = match (pd, pd_file) {
        (Some(s), _) => s.to_string(),
        (None, Some(p)) => match read_input(p).and_then(|b| String::from_utf8(b).map_err(Failure::input)) {
            Ok(s) => s,
            Err(f) => return Outcome::failed(String::new(), Some(n), f),
        },
        (None, None) => return Outcome::failed(String::new(), Some(n), Failure::input("one of --pd or --pd-file is required")),
    };
    let d = digest(text.trim().as_bytes());
    if n < 1 {
        return Outcome::failed(d, Some(n), Failure::input("N must be positive"));
    }
    let diagram = match knot::parse_pd(&text) {
        Ok(x) => x,
        Err(e) => return Outcome::failed(d, Some(n), Failure::input(e)),
    };
    let e = engine(trace);
    let result = knot::link_invariant_with(&e, &diagram, n, conv)
        .and_then(|p| if normalize { knot::normalize(&p, n) } else { Ok(p) })
        .map(|p| serde_json::to_value(p).expect("polynomial json"))
        .map_err(|err| match (&err, err.canonical()) {
            (_, Some(c)) => Failure::irreducible(&err, c),
            (InvariantError::NotDivisible, _) => Failure::violation(&err, json!({ "normalize": true })),
            _ => Failure::input(&err),
        });
    finish(&e, trace, n, d, result)
}

fn verify_cmd(suite: &str, seed: u64, size: usize) -> Outcome {
    let d = digest(format!("{suite}:{seed}:{size}").as_bytes());
    let result = match verify::run_suite(suite, seed, size) {
        Err(e) => Err(Failure::input(e)),
        Ok(r) => {
            let table = serde_json::to_value(&r).expect("suite json");
            if r.passed() {
                Ok(table)
            } else {
                Err(Failure::violation(format!("suite {suite} has failing checks"), table))
            }
        }
    };
    Outcome { n: None, digest: d, result, stats: None, trace: None }
}

/// Runs a parsed command. `echo` is recorded verbatim in the report.
pub fn execute(cli: &Cli, echo: Vec<String>) -> RunReport {
    let start = Instant::now();
    let run = || match &cli.command {
        Command::Eval { graph, n } => eval(graph, *n, cli.trace),
        Command::Chi { graph, n, cross_check } => chi(graph, *n, *cross_check, cli.trace),
        Command::Knot { pd, pd_file, n, normalize, convention } => {
            knot_cmd(pd.as_deref(), pd_file.as_deref(), *n, *normalize, (*convention).into(), cli.trace)
        }
        Command::Verify { suite, seed, size } => verify_cmd(suite, *seed, *size),
    };
    let outcome = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Outcome::failed(String::new(), None, Failure::input(e)),
        },
        None => run(),
    };
    let (exit_code, result, error) = match outcome.result {
        Ok(v) => (EXIT_OK, Some(v), None),
        Err(f) => (f.code, None, Some(f.info)),
    };
    RunReport {
        command: echo,
        n: outcome.n,
        input_digest: outcome.digest,
        exit_code,
        result,
        error,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
        stats: outcome.stats,
        trace: outcome.trace,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I) -> Result<RunReport, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args)?;
    Ok(execute(&cli, args.into_iter().skip(1).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_beyond_53_bits_are_strings() {
        assert_eq!(count_json(&BigUint::from(1u64 << 53)), json!(1u64 << 53));
        assert_eq!(count_json(&BigUint::from((1u64 << 53) + 1)), json!("9007199254740993"));
        assert_eq!(count_json(&(BigUint::from(u64::MAX) * 3u32)), json!("55340232221128654845"));
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(b"abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert!(run(["moyforge", "verify", "nope"]).is_err());
    }
}
