//! Batch front door: compute prices of anarchy, design mechanisms, emit
//! worst-case instances, verify game files, and sweep over n to CSV.
//!
//! Machine-readable output (JSON or RFC 4180 CSV) goes to stdout or the
//! requested file; diagnostics go to stderr. Exit codes are stable:
//! 0 success, 2 invalid input, 3 precondition failure, 4 resource limit,
//! 5 internal or numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use poa_core::basis::{preset_mechanism, preset_welfare, Mechanism, WelfareBasis};
use poa_core::design::optimize_mechanism;
use poa_core::error::Error;
use poa_core::games::GameInstance;
use poa_core::poa::{poa, solve_primal, Method};
use poa_core::witness::{build_worst_case, WitnessGame};

#[derive(Parser)]
#[command(
    name = "poa",
    version,
    about = "Exact price-of-anarchy analysis for resource allocation games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Primal,
    /// Dual over the boundary triples (default).
    Dual,
    /// Dual over the full index set.
    DualFull,
    Corollary,
    Explicit,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Primal => Method::Primal,
            MethodArg::Dual => Method::DualBoundary,
            MethodArg::DualFull => Method::DualFull,
            MethodArg::Corollary => Method::Corollary,
            MethodArg::Explicit => Method::Explicit,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the price of anarchy of (f, w, n).
    Compute {
        /// Welfare basis: covering, coverage, an inline JSON array, or a file.
        #[arg(long)]
        w: String,
        /// Success probability for the coverage preset.
        #[arg(long)]
        p: Option<f64>,
        /// Mechanism: es, mc, gairing, an inline JSON array, or a file.
        #[arg(long)]
        f: String,
        /// Maximum number of agents.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "dual")]
        method: MethodArg,
        /// Write the JSON payload here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the mechanism maximizing the price of anarchy for (w, n).
    Design {
        #[arg(long)]
        w: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a worst-case game instance realizing the LP optimum of (f, w, n).
    Instance {
        #[arg(long)]
        w: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        f: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a game file: equilibria, efficiency ratio, budget balance,
    /// designated-allocation checks, and optionally a smoothness certificate.
    Verify {
        /// Game JSON (plain game or an `instance` payload).
        #[arg(long)]
        game: PathBuf,
        #[arg(long, requires = "mu")]
        lambda: Option<f64>,
        #[arg(long, requires = "lambda")]
        mu: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the price of anarchy for every n in a range and write CSV.
    Sweep {
        #[arg(long)]
        w: String,
        #[arg(long)]
        p: Option<f64>,
        /// Mechanism per n: a preset, inline array, file, or `opt` to run
        /// the design program at each n.
        #[arg(long)]
        f: String,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        csv: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) => 2,
            Error::PreconditionFailed(_) => 3,
            Error::ResourceLimit(_) => 4,
            Error::NumericFailure(_) | Error::Internal(_) => 5,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute {
            w,
            p,
            f,
            n,
            method,
            out,
        } => {
            let basis = parse_basis(&w, p, n)?;
            let mechanism = parse_mechanism(&f, &basis, n)?;
            let report = poa(&mechanism, &basis, n, method.into())?;
            emit(
                serde_json::to_value(&report).expect("report serializes"),
                out.as_deref(),
            )
        }
        Command::Design { w, p, n, out } => {
            let basis = parse_basis(&w, p, n)?;
            let result = optimize_mechanism(&basis, n)?;
            emit(
                serde_json::to_value(&result).expect("result serializes"),
                out.as_deref(),
            )
        }
        Command::Instance { w, p, f, n, out } => {
            let basis = parse_basis(&w, p, n)?;
            let mechanism = parse_mechanism(&f, &basis, n)?;
            let primal = solve_primal(&mechanism, &basis, n)?;
            let witness = build_worst_case(&primal.theta, &mechanism, &basis, n)?;
            emit(
                serde_json::to_value(&witness).expect("witness serializes"),
                out.as_deref(),
            )
        }
        Command::Verify {
            game,
            lambda,
            mu,
            out,
        } => {
            let payload = verify(&game, lambda.zip(mu))?;
            emit(payload, out.as_deref())
        }
        Command::Sweep {
            w,
            p,
            f,
            n_min,
            n_max,
            csv,
        } => sweep(&w, p, &f, n_min, n_max, &csv),
    }
}

/// Inline vector literals accepted for --f/--w; both the ASCII hyphen and
/// the typographic minus sign are accepted.
fn parse_inline_vector(text: &str) -> Result<Vec<f64>, Failure> {
    let normalized = text.replace('\u{2212}', "-");
    serde_json::from_str::<Vec<f64>>(&normalized)
        .map_err(|e| Failure::new(2, format!("malformed inline vector '{text}': {e}")))
}

fn parse_basis(spec: &str, p: Option<f64>, n: usize) -> Result<WelfareBasis, Failure> {
    match spec {
        "covering" | "coverage" => Ok(preset_welfare(spec, p, n)?),
        text if text.trim_start().starts_with('[') => {
            Ok(WelfareBasis::new(parse_inline_vector(text)?)?)
        }
        path => {
            let content = read_file(Path::new(path))?;
            serde_json::from_str::<WelfareBasis>(&content)
                .map_err(|e| Failure::new(2, format!("malformed welfare basis in {path}: {e}")))
        }
    }
}

fn parse_mechanism(spec: &str, basis: &WelfareBasis, n: usize) -> Result<Mechanism, Failure> {
    match spec {
        "es" | "equal_share" | "mc" | "marginal_contribution" | "gairing"
        | "gairing_covering" => Ok(preset_mechanism(spec, Some(basis), None, n)?),
        text if text.trim_start().starts_with('[') => {
            Ok(Mechanism::new(parse_inline_vector(text)?)?)
        }
        path => {
            let content = read_file(Path::new(path))?;
            serde_json::from_str::<Mechanism>(&content)
                .map_err(|e| Failure::new(2, format!("malformed mechanism in {path}: {e}")))
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))
}

fn verify(path: &Path, smoothness: Option<(f64, f64)>) -> Result<Value, Failure> {
    let content = read_file(path)?;
    let raw: Value = serde_json::from_str(&content)
        .map_err(|e| Failure::new(2, format!("malformed JSON in {}: {e}", path.display())))?;
    let witness: Option<WitnessGame> = if raw.get("designated_equilibrium").is_some() {
        Some(serde_json::from_value(raw.clone()).map_err(|e| {
            Failure::new(
                2,
                format!("malformed witness game in {}: {e}", path.display()),
            )
        })?)
    } else {
        None
    };
    let game: GameInstance = match &witness {
        Some(w) => w.game.clone(),
        None => serde_json::from_value(raw)
            .map_err(|e| Failure::new(2, format!("malformed game in {}: {e}", path.display())))?,
    };

    let equilibria = game.enumerate_equilibria()?;
    let mut min_eq_welfare = f64::INFINITY;
    for eq in &equilibria {
        min_eq_welfare = min_eq_welfare.min(game.welfare(eq)?);
    }
    let max_welfare = game.max_welfare()?;
    let ratio = game.poa_of_game()?;
    let (max_gap, min_gap) = game.budget_balance_gap()?;

    let mut payload = Map::new();
    payload.insert("n".into(), json!(game.n()));
    payload.insert("num_resources".into(), json!(game.num_resources()));
    payload.insert("num_equilibria".into(), json!(equilibria.len()));
    payload.insert("min_equilibrium_welfare".into(), json!(min_eq_welfare));
    payload.insert("max_welfare".into(), json!(max_welfare));
    payload.insert("poa".into(), json!(ratio));
    payload.insert(
        "budget_balance".into(),
        json!({"max_gap": max_gap, "min_gap": min_gap}),
    );
    match &witness {
        Some(w) => {
            let eq_nash = game.is_nash(&w.designated_equilibrium)?;
            payload.insert("designated_equilibrium_is_nash".into(), json!(eq_nash));
            payload.insert(
                "designated_equilibrium_welfare".into(),
                json!(game.welfare(&w.designated_equilibrium)?),
            );
            payload.insert(
                "designated_optimum_welfare".into(),
                json!(game.welfare(&w.designated_optimum)?),
            );
            payload.insert("predicted_ratio".into(), json!(w.predicted_ratio));
        }
        None => {
            payload.insert("designated_equilibrium_is_nash".into(), Value::Null);
            payload.insert("predicted_ratio".into(), Value::Null);
        }
    }
    match smoothness {
        Some((lambda, mu)) => {
            let report = game.check_smoothness(lambda, mu)?;
            payload.insert(
                "smoothness".into(),
                json!({
                    "lambda": lambda,
                    "mu": mu,
                    "holds": report.holds,
                    "worst_violation": report.worst_violation,
                }),
            );
        }
        None => {
            payload.insert("smoothness".into(), Value::Null);
        }
    }
    Ok(Value::Object(payload))
}

fn sweep(
    w_spec: &str,
    p: Option<f64>,
    f_spec: &str,
    n_min: usize,
    n_max: usize,
    csv: &Path,
) -> Result<(), Failure> {
    if n_min == 0 || n_min > n_max {
        return Err(Failure::new(
            2,
            format!("invalid range: need 1 <= n-min <= n-max, got {n_min}..{n_max}"),
        ));
    }
    let mut rows = String::from("n,poa,lambda_star,mu_star,f_entries\n");
    for n in n_min..=n_max {
        let basis = parse_basis(w_spec, p, n)?;
        let mechanism = if f_spec == "opt" {
            optimize_mechanism(&basis, n)?.f_opt
        } else {
            parse_mechanism(f_spec, &basis, n)?
        };
        let report = poa(&mechanism, &basis, n, Method::DualBoundary)?;
        let f_entries = Value::Array(
            mechanism.values()[..n.min(mechanism.n())]
                .iter()
                .map(|&v| number(round12(v)))
                .collect(),
        );
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            n,
            fmt_real(report.poa),
            report.lambda_star.map_or(String::new(), fmt_real),
            report.mu_star.map_or(String::new(), fmt_real),
            csv_escape(&f_entries.to_string()),
        ));
    }
    std::fs::write(csv, rows)
        .map_err(|e| Failure::new(2, format!("cannot write {}: {e}", csv.display())))
}

/// RFC 4180: quote the field and double any embedded quotes.
fn csv_escape(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Rounds to 12 significant digits; printing the result with the shortest
/// round-trip formatter then shows at most 12 digits.
fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("rounded float parses")
}

fn fmt_real(x: f64) -> String {
    format!("{}", round12(x))
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Rounds every float in the payload to 12 significant digits.
fn round_values(v: Value) -> Value {
    match v {
        Value::Number(num) => {
            if num.is_f64() {
                number(round12(num.as_f64().unwrap()))
            } else {
                Value::Number(num)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_values).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, val)| (k, round_values(val)))
                .collect(),
        ),
        other => other,
    }
}

fn emit(payload: Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string(&round_values(payload)).expect("JSON serializes");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(2, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
