//! Command-line front end: argument parsing, dispatch and JSON rendering.
//!
//! Every command prints one JSON document on stdout. Diagnostics go to
//! stderr. Exit codes: 0 success, 1 a check failed, 2 usage or argument
//! error, 3 a size limit was hit.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use orthoinv_core::invariant_algebra::{
    corollary1_identity, corollary2_check, evaluate_combination_exact, extract_basis, gram_row_sum,
    sft_relation,
};
use orthoinv_core::moments::{rational_string, veronese_expectation};
use orthoinv_core::montecarlo::{estimate_query_moment, DEFAULT_SAMPLES, DEFAULT_SEED};
use orthoinv_core::weingarten::{compare_methods, McSummary};
use orthoinv_core::{
    enumerate_pairings, exact_moment, gram_matrix, mu, p_poly, pairing_count, theorem3_moment,
    Error, Limits, MomentQuery, SamplerConfig,
};
use serde_json::{json, Value};

pub mod verify;

/// Environment variable overriding the pairing enumeration cap.
pub const MAX_K_ENV: &str = "ORTHOINV_MAX_K";

#[derive(Debug, Parser)]
#[command(
    name = "orthoinv",
    version,
    about = "Exact moments and invariant tensors of the orthogonal group O(n)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Also write the JSON output to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Theorem3,
    Exact,
    Mc,
    All,
}

#[derive(Debug, Clone, clap::Args)]
pub struct McArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the pairings of {1, ..., 2k} in canonical order.
    Pairings {
        #[arg(long)]
        k: usize,
    },
    /// Gram matrix of the standard invariants, symbolic or evaluated at n.
    Gram {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Common row sum of the Gram matrix, compared with n(n+2)...(n+2k-2).
    RowSum {
        #[arg(long)]
        k: usize,
    },
    /// E(<x, y>^(2k)) for independent uniform unit vectors.
    Mu {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// E(x^(⊗m)) for a uniform unit vector, as a combination of invariants.
    Veronese {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Matrix-entry moment of a Haar-random orthogonal matrix.
    Moment {
        #[arg(long)]
        n: usize,
        /// Factors as "i,j;i,j;..." (1-based).
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value_t = Method::All)]
        method: Method,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Alternating relation among the invariants of order 2k, evaluated at n.
    Sft {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Greedy basis of the invariant space of order 2k at dimension n.
    Basis {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Basis identity: Σ s_i I(P_i) against μ times the averaged invariant.
    Corollary1 {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Row multisets of the Gram matrix against M_1 ⊗ M_3 ⊗ ... ⊗ M_(2k-1).
    Corollary2 {
        #[arg(long)]
        k: usize,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        #[command(flatten)]
        mc: McArgs,
    },
}

/// A command's JSON output and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub passed: bool,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, passed: true }
    }
}

/// Reads the enumeration cap override, if set.
pub fn limits_from_env() -> Result<Limits, Error> {
    let mut limits = Limits::default();
    if let Ok(raw) = std::env::var(MAX_K_ENV) {
        limits.max_pairing_k = raw.trim().parse().map_err(|_| {
            Error::Argument(format!(
                "{MAX_K_ENV} must be a non-negative integer, got {raw:?}"
            ))
        })?;
    }
    Ok(limits)
}

fn sampler(n: usize, mc: &McArgs) -> Result<SamplerConfig, Error> {
    Ok(SamplerConfig::new(n, mc.seed, mc.samples)?.with_workers(mc.workers))
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value, Error> {
    serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))
}

pub fn execute(command: &Command, limits: &Limits) -> Result<Outcome, Error> {
    match command {
        Command::Pairings { k } => Ok(Outcome::ok(to_value(&enumerate_pairings(*k, limits)?)?)),
        Command::Gram { k, n: None } => Ok(Outcome::ok(gram_matrix(*k, limits)?.symbolic_json())),
        Command::Gram { k, n: Some(n) } => {
            if *n == 0 {
                return Err(Error::Argument("dimension n must be at least 1".into()));
            }
            Ok(Outcome::ok(gram_matrix(*k, limits)?.evaluated_json(*n)))
        }
        Command::RowSum { k } => {
            let row_sum = gram_row_sum(*k, limits)?;
            let expected = p_poly(*k);
            Ok(Outcome {
                passed: row_sum == expected,
                json: json!({
                    "k": k,
                    "row_sum": row_sum.to_string(),
                    "expected": expected.to_string(),
                    "equal": row_sum == expected,
                }),
            })
        }
        Command::Mu { k, n } => Ok(Outcome::ok(json!({
            "k": k,
            "n": n,
            "mu": rational_string(&mu(*k, *n)?),
            "pairings": pairing_count(*k).to_string(),
            "p": p_poly(*k).eval_usize(*n).to_string(),
        }))),
        Command::Veronese { m, n } => Ok(Outcome::ok(json!({
            "m": m,
            "n": n,
            "expectation": to_value(&veronese_expectation(*m, *n, limits)?)?,
        }))),
        Command::Moment { n, q, method, mc } => moment(*n, q, *method, mc, limits),
        Command::Sft { k, n } => {
            if *n == 0 {
                return Err(Error::Argument("dimension n must be at least 1".into()));
            }
            let relation = sft_relation(*k, None)?;
            let entries = evaluate_combination_exact(&relation, *n, limits)?;
            let nonzero = entries
                .iter()
                .filter(|e| !num_traits::Zero::is_zero(*e))
                .count();
            Ok(Outcome::ok(json!({
                "k": k,
                "n": n,
                "terms": relation.len(),
                "relation": to_value(&relation)?,
                "nonzero_entries": nonzero,
                "vanishes": nonzero == 0,
            })))
        }
        Command::Basis { k, n } => {
            if *n == 0 {
                return Err(Error::Argument("dimension n must be at least 1".into()));
            }
            let basis = extract_basis(*k, *n, limits)?;
            Ok(Outcome::ok(
                json!({ "k": k, "n": n, "size": basis.len(), "basis": to_value(&basis)? }),
            ))
        }
        Command::Corollary1 { k, n } => {
            let report = corollary1_identity(*k, *n, limits)?;
            let passed = num_traits::Zero::is_zero(&report.residual);
            let mut json = to_value(&report)?;
            json["passed"] = passed.into();
            Ok(Outcome { json, passed })
        }
        Command::Corollary2 { k } => {
            let report = corollary2_check(*k, limits)?;
            Ok(Outcome {
                passed: report.passed,
                json: to_value(&report)?,
            })
        }
        Command::Verify { suite, mc } => {
            let report = verify::run(*suite, mc, limits);
            Ok(Outcome {
                passed: !report.has_failures(),
                json: to_value(&report)?,
            })
        }
    }
}

fn moment(
    n: usize,
    q: &str,
    method: Method,
    mc: &McArgs,
    limits: &Limits,
) -> Result<Outcome, Error> {
    let query = MomentQuery::parse(q, n)?;
    let base = |key: &str, value: Value| json!({ "query": to_value(&query).unwrap_or(Value::Null), "n": n, key: value });
    let json = match method {
        Method::Theorem3 => base(
            "theorem3",
            rational_string(&theorem3_moment(&query, limits)?).into(),
        ),
        Method::Exact => base(
            "exact",
            rational_string(&exact_moment(&query, limits)?).into(),
        ),
        Method::Mc => {
            let config = sampler(n, mc)?;
            let estimate = estimate_query_moment(&query, &config)?;
            base("mc", to_value(&McSummary::new(estimate, &config))?)
        }
        Method::All => to_value(&compare_methods(&query, &sampler(n, mc)?, limits)?)?,
    };
    Ok(Outcome::ok(json))
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Argument(_) => 2,
        Error::SizeLimit(_) => 3,
        Error::Internal(_) => 1,
    }
}

fn error_json(kind: &str, message: &str) -> Value {
    json!({ "error": { "kind": kind, "message": message } })
}

fn emit(json: &Value, out: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(json).map_err(|e| e.to_string())?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

/// Parses `args`, runs the command and prints its output.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let message = e.kind().to_string();
            let _ = emit(&error_json("usage", &message), None);
            return ExitCode::from(2);
        }
    };
    let result = limits_from_env().and_then(|limits| execute(&cli.command, &limits));
    match result {
        Ok(outcome) => {
            if let Err(message) = emit(&outcome.json, cli.out.as_ref()) {
                eprintln!("error: {message}");
                return ExitCode::from(2);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(error) => {
            eprintln!("error: {error}");
            let kind = match error {
                Error::Argument(_) => "argument",
                Error::SizeLimit(_) => "size_limit",
                Error::Internal(_) => "internal",
            };
            let _ = emit(&error_json(kind, &error.to_string()), None);
            ExitCode::from(exit_code_for(&error))
        }
    }
}
