//! Argument parsing, configuration and report emission for the `iwasawa`
//! command.
//!
//! Exit codes: 0 success, 1 computational failure or invalid request,
//! 2 usage error, 3 unmet or undecided hypothesis, 4 input/output, parse or data
//! file error.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use kida_core::cache::{TraceCache, CACHE_DIR_ENV};
use kida_core::classify::{write_classification_csv, Classifier};
use kida_core::density::{alpha_closed_form, alternative_beta, asymptotic_report, predicted_exponent};
use kida_core::euler::{euler_char_factors, induced_series, mu_lambda_vanish, ShaOrder};
use kida_core::fields::{discriminant, enumerate_by_discriminant, CyclicExtension};
use kida_core::kida::{check_hypotheses, lambda_transfer, rank_bound, stable_extension_test, BaseInputs, Gate};
use kida_core::reference::{ingest_reference, ReferenceDataset, ReferenceRecord};
use kida_core::{Error, Result, WeierstrassModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "iwasawa", version, about = "Iwasawa invariants of elliptic curves in cyclic degree-p extensions")]
pub struct Cli {
    /// Directory for the Frobenius-trace cache.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Reference data file; the bundled dataset is used when absent.
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Classify the primes up to a bound.
    Classify {
        #[arg(long, value_parser = parse_model)]
        curve: WeierstrassModel,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
    },
    /// Check hypotheses and transfer lambda to a cyclic degree-p field.
    Kida {
        #[arg(long, value_parser = parse_model)]
        curve: WeierstrassModel,
        #[arg(long)]
        p: u64,
        /// Ramified primes; listing p itself means wild ramification.
        #[arg(long, value_delimiter = ',', required = true)]
        ramified: Vec<u64>,
        /// Character exponents, one per ramified place (default all 1).
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<u64>>,
        /// lambda over Q; taken from reference data or the Euler
        /// characteristic when omitted.
        #[arg(long)]
        lambda_base: Option<u64>,
        /// Assert that additive primes keep additive reduction in L.
        #[arg(long)]
        acknowledge_additive: bool,
        /// Skip the hypothesis gate.
        #[arg(long)]
        force: bool,
    },
    /// Euler-characteristic factors and the mu = lambda = 0 criterion.
    EulerChar {
        #[arg(long, value_parser = parse_model)]
        curve: WeierstrassModel,
        #[arg(long)]
        p: u64,
        /// Order of the p-part of Sha, or "unknown".
        #[arg(long)]
        sha: Option<String>,
        #[arg(long)]
        analytic_rank: Option<u32>,
    },
    /// List the cyclic degree-p fields up to a discriminant bound.
    EnumerateFields {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        max_disc: BigInt,
    },
    /// Density and counting tables.
    Density {
        #[arg(long, value_parser = parse_model)]
        curve: WeierstrassModel,
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', value_parser = parse_grid_point, default_value = "1e3,1e4,1e5,1e6")]
        grid: Vec<u64>,
    },
    /// Summary of hypotheses, Euler factors and a stable field.
    Report {
        #[arg(long, value_parser = parse_model)]
        curve: WeierstrassModel,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Kida { .. } => "kida",
            Command::EulerChar { .. } => "euler-char",
            Command::EnumerateFields { .. } => "enumerate-fields",
            Command::Density { .. } => "density",
            Command::Report { .. } => "report",
        }
    }
}

fn parse_model(text: &str) -> std::result::Result<WeierstrassModel, String> {
    kida_core::parse_curve(text).map_err(|e| e.to_string())
}

/// Accepts integers and forms like `1e5`.
fn parse_grid_point(text: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = text.parse().map_err(|_| format!("{text:?} is not a number"))?;
    if x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("{text:?} is not a positive integer"))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub cache_dir: Option<PathBuf>,
    pub reference: ReferenceDataset,
    pub jobs: Option<usize>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let reference = match &cli.reference {
            Some(path) => ingest_reference(path)?,
            None => ReferenceDataset::bundled(),
        };
        if cli.jobs == Some(0) {
            return Err(Error::InvalidInput("--jobs must be positive".into()));
        }
        Ok(RunConfig {
            command: cli.command,
            cache_dir: cli.cache_dir,
            reference,
            jobs: cli.jobs,
            format: cli.format,
            output: cli.out,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("serializable");
                s.push('\n');
                s
            }
            Output::Csv(s) => s.clone(),
        }
    }

    pub fn emit(&self, dest: Option<&Path>) -> Result<()> {
        let text = self.render();
        match dest {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_hypothesis() => 3,
        Error::Io(_) | Error::Schema { .. } | Error::Parse(_) => 4,
        _ => 1,
    }
}

pub fn run(config: &RunConfig) -> Result<Output> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| dispatch(config))
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA_VERSION, "command": command });
    if let (Some(map), Value::Object(extra)) = (v.as_object_mut(), body) {
        map.extend(extra);
    }
    v
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn classifier(config: &RunConfig, model: &WeierstrassModel, p: u64) -> Result<Classifier> {
    let c = Classifier::new(model, p)?;
    Ok(match &config.cache_dir {
        Some(dir) => {
            let cache = TraceCache::open(dir, c.minimal_model())?;
            c.with_cache(Arc::new(cache))
        }
        None => c,
    })
}

fn external(record: Option<&ReferenceRecord>) -> Value {
    match record {
        Some(r) => json!({
            "analytic_rank": r.analytic_rank,
            "sha_p_order": to_value(&r.sha_p_order),
            "lambda_base": r.lambda_base,
            "mu_base": r.mu_base,
            "source_note": r.source_note,
        }),
        None => Value::Null,
    }
}

fn base_inputs(record: Option<&ReferenceRecord>, acknowledge_additive: bool) -> BaseInputs {
    BaseInputs {
        mu_lambda_zero_at_base: None,
        sha: record.map_or(ShaOrder::Unknown, |r| r.sha_p_order.clone()),
        analytic_rank_zero: record.map(|r| r.analytic_rank == 0),
        acknowledge_additive_stability: acknowledge_additive,
    }
}

fn require_json(config: &RunConfig, command: &str) -> Result<()> {
    if config.format == Format::Csv {
        return Err(Error::InvalidInput(format!("{command} has no CSV output")));
    }
    Ok(())
}

fn dispatch(config: &RunConfig) -> Result<Output> {
    match &config.command {
        Command::Classify { curve, p, bound } => {
            let rows = classifier(config, curve, *p)?.bulk_classify(*bound)?;
            match config.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_classification_csv(&mut buf, &rows)?;
                    Ok(Output::Csv(String::from_utf8(buf).expect("ascii")))
                }
                Format::Json => Ok(Output::Json(envelope(
                    "classify",
                    json!({ "curve": curve.to_string(), "p": p, "bound": bound, "primes": to_value(&rows) }),
                ))),
            }
        }
        Command::Kida { curve, p, ramified, exponents, lambda_base, acknowledge_additive, force } => {
            require_json(config, "kida")?;
            let exps = exponents.clone().unwrap_or_else(|| vec![1; ramified.len()]);
            let ext = CyclicExtension::new(*p, ramified, &exps)?;
            let record = config.reference.lookup(curve, *p);
            let report = check_hypotheses(curve, *p, &ext, &base_inputs(record, *acknowledge_additive))?;
            let lambda_k = match (lambda_base, record.and_then(|r| r.lambda_base)) {
                (Some(l), _) => *l,
                (None, Some(l)) => l,
                (None, None) if report.base_mu_lambda_zero.known_zero() => 0,
                (None, None) => {
                    return Err(Error::Precondition("lambda over Q is unknown; pass --lambda-base".into()))
                }
            };
            let gate = if *force { Gate::Acknowledged } else { Gate::Checked(&report) };
            let result = lambda_transfer(lambda_k, *p, &ext, curve, gate)?;
            let bound = rank_bound(&result);
            let stable = stable_extension_test(curve, *p, &ext)?;
            Ok(Output::Json(envelope(
                "kida",
                json!({
                    "curve": curve.to_string(),
                    "p": p,
                    "extension": ext.to_json(),
                    "hypotheses": to_value(&report),
                    "gate": if *force { "acknowledged" } else { "checked" },
                    "stable_extension": stable,
                    "result": to_value(&result),
                    "rank_bound": to_value(&bound),
                    "external": external(record),
                }),
            )))
        }
        Command::EulerChar { curve, p, sha, analytic_rank } => {
            require_json(config, "euler-char")?;
            let record = config.reference.lookup(curve, *p);
            let sha = match sha.as_deref() {
                None => record.map_or(ShaOrder::Unknown, |r| r.sha_p_order.clone()),
                Some("unknown") => ShaOrder::Unknown,
                Some(s) => {
                    let n: u64 = s.parse().map_err(|_| Error::InvalidInput(format!("--sha {s:?}")))?;
                    ShaOrder::known(n, *p)?
                }
            };
            let rank_zero = analytic_rank.map(|r| r == 0).or(record.map(|r| r.analytic_rank == 0));
            let ef = euler_char_factors(curve, *p, sha, rank_zero)?;
            let vanishing = mu_lambda_vanish(&ef);
            let series = induced_series(&ef)?;
            let bridge = match &series {
                Some(s) => json!({ "series": s.to_json(), "mu_lambda_zero": s.mu_lambda_zero()? }),
                None => Value::Null,
            };
            Ok(Output::Json(envelope(
                "euler-char",
                json!({
                    "curve": curve.to_string(),
                    "p": p,
                    "factors": to_value(&ef),
                    "mu_lambda_vanish": to_value(&vanishing),
                    "bridge": bridge,
                    "external": external(record),
                }),
            )))
        }
        Command::EnumerateFields { p, max_disc } => {
            let fields = enumerate_by_discriminant(*p, max_disc)?;
            match config.format {
                Format::Csv => {
                    let mut s = String::from("p,tame_ramified,wild_at_p,exponents,discriminant\n");
                    for f in &fields {
                        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            f.p,
                            join(&f.tame_ramified),
                            f.wild_at_p,
                            join(&f.exponents),
                            discriminant(f)
                        ));
                    }
                    Ok(Output::Csv(s))
                }
                Format::Json => Ok(Output::Json(envelope(
                    "enumerate-fields",
                    json!({
                        "p": p,
                        "max_disc": max_disc.to_string(),
                        "count": fields.len(),
                        "fields": fields.iter().map(CyclicExtension::to_json).collect::<Vec<_>>(),
                    }),
                ))),
            }
        }
        Command::Density { curve, p, grid } => {
            let report = asymptotic_report(&classifier(config, curve, *p)?, grid)?;
            match config.format {
                Format::Csv => {
                    let mut s = String::from("X,g,M\n");
                    for ((x, g), (_, m)) in report.g_table.iter().zip(&report.m_table) {
                        s.push_str(&format!("{x},{g},{m}\n"));
                    }
                    Ok(Output::Csv(s))
                }
                Format::Json => Ok(Output::Json(envelope(
                    "density",
                    json!({ "curve": curve.to_string(), "report": to_value(&report) }),
                ))),
            }
        }
        Command::Report { curve, p, bound } => {
            require_json(config, "report")?;
            report(config, curve, *p, *bound)
        }
    }
}

fn report(config: &RunConfig, curve: &WeierstrassModel, p: u64, bound: u64) -> Result<Output> {
    let record = config.reference.lookup(curve, p);
    let c = classifier(config, curve, p)?;
    let rows = c.bulk_classify(bound)?;
    let count = |class| rows.iter().filter(|r| r.class == class).count();
    let q: Vec<u64> = rows.iter().filter(|r| r.in_script_q).map(|r| r.ell).collect();
    let inputs = base_inputs(record, false);
    let euler = match euler_char_factors(curve, p, inputs.sha.clone(), inputs.analytic_rank_zero) {
        Ok(ef) => json!({ "factors": to_value(&ef), "mu_lambda_vanish": to_value(&mu_lambda_vanish(&ef)) }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let stable_field = match q.first() {
        Some(&ell) => {
            let ext = CyclicExtension::prime_conductor(p, ell)?;
            let hyp = check_hypotheses(curve, p, &ext, &inputs)?;
            let transfer = match lambda_transfer(0, p, &ext, curve, Gate::Checked(&hyp)) {
                Ok(kr) if hyp.base_mu_lambda_zero.known_zero() => to_value(&rank_bound(&kr)),
                Ok(_) => Value::Null,
                Err(e) => json!({ "error": e.to_string() }),
            };
            json!({ "extension": ext.to_json(), "hypotheses": to_value(&hyp), "rank_bound": transfer })
        }
        None => Value::Null,
    };
    Ok(Output::Json(envelope(
        "report",
        json!({
            "curve": curve.to_string(),
            "minimal_model": c.minimal_model().to_string(),
            "p": p,
            "bound": bound,
            "class_counts": { "Q1": count(kida_core::classify::QClass::Q1), "Q2": count(kida_core::classify::QClass::Q2), "Q3": count(kida_core::classify::QClass::Q3) },
            "script_q": q,
            "euler_characteristic": euler,
            "stable_field": stable_field,
            "alpha": alpha_closed_form(p)?.to_string(),
            "predicted_exponent": predicted_exponent(p)?.to_string(),
            "alternative_beta": alternative_beta(p)?.to_string(),
            "external": external(record),
        }),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_accept_scientific_notation() {
        assert_eq!(parse_grid_point("1e5"), Ok(100_000));
        assert_eq!(parse_grid_point("2500"), Ok(2500));
        assert!(parse_grid_point("1.5").is_err());
        assert!(parse_grid_point("-3").is_err());
    }

    #[test]
    fn exit_codes_separate_hypotheses_from_failures() {
        assert_eq!(exit_code(&Error::Blocked("x".into())), 3);
        assert_eq!(exit_code(&Error::Supersingular(5)), 3);
        assert_eq!(exit_code(&Error::Io("x".into())), 4);
        assert_eq!(exit_code(&Error::Schema { field: "f".into(), reason: "r".into() }), 4);
        assert_eq!(exit_code(&Error::Budget("x".into())), 1);
    }

    #[test]
    fn run_is_deterministic_in_process() {
        let cli = Cli::parse_from(["iwasawa", "enumerate-fields", "--p", "5", "--max-disc", "100000000"]);
        let config = RunConfig::from_cli(cli).unwrap();
        let a = run(&config).unwrap().render();
        let b = run(&RunConfig { jobs: Some(1), ..config }).unwrap().render();
        assert_eq!(a, b);
        assert!(a.contains("\"schema\": 1"));
    }
}
