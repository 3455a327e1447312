//! Command execution and report serialization.

use std::fs;
use std::path::Path;

use pullback_heights::arch::{arch_volume, limiting_arch_factor, ArchConfig, ArchEstimate, Threshold};
use pullback_heights::constants::{chat_sequence, full_report, ChatConfig, ConstantConfig, HeightContext};
use pullback_heights::counting::{convergence_report, CountConfig, CountMode, CountRow, ProjPointQ};
use pullback_heights::morphism::{HomogeneousLift, NormalizedLift};
use pullback_heights::padic::{nonarch_constant_at, DensityOptions, LocalData};
use pullback_heights::rational::is_prime;
use pullback_heights::resultant::{resultant_data_normalized, resultant_norm_bound, ResultantData};
use pullback_heights::Error;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cli::{Cli, Command, Format, Mode, ThresholdArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("not a morphism")]
    NotMorphism(String),
    #[error("{0}")]
    ResourceCap(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::NotMorphism(_) => 3,
            CliError::ResourceCap(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidLift(_)
            | Error::DimensionMismatch { .. }
            | Error::Zero(_)
            | Error::NotPrime(_)
            | Error::InvalidArgument(_) => CliError::Parse(e.to_string()),
            Error::NotMorphism => {
                CliError::NotMorphism("the maximal minors of the Sylvester-Macaulay matrix have gcd 0".into())
            }
            Error::ResourceCap(_) | Error::FactorTooLarge(_) => CliError::ResourceCap(e.to_string()),
            Error::NotEndomorphism { .. } => CliError::Parse(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn main(args: Cli) -> Result<String> {
    let threads = args.global.threads;
    let args = match &args.global.config {
        Some(path) => load_config(path)?,
        None => args,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    run(&args)
}

/// Reads the configuration embedded in a JSON report, a CSV report, or a
/// bare configuration document.
fn load_config(path: &Path) -> Result<Cli> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let json = match text.lines().next().and_then(|l| l.strip_prefix("# config: ")) {
        Some(line) => line.to_string(),
        None => text,
    };
    let mut value: Value = serde_json::from_str(&json).map_err(|e| CliError::Parse(format!("config: {e}")))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::Parse(format!("config: {e}")))
}

fn load_lift(src: &str) -> Result<HomogeneousLift> {
    let trimmed = src.trim();
    if !trimmed.starts_with('{') && Path::new(trimmed).is_file() {
        let text = fs::read_to_string(trimmed).map_err(|e| CliError::Parse(format!("{trimmed}: {e}")))?;
        return Ok(HomogeneousLift::from_json(&text)?);
    }
    Ok(HomogeneousLift::parse_builder(trimmed)?)
}

fn load_normalized(src: &str) -> Result<NormalizedLift> {
    Ok(load_lift(src)?.normalize()?)
}

fn witness(res: &ResultantData) -> String {
    format!(
        "the Sylvester-Macaulay matrix in degree {} has rank {} < {} rows, so the gcd of its maximal minors is 0",
        res.macaulay_degree,
        res.invariant_factors.len(),
        res.rows
    )
}

fn ensure_morphism(f: &NormalizedLift) -> Result<ResultantData> {
    let res = resultant_data_normalized(f)?;
    if res.is_morphism {
        Ok(res)
    } else {
        Err(CliError::NotMorphism(witness(&res)))
    }
}

fn arch_config(cli: &Cli) -> ArchConfig {
    ArchConfig {
        samples: cli.global.mc_samples,
        seed: cli.global.seed,
        tolerance: cli.global.quad_tol,
        green_iters: cli.global.green_iters,
        force_monte_carlo: false,
    }
}

fn constant_config(cli: &Cli) -> ConstantConfig {
    ConstantConfig { arch: arch_config(cli), class_cap: cli.global.class_cap }
}

fn chat_config(cli: &Cli) -> ChatConfig {
    ChatConfig { constant: constant_config(cli), max_k: cli.global.max_k }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Other(e.to_string()))
}

fn check_value(f: &NormalizedLift, res: &ResultantData) -> Value {
    json!({
        "is_morphism": res.is_morphism,
        "bad_primes": if res.is_morphism { res.bad_primes() } else { Vec::new() },
        "res_ideal": if res.is_morphism { res.res_ideal.to_string() } else { "0".to_string() },
        "m": f.m(),
        "M": f.codomain(),
        "d": f.degree(),
        "height": f.height().to_string(),
        "normalized": f.lift().to_json_value(),
    })
}

fn resultant_value(f: &NormalizedLift, res: &ResultantData) -> Value {
    let bound = res.is_morphism.then(|| resultant_norm_bound(f).to_string());
    json!({
        "is_morphism": res.is_morphism,
        "res": res.res_ideal,
        "norm": res.invariant_factor_product.to_string(),
        "bound": bound,
        "bad_primes": res.bad_primes(),
        "macaulay_degree": res.macaulay_degree,
        "rows": res.rows,
        "cols": res.cols,
        "invariant_factors": res.invariant_factors.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    })
}

fn local_data(cli: &Cli, f: &NormalizedLift, p: u64) -> Result<LocalData> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    let res = ensure_morphism(f)?;
    let opts = DensityOptions { class_cap: cli.global.class_cap };
    let mut n = nonarch_constant_at(f, &[(p, res.valuation(p))], &opts)?;
    Ok(n.locals.remove(0))
}

fn arch_value(a: &ArchEstimate) -> Value {
    json!({
        "value": a.value,
        "error": a.error,
        "method": a.method.as_str(),
        "seed": a.seed,
        "samples": a.samples_or_panels,
    })
}

fn parse_point(s: &str) -> Result<ProjPointQ> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Parse(format!("bad coordinate {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjPointQ::new(coords)?)
}

fn endomorphism_chat(cli: &Cli, f: &NormalizedLift, g_src: Option<&str>, k: u32) -> Result<Value> {
    if f.m() != f.codomain() {
        return Err(Error::NotEndomorphism { m: f.m(), codomain: f.codomain() }.into());
    }
    ensure_morphism(f)?;
    let g = match g_src {
        Some(s) => load_normalized(s)?,
        None => HomogeneousLift::identity(f.m()).normalize()?,
    };
    ensure_morphism(&g)?;
    to_value(&chat_sequence(f, &g, k, &chat_config(cli))?)
}

fn run(cli: &Cli) -> Result<String> {
    let command = cli.command.as_ref().ok_or_else(|| CliError::Parse("a subcommand or --config is required".into()))?;
    let format = cli.global.format.unwrap_or(command.default_format());
    let value = match command {
        Command::Check { morphism } => {
            let f = load_normalized(morphism)?;
            let res = resultant_data_normalized(&f)?;
            check_value(&f, &res)
        }
        Command::Resultant { morphism } => {
            let f = load_normalized(morphism)?;
            resultant_value(&f, &resultant_data_normalized(&f)?)
        }
        Command::Density { prime, morphism } => {
            let f = load_normalized(morphism)?;
            let r = local_data(cli, &f, *prime)?.report();
            json!({
                "p": r.p,
                "depth": r.depth,
                "res_valuation": r.res_valuation,
                "visited": r.visited,
                "delta": r.delta,
                "c_local": {"terms": r.c_local.terms, "float": r.c_local.float},
                "mu": r.mu,
            })
        }
        Command::LocalFactor { prime, morphism } => {
            let f = load_normalized(morphism)?;
            let l = local_data(cli, &f, *prime)?;
            let r = l.report();
            let divisible = l.table.weights.keys().all(|i| i % f.degree() == 0);
            json!({
                "p": r.p,
                "c_local": r.c_local,
                "mu": r.mu,
                "mu_equals_c": divisible,
            })
        }
        Command::ArchVolume { morphism } => {
            let f = load_normalized(morphism)?;
            ensure_morphism(&f)?;
            arch_value(&arch_volume(&f, &arch_config(cli))?)
        }
        Command::Constant { morphism } => {
            let f = load_normalized(morphism)?;
            ensure_morphism(&f)?;
            to_value(&full_report(&f, &constant_config(cli))?)?
        }
        Command::Chat { morphism, g, k, threshold, threshold_iters } => {
            let f = load_normalized(morphism)?;
            let mut v = endomorphism_chat(cli, &f, g.as_deref(), *k)?;
            if *threshold == ThresholdArg::Canonical {
                let g = match g {
                    Some(s) => load_normalized(s)?,
                    None => HomogeneousLift::identity(f.m()).normalize()?,
                };
                let t = Threshold::Canonical { exact_iters: *threshold_iters };
                let est = limiting_arch_factor(&f, &g, t, &arch_config(cli))?;
                v["canonical_threshold_arch"] = arch_value(&est);
            }
            v
        }
        Command::Canonical { morphism, point } => {
            let f = load_normalized(morphism)?;
            ensure_morphism(&f)?;
            let p = parse_point(point)?;
            let h = HeightContext::new(&f)?.estimate(&p, cli.global.green_iters)?;
            let mut v = to_value(&h)?;
            v["point"] = Value::String(p.to_string());
            v
        }
        Command::Count { morphism, mode, x, gamma } => {
            let f = load_normalized(morphism)?;
            ensure_morphism(&f)?;
            let cfg = CountConfig {
                chat: chat_config(cli),
                height_iters: cli.global.green_iters,
                gamma: *gamma,
                ..CountConfig::default()
            };
            let mode = match mode {
                Mode::Pullback => CountMode::Pullback,
                Mode::Image => CountMode::Image,
                Mode::Canonical => CountMode::Canonical,
            };
            let rows = convergence_report(&f, x, mode, &cfg)?;
            if format == Format::Csv {
                return count_csv(cli, &rows);
            }
            json!({ "rows": rows })
        }
        Command::Report { morphism, k } => {
            let f = load_normalized(morphism)?;
            let res = ensure_morphism(&f)?;
            let mut v = json!({
                "check": check_value(&f, &res),
                "constant": to_value(&full_report(&f, &constant_config(cli))?)?,
            });
            if f.m() == f.codomain() && f.degree() >= 2 {
                v["chat"] = endomorphism_chat(cli, &f, None, *k)?;
            }
            v
        }
    };
    render(cli, value, format)
}

fn render(cli: &Cli, value: Value, format: Format) -> Result<String> {
    let config = to_value(cli)?;
    match format {
        Format::Json => {
            let mut obj = match value {
                Value::Object(m) => m,
                other => {
                    let mut m = Map::new();
                    m.insert("result".into(), other);
                    m
                }
            };
            obj.insert("config".into(), config);
            let text = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| CliError::Other(e.to_string()))?;
            Ok(text + "\n")
        }
        Format::Pretty => {
            let mut out = String::new();
            if let Value::Object(m) = &value {
                for (k, v) in m {
                    out.push_str(&format!("{k}: {v}\n"));
                }
            }
            out.push_str(&format!("config: {config}\n"));
            Ok(out)
        }
        Format::Csv => Err(CliError::Parse("csv output is only available for count".into())),
    }
}

fn count_csv(cli: &Cli, rows: &[CountRow]) -> Result<String> {
    let mut out = format!("# config: {}\nX,count,predicted,ratio,flagged\n", to_value(cli)?);
    for r in rows {
        let predicted = r.predicted.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", r.x, r.count, predicted, r.ratio, r.flagged_boundary));
    }
    Ok(out)
}
