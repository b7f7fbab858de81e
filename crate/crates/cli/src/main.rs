//! `cmap`: build, check, and evaluate coded-caching schemes for
//! combinatorial multi-access networks with private caches.
//!
//! Subcommands: `rate`, `bounds`, `scheme`, `verify`, `simulate`, `sweep`.
//! Exit codes: 0 success, 1 verification failure, 2 parameter error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cmap_core::bounds::{
    alpha_closed_form, alpha_construct, bounds_report, cutset_bound_with_argmax, prop1_bounds,
};
use cmap_core::decode::{bitlevel_roundtrip, verify_all};
use cmap_core::delivery::{schedule_for, schedule_lines};
use cmap_core::model::{validate, worst_case_demand};
use cmap_core::placement::{placement, placement_json};
use cmap_core::rational::{format_decimal, parse_rational, rat, ratio, Rat};
use cmap_core::{Error, SystemParams};

#[derive(Parser)]
#[command(name = "cmap", version, about = "Coded caching with shared access caches and private caches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable rate and every bound for one parameter point
    Rate(PointArgs),
    /// Detailed bound breakdown (cut-set argmax, independent-set sizes)
    Bounds(PointArgs),
    /// Generate the placement and print the delivery schedule
    Scheme(SchemeArgs),
    /// Check that every user decodes its demanded file (peeling)
    Verify(ParamArgs),
    /// Bit-exact XOR round trip over pseudorandom file contents
    Simulate(ParamArgs),
    /// CSV sweep of rates and bounds over access degree and replication
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Number of access caches
    #[arg(long)]
    lambda: Option<u8>,
    /// Access degree: access caches per user
    #[arg(long)]
    r: Option<u8>,
    /// Library size in files
    #[arg(long = "n")]
    n_files: Option<u32>,
    /// Access-cache size in files (e.g. 1.5 or 3/2)
    #[arg(long = "ma")]
    m_access: Option<String>,
    /// Private-cache size in files
    #[arg(long = "mp")]
    m_private: Option<String>,
    /// File size in bits (simulation); defaults to 8x subpacketization
    #[arg(long = "file-bits")]
    file_bits: Option<u64>,
    /// Seed for pseudorandom file contents
    #[arg(long)]
    seed: Option<u64>,
    /// Plain-text config with key=value lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Print values as 6-significant-digit decimals instead of p/q
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct SchemeArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Also write placement and schedule as JSON to this path
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of access caches
    #[arg(long)]
    lambda: u8,
    /// Access degrees, comma separated (e.g. 2,3,4)
    #[arg(long)]
    r: String,
    /// Replication factors, a..b range or comma list (e.g. 1..6)
    #[arg(long)]
    t: String,
    /// Private memory mode: "unit" (N = K, M_p = 1) or "zero"
    #[arg(long = "mp-mode", default_value = "unit")]
    mp_mode: String,
    /// Print values as 6-significant-digit decimals instead of p/q
    #[arg(long)]
    decimal: bool,
}

impl ParamArgs {
    /// Merges the config file (if any) under the flags.
    fn resolve(&self) -> anyhow::Result<(SystemParams, u64)> {
        let (mut base, mut seed) = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                SystemParams::from_config_str(&text)?
            }
            None => {
                let missing = |flag: &str| {
                    anyhow::Error::from(Error::Parameter(format!(
                        "--{flag} is required (or use --config)"
                    )))
                };
                let lambda = self.lambda.ok_or_else(|| missing("lambda"))?;
                let r = self.r.ok_or_else(|| missing("r"))?;
                let n = self.n_files.ok_or_else(|| missing("n"))?;
                let ma = parse_rational(self.m_access.as_deref().ok_or_else(|| missing("ma"))?)?;
                let mp = parse_rational(self.m_private.as_deref().ok_or_else(|| missing("mp"))?)?;
                (SystemParams::new(lambda, r, n, ma, mp), None)
            }
        };
        if let Some(lambda) = self.lambda {
            base.lambda = lambda;
        }
        if let Some(r) = self.r {
            base.r = r;
        }
        if let Some(n) = self.n_files {
            base.n_files = n;
        }
        if let Some(ma) = &self.m_access {
            base.m_access = parse_rational(ma)?;
        }
        if let Some(mp) = &self.m_private {
            base.m_private = parse_rational(mp)?;
        }
        if let Some(bits) = self.file_bits {
            base.file_bits = Some(bits);
        }
        if let Some(s) = self.seed {
            seed = Some(s);
        }
        Ok((base, seed.unwrap_or(0)))
    }
}

/// Resolves flags/config and rejects parameter sets with violations.
fn resolve_valid(args: &ParamArgs) -> anyhow::Result<(SystemParams, u64)> {
    let (params, seed) = args.resolve()?;
    let validation = validate(&params);
    if !validation.is_valid() {
        return Err(anyhow::Error::from(Error::Parameter(
            validation.violations.join("; "),
        )));
    }
    for note in &validation.notes {
        eprintln!("note: {note}");
    }
    Ok((params, seed))
}

fn render(x: Rat, decimal: bool) -> String {
    if decimal {
        format_decimal(x, 6)
    } else {
        x.to_string()
    }
}

fn render_opt(x: Option<Rat>, decimal: bool) -> String {
    match x {
        Some(v) => render(v, decimal),
        None => "n/a".to_string(),
    }
}

fn cmd_rate(args: &PointArgs) -> anyhow::Result<ExitCode> {
    let (params, _) = resolve_valid(&args.params)?;
    let report = bounds_report(&params)?;
    println!(
        "lambda={} r={} n_files={} m_access={} m_private={}",
        params.lambda, params.r, params.n_files, params.m_access, params.m_private
    );
    println!(
        "t_access={} t_private={} k_users={} subpacketization={}",
        render(report.t_access, args.decimal),
        render(report.t_private, args.decimal),
        report.k_users,
        report.subpacketization.map_or_else(|| "n/a".into(), |f| f.to_string()),
    );
    println!("rate_achievable={}", render_opt(report.rate_achievable, args.decimal));
    println!("man_lb={}", render(report.man_lb, args.decimal));
    println!("cmacc_ub={}", render(report.cmacc_ub, args.decimal));
    println!("cutset_lb={}", render(report.cutset_lb, args.decimal));
    println!(
        "alpha_lb_normalized={}",
        render_opt(report.alpha_lb_normalized, args.decimal)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: &PointArgs) -> anyhow::Result<ExitCode> {
    let (params, _) = resolve_valid(&args.params)?;
    let report = bounds_report(&params)?;
    let (lower, upper) = prop1_bounds(&params)?;
    let (cutset, argmax) = cutset_bound_with_argmax(&params);
    println!(
        "lambda={} r={} n_files={} m_access={} m_private={}",
        params.lambda, params.r, params.n_files, params.m_access, params.m_private
    );
    println!("rate_achievable={}", render_opt(report.rate_achievable, args.decimal));
    println!("uncoded_lower={}", render(lower, args.decimal));
    println!("uncoded_upper={}", render(upper, args.decimal));
    println!("cutset_lb={} at_s={argmax}", render(cutset, args.decimal));
    if let (Some(t_a), Some(1)) = (params.integer_t_access(), params.integer_t_private()) {
        let closed = alpha_closed_form(params.lambda, params.r, t_a);
        println!("alpha_closed_form={closed}");
        if (params.n_files as u64) >= params.k_users() {
            let d = worst_case_demand(&params)?;
            let built = alpha_construct(&params, &d)?;
            println!(
                "alpha_construct_b1={} alpha_construct_b2={} independent={}",
                built.b1.len(),
                built.b2.len(),
                built.check
            );
        }
        println!(
            "alpha_lb_normalized={}",
            render_opt(report.alpha_lb_normalized, args.decimal)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_scheme(args: &SchemeArgs) -> anyhow::Result<ExitCode> {
    let (params, _) = resolve_valid(&args.params)?;
    let d = worst_case_demand(&params)?;
    let schedule = schedule_for(&params, &d)?;
    let map = placement(&params)?;
    eprintln!(
        "k_users={} subpacketization={} transmissions={}",
        params.k_users(),
        params.subpacketization().unwrap_or(0),
        schedule.len()
    );
    if !schedule.is_empty() {
        println!("{}", schedule_lines(&schedule));
    }
    if let Some(path) = &args.dump {
        let mut doc = placement_json(&params, &map);
        doc["schedule"] = serde_json::Value::Array(
            schedule.iter().map(|t| serde_json::Value::String(t.to_string())).collect(),
        );
        fs::write(path, serde_json::to_string_pretty(&doc)?)
            .with_context(|| format!("writing dump {}", path.display()))?;
        eprintln!("dump written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &ParamArgs) -> anyhow::Result<ExitCode> {
    let (params, _) = resolve_valid(args)?;
    let d = worst_case_demand(&params)?;
    let schedule = schedule_for(&params, &d)?;
    let report = verify_all(&params, &d, &schedule)?;
    print!("{report}");
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_simulate(args: &ParamArgs) -> anyhow::Result<ExitCode> {
    let (mut params, seed) = resolve_valid(args)?;
    if params.file_bits.is_none() {
        let fp = params.subpacketization().ok_or_else(|| {
            Error::Parameter("simulation needs integer replication factors".into())
        })?;
        params.file_bits = Some(8 * fp.max(1));
    }
    let d = worst_case_demand(&params)?;
    let outcome = bitlevel_roundtrip(&params, &d, seed)?;
    println!(
        "{} seed={} file_bits={}",
        outcome.summary_line(),
        seed,
        params.file_bits.unwrap_or(0)
    );
    Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_u8_list(text: &str, what: &str) -> anyhow::Result<Vec<u8>> {
    if let Some((a, b)) = text.split_once("..") {
        let lo: u8 = a.trim().parse().map_err(|_| bad_list(what, text))?;
        let hi: u8 = b.trim().parse().map_err(|_| bad_list(what, text))?;
        if hi < lo {
            return Err(bad_list(what, text));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|part| part.trim().parse::<u8>().map_err(|_| bad_list(what, text)))
        .collect()
}

fn bad_list(what: &str, text: &str) -> anyhow::Error {
    anyhow::Error::from(Error::Parameter(format!(
        "cannot parse {what} list {text:?}; use a,b,c or a..b"
    )))
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<ExitCode> {
    let r_values = parse_u8_list(&args.r, "access degree")?;
    let t_values = parse_u8_list(&args.t, "replication factor")?;
    let unit = match args.mp_mode.as_str() {
        "unit" => true,
        "zero" => false,
        other => {
            return Err(anyhow::Error::from(Error::Parameter(format!(
                "unknown mp-mode {other:?}; expected unit or zero"
            ))))
        }
    };
    if let Some(&r) = r_values.iter().find(|&&r| r < 1 || r > args.lambda) {
        return Err(anyhow::Error::from(Error::Parameter(format!(
            "access degree {r} outside [1, {}]",
            args.lambda
        ))));
    }
    if let Some(&t) = t_values.iter().find(|&&t| t > args.lambda) {
        return Err(anyhow::Error::from(Error::Parameter(format!(
            "replication factor {t} exceeds lambda = {}",
            args.lambda
        ))));
    }
    println!(
        "lambda,r,t,m_access,m_private,n_files,k_users,subpacketization,\
         rate_achievable,man_lb,cmacc_ub,cutset_lb,alpha_lb_normalized"
    );
    for &r in &r_values {
        for &t in &t_values {
            let k = cmap_core::combinatorics::binom(args.lambda as i64, r as i64);
            let n = u32::try_from(k)
                .map_err(|_| Error::Overflow(format!("k_users for r={r}")))?;
            let m_access = ratio(t as i128 * n as i128, args.lambda as i128);
            let m_private = if unit { rat(1) } else { rat(0) };
            let params = SystemParams::new(args.lambda, r, n, m_access, m_private);
            let report = bounds_report(&params)?;
            let rate = report.rate_achievable.ok_or_else(|| {
                Error::Invariant("sweep point without an achievable rate".into())
            })?;
            if report.man_lb > rate {
                return Err(anyhow::Error::from(Error::Invariant(format!(
                    "man_lb {} above achievable rate {rate} at r={r} t={t}",
                    report.man_lb
                ))));
            }
            let alpha = report.alpha_lb_normalized.unwrap_or_else(|| rat(0));
            println!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                args.lambda,
                r,
                t,
                render(params.m_access, args.decimal),
                render(params.m_private, args.decimal),
                params.n_files,
                report.k_users,
                report.subpacketization.unwrap_or(0),
                render(rate, args.decimal),
                render(report.man_lb, args.decimal),
                render(report.cmacc_ub, args.decimal),
                render(report.cutset_lb, args.decimal),
                render(alpha, args.decimal),
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Rate(args) => cmd_rate(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Scheme(args) => cmd_scheme(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<Error>() {
                Some(Error::Parameter(_)) | Some(Error::Unsupported(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

