//! Argument definitions and command implementations.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use super::config::{parse_n_list, parse_p_list, Settings};
use super::output::{table_paths, write_csv, write_csv_file, RunManifest, TableOutput};
use super::run::{risk_rows, run_table};
use super::tables::{builtin_table, TableOverrides, TABLE_IDS};
use super::verify::{run_all, Level, VerifyOptions};
use super::CliError;
use crate::estimators::{beta0, blee_known_scale, c0};
use crate::model::{BleeVariant, EstimatorId, LossSpec, Population, Scenario};
use crate::oracle::{minimize_affine_risk, minimize_shift_risk};
use crate::risk::GridPoint;

#[derive(Debug, Parser)]
#[command(
    name = "ordexp",
    version,
    about = "Order-restricted estimation of exponential locations under Linex loss"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form constants next to numerical risk minimizers.
    Constants(ConstantsArgs),
    /// Reproduce built-in percentage-risk-improvement tables.
    Table(TableArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Risk and PRI of estimators at one scenario.
    Risk(Box<RiskArgs>),
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Sample sizes, e.g. `5,6` or `2..30`.
    #[arg(long, default_value = "2..30")]
    pub n: String,
    #[arg(
        long,
        default_value = "-4,-2,-1,-0.5,0.5,1,2,4",
        allow_hyphen_values = true
    )]
    pub p: String,
    /// Known scale used for the shift constants.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table ids.
    pub ids: Vec<u32>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Table ids as a comma-separated list.
    #[arg(long)]
    pub tables: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Replacement loss-shape list.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Replacement sample-size pairs, e.g. `5,5;8,10`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `fast` (10k replications) or `full` (50k).
    #[arg(long)]
    pub level: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, hide = true, allow_hyphen_values = true, default_value_t = 0.0)]
    pub tamper_c0: f64,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// Removal counts per population, e.g. `0,2;0,0,1`.
    #[arg(long)]
    pub removals: Option<String>,
    #[arg(long)]
    pub records: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Estimators to evaluate, comma-separated.
    #[arg(long)]
    pub estimator: Option<String>,
    /// Reference estimator for PRI (default mle).
    #[arg(long)]
    pub baseline: Option<String>,
    /// 1-based index of the estimated component.
    #[arg(long)]
    pub target: Option<String>,
    /// `printed` or `loss`.
    #[arg(long)]
    pub blee_variant: Option<String>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Round risk, se and pri to 2 decimals.
    #[arg(long)]
    pub display: bool,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ORDEXP_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Validation(format!(
                "ORDEXP_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Constants(a) => cmd_constants(&a, &mut std::io::stdout().lock()),
        Command::Table(a) => cmd_table(&a).map(|_| ()),
        Command::Verify(a) => cmd_verify(&a),
        Command::Risk(a) => cmd_risk(&a),
    }
}

fn settings_from(config: Option<&Path>) -> Result<Settings, CliError> {
    match config {
        Some(path) => Settings::load(path),
        None => Ok(Settings::default()),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.12}"))
}

pub fn cmd_constants(a: &ConstantsArgs, out: &mut impl Write) -> Result<(), CliError> {
    let ns = parse_n_list(&a.n)?;
    let ps = parse_p_list(&a.p)?;
    if !(a.sigma.is_finite() && a.sigma > 0.0) {
        return Err(CliError::Validation(format!(
            "sigma must be positive, got {}",
            a.sigma
        )));
    }
    let sigma = a.sigma;
    writeln!(
        out,
        "n,p,c0,c0_oracle,c0_delta,kappa0,beta0_k2,beta0_oracle,beta0_delta,alpha0_printed,alpha0_loss,alpha0_oracle,alpha0_delta,status"
    )
    .map_err(io_err)?;
    for &n in &ns {
        for &p in &ps {
            let nf = f64::from(n);
            if n < 2 || nf <= p {
                writeln!(out, "{n},{p},,,,,,,,,,,,invalid: need n >= 2 and n > p")
                    .map_err(io_err)?;
                continue;
            }
            let c = c0(n, p);
            let co = minimize_affine_risk(n, n - 1, p).ok();
            let b = beta0(n, 2 * n, 2, p);
            let bo = minimize_affine_risk(n, 2 * n - 2, p).ok();
            let printed =
                (nf > p * sigma).then(|| blee_known_scale(n, sigma, p, BleeVariant::PaperPrinted));
            let loss = blee_known_scale(n, sigma, p, BleeVariant::LossConsistent);
            let ao = minimize_shift_risk(n, sigma, p);
            let status = if printed.is_none() {
                "printed shift undefined: n <= p sigma"
            } else {
                "ok"
            };
            writeln!(
                out,
                "{n},{p},{c:.12},{},{},{c:.12},{b:.12},{},{},{},{loss:.12},{ao:.12},{:.3e},{status}",
                fmt_opt(co),
                co.map_or_else(String::new, |o| format!("{:.3e}", (c - o).abs())),
                fmt_opt(bo),
                bo.map_or_else(String::new, |o| format!("{:.3e}", (b - o).abs())),
                fmt_opt(printed),
                (loss - ao).abs(),
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Runs the requested tables and returns the manifest that was written.
pub fn cmd_table(a: &TableArgs) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let mut s = settings_from(a.config.as_deref())?;
    s.set_opt("tables", a.tables.as_deref())?;
    if !a.ids.is_empty() {
        let ids: Vec<String> = a.ids.iter().map(u32::to_string).collect();
        s.set("tables", ids.join(","))?;
    }
    s.set_opt("reps", a.reps.as_deref())?;
    s.set_opt("seed", a.seed.as_deref())?;
    s.set_opt("p", a.p.as_deref())?;
    s.set_opt("grid", a.grid.as_deref())?;
    s.set_opt("out_dir", a.out_dir.as_deref())?;

    let ids: Vec<u32> = s
        .list("tables")?
        .ok_or_else(|| CliError::Validation("no table ids given".into()))?;
    let overrides = TableOverrides {
        p: s.p_list()?,
        n_pairs: s.grid()?,
    };
    let reps = s.reps()?;
    let seed = s.seed()?;
    let specs = ids
        .iter()
        .map(|&id| {
            builtin_table(id, &overrides).ok_or_else(|| {
                let known: Vec<String> = TABLE_IDS.iter().map(u32::to_string).collect();
                CliError::Validation(format!(
                    "unknown table id {id} (available: {})",
                    known.join(", ")
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let dir = PathBuf::from(s.out_dir());
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    for spec in &specs {
        let run = run_table(spec, reps, seed)?;
        let (main, display, variant) = table_paths(&dir, spec.id);
        write_csv_file(&run.rows, false, &main)?;
        write_csv_file(&run.rows, true, &display)?;
        let variant_csv = match &run.variant_rows {
            Some(rows) => {
                write_csv_file(rows, false, &variant)?;
                Some(variant.display().to_string())
            }
            None => None,
        };
        let _ = writeln!(
            std::io::stdout(),
            "table {}: {} rows -> {}",
            spec.id,
            run.rows.len(),
            main.display()
        );
        outputs.push(TableOutput {
            table_id: spec.id,
            csv: main.display().to_string(),
            display_csv: display.display().to_string(),
            variant_csv,
            notes: run.notes,
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: s.hash("table"),
        master_seed: seed,
        reps,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        settings: s.entries().clone(),
        tables: outputs,
    };
    manifest.write(&dir.join("manifest.toml"))?;
    Ok(manifest)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let mut s = settings_from(a.config.as_deref())?;
    s.set_opt("level", a.level.as_deref())?;
    s.set_opt("seed", a.seed.as_deref())?;
    let level: Level = s
        .get("level")
        .unwrap_or("fast")
        .parse()
        .map_err(CliError::Validation)?;
    let opts = VerifyOptions {
        level,
        seed: s.seed()?,
        c0_offset: a.tamper_c0,
    };
    let reports = run_all(&opts);
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status} {} ({} checks, {:.1} s)",
            r.name, r.checks, r.seconds
        );
        for f in r.failures.iter().take(10) {
            let _ = writeln!(out, "    {f}");
        }
        if r.failures.len() > 10 {
            let _ = writeln!(out, "    ... {} more", r.failures.len() - 10);
        }
        if !r.passed() {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn risk_point(s: &Settings) -> Result<(Vec<Population>, usize), CliError> {
    let ns: Vec<u32> = s
        .list("n")?
        .ok_or_else(|| CliError::Validation("missing `n`".into()))?;
    let k = match s.get("k") {
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Validation(format!("cannot parse `{v}` for `k`")))?,
        None => ns.len(),
    };
    let mus: Vec<f64> = s.list("mu")?.unwrap_or_else(|| vec![0.0; k]);
    let sigmas: Vec<f64> = s.list("sigma")?.unwrap_or_else(|| vec![1.0; k]);
    for (name, len) in [("n", ns.len()), ("mu", mus.len()), ("sigma", sigmas.len())] {
        if len != k {
            return Err(CliError::Validation(format!(
                "`{name}` has {len} entries but k = {k}"
            )));
        }
    }
    let target: usize = match s.get("target") {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("cannot parse `{v}` for `target`")))?,
        None => 1,
    };
    if target == 0 || target > k {
        return Err(CliError::Validation(format!(
            "target must be in 1..={k}, got {target}"
        )));
    }
    let pops = (0..k)
        .map(|j| Population::new(mus[j], sigmas[j], ns[j]))
        .collect();
    Ok((pops, target - 1))
}

pub fn cmd_risk(a: &RiskArgs) -> Result<(), CliError> {
    let mut s = settings_from(a.config.as_deref())?;
    for (key, value) in [
        ("scenario", &a.scenario),
        ("scheme", &a.scheme),
        ("k", &a.k),
        ("n", &a.n),
        ("mu", &a.mu),
        ("sigma", &a.sigma),
        ("m", &a.m),
        ("removals", &a.removals),
        ("records", &a.records),
        ("p", &a.p),
        ("reps", &a.reps),
        ("seed", &a.seed),
        ("estimator", &a.estimator),
        ("baseline", &a.baseline),
        ("target", &a.target),
        ("blee_variant", &a.blee_variant),
    ] {
        s.set_opt(key, value.as_deref())?;
    }
    let kind = s.scenario_kind()?;
    let scheme = s.scheme()?;
    let (pops, target) = risk_point(&s)?;
    let ps = s
        .p_list()?
        .ok_or_else(|| CliError::Validation("missing `p`".into()))?;
    let estimators = s
        .estimators("estimator")?
        .ok_or_else(|| CliError::Validation("missing `estimator`".into()))?;
    let baseline = match s.estimators("baseline")? {
        Some(b) if b.len() == 1 => b[0],
        Some(_) => {
            return Err(CliError::Validation(
                "`baseline` takes a single estimator".into(),
            ))
        }
        None => EstimatorId::Mle,
    };
    let reps = s.reps()?;
    let seed = s.seed()?;

    let mut rows = Vec::new();
    for p in ps {
        let point = GridPoint::new(
            Scenario::new(kind, pops.clone(), target),
            scheme.clone(),
            LossSpec::new(p)?,
        )?;
        rows.extend(risk_rows(&point, &estimators, baseline, reps, seed)?);
    }
    match &a.out {
        Some(path) => write_csv_file(&rows, a.display, path),
        None => write_csv(&rows, a.display, std::io::stdout().lock()),
    }
}
