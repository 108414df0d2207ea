//! `decifuse` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computation fails, 2 for usage or
//! configuration errors. Payloads (CSV/JSON) go to stdout or `--output`;
//! diagnostics go to stderr, errors prefixed with `error:`.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use decifuse::analysis::{asymptotics, bound, error_floor, exponent_report, find_m, ExponentReport};
use decifuse::harness::{
    default_alpha_grid, run_experiment, sweep_alpha, write_csv, ExperimentConfig, Rule, CSV_HEADER,
};
use decifuse::{NetworkConfig, SchemeKind, SensingModel};
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "decifuse", version, about = "Distributed detection over fading channels: simulation and analysis")]
struct Cli {
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a grid experiment described by a JSON config.
    Simulate(ConfigArgs),
    /// Monte Carlo error probability over a grid of power splits.
    SweepAlpha(SweepArgs),
    /// Analytical upper bound at one homogeneous operating point.
    Bound(BoundArgs),
    /// Error floor of the LRT on error-free local decisions.
    Floor(FloorArgs),
    /// Large-network error exponents.
    Asymptotics(AsymptoticsArgs),
    /// Join Monte Carlo and bound columns and flag bound violations.
    Compare(CompareArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment config.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a config key (dotted paths reach nested keys); the value is
    /// parsed as JSON, falling back to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV destination (overrides the config's `output`).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the validated config as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct Point {
    #[arg(long = "snr-c", allow_negative_numbers = true)]
    snr_c: f64,
    #[arg(long = "snr-h", allow_negative_numbers = true)]
    snr_h: f64,
    #[arg(long, default_value_t = 0.6)]
    pi0: f64,
    #[arg(long = "K", alias = "k", default_value_t = 10)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scheme: SchemeKind,
    #[arg(long, default_value = "lrt")]
    rule: Rule,
    #[command(flatten)]
    point: Point,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated α values; defaults to 0.05, 0.10, …, 0.95.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    scheme: SchemeKind,
    #[command(flatten)]
    point: Point,
    /// Power split; required for stc and fusion.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FloorArgs {
    #[arg(long = "snr-c", allow_negative_numbers = true)]
    snr_c: f64,
    #[arg(long, default_value_t = 0.6)]
    pi0: f64,
    #[arg(long = "K", alias = "k", default_value_t = 10)]
    k: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    point: Point,
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    /// Comma-separated schemes; all four by default.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<SchemeKind>>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// CSV written by `simulate`.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    input: Option<PathBuf>,
    /// Run this config first and compare its rows.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE", requires = "config")]
    overrides: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn compute(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, err: e.into() })
    }
    fn compute(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 1, err: e.into() })
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(output: Option<&Path>, payload: &[u8]) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, payload).with_context(|| format!("writing {}", p.display())).compute(),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(payload).and_then(|_| out.flush()).context("writing stdout").compute()
        }
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).compute()?;
    for r in rows {
        w.write_record(r).compute()?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}")).compute()
}

fn set_path(root: &mut Value, key: &str, value: Value) -> anyhow::Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| anyhow!("'{key}' does not name an object field"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .usage()?;
    let mut v: Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))
        .usage()?;
    for o in overrides {
        let (k, raw) = o.split_once('=').ok_or_else(|| anyhow!("override '{o}' is not KEY=VALUE")).usage()?;
        let val = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut v, k.trim(), val).usage()?;
    }
    let cfg: ExperimentConfig = serde_json::from_value(v).context("invalid config").usage()?;
    cfg.validate().context("invalid config").usage()?;
    Ok(cfg)
}

fn models(p: &Point, rho: f64, alpha: f64) -> Result<(SensingModel, NetworkConfig), Failure> {
    let s = SensingModel::homogeneous(p.k, p.snr_c, p.pi0, rho).usage()?;
    let n = NetworkConfig::homogeneous(p.k, p.snr_h, alpha).usage()?;
    Ok((s, n))
}

fn simulate(a: ConfigArgs, verbose: u8) -> Result<(), Failure> {
    let mut cfg = load_config(&a.config, &a.overrides)?;
    if let Some(o) = a.output {
        cfg.output = Some(o);
    }
    if a.dump_config {
        let mut s = serde_json::to_string_pretty(&cfg).compute()?;
        s.push('\n');
        return emit(None, s.as_bytes());
    }
    let t = Instant::now();
    let to_stdout = cfg.output.is_none();
    let rows = run_experiment(&cfg).compute()?;
    if to_stdout {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).compute()?;
        emit(None, &buf)?;
    }
    if verbose > 0 {
        eprintln!("simulated {} rows in {:.1} s", rows.len(), t.elapsed().as_secs_f64());
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    if !a.scheme.uses_alpha() {
        return Err(anyhow!("scheme {} has no power split to sweep", a.scheme)).usage();
    }
    let grid = a.grid.unwrap_or_else(default_alpha_grid);
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
        return Err(anyhow!("alpha grid must be non-empty and inside (0,1)")).usage();
    }
    if a.trials < decifuse::harness::MIN_TRIALS {
        return Err(anyhow!("trials must be at least {}", decifuse::harness::MIN_TRIALS)).usage();
    }
    let (s, n) = models(&a.point, a.rho, grid[0])?;
    let sw = sweep_alpha(a.scheme, a.rule, &s, &n, &grid, a.trials, a.seed).compute()?;
    let p = &a.point;
    let rows: Vec<Vec<String>> = sw
        .points
        .iter()
        .map(|(alpha, e)| {
            vec![
                a.scheme.to_string(),
                a.rule.to_string(),
                p.k.to_string(),
                a.rho.to_string(),
                p.pi0.to_string(),
                p.snr_c.to_string(),
                p.snr_h.to_string(),
                alpha.to_string(),
                e.trials.to_string(),
                sci(e.pe_hat),
                sci(e.stderr),
                sw.alpha_star.to_string(),
            ]
        })
        .collect();
    let header = [
        "scheme", "rule", "K", "rho", "pi0", "snr_c_db", "snr_h_db", "alpha", "trials", "pe_hat", "stderr",
        "alpha_star",
    ];
    emit(a.output.as_deref(), &csv_bytes(&header, &rows)?)
}

fn bound_cmd(a: BoundArgs) -> Result<(), Failure> {
    let alpha = match (a.scheme.uses_alpha(), a.alpha) {
        (true, None) => return Err(anyhow!("--alpha is required for {}", a.scheme)).usage(),
        (_, Some(x)) => x,
        (false, None) => 0.5,
    };
    let (s, n) = models(&a.point, 0.0, alpha)?;
    let b = bound(a.scheme, &s, &n).compute()?;
    let payload = match a.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&b).compute()?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let p = &a.point;
            let row = vec![
                a.scheme.to_string(),
                p.k.to_string(),
                p.pi0.to_string(),
                p.snr_c.to_string(),
                p.snr_h.to_string(),
                if a.scheme.uses_alpha() { alpha.to_string() } else { String::new() },
                sci(b.pe11),
                sci(b.pe12),
                sci(b.pe21),
                sci(b.pe22),
                sci(b.pe_bar),
                b.t_star.to_string(),
                b.m.map(|m| m.to_string()).unwrap_or_default(),
            ];
            let header = [
                "scheme", "K", "pi0", "snr_c_db", "snr_h_db", "alpha", "pe11", "pe12", "pe21", "pe22", "pe_bound",
                "t_star", "m",
            ];
            csv_bytes(&header, &[row])?
        }
    };
    emit(a.output.as_deref(), &payload)
}

fn floor_cmd(a: FloorArgs) -> Result<(), Failure> {
    let s = SensingModel::homogeneous(a.k, a.snr_c, a.pi0, 0.0).usage()?;
    let (pd, pf) = s.pd_pf(0);
    let m = find_m(pd, pf, a.pi0, a.k).ok();
    let row = vec![
        a.k.to_string(),
        a.pi0.to_string(),
        a.snr_c.to_string(),
        sci(pd),
        sci(pf),
        m.map(|m| m.to_string()).unwrap_or_default(),
        sci(error_floor(pd, pf, a.pi0, a.k)),
    ];
    let header = ["K", "pi0", "snr_c_db", "pd", "pf", "m", "error_floor"];
    emit(a.output.as_deref(), &csv_bytes(&header, &[row])?)
}

fn asymptotics_csv(r: &ExponentReport) -> Result<Vec<u8>, Failure> {
    const TERMS: [&str; 4] = ["pe11", "pe12", "pe21", "pe22"];
    let mut rows = Vec::new();
    for e in &r.schemes {
        for (i, t) in e.terms.iter().enumerate() {
            rows.push(vec![
                e.scheme.to_string(),
                TERMS[i].to_string(),
                sci(t.mu),
                sci(t.sigma2),
                sci(t.kappa),
                sci(t.rate),
                (i == e.dominant).to_string(),
                sci(e.gamma),
                e.t0.to_string(),
            ]);
        }
    }
    csv_bytes(&["scheme", "term", "mu", "sigma2", "kappa", "rate", "dominant", "gamma", "t0"], &rows)
}

fn asymptotics_cmd(a: AsymptoticsArgs) -> Result<(), Failure> {
    let (s, n) = models(&a.point, 0.0, a.alpha)?;
    let schemes = a.schemes.unwrap_or_else(|| SchemeKind::ALL.to_vec());
    let all = schemes.iter().map(|&k| asymptotics(k, &s, &n)).collect::<Result<Vec<_>, _>>().compute()?;
    let report = exponent_report(all);
    let payload = match a.format {
        Format::Csv => asymptotics_csv(&report)?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).compute()?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(a.output.as_deref(), &payload)
}

fn compare(a: CompareArgs) -> Result<(), Failure> {
    let records: Vec<Vec<String>> = if let Some(path) = &a.input {
        let mut rd = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display())).usage()?;
        let header: Vec<String> = rd.headers().usage()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(anyhow!("{} does not have the simulate CSV header", path.display())).usage();
        }
        rd.records().map(|r| r.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>().usage()?
    } else {
        let mut cfg = load_config(a.config.as_deref().expect("clap enforces one source"), &a.overrides)?;
        cfg.output = None;
        run_experiment(&cfg).compute()?.iter().map(|r| r.csv_record()).collect()
    };
    let col = |name: &str| CSV_HEADER.iter().position(|h| *h == name).expect("known column");
    let (pe, se, b) = (col("pe_hat"), col("stderr"), col("pe_bound"));
    let parse = |s: &str| -> Result<f64, Failure> { s.parse::<f64>().with_context(|| format!("bad number '{s}'")).usage() };
    let mut rows = Vec::with_capacity(records.len());
    for mut r in records {
        if r.len() != CSV_HEADER.len() {
            return Err(anyhow!("row has {} columns, expected {}", r.len(), CSV_HEADER.len())).usage();
        }
        let (margin, violation) = if r[b].is_empty() {
            (String::new(), String::new())
        } else {
            let m = parse(&r[b])? - (parse(&r[pe])? - 3.0 * parse(&r[se])?);
            (sci(m), (m < 0.0).to_string())
        };
        r.push(margin);
        r.push(violation);
        rows.push(r);
    }
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    header.extend(["bound_margin", "bound_violation"]);
    emit(a.output.as_deref(), &csv_bytes(&header, &rows)?)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("DECIFUSE_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| anyhow!("DECIFUSE_THREADS must be a non-negative integer, got '{v}'")).usage()?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().compute()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.verbose),
        Command::SweepAlpha(a) => sweep(a),
        Command::Bound(a) => bound_cmd(a),
        Command::Floor(a) => floor_cmd(a),
        Command::Asymptotics(a) => asymptotics_cmd(a),
        Command::Compare(a) => compare(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
