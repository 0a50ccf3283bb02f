use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;

use tame_core::bench::{self, Bench, Format, Profile, RunConfig, Variant, VariantSelection};
use tame_core::eta::{AnnealCache, WindowKind};
use tame_core::stats::BootstrapSummary;
use tame_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tame-bench",
    version,
    about = "Energy-window time-averaging benchmarks of an emulated quantum simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON or TOML).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "profile")]
    config: Option<PathBuf>,

    /// Built-in configuration to start from.
    #[arg(long, global = true, value_parser = ["desk", "paper"])]
    profile: Option<String>,

    /// Run a single seed instead of the configured list.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["1", "2", "both"])]
    variant: Option<String>,

    #[arg(long, global = true, value_parser = ["low", "mid", "high", "all"])]
    window: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the eigenvalues of the target Hamiltonian and the windows.
    Spectrum,
    /// Sample the standard of comparison only.
    Standardize,
    /// Measure the simulation diagnostic for every corruption strength.
    Arbitrate,
    /// Full benchmark: standardize, arbitrate, judge and write reports.
    Run,
    /// Print a saved report and redraw its CSV and charts.
    Report {
        /// Saved report; defaults to `<out>/report.json`.
        path: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::InvalidWindow { .. }
        | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match (&cli.config, &cli.profile) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => RunConfig::profile(p.parse::<Profile>()?),
        (None, None) => RunConfig::profile(Profile::Desk),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(v) = &cli.variant {
        cfg.variant = v.parse::<VariantSelection>()?;
    }
    if let Some(w) = &cli.window {
        cfg.windows = match w.as_str() {
            "all" => WindowKind::ALL.to_vec(),
            one => vec![one.parse::<WindowKind>()?],
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output
        .clone()
        .unwrap_or_else(|| PathBuf::from("tame-out"))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    if let Command::Report { path } = &cli.command {
        return report(cli, path.as_deref());
    }
    let cfg = resolve_config(cli)?;
    match cli.command {
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum => spectrum(cfg),
        Command::Standardize => standardize(cfg),
        Command::Arbitrate => arbitrate(cfg),
        Command::Run => run(cfg),
        Command::Report { .. } => unreachable!(),
    }
}

fn spectrum(cfg: RunConfig) -> Result<ExitCode, Error> {
    let b = Bench::new(cfg)?;
    let s = b.spectrum();
    println!(
        "# e_min {} e_max {} breadth {}",
        s.e_min, s.e_max, s.breadth
    );
    for w in &b.windows {
        println!(
            "# window {} [{}, {}]",
            w.kind, w.window.eps_min, w.window.eps_max
        );
    }
    println!("index,energy");
    for (i, e) in b.eigen().energies.iter().enumerate() {
        println!("{i},{e}");
    }
    if let Some(dir) = &b.config.output {
        write_json(dir, "spectrum.json", &b.eigen().energies)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct StandardRecord {
    seed: u64,
    variant: Variant,
    window: WindowKind,
    summary: Option<BootstrapSummary>,
    accepted: usize,
    proposals: usize,
    error: Option<String>,
}

fn standardize(cfg: RunConfig) -> Result<ExitCode, Error> {
    let b = Bench::new(cfg)?;
    let mut records = Vec::new();
    let mut failed = false;
    for &seed in &b.config.seeds {
        for variant in b.config.variant.variants() {
            for w in &b.windows {
                let mut rec = StandardRecord {
                    seed,
                    variant,
                    window: w.kind,
                    summary: None,
                    accepted: 0,
                    proposals: 0,
                    error: None,
                };
                match b.standard(variant, w.kind, seed) {
                    Ok(s) => {
                        println!(
                            "seed {seed} variant {variant} {}: {:.6} [{:.6}, {:.6}] ({} of {} proposals)",
                            w.kind,
                            s.summary.mean,
                            s.summary.ci_low,
                            s.summary.ci_high,
                            s.accepted(),
                            s.proposals
                        );
                        rec.summary = Some(s.summary);
                        rec.accepted = s.accepted();
                        rec.proposals = s.proposals;
                    }
                    Err(e) => {
                        println!("seed {seed} variant {variant} {}: error: {e}", w.kind);
                        rec.error = Some(e.to_string());
                        failed = true;
                    }
                }
                records.push(rec);
            }
        }
    }
    if let Some(dir) = &b.config.output {
        write_json(dir, "standards.json", &records)?;
    }
    Ok(if failed {
        ExitCode::from(EXIT_NUMERIC)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct DiagnosticRecord {
    seed: u64,
    variant: Variant,
    window: WindowKind,
    eta: f64,
    summary: Option<BootstrapSummary>,
    accepted: usize,
    attempts: usize,
    error: Option<String>,
}

fn arbitrate(cfg: RunConfig) -> Result<ExitCode, Error> {
    let b = Bench::new(cfg)?;
    let mut records = Vec::new();
    let mut failed = false;
    for &eta in &b.config.eta_list {
        let sim = b.simulator(eta)?;
        let cache = AnnealCache::new();
        for &seed in &b.config.seeds {
            for variant in b.config.variant.variants() {
                for w in &b.windows {
                    let mut rec = DiagnosticRecord {
                        seed,
                        variant,
                        window: w.kind,
                        eta,
                        summary: None,
                        accepted: 0,
                        attempts: 0,
                        error: None,
                    };
                    match b.diagnostic(&sim, &cache, variant, w.kind, eta, seed) {
                        Ok(d) => {
                            println!(
                                "seed {seed} variant {variant} {} eta {eta}: {:.6} [{:.6}, {:.6}] ({} values, {} attempts)",
                                w.kind,
                                d.summary.mean,
                                d.summary.ci_low,
                                d.summary.ci_high,
                                d.accepted(),
                                d.attempts
                            );
                            rec.summary = Some(d.summary);
                            rec.accepted = d.accepted();
                            rec.attempts = d.attempts;
                        }
                        Err(e) => {
                            println!("seed {seed} variant {variant} {} eta {eta}: {e}", w.kind);
                            failed |= !matches!(e, Error::ArbitrationStarved { .. });
                            rec.error = Some(e.to_string());
                        }
                    }
                    records.push(rec);
                }
            }
        }
    }
    if let Some(dir) = &b.config.output {
        write_json(dir, "diagnostics.json", &records)?;
    }
    Ok(if failed {
        ExitCode::from(EXIT_NUMERIC)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cfg: RunConfig) -> Result<ExitCode, Error> {
    let dir = output_dir(&cfg);
    let report = bench::run(&cfg)?;
    print!("{}", bench::summary_table(&report));
    for p in bench::emit(&report, &dir, &Format::ALL)? {
        info!("wrote {}", p.display());
    }
    Ok(if report.has_failures() {
        ExitCode::from(EXIT_NUMERIC)
    } else {
        ExitCode::SUCCESS
    })
}

fn report(cli: &Cli, path: Option<&Path>) -> Result<ExitCode, Error> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("tame-out"));
    let path = path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join("report.json"));
    let report = bench::load_report(&path)?;
    print!("{}", bench::summary_table(&report));
    let out = path.parent().map(Path::to_path_buf).unwrap_or(dir);
    for p in bench::emit(&report, &out, &[Format::Csv, Format::Svg])? {
        info!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
