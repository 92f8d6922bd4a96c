//! Thin command-line front end over the library pipelines.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use qsmear::config::{Format, RunConfig};
use qsmear::driver;
use qsmear::error::{Error, Result};
use qsmear::report;

#[derive(Parser)]
#[command(
    name = "qsmear",
    version,
    about = "Gaussian-smeared measurement channel: simulation, sweeps, checks"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format. Defaults to csv for sweep, report elsewhere.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed override for the POVM demo.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps. Defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the smearing pipeline once and report diagnostics.
    Simulate,
    /// Run the pipeline over the configured (s, sigma) table.
    Sweep,
    /// Cross-check the numerics against the closed forms.
    Validate,
    /// Place the configured (s, sigma) point in the regime table.
    Classify,
    /// Coarse-graining estimate for the configured packet.
    Classical,
    /// Build and check a seeded random ancilla POVM.
    PovmDemo,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config {
                field: "--threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        // Only the first global pool wins; later calls are harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Cmd::Simulate => {
            let cfg = required_config(&cli)?;
            let out = driver::simulate(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let io = resolve_io(&cli, Some(&cfg));
            match io.format.unwrap_or(Format::Report) {
                Format::Report => {
                    let regime = cfg.analysis.classify.then_some(&out.regime);
                    let mut text = report::render_report(&cfg, &out.point, regime);
                    if cfg.analysis.classical {
                        let classical = driver::run_classical(&cfg)?.render();
                        // Drop the summary's leading "s:" line; the report
                        // already carries the packet width.
                        let rest = classical.split_once('\n').map_or(classical.as_str(), |(_, r)| r);
                        text.push_str(rest);
                    }
                    emit(io.path.as_deref(), &text)?;
                }
                Format::Csv => emit(io.path.as_deref(), &report::render_csv(&cfg, &[out.point]))?,
                Format::Bin => {
                    let path = io.path.as_deref().ok_or_else(|| Error::Config {
                        field: "output.path".into(),
                        reason: "bin format writes raw bytes and needs --output".into(),
                    })?;
                    let mut file = fs::File::create(path)?;
                    report::write_matrix_bin(&mut file, &out.position)?;
                }
            }
            Ok(0)
        }
        Cmd::Sweep => {
            let cfg = required_config(&cli)?;
            let io = resolve_io(&cli, Some(&cfg));
            let format = io.format.unwrap_or(Format::Csv);
            if format != Format::Csv {
                return Err(Error::Config {
                    field: "output.format".into(),
                    reason: format!("sweep emits a csv table, not {format}"),
                });
            }
            let rows = driver::run_sweep(&cfg)?;
            emit(io.path.as_deref(), &report::render_csv(&cfg, &rows))?;
            Ok(0)
        }
        Cmd::Validate => {
            let cfg = optional_config(&cli)?;
            let io = resolve_io(&cli, cfg.as_ref());
            require_report(io.format, "validate")?;
            let summary = driver::run_validate(cfg.as_ref())?;
            emit(io.path.as_deref(), &summary.render())?;
            Ok(if summary.passed() { 0 } else { 1 })
        }
        Cmd::Classify => {
            let cfg = required_config(&cli)?;
            let io = resolve_io(&cli, Some(&cfg));
            require_report(io.format, "classify")?;
            let regime = driver::run_classify(&cfg)?;
            emit(io.path.as_deref(), &driver::render_classify(&regime))?;
            Ok(0)
        }
        Cmd::Classical => {
            let cfg = required_config(&cli)?;
            let io = resolve_io(&cli, Some(&cfg));
            require_report(io.format, "classical")?;
            let summary = driver::run_classical(&cfg)?;
            emit(io.path.as_deref(), &summary.render())?;
            Ok(0)
        }
        Cmd::PovmDemo => {
            let cfg = optional_config(&cli)?;
            let io = resolve_io(&cli, cfg.as_ref());
            require_report(io.format, "povm-demo")?;
            let (dim_s, dim_a, cfg_seed) = match &cfg {
                Some(c) => (c.povm.dim_s, c.povm.dim_a, c.povm.seed),
                None => (2, 2, 0),
            };
            let demo = driver::run_povm_demo(dim_s, dim_a, cli.seed.unwrap_or(cfg_seed))?;
            emit(io.path.as_deref(), &demo.render())?;
            Ok(0)
        }
    }
}

fn required_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        field: "--config".into(),
        reason: "this command needs a configuration file".into(),
    })?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.povm.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn optional_config(cli: &Cli) -> Result<Option<RunConfig>> {
    match &cli.config {
        Some(_) => required_config(cli).map(Some),
        None => Ok(None),
    }
}

struct Io {
    path: Option<PathBuf>,
    format: Option<Format>,
}

/// Command-line flags win over the config's [output] table.
fn resolve_io(cli: &Cli, cfg: Option<&RunConfig>) -> Io {
    Io {
        path: cli
            .output
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.path.as_ref().map(PathBuf::from))),
        format: cli.format.or(cfg.and_then(|c| c.output.format)),
    }
}

fn require_report(format: Option<Format>, command: &str) -> Result<()> {
    match format {
        None | Some(Format::Report) => Ok(()),
        Some(other) => Err(Error::Config {
            field: "output.format".into(),
            reason: format!("{command} emits a text report, not {other}"),
        }),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
