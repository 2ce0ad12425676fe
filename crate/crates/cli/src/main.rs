use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ladder_dicke::config::{ListValue, Mode, OutputFormat, PresetId, RawConfig, TauScale, TauTable};
use ladder_dicke::{oracle_check, output, plotdata, presets, run, Row};

/// Steady-state photon statistics of N three-level ladder atoms coupled
/// collectively to thermal or pumped baths.
#[derive(Parser)]
#[command(name = "ladder-dicke", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point.
    Point(Args),
    /// Evaluate the Cartesian product of N, bath 1 and bath 2 values.
    Sweep(Args),
    /// Run a figure preset (needs --preset).
    Figure(Args),
    /// Compare against the brute-force master equation (N <= 4).
    OracleCheck(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Atom numbers: `a,b,c` or `start:stop:count` (integers only).
    #[arg(long = "n", value_name = "LIST")]
    n: Option<String>,
    /// Saturation parameter of transition 1 (values above 1 mean repumping).
    #[arg(long, value_name = "LIST", conflicts_with = "nbar1")]
    eta1: Option<String>,
    /// Saturation parameter of transition 2.
    #[arg(long, value_name = "LIST", conflicts_with = "nbar2")]
    eta2: Option<String>,
    /// Bath occupation of transition 1.
    #[arg(long, value_name = "LIST")]
    nbar1: Option<String>,
    /// Bath occupation of transition 2.
    #[arg(long, value_name = "LIST")]
    nbar2: Option<String>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    /// First delay, in units of 1 / gamma1.
    #[arg(long)]
    tau_start: Option<f64>,
    #[arg(long)]
    tau_stop: Option<f64>,
    #[arg(long)]
    tau_points: Option<usize>,
    #[arg(long, value_enum)]
    tau_scale: Option<TauScale>,
    /// Delay correlators to tabulate, e.g. `11,12`.
    #[arg(long, value_name = "LIST")]
    series: Option<String>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetId>,
    /// SNR threshold for the fig4b locus.
    #[arg(long)]
    snr_min: Option<f64>,
    /// Directory for plot-ready `.dat` files (figure presets).
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

impl Args {
    fn raw(&self) -> Result<RawConfig> {
        let base = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let list = |s: &Option<String>| s.as_ref().map(|t| ListValue::Text(t.clone()));
        let tau = (self.tau_start.is_some()
            || self.tau_stop.is_some()
            || self.tau_points.is_some()
            || self.tau_scale.is_some())
        .then(|| TauTable {
            start: self.tau_start,
            stop: self.tau_stop,
            points: self.tau_points,
            scale: self.tau_scale,
        });
        let flags = RawConfig {
            n: list(&self.n),
            eta1: list(&self.eta1),
            eta2: list(&self.eta2),
            nbar1: list(&self.nbar1),
            nbar2: list(&self.nbar2),
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            tau,
            series: self
                .series
                .as_ref()
                .map(|s| s.split(',').map(|x| x.trim().to_string()).collect()),
            format: self.format,
            out: self.out.clone(),
            plot_dir: self.plot_dir.clone(),
            preset: self.preset,
            snr_min: self.snr_min,
            ..RawConfig::default()
        };
        // A bath given on the command line replaces any form of it in the file.
        let mut base = base;
        if flags.eta1.is_some() || flags.nbar1.is_some() {
            (base.eta1, base.nbar1, base.temperature1, base.pump1) = (None, None, None, None);
        }
        if flags.eta2.is_some() || flags.nbar2.is_some() {
            (base.eta2, base.nbar2, base.temperature2, base.pump2) = (None, None, None, None);
        }
        Ok(base.overlay(flags))
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_rows(rows: &[Row], format: OutputFormat, out: &Option<PathBuf>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        OutputFormat::Csv => output::write_csv(rows, &mut w)?,
        OutputFormat::Json => output::write_json(rows, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Reports failed rows on stderr; true when all rows succeeded.
fn report(rows: &[Row]) -> bool {
    let failed: Vec<&Row> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "error: N={} eta1={:?} eta2={:?}: {}",
            r.atoms,
            r.eta[0],
            r.eta[1],
            r.error.as_deref().unwrap_or_default()
        );
    }
    failed.is_empty()
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Point(args) => {
            let cfg = args.raw()?.resolve(Mode::Single)?;
            let rows = run::run_points(&run::grid_points(&cfg), &run::series_request(&cfg)?)?;
            write_rows(&rows, cfg.format, &cfg.out)?;
            Ok(report(&rows))
        }
        Command::Sweep(args) => {
            let cfg = args.raw()?.resolve(Mode::Grid)?;
            log::info!("sweeping {} points", cfg.grid_size());
            let rows = run::run_points(&run::grid_points(&cfg), &run::series_request(&cfg)?)?;
            write_rows(&rows, cfg.format, &cfg.out)?;
            Ok(report(&rows))
        }
        Command::Figure(args) => {
            let cfg = args.raw()?.resolve(Mode::FigurePreset)?;
            if !cfg.atoms.is_empty() || cfg.bath.iter().any(|b| !b.is_empty()) {
                log::warn!("presets fix N and the bath grid; --n, --eta and --nbar are ignored");
            }
            let preset = cfg.preset.expect("validated");
            let rows = presets::run_preset(preset, &cfg)?;
            write_rows(&rows, cfg.format, &cfg.out)?;
            if let Some(dir) = &cfg.plot_dir {
                let mut extra = vec![format!("gamma1 = {}, gamma2 = {}", cfg.gamma[0], cfg.gamma[1])];
                if preset == PresetId::Fig4b {
                    extra.push(format!("snr threshold = {}", cfg.snr_min));
                }
                for path in plotdata::emit_plotdata(&rows, preset, dir, &extra)? {
                    log::info!("wrote {}", path.display());
                }
            }
            Ok(report(&rows))
        }
        Command::OracleCheck(args) => {
            let mut raw = args.raw()?;
            raw.n.get_or_insert(ListValue::Text("1,2,3".into()));
            if raw.eta1.is_none() && raw.nbar1.is_none() {
                raw.eta1 = Some(ListValue::Text("0.3,0.8".into()));
            }
            if raw.eta2.is_none() && raw.nbar2.is_none() {
                raw.eta2 = Some(ListValue::Text("0.2,0.7".into()));
            }
            let cfg = raw.resolve(Mode::Grid)?;
            let rows = oracle_check::run_check(&cfg)?;
            let mut w = sink(&cfg.out)?;
            oracle_check::write(&rows, cfg.format, &mut w)?;
            w.flush()?;
            let failed = rows.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                eprintln!("error: {failed} of {} oracle checks failed", rows.len());
            }
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
