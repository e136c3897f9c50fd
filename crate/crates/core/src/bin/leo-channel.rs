use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use leo_channel::commands::{self, CommandError, Format, Output};
use leo_channel::config::RunConfig;

/// Stochastic channel model for a LEO mega-constellation shell.
#[derive(Parser)]
#[command(name = "leo-channel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average visible satellites and availability over a latitude sweep.
    Coverage(Common),
    /// Gain, delay and Doppler distributions for one user.
    Distributions(Common),
    /// Delay-Doppler scattering function and global channel parameters.
    Scattering(Common),
    /// Run the oracle checks and write a JSON report.
    Validate(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lat_deg: Option<f64>,
    #[arg(long)]
    min_elev_deg: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    nu_step_hz: Option<f64>,
    #[arg(long)]
    tau_step_s: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<(RunConfig, Output), CommandError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.lat_deg {
            cfg.user.latitude_deg = v;
        }
        if let Some(v) = self.min_elev_deg {
            cfg.user.min_elevation_deg = v;
        }
        if let Some(v) = self.seed {
            cfg.mc.seed = v;
        }
        if let Some(v) = self.mc_samples {
            cfg.mc.samples = v;
        }
        if let Some(v) = self.nu_step_hz {
            cfg.grid.nu_step_hz = v;
        }
        if let Some(v) = self.tau_step_s {
            cfg.grid.tau_step_s = v;
        }
        cfg.validate()?;
        let format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        Ok((cfg, Output { dir: self.out.clone(), format }))
    }
}

fn set_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("LEO_CHANNEL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LEO_CHANNEL_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Coverage(c) => {
            let (cfg, out) = c.resolve()?;
            report(commands::coverage(&cfg, &out)?);
        }
        Command::Distributions(c) => {
            let (cfg, out) = c.resolve()?;
            report(commands::distributions(&cfg, &out)?);
        }
        Command::Scattering(c) => {
            let (cfg, out) = c.resolve()?;
            report(commands::scattering(&cfg, &out)?);
        }
        Command::Validate(c) => {
            let (cfg, out) = c.resolve()?;
            let result = commands::validate(&cfg, &out);
            let path = out.dir.join("report.json");
            if let Ok(text) = std::fs::read_to_string(&path) {
                if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
                    for check in value["checks"].as_array().into_iter().flatten() {
                        eprintln!(
                            "{:<5} {:<18} {} (limit {})",
                            if check["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                            check["name"].as_str().unwrap_or("?"),
                            check["value"],
                            check["threshold"]
                        );
                    }
                }
            }
            result?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = set_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
