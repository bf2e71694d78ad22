use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ksurf_cli::{parse_angle, parse_list, run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "ksurf", version, about = "Branched pseudospherical surfaces on hyperbolic disks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Geodesic radius of the disk
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Opening angle of the first sector; radians or e.g. "pi/6"
    #[arg(long, global = true, value_parser = parse_angle)]
    phi0: Option<f64>,
    /// Cutoff angle; radians or e.g. "3pi/4"
    #[arg(long = "phi-star", global = true, value_parser = parse_angle)]
    phi_star: Option<f64>,
    /// Hyperbolic edge length
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Number of sectors at the centre (2m)
    #[arg(long, global = true)]
    sectors: Option<usize>,
    /// Cap on branch generations
    #[arg(long = "max-generations", global = true)]
    max_generations: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Path of the JSON report
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Radii for energy-scan: "2,3,4" or "2:6"
    #[arg(long = "r-list", global = true)]
    r_list: Option<String>,
    /// Bobbin throat curvature
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// End of the Painlevé III integration
    #[arg(long = "z-max", global = true)]
    z_max: Option<f64>,
    /// Length of the bobbin meridian
    #[arg(long = "xi-max", global = true)]
    xi_max: Option<f64>,
    /// ODE step
    #[arg(long, global = true)]
    step: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a branched surface and export OBJ, scalars and reports
    Build,
    /// Energies and cut depth over a list of radii
    EnergyScan,
    /// Branch-angle ratios against the frontier curves
    Frontier,
    /// Meridian of Minding's bobbin
    Bobbin,
    /// Painlevé III profile of an Amsler sector
    Amsler,
    /// Run the invariant suites; nonzero exit on the first failure
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::EnergyScan => "energy-scan",
            Command::Frontier => "frontier",
            Command::Bobbin => "bobbin",
            Command::Amsler => "amsler",
            Command::Verify => "verify",
        }
    }
}

fn config(cli: Cli) -> Result<RunConfig, CliError> {
    let d = RunConfig::default();
    let r_list = match cli.r_list {
        Some(text) => parse_list(&text).map_err(CliError::Config)?,
        None => d.r_list,
    };
    Ok(RunConfig {
        command: cli.command.name().to_string(),
        radius: cli.radius.unwrap_or(d.radius),
        phi0: cli.phi0.or(d.phi0),
        phi_star: cli.phi_star.unwrap_or(d.phi_star),
        delta: cli.delta.unwrap_or(d.delta),
        sectors: cli.sectors.unwrap_or(d.sectors),
        max_generations: cli.max_generations.unwrap_or(d.max_generations),
        r_list,
        kappa: cli.kappa.unwrap_or(d.kappa),
        z_max: cli.z_max.unwrap_or(d.z_max),
        xi_max: cli.xi_max.unwrap_or(d.xi_max),
        step: cli.step.unwrap_or(d.step),
        out: cli.out.unwrap_or(d.out),
        report: cli.report,
        threads: cli.threads,
    })
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
    let result = config(cli).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        run(&cfg)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
