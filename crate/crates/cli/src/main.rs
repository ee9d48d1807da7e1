use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod selftest;

use commands::{CausalityFailure, ZetaFailures};
use config::{apply_bump_spec, Command, Config, ConfigError, Engine, Equation};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CAUSALITY: u8 = 4;

/// Massless Dirac-Weyl and Klein-Gordon evolution and Huygens diagnostics.
#[derive(Parser)]
#[command(name = "hdw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evolve initial data and write field dumps plus a JSON summary.
    Evolve(RunArgs),
    /// Evolve and classify the radial mass profile (shell vs interior tail).
    Huygens(RunArgs),
    /// Scan the segment integral in ε and extrapolate to ε → 0⁺.
    Zeta(RunArgs),
    /// Run the quick invariant suite.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    eq: Option<Equation>,
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per axis.
    #[arg(long = "N")]
    points: Option<usize>,
    /// Box length.
    #[arg(long = "L")]
    length: Option<f64>,
    /// Initial bump, e.g. `a=0.5,amp=1,comp=0,center=0:0,field=g`.
    #[arg(long)]
    bump: Option<String>,
    /// Comma-separated list of times.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip binary field dumps.
    #[arg(long)]
    no_dumps: bool,
    /// Shell band margin.
    #[arg(long)]
    w: Option<f64>,
    /// Tail-fraction threshold.
    #[arg(long)]
    tau: Option<f64>,
    /// Closed-form probe count (n = 2, 3).
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `lagrange<p>`, `trilinear` or `band_limited`.
    #[arg(long)]
    interp: Option<String>,
    /// Sphere rule as POLARxAZIMUTHAL.
    #[arg(long)]
    sphere: Option<String>,
    /// Disk rule as POLARxAZIMUTHAL.
    #[arg(long)]
    disk: Option<String>,
    /// Comma-separated radii (zeta).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// Comma-separated, strictly decreasing ε schedule (zeta).
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

impl RunArgs {
    fn into_config(self) -> Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = Some(v);
                }
            };
        }
        set!(c.run.equation, self.eq);
        set!(c.run.n, self.n);
        set!(c.run.engine, self.engine);
        set!(c.run.times, self.t);
        set!(c.grid.points, self.points);
        set!(c.grid.length, self.length);
        if let Some(spec) = &self.bump {
            apply_bump_spec(&mut c.initial, spec)?;
        }
        set!(c.analysis.w, self.w);
        set!(c.analysis.tau, self.tau);
        set!(c.analysis.probes, self.probes);
        set!(c.analysis.seed, self.seed);
        set!(c.analysis.interpolation, self.interp);
        set!(c.analysis.sphere, self.sphere);
        set!(c.analysis.disk, self.disk);
        set!(c.analysis.r, self.r);
        set!(c.analysis.eps, self.eps);
        set!(c.output.dir, self.out);
        if self.no_dumps {
            c.output.dumps = Some(false);
        }
        Ok(c)
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HDW_THREADS") {
        let n: usize = v.parse().map_err(|_| ConfigError(format!("HDW_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(ConfigError("HDW_THREADS must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<u8> {
    init_threads()?;
    let (command, args) = match cli.command {
        Sub::Selftest => return Ok(if selftest::run()? { 0 } else { EXIT_NUMERICAL }),
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Huygens(a) => (Command::Huygens, a),
        Sub::Zeta(a) => (Command::Zeta, a),
    };
    let cfg = args.into_config()?.resolve(command)?;
    match command {
        Command::Evolve => commands::evolve(&cfg)?,
        Command::Huygens => commands::huygens(&cfg)?,
        Command::Zeta => commands::zeta(&cfg)?,
    }
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    if err.downcast_ref::<CausalityFailure>().is_some() {
        return EXIT_CAUSALITY;
    }
    if err.downcast_ref::<ZetaFailures>().is_some() {
        return EXIT_NUMERICAL;
    }
    match err.downcast_ref::<hdw_core::Error>() {
        Some(hdw_core::Error::NonConvergence { .. } | hdw_core::Error::ExtrapolationDivergence(_)) => EXIT_NUMERICAL,
        Some(hdw_core::Error::Io(_) | hdw_core::Error::Format(_)) => EXIT_FAILURE,
        Some(_) => EXIT_CONFIG,
        None => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
