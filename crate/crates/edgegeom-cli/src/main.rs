//! Command line front end: geometry reports, finite-difference verification
//! of the response identities, endpoint modes, bulk spectra, and parameter
//! sweeps, driven by flags or a JSON run configuration.

mod commands;
mod config;
mod expr;
mod metrics;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "edgegeom",
    version,
    about = "Worldsheet and edge geometry toolkit",
    after_help = "Exit codes: 0 success, 1 physics precondition or verification \
                  failure, 2 configuration error."
)]
struct Cli {
    /// JSON run configuration; explicit flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Geometry report over a family grid or a metric chart (CSV).
    Report(Common),
    /// Finite-difference verification of the first-order responses (JSON lines).
    Verify(Common),
    /// Endpoint mode algebra of the rotating background (JSON).
    Modes(Common),
    /// Bulk mode spectra with independent references (JSON).
    Spectrum(Common),
    /// Endpoint modes swept across the edge speed range (CSV).
    Sweep(Common),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Report(_) => "report",
            Cmd::Verify(_) => "verify",
            Cmd::Modes(_) => "modes",
            Cmd::Spectrum(_) => "spectrum",
            Cmd::Sweep(_) => "sweep",
        }
    }

    fn common(self) -> Common {
        match self {
            Cmd::Report(c)
            | Cmd::Verify(c)
            | Cmd::Modes(c)
            | Cmd::Spectrum(c)
            | Cmd::Sweep(c) => c,
        }
    }
}

#[derive(Args, Default)]
struct Common {
    /// Family: helicoid, helicoid-offshell, helicoid-moving-edge, half-plane,
    /// cylinder, catenary, twisted-band, hyperbolic-edge, tilted-plane.
    #[arg(long)]
    family: Option<String>,

    /// Metric chart: minkowski-cartesian, minkowski-cylindrical, sphere-block,
    /// or custom:<file> with an expression table.
    #[arg(long)]
    metric: Option<String>,

    /// Bulk tension.
    #[arg(long)]
    mu: Option<f64>,

    /// Edge mass.
    #[arg(long)]
    mass: Option<f64>,

    /// Edge radius (or the chart scale a family takes).
    #[arg(long)]
    radius: Option<f64>,

    /// Angular rate of the rotating background; overrides the (mu, mass,
    /// radius) balance.
    #[arg(long)]
    omega0: Option<f64>,

    /// Grid spec: AxB for report, lo:hi:count for sweep, an integer matrix
    /// size for spectrum.
    #[arg(long)]
    grid: Option<String>,

    /// Verification suite preset: default or quick.
    #[arg(long)]
    suite: Option<String>,

    /// Seed for the verification field draws and the tilted-plane family.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for the verification sweep and parameter sweeps.
    #[arg(long)]
    jobs: Option<usize>,

    /// Output path; stdout when omitted. Writes go to a temp file first.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Relative tolerance override for the verification suite.
    #[arg(long)]
    tol: Option<f64>,

    /// Spectrum channel: in-plane, out-of-plane, or both.
    #[arg(long)]
    channel: Option<String>,

    /// Number of modes per spectrum channel.
    #[arg(long)]
    count: Option<usize>,
}

impl Common {
    fn into_config(self) -> RunConfig {
        RunConfig {
            command: None,
            family: self.family,
            metric: self.metric,
            mu: self.mu,
            mass: self.mass,
            radius: self.radius,
            omega0: self.omega0,
            grid: self.grid,
            suite: self.suite,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out,
            tol: self.tol,
            channel: self.channel,
            count: self.count,
        }
    }
}

fn resolve(cli: Cli) -> Result<(String, RunConfig), CliError> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (cmd_name, flags) = match cli.command {
        Some(cmd) => {
            let name = cmd.name().to_string();
            (Some(name), cmd.common().into_config())
        }
        None => (None, RunConfig::default()),
    };
    let merged = file.overlay(flags);
    let command = cmd_name.or_else(|| merged.command.clone()).ok_or_else(|| {
        CliError::Config(
            "no command given; pass a subcommand or a config file with a \
             'command' field"
            .into(),
        )
    })?;
    Ok((command, merged))
}

fn run() -> Result<bool, CliError> {
    let cli = Cli::parse();
    let (command, cfg) = resolve(cli)?;

    if let Some(jobs) = cfg.jobs {
        if jobs == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        // A second init in the same process is harmless; the pool is global.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    let artifact = match command.as_str() {
        "report" => commands::report(&cfg)?,
        "verify" => commands::verify(&cfg)?,
        "modes" => commands::modes(&cfg)?,
        "spectrum" => commands::spectrum(&cfg)?,
        "sweep" => commands::sweep(&cfg)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown command '{other}'; choose report, verify, modes, \
                 spectrum, or sweep"
            )))
        }
    };

    output::write_artifact(cfg.out.as_deref(), &artifact.text)?;
    eprintln!("{}", artifact.summary);
    Ok(artifact.ok)
}

fn main() {
    match run() {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("edgegeom: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
