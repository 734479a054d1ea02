use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hadamard_fem::commands::{cmd_mesh, cmd_reproduce, cmd_solve, cmd_sweep, cmd_variation, cmd_verify, Outcome};
use hadamard_fem::config::RunConfig;
use hadamard_fem::Result;

/// Eigenvalues of the Laplacian on deformed disks and their Hadamard variations.
#[derive(Parser)]
#[command(name = "hadamard-fem", version)]
struct Cli {
    /// TOML run configuration (defaults to a built-in preset)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh refinement level
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Number of eigenpairs
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Step of the finite-difference oracle
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    /// Also report the second variation with the mass term in place of Bdot
    #[arg(long, global = true)]
    debug_variation: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the disk mesh
    Mesh,
    /// Lowest eigenvalues at every grid value of t
    Solve,
    /// Eigenvalues, variations and 1/lambda_1 along the grid
    Sweep,
    /// Variation report checked against finite differences
    Variation,
    /// Inequalities and identities for a conformal blend
    Verify,
    /// Regenerate a stored experiment: table1, figure1 or figure2
    Reproduce { name: String },
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.command) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Command::Reproduce { name }) => RunConfig::preset(name)?,
            (None, Command::Sweep | Command::Variation) => RunConfig::figure2(),
            (None, _) => RunConfig::table1(),
        };
        if let Some(level) = self.level {
            cfg.mesh.level = level;
        }
        if let Some(modes) = self.modes {
            cfg.modes = modes;
        }
        if let Some(h) = self.fd_step {
            cfg.tolerances.fd_step = h;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        cfg.debug_variation |= self.debug_variation;
        cfg.validate()?;
        Ok(cfg)
    }

    fn run(&self) -> Result<Outcome> {
        let cfg = self.config()?;
        let out = cfg.output.clone();
        match &self.command {
            Command::Mesh => cmd_mesh(&cfg, &out),
            Command::Solve => cmd_solve(&cfg, &out),
            Command::Sweep => cmd_sweep(&cfg, &out),
            Command::Variation => cmd_variation(&cfg, &out),
            Command::Verify => cmd_verify(&cfg, &out),
            Command::Reproduce { name } => cmd_reproduce(name, &cfg, &out),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failed_checks > 0 {
                eprintln!("{} check(s) failed", outcome.failed_checks);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
