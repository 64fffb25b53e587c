//! `ellipcert` — machine-checked existence and positivity certificates
//! for `-Δu = λu + Σᵢ aᵢ u|u|^{i-1}` with zero Dirichlet data on
//! axis-aligned rectangles.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ellipcert_cli::commands::{
    cmd_certify, cmd_constants, cmd_plot_data, cmd_solve, parse_depth_flag, resolve_jobs, Ctx,
};
use ellipcert_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "ellipcert",
    version,
    about = "Validated existence and positivity certificates for semilinear \
             elliptic Dirichlet problems on rectangles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a floating-point Galerkin approximation and write it to an
    /// approximation file.
    Solve(CommonArgs),
    /// Run the verification pipeline and write a certificate (JSON) plus a
    /// human-readable summary table.
    Certify(CommonArgs),
    /// Sample an approximation on a uniform grid as CSV; optionally write
    /// the provably-positive cell grid.
    PlotData(CommonArgs),
    /// Print the constants registry (enclosures and provenance).
    Constants(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML with [problem]/[solver]/[rigor]/[output]).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Approximation file produced by `solve`.
    #[arg(long)]
    approx: Option<PathBuf>,
    /// Subdivision-depth override for range/flag grids (1..=12).
    #[arg(long)]
    depth: Option<usize>,
    /// Worker-thread cap; defaults to ELLIPCERT_THREADS, then 1.  All
    /// rigorous chains in this build are single-threaded, so the cap is an
    /// upper bound that is always honored.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output-path override (approximation, certificate, or CSV depending
    /// on the command).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    // clap itself exits with code 2 on usage errors, matching the
    // parse-error contract.
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&Ctx) -> _) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve),
        Command::Certify(a) => (a, cmd_certify),
        Command::PlotData(a) => (a, cmd_plot_data),
        Command::Constants(a) => (a, cmd_constants),
    };
    std::process::exit(dispatch(args, run));
}

fn dispatch(args: &CommonArgs, run: fn(&Ctx) -> Result<i32, ellipcert_cli::commands::CliError>) -> i32 {
    let ctx = match build_ctx(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ellipcert: {e}");
            eprintln!("stage: {}", e.stage());
            return e.exit_code();
        }
    };
    match run(&ctx) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ellipcert: {e}");
            eprintln!("stage: {}", e.stage());
            e.exit_code()
        }
    }
}

fn build_ctx(args: &CommonArgs) -> Result<Ctx, ellipcert_cli::commands::CliError> {
    let config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(Ctx {
        config_path: args.config.clone(),
        config,
        approx_path: args.approx.clone(),
        depth_override: parse_depth_flag(args.depth)?,
        out: args.out.clone(),
        jobs: resolve_jobs(args.jobs)?,
    })
}
