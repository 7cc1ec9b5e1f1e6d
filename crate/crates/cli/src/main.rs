mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use viscompm::render::Axis;
use viscompm::scene::FillSpec;

use config::Overrides;

#[derive(Parser)]
#[command(name = "viscompm", version, about = "Viscoelastic MPM simulation and parameter calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `frames`.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    deterministic: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.out.clone(),
            seed: self.seed,
            frames: self.frames,
            deterministic: Some(self.deterministic),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write frame dumps, diagnostics and a manifest.
    Simulate(RunArgs),
    /// Fit material parameters to a directory of reference frame dumps.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
        /// Reference frame directory, overriding `calibration.reference_dir`.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Overrides `calibration.budget`.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Seed particles inside a closed point shell (CSV or PLY in, CSV out).
    Fill {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Voxels per axis: one value for all axes, or three.
        #[arg(long, num_args = 1..=3, default_values_t = [64])]
        resolution: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        per_voxel: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a space-time slice image (PGM) from a directory of frame dumps.
    Slice {
        /// Directory holding frame_0000.bin, frame_0001.bin, ...
        #[arg(long)]
        input: PathBuf,
        /// Output PGM file.
        #[arg(long)]
        out: PathBuf,
        /// Viewing direction.
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        /// Image row to extract; defaults to the middle row.
        #[arg(long)]
        row: Option<usize>,
        /// Draw each particle as 3×3 pixels.
        #[arg(long)]
        splat3: bool,
        /// Run config whose domain sets the view box; otherwise the frames' bounds are used.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print a run's manifest and a summary of its diagnostics.
    Inspect {
        /// Output directory of a simulate run.
        dir: PathBuf,
    },
}

fn resolution(v: &[usize]) -> Result<[usize; 3]> {
    match *v {
        [n] => Ok([n; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => anyhow::bail!("--resolution takes one or three values"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args.config, &args.overrides()),
        Command::Calibrate { run, reference, budget } => {
            commands::calibrate_cmd(&run.config, reference.as_deref(), budget, &run.overrides())
        }
        Command::Fill { input, out, resolution: res, per_voxel, seed } => {
            let spec = FillSpec { voxel_resolution: resolution(&res)?, seed_per_voxel: per_voxel, seed };
            commands::fill(&input, &out, &spec)
        }
        Command::Slice { input, out, axis, width, height, row, splat3, config } => {
            commands::slice(&commands::SliceArgs {
                input,
                output: out,
                axis: axis.into(),
                width,
                height,
                row,
                splat3,
                config,
            })
        }
        Command::Inspect { dir } => commands::inspect(&dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let threads = std::env::var("VISCOMPM_THREADS").ok().and_then(|s| s.trim().parse().ok());
    viscompm::par::init_thread_pool(threads);
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
