//! Command-line front end: `qlab <config.toml> [--experiment K] [--seed S] [--out-dir D]`.
//!
//! Exit codes: 0 on success, 1 on input or I/O errors, 2 when a sampled
//! verdict contradicts an algebraic prediction (the report is still written).

mod config;
mod report;

use std::path::PathBuf;

use clap::Parser;

pub use config::{
    ExperimentConfig, ExperimentKind, FockConfig, ModeConfig, ModelSpec, OutputConfig, Overrides, PhasePointConfig,
    SamplerConfig, StatesConfig,
};
pub use report::{
    cyclicity_csv, emit_report, format_float, profile_csv, run, to_json, CyclicitySection, KnightSection,
    LocalitySection, MeasureSection, ReportBundle, ReportPaths, SeparabilitySection, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qlab",
    version,
    about = "Localized vacuum excitations in finite harmonic systems"
)]
pub struct Args {
    /// Experiment configuration (TOML).
    pub config: PathBuf,
    /// Experiment to run, overriding the file.
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentKind>,
    /// Sampler seed, overriding the file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the file.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            experiment: self.experiment,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn execute(args: &Args) -> i32 {
    let outcome = ExperimentConfig::from_path(&args.config).and_then(|mut config| {
        config.apply(&args.overrides());
        let bundle = run(&config)?;
        let paths = emit_report(&bundle, &bundle.config.output.dir)?;
        Ok((bundle, paths))
    });
    match outcome {
        Ok((bundle, paths)) => {
            println!("wrote {}", paths.json.display());
            if bundle.consistent {
                EXIT_OK
            } else {
                eprintln!(
                    "error: a sampled verdict contradicts its algebraic prediction; see {}",
                    paths.json.display()
                );
                EXIT_INCONSISTENT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}
