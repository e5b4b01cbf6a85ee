use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use addfield::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use addfield::Error;
use clap::{Args, Parser, Subcommand};
use log::{error, info};

#[derive(Parser)]
#[command(name = "addfield", version, about = "Simulate additive Gaussian fields and their excursion sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump sampled paths as ANF1 files.
    Sample(Common),
    /// Render nodal domains {f ≤ 0} as a PGM image.
    Render(Common),
    /// Crossing probabilities of {f ≤ ℓ} across sizes and levels.
    Cross(Common),
    /// Crossing probabilities at levels 2h/√log R.
    Window(Common),
    /// Rescaled suprema against the Gumbel limit (or concentration with experiment.kind=extremes_study).
    Gumbel(Common),
    /// Blocking rectangles and ladder events (or experiment.kind=certificate_audit).
    Blocking(Common),
    /// Plane slices of a three-dimensional additive field.
    Slice3d(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of section.key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count override.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Sample(c) => (ExperimentKind::Sample, c),
            Command::Render(c) => (ExperimentKind::Render, c),
            Command::Cross(c) => (ExperimentKind::CrossingScan, c),
            Command::Window(c) => (ExperimentKind::WindowScan, c),
            Command::Gumbel(c) => (ExperimentKind::GumbelStudy, c),
            Command::Blocking(c) => (ExperimentKind::BlockingStudy, c),
            Command::Slice3d(c) => (ExperimentKind::Slice3D, c),
        }
    }
}

fn allowed(command: ExperimentKind, kind: ExperimentKind) -> bool {
    use ExperimentKind::*;
    command == kind || matches!((command, kind), (GumbelStudy, ExtremesStudy) | (BlockingStudy, CertificateAudit))
}

fn run(command: ExperimentKind, args: Common) -> Result<(), Error> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut config = ExperimentConfig::parse(&text, command)?;
    if !allowed(command, config.kind) {
        return Err(Error::Config(format!(
            "experiment.kind={} does not belong to this subcommand",
            config.kind
        )));
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    config.validate()?;

    let report = run_experiment(&config, &args.out)?;
    for path in report.write_csv(&args.out, config.kind.as_str())? {
        info!("wrote {}", path.display());
    }
    for row in &report.rows {
        println!("{}", row.to_csv());
    }
    for table in &report.tables {
        print!("{}", table.to_csv());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::SoundnessViolation(_) => 3,
        Error::NonEmbeddable { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (command, args) = Cli::parse().command.split();
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::SoundnessViolation("x".into())), 3);
        assert_eq!(exit_code(&Error::EmptySamples), 1);
    }

    #[test]
    fn subcommand_kinds() {
        assert!(allowed(ExperimentKind::GumbelStudy, ExperimentKind::ExtremesStudy));
        assert!(allowed(ExperimentKind::BlockingStudy, ExperimentKind::CertificateAudit));
        assert!(!allowed(ExperimentKind::Render, ExperimentKind::CrossingScan));
    }
}
