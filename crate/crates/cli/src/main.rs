use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use vls_core::survey::{
    default_workers, parse_survey_with_seed, run_survey_into, unzip, OutputWriter, SeedPolicy,
};
use vls_core::Result;

/// Virtual laser scanning simulator.
#[derive(Debug, Parser)]
#[command(name = "vls", version, arg_required_else_help = true)]
struct Cli {
    /// Decompress a gzip output file and exit.
    #[arg(long, num_args = 2, value_names = ["IN", "OUT"])]
    unzip: Option<Vec<PathBuf>>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a survey.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Survey XML file.
    survey: PathBuf,
    /// Also write points as LAS 1.0.
    #[arg(long = "lasOutput")]
    las_output: bool,
    /// Write the full waveform of every pulse with a hit.
    #[arg(long = "writeWaveform")]
    write_waveform: bool,
    /// Fit echo widths and add them as an extra column.
    #[arg(long = "calcEchowidth")]
    calc_echowidth: bool,
    /// Gzip the ASCII outputs.
    #[arg(long = "zipOutput")]
    zip_output: bool,
    /// Seed text; defaults to the survey seed, then the system time.
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Single worker with a fixed seed for reproducible output.
    #[arg(long)]
    deterministic: bool,
    /// Output root; defaults to $VLS_OUTPUT_DIR or `output`.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<()> {
    let mut survey = parse_survey_with_seed(&args.survey, args.seed.as_deref())?;
    let flags = &mut survey.outputs;
    flags.las |= args.las_output;
    flags.write_waveform |= args.write_waveform;
    flags.calc_echo_width |= args.calc_echowidth;
    flags.zip |= args.zip_output;

    let seed = args.seed.or_else(|| survey.seed.clone());
    let policy = SeedPolicy::new(seed, args.workers.unwrap_or_else(default_workers), args.deterministic);
    let root = args
        .output
        .or_else(|| std::env::var_os("VLS_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("output"));

    let mut writer = OutputWriter::create(&root, &survey.name, survey.outputs)?;
    let report = run_survey_into(&survey, &policy, &mut writer)?;
    let paths = writer.finish()?;
    info!("outputs written to {}", paths.dir.display());
    println!(
        "{} pulses, {} points, {} waveforms in {:.2?} on {} workers (seed `{}`)",
        report.pulses, report.points, report.waveforms, report.wall_time, report.workers, report.seed
    );
    println!("output: {}", paths.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match (cli.unzip, cli.command) {
        (Some(files), _) => unzip(&files[0], &files[1]).map(|n| println!("{n} bytes written to {}", files[1].display())),
        (None, Some(Command::Run(args))) => run(args),
        (None, None) => {
            eprintln!("nothing to do; see `vls --help`");
            return ExitCode::from(2);
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
