//! `tsviz`: run the visualization pipeline, inspect a CSV, or write a
//! synthetic dataset.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsviz_core::dataset::{load_csv, validate, write_csv, DatasetError, LoadOptions};
use tsviz_core::pipeline::{
    run_pipeline, synth_dataset, HueSelection, InputSource, PipelineConfig, SynthSpec, UnitChoice,
    DEFAULT_DAY_GROUP_SIZE, DEFAULT_DEMO_ROWS, DEFAULT_MAX_SERIES, DEFAULT_TOP_K, SYNTH_TARGET_COL,
    SYNTH_TIME_COL,
};
use tsviz_core::temporal::TimeFormat;

const EXIT_INPUT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "tsviz", version, about = "Exploratory plots for timestamped CSV data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, engineer calendar features, aggregate and plot.
    Pipeline(PipelineArgs),
    /// Print the inferred schema and null/inconsistency counts of a CSV.
    Inspect {
        file: PathBuf,
        #[arg(long, default_value = "YYYY-MM-DD hh:mm:ss")]
        time_format: String,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
    },
    /// Write a seeded synthetic congestion dataset as CSV.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        out: PathBuf,
        /// Add an uninformative random 0/1 column named `flag`.
        #[arg(long)]
        random_flag: bool,
    },
}

#[derive(clap::Args)]
struct PipelineArgs {
    #[arg(long, required_unless_present = "seed_demo")]
    input: Option<PathBuf>,
    #[arg(long)]
    time_col: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// auto, year, month, date, day, hour or minute.
    #[arg(long, default_value = "auto")]
    unit: UnitChoice,
    /// Comma-separated hue columns; all usable columns when omitted.
    #[arg(long, value_delimiter = ',')]
    hue: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_SERIES)]
    max_series: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    #[arg(long, default_value_t = DEFAULT_DAY_GROUP_SIZE)]
    day_group_size: usize,
    #[arg(long, default_value = "tsviz-out")]
    out: PathBuf,
    #[arg(long, default_value = "YYYY-MM-DD hh:mm:ss")]
    time_format: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Ignore --input and run on synthetic data with this seed.
    #[arg(long)]
    seed_demo: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }

    fn dataset(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => Self::io(e),
            e => Self::input(e),
        }
    }
}

fn delimiter_byte(c: char) -> Result<u8, Failure> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Failure::input(format!("delimiter `{c}` is not a single ASCII character")))
}

fn time_format(pattern: &str) -> Result<TimeFormat, Failure> {
    pattern.parse().map_err(Failure::input)
}

fn pipeline(args: PipelineArgs) -> Result<(), Failure> {
    let input = match (args.seed_demo, args.input) {
        (Some(seed), _) => InputSource::Synthetic {
            seed,
            rows: DEFAULT_DEMO_ROWS,
        },
        (None, Some(path)) => InputSource::Csv(path),
        (None, None) => return Err(Failure::input("--input is required")),
    };
    let demo = matches!(input, InputSource::Synthetic { .. });
    let pick = |given: Option<String>, demo_default: &str, flag: &str| match given {
        Some(v) => Ok(v),
        None if demo => Ok(demo_default.to_string()),
        None => Err(Failure::input(format!("{flag} is required"))),
    };
    let time_col = pick(args.time_col, SYNTH_TIME_COL, "--time-col")?;
    let target = pick(args.target, SYNTH_TARGET_COL, "--target")?;
    let mut config = PipelineConfig::new(input, time_col, target, args.out);
    config.unit = args.unit;
    if !args.hue.is_empty() {
        config.hues = HueSelection::Explicit(args.hue);
    }
    config.max_series = args.max_series;
    config.top_k = args.top_k;
    config.day_group_size = args.day_group_size;
    config.time_format = time_format(&args.time_format)?;
    config.delimiter = delimiter_byte(args.delimiter)?;

    let report = run_pipeline(&config).map_err(|e| {
        if e.is_io() {
            Failure::io(e)
        } else {
            Failure::input(e)
        }
    })?;
    let unit = report.unit.as_ref().map_or("-".to_string(), |u| u.chosen.to_string());
    println!(
        "unit: {unit}\nplots: {}\nfiles: {}\nreport: {}",
        report.plots().count(),
        report.manifest.len(),
        config.out_dir.join("report.json").display()
    );
    Ok(())
}

fn inspect(file: PathBuf, pattern: &str, delimiter: char) -> Result<(), Failure> {
    let options = LoadOptions {
        delimiter: delimiter_byte(delimiter)?,
        time_format: time_format(pattern)?,
        ..LoadOptions::default()
    };
    let ds = load_csv(&file, &options).map_err(Failure::dataset)?;
    let report = validate(&ds);
    let text = serde_json::to_string_pretty(&report).map_err(Failure::io)?;
    println!("{text}");
    Ok(())
}

fn synth(seed: u64, rows: usize, out: PathBuf, random_flag: bool) -> Result<(), Failure> {
    if rows == 0 {
        return Err(Failure::input("--rows must be at least 1"));
    }
    let spec = SynthSpec {
        random_flag,
        ..SynthSpec::new(rows)
    };
    let ds = synth_dataset(seed, &spec);
    let file = File::create(&out).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    write_csv(&ds, BufWriter::new(file)).map_err(Failure::io)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pipeline(args) => pipeline(args),
        Command::Inspect {
            file,
            time_format,
            delimiter,
        } => inspect(file, &time_format, delimiter),
        Command::Synth {
            seed,
            rows,
            out,
            random_flag,
        } => synth(seed, rows, out, random_flag),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tsviz: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
