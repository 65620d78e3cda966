use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exthyp_cli::{emit_plot_data, render, run, CliError, Experiment, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "exthyp", version, about = "Volumes in extended hyperbolic space: experiments and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file
    Run(Common),
    /// Contour volume against eps-limits for a sector and a box
    Theorem21(Common),
    /// Growth of the planar graph integrals across the 1/2 threshold
    Reg2d(Common),
    /// Growth of the spatial graph integrals across the C^1 threshold
    Reg3d(Common),
    /// Doubly logarithmic growth of the borderline example
    Logexample(Common),
    /// Volume of a thin cone touching the ideal boundary
    Cone(Common),
    /// Volume of a domain against its isometric image
    Invariance(Common),
    /// Volume of a domain against the sum over two pieces
    Additivity(Common),
    /// One density value, checked through the other chart
    DensityEval(Common),
    /// Detour integrals with closed forms
    ContourEval(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override as key=value (value parsed as JSON, else text)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write a plot table as SERIES=PATH (tab-separated)
    #[arg(long = "plot", value_name = "SERIES=PATH")]
    plots: Vec<String>,
    /// Record wall-clock time in the report
    #[arg(long)]
    timing: bool,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn build_config(tag: Option<Experiment>, args: &Common) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => match tag {
            Some(e) => ExperimentConfig::new(e),
            None => {
                return Err(CliError::Usage {
                    field: "config".into(),
                    message: "`run` needs --config".into(),
                })
            }
        },
    };
    if let Some(e) = tag {
        if e != config.experiment {
            return Err(CliError::Usage {
                field: "experiment".into(),
                message: format!("subcommand {e} does not match config experiment {}", config.experiment),
            });
        }
    }
    for p in &args.params {
        config.set_param(p)?;
    }
    if let Some(path) = &args.output {
        config.output.path = Some(path.clone());
    }
    if let Some(f) = args.format {
        config.output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    config.validate()?;
    Ok(config)
}

/// Split `SERIES=PATH` at the `=` that ends a series name in the report;
/// series names may contain `=` themselves.
fn plot_target<'a>(report: &exthyp_cli::Report, spec: &'a str) -> Result<(&'a str, PathBuf), CliError> {
    report
        .series_names()
        .into_iter()
        .filter(|name| spec.len() > name.len() + 1 && spec.starts_with(name) && spec.as_bytes()[name.len()] == b'=')
        .max_by_key(|name| name.len())
        .map(|name| (&spec[..name.len()], PathBuf::from(&spec[name.len() + 1..])))
        .ok_or_else(|| CliError::Usage {
            field: "plot".into(),
            message: format!("{spec:?} is not SERIES=PATH for a series in {:?}", report.series_names()),
        })
}

fn execute(tag: Option<Experiment>, args: &Common) -> Result<i32, CliError> {
    let config = build_config(tag, args)?;
    let start = Instant::now();
    let mut report = run(&config)?;
    if args.timing {
        report.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    for spec in &args.plots {
        let (series, path) = plot_target(&report, spec)?;
        write(&path, &emit_plot_data(&report, series)?)?;
    }
    let text = render(&report, config.output.format);
    match &config.output.path {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (tag, args) = match &cli.command {
        Command::Run(a) => (None, a),
        Command::Theorem21(a) => (Some(Experiment::Theorem21), a),
        Command::Reg2d(a) => (Some(Experiment::Reg2d), a),
        Command::Reg3d(a) => (Some(Experiment::Reg3d), a),
        Command::Logexample(a) => (Some(Experiment::Logexample), a),
        Command::Cone(a) => (Some(Experiment::Cone), a),
        Command::Invariance(a) => (Some(Experiment::Invariance), a),
        Command::Additivity(a) => (Some(Experiment::Additivity), a),
        Command::DensityEval(a) => (Some(Experiment::DensityEval), a),
        Command::ContourEval(a) => (Some(Experiment::ContourEval), a),
    };
    let code = execute(tag, args).unwrap_or_else(|e| {
        eprintln!("exthyp: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
