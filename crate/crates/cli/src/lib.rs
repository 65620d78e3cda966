//! Experiment runner and report writer for the `exthyp` volume library.
//!
//! A run takes an [`ExperimentConfig`], executes the named experiment with
//! default parameters unless overridden, and returns a [`Report`] whose rows
//! each carry a tolerance and a verdict.

pub mod config;
mod experiments;
pub mod report;

pub use config::{Experiment, ExperimentConfig, Format, OutputSpec, Params};
pub use report::{emit_plot_data, Quantity, Report, Row, Series, Status};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_ERROR,
        }
    }
}

/// Run one experiment. Only configuration problems are errors; numerical
/// failures end up as failing rows of the report.
pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    let params = config.resolved()?;
    // echo the parameters actually used so the inputs re-run the same experiment
    let mut echoed = config.clone();
    echoed.parameters = params.as_map().clone();
    let mut report = Report::new(echoed);
    let p = &params;
    match config.experiment {
        Experiment::Theorem21 => experiments::theorem21(p, &mut report),
        Experiment::Reg2d => experiments::reg2d(p, &mut report),
        Experiment::Reg3d => experiments::reg3d(p, &mut report),
        Experiment::Logexample => experiments::logexample(p, &mut report),
        Experiment::Cone => experiments::cone(p, &mut report),
        Experiment::Invariance => experiments::invariance(p, &mut report),
        Experiment::Additivity => experiments::additivity(p, &mut report),
        Experiment::DensityEval => experiments::density_eval(p, &mut report),
        Experiment::ContourEval => experiments::contour_eval(p, &mut report),
    }
    Ok(report)
}

/// The report rendered in the configured format.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}
