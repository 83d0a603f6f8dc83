//! Angular-error metrics, the experimental grid, and the noise protocol.

mod config;
mod metrics;
mod report;
mod runner;

pub use config::{GridConfig, IllPcaSource, Method, NnmfConfig, NoiseConfig};
pub use metrics::{angular_error, quantile, summarize, Summary};
pub use report::{RAW_HEADER, REPORT_HEADER};
pub use runner::{
    run_grid, run_noise, CaseResult, EvalReport, FitContext, GridData, ReportRow, Variant, AVERAGE_VARIANT,
};
