//! Excitation signals, data collection, closed-loop scenarios and metrics.

mod csvio;
mod dataset;
mod excitation;
mod metrics;
mod run;
mod spline;

pub use csvio::{
    dataset_header, load_dataset, load_run_log, read_dataset, read_run_log, run_header,
    save_dataset, save_metrics, save_run_log, write_dataset, write_metrics, write_run_log,
};
pub use dataset::{
    assemble_batch, collect_dataset, collect_dataset_with_dt, static_equilibrium, BufferSample,
    DataBuffer,
};
pub use excitation::{
    crest_factor, gen_multisine, gen_sinusoid_family, schroeder_phase, SinusoidSpec,
    SinusoidTrajectory,
};
pub use metrics::{compute_metrics, MetricsReport, Window, WindowMetrics};
pub use run::{
    run_scenario, run_with_regressor, ControllerKind, EventKind, LogRow, RegressorSource,
    RetrainRecord, RunLog, RunOutput, Scenario, TimedEvent,
};
pub use spline::spline_derivative;
