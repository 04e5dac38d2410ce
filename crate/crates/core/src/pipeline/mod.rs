//! The composed chain: simulated or recorded frames through detection,
//! clustering, tracking, feature extraction and counting.

mod config;
mod run;
mod training;

pub use config::PipelineConfig;
pub use run::{run_frames, run_scenario, Branch, BranchOutput, Counter, FrameInput, Sample, ScenarioRun};
pub use training::{
    default_grid_axes, eval_grid, eval_grid_on, generate_training_data, train_counting, write_grid_csv, write_samples_csv, FeatureSet, GridAxis, GridRow,
    TrainingData,
};
