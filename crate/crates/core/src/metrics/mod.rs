//! Counting-aware OSPA and per-scenario reports.

mod ospa;
mod report;

pub use ospa::{cutoff_costs, ospa_frame, OspaConfig, OspaFrame, OspaVariant};
pub use report::{
    nearest_group_count, read_prediction_jsonl, scenario_report, smooth_prediction_log, write_frames_csv, write_prediction_jsonl, write_report_csv,
    FrameRecord, PredictionRecord, ReportConfig, ScenarioReport, TrackFrame, TrackPoint, REPORT_HEADER,
};
