//! Multi-target tracking: constant-velocity EKF per track, GNN association
//! of cluster centroids, M-of-N lifecycle and group-count feedback.

mod ekf;
mod tracker;

pub use ekf::{h, jacobian, process_noise, recondition, transition, wrap_angle, Estimate, Innovation, Measurement};
pub use tracker::{
    associate_gnn, gated_costs, read_track_log, write_track_log, SpawnPolicy, TrackLogRecord, TrackState, TrackStatus, TrackView, Tracker, TrackerConfig,
    TrackerSnapshot, GATE_CHI2_2DOF_99,
};
