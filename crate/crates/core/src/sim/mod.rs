//! Scenario simulator: ground-truth trajectories of walking groups and
//! either detection-level point clouds or signal-level radar cubes.

mod gait;
mod point_cloud;
mod scenario;
mod signal;
mod trajectory;
mod truth;

pub use gait::GaitModel;
pub use point_cloud::{gen_point_cloud, PointNoise};
pub use scenario::{Fidelity, MotionKind, Room, ScenarioConfig, WALL_MARGIN_M};
pub use signal::{doppler_bin_of, MultipathConfig, SignalConfig, SignalSynthesizer, StaticReflector, Wall};
pub use trajectory::{gen_trajectories, FINE_RATE_HZ};
pub use truth::{group_persons, read_truth_jsonl, write_truth_jsonl, GroundTruth, PersonTruth, TruthFrame, TruthGroup};
