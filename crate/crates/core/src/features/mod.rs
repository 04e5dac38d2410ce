//! Per-track features: RA footprint statistics, MODWT statistics of the
//! slow-time series, the CVD baseline, and the track window buffer.

mod buffer;
mod cvd;
mod extract;
mod modwt;
mod spatial;
mod stats;
mod vector;

pub use buffer::{FrameEntry, Slot, TrackBuffer};
pub use cvd::{cadence_axis, cvd, cvd_features, dominant_cadence, spectrogram, CvdConfig};
pub use extract::{frame_entry, slow_time_series, ExtractConfig};
pub use modwt::{modwt, nominal_bands, ModwtDecomposition, Wavelet};
pub use spatial::{average_spatial, spatial_features, PatchConfig, RaPatch, SpatialFeatures, SPATIAL_NAMES};
pub use stats::{level_stats, STAT_NAMES};
pub use vector::{build_feature_vector, modwt_features, FeatureCsv, FeatureMode, FeatureVector, FrequencyKind};
