use serde::{Deserialize, Serialize};

use crate::classify::MEDIAN_WINDOW;
use crate::cluster::DbscanConfig;
use crate::datacube::{AzimuthConfig, CfarConfig, RadarParams, WindowKind};
use crate::error::{Error, Result};
use crate::features::{CvdConfig, ExtractConfig, FrequencyKind};
use crate::metrics::ReportConfig;
use crate::sim::{PointNoise, SignalConfig};
use crate::track::TrackerConfig;

/// Everything between the radar returns and the per-frame reports.
/// Every field has a default, so an empty TOML document is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub radar: RadarParams,
    pub signal: SignalConfig,
    pub point_noise: PointNoise,
    /// Slow-time mean subtraction before the range-Doppler map.
    pub mti: bool,
    pub doppler_window: WindowKind,
    pub cfar: CfarConfig,
    pub azimuth: AzimuthConfig,
    /// Drop detections that fall outside the room.
    pub roi_filter: bool,
    pub dbscan: DbscanConfig,
    pub tracker: TrackerConfig,
    pub extract: ExtractConfig,
    /// Observation window T in frames.
    pub observation_window: usize,
    pub frequency: FrequencyKind,
    /// Feed classifier counts back into the tracker's spawn rule.
    pub count_feedback: bool,
    /// Log a parallel prediction from CVD features.
    pub cvd_baseline: bool,
    pub cvd: CvdConfig,
    pub median_window: usize,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            radar: RadarParams::default(),
            signal: SignalConfig::default(),
            point_noise: PointNoise::default(),
            mti: true,
            doppler_window: WindowKind::Hann,
            cfar: CfarConfig::default(),
            azimuth: AzimuthConfig::default(),
            roi_filter: true,
            dbscan: DbscanConfig::default(),
            tracker: TrackerConfig::default(),
            extract: ExtractConfig::default(),
            observation_window: 20,
            frequency: FrequencyKind::default(),
            count_feedback: true,
            cvd_baseline: false,
            cvd: CvdConfig::default(),
            median_window: MEDIAN_WINDOW,
            report: ReportConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.cfar.validate()?;
        self.dbscan.validate()?;
        self.tracker.validate()?;
        self.report.ospa.validate()?;
        // A track is deleted before its whole window can go missing.
        if self.observation_window <= self.tracker.max_misses {
            return Err(Error::Config(format!(
                "observation window {} must exceed the deletion threshold of {} misses",
                self.observation_window, self.tracker.max_misses
            )));
        }
        if self.median_window.is_multiple_of(2) {
            return Err(Error::Config(format!("median window {} must be odd", self.median_window)));
        }
        let series_len = self.observation_window * self.radar.chirps_per_frame;
        if let FrequencyKind::Modwt { levels, wavelet } = self.frequency {
            if levels == 0 || wavelet.support(levels) > series_len {
                return Err(Error::Config(format!(
                    "{levels} MODWT levels need {} samples, the window holds {series_len}",
                    wavelet.support(levels.max(1))
                )));
            }
        }
        Ok(())
    }

    pub fn frame_dt(&self) -> f64 {
        1.0 / self.radar.frame_rate
    }

    pub fn cvd_kind(&self) -> FrequencyKind {
        FrequencyKind::Cvd(self.cvd)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn partial_override() {
        let cfg = PipelineConfig::from_toml("mti = false\nobservation_window = 30\n[dbscan]\neps = 0.5\n").unwrap();
        assert!(!cfg.mti);
        assert_eq!(cfg.observation_window, 30);
        assert_eq!(cfg.dbscan.eps, 0.5);
        assert_eq!(cfg.dbscan.min_pts, DbscanConfig::default().min_pts);
    }

    #[test]
    fn rejects_short_window() {
        assert!(PipelineConfig::from_toml("observation_window = 5").is_err());
        assert!(PipelineConfig::from_toml("median_window = 24").is_err());
        assert!(PipelineConfig::from_toml("bogus = 1").is_err());
    }
}
