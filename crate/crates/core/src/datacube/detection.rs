use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::params::RadarParams;
use crate::error::Result;

/// A point target in range, Doppler and azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range_m: f64,
    /// Range rate in m/s, positive when receding.
    pub radial_velocity: f64,
    pub azimuth_deg: f64,
    pub snr_db: f64,
    pub frame_index: u64,
}

impl Detection {
    /// Builds a detection from physical coordinates, deriving the bins.
    pub fn from_physical(params: &RadarParams, frame_index: u64, range_m: f64, radial_velocity: f64, azimuth_deg: f64, snr_db: f64) -> Self {
        let range_bin = (range_m / params.range_resolution()).round().max(0.0) as usize;
        let doppler = params.doppler_center() as f64 + radial_velocity / params.velocity_resolution();
        let doppler_bin = doppler.round().clamp(0.0, params.chirps_per_frame.saturating_sub(1) as f64) as usize;
        Self {
            range_bin,
            doppler_bin,
            range_m,
            radial_velocity,
            azimuth_deg,
            snr_db,
            frame_index,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.range_m >= 0.0 && self.azimuth_deg.abs() <= 90.0 && self.range_m.is_finite() && self.radial_velocity.is_finite()
    }
}

/// One line of the detection JSON-lines log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame: u64,
    pub range_m: f64,
    pub vel_mps: f64,
    pub az_deg: f64,
    pub snr_db: f64,
}

impl From<&Detection> for DetectionRecord {
    fn from(d: &Detection) -> Self {
        Self {
            frame: d.frame_index,
            range_m: d.range_m,
            vel_mps: d.radial_velocity,
            az_deg: d.azimuth_deg,
            snr_db: d.snr_db,
        }
    }
}

impl DetectionRecord {
    pub fn to_detection(&self, params: &RadarParams) -> Detection {
        Detection::from_physical(params, self.frame, self.range_m, self.vel_mps, self.az_deg, self.snr_db)
    }
}

pub fn write_detections_jsonl<W: Write>(w: &mut W, dets: &[Detection]) -> Result<()> {
    for d in dets {
        serde_json::to_writer(&mut *w, &DetectionRecord::from(d))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_detections_jsonl<R: BufRead>(r: R) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_keys_are_exact() {
        let p = RadarParams::default();
        let d = Detection::from_physical(&p, 3, 2.5, -0.5, 12.0, 20.0);
        let mut buf = Vec::new();
        write_detections_jsonl(&mut buf, &[d]).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["az_deg", "frame", "range_m", "snr_db", "vel_mps"]);
        let back = read_detections_jsonl(&buf[..]).unwrap();
        assert_eq!(back[0].to_detection(&p), d);
    }
}
