use std::io::Write;

use serde::{Deserialize, Serialize};

use super::buffer::TrackBuffer;
use super::cvd::{cvd_features, CvdConfig};
use super::modwt::{modwt, Wavelet};
use super::spatial::{average_spatial, SPATIAL_NAMES};
use super::stats::{level_stats, STAT_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    SpatialOnly,
    Full,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::SpatialOnly => "spatial_only",
            FeatureMode::Full => "full",
        }
    }
}

/// Which frequency features complete a full vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FrequencyKind {
    Modwt { levels: usize, wavelet: Wavelet },
    Cvd(CvdConfig),
}

impl Default for FrequencyKind {
    fn default() -> Self {
        FrequencyKind::Modwt {
            levels: 4,
            wavelet: Wavelet::D4,
        }
    }
}

impl FrequencyKind {
    pub fn names(&self) -> Vec<String> {
        match self {
            FrequencyKind::Modwt { levels, .. } => (1..=*levels)
                .map(|j| format!("l{j}"))
                .chain(std::iter::once("approx".to_string()))
                .flat_map(|lvl| STAT_NAMES.iter().map(move |s| format!("{lvl}_{s}")))
                .collect(),
            FrequencyKind::Cvd(_) => STAT_NAMES.iter().map(|s| format!("cvd_{s}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FrequencyKind::Modwt { levels, .. } => 8 * (levels + 1),
            FrequencyKind::Cvd(_) => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub track_id: u64,
    pub frame: u64,
    pub frame_span: (u64, u64),
    pub spatial: [f64; 10],
    /// Set when every footprint in the window was empty.
    pub spatial_empty: bool,
    /// Present only in full mode.
    pub frequency: Option<Vec<f64>>,
}

impl FeatureVector {
    pub fn mode(&self) -> FeatureMode {
        if self.frequency.is_some() {
            FeatureMode::Full
        } else {
            FeatureMode::SpatialOnly
        }
    }

    /// Spatial features followed by the frequency features when present.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.spatial.to_vec();
        if let Some(f) = &self.frequency {
            v.extend_from_slice(f);
        }
        v
    }
}

/// MODWT statistics of a complex series: I and Q are decomposed separately
/// and the statistics use the magnitude of the combined coefficients.
pub fn modwt_features(series: &[rustfft::num_complex::Complex64], levels: usize, wavelet: Wavelet) -> Result<Vec<f64>> {
    let re: Vec<f64> = series.iter().map(|c| c.re).collect();
    let im: Vec<f64> = series.iter().map(|c| c.im).collect();
    let dr = modwt(&re, levels, wavelet)?;
    let di = modwt(&im, levels, wavelet)?;
    let mut out = Vec::with_capacity(8 * (levels + 1));
    for (a, b) in dr.bands().zip(di.bands()) {
        let mag: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.hypot(*y)).collect();
        out.extend_from_slice(&level_stats(&mag));
    }
    Ok(out)
}

/// Spatial-only until the buffer holds its full window, then spatial plus
/// frequency features from the gap-filled series.
pub fn build_feature_vector(buffer: &TrackBuffer, confirmed: bool, kind: &FrequencyKind) -> Result<FeatureVector> {
    if !confirmed {
        return Err(Error::Unconfirmed(buffer.track_id));
    }
    let filled = buffer.fill_missing()?;
    let span = buffer.frame_span().ok_or(Error::EmptyBuffer)?;
    let spatial = average_spatial(buffer.slots().filter_map(|s| s.entry.as_ref()).map(|e| &e.spatial));
    let frequency = if buffer.is_full() {
        let series = filled.concatenated();
        Some(match kind {
            FrequencyKind::Modwt { levels, wavelet } => modwt_features(&series, *levels, *wavelet)?,
            FrequencyKind::Cvd(cfg) => cvd_features(&series, cfg)?.to_vec(),
        })
    } else {
        None
    };
    Ok(FeatureVector {
        track_id: buffer.track_id,
        frame: span.1,
        frame_span: span,
        spatial: spatial.values,
        spatial_empty: spatial.empty,
        frequency,
    })
}

/// Header and rows of the feature CSV; frequency fields of spatial-only
/// rows are left empty.
pub struct FeatureCsv<W: Write> {
    out: csv::Writer<W>,
    n_freq: usize,
}

impl<W: Write> FeatureCsv<W> {
    pub fn new(out: W, kind: &FrequencyKind) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["track_id".into(), "frame".into(), "mode".into(), "label".into()];
        header.extend(SPATIAL_NAMES.iter().map(|s| s.to_string()));
        header.extend(kind.names());
        out.write_record(&header)?;
        Ok(Self { out, n_freq: kind.len() })
    }

    pub fn write(&mut self, v: &FeatureVector, label: Option<usize>) -> Result<()> {
        let mut row = vec![
            v.track_id.to_string(),
            v.frame.to_string(),
            v.mode().as_str().to_string(),
            label.map_or(String::new(), |l| l.to_string()),
        ];
        row.extend(v.spatial.iter().map(|x| format!("{x:e}")));
        match &v.frequency {
            Some(f) => row.extend(f.iter().map(|x| format!("{x:e}"))),
            None => row.extend(std::iter::repeat_n(String::new(), self.n_freq)),
        }
        self.out.write_record(&row)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::buffer::FrameEntry;
    use crate::features::spatial::SpatialFeatures;
    use rustfft::num_complex::Complex64;

    fn buffer(frames: usize, cap: usize) -> TrackBuffer {
        let mut b = TrackBuffer::new(3, cap);
        for f in 0..frames {
            let series = (0..90).map(|m| Complex64::from_polar(1.0, 0.7 * (f * 90 + m) as f64)).collect();
            b.push(
                f as u64,
                Some(FrameEntry {
                    series,
                    spatial: SpatialFeatures {
                        values: [f as f64; 10],
                        empty: false,
                    },
                }),
            )
            .unwrap();
        }
        b
    }

    #[test]
    fn mode_follows_buffer_fill() {
        let kind = FrequencyKind::default();
        let v = build_feature_vector(&buffer(5, 20), true, &kind).unwrap();
        assert_eq!(v.mode(), FeatureMode::SpatialOnly);
        assert_eq!(v.spatial[0], 2.0);
        let v = build_feature_vector(&buffer(20, 20), true, &kind).unwrap();
        assert_eq!(v.mode(), FeatureMode::Full);
        assert_eq!(v.values().len(), 50);
        assert!(build_feature_vector(&buffer(20, 20), false, &kind).is_err());
    }

    #[test]
    fn cvd_kind_has_eight_frequency_values() {
        let v = build_feature_vector(&buffer(20, 20), true, &FrequencyKind::Cvd(CvdConfig::default())).unwrap();
        assert_eq!(v.frequency.unwrap().len(), 8);
    }

    #[test]
    fn csv_masks_spatial_only_rows() {
        let kind = FrequencyKind::default();
        let mut buf = Vec::new();
        {
            let mut w = FeatureCsv::new(&mut buf, &kind).unwrap();
            w.write(&build_feature_vector(&buffer(5, 20), true, &kind).unwrap(), Some(2)).unwrap();
            w.write(&build_feature_vector(&buffer(20, 20), true, &kind).unwrap(), None).unwrap();
            w.flush().unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split(',').count(), 54);
        assert!(lines[0].contains("l2_entropy") && lines[0].ends_with("approx_entropy"));
        assert!(lines[1].ends_with(&",".repeat(40)));
        assert!(lines[1].starts_with("3,4,spatial_only,2,"));
        assert!(lines[2].split(',').skip(4).all(|f| !f.is_empty()));
    }

    #[test]
    fn deterministic_values() {
        let kind = FrequencyKind::default();
        let a = build_feature_vector(&buffer(20, 20), true, &kind).unwrap();
        let b = build_feature_vector(&buffer(20, 20), true, &kind).unwrap();
        assert_eq!(a, b);
    }
}
