//! Radar data model and the DSP chain from raw cubes to detections.

mod azimuth;
mod cfar;
mod cube;
mod detection;
mod params;
mod transform;

pub use azimuth::{azimuth_from_snapshot, estimate_azimuth, half_power_beamwidth_deg, spatial_spectrum, steering_vector, AzimuthConfig};
pub use cfar::{ca_cfar_alpha, cfar_detect, CfarConfig};
pub use cube::{CubeReader, RadarCube, CUBE_HEADER_LEN, CUBE_MAGIC, CUBE_VERSION};
pub use detection::{read_detections_jsonl, write_detections_jsonl, Detection, DetectionRecord};
pub use params::{RadarParams, SPEED_OF_LIGHT};
pub use transform::{
    beam_bins, bin_to_azimuth_deg, db_to_power, doppler_spectrum, fft_shift, fft_unitary, mti_suppress, power_to_db, range_azimuth_from_profiles,
    range_azimuth_map, range_doppler_from_profiles, range_doppler_spectra, range_doppler_transform, range_profiles, RaMap, RangeProfiles, RdMap, WindowKind,
    AZIMUTH_FFT_SIZE, DB_FLOOR,
};

pub(crate) use transform::plan as fft_plan;

/// Runs CFAR on a map and fills in each detection's azimuth.
pub fn detect(map: &RdMap, cfar: &CfarConfig, azimuth: &AzimuthConfig) -> crate::Result<Vec<Detection>> {
    let mut dets = cfar_detect(map, cfar)?;
    for d in &mut dets {
        d.azimuth_deg = estimate_azimuth(map, d, azimuth)?;
    }
    Ok(dets)
}
