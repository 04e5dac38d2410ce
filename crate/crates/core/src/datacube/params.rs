use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// FMCW MIMO radar configuration.
///
/// Defaults follow the 24 GHz RadarBook2 setup: 250 MHz sweep, 56 samples per
/// chirp at 120 ksps, 90 chirps per frame at 483 us repetition, 10 frames per
/// second and 15 virtual channels at half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarParams {
    /// Carrier frequency in Hz.
    pub carrier_frequency: f64,
    /// Sweep bandwidth in Hz.
    pub sweep_bandwidth: f64,
    pub samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    /// Chirp repetition interval in seconds.
    pub chirp_repetition_interval: f64,
    /// Frame rate in Hz.
    pub frame_rate: f64,
    pub n_virtual_channels: usize,
    /// Virtual element spacing in wavelengths.
    pub element_spacing: f64,
    /// ADC sampling rate in Hz.
    pub adc_sample_rate: f64,
    /// Horizontal 3 dB beamwidth in degrees.
    pub beamwidth_deg: f64,
}

impl Default for RadarParams {
    fn default() -> Self {
        Self {
            carrier_frequency: 24.0e9,
            sweep_bandwidth: 250.0e6,
            samples_per_chirp: 56,
            chirps_per_frame: 90,
            chirp_repetition_interval: 483.0e-6,
            frame_rate: 10.0,
            n_virtual_channels: 15,
            element_spacing: 0.5,
            adc_sample_rate: 120.0e3,
            beamwidth_deg: 76.5,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.samples_per_chirp == 0 || self.chirps_per_frame == 0 || self.n_virtual_channels == 0 {
            return bad("all counts must be >= 1");
        }
        if !(self.sweep_bandwidth > 0.0) || !self.sweep_bandwidth.is_finite() {
            return bad("sweep bandwidth must be positive");
        }
        if !(self.chirp_repetition_interval > 0.0) || !self.chirp_repetition_interval.is_finite() {
            return bad("chirp repetition interval must be positive");
        }
        if !(self.carrier_frequency > 0.0) || !self.carrier_frequency.is_finite() {
            return bad("carrier frequency must be positive");
        }
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return bad("frame rate must be positive");
        }
        if !(self.element_spacing > 0.0) || !(self.adc_sample_rate > 0.0) {
            return bad("element spacing and ADC rate must be positive");
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg <= 180.0) {
            return bad("beamwidth must be in (0, 180] degrees");
        }
        let chirp_block = self.chirps_per_frame as f64 * self.chirp_repetition_interval;
        if chirp_block > 1.0 / self.frame_rate + 1e-12 {
            return bad("chirps do not fit in one frame period");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// c / (2B); also the range-bin spacing, since the ADC window spans the sweep.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.sweep_bandwidth)
    }

    pub fn chirp_duration(&self) -> f64 {
        self.samples_per_chirp as f64 / self.adc_sample_rate
    }

    /// Slow-time sampling rate of the concatenated chirp stream (900 Hz by default).
    pub fn slow_time_rate(&self) -> f64 {
        self.chirps_per_frame as f64 * self.frame_rate
    }

    /// Doppler bin width in Hz within one frame.
    pub fn doppler_resolution_hz(&self) -> f64 {
        1.0 / (self.chirps_per_frame as f64 * self.chirp_repetition_interval)
    }

    /// Radial velocity per Doppler bin.
    pub fn velocity_resolution(&self) -> f64 {
        self.wavelength() * self.doppler_resolution_hz() / 2.0
    }

    pub fn max_unambiguous_velocity(&self) -> f64 {
        self.wavelength() / (4.0 * self.chirp_repetition_interval)
    }

    /// Index of the zero-Doppler bin after the FFT shift.
    pub fn doppler_center(&self) -> usize {
        self.chirps_per_frame / 2
    }

    /// Rayleigh angular resolution at boresight for `channels` elements.
    pub fn angular_resolution_deg(&self, channels: usize) -> f64 {
        (1.0 / (channels as f64 * self.element_spacing)).to_degrees()
    }

    pub fn max_range(&self) -> f64 {
        self.range_resolution() * self.samples_per_chirp as f64
    }

    pub fn cube_len(&self) -> usize {
        self.samples_per_chirp * self.chirps_per_frame * self.n_virtual_channels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_values() {
        let p = RadarParams::default();
        p.validate().unwrap();
        assert!((p.range_resolution() - 0.5996).abs() < 1e-3);
        assert!((p.slow_time_rate() - 900.0).abs() < 1e-12);
        assert!((p.doppler_resolution_hz() - 23.0048).abs() < 1e-3);
        assert!((p.velocity_resolution() - 0.14367).abs() < 1e-4);
        // 467 us up-chirp = 56 samples at 120 ksps.
        assert!((p.chirp_duration() - 467e-6).abs() < 1e-6);
        // Aperture of 15 half-wavelength elements.
        assert!((p.angular_resolution_deg(15) - 7.63).abs() < 0.01);
    }

    #[test]
    fn rejects_degenerate() {
        let mut p = RadarParams::default();
        p.samples_per_chirp = 0;
        assert!(p.validate().is_err());
        let mut p = RadarParams::default();
        p.sweep_bandwidth = 0.0;
        assert!(p.validate().is_err());
        let mut p = RadarParams::default();
        p.chirp_repetition_interval = -1.0;
        assert!(p.validate().is_err());
    }
}
