use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-scatterer walking model: a torso and two limbs whose radial
/// velocity swings sinusoidally, in antiphase, at the step cadence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitModel {
    pub torso_speed: f64,
    pub step_cadence: f64,
    /// Peak limb velocity excursion around the torso at `torso_speed`.
    pub limb_doppler_amplitude: f64,
    pub rcs_torso: f64,
    pub rcs_limbs: f64,
    /// Limb phase offset in radians.
    pub phase: f64,
}

impl Default for GaitModel {
    fn default() -> Self {
        Self {
            torso_speed: 1.0,
            step_cadence: 1.8,
            limb_doppler_amplitude: 0.9,
            rcs_torso: 1.0,
            rcs_limbs: 0.25,
            phase: 0.0,
        }
    }
}

impl GaitModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.5).contains(&self.torso_speed) {
            return Err(Error::InvalidParams(format!("torso speed {} outside [0.5, 1.5]", self.torso_speed)));
        }
        if !(1.4..=2.2).contains(&self.step_cadence) {
            return Err(Error::InvalidParams(format!("cadence {} outside [1.4, 2.2]", self.step_cadence)));
        }
        if !(self.limb_doppler_amplitude >= 0.0 && self.rcs_torso > 0.0 && self.rcs_limbs >= 0.0) {
            return Err(Error::InvalidParams("gait amplitudes must be non-negative".into()));
        }
        Ok(())
    }

    /// A plausible walker with person-to-person variation.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let torso_speed = rng.random_range(0.8..1.3);
        Self {
            torso_speed,
            step_cadence: rng.random_range(1.6..2.0),
            limb_doppler_amplitude: torso_speed * rng.random_range(0.7..1.0),
            rcs_torso: rng.random_range(0.7..1.3),
            rcs_limbs: rng.random_range(0.15..0.35),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }

    /// Velocity gain of limb `limb` (0 or 1) at time `t`, relative to the torso.
    pub fn limb_gain(&self, limb: usize, t: f64) -> f64 {
        let beta = self.limb_doppler_amplitude / self.torso_speed;
        let phi = self.phase + std::f64::consts::PI * limb as f64;
        1.0 + beta * (std::f64::consts::TAU * self.step_cadence * t + phi).sin()
    }
}
