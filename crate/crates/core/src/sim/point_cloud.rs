use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::scenario::Room;
use super::truth::TruthFrame;
use crate::datacube::{Detection, RadarParams};

/// Noise model of the detection-level simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointNoise {
    pub sigma_range_m: f64,
    pub sigma_az_deg: f64,
    pub sigma_vel_mps: f64,
    /// Probability that a person yields no detections in a frame.
    pub miss_prob: f64,
    /// Mean number of clutter detections per frame.
    pub clutter_mean: f64,
    pub min_points: usize,
    pub max_points: usize,
}

impl Default for PointNoise {
    fn default() -> Self {
        Self {
            sigma_range_m: 0.3,
            sigma_az_deg: 2.0,
            sigma_vel_mps: 0.1,
            miss_prob: 0.02,
            clutter_mean: 0.5,
            min_points: 3,
            max_points: 8,
        }
    }
}

impl PointNoise {
    pub fn noiseless() -> Self {
        Self {
            sigma_range_m: 0.0,
            sigma_az_deg: 0.0,
            sigma_vel_mps: 0.0,
            miss_prob: 0.0,
            clutter_mean: 0.0,
            ..Self::default()
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

/// Detections scattered around each person. The random stream depends only
/// on `seed` and the frame index, so frames can be generated in any order.
pub fn gen_point_cloud(frame: &TruthFrame, noise: &PointNoise, params: &RadarParams, room: &Room, seed: u64) -> Vec<Detection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame.frame);
    let mut dets = Vec::new();
    for p in &frame.persons {
        if rng.random_bool(noise.miss_prob.clamp(0.0, 1.0)) {
            continue;
        }
        let range = p.x.hypot(p.y);
        let az = p.x.atan2(p.y).to_degrees();
        let vr = if range > 0.0 { (p.vx * p.x + p.vy * p.y) / range } else { 0.0 };
        let n = rng.random_range(noise.min_points..=noise.max_points.max(noise.min_points));
        for _ in 0..n {
            let r = (range + gauss(&mut rng, noise.sigma_range_m)).max(0.0);
            let a = az + gauss(&mut rng, noise.sigma_az_deg);
            let v = vr + gauss(&mut rng, noise.sigma_vel_mps);
            dets.push(Detection::from_physical(params, frame.frame, r, v, a, 20.0));
        }
    }
    if noise.clutter_mean > 0.0 {
        let k = Poisson::new(noise.clutter_mean).expect("positive mean").sample(&mut rng) as usize;
        for _ in 0..k {
            let (x, y) = room.to_radar(rng.random_range(0.0..room.width_m), rng.random_range(0.0..room.depth_m));
            let v = gauss(&mut rng, noise.sigma_vel_mps.max(0.05));
            dets.push(Detection::from_physical(params, frame.frame, x.hypot(y), v, x.atan2(y).to_degrees(), 12.0));
        }
    }
    dets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::truth::PersonTruth;

    fn frame(ps: &[(f64, f64)]) -> TruthFrame {
        let persons = ps.iter().enumerate().map(|(id, &(x, y))| PersonTruth { id, x, y, vx: 0.0, vy: 1.0 }).collect();
        TruthFrame::new(3, 0.3, persons, 1.2)
    }

    #[test]
    fn noiseless_points_sit_on_the_person() {
        let f = frame(&[(1.0, 3.0)]);
        let dets = gen_point_cloud(&f, &PointNoise::noiseless(), &RadarParams::default(), &Room::default(), 1);
        assert!((3..=8).contains(&dets.len()));
        for d in dets {
            let x = d.range_m * d.azimuth_deg.to_radians().sin();
            let y = d.range_m * d.azimuth_deg.to_radians().cos();
            assert!((x - 1.0).abs() < 1e-12 && (y - 3.0).abs() < 1e-12);
            assert!((d.radial_velocity - 3.0 / 10f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn certain_miss_gives_nothing() {
        let f = frame(&[(1.0, 3.0), (-1.0, 4.0)]);
        let noise = PointNoise {
            miss_prob: 1.0,
            clutter_mean: 0.0,
            ..PointNoise::default()
        };
        assert!(gen_point_cloud(&f, &noise, &RadarParams::default(), &Room::default(), 1).is_empty());
    }

    #[test]
    fn same_seed_same_cloud() {
        let f = frame(&[(0.2, 2.5)]);
        let p = RadarParams::default();
        let a = gen_point_cloud(&f, &PointNoise::default(), &p, &Room::default(), 9);
        let b = gen_point_cloud(&f, &PointNoise::default(), &p, &Room::default(), 9);
        assert_eq!(a, b);
    }
}
