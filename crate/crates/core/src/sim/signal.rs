use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gait::GaitModel;
use super::truth::GroundTruth;
use crate::datacube::{RadarCube, RadarParams};

/// Wall producing a mirror-image ghost. The two walls through the radar
/// corner only mirror targets behind the antenna, so only the far ones count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    /// The wall at `x = width` in room coordinates.
    FarX,
    /// The wall at `y = depth` in room coordinates.
    FarY,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultipathConfig {
    pub enabled: bool,
    pub attenuation_db: f64,
    pub walls: Vec<Wall>,
}

impl Default for MultipathConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            attenuation_db: 12.0,
            walls: vec![Wall::FarX, Wall::FarY],
        }
    }
}

/// Fixed reflector in room coordinates (furniture, radiators).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticReflector {
    pub x_m: f64,
    pub y_m: f64,
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignalConfig {
    /// Torso amplitude at `reference_range_m`.
    pub amplitude: f64,
    pub reference_range_m: f64,
    /// Standard deviation of the complex noise per sample.
    pub noise_sigma: f64,
    pub clutter: Vec<StaticReflector>,
    pub multipath: MultipathConfig,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            reference_range_m: 3.0,
            noise_sigma: 1.0,
            clutter: vec![
                StaticReflector { x_m: 5.5, y_m: 4.0, rcs: 4.0 },
                StaticReflector { x_m: 3.5, y_m: 5.6, rcs: 2.0 },
            ],
            multipath: MultipathConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Part {
    Torso,
    Limb(usize),
}

#[derive(Debug, Clone, Copy)]
struct Scatterer {
    person: usize,
    part: Part,
    image: Option<Wall>,
    phase0: f64,
}

/// Instantaneous geometry of one scatterer.
struct Kin {
    range: f64,
    /// `d * sin(azimuth)`, the per-channel phase in cycles.
    spatial: f64,
    radial_velocity: f64,
    amplitude: f64,
}

/// Signal-level simulator. Slow-time phase is accumulated over the chirp
/// sequence with the gaps between frames left out, so the concatenated
/// chirps of consecutive frames form one continuous series.
pub struct SignalSynthesizer<'a> {
    truth: &'a GroundTruth,
    params: RadarParams,
    cfg: SignalConfig,
    gaits: Vec<GaitModel>,
    seed: u64,
    scatterers: Vec<Scatterer>,
    clutter_phase: Vec<f64>,
    /// Phase of each scatterer at the first chirp of each frame.
    frame_phase: Vec<Vec<f64>>,
}

impl<'a> SignalSynthesizer<'a> {
    pub fn new(truth: &'a GroundTruth, params: RadarParams, cfg: SignalConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6761_6974);
        let gaits = (0..truth.n_people()).map(|_| GaitModel::sample(&mut rng)).collect();
        Self::with_gaits(truth, params, cfg, gaits, seed)
    }

    pub fn with_gaits(truth: &'a GroundTruth, params: RadarParams, cfg: SignalConfig, gaits: Vec<GaitModel>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7068_6173);
        let mut images = vec![None];
        if cfg.multipath.enabled {
            images.extend(cfg.multipath.walls.iter().map(|w| Some(*w)));
        }
        let mut scatterers = Vec::new();
        for person in 0..truth.n_people() {
            for part in [Part::Torso, Part::Limb(0), Part::Limb(1)] {
                for &image in &images {
                    scatterers.push(Scatterer {
                        person,
                        part,
                        image,
                        phase0: rng.random_range(0.0..TAU),
                    });
                }
            }
        }
        let clutter_phase = cfg.clutter.iter().map(|_| rng.random_range(0.0..TAU)).collect();
        let mut synth = Self {
            truth,
            params,
            cfg,
            gaits,
            seed,
            scatterers,
            clutter_phase,
            frame_phase: Vec::new(),
        };
        synth.frame_phase = synth.accumulate_phases();
        synth
    }

    pub fn gaits(&self) -> &[GaitModel] {
        &self.gaits
    }

    pub fn n_frames(&self) -> usize {
        self.truth.frames.len()
    }

    fn phase_step(&self) -> f64 {
        2.0 * TAU * self.params.chirp_repetition_interval / self.params.wavelength()
    }

    fn chirp_time(&self, frame: usize, chirp: usize) -> f64 {
        frame as f64 / self.params.frame_rate + chirp as f64 * self.params.chirp_repetition_interval
    }

    fn accumulate_phases(&self) -> Vec<Vec<f64>> {
        let k = self.phase_step();
        let m = self.params.chirps_per_frame;
        self.scatterers
            .iter()
            .map(|s| {
                let mut out = Vec::with_capacity(self.n_frames());
                let mut phi = s.phase0;
                for f in 0..self.n_frames() {
                    out.push(phi);
                    for c in 0..m {
                        phi += k * self.kinematics(s, self.chirp_time(f, c)).radial_velocity;
                    }
                    phi = phi.rem_euclid(TAU);
                }
                out
            })
            .collect()
    }

    fn kinematics(&self, s: &Scatterer, t: f64) -> Kin {
        let st = self.truth.state_at(s.person, t);
        let (mut x, mut y, mut vx, mut vy) = (st[0], st[1], st[2], st[3]);
        let gait = &self.gaits[s.person];
        let (rcs, gain) = match s.part {
            Part::Torso => (gait.rcs_torso, 1.0),
            Part::Limb(l) => (gait.rcs_limbs, gait.limb_gain(l, t)),
        };
        vx *= gain;
        vy *= gain;
        let mut amp = self.cfg.amplitude * rcs.sqrt();
        if let Some(wall) = s.image {
            let room = self.truth.room;
            let (wx, wy) = room.to_world(x, y);
            let (wvx, wvy) = room.to_world(vx, vy);
            let (mx, my, mvx, mvy) = match wall {
                Wall::FarX => (2.0 * room.width_m - wx, wy, -wvx, wvy),
                Wall::FarY => (wx, 2.0 * room.depth_m - wy, wvx, -wvy),
            };
            (x, y) = room.to_radar(mx, my);
            (vx, vy) = room.to_radar(mvx, mvy);
            amp *= 10f64.powf(-self.cfg.multipath.attenuation_db / 20.0);
        }
        let range = x.hypot(y).max(0.1);
        Kin {
            range,
            spatial: self.params.element_spacing * x / range,
            radial_velocity: (vx * x + vy * y) / range,
            amplitude: amp * self.cfg.reference_range_m / range,
        }
    }

    /// Adds `amp * chirp[m] * exp(j2pi(k n/N + u ch))` to the cube.
    fn add_tone(&self, cube: &mut RadarCube, range: f64, spatial: f64, chirp: &[Complex64]) {
        let (ns, nc, nch) = cube.data.dim();
        let kr = range / self.params.range_resolution();
        let fast: Vec<Complex64> = (0..ns).map(|n| Complex64::from_polar(1.0, TAU * kr * n as f64 / ns as f64)).collect();
        let chan: Vec<Complex64> = (0..nch).map(|k| Complex64::from_polar(1.0, TAU * spatial * k as f64)).collect();
        let data = cube.data.as_slice_mut().expect("standard layout");
        for n in 0..ns {
            for m in 0..nc {
                let fm = fast[n] * chirp[m];
                let row = &mut data[(n * nc + m) * nch..(n * nc + m + 1) * nch];
                for (v, c) in row.iter_mut().zip(&chan) {
                    *v += fm * c;
                }
            }
        }
    }

    pub fn synthesize_frame(&self, frame: usize) -> RadarCube {
        let mut cube = RadarCube::zeros(self.params, frame as u64);
        let nc = self.params.chirps_per_frame;
        let k = self.phase_step();
        let t_mid = self.chirp_time(frame, nc / 2);
        let mut chirp = vec![Complex64::default(); nc];
        for (s, phases) in self.scatterers.iter().zip(&self.frame_phase) {
            let mid = self.kinematics(s, t_mid);
            let mut phi = phases[frame];
            for (m, c) in chirp.iter_mut().enumerate() {
                let kin = self.kinematics(s, self.chirp_time(frame, m));
                *c = Complex64::from_polar(kin.amplitude, phi);
                phi += k * kin.radial_velocity;
            }
            self.add_tone(&mut cube, mid.range, mid.spatial, &chirp);
        }
        let room = self.truth.room;
        for (r, &phase) in self.cfg.clutter.iter().zip(&self.clutter_phase) {
            let (x, y) = room.to_radar(r.x_m, r.y_m);
            let range = x.hypot(y);
            let amp = self.cfg.amplitude * r.rcs.sqrt() * self.cfg.reference_range_m / range;
            chirp.fill(Complex64::from_polar(amp, phase));
            self.add_tone(&mut cube, range, self.params.element_spacing * x / range, &chirp);
        }
        if self.cfg.noise_sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x6e6f_6973);
            rng.set_stream(frame as u64);
            let normal = Normal::new(0.0, self.cfg.noise_sigma / 2f64.sqrt()).expect("finite sigma");
            for v in cube.data.iter_mut() {
                *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        cube
    }
}

/// Expected Doppler bin (after the FFT shift) of a radial velocity.
pub fn doppler_bin_of(params: &RadarParams, radial_velocity: f64) -> f64 {
    params.doppler_center() as f64 + radial_velocity / params.velocity_resolution()
}
