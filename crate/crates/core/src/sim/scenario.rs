use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    ForwardBackward,
    RandomWalk,
    Following,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    PointCloud,
    #[default]
    Signal,
}

/// Rectangular room in world coordinates; the radar sits at the origin
/// corner and looks along the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub width_m: f64,
    pub depth_m: f64,
}

impl Default for Room {
    fn default() -> Self {
        Self { width_m: 6.0, depth_m: 6.0 }
    }
}

impl Room {
    /// Unit boresight vector (room diagonal) in world coordinates.
    pub fn boresight(&self) -> (f64, f64) {
        let n = self.width_m.hypot(self.depth_m);
        (self.width_m / n, self.depth_m / n)
    }

    /// World to radar frame: `y` along boresight, `x` to its right.
    pub fn to_radar(&self, wx: f64, wy: f64) -> (f64, f64) {
        let (bx, by) = self.boresight();
        (wx * by - wy * bx, wx * bx + wy * by)
    }

    pub fn to_world(&self, x: f64, y: f64) -> (f64, f64) {
        let (bx, by) = self.boresight();
        (x * by + y * bx, -x * bx + y * by)
    }

    pub fn contains_world(&self, wx: f64, wy: f64) -> bool {
        (0.0..=self.width_m).contains(&wx) && (0.0..=self.depth_m).contains(&wy)
    }

    pub fn contains_radar(&self, x: f64, y: f64) -> bool {
        let (wx, wy) = self.to_world(x, y);
        self.contains_world(wx, wy)
    }
}

/// One simulated recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario_id: u8,
    pub n_people: usize,
    pub motion_kind: MotionKind,
    pub duration_s: f64,
    pub room: Room,
    /// Nominal distance between neighbouring group members.
    pub group_spacing_m: f64,
    pub seed: u64,
    pub fidelity: Fidelity,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(1, 0)
    }
}

/// Distance kept between people and the walls.
pub const WALL_MARGIN_M: f64 = 0.6;

impl ScenarioConfig {
    /// The six recorded scenarios: 1 person forward/backward, 1 person random
    /// walk, 2 people forward/backward, 2 people following, 2 people random
    /// walk, 3 people forward/backward.
    pub fn preset(scenario_id: u8, seed: u64) -> Self {
        let (n_people, motion_kind) = Self::catalog(scenario_id).unwrap_or((1, MotionKind::ForwardBackward));
        Self {
            scenario_id,
            n_people,
            motion_kind,
            duration_s: 60.0,
            room: Room::default(),
            group_spacing_m: 0.8,
            seed,
            fidelity: Fidelity::Signal,
        }
    }

    pub fn catalog(scenario_id: u8) -> Option<(usize, MotionKind)> {
        match scenario_id {
            1 => Some((1, MotionKind::ForwardBackward)),
            2 => Some((1, MotionKind::RandomWalk)),
            3 => Some((2, MotionKind::ForwardBackward)),
            4 => Some((2, MotionKind::Following)),
            5 => Some((2, MotionKind::RandomWalk)),
            6 => Some((3, MotionKind::ForwardBackward)),
            _ => None,
        }
    }

    pub fn description(&self) -> String {
        let what = match self.motion_kind {
            MotionKind::ForwardBackward => "walking forward and backward",
            MotionKind::RandomWalk => "randomly walking",
            MotionKind::Following => "following each other while walking",
        };
        let who = if self.n_people == 1 { "target" } else { "targets" };
        format!("{} {} {}", self.n_people, who, what)
    }

    /// Radius used to decide whether two people belong to the same group.
    pub fn grouping_radius_m(&self) -> f64 {
        self.group_spacing_m + 0.4
    }

    pub fn validate(&self) -> Result<()> {
        let (n, kind) = Self::catalog(self.scenario_id).ok_or_else(|| Error::Config(format!("scenario id {} not in 1..=6", self.scenario_id)))?;
        if n != self.n_people || kind != self.motion_kind {
            return Err(Error::Config(format!(
                "scenario {} expects {} people {:?}, got {} {:?}",
                self.scenario_id, n, kind, self.n_people, self.motion_kind
            )));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::Config("duration must be positive".into()));
        }
        if !(self.group_spacing_m > 0.2) {
            return Err(Error::Config("group spacing must exceed 0.2 m".into()));
        }
        let extent = self.group_spacing_m * (self.n_people.saturating_sub(1)) as f64;
        let needed = 2.0 * WALL_MARGIN_M + extent + 2.0;
        if self.room.width_m < needed || self.room.depth_m < needed {
            return Err(Error::Config(format!(
                "room {}x{} m too small for {} people (need {:.1} m sides)",
                self.room.width_m, self.room.depth_m, self.n_people, needed
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }
}
