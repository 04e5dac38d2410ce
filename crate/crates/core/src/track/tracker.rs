use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::ekf::{Estimate, Innovation, Measurement};
use crate::assign::{self, Assignment};
use crate::error::{Error, Result};

/// Chi-square 99% quantile with two degrees of freedom.
pub const GATE_CHI2_2DOF_99: f64 = 9.21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpawnPolicy {
    /// Every unmatched cluster starts a tentative track.
    Always,
    /// Clusters inside the gate of a confirmed track counted as a group
    /// (k >= 2) belong to that group and do not start new tracks.
    #[default]
    GroupOwnsGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub sigma_a: f64,
    pub sigma_range_m: f64,
    pub sigma_az_deg: f64,
    pub init_sigma_v: f64,
    pub gate: f64,
    pub confirm_hits: usize,
    pub confirm_window: usize,
    pub max_misses: usize,
    pub spawn_policy: SpawnPolicy,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            sigma_a: 1.5,
            sigma_range_m: 0.2,
            sigma_az_deg: 4.0,
            init_sigma_v: 1.0,
            gate: GATE_CHI2_2DOF_99,
            confirm_hits: 3,
            confirm_window: 5,
            max_misses: 5,
            spawn_policy: SpawnPolicy::GroupOwnsGate,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sigma_a >= 0.0
            && self.sigma_range_m > 0.0
            && self.sigma_az_deg > 0.0
            && self.gate > 0.0
            && self.confirm_hits >= 1
            && self.confirm_hits <= self.confirm_window
            && self.max_misses >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid tracker config {self:?}")))
        }
    }

    pub fn measurement(&self, x: f64, y: f64) -> Measurement {
        Measurement::from_xy(x, y, self.sigma_range_m, self.sigma_az_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub id: u64,
    pub est: Estimate,
    pub status: TrackStatus,
    pub hits: usize,
    pub misses: usize,
    /// Hit (true) or miss per frame since birth, newest last, capped at the
    /// confirmation window.
    pub recent: VecDeque<bool>,
    pub age: usize,
    pub count_estimate: usize,
    pub feature_buffer_ref: u64,
    pub born_frame: u64,
    pub confirmed_frame: Option<u64>,
    /// Times the covariance had to be repaired.
    pub reconditioned: usize,
    pub last_innovation: Option<Innovation>,
}

impl TrackState {
    fn new(id: u64, z: &Measurement, frame: u64, cfg: &TrackerConfig) -> Self {
        Self {
            id,
            est: Estimate::from_measurement(z, cfg.init_sigma_v),
            status: TrackStatus::Tentative,
            hits: 1,
            misses: 0,
            recent: VecDeque::from([true]),
            age: 1,
            count_estimate: 1,
            feature_buffer_ref: id,
            born_frame: frame,
            confirmed_frame: None,
            reconditioned: 0,
            last_innovation: None,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        self.est.position()
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    fn record(&mut self, hit: bool, window: usize) {
        self.recent.push_back(hit);
        while self.recent.len() > window {
            self.recent.pop_front();
        }
        self.age += 1;
        if hit {
            self.hits += 1;
            self.misses = 0;
        } else {
            self.misses += 1;
        }
    }
}

/// Squared Mahalanobis distance of every measurement to every track's
/// predicted measurement; gated pairs are infinite.
pub fn gated_costs(tracks: &[TrackState], meas: &[Measurement], gate: f64) -> Vec<f64> {
    let mut costs = Vec::with_capacity(tracks.len() * meas.len());
    for t in tracks {
        for z in meas {
            let c = t.est.innovation(z).map_or(f64::INFINITY, |i| i.nis);
            costs.push(if c <= gate { c } else { f64::INFINITY });
        }
    }
    costs
}

/// Global nearest neighbour: optimal one-to-one assignment over the
/// admissible pairs. Rows are tracks, columns are measurements.
pub fn associate_gnn(tracks: &[TrackState], meas: &[Measurement], gate: f64) -> Assignment {
    assign::solve(&gated_costs(tracks, meas, gate), tracks.len(), meas.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackView {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub status: TrackStatus,
    pub count_estimate: usize,
    /// Index of the measurement used this frame.
    pub measurement: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackerSnapshot {
    pub frame: u64,
    /// Live tracks after this frame, in id order.
    pub tracks: Vec<TrackView>,
    /// Ids deleted during this frame.
    pub deleted: Vec<u64>,
    /// Ids that became confirmed during this frame.
    pub confirmed: Vec<u64>,
}

impl TrackerSnapshot {
    pub fn confirmed_tracks(&self) -> impl Iterator<Item = &TrackView> {
        self.tracks.iter().filter(|t| t.status == TrackStatus::Confirmed)
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    pub cfg: TrackerConfig,
    tracks: Vec<TrackState>,
    next_id: u64,
    frame: u64,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tracks: Vec::new(),
            next_id: 1,
            frame: 0,
        })
    }

    pub fn tracks(&self) -> &[TrackState] {
        &self.tracks
    }

    pub fn track(&self, id: u64) -> Option<&TrackState> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// Count feedback from the classifier, applied to confirmed tracks.
    pub fn set_count_estimate(&mut self, id: u64, count: usize) -> Result<()> {
        let t = self.tracks.iter_mut().find(|t| t.id == id).ok_or(Error::Unconfirmed(id))?;
        if t.status != TrackStatus::Confirmed {
            return Err(Error::Unconfirmed(id));
        }
        t.count_estimate = count.max(1);
        Ok(())
    }

    /// One frame: predict, gate and associate, update, then lifecycle.
    pub fn step(&mut self, meas: &[Measurement], dt: f64) -> Result<TrackerSnapshot> {
        if meas.iter().any(|z| !z.is_valid()) {
            return Err(Error::NonFinite("measurement".into()));
        }
        let frame = self.frame;
        self.frame += 1;
        for t in &mut self.tracks {
            t.est = t.est.predict(dt, self.cfg.sigma_a)?;
        }
        let assignment = associate_gnn(&self.tracks, meas, self.cfg.gate);
        let mut used = vec![None; self.tracks.len()];
        for &(ti, mi) in &assignment.pairs {
            let t = &mut self.tracks[ti];
            // A singular innovation covariance counts as a miss.
            if let Ok((post, inn)) = t.est.update(&meas[mi]) {
                t.est = post;
                t.last_innovation = Some(inn);
                used[ti] = Some(mi);
            }
        }
        let spawn: Vec<usize> = assignment.unassigned_cols.iter().copied().filter(|&mi| self.may_spawn(&meas[mi])).collect();
        Ok(self.manage_lifecycle(frame, &used, meas, &spawn))
    }

    fn may_spawn(&self, z: &Measurement) -> bool {
        match self.cfg.spawn_policy {
            SpawnPolicy::Always => true,
            SpawnPolicy::GroupOwnsGate => !self
                .tracks
                .iter()
                .any(|t| t.is_confirmed() && t.count_estimate >= 2 && t.est.innovation(z).is_some_and(|i| i.nis <= self.cfg.gate)),
        }
    }

    fn manage_lifecycle(&mut self, frame: u64, used: &[Option<usize>], meas: &[Measurement], spawn: &[usize]) -> TrackerSnapshot {
        let cfg = self.cfg;
        let mut snap = TrackerSnapshot {
            frame,
            ..TrackerSnapshot::default()
        };
        for (t, u) in self.tracks.iter_mut().zip(used) {
            t.record(u.is_some(), cfg.confirm_window);
            if t.status == TrackStatus::Tentative {
                let hits = t.recent.iter().filter(|h| **h).count();
                if hits >= cfg.confirm_hits {
                    t.status = TrackStatus::Confirmed;
                    t.confirmed_frame = Some(frame);
                    snap.confirmed.push(t.id);
                } else if t.age >= cfg.confirm_window {
                    t.status = TrackStatus::Deleted;
                }
            }
            if t.misses >= cfg.max_misses {
                t.status = TrackStatus::Deleted;
            }
            if t.status == TrackStatus::Deleted {
                snap.deleted.push(t.id);
            }
        }
        let mut views: Vec<(u64, Option<usize>)> = self.tracks.iter().map(|t| t.id).zip(used.iter().copied()).collect();
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);
        views.retain(|(id, _)| !snap.deleted.contains(id));
        for &mi in spawn {
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(TrackState::new(id, &meas[mi], frame, &cfg));
            views.push((id, Some(mi)));
        }
        snap.tracks = self
            .tracks
            .iter()
            .zip(&views)
            .map(|(t, &(_, m))| TrackView {
                id: t.id,
                x: t.est.x[0],
                y: t.est.x[1],
                vx: t.est.x[2],
                vy: t.est.x[3],
                status: t.status,
                count_estimate: t.count_estimate,
                measurement: m,
            })
            .collect();
        snap
    }
}

/// One line of the track log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackLogRecord {
    pub frame: u64,
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub status: TrackStatus,
    pub count: usize,
}

/// One JSON line per live track.
pub fn write_track_log<W: Write>(snap: &TrackerSnapshot, mut out: W) -> Result<()> {
    for t in &snap.tracks {
        let rec = TrackLogRecord {
            frame: snap.frame,
            id: t.id,
            x: t.x,
            y: t.y,
            vx: t.vx,
            vy: t.vy,
            status: t.status,
            count: t.count_estimate,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_track_log<R: BufRead>(input: R) -> Result<Vec<TrackLogRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
