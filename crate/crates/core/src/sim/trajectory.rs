//! Group motion planning. The group anchor follows a chain of dwell, turn
//! and move segments; members sit at formation offsets around it.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{MotionKind, Room, ScenarioConfig, WALL_MARGIN_M};
use super::truth::{GroundTruth, PersonTruth, TruthFrame};
use crate::error::Result;

/// Internal trajectory sampling rate.
pub const FINE_RATE_HZ: f64 = 100.0;

const ACCEL: f64 = 1.0;
const TURN_RATE: f64 = 150f64.to_radians();
const MAX_LEG_M: f64 = 4.5;
const MIN_RADAR_DIST_M: f64 = 1.6;
/// Walkable half-angle around boresight, a little inside the antenna beam.
const WALK_HALF_ANGLE: f64 = 32.0 * PI / 180.0;
const JITTER_AMP: f64 = 0.02;

type P = [f64; 2];

fn add(a: P, b: P) -> P {
    [a[0] + b[0], a[1] + b[1]]
}
fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}
fn scale(a: P, k: f64) -> P {
    [a[0] * k, a[1] * k]
}
fn norm(a: P) -> f64 {
    a[0].hypot(a[1])
}
fn lerp(a: P, b: P, t: f64) -> P {
    add(a, scale(sub(b, a), t))
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Trapezoidal speed profile over a straight leg.
#[derive(Debug, Clone, Copy)]
struct SpeedProfile {
    length: f64,
    v_peak: f64,
    t_acc: f64,
    t_cruise: f64,
}

impl SpeedProfile {
    fn new(length: f64, v: f64) -> Self {
        let v_peak = if length < v * v / ACCEL { (ACCEL * length).sqrt() } else { v };
        let t_acc = v_peak / ACCEL;
        let t_cruise = (length - v_peak * v_peak / ACCEL) / v_peak.max(1e-9);
        Self {
            length,
            v_peak,
            t_acc,
            t_cruise: t_cruise.max(0.0),
        }
    }

    fn duration(&self) -> f64 {
        2.0 * self.t_acc + self.t_cruise
    }

    fn distance(&self, tau: f64) -> f64 {
        let d_acc = 0.5 * ACCEL * self.t_acc * self.t_acc;
        let s = if tau <= self.t_acc {
            0.5 * ACCEL * tau * tau
        } else if tau <= self.t_acc + self.t_cruise {
            d_acc + self.v_peak * (tau - self.t_acc)
        } else {
            let rem = (self.duration() - tau).max(0.0);
            self.length - 0.5 * ACCEL * rem * rem
        };
        s.clamp(0.0, self.length)
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Dwell { pos: P, heading: f64, dur: f64 },
    Turn { pos: P, from: f64, to: f64, dur: f64 },
    Move { from: P, to: P, profile: SpeedProfile },
}

impl Segment {
    fn duration(&self) -> f64 {
        match *self {
            Segment::Dwell { dur, .. } | Segment::Turn { dur, .. } => dur,
            Segment::Move { profile, .. } => profile.duration(),
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Segment::Move { profile, .. } => profile.length,
            _ => 0.0,
        }
    }

    /// Position, heading and distance travelled `tau` seconds in.
    fn at(&self, tau: f64) -> (P, f64, f64) {
        match *self {
            Segment::Dwell { pos, heading, .. } => (pos, heading, 0.0),
            Segment::Turn { pos, from, to, dur } => {
                let f = if dur > 0.0 { (tau / dur).clamp(0.0, 1.0) } else { 1.0 };
                (pos, from + wrap_angle(to - from) * f, 0.0)
            }
            Segment::Move { from, to, profile } => {
                let s = profile.distance(tau);
                let d = sub(to, from);
                let heading = d[1].atan2(d[0]);
                (lerp(from, to, s / profile.length.max(1e-12)), heading, s)
            }
        }
    }
}

/// Anchor plan in world coordinates.
#[derive(Debug, Default)]
struct Plan {
    segs: Vec<(f64, f64, Segment)>,
    end_t: f64,
    end_s: f64,
}

impl Plan {
    fn push(&mut self, seg: Segment) {
        self.segs.push((self.end_t, self.end_s, seg));
        self.end_t += seg.duration();
        self.end_s += seg.length();
    }

    fn at(&self, t: f64) -> (P, f64, f64) {
        let idx = self.segs.partition_point(|(t0, _, _)| *t0 <= t).saturating_sub(1);
        let (t0, s0, seg) = self.segs[idx];
        let (p, h, s) = seg.at(t - t0);
        (p, h, s0 + s)
    }

    fn last_pose(&self) -> (P, f64) {
        let (_, _, seg) = self.segs.last().expect("plan not empty");
        let (p, h, _) = seg.at(seg.duration());
        (p, h)
    }

    fn turn_to(&mut self, heading: f64) {
        let (pos, from) = self.last_pose();
        let delta = wrap_angle(heading - from).abs();
        if delta > 10f64.to_radians() {
            self.push(Segment::Turn {
                pos,
                from,
                to: heading,
                dur: delta / TURN_RATE,
            });
        }
    }

    fn move_to(&mut self, to: P, speed: f64) {
        let (from, _) = self.last_pose();
        let len = norm(sub(to, from));
        if len > 1e-9 {
            self.push(Segment::Move {
                from,
                to,
                profile: SpeedProfile::new(len, speed),
            });
        }
    }
}

struct Zone {
    room: Room,
    margin: f64,
    /// Formation radius; the whole group has to stay inside the beam.
    spread: f64,
}

impl Zone {
    fn contains(&self, p: P) -> bool {
        let inside = p[0] >= self.margin && p[0] <= self.room.width_m - self.margin && p[1] >= self.margin && p[1] <= self.room.depth_m - self.margin;
        let (x, y) = self.room.to_radar(p[0], p[1]);
        let r = norm(p);
        inside && r >= MIN_RADAR_DIST_M && x.atan2(y).abs() + (self.spread / r).atan() <= WALK_HALF_ANGLE
    }

    /// Segment stays clear of the radar corner (the zone is otherwise convex).
    fn segment_ok(&self, a: P, b: P) -> bool {
        let d = sub(b, a);
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 > 0.0 {
            (-(a[0] * d[0] + a[1] * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        norm(lerp(a, b, t)) >= MIN_RADAR_DIST_M - 0.4
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> P {
        loop {
            let p = [
                rng.random_range(self.margin..=self.room.width_m - self.margin),
                rng.random_range(self.margin..=self.room.depth_m - self.margin),
            ];
            if self.contains(p) {
                return p;
            }
        }
    }
}

/// Formation offsets in a (forward, left) body frame.
fn formation(n: usize, spacing: f64, kind: MotionKind) -> Vec<P> {
    match (n, kind) {
        (1, _) => vec![[0.0, 0.0]],
        (2, MotionKind::Following) => vec![[spacing / 2.0, 0.0], [-spacing / 2.0, 0.0]],
        (2, _) => vec![[0.0, spacing / 2.0], [0.0, -spacing / 2.0]],
        _ => {
            let r = spacing / 3f64.sqrt();
            (0..n)
                .map(|i| {
                    let a = TAU * i as f64 / n as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect()
        }
    }
}

fn body_to_world(offset: P, heading: f64) -> P {
    let (s, c) = heading.sin_cos();
    [offset[0] * c - offset[1] * s, offset[0] * s + offset[1] * c]
}

/// Slow positional sway of one group member.
struct Jitter {
    terms: Vec<(f64, f64, f64, usize)>,
}

impl Jitter {
    fn new(rng: &mut ChaCha8Rng, enabled: bool) -> Self {
        let terms = if enabled {
            (0..4)
                .map(|i| (JITTER_AMP, rng.random_range(0.05..0.25), rng.random_range(0.0..TAU), i / 2))
                .collect()
        } else {
            Vec::new()
        };
        Self { terms }
    }

    fn at(&self, t: f64) -> P {
        let mut out = [0.0; 2];
        for &(a, f, ph, axis) in &self.terms {
            out[axis] += a * (TAU * f * t + ph).sin();
        }
        out
    }
}

fn forward_backward(cfg: &ScenarioConfig, zone: &Zone, rng: &mut ChaCha8Rng, speed: f64) -> (Plan, f64) {
    let room = cfg.room;
    let diag = room.depth_m.atan2(room.width_m);
    loop {
        let c = [
            room.width_m / 2.0 + rng.random_range(-0.3..0.3),
            room.depth_m / 2.0 + rng.random_range(-0.3..0.3),
        ];
        let psi = diag + rng.random_range(-20f64..20.0).to_radians();
        let u = [psi.cos(), psi.sin()];
        // Walk outwards from the centre until the zone ends.
        let reach = |sign: f64| {
            let mut t = 0.0;
            while t < 10.0 && zone.contains(add(c, scale(u, sign * (t + 0.05)))) {
                t += 0.05;
            }
            t
        };
        if !zone.contains(c) {
            continue;
        }
        let (mut lo, mut hi) = (-reach(-1.0), reach(1.0));
        if hi - lo < 2.0 {
            continue;
        }
        if hi - lo > MAX_LEG_M {
            let start = lo + rng.random_range(0.0..(hi - lo - MAX_LEG_M));
            lo = start;
            hi = start + MAX_LEG_M;
        }
        let ends = [add(c, scale(u, lo)), add(c, scale(u, hi))];
        let first = rng.random_range(0..2usize);
        let mut plan = Plan::default();
        let mut at = first;
        let heading = |from: usize| if from == 0 { psi } else { psi + PI };
        plan.push(Segment::Dwell {
            pos: ends[at],
            heading: heading(at),
            dur: rng.random_range(0.0..0.5),
        });
        while plan.end_t < cfg.duration_s + 1.0 {
            plan.move_to(ends[1 - at], speed);
            at = 1 - at;
            let (pos, _) = plan.last_pose();
            plan.push(Segment::Dwell {
                pos,
                heading: heading(at),
                dur: rng.random_range(0.5..1.0),
            });
        }
        return (plan, psi);
    }
}

fn waypoint_walk(cfg: &ScenarioConfig, zone: &Zone, rng: &mut ChaCha8Rng, speed: f64, max_turn: f64, lead_in: f64) -> (Plan, Vec<P>) {
    let start = zone.sample(rng);
    let mut path = vec![start];
    let mut plan = Plan::default();
    let mut pos = start;
    let mut heading: Option<f64> = None;
    let mut first = true;
    while plan.end_t < cfg.duration_s + 1.0 {
        let mut next = None;
        for _ in 0..500 {
            let cand = zone.sample(rng);
            let d = sub(cand, pos);
            let len = norm(d);
            if !(1.5..=4.0).contains(&len) || !zone.segment_ok(pos, cand) {
                continue;
            }
            let h = d[1].atan2(d[0]);
            if let Some(prev) = heading {
                if wrap_angle(h - prev).abs() > max_turn {
                    continue;
                }
            }
            next = Some((cand, h));
            break;
        }
        let Some((cand, h)) = next else {
            // Cornered: drop the turn limit for this waypoint.
            heading = None;
            continue;
        };
        if first {
            // The anchor starts `lead_in` metres along the first leg.
            let off = lerp(pos, cand, lead_in / norm(sub(cand, pos)));
            plan.push(Segment::Dwell {
                pos: off,
                heading: h,
                dur: rng.random_range(0.0..0.5),
            });
            first = false;
        } else {
            plan.turn_to(h);
        }
        plan.move_to(cand, speed);
        if rng.random_bool(0.6) {
            plan.push(Segment::Dwell {
                pos: cand,
                heading: h,
                dur: rng.random_range(0.5..2.0),
            });
        }
        path.push(cand);
        pos = cand;
        heading = Some(h);
    }
    (plan, path)
}

/// Point at arc length `s` along a polyline.
fn along(path: &[P], s: f64) -> P {
    let mut rem = s.max(0.0);
    for w in path.windows(2) {
        let len = norm(sub(w[1], w[0]));
        if rem <= len {
            return lerp(w[0], w[1], rem / len.max(1e-12));
        }
        rem -= len;
    }
    *path.last().expect("path not empty")
}

/// Per-person world positions at the fine rate.
struct Fine {
    positions: Vec<Vec<P>>,
}

fn plan_fine(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Fine {
    let n_fine = (cfg.duration_s * FINE_RATE_HZ).ceil() as usize + 2;
    let speed = rng.random_range(0.8..1.3);
    let offsets = formation(cfg.n_people, cfg.group_spacing_m, cfg.motion_kind);
    let radius = offsets.iter().map(|o| norm(*o)).fold(0.0, f64::max);
    let jitter: Vec<Jitter> = (0..cfg.n_people).map(|_| Jitter::new(rng, cfg.n_people > 1)).collect();
    let zone = Zone {
        room: cfg.room,
        margin: WALL_MARGIN_M + radius + 0.1,
        spread: radius + 0.1,
    };
    let mut positions = vec![Vec::with_capacity(n_fine); cfg.n_people];
    let t_of = |i: usize| i as f64 / FINE_RATE_HZ;
    match cfg.motion_kind {
        MotionKind::ForwardBackward => {
            let (plan, psi) = forward_backward(cfg, &zone, rng, speed);
            // Formation fixed in the world: members turn in place at the ends.
            for i in 0..n_fine {
                let (p, _, _) = plan.at(t_of(i));
                for (k, o) in offsets.iter().enumerate() {
                    positions[k].push(add(add(p, body_to_world(*o, psi)), jitter[k].at(t_of(i))));
                }
            }
        }
        MotionKind::RandomWalk => {
            let (plan, _) = waypoint_walk(cfg, &zone, rng, speed, PI, 0.0);
            for i in 0..n_fine {
                let (p, h, _) = plan.at(t_of(i));
                for (k, o) in offsets.iter().enumerate() {
                    positions[k].push(add(add(p, body_to_world(*o, h)), jitter[k].at(t_of(i))));
                }
            }
        }
        MotionKind::Following => {
            let zone = Zone {
                room: cfg.room,
                margin: WALL_MARGIN_M + 0.1,
                spread: 0.1,
            };
            let spacing = cfg.group_spacing_m;
            let (plan, path) = waypoint_walk(cfg, &zone, rng, speed, 120f64.to_radians(), spacing);
            for i in 0..n_fine {
                let (_, h, s) = plan.at(t_of(i));
                for k in 0..cfg.n_people {
                    let behind = spacing * k as f64;
                    let p = along(&path, spacing + s - behind);
                    // Sideways sway only, so the in-line gap stays near nominal.
                    let j = jitter[k].at(t_of(i));
                    let side = body_to_world([0.0, j[0]], h);
                    positions[k].push(add(p, side));
                }
            }
        }
    }
    Fine { positions }
}

/// Ground-truth trajectories for a scenario, sampled at `frame_rate_hz`.
pub fn gen_trajectories(cfg: &ScenarioConfig, frame_rate_hz: f64) -> Result<GroundTruth> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7472_616a);
    let fine = plan_fine(cfg, &mut rng);
    let room = cfg.room;
    // Radar-frame position and velocity per person at the fine rate.
    let states: Vec<Vec<[f64; 4]>> = fine
        .positions
        .iter()
        .map(|track| {
            let radar: Vec<P> = track
                .iter()
                .map(|p| {
                    let (x, y) = room.to_radar(p[0], p[1]);
                    [x, y]
                })
                .collect();
            let n = radar.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                    let dt = (b - a) as f64 / FINE_RATE_HZ;
                    let v = scale(sub(radar[b], radar[a]), 1.0 / dt);
                    [radar[i][0], radar[i][1], v[0], v[1]]
                })
                .collect()
        })
        .collect();
    let n_frames = (cfg.duration_s * frame_rate_hz).round() as usize;
    let frames = (0..n_frames)
        .map(|f| {
            let t = f as f64 / frame_rate_hz;
            let persons = states
                .iter()
                .enumerate()
                .map(|(id, s)| {
                    let st = interp(s, t);
                    PersonTruth {
                        id,
                        x: st[0],
                        y: st[1],
                        vx: st[2],
                        vy: st[3],
                    }
                })
                .collect();
            TruthFrame::new(f as u64, t, persons, cfg.grouping_radius_m())
        })
        .collect();
    Ok(GroundTruth {
        frames,
        fine_rate_hz: FINE_RATE_HZ,
        fine: states,
        frame_rate_hz,
        grouping_radius_m: cfg.grouping_radius_m(),
        room,
    })
}

/// Linear interpolation of a fine-rate state track at time `t`.
pub(crate) fn interp(track: &[[f64; 4]], t: f64) -> [f64; 4] {
    let pos = (t * FINE_RATE_HZ).max(0.0);
    let i = (pos.floor() as usize).min(track.len() - 1);
    let j = (i + 1).min(track.len() - 1);
    let f = pos - i as f64;
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = track[i][k] + (track[j][k] - track[i][k]) * f.min(1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(id: u8, seed: u64, dur: f64) -> GroundTruth {
        let mut cfg = ScenarioConfig::preset(id, seed);
        cfg.duration_s = dur;
        gen_trajectories(&cfg, 10.0).unwrap()
    }

    #[test]
    fn speed_profile_covers_leg() {
        for (len, v) in [(4.0, 1.0), (0.3, 1.2)] {
            let p = SpeedProfile::new(len, v);
            assert!((p.distance(p.duration()) - len).abs() < 1e-9);
            assert_eq!(p.distance(0.0), 0.0);
        }
    }

    #[test]
    fn positions_inside_room_and_beam() {
        for id in 1..=6 {
            for seed in 0..4 {
                let gt = truth(id, seed, 60.0);
                for fr in &gt.frames {
                    for p in &fr.persons {
                        assert!(gt.room.contains_radar(p.x, p.y), "scenario {id} seed {seed}");
                        assert!(p.x.atan2(p.y).abs() < 38.25f64.to_radians());
                    }
                }
            }
        }
    }

    #[test]
    fn forward_backward_reverses_with_dwell() {
        let gt = truth(1, 7, 60.0);
        // Count sign changes of the speed along the dominant axis, using
        // the 100 Hz track to catch the dwell instants.
        let fine = &gt.fine[0];
        let mut reversals = Vec::new();
        let mut last_dir = 0.0f64;
        let mut stopped_since_last = false;
        for (i, s) in fine.iter().enumerate() {
            let speed = s[2].hypot(s[3]);
            if speed < 0.1 {
                stopped_since_last = true;
                continue;
            }
            let dir = s[3].signum();
            if last_dir != 0.0 && dir != last_dir && speed > 0.3 {
                assert!(stopped_since_last, "reversal without dwell");
                reversals.push(i as f64 / FINE_RATE_HZ);
            }
            if speed > 0.3 {
                last_dir = dir;
                stopped_since_last = false;
            }
        }
        for w in 0..3 {
            let (a, b) = (w as f64 * 20.0, (w + 1) as f64 * 20.0);
            let n = reversals.iter().filter(|t| **t >= a && **t < b).count();
            assert!(n >= 2, "window {w}: {n} reversals");
        }
    }

    #[test]
    fn group_spacing_holds() {
        for id in [3u8, 4, 5, 6] {
            for seed in 0..4 {
                let gt = truth(id, seed, 60.0);
                for fr in &gt.frames {
                    for a in 0..fr.persons.len() {
                        for b in a + 1..fr.persons.len() {
                            let d = (fr.persons[a].x - fr.persons[b].x).hypot(fr.persons[a].y - fr.persons[b].y);
                            assert!((0.2..=1.1).contains(&d), "scenario {id} seed {seed} frame {}: {d}", fr.frame);
                        }
                    }
                    assert_eq!(fr.true_count_per_group(), vec![fr.persons.len()]);
                }
            }
        }
    }

    #[test]
    fn random_walk_stops_and_turns() {
        let gt = truth(2, 3, 60.0);
        let fine = &gt.fine[0];
        let stopped = fine.iter().filter(|s| s[2].hypot(s[3]) < 0.05).count() as f64 / FINE_RATE_HZ;
        assert!(stopped > 2.0, "stopped {stopped} s");
        let headings: Vec<f64> = fine.iter().filter(|s| s[2].hypot(s[3]) > 0.5).map(|s| s[3].atan2(s[2])).collect();
        let spread = headings.iter().cloned().fold(f64::MIN, f64::max) - headings.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1.0);
    }

    #[test]
    fn deterministic() {
        let a = truth(5, 11, 30.0);
        let b = truth(5, 11, 30.0);
        assert_eq!(a.frames, b.frames);
        let c = truth(5, 12, 30.0);
        assert_ne!(a.frames, c.frames);
    }

    #[test]
    fn frame_count_and_times() {
        let gt = truth(3, 0, 12.0);
        assert_eq!(gt.frames.len(), 120);
        assert!((gt.frames[37].time_s - 3.7).abs() < 1e-12);
    }
}
