use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::scenario::Room;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonTruth {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(skip)]
    pub vx: f64,
    #[serde(skip)]
    pub vy: f64,
}

/// People standing within the grouping radius of each other (transitively).
#[derive(Debug, Clone, PartialEq)]
pub struct TruthGroup {
    pub members: Vec<usize>,
    pub centroid: (f64, f64),
}

impl TruthGroup {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthFrame {
    pub frame: u64,
    pub time_s: f64,
    pub persons: Vec<PersonTruth>,
    pub groups: Vec<TruthGroup>,
}

impl TruthFrame {
    pub fn new(frame: u64, time_s: f64, persons: Vec<PersonTruth>, grouping_radius_m: f64) -> Self {
        let groups = group_persons(&persons, grouping_radius_m);
        Self {
            frame,
            time_s,
            persons,
            groups,
        }
    }

    pub fn true_count_per_group(&self) -> Vec<usize> {
        self.groups.iter().map(TruthGroup::count).collect()
    }

    pub fn person(&self, id: usize) -> Option<&PersonTruth> {
        self.persons.iter().find(|p| p.id == id)
    }
}

/// Connected components of the "within radius" graph, ordered by the
/// smallest member index.
pub fn group_persons(persons: &[PersonTruth], radius: f64) -> Vec<TruthGroup> {
    let n = persons.len();
    let mut label = vec![usize::MAX; n];
    let mut groups = Vec::new();
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        let g = groups.len();
        label[seed] = g;
        let mut stack = vec![seed];
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX && (persons[i].x - persons[j].x).hypot(persons[i].y - persons[j].y) <= radius {
                    label[j] = g;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        let k = members.len() as f64;
        let cx = members.iter().map(|&i| persons[i].x).sum::<f64>() / k;
        let cy = members.iter().map(|&i| persons[i].y).sum::<f64>() / k;
        groups.push(TruthGroup {
            members: members.iter().map(|&i| persons[i].id).collect(),
            centroid: (cx, cy),
        });
    }
    groups
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub frames: Vec<TruthFrame>,
    pub frame_rate_hz: f64,
    pub grouping_radius_m: f64,
    pub room: Room,
    /// Per person `(x, y, vx, vy)` in the radar frame at `fine_rate_hz`.
    pub fine: Vec<Vec<[f64; 4]>>,
    pub fine_rate_hz: f64,
}

impl GroundTruth {
    /// Person state at an arbitrary time, interpolated from the fine track.
    pub fn state_at(&self, person: usize, t: f64) -> [f64; 4] {
        super::trajectory::interp(&self.fine[person], t)
    }

    pub fn n_people(&self) -> usize {
        self.fine.len()
    }
}

#[derive(Serialize, Deserialize)]
struct TruthRecord {
    frame: u64,
    t: f64,
    persons: Vec<PersonTruth>,
    true_count_per_group: Vec<usize>,
    group_members: Vec<Vec<usize>>,
}

pub fn write_truth_jsonl<W: Write>(frames: &[TruthFrame], mut out: W) -> Result<()> {
    for f in frames {
        let rec = TruthRecord {
            frame: f.frame,
            t: f.time_s,
            persons: f.persons.clone(),
            true_count_per_group: f.true_count_per_group(),
            group_members: f.groups.iter().map(|g| g.members.clone()).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads frames back; groups are regrouped from positions with `grouping_radius_m`.
pub fn read_truth_jsonl<R: BufRead>(input: R, grouping_radius_m: f64) -> Result<Vec<TruthFrame>> {
    let mut frames = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TruthRecord = serde_json::from_str(&line)?;
        frames.push(TruthFrame::new(rec.frame, rec.t, rec.persons, grouping_radius_m));
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: usize, x: f64, y: f64) -> PersonTruth {
        PersonTruth { id, x, y, vx: 0.0, vy: 0.0 }
    }

    #[test]
    fn grouping_is_transitive() {
        let ps = [p(0, 0.0, 3.0), p(1, 1.0, 3.0), p(2, 2.0, 3.0), p(3, 5.0, 3.0)];
        let g = group_persons(&ps, 1.2);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].members, vec![0, 1, 2]);
        assert_eq!(g[1].count(), 1);
        assert!((g[0].centroid.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jsonl_round_trip() {
        let frames = vec![
            TruthFrame::new(0, 0.0, vec![p(0, 0.5, 2.0), p(1, 0.9, 2.1)], 1.2),
            TruthFrame::new(1, 0.1, vec![p(0, 0.5, 2.0), p(1, 3.0, 2.1)], 1.2),
        ];
        let mut buf = Vec::new();
        write_truth_jsonl(&frames, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["true_count_per_group"], serde_json::json!([2]));
        assert_eq!(first["persons"][0].as_object().unwrap().len(), 3);
        let back = read_truth_jsonl(&buf[..], 1.2).unwrap();
        assert_eq!(back, frames);
    }
}
