//! DBSCAN over per-frame detections in the radar's Cartesian plane.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datacube::Detection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanConfig {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self { eps: 0.9, min_pts: 3 }
    }
}

impl DbscanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) || self.min_pts < 1 {
            return Err(Error::InvalidParams(format!(
                "dbscan needs eps > 0 and min_pts >= 1, got {} and {}",
                self.eps, self.min_pts
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub centroid: (f64, f64),
    pub mean_doppler: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterResult {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<usize>,
}

/// Radar at the origin, boresight along +y, azimuth positive to the right.
pub fn to_cartesian(det: &Detection) -> (f64, f64) {
    let (s, c) = det.azimuth_deg.to_radians().sin_cos();
    (det.range_m * s, det.range_m * c)
}

/// Uniform grid with `eps`-sized cells for fixed-radius neighbour queries.
struct Grid {
    eps: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(points: &[(f64, f64)], eps: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, eps)).or_default().push(i);
        }
        Self { eps, cells }
    }

    fn key(p: &(f64, f64), eps: f64) -> (i64, i64) {
        ((p.0 / eps).floor() as i64, (p.1 / eps).floor() as i64)
    }

    fn neighbours(&self, points: &[(f64, f64)], i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = points[i];
        let (cx, cy) = Self::key(&p, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(cell) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &j in cell {
                        let (ex, ey) = (points[j].0 - p.0, points[j].1 - p.1);
                        if ex * ex + ey * ey <= eps2 {
                            out.push(j);
                        }
                    }
                }
            }
        }
    }
}

/// Cluster label per point, `None` for noise. Clusters are numbered in the
/// order of their lowest-index core point; a border point reachable from
/// several clusters joins the first of them.
pub fn dbscan_labels(points: &[(f64, f64)], eps: f64, min_pts: usize) -> Result<Vec<Option<usize>>> {
    DbscanConfig { eps, min_pts }.validate()?;
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::NonFinite("dbscan input".into()));
    }
    let n = points.len();
    let grid = Grid::new(points, eps);
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut nb = Vec::new();
    let mut next = 0;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        grid.neighbours(points, seed, &mut nb);
        if nb.len() < min_pts {
            continue;
        }
        // `seed` is an unvisited core point: grow a new cluster from it.
        let c = next;
        next += 1;
        visited[seed] = true;
        labels[seed] = Some(c);
        let mut queue: Vec<usize> = nb.clone();
        while let Some(q) = queue.pop() {
            if labels[q].is_none() {
                labels[q] = Some(c);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            grid.neighbours(points, q, &mut nb);
            if nb.len() >= min_pts {
                queue.extend(nb.iter().copied().filter(|&j| !visited[j]));
            }
        }
    }
    Ok(labels)
}

impl ClusterResult {
    pub fn from_labels(points: &[(f64, f64)], dopplers: Option<&[f64]>, labels: &[Option<usize>]) -> Self {
        let k = labels.iter().flatten().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        let mut noise = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            match l {
                Some(c) => members[*c].push(i),
                None => noise.push(i),
            }
        }
        let clusters = members
            .into_iter()
            .map(|m| {
                let n = m.len() as f64;
                let cx = m.iter().map(|&i| points[i].0).sum::<f64>() / n;
                let cy = m.iter().map(|&i| points[i].1).sum::<f64>() / n;
                let mean_doppler = dopplers.map_or(0.0, |d| m.iter().map(|&i| d[i]).sum::<f64>() / n);
                Cluster {
                    members: m,
                    centroid: (cx, cy),
                    mean_doppler,
                }
            })
            .collect();
        Self { clusters, noise }
    }
}

pub fn dbscan(points: &[(f64, f64)], eps: f64, min_pts: usize) -> Result<ClusterResult> {
    let labels = dbscan_labels(points, eps, min_pts)?;
    Ok(ClusterResult::from_labels(points, None, &labels))
}

/// Clusters detections in Cartesian space; Doppler only enters the mean.
pub fn cluster_detections(dets: &[Detection], cfg: &DbscanConfig) -> Result<ClusterResult> {
    let points: Vec<(f64, f64)> = dets.iter().map(to_cartesian).collect();
    let dopplers: Vec<f64> = dets.iter().map(|d| d.radial_velocity).collect();
    let labels = dbscan_labels(&points, cfg.eps, cfg.min_pts)?;
    Ok(ClusterResult::from_labels(&points, Some(&dopplers), &labels))
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cartesian_examples() {
        let d = |r: f64, az: f64| Detection::from_physical(&Default::default(), 0, r, 0.0, az, 10.0);
        let (x, y) = to_cartesian(&d(5.0, 0.0));
        assert!(x.abs() < 1e-12 && (y - 5.0).abs() < 1e-12);
        let (x, y) = to_cartesian(&d(5.0, 90.0));
        assert!((x - 5.0).abs() < 1e-12 && y.abs() < 1e-12);
        let (x, y) = to_cartesian(&d(3.0, 30.0));
        assert!((x - 1.5).abs() < 1e-12 && (y - 2.598076211353316).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_form_one_cluster() {
        let pts = vec![(1.0, 2.0); 5];
        let r = dbscan(&pts, 0.5, 3).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].centroid, (1.0, 2.0));
        assert!(r.noise.is_empty());
    }

    #[test]
    fn distant_blobs_separate() {
        let mut pts: Vec<(f64, f64)> = (0..5).map(|i| (0.05 * i as f64, 0.0)).collect();
        pts.extend((0..5).map(|i| (10.0 + 0.05 * i as f64, 0.0)));
        let r = dbscan(&pts, 0.5, 3).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert_eq!(r.clusters[1].members, vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(dbscan(&[(0.0, 0.0)], 0.0, 3).is_err());
        assert!(dbscan(&[(0.0, 0.0)], 1.0, 0).is_err());
        assert!(dbscan(&[(f64::NAN, 0.0)], 1.0, 1).is_err());
        assert!(dbscan(&[], 1.0, 1).unwrap().clusters.is_empty());
    }

    #[test]
    fn border_joins_first_cluster() {
        // Point 2 sits within eps of two separate cores.
        let pts = vec![(0.0, 0.0), (0.0, 0.1), (0.5, 0.0), (1.0, 0.0), (1.0, 0.1)];
        let labels = dbscan_labels(&pts, 0.55, 2).unwrap();
        assert_eq!(labels, oracle::dbscan(&pts, 0.55, 2));
    }

    fn cloud() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0..6.0f64, 0.0..6.0f64), 0..120)
    }

    fn core_flags(pts: &[(f64, f64)], eps: f64, min_pts: usize) -> Vec<bool> {
        (0..pts.len())
            .map(|i| pts.iter().filter(|q| (q.0 - pts[i].0).powi(2) + (q.1 - pts[i].1).powi(2) <= eps * eps).count() >= min_pts)
            .collect()
    }

    proptest! {
        #[test]
        fn matches_oracle(pts in cloud(), eps in 0.05..1.5f64, min_pts in 1usize..6) {
            prop_assert_eq!(dbscan_labels(&pts, eps, min_pts).unwrap(), oracle::dbscan(&pts, eps, min_pts));
        }

        #[test]
        fn partition_and_min_size(pts in cloud(), eps in 0.05..1.5f64, min_pts in 1usize..6) {
            let r = dbscan(&pts, eps, min_pts).unwrap();
            let core = core_flags(&pts, eps, min_pts);
            let mut seen = vec![0u8; pts.len()];
            for c in &r.clusters {
                // A shared border point joins only one cluster, so the size
                // bound holds for the reachable set, not the exclusive one.
                let reach = (0..pts.len())
                    .filter(|&j| c.members.iter().any(|&m| {
                        core[m] && (pts[m].0 - pts[j].0).powi(2) + (pts[m].1 - pts[j].1).powi(2) <= eps * eps
                    }))
                    .count();
                prop_assert!(reach >= min_pts);
                prop_assert!(c.members.iter().any(|&m| core[m]));
                for &m in &c.members { seen[m] += 1; }
            }
            for &m in &r.noise { seen[m] += 1; }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }

        #[test]
        fn permutation_keeps_core_partition(pts in cloud(), eps in 0.05..1.5f64, min_pts in 1usize..6, rot in 0usize..120) {
            let n = pts.len();
            prop_assume!(n > 0);
            let rot = rot % n;
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).rev().collect();
            let shuffled: Vec<(f64, f64)> = perm.iter().map(|&i| pts[i]).collect();
            let a = dbscan_labels(&pts, eps, min_pts).unwrap();
            let b = dbscan_labels(&shuffled, eps, min_pts).unwrap();
            let core = core_flags(&pts, eps, min_pts);
            // Noise is order independent; core points keep their partition.
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(a[i].is_none(), b[k].is_none());
            }
            let mut map = HashMap::new();
            for (k, &i) in perm.iter().enumerate() {
                if core[i] {
                    let prev = map.insert(a[i], b[k]);
                    prop_assert!(prev.is_none() || prev == Some(b[k]));
                }
            }
            let mut images: Vec<_> = map.values().collect();
            images.sort();
            images.dedup();
            prop_assert_eq!(images.len(), map.len());
        }

        #[test]
        fn shrinking_eps_never_creates_core_from_noise(pts in cloud(), eps in 0.1..1.5f64, f in 0.1..1.0f64, min_pts in 1usize..6) {
            let big = dbscan_labels(&pts, eps, min_pts).unwrap();
            let small_core = core_flags(&pts, eps * f, min_pts);
            for i in 0..pts.len() {
                if big[i].is_none() {
                    prop_assert!(!small_core[i]);
                }
            }
        }
    }
}
