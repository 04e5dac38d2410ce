use grouptrack::track::{process_noise, transition, Estimate, Measurement, SpawnPolicy, Tracker, TrackerConfig};
use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DT: f64 = 0.1;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[test]
fn noise_free_walker_is_confirmed_and_followed() {
    let mut t = Tracker::new(TrackerConfig::default()).unwrap();
    let pos = |k: usize| (-1.0 + 0.06 * k as f64, 3.0 + 0.03 * k as f64);
    let mut err = Vec::new();
    for k in 0..60 {
        let (x, y) = pos(k);
        let s = t.step(&[t.cfg.measurement(x, y)], DT).unwrap();
        let confirmed: Vec<_> = s.confirmed_tracks().collect();
        if k >= 2 {
            assert_eq!(confirmed.len(), 1, "frame {k}");
            assert_eq!(confirmed[0].id, 1);
        }
        if k >= 20 {
            err.push((confirmed[0].x - x).hypot(confirmed[0].y - y));
        }
    }
    let rms = (err.iter().map(|e| e * e).sum::<f64>() / err.len() as f64).sqrt();
    assert!(rms < 1e-3, "RMS {rms}");
}

#[test]
fn separated_walkers_keep_their_ids() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut t = Tracker::new(TrackerConfig::default()).unwrap();
    // Two parallel walkers 2 m apart, going back and forth.
    let walker = |k: usize, x0: f64| {
        let phase = (k as f64 * DT * 0.25).sin();
        (x0 + 0.3 * phase, 2.5 + 1.5 * phase)
    };
    let mut owner: Option<[u64; 2]> = None;
    for k in 0..200 {
        let mut meas = Vec::new();
        for x0 in [-1.0, 1.0] {
            let (x, y) = walker(k, x0);
            meas.push(t.cfg.measurement(x + 0.05 * gauss(&mut rng), y + 0.05 * gauss(&mut rng)));
        }
        let s = t.step(&meas, DT).unwrap();
        if k < 3 {
            continue;
        }
        let confirmed: Vec<_> = s.confirmed_tracks().collect();
        assert_eq!(confirmed.len(), 2, "frame {k}");
        let mut ids = [0; 2];
        for (i, x0) in [-1.0, 1.0].into_iter().enumerate() {
            let (x, y) = walker(k, x0);
            let nearest = confirmed
                .iter()
                .min_by(|a, b| (a.x - x).hypot(a.y - y).total_cmp(&(b.x - x).hypot(b.y - y)))
                .unwrap();
            ids[i] = nearest.id;
        }
        assert_ne!(ids[0], ids[1]);
        assert_eq!(*owner.get_or_insert(ids), ids, "identity swap at frame {k}");
    }
}

/// Confirmed tracks per frame for a two-person group whose cluster often
/// splits in two once it is tracked. With feedback the group track is told
/// it holds two people.
fn split_group_confirmed(feedback: bool, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker::new(TrackerConfig::default()).unwrap();
    let mut counts = Vec::new();
    for k in 0..150 {
        let (x, y) = (-0.5 + 0.01 * k as f64, 3.5);
        // The group walks as one cluster until its track is confirmed.
        let meas: Vec<Measurement> = if k >= 10 && rng.random_bool(0.5) {
            let dx = 0.25 + 0.05 * gauss(&mut rng);
            vec![t.cfg.measurement(x - dx, y), t.cfg.measurement(x + dx, y)]
        } else {
            vec![t.cfg.measurement(x, y)]
        };
        let s = t.step(&meas, DT).unwrap();
        if feedback {
            for id in &s.confirmed {
                if *id == 1 {
                    t.set_count_estimate(*id, 2).unwrap();
                }
            }
        }
        counts.push(s.confirmed_tracks().count());
    }
    counts
}

#[test]
fn count_feedback_stops_spurious_tracks_in_a_split_group() {
    for seed in 0..5 {
        let on = split_group_confirmed(true, seed);
        assert!(on[2..].iter().all(|&c| c == 1), "seed {seed}: {on:?}");
        let off = split_group_confirmed(false, seed);
        assert!(off.iter().any(|&c| c >= 2), "seed {seed}: no spurious track without feedback");
    }
}

#[test]
fn policy_always_ignores_feedback() {
    let cfg = TrackerConfig {
        spawn_policy: SpawnPolicy::Always,
        ..TrackerConfig::default()
    };
    let mut t = Tracker::new(cfg).unwrap();
    let z = [t.cfg.measurement(0.0, 3.0)];
    for _ in 0..3 {
        t.step(&z, DT).unwrap();
    }
    t.set_count_estimate(1, 3).unwrap();
    let s = t.step(&[t.cfg.measurement(-0.2, 3.0), t.cfg.measurement(0.2, 3.0)], DT).unwrap();
    assert_eq!(s.tracks.len(), 2);
}

/// Sum of NIS over 25 short runs of 20 updates from random starts.
fn nis_batch(cfg: &TrackerConfig, rng: &mut ChaCha8Rng) -> (f64, usize) {
    let q = process_noise(DT, cfg.sigma_a).cholesky().unwrap().l();
    let observe = |x: &Vector4<f64>, rng: &mut ChaCha8Rng| {
        let r = x[0].hypot(x[1]) + cfg.sigma_range_m * gauss(rng);
        let az = x[0].atan2(x[1]).to_degrees() + cfg.sigma_az_deg * gauss(rng);
        Measurement::new(r, az, cfg.sigma_range_m, cfg.sigma_az_deg)
    };
    let (mut total, mut n) = (0.0, 0);
    for _ in 0..25 {
        let r0 = rng.random_range(2.5..5.0);
        let a0: f64 = rng.random_range(-30.0f64..30.0).to_radians();
        let mut x = Vector4::new(r0 * a0.sin(), r0 * a0.cos(), cfg.init_sigma_v * gauss(rng), cfg.init_sigma_v * gauss(rng));
        // The filter itself, without the gate, which would drop large innovations.
        let mut e = Estimate::from_measurement(&observe(&x, rng), cfg.init_sigma_v);
        for _ in 0..20 {
            let w = q * Vector4::from_fn(|_, _| gauss(rng));
            x = transition(DT) * x + w;
            let (post, inn) = e.predict(DT, cfg.sigma_a).unwrap().update(&observe(&x, rng)).unwrap();
            e = post;
            total += inn.nis;
            n += 1;
        }
    }
    (total, n)
}

#[test]
fn nis_is_chi_square_under_the_matched_model() {
    let cfg = TrackerConfig {
        sigma_a: 0.5,
        ..TrackerConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let batches: Vec<(f64, usize)> = (0..20).map(|_| nis_batch(&cfg, &mut rng)).collect();
    // A batch sum is chi-square with 2n degrees of freedom; Wilson-Hilferty
    // gives its 5% and 95% points, so about 18 of 20 batches fall inside.
    let inside = batches
        .iter()
        .filter(|&&(total, n)| {
            let k = 2.0 * n as f64;
            let wh = |z: f64| k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
            total > wh(-1.6449) && total < wh(1.6449)
        })
        .count();
    assert!(inside >= 15, "{inside} of 20 batches in the 5-95% band: {batches:?}");
    let mean = batches.iter().map(|b| b.0).sum::<f64>() / batches.iter().map(|b| b.1).sum::<usize>() as f64;
    assert!((mean - 2.0).abs() < 0.1, "mean NIS {mean}");
}
