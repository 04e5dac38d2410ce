//! The eight per-level statistics.

pub const STAT_NAMES: [&str; 8] = ["var", "std", "mean", "median", "rms", "skew", "kurt", "entropy"];

/// Variance, standard deviation, mean, median, RMS, skewness, kurtosis and
/// entropy of `values`. Variance is the population variance and kurtosis is
/// the plain fourth standardized moment. Skewness and kurtosis are 0 for a
/// constant series. Entropy is the Shannon entropy (nats) of `v²/Σv²`, with
/// shares at or below 1e-12 contributing nothing.
pub fn level_stats(values: &[f64]) -> [f64; 8] {
    let n = values.len();
    if n == 0 {
        return [0.0; 8];
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4, mut sq) = (0.0, 0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        sq += v * v;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let std = m2.sqrt();
    let flat = m2 <= 1e-24 * (1.0 + mean * mean);
    let skew = if flat { 0.0 } else { m3 / (m2 * std) };
    let kurt = if flat { 0.0 } else { m4 / (m2 * m2) };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let entropy = if sq > 1e-12 {
        values.iter().map(|v| v * v / sq).filter(|p| *p > 1e-12).map(|p| -p * p.ln()).sum()
    } else {
        0.0
    };
    [m2, std, mean, median, (sq / nf).sqrt(), skew, kurt, entropy]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeros_are_all_zero() {
        assert_eq!(level_stats(&[0.0; 16]), [0.0; 8]);
    }

    #[test]
    fn impulse_has_zero_entropy() {
        let mut v = vec![0.0; 32];
        v[7] = 2.5;
        assert!(level_stats(&v)[7].abs() < 1e-15);
    }

    #[test]
    fn uniform_magnitude_has_log_n_entropy() {
        let s = level_stats(&[0.3; 50]);
        assert!((s[7] - 50f64.ln()).abs() < 1e-12);
        assert_eq!((s[5], s[6]), (0.0, 0.0));
    }

    #[test]
    fn known_moments() {
        let s = level_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert!((s[0] - 1.25).abs() < 1e-12);
        assert!((s[2] - 2.5).abs() < 1e-12 && (s[3] - 2.5).abs() < 1e-12);
        assert!((s[4] - 7.5f64.sqrt()).abs() < 1e-12);
        assert!(s[5].abs() < 1e-12);
        assert!((s[6] - 1.64).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn scale_behaviour(v in prop::collection::vec(0.0..10.0f64, 2..64), k in 0.1..10.0f64) {
            let a = level_stats(&v);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let b = level_stats(&scaled);
            prop_assert!((b[2] - k * a[2]).abs() <= 1e-9 * (1.0 + b[2].abs()));
            prop_assert!((b[7] - a[7]).abs() <= 1e-9);
            prop_assert!(a[6] >= 0.0 && a[7] >= 0.0 && a[7] <= (v.len() as f64).ln() + 1e-9);
        }
    }
}
