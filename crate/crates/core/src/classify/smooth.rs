/// Centered running median. Near the ends the window is truncated to the
/// available samples; an even count takes the lower middle value.
pub fn median_smooth(labels: &[usize], window: usize) -> Vec<usize> {
    assert!(window % 2 == 1, "median window must be odd");
    let h = window / 2;
    let n = labels.len();
    let mut buf = Vec::with_capacity(window);
    (0..n)
        .map(|i| {
            buf.clear();
            buf.extend_from_slice(&labels[i.saturating_sub(h)..(i + h + 1).min(n)]);
            buf.sort_unstable();
            buf[(buf.len() - 1) / 2]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_unchanged() {
        assert_eq!(median_smooth(&[2; 40], 25), vec![2; 40]);
    }

    #[test]
    fn isolated_error_removed_anywhere() {
        for pos in 0..60 {
            let mut s = vec![3; 60];
            s[pos] = 1;
            assert_eq!(median_smooth(&s, 25), vec![3; 60], "error at {pos}");
        }
    }

    #[test]
    fn long_wrong_run_survives_at_center() {
        let mut s = vec![2; 80];
        for v in &mut s[30..43] {
            *v = 3;
        }
        let out = median_smooth(&s, 25);
        assert_eq!(out[36], 3);
        let mut s = vec![2; 80];
        for v in &mut s[30..42] {
            *v = 3;
        }
        assert!(median_smooth(&s, 25).iter().all(|&v| v == 2));
    }

    proptest! {
        #[test]
        fn idempotent_on_constant_majority(base in 1usize..4, errs in proptest::collection::vec((0usize..100, 1usize..4), 0..8)) {
            let mut s = vec![base; 100];
            for (p, v) in errs { s[p] = v; }
            let once = median_smooth(&s, 25);
            prop_assert_eq!(&median_smooth(&once, 25), &once);
        }

        #[test]
        fn output_within_input_range(s in proptest::collection::vec(1usize..4, 1..80)) {
            let out = median_smooth(&s, 25);
            let (lo, hi) = (*s.iter().min().unwrap(), *s.iter().max().unwrap());
            prop_assert!(out.iter().all(|&v| v >= lo && v <= hi));
        }
    }
}
