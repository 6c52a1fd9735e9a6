use alpha_walk_verify::oracle as common;

use alpha_walk_core::dioph::{dioph_sum, dioph_sum_blocks, dioph_sum_prefix, growth_fit, GrowthRegime};
use alpha_walk_core::{Alpha, Error};
use num_traits::ToPrimitive;

fn alpha(s: &str) -> Alpha {
    Alpha::new(s.parse().unwrap()).unwrap()
}

fn oracle_sum(dist: impl Fn(u64) -> f64, range: std::ops::RangeInclusive<u64>, b: f64) -> f64 {
    range.map(|h| 1.0 / (h as f64 * dist(h).powf(b))).sum()
}

#[test]
fn first_term_golden() {
    let v = dioph_sum(&alpha("golden"), 1, 1.0, 1e-12).unwrap();
    assert!((v.value - 1.0 / common::golden_dist(1)).abs() < 1e-12);
    assert!((v.value - 2.6180339887).abs() < 1e-10);
    assert!(v.rel_err <= 1e-12);
    assert!(matches!(dioph_sum(&alpha("golden"), 0, 1.0, 1e-12), Err(Error::Precondition(_))));
}

#[test]
fn doubling_increment_matches_oracle() {
    let a = alpha("golden");
    for big_h in [64u64, 1 << 12] {
        let full = dioph_sum(&a, big_h, 1.0, 1e-12).unwrap();
        let half = dioph_sum(&a, big_h / 2, 1.0, 1e-12).unwrap();
        let inc = oracle_sum(common::golden_dist, big_h / 2 + 1..=big_h, 1.0);
        assert!(((full.value - half.value) - inc).abs() <= 1e-10 * full.value);
    }
    let s = alpha("sqrt2");
    let v = dioph_sum(&s, 5000, 0.5, 1e-12).unwrap();
    assert!((v.value - oracle_sum(common::sqrt2_dist, 1..=5000, 0.5)).abs() <= 1e-10 * v.value);
}

#[test]
fn sums_increase_with_h() {
    let hs: Vec<u64> = (0..12).map(|j| 1 << j).collect();
    let v = dioph_sum_prefix(&alpha("sqrt2"), &hs, 0.5, 1e-12, 2).unwrap();
    assert!(v.windows(2).all(|w| w[1].value > w[0].value));
}

#[test]
fn class_a_terms() {
    for (name, d) in [("golden", common::golden_dist as fn(u64) -> f64), ("sqrt2", common::sqrt2_dist)] {
        let a = alpha(name);
        for b in [0.5, 1.0] {
            let dec = dioph_sum_blocks(&a, 8, b, 1e-12).unwrap();
            for blk in &dec.blocks {
                let members: Vec<u64> = (1..=blk.a_k).map(|j| j * blk.q_k).collect();
                assert_eq!(blk.members_a, members);
                let dq = d(blk.q_k);
                let want: f64 = (1..=blk.a_k).map(|j| 1.0 / ((j * blk.q_k) as f64 * (j as f64 * dq).powf(b))).sum();
                assert!((blk.sum_a - want).abs() <= 1e-10 * want, "{name} k={}", blk.k);
                for &h in &members {
                    assert!((d(h) - (h / blk.q_k) as f64 * dq).abs() <= 1e-12 * dq);
                }
            }
        }
    }
}

#[test]
fn class_b_membership_and_partition() {
    let a = alpha("sqrt2");
    let dec = dioph_sum_blocks(&a, 9, 0.5, 1e-12).unwrap();
    for blk in &dec.blocks {
        let q_prev = a.q(blk.k - 1).unwrap().to_u64().unwrap();
        assert!(blk.members_b.iter().all(|h| h % blk.q_k == q_prev % blk.q_k));
        let brute = (blk.q_k..blk.q_next).filter(|h| h % blk.q_k == q_prev % blk.q_k).count() as u64;
        assert_eq!(blk.count_b, brute);
        assert_eq!(blk.count_a + blk.count_b + blk.count_c, blk.q_next - blk.q_k);
        let parts = blk.sum_a + blk.sum_b + blk.sum_c;
        assert!((parts - blk.total).abs() <= 4.0 * blk.rel_err * blk.total + 1e-14 * blk.total);
    }
}

#[test]
fn head_plus_blocks_is_the_full_sum() {
    for name in ["golden", "sqrt2", "e"] {
        let a = alpha(name);
        let dec = dioph_sum_blocks(&a, 10, 0.5, 1e-12).unwrap();
        let full = dioph_sum(&a, dec.q_n - 1, 0.5, 1e-12).unwrap();
        assert!((dec.total() - full.value).abs() <= 1e-10 * full.value, "{name}");
    }
}

#[test]
fn golden_class_c_stays_bounded() {
    for b in [0.5, 1.0] {
        let dec = dioph_sum_blocks(&alpha("golden"), 20, b, 1e-12).unwrap();
        // envelope ln^{s-1} q_k, since ln a_k vanishes for golden
        let tail: Vec<f64> = dec
            .blocks
            .iter()
            .filter(|blk| blk.k >= 8)
            .map(|blk| blk.sum_c / (blk.q_k as f64).ln().powi(dec.s as i32 - 1))
            .collect();
        let max = tail.iter().cloned().fold(f64::MIN, f64::max);
        let min = tail.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 3.0, "b = {b}: {min} .. {max}");
    }
}

#[test]
fn growth_needs_six_levels() {
    assert!(matches!(growth_fit(&alpha("golden"), 0.5, 6..=10, 1e-10, 1), Err(Error::Insufficient(_))));
    let g = growth_fit(&alpha("golden"), 0.5, 6..=11, 1e-10, 1).unwrap();
    assert_eq!(g.regime, GrowthRegime::Logarithmic);
    assert_eq!(g.levels.len(), 6);
}
