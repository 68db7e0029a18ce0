use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal as SNormal, StudentsT};
use zhbt_core::stats::special::{chi_square_sf, f_sf, normal_cdf, normal_quantile, normal_sf, student_t_two_sided};
use zhbt_core::stats::{
    benjamini_hochberg, descriptive_stats, dunn_posthoc, friedman, rank_with_ties, shapiro_wilk, spearman,
    Correction,
};

const TAIL_TOL: f64 = 1e-8;

#[test]
fn chi_square_tail_matches_statrs() {
    for df in [1.0, 2.0, 3.0, 4.0, 7.0, 12.0, 30.0, 88.0] {
        let oracle = ChiSquared::new(df).unwrap();
        for x in [0.01, 0.5, 1.0, 2.5, 5.99, 8.0, 15.0, 40.0, 120.0] {
            let (got, want) = (chi_square_sf(x, df), oracle.sf(x));
            assert!((got - want).abs() < TAIL_TOL, "chi2 x={x} df={df}: {got} vs {want}");
        }
    }
}

#[test]
fn normal_tail_matches_statrs() {
    let oracle = SNormal::new(0.0, 1.0).unwrap();
    for i in -80..=80 {
        let z = i as f64 / 10.0;
        assert!((normal_sf(z) - oracle.sf(z)).abs() < TAIL_TOL, "z={z}");
        assert!((normal_cdf(z) - oracle.cdf(z)).abs() < TAIL_TOL, "z={z}");
    }
    for p in [1e-6, 0.001, 0.025, 0.3, 0.5, 0.9, 0.999] {
        assert!((normal_quantile(p) - oracle.inverse_cdf(p)).abs() < 1e-8, "p={p}");
    }
}

#[test]
fn t_tail_matches_statrs() {
    for df in [1.0, 2.0, 5.0, 10.0, 29.0, 87.0, 1333.0] {
        let oracle = StudentsT::new(0.0, 1.0, df).unwrap();
        for t in [0.0, 0.1, 0.7, 1.5, 2.0, 3.3, 6.0, 12.0] {
            let want = 2.0 * oracle.sf(t);
            let got = student_t_two_sided(t, df);
            assert!((got - want).abs() < TAIL_TOL, "t={t} df={df}: {got} vs {want}");
        }
    }
}

#[test]
fn f_tail_matches_statrs() {
    for (d1, d2) in [(1.0, 4.0), (2.0, 9.0), (4.0, 440.0), (3.0, 12.0), (7.0, 7.0)] {
        let oracle = FisherSnedecor::new(d1, d2).unwrap();
        for f in [0.05, 0.4, 1.0, 2.2, 3.2, 6.0, 25.0] {
            let (got, want) = (f_sf(f, d1, d2), oracle.sf(f));
            assert!((got - want).abs() < TAIL_TOL, "F={f} ({d1},{d2}): {got} vs {want}");
        }
    }
}

#[test]
fn shapiro_accepts_normal_samples() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let accepted = (0..100u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
            shapiro_wilk(&sample).unwrap().p_value > 0.05
        })
        .count();
    assert!(accepted >= 90, "accepted {accepted}/100");
}

#[test]
fn shapiro_rejects_exponential_samples() {
    let exp = Exp::new(1.0).unwrap();
    let rejected = (0..100u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let sample: Vec<f64> = (0..50).map(|_| exp.sample(&mut rng)).collect();
            shapiro_wilk(&sample).unwrap().p_value < 0.05
        })
        .count();
    assert!(rejected >= 90, "rejected {rejected}/100");
}

#[test]
fn descriptive_matches_welford_on_1335_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(89);
    let normal = Normal::new(0.55f64, 0.2).unwrap();
    let values: Vec<f64> = (0..1335).map(|_| normal.sample(&mut rng).clamp(0.0, 1.0)).collect();
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for (i, x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let std = (m2 / (values.len() - 1) as f64).sqrt();
    let d = descriptive_stats(&values).unwrap();
    assert_eq!(d.count, 1335);
    assert!((d.mean - mean).abs() < 1e-9);
    assert!((d.std - std).abs() < 1e-9);
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    // h = 1334 * q lands on whole ranks for the quartiles
    assert_eq!(d.q25, sorted[333] + 0.5 * (sorted[334] - sorted[333]));
    assert_eq!(d.median, sorted[667]);
    assert_eq!(d.q75, sorted[1000] + 0.5 * (sorted[1001] - sorted[1000]));
}

/// Exhaustive sign flips for k = 2: z has unit variance and is the
/// standardized win-minus-loss count.
#[test]
fn dunn_two_treatments_is_a_sign_test() {
    let labels = vec!["a".to_string(), "b".to_string()];
    for n in 2..=8usize {
        let diffs: Vec<f64> = (0..n).map(|i| 0.1 + i as f64 * 0.05).collect();
        let mut sum_sq = 0.0;
        for mask in 0u32..(1 << n) {
            let grid: Vec<Vec<f64>> = diffs
                .iter()
                .enumerate()
                .map(|(i, d)| if mask & (1 << i) != 0 { vec![*d, 0.0] } else { vec![0.0, *d] })
                .collect();
            let wins = mask.count_ones() as f64;
            let z = dunn_posthoc(&grid, &labels, Correction::None).unwrap()[0].statistic;
            assert!((z - (2.0 * wins - n as f64) / (n as f64).sqrt()).abs() < 1e-12);
            sum_sq += z * z;
        }
        assert!((sum_sq / (1u32 << n) as f64 - 1.0).abs() < 1e-12, "n={n}");
    }
}

fn grid_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..8, 2usize..6).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec((0u8..6).prop_map(|v| v as f64 / 5.0), k), n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn friedman_invariant_under_monotone_block_transforms(
        grid in grid_strategy(),
        scales in prop::collection::vec(0.1f64..10.0, 8),
    ) {
        let base = friedman(&grid).unwrap();
        let transformed: Vec<Vec<f64>> = grid
            .iter()
            .zip(&scales)
            .map(|(row, s)| row.iter().map(|v| (s * v).exp() - 3.0).collect())
            .collect();
        let t = friedman(&transformed).unwrap();
        prop_assert!((base.statistic - t.statistic).abs() < 1e-9);
        prop_assert!((base.p_value - t.p_value).abs() < 1e-12);
    }

    #[test]
    fn friedman_invariant_under_block_order(grid in grid_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = grid.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = (friedman(&grid).unwrap(), friedman(&shuffled).unwrap());
        prop_assert!((a.statistic - b.statistic).abs() < 1e-9);
        prop_assert!(a.p_value >= 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn dunn_z_negates_when_treatments_swap(grid in grid_strategy()) {
        let k = grid[0].len();
        let labels: Vec<String> = (0..k).map(|i| format!("m{i}")).collect();
        let swapped: Vec<Vec<f64>> = grid.iter().map(|r| { let mut r = r.clone(); r.swap(0, 1); r }).collect();
        let mut swapped_labels = labels.clone();
        swapped_labels.swap(0, 1);
        let a = dunn_posthoc(&grid, &labels, Correction::BenjaminiHochberg).unwrap();
        let b = dunn_posthoc(&swapped, &swapped_labels, Correction::BenjaminiHochberg).unwrap();
        prop_assert!((a[0].statistic + b[0].statistic).abs() < 1e-12);
        prop_assert!((a[0].mean_difference + b[0].mean_difference).abs() < 1e-12);
        for p in &a {
            prop_assert!(p.adjusted_p >= p.raw_p && p.adjusted_p <= 1.0 && p.raw_p >= 0.0);
        }
    }

    #[test]
    fn bh_bounds_and_order(ps in prop::collection::vec(0.0f64..=1.0, 1..30)) {
        let adj = benjamini_hochberg(&ps).unwrap();
        for (p, a) in ps.iter().zip(&adj) {
            prop_assert!(a >= p && *a <= 1.0);
        }
        let mut sorted = ps.clone();
        sorted.sort_by(f64::total_cmp);
        let adj_sorted = benjamini_hochberg(&sorted).unwrap();
        prop_assert!(adj_sorted.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spearman_is_rank_invariant(pairs in prop::collection::vec((0u8..20, 0u8..20), 3..40)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| (p.1 as f64).powi(3)).collect();
        match spearman(&x, &y) {
            Ok(c) => {
                prop_assert!(c.rho.abs() <= 1.0);
                let r = spearman(&rank_with_ties(&x), &rank_with_ties(&y)).unwrap();
                prop_assert!((c.rho - r.rho).abs() < 1e-12);
                prop_assert!((c.p_value - r.p_value).abs() < 1e-12);
            }
            Err(_) => {
                let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
                prop_assert!(constant(&x) || constant(&y));
            }
        }
    }
}
