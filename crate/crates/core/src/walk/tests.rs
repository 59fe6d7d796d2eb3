use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use super::*;
use crate::real::{Frequencies, DEFAULT_PRECISION};

fn sqrt2() -> WalkConfig {
    WalkConfig::uniform(Frequencies::parse("sqrt:2", DEFAULT_PRECISION).unwrap())
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Law of `S_n` from step-count vectors `(a_j^+, a_j^-)`, weighted by
/// multinomials: independent of the convolution in `evolve`.
fn composition_oracle(theta: &[f64], n: u32) -> BTreeMap<Vec<i64>, f64> {
    let m = theta.len();
    let mut out = BTreeMap::new();
    let mut counts = vec![0u32; 2 * m];
    let lnfact: Vec<f64> = (0..=n).map(|k| libm::lgamma(k as f64 + 1.0)).collect();
    fn rec(
        pos: usize,
        left: u32,
        counts: &mut Vec<u32>,
        theta: &[f64],
        lnfact: &[f64],
        n: u32,
        out: &mut BTreeMap<Vec<i64>, f64>,
    ) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            let mut ln = lnfact[n as usize];
            for (i, &c) in counts.iter().enumerate() {
                ln += c as f64 * (theta[i / 2] / 2.0).ln() - lnfact[c as usize];
            }
            let q: Vec<i64> = (0..theta.len())
                .map(|j| counts[2 * j] as i64 - counts[2 * j + 1] as i64)
                .collect();
            *out.entry(q).or_insert(0.0) += ln.exp();
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, theta, lnfact, n, out);
        }
    }
    rec(0, n, &mut counts, theta, &lnfact, n, &mut out);
    out
}

#[test]
fn evolution_matches_composition_oracle() {
    for dim in 1..=3 {
        let cfg = WalkConfig::lattice(dim);
        let dists = evolve(&cfg, 10, 0.0).unwrap();
        for (n, dist) in dists.iter().enumerate() {
            let oracle = composition_oracle(cfg.weights(), n as u32);
            let got = dist.to_sorted_vec();
            assert_eq!(got.len(), oracle.len(), "dim={dim} n={n}");
            for (q, p) in &got {
                assert!((p - oracle[q]).abs() <= 1e-14, "dim={dim} n={n} q={q:?}");
            }
            assert_eq!(dist.lost_mass(), 0.0);
        }
    }
}

#[test]
fn nonuniform_weights_match_oracle() {
    let f = Frequencies::parse("sqrt:3", DEFAULT_PRECISION).unwrap();
    let cfg = WalkConfig::with_weights(f, vec![0.3, 0.7]).is_err();
    assert!(cfg, "weights above 1/2 are rejected");
    let f = Frequencies::parse("sqrt:3 sqrt:5", DEFAULT_PRECISION).unwrap();
    let cfg = WalkConfig::with_weights(f, vec![0.2, 0.3, 0.5]).unwrap();
    let dist = &evolve(&cfg, 9, 0.0).unwrap()[9];
    let oracle = composition_oracle(cfg.weights(), 9);
    for (q, p) in dist.to_sorted_vec() {
        assert!((p - oracle[&q]).abs() <= 1e-14);
        assert!((p - point_probability(&cfg, 9, &q)).abs() <= 1e-13);
    }
}

#[test]
fn two_step_law() {
    let dist = &evolve(&WalkConfig::lattice(2), 2, 0.0).unwrap()[2];
    assert_eq!(dist.get(&[0, 0]), 0.25);
    for q in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
        assert_eq!(dist.get(&q), 0.125);
    }
    for q in [[2, 0], [-2, 0], [0, 2], [0, -2]] {
        assert_eq!(dist.get(&q), 0.0625);
    }
    let d0 = &evolve(&WalkConfig::lattice(2), 0, 0.0).unwrap()[0];
    assert_eq!(d0.get(&[0, 0]), 1.0);
    assert_eq!(d0.lost_mass(), 0.0);
}

#[test]
fn closed_form_points() {
    let cfg = WalkConfig::lattice(2);
    assert_eq!(point_probability_exact(2, 5, &[3, -2]), ratio(10, 1024));
    assert_eq!(point_probability_exact(2, 7, &[3, -2]), ratio(245, 16384));
    assert_eq!(point_probability(&cfg, 5, &[3, -2]), 10.0 / 1024.0);
    assert!((point_probability(&cfg, 7, &[3, -2]) - 245.0 / 16384.0).abs() < 1e-17);
    assert_eq!(point_probability(&cfg, 4, &[1, 0]), 0.0);
    assert_eq!(point_probability(&cfg, 3, &[3, 2]), 0.0);
    assert_eq!(path_count(2, 5, &[3, -2]), 10u32.into());
}

#[test]
fn point_probability_agrees_with_evolution() {
    for (spec, n) in [("sqrt:2", 40u32), ("sqrt:2 sqrt:3", 18), ("sqrt:2; sqrt:3", 16)] {
        let cfg = WalkConfig::uniform(Frequencies::parse(spec, DEFAULT_PRECISION).unwrap());
        let dist = &evolve(&cfg, n, 0.0).unwrap()[n as usize];
        let mut worst: f64 = 0.0;
        dist.for_each_point(|q, p| worst = worst.max((p - point_probability(&cfg, n as u64, q)).abs()));
        assert!(worst <= 1e-13, "{spec}: {worst}");
        let exact = point_probability_exact(cfg.dim(), n as u64, &vec![2; cfg.dim()]);
        let p = dist.get(&vec![2; cfg.dim()]);
        assert!((p - exact.to_f64().unwrap()).abs() <= 1e-15);
    }
}

#[test]
fn point_probabilities_sum_to_one_at_large_n() {
    let cfg = WalkConfig::lattice(2);
    let n = 301u64;
    let mut total = 0.0;
    for a in -(n as i64)..=(n as i64) {
        for b in -(n as i64)..=(n as i64) {
            if (a + b).rem_euclid(2) == 1 && a.abs() + b.abs() <= n as i64 && a.abs() < 120 && b.abs() < 120 {
                total += point_probability(&cfg, n, &[a, b]);
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12, "{total}");
}

#[test]
fn ball_probabilities() {
    let cfg = sqrt2();
    let dists = evolve(&cfg, 2, 0.0).unwrap();
    assert_eq!(p_n_k(&cfg, &dists[1], 0.3, &[0], &[0]).unwrap(), Interval::point(0.0));
    assert_eq!(p_n_k(&cfg, &dists[2], 0.5, &[0], &[0]).unwrap().lo, 0.25);
    assert_eq!(p_n_k(&cfg, &dists[2], 0.3, &[], &[0]).unwrap().lo, 0.25);
    assert_eq!(pbar_n_k(&cfg, &dists[1], 0.42, &[0]).unwrap().lo, 0.5);
    assert_eq!(pbar_n_k(&cfg, &dists[0], 0.42, &[0]).unwrap().lo, 0.0);
    assert!(p_n_k(&cfg, &dists[1], 0.3, &[1], &[0]).is_err());
}

#[test]
fn torus_ball_covering_the_cell() {
    let cfg = sqrt2();
    let dists = evolve(&cfg, 6, 0.0).unwrap();
    for dist in &dists[1..] {
        let all = pbar_n_k(&cfg, dist, 0.5, &[0]).unwrap().lo;
        let mut nonzero = 0.0;
        let proj = Projector::new(&cfg);
        dist.for_each_point(|q, p| {
            let pr = proj.project(q, None);
            if proj.support_mask(q, &pr) != 0 {
                nonzero += p;
            }
        });
        assert!((all - nonzero).abs() < 1e-15);
    }
}

#[test]
fn j_beta_hand_value() {
    let cfg = sqrt2();
    let j = j_beta(&cfg, 3.0, 0.2, 1, 5, TailMode::Crude).unwrap();
    let want = 2.0 * 10.0 / (1024.0 * 5f64.powf(1.5));
    assert!((j.partial - want).abs() < 1e-15, "{} vs {want}", j.partial);
    assert_eq!(j.n_truncation, 5);
    let tiny = j_beta(&cfg, 3.0, 1e-6, 1, 9, TailMode::Crude).unwrap();
    assert_eq!(tiny.partial, 0.0);
    assert!(tiny.tail() > 0.0);
    assert!((SeriesWeights::Power { beta: 3.0 }.crude_tail(10_000) - 0.02).abs() < 1e-15);
    assert!(j_beta(&cfg, 2.0, 0.2, 1, 5, TailMode::Crude).is_err());
}

#[test]
fn i_beta_hand_value() {
    let cfg = sqrt2();
    let i = i_beta(&cfg, 3.0, 0.42, 1, 1, TailMode::Crude).unwrap();
    assert_eq!(i.partial, 0.5);
    let small = i_beta(&cfg, 3.0, 0.05, 1, 4, TailMode::Crude).unwrap();
    let big = i_beta(&cfg, 3.0, 0.3, 1, 4, TailMode::Crude).unwrap();
    assert!(big.partial >= small.partial);
}

#[test]
fn dense_and_targeted_partial_sums_agree() {
    for spec in ["sqrt:2", "sqrt:3 sqrt:5"] {
        let cfg = WalkConfig::uniform(Frequencies::parse(spec, DEFAULT_PRECISION).unwrap());
        let n_max = 15;
        for eps in [0.05, 0.2] {
            let dense = j_beta(&cfg, 3.0, eps, 1, n_max, TailMode::Crude).unwrap();
            let targets = TargetSet::strip(&cfg, eps, n_max as u64, 1, false).unwrap();
            let targeted = j_beta_targeted(&cfg, 3.0, &targets, 1, n_max).unwrap();
            assert!(
                (dense.partial - targeted).abs() <= 1e-14 * dense.partial.max(1e-300),
                "{spec} eps={eps}: {} vs {targeted}",
                dense.partial
            );
        }
    }
}

#[test]
fn target_sets_are_verified() {
    let cfg = sqrt2();
    assert!(TargetSet::from_points(&cfg, vec![vec![3, -2], vec![-3, 2]], 0.2).is_ok());
    assert!(TargetSet::from_points(&cfg, vec![vec![0, 0]], 0.2).is_err());
    assert!(TargetSet::from_points(&cfg, vec![vec![1, -1]], 0.2).is_err());
    let s = TargetSet::strip(&cfg, 0.2, 5, 1, false).unwrap();
    assert!(s.points.contains(&vec![3, -2]) && s.points.contains(&vec![-3, 2]));
}

#[test]
fn local_clt_approaches_exact() {
    let cfg = WalkConfig::lattice(2);
    for q in [[0i64, 0], [3, -1], [10, 6]] {
        let n = 4000u64;
        let exact = point_probability(&cfg, n, &q);
        let approx = local_clt(&cfg, n, &q);
        assert!((approx / exact - 1.0).abs() < 2e-3, "{q:?}: {approx} vs {exact}");
    }
    assert_eq!(local_clt(&cfg, 5, &[0, 0]), 0.0);
}

#[test]
fn asymptotic_tail_tracks_longer_partial_sums() {
    let cfg = sqrt2();
    let eps = 0.1;
    let short = j_beta(&cfg, 3.0, eps, 1, 400, TailMode::Asymptotic).unwrap();
    let long = j_beta(&cfg, 3.0, eps, 1, 1600, TailMode::Crude).unwrap();
    let extra = long.partial - short.partial;
    let est = short.asymptotic_tail.unwrap();
    assert!(est > 0.0 && extra > 0.0);
    assert!(est >= extra, "{est} vs {extra}");
    let rational = WalkConfig::uniform(Frequencies::parse("dec:1.5", DEFAULT_PRECISION).unwrap());
    assert!(asymptotic_tail(&rational, SeriesWeights::Power { beta: 3.0 }, eps, 10, false).is_err());
}

#[test]
fn odd_steps_never_return_for_free_frequencies() {
    let cfg = WalkConfig::uniform(Frequencies::parse("sqrt:2 sqrt:3", DEFAULT_PRECISION).unwrap());
    let proj = Projector::new(&cfg);
    for (n, dist) in evolve(&cfg, 11, 0.0)
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(n, _)| n % 2 == 1)
    {
        dist.for_each_point(|q, _| {
            let p = proj.project(q, Some(&[0]));
            assert_ne!(proj.support_mask(q, &p), 0, "n={n} q={q:?}");
        });
    }
}

#[test]
fn envelope_checks() {
    let fit = envelope_fit(&WalkConfig::lattice(1), 40, 0.0).unwrap();
    assert_eq!(fit.violations, 0);
    // n = 2, M = 1: 1/2 at 0 and 1/4 at +-2 lie under the envelope.
    let env = |n: f64, q: f64| fit.c_upper * n.powf(-0.5) * (-fit.c_exp * q * q / n).exp();
    assert!(0.5 <= env(2.0, 0.0) * (1.0 + 1e-12));
    assert!(0.25 <= env(2.0, 2.0) * (1.0 + 1e-12));
    let g = gauss_sum_check(1, 1.0, 0, &[100, 1000, 10_000]).unwrap();
    assert!((g.ratios.last().unwrap().1 - g.limit).abs() < 1e-3);
    let b = binomial_envelope_check(0.5, &[16, 64, 256, 1024], &[0.0, 0.05, 0.1]).unwrap();
    assert_eq!(b.violations, 0);
}

#[test]
fn torus_returns_scale_like_n_to_minus_d_over_2() {
    // Exact torus returns need the irrational coordinate of every axis to vanish.
    let cfg = WalkConfig::uniform(Frequencies::parse("sqrt:2; sqrt:3", DEFAULT_PRECISION).unwrap());
    let mut ev = Evolution::new(&cfg, 1e-16).unwrap();
    let mut ratios = Vec::new();
    for n in 1..=64u32 {
        ev.step().unwrap();
        if n >= 16 {
            let p = pbar_n_k(&cfg, ev.current(), 0.1, &[]).unwrap().lo;
            ratios.push(p * n as f64);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 1.5, "ratio range [{lo}, {hi}]");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_parity_and_pruning(dim in 1usize..=3, n in 0u32..14, prune_exp in 8i32..18) {
        let cfg = WalkConfig::lattice(dim);
        let prune = 10f64.powi(-prune_exp);
        let dists = evolve(&cfg, n, prune).unwrap();
        let mut last_lost = 0.0;
        for (k, dist) in dists.iter().enumerate() {
            prop_assert!((dist.total_mass() + dist.lost_mass() - 1.0).abs() <= 1e-14);
            prop_assert!(dist.lost_mass() >= last_lost);
            last_lost = dist.lost_mass();
            dist.for_each_point(|q, p| {
                let l1: i64 = q.iter().map(|x| x.abs()).sum();
                assert_eq!(l1 as usize % 2, k % 2);
                assert!(p > prune);
            });
        }
    }

    #[test]
    fn point_probability_matches_dense(n in 1u32..30, a in -6i64..=6, b in -6i64..=6) {
        let cfg = WalkConfig::lattice(2);
        let dist = &evolve(&cfg, n, 0.0).unwrap()[n as usize];
        prop_assert!((dist.get(&[a, b]) - point_probability(&cfg, n as u64, &[a, b])).abs() <= 1e-13);
    }

    #[test]
    fn truncation_is_sound(eps in 0.01f64..0.45, n_max in 4u32..60) {
        let cfg = sqrt2();
        let half = j_beta(&cfg, 3.0, eps, 1, n_max / 2, TailMode::Crude).unwrap();
        let full = j_beta(&cfg, 3.0, eps, 1, n_max, TailMode::Crude).unwrap();
        prop_assert!(full.partial >= half.partial);
        prop_assert!(full.lo() >= half.lo() - 1e-15);
        prop_assert!(full.hi() <= half.hi() + 1e-15);
    }

    #[test]
    fn pruning_only_loses_tracked_mass(eps in 0.02f64..0.45, prune_exp in 6i32..12) {
        let cfg = sqrt2();
        let exact = j_beta(&cfg, 3.0, eps, 1, 60, TailMode::Crude).unwrap();
        let mut req = SeriesRequest {
            weights: SeriesWeights::Power { beta: 3.0 },
            statistic: Statistic::Real,
            eps: vec![eps],
            n_eps: 1,
            n_max: 60,
            mode: TailMode::Crude,
            prune: 10f64.powi(-prune_exp),
        };
        let pruned = recurrence_series(&cfg, &req).unwrap().remove(0);
        prop_assert!(pruned.partial <= exact.partial + 1e-15);
        prop_assert!(pruned.hi() >= exact.hi() - 1e-15);
        req.prune = 0.0;
        let again = recurrence_series(&cfg, &req).unwrap().remove(0);
        prop_assert!((again.partial - exact.partial).abs() <= 1e-15);
    }

    #[test]
    fn torus_statistic_grows_with_radius(e1 in 0.01f64..0.45, e2 in 0.01f64..0.45) {
        let cfg = sqrt2();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = i_beta(&cfg, 3.0, lo, 1, 30, TailMode::Crude).unwrap();
        let b = i_beta(&cfg, 3.0, hi, 1, 30, TailMode::Crude).unwrap();
        prop_assert!(b.partial >= a.partial);
    }
}
