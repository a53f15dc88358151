mod common;

use grigwalk::core_tree::{Expr, GroupCtx, Letter};
use grigwalk::grigorchuk::{germ_at, germ_at_expr};
use grigwalk::measures::*;
use grigwalk::walk_lab::*;
use grigwalk::{GermValue, OmegaString, OrbitPoint};
use num_bigint::BigUint;

fn first() -> OmegaString {
    OmegaString::first_group()
}

fn half_us_eta0(n_max: usize) -> MixtureSampler {
    build_eta0(&first(), 1.0, n_max).unwrap().with_generators().unwrap()
}

fn small_mu_beta() -> MixtureSampler {
    build_mu_beta(&first(), MuBetaParams { d: 3, beta: 0.9, a: 3, n_max: 6 }).unwrap()
}

#[test]
fn identity_walk_stays_at_the_origin() {
    let id = build_atom(&first(), Expr::identity(0)).unwrap();
    let opts = WalkOptions { record_positions: true, record_germs: true };
    let t = run_walk(&id, 100, 1, opts).unwrap();
    assert!(t.flips.is_empty());
    assert_eq!(t.positions, vec![BigUint::default(); 101]);
    assert_eq!(t.visits_origin, 101);
    let g = green_mc(&id, &[OrbitPoint::origin()], 100, 4, 0).unwrap();
    assert_eq!(g[0].estimate, 101.0);
    assert_eq!(g[0].std_err, 0.0);
    let st = stabilization_stats(&id, 50, 8, 0, &[1, 10]).unwrap();
    assert_eq!(st.fraction_flipping_after, vec![0.0, 0.0]);
    assert_eq!(st.mean_flips, 0.0);
    let tail = tail_report(&id, 100, &[1.0, 10.0], &[2, 10], 0).unwrap();
    assert_eq!(tail.tail, vec![0.0, 0.0]);
    assert!(tail.moment_grid.iter().all(|(_, _, phi, r)| *phi == 0.0 && *r == 0.0));
    assert!(run_walk(&id, 0, 1, opts).is_err());
}

#[test]
fn b_walk_alternates_without_coset_flips() {
    let b = build_atom(&first(), Expr::letter(0, Letter::B)).unwrap();
    let t = run_walk(&b, 20, 1, WalkOptions { record_positions: false, record_germs: true }).unwrap();
    assert!(t.flips.is_empty());
    for (i, g) in t.germs.iter().enumerate() {
        assert_eq!(*g, if i % 2 == 0 { GermValue::Id } else { GermValue::B });
    }
}

#[test]
fn walks_are_reproducible() {
    let mu = half_us_eta0(8);
    let opts = WalkOptions { record_positions: true, record_germs: true };
    let a = run_walk(&mu, 500, 42, opts).unwrap();
    let b = run_walk(&mu, 500, 42, opts).unwrap();
    assert_eq!(a.positions, b.positions);
    assert_eq!(a.germs, b.germs);
    assert_eq!(a.flips, b.flips);
    let c = run_walk(&mu, 500, 43, opts).unwrap();
    assert_ne!(a.positions, c.positions);
    let s1 = stabilization_stats(&mu, 300, 16, 7, &[10, 100]).unwrap();
    let s2 = stabilization_stats(&mu, 300, 16, 7, &[10, 100]).unwrap();
    assert_eq!(s1.fraction_flipping_after, s2.fraction_flipping_after);
    assert_eq!(s1.flip_histogram, s2.flip_histogram);
}

#[test]
fn flips_are_consistent_with_the_germ_sequence() {
    let mu = small_mu_beta();
    let t = run_walk(&mu, 2000, 5, WalkOptions { record_positions: false, record_germs: true }).unwrap();
    let coset = |g: &GermValue| g.code() >> 1;
    let derived: Vec<usize> = (1..t.germs.len()).filter(|&i| coset(&t.germs[i]) != coset(&t.germs[i - 1])).collect();
    assert_eq!(derived, t.flips);
    assert_eq!(t.final_germ, *t.germs.last().unwrap());
}

/// Replays a trajectory and returns the factors of W_T.
fn replay(sampler: &MixtureSampler, steps: usize, seed: u64) -> (Walker<'_>, Vec<Expr>) {
    let mut w = Walker::new(sampler, seed);
    let mut factors = Vec::new();
    for _ in 0..steps {
        let (s, _, _) = w.step().unwrap();
        factors.extend(s.factors);
    }
    (w, factors)
}

#[test]
fn incremental_germ_equals_scratch_germ_flat() {
    // ½(u_S + η₀) on the first group, recomputed from the flat product word.
    let mu = half_us_eta0(6);
    let om = first();
    let ctx = GroupCtx::new(om.clone());
    for seed in 0..50 {
        let (w, factors) = replay(&mu, 200, seed);
        let e = Expr::product(&om, 0, factors).unwrap();
        let g = grigwalk::Element::from_letters(&ctx, 0, &e.to_word(&om, 1 << 26).unwrap());
        assert_eq!(germ_at(&g, &OrbitPoint::origin()).unwrap(), GermValue::from_code(w.germ), "seed {seed}");
        assert_eq!(OrbitPoint::origin().act(&g).unwrap(), w.point());
    }
}

#[test]
fn incremental_germ_equals_scratch_germ_structured() {
    let mu = small_mu_beta();
    let om = mu.omega.clone();
    for seed in 0..50 {
        let (w, factors) = replay(&mu, 200, seed);
        let e = Expr::product(&om, 0, factors).unwrap();
        assert_eq!(germ_at_expr(&e, &om, &OrbitPoint::origin()).unwrap(), GermValue::from_code(w.germ), "seed {seed}");
        assert_eq!(OrbitPoint::origin().act_expr(&e, &om).unwrap(), w.point());
    }
}

#[test]
fn eta2_walk_never_flips() {
    let eta2 = build_eta2(1.0, 8).unwrap();
    let st = stabilization_stats(&eta2, 2000, 16, 1, &[1]).unwrap();
    assert_eq!(st.mean_flips, 0.0);
    let wg = weighted_green_sum(&eta2, 1 << 20, 2000, 8, 1).unwrap();
    assert_eq!(wg.total, 0.0);
    assert_eq!(wg.beyond_cap, 0.0);
}

#[test]
fn us_walk_keeps_flipping() {
    let us = build_us(&first()).unwrap();
    let st = stabilization_stats(&us, 2000, 32, 3, &[100, 1000]).unwrap();
    assert!(st.fraction_flipping_after[0] > 0.5);
    let wg = weighted_green_sum(&us, 1 << 20, 2000, 8, 3).unwrap();
    assert!(wg.total > 10.0);
}

#[test]
fn green_of_the_origin_is_at_least_one() {
    let mu = half_us_eta0(10);
    let g = green_mc(&mu, &[OrbitPoint::origin(), "0".parse().unwrap()], 2000, 64, 11).unwrap();
    assert!(g[0].estimate >= 1.0);
    assert!(g[0].std_err >= 0.0);
    assert!(g[1].estimate >= 0.0);
    let uf1 = build_uf1(&first()).unwrap();
    let short = green_mc(&uf1, &[OrbitPoint::origin()], 1000, 64, 1).unwrap()[0].estimate;
    let long = green_mc(&uf1, &[OrbitPoint::origin()], 4000, 64, 1).unwrap()[0].estimate;
    assert!(long > 1.5 * short);
}

#[test]
fn ball_growth_matches_permutation_oracle() {
    let om = first();
    let t = ball_growth(&om, 6).unwrap();
    assert_eq!(t.sizes[0], 1);
    assert_eq!(t.sizes[1], 5);
    assert!(t.sizes.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(t.sizes, common::ball_sizes_by_perm(&[0, 1, 2], 6, 12));
    assert!(ball_growth(&om, 11).is_err());
    let t2 = ball_growth(&"01".parse().unwrap(), 5).unwrap();
    assert_eq!(t2.sizes, common::ball_sizes_by_perm(&[0, 1], 5, 12));
}

#[test]
fn tail_is_nonincreasing() {
    let mu = small_mu_beta();
    let radii: Vec<f64> = (0..20).map(|i| 2f64.powi(i)).collect();
    let r = tail_report(&mu, 2000, &radii, &[2, 10, 100], 4).unwrap();
    assert!(r.tail.windows(2).all(|w| w[0] >= w[1]));
    assert!(r.tail[0] <= 1.0 && r.tail[0] > 0.5);
    let rhos: Vec<f64> = r.moment_grid.iter().map(|m| m.1).collect();
    assert!(rhos.windows(2).all(|w| w[0] <= w[1]));
}
