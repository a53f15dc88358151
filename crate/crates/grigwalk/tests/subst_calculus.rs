mod common;

use grigwalk::core_tree::{parse_word, word_to_string, Expr, Letter};
use grigwalk::subst_calculus::*;
use grigwalk::OmegaString;
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn substitution_tables() {
    assert_eq!(substitution_matrix(0), [[2, 0, 1], [0, 2, 1], [0, 0, 1]]);
    assert_eq!(substitution_matrix(1), [[2, 1, 0], [0, 1, 0], [0, 1, 2]]);
    assert_eq!(substitution_matrix(2), [[1, 0, 0], [1, 2, 0], [1, 0, 2]]);
    let ad = SyllableWord::parse("ad").unwrap();
    assert_eq!(word_to_string(&apply_zeta(0, &ad).to_letters()), "abadac");
    assert_eq!(mat_vec(&substitution_matrix(0), &[0, 0, 1]), [1, 1, 1]);
    assert_eq!(matrix_a(), [[0, 1, 0], [1, 1, 2], [1, 0, 0]]);
    let m = matrix_m();
    assert_eq!(mat_mul(&mat_mul(&m, &m), &matrix_a()), [[6, 5, 4], [2, 5, 4], [2, 3, 4]]);
    assert!(SyllableWord::parse("ba").is_err());
}

#[test]
fn usual_zeta_matches_string_oracle() {
    let mut w = "ac".to_string();
    let mut lw = parse_word("ac").unwrap();
    for _ in 0..8 {
        w = common::usual_zeta(&w);
        lw = usual_zeta_word(&lw).unwrap();
        assert_eq!(word_to_string(&lw), w);
    }
    // Inverse syllable words map to reversed images.
    let inv = usual_zeta_word(&parse_word("caba").unwrap()).unwrap();
    assert_eq!(word_to_string(&inv), "babacadaba");
}

#[test]
fn sigma_images() {
    assert_eq!(word_to_string(&apply_sigma(&parse_word("ab").unwrap())), "acad");
    assert_eq!(word_to_string(&apply_sigma(&parse_word("ad").unwrap())), "acac");
    // Letterwise image of abab; differs from (ac)⁴.
    assert_eq!(word_to_string(&apply_sigma(&parse_word("abab").unwrap())), "acadacad");
}

#[test]
fn zeta_power_length_is_exact() {
    let mut w = "ac".to_string();
    for n in 0..=12 {
        assert_eq!(BigUint::from(w.len()), zeta_power_len(n), "n = {n}");
        w = common::usual_zeta(&w);
    }
}

#[test]
fn ln_is_below_three_lambda0_pow_n() {
    let om = OmegaString::first_group();
    let l0 = lambda0();
    assert_eq!(length_ln(&om, 0), BigUint::from(3u32));
    for n in 0..=30 {
        let ln: f64 = length_ln(&om, n).to_string().parse().unwrap();
        assert!(ln <= 3.0 * l0.powi(n as i32) * (1.0 + 1e-12), "n = {n}");
    }
}

#[test]
fn exponents() {
    let r = growth_exponent(&OmegaString::first_group()).unwrap();
    assert!((r.alpha - 0.7674).abs() < 1e-4, "{}", r.alpha);
    assert_eq!(r.q, 3);
    let m = matrix_m();
    let l1 = spectral_radius(&mat_mul(&mat_mul(&m, &m), &matrix_a())).unwrap();
    assert!((l1 - 11.3809).abs() < 1e-3, "{l1}");
    // Independent root of X³ − X² − 2X − 4 by plain bisection.
    let f = |x: f64| x * x * x - x * x - 2.0 * x - 4.0;
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    assert!((lambda0() - lo).abs() < 1e-12);
    assert!((r.lambda - lo.powi(3)).abs() < 1e-9);
    assert!((r.alpha - 2f64.ln() / lo.ln()).abs() < 1e-9);
    assert!(growth_exponent(&"1|012".parse().unwrap()).unwrap().preperiod_ignored);
    assert!(spectral_radius(&substitution_matrix(0)).is_err());
}

#[test]
fn zeta_portraits_follow_the_parity_rule() {
    for w in ["ac", "ad", "abab"] {
        let mut z = w.to_string();
        for n in 1..=6 {
            z = common::usual_zeta(&z);
            for x in common::level(n) {
                let odd = (x.iter().map(|b| *b as usize).sum::<usize>() + n) % 2 == 1;
                let sec = if odd { format!("a{w}a") } else { w.to_string() };
                for y in common::level(5) {
                    let mut v = x.clone();
                    v.extend(&y);
                    let img = common::act_word(&[0, 1, 2], 0, &z, &v);
                    assert_eq!(&img[..n], &x[..], "{w} n={n}");
                    assert_eq!(img[n..], common::act_word(&[0, 1, 2], 0, &sec, &y)[..], "{w} n={n} x={x:?}");
                }
            }
        }
    }
}

#[test]
fn gn_are_cube_independent() {
    for om in ["012", "201", "0112"] {
        let om: OmegaString = om.parse().unwrap();
        for n in 1..=8 {
            let seq: Vec<Expr> = (1..=n).map(|k| build_gn(&om, k).unwrap()).collect();
            let r = check_cube_independence(&om, &seq, &vec![1; n], &cube_vertex_set(n + 2, 0));
            assert!(r.independent, "n = {n} on {om}: {:?}", r.witness);
            assert_eq!(r.vertices_checked, 1 << (n + 2));
        }
    }
}

fn hn_prefix(n: usize) -> Vec<Expr> {
    let om = OmegaString::first_group();
    (1..=n).map(|k| build_hn(&om, k).unwrap()).collect()
}

/// Digits 4, 7, 10, … equal 1 and every block x_{3i+1}x_{3i+2}x_{3i+3} has
/// odd digit sum.
fn odd_triples(v: &[u8]) -> bool {
    v.chunks(3).enumerate().all(|(i, t)| (i == 0 || t[0] == 1) && (t.len() < 3 || t.iter().sum::<u8>() % 2 == 1))
}

#[test]
fn hn_are_cube_independent_on_odd_triples() {
    let om = OmegaString::first_group();
    for n in 1..=6 {
        let depth = hn_stabilized_level(n) + 2;
        let vs: Vec<Vec<u8>> = cube_vertex_set(depth, 0).into_iter().filter(|v| odd_triples(v)).collect();
        let r = check_cube_independence(&om, &hn_prefix(n), &vec![1; n], &vs);
        assert!(r.independent, "n = {n}: {:?}", r.witness);
    }
}

#[test]
fn hn_collide_at_points_of_the_b_germ_orbit() {
    // 01^∞ = 1^∞·a and 101^∞ = 1^∞·baba lie in the orbit of 1^∞ under H^b,
    // yet h_3 fixes both.
    let om = OmegaString::first_group();
    let seq = hn_prefix(3);
    for head in [vec![0u8], vec![1, 0]] {
        let x: Vec<u8> = head.into_iter().chain(std::iter::repeat(1)).take(12).collect();
        assert_eq!(seq[2].act_vertex(&om, &x), x);
        assert!(!check_cube_independence(&om, &seq, &[1, 1, 1], &[x]).independent);
    }
}

#[test]
fn hn_stabilize_their_level() {
    let om = OmegaString::first_group();
    for n in 1..=6 {
        let h = build_hn(&om, n).unwrap();
        let l = hn_stabilized_level(n);
        for x in common::level(l) {
            assert_eq!(h.act_vertex(&om, &x), x);
        }
        let moved = common::level(l + 1).into_iter().any(|x| h.act_vertex(&om, &x) != x);
        assert!(moved, "h_{n} is not the identity on level {}", l + 1);
    }
}

#[test]
fn planted_involution_pair_is_rejected() {
    let om = OmegaString::first_group();
    let a = Expr::letter(0, Letter::A);
    let r = check_cube_independence(&om, &[a.clone(), a.clone()], &[1, 1], &cube_vertex_set(3, 0));
    assert!(!r.independent);
    let w = r.witness.unwrap();
    assert_ne!(w.eps1, w.eps2);
    let img = |e: &[usize]| e.iter().filter(|k| **k == 1).fold(w.x.clone(), |x, _| a.act_vertex(&om, &x));
    assert_eq!(img(&w.eps1), img(&w.eps2));
    assert_eq!(img(&[1, 1]), img(&[0, 0]));
}

#[test]
fn quasi_cubic_sets() {
    let om = OmegaString::first_group();
    let one = quasi_cubic_set(&om, &[Expr::parse(0, "abab").unwrap()], 1).unwrap();
    assert_eq!(one.len(), 2);
    assert!(one[0].1.is_trivial_word());
    let seq: Vec<Expr> = (1..=3).map(|k| build_gn(&om, k).unwrap()).collect();
    let f3 = quasi_cubic_set(&om, &seq, 3).unwrap();
    assert_eq!(f3.len(), 8);
    let total: u128 = seq.iter().map(|g| g.construction_len()).sum();
    assert!(f3.iter().all(|(_, g)| g.construction_len() <= total));
    let x = vec![1u8; 5];
    let imgs: std::collections::HashSet<Vec<u8>> = f3.iter().map(|(_, g)| g.act_vertex(&om, &x)).collect();
    assert_eq!(imgs.len(), 8);
    let a = Expr::letter(0, Letter::A);
    assert!(quasi_cubic_set(&om, &[a.clone(), a], 2).is_err());
}

fn omega_strategy() -> impl Strategy<Value = OmegaString> {
    prop::collection::vec(0u8..3, 1..5).prop_map(|p| OmegaString::periodic(&p).unwrap())
}

proptest! {
    #[test]
    fn counts_are_a_homomorphism(d in 0u8..3, w in prop::collection::vec(1u8..4, 0..30)) {
        let sw = SyllableWord(w.into_iter().map(Letter::from_code).collect());
        prop_assert_eq!(apply_zeta(d, &sw).counts(), mat_vec(&substitution_matrix(d), &sw.counts()));
    }

    #[test]
    fn ln_at_least_doubles(om in omega_strategy(), n in 0usize..20) {
        prop_assert!(length_ln(&om, n + 1) >= length_ln(&om, n) * 2u32);
    }

    #[test]
    fn gn_word_length_matches_ln_scale(om in omega_strategy(), n in 1usize..8) {
        let w = build_gn_word(&om, n).unwrap();
        prop_assert!(BigUint::from(w.len()) <= length_ln(&om, n) * 2u32);
    }
}
