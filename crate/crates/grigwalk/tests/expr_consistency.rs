//! Structured elements against their flat words.

use grigwalk::core_tree::{iota, parse_word, sigma_chain, Expr, GroupCtx, Letter, Vertex};
use grigwalk::subst_calculus::{
    build_gn, build_gn_word, build_hn, build_hn_word_usual, usual_zeta_word, zeta_chain_word, zeta_word,
};
use grigwalk::{Element, OmegaString};
use proptest::prelude::*;

fn omega_strategy() -> impl Strategy<Value = OmegaString> {
    (prop::collection::vec(0u8..3, 0..3), prop::collection::vec(0u8..3, 1..4))
        .prop_map(|(pre, per)| OmegaString::new(pre, per).unwrap())
}

fn syllables(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(1u8..4, 1..max).prop_map(|gs| {
        gs.into_iter().flat_map(|g| [Letter::A, Letter::from_code(g)]).collect()
    })
}

fn all_vertices(depth: usize) -> Vec<Vec<u8>> {
    Vertex::level(depth).map(|v| v.bits().to_vec()).collect()
}

fn same_action(om: &OmegaString, e: &Expr, level: usize, w: &[Letter], depth: usize) -> bool {
    let ctx = GroupCtx::new(om.clone());
    let flat = Element::from_letters(&ctx, level, w);
    all_vertices(depth)
        .into_iter()
        .all(|v| e.act_vertex(om, &v) == flat.act_vertex(&Vertex::new(v.clone())).bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta_node_acts_like_flat_image(om in omega_strategy(), w in syllables(6), inv in any::<bool>()) {
        let child = Expr::word(1, w.clone());
        let child = if inv { child.inverse(&om).unwrap() } else { child };
        let e = Expr::zeta(&om, 0, child.clone()).unwrap();
        let flat = zeta_word(om.digit(0), child.as_word().unwrap()).unwrap();
        prop_assert!(same_action(&om, &e, 0, &flat, 8));
        prop_assert_eq!(e.to_word(&om, 1 << 20).unwrap(), flat);
    }

    #[test]
    fn zeta_chain_acts_like_flat_chain(om in omega_strategy(), w in syllables(4), j in 1usize..5) {
        let e = Expr::zeta_chain(&om, 0, j, Expr::word(j, w.clone())).unwrap();
        let flat = zeta_chain_word(&om, j, &w).unwrap();
        prop_assert!(same_action(&om, &e, 0, &flat, 9));
        prop_assert_eq!(e.counts().iter().sum::<u128>() * 2, flat.len() as u128);
    }

    #[test]
    fn expr_sections_match_flat_sections(om in omega_strategy(), w in syllables(4), j in 1usize..4, v in prop::collection::vec(0u8..2, 0..4)) {
        let e = Expr::zeta_chain(&om, 0, j, Expr::word(j, w.clone())).unwrap();
        let flat = zeta_chain_word(&om, j, &w).unwrap();
        let ctx = GroupCtx::new(om.clone());
        let fs = Element::from_letters(&ctx, 0, &flat).section(&Vertex::new(v.clone()));
        let es = e.section(&om, &v).unwrap();
        for x in all_vertices(6) {
            prop_assert_eq!(es.act_vertex(&om, &x), fs.act_vertex(&Vertex::new(x.clone())).bits().to_vec());
        }
    }

    #[test]
    fn expr_inverse_inverts(om in omega_strategy(), w in syllables(4), j in 1usize..4) {
        let e = Expr::zeta_chain(&om, 0, j, Expr::word(j, w)).unwrap();
        let p = Expr::product(&om, 0, vec![e.clone(), e.inverse(&om).unwrap()]).unwrap();
        for x in all_vertices(8) {
            prop_assert_eq!(p.act_vertex(&om, &x), x);
        }
    }

    #[test]
    fn rist_matches_sigma_chain(om in omega_strategy(), v in prop::collection::vec(0u8..2, 1..5)) {
        let n = v.len();
        let gamma = om.kills(n - 1);
        let ctx = GroupCtx::new(om.clone());
        let flat = iota(&ctx, 0, gamma, &Vertex::new(v.clone())).unwrap();
        let child = Expr::word(n, vec![gamma, Letter::A, gamma, Letter::A]);
        let e = Expr::rist(&om, 0, child, v.clone()).unwrap();
        prop_assert!(same_action(&om, &e, 0, flat.letters(), n + 4));
        // Acts only below v.
        for x in all_vertices(n + 4) {
            let y = e.act_vertex(&om, &x);
            if x[..n] != v[..] {
                prop_assert_eq!(&y, &x);
            }
        }
        prop_assert_eq!(e.to_word(&om, 1 << 20).unwrap(), flat.letters().to_vec());
    }
}

#[test]
fn gn_structured_matches_flat() {
    for om in ["012", "01", "0012", "2|10", "1|022"] {
        let om: OmegaString = om.parse().unwrap();
        for n in 1..6 {
            let e = build_gn(&om, n).unwrap();
            let w = build_gn_word(&om, n).unwrap();
            assert!(same_action(&om, &e, 0, &w, 10), "g_{n} on {om}");
        }
    }
}

#[test]
fn hn_structured_matches_usual_words() {
    let om = OmegaString::first_group();
    for n in 1..=6 {
        let e = build_hn(&om, n).unwrap();
        let w = build_hn_word_usual(n).unwrap();
        assert!(same_action(&om, &e, 0, &w, 11), "h_{n}");
    }
}

#[test]
fn usual_and_general_notation_agree_at_level_zero() {
    let om = OmegaString::first_group();
    let ctx = GroupCtx::new(om.clone());
    // ζ(ac) = abab in usual notation and g₁ = ζ₀(ab) in general notation.
    let usual = usual_zeta_word(&parse_word("ac").unwrap()).unwrap();
    assert_eq!(grigwalk::core_tree::word_to_string(&usual), "abab");
    let g1 = build_gn_word(&om, 1).unwrap();
    let a = Element::from_letters(&ctx, 0, &usual);
    let b = Element::from_letters(&ctx, 0, &g1);
    assert!(a.equals(&b).unwrap());
}

#[test]
fn sigma_chain_on_empty_path_is_identity_map() {
    let om = OmegaString::first_group();
    let h = parse_word("abab").unwrap();
    assert_eq!(sigma_chain(&om, 0, &[], &h), h);
}
