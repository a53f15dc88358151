use anyhow::Result;
use clap::ValueEnum;
use grigwalk::core_tree::{Expr, Letter};
use grigwalk::measures::{build_vk, check_fr_d, ckv_portrait_check};
use grigwalk::schreier::{bfs_ball, bfs_distance, from_gray_u128, gray_index_u128};
use grigwalk::subst_calculus::{build_gn, build_hn, check_cube_independence, cube_vertex_set, hn_stabilized_level};
use grigwalk::{Element, GroupCtx, OmegaString};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Relations,
    GrayVsBfs,
    CubeIndependence,
    CkvPortrait,
}

impl Suite {
    pub fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

fn row(check: impl Into<String>, pass: bool, detail: impl Into<String>) -> Row {
    Row { check: check.into(), pass, detail: detail.into() }
}

pub fn run(om: &OmegaString, cfg: &RunConfig, suite: Suite) -> Result<Vec<Row>> {
    match suite {
        Suite::Relations => relations(om),
        Suite::GrayVsBfs => gray_vs_bfs(om, cfg.radius),
        Suite::CubeIndependence => cube(om),
        Suite::CkvPortrait => ckv(om, cfg.d),
    }
}

fn relations(om: &OmegaString) -> Result<Vec<Row>> {
    let ctx = GroupCtx::new(om.clone());
    let el = |w: &str| Element::parse(&ctx, 0, w);
    let mut rows = Vec::new();
    for w in ["aa", "bb", "cc", "dd"] {
        rows.push(row(format!("{w} = id"), el(w)?.is_identity()?, ""));
    }
    for (l, r) in [("bc", "d"), ("cd", "b"), ("bd", "c")] {
        rows.push(row(format!("{l} = {r}"), el(l)?.equals(&el(r)?)?, ""));
    }
    if *om == OmegaString::first_group() {
        rows.push(row("(ad)^4 = id", el("adadadad")?.is_identity()?, ""));
        let ord = el("ab")?.order(64)?;
        rows.push(row("order(ab) = 16", ord == Some(16), format!("{ord:?}")));
    }
    Ok(rows)
}

fn gray_vs_bfs(om: &OmegaString, radius: usize) -> Result<Vec<Row>> {
    let r = 1usize << radius.min(16);
    let ball = bfs_ball(om, r);
    let bad = ball.iter().filter(|(x, d)| gray_index_u128(x) != Some(**d as u128)).count();
    let mut rows = vec![row(
        format!("ball of radius {r} is the Gray segment"),
        bad == 0 && ball.len() == r + 1,
        format!("{} points, {bad} mismatches", ball.len()),
    )];
    let pairs = [(0usize, r), (r / 3, r / 2), (r / 2, r / 7), (1, r - 1)];
    let mut bad = 0;
    for &(i, j) in &pairs {
        let d = bfs_distance(om, &from_gray_u128(i as u128), &from_gray_u128(j as u128), 2 * r);
        bad += (d != Some(i.abs_diff(j))) as usize;
    }
    rows.push(row("bfs distance = |Gray difference|", bad == 0, format!("{} pairs", pairs.len())));
    Ok(rows)
}

fn cube(om: &OmegaString) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let seq = (1..=8).map(|k| build_gn(om, k)).collect::<grigwalk::Result<Vec<_>>>()?;
    for n in 1..=8 {
        let r = check_cube_independence(om, &seq[..n], &vec![1; n], &cube_vertex_set(n + 2, 0));
        rows.push(row(format!("g_1..g_{n} at depth {}", n + 2), r.independent, format!("{:?}", r.witness)));
    }
    let a = Expr::letter(0, Letter::A);
    let r = check_cube_independence(om, &[a.clone(), a], &[1, 1], &cube_vertex_set(3, 0));
    rows.push(row("planted (a,a) rejected", !r.independent, format!("{:?}", r.witness)));
    if *om == OmegaString::first_group() {
        let hs = (1..=6).map(|k| build_hn(om, k)).collect::<grigwalk::Result<Vec<_>>>()?;
        let odd = |v: &[u8]| {
            v.chunks(3).enumerate().all(|(i, t)| (i == 0 || t[0] == 1) && (t.len() < 3 || t.iter().sum::<u8>() % 2 == 1))
        };
        for n in 1..=6 {
            let depth = hn_stabilized_level(n) + 2;
            let vs: Vec<Vec<u8>> = cube_vertex_set(depth, 0).into_iter().filter(|v| odd(v)).collect();
            let r = check_cube_independence(om, &hs[..n], &vec![1; n], &vs);
            rows.push(row(format!("h_1..h_{n} on odd-triple rays, depth {depth}"), r.independent, format!("{:?}", r.witness)));
        }
    }
    Ok(rows)
}

fn ckv(om: &OmegaString, d: usize) -> Result<Vec<Row>> {
    let fr = match check_fr_d(om, d) {
        Ok(fr) => fr,
        Err(w) => return Ok(vec![row("Fr(D)", false, format!("fails at block {}", w.block))]),
    };
    let ctx = GroupCtx::new(fr.omega.clone());
    let mut rows = Vec::new();
    let k = 2 * d;
    for j in 0..d {
        let vs = build_vk(&fr, j, k)?;
        let mut bad = Vec::new();
        for iv in &vs {
            if let Some(at) = ckv_portrait_check(&ctx, j, &iv.v)? {
                bad.push((iv.v.clone(), at));
            }
        }
        rows.push(row(format!("c_k^v portraits, j = {j}, k = {k}"), bad.is_empty(), format!("{} vertices, {bad:?}", vs.len())));
    }
    Ok(rows)
}
