//! Random-walk experiments: trajectories with induced Schreier positions,
//! ⟨b⟩-coset stabilization, Monte-Carlo Green function, ball growth and tail
//! post-processing.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core_tree::{act_letter, push_reduced, word_to_string, Digits, GroupCtx, Letter};
use crate::error::{Error, Result};
use crate::grigorchuk::{GermValue, OmegaString};
use crate::measures::{MixtureSampler, Sample};
use crate::par;
use crate::schreier::{gray_index, gray_index_u128, OrbitPoint};

/// Default cap on the radius of ball enumeration.
pub const BALL_RADIUS_CAP: usize = 10;

/// Options controlling what a trajectory records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkOptions {
    /// Record the Gray index after every step.
    pub record_positions: bool,
    /// Record the full Klein germ value after every step.
    pub record_germs: bool,
}

/// One trajectory of the walk W_t = X₁⋯X_t started at the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalkTrajectory {
    pub steps: usize,
    pub seed: u64,
    /// Gray indices of o·W_t for t = 0..steps, when recorded.
    pub positions: Vec<BigUint>,
    /// Φ_{W_t}(o) for t = 0..steps, when recorded.
    pub germs: Vec<GermValue>,
    /// Times t ≥ 1 at which the ⟨b⟩-coset of the germ at o changed.
    pub flips: Vec<usize>,
    /// Germ value Φ_{W_T}(o).
    pub final_germ: GermValue,
    pub final_point: OrbitPoint,
    /// Number of visits to o at times 0..steps.
    pub visits_origin: u64,
    /// Set when the position exceeded the ray capacity and the run stopped.
    pub truncated: bool,
}

/// Incremental walk state on the orbit of o.
pub struct Walker<'a> {
    sampler: &'a MixtureSampler,
    om: &'a OmegaString,
    pub x: Digits,
    pub germ: u8,
    pub t: usize,
    rng: ChaCha8Rng,
}

impl<'a> Walker<'a> {
    pub fn new(sampler: &'a MixtureSampler, seed: u64) -> Self {
        Walker {
            sampler,
            om: &sampler.omega,
            x: Digits::ray(&[]),
            germ: 0,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// One step; returns the sample, the germ of X_{t+1} at o·W_t and whether
    /// the coset flipped.
    pub fn step(&mut self) -> Result<(Sample, u8, bool)> {
        let s = self.sampler.sample(&mut self.rng)?;
        let g = s.act(self.om, &mut self.x);
        self.germ ^= g;
        self.t += 1;
        Ok((s, g, g >> 1 == 1))
    }

    pub fn at_origin(&self) -> bool {
        self.x.bits().is_empty()
    }

    pub fn overflowed(&self) -> bool {
        self.x.overflowed()
    }

    pub fn point(&self) -> OrbitPoint {
        OrbitPoint::from_prefix(self.x.bits())
    }
}

/// Simulate T steps.
pub fn run_walk(sampler: &MixtureSampler, steps: usize, seed: u64, opts: WalkOptions) -> Result<WalkTrajectory> {
    if steps == 0 {
        return Err(Error::Precondition("T must be at least 1".into()));
    }
    let mut w = Walker::new(sampler, seed);
    let mut positions = Vec::new();
    let mut germs = Vec::new();
    if opts.record_positions {
        positions.push(BigUint::default());
    }
    if opts.record_germs {
        germs.push(GermValue::Id);
    }
    let mut flips = Vec::new();
    let mut visits = 1u64;
    let mut truncated = false;
    for t in 1..=steps {
        let (_, _, flip) = w.step()?;
        if w.overflowed() {
            truncated = true;
            break;
        }
        if flip {
            flips.push(t);
        }
        if w.at_origin() {
            visits += 1;
        }
        if opts.record_positions {
            positions.push(gray_index(&w.point()));
        }
        if opts.record_germs {
            germs.push(GermValue::from_code(w.germ));
        }
    }
    Ok(WalkTrajectory {
        steps: w.t,
        seed,
        positions,
        germs,
        flips,
        final_germ: GermValue::from_code(w.germ),
        final_point: w.point(),
        visits_origin: visits,
        truncated,
    })
}

/// Fraction of trajectories still flipping after each checkpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizationStats {
    pub trials: usize,
    pub steps: usize,
    pub checkpoints: Vec<usize>,
    /// Fraction of trajectories with a flip at a time > t, per checkpoint.
    pub fraction_flipping_after: Vec<f64>,
    /// Histogram of flip times in dyadic bins [2^i, 2^{i+1}).
    pub flip_histogram: Vec<u64>,
    pub mean_flips: f64,
    pub truncated: usize,
}

/// Run independent trajectories and summarize their flip times.
pub fn stabilization_stats(
    sampler: &MixtureSampler,
    steps: usize,
    trials: usize,
    base_seed: u64,
    checkpoints: &[usize],
) -> Result<StabilizationStats> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let runs = run_trials(sampler, steps, trials, base_seed, WalkOptions::default())?;
    Ok(summarize_flips(&runs, steps, checkpoints))
}

/// Independent trajectories with seeds `task_seed(base_seed, i)`.
pub fn run_trials(
    sampler: &MixtureSampler,
    steps: usize,
    trials: usize,
    base_seed: u64,
    opts: WalkOptions,
) -> Result<Vec<WalkTrajectory>> {
    let runs = par::map_range(trials, |i| run_walk(sampler, steps, par::task_seed(base_seed, i), opts));
    runs.into_iter().collect()
}

/// Flip statistics of a set of trajectories of horizon `steps`.
pub fn summarize_flips(runs: &[WalkTrajectory], steps: usize, checkpoints: &[usize]) -> StabilizationStats {
    let trials = runs.len().max(1);
    let mut frac = vec![0.0; checkpoints.len()];
    let mut hist = vec![0u64; usize::BITS as usize];
    let mut total_flips = 0usize;
    let mut truncated = 0;
    for r in runs {
        let last = r.flips.last().copied().unwrap_or(0);
        for (f, &t) in frac.iter_mut().zip(checkpoints) {
            if last > t {
                *f += 1.0;
            }
        }
        for &t in &r.flips {
            hist[(usize::BITS - 1 - t.leading_zeros()) as usize] += 1;
        }
        total_flips += r.flips.len();
        truncated += r.truncated as usize;
    }
    for f in &mut frac {
        *f /= trials as f64;
    }
    while hist.len() > 1 && hist.last() == Some(&0) {
        hist.pop();
    }
    StabilizationStats {
        trials: runs.len(),
        steps,
        checkpoints: checkpoints.to_vec(),
        fraction_flipping_after: frac,
        flip_histogram: hist,
        mean_flips: total_flips as f64 / trials as f64,
        truncated,
    }
}

/// Monte-Carlo estimate of the Green function G(o, x) truncated at T.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub target: OrbitPoint,
    pub visits: u64,
    pub trials: usize,
    pub horizon: usize,
    pub estimate: f64,
    pub std_err: f64,
}

/// Average number of visits to each target at times 0..T.
pub fn green_mc(
    sampler: &MixtureSampler,
    targets: &[OrbitPoint],
    steps: usize,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<GreenEstimate>> {
    if trials == 0 || steps == 0 {
        return Err(Error::Precondition("T and trials must be at least 1".into()));
    }
    let target_bits: Vec<Vec<u8>> = targets.iter().map(|p| p.prefix()).collect();
    let per_trial = par::map_range(trials, |i| -> Result<Vec<u64>> {
        let mut w = Walker::new(sampler, par::task_seed(base_seed, i));
        let mut counts = vec![0u64; targets.len()];
        let tally = |x: &Digits, counts: &mut Vec<u64>| {
            for (c, b) in counts.iter_mut().zip(&target_bits) {
                if x.bits() == &b[..] {
                    *c += 1;
                }
            }
        };
        tally(&w.x, &mut counts);
        for _ in 0..steps {
            w.step()?;
            if w.overflowed() {
                break;
            }
            tally(&w.x, &mut counts);
        }
        Ok(counts)
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(targets
        .iter()
        .enumerate()
        .map(|(k, target)| {
            let xs: Vec<f64> = per_trial.iter().map(|c| c[k] as f64).collect();
            let (mean, se) = mean_se(&xs);
            GreenEstimate {
                target: target.clone(),
                visits: per_trial.iter().map(|c| c[k]).sum(),
                trials,
                horizon: steps,
                estimate: mean,
                std_err: se,
            }
        })
        .collect())
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Partial sums of Σ_x G(o,x) μ({g : (g,x) ∉ H}) by Gray radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedGreenReport {
    /// (radius bound 2^i − 1, partial sum over Gray indices ≤ bound).
    pub partial_sums: Vec<(u128, f64)>,
    pub total: f64,
    /// Mass beyond the radius cap.
    pub beyond_cap: f64,
    pub flattening: bool,
    pub trials: usize,
    pub horizon: usize,
}

/// The sum equals the expected number of coset flips; each flip is
/// attributed to the Gray index of the position it happened at.
pub fn weighted_green_sum(
    sampler: &MixtureSampler,
    radius_cap: u128,
    steps: usize,
    trials: usize,
    base_seed: u64,
) -> Result<WeightedGreenReport> {
    let bins = 129usize;
    let per_trial = par::map_range(trials, |i| -> Result<Vec<u64>> {
        let mut w = Walker::new(sampler, par::task_seed(base_seed, i));
        let mut counts = vec![0u64; bins + 1];
        for _ in 0..steps {
            let before = gray_index_u128(&w.point());
            let (_, _, flip) = w.step()?;
            if w.overflowed() {
                break;
            }
            if flip {
                match before {
                    Some(g) if g <= radius_cap => {
                        let b = (u128::BITS - g.leading_zeros()) as usize;
                        counts[b.min(bins - 1)] += 1;
                    }
                    _ => counts[bins] += 1,
                }
            }
        }
        Ok(counts)
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let mut sums = vec![0.0; bins + 1];
    for c in &per_trial {
        for (s, v) in sums.iter_mut().zip(c) {
            *s += *v as f64;
        }
    }
    for s in &mut sums {
        *s /= trials as f64;
    }
    let mut partial = Vec::new();
    let mut acc = 0.0;
    for (b, s) in sums.iter().enumerate().take(bins) {
        acc += s;
        let bound = if b == 0 { 0 } else { (1u128 << b.min(127)) - 1 };
        if bound > radius_cap {
            partial.push((radius_cap, acc));
            break;
        }
        partial.push((bound, acc));
    }
    let total = acc;
    let k = partial.len();
    let flattening = k >= 4 && {
        let late = partial[k - 1].1 - partial[k - 1 - k / 4].1;
        total == 0.0 || late <= 0.05 * total.max(1e-12)
    };
    Ok(WeightedGreenReport { partial_sums: partial, total, beyond_cap: sums[bins], flattening, trials, horizon: steps })
}

/// Ball sizes v(n) of the Cayley graph with generators {a,b,c,d}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthTable {
    pub omega: OmegaString,
    pub sizes: Vec<u64>,
    /// log log v(n) / log n for n ≥ 2.
    pub slopes: Vec<f64>,
    /// A shortest word for each element of the largest sphere (first few).
    pub sample_words: Vec<String>,
}

/// Level used for action signatures during ball enumeration.
const SIGNATURE_DEPTH: usize = 10;

/// BFS over words; elements are deduplicated by their action on level 10
/// and then, within a bucket, by exact identity testing.
pub fn ball_growth(om: &OmegaString, radius: usize) -> Result<GrowthTable> {
    if radius > BALL_RADIUS_CAP {
        return Err(Error::BoundExceeded(BALL_RADIUS_CAP));
    }
    let ctx = GroupCtx::new(om.clone());
    let n_vert = 1usize << SIGNATURE_DEPTH;
    // Action of each generator on level-10 vertices (index with digit 0 as
    // the most significant bit).
    let gens = [Letter::A, Letter::B, Letter::C, Letter::D];
    let gen_perm: Vec<Vec<u16>> = gens
        .iter()
        .map(|&l| {
            (0..n_vert)
                .map(|i| {
                    let bits: Vec<u8> = (0..SIGNATURE_DEPTH).map(|k| ((i >> (SIGNATURE_DEPTH - 1 - k)) & 1) as u8).collect();
                    let mut x = Digits::vertex(&bits);
                    act_letter(om, 0, l, &mut x, 0);
                    x.bits().iter().fold(0usize, |acc, b| (acc << 1) | *b as usize) as u16
                })
                .collect()
        })
        .collect();
    let identity_perm: Vec<u16> = (0..n_vert as u16).collect();
    let mut buckets: HashMap<Vec<u16>, Vec<Vec<Letter>>> = HashMap::new();
    buckets.insert(identity_perm.clone(), vec![vec![]]);
    let mut sphere: Vec<(Vec<Letter>, Vec<u16>)> = vec![(vec![], identity_perm)];
    let mut sizes = vec![1u64];
    let mut total = 1u64;
    for _ in 1..=radius {
        let mut next = Vec::new();
        for (w, perm) in &sphere {
            for (gi, &l) in gens.iter().enumerate() {
                let mut w2 = w.clone();
                push_reduced(&mut w2, l);
                if w2.len() <= w.len() {
                    continue;
                }
                // Right action: x·(w l) = (x·w)·l.
                let p2: Vec<u16> = perm.iter().map(|&y| gen_perm[gi][y as usize]).collect();
                let bucket = buckets.entry(p2.clone()).or_default();
                let mut seen = false;
                for u in bucket.iter() {
                    let mut q = w2.clone();
                    for &x in u.iter().rev() {
                        push_reduced(&mut q, x);
                    }
                    if crate::core_tree::Element::from_letters(&ctx, 0, &q).is_identity()? {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    bucket.push(w2.clone());
                    next.push((w2, p2));
                }
            }
        }
        total += next.len() as u64;
        sizes.push(total);
        sphere = next;
    }
    let slopes = sizes
        .iter()
        .enumerate()
        .skip(2)
        .map(|(n, v)| (*v as f64).ln().ln() / (n as f64).ln())
        .collect();
    let sample_words = sphere.iter().take(8).map(|(w, _)| word_to_string(w)).collect();
    Ok(GrowthTable { omega: om.clone(), sizes, slopes, sample_words })
}

/// Empirical tail and the quantities ϱ_n, φ(ϱ_n), R_n = nφ(ϱ_n).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    pub samples: usize,
    pub radii: Vec<f64>,
    /// Empirical μ(length ≥ r) for each radius.
    pub tail: Vec<f64>,
    /// (n, ϱ_n, φ(ϱ_n), R_n).
    pub moment_grid: Vec<(usize, f64, f64, f64)>,
}

/// Tail of the construction length under the sampler.
pub fn tail_report(sampler: &MixtureSampler, trials: usize, radii: &[f64], ns: &[usize], seed: u64) -> Result<TailReport> {
    let lens = par::map_range(trials, |i| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(par::task_seed(seed, i));
        Ok(sampler.sample(&mut rng)?.construction_len() as f64)
    });
    let mut lens = lens.into_iter().collect::<Result<Vec<_>>>()?;
    lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = lens.len() as f64;
    let frac_ge = |r: f64| (lens.len() - lens.partition_point(|l| *l < r)) as f64 / m;
    let tail = radii.iter().map(|&r| frac_ge(r)).collect();
    let moment_grid = ns
        .iter()
        .map(|&n| {
            // ϱ_n: least integer radius with tail below 1/n; the tail only
            // drops just above a sampled length.
            let thr = 1.0 / n as f64;
            let rho = std::iter::once(0.0)
                .chain(lens.iter().map(|l| l + 1.0))
                .find(|&r| frac_ge(r) < thr)
                .unwrap_or(0.0);
            let phi = lens.iter().filter(|l| **l <= rho).sum::<f64>() / m;
            (n, rho, phi, n as f64 * phi)
        })
        .collect();
    Ok(TailReport { samples: trials, radii: radii.to_vec(), tail, moment_grid })
}
