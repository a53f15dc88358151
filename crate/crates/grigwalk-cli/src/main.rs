//! `grigwalk` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/parse/runtime error, 2 a check failed
//! (Fr(D) witness in `analyze-omega`, any failing row in `verify`).

mod config;
mod verify;

use std::fs::OpenOptions;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use grigwalk::measures::{build_eta0, build_mu_beta, build_us, check_fr_d, MixtureSampler, MuBetaParams};
use grigwalk::schreier::{export_graph, gray_index};
use grigwalk::subst_calculus::growth_exponent;
use grigwalk::walk_lab::{ball_growth, green_mc, run_trials, summarize_flips, WalkOptions};
use grigwalk::{OmegaString, OrbitPoint};
use serde_json::json;

use config::{ParamFlags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "grigwalk", version, about = "Experiments on Grigorchuk groups G_ω and their random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: ParamFlags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check Fr(D) and report the growth exponent of ω.
    AnalyzeOmega,
    /// Run a canned random-walk experiment.
    Simulate {
        #[arg(value_enum)]
        preset: Option<Preset>,
    },
    /// Run an invariant suite and print a pass/fail table.
    Verify {
        #[arg(value_enum)]
        suite: Option<verify::Suite>,
    },
    /// Schreier graph of Gray indices ≤ radius in DOT.
    ExportGraph,
    /// Ball sizes of the Cayley graph up to radius.
    Growth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Eta0Transience,
    MuBetaStabilization,
    UsContrast,
}

impl Preset {
    fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|e| anyhow::anyhow!(e))
}

/// Writes artifacts into the output directory, appending.
struct Sink(Option<std::path::PathBuf>);

impl Sink {
    fn new(cfg: &RunConfig) -> Result<Self> {
        if let Some(dir) = &cfg.out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("config.json");
            std::fs::write(&path, serde_json::to_string_pretty(cfg)? + "\n")?;
        }
        Ok(Sink(cfg.out.clone()))
    }

    fn append(&self, name: &str, text: &str) -> Result<()> {
        if let Some(dir) = &self.0 {
            let path = dir.join(name);
            let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
            f.write_all(text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn omega(cfg: &RunConfig) -> Result<OmegaString> {
    cfg.omega.parse().with_context(|| format!("invalid omega {:?}", cfg.omega))
}

fn summary(cfg: &RunConfig, body: serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string(&json!({ "config": cfg, "summary": body }))?);
    Ok(())
}

fn analyze_omega(cfg: &RunConfig) -> Result<u8> {
    let om = omega(cfg)?;
    let sink = Sink::new(cfg)?;
    let exponent = match growth_exponent(&om) {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let (fr, code) = match check_fr_d(&om, cfg.d) {
        Ok(r) => (json!({ "pass": true, "report": r, "i_set": r.i_set(4 * cfg.d) }), 0),
        Err(w) => (json!({ "pass": false, "witness": w }), 2),
    };
    let body = json!({ "fr": fr, "exponent": exponent });
    sink.append("analysis.json", &(serde_json::to_string(&body)? + "\n"))?;
    summary(cfg, body)?;
    Ok(code)
}

fn sampler(cfg: &RunConfig, preset: Preset) -> Result<MixtureSampler> {
    let om = omega(cfg)?;
    Ok(match preset {
        Preset::Eta0Transience => build_eta0(&om, cfg.eps, cfg.nmax)?,
        Preset::UsContrast => build_us(&om)?,
        Preset::MuBetaStabilization => {
            let p = MuBetaParams { d: cfg.d, beta: cfg.beta, a: cfg.a, n_max: cfg.nmax };
            if cfg.mode == "faithful" && !p.theorem_faithful() {
                bail!("parameters are not theorem-faithful; use --mode desk or raise A");
            }
            build_mu_beta(&om, p)?
        }
    })
}

fn simulate(cfg: &RunConfig) -> Result<u8> {
    let preset: Preset = parse_enum(cfg.target.as_deref().context("simulate needs a preset")?)?;
    if cfg.steps == 0 || cfg.trials == 0 {
        bail!("steps and trials must be at least 1");
    }
    let mu = sampler(cfg, preset)?;
    let sink = Sink::new(cfg)?;
    let runs = run_trials(&mu, cfg.steps, cfg.trials, cfg.seed, WalkOptions::default())?;
    let checkpoints: Vec<usize> =
        std::iter::successors(Some(10usize), |t| t.checked_mul(10)).take_while(|t| *t < cfg.steps).collect();
    let stats = summarize_flips(&runs, cfg.steps, &checkpoints);
    let mut lines = String::new();
    for r in &runs {
        let row = json!({
            "config": cfg,
            "seed": r.seed,
            "steps": r.steps,
            "flips": r.flips.len(),
            "last_flip": r.flips.last(),
            "final_germ": r.final_germ.to_char().to_string(),
            "final_gray_index": gray_index(&r.final_point).to_string(),
            "visits_origin": r.visits_origin,
            "truncated": r.truncated,
        });
        lines += &(serde_json::to_string(&row)? + "\n");
    }
    sink.append("trajectories.jsonl", &lines)?;
    let mut csv = String::from("t,fraction_flipping_after\n");
    for (t, f) in checkpoints.iter().zip(&stats.fraction_flipping_after) {
        csv += &format!("{t},{f}\n");
    }
    sink.append("stabilization.csv", &csv)?;
    let mut csv = String::from("bin_lo,bin_hi,flips\n");
    for (i, c) in stats.flip_histogram.iter().enumerate() {
        csv += &format!("{},{},{c}\n", 1u128 << i, (1u128 << (i + 1)) - 1);
    }
    sink.append("histogram.csv", &csv)?;
    let origin = [OrbitPoint::origin()];
    let horizons = [(cfg.steps / 2).max(1), cfg.steps];
    let mut csv = String::from("horizon,target,estimate,std_err\n");
    let mut green = Vec::new();
    for h in horizons {
        let g = green_mc(&mu, &origin, h, cfg.trials, cfg.seed)?.remove(0);
        csv += &format!("{h},{},{},{}\n", g.target, g.estimate, g.std_err);
        green.push(json!({ "horizon": h, "estimate": g.estimate, "std_err": g.std_err }));
    }
    sink.append("green.csv", &csv)?;
    summary(
        cfg,
        json!({
            "preset": preset.name(),
            "sampler": mu.spec,
            "checkpoints": checkpoints,
            "fraction_flipping_after": stats.fraction_flipping_after,
            "mean_flips": stats.mean_flips,
            "truncated": stats.truncated,
            "green_origin": green,
            "horizon_bias": "estimates are truncated at the horizon; compare the two horizons",
        }),
    )?;
    Ok(0)
}

fn verify_cmd(cfg: &RunConfig) -> Result<u8> {
    let suite: verify::Suite = parse_enum(cfg.target.as_deref().context("verify needs a suite")?)?;
    let om = omega(cfg)?;
    let sink = Sink::new(cfg)?;
    let rows = verify::run(&om, cfg, suite)?;
    let mut csv = String::from("suite,check,pass,detail\n");
    for r in &rows {
        println!("{:<4}  {:<40}  {}", if r.pass { "PASS" } else { "FAIL" }, r.check, r.detail);
        csv += &format!("{},{},{},\"{}\"\n", suite.name(), r.check, r.pass, r.detail.replace('"', "'"));
    }
    sink.append("verify.csv", &csv)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    summary(cfg, json!({ "suite": suite.name(), "checks": rows.len(), "failed": failed }))?;
    Ok(if failed == 0 { 0 } else { 2 })
}

fn export(cfg: &RunConfig) -> Result<u8> {
    let om = omega(cfg)?;
    let dot = export_graph(&om, cfg.radius as u64);
    if cfg.out.is_some() {
        Sink::new(cfg)?.append("schreier.dot", &dot)?;
        summary(cfg, json!({ "vertices": cfg.radius + 1, "file": "schreier.dot" }))?;
    } else {
        print!("{dot}");
    }
    Ok(0)
}

fn growth(cfg: &RunConfig) -> Result<u8> {
    let om = omega(cfg)?;
    let sink = Sink::new(cfg)?;
    let t = ball_growth(&om, cfg.radius)?;
    let mut csv = String::from("n,v,slope\n");
    for (n, v) in t.sizes.iter().enumerate() {
        let slope = if n >= 2 { t.slopes.get(n - 2).map(|s| s.to_string()).unwrap_or_default() } else { String::new() };
        csv += &format!("{n},{v},{slope}\n");
    }
    sink.append("growth.csv", &csv)?;
    summary(cfg, json!({ "sizes": t.sizes, "slopes": t.slopes }))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let (name, target) = match &cli.command {
        Command::AnalyzeOmega => ("analyze-omega", None),
        Command::Simulate { preset } => ("simulate", preset.map(|p| p.name())),
        Command::Verify { suite } => ("verify", suite.map(|s| s.name())),
        Command::ExportGraph => ("export-graph", None),
        Command::Growth => ("growth", None),
    };
    let cfg = RunConfig::resolve(name, target, &cli.flags)?;
    match name {
        "analyze-omega" => analyze_omega(&cfg),
        "simulate" => simulate(&cfg),
        "verify" => verify_cmd(&cfg),
        "export-graph" => export(&cfg),
        _ => growth(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
