//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fails.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use pmllab::bounds::{channel_bounds, ChannelParams, EvalOptions, ResolvabilityParams};
use pmllab::cli::{verify_lemma, LemmaInstance};
use pmllab::instance::Instance;
use pmllab::model::{ChannelModel, Distortion};
use pmllab::pml::{moment_bounds, phi_constant, phi_inequality, rank_law, sfrl_chain};
use pmllab::prob::{h2, kl, renyi, FiniteMeasure, Kernel, Pmf};
use pmllab::race::{RaceProcess, Rank, View};
use pmllab::rng::trial_seed;
use pmllab::schemes::{codebook_tv, Interval, RunConfig};
use pmllab::second_order::{ba_rd, d_tilted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<(bool, String), String>;

fn instances_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances")
}

fn load(name: &str) -> Instance {
    Instance::load(instances_dir().join(format!("{name}.json"))).expect(name)
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Pmf {
    Pmf::normalized((0..n).map(|_| rng.gen_range(floor..1.0)).collect()).unwrap()
}

fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = probs.iter().filter(|&&p| p > 0.0).count() - 1;
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

// ---------------------------------------------------------------- criteria

/// TV between the empirical joint law of `(Ũ_P(j), Υ_{P∥Q}(j) − 1)` and
/// `P(u) · law_u`, over 20 random instances and j = 1, 2, 3.
fn exact_law() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let trials = 100_000u64;
    let mut worst = 0.0f64;
    for inst in 0..20u64 {
        let n = rng.gen_range(2..=6);
        let mu = FiniteMeasure::new((0..n).map(|_| rng.gen_range(0.2..2.0)).collect()).unwrap();
        let p = random_pmf(&mut rng, n, 0.05);
        let mut qw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        if inst % 5 == 4 {
            qw[0] = 0.0;
        }
        let q = Pmf::normalized(qw).unwrap();
        let (pv, qv) = (View::new(&mu, &p).unwrap(), View::new(&mu, &q).unwrap());
        for j in 1..=3usize {
            let master = inst * 16 + j as u64;
            let counts = (0..trials)
                .into_par_iter()
                .fold(HashMap::new, |mut acc: HashMap<(usize, Option<u64>), u64>, t| {
                    let mut pr = RaceProcess::new(&mu, trial_seed(master, t)).unwrap();
                    let pt = pr.pfr_nth(&pv, j).unwrap();
                    let cell = pr.rank_of(&pt, &qv).finite().map(|k| k - 1);
                    *acc.entry((pt.atom, cell)).or_default() += 1;
                    acc
                })
                .reduce(HashMap::new, |mut a, b| {
                    for (k, v) in b {
                        *a.entry(k).or_default() += v;
                    }
                    a
                });
            let mut exact: HashMap<(usize, Option<u64>), f64> = HashMap::new();
            let mut lost = 0.0;
            for u in 0..n {
                let law = rank_law(&mu, &p, &q, u, j).map_err(|e| e.to_string())?;
                if law.is_infinite() {
                    exact.insert((u, None), p.prob(u));
                } else {
                    for (k, &w) in law.pmf.iter().enumerate() {
                        exact.insert((u, Some(k as u64)), p.prob(u) * w);
                    }
                    lost += p.prob(u) * law.tail;
                }
            }
            let mut d = lost;
            for (cell, &w) in &exact {
                let e = counts.get(cell).copied().unwrap_or(0) as f64 / trials as f64;
                d += (e - w).abs();
            }
            for (cell, &c) in &counts {
                if !exact.contains_key(cell) {
                    d += c as f64 / trials as f64;
                }
            }
            worst = worst.max(d / 2.0);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 0.02 && secs <= 120.0, format!("max TV {worst:.4} over 20 instances x j=1..3, {secs:.1}s")))
}

fn canonical() -> Check {
    let s = std::fs::read_to_string(instances_dir().join("canonical_lemma.json")).map_err(|e| e.to_string())?;
    let inst: LemmaInstance = serde_json::from_str(&s).map_err(|e| e.to_string())?;
    let r = verify_lemma(&inst, 1_000_000, 0, None, 0).map_err(|e| e.to_string())?;
    let a = &r.atoms[0];
    let bound = a.lemma_bound.unwrap_or(f64::NAN);
    let ok = (a.alpha - 0.5).abs() < 1e-12
        && (a.exact_mismatch - 1.0 / 3.0).abs() < 1e-12
        && (bound - 0.6).abs() < 1e-12
        && (a.mc_mismatch - 1.0 / 3.0).abs() <= 3.0 * a.sigma;
    Ok((
        ok,
        format!(
            "alpha(a) {}, exact {:.6}, bound {:.6}, MC {:.5} (sigma {:.5}, {} selections)",
            a.alpha, a.exact_mismatch, bound, a.mc_mismatch, a.sigma, a.selected
        ),
    ))
}

fn desk_scale(inst: &Instance) -> bool {
    let params = inst.params().unwrap();
    let get = |k: &str| params.get(k).copied().unwrap_or(1.0);
    get("n") <= 8.0 && ["L", "L0", "L1", "L2"].iter().all(|k| get(k) <= 64.0)
}

fn dominance() -> Check {
    let names = [
        "channel",
        "channel_rank",
        "channel_list",
        "gp",
        "wz",
        "jscc",
        "bc_marton",
        "bc_common",
        "dlsc",
        "mac",
        "wiretap",
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let inst = load(name);
        let start = Instant::now();
        let r = inst.simulate(&RunConfig::new(100_000, 0)).map_err(|e| format!("{name}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        let pass = r.dominated() && secs <= 300.0 && desk_scale(&inst) && r.trials >= 100_000;
        ok &= pass;
        let vacuous = if r.interval == Interval::Wilson && r.bound >= 1.0 { " vacuous" } else { "" };
        parts.push(format!(
            "{}{} {:.4}<={}={:.4}{} {:.0}s",
            name,
            if pass { "" } else { "!" },
            r.estimate,
            r.bound_name,
            r.bound,
            vacuous,
            secs
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn resolvability() -> Check {
    let inst = load("resolvability");
    let r = inst.simulate(&RunConfig::new(1_000, 0)).map_err(|e| e.to_string())?;
    let flat = ChannelModel::new(
        Pmf::new(vec![0.3, 0.7]).unwrap(),
        Kernel::from_rows(vec![vec![0.2, 0.5, 0.3], vec![0.2, 0.5, 0.3]]).unwrap(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut zero = true;
    for l in [1usize, 3, 256] {
        for _ in 0..20 {
            let book: Vec<usize> = (0..l).map(|_| flat.p_x.sample(&mut rng)).collect();
            zero &= codebook_tv(&flat, &book).map_err(|e| e.to_string())? == 0.0;
        }
    }
    let flat_run = Instance::Resolvability {
        model: flat,
        params: ResolvabilityParams { l: 256, j: 16, gamma: None, alpha: None, n: 2 },
    }
    .simulate(&RunConfig::new(1_000, 0))
    .map_err(|e| e.to_string())?;
    zero &= flat_run.estimate == 0.0;
    let ok = r.estimate <= r.bound && zero;
    Ok((ok, format!("mean TV {:.4} <= pe1 {:.4} over {} codebooks; independent TV == 0: {zero}", r.estimate, r.bound, r.trials)))
}

fn chains() -> Check {
    let opts = EvalOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut n = [0usize; 4];
    let mut ok = true;
    for _ in 0..20 {
        let e = rng.gen_range(0.01..0.4);
        let m = ChannelModel::new(random_pmf(&mut rng, 2, 0.1), Kernel::bsc(e).unwrap()).unwrap();
        let mut p = ChannelParams::new(rng.gen_range(1..64));
        p.n = rng.gen_range(1..=6);
        let r = channel_bounds(&m, &p, &opts).map_err(|e| e.to_string())?;
        ok &= r.checks["thm2_le_chain"];
        n[0] += 1;
    }
    let gp = load("gp");
    for _ in 0..20 {
        let inst = gp
            .with_param("gamma", rng.gen_range(0.1..8.0))
            .and_then(|i| i.with_param("J", rng.gen_range(1..=64) as f64))
            .map_err(|e| e.to_string())?;
        ok &= inst.bounds(&opts).map_err(|e| e.to_string())?.checks["thm3_le_verdu"];
        n[1] += 1;
    }
    let wz = load("wz");
    for _ in 0..40 {
        let inst = wz
            .with_param("n", rng.gen_range(1..=2) as f64)
            .and_then(|i| i.with_param("D", 0.5))
            .and_then(|i| i.with_param("L", rng.gen_range(256..=4096) as f64))
            .and_then(|i| i.with_param("gamma_p", rng.gen_range(0.01..1.0)))
            .and_then(|i| i.with_param("gamma_c", rng.gen_range(0.5..3.0)))
            .and_then(|i| i.with_param("J", rng.gen_range(1..=256) as f64))
            .map_err(|e| e.to_string())?;
        let r = inst.bounds(&opts).map_err(|e| e.to_string())?;
        if let Some(&c) = r.checks.get("thm4_le_watanabe") {
            ok &= c;
            n[2] += 1;
        }
    }
    let jscc = load("jscc");
    for j in [1.0, 2.0, 4.0, 8.0] {
        let r = jscc.with_param("J", j).and_then(|i| i.bounds(&opts)).map_err(|e| e.to_string())?;
        ok &= r.checks["thm5_le_two_kostina"];
        n[3] += 1;
    }
    ok &= n[2] > 0;
    Ok((ok, format!("thm2<=chain x{}, thm3<=verdu x{}, thm4<=watanabe x{} (of 40, where <=1), thm5<=2kostina x{}", n[0], n[1], n[2], n[3])))
}

fn marginals() -> Check {
    let mu = FiniteMeasure::new(vec![1.0, 0.3, 2.5, 0.7, 1.2]).unwrap();
    let p = Pmf::new(vec![0.05, 0.3, 0.1, 0.4, 0.15]).unwrap();
    let q = Pmf::new(vec![0.25, 0.1, 0.3, 0.15, 0.2]).unwrap();
    let (pv, qv) = (View::new(&mu, &p).unwrap(), View::new(&mu, &q).unwrap());
    let k = p.len();
    let trials = 100_000u64;
    let tallies = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut pr = RaceProcess::new(&mu, trial_seed(101, t)).unwrap();
            let l = pr.pfr_list(&pv, 3).unwrap();
            (l[0].atom, l[1].atom, l[2].atom)
        })
        .collect::<Vec<_>>();
    let mut first = vec![0u64; k];
    let mut third = vec![0u64; k];
    let mut pairs = vec![0u64; k * k];
    for &(a, b, c) in &tallies {
        first[a] += 1;
        third[c] += 1;
        pairs[a * k + b] += 1;
    }
    let pp: Vec<f64> = (0..k * k).map(|i| p.prob(i / k) * p.prob(i % k)).collect();
    let pvals = [chi_square_p(&first, p.weights()), chi_square_p(&third, p.weights()), chi_square_p(&pairs, &pp)];
    let chi_ok = pvals.iter().all(|&v| v > 0.001);

    let mut inversions = 0u64;
    let mut inv_ok = true;
    for s in 0..10_000u64 {
        let mut pr = RaceProcess::new(&mu, trial_seed(202, s)).unwrap();
        let j = 1 + (s % 5) as usize;
        let kk = pr.match_rank(&pv, &qv, j).unwrap();
        match kk {
            Rank::Finite(kk) => {
                inv_ok &= pr.match_rank(&qv, &pv, kk as usize).unwrap() == Rank::Finite(j as u64);
                inversions += 1;
            }
            Rank::Infinite => inv_ok = false,
        }
    }
    Ok((
        chi_ok && inv_ok,
        format!(
            "chi-square p: U(1) {:.3}, U(3) {:.3}, (U(1),U(2)) {:.3}; inversion identity on {inversions}/10000",
            pvals[0], pvals[1], pvals[2]
        ),
    ))
}

fn moments() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let trials = 100_000u64;
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for pair in 0..20u64 {
        let n = rng.gen_range(2..=6);
        let p = random_pmf(&mut rng, n, 0.02);
        let q = random_pmf(&mut rng, n, 0.02);
        let mu = FiniteMeasure::new(vec![1.0; n]).unwrap();
        let (pv, qv) = (View::new(&mu, &p).unwrap(), View::new(&mu, &q).unwrap());
        let b = moment_bounds(&p, &q, 1, 0.5).map_err(|e| e.to_string())?;
        // the stated forms, written out independently
        let log_rhs = kl(p.weights(), q.weights()) + std::f64::consts::LOG2_E;
        let pow_rhs = (0.5 * renyi(p.weights(), q.weights(), 1.5)).exp2() + 0.5;
        ok &= (b.log_bound - log_rhs).abs() < 1e-12 && (b.power_bound - pow_rhs).abs() < 1e-12;
        let (s1, s2, r1, r2) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut pr = RaceProcess::new(&mu, trial_seed(300 + pair, t)).unwrap();
                let k = pr.match_rank(&pv, &qv, 1).unwrap().finite().unwrap() as f64;
                (k.log2(), k.log2().powi(2), k.sqrt(), k)
            })
            .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
        let nf = trials as f64;
        let (m1, m2) = (s1 / nf, r1 / nf);
        let se1 = ((s2 / nf - m1 * m1).max(0.0) / nf).sqrt();
        let se2 = ((r2 / nf - m2 * m2).max(0.0) / nf).sqrt();
        ok &= m1 - 3.0 * se1 <= log_rhs && m2 - 3.0 * se2 <= pow_rhs;
        worst = worst.max((m1 - log_rhs) / se1.max(1e-12)).max((m2 - pow_rhs) / se2.max(1e-12));
    }
    let grid_ok = (0..=5000).all(|i| {
        let (l, r) = sfrl_chain(i as f64 * 0.01);
        l <= r
    });
    Ok((ok && grid_ok, format!("20 pairs, max (MC - bound)/se {worst:.1}; constant chain on I in [0,50] step 0.01: {grid_ok}")))
}

fn phi_machinery() -> Check {
    let c = phi_constant();
    let c_ok = c.c_lo >= 1.0 && c.c_hi <= 2.0 && c.bracket_width() < 1e-10;
    let mut points = 0u64;
    let mut with_pre = 0u64;
    let mut grid_ok = true;
    for e in 1..=20 {
        let s = (-(e as f64)).exp2();
        for t in 1..=1024u32 {
            let t = t as f64;
            let alpha = -(s * t).log2();
            let beta = if t > 1.0 { (t - 1.0).log2() } else { 0.0 };
            for (a, at) in [(alpha, alpha.max(0.0)), (alpha, alpha.max(0.0) + 3.0), (alpha - 2.0, alpha.max(0.0))] {
                let r = phi_inequality(s, t, a, beta, at);
                grid_ok &= r.holds;
                points += 1;
                with_pre += r.preconditions as u64;
            }
        }
    }
    Ok((
        c_ok && grid_ok,
        format!("c = {:.12} in [{:.12}, {:.12}], bracket {:.1e}; inequality on {points} points ({with_pre} with preconditions)", c.c, c.c_lo, c.c_hi, c.bracket_width()),
    ))
}

fn rate_distortion() -> Check {
    let p = Pmf::uniform(2).unwrap();
    let d = Distortion::hamming(2);
    let mut ok = true;
    let mut parts = Vec::new();
    for target in [0.05, 0.11, 0.25] {
        let rd = ba_rd(&p, &d, target).map_err(|e| e.to_string())?;
        let want = 1.0 - h2(target);
        let mut ej = 0.0;
        for w in 0..2 {
            ej += p.prob(w) * d_tilted(&p, &rd, w, target).map_err(|e| e.to_string())?;
        }
        let e1 = (rd.rate - want).abs();
        let e2 = (ej - rd.rate).abs();
        ok &= e1 <= 1e-6 && e2 <= 1e-6;
        parts.push(format!("D={target}: |R-(1-h2)| {e1:.1e}, |E[j]-R| {e2:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_pmllab");
    let dir = std::env::temp_dir().join(format!("pmllab-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let inst = instances_dir().join("channel_list.json");
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.join(format!("run{i}.csv"));
        let status = Command::new(bin)
            .args(["simulate", "--instance"])
            .arg(&inst)
            .args(["--sweep", "L=2,4", "--trials", "20000", "--seed", "7", "--workers", workers, "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Ok((false, format!("simulate exited with {status}")));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok((same, format!("3 runs (workers 1, 4, 4), {} CSV bytes, identical: {same}", outputs[0].len())))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("exact-law agreement", exact_law),
        ("canonical instance", canonical),
        ("bound dominance", dominance),
        ("resolvability", resolvability),
        ("comparison chains", chains),
        ("marginal laws and inversion", marginals),
        ("rank moments and constant chain", moments),
        ("phi machinery", phi_machinery),
        ("rate-distortion", rate_distortion),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
