//! Experiment runner behind the `pmllab` binary.
//!
//! Each subcommand reads one instance document, expands `--sweep` over its
//! `params`, runs every point and reports JSON per point plus one wide CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{echo, EvalOptions};
use crate::error::{invalid, Error, Result};
use crate::instance::{set_param, Instance};
use crate::model::{GpModel, JsccModel};
use crate::pml::{alpha_beta, pml_bound, BoundForm, RankLaw};
use crate::prob::{rn_ratio, FiniteMeasure, Pmf};
use crate::race::{RaceProcess, Rank, View};
use crate::rng::trial_seed;
use crate::schemes::RunConfig;
use crate::second_order::{ba_rd, gp_rate, jscc_blocklength_check, min_blocklength, source_dispersion, DispersionInputs};

#[derive(Debug, Parser)]
#[command(name = "pmllab", version, about = "Exponential-race coding experiments: bounds, simulation and lemma checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytic bounds of an instance.
    Bound(RunArgs),
    /// Simulate a coding scheme and compare with its bound.
    Simulate(RunArgs),
    /// Check the matching-rank law on a (mu, P, Q) instance.
    VerifyLemma(RunArgs),
    /// Second-order rate and blocklength conditions.
    Dispersion(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Parameter sweep `key=v1,v2,...`; repeat for a cross product.
    #[arg(long)]
    pub sweep: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory, or a single `.csv` / `.json` file. Defaults to JSON on stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record this many leading trials.
    #[arg(long, default_value_t = 0)]
    pub trace: usize,
    /// Fill the `wall_ms` column. Off by default so reruns are byte-identical.
    #[arg(long)]
    pub timing: bool,
    /// Cap on the number of sweep points.
    #[arg(long, default_value_t = 10_000)]
    pub max_runs: usize,
    /// Exact terms kept in each φ-mixture decoder.
    #[arg(long, default_value_t = 1024)]
    pub phi_terms: usize,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Bound(a) => ("bound", a),
            Command::Simulate(a) => ("simulate", a),
            Command::VerifyLemma(a) => ("verify-lemma", a),
            Command::Dispersion(a) => ("dispersion", a),
        }
    }
}

/// One CSV line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub setting: String,
    pub params: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub empirical: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub wall_ms: Option<f64>,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub reports: Vec<Value>,
    pub rows: Vec<Row>,
    /// All dominance assertions held.
    pub pass: bool,
}

impl RunOutput {
    pub fn csv(&self) -> Result<String> {
        write_csv(&self.rows)
    }
}

pub fn write_csv(rows: &[Row]) -> Result<String> {
    let params: BTreeSet<&String> = rows.iter().flat_map(|r| r.params.keys()).collect();
    let bounds: BTreeSet<&String> = rows.iter().flat_map(|r| r.bounds.keys()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["setting".to_string()];
    header.extend(params.iter().map(|s| s.to_string()));
    header.extend(bounds.iter().map(|s| s.to_string()));
    header.extend(["empirical", "ci_lo", "ci_hi", "trials", "seed", "wall_ms"].map(String::from));
    w.write_record(&header)?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![r.setting.clone()];
        rec.extend(params.iter().map(|k| num(r.params.get(*k).copied())));
        rec.extend(bounds.iter().map(|k| num(r.bounds.get(*k).copied())));
        rec.push(num(r.empirical));
        rec.push(num(r.ci.map(|c| c[0])));
        rec.push(num(r.ci.map(|c| c[1])));
        rec.push(r.trials.map(|t| t.to_string()).unwrap_or_default());
        rec.push(r.seed.to_string());
        rec.push(num(r.wall_ms));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| invalid(format!("csv encoding: {e}")))
}

/// Parses `key=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let (k, vs) = spec.split_once('=').ok_or_else(|| invalid(format!("sweep '{spec}' is not key=v1,v2,...")))?;
    let vals = vs
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| invalid(format!("sweep value '{v}' is not a number"))))
        .collect::<Result<Vec<_>>>()?;
    if k.is_empty() || vals.is_empty() {
        return Err(invalid(format!("empty sweep '{spec}'")));
    }
    Ok((k.trim().to_string(), vals))
}

/// Cross product of the sweeps, first sweep varying slowest.
pub fn sweep_points(specs: &[String], cap: usize) -> Result<Vec<Vec<(String, f64)>>> {
    let sweeps = specs.iter().map(|s| parse_sweep(s)).collect::<Result<Vec<_>>>()?;
    let total = sweeps.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len())).unwrap_or(usize::MAX);
    if total > cap {
        return Err(invalid(format!("sweep has {total} points, cap is {cap}")));
    }
    let mut points = vec![Vec::new()];
    for (k, vals) in &sweeps {
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((k.clone(), v));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn load_doc(path: &Path) -> Result<(Value, EvalOptions)> {
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let obj = doc.as_object_mut().ok_or_else(|| invalid("instance must be a JSON object"))?;
    let opts = match obj.remove("options") {
        Some(v) => serde_json::from_value(v)?,
        None => EvalOptions::default(),
    };
    obj.entry("params").or_insert_with(|| json!({}));
    Ok((doc, opts))
}

/// Runs a parsed command line.
pub fn execute(cmd: &Command) -> Result<RunOutput> {
    let (name, a) = cmd.parts();
    let (doc, mut opts) = load_doc(&a.instance)?;
    opts.seed = a.seed;
    let points = sweep_points(&a.sweep, a.max_runs)?;
    let mut out = RunOutput { reports: Vec::new(), rows: Vec::new(), pass: true };
    for point in points {
        let mut d = doc.clone();
        for (k, v) in &point {
            set_param(&mut d, k, *v)?;
        }
        let start = Instant::now();
        let (mut report, mut row, pass) = match name {
            "bound" => run_bound(d, &opts, a)?,
            "simulate" => run_simulate(d, &opts, a)?,
            "verify-lemma" => run_lemma(d, a)?,
            _ => run_dispersion(d, a)?,
        };
        if a.timing {
            let ms = start.elapsed().as_secs_f64() * 1e3;
            row.wall_ms = Some(ms);
            report["wall_ms"] = json!(ms);
        }
        out.pass &= pass;
        out.reports.push(report);
        out.rows.push(row);
    }
    Ok(out)
}

fn run_bound(doc: Value, opts: &EvalOptions, a: &RunArgs) -> Result<(Value, Row, bool)> {
    let inst = Instance::from_value(doc)?;
    let r = inst.bounds(opts)?;
    let pass = r.checks_pass();
    let row = Row {
        setting: r.setting.to_string(),
        params: r.params.clone(),
        bounds: r.bounds.clone(),
        seed: a.seed,
        ..Default::default()
    };
    let mut v = serde_json::to_value(&r)?;
    v["seed"] = json!(a.seed);
    v["checks_pass"] = json!(pass);
    Ok((v, row, pass))
}

fn run_simulate(doc: Value, opts: &EvalOptions, a: &RunArgs) -> Result<(Value, Row, bool)> {
    let inst = Instance::from_value(doc)?;
    let cfg = RunConfig {
        trials: a.trials,
        seed: a.seed,
        workers: a.workers,
        trace: a.trace,
        phi_terms: a.phi_terms,
        bound: opts.clone(),
    };
    let r = inst.simulate(&cfg)?;
    let pass = r.dominated();
    let row = Row {
        setting: r.setting.to_string(),
        params: r.params.clone(),
        bounds: r.bounds.clone(),
        empirical: Some(r.estimate),
        ci: Some(r.ci),
        trials: Some(r.trials),
        seed: r.seed,
        wall_ms: None,
    };
    let mut v = serde_json::to_value(&r)?;
    v["dominated"] = json!(pass);
    Ok((v, row, pass))
}

// ---------------------------------------------------------------- matching-rank law

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaInstance {
    #[serde(default)]
    pub setting: Option<String>,
    pub model: LemmaModel,
    #[serde(default)]
    pub params: LemmaParams,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaModel {
    /// Base measure weights; unit weights when absent.
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    pub p: Pmf,
    pub q: Pmf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaParams {
    pub j: usize,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self { j: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaAtom {
    pub atom: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `dP/dQ` at the atom.
    pub ratio: f64,
    pub selected: u64,
    /// Exact `P{Υ > 1 | u}`.
    pub exact_mismatch: f64,
    pub mc_mismatch: f64,
    /// Standard error of `mc_mismatch` under the exact law.
    pub sigma: f64,
    /// `1 − (1 + dP/dQ)⁻¹`, for `j = 1` only.
    pub lemma_bound: Option<f64>,
    pub exact_mean_rank: f64,
    pub mean_bound: f64,
    pub mc_mean_rank: f64,
    /// TV between the empirical and exact laws of `Υ − 1`.
    pub tv: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub setting: String,
    pub params: BTreeMap<String, f64>,
    pub trials: u64,
    pub seed: u64,
    pub atoms: Vec<LemmaAtom>,
    /// Selection-weighted TV of the conditional laws.
    pub weighted_tv: f64,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<Value>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.checks.values().all(|&b| b)
    }
}

const HIST: usize = 256;

#[derive(Clone, Default)]
struct RankHist {
    count: u64,
    bins: Vec<u64>,
    overflow: u64,
    infinite: u64,
    sum: u64,
}

impl RankHist {
    fn add(&mut self, r: Rank) {
        self.count += 1;
        match r.finite() {
            Some(k) => {
                let k = k - 1;
                self.sum += k;
                match self.bins.get_mut(k as usize) {
                    Some(b) => *b += 1,
                    None => self.overflow += 1,
                }
            }
            None => self.infinite += 1,
        }
    }

    fn merge(&mut self, o: &RankHist) {
        self.count += o.count;
        self.overflow += o.overflow;
        self.infinite += o.infinite;
        self.sum += o.sum;
        for (a, b) in self.bins.iter_mut().zip(&o.bins) {
            *a += b;
        }
    }
}

/// Monte Carlo of `Υ_{P∥Q}(j)` at the `j`-th `P`-selection against the exact law.
pub fn verify_lemma(inst: &LemmaInstance, trials: u64, seed: u64, workers: Option<usize>, trace: usize) -> Result<LemmaReport> {
    if let Some(s) = &inst.setting {
        if s != "lemma" {
            return Err(invalid(format!("verify-lemma expects setting 'lemma', got '{s}'")));
        }
    }
    let LemmaModel { mu, p, q } = &inst.model;
    let j = inst.params.j;
    if j == 0 || trials == 0 {
        return Err(invalid("j and trials must be at least 1"));
    }
    let mu = FiniteMeasure::new(mu.clone().unwrap_or_else(|| vec![1.0; p.len()]))?;
    let (pv, qv) = (View::new(&mu, p)?, View::new(&mu, q)?);
    let base = RaceProcess::new(&mu, 0)?;
    let n = mu.len();
    let empty = RankHist { bins: vec![0; HIST], ..Default::default() };
    let chunk = 4096u64;
    let work = || {
        (0..trials.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut h = vec![empty.clone(); n];
                let mut proc = base.clone();
                for i in c * chunk..((c + 1) * chunk).min(trials) {
                    proc.reseed(trial_seed(seed, i));
                    let pt = proc.pfr_nth(&pv, j)?;
                    let r = proc.rank_of(&pt, &qv);
                    h[pt.atom].add(r);
                }
                Ok(h)
            })
            .collect::<Result<Vec<_>>>()
    };
    let parts = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut hist = vec![empty.clone(); n];
    for part in &parts {
        for (a, b) in hist.iter_mut().zip(part) {
            a.merge(b);
        }
    }

    let dp = mu.density_of(p)?;
    let dq = mu.density_of(q)?;
    let mut atoms = Vec::new();
    let mut checks = BTreeMap::new();
    let (mut exact_ok, mut mc_ok, mut wtv) = (true, true, 0.0);
    for u in mu.support().filter(|&u| dp[u] > 0.0) {
        let ab = alpha_beta(&mu, p, q, u)?;
        let law = RankLaw::from_params(ab, j);
        let h = &hist[u];
        let r = rn_ratio(dp[u], dq[u]);
        let exact = law.mismatch();
        let lemma_bound = (j == 1).then(|| pml_bound(r, 1, 1, BoundForm::Basic));
        let mean_bound = pml_bound(r, j as u64, 1, BoundForm::Mean) - 1.0;
        let exact_mean = law.mean();
        exact_ok &= lemma_bound.is_none_or(|b| exact <= b + 1e-12) && exact_mean <= mean_bound + 1e-9;
        let nu = h.count as f64;
        let (mc, sigma, mc_mean, tv) = if h.count == 0 {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mc = 1.0 - h.bins[0] as f64 / nu;
            let sigma = (exact * (1.0 - exact) / nu).sqrt();
            let mc_mean = if h.infinite > 0 { f64::INFINITY } else { h.sum as f64 / nu };
            let mut tv = 0.0;
            let mut covered = 0.0;
            for k in 0..HIST {
                let e = law.pmf.get(k).copied().unwrap_or(0.0);
                covered += e;
                tv += (h.bins[k] as f64 / nu - e).abs();
            }
            let rest_exact = (1.0 - covered).max(0.0);
            tv += ((h.overflow + h.infinite) as f64 / nu - rest_exact).abs();
            (mc, sigma, mc_mean, tv / 2.0)
        };
        if h.count > 0 {
            mc_ok &= (mc - exact).abs() <= 3.0 * sigma + 1e-12;
            wtv += tv * nu / trials as f64;
        }
        atoms.push(LemmaAtom {
            atom: u,
            alpha: ab.alpha,
            beta: ab.beta,
            ratio: r.value(),
            selected: h.count,
            exact_mismatch: exact,
            mc_mismatch: mc,
            sigma,
            lemma_bound,
            exact_mean_rank: exact_mean + 1.0,
            mean_bound: mean_bound + 1.0,
            mc_mean_rank: mc_mean + 1.0,
            tv,
        });
    }
    checks.insert("exact_within_bounds".to_string(), exact_ok);
    checks.insert("mc_mismatch_within_3sigma".to_string(), mc_ok);
    let trace = if trace > 0 {
        let mut proc = base.clone();
        proc.reseed(trial_seed(seed, 0));
        proc.trace(trace, Some(&pv), Some(&qv)).into_iter().map(|t| serde_json::to_value(t)).collect::<std::result::Result<_, _>>()?
    } else {
        Vec::new()
    };
    Ok(LemmaReport {
        setting: "lemma".into(),
        params: echo(&inst.params)?,
        trials,
        seed,
        atoms,
        weighted_tv: wtv,
        checks,
        trace,
    })
}

fn run_lemma(doc: Value, a: &RunArgs) -> Result<(Value, Row, bool)> {
    let inst: LemmaInstance = serde_json::from_value(doc)?;
    let r = verify_lemma(&inst, a.trials, a.seed, a.workers, a.trace)?;
    let pass = r.pass();
    let mut bounds = BTreeMap::new();
    for at in &r.atoms {
        bounds.insert(format!("exact_mismatch_{}", at.atom), at.exact_mismatch);
        if let Some(b) = at.lemma_bound {
            bounds.insert(format!("lemma_bound_{}", at.atom), b);
        }
    }
    let total = r.atoms.iter().map(|a| a.selected).sum::<u64>() as f64;
    let mismatches: f64 = r.atoms.iter().filter(|a| a.selected > 0).map(|a| a.mc_mismatch * a.selected as f64).sum();
    let est = crate::schemes::Estimate::wilson(mismatches.round() as u64, total as u64);
    let row = Row {
        setting: r.setting.clone(),
        params: r.params.clone(),
        bounds,
        empirical: Some(est.mean),
        ci: Some(est.ci),
        trials: Some(r.trials),
        seed: r.seed,
        wall_ms: None,
    };
    Ok((serde_json::to_value(&r)?, row, pass))
}

// ---------------------------------------------------------------- dispersion

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "setting", rename_all = "kebab-case")]
pub enum DispersionInstance {
    Jscc { model: JsccModel, params: JsccDispersionParams },
    Gp { model: GpModel, params: GpDispersionParams },
}

fn one_f() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsccDispersionParams {
    #[serde(rename = "D")]
    pub d: f64,
    pub eps: f64,
    pub n: u64,
    pub k: u64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "one_f")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub k0: u64,
    /// Also search for the smallest satisfying `n ≤ n_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpDispersionParams {
    pub n: u64,
    pub eps: f64,
    #[serde(default = "one_f")]
    pub alpha: f64,
}

/// Mean and variance of `ι(X;Y)` in bits.
fn info_moments(model: &JsccModel) -> Result<(f64, f64)> {
    let joint = model.channel.joint(&model.p_x)?;
    let pts: Vec<(f64, f64)> =
        joint.support().map(|(t, w)| Ok((w, joint.info_density(t[0], t[1])?))).collect::<Result<_>>()?;
    let c: f64 = pts.iter().map(|(w, i)| w * i).sum();
    let v: f64 = pts.iter().map(|(w, i)| w * (i - c).powi(2)).sum();
    Ok((c, v))
}

pub fn dispersion_report(inst: &DispersionInstance) -> Result<(Value, BTreeMap<String, f64>, bool)> {
    match inst {
        DispersionInstance::Jscc { model, params } => {
            model.validate()?;
            let (c, v) = info_moments(model)?;
            let rd = ba_rd(&model.p_w, &model.distortion, params.d)?;
            let (_, source_v) = source_dispersion(&model.p_w, &rd)?;
            let inputs = DispersionInputs {
                c,
                v,
                rate: rd.rate,
                source_v,
                eps: params.eps,
                n: params.n,
                k: params.k,
                eta: params.eta,
                alpha: params.alpha,
                beta: params.beta,
                k0: params.k0,
            };
            let check = jscc_blocklength_check(&inputs)?;
            let min_n = params.n_max.map(|m| min_blocklength(&inputs, m)).transpose()?.flatten();
            let mut cols = BTreeMap::from([
                ("lhs".to_string(), check.lhs),
                ("rhs".to_string(), check.rhs),
                ("satisfied".to_string(), if check.satisfied { 1.0 } else { 0.0 }),
            ]);
            if let Some(m) = min_n {
                cols.insert("min_n".into(), m as f64);
            }
            let v = json!({
                "setting": "jscc",
                "params": echo(params)?,
                "inputs": inputs,
                "rate_distortion": {"rate": rd.rate, "slope": rd.slope, "achieved": rd.achieved, "regime": rd.regime},
                "check": check,
                "min_n": min_n,
            });
            Ok((v, cols, true))
        }
        DispersionInstance::Gp { model, params } => {
            model.validate()?;
            let g = gp_rate(params.n, params.eps, &model.joint()?, params.alpha)?;
            let cols = BTreeMap::from([
                ("C".to_string(), g.c),
                ("V".to_string(), g.v),
                ("log_L".to_string(), g.log_l),
                ("L".to_string(), g.l as f64),
            ]);
            let v = json!({"setting": "gp", "params": echo(params)?, "rate": g});
            Ok((v, cols, true))
        }
    }
}

fn run_dispersion(doc: Value, a: &RunArgs) -> Result<(Value, Row, bool)> {
    let inst: DispersionInstance = serde_json::from_value(doc)?;
    let (mut v, bounds, pass) = dispersion_report(&inst)?;
    v["seed"] = json!(a.seed);
    let params = serde_json::from_value(v["params"].clone())?;
    let setting = v["setting"].as_str().unwrap_or_default().to_string();
    Ok((v, Row { setting, params, bounds, seed: a.seed, ..Default::default() }, pass))
}

// ---------------------------------------------------------------- output and entry point

fn write_outputs(name: &str, out: &RunOutput, dest: Option<&Path>) -> Result<()> {
    match dest {
        None => {
            let v = if out.reports.len() == 1 { out.reports[0].clone() } else { Value::Array(out.reports.clone()) };
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Some(p) if p.extension().is_some_and(|e| e == "csv") => std::fs::write(p, out.csv()?)?,
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            std::fs::write(p, serde_json::to_string_pretty(&out.reports)? + "\n")?
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (i, r) in out.reports.iter().enumerate() {
                std::fs::write(dir.join(format!("{name}-{i:04}.json")), serde_json::to_string_pretty(r)? + "\n")?;
            }
            std::fs::write(dir.join(format!("{name}.csv")), out.csv()?)?;
        }
    }
    Ok(())
}

pub fn error_json(e: &Error) -> Value {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}})
}

/// Exit status: 0 when every dominance assertion holds, 1 when one fails,
/// 2 on invalid input (with an error JSON on stderr).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, a) = cli.command.parts();
    match execute(&cli.command).and_then(|out| write_outputs(name, &out, a.out.as_deref()).map(|_| out.pass)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            2
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_cross_product() {
        let pts = sweep_points(&["L=2,4".into(), "J=1,2,3".into()], 100).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![("L".to_string(), 2.0), ("J".to_string(), 1.0)]);
        assert_eq!(pts[5], vec![("L".to_string(), 4.0), ("J".to_string(), 3.0)]);
        assert!(sweep_points(&["L=1,2,3".into(), "J=1,2".into()], 5).is_err());
        assert!(parse_sweep("L").is_err());
        assert!(parse_sweep("L=a").is_err());
        assert_eq!(sweep_points(&[], 1).unwrap().len(), 1);
    }

    #[test]
    fn csv_columns_are_stable() {
        let rows = vec![
            Row {
                setting: "channel".into(),
                params: BTreeMap::from([("n".into(), 1.0), ("L".into(), 2.0)]),
                bounds: BTreeMap::from([("prop1".into(), 0.5)]),
                seed: 7,
                ..Default::default()
            },
            Row {
                setting: "channel".into(),
                params: BTreeMap::from([("J".into(), 2.0)]),
                bounds: BTreeMap::from([("list".into(), 0.25)]),
                empirical: Some(0.125),
                ci: Some([0.1, 0.15]),
                trials: Some(10),
                seed: 7,
                wall_ms: None,
            },
        ];
        let s = write_csv(&rows).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "setting,J,L,n,list,prop1,empirical,ci_lo,ci_hi,trials,seed,wall_ms");
        assert_eq!(lines.next().unwrap(), "channel,,2,1,,0.5,,,,,7,");
        assert_eq!(lines.next().unwrap(), "channel,2,,,0.25,,0.125,0.1,0.15,10,7,");
    }

    #[test]
    fn canonical_lemma_instance() {
        let inst: LemmaInstance = serde_json::from_value(json!({
            "setting": "lemma",
            "model": {"p": {"weights": [0.75, 0.25]}, "q": {"weights": [0.5, 0.5]}},
            "params": {"j": 1}
        }))
        .unwrap();
        let r = verify_lemma(&inst, 20_000, 3, None, 4).unwrap();
        let a = &r.atoms[0];
        assert!((a.exact_mismatch - 1.0 / 3.0).abs() < 1e-12);
        assert!((a.alpha - 0.5).abs() < 1e-12);
        assert!((a.lemma_bound.unwrap() - 0.6).abs() < 1e-12);
        assert!(r.pass(), "{:?}", r.checks);
        assert_eq!(r.trace.len(), 4);
        assert_eq!(r.atoms.iter().map(|a| a.selected).sum::<u64>(), 20_000);
    }

    #[test]
    fn lemma_is_worker_independent() {
        let inst: LemmaInstance = serde_json::from_value(json!({
            "model": {"mu": [1.0, 2.0, 0.5], "p": {"weights": [0.2, 0.3, 0.5]}, "q": {"weights": [0.6, 0.1, 0.3]}},
            "params": {"j": 2}
        }))
        .unwrap();
        let a = verify_lemma(&inst, 10_000, 5, Some(1), 0).unwrap();
        let b = verify_lemma(&inst, 10_000, 5, Some(4), 0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn error_json_is_machine_readable() {
        let v = error_json(&invalid("bad"));
        assert_eq!(v["error"]["kind"], "invalid-parameter");
    }
}
