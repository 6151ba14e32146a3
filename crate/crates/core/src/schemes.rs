//! Monte Carlo simulators for the one-shot coding schemes.
//!
//! Every codebook is an exponential race over `A × B` (auxiliary × message)
//! with rates `P_A(a) P_B(b)`, queried through views whose densities are taken
//! with respect to those rates. Encoder and decoder each rebuild their
//! processes from the trial seed, so the seed is the only thing they share.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    bc_common_bounds, channel_bounds, dlsc_bounds, echo, gp_bounds, jscc_bounds, mac_bounds, marton_bounds,
    resolvability_bounds, within, wiretap_bounds, wz_bounds, BcCommonParams, BoundReport, ChannelParams, DlscParams,
    EvalOptions, GpParams, JsccParams, MacParams, MartonParams, ResolvabilityParams, WiretapParams, WzParams, Z95,
};
use crate::error::{invalid, Result};
use crate::model::{
    BcCommonModel, ChannelModel, DlscModel, GpModel, JsccModel, MacModel, MartonModel, Setting, WiretapModel, WzModel,
};
use crate::pml::phi_constant;
use crate::prob::{check_budget, decode, sample_weights, tv, JointPmf, Pmf};
use crate::race::{Rank, RaceProcess, View};
use crate::rng::{aux_rng, derive, tag, trial_seed};

// ---------------------------------------------------------------- configuration and results

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
    /// Number of leading trials to record.
    pub trace: usize,
    /// Leading terms of each φ-mixture kept exactly. The remaining φ mass is
    /// placed on the mixture's expectation over the unlisted terms.
    pub phi_terms: usize,
    pub bound: EvalOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 0, workers: None, trace: 0, phi_terms: 1024, bound: EvalOptions::default() }
    }
}

impl RunConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interval {
    /// Wilson score interval for a failure frequency.
    Wilson,
    /// Normal interval from the sample variance of a bounded metric.
    Normal,
}

/// A mean with its 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci: [f64; 2],
    pub interval: Interval,
}

impl Estimate {
    pub fn wilson(failures: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = failures as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let hw = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self { mean: p, ci: [(center - hw).max(0.0).min(p), (center + hw).min(1.0).max(p)], interval: Interval::Wilson }
    }

    pub fn normal(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        let hw = Z95 * (var / n).sqrt();
        Self { mean, ci: [mean - hw, mean + hw], interval: Interval::Normal }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci[1] - self.ci[0]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalResult {
    pub setting: Setting,
    pub params: BTreeMap<String, f64>,
    pub trials: u64,
    pub seed: u64,
    /// Trials whose decoding failed.
    pub failures: u64,
    pub estimate: f64,
    pub ci: [f64; 2],
    pub interval: Interval,
    /// Name of the paired analytic bound within `bounds`.
    pub bound_name: String,
    pub bound: f64,
    pub bounds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, Estimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<Value>,
}

impl EmpiricalResult {
    pub fn half_width(&self) -> f64 {
        (self.ci[1] - self.ci[0]) / 2.0
    }

    /// `estimate ≤ bound + 3 · half-width`.
    pub fn dominated(&self) -> bool {
        self.estimate <= self.bound + 3.0 * self.half_width()
    }
}

// ---------------------------------------------------------------- trial runner

struct Outcome {
    fail: bool,
    value: f64,
    aux: f64,
    trace: Option<Value>,
}

impl Outcome {
    fn binary(fail: bool) -> Self {
        Self { fail, value: if fail { 1.0 } else { 0.0 }, aux: 0.0, trace: None }
    }

    fn traced(mut self, want: bool, f: impl FnOnce() -> Value) -> Self {
        if want {
            self.trace = Some(f());
        }
        self
    }
}

#[derive(Default)]
struct Tally {
    n: u64,
    fails: u64,
    sum: f64,
    sum_sq: f64,
    aux: f64,
    aux_sq: f64,
    traces: Vec<Value>,
}

impl Tally {
    fn merge(&mut self, o: Tally) {
        self.n += o.n;
        self.fails += o.fails;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.aux += o.aux;
        self.aux_sq += o.aux_sq;
        self.traces.extend(o.traces);
    }
}

const TRIAL_CHUNK: u64 = 1024;

/// Runs `f(trial, seed, trace?)` for every trial. Chunks are fixed-size and
/// merged in index order, so the tally is independent of the worker count.
fn run<F>(cfg: &RunConfig, f: F) -> Result<Tally>
where
    F: Fn(u64, u64, bool) -> Result<Outcome> + Sync,
{
    if cfg.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let chunks = cfg.trials.div_ceil(TRIAL_CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut t = Tally::default();
                for i in c * TRIAL_CHUNK..((c + 1) * TRIAL_CHUNK).min(cfg.trials) {
                    let o = f(i, trial_seed(cfg.seed, i), (i as usize) < cfg.trace)?;
                    t.n += 1;
                    t.fails += o.fail as u64;
                    t.sum += o.value;
                    t.sum_sq += o.value * o.value;
                    t.aux += o.aux;
                    t.aux_sq += o.aux * o.aux;
                    if let Some(v) = o.trace {
                        t.traces.push(v);
                    }
                }
                Ok(t)
            })
            .collect::<Result<Vec<Tally>>>()
    };
    let parts = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut total = Tally::default();
    for p in parts {
        total.merge(p);
    }
    Ok(total)
}

fn finish(
    setting: Setting,
    params: BTreeMap<String, f64>,
    cfg: &RunConfig,
    t: Tally,
    report: &BoundReport,
    bound_name: &str,
    interval: Interval,
) -> Result<EmpiricalResult> {
    let e = match interval {
        Interval::Wilson => Estimate::wilson(t.fails, t.n),
        Interval::Normal => Estimate::normal(t.sum, t.sum_sq, t.n),
    };
    Ok(EmpiricalResult {
        setting,
        params,
        trials: t.n,
        seed: cfg.seed,
        failures: t.fails,
        estimate: e.mean,
        ci: e.ci,
        interval,
        bound_name: bound_name.to_string(),
        bound: report.get(bound_name)?,
        bounds: report.bounds.clone(),
        components: BTreeMap::new(),
        traces: t.traces,
    })
}

fn proc_seed(seed: u64, k: u64) -> u64 {
    derive(seed, tag::PROC0 + k)
}

fn power_of<T: Clone>(model: &T, n: u64, f: impl Fn(&T, usize) -> Result<T>) -> Result<T> {
    match n {
        0 => Err(invalid("n must be at least 1")),
        1 => Ok(model.clone()),
        n => f(model, n as usize),
    }
}

fn count(name: &str, v: u64) -> Result<usize> {
    if v == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(v as usize)
}

// ---------------------------------------------------------------- race spaces

/// Atoms `a · |B| + b` of `A × B` with rates `P_A(a) P_B(b)`.
#[derive(Clone, Debug)]
struct Space {
    a: Vec<f64>,
    b: Vec<f64>,
    base: RaceProcess,
}

impl Space {
    fn new(a: &[f64], b: Vec<f64>) -> Result<Self> {
        check_budget(a.len() as f64 * b.len() as f64)?;
        let rates = a.iter().flat_map(|&pa| b.iter().map(move |&pb| pa * pb)).collect();
        Ok(Self { a: a.to_vec(), b, base: RaceProcess::from_rates(rates, 0)? })
    }

    /// `P_A × Unif[1:l]`.
    fn messages(a: &[f64], l: usize) -> Result<Self> {
        Self::new(a, vec![1.0 / l as f64; l])
    }

    fn process(&self, seed: u64) -> RaceProcess {
        let mut p = self.base.clone();
        p.reseed(seed);
        p
    }

    fn split(&self, atom: usize) -> (usize, usize) {
        (atom / self.b.len(), atom % self.b.len())
    }

    /// View of the pmf `f(a, b)`.
    fn view(&self, f: impl Fn(usize, usize) -> f64) -> View {
        let nb = self.b.len();
        let mut d = vec![0.0; self.a.len() * nb];
        for (ai, &pa) in self.a.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (bi, &pb) in self.b.iter().enumerate() {
                if pb > 0.0 {
                    let v = f(ai, bi);
                    if v > 0.0 {
                        d[ai * nb + bi] = v / (pa * pb);
                    }
                }
            }
        }
        View::from_density(d)
    }

    /// `P × δ_m`.
    fn slice(&self, p: &[f64], m: usize) -> View {
        self.view(|a, b| if b == m { p[a] } else { 0.0 })
    }

    /// `P × P_B`.
    fn full(&self, p: &[f64]) -> View {
        self.view(|a, b| p[a] * self.b[b])
    }

    fn select(&self, proc: &mut RaceProcess, view: &View) -> Result<(usize, usize)> {
        Ok(self.split(proc.pfr_select(view)?.atom))
    }

    fn list(&self, proc: &mut RaceProcess, view: &View, k: usize) -> Result<Vec<(usize, usize)>> {
        Ok(proc.pfr_list(view, k)?.into_iter().map(|p| self.split(p.atom)).collect())
    }
}

/// `P(target | given)` read off a joint, one dense row per given tuple
/// (first given axis most significant).
#[derive(Clone, Debug)]
struct Cond {
    width: usize,
    rows: Vec<f64>,
}

fn gather(t: &[usize], axes: &[usize], dims: &[usize]) -> usize {
    axes.iter().fold(0, |acc, &a| acc * dims[a] + t[a])
}

impl Cond {
    fn new(joint: &JointPmf, target: &[usize], given: &[usize]) -> Result<Self> {
        let dims = joint.dims();
        let width: usize = target.iter().map(|&a| dims[a]).product();
        let height: usize = given.iter().map(|&a| dims[a]).product();
        check_budget(width as f64 * height as f64)?;
        let mut rows = vec![0.0; width * height];
        for (t, w) in joint.support() {
            rows[gather(&t, given, dims) * width + gather(&t, target, dims)] += w;
        }
        for r in rows.chunks_mut(width) {
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                r.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(Self { width, rows })
    }

    fn row(&self, g: usize) -> &[f64] {
        &self.rows[g * self.width..(g + 1) * self.width]
    }
}

/// Exact `φ(1..=k)` and the remaining mass.
fn phi_weights(k: usize) -> Result<(Vec<f64>, f64)> {
    if k == 0 {
        return Err(invalid("phi_terms must be at least 1"));
    }
    Ok(phi_constant().head(k))
}

// ---------------------------------------------------------------- point-to-point channel

/// Channel code on one realization of the race over `X × [1:L]`.
#[derive(Clone, Debug)]
pub struct ChannelCode {
    model: ChannelModel,
    space: Space,
}

impl ChannelCode {
    pub fn new(model: &ChannelModel, l: u64) -> Result<Self> {
        model.validate()?;
        let l = count("L", l)?;
        Ok(Self { model: model.clone(), space: Space::messages(model.p_x.weights(), l)? })
    }

    /// `X̃_{P_X × δ_m}`.
    pub fn encode(&self, seed: u64, m: usize) -> Result<usize> {
        let mut proc = self.space.process(seed);
        Ok(self.space.select(&mut proc, &self.space.slice(self.model.p_x.weights(), m))?.0)
    }

    /// The first `j` messages of the `P_{X|Y}(·|y) × P_M` sequence.
    pub fn decode_list(&self, seed: u64, y: usize, j: usize) -> Result<Vec<usize>> {
        let mut proc = self.space.process(seed);
        let post = self.model.channel.posterior(&self.model.p_x, y);
        Ok(self.space.list(&mut proc, &self.space.full(&post), j)?.into_iter().map(|(_, m)| m).collect())
    }

    pub fn decode(&self, seed: u64, y: usize) -> Result<usize> {
        let mut proc = self.space.process(seed);
        let post = self.model.channel.posterior(&self.model.p_x, y);
        Ok(self.space.select(&mut proc, &self.space.full(&post))?.1)
    }
}

fn channel_run(
    setting: Setting,
    model: &ChannelModel,
    p: &ChannelParams,
    cfg: &RunConfig,
    list: usize,
    bound_name: &str,
) -> Result<EmpiricalResult> {
    let report = channel_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, ChannelModel::power)?;
    let code = ChannelCode::new(&m, p.l)?;
    let l = p.l as usize;
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let msg = rng.gen_range(0..l);
        let x = code.encode(seed, msg)?;
        let y = m.channel.sample(x, &mut rng);
        let decoded = code.decode_list(seed, y, list)?;
        let fail = !decoded.contains(&msg);
        Ok(Outcome::binary(fail).traced(want, || json!({"trial": i, "m": msg, "x": x, "y": y, "decoded": decoded})))
    })?;
    finish(setting, echo(p)?, cfg, t, &report, bound_name, Interval::Wilson)
}

/// Message `M` sent as `X̃_{P_X × δ_M}`, decoded from `P_{X|Y}(·|Y) × P_M`.
/// Paired with `prop1`.
pub fn simulate_channel(model: &ChannelModel, p: &ChannelParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    channel_run(Setting::Channel, model, p, cfg, 1, "prop1")
}

/// The same decoder returning its first `J` messages. Paired with `list`.
pub fn simulate_channel_list(model: &ChannelModel, p: &ChannelParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let j = count("J", p.j)?;
    channel_run(Setting::ChannelList, model, p, cfg, j, "list")
}

/// Rank code on the race over `X` alone: `m ↦ X̃_{P_X}(m)`, `y ↦ Υ_{P_{X|Y}(·|y) ∥ P_X}(1)`.
/// Neither side uses `L`.
#[derive(Clone, Debug)]
pub struct RankCode {
    model: ChannelModel,
    space: Space,
    prior: View,
}

impl RankCode {
    pub fn new(model: &ChannelModel) -> Result<Self> {
        model.validate()?;
        let space = Space::new(model.p_x.weights(), vec![1.0])?;
        let prior = space.full(model.p_x.weights());
        Ok(Self { model: model.clone(), space, prior })
    }

    /// `m` is 1-based.
    pub fn encode(&self, seed: u64, m: usize) -> Result<usize> {
        let mut proc = self.space.process(seed);
        Ok(self.space.split(proc.pfr_nth(&self.prior, m)?.atom).0)
    }

    pub fn decode(&self, seed: u64, y: usize) -> Result<Rank> {
        let mut proc = self.space.process(seed);
        let post = self.model.channel.posterior(&self.model.p_x, y);
        let pt = proc.pfr_select(&self.space.full(&post))?;
        Ok(proc.rank_of(&pt, &self.prior))
    }
}

/// Rank decoding. With `m` set every trial sends that message and the result
/// is paired with `rank`; otherwise `M ~ Unif[1:L]` and the pair is `thm2`.
pub fn simulate_channel_rank(model: &ChannelModel, p: &ChannelParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = channel_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, ChannelModel::power)?;
    let code = RankCode::new(&m)?;
    let l = count("L", p.l)?;
    let fixed = p.m.map(|v| count("m", v)).transpose()?;
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let msg = match fixed {
            Some(v) => v,
            None => rng.gen_range(1..=l),
        };
        let x = code.encode(seed, msg)?;
        let y = m.channel.sample(x, &mut rng);
        let rank = code.decode(seed, y)?;
        let fail = rank != Rank::Finite(msg as u64);
        Ok(Outcome::binary(fail).traced(want, || json!({"trial": i, "m": msg, "x": x, "y": y, "rank": rank.finite()})))
    })?;
    let name = if fixed.is_some() { "rank" } else { "thm2" };
    finish(Setting::ChannelRank, echo(p)?, cfg, t, &report, name, Interval::Wilson)
}

// ---------------------------------------------------------------- gelfand-pinsker

/// `(m, s) ↦ x(Ũ_{P_{U|S}(·|s) × δ_m}, s)`, decoded from `P_{U|Y}(·|Y) × P_M`.
pub fn simulate_gp(model: &GpModel, p: &GpParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = gp_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, GpModel::power)?;
    let joint = m.joint()?;
    let u_y = Cond::new(&joint, &[1], &[2])?;
    let l = count("L", p.l)?;
    let space = Space::messages(joint.axis_marginal(1), l)?;
    let ns = m.n_s();
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let s = m.p_s.sample(&mut rng);
        let msg = rng.gen_range(0..l);
        let mut enc = space.process(proc_seed(seed, 0));
        let (u, _) = space.select(&mut enc, &space.slice(m.p_u_given_s.row(s), msg))?;
        let x = m.x_fn.get2(u, s);
        let y = m.channel.sample(x * ns + s, &mut rng);
        let mut dec = space.process(proc_seed(seed, 0));
        let (_, mh) = space.select(&mut dec, &space.full(u_y.row(y)))?;
        Ok(Outcome::binary(mh != msg)
            .traced(want, || json!({"trial": i, "m": msg, "s": s, "u": u, "x": x, "y": y, "m_hat": mh})))
    })?;
    finish(Setting::Gp, echo(p)?, cfg, t, &report, "thm3", Interval::Wilson)
}

// ---------------------------------------------------------------- wyner-ziv

/// `x ↦ M̃_{P_{U|X}(·|x) × P_M}`, `(m, y) ↦ z(Ũ_{P_{U|Y}(·|y) × δ_m}, y)`.
pub fn simulate_wz(model: &WzModel, p: &WzParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = wz_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, WzModel::power)?;
    let joint = m.joint()?;
    let u_y = Cond::new(&joint, &[2], &[1])?;
    let l = count("L", p.l)?;
    let space = Space::messages(joint.axis_marginal(2), l)?;
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let x = m.p_x.sample(&mut rng);
        let y = m.side.sample(x, &mut rng);
        let mut enc = space.process(proc_seed(seed, 0));
        let (u, msg) = space.select(&mut enc, &space.full(m.p_u_given_x.row(x)))?;
        let mut dec = space.process(proc_seed(seed, 0));
        let (uh, _) = space.select(&mut dec, &space.slice(u_y.row(y), msg))?;
        let d = m.distortion_at(x, uh, y);
        Ok(Outcome::binary(!within(d, p.d))
            .traced(want, || json!({"trial": i, "x": x, "y": y, "u": u, "m": msg, "u_hat": uh, "distortion": d})))
    })?;
    finish(Setting::Wz, echo(p)?, cfg, t, &report, "thm4", Interval::Wilson)
}

// ---------------------------------------------------------------- joint source-channel

/// Race over `X × Z`. The encoder selects through `P_X × P_{Ž|W}(·|w)`, the
/// reproduction restricted to the distortion ball; the decoder through
/// `P_{X|Y}(·|y) × P_Z`.
pub fn simulate_jscc(model: &JsccModel, p: &JsccParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = jscc_bounds(model, p, &cfg.bound)?;
    let m = model;
    let space = Space::new(m.p_x.weights(), m.p_z.weights().to_vec())?;
    let pz = m.p_z.weights();
    let px = m.p_x.weights();
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let w = m.p_w.sample(&mut rng);
        let rho = m.ball(w, p.d);
        let enc_view = space.view(|x, z| {
            let tilted = if rho > 0.0 {
                if m.distortion.get(w, z) <= p.d {
                    pz[z] / rho
                } else {
                    0.0
                }
            } else {
                pz[z]
            };
            px[x] * tilted
        });
        let mut enc = space.process(proc_seed(seed, 0));
        let (x, z_check) = space.select(&mut enc, &enc_view)?;
        let y = m.channel.sample(x, &mut rng);
        let post = m.channel.posterior(&m.p_x, y);
        let mut dec = space.process(proc_seed(seed, 0));
        let (_, zh) = space.select(&mut dec, &space.full(&post))?;
        let d = m.distortion.get(w, zh);
        Ok(Outcome::binary(d > p.d).traced(
            want,
            || json!({"trial": i, "w": w, "x": x, "z_check": z_check, "y": y, "z_hat": zh, "distortion": d}),
        ))
    })?;
    finish(Setting::Jscc, echo(p)?, cfg, t, &report, "thm5", Interval::Wilson)
}

// ---------------------------------------------------------------- broadcast

/// Draws the sub-codebook index `k ∝ w_k`.
fn resample<R: Rng>(w: &[f64], rng: &mut R) -> Result<usize> {
    if !w.iter().any(|&v| v > 0.0) {
        return Err(invalid("selected auxiliary has zero weight under every sub-codeword"));
    }
    Ok(sample_weights(w, rng))
}

/// Two independent races, `U1 × [1:L1]` and `U2 × [1:L2]`. The encoder lists
/// `J` sub-codewords `Ǔ1j` for `M1`, selects `U2` through the `J`-mixture of
/// `P_{U2|U1}(·|Ǔ1j)`, then resamples which `Ǔ1j` becomes `U1`.
pub fn simulate_bc_marton(model: &MartonModel, p: &MartonParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = marton_bounds(model, p, &cfg.bound)?;
    let m = &power_of(model, p.n, MartonModel::power)?;
    let joint = m.joint()?;
    let (l1, l2, j) = (count("L1", p.l1)?, count("L2", p.l2)?, count("J", p.j)?);
    let u2_u1 = Cond::new(&joint, &[1], &[0])?;
    let u1_y1 = Cond::new(&joint, &[0], &[2])?;
    let u2_y2 = Cond::new(&joint, &[1], &[3])?;
    let s1 = Space::messages(joint.axis_marginal(0), l1)?;
    let s2 = Space::messages(joint.axis_marginal(1), l2)?;
    let n2 = joint.dims()[1];
    let ny2 = m.y_dims[1];
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let (m1, m2) = (rng.gen_range(0..l1), rng.gen_range(0..l2));
        let mut p1 = s1.process(proc_seed(seed, 1));
        let sub: Vec<usize> =
            s1.list(&mut p1, &s1.slice(joint.axis_marginal(0), m1), j)?.into_iter().map(|(u, _)| u).collect();
        let mut mix = vec![0.0; n2];
        for &u1 in &sub {
            for (v, &q) in mix.iter_mut().zip(u2_u1.row(u1)) {
                *v += q / j as f64;
            }
        }
        let mut p2 = s2.process(proc_seed(seed, 2));
        let (u2, _) = s2.select(&mut p2, &s2.slice(&mix, m2))?;
        let w: Vec<f64> = sub.iter().map(|&u1| u2_u1.row(u1)[u2]).collect();
        let k = resample(&w, &mut rng)?;
        let u1 = sub[k];
        let x = m.x_fn.get2(u1, u2);
        let out = m.channel.sample(x, &mut rng);
        let (y1, y2) = (out / ny2, out % ny2);
        let mut d1 = s1.process(proc_seed(seed, 1));
        let (_, m1h) = s1.select(&mut d1, &s1.full(u1_y1.row(y1)))?;
        let mut d2 = s2.process(proc_seed(seed, 2));
        let (_, m2h) = s2.select(&mut d2, &s2.full(u2_y2.row(y2)))?;
        Ok(Outcome::binary((m1h, m2h) != (m1, m2)).traced(want, || {
            json!({"trial": i, "m": [m1, m2], "sub": sub, "k": k, "u": [u1, u2], "x": x, "y": [y1, y2], "m_hat": [m1h, m2h]})
        }))
    })?;
    finish(Setting::BcMarton, echo(p)?, cfg, t, &report, "thm8", Interval::Wilson)
}

/// Three races: `U0 × [1:L0]`, `U1 × [1:L0] × [1:L1]` and `U2 × [1:L0] × [1:L2]`.
/// Rate splitting is not simulated, so `K1 = K2 = 1` is required.
pub fn simulate_bc_common(model: &BcCommonModel, p: &BcCommonParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    if p.k1 != 1 || p.k2 != 1 {
        return Err(invalid("the simulator implements K1 = K2 = 1 only"));
    }
    let report = bc_common_bounds(model, p, &cfg.bound)?;
    let m = &power_of(model, p.n, BcCommonModel::power)?;
    let joint = m.joint()?;
    let dims = joint.dims().to_vec();
    let (l0, l1, l2, j) = (count("L0", p.l0)?, count("L1", p.l1)?, count("L2", p.l2)?, count("J", p.j)?);
    let (phi, tail) = phi_weights(cfg.phi_terms)?;
    let u1_u0 = Cond::new(&joint, &[1], &[0])?;
    let u2_u0u1 = Cond::new(&joint, &[2], &[0, 1])?;
    let u0_y = [Cond::new(&joint, &[0], &[3])?, Cond::new(&joint, &[0], &[4])?];
    let ua_u0y = [Cond::new(&joint, &[1], &[0, 3])?, Cond::new(&joint, &[2], &[0, 4])?];
    let ua_y = [Cond::new(&joint, &[1], &[3])?, Cond::new(&joint, &[2], &[4])?];
    let s0 = Space::messages(joint.axis_marginal(0), l0)?;
    let sa = [Space::messages(joint.axis_marginal(1), l0 * l1)?, Space::messages(joint.axis_marginal(2), l0 * l2)?];
    let la = [l1, l2];
    let (n0, ny) = (dims[0], [dims[3], dims[4]]);
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let (m0, m1, m2) = (rng.gen_range(0..l0), rng.gen_range(0..l1), rng.gen_range(0..l2));
        // encoder
        let mut p0 = s0.process(proc_seed(seed, 0));
        let (u0, _) = s0.select(&mut p0, &s0.slice(joint.axis_marginal(0), m0))?;
        let mut p1 = sa[0].process(proc_seed(seed, 1));
        let sub: Vec<usize> = sa[0]
            .list(&mut p1, &sa[0].slice(u1_u0.row(u0), m0 * l1 + m1), j)?
            .into_iter()
            .map(|(u, _)| u)
            .collect();
        let mut mix = vec![0.0; dims[2]];
        for &u1 in &sub {
            for (v, &q) in mix.iter_mut().zip(u2_u0u1.row(u0 * dims[1] + u1)) {
                *v += q / j as f64;
            }
        }
        let mut p2 = sa[1].process(proc_seed(seed, 2));
        let (u2, _) = sa[1].select(&mut p2, &sa[1].slice(&mix, m0 * l2 + m2))?;
        let w: Vec<f64> = sub.iter().map(|&u1| u2_u0u1.row(u0 * dims[1] + u1)[u2]).collect();
        let u1 = sub[resample(&w, &mut rng)?];
        let x = m.x_fn.get(&[u0, u1, u2]);
        let out = m.channel.sample(x, &mut rng);
        let y = [out / m.y_dims[1], out % m.y_dims[1]];
        // decoders
        let mut decoded = [(0usize, 0usize); 2];
        for a in 0..2 {
            let mut q0 = s0.process(proc_seed(seed, 0));
            let list = s0.list(&mut q0, &s0.full(u0_y[a].row(y[a])), phi.len())?;
            let mut w0 = vec![0.0; n0 * l0];
            for (&(u0c, m0c), &f) in list.iter().zip(&phi) {
                w0[u0c * l0 + m0c] += f;
            }
            // g(u_a, m0) = Σ_{u0} w0(u0, m0) P(u_a | u0, y_a) + tail P(u_a | y_a) / L0
            let na = dims[1 + a];
            let mut g = vec![0.0; na * l0];
            for u0c in 0..n0 {
                for m0c in 0..l0 {
                    let wt = w0[u0c * l0 + m0c];
                    if wt > 0.0 {
                        for (ua, &q) in ua_u0y[a].row(u0c * ny[a] + y[a]).iter().enumerate() {
                            g[ua * l0 + m0c] += wt * q;
                        }
                    }
                }
            }
            for (ua, &q) in ua_y[a].row(y[a]).iter().enumerate() {
                for m0c in 0..l0 {
                    g[ua * l0 + m0c] += tail * q / l0 as f64;
                }
            }
            let lm = la[a];
            let view = sa[a].view(|ua, msg| g[ua * l0 + msg / lm] / lm as f64);
            let mut qa = sa[a].process(proc_seed(seed, 1 + a as u64));
            let (_, msg) = sa[a].select(&mut qa, &view)?;
            decoded[a] = (msg / lm, msg % lm);
        }
        let fail = decoded[0] != (m0, m1) || decoded[1] != (m0, m2);
        Ok(Outcome::binary(fail).traced(want, || {
            json!({"trial": i, "m": [m0, m1, m2], "u": [u0, u1, u2], "x": x, "y": y,
                   "decoded_1": [decoded[0].0, decoded[0].1], "decoded_2": [decoded[1].0, decoded[1].1]})
        }))
    })?;
    finish(Setting::BcCommon, echo(p)?, cfg, t, &report, "thm7", Interval::Wilson)
}

// ---------------------------------------------------------------- distributed lossy source coding

/// Two encoders `M_j = M̃_{P_{Uj|Xj}(·|Xj) × P_{Mj}}` on independent races.
/// The decoder lists `Ǔ1k` from `P_{U1} × δ_{M1}`, selects `Û2` through the
/// φ-mixture of `P_{U2|U1}(·|Ǔ1k)`, then `Û1` from `P_{U1|U2}(·|Û2) × δ_{M1}`.
pub fn simulate_dlsc(model: &DlscModel, p: &DlscParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = dlsc_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, DlscModel::power)?;
    let joint = m.joint()?;
    let dims = joint.dims().to_vec();
    let (l1, l2) = (count("L1", p.l1)?, count("L2", p.l2)?);
    let (phi, tail) = phi_weights(cfg.phi_terms)?;
    let u2_u1 = Cond::new(&joint, &[3], &[2])?;
    let u1_u2 = Cond::new(&joint, &[2], &[3])?;
    let pu1 = joint.axis_marginal(2);
    let pu2 = joint.axis_marginal(3);
    let s1 = Space::messages(pu1, l1)?;
    let s2 = Space::messages(pu2, l2)?;
    let xdims = m.p_x.dims().to_vec();
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let xs = decode(&xdims, m.p_x.pmf().sample(&mut rng));
        let (x1, x2) = (xs[0], xs[1]);
        let mut e1 = s1.process(proc_seed(seed, 1));
        let (u1, m1) = s1.select(&mut e1, &s1.full(m.k1.row(x1)))?;
        let mut e2 = s2.process(proc_seed(seed, 2));
        let (u2, m2) = s2.select(&mut e2, &s2.full(m.k2.row(x2)))?;
        // decoder
        let mut d1 = s1.process(proc_seed(seed, 1));
        let list = s1.list(&mut d1, &s1.slice(pu1, m1), phi.len())?;
        let mut w1 = vec![0.0; dims[2]];
        for (&(uc, _), &f) in list.iter().zip(&phi) {
            w1[uc] += f;
        }
        let mut mix: Vec<f64> = pu2.iter().map(|&q| tail * q).collect();
        for (uc, &wt) in w1.iter().enumerate() {
            if wt > 0.0 {
                for (v, &q) in mix.iter_mut().zip(u2_u1.row(uc)) {
                    *v += wt * q;
                }
            }
        }
        let mut d2 = s2.process(proc_seed(seed, 2));
        let (u2h, _) = s2.select(&mut d2, &s2.slice(&mix, m2))?;
        let (u1h, _) = s1.select(&mut d1, &s1.slice(u1_u2.row(u2h), m1))?;
        let z1 = m.z1_fn.get2(u1h, u2h);
        let z2 = m.z2_fn.get2(u1h, u2h);
        let (dd1, dd2) = (m.d1.get(x1, z1), m.d2.get(x2, z2));
        let fail = !(within(dd1, p.d1) && within(dd2, p.d2));
        Ok(Outcome::binary(fail).traced(want, || {
            json!({"trial": i, "x": [x1, x2], "u": [u1, u2], "m": [m1, m2], "u_hat": [u1h, u2h], "distortion": [dd1, dd2]})
        }))
    })?;
    finish(Setting::Dlsc, echo(p)?, cfg, t, &report, "phi", Interval::Wilson)
}

// ---------------------------------------------------------------- multiple access

/// `Xj = X̃_{P_{Xj} × δ_{Mj}}` on independent races. The decoder lists
/// `X̌1k` from `P_{X1|Y}(·|Y) × P_{M1}`, selects `(X̂2, M̂2)` through the
/// φ-mixture of `P_{X2|X1,Y}(·|X̌1k, Y)`, then `M̂1` from `P_{X1|X2,Y}(·|X̂2, Y) × P_{M1}`.
pub fn simulate_mac(model: &MacModel, p: &MacParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = mac_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, MacModel::power)?;
    let joint = m.joint()?;
    let dims = joint.dims().to_vec();
    let (l1, l2) = (count("L1", p.l1)?, count("L2", p.l2)?);
    let (phi, tail) = phi_weights(cfg.phi_terms)?;
    let x1_y = Cond::new(&joint, &[0], &[2])?;
    let x2_x1y = Cond::new(&joint, &[1], &[0, 2])?;
    let x2_y = Cond::new(&joint, &[1], &[2])?;
    let x1_x2y = Cond::new(&joint, &[0], &[1, 2])?;
    let s1 = Space::messages(m.p_x1.weights(), l1)?;
    let s2 = Space::messages(m.p_x2.weights(), l2)?;
    let (n2, ny) = (dims[1], dims[2]);
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let (m1, m2) = (rng.gen_range(0..l1), rng.gen_range(0..l2));
        let mut e1 = s1.process(proc_seed(seed, 1));
        let (x1, _) = s1.select(&mut e1, &s1.slice(m.p_x1.weights(), m1))?;
        let mut e2 = s2.process(proc_seed(seed, 2));
        let (x2, _) = s2.select(&mut e2, &s2.slice(m.p_x2.weights(), m2))?;
        let y = m.channel.sample(x1 * n2 + x2, &mut rng);
        // decoder
        let mut d1 = s1.process(proc_seed(seed, 1));
        let list = s1.list(&mut d1, &s1.full(x1_y.row(y)), phi.len())?;
        let mut w1 = vec![0.0; dims[0]];
        for (&(xc, _), &f) in list.iter().zip(&phi) {
            w1[xc] += f;
        }
        let mut mix: Vec<f64> = x2_y.row(y).iter().map(|&q| tail * q).collect();
        for (xc, &wt) in w1.iter().enumerate() {
            if wt > 0.0 {
                for (v, &q) in mix.iter_mut().zip(x2_x1y.row(xc * ny + y)) {
                    *v += wt * q;
                }
            }
        }
        let mut d2 = s2.process(proc_seed(seed, 2));
        let (x2h, m2h) = s2.select(&mut d2, &s2.full(&mix))?;
        let (_, m1h) = s1.select(&mut d1, &s1.full(x1_x2y.row(x2h * ny + y)))?;
        Ok(Outcome::binary((m1h, m2h) != (m1, m2)).traced(want, || {
            json!({"trial": i, "m": [m1, m2], "x": [x1, x2], "y": y, "x2_hat": x2h, "m_hat": [m1h, m2h]})
        }))
    })?;
    finish(Setting::Mac, echo(p)?, cfg, t, &report, "thm10", Interval::Wilson)
}

// ---------------------------------------------------------------- resolvability

/// Whether every input in the support of `P_X` has the same channel row,
/// i.e. `X ⟂ Y`; codebook TV is then exactly zero.
fn independent(model: &ChannelModel) -> bool {
    let mut rows = model.p_x.support().map(|x| model.channel.row(x));
    let first = rows.next();
    rows.all(|r| Some(r) == first)
}

fn mixture_tv(model: &ChannelModel, py: &Pmf, codebook: impl Iterator<Item = usize>) -> f64 {
    let mut out = vec![0.0; py.len()];
    let mut l = 0usize;
    for x in codebook {
        for (o, &k) in out.iter_mut().zip(model.channel.row(x)) {
            *o += k;
        }
        l += 1;
    }
    out.iter_mut().for_each(|v| *v /= l as f64);
    tv(&out, py.weights())
}

/// Exact `‖L⁻¹ Σ_m P_{Y|X}(·|x_m) − P_Y‖_TV` for one codebook.
pub fn codebook_tv(model: &ChannelModel, codebook: &[usize]) -> Result<f64> {
    if codebook.is_empty() {
        return Err(invalid("empty codebook"));
    }
    if independent(model) {
        return Ok(0.0);
    }
    let py = model.channel.output_marginal(&model.p_x)?;
    Ok(mixture_tv(model, &py, codebook.iter().copied()))
}

/// Mean exact total variation over i.i.d. `P_X` codebooks of size `L`.
pub fn simulate_resolvability(
    model: &ChannelModel,
    p: &ResolvabilityParams,
    cfg: &RunConfig,
) -> Result<EmpiricalResult> {
    let report = resolvability_bounds(model, p, &cfg.bound)?;
    let m = power_of(model, p.n, ChannelModel::power)?;
    let l = count("L", p.l)?;
    let py = m.channel.output_marginal(&m.p_x)?;
    let flat = independent(&m);
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let book: Vec<usize> = (0..l).map(|_| m.p_x.sample(&mut rng)).collect();
        let d = if flat { 0.0 } else { mixture_tv(&m, &py, book.into_iter()) };
        Ok(Outcome { fail: d > 0.0, value: d, aux: 0.0, trace: None }.traced(want, || json!({"trial": i, "tv": d})))
    })?;
    finish(Setting::Resolvability, echo(p)?, cfg, t, &report, "pe1", Interval::Normal)
}

// ---------------------------------------------------------------- wiretap

/// `U = Ũ_{P_U × δ_M}(K)` with `K ~ Unif[1:K]`, `X ~ P_{X|U}`; the legitimate
/// decoder uses `P_{U|Y}(·|Y) × P_M`. Secrecy is the exact
/// `‖P_{M,Z} − P_M × P_Z‖_TV` of the realized codebook. The estimate is
/// `P_e + ν ε`, with both parts reported as components.
pub fn simulate_wiretap(model: &WiretapModel, p: &WiretapParams, cfg: &RunConfig) -> Result<EmpiricalResult> {
    let report = wiretap_bounds(model, p, &cfg.bound)?;
    let m = &power_of(model, p.n, WiretapModel::power)?;
    let joint = m.joint()?;
    let (l, k) = (count("L", p.l)?, count("K", p.k)?);
    let x_u = m.x_given_u()?;
    let u_y = Cond::new(&joint, &[0], &[2])?;
    let z_u = Cond::new(&joint, &[3], &[0])?;
    let pu = joint.axis_marginal(0);
    let space = Space::messages(pu, l)?;
    let nz = m.y_dims[1];
    let t = run(cfg, |i, seed, want| {
        let mut rng = aux_rng(seed, tag::AUX);
        let msg = rng.gen_range(0..l);
        let kk = rng.gen_range(1..=k);
        let mut enc = space.process(proc_seed(seed, 0));
        let u = space.split(enc.pfr_nth(&space.slice(pu, msg), kk)?.atom).0;
        let x = x_u.sample(u, &mut rng);
        let out = m.channel.sample(x, &mut rng);
        let (y, z) = (out / nz, out % nz);
        let mut dec = space.process(proc_seed(seed, 0));
        let (_, mh) = space.select(&mut dec, &space.full(u_y.row(y)))?;
        // eavesdropper's view of the whole codebook
        let mut book = space.process(proc_seed(seed, 0));
        let mut pz_m = vec![vec![0.0; nz]; l];
        for (mm, row) in pz_m.iter_mut().enumerate() {
            for (uc, _) in space.list(&mut book, &space.slice(pu, mm), k)? {
                for (v, &q) in row.iter_mut().zip(z_u.row(uc)) {
                    *v += q / k as f64;
                }
            }
        }
        let mut pz = vec![0.0; nz];
        for row in &pz_m {
            for (v, &q) in pz.iter_mut().zip(row) {
                *v += q / l as f64;
            }
        }
        let eps = pz_m.iter().map(|r| tv(r, &pz)).sum::<f64>() / l as f64;
        let fail = mh != msg;
        let value = if fail { 1.0 } else { 0.0 } + p.nu * eps;
        Ok(Outcome { fail, value, aux: eps, trace: None }
            .traced(want, || json!({"trial": i, "m": msg, "k": kk, "u": u, "x": x, "y": y, "z": z, "m_hat": mh, "eps": eps})))
    })?;
    let components = BTreeMap::from([
        ("error".to_string(), Estimate::wilson(t.fails, t.n)),
        ("secrecy".to_string(), Estimate::normal(t.aux, t.aux_sq, t.n)),
    ]);
    let mut r = finish(Setting::Wiretap, echo(p)?, cfg, t, &report, "total", Interval::Normal)?;
    r.components = components;
    Ok(r)
}
