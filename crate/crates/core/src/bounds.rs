//! Numeric evaluation of the one-shot bounds and the bounds they are compared
//! against. Each setting reduces its joint to a table of per-atom statistics
//! (information densities, distortions) that add up over letters, so the same
//! table serves the one-shot case and its i.i.d. n-fold extension.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    BcCommonModel, ChannelModel, DlscModel, GpModel, JsccModel, MacModel, MartonModel, Setting, WiretapModel,
    WzModel,
};
use crate::prob::{Density, JointPmf};
use crate::rng::aux_rng;

/// Comparison tolerance for the dominance checks.
pub const CHECK_TOL: f64 = 1e-12;

const CHUNK: usize = 1 << 14;
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRequest {
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    /// Largest number of n-fold support atoms summed exactly.
    pub exact_threshold: u64,
    pub mc_samples: u64,
    pub seed: u64,
    pub mode: ModeRequest,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { exact_threshold: 10_000_000, mc_samples: 1_000_000, seed: 0, mode: ModeRequest::Auto }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    Exact { atoms: u64, mass: f64 },
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub setting: Setting,
    pub params: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    /// 95% intervals, Monte Carlo mode only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ci: BTreeMap<String, [f64; 2]>,
    /// Dominance relations that must hold.
    pub checks: BTreeMap<String, bool>,
    pub mode: Mode,
}

impl BoundReport {
    pub fn get(&self, name: &str) -> Result<f64> {
        self.bounds
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("report for {} has no bound named '{name}'", self.setting)))
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    fn check(&mut self, name: &str, lhs: &str, rhs: &str, factor: f64) {
        let (a, b) = (self.bounds[lhs], self.bounds[rhs]);
        self.checks.insert(name.to_string(), a <= factor * b + CHECK_TOL);
    }
}

/// Per-atom statistics of a joint, row-major with `width` columns.
#[derive(Clone, Debug)]
pub struct StatTable {
    width: usize,
    weights: Vec<f64>,
    stats: Vec<f64>,
}

impl StatTable {
    pub fn build(joint: &JointPmf, width: usize, f: impl Fn(&[usize], &mut [f64])) -> Self {
        let mut weights = Vec::new();
        let mut stats = Vec::new();
        let mut row = vec![0.0; width];
        for (t, w) in joint.support() {
            f(&t, &mut row);
            weights.push(w);
            stats.extend_from_slice(&row);
        }
        Self { width, weights, stats }
    }

    /// Builds a table of the listed information densities, in order.
    pub fn densities(joint: &JointPmf, terms: &[(&[usize], &[usize], &[usize])]) -> Result<Self> {
        let ds: Vec<Density> = terms.iter().map(|(a, b, c)| Density::new(joint, a, b, c)).collect::<Result<_>>()?;
        Ok(Self::build(joint, ds.len(), |t, row| {
            for (r, d) in row.iter_mut().zip(&ds) {
                *r = d.eval(t);
            }
        }))
    }

    /// Appends columns computed from the joint tuple.
    pub fn with_columns(mut self, joint: &JointPmf, extra: usize, f: impl Fn(&[usize], &mut [f64])) -> Self {
        let w = self.width + extra;
        let mut stats = Vec::with_capacity(self.weights.len() * w);
        let mut add = vec![0.0; extra];
        for (i, (t, _)) in joint.support().enumerate() {
            stats.extend_from_slice(self.row(i));
            f(&t, &mut add);
            stats.extend_from_slice(&add);
        }
        self.width = w;
        self.stats = stats;
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.stats[i * self.width..(i + 1) * self.width]
    }

    /// Mean and variance of column `k` under the one-letter law.
    pub fn moments(&self, k: usize) -> (f64, f64) {
        let m: f64 = (0..self.len()).map(|i| self.weights[i] * self.row(i)[k]).sum();
        let v: f64 = (0..self.len()).map(|i| self.weights[i] * (self.row(i)[k] - m).powi(2)).sum();
        (m, v)
    }
}

/// Expectations of `g(summed stats)` over n i.i.d. letters.
#[derive(Clone, Debug)]
pub struct Expectation {
    pub means: Vec<f64>,
    /// 95% half-widths in Monte Carlo mode.
    pub half_widths: Option<Vec<f64>>,
    pub mode: Mode,
}

pub fn expect<G>(table: &StatTable, n: usize, outputs: usize, opts: &EvalOptions, g: G) -> Result<Expectation>
where
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    if n == 0 {
        return Err(invalid("blocklength n must be at least 1"));
    }
    let atoms = (table.len() as f64).powi(n as i32);
    let exact = match opts.mode {
        ModeRequest::Exact => true,
        ModeRequest::MonteCarlo => false,
        ModeRequest::Auto => atoms <= opts.exact_threshold as f64,
    };
    if exact {
        if atoms > u64::MAX as f64 / 2.0 || atoms > opts.exact_threshold.max(1) as f64 * 16.0 {
            return Err(Error::Capacity { needed: atoms, budget: opts.exact_threshold });
        }
        Ok(exact_sum(table, n, atoms as usize, outputs, &g))
    } else {
        if opts.mc_samples < 2 {
            return Err(invalid("Monte Carlo mode needs at least 2 samples"));
        }
        Ok(monte_carlo(table, n, outputs, opts, &g))
    }
}

fn exact_sum<G>(table: &StatTable, n: usize, total: usize, outputs: usize, g: &G) -> Expectation
where
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    let s = table.len();
    let w = table.width();
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; outputs];
            let mut mass = 0.0;
            let mut out = vec![0.0; outputs];
            let mut sum = vec![0.0; w];
            let mut digits = vec![0usize; n];
            let start = c * CHUNK;
            let mut idx = start;
            for d in digits.iter_mut().rev() {
                *d = idx % s;
                idx /= s;
            }
            for _ in start..(start + CHUNK).min(total) {
                let mut p = 1.0;
                sum.iter_mut().for_each(|x| *x = 0.0);
                for &d in &digits {
                    p *= table.weights[d];
                    for (x, v) in sum.iter_mut().zip(table.row(d)) {
                        *x += v;
                    }
                }
                g(&sum, &mut out);
                for (a, o) in acc.iter_mut().zip(&out) {
                    *a += p * o;
                }
                mass += p;
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < s {
                        break;
                    }
                    *d = 0;
                }
            }
            (acc, mass)
        })
        .collect();
    let mut means = vec![0.0; outputs];
    let mut mass = 0.0;
    for (acc, m) in parts {
        for (a, x) in means.iter_mut().zip(acc) {
            *a += x;
        }
        mass += m;
    }
    Expectation { means, half_widths: None, mode: Mode::Exact { atoms: total as u64, mass } }
}

fn monte_carlo<G>(table: &StatTable, n: usize, outputs: usize, opts: &EvalOptions, g: &G) -> Expectation
where
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    let mut cdf = Vec::with_capacity(table.len());
    let mut c = 0.0;
    for &w in &table.weights {
        c += w;
        cdf.push(c);
    }
    let total = c;
    let samples = opts.mc_samples as usize;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = aux_rng(opts.seed, 0x5EED_0000 + k as u64);
            let mut s1 = vec![0.0; outputs];
            let mut s2 = vec![0.0; outputs];
            let mut out = vec![0.0; outputs];
            let mut sum = vec![0.0; table.width()];
            for _ in (k * CHUNK)..((k + 1) * CHUNK).min(samples) {
                sum.iter_mut().for_each(|x| *x = 0.0);
                for _ in 0..n {
                    let u: f64 = rng.gen::<f64>() * total;
                    let i = cdf.partition_point(|&x| x <= u).min(table.len() - 1);
                    for (x, v) in sum.iter_mut().zip(table.row(i)) {
                        *x += v;
                    }
                }
                g(&sum, &mut out);
                for ((a, b), o) in s1.iter_mut().zip(s2.iter_mut()).zip(&out) {
                    *a += o;
                    *b += o * o;
                }
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = vec![0.0; outputs];
    let mut s2 = vec![0.0; outputs];
    for (a, b) in parts {
        for i in 0..outputs {
            s1[i] += a[i];
            s2[i] += b[i];
        }
    }
    let nf = samples as f64;
    let means: Vec<f64> = s1.iter().map(|s| s / nf).collect();
    let half = means
        .iter()
        .zip(&s2)
        .map(|(m, q)| {
            let var = ((q / nf - m * m) * nf / (nf - 1.0)).max(0.0);
            Z95 * (var / nf).sqrt()
        })
        .collect();
    Expectation { means, half_widths: Some(half), mode: Mode::MonteCarlo { samples: opts.mc_samples, seed: opts.seed } }
}

fn report<P: Serialize>(setting: Setting, params: &P, names: &[&str], e: Expectation) -> Result<BoundReport> {
    let mut ci = BTreeMap::new();
    if let Some(h) = &e.half_widths {
        for ((name, m), h) in names.iter().zip(&e.means).zip(h) {
            ci.insert(name.to_string(), [m - h, m + h]);
        }
    }
    Ok(BoundReport {
        setting,
        params: echo(params)?,
        bounds: names.iter().map(|s| s.to_string()).zip(e.means).collect(),
        ci,
        checks: BTreeMap::new(),
        mode: e.mode,
    })
}

/// Flattens the numeric fields of a parameter struct.
pub fn echo<P: Serialize>(params: &P) -> Result<BTreeMap<String, f64>> {
    let v = serde_json::to_value(params)?;
    let mut out = BTreeMap::new();
    if let serde_json::Value::Object(m) = v {
        for (k, v) in m {
            if let Some(x) = v.as_f64() {
                out.insert(k, x);
            }
        }
    }
    Ok(out)
}

/// `c · 2^e` with `0 · ∞ = 0`.
#[inline]
fn sc(c: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * e.exp2()
    }
}

/// `1 − (1 + x)⁻¹`, accurate for small `x` and equal to 1 at `x = ∞`.
#[inline]
fn miss(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        x / (1.0 + x)
    }
}

/// `1 − (1 − a)^b` for `a ∈ [0, 1]`.
#[inline]
fn one_minus_pow(a: f64, b: f64) -> f64 {
    if a >= 1.0 {
        if b > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        -(b * (-a).ln_1p()).exp_m1()
    }
}

/// `(1 + x)^{−j}`.
#[inline]
fn inv_pow(x: f64, j: f64) -> f64 {
    (-j * x.ln_1p()).exp()
}

#[inline]
fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Distortion comparison with a small relative slack for averaged blocks.
#[inline]
pub fn within(d: f64, target: f64) -> bool {
    d <= target + 1e-12 * target.abs().max(1.0)
}

fn positive(name: &str, v: u64) -> Result<f64> {
    if v == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(v as f64)
}

fn gamma_ok(g: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(invalid(format!("gamma must be positive, got {g}")));
    }
    Ok(g)
}

fn one() -> u64 {
    1
}

// ---------------------------------------------------------------- channel

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    #[serde(rename = "L")]
    pub l: u64,
    /// List size for the list-decoding bound.
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    /// Message index for the rank-decoder bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default = "one")]
    pub n: u64,
}

impl ChannelParams {
    pub fn new(l: u64) -> Self {
        Self { l, j: 1, m: None, n: 1 }
    }
}

/// Per-letter table `[ι(X;Y)]`.
pub fn channel_table(model: &ChannelModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(&joint, &[(&[0], &[1], &[])])
}

/// `prop1`, `thm2`, `dt`, `chain`, `list` and, when `m` is given, `rank`.
pub fn channel_bounds(model: &ChannelModel, p: &ChannelParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let l = positive("L", p.l)?;
    let jl = positive("J", p.j)?;
    let m = p.m.map(|m| positive("m", m)).transpose()?;
    let table = channel_table(model)?;
    let mut names = vec!["prop1", "thm2", "dt", "chain", "list"];
    if m.is_some() {
        names.push("rank");
    }
    let e = expect(&table, p.n as usize, names.len(), opts, |s, out| {
        let i = s[0];
        let x = sc(l, -i);
        let a = sc(1.0, -i).min(1.0);
        out[0] = miss(x);
        out[1] = one_minus_pow(a, (l + 1.0) / 2.0);
        out[2] = sc((l - 1.0) / 2.0, -i).min(1.0);
        out[3] = sc((l + 1.0) / 2.0, -i).min(1.0);
        out[4] = miss(x).powf(jl);
        if let Some(m) = m {
            out[5] = one_minus_pow(a, m);
        }
    })?;
    let mut r = report(Setting::Channel, p, &names, e)?;
    r.check("thm2_le_chain", "thm2", "chain", 1.0);
    r.check("list_le_prop1", "list", "prop1", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- gelfand-pinsker

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpParams {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(default = "one")]
    pub n: u64,
}

fn default_gamma() -> f64 {
    4.0
}

/// Per-letter table `[ι(U;S), ι(U;Y)]`.
pub fn gp_table(model: &GpModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(&joint, &[(&[1], &[0], &[]), (&[1], &[2], &[])])
}

/// `thm3` and the four-term comparison `verdu`.
pub fn gp_bounds(model: &GpModel, p: &GpParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let l = positive("L", p.l)?;
    let j = positive("J", p.j)?;
    let g = gamma_ok(p.gamma)?;
    let table = gp_table(model)?;
    let konst = (-g).exp2() + (-(g.exp2())).exp();
    let e = expect(&table, p.n as usize, 2, opts, |s, out| {
        out[0] = miss(sc(l, s[0] - s[1]));
        out[1] = ind(s[0] > j.log2() - g) + ind(s[1] <= (l * j).log2() + g) + konst;
    })?;
    let mut r = report(Setting::Gp, p, &["thm3", "verdu"], e)?;
    r.check("thm3_le_verdu", "thm3", "verdu", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- wyner-ziv

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WzParams {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(default = "default_gamma")]
    pub gamma_p: f64,
    #[serde(default = "default_gamma")]
    pub gamma_c: f64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(default = "one")]
    pub n: u64,
}

/// Per-letter table `[ι(U;X), ι(U;Y), d(X, z(U, Y))]`.
pub fn wz_table(model: &WzModel) -> Result<StatTable> {
    let joint = model.joint()?;
    Ok(StatTable::densities(&joint, &[(&[2], &[0], &[]), (&[2], &[1], &[])])?
        .with_columns(&joint, 1, |t, c| c[0] = model.distortion_at(t[0], t[2], t[1])))
}

/// `thm4` and the comparison `watanabe`.
pub fn wz_bounds(model: &WzModel, p: &WzParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let l = positive("L", p.l)?;
    let j = positive("J", p.j)?;
    let (gp, gc) = (gamma_ok(p.gamma_p)?, gamma_ok(p.gamma_c)?);
    let n = p.n as f64;
    let table = wz_table(model)?;
    let konst = j / (gp.exp2() * l) + 0.5 * (gc.exp2() / j).sqrt();
    let e = expect(&table, p.n as usize, 2, opts, |s, out| {
        let ok = within(s[2] / n, p.d);
        out[0] = if ok { miss(sc(1.0 / l, s[0] - s[1])) } else { 1.0 };
        out[1] = ind(s[0] > gc || s[1] < gp || !ok) + konst;
    })?;
    let mut r = report(Setting::Wz, p, &["thm4", "watanabe"], e)?;
    if r.bounds["watanabe"] <= 1.0 {
        r.check("thm4_le_watanabe", "thm4", "watanabe", 1.0);
    }
    Ok(r)
}

// ---------------------------------------------------------------- joint source-channel

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsccParams {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
}

/// Table `[ι(X;Y), P_Z(B_D(W))]` over (W, X, Y).
pub fn jscc_table(model: &JsccModel, d: f64) -> Result<StatTable> {
    let joint = model.joint()?;
    Ok(StatTable::densities(&joint, &[(&[1], &[2], &[])])?.with_columns(&joint, 1, |t, c| c[0] = model.ball(t[0], d)))
}

/// `thm5`, the comparison `kostina` and `two_kostina`.
pub fn jscc_bounds(model: &JsccModel, p: &JsccParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let j = positive("J", p.j)?;
    let table = jscc_table(model, p.d)?;
    let e = expect(&table, 1, 3, opts, |s, out| {
        let (i, rho) = (s[0], s[1]);
        out[0] = if rho == 0.0 { 1.0 } else { 1.0 / (1.0 + sc(rho, i)) };
        let k = sc(j, -i).min(1.0) + (1.0 - rho).powf(j);
        out[1] = k;
        out[2] = 2.0 * k;
    })?;
    let mut r = report(Setting::Jscc, p, &["thm5", "kostina", "two_kostina"], e)?;
    r.check("thm5_le_two_kostina", "thm5", "two_kostina", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- broadcast

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartonParams {
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(default = "one")]
    pub n: u64,
}

/// Table `[ι(U1;Y1), ι(U2;Y2), ι(U1;U2)]`.
pub fn marton_table(model: &MartonModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(&joint, &[(&[0], &[2], &[]), (&[1], &[3], &[]), (&[0], &[1], &[])])
}

pub fn marton_bounds(model: &MartonModel, p: &MartonParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let (l1, l2, j) = (positive("L1", p.l1)?, positive("L2", p.l2)?, positive("J", p.j)?);
    let table = marton_table(model)?;
    let e = expect(&table, p.n as usize, 1, opts, |s, out| {
        let (i1, i2, i12) = (s[0], s[1], s[2]);
        out[0] = (sc(l1 * j, -i1) + sc(l2 * (1.0 - 1.0 / j), -i2) + sc(l2 / j, i12 - i2)).min(1.0);
    })?;
    report(Setting::BcMarton, p, &["thm8"], e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcCommonParams {
    #[serde(rename = "L0")]
    pub l0: u64,
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(rename = "K1", default = "one")]
    pub k1: u64,
    #[serde(rename = "K2", default = "one")]
    pub k2: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub n: u64,
}

/// Table `[ι(U0U1;Y1), ι(U1;Y1|U0), ι(U1;U2|U0), ι(U0U2;Y2), ι(U2;Y2|U0)]`.
pub fn bc_common_table(model: &BcCommonModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(
        &joint,
        &[
            (&[0, 1], &[3], &[]),
            (&[1], &[3], &[0]),
            (&[1], &[2], &[0]),
            (&[0, 2], &[4], &[]),
            (&[2], &[4], &[0]),
        ],
    )
}

/// `thm7` and its weakening `thm7_pe2`.
pub fn bc_common_bounds(model: &BcCommonModel, p: &BcCommonParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let l0 = positive("L0", p.l0)?;
    positive("L1", p.l1)?;
    positive("L2", p.l2)?;
    let j = positive("J", p.j)?;
    let (k1, k2) = (positive("K1", p.k1)?, positive("K2", p.k2)?);
    let g = gamma_ok(p.gamma)?;
    let lt0 = l0 * k1 * k2;
    let lt1 = p.l1.div_ceil(p.k1) as f64;
    let lt2 = p.l2.div_ceil(p.k2) as f64;
    let table = bc_common_table(model)?;
    let jc = 1.0 - 1.0 / j;
    let konst = (-g).exp2() * (12.0 * g * g + 84.0);
    let e = expect(&table, p.n as usize, 2, opts, |s, out| {
        let (e1, a, b, e2, c) = (s[0], s[1], s[2], s[3], s[4]);
        let fa = ((sc(1.0 / (lt1 * j), a) + 1.0).log2() + 1.0).powi(2);
        let inner = sc(lt2 / j, b - c) + sc(lt2 * jc, -c);
        let fb = ((1.0 / inner + 1.0).log2() + 1.0).powi(2);
        let sum = sc(lt0 * lt1 * j * fa, -e1)
            + sc(lt1 * j * fa, -a)
            + sc(lt0 * lt2 / j * fb, b - e2)
            + sc(lt0 * lt2 * jc * fb, -e2)
            + sc(lt2 / j * fb, b - c)
            + sc(lt2 * jc * fb, -c);
        out[0] = sum.min(1.0);
        let event = (lt1 * j).log2() > a - g
            || lt2.log2() > c - g
            || (lt2 / j).log2() > c - b - g
            || (lt0 * lt1 * j).log2() > e1 - g
            || (lt0 * lt2).log2() > e2 - g
            || (lt0 * lt2 / j).log2() > e2 - b - g;
        out[1] = ind(event) + (-g).exp2() * 8.0 * (a * a + c * c) + konst;
    })?;
    let mut r = report(Setting::BcCommon, p, &["thm7", "thm7_pe2"], e)?;
    r.check("thm7_le_pe2", "thm7", "thm7_pe2", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- distributed lossy source coding

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlscParams {
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Truncation parameter of the `trunc` and `harmonic` variants.
    #[serde(rename = "J", default = "default_j_dlsc")]
    pub j: u64,
    #[serde(default = "one")]
    pub n: u64,
}

fn default_j_dlsc() -> u64 {
    1024
}

/// Table `[ι(U1;X1|U2), ι(U1U2;X1X2), ι(U2;X2|U1), ι(U1;X1), ι(U1;U2), d1, d2]`.
pub fn dlsc_table(model: &DlscModel) -> Result<StatTable> {
    let joint = model.joint()?;
    Ok(StatTable::densities(
        &joint,
        &[
            (&[2], &[0], &[3]),
            (&[2, 3], &[0, 1], &[]),
            (&[3], &[1], &[2]),
            (&[2], &[0], &[]),
            (&[2], &[3], &[]),
        ],
    )?
    .with_columns(&joint, 2, |t, c| {
        c[0] = model.d1.get(t[0], model.z1_fn.get2(t[2], t[3]));
        c[1] = model.d2.get(t[1], model.z2_fn.get2(t[2], t[3]));
    }))
}

/// The φ-decoder bound `phi`, its weakening `pe2`, and the `trunc` and
/// `harmonic` variants at the given `J`.
pub fn dlsc_bounds(model: &DlscModel, p: &DlscParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let (l1, l2, j) = (positive("L1", p.l1)?, positive("L2", p.l2)?, positive("J", p.j)?);
    let g = gamma_ok(p.gamma)?;
    let n = p.n as f64;
    let h = j.ln() + 1.0;
    let konst = (-g).exp2() * (4.0 * g * g + 29.0);
    let table = dlsc_table(model)?;
    let e = expect(&table, p.n as usize, 4, opts, |s, out| {
        let excess = ind(!(within(s[5] / n, p.d1) && within(s[6] / n, p.d2)));
        let log_term = ((sc(l2, -s[2]) + 1.0).log2() + 1.0).powi(2);
        out[0] = (excess + sc(1.0 / l1, s[0]) + (sc(1.0 / (l1 * l2), s[1]) + sc(1.0 / l2, s[2])) * log_term).min(1.0);
        let event = excess > 0.0 || l1.log2() < s[0] + g || l2.log2() < s[2] + g || (l1 * l2).log2() < s[1] + g;
        out[1] = ind(event) + (-g).exp2() * 4.0 * s[4] * s[4] + konst;
        out[2] = (excess + sc(1.0 / (l1 * j), s[3]) + sc(j / l2, s[2]) + sc(1.0 / l1, s[0])).min(1.0);
        out[3] = (excess + sc(1.0 / (l1 * j), s[3]) + sc(h / (l1 * l2), s[1]) + sc(h / l2, s[2]) + sc(1.0 / l1, s[0]))
            .min(1.0);
    })?;
    let mut r = report(Setting::Dlsc, p, &["phi", "pe2", "trunc", "harmonic"], e)?;
    r.check("phi_le_pe2", "phi", "pe2", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- multiple access

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacParams {
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "J", default = "default_j_dlsc")]
    pub j: u64,
    #[serde(default = "one")]
    pub n: u64,
}

/// Table `[ι(X1X2;Y), ι(X2;X1Y), ι(X1;X2Y), ι(X1;Y), ι(X1;X2|Y)]`.
pub fn mac_table(model: &MacModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(
        &joint,
        &[
            (&[0, 1], &[2], &[]),
            (&[1], &[0, 2], &[]),
            (&[0], &[1, 2], &[]),
            (&[0], &[2], &[]),
            (&[0], &[1], &[2]),
        ],
    )
}

/// `thm10`, `pe2`, `trunc` and `harmonic`.
pub fn mac_bounds(model: &MacModel, p: &MacParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let (l1, l2, j) = (positive("L1", p.l1)?, positive("L2", p.l2)?, positive("J", p.j)?);
    let g = gamma_ok(p.gamma)?;
    let h = j.ln() + 1.0;
    let konst = (-g).exp2() * (4.0 * g * g + 29.0);
    let table = mac_table(model)?;
    let e = expect(&table, p.n as usize, 4, opts, |s, out| {
        let log_term = ((sc(1.0 / l2, s[1]) + 1.0).log2() + 1.0).powi(2);
        out[0] = ((sc(l1 * l2, -s[0]) + sc(l2, -s[1])) * log_term + sc(l1, -s[2])).min(1.0);
        let event = l1.log2() > s[2] - g || l2.log2() > s[1] - g || (l1 * l2).log2() > s[0] - g;
        out[1] = ind(event) + (-g).exp2() * 4.0 * s[4] * s[4] + konst;
        out[2] = (sc(l1 / j, -s[3]) + sc(l2 * j, -s[1]) + sc(l1, -s[2])).min(1.0);
        out[3] = (sc(l1 * l2 * h, -s[0]) + sc(l2 * h, -s[1]) + sc(l1, -s[2]) + sc(l1 / j, -s[3])).min(1.0);
    })?;
    let mut r = report(Setting::Mac, p, &["thm10", "pe2", "trunc", "harmonic"], e)?;
    r.check("thm10_le_pe2", "thm10", "pe2", 1.0);
    Ok(r)
}

// ---------------------------------------------------------------- resolvability

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvabilityParams {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub n: u64,
}

/// `pe1`; with `gamma`, `pe2` and `pe1_chain` (pe1 at `J = ⌈γ2^{−γ}L⌉`);
/// with `alpha`, the comparison `hayashi`.
pub fn resolvability_bounds(model: &ChannelModel, p: &ResolvabilityParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let l = positive("L", p.l)?;
    let j = positive("J", p.j)?;
    let mut names = vec!["pe1"];
    let chain = match p.gamma {
        Some(g) => {
            let g = gamma_ok(g)?;
            if g > l.log2() + 1e-12 {
                return Err(invalid(format!("gamma = {g} exceeds log L = {}", l.log2())));
            }
            names.extend(["pe2", "pe1_chain"]);
            Some((g, (g * (-g).exp2() * l).ceil().max(1.0)))
        }
        None => None,
    };
    if let Some(a) = p.alpha {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("alpha must be positive, got {a}")));
        }
        names.push("hayashi");
    }
    let table = channel_table(model)?;
    let e = expect(&table, p.n as usize, names.len(), opts, |s, out| {
        let i = s[0];
        let x = sc(1.0, -i);
        out[0] = inv_pow(x, j) + 0.5 * (j / l).sqrt();
        let mut k = 1;
        if let Some((g, jc)) = chain {
            out[1] = ind(i > l.log2() - g) + (-g / 2.0).exp2() * (1.0 + 0.5 * g.sqrt()) + 0.5 * (1.0 / l).sqrt();
            out[2] = inv_pow(x, jc) + 0.5 * (jc / l).sqrt();
            k = 3;
        }
        if let Some(a) = p.alpha {
            out[k] = ind(i > a.log2()) + 0.5 * (a / l).sqrt();
        }
    })?;
    let mut r = report(Setting::Resolvability, p, &names, e)?;
    if chain.is_some() {
        r.check("pe1_chain_le_pe2", "pe1_chain", "pe2", 1.0);
    }
    Ok(r)
}

// ---------------------------------------------------------------- wiretap

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiretapParams {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "J", default = "one")]
    pub j: u64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "one")]
    pub n: u64,
}

fn default_nu() -> f64 {
    1.0
}

/// Table `[ι(U;Y), ι(U;Z)]`.
pub fn wiretap_table(model: &WiretapModel) -> Result<StatTable> {
    let joint = model.joint()?;
    StatTable::densities(&joint, &[(&[0], &[2], &[]), (&[0], &[3], &[])])
}

/// `reliability` (first term), `secrecy` (the bracket multiplying ν) and
/// `total = reliability + ν·secrecy`.
pub fn wiretap_bounds(model: &WiretapModel, p: &WiretapParams, opts: &EvalOptions) -> Result<BoundReport> {
    model.validate()?;
    let (l, k, j) = (positive("L", p.l)?, positive("K", p.k)?, positive("J", p.j)?);
    if !(p.nu.is_finite() && p.nu >= 0.0) {
        return Err(invalid("nu must be nonnegative"));
    }
    let table = wiretap_table(model)?;
    let e = expect(&table, p.n as usize, 3, opts, |s, out| {
        let rel = sc(l * k, -s[0]).min(1.0);
        let sec = 2.0 * inv_pow(sc(1.0, -s[1]), j) + (j / k).sqrt();
        out[0] = rel;
        out[1] = sec;
        out[2] = rel + p.nu * sec;
    })?;
    report(Setting::Wiretap, p, &["reliability", "secrecy", "total"], e)
}
