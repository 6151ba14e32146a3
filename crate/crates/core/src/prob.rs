//! Finite-alphabet probability: measures, pmfs, kernels, joints and
//! information densities. Information quantities are in bits.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for `Σ weights = 1`.
pub const NORM_TOL: f64 = 1e-12;

const DEFAULT_ATOM_BUDGET: u64 = 1 << 24;

/// Atom budget for product constructions, overridable with `PMLLAB_ATOM_BUDGET`.
pub fn atom_budget() -> u64 {
    std::env::var("PMLLAB_ATOM_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_ATOM_BUDGET)
}

pub(crate) fn check_budget(needed: f64) -> Result<()> {
    let budget = atom_budget();
    if needed > budget as f64 {
        return Err(Error::Capacity { needed, budget });
    }
    Ok(())
}

/// Indexed alphabet. Product alphabets use mixed radix with the first factor
/// most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<usize>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("alphabet must be nonempty".into()));
        }
        Ok(Self { size, labels: None, factors: None })
    }

    pub fn labeled(labels: Vec<String>) -> Result<Self> {
        let mut a = Self::new(labels.len())?;
        a.labels = Some(labels);
        Ok(a)
    }

    pub fn product(factors: &[usize]) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::InvalidDistribution("product factors must be positive".into()));
        }
        let needed: f64 = factors.iter().map(|&f| f as f64).product();
        check_budget(needed)?;
        Ok(Self {
            size: factors.iter().product(),
            labels: None,
            factors: Some(factors.to_vec()),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn factors(&self) -> Vec<usize> {
        self.factors.clone().unwrap_or_else(|| vec![self.size])
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        encode(&self.factors(), tuple)
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        decode(&self.factors(), index)
    }
}

pub fn encode(dims: &[usize], tuple: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), tuple.len());
    dims.iter().zip(tuple).fold(0, |acc, (&d, &t)| {
        debug_assert!(t < d);
        acc * d + t
    })
}

pub fn decode(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// Extended nonnegative ratio with the conventions 0/0 = 0 and (>0)/0 = ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtRatio {
    Finite(f64),
    Infinite,
}

impl ExtRatio {
    pub fn value(self) -> f64 {
        match self {
            ExtRatio::Finite(v) => v,
            ExtRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtRatio::Infinite)
    }

    pub fn log2(self) -> f64 {
        self.value().log2()
    }
}

impl From<f64> for ExtRatio {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            ExtRatio::Infinite
        } else {
            ExtRatio::Finite(v)
        }
    }
}

pub fn rn_ratio(num: f64, den: f64) -> ExtRatio {
    debug_assert!(num >= 0.0 && den >= 0.0);
    if num == 0.0 {
        ExtRatio::Finite(0.0)
    } else if den == 0.0 {
        ExtRatio::Infinite
    } else {
        ExtRatio::Finite(num / den)
    }
}

/// Nonnegative measure over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    alphabet: Alphabet,
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(weights.len())?;
        Self::with_alphabet(alphabet, weights)
    }

    pub fn with_alphabet(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for an alphabet of size {}",
                weights.len(),
                alphabet.size()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a finite nonnegative number")));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidDistribution("measure has no positive weight".into()));
        }
        Ok(Self { alphabet, weights })
    }

    pub fn uniform(n: usize, w: f64) -> Result<Self> {
        Self::new(vec![w; n])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| i)
    }

    /// Density of `p` with respect to this measure, with the ratio conventions.
    pub fn density_of(&self, p: &Pmf) -> Result<Vec<f64>> {
        if p.len() != self.len() {
            return Err(Error::InvalidDistribution("pmf and base measure differ in size".into()));
        }
        let mut out = Vec::with_capacity(self.len());
        for (i, (&pw, &mw)) in p.weights().iter().zip(&self.weights).enumerate() {
            match rn_ratio(pw, mw) {
                ExtRatio::Finite(v) => out.push(v),
                ExtRatio::Infinite => {
                    return Err(Error::AbsoluteContinuity(format!(
                        "pmf puts mass {pw} on atom {i} where the base measure is zero"
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// Probability mass function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfSpec", into = "PmfSpec")]
pub struct Pmf(FiniteMeasure);

/// JSON form `{"alphabet": [...], "weights": [...]}`; `alphabet` is optional.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PmfSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub weights: Vec<f64>,
}

impl TryFrom<PmfSpec> for Pmf {
    type Error = Error;

    fn try_from(s: PmfSpec) -> Result<Self> {
        match s.alphabet {
            Some(labels) => Pmf::with_alphabet(Alphabet::labeled(labels)?, s.weights),
            None => Pmf::new(s.weights),
        }
    }
}

impl From<Pmf> for PmfSpec {
    fn from(p: Pmf) -> Self {
        PmfSpec { alphabet: p.alphabet().labels().map(|l| l.to_vec()), weights: p.weights().to_vec() }
    }
}

impl Pmf {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(weights.len())?;
        Self::with_alphabet(alphabet, weights)
    }

    /// Accepts weights summing to 1 within [`NORM_TOL`] and renormalizes them.
    pub fn with_alphabet(alphabet: Alphabet, mut weights: Vec<f64>) -> Result<Self> {
        let m = FiniteMeasure::with_alphabet(alphabet, std::mem::take(&mut weights))?;
        let total = m.total();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        let FiniteMeasure { alphabet, mut weights } = m;
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self(FiniteMeasure { alphabet, weights }))
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let m = FiniteMeasure::new(weights)?;
        let t = m.total();
        Self::new(m.weights.iter().map(|w| w / t).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, a: usize) -> Result<Self> {
        if a >= n {
            return Err(Error::InvalidDistribution(format!("atom {a} outside alphabet of size {n}")));
        }
        let mut w = vec![0.0; n];
        w[a] = 1.0;
        Self::new(w)
    }

    pub fn bernoulli(p1: f64) -> Result<Self> {
        Self::new(vec![1.0 - p1, p1])
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.0
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.0.alphabet()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        self.0.weights()
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.0.weight(i)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.support()
    }

    pub fn entropy(&self) -> f64 {
        self.weights().iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum()
    }

    /// Product pmf with index `a * |other| + b`.
    pub fn product(&self, other: &Pmf) -> Result<Pmf> {
        let alphabet = Alphabet::product(&[self.len(), other.len()])?;
        let mut w = Vec::with_capacity(alphabet.size());
        for &a in self.weights() {
            for &b in other.weights() {
                w.push(a * b);
            }
        }
        renorm(alphabet, w)
    }

    /// i.i.d. power `P^{⊗n}` over the n-fold product alphabet.
    pub fn power(&self, n: usize) -> Result<Pmf> {
        if n == 0 {
            return Err(Error::InvalidParameter("power requires n ≥ 1".into()));
        }
        check_budget((self.len() as f64).powi(n as i32))?;
        let alphabet = Alphabet::product(&vec![self.len(); n])?;
        let mut w = vec![1.0];
        for _ in 0..n {
            let mut next = Vec::with_capacity(w.len() * self.len());
            for &a in &w {
                for &b in self.weights() {
                    next.push(a * b);
                }
            }
            w = next;
        }
        renorm(alphabet, w)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_weights(self.weights(), rng)
    }
}

fn renorm(alphabet: Alphabet, w: Vec<f64>) -> Result<Pmf> {
    let t: f64 = w.iter().sum();
    Pmf::with_alphabet(alphabet, w.into_iter().map(|x| x / t).collect())
}

/// Inverse-CDF draw from nonnegative weights with positive total.
pub fn sample_weights<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> usize {
    let total: f64 = w.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in w.iter().enumerate() {
        if x > 0.0 {
            acc += x;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

/// Conditional pmf, one row per input symbol, stored densely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct Kernel {
    n_in: usize,
    n_out: usize,
    probs: Vec<f64>,
}

/// JSON form `{"rows": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSpec {
    pub rows: Vec<Vec<f64>>,
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = Error;

    fn try_from(s: KernelSpec) -> Result<Self> {
        Kernel::from_rows(s.rows)
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        KernelSpec { rows: k.rows() }
    }
}

impl Kernel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_in = rows.len();
        if n_in == 0 {
            return Err(Error::InvalidDistribution("kernel needs at least one row".into()));
        }
        let n_out = rows[0].len();
        let mut probs = Vec::with_capacity(n_in * n_out);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != n_out {
                return Err(Error::InvalidDistribution(format!("kernel row {i} has the wrong length")));
            }
            let p = Pmf::new(r).map_err(|e| Error::InvalidDistribution(format!("kernel row {i}: {e}")))?;
            probs.extend_from_slice(p.weights());
        }
        Ok(Self { n_in, n_out, probs })
    }

    /// Kernel given by a deterministic map.
    pub fn deterministic(n_in: usize, n_out: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        let rows = (0..n_in)
            .map(|x| {
                let mut r = vec![0.0; n_out];
                r[f(x)] = 1.0;
                r
            })
            .collect();
        Self::from_rows(rows)
    }

    /// Binary symmetric channel.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::deterministic(n, n, |x| x)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.n_out + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.n_out..(x + 1) * self.n_out]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_in).map(|x| self.row(x).to_vec()).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        sample_weights(self.row(x), rng)
    }

    /// Parallel product: input `a * |b_in| + b`, output `y_a * |b_out| + y_b`.
    pub fn product(&self, other: &Kernel) -> Result<Kernel> {
        check_budget((self.n_in * other.n_in) as f64 * (self.n_out * other.n_out) as f64)?;
        let n_in = self.n_in * other.n_in;
        let n_out = self.n_out * other.n_out;
        let mut probs = vec![0.0; n_in * n_out];
        for a in 0..self.n_in {
            for b in 0..other.n_in {
                let x = a * other.n_in + b;
                for ya in 0..self.n_out {
                    let pa = self.get(a, ya);
                    if pa == 0.0 {
                        continue;
                    }
                    for yb in 0..other.n_out {
                        probs[x * n_out + ya * other.n_out + yb] = pa * other.get(b, yb);
                    }
                }
            }
        }
        Ok(Kernel { n_in, n_out, probs })
    }

    /// Memoryless n-fold extension.
    pub fn power(&self, n: usize) -> Result<Kernel> {
        if n == 0 {
            return Err(Error::InvalidParameter("power requires n ≥ 1".into()));
        }
        let mut k = self.clone();
        for _ in 1..n {
            k = k.product(self)?;
        }
        Ok(k)
    }

    pub fn output_marginal(&self, p_in: &Pmf) -> Result<Pmf> {
        if p_in.len() != self.n_in {
            return Err(Error::InvalidDistribution("input pmf does not match kernel".into()));
        }
        let mut out = vec![0.0; self.n_out];
        for (x, &px) in p_in.weights().iter().enumerate() {
            if px > 0.0 {
                for (o, &k) in out.iter_mut().zip(self.row(x)) {
                    *o += px * k;
                }
            }
        }
        Pmf::normalized(out)
    }

    /// Joint pmf of (X, Y) with dims `[|X|, |Y|]`.
    pub fn joint(&self, p_in: &Pmf) -> Result<JointPmf> {
        if p_in.len() != self.n_in {
            return Err(Error::InvalidDistribution("input pmf does not match kernel".into()));
        }
        let mut w = Vec::with_capacity(self.n_in * self.n_out);
        for (x, &px) in p_in.weights().iter().enumerate() {
            w.extend(self.row(x).iter().map(|k| px * k));
        }
        JointPmf::new(vec![self.n_in, self.n_out], w)
    }

    /// Posterior `P(x | y)` for the prior `p_in`; all zeros if `y` has zero probability.
    pub fn posterior(&self, p_in: &Pmf, y: usize) -> Vec<f64> {
        let mut post: Vec<f64> = (0..self.n_in).map(|x| p_in.prob(x) * self.get(x, y)).collect();
        let t: f64 = post.iter().sum();
        if t > 0.0 {
            post.iter_mut().for_each(|v| *v /= t);
        }
        post
    }
}

/// Pmf over a product alphabet with its factor structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointSpec", into = "JointSpec")]
pub struct JointPmf {
    dims: Vec<usize>,
    pmf: Pmf,
    marginals: Vec<Vec<f64>>,
}

/// JSON form `{"dims": [...], "weights": [...]}`, weights in row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointSpec {
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
}

impl TryFrom<JointSpec> for JointPmf {
    type Error = Error;

    fn try_from(s: JointSpec) -> Result<Self> {
        JointPmf::new(s.dims, s.weights)
    }
}

impl From<JointPmf> for JointSpec {
    fn from(j: JointPmf) -> Self {
        JointSpec { dims: j.dims, weights: j.pmf.weights().to_vec() }
    }
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::product(&dims)?;
        let pmf = Pmf::with_alphabet(alphabet, weights)?;
        Ok(Self::from_pmf(dims, pmf))
    }

    /// Like [`JointPmf::new`] but normalizes the weights first.
    pub fn normalized(dims: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let p = Pmf::normalized(weights)?;
        Self::new(dims, p.weights().to_vec())
    }

    fn from_pmf(dims: Vec<usize>, pmf: Pmf) -> Self {
        let mut marginals: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
        for (i, &w) in pmf.weights().iter().enumerate() {
            if w > 0.0 {
                for (axis, v) in decode(&dims, i).into_iter().enumerate() {
                    marginals[axis][v] += w;
                }
            }
        }
        Self { dims, pmf, marginals }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.pmf.prob(encode(&self.dims, tuple))
    }

    /// Cached single-axis marginal.
    pub fn axis_marginal(&self, axis: usize) -> &[f64] {
        &self.marginals[axis]
    }

    pub fn axis_pmf(&self, axis: usize) -> Pmf {
        Pmf::normalized(self.marginals[axis].clone()).expect("marginal of a valid joint")
    }

    /// Support atoms as `(tuple, probability)`.
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.pmf
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, &w)| (decode(&self.dims, i), w))
    }

    pub fn support_size(&self) -> usize {
        self.pmf.support().count()
    }

    /// Marginal over `axes`, in the given order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        let t = MarginalTable::new(self, axes)?;
        JointPmf::normalized(t.dims.clone(), t.probs)
    }

    /// Unconditional information density between coordinates `x` and `y`.
    pub fn info_density(&self, x: usize, y: usize) -> Result<f64> {
        if self.dims.len() != 2 {
            return Err(Error::InvalidParameter("info_density(x, y) needs a two-factor joint".into()));
        }
        let pxy = self.prob(&[x, y]);
        let prod = self.marginals[0][x] * self.marginals[1][y];
        Ok(rn_ratio(pxy, prod).log2())
    }

    /// Mutual information `I(A;B|C)` in bits.
    pub fn mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let d = Density::new(self, a, b, c)?;
        Ok(self.support().map(|(t, w)| w * d.eval(&t)).sum())
    }

    /// i.i.d. n-fold product; every axis becomes its n-fold power.
    pub fn power(&self, n: usize) -> Result<JointPmf> {
        if n == 0 {
            return Err(Error::InvalidParameter("power requires n ≥ 1".into()));
        }
        let p = self.pmf.power(n)?;
        let k = self.dims.len();
        let new_dims: Vec<usize> = self.dims.iter().map(|&d| d.pow(n as u32)).collect();
        Alphabet::product(&new_dims)?;
        let mut w = vec![0.0; new_dims.iter().product()];
        let letter_dims = vec![self.pmf.len(); n];
        for (idx, &pw) in p.weights().iter().enumerate() {
            if pw == 0.0 {
                continue;
            }
            let letters = decode(&letter_dims, idx);
            let mut coords = vec![0usize; k];
            for &l in &letters {
                let t = decode(&self.dims, l);
                for a in 0..k {
                    coords[a] = coords[a] * self.dims[a] + t[a];
                }
            }
            w[encode(&new_dims, &coords)] += pw;
        }
        JointPmf::normalized(new_dims, w)
    }
}

/// Dense marginal over a subset of axes.
#[derive(Clone, Debug)]
pub struct MarginalTable {
    axes: Vec<usize>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl MarginalTable {
    pub fn new(joint: &JointPmf, axes: &[usize]) -> Result<Self> {
        let mut seen = vec![false; joint.dims.len()];
        for &a in axes {
            if a >= joint.dims.len() || seen[a] {
                return Err(Error::InvalidParameter(format!("bad axis list {axes:?}")));
            }
            seen[a] = true;
        }
        let dims: Vec<usize> = axes.iter().map(|&a| joint.dims[a]).collect();
        let mut probs = vec![0.0; dims.iter().product::<usize>().max(1)];
        for (t, w) in joint.support() {
            probs[Self::index_of(&dims, axes, &t)] += w;
        }
        Ok(Self { axes: axes.to_vec(), dims, probs })
    }

    fn index_of(dims: &[usize], axes: &[usize], tuple: &[usize]) -> usize {
        axes.iter().zip(dims).fold(0, |acc, (&a, &d)| acc * d + tuple[a])
    }

    /// Probability of the sub-tuple read off a full joint tuple.
    pub fn at(&self, tuple: &[usize]) -> f64 {
        self.probs[Self::index_of(&self.dims, &self.axes, tuple)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

/// Evaluator for the conditional information density `ι_{A;B|C}` in bits.
#[derive(Clone, Debug)]
pub struct Density {
    abc: MarginalTable,
    ac: MarginalTable,
    bc: MarginalTable,
    c: MarginalTable,
}

impl Density {
    pub fn new(joint: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidParameter("information density needs nonempty A and B".into()));
        }
        let cat = |xs: &[&[usize]]| xs.concat();
        Ok(Self {
            abc: MarginalTable::new(joint, &cat(&[a, b, c]))?,
            ac: MarginalTable::new(joint, &cat(&[a, c]))?,
            bc: MarginalTable::new(joint, &cat(&[b, c]))?,
            c: MarginalTable::new(joint, c)?,
        })
    }

    /// `log2 p(a,b,c) p(c) / (p(a,c) p(b,c))` read off a full joint tuple.
    pub fn eval(&self, tuple: &[usize]) -> f64 {
        let num = self.abc.at(tuple) * self.c.at(tuple);
        let den = self.ac.at(tuple) * self.bc.at(tuple);
        rn_ratio(num, den).log2()
    }
}

/// Cache of densities keyed by `(A, B, C)` axis lists.
#[derive(Debug, Default)]
pub struct DensityCache {
    map: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>), Density>,
}

impl DensityCache {
    pub fn get(&mut self, joint: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> Result<&Density> {
        let key = (a.to_vec(), b.to_vec(), c.to_vec());
        if !self.map.contains_key(&key) {
            let d = Density::new(joint, a, b, c)?;
            self.map.insert(key.clone(), d);
        }
        Ok(&self.map[&key])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Divergences {
    pub kl: f64,
    pub renyi: f64,
    pub tv: f64,
}

/// KL divergence in bits; ∞ if `p` is not absolutely continuous w.r.t. `q`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).log2();
        }
    }
    s.max(0.0)
}

/// Rényi divergence of order `order > 1`, in bits.
pub fn renyi(p: &[f64], q: &[f64], order: f64) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            s += a.powf(order) * b.powf(1.0 - order);
        }
    }
    (s.log2() / (order - 1.0)).max(0.0)
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn divergences(p: &Pmf, q: &Pmf, order: f64) -> Result<Divergences> {
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution("pmfs differ in size".into()));
    }
    if order <= 1.0 {
        return Err(Error::InvalidParameter(format!("Rényi order must exceed 1, got {order}")));
    }
    Ok(Divergences {
        kl: kl(p.weights(), q.weights()),
        renyi: renyi(p.weights(), q.weights(), order),
        tv: tv(p.weights(), q.weights()),
    })
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn joint_strategy() -> impl Strategy<Value = JointPmf> {
        (1usize..5, 1usize..5)
            .prop_flat_map(|(a, b)| {
                (Just(a), Just(b), proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], a * b))
            })
            .prop_filter_map("needs mass", |(a, b, w)| JointPmf::normalized(vec![a, b], w).ok())
    }

    proptest! {
        #[test]
        fn marginals_consistent(j in joint_strategy()) {
            let (a, b) = (j.dims()[0], j.dims()[1]);
            for x in 0..a {
                let s: f64 = (0..b).map(|y| j.prob(&[x, y])).sum();
                prop_assert!((s - j.axis_marginal(0)[x]).abs() <= 1e-12);
            }
        }

        #[test]
        fn exp_neg_density_is_product_mass_of_support(j in joint_strategy()) {
            let mut lhs = 0.0;
            let mut prod_mass = 0.0;
            for (t, w) in j.support() {
                lhs += w * 2f64.powf(-j.info_density(t[0], t[1]).unwrap());
                prod_mass += j.axis_marginal(0)[t[0]] * j.axis_marginal(1)[t[1]];
            }
            prop_assert!((lhs - prod_mass).abs() <= 1e-9);
            prop_assert!(lhs <= 1.0 + 1e-9);
        }

        #[test]
        fn mutual_information_two_routes(j in joint_strategy()) {
            let i = j.mutual_information(&[0], &[1], &[]).unwrap();
            let (a, b) = (j.dims()[0], j.dims()[1]);
            let mut prod = Vec::with_capacity(a * b);
            for x in 0..a {
                for y in 0..b {
                    prod.push(j.axis_marginal(0)[x] * j.axis_marginal(1)[y]);
                }
            }
            let d = kl(j.pmf().weights(), &prod);
            prop_assert!((i - d).abs() <= 1e-9);
        }

        #[test]
        fn ratio_monotone(n1 in 0.01f64..10.0, n2 in 0.01f64..10.0, d1 in 0.01f64..10.0, d2 in 0.01f64..10.0) {
            let (lo_n, hi_n) = (n1.min(n2), n1.max(n2));
            let (lo_d, hi_d) = (d1.min(d2), d1.max(d2));
            prop_assert!(rn_ratio(lo_n, d1).value() <= rn_ratio(hi_n, d1).value());
            prop_assert!(rn_ratio(n1, hi_d).value() <= rn_ratio(n1, lo_d).value());
        }
    }
}
