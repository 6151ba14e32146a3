//! Problem instances for each coding setting, shared by the bound evaluators,
//! the simulators and the command line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{check_budget, decode, encode, JointPmf, Kernel, Pmf};

/// Coding settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    Channel,
    ChannelRank,
    ChannelList,
    Gp,
    Wz,
    Jscc,
    BcMarton,
    BcCommon,
    Dlsc,
    Mac,
    Resolvability,
    Wiretap,
}

impl Setting {
    pub const ALL: [Setting; 12] = [
        Setting::Channel,
        Setting::ChannelRank,
        Setting::ChannelList,
        Setting::Gp,
        Setting::Wz,
        Setting::Jscc,
        Setting::BcMarton,
        Setting::BcCommon,
        Setting::Dlsc,
        Setting::Mac,
        Setting::Resolvability,
        Setting::Wiretap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Channel => "channel",
            Setting::ChannelRank => "channel-rank",
            Setting::ChannelList => "channel-list",
            Setting::Gp => "gp",
            Setting::Wz => "wz",
            Setting::Jscc => "jscc",
            Setting::BcMarton => "bc-marton",
            Setting::BcCommon => "bc-common",
            Setting::Dlsc => "dlsc",
            Setting::Mac => "mac",
            Setting::Resolvability => "resolvability",
            Setting::Wiretap => "wiretap",
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown setting '{s}'")))
    }
}

/// Deterministic map on a product of finite alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FnTableSpec", into = "FnTableSpec")]
pub struct FnTable {
    dims: Vec<usize>,
    codomain: usize,
    values: Vec<usize>,
}

/// JSON forms: `{"rows": [[...]]}` for two arguments, or
/// `{"dims": [...], "values": [...]}` in row-major order. `codomain` defaults
/// to one more than the largest value.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnTableSpec {
    Rows {
        rows: Vec<Vec<usize>>,
        #[serde(default)]
        codomain: Option<usize>,
    },
    Flat {
        dims: Vec<usize>,
        values: Vec<usize>,
        #[serde(default)]
        codomain: Option<usize>,
    },
}

impl TryFrom<FnTableSpec> for FnTable {
    type Error = Error;

    fn try_from(s: FnTableSpec) -> Result<Self> {
        let (dims, values, codomain) = match s {
            FnTableSpec::Rows { rows, codomain } => {
                let b = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != b) {
                    return Err(Error::InvalidParameter("ragged function table".into()));
                }
                (vec![rows.len(), b], rows.concat(), codomain)
            }
            FnTableSpec::Flat { dims, values, codomain } => (dims, values, codomain),
        };
        let codomain = codomain.unwrap_or_else(|| values.iter().max().map_or(1, |m| m + 1));
        FnTable::new(dims, codomain, values)
    }
}

impl From<FnTable> for FnTableSpec {
    fn from(t: FnTable) -> Self {
        FnTableSpec::Flat { dims: t.dims, values: t.values, codomain: Some(t.codomain) }
    }
}

impl FnTable {
    pub fn new(dims: Vec<usize>, codomain: usize, values: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || values.len() != dims.iter().product::<usize>() {
            return Err(Error::InvalidParameter(format!("function table of {} values does not fit dims {dims:?}", values.len())));
        }
        if let Some(v) = values.iter().find(|&&v| v >= codomain) {
            return Err(Error::InvalidParameter(format!("function value {v} outside codomain of size {codomain}")));
        }
        Ok(Self { dims, codomain, values })
    }

    pub fn from_fn2(a: usize, b: usize, codomain: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let values = (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::new(vec![a, b], codomain, values)
    }

    pub fn from_fn(dims: Vec<usize>, codomain: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        let values = (0..n).map(|i| f(&decode(&dims, i))).collect();
        Self::new(dims, codomain, values)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn get(&self, args: &[usize]) -> usize {
        self.values[encode(&self.dims, args)]
    }

    pub fn get2(&self, a: usize, b: usize) -> usize {
        self.values[a * self.dims[1] + b]
    }

    /// Letterwise extension to n-fold arguments.
    /// Same map viewed into a larger codomain, so that n-fold indices use
    /// the same base as the alphabet it feeds.
    pub fn with_codomain(&self, codomain: usize) -> Result<FnTable> {
        FnTable::new(self.dims.clone(), codomain, self.values.clone())
    }

    pub fn power(&self, n: usize) -> Result<FnTable> {
        let new_dims: Vec<usize> = self.dims.iter().map(|&d| d.pow(n as u32)).collect();
        check_budget(new_dims.iter().map(|&d| d as f64).product())?;
        let codomain = self.codomain.pow(n as u32);
        FnTable::from_fn(new_dims, codomain, |args| {
            let letters: Vec<Vec<usize>> = args
                .iter()
                .zip(&self.dims)
                .map(|(&a, &d)| decode(&vec![d; n], a))
                .collect();
            (0..n).fold(0, |acc, i| {
                let t: Vec<usize> = letters.iter().map(|l| l[i]).collect();
                acc * self.codomain + self.get(&t)
            })
        })
    }
}

/// Distortion matrix `d[a][b] ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Distortion {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for Distortion {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Distortion::new(rows)
    }
}

impl From<Distortion> for Vec<Vec<f64>> {
    fn from(d: Distortion) -> Self {
        d.rows
    }
}

impl Distortion {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let b = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || b == 0 || rows.iter().any(|r| r.len() != b) {
            return Err(Error::InvalidParameter("distortion matrix must be rectangular and nonempty".into()));
        }
        if rows.iter().flatten().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidParameter("distortions must be finite and nonnegative".into()));
        }
        Ok(Self { rows })
    }

    pub fn hamming(n: usize) -> Self {
        let rows = (0..n).map(|a| (0..n).map(|b| if a == b { 0.0 } else { 1.0 }).collect()).collect();
        Self { rows }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.rows[a][b]
    }

    pub fn n_source(&self) -> usize {
        self.rows.len()
    }

    pub fn n_repro(&self) -> usize {
        self.rows[0].len()
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Separable average distortion on n-fold blocks.
    pub fn power(&self, n: usize) -> Result<Distortion> {
        let (a, b) = (self.n_source().pow(n as u32), self.n_repro().pow(n as u32));
        check_budget(a as f64 * b as f64)?;
        let rows = (0..a)
            .map(|x| {
                let xs = decode(&vec![self.n_source(); n], x);
                (0..b)
                    .map(|z| {
                        let zs = decode(&vec![self.n_repro(); n], z);
                        xs.iter().zip(&zs).map(|(&x, &z)| self.get(x, z)).sum::<f64>() / n as f64
                    })
                    .collect()
            })
            .collect();
        Distortion::new(rows)
    }
}

/// Moves a letter-major index over `n` copies of a factored alphabet to
/// factor-major order (all letters of factor 0 first).
fn regroup(dims: &[usize], n: usize, letter_major: usize) -> usize {
    let letter = dims.iter().product::<usize>();
    let letters = decode(&vec![letter; n], letter_major);
    let split: Vec<Vec<usize>> = letters.iter().map(|&l| decode(dims, l)).collect();
    let mut out = 0;
    for (f, &d) in dims.iter().enumerate() {
        for s in &split {
            out = out * d + s[f];
        }
    }
    out
}

/// Memoryless n-fold extension of a kernel whose input and output are
/// products, keeping the factored index layout.
pub fn kernel_power_factored(k: &Kernel, in_dims: &[usize], out_dims: &[usize], n: usize) -> Result<Kernel> {
    let p = k.power(n)?;
    if in_dims.len() == 1 && out_dims.len() == 1 {
        return Ok(p);
    }
    let mut rows = vec![vec![0.0; p.n_out()]; p.n_in()];
    for x in 0..p.n_in() {
        let xi = regroup(in_dims, n, x);
        for y in 0..p.n_out() {
            rows[xi][regroup(out_dims, n, y)] = p.get(x, y);
        }
    }
    Kernel::from_rows(rows)
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

/// Point-to-point channel with input distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelModel {
    pub p_x: Pmf,
    pub channel: Kernel,
}

impl ChannelModel {
    pub fn new(p_x: Pmf, channel: Kernel) -> Result<Self> {
        let m = Self { p_x, channel };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_x.len() == self.channel.n_in(), "p_x does not match the channel input alphabet")
    }

    /// Joint of (X, Y).
    pub fn joint(&self) -> Result<JointPmf> {
        self.channel.joint(&self.p_x)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        Self::new(self.p_x.power(n)?, self.channel.power(n)?)
    }
}

/// Channel with state known at the encoder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpModel {
    pub p_s: Pmf,
    pub p_u_given_s: Kernel,
    /// `x(u, s)`
    pub x_fn: FnTable,
    /// Input index `x * |S| + s`.
    pub channel: Kernel,
}

impl GpModel {
    pub fn new(p_s: Pmf, p_u_given_s: Kernel, x_fn: FnTable, channel: Kernel) -> Result<Self> {
        let m = Self { p_s, p_u_given_s, x_fn, channel };
        m.validate()?;
        Ok(m)
    }

    pub fn n_s(&self) -> usize {
        self.p_s.len()
    }

    pub fn n_u(&self) -> usize {
        self.p_u_given_s.n_out()
    }

    pub fn n_x(&self) -> usize {
        self.channel.n_in() / self.n_s()
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_u_given_s.n_in() == self.n_s(), "P_{U|S} input does not match p_s")?;
        check(self.channel.n_in() % self.n_s() == 0, "channel input must be |X|·|S|")?;
        check(self.x_fn.dims() == [self.n_u(), self.n_s()], "x_fn must be indexed by (u, s)")?;
        check(self.x_fn.codomain() <= self.n_x(), "x_fn values exceed the channel input alphabet")
    }

    /// Joint of (S, U, Y).
    pub fn joint(&self) -> Result<JointPmf> {
        let (ns, nu, ny) = (self.n_s(), self.n_u(), self.channel.n_out());
        let mut w = vec![0.0; ns * nu * ny];
        for s in 0..ns {
            for u in 0..nu {
                let pu = self.p_s.prob(s) * self.p_u_given_s.get(s, u);
                if pu == 0.0 {
                    continue;
                }
                let x = self.x_fn.get2(u, s);
                for (y, &k) in self.channel.row(x * ns + s).iter().enumerate() {
                    w[(s * nu + u) * ny + y] = pu * k;
                }
            }
        }
        JointPmf::normalized(vec![ns, nu, ny], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        Self::new(
            self.p_s.power(n)?,
            self.p_u_given_s.power(n)?,
            self.x_fn.with_codomain(self.n_x())?.power(n)?,
            kernel_power_factored(&self.channel, &[self.n_x(), self.n_s()], &[self.channel.n_out()], n)?,
        )
    }
}

/// Lossy source coding with decoder side information.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WzModel {
    pub p_x: Pmf,
    /// `P_{Y|X}`
    pub side: Kernel,
    pub p_u_given_x: Kernel,
    /// `z(u, y)`
    pub z_fn: FnTable,
    /// `d(x, z)`
    pub distortion: Distortion,
}

impl WzModel {
    pub fn new(p_x: Pmf, side: Kernel, p_u_given_x: Kernel, z_fn: FnTable, distortion: Distortion) -> Result<Self> {
        let m = Self { p_x, side, p_u_given_x, z_fn, distortion };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let nx = self.p_x.len();
        check(self.side.n_in() == nx && self.p_u_given_x.n_in() == nx, "kernels must take X as input")?;
        check(self.z_fn.dims() == [self.p_u_given_x.n_out(), self.side.n_out()], "z_fn must be indexed by (u, y)")?;
        check(self.distortion.n_source() == nx, "distortion rows must be indexed by x")?;
        check(self.z_fn.codomain() <= self.distortion.n_repro(), "z_fn values exceed the distortion columns")
    }

    /// Joint of (X, Y, U).
    pub fn joint(&self) -> Result<JointPmf> {
        let (nx, ny, nu) = (self.p_x.len(), self.side.n_out(), self.p_u_given_x.n_out());
        let mut w = vec![0.0; nx * ny * nu];
        for x in 0..nx {
            for y in 0..ny {
                let pxy = self.p_x.prob(x) * self.side.get(x, y);
                for u in 0..nu {
                    w[(x * ny + y) * nu + u] = pxy * self.p_u_given_x.get(x, u);
                }
            }
        }
        JointPmf::normalized(vec![nx, ny, nu], w)
    }

    pub fn distortion_at(&self, x: usize, u: usize, y: usize) -> f64 {
        self.distortion.get(x, self.z_fn.get2(u, y))
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        Self::new(
            self.p_x.power(n)?,
            self.side.power(n)?,
            self.p_u_given_x.power(n)?,
            self.z_fn.with_codomain(self.distortion.n_repro())?.power(n)?,
            self.distortion.power(n)?,
        )
    }
}

/// Joint source-channel coding with a reproduction distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsccModel {
    pub p_w: Pmf,
    pub p_x: Pmf,
    pub channel: Kernel,
    pub p_z: Pmf,
    /// `d(w, z)`
    pub distortion: Distortion,
}

impl JsccModel {
    pub fn new(p_w: Pmf, p_x: Pmf, channel: Kernel, p_z: Pmf, distortion: Distortion) -> Result<Self> {
        let m = Self { p_w, p_x, channel, p_z, distortion };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_x.len() == self.channel.n_in(), "p_x does not match the channel")?;
        check(
            self.distortion.n_source() == self.p_w.len() && self.distortion.n_repro() == self.p_z.len(),
            "distortion must be |W| × |Z|",
        )
    }

    /// `P_Z(B_D(w))`.
    pub fn ball(&self, w: usize, d: f64) -> f64 {
        (0..self.p_z.len()).filter(|&z| self.distortion.get(w, z) <= d).map(|z| self.p_z.prob(z)).sum()
    }

    /// Joint of (W, X, Y).
    pub fn joint(&self) -> Result<JointPmf> {
        let xy = self.channel.joint(&self.p_x)?;
        let (nw, nxy) = (self.p_w.len(), xy.pmf().len());
        let mut w = Vec::with_capacity(nw * nxy);
        for &pw in self.p_w.weights() {
            w.extend(xy.pmf().weights().iter().map(|p| pw * p));
        }
        JointPmf::normalized(vec![nw, self.p_x.len(), self.channel.n_out()], w)
    }
}

/// Two-receiver broadcast channel with private messages only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MartonModel {
    /// Joint of (U1, U2).
    pub p_u: JointPmf,
    /// `x(u1, u2)`
    pub x_fn: FnTable,
    /// Output index `y1 * |Y2| + y2`.
    pub channel: Kernel,
    pub y_dims: [usize; 2],
}

impl MartonModel {
    pub fn new(p_u: JointPmf, x_fn: FnTable, channel: Kernel, y_dims: [usize; 2]) -> Result<Self> {
        let m = Self { p_u, x_fn, channel, y_dims };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_u.dims().len() == 2, "p_u must be a joint of (U1, U2)")?;
        check(self.x_fn.dims() == self.p_u.dims(), "x_fn must be indexed by (u1, u2)")?;
        check(self.x_fn.codomain() <= self.channel.n_in(), "x_fn values exceed the channel input")?;
        check(self.channel.n_out() == self.y_dims[0] * self.y_dims[1], "channel output must be |Y1|·|Y2|")
    }

    /// Joint of (U1, U2, Y1, Y2).
    pub fn joint(&self) -> Result<JointPmf> {
        let d = self.p_u.dims();
        let ny = self.channel.n_out();
        let mut w = vec![0.0; d[0] * d[1] * ny];
        for (t, p) in self.p_u.support() {
            let x = self.x_fn.get(&t);
            for (y, &k) in self.channel.row(x).iter().enumerate() {
                w[(t[0] * d[1] + t[1]) * ny + y] = p * k;
            }
        }
        JointPmf::normalized(vec![d[0], d[1], self.y_dims[0], self.y_dims[1]], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        let nx = self.channel.n_in();
        Self::new(
            self.p_u.power(n)?,
            self.x_fn.with_codomain(nx)?.power(n)?,
            kernel_power_factored(&self.channel, &[nx], &self.y_dims, n)?,
            [self.y_dims[0].pow(n as u32), self.y_dims[1].pow(n as u32)],
        )
    }
}

/// Two-receiver broadcast channel with a common message.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BcCommonModel {
    /// Joint of (U0, U1, U2).
    pub p_u: JointPmf,
    /// `x(u0, u1, u2)`
    pub x_fn: FnTable,
    /// Output index `y1 * |Y2| + y2`.
    pub channel: Kernel,
    pub y_dims: [usize; 2],
}

impl BcCommonModel {
    pub fn new(p_u: JointPmf, x_fn: FnTable, channel: Kernel, y_dims: [usize; 2]) -> Result<Self> {
        let m = Self { p_u, x_fn, channel, y_dims };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_u.dims().len() == 3, "p_u must be a joint of (U0, U1, U2)")?;
        check(self.x_fn.dims() == self.p_u.dims(), "x_fn must be indexed by (u0, u1, u2)")?;
        check(self.x_fn.codomain() <= self.channel.n_in(), "x_fn values exceed the channel input")?;
        check(self.channel.n_out() == self.y_dims[0] * self.y_dims[1], "channel output must be |Y1|·|Y2|")
    }

    /// Joint of (U0, U1, U2, Y1, Y2).
    pub fn joint(&self) -> Result<JointPmf> {
        let d = self.p_u.dims();
        let ny = self.channel.n_out();
        let mut w = vec![0.0; d[0] * d[1] * d[2] * ny];
        for (t, p) in self.p_u.support() {
            let x = self.x_fn.get(&t);
            let base = ((t[0] * d[1] + t[1]) * d[2] + t[2]) * ny;
            for (y, &k) in self.channel.row(x).iter().enumerate() {
                w[base + y] = p * k;
            }
        }
        JointPmf::normalized(vec![d[0], d[1], d[2], self.y_dims[0], self.y_dims[1]], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        let nx = self.channel.n_in();
        Self::new(
            self.p_u.power(n)?,
            self.x_fn.with_codomain(nx)?.power(n)?,
            kernel_power_factored(&self.channel, &[nx], &self.y_dims, n)?,
            [self.y_dims[0].pow(n as u32), self.y_dims[1].pow(n as u32)],
        )
    }
}

/// Distributed lossy source coding of a correlated pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DlscModel {
    /// Joint of (X1, X2).
    pub p_x: JointPmf,
    pub k1: Kernel,
    pub k2: Kernel,
    /// `z1(u1, u2)`
    pub z1_fn: FnTable,
    /// `z2(u1, u2)`
    pub z2_fn: FnTable,
    pub d1: Distortion,
    pub d2: Distortion,
}

impl DlscModel {
    pub fn new(
        p_x: JointPmf,
        k1: Kernel,
        k2: Kernel,
        z1_fn: FnTable,
        z2_fn: FnTable,
        d1: Distortion,
        d2: Distortion,
    ) -> Result<Self> {
        let m = Self { p_x, k1, k2, z1_fn, z2_fn, d1, d2 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.p_x.dims();
        check(d.len() == 2, "p_x must be a joint of (X1, X2)")?;
        check(self.k1.n_in() == d[0] && self.k2.n_in() == d[1], "encoder kernels must take X1 and X2")?;
        let ud = [self.k1.n_out(), self.k2.n_out()];
        check(self.z1_fn.dims() == ud && self.z2_fn.dims() == ud, "z_fns must be indexed by (u1, u2)")?;
        check(self.d1.n_source() == d[0] && self.d2.n_source() == d[1], "distortion rows must match the sources")?;
        check(
            self.z1_fn.codomain() <= self.d1.n_repro() && self.z2_fn.codomain() <= self.d2.n_repro(),
            "z_fn values exceed the distortion columns",
        )
    }

    /// Joint of (X1, X2, U1, U2).
    pub fn joint(&self) -> Result<JointPmf> {
        let d = self.p_x.dims();
        let (n1, n2) = (self.k1.n_out(), self.k2.n_out());
        let mut w = vec![0.0; d[0] * d[1] * n1 * n2];
        for (t, p) in self.p_x.support() {
            for u1 in 0..n1 {
                let a = p * self.k1.get(t[0], u1);
                if a == 0.0 {
                    continue;
                }
                for u2 in 0..n2 {
                    w[((t[0] * d[1] + t[1]) * n1 + u1) * n2 + u2] = a * self.k2.get(t[1], u2);
                }
            }
        }
        JointPmf::normalized(vec![d[0], d[1], n1, n2], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        Self::new(
            self.p_x.power(n)?,
            self.k1.power(n)?,
            self.k2.power(n)?,
            self.z1_fn.with_codomain(self.d1.n_repro())?.power(n)?,
            self.z2_fn.with_codomain(self.d2.n_repro())?.power(n)?,
            self.d1.power(n)?,
            self.d2.power(n)?,
        )
    }

    /// Whether `(x1, x2)` is reproduced outside the targets from `(u1, u2)`.
    pub fn excess(&self, x1: usize, x2: usize, u1: usize, u2: usize, d1: f64, d2: f64) -> bool {
        self.d1.get(x1, self.z1_fn.get2(u1, u2)) > d1 || self.d2.get(x2, self.z2_fn.get2(u1, u2)) > d2
    }
}

/// Two-user multiple access channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MacModel {
    pub p_x1: Pmf,
    pub p_x2: Pmf,
    /// Input index `x1 * |X2| + x2`.
    pub channel: Kernel,
}

impl MacModel {
    pub fn new(p_x1: Pmf, p_x2: Pmf, channel: Kernel) -> Result<Self> {
        let m = Self { p_x1, p_x2, channel };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.channel.n_in() == self.p_x1.len() * self.p_x2.len(), "channel input must be |X1|·|X2|")
    }

    /// Joint of (X1, X2, Y).
    pub fn joint(&self) -> Result<JointPmf> {
        let (n1, n2, ny) = (self.p_x1.len(), self.p_x2.len(), self.channel.n_out());
        let mut w = vec![0.0; n1 * n2 * ny];
        for a in 0..n1 {
            for b in 0..n2 {
                let p = self.p_x1.prob(a) * self.p_x2.prob(b);
                for (y, &k) in self.channel.row(a * n2 + b).iter().enumerate() {
                    w[(a * n2 + b) * ny + y] = p * k;
                }
            }
        }
        JointPmf::normalized(vec![n1, n2, ny], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        Self::new(
            self.p_x1.power(n)?,
            self.p_x2.power(n)?,
            kernel_power_factored(&self.channel, &[self.p_x1.len(), self.p_x2.len()], &[self.channel.n_out()], n)?,
        )
    }
}

/// Wiretap channel with auxiliary input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WiretapModel {
    /// Joint of (U, X).
    pub p_ux: JointPmf,
    /// Output index `y * |Z| + z`.
    pub channel: Kernel,
    pub y_dims: [usize; 2],
}

impl WiretapModel {
    pub fn new(p_ux: JointPmf, channel: Kernel, y_dims: [usize; 2]) -> Result<Self> {
        let m = Self { p_ux, channel, y_dims };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p_ux.dims().len() == 2, "p_ux must be a joint of (U, X)")?;
        check(self.p_ux.dims()[1] == self.channel.n_in(), "X alphabet does not match the channel")?;
        check(self.channel.n_out() == self.y_dims[0] * self.y_dims[1], "channel output must be |Y|·|Z|")
    }

    /// Joint of (U, X, Y, Z).
    pub fn joint(&self) -> Result<JointPmf> {
        let d = self.p_ux.dims();
        let ny = self.channel.n_out();
        let mut w = vec![0.0; d[0] * d[1] * ny];
        for (t, p) in self.p_ux.support() {
            for (y, &k) in self.channel.row(t[1]).iter().enumerate() {
                w[(t[0] * d[1] + t[1]) * ny + y] = p * k;
            }
        }
        JointPmf::normalized(vec![d[0], d[1], self.y_dims[0], self.y_dims[1]], w)
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        let nx = self.channel.n_in();
        Self::new(
            self.p_ux.power(n)?,
            kernel_power_factored(&self.channel, &[nx], &self.y_dims, n)?,
            [self.y_dims[0].pow(n as u32), self.y_dims[1].pow(n as u32)],
        )
    }

    /// `P_{X|U}` as a kernel.
    pub fn x_given_u(&self) -> Result<Kernel> {
        let d = self.p_ux.dims();
        let rows = (0..d[0])
            .map(|u| {
                let r: Vec<f64> = (0..d[1]).map(|x| self.p_ux.prob(&[u, x])).collect();
                let t: f64 = r.iter().sum();
                if t > 0.0 {
                    r.iter().map(|v| v / t).collect()
                } else {
                    let mut e = vec![0.0; d[1]];
                    e[0] = 1.0;
                    e
                }
            })
            .collect();
        Kernel::from_rows(rows)
    }
}
