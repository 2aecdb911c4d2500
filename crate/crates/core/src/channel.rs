//! Discrete memoryless channels, input distributions and auxiliary joints.
//!
//! A [`Channel`] is a row-stochastic kernel `W(y|x)` stored row-major. Output
//! symbols that no input can produce are pruned at construction, so an
//! interior input distribution always yields a strictly positive output law.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on row sums accepted by [`Channel::new`].
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Tolerance on the total mass accepted by [`Distribution::new`].
pub const DIST_SUM_TOL: f64 = 1e-9;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and renormalizes `probs`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self::from_unnormalized(probs))
    }

    /// Normalizes nonnegative weights without checking the total.
    pub(crate) fn from_unnormalized(mut probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "alphabet size must be positive");
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Bernoulli input law with `P(X = 1) = theta`.
    pub fn bernoulli(theta: f64) -> Result<Self> {
        Self::new(vec![1.0 - theta, theta])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Smallest entry, used for interior checks.
    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Canonical channel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardKind {
    Bsc,
    Bec,
    #[serde(alias = "z")]
    Zchannel,
    Identity,
}

impl StandardKind {
    pub fn name(self) -> &'static str {
        match self {
            StandardKind::Bsc => "bsc",
            StandardKind::Bec => "bec",
            StandardKind::Zchannel => "z",
            StandardKind::Identity => "identity",
        }
    }
}

/// Where a channel came from and what canonicalization did to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Set for channels built by [`Channel::standard`].
    pub standard: Option<(StandardKind, f64)>,
    /// Indices (in the caller's column numbering) of all-zero output columns
    /// removed at construction.
    pub pruned_columns: Vec<usize>,
}

/// A discrete memoryless channel `W(y|x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Channel {
    input_size: usize,
    output_size: usize,
    /// Row-major `input_size x output_size`.
    kernel: Vec<f64>,
    provenance: Provenance,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.input_size == other.input_size
            && self.output_size == other.output_size
            && self.kernel == other.kernel
    }
}

impl Channel {
    /// Builds a channel from its transition rows.
    ///
    /// Rows are renormalized exactly once here; all-zero output columns are
    /// dropped and recorded in [`Provenance::pruned_columns`].
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::InvalidChannel("no output symbols".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            for &w in row {
                if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidChannel(format!("row {x}: entry {w} outside [0, 1]")));
                }
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {total}")));
            }
        }
        let keep: Vec<usize> = (0..width).filter(|&y| rows.iter().any(|r| r[y] > 0.0)).collect();
        let pruned_columns: Vec<usize> = (0..width).filter(|y| !keep.contains(y)).collect();
        let output_size = keep.len();
        let mut kernel = Vec::with_capacity(input_size * output_size);
        for row in rows {
            let total: f64 = keep.iter().map(|&y| row[y]).sum();
            kernel.extend(keep.iter().map(|&y| row[y] / total));
        }
        Ok(Self {
            input_size,
            output_size,
            kernel,
            provenance: Provenance { standard: None, pruned_columns },
        })
    }

    /// Canonical channels. `param` is the crossover / erasure probability, or
    /// the alphabet size for [`StandardKind::Identity`].
    pub fn standard(kind: StandardKind, param: f64) -> Result<Self> {
        let rows = match kind {
            StandardKind::Identity => {
                if param < 1.0 || param.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "identity size must be a positive integer, got {param}"
                    )));
                }
                let n = param as usize;
                (0..n)
                    .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                    .collect::<Vec<Vec<f64>>>()
            }
            _ if !(0.0..=1.0).contains(&param) => {
                return Err(Error::InvalidParameter(format!(
                    "{} parameter {param} outside [0, 1]",
                    kind.name()
                )))
            }
            StandardKind::Bsc => vec![vec![1.0 - param, param], vec![param, 1.0 - param]],
            // output order (0, erasure, 1)
            StandardKind::Bec => vec![vec![1.0 - param, param, 0.0], vec![0.0, param, 1.0 - param]],
            StandardKind::Zchannel => vec![vec![1.0 - param, param], vec![0.0, 1.0]],
        };
        let mut ch = Self::new(&rows)?;
        ch.provenance.standard = Some((kind, param));
        Ok(ch)
    }

    pub fn bsc(p: f64) -> Result<Self> {
        Self::standard(StandardKind::Bsc, p)
    }

    pub fn bec(p: f64) -> Result<Self> {
        Self::standard(StandardKind::Bec, p)
    }

    pub fn z(eps: f64) -> Result<Self> {
        Self::standard(StandardKind::Zchannel, eps)
    }

    pub fn identity(n: usize) -> Self {
        Self::standard(StandardKind::Identity, n as f64).expect("identity size is positive")
    }

    pub(crate) fn from_kernel(input_size: usize, output_size: usize, kernel: Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = kernel.chunks(output_size).map(<[f64]>::to_vec).collect();
        debug_assert_eq!(rows.len(), input_size);
        Self::new(&rows)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.kernel[x * self.output_size + y]
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.kernel[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.kernel.chunks(self.output_size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Output law `q(y) = sum_x p(x) W(y|x)`.
    pub fn push_forward(&self, p: &Distribution) -> Result<Distribution> {
        self.check_input(p.len())?;
        Ok(Distribution { probs: self.push_raw(p.probs()) })
    }

    pub(crate) fn push_raw(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.output_size];
        self.push_into(p, &mut q);
        q
    }

    pub(crate) fn push_into(&self, p: &[f64], q: &mut [f64]) {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (px, row) in p.iter().zip(self.rows()) {
            if *px == 0.0 {
                continue;
            }
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += px * w;
            }
        }
    }

    /// The channel `second ∘ self`: `(y2|x) -> sum_y1 second(y2|y1) self(y1|x)`.
    pub fn cascade(&self, second: &Channel) -> Result<Channel> {
        if self.output_size != second.input_size {
            return Err(Error::DimensionMismatch {
                what: "cascade",
                expected: self.output_size,
                found: second.input_size,
            });
        }
        let mut kernel = vec![0.0; self.input_size * second.output_size];
        for x in 0..self.input_size {
            let out = &mut kernel[x * second.output_size..(x + 1) * second.output_size];
            for (y1, w) in self.row(x).iter().enumerate() {
                for (o, k) in out.iter_mut().zip(second.row(y1)) {
                    *o += w * k;
                }
            }
        }
        Self::from_kernel(self.input_size, second.output_size, kernel)
    }

    /// Channel with output symbols reordered: new output `j` is old output `perm[j]`.
    pub fn permute_outputs(&self, perm: &[usize]) -> Result<Channel> {
        if perm.len() != self.output_size {
            return Err(Error::DimensionMismatch {
                what: "output permutation",
                expected: self.output_size,
                found: perm.len(),
            });
        }
        let rows: Vec<Vec<f64>> = self.rows().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        Channel::new(&rows)
    }

    pub(crate) fn check_input(&self, n: usize) -> Result<()> {
        if n != self.input_size {
            return Err(Error::DimensionMismatch { what: "channel input", expected: self.input_size, found: n });
        }
        Ok(())
    }

    /// True when every row is the same law, i.e. the output carries no information.
    pub fn is_useless(&self) -> bool {
        let first = self.row(0);
        self.rows().all(|r| r.iter().zip(first).all(|(a, b)| (a - b).abs() <= 1e-15))
    }

    /// Max absolute entrywise difference between kernels of equal shape.
    pub fn max_abs_diff(&self, other: &Channel) -> Option<f64> {
        if self.input_size != other.input_size || self.output_size != other.output_size {
            return None;
        }
        Some(self.kernel.iter().zip(&other.kernel).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (x, row) in self.rows().enumerate() {
            if x > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (y, w) in row.iter().enumerate() {
                if y > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{w:?}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Parses the bracketed row notation written by `Display`.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let bad = |m: &str| Error::Parse(format!("{m} in {text:?}"));
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| bad("missing outer brackets"))?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body_start = rest.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
        let end = body_start.find(']').ok_or_else(|| bad("unterminated row"))?;
        let row = body_start[..end]
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        rest = body_start[end + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(rows)
}

/// Joint law of an auxiliary `U` and the channel input `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryJoint {
    u_marginal: Distribution,
    conditionals: Vec<Distribution>,
}

impl AuxiliaryJoint {
    pub fn new(u_marginal: Distribution, conditionals: Vec<Distribution>) -> Result<Self> {
        if u_marginal.len() != conditionals.len() {
            return Err(Error::DimensionMismatch {
                what: "auxiliary conditionals",
                expected: u_marginal.len(),
                found: conditionals.len(),
            });
        }
        let nx = conditionals[0].len();
        if let Some(c) = conditionals.iter().find(|c| c.len() != nx) {
            return Err(Error::DimensionMismatch { what: "auxiliary input alphabet", expected: nx, found: c.len() });
        }
        Ok(Self { u_marginal, conditionals })
    }

    /// `U` independent of `X`.
    pub fn constant(p: &Distribution) -> Self {
        Self { u_marginal: Distribution::point_mass(1, 0), conditionals: vec![p.clone()] }
    }

    /// `U = X`.
    pub fn identity(p: &Distribution) -> Self {
        let n = p.len();
        Self {
            u_marginal: p.clone(),
            conditionals: (0..n).map(|x| Distribution::point_mass(n, x)).collect(),
        }
    }

    pub fn u_marginal(&self) -> &Distribution {
        &self.u_marginal
    }

    pub fn conditionals(&self) -> &[Distribution] {
        &self.conditionals
    }

    pub fn aux_size(&self) -> usize {
        self.u_marginal.len()
    }

    pub fn input_size(&self) -> usize {
        self.conditionals[0].len()
    }

    /// Induced input law `sum_u P_U(u) P_{X|U}(.|u)`.
    pub fn x_marginal(&self) -> Distribution {
        let mut px = vec![0.0; self.input_size()];
        for (pu, c) in self.u_marginal.probs().iter().zip(&self.conditionals) {
            for (a, b) in px.iter_mut().zip(c.probs()) {
                *a += pu * b;
            }
        }
        Distribution::from_unnormalized(px)
    }

    /// Moves every conditional a fraction `s` toward the input marginal,
    /// keeping `P_X` fixed. `s = 1` makes `U` independent of `X`.
    pub fn shrink(&self, s: f64) -> Self {
        let px = self.x_marginal();
        let conditionals = self
            .conditionals
            .iter()
            .map(|c| {
                Distribution::from_unnormalized(
                    c.probs().iter().zip(px.probs()).map(|(a, b)| (1.0 - s) * a + s * b).collect(),
                )
            })
            .collect();
        Self { u_marginal: self.u_marginal.clone(), conditionals }
    }

    /// Flattened `P_{UX}(u, x)`, row-major in `u`.
    pub fn joint_flat(&self) -> Vec<f64> {
        self.u_marginal
            .probs()
            .iter()
            .zip(&self.conditionals)
            .flat_map(|(pu, c)| c.probs().iter().map(move |px| pu * px))
            .collect()
    }
}
