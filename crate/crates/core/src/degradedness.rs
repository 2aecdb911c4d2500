//! Degradedness coefficients between two channels with a common input.
//!
//! * `eta_ln`: smallest `eta` with `eta I(U;Y1) >= I(U;Y2)` for every
//!   auxiliary `U`. Computed from curvature: the relation holds iff
//!   `eta I(X;Y1) - I(X;Y2)` is concave in `P_X`, i.e. iff `eta` dominates
//!   the generalized Rayleigh quotient `v'(-H2)v / v'(-H1)v` over tangent
//!   directions `v` at every interior input law.
//! * `eta_mc`: supremum of `I(X;Y2) / I(X;Y1)` over input laws.
//! * `eta_kl`: `eta_ln` against the noiseless channel on the input alphabet.
//!
//! Stochastic degradedness is decided exactly by a phase-one LP over the
//! entries of the intermediate kernel.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, Distribution};
use crate::error::{Error, Result};
use crate::infotheory::{kl_nats, mi_bits_raw, neg_hessian_raw};
use crate::lp;
use crate::optim::{golden_max, logits_of, random_simplex, rng_for, simplex_grid, softmax_into, NelderMead};

/// Default residual / margin used to classify [`test_degraded`] outcomes.
pub const DEGRADED_TOL: f64 = 1e-9;

/// Slack below which an eta_ln sandwich bound is reported as failing.
pub const BOUND_SLACK_TOL: f64 = 1e-6;

/// Search budget for the suprema over the input simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Uniform grid size on `[margin, 1 - margin]` for binary inputs.
    pub binary_points: usize,
    /// Simplex grid resolution for three or more inputs.
    pub resolution: usize,
    /// Interior margin kept from the simplex boundary.
    pub margin: f64,
    /// Number of grid maxima refined by local search.
    pub refine_starts: usize,
    /// `eta_mc` only considers laws with `I(X;Y1)` above this (bits).
    pub ratio_floor: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { binary_points: 2001, resolution: 24, margin: 1e-6, refine_starts: 6, ratio_floor: 1e-10, seed: 0 }
    }
}

impl GridSpec {
    fn coarser(&self) -> Self {
        Self {
            binary_points: (self.binary_points / 2).max(11),
            resolution: (self.resolution / 2).max(2),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaMethod {
    EigenGrid,
    RatioGrid,
    DivergenceSearch,
}

/// A degradedness coefficient with the input law approaching the supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub value: f64,
    /// `value <= 1`: the strong relation holds with some `eta <= 1`.
    pub comparable: bool,
    /// Some tangent direction is invisible through the first channel but not
    /// through the second; `value` is `+inf`.
    pub unbounded: bool,
    pub witness: Distribution,
    /// Tangent direction attaining the quotient (`eta_ln`), or `P - Q` for the
    /// divergence search.
    pub direction: Option<Vec<f64>>,
    pub method: EtaMethod,
    /// Change of the value when the grid is coarsened by a factor of two.
    pub certified_gap: f64,
}

impl EtaReport {
    fn new(value: f64, witness: Vec<f64>, direction: Option<Vec<f64>>, method: EtaMethod, gap: f64) -> Self {
        Self {
            value,
            comparable: value <= 1.0 + 1e-9,
            unbounded: value.is_infinite(),
            witness: Distribution::from_unnormalized(witness),
            direction,
            method,
            certified_gap: gap,
        }
    }
}

fn check_pair(ch1: &Channel, ch2: &Channel) -> Result<()> {
    if ch1.input_size() != ch2.input_size() {
        return Err(Error::DimensionMismatch {
            what: "channel pair input",
            expected: ch1.input_size(),
            found: ch2.input_size(),
        });
    }
    Ok(())
}

/// Orthonormal basis of `{v : sum v = 0}` (Helmert columns), `n x (n-1)`.
fn tangent_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n - 1);
    for k in 1..n {
        let s = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = 1.0 / s;
        }
        b[(k, k - 1)] = -(k as f64) / s;
    }
    b
}

/// Largest generalized eigenvalue of `(num, den)` with its eigenvector, both
/// symmetric positive semidefinite. `+inf` when `den` has a null direction on
/// which `num` is positive.
fn max_generalized_eig(num: &DMatrix<f64>, den: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = num.nrows();
    if n == 1 {
        let (a, m) = (num[(0, 0)], den[(0, 0)]);
        let scale = a.abs().max(m.abs()).max(f64::MIN_POSITIVE);
        let v = DVector::from_element(1, 1.0);
        if m <= 1e-13 * scale {
            return (if a > 1e-12 * scale { f64::INFINITY } else { 0.0 }, v);
        }
        return (a / m, v);
    }
    if let Some(chol) = Cholesky::new(den.clone()) {
        let l = chol.l();
        let diag_min = l.diagonal().iter().copied().fold(f64::INFINITY, f64::min);
        let diag_max = l.diagonal().iter().copied().fold(0.0, f64::max);
        if diag_min > 1e-4 * diag_max {
            let linv = l.clone().try_inverse().expect("triangular factor with positive diagonal");
            let c = &linv * num * linv.transpose();
            let c = (&c + c.transpose()) * 0.5;
            let eig = SymmetricEigen::new(c);
            let (i, lam) = argmax(eig.eigenvalues.iter().copied());
            let w = eig.eigenvectors.column(i).into_owned();
            return (lam, linv.transpose() * w);
        }
    }
    // rank-deficient denominator: whiten on its range, test its null space
    let eig = SymmetricEigen::new(den.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let num_scale = num.trace().abs().max(f64::MIN_POSITIVE);
    let mut range = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let u = eig.eigenvectors.column(i).into_owned();
        if lam <= 1e-10 * top {
            let a = (u.transpose() * num * &u)[(0, 0)];
            if a > 1e-8 * num_scale {
                return (f64::INFINITY, u);
            }
        } else {
            range.push(u / lam.sqrt());
        }
    }
    if range.is_empty() {
        return (0.0, DVector::zeros(n));
    }
    let w = DMatrix::from_columns(&range);
    let c = w.transpose() * num * &w;
    let c = (&c + c.transpose()) * 0.5;
    let e = SymmetricEigen::new(c);
    let (i, lam) = argmax(e.eigenvalues.iter().copied());
    (lam, w * e.eigenvectors.column(i))
}

fn argmax(it: impl Iterator<Item = f64>) -> (usize, f64) {
    it.enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b })
}

/// Curvature quotient `sup_v v'(-H2)v / v'(-H1)v` at input law `p`.
struct Curvature<'a> {
    ch1: &'a Channel,
    ch2: &'a Channel,
    basis: DMatrix<f64>,
}

impl<'a> Curvature<'a> {
    fn new(ch1: &'a Channel, ch2: &'a Channel) -> Self {
        Self { ch1, ch2, basis: tangent_basis(ch1.input_size()) }
    }

    fn forms(&self, p: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = &self.basis;
        let m = b.transpose() * neg_hessian_raw(p, self.ch1) * b;
        let a = b.transpose() * neg_hessian_raw(p, self.ch2) * b;
        ((&a + a.transpose()) * 0.5, (&m + m.transpose()) * 0.5)
    }

    fn quotient(&self, p: &[f64]) -> f64 {
        if p.len() == 2 {
            // scalar fast path along v = (-1, 1)
            let (r1, r2) = (self.ch1, self.ch2);
            let form = |ch: &Channel| -> f64 {
                ch.row(0)
                    .iter()
                    .zip(ch.row(1))
                    .map(|(a, b)| {
                        let q = p[0] * a + p[1] * b;
                        if q > 0.0 {
                            (b - a) * (b - a) / q
                        } else {
                            0.0
                        }
                    })
                    .sum()
            };
            let (a, m) = (form(r2), form(r1));
            let scale = a.max(m).max(f64::MIN_POSITIVE);
            if m <= 1e-13 * scale {
                return if a > 1e-12 * scale { f64::INFINITY } else { 0.0 };
            }
            return a / m;
        }
        let (a, m) = self.forms(p);
        max_generalized_eig(&a, &m).0
    }

    fn direction(&self, p: &[f64]) -> Vec<f64> {
        let (a, m) = self.forms(p);
        let (_, w) = max_generalized_eig(&a, &m);
        let v = &self.basis * w;
        let norm = v.norm().max(f64::MIN_POSITIVE);
        v.iter().map(|x| x / norm).collect()
    }

    /// Smallest tangent eigenvalue of `eta (-H1) - (-H2)`.
    fn min_eig(&self, p: &[f64], eta: f64) -> f64 {
        let (a, m) = self.forms(p);
        let s = m * eta - a;
        SymmetricEigen::new(s).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn binary_grid(spec: &GridSpec) -> Vec<f64> {
    let (lo, hi) = (spec.margin, 1.0 - spec.margin);
    let n = spec.binary_points.max(3);
    let mut pts: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    // log-spaced layers toward both edges
    let mut t = spec.margin * 2.0;
    while t < 1.0 / (n as f64) {
        pts.push(t);
        pts.push(1.0 - t);
        t *= 1.5;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn interior_grid(n: usize, spec: &GridSpec) -> Vec<Vec<f64>> {
    let scale = 1.0 - spec.margin * n as f64;
    simplex_grid(n, spec.resolution)
        .into_iter()
        .map(|g| g.into_iter().map(|v| spec.margin + scale * v).collect())
        .collect()
}

/// Supremum of `f` over the simplex (with margin) by grid plus local refinement.
fn simplex_sup<F>(n: usize, spec: &GridSpec, f: F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n == 1 {
        return (f(&[1.0]), vec![1.0]);
    }
    if n == 2 {
        let grid = binary_grid(spec);
        let vals: Vec<f64> = grid.par_iter().map(|&t| f(&[1.0 - t, t])).collect();
        if let Some(i) = vals.iter().position(|v| v.is_infinite() && *v > 0.0) {
            return (f64::INFINITY, vec![1.0 - grid[i], grid[i]]);
        }
        // local maxima of the grid, best first
        let mut peaks: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let left = i == 0 || vals[i] >= vals[i - 1];
                let right = i + 1 == grid.len() || vals[i] >= vals[i + 1];
                left && right && vals[i].is_finite()
            })
            .collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        peaks.truncate(spec.refine_starts.max(1));
        let mut best = (f64::NEG_INFINITY, 0.5);
        for &i in &peaks {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let (t, v) = golden_max(|t| f(&[1.0 - t, t]), lo, hi, 1e-12);
            let (t, v) = if vals[i] >= v { (grid[i], vals[i]) } else { (t, v) };
            if v > best.0 {
                best = (v, t);
            }
        }
        return (best.0, vec![1.0 - best.1, best.1]);
    }
    let grid = interior_grid(n, spec);
    let vals: Vec<f64> = grid.par_iter().map(|p| f(p)).collect();
    if let Some(i) = vals.iter().position(|v| v.is_infinite() && *v > 0.0) {
        return (f64::INFINITY, grid[i].clone());
    }
    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| vals[i].is_finite()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    order.truncate(spec.refine_starts.max(1));
    let nm = NelderMead { max_evals: 600 * n, initial_step: 0.3, ftol: 1e-14 };
    let scale = 1.0 - spec.margin * n as f64;
    let refined: Vec<(f64, Vec<f64>)> = order
        .par_iter()
        .map(|&i| {
            let g: Vec<f64> = grid[i].iter().map(|v| (v - spec.margin) / scale).collect();
            let z0 = logits_of(&g, 1e-4);
            let mut buf = vec![0.0; n];
            let (z, v) = nm.minimize(
                |z| {
                    softmax_into(z, spec.margin, &mut buf);
                    let r = f(&buf);
                    if r.is_nan() {
                        f64::INFINITY
                    } else {
                        -r
                    }
                },
                &z0,
            );
            let mut p = vec![0.0; n];
            softmax_into(&z, spec.margin, &mut p);
            if -v >= vals[i] {
                (-v, p)
            } else {
                (vals[i], grid[i].clone())
            }
        })
        .collect();
    refined
        .into_iter()
        .fold((f64::NEG_INFINITY, grid[0].clone()), |b, c| if c.0 > b.0 { c } else { b })
}

/// Linear extrapolation toward the boundary when the supremum sits at the
/// interior margin and is still increasing there.
fn boundary_extrapolate<F: Fn(&[f64]) -> f64>(p: &[f64], value: f64, margin: f64, f: F) -> f64 {
    let near: Vec<bool> = p.iter().map(|&v| v < 10.0 * margin).collect();
    if !near.iter().any(|&b| b) || !value.is_finite() {
        return value;
    }
    let mut wider: Vec<f64> = p.iter().zip(&near).map(|(&v, &b)| if b { 2.0 * v } else { v }).collect();
    let s: f64 = wider.iter().sum();
    wider.iter_mut().for_each(|v| *v /= s);
    let v2 = f(&wider);
    if v2.is_finite() && v2 < value {
        value.max(2.0 * value - v2)
    } else {
        value
    }
}

fn ensure_informative(ch: &Channel, role: &'static str) -> Result<()> {
    if ch.is_useless() {
        Err(Error::ZeroCapacity(role))
    } else {
        Ok(())
    }
}

/// Input pair `(x, x')` with `supp W1(.|x)` inside `supp W1(.|x')` but
/// `supp W2(.|x)` not inside `supp W2(.|x')`. Near the vertex `x'`, moving
/// mass `d` onto `x` costs `O(d)` through the first channel but
/// `d log(1/d)` through the second, so both coefficients are infinite.
fn support_escape(ch1: &Channel, ch2: &Channel) -> Option<(usize, usize)> {
    let inside = |ch: &Channel, x: usize, xp: usize| ch.row(x).iter().zip(ch.row(xp)).all(|(a, b)| *a == 0.0 || *b > 0.0);
    let n = ch1.input_size();
    (0..n)
        .flat_map(|x| (0..n).map(move |xp| (x, xp)))
        .find(|&(x, xp)| x != xp && inside(ch1, x, xp) && !inside(ch2, x, xp))
}

fn escape_report(n: usize, (x, xp): (usize, usize), method: EtaMethod, margin: f64) -> EtaReport {
    let mut w = vec![0.0; n];
    w[xp] = 1.0 - margin;
    w[x] = margin;
    let mut d = vec![0.0; n];
    d[x] = std::f64::consts::FRAC_1_SQRT_2;
    d[xp] = -std::f64::consts::FRAC_1_SQRT_2;
    EtaReport::new(f64::INFINITY, w, Some(d), method, 0.0)
}

fn eta_ln_at(ch1: &Channel, ch2: &Channel, spec: &GridSpec) -> (f64, Vec<f64>) {
    let curv = Curvature::new(ch1, ch2);
    let (v, p) = simplex_sup(ch1.input_size(), spec, |p| curv.quotient(p));
    let v = boundary_extrapolate(&p, v, spec.margin, |p| curv.quotient(p));
    (v, p)
}

/// Strong less-noisy coefficient of the pair via the curvature quotient.
pub fn eta_ln(ch1: &Channel, ch2: &Channel, spec: &GridSpec) -> Result<EtaReport> {
    check_pair(ch1, ch2)?;
    ensure_informative(ch1, "first channel")?;
    if let Some(pair) = support_escape(ch1, ch2) {
        return Ok(escape_report(ch1.input_size(), pair, EtaMethod::EigenGrid, spec.margin));
    }
    let (value, witness) = eta_ln_at(ch1, ch2, spec);
    let (coarse, _) = eta_ln_at(ch1, ch2, &spec.coarser());
    let gap = if value.is_finite() { (value - coarse).abs() } else { 0.0 };
    let direction = Curvature::new(ch1, ch2).direction(&witness);
    Ok(EtaReport::new(value, witness, Some(direction), EtaMethod::EigenGrid, gap))
}

/// Contraction coefficient of `ch`: `eta_ln(identity, ch)`.
pub fn eta_kl(ch: &Channel, spec: &GridSpec) -> Result<EtaReport> {
    eta_ln(&Channel::identity(ch.input_size()), ch, spec)
}

fn eta_mc_at(ch1: &Channel, ch2: &Channel, spec: &GridSpec) -> (f64, Vec<f64>) {
    let floor = spec.ratio_floor;
    simplex_sup(ch1.input_size(), spec, |p| {
        let i1 = mi_bits_raw(p, ch1);
        if i1 > floor {
            mi_bits_raw(p, ch2) / i1
        } else {
            f64::NEG_INFINITY
        }
    })
}

/// Strong more-capable coefficient: `sup I(X;Y2) / I(X;Y1)`.
pub fn eta_mc(ch1: &Channel, ch2: &Channel, spec: &GridSpec) -> Result<EtaReport> {
    check_pair(ch1, ch2)?;
    ensure_informative(ch1, "first channel")?;
    if let Some(pair) = support_escape(ch1, ch2) {
        let mut r = escape_report(ch1.input_size(), pair, EtaMethod::RatioGrid, spec.margin);
        r.direction = None;
        return Ok(r);
    }
    let (value, witness) = eta_mc_at(ch1, ch2, spec);
    let (coarse, _) = eta_mc_at(ch1, ch2, &spec.coarser());
    Ok(EtaReport::new(value, witness, None, EtaMethod::RatioGrid, (value - coarse).abs()))
}

/// Lower bound on `eta_ln` from the output-divergence ratio
/// `D(W2 P || W2 Q) / D(W1 P || W1 Q)` over seeded random pairs, refined by
/// local ascent. Only pairs with `0 < D(W1 P || W1 Q) < inf` count.
pub fn eta_ln_div_lower(ch1: &Channel, ch2: &Channel, trials: usize, seed: u64) -> Result<EtaReport> {
    check_pair(ch1, ch2)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let n = ch1.input_size();
    if n < 2 {
        return Err(Error::NoFeasiblePair("single-letter input alphabet".into()));
    }
    const D_FLOOR: f64 = 1e-12;
    let ratio = |p: &[f64], q: &[f64]| -> Option<f64> {
        let d1 = kl_nats(&ch1.push_raw(p), &ch1.push_raw(q));
        if !(d1 > D_FLOOR) || !d1.is_finite() {
            return None;
        }
        Some(kl_nats(&ch2.push_raw(p), &ch2.push_raw(q)) / d1)
    };
    let mut rng = rng_for(seed, 0);
    let mut pool: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for _ in 0..trials {
        let p = random_simplex(&mut rng, n);
        let q = random_simplex(&mut rng, n);
        if let Some(r) = ratio(&p, &q) {
            pool.push((r, p, q));
        }
    }
    if pool.is_empty() {
        return Err(Error::NoFeasiblePair(format!("none of {trials} sampled pairs separates the first channel")));
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(8);
    let nm = NelderMead { max_evals: 4000, initial_step: 0.3, ftol: 1e-15 };
    let refined: Vec<(f64, Vec<f64>, Vec<f64>)> = pool
        .par_iter()
        .map(|(r0, p0, q0)| {
            let mut z0 = logits_of(p0, 1e-12);
            z0.extend(logits_of(q0, 1e-12));
            let split = |z: &[f64]| {
                let mut p = vec![0.0; n];
                let mut q = vec![0.0; n];
                softmax_into(&z[..n], 0.0, &mut p);
                softmax_into(&z[n..], 0.0, &mut q);
                (p, q)
            };
            let (z, v) = nm.minimize(
                |z| {
                    let (p, q) = split(z);
                    ratio(&p, &q).map_or(f64::INFINITY, |r| -r)
                },
                &z0,
            );
            if -v > *r0 {
                let (p, q) = split(&z);
                (-v, p, q)
            } else {
                (*r0, p0.clone(), q0.clone())
            }
        })
        .collect();
    let (value, p, q) = refined.into_iter().fold((f64::NEG_INFINITY, vec![], vec![]), |b, c| if c.0 > b.0 { c } else { b });
    let direction: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
    Ok(EtaReport::new(value, q, Some(direction), EtaMethod::DivergenceSearch, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegradedStatus {
    Degraded,
    NotDegraded,
    Indeterminate,
}

/// Farkas certificate against `ch2 = cascade(ch1, K)`.
///
/// For every kernel entry `(y1, y2)`:
/// `row_weights[y1] + sum_x output_weights[x][y2] ch1(y1|x) <= 0`, while
/// `sum row_weights + sum_{x,y2} output_weights[x][y2] ch2(y2|x) = margin > 0`
/// (after normalization to unit max-norm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub row_weights: Vec<f64>,
    pub output_weights: Vec<Vec<f64>>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradednessCertificate {
    pub status: DegradedStatus,
    pub degraded: bool,
    /// `K` with `cascade(ch1, K) = ch2` when degraded.
    pub intermediate: Option<Channel>,
    /// Max-abs reconstruction error of the extracted `K`.
    pub residual: f64,
    pub dual: Option<DualCertificate>,
}

/// Decides whether `ch2` is a stochastically degraded version of `ch1`.
pub fn test_degraded(ch1: &Channel, ch2: &Channel, tol: f64) -> Result<DegradednessCertificate> {
    check_pair(ch1, ch2)?;
    let (nx, n1, n2) = (ch1.input_size(), ch1.output_size(), ch2.output_size());
    let cols = n1 * n2;
    let rows = n1 + nx * n2;
    let mut a = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    for y1 in 0..n1 {
        for y2 in 0..n2 {
            a[y1 * cols + y1 * n2 + y2] = 1.0;
        }
        b[y1] = 1.0;
    }
    for x in 0..nx {
        for y2 in 0..n2 {
            let r = n1 + x * n2 + y2;
            for y1 in 0..n1 {
                a[r * cols + y1 * n2 + y2] = ch1.get(x, y1);
            }
            b[r] = ch2.get(x, y2);
        }
    }
    let sol = lp::phase_one(&a, &b, rows, cols);

    // primal candidate
    let mut kernel: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
    for row in kernel.chunks_mut(n2) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / n2 as f64);
        }
    }
    let mut residual: f64 = 0.0;
    for x in 0..nx {
        for y2 in 0..n2 {
            let v: f64 = (0..n1).map(|y1| ch1.get(x, y1) * kernel[y1 * n2 + y2]).sum();
            residual = residual.max((v - ch2.get(x, y2)).abs());
        }
    }
    if residual <= tol {
        let rows: Vec<Vec<f64>> = kernel.chunks(n2).map(<[f64]>::to_vec).collect();
        let intermediate = Channel::new(&rows)?;
        return Ok(DegradednessCertificate {
            status: DegradedStatus::Degraded,
            degraded: true,
            intermediate: Some(intermediate),
            residual,
            dual: None,
        });
    }

    // Farkas margin, robust to slightly positive A^T y: any feasible K has
    // sum of entries n1, so b^T y <= n1 * max(A^T y)+
    let y = &sol.duals;
    let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let bty: f64 = b.iter().zip(y).map(|(u, v)| u * v).sum();
    let worst_aty = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j] * y[i]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = (bty - n1 as f64 * worst_aty.max(0.0)) / norm;
    let dual = DualCertificate {
        row_weights: y[..n1].iter().map(|v| v / norm).collect(),
        output_weights: (0..nx).map(|x| (0..n2).map(|y2| y[n1 + x * n2 + y2] / norm).collect()).collect(),
        margin,
    };
    let status = if margin >= tol { DegradedStatus::NotDegraded } else { DegradedStatus::Indeterminate };
    Ok(DegradednessCertificate { status, degraded: false, intermediate: None, residual, dual: Some(dual) })
}

/// The three coefficients and both bounds relating them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub eta_ln: f64,
    pub eta_kl_first: f64,
    pub eta_kl_second: f64,
    /// `eta_kl(ch2) / eta_kl(ch1)`.
    pub lower_bound: f64,
    /// `eta_ln - lower_bound`.
    pub lower_slack: f64,
    pub lower_pass: bool,
    pub degradedness: DegradednessCertificate,
    /// `eta_kl` of the intermediate channel, when the pair is degraded.
    pub upper_bound: Option<f64>,
    /// `upper_bound - eta_ln`.
    pub upper_slack: Option<f64>,
    pub upper_pass: Option<bool>,
}

/// Evaluates `eta_kl(ch2)/eta_kl(ch1) <= eta_ln <= eta_kl(K)` for the pair,
/// the upper bound only when a degrading kernel `K` exists.
pub fn lemma2_report(ch1: &Channel, ch2: &Channel, spec: &GridSpec) -> Result<Lemma2Report> {
    check_pair(ch1, ch2)?;
    ensure_informative(ch1, "first channel")?;
    ensure_informative(ch2, "second channel")?;
    let eta = eta_ln(ch1, ch2, spec)?.value;
    let kl1 = eta_kl(ch1, spec)?.value;
    let kl2 = eta_kl(ch2, spec)?.value;
    let lower = kl2 / kl1;
    let lower_slack = eta - lower;
    let degradedness = test_degraded(ch1, ch2, DEGRADED_TOL)?;
    let upper_bound = match &degradedness.intermediate {
        Some(k) if k.is_useless() => Some(0.0),
        Some(k) => Some(eta_kl(k, spec)?.value),
        None => None,
    };
    let upper_slack = upper_bound.map(|u| u - eta);
    Ok(Lemma2Report {
        eta_ln: eta,
        eta_kl_first: kl1,
        eta_kl_second: kl2,
        lower_bound: lower,
        lower_slack,
        lower_pass: lower_slack >= -BOUND_SLACK_TOL,
        degradedness,
        upper_bound,
        upper_slack,
        upper_pass: upper_slack.map(|s| s >= -BOUND_SLACK_TOL),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityCheck {
    pub concave: bool,
    /// Grid point with the most negative tangent eigenvalue.
    pub worst_point: Distribution,
    pub worst_eigenvalue: f64,
}

/// Tangent eigenvalue floor below which concavity is declared violated.
pub const CONCAVITY_FLOOR: f64 = -1e-9;

/// Whether `eta I(X;Y1) - I(X;Y2)` is concave at every grid point.
pub fn check_concavity(ch1: &Channel, ch2: &Channel, eta: f64, spec: &GridSpec) -> Result<ConcavityCheck> {
    check_pair(ch1, ch2)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let curv = Curvature::new(ch1, ch2);
    let n = ch1.input_size();
    let points: Vec<Vec<f64>> = if n == 2 {
        binary_grid(spec).into_iter().map(|t| vec![1.0 - t, t]).collect()
    } else {
        interior_grid(n, spec)
    };
    let eigs: Vec<f64> = points.par_iter().map(|p| curv.min_eig(p, eta)).collect();
    let (i, worst) = eigs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
    Ok(ConcavityCheck {
        concave: worst >= CONCAVITY_FLOOR,
        worst_point: Distribution::from_unnormalized(points[i].clone()),
        worst_eigenvalue: worst,
    })
}
