//! Rate regions and capacities for the cooperative broadcast channel, the
//! primitive relay channel and the broadcast diamond channel.
//!
//! Link capacities are in bits per channel use. Cut-set bounds use only the
//! conditional marginals `P_{Yk|X}`; no joint output law is ever needed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aux::{joint_stats, mix_joints, search, AuxSpace, AuxStats};
use crate::channel::{AuxiliaryJoint, Channel, Distribution};
use crate::degradedness::{eta_ln, eta_mc, EtaReport, GridSpec};
use crate::error::{Error, Result};
use crate::infotheory::{capacity_value, mi_bits_raw, mi_gradient_nats, LOG2_E};
use crate::optim::{golden_max, logits_of, mirror_ascent, simplex_golden_max, simplex_grid, softmax_into, NelderMead};

/// Slack allowed when checking threshold conditions on link capacities.
pub const CONDITION_TOL: f64 = 1e-6;

/// Capacities below this (bits) count as zero.
pub const ZERO_CAPACITY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

/// Upper-right frontier of a down-closed region, sorted by `r1` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub boundary: Vec<RatePoint>,
    /// Auxiliary joint achieving (or dominating) each boundary point.
    pub generators: Vec<AuxiliaryJoint>,
    pub coop_capacity: f64,
}

impl RateRegion {
    /// Largest `r1` on the frontier at height `r2`, `None` above the region.
    pub fn r1_at(&self, r2: f64) -> Option<f64> {
        let b = &self.boundary;
        if b.is_empty() || r2 > b[0].r2 + 1e-12 {
            return None;
        }
        for w in b.windows(2) {
            let (p, q) = (w[0], w[1]);
            if r2 <= p.r2 && r2 >= q.r2 {
                if (p.r2 - q.r2).abs() < 1e-15 {
                    return Some(q.r1);
                }
                let t = (p.r2 - r2) / (p.r2 - q.r2);
                return Some(p.r1 + t * (q.r1 - p.r1));
            }
        }
        Some(b[b.len() - 1].r1)
    }
}

/// Budget for the nonconvex searches over auxiliary joints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBudget {
    /// Number of log-spaced scalarization weights in `[mu_min, mu_max]`.
    pub mu_count: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Random restarts per weight.
    pub restarts: usize,
    /// Nelder-Mead evaluations per restart.
    pub max_evals: usize,
    /// Extra weights spent refining hull chords.
    pub refine_limit: usize,
    pub seed: u64,
    pub grid: GridSpec,
}

impl Default for RegionBudget {
    fn default() -> Self {
        Self {
            mu_count: 33,
            mu_min: 1.0 / 64.0,
            mu_max: 64.0,
            restarts: 64,
            max_evals: 1500,
            refine_limit: 24,
            seed: 0,
            grid: GridSpec::default(),
        }
    }
}

impl RegionBudget {
    fn mu_ladder(&self) -> Vec<f64> {
        let n = self.mu_count.max(2);
        let (lo, hi) = (self.mu_min.ln(), self.mu_max.ln());
        (0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()).collect()
    }

    fn nm(&self) -> NelderMead {
        NelderMead { max_evals: self.max_evals, initial_step: 1.0, ftol: 1e-12 }
    }
}

/// Outcome attached to a [`TheoremReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Outcome {
    Capacity { value: f64 },
    Interval { lower: f64, upper: f64 },
    Regions { inner: RateRegion, outer: RateRegion, hausdorff: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub conditions_hold: bool,
    pub thresholds: BTreeMap<String, f64>,
    pub outcome: Outcome,
    /// Numerical checks backing the conclusion (slacks, distances).
    pub checks: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub eta_reports: BTreeMap<String, EtaReport>,
}

impl TheoremReport {
    fn new() -> Self {
        Self {
            conditions_hold: false,
            thresholds: BTreeMap::new(),
            outcome: Outcome::None,
            checks: BTreeMap::new(),
            notes: Vec::new(),
            eta_reports: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Capacity { value } => Some(value),
            _ => None,
        }
    }
}

fn check_inputs(chans: &[&Channel]) -> Result<()> {
    let n = chans[0].input_size();
    for ch in &chans[1..] {
        if ch.input_size() != n {
            return Err(Error::DimensionMismatch { what: "channel inputs", expected: n, found: ch.input_size() });
        }
    }
    Ok(())
}

fn check_link(name: &str, c: f64) -> Result<()> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("link capacity {name} = {c} must be a nonnegative number")));
    }
    Ok(())
}

/// A sampled auxiliary joint with its information quantities (bits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub joint: AuxiliaryJoint,
    /// `I(U;Y1)`.
    pub iuy1: f64,
    /// `I(U;Y2)`.
    pub iuy2: f64,
    /// `I(X;Y1|U)`.
    pub ixy1_u: f64,
}

impl Generator {
    fn from_joint(joint: AuxiliaryJoint, ch1: &Channel, ch2: &Channel) -> Self {
        let s = joint_stats(&joint, &[ch1, ch2]);
        Self::from_stats(joint, &s)
    }

    fn from_stats(joint: AuxiliaryJoint, s: &AuxStats) -> Self {
        Self { joint, iuy1: s[0].0, iuy2: s[1].0, ixy1_u: s[0].1 }
    }

    /// `I(X;Y1) = I(U;Y1) + I(X;Y1|U)`.
    pub fn ixy1(&self) -> f64 {
        self.iuy1 + self.ixy1_u
    }
}

/// Vertex of the pentagon `R1 <= b, R2 <= a + c12, R1 + R2 <= I(X;Y1)`
/// maximizing `R1 + mu R2`.
fn pentagon_best(g: &Generator, c12: f64, mu: f64) -> RatePoint {
    let (b, a, s) = (g.ixy1_u, g.iuy2 + c12, g.ixy1());
    let mut cands = vec![RatePoint { r1: 0.0, r2: a.min(s) }, RatePoint { r1: b.min(s), r2: 0.0 }];
    cands.push(RatePoint { r1: b, r2: a.min(s - b).max(0.0) });
    if s - a >= 0.0 && s - a <= b {
        cands.push(RatePoint { r1: s - a, r2: a });
    }
    cands
        .into_iter()
        .fold(RatePoint { r1: 0.0, r2: 0.0 }, |best, p| if p.r1 + mu * p.r2 > best.r1 + mu * best.r2 { p } else { best })
}

fn default_seeds(ch1: &Channel, ch2: &Channel) -> Vec<AuxiliaryJoint> {
    let c1 = capacity_value(ch1);
    let c2 = capacity_value(ch2);
    vec![
        AuxiliaryJoint::constant(&c1.argmax),
        AuxiliaryJoint::identity(&c2.argmax),
        AuxiliaryJoint::identity(&c1.argmax),
        AuxiliaryJoint::constant(&Distribution::uniform(ch1.input_size())),
    ]
}

/// Keeps the Pareto-maximal points, sorted by `r1` ascending.
fn pareto(mut pts: Vec<(RatePoint, AuxiliaryJoint)>) -> (Vec<RatePoint>, Vec<AuxiliaryJoint>) {
    pts.sort_by(|a, b| a.0.r1.total_cmp(&b.0.r1).then(b.0.r2.total_cmp(&a.0.r2)));
    let mut keep: Vec<(RatePoint, AuxiliaryJoint)> = Vec::new();
    for (p, g) in pts.into_iter().rev() {
        if keep.last().map_or(true, |(q, _)| p.r2 > q.r2 + 1e-12) {
            keep.push((p, g));
        }
    }
    keep.reverse();
    keep.into_iter().unzip()
}

/// Support-function tracing of a concave frontier `y(x)`: maximizes
/// `y + mu x` over the weight ladder, then refines every hull chord at its
/// own normal weight while that still uncovers points above the chord.
fn trace_support<F>(budget: &RegionBudget, stream0: u64, solve: F) -> Vec<(f64, f64, AuxiliaryJoint)>
where
    F: Fn(f64, &[AuxiliaryJoint], usize, u64) -> (f64, f64, AuxiliaryJoint),
{
    let mut weights = vec![0.0];
    weights.extend(budget.mu_ladder());
    weights.push(1e6);
    let mut pts: Vec<(f64, f64, AuxiliaryJoint)> = weights
        .iter()
        .enumerate()
        .map(|(k, &mu)| solve(mu, &[], budget.restarts, stream0 + k as u64))
        .collect();
    let mut stream = stream0 + weights.len() as u64;
    let refine_restarts = budget.restarts.min(16);
    let mut solves = 0;
    let mut checked: Vec<(f64, f64)> = Vec::new();
    while solves < budget.refine_limit {
        let hull = concave_hull(&pts);
        // longest unchecked chord first
        let next = hull
            .windows(2)
            .filter_map(|w| {
                let (p, q) = (&pts[w[0]], &pts[w[1]]);
                let mu = (p.1 - q.1) / (q.0 - p.0);
                let key = (p.0, q.0);
                let len = (q.0 - p.0).hypot(p.1 - q.1);
                (mu.is_finite() && mu > 0.0 && q.0 - p.0 > 1e-9 && !checked.contains(&key))
                    .then(|| (w[0], w[1], mu, key, len))
            })
            .max_by(|a, b| a.4.total_cmp(&b.4));
        let Some((i, j, mu, key, _)) = next else { break };
        checked.push(key);
        let seeds = [pts[i].2.clone(), pts[j].2.clone()];
        let r = solve(mu, &seeds, refine_restarts, stream);
        stream += 1;
        solves += 1;
        let chord = pts[i].1 + mu * pts[i].0;
        if r.1 + mu * r.0 > chord + 1e-9 {
            pts.push(r);
        }
    }
    pts
}

/// Indices of the upper concave hull of `(x, y)` points over the part where
/// `y` is nonincreasing, sorted by `x`.
fn concave_hull(pts: &[(f64, f64, AuxiliaryJoint)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].0.total_cmp(&pts[b].0).then(pts[b].1.total_cmp(&pts[a].1)));
    let start = idx
        .iter()
        .copied()
        .fold(idx[0], |bi, i| if pts[i].1 > pts[bi].1 || (pts[i].1 == pts[bi].1 && pts[i].0 > pts[bi].0) { i } else { bi });
    let from = idx.iter().position(|&i| i == start).unwrap_or(0);
    let mut hull: Vec<usize> = Vec::new();
    for &g in &idx[from..] {
        while hull.len() >= 2 {
            let (o, a) = (&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]]);
            let p = &pts[g];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= -1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        if hull.last().map_or(true, |&h| pts[g].0 > pts[h].0 + 1e-12) {
            hull.push(g);
        }
    }
    hull
}

/// Frontier of the superposition inner bound: the union over `P_{UX}` of
/// `R1 <= I(X;Y1|U), R2 <= I(U;Y2) + c12, R1 + R2 <= I(X;Y1)`.
pub fn bc_inner_region(
    ch1: &Channel,
    ch2: &Channel,
    c12: f64,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<RateRegion> {
    check_inputs(&[ch1, ch2])?;
    check_link("c12", c12)?;
    if aux_size == 0 {
        return Err(Error::InvalidParameter("aux_size must be at least 1".into()));
    }
    let space = AuxSpace::new(aux_size, ch1.input_size());
    let base = default_seeds(ch1, ch2);
    let chans = [ch1, ch2];
    let placeholder = AuxiliaryJoint::constant(&Distribution::uniform(1));
    // x = R1, y = R2
    let pts = trace_support(budget, 0, |mu, extra, restarts, stream| {
        let seeds: Vec<AuxiliaryJoint> = base.iter().chain(extra).cloned().collect();
        let opt = search(space, &chans, &seeds, restarts, budget.nm(), budget.seed, stream, |s| {
            let g = Generator { joint: placeholder.clone(), iuy1: s[0].0, iuy2: s[1].0, ixy1_u: s[0].1 };
            let p = pentagon_best(&g, c12, 1.0 / mu.max(1e-300));
            p.r2 + mu * p.r1
        });
        let g = Generator::from_stats(opt.joint, &opt.stats);
        let p = pentagon_best(&g, c12, 1.0 / mu.max(1e-300));
        (p.r1, p.r2, g.joint)
    });
    let hull = concave_hull(&pts);
    let boundary = hull.iter().map(|&i| RatePoint { r1: pts[i].0, r2: pts[i].1 }).collect();
    let generators = hull.iter().map(|&i| pts[i].2.clone()).collect();
    Ok(RateRegion { boundary, generators, coop_capacity: c12 })
}

/// Generators tracing the upper boundary of `{(I(U;Y2), I(X;Y1|U))}` by
/// maximizing `I(X;Y1|U) + mu I(U;Y2)`.
pub fn superposition_generators(
    ch1: &Channel,
    ch2: &Channel,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<Vec<Generator>> {
    check_inputs(&[ch1, ch2])?;
    let space = AuxSpace::new(aux_size.max(1), ch1.input_size());
    let base = default_seeds(ch1, ch2);
    let chans = [ch1, ch2];
    let pts = trace_support(budget, 1000, |mu, extra, restarts, stream| {
        let seeds: Vec<AuxiliaryJoint> = base.iter().chain(extra).cloned().collect();
        let opt = search(space, &chans, &seeds, restarts, budget.nm(), budget.seed, stream, |s| s[0].1 + mu * s[1].0);
        (opt.stats[1].0, opt.stats[0].1, opt.joint)
    });
    let mut gens: Vec<Generator> = pts.into_iter().map(|(_, _, j)| Generator::from_joint(j, ch1, ch2)).collect();
    gens.extend(base.into_iter().map(|j| Generator::from_joint(j, ch1, ch2)));
    Ok(gens)
}

/// Upper concave hull of generator points `(a, b) = (I(U;Y2), I(X;Y1|U))`,
/// restricted to the nonincreasing part, sorted by `a`.
pub(crate) fn superposition_hull(gens: &[Generator]) -> Vec<Generator> {
    let mut pts: Vec<&Generator> = gens.iter().collect();
    pts.sort_by(|p, q| p.iuy2.total_cmp(&q.iuy2).then(q.ixy1_u.total_cmp(&p.ixy1_u)));
    // start from the point with the largest b (ties: largest a)
    let start = pts
        .iter()
        .enumerate()
        .fold(0, |bi, (i, g)| if g.ixy1_u > pts[bi].ixy1_u || (g.ixy1_u == pts[bi].ixy1_u && g.iuy2 > pts[bi].iuy2) { i } else { bi });
    let mut hull: Vec<&Generator> = Vec::new();
    for g in &pts[start..] {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.iuy2 - o.iuy2) * (g.ixy1_u - o.ixy1_u) - (a.ixy1_u - o.ixy1_u) * (g.iuy2 - o.iuy2);
            if cross >= -1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        if hull.last().map_or(true, |h| g.iuy2 > h.iuy2 + 1e-15) {
            hull.push(g);
        }
    }
    hull.into_iter().cloned().collect()
}

/// Hull point at `a`, with the time-sharing generator realizing it.
fn hull_at(hull: &[Generator], a: f64) -> Option<(f64, AuxiliaryJoint)> {
    let first = hull.first()?;
    if a <= first.iuy2 {
        return Some((first.ixy1_u, first.joint.clone()));
    }
    for w in hull.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if a <= q.iuy2 {
            let t = (a - p.iuy2) / (q.iuy2 - p.iuy2);
            let joint = mix_joints(&p.joint, &q.joint, 1.0 - t);
            return Some((p.ixy1_u + t * (q.ixy1_u - p.ixy1_u), joint));
        }
    }
    let last = hull.last()?;
    (a <= last.iuy2 + 1e-12).then(|| (last.ixy1_u, last.joint.clone()))
}

/// Modified inner and outer bounds restricted to `R2 >= floor`, built from a
/// shared generator hull.
pub(crate) fn modified_regions_from_hull(hull: &[Generator], c12: f64, floor: f64) -> (RateRegion, RateRegion) {
    let a_max = hull.last().map_or(0.0, |g| g.iuy2);
    let t0 = (floor - c12).max(0.0);
    let empty = RateRegion { boundary: vec![], generators: vec![], coop_capacity: c12 };
    if hull.is_empty() || t0 > a_max + 1e-12 {
        return (empty.clone(), empty);
    }
    // inner: (b(a), a + c12) for a >= t0
    let mut inner_pts: Vec<(RatePoint, AuxiliaryJoint)> = Vec::new();
    let (b0, j0) = hull_at(hull, t0).expect("t0 within hull");
    inner_pts.push((RatePoint { r1: b0, r2: t0 + c12 }, j0));
    for g in hull.iter().filter(|g| g.iuy2 > t0 + 1e-15) {
        inner_pts.push((RatePoint { r1: g.ixy1_u, r2: g.iuy2 + c12 }, g.joint.clone()));
    }
    let r2_floor = floor.max(c12);
    if r2_floor < t0 + c12 - 1e-15 {
        unreachable!("floor below the hull start");
    }
    let (inner_b, inner_g) = pareto(inner_pts);

    // outer: max over a >= r2 - c12 of a + b(a) + c12 - r2
    let g_of = |a: f64| hull_at(hull, a).map(|(b, j)| (a + b, j));
    let peak = hull
        .iter()
        .filter(|g| g.iuy2 >= t0)
        .fold(None::<&Generator>, |best, g| match best {
            Some(b) if b.iuy2 + b.ixy1_u >= g.iuy2 + g.ixy1_u => Some(b),
            _ => Some(g),
        });
    let (g_t0, j_t0) = g_of(t0).expect("t0 within hull");
    let (peak_a, peak_val, peak_joint) = match peak {
        Some(p) if p.iuy2 + p.ixy1_u > g_t0 => (p.iuy2, p.iuy2 + p.ixy1_u, p.joint.clone()),
        _ => (t0, g_t0, j_t0),
    };
    let mut breaks: Vec<f64> = vec![t0 + c12];
    breaks.extend(hull.iter().map(|g| g.iuy2 + c12).filter(|&r| r > t0 + c12 + 1e-15));
    if peak_a + c12 > t0 + c12 {
        breaks.push(peak_a + c12);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let outer_pts: Vec<(RatePoint, AuxiliaryJoint)> = breaks
        .iter()
        .map(|&r2| {
            let a = r2 - c12;
            if a <= peak_a {
                (RatePoint { r1: peak_val + c12 - r2, r2 }, peak_joint.clone())
            } else {
                let (v, j) = g_of(a).expect("a within hull");
                (RatePoint { r1: v + c12 - r2, r2 }, j)
            }
        })
        .collect();
    let (outer_b, outer_g) = pareto(outer_pts);
    (
        RateRegion { boundary: inner_b, generators: inner_g, coop_capacity: c12 },
        RateRegion { boundary: outer_b, generators: outer_g, coop_capacity: c12 },
    )
}

/// Modified inner and outer bounds restricted to `R2 >= c12 / (1 - eta_ln)`.
///
/// Requires a comparable `eta` and `c12 <= (1 - eta) / eta * C2`.
pub fn bc_modified_regions(
    ch1: &Channel,
    ch2: &Channel,
    c12: f64,
    eta: &EtaReport,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<(RateRegion, RateRegion)> {
    check_inputs(&[ch1, ch2])?;
    check_link("c12", c12)?;
    if !eta.comparable || eta.value >= 1.0 {
        return Err(Error::ConditionViolated(format!("eta_ln = {} is not below 1", eta.value)));
    }
    let c2 = capacity_value(ch2).capacity;
    let cap = (1.0 - eta.value) / eta.value * c2;
    if c12 > cap + CONDITION_TOL {
        return Err(Error::ConditionViolated(format!(
            "C12 <= (1 - eta_ln) / eta_ln * C2 fails: {c12} > {cap}"
        )));
    }
    let floor = c12 / (1.0 - eta.value);
    let gens = superposition_generators(ch1, ch2, aux_size, budget)?;
    Ok(modified_regions_from_hull(&superposition_hull(&gens), c12, floor))
}

/// Hausdorff distance between two frontier polylines.
pub fn frontier_hausdorff(a: &[RatePoint], b: &[RatePoint]) -> f64 {
    fn seg_dist(p: RatePoint, s: RatePoint, e: RatePoint) -> f64 {
        let (dx, dy) = (e.r1 - s.r1, e.r2 - s.r2);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 { (((p.r1 - s.r1) * dx + (p.r2 - s.r2) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        ((p.r1 - s.r1 - t * dx).powi(2) + (p.r2 - s.r2 - t * dy).powi(2)).sqrt()
    }
    fn to_poly(p: RatePoint, poly: &[RatePoint]) -> f64 {
        if poly.len() == 1 {
            return seg_dist(p, poly[0], poly[0]);
        }
        poly.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
    }
    fn samples(poly: &[RatePoint]) -> Vec<RatePoint> {
        let mut out = poly.to_vec();
        for w in poly.windows(2) {
            for k in 1..64 {
                let t = k as f64 / 64.0;
                out.push(RatePoint { r1: w[0].r1 + t * (w[1].r1 - w[0].r1), r2: w[0].r2 + t * (w[1].r2 - w[0].r2) });
            }
        }
        out
    }
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let ab = samples(a).into_iter().map(|p| to_poly(p, b)).fold(0.0, f64::max);
    let ba = samples(b).into_iter().map(|p| to_poly(p, a)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Tightness check: under `C12 <= (1 - eta_ln)/eta_ln * C2` the
/// superposition region is tight above the `R2` floor and the sum-rate
/// constraint is implied by the individual ones.
pub fn theorem1_check(ch1: &Channel, ch2: &Channel, c12: f64, budget: &RegionBudget) -> Result<TheoremReport> {
    theorem1_check_with(ch1, ch2, c12, ch1.input_size() + 1, budget)
}

pub fn theorem1_check_with(
    ch1: &Channel,
    ch2: &Channel,
    c12: f64,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<TheoremReport> {
    check_inputs(&[ch1, ch2])?;
    check_link("c12", c12)?;
    if ch2.is_useless() {
        return Err(Error::ZeroCapacity("second channel"));
    }
    let mut report = TheoremReport::new();
    let c2 = capacity_value(ch2).capacity;
    let eta = eta_ln(ch1, ch2, &budget.grid)?;
    report.thresholds.insert("c2".into(), c2);
    report.thresholds.insert("eta_ln".into(), eta.value);
    report.eta_reports.insert("eta_ln".into(), eta.clone());
    if !eta.comparable || eta.value >= 1.0 {
        report.notes.push(format!("first channel is not strongly less noisy: eta_ln = {}", eta.value));
        return Ok(report);
    }
    let cap = (1.0 - eta.value) / eta.value * c2;
    let floor = c12 / (1.0 - eta.value);
    report.thresholds.insert("c12_cap".into(), cap);
    report.thresholds.insert("r2_floor".into(), floor);
    if c12 > cap + CONDITION_TOL {
        report.notes.push(format!("C12 = {c12} exceeds (1 - eta_ln)/eta_ln * C2 = {cap}"));
        return Ok(report);
    }
    report.conditions_hold = true;
    let gens = superposition_generators(ch1, ch2, aux_size, budget)?;
    let hull = superposition_hull(&gens);
    let (inner, outer) = modified_regions_from_hull(&hull, c12, floor);
    let hausdorff = frontier_hausdorff(&inner.boundary, &outer.boundary);
    report.checks.insert("hausdorff".into(), hausdorff);
    let (slack, count) = sum_rate_dominance(&gens, c12, eta.value / (1.0 - eta.value) * c12, |t| t + c12);
    report.checks.insert("sum_rate_min_slack".into(), slack);
    report.checks.insert("sum_rate_generators".into(), count as f64);
    report.outcome = Outcome::Regions { inner, outer, hausdorff };
    Ok(report)
}

/// Minimum of `I(U;Y1) - bound(I(U;Y2))` over generators with
/// `I(U;Y2) >= threshold`.
pub(crate) fn sum_rate_dominance<F: Fn(f64) -> f64>(
    gens: &[Generator],
    _c12: f64,
    threshold: f64,
    bound: F,
) -> (f64, usize) {
    gens.iter()
        .filter(|g| g.iuy2 >= threshold)
        .fold((f64::INFINITY, 0), |(m, n), g| (m.min(g.iuy1 - bound(g.iuy2)), n + 1))
}

/// `max_P min_k (I(X;Y_k) + offset_k)` over input laws, with the maximizer.
///
/// Binary inputs use golden-section search (the objective is concave in the
/// input law); larger alphabets use a soft-min continuation of mirror ascent
/// started from the best point of a simplex grid.
pub(crate) fn maximin_mi(terms: &[(&Channel, f64)], grid: &GridSpec) -> (f64, Distribution) {
    let n = terms[0].0.input_size();
    let eval = |p: &[f64]| terms.iter().map(|(ch, off)| mi_bits_raw(p, ch) + off).fold(f64::INFINITY, f64::min);
    if n == 1 {
        return (eval(&[1.0]), Distribution::uniform(1));
    }
    if n == 2 {
        let k = grid.binary_points.max(3);
        let (best_i, _) = (0..k)
            .map(|i| eval(&[1.0 - i as f64 / (k - 1) as f64, i as f64 / (k - 1) as f64]))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        let step = 1.0 / (k - 1) as f64;
        let lo = (best_i as f64 * step - step).max(0.0);
        let hi = (best_i as f64 * step + step).min(1.0);
        let (t, v) = golden_max(|t| eval(&[1.0 - t, t]), lo, hi, 1e-13);
        let t_grid = best_i as f64 * step;
        let v_grid = eval(&[1.0 - t_grid, t_grid]);
        let t = if v_grid >= v { t_grid } else { t };
        let p = Distribution::from_unnormalized(vec![1.0 - t, t]);
        return (eval(p.probs()), p);
    }
    let pts = simplex_grid(n, grid.resolution.max(2));
    let vals: Vec<f64> = pts.par_iter().map(|p| eval(p)).collect();
    let (bi, _) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let start: Vec<f64> = pts[bi].iter().map(|v| 0.99 * v + 0.01 / n as f64).collect();
    // dual: min over weights lam of max_P sum_k lam_k (I_k(P) + off_k), convex in lam
    let mut grads = vec![vec![0.0; n]; terms.len()];
    let mut warm = start.clone();
    let mut weighted = |lam: &[f64], warm: &mut Vec<f64>| -> (f64, Vec<f64>) {
        let p0: Vec<f64> = warm.iter().map(|v| 0.999 * v + 0.001 / n as f64).collect();
        let (p, v) = mirror_ascent(
            |x, g| {
                let mut total = 0.0;
                g.iter_mut().for_each(|v| *v = 0.0);
                for (((ch, off), gk), &l) in terms.iter().zip(grads.iter_mut()).zip(lam) {
                    total += l * (mi_gradient_nats(x, ch, gk) * LOG2_E + off);
                    g.iter_mut().zip(gk.iter()).for_each(|(gi, d)| *gi += l * d * LOG2_E);
                }
                total
            },
            &p0,
            2000,
        );
        *warm = p.clone();
        (v, p)
    };
    let (lam, _) = simplex_golden_max(terms.len(), |lam| -weighted(lam, &mut warm).0, 1e-8);
    // primal recovery: the optimum mixes maximizers around lam
    let mut anchors = vec![weighted(&lam, &mut warm).1];
    for k in 0..terms.len() {
        let nudged: Vec<f64> =
            lam.iter().enumerate().map(|(i, l)| 0.999 * l + if i == k { 1e-3 } else { 0.0 }).collect();
        let mut w = anchors[0].clone();
        anchors.push(weighted(&nudged, &mut w).1);
    }
    anchors.push(pts[bi].clone());
    let mix = |w: &[f64]| -> Vec<f64> {
        (0..n).map(|i| anchors.iter().zip(w).map(|(a, wk)| wk * a[i]).sum()).collect()
    };
    let (w, _) = simplex_golden_max(anchors.len(), |w| eval(&mix(w)), 1e-10);
    let p = mix(&w);
    // polish the exact max-min in logit space
    let nm = NelderMead { max_evals: 3000, initial_step: 0.05, ftol: 1e-15 };
    let z0 = logits_of(&p, 1e-300);
    let mut buf = vec![0.0; n];
    let (z, v) = nm.minimize(
        |z| {
            softmax_into(z, 0.0, &mut buf);
            -eval(&buf)
        },
        &z0,
    );
    let mut polished = vec![0.0; n];
    softmax_into(&z, 0.0, &mut polished);
    let mut best = if -v > eval(&p) { polished } else { p };
    if vals[bi] > eval(&best) {
        best = pts[bi].clone();
    }
    let d = Distribution::from_unnormalized(best);
    (eval(d.probs()), d)
}

/// Decode-and-forward rate of the primitive relay channel,
/// `max_P min{I(X;Y1), I(X;Y2) + c12}`.
pub fn prc_df_rate(ch1: &Channel, ch2: &Channel, c12: f64, budget: &RegionBudget) -> Result<(f64, Distribution)> {
    check_inputs(&[ch1, ch2])?;
    check_link("c12", c12)?;
    Ok(maximin_mi(&[(ch1, 0.0), (ch2, c12)], &budget.grid))
}

/// Capacity of the primitive relay channel when the relay link is small
/// enough relative to the strong more-capable coefficient.
///
/// Under `C12 <= (1 - eta_mc)/eta_mc * C2` the capacity is `C2 + C12`:
/// decode-and-forward with the capacity-achieving input of the second channel
/// meets the destination cut.
pub fn prc_capacity(ch1: &Channel, ch2: &Channel, c12: f64, budget: &RegionBudget) -> Result<TheoremReport> {
    check_inputs(&[ch1, ch2])?;
    check_link("c12", c12)?;
    if ch2.is_useless() {
        return Err(Error::ZeroCapacity("second channel"));
    }
    let mut report = TheoremReport::new();
    let cap2 = capacity_value(ch2);
    let c2 = cap2.capacity;
    let cut = c2 + c12;
    let (df, df_arg) = prc_df_rate(ch1, ch2, c12, budget)?;
    report.thresholds.insert("c2".into(), c2);
    report.thresholds.insert("cut_bound".into(), cut);
    report.checks.insert("df_rate".into(), df);
    report.notes.push(format!("decode-and-forward maximizer {:?}", df_arg.probs()));
    let eta = eta_mc(ch1, ch2, &budget.grid)?;
    report.thresholds.insert("eta_mc".into(), eta.value);
    report.eta_reports.insert("eta_mc".into(), eta.clone());
    let holds = eta.comparable && eta.value > 0.0 && {
        let thr = (1.0 - eta.value) / eta.value * c2;
        report.thresholds.insert("c12_cap".into(), thr);
        c12 <= thr + CONDITION_TOL
    };
    if holds {
        report.conditions_hold = true;
        let i1_star = mi_bits_raw(cap2.argmax.probs(), ch1);
        report.checks.insert("df_witness_slack".into(), i1_star - (c2 + c12));
        report.checks.insert("df_gap".into(), cut - df);
        report.outcome = Outcome::Capacity { value: cut };
        report.notes.push(format!(
            "statement form C1 + C12 = {} differs from the achievable and cut value C2 + C12 = {cut}",
            capacity_value(ch1).capacity + c12
        ));
    } else {
        report.notes.push("strong more-capable condition on C12 fails; reporting D&F rate and cut bound".into());
        report.outcome = Outcome::Interval { lower: df, upper: cut };
    }
    Ok(report)
}

/// Achievable rates of the broadcast diamond channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdcRates {
    /// `max_P min{I(X;Y1), I(X;Y2) + c13, I(X;Y3) + c13 + c23}` (`U = X`).
    pub ri: f64,
    pub ri_argmax: Distribution,
    /// Optimized over `P_{UX}`:
    /// `min{I(X;Y1), I(X;Y3|U) + I(U;Y2) + c13, I(X;Y3) + c13 + c23}`.
    pub aux_rate: f64,
    pub aux_generator: AuxiliaryJoint,
}

pub fn bdc_achievable(
    ch1: &Channel,
    ch2: &Channel,
    ch3: &Channel,
    c13: f64,
    c23: f64,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<BdcRates> {
    check_inputs(&[ch1, ch2, ch3])?;
    check_link("c13", c13)?;
    check_link("c23", c23)?;
    if aux_size == 0 {
        return Err(Error::InvalidParameter("aux_size must be at least 1".into()));
    }
    let (ri, ri_argmax) = maximin_mi(&[(ch1, 0.0), (ch2, c13), (ch3, c13 + c23)], &budget.grid);
    let space = AuxSpace::new(aux_size, ch1.input_size());
    let seeds = vec![AuxiliaryJoint::identity(&ri_argmax), AuxiliaryJoint::constant(&ri_argmax)];
    let opt = search(space, &[ch1, ch2, ch3], &seeds, budget.restarts, budget.nm(), budget.seed, 7, |s| {
        let ixy1 = s[0].0 + s[0].1;
        let ixy3 = s[2].0 + s[2].1;
        ixy1.min(s[2].1 + s[1].0 + c13).min(ixy3 + c13 + c23)
    });
    let (aux_rate, aux_generator) =
        if opt.value >= ri { (opt.value, opt.joint) } else { (ri, AuxiliaryJoint::identity(&ri_argmax)) };
    Ok(BdcRates { ri, ri_argmax, aux_rate, aux_generator })
}

/// Capacity of the broadcast diamond channel under strong more-capable
/// conditions, or the achievable/cut interval when they fail.
pub fn bdc_capacity(
    ch1: &Channel,
    ch2: &Channel,
    ch3: &Channel,
    c13: f64,
    c23: f64,
    budget: &RegionBudget,
) -> Result<TheoremReport> {
    check_inputs(&[ch1, ch2, ch3])?;
    check_link("c13", c13)?;
    check_link("c23", c23)?;
    let mut report = TheoremReport::new();
    let c3 = capacity_value(ch3).capacity;
    let c2 = capacity_value(ch2).capacity;
    report.thresholds.insert("c3".into(), c3);
    report.thresholds.insert("c2".into(), c2);
    let (ri, _) = maximin_mi(&[(ch1, 0.0), (ch2, c13), (ch3, c13 + c23)], &budget.grid);
    report.checks.insert("ri".into(), ri);
    let ratio = |e: f64| if e > 0.0 { (1.0 - e) / e } else { f64::INFINITY };
    if c3 >= ZERO_CAPACITY {
        let cut = c3 + c13 + c23;
        report.thresholds.insert("cut_bound".into(), cut);
        let e13 = eta_mc(ch1, ch3, &budget.grid)?;
        let e23 = eta_mc(ch2, ch3, &budget.grid)?;
        let thr23 = ratio(e23.value) * c3;
        let thr13 = ratio(e13.value) * c3;
        report.thresholds.insert("eta_mc_13".into(), e13.value);
        report.thresholds.insert("eta_mc_23".into(), e23.value);
        report.thresholds.insert("c23_cap".into(), thr23);
        report.thresholds.insert("c13_plus_c23_cap".into(), thr13);
        let holds = e13.comparable && e23.comparable && c23 <= thr23 + CONDITION_TOL && c13 + c23 <= thr13 + CONDITION_TOL;
        report.eta_reports.insert("eta_mc_13".into(), e13.clone());
        report.eta_reports.insert("eta_mc_23".into(), e23.clone());
        if holds {
            report.conditions_hold = true;
            let ordered = e13.value < e23.value;
            report.checks.insert("eta_order_13_below_23".into(), if ordered { 1.0 } else { 0.0 });
            if !ordered {
                report.notes.push("conditions hold but eta_mc^13 < eta_mc^23 does not".into());
            }
            report.checks.insert("ri_gap".into(), cut - ri);
            report.outcome = Outcome::Capacity { value: cut };
        } else {
            if c23 > thr23 + CONDITION_TOL {
                report.notes.push(format!("C23 <= (1 - eta23)/eta23 * C3 fails: {c23} > {thr23}"));
            }
            if c13 + c23 > thr13 + CONDITION_TOL {
                report.notes.push(format!("C13 + C23 <= (1 - eta13)/eta13 * C3 fails: {} > {thr13}", c13 + c23));
            }
            report.outcome = Outcome::Interval { lower: ri, upper: cut };
        }
    } else {
        report.notes.push(format!("C3 = {c3} below {ZERO_CAPACITY}: treated as zero"));
        let cut = (c2 + c13).min(c13 + c23);
        report.thresholds.insert("cut_bound".into(), cut);
        if ch2.is_useless() || c2 < ZERO_CAPACITY {
            report.notes.push("second relay channel has zero capacity".into());
            report.outcome = Outcome::Interval { lower: ri, upper: cut };
            return Ok(report);
        }
        let e12 = eta_mc(ch1, ch2, &budget.grid)?;
        let thr = ratio(e12.value) * c2;
        report.thresholds.insert("eta_mc_12".into(), e12.value);
        report.thresholds.insert("c13_cap".into(), thr);
        report.eta_reports.insert("eta_mc_12".into(), e12.clone());
        if e12.comparable && c13 <= thr + CONDITION_TOL {
            report.conditions_hold = true;
            let cap = c2.min(c23) + c13;
            report.checks.insert("ri_gap".into(), cap - ri);
            report.outcome = Outcome::Capacity { value: cap };
        } else {
            report.notes.push(format!("C13 <= (1 - eta12)/eta12 * C2 fails: {c13} > {thr}"));
            report.outcome = Outcome::Interval { lower: ri, upper: cut };
        }
    }
    Ok(report)
}
