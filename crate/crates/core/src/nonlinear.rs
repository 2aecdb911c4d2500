//! Nonlinear degradation and domination profiles.
//!
//! `F1(t)` is the largest `I(U;Y2)` over auxiliary joints with
//! `I(U;Y1) <= t`; `G1(t)` is the smallest `I(U;Y1)` with `I(U;Y2) >= t`.
//! Both are estimated from feasible witnesses, so `F1` is never overstated
//! and `G1` is never understated by the search itself.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aux::{joint_stats, search, AuxSpace};
use crate::channel::{AuxiliaryJoint, Channel, Distribution};
use crate::error::{Error, Result};
use crate::infotheory::capacity_value;
use crate::optim::{rng_for, NelderMead};
use crate::regions::{
    frontier_hausdorff, modified_regions_from_hull, sum_rate_dominance, superposition_generators,
    superposition_hull, Outcome, RegionBudget, TheoremReport, CONDITION_TOL,
};

/// Feasibility slack on the profile constraints (bits).
const FEASIBLE_TOL: f64 = 1e-9;

/// Violation above which a sampled joint refutes a domination curve.
pub const DOMINATION_TOL: f64 = 1e-6;

/// Random joints drawn by the domination spot-check.
pub const SPOT_CHECKS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Degradation,
    Domination,
    ConcaveEnvelope,
    ConvexEnvelope,
}

impl CurveKind {
    fn is_domination(self) -> bool {
        matches!(self, CurveKind::Domination | CurveKind::ConvexEnvelope)
    }
}

/// Piecewise-linear profile on a `t` grid (bits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub samples: Vec<(f64, f64)>,
    pub kind: CurveKind,
    pub domain: (f64, f64),
    /// Joint achieving each sample, when one was found.
    pub witnesses: Vec<Option<AuxiliaryJoint>>,
    /// Largest step between adjacent samples in either coordinate.
    pub grid_sensitivity: f64,
}

impl ProfileCurve {
    /// Curve from explicit samples, without witnesses.
    pub fn from_samples(samples: Vec<(f64, f64)>, kind: CurveKind) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("a profile needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter("sample abscissae must be strictly increasing".into()));
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        let domain = (samples[0].0, samples[samples.len() - 1].0);
        let witnesses = vec![None; samples.len()];
        let grid_sensitivity = sensitivity(&samples);
        Ok(Self { samples, kind, domain, witnesses, grid_sensitivity })
    }

    /// `G(t) = t / eta` on `[0, c2]` sampled at `points` abscissae.
    pub fn linear_domination(eta: f64, c2: f64, points: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::OutOfDomain { value: eta, lo: 0.0, hi: 1.0 });
        }
        let n = points.max(2);
        let samples = (0..n).map(|k| c2 * k as f64 / (n - 1) as f64).map(|t| (t, t / eta)).collect();
        Self::from_samples(samples, CurveKind::Domination)
    }

    /// Linear interpolation; clamps to the end samples outside the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        let k = s.partition_point(|p| p.0 < t);
        if k >= s.len() {
            return s[s.len() - 1].1;
        }
        let (a, b) = (s[k - 1], s[k]);
        a.1 + (t - a.0) / (b.0 - a.0) * (b.1 - a.1)
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.samples.windows(2).all(|w| w[1].1 >= w[0].1 - tol)
    }

    /// Checks membership in the degradation (`F(t) <= t`) or domination
    /// (`G(t) >= t`) collection, with `value(0) = 0` and monotonicity.
    pub fn is_member(&self, tol: f64) -> bool {
        let starts = self.samples[0].0.abs() <= tol && self.samples[0].1.abs() <= tol;
        let side = if self.kind.is_domination() {
            self.samples.iter().all(|(t, v)| *v >= t - tol)
        } else {
            self.samples.iter().all(|(t, v)| *v <= t + tol)
        };
        starts && side && self.is_nondecreasing(tol)
    }
}

fn sensitivity(samples: &[(f64, f64)]) -> f64 {
    samples.windows(2).map(|w| (w[1].0 - w[0].0).max((w[1].1 - w[0].1).abs())).fold(0.0, f64::max)
}

/// Search budget for the profile problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBudget {
    pub restarts: usize,
    pub max_evals: usize,
    /// Weight of the hinge penalty on the constraint violation.
    pub penalty: f64,
    pub seed: u64,
}

impl Default for ProfileBudget {
    fn default() -> Self {
        Self { restarts: 24, max_evals: 1500, penalty: 50.0, seed: 0 }
    }
}

#[derive(Clone, Copy)]
enum Problem {
    /// max I(U;Y2) s.t. I(U;Y1) <= t
    F1,
    /// min I(U;Y1) s.t. I(U;Y2) >= t
    G1,
}

/// Shrinks `j` toward independence until the constrained information equals
/// `t`; returns `None` when `j` cannot be made feasible this way.
fn repair(j: &AuxiliaryJoint, chans: &[&Channel; 2], t: f64, problem: Problem) -> Option<(AuxiliaryJoint, f64)> {
    let stats = |j: &AuxiliaryJoint| {
        let s = joint_stats(j, chans);
        (s[0].0, s[1].0)
    };
    let (i1, i2) = stats(j);
    match problem {
        Problem::F1 => {
            if i1 <= t + FEASIBLE_TOL {
                return Some((j.clone(), i2));
            }
            // I(U;Y1) is convex along the shrink path and zero at s = 1
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if stats(&j.shrink(mid)).0 <= t {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let out = j.shrink(hi);
            let v = stats(&out).1;
            Some((out, v))
        }
        Problem::G1 => {
            if i2 < t - FEASIBLE_TOL {
                return None;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if stats(&j.shrink(mid)).1 >= t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let out = j.shrink(lo);
            let v = stats(&out).0;
            if i1 <= v {
                Some((j.clone(), i1))
            } else {
                Some((out, v))
            }
        }
    }
}

fn better(problem: Problem, a: f64, b: f64) -> bool {
    match problem {
        Problem::F1 => a > b,
        Problem::G1 => a < b,
    }
}

fn solve_profile(
    ch1: &Channel,
    ch2: &Channel,
    t_grid: &[f64],
    aux_size: usize,
    budget: &ProfileBudget,
    problem: Problem,
) -> Result<ProfileCurve> {
    if ch1.input_size() != ch2.input_size() {
        return Err(Error::DimensionMismatch { what: "channel inputs", expected: ch1.input_size(), found: ch2.input_size() });
    }
    if aux_size == 0 {
        return Err(Error::InvalidParameter("aux_size must be at least 1".into()));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty t grid".into()));
    }
    let c1 = capacity_value(ch1);
    let c2 = capacity_value(ch2);
    let hi = match problem {
        Problem::F1 => c1.capacity,
        Problem::G1 => c2.capacity,
    };
    for &t in t_grid {
        if !(t >= 0.0 && t <= hi + FEASIBLE_TOL) {
            return Err(Error::OutOfDomain { value: t, lo: 0.0, hi });
        }
    }
    let mut grid: Vec<f64> = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let chans = [ch1, ch2];
    let space = AuxSpace::new(aux_size, ch1.input_size());
    let nm = NelderMead { max_evals: budget.max_evals, initial_step: 1.0, ftol: 1e-12 };
    let mut seeds = vec![
        AuxiliaryJoint::identity(&c2.argmax),
        AuxiliaryJoint::identity(&c1.argmax),
        AuxiliaryJoint::constant(&c1.argmax),
    ];
    if ch1.input_size() > 1 {
        seeds.push(AuxiliaryJoint::identity(&Distribution::uniform(ch1.input_size())));
    }
    seeds.retain(|j| j.aux_size() <= aux_size);
    let lambda = budget.penalty;

    let raw: Vec<Result<(AuxiliaryJoint, f64)>> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let opt = search(space, &chans, &seeds, budget.restarts, nm, budget.seed, 5000 + k as u64, |s| match problem {
                Problem::F1 => s[1].0 - lambda * (s[0].0 - t).max(0.0),
                Problem::G1 => -s[0].0 - lambda * (t - s[1].0).max(0.0),
            });
            let mut best: Option<(AuxiliaryJoint, f64)> = None;
            for j in std::iter::once(&opt.joint).chain(&seeds) {
                if let Some((w, v)) = repair(j, &chans, t, problem) {
                    if best.as_ref().map_or(true, |b| better(problem, v, b.1)) {
                        best = Some((w, v));
                    }
                }
            }
            match best {
                Some(b) => Ok(b),
                // G1 at the very top of its domain: fall back to U = X
                None if ch1.input_size() <= aux_size => {
                    let j = AuxiliaryJoint::identity(&c2.argmax);
                    let v = joint_stats(&j, &chans)[0].0;
                    Ok((j, v))
                }
                None => Err(Error::InvalidParameter(format!(
                    "no auxiliary with {aux_size} letters reaches I(U;Y2) = {t}"
                ))),
            }
        })
        .collect();
    let raw = raw.into_iter().collect::<Result<Vec<_>>>()?;

    // witness pool: every witness, repaired for every other grid point
    let pool: Vec<AuxiliaryJoint> = raw.iter().map(|(j, _)| j.clone()).collect();
    let mut points: Vec<(AuxiliaryJoint, f64)> = grid
        .par_iter()
        .zip(raw)
        .map(|(&t, (j0, v0))| {
            let mut best = (j0, v0);
            for j in &pool {
                if let Some((w, v)) = repair(j, &chans, t, problem) {
                    if better(problem, v, best.1) {
                        best = (w, v);
                    }
                }
            }
            best
        })
        .collect();

    // monotone repair: feasible sets are nested in t
    match problem {
        Problem::F1 => {
            for k in 1..points.len() {
                if points[k - 1].1 > points[k].1 {
                    points[k] = points[k - 1].clone();
                }
            }
        }
        Problem::G1 => {
            for k in (0..points.len().saturating_sub(1)).rev() {
                if points[k + 1].1 < points[k].1 {
                    points[k] = points[k + 1].clone();
                }
            }
        }
    }

    let samples: Vec<(f64, f64)> = grid
        .iter()
        .zip(&points)
        .map(|(&t, (_, v))| if t == 0.0 { (t, 0.0) } else { (t, *v) })
        .collect();
    let grid_sensitivity = sensitivity(&samples);
    Ok(ProfileCurve {
        kind: match problem {
            Problem::F1 => CurveKind::Degradation,
            Problem::G1 => CurveKind::Domination,
        },
        domain: (0.0, hi),
        witnesses: points.into_iter().map(|(j, _)| Some(j)).collect(),
        samples,
        grid_sensitivity,
    })
}

/// Minimal degradation function `F1` on `t_grid` (bits, within `[0, C1]`).
pub fn profile_f1(
    ch1: &Channel,
    ch2: &Channel,
    t_grid: &[f64],
    aux_size: usize,
    budget: &ProfileBudget,
) -> Result<ProfileCurve> {
    solve_profile(ch1, ch2, t_grid, aux_size, budget, Problem::F1)
}

/// Maximal domination function `G1` on `t_grid` (bits, within `[0, C2]`).
pub fn profile_g1(
    ch1: &Channel,
    ch2: &Channel,
    t_grid: &[f64],
    aux_size: usize,
    budget: &ProfileBudget,
) -> Result<ProfileCurve> {
    solve_profile(ch1, ch2, t_grid, aux_size, budget, Problem::G1)
}

/// `n` evenly spaced points on `[0, hi]`.
pub fn uniform_grid(hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| hi * k as f64 / (n - 1) as f64).collect()
}

/// Upper concave hull for degradation curves, lower convex hull for
/// domination curves, evaluated back on the sample abscissae.
pub fn envelope(curve: &ProfileCurve) -> ProfileCurve {
    let upper = !curve.kind.is_domination();
    let hull = hull_vertices(&curve.samples, upper);
    let hull_curve = ProfileCurve {
        samples: hull.clone(),
        kind: curve.kind,
        domain: curve.domain,
        witnesses: vec![],
        grid_sensitivity: 0.0,
    };
    let samples: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|&(t, v)| {
            // hull vertices are samples, so keep them bit-identical
            if hull.iter().any(|h| h.0 == t) {
                (t, v)
            } else {
                (t, hull_curve.value_at(t))
            }
        })
        .collect();
    ProfileCurve {
        grid_sensitivity: sensitivity(&samples),
        witnesses: curve.samples.iter().zip(&curve.witnesses).map(|(s, w)| hull.iter().any(|h| h.0 == s.0).then(|| w.clone()).flatten()).collect(),
        samples,
        kind: if upper { CurveKind::ConcaveEnvelope } else { CurveKind::ConvexEnvelope },
        domain: curve.domain,
    }
}

/// Vertices of the upper (concave) or lower (convex) hull of sorted samples.
pub fn hull_vertices(samples: &[(f64, f64)], upper: bool) -> Vec<(f64, f64)> {
    let sign = if upper { 1.0 } else { -1.0 };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for &p in samples {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if sign * cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// `G0(t) = G(t) - t`.
pub fn g0_of(curve: &ProfileCurve, t: f64) -> Result<f64> {
    let (lo, hi) = curve.domain;
    if !(t >= lo - FEASIBLE_TOL && t <= hi + FEASIBLE_TOL) {
        return Err(Error::OutOfDomain { value: t, lo, hi });
    }
    Ok(curve.value_at(t) - t)
}

/// Exact inverse of the piecewise-linear `G0`; errors when `G0` is flat on
/// a segment of the span `[0, G0^-1(c)]`.
pub fn g0_inverse(curve: &ProfileCurve, c: f64) -> Result<f64> {
    let g0: Vec<(f64, f64)> = curve.samples.iter().map(|&(t, v)| (t, v - t)).collect();
    let (first, last) = (g0[0], g0[g0.len() - 1]);
    if c < first.1 - FEASIBLE_TOL || c > last.1.max(first.1) + FEASIBLE_TOL {
        return Err(Error::OutOfDomain { value: c, lo: first.1, hi: last.1 });
    }
    if c <= first.1 {
        return Ok(first.0);
    }
    for w in g0.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.1 <= a.1 + 1e-15 {
            return Err(Error::NotInvertible { from: a.0, to: b.0 });
        }
        if c <= b.1 {
            return Ok(a.0 + (c - a.1) / (b.1 - a.1) * (b.0 - a.0));
        }
    }
    Ok(last.0)
}

/// Largest violation of `I(U;Y1) >= G(I(U;Y2))` over `count` seeded random
/// joints; returns `(iuy1, bound)` of the worst one.
pub fn domination_spot_check(
    ch1: &Channel,
    ch2: &Channel,
    curve: &ProfileCurve,
    aux_size: usize,
    count: usize,
    seed: u64,
) -> (f64, f64) {
    let space = AuxSpace::new(aux_size.max(1), ch1.input_size());
    let chunks = 16usize;
    let per = count.div_ceil(chunks);
    let worst = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, 9000 + c as u64);
            let mut worst = (f64::INFINITY, 0.0, 0.0);
            for _ in 0..per.min(count.saturating_sub(c * per)) {
                let z = space.random(&mut rng);
                let s = space.stats(&z, &[ch1, ch2]);
                let bound = curve.value_at(s[1].0);
                let slack = s[0].0 - bound;
                if slack < worst.0 {
                    worst = (slack, s[0].0, bound);
                }
            }
            worst
        })
        .reduce(|| (f64::INFINITY, 0.0, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    (worst.1, worst.2)
}

/// Tightness check with a domination profile `G`: under
/// `c12 <= G0(C2)` the superposition region is tight for
/// `R2 >= G0^-1(c12) + c12`.
pub fn theorem4_check(
    ch1: &Channel,
    ch2: &Channel,
    c12: f64,
    curve: &ProfileCurve,
    budget: &RegionBudget,
) -> Result<TheoremReport> {
    theorem4_check_with(ch1, ch2, c12, curve, ch1.input_size() + 1, budget)
}

pub fn theorem4_check_with(
    ch1: &Channel,
    ch2: &Channel,
    c12: f64,
    curve: &ProfileCurve,
    aux_size: usize,
    budget: &RegionBudget,
) -> Result<TheoremReport> {
    if ch1.input_size() != ch2.input_size() {
        return Err(Error::DimensionMismatch { what: "channel inputs", expected: ch1.input_size(), found: ch2.input_size() });
    }
    if !(c12 >= 0.0 && c12.is_finite()) {
        return Err(Error::InvalidParameter(format!("link capacity c12 = {c12} must be a nonnegative number")));
    }
    if !curve.kind.is_domination() {
        return Err(Error::InvalidParameter("the nonlinear region check needs a domination curve".into()));
    }
    let (iuy1, bound) = domination_spot_check(ch1, ch2, curve, aux_size, SPOT_CHECKS, budget.seed);
    if iuy1 < bound - DOMINATION_TOL {
        return Err(Error::NotDominating { iuy1, bound });
    }
    let c2 = capacity_value(ch2).capacity;
    let g0_c2 = curve.value_at(c2) - c2;
    let mut report = TheoremReport {
        conditions_hold: false,
        thresholds: BTreeMap::from([("c2".to_string(), c2), ("c12_cap".to_string(), g0_c2)]),
        outcome: Outcome::None,
        checks: BTreeMap::from([("domination_min_slack".to_string(), iuy1 - bound)]),
        notes: vec![],
        eta_reports: BTreeMap::new(),
    };
    if c12 > g0_c2 + CONDITION_TOL {
        report.notes.push(format!("C12 = {c12} exceeds G0(C2) = {g0_c2}"));
        return Ok(report);
    }
    let t_star = g0_inverse(curve, c12.min(g0_c2.max(0.0)))?;
    let floor = t_star + c12;
    report.thresholds.insert("g0_inverse".into(), t_star);
    report.thresholds.insert("r2_floor".into(), floor);
    report.conditions_hold = true;
    let gens = superposition_generators(ch1, ch2, aux_size, budget)?;
    let hull = superposition_hull(&gens);
    let (inner, outer) = modified_regions_from_hull(&hull, c12, floor);
    let hausdorff = frontier_hausdorff(&inner.boundary, &outer.boundary);
    report.checks.insert("hausdorff".into(), hausdorff);
    let (slack, count) = sum_rate_dominance(&gens, c12, t_star, |t| t + c12);
    report.checks.insert("sum_rate_min_slack".into(), slack);
    report.checks.insert("sum_rate_generators".into(), count as f64);
    report.outcome = Outcome::Regions { inner, outer, hausdorff };
    Ok(report)
}
