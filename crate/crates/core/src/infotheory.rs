//! Information measures over discrete channels.
//!
//! Reported quantities are in bits. The mutual-information curvature is kept
//! in nats, which is what the degradedness coefficients consume: they are
//! ratios of quadratic forms, so the base cancels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{AuxiliaryJoint, Channel, Distribution};
use crate::error::{Error, Result};

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Default interior margin required by [`mi_hessian`].
pub const HESSIAN_MARGIN: f64 = 1e-9;

/// Default stopping tolerance (bits) for [`capacity_ba`].
pub const BA_TOL: f64 = 1e-9;

/// Default iteration cap for [`capacity_ba`].
pub const BA_MAX_ITER: usize = 100_000;

/// `q * phi(p / q)` with `phi(u) = u ln u - u + 1`, in nats.
///
/// Summed over an alphabet this is `D(p || q)`; every term is nonnegative, so
/// tiny divergences keep their relative precision.
#[inline]
pub(crate) fn kl_term(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return q;
    }
    if q == 0.0 {
        return f64::INFINITY;
    }
    let d = (p - q) / q;
    let phi = if d.abs() < 1e-3 {
        let d2 = d * d;
        d2 * (0.5 - d / 6.0 + d2 / 12.0 - d2 * d / 20.0 + d2 * d2 / 30.0)
    } else if d > -0.5 {
        (1.0 + d) * d.ln_1p() - d
    } else {
        // d rounds to -1 when p << q; use the ratio directly
        let u = p / q;
        u * u.ln() - u + 1.0
    };
    q * phi
}

/// `D(p || q)` in nats over raw slices.
#[inline]
pub(crate) fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| kl_term(*a, *b)).sum()
}

/// Shannon entropy in bits of raw weights, `0 log 0 = 0`.
pub(crate) fn entropy_raw(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

pub fn entropy(p: &Distribution) -> f64 {
    entropy_raw(p.probs())
}

/// Binary entropy `H_b(theta)` in bits.
pub fn binary_entropy(theta: f64) -> f64 {
    entropy_raw(&[theta, 1.0 - theta])
}

/// `D(p || q)` in bits; `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { what: "divergence", expected: p.len(), found: q.len() });
    }
    Ok(kl_nats(p.probs(), q.probs()) * LOG2_E)
}

/// `I(X;Y)` in nats for input weights `p`, with output law written to `q`.
pub(crate) fn mi_nats_with(p: &[f64], ch: &Channel, q: &mut [f64]) -> f64 {
    ch.push_into(p, q);
    p.iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, px)| px * kl_nats(ch.row(x), q))
        .sum()
}

pub(crate) fn mi_bits_raw(p: &[f64], ch: &Channel) -> f64 {
    let mut q = vec![0.0; ch.output_size()];
    mi_nats_with(p, ch, &mut q) * LOG2_E
}

/// `I(X;Y)` in bits.
pub fn mutual_information(p: &Distribution, ch: &Channel) -> Result<f64> {
    ch.check_input(p.len())?;
    Ok(mi_bits_raw(p.probs(), ch))
}

/// Gradient of `I(X;Y)` (nats) with respect to the input weights, up to an
/// additive constant: `D(W(.|x) || q)`.
pub(crate) fn mi_gradient_nats(p: &[f64], ch: &Channel, grad: &mut [f64]) -> f64 {
    let mut q = vec![0.0; ch.output_size()];
    ch.push_into(p, &mut q);
    let mut total = 0.0;
    for (x, g) in grad.iter_mut().enumerate() {
        *g = kl_nats(ch.row(x), &q);
        total += p[x] * *g;
    }
    total
}

/// `(I(U;Y), I(X;Y|U))` in bits for `P_U` and row-major `P_{X|U}` weights.
pub(crate) fn aux_info_raw(pu: &[f64], cond: &[f64], ch: &Channel) -> (f64, f64) {
    let nx = ch.input_size();
    let ny = ch.output_size();
    let mut q = vec![0.0; ny];
    let mut qu = vec![0.0; ny * pu.len()];
    let mut ixy_u = 0.0;
    for (u, &w) in pu.iter().enumerate() {
        let c = &cond[u * nx..(u + 1) * nx];
        let slot = &mut qu[u * ny..(u + 1) * ny];
        let i = mi_nats_with(c, ch, slot);
        if w > 0.0 {
            ixy_u += w * i;
            for (a, b) in q.iter_mut().zip(slot.iter()) {
                *a += w * b;
            }
        }
    }
    let iuy: f64 = pu
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(u, w)| w * kl_nats(&qu[u * ny..(u + 1) * ny], &q))
        .sum();
    (iuy * LOG2_E, ixy_u * LOG2_E)
}

/// Splits `I(X;Y)` for the chain `U -> X -> Y` into `(I(U;Y), I(X;Y|U))`, bits.
pub fn aux_decomposition(j: &AuxiliaryJoint, ch: &Channel) -> Result<(f64, f64)> {
    ch.check_input(j.input_size())?;
    let cond: Vec<f64> = j.conditionals().iter().flat_map(|c| c.probs().iter().copied()).collect();
    Ok(aux_info_raw(j.u_marginal().probs(), &cond, ch))
}

/// Output of [`capacity_ba`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Bits per channel use, attained by `argmax`.
    pub capacity: f64,
    pub argmax: Distribution,
    pub iterations: usize,
    /// Certified distance to the true capacity in bits.
    pub gap: f64,
}

/// Channel capacity by Blahut-Arimoto.
///
/// The gap is `max_x D(W(.|x) || q) - I(p)`, an upper bound on `C - I(p)`.
pub fn capacity_ba(ch: &Channel, tol: f64) -> Result<CapacityResult> {
    capacity_ba_with(ch, tol, BA_MAX_ITER)
}

pub fn capacity_ba_with(ch: &Channel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let nx = ch.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut best: Option<CapacityResult> = None;
    for it in 0..=max_iter {
        let info = mi_gradient_nats(&p, ch, &mut d);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = ((upper - info) * LOG2_E).max(0.0);
        let current = CapacityResult {
            capacity: info * LOG2_E,
            argmax: Distribution::from_unnormalized(p.clone()),
            iterations: it,
            gap,
        };
        if gap <= tol {
            return Ok(current);
        }
        if best.as_ref().map_or(true, |b| current.gap < b.gap) {
            best = Some(current);
        }
        // shift by the max for stability
        let mut total = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - upper).exp();
            total += *px;
        }
        p.iter_mut().for_each(|v| *v /= total);
    }
    Err(Error::NotConverged { tol, iterations: max_iter, best: Box::new(best.expect("at least one iterate")) })
}

/// Capacity with the default tolerance, or the best iterate if the cap is hit.
pub(crate) fn capacity_value(ch: &Channel) -> CapacityResult {
    match capacity_ba(ch, BA_TOL) {
        Ok(c) => c,
        Err(Error::NotConverged { best, .. }) => *best,
        Err(e) => unreachable!("capacity_ba with valid tolerance: {e}"),
    }
}

/// Second derivatives of `I(X;Y)` (nats) with respect to the input weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MutualInfoCurvature {
    pub hessian: DMatrix<f64>,
}

impl MutualInfoCurvature {
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.hessian * v)[(0, 0)]
    }
}

/// `H(x, x') = -sum_y W(y|x) W(y|x') / q(y)`, nats, at an interior input law.
pub fn mi_hessian(p: &Distribution, ch: &Channel) -> Result<MutualInfoCurvature> {
    mi_hessian_with_margin(p, ch, HESSIAN_MARGIN)
}

pub fn mi_hessian_with_margin(p: &Distribution, ch: &Channel, margin: f64) -> Result<MutualInfoCurvature> {
    ch.check_input(p.len())?;
    let min = p.min_prob();
    if min < margin {
        return Err(Error::NotInterior { min, margin });
    }
    Ok(MutualInfoCurvature { hessian: neg_hessian_raw(p.probs(), ch).scale(-1.0) })
}

/// `-H`, the positive semidefinite curvature matrix, without validation.
pub(crate) fn neg_hessian_raw(p: &[f64], ch: &Channel) -> DMatrix<f64> {
    let n = ch.input_size();
    let q = ch.push_raw(p);
    let mut h = DMatrix::zeros(n, n);
    for x in 0..n {
        for x2 in x..n {
            let v: f64 = ch
                .row(x)
                .iter()
                .zip(ch.row(x2))
                .zip(&q)
                .filter(|(_, &qy)| qy > 0.0)
                .map(|((a, b), qy)| a * b / qy)
                .sum();
            h[(x, x2)] = v;
            h[(x2, x)] = v;
        }
    }
    h
}
