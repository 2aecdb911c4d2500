//! Tables comparing computed coefficients with their closed forms, and the
//! Z/BSC sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::degradedness::{eta_kl, eta_ln, eta_mc, test_degraded, DegradedStatus, GridSpec, DEGRADED_TOL};
use crate::error::Result;
use crate::infotheory::binary_entropy;
use crate::optim::golden_max;

/// One row of the Z(eps)/BSC(p) sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub p: f64,
    pub eta_ln: f64,
    /// `eta_kl(BSC(p)) / eta_kl(Z(eps))`.
    pub eta_kl_ratio: f64,
    /// `BSC(p)` is a degraded version of `Z(eps)` (exact LP test).
    pub degraded_flag: bool,
    /// `eta_ln <= 1`.
    pub less_noisy: bool,
}

/// The sweep grid `p = 0.005, 0.010, ..., 0.500`.
pub fn fig1_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 200.0).collect()
}

pub fn fig1(eps: f64, spec: &GridSpec) -> Result<Vec<Fig1Row>> {
    let z = Channel::z(eps)?;
    let kl_z = eta_kl(&z, spec)?.value;
    fig1_grid()
        .into_par_iter()
        .map(|p| {
            let bsc = Channel::bsc(p)?;
            let eta = eta_ln(&z, &bsc, spec)?;
            let kl_b = eta_kl(&bsc, spec)?.value;
            let cert = test_degraded(&z, &bsc, DEGRADED_TOL)?;
            Ok(Fig1Row {
                p,
                eta_ln: eta.value,
                eta_kl_ratio: kl_b / kl_z,
                degraded_flag: cert.status == DegradedStatus::Degraded,
                less_noisy: eta.comparable,
            })
        })
        .collect()
}

/// `theta_bar (theta eps_bar + eps) / ((theta * p)(1 - theta * p))` with
/// `theta * p = theta (1 - p) + (1 - theta) p`.
pub fn z_bsc_k(theta: f64, eps: f64, p: f64) -> f64 {
    let conv = theta * (1.0 - p) + (1.0 - theta) * p;
    (1.0 - theta) * (theta * (1.0 - eps) + eps) / (conv * (1.0 - conv))
}

/// Closed-form `eta_ln` of Z(eps) against BSC(p): `(1-2p)^2 / eps_bar * max K`.
pub fn z_bsc_eta_ln(eps: f64, p: f64) -> f64 {
    let n = 20_000;
    let (best, _) = (0..=n)
        .map(|k| k as f64 / n as f64)
        .map(|t| (t, z_bsc_k(t, eps, p)))
        .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let step = 1.0 / n as f64;
    let (_, refined) = golden_max(|t| z_bsc_k(t, eps, p), (best - step).max(0.0), (best + step).min(1.0), 1e-14);
    let k_star = refined.max(z_bsc_k(best, eps, p));
    (1.0 - 2.0 * p).powi(2) / (1.0 - eps) * k_star
}

/// Computed value against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub params: Vec<f64>,
    pub computed: f64,
    pub closed_form: f64,
    pub abs_err: f64,
}

impl ComparisonRow {
    fn new(quantity: &str, params: Vec<f64>, computed: f64, closed_form: f64) -> Self {
        Self { quantity: quantity.into(), params, computed, closed_form, abs_err: (computed - closed_form).abs() }
    }
}

/// Ordered pairs `p1 < p2` from `{0.05, 0.10, ..., 0.45}`.
pub fn pair_grid() -> Vec<(f64, f64)> {
    let ps: Vec<f64> = (1..=9).map(|k| k as f64 / 20.0).collect();
    ps.iter().flat_map(|&a| ps.iter().filter(move |&&b| b > a).map(move |&b| (a, b))).collect()
}

/// BEC pairs: `eta_ln = eta_mc = (1 - p2) / (1 - p1)`.
pub fn example1(spec: &GridSpec) -> Result<Vec<ComparisonRow>> {
    let rows: Result<Vec<Vec<ComparisonRow>>> = pair_grid()
        .into_par_iter()
        .map(|(p1, p2)| {
            let (a, b) = (Channel::bec(p1)?, Channel::bec(p2)?);
            let want = (1.0 - p2) / (1.0 - p1);
            Ok(vec![
                ComparisonRow::new("eta_ln", vec![p1, p2], eta_ln(&a, &b, spec)?.value, want),
                ComparisonRow::new("eta_mc", vec![p1, p2], eta_mc(&a, &b, spec)?.value, want),
            ])
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// BSC pairs: `eta_ln = (1-2p2)^2/(1-2p1)^2`,
/// `eta_mc = (1 - H_b(p2)) / (1 - H_b(p1))`.
pub fn example2(spec: &GridSpec) -> Result<Vec<ComparisonRow>> {
    let rows: Result<Vec<Vec<ComparisonRow>>> = pair_grid()
        .into_par_iter()
        .map(|(p1, p2)| {
            let (a, b) = (Channel::bsc(p1)?, Channel::bsc(p2)?);
            Ok(vec![
                ComparisonRow::new(
                    "eta_ln",
                    vec![p1, p2],
                    eta_ln(&a, &b, spec)?.value,
                    ((1.0 - 2.0 * p2) / (1.0 - 2.0 * p1)).powi(2),
                ),
                ComparisonRow::new(
                    "eta_mc",
                    vec![p1, p2],
                    eta_mc(&a, &b, spec)?.value,
                    (1.0 - binary_entropy(p2)) / (1.0 - binary_entropy(p1)),
                ),
            ])
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Z(eps)/BSC(p) on the sweep grid against the one-dimensional closed form.
pub fn example3(eps: f64, spec: &GridSpec) -> Result<Vec<ComparisonRow>> {
    let z = Channel::z(eps)?;
    fig1_grid()
        .into_par_iter()
        .map(|p| {
            let v = eta_ln(&z, &Channel::bsc(p)?, spec)?.value;
            Ok(ComparisonRow::new("eta_ln", vec![eps, p], v, z_bsc_eta_ln(eps, p)))
        })
        .collect()
}
