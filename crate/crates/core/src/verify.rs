//! Seeded randomized suites checking the library's inequalities and
//! identities on random instances.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AuxiliaryJoint, Channel, Distribution};
use crate::degradedness::{eta_ln, eta_ln_div_lower, lemma2_report, GridSpec, BOUND_SLACK_TOL};
use crate::error::Result;
use crate::infotheory::{capacity_value, entropy_raw, mi_hessian_with_margin, mutual_information, aux_decomposition};
use crate::optim::{random_simplex, rng_for};
use crate::regions::{bdc_capacity, theorem1_check, Outcome, RegionBudget};

/// Inverse-gap tolerance for region comparisons (bits).
pub const HAUSDORFF_TOL: f64 = 5e-3;

/// Relative tolerance of the Hessian finite-difference comparison.
pub const HESSIAN_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma2,
    Theorem1,
    Theorem3,
    Dpi,
    Hessian,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lemma2" => Ok(Suite::Lemma2),
            "theorem1" => Ok(Suite::Theorem1),
            "theorem3" => Ok(Suite::Theorem3),
            "dpi" => Ok(Suite::Dpi),
            "hessian" => Ok(Suite::Hessian),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub pass: bool,
    /// Smallest margin of the checked inequalities (negative means violated).
    pub slack: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub worst_slack: f64,
    pub results: Vec<TrialResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Random row-stochastic kernel with flat Dirichlet rows.
pub fn random_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let rows: Vec<Vec<f64>> = (0..inputs).map(|_| random_simplex(rng, outputs)).collect();
    Channel::new(&rows).expect("dirichlet rows are stochastic")
}

pub fn run(suite: Suite, trials: usize, seed: u64) -> Result<VerifyReport> {
    let results: Result<Vec<TrialResult>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (pass, slack, detail) = match suite {
                Suite::Lemma2 => lemma2_trial(&mut rng, seed.wrapping_add(i as u64))?,
                Suite::Theorem1 => theorem1_trial(&mut rng, seed)?,
                Suite::Theorem3 => theorem3_trial(&mut rng)?,
                Suite::Dpi => dpi_trial(&mut rng)?,
                Suite::Hessian => hessian_trial(&mut rng)?,
            };
            Ok(TrialResult { index: i, pass, slack, detail })
        })
        .collect();
    let results = results?;
    Ok(VerifyReport {
        suite,
        seed,
        trials,
        passed: results.iter().filter(|r| r.pass).count(),
        worst_slack: results.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        results,
    })
}

/// Lower bound on a random pair, upper bound on a constructed degraded
/// pair, and the divergence search never exceeding `eta_ln`.
fn lemma2_trial<R: Rng>(rng: &mut R, seed: u64) -> Result<(bool, f64, String)> {
    let spec = GridSpec::default();
    let nx = rng.gen_range(2..=4);
    let (n1, n2) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
    let a = random_channel(rng, nx, n1);
    let b = random_channel(rng, nx, n2);
    let lower = lemma2_report(&a, &b, &spec)?.lower_slack;
    let k = random_channel(rng, a.output_size(), n2);
    let degraded = a.cascade(&k)?;
    let upper = if degraded.is_useless() {
        f64::INFINITY
    } else {
        lemma2_report(&a, &degraded, &spec)?.upper_slack.unwrap_or(f64::NEG_INFINITY)
    };
    let eta = eta_ln(&a, &b, &spec)?.value;
    let div = eta_ln_div_lower(&a, &b, 10_000, seed)?.value;
    let div_slack = if eta.is_finite() { eta - div } else { f64::INFINITY };
    let slack = lower.min(upper).min(div_slack);
    Ok((
        slack >= -BOUND_SLACK_TOL,
        slack,
        format!("lower {lower:.3e}, upper {upper:.3e}, divergence {div_slack:.3e}"),
    ))
}

/// Random degraded pair with binary input, `c12` at half the cap.
pub fn random_degraded_binary_pair<R: Rng>(rng: &mut R) -> (Channel, Channel) {
    loop {
        let n1 = rng.gen_range(2..=3);
        let a = random_channel(rng, 2, n1);
        let n2 = rng.gen_range(2..=3);
        let k = random_channel(rng, a.output_size(), n2);
        let b = a.cascade(&k).expect("matching alphabets");
        // keep pairs whose capacities are not negligible
        let spread = |c: &Channel| c.row(0).iter().zip(c.row(1)).map(|(x, y)| (x - y).abs()).sum::<f64>();
        if spread(&a) > 0.2 && spread(&b) > 0.2 {
            return (a, b);
        }
    }
}

fn theorem1_trial<R: Rng>(rng: &mut R, seed: u64) -> Result<(bool, f64, String)> {
    let (a, b) = random_degraded_binary_pair(rng);
    let budget = RegionBudget { seed, ..Default::default() };
    let eta = eta_ln(&a, &b, &budget.grid)?.value;
    let c12 = 0.5 * (1.0 - eta) / eta * capacity_value(&b).capacity;
    let r = theorem1_check(&a, &b, c12, &budget)?;
    let h = r.checks.get("hausdorff").copied().unwrap_or(f64::INFINITY);
    let s = r.checks.get("sum_rate_min_slack").copied().unwrap_or(f64::INFINITY);
    let slack = (HAUSDORFF_TOL - h).min(s + BOUND_SLACK_TOL);
    Ok((r.conditions_hold && slack >= 0.0, slack, format!("c12 {c12:.4}, hausdorff {h:.3e}, sum-rate {s:.3e}")))
}

/// Degraded chain `ch1 -> ch2 -> ch3` with links inside the thresholds: the
/// achievable rate with `U = X` must meet the cut bound.
fn theorem3_trial<R: Rng>(rng: &mut R) -> Result<(bool, f64, String)> {
    let budget = RegionBudget::default();
    let nx = rng.gen_range(2..=3);
    let sizes: [usize; 3] = std::array::from_fn(|_| rng.gen_range(2..=3));
    let a = random_channel(rng, nx, sizes[0]);
    let b = a.cascade(&random_channel(rng, a.output_size(), sizes[1]))?;
    let c = b.cascade(&random_channel(rng, b.output_size(), sizes[2]))?;
    let probe = bdc_capacity(&a, &b, &c, 0.0, 0.0, &budget)?;
    let (f13, f23) = (rng.gen::<f64>(), rng.gen::<f64>());
    let (c13, c23) = match (probe.thresholds.get("c23_cap"), probe.thresholds.get("c13_plus_c23_cap")) {
        (Some(&t23), Some(&t13)) if t23.is_finite() && t13.is_finite() => {
            let c23 = 0.9 * f23 * t23.min(t13);
            (0.9 * f13 * (t13 - c23).max(0.0), c23)
        }
        _ => (0.05 * f13, 0.05 * f23),
    };
    let r = bdc_capacity(&a, &b, &c, c13, c23, &budget)?;
    let ri = r.checks["ri"];
    let (pass, slack) = match r.outcome {
        Outcome::Capacity { value } => {
            let s = 1e-6 - (value - ri).abs();
            (r.conditions_hold && s >= 0.0, s)
        }
        Outcome::Interval { upper, .. } => {
            let s = upper - ri + 1e-9;
            (s >= 0.0, s)
        }
        _ => (false, f64::NEG_INFINITY),
    };
    Ok((pass, slack, format!("c13 {c13:.4}, c23 {c23:.4}, ri {ri:.6}, conditions {}", r.conditions_hold)))
}

fn random_joint<R: Rng>(rng: &mut R, aux: usize, nx: usize) -> AuxiliaryJoint {
    let pu = Distribution::new(random_simplex(rng, aux)).expect("simplex sample");
    let cond = (0..aux).map(|_| Distribution::new(random_simplex(rng, nx)).expect("simplex sample")).collect();
    AuxiliaryJoint::new(pu, cond).expect("consistent shapes")
}

/// `I(X;Y2) <= I(X;Y1)` and `I(U;Y2) <= I(U;Y1)` through a random cascade.
fn dpi_trial<R: Rng>(rng: &mut R) -> Result<(bool, f64, String)> {
    let nx = rng.gen_range(2..=4);
    let sizes: [usize; 3] = std::array::from_fn(|_| rng.gen_range(2..=4));
    let a = random_channel(rng, nx, sizes[0]);
    let b = a.cascade(&random_channel(rng, a.output_size(), sizes[1]))?;
    let p = Distribution::new(random_simplex(rng, nx))?;
    let sx = mutual_information(&p, &a)? - mutual_information(&p, &b)?;
    let j = random_joint(rng, sizes[2], nx);
    let su = aux_decomposition(&j, &a)?.0 - aux_decomposition(&j, &b)?.0;
    let slack = sx.min(su);
    Ok((slack >= -1e-12, slack, format!("input {sx:.3e}, auxiliary {su:.3e}")))
}

/// `I(X;Y)` in nats from entropies, independent of the divergence form.
fn mi_entropy_form(p: &[f64], ch: &Channel) -> f64 {
    let q = ch.push_raw(p);
    let hy_x: f64 = p.iter().zip(ch.rows()).map(|(px, row)| px * entropy_raw(row)).sum();
    (entropy_raw(&q) - hy_x) / crate::infotheory::LOG2_E
}

/// Hessian quadratic form against a central second difference along a
/// random tangent direction.
fn hessian_trial<R: Rng>(rng: &mut R) -> Result<(bool, f64, String)> {
    let nx = rng.gen_range(2..=4);
    let ny = rng.gen_range(2..=4);
    let ch = random_channel(rng, nx, ny);
    let p: Vec<f64> = random_simplex(rng, nx).iter().map(|v| 0.1 / nx as f64 + 0.9 * v).collect();
    let mut v: Vec<f64> = (0..nx).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mean = v.iter().sum::<f64>() / nx as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter_mut().for_each(|x| *x /= vmax);
    let h = mi_hessian_with_margin(&Distribution::new(p.clone())?, &ch, 0.0)?;
    let exact = h.quad_form(&v);
    let step = 4e-3;
    let at = |s: f64| -> Vec<f64> { p.iter().zip(&v).map(|(a, b)| a + s * b).collect() };
    let f = |x: &[f64]| mi_entropy_form(x, &ch);
    // fourth-order central difference
    let fd = (-f(&at(2.0 * step)) + 16.0 * f(&at(step)) - 30.0 * f(&p) + 16.0 * f(&at(-step)) - f(&at(-2.0 * step)))
        / (12.0 * step * step);
    // floor keeps nearly flat directions from amplifying rounding noise
    let rel = (fd - exact).abs() / exact.abs().max(1e-4);
    let slack = HESSIAN_REL_TOL - rel;
    Ok((slack >= 0.0, slack, format!("exact {exact:.6e}, finite difference {fd:.6e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_suites_pass() {
        for suite in [Suite::Dpi, Suite::Hessian] {
            let r = run(suite, 50, 1).unwrap();
            assert!(r.all_passed(), "{suite:?}: {:?}", r.results.iter().find(|t| !t.pass));
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = run(Suite::Hessian, 5, 9).unwrap();
        let b = run(Suite::Hessian, 5, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("theorem3".parse::<Suite>().unwrap(), Suite::Theorem3);
        assert!("nope".parse::<Suite>().is_err());
    }
}
