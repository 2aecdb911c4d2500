//! Unconstrained parametrization of auxiliary joints `P_{UX}` and a seeded
//! multi-start search over them.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{AuxiliaryJoint, Channel, Distribution};
use crate::infotheory::aux_info_raw;
use crate::optim::{logits_of, random_simplex, rng_for, softmax_into, NelderMead};

/// `(I(U;Y), I(X;Y|U))` in bits for up to three channels.
pub(crate) type AuxStats = [(f64, f64); 3];

#[derive(Debug, Clone, Copy)]
pub(crate) struct AuxSpace {
    pub aux_size: usize,
    pub input_size: usize,
}

impl AuxSpace {
    pub fn new(aux_size: usize, input_size: usize) -> Self {
        Self { aux_size, input_size }
    }

    pub fn dim(&self) -> usize {
        self.aux_size * (1 + self.input_size)
    }

    pub fn decode(&self, z: &[f64], pu: &mut [f64], cond: &mut [f64]) {
        let (m, n) = (self.aux_size, self.input_size);
        softmax_into(&z[..m], 0.0, pu);
        for u in 0..m {
            softmax_into(&z[m + u * n..m + (u + 1) * n], 0.0, &mut cond[u * n..(u + 1) * n]);
        }
    }

    pub fn to_joint(&self, z: &[f64]) -> AuxiliaryJoint {
        let (m, n) = (self.aux_size, self.input_size);
        let mut pu = vec![0.0; m];
        let mut cond = vec![0.0; m * n];
        self.decode(z, &mut pu, &mut cond);
        AuxiliaryJoint::new(
            Distribution::from_unnormalized(pu),
            cond.chunks(n).map(|c| Distribution::from_unnormalized(c.to_vec())).collect(),
        )
        .expect("decoded joint has consistent shape")
    }

    /// Logits of `j`, padding unused auxiliary letters with negligible mass.
    pub fn encode(&self, j: &AuxiliaryJoint) -> Option<Vec<f64>> {
        if j.aux_size() > self.aux_size || j.input_size() != self.input_size {
            return None;
        }
        let mut z = logits_of(j.u_marginal().probs(), 1e-18);
        z.resize(self.aux_size, (1e-18f64).ln());
        for c in j.conditionals() {
            z.extend(logits_of(c.probs(), 1e-18));
        }
        let n = self.input_size;
        while z.len() < self.dim() {
            z.extend(std::iter::repeat(0.0).take(n));
        }
        Some(z)
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut z = logits_of(&random_simplex(rng, self.aux_size), 1e-6);
        for _ in 0..self.aux_size {
            // sharper conditionals than a flat Dirichlet to reach the edges
            let c: Vec<f64> = random_simplex(rng, self.input_size).iter().map(|v| v * v).collect();
            let s: f64 = c.iter().sum();
            z.extend(c.iter().map(|v| (v / s).max(1e-8).ln()));
        }
        z
    }

    pub fn stats(&self, z: &[f64], chans: &[&Channel]) -> AuxStats {
        let (m, n) = (self.aux_size, self.input_size);
        let mut pu = vec![0.0; m];
        let mut cond = vec![0.0; m * n];
        self.decode(z, &mut pu, &mut cond);
        stats_raw(&pu, &cond, chans)
    }
}

pub(crate) fn stats_raw(pu: &[f64], cond: &[f64], chans: &[&Channel]) -> AuxStats {
    let mut out = [(0.0, 0.0); 3];
    for (o, ch) in out.iter_mut().zip(chans) {
        *o = aux_info_raw(pu, cond, ch);
    }
    out
}

pub(crate) fn joint_stats(j: &AuxiliaryJoint, chans: &[&Channel]) -> AuxStats {
    let cond: Vec<f64> = j.conditionals().iter().flat_map(|c| c.probs().iter().copied()).collect();
    stats_raw(j.u_marginal().probs(), &cond, chans)
}

#[derive(Debug, Clone)]
pub(crate) struct AuxOptimum {
    pub joint: AuxiliaryJoint,
    pub stats: AuxStats,
    pub value: f64,
}

/// Maximizes `objective(stats)` over joints with the given auxiliary size.
/// Seeds are tried first, then `restarts` random starts; each start is
/// polished by Nelder-Mead. Deterministic in `(seed, stream)`.
pub(crate) fn search<F>(
    space: AuxSpace,
    chans: &[&Channel],
    seeds: &[AuxiliaryJoint],
    restarts: usize,
    nm: NelderMead,
    seed: u64,
    stream: u64,
    objective: F,
) -> AuxOptimum
where
    F: Fn(&AuxStats) -> f64 + Sync,
{
    let mut starts: Vec<Vec<f64>> = seeds.iter().filter_map(|j| space.encode(j)).collect();
    let mut rng = rng_for(seed, stream);
    starts.extend((0..restarts).map(|_| space.random(&mut rng)));
    let results: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|z0| {
            let (z, v) = nm.minimize(
                |z| {
                    let v = objective(&space.stats(z, chans));
                    if v.is_nan() {
                        f64::INFINITY
                    } else {
                        -v
                    }
                },
                z0,
            );
            let v0 = objective(&space.stats(z0, chans));
            if v0 >= -v {
                (v0, z0.clone())
            } else {
                (-v, z)
            }
        })
        .collect();
    let (_, z) = results
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |b, c| if c.0 > b.0 { c } else { b });
    let joint = space.to_joint(&z);
    let stats = joint_stats(&joint, chans);
    AuxOptimum { value: objective(&stats), joint, stats }
}

/// Time-sharing joint: `U' = (Q, U)` with `P(Q = 0) = w`.
pub(crate) fn mix_joints(a: &AuxiliaryJoint, b: &AuxiliaryJoint, w: f64) -> AuxiliaryJoint {
    let pu: Vec<f64> = a
        .u_marginal()
        .probs()
        .iter()
        .map(|p| w * p)
        .chain(b.u_marginal().probs().iter().map(|p| (1.0 - w) * p))
        .collect();
    let cond = a.conditionals().iter().chain(b.conditionals()).cloned().collect();
    AuxiliaryJoint::new(Distribution::from_unnormalized(pu), cond).expect("same input alphabet")
}
