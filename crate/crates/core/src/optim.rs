//! Small derivative-free and mirror-ascent optimizers over probability
//! simplices, plus the grid and sampling helpers the searches share.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Deterministic generator for a given seed and stream index.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform (flat Dirichlet) sample on the `n`-simplex.
pub(crate) fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// All points of the `n`-simplex with coordinates in multiples of `1/res`.
pub(crate) fn simplex_grid(n: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, res, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Maps logits to a simplex point with every coordinate at least `margin`.
pub(crate) fn softmax_into(z: &[f64], margin: f64, out: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, v) in out.iter_mut().zip(z) {
        *o = (v - m).exp();
        s += *o;
    }
    let scale = 1.0 - margin * z.len() as f64;
    out.iter_mut().for_each(|o| *o = margin + scale * *o / s);
}

/// Inverse of [`softmax_into`] up to an additive constant, floored so that
/// boundary points map to finite logits.
pub(crate) fn logits_of(p: &[f64], floor: f64) -> Vec<f64> {
    p.iter().map(|v| v.max(floor).ln()).collect()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    pub ftol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 2000, initial_step: 0.5, ftol: 1e-13 }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`; returns the best point and value.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> (Vec<f64>, f64) {
        let n = x0.len();
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += self.initial_step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
        let mut evals = n + 1;
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut restarts = 0;
        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            let spread = (vals[n] - vals[0]).abs();
            if spread <= self.ftol * (1.0 + vals[0].abs()) {
                // one restart around the incumbent to escape early collapse
                if restarts >= 2 {
                    break;
                }
                restarts += 1;
                let step = self.initial_step * 0.1f64.powi(restarts);
                for i in 0..n {
                    let mut p = pts[0].clone();
                    p[i] += step;
                    vals[i + 1] = f(&p);
                    pts[i + 1] = p;
                }
                evals += n;
                continue;
            }
            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(alpha);
            let fr = f(&xr);
            evals += 1;
            if fr < vals[0] {
                let xe = along(gamma);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
            } else if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
            } else {
                let (xc, fc) = if fr < vals[n] {
                    let xc = along(rho);
                    let fc = f(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = f(&xc);
                    (xc, fc)
                };
                evals += 1;
                if fc < vals[n].min(fr) {
                    pts[n] = xc;
                    vals[n] = fc;
                } else {
                    let best = pts[0].clone();
                    for i in 1..=n {
                        pts[i] = best.iter().zip(&pts[i]).map(|(b, p)| b + sigma * (p - b)).collect();
                        vals[i] = f(&pts[i]);
                    }
                    evals += n;
                }
            }
        }
        let (i, v) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, v)| (i, *v)).unwrap();
        (pts[i].clone(), v)
    }
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    if fa > fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Maximizes a concave `f` over the probability simplex of size `k` by
/// nested golden sections on stick-breaking coordinates. Returns the best
/// point evaluated.
pub(crate) fn simplex_golden_max<F: FnMut(&[f64]) -> f64>(k: usize, mut f: F, tol: f64) -> (Vec<f64>, f64) {
    fn rec(k: usize, mass: f64, prefix: &mut Vec<f64>, f: &mut dyn FnMut(&[f64]) -> f64, tol: f64) -> f64 {
        if k == 1 {
            prefix.push(mass);
            let v = f(prefix);
            prefix.pop();
            return v;
        }
        let mut at = |s: f64, prefix: &mut Vec<f64>| {
            prefix.push(mass * s);
            let v = rec(k - 1, mass * (1.0 - s), prefix, f, tol);
            prefix.pop();
            v
        };
        let ends = at(0.0, prefix).max(at(1.0, prefix));
        let (_, v) = golden_max(|s| at(s, prefix), 0.0, 1.0, tol);
        v.max(ends)
    }
    let mut best = (vec![1.0 / k as f64; k], f64::NEG_INFINITY);
    let mut tracked = |w: &[f64]| {
        let v = f(w);
        if v > best.1 {
            best = (w.to_vec(), v);
        }
        v
    };
    rec(k, 1.0, &mut Vec::with_capacity(k), &mut tracked, tol);
    best
}

/// Exponentiated-gradient ascent of a concave function on the simplex with
/// backtracking. `f` returns the value and fills the gradient.
pub(crate) fn mirror_ascent<F>(mut f: F, p0: &[f64], max_iter: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut g = vec![0.0; n];
    let mut g_try = vec![0.0; n];
    let mut val = f(&p, &mut g);
    let mut step = 1.0;
    let mut trial = vec![0.0; n];
    for _ in 0..max_iter {
        let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut improved = false;
        for _ in 0..60 {
            let mut s = 0.0;
            for i in 0..n {
                trial[i] = p[i] * (step * (g[i] - gmax)).exp();
                s += trial[i];
            }
            trial.iter_mut().for_each(|v| *v /= s);
            let v = f(&trial, &mut g_try);
            if v > val {
                improved = v - val > 1e-16 * (1.0 + val.abs());
                std::mem::swap(&mut p, &mut trial);
                std::mem::swap(&mut g, &mut g_try);
                val = v;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (p, val)
}
