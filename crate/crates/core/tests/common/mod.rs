//! Brute-force reference computations shared by the integration tests.
//!
//! Everything here works directly on probability tables in bits and does not
//! call into the library's information-theory code.

#![allow(dead_code)]

use lnmc::regions::RatePoint;
use lnmc::Channel;

pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

pub fn push(p: &[f64], ch: &Channel) -> Vec<f64> {
    let mut q = vec![0.0; ch.output_size()];
    for (x, &px) in p.iter().enumerate() {
        for (y, qy) in q.iter_mut().enumerate() {
            *qy += px * ch.get(x, y);
        }
    }
    q
}

/// `H(Y) - H(Y|X)`.
pub fn mi_bits(p: &[f64], ch: &Channel) -> f64 {
    let cond: f64 = p.iter().enumerate().map(|(x, &px)| px * entropy_bits(ch.row(x))).sum();
    entropy_bits(&push(p, ch)) - cond
}

/// `I(U;Y)` and `I(X;Y|U)` from the full `P(u, x, y)` table.
pub fn aux_table(pu: &[f64], cond: &[Vec<f64>], ch: &Channel) -> (f64, f64) {
    let (nx, ny) = (ch.input_size(), ch.output_size());
    let mut joint = vec![vec![vec![0.0; ny]; nx]; pu.len()];
    for (u, &w) in pu.iter().enumerate() {
        for x in 0..nx {
            for y in 0..ny {
                joint[u][x][y] = w * cond[u][x] * ch.get(x, y);
            }
        }
    }
    let flat = |f: &dyn Fn(usize, usize, usize) -> usize, n: usize| {
        let mut m = vec![0.0; n];
        for (u, a) in joint.iter().enumerate() {
            for (x, b) in a.iter().enumerate() {
                for (y, &v) in b.iter().enumerate() {
                    m[f(u, x, y)] += v;
                }
            }
        }
        m
    };
    let h_y = entropy_bits(&flat(&|_, _, y| y, ny));
    let h_u = entropy_bits(&flat(&|u, _, _| u, pu.len()));
    let h_uy = entropy_bits(&flat(&|u, _, y| u * ny + y, pu.len() * ny));
    let h_ux = entropy_bits(&flat(&|u, x, _| u * nx + x, pu.len() * nx));
    let h_uxy = entropy_bits(&flat(&|u, x, y| (u * nx + x) * ny + y, pu.len() * nx * ny));
    (h_u + h_y - h_uy, h_uy + h_ux - h_uxy - h_u)
}

/// `(I(U;Y2), I(X;Y1|U))` over a binary `U` and binary `X` on a uniform grid
/// of step `1/res` in `P(U=1)`, `P(X=1|U=0)` and `P(X=1|U=1)`.
pub fn binary_grid_points(ch1: &Channel, ch2: &Channel, res: usize) -> Vec<(f64, f64)> {
    let law = |b: f64| [1.0 - b, b];
    let grid: Vec<f64> = (0..=res).map(|k| k as f64 / res as f64).collect();
    let h2: Vec<f64> = grid.iter().map(|&b| entropy_bits(&push(&law(b), ch2))).collect();
    let c1: Vec<f64> = grid.iter().map(|&b| mi_bits(&law(b), ch1)).collect();
    let mut out = Vec::with_capacity(grid.len() * grid.len() * grid.len() / 2);
    for &alpha in &grid {
        for i in 0..grid.len() {
            for j in i..grid.len() {
                let mix = (1.0 - alpha) * grid[i] + alpha * grid[j];
                let a = entropy_bits(&push(&law(mix), ch2)) - (1.0 - alpha) * h2[i] - alpha * h2[j];
                let b = (1.0 - alpha) * c1[i] + alpha * c1[j];
                out.push((a.max(0.0), b));
            }
        }
    }
    out
}

/// Nonincreasing part of the upper concave hull, sorted by abscissa.
pub fn upper_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let top = hull.iter().enumerate().fold(0, |b, (i, p)| if p.1 > hull[b].1 { i } else { b });
    hull.split_off(top)
}

fn hull_value(hull: &[(f64, f64)], a: f64) -> f64 {
    if a <= hull[0].0 {
        return hull[0].1;
    }
    for w in hull.windows(2) {
        if a <= w[1].0 {
            let t = (a - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    hull[hull.len() - 1].1
}

/// Frontiers of `{R1 <= b(a), R2 <= a + c12}` (inner) and
/// `{R1 + R2 <= a + b(a) + c12, R2 <= a + c12}` (outer) above `floor`,
/// sampled at `n` heights.
pub fn modified_frontiers(hull: &[(f64, f64)], c12: f64, floor: f64, n: usize) -> (Vec<RatePoint>, Vec<RatePoint>) {
    let a_max = hull[hull.len() - 1].0;
    let (lo, hi) = (floor.max(c12), a_max + c12);
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for k in 0..n {
        let r2 = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let a0 = r2 - c12;
        inner.push(RatePoint { r1: hull_value(hull, a0), r2 });
        let best = hull
            .iter()
            .filter(|p| p.0 >= a0)
            .map(|p| p.0 + p.1)
            .fold(a0 + hull_value(hull, a0), f64::max);
        outer.push(RatePoint { r1: best + c12 - r2, r2 });
    }
    inner.reverse();
    outer.reverse();
    (inner, outer)
}

/// Symmetric Hausdorff distance between two polylines: points sampled on
/// each against the segments of the other.
pub fn polyline_distance(a: &[RatePoint], b: &[RatePoint]) -> f64 {
    fn dense(p: &[RatePoint]) -> Vec<(f64, f64)> {
        let mut out = vec![(p[0].r1, p[0].r2)];
        for w in p.windows(2) {
            for k in 1..=16 {
                let t = k as f64 / 16.0;
                out.push((w[0].r1 + t * (w[1].r1 - w[0].r1), w[0].r2 + t * (w[1].r2 - w[0].r2)));
            }
        }
        out
    }
    fn to_segments(q: (f64, f64), poly: &[RatePoint]) -> f64 {
        let segs: Vec<(RatePoint, RatePoint)> =
            if poly.len() == 1 { vec![(poly[0], poly[0])] } else { poly.windows(2).map(|w| (w[0], w[1])).collect() };
        segs.iter()
            .map(|(s, e)| {
                let (dx, dy) = (e.r1 - s.r1, e.r2 - s.r2);
                let len2 = dx * dx + dy * dy;
                let t = if len2 > 0.0 { (((q.0 - s.r1) * dx + (q.1 - s.r2) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
                (q.0 - s.r1 - t * dx).hypot(q.1 - s.r2 - t * dy)
            })
            .fold(f64::INFINITY, f64::min)
    }
    let ab = dense(a).into_iter().map(|q| to_segments(q, b)).fold(0.0, f64::max);
    let ba = dense(b).into_iter().map(|q| to_segments(q, a)).fold(0.0, f64::max);
    ab.max(ba)
}

/// `max_theta K(theta)` for Z(eps) against BSC(p) on a dense grid.
pub fn z_bsc_eta_dense(eps: f64, p: f64) -> f64 {
    let k = |t: f64| {
        let conv = t * (1.0 - p) + (1.0 - t) * p;
        (1.0 - t) * (t * (1.0 - eps) + eps) / (conv * (1.0 - conv))
    };
    let n = 200_000;
    let best = (0..=n).map(|i| k(i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max);
    (1.0 - 2.0 * p).powi(2) / (1.0 - eps) * best
}

pub fn hb(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}
