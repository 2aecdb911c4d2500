//! Dense phase-one simplex for `A x = b, x >= 0` feasibility.
//!
//! Pivoting follows Bland's rule, so degenerate problems terminate. On
//! infeasibility the final simplex multipliers form a Farkas certificate
//! `y` with `A^T y <= 0` and `b^T y > 0`.

#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    /// Basic solution for the structural variables.
    pub x: Vec<f64>,
    /// Optimal sum of artificial variables.
    #[allow(dead_code)]
    pub infeasibility: f64,
    /// Simplex multipliers of the phase-one problem, one per row of `A`.
    pub duals: Vec<f64>,
}

const PIVOT_EPS: f64 = 1e-12;

/// Solves `min 1^T a  s.t.  A x + a = b, x, a >= 0` with `A` given row-major
/// as `rows x cols`.
pub(crate) fn phase_one(a: &[f64], b: &[f64], rows: usize, cols: usize) -> PhaseOne {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    // tableau columns: structural, artificial, rhs
    let width = cols + rows + 1;
    let mut t = vec![0.0; rows * width];
    let mut sign = vec![1.0; rows];
    for i in 0..rows {
        if b[i] < 0.0 {
            sign[i] = -1.0;
        }
        for j in 0..cols {
            t[i * width + j] = sign[i] * a[i * cols + j];
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + width - 1] = sign[i] * b[i];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    // reduced costs of min sum(a): c_j - c_B B^-1 A_j
    let mut cost = vec![0.0; width];
    for j in 0..width {
        let col_sum: f64 = (0..rows).map(|i| t[i * width + j]).sum();
        cost[j] = if (cols..cols + rows).contains(&j) { 0.0 } else { -col_sum };
    }

    loop {
        // Bland: lowest-index improving column
        let Some(enter) = (0..cols + rows).find(|&j| cost[j] < -PIVOT_EPS) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let piv = t[i * width + enter];
            if piv > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / piv;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        if ratio < r - 1e-15 || (ratio <= r + 1e-15 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
        }
        // the phase-one objective is bounded below, so an entering column
        // always has a positive pivot
        let Some((r, _)) = leave else { break };
        let piv = t[r * width + enter];
        for j in 0..width {
            t[r * width + j] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = t[i * width + enter];
                if f != 0.0 {
                    for j in 0..width {
                        t[i * width + j] -= f * t[r * width + j];
                    }
                }
            }
        }
        let f = cost[enter];
        for j in 0..width {
            cost[j] -= f * t[r * width + j];
        }
        basis[r] = enter;
    }

    let mut x = vec![0.0; cols];
    let mut infeasibility = 0.0;
    for (i, &bv) in basis.iter().enumerate() {
        let v = t[i * width + width - 1];
        if bv < cols {
            x[bv] = v;
        } else {
            infeasibility += v;
        }
    }
    // reduced cost of artificial i is 1 - y_i (in the sign-flipped rows)
    let duals = (0..rows).map(|i| sign[i] * (1.0 - cost[cols + i])).collect();
    PhaseOne { x, infeasibility, duals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 0.5
        let r = phase_one(&[1.0, 1.0, 1.0, -1.0], &[1.0, 0.5], 2, 2);
        assert!(r.infeasibility < 1e-12);
        assert!((r.x[0] - 0.75).abs() < 1e-12 && (r.x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_has_farkas_certificate() {
        // x0 + x1 = 1, x0 + x1 = 2
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = [1.0, 2.0];
        let r = phase_one(&a, &b, 2, 2);
        assert!(r.infeasibility > 0.5);
        let bty: f64 = b.iter().zip(&r.duals).map(|(x, y)| x * y).sum();
        assert!(bty > 0.0);
        for j in 0..2 {
            let aty: f64 = (0..2).map(|i| a[i * 2 + j] * r.duals[i]).sum();
            assert!(aty <= 1e-12);
        }
    }

    #[test]
    fn degenerate_redundant_rows() {
        // duplicated equality; artificial may stay basic at zero
        let r = phase_one(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], 2, 2);
        assert!(r.infeasibility < 1e-12);
        assert!((r.x[0] + r.x[1] - 1.0).abs() < 1e-12);
    }
}
