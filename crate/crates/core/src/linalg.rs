//! Tridiagonal solvers for the 1-D radial operators.

use alloc::vec::Vec;

/// Solve a symmetric positive-definite tridiagonal system by the Thomas
/// algorithm. `off[i]` couples rows `i` and `i + 1`.
pub(crate) fn solve_spd(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    let mut c = alloc::vec![0.0; n];
    let mut d = alloc::vec![0.0; n];
    let mut denom = diag[0];
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Solve a general tridiagonal system with partial pivoting (LAPACK `gtsv`
/// style). `lower[i]` is entry `(i+1, i)`, `upper[i]` entry `(i, i+1)`.
/// Returns `None` for an exactly singular matrix.
pub(crate) fn solve_general(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut dl: Vec<f64> = lower.to_vec();
    let mut d: Vec<f64> = diag.to_vec();
    let mut du: Vec<f64> = upper.to_vec();
    let mut du2 = alloc::vec![0.0; n.saturating_sub(2)];
    let mut b: Vec<f64> = rhs.to_vec();

    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return None;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            // swap rows i and i+1
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    if d[n - 1] == 0.0 {
        return None;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn spd_solve() {
        let diag = [4.0, 5.0, 6.0, 3.0];
        let off = [-1.0, -2.0, 0.5];
        let x = [1.0, -2.0, 0.25, 3.0];
        let b = apply(&off, &diag, &off, &x);
        let got = solve_spd(&diag, &off, &b);
        for (a, e) in got.iter().zip(x) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn pivoting_solve_indefinite() {
        let lower = [3.0, 1.0, -2.0, 0.5];
        let diag = [0.0, 1e-3, -4.0, 2.0, 1.0];
        let upper = [1.0, 2.0, 1.0, -1.0];
        let x = [0.5, -1.0, 2.0, 3.0, -0.75];
        let b = apply(&lower, &diag, &upper, &x);
        let got = solve_general(&lower, &diag, &upper, &b).unwrap();
        for (a, e) in got.iter().zip(x) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }
}
