//! Banded solvers used by the spline and finite-element code.

use crate::error::{ElasticError, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// Row `i` reads `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`;
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let mut gam = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut bet = diag[0];
    if bet.abs() <= f64::EPSILON * scale || bet == 0.0 {
        return Err(ElasticError::SingularSystem("zero pivot at row 0".into()));
    }
    x[0] = rhs[0] / bet;
    for i in 1..n {
        gam[i] = sup[i - 1] / bet;
        bet = diag[i] - sub[i] * gam[i];
        if bet.abs() <= f64::EPSILON * scale || bet == 0.0 {
            return Err(ElasticError::SingularSystem(format!("zero pivot at row {i}")));
        }
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / bet;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= gam[i + 1] * next;
    }
    Ok(x)
}

/// Solves a cyclic tridiagonal system by Sherman–Morrison.
///
/// Same layout as [`solve_tridiagonal`], with the corner entries stored in
/// `sub[0]` (row 0, column n-1) and `sup[n-1]` (row n-1, column 0).
pub fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(ElasticError::SingularSystem(
            "cyclic system needs at least 3 rows".into(),
        ));
    }
    let beta = sub[0];
    let alpha = sup[n - 1];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &bb, sup, &u)?;
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if denom.abs() < 1e-300 {
        return Err(ElasticError::SingularSystem(
            "Sherman-Morrison denominator vanished".into(),
        ));
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    let out: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(ElasticError::SingularSystem("non-finite solution".into()));
    }
    Ok(out)
}

/// `y = A x` for a cyclic tridiagonal `A` in the layout above.
pub fn cyclic_tridiagonal_mul(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| sub[i] * x[(i + n - 1) % n] + diag[i] * x[i] + sup[i] * x[(i + 1) % n])
        .collect()
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[p][k].abs() <= 1e-14 * scale || a[p][k] == 0.0 {
            return Err(ElasticError::SingularSystem(format!(
                "dense pivot {k} vanished"
            )));
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_matches_dense() {
        let n = 9;
        let sub: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let sup: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + (i % 3) as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let rhs = cyclic_tridiagonal_mul(&sub, &diag, &sup, &x_true);
        let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][(i + n - 1) % n] += sub[i];
            dense[i][i] += diag[i];
            dense[i][(i + 1) % n] += sup[i];
        }
        let y = solve_dense(dense, rhs).unwrap();
        for (a, b) in y.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_dense_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(a, vec![1.0, 2.0]).is_err());
    }
}
