//! Non-negative least squares (Lawson–Hanson active set) and the
//! least-distance program built on it.

use nalgebra::{DMatrix, DVector};

const SVD_EPS: f64 = 1e-13;

/// Solves `min ||A x − b||` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * b.norm().max(1.0);
    let tol = 1e-12 * scale;
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];

    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let z = passive_solve(a, b, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let step = infeasible
                .iter()
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * step;
            for k in 0..n {
                if passive[k] && x[k] <= tol * 1e-3 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
    x
}

/// Least squares restricted to the passive columns; zeros elsewhere.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&k| passive[k]).collect();
    let mut z = DVector::zeros(a.ncols());
    if cols.is_empty() {
        return z;
    }
    let sub = a.select_columns(&cols);
    let sol = sub
        .svd(true, true)
        .solve(b, SVD_EPS)
        .expect("svd computed with u and v");
    for (i, &k) in cols.iter().enumerate() {
        z[k] = sol[i];
    }
    z
}

/// Least-distance program: `min ||x||` subject to `G x ≥ h`. Returns `None`
/// when the constraints are incompatible.
pub fn ldp(g: &DMatrix<f64>, h: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, n) = g.shape();
    let mut e = DMatrix::zeros(n + 1, m);
    e.view_mut((0, 0), (n, m)).copy_from(&g.transpose());
    e.view_mut((n, 0), (1, m)).copy_from(&h.transpose());
    let mut f = DVector::zeros(n + 1);
    f[n] = 1.0;
    let u = nnls(&e, &f);
    let r = &e * u - f;
    if r.norm() <= 1e-10 || r[n] >= 0.0 {
        return None;
    }
    Some(DVector::from_iterator(n, (0..n).map(|j| -r[j] / r[n])))
}

/// Minimum-norm non-negative solution of `A x = b`, or `None` when `b` lies
/// outside the cone spanned by the columns of `A`.
pub fn min_norm_nonneg(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let (rows, n) = a.shape();
    let scale = b.norm();
    if scale == 0.0 {
        return Some(DVector::zeros(n));
    }
    let unit = b / scale;
    let mut g = DMatrix::zeros(2 * rows + n, n);
    g.view_mut((0, 0), (rows, n)).copy_from(a);
    g.view_mut((rows, 0), (rows, n)).copy_from(&(-a));
    g.view_mut((2 * rows, 0), (n, n)).fill_with_identity();
    let mut h = DVector::zeros(2 * rows + n);
    h.rows_mut(0, rows).copy_from(&unit);
    h.rows_mut(rows, rows).copy_from(&(-&unit));

    let rough = ldp(&g, &h)?;
    let x = polish(a, &unit, &rough).unwrap_or(rough);
    if (a * &x - &unit).norm() > 1e-7 {
        return None;
    }
    Some(x * scale)
}

/// Re-solves the equality exactly on the support found by the LDP; the LDP
/// only meets `A x = b` through paired inequalities.
fn polish(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> Option<DVector<f64>> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(*v));
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] > 1e-9 * peak).collect();
    if support.is_empty() {
        return None;
    }
    let sub = a.select_columns(&support);
    // minimum-norm solution of sub · y = b
    let gram = &sub * sub.transpose();
    let lambda = gram.svd(true, true).solve(b, SVD_EPS).ok()?;
    let y = sub.transpose() * lambda;
    if y.iter().any(|v| *v < 0.0) || (&sub * &y - b).norm() > 1e-12 {
        return None;
    }
    let mut out = DVector::zeros(x.len());
    for (i, &j) in support.iter().enumerate() {
        out[j] = y[i];
    }
    Some(out)
}
