//! Small sparse-matrix kit: CSR storage, conjugate gradients, tridiagonal solves.
//!
//! The flow steppers need exactly two solvers: a symmetric positive
//! (semi-)definite solve for the mesh Laplacian system and a tridiagonal /
//! cyclic-tridiagonal solve for axisymmetric profiles. Both are small enough
//! that hand-rolled routines beat pulling in a sparse-algebra dependency.

use crate::error::{Error, Result};

/// Compressed sparse row matrix, square, assembled from triplets.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|t| (t.0, t.1));

        let mut rows = Vec::with_capacity(sorted.len());
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// (column, value) pairs of row i.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] += self.values[k];
                }
            }
        }
        d
    }
}

/// Jacobi-preconditioned conjugate gradients for s.p.d. systems.
///
/// Returns the solution and the achieved relative residual.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = a.n();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    a.mul_vec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let norm_b = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for _ in 0..max_iter {
        let res = dot(&r, &r).sqrt() / norm_b;
        if res <= rel_tol {
            return Ok((x, res));
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Step(format!(
                "conjugate gradient breakdown: p'Ap = {pap:.3e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / norm_b;
    if res <= rel_tol {
        Ok((x, res))
    } else {
        Err(Error::Step(format!(
            "conjugate gradient did not converge: residual {res:.3e} after {max_iter} iterations"
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Thomas algorithm for a tridiagonal system; `a` is the subdiagonal,
/// `b` the diagonal, `c` the superdiagonal (a[0] and c[n-1] unused).
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    if b[0] == 0.0 {
        return Err(Error::Step("tridiagonal pivot is zero".into()));
    }
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        if m == 0.0 {
            return Err(Error::Step(format!("tridiagonal pivot is zero at row {i}")));
        }
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Cyclic tridiagonal solve via the Sherman-Morrison correction.
/// `alpha` couples row 0 to column n-1 and `beta` row n-1 to column 0.
pub fn solve_cyclic_tridiagonal(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    alpha: f64,
    beta: f64,
    d: &[f64],
) -> Result<Vec<f64>> {
    let n = d.len();
    if n < 3 {
        return Err(Error::Argument("cyclic tridiagonal needs n >= 3".into()));
    }
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(a, &bb, c, d)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(a, &bb, c, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok((0..n).map(|i| x[i] - fact * z[i]).collect())
}

/// Ordinary least squares fit y = a + b t, returning (a, b, r_squared).
pub fn linear_fit(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = t.len();
    if n < 2 || y.len() != n {
        return Err(Error::Argument("linear fit needs at least two points".into()));
    }
    let nf = n as f64;
    let mt = t.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for i in 0..n {
        stt += (t[i] - mt) * (t[i] - mt);
        sty += (t[i] - mt) * (y[i] - my);
    }
    if stt == 0.0 {
        return Err(Error::Argument("degenerate abscissae in linear fit".into()));
    }
    let b = sty / stt;
    let a = my - b * mt;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let fit = a + b * t[i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((a, b, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn csr_accumulates_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 4.0), (0, 1, -1.0)]);
        let mut y = vec![0.0; 2];
        m.mul_vec(&[1.0, 1.0], &mut y);
        assert_relative_eq!(y[0], 2.0);
        assert_relative_eq!(y[1], 4.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        // simple 1d laplacian + identity
        let n = 20;
        let mut tri = Vec::new();
        for i in 0..n {
            tri.push((i, i, 3.0));
            if i > 0 {
                tri.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                tri.push((i, i + 1, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &tri);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&xs, &mut b);
        let (x, res) = conjugate_gradient(&a, &b, &vec![0.0; n], 1e-13, 1000).unwrap();
        assert!(res < 1e-13);
        for i in 0..n {
            assert_relative_eq!(x[i], xs[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn tridiagonal_and_cyclic() {
        let n = 6;
        let a = vec![0.0, -1.0, -1.0, -1.0, -1.0, -1.0];
        let b = vec![2.5; n];
        let c = vec![-1.0, -1.0, -1.0, -1.0, -1.0, 0.0];
        let d = vec![1.0; n];
        let x = solve_tridiagonal(&a, &b, &c, &d).unwrap();
        // residual check
        for i in 0..n {
            let mut r = b[i] * x[i] - d[i];
            if i > 0 {
                r += a[i] * x[i - 1];
            }
            if i + 1 < n {
                r += c[i] * x[i + 1];
            }
            assert!(r.abs() < 1e-12);
        }

        let xc = solve_cyclic_tridiagonal(&a, &b, &c, -1.0, -1.0, &d).unwrap();
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            let r = 2.5 * xc[i] - xc[im] - xc[ip] - 1.0;
            assert!(r.abs() < 1e-12, "row {i}: {r}");
        }
    }

    #[test]
    fn fit_recovers_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = t.iter().map(|x| 4.0 - 2.0 * x).collect();
        let (a, b, r2) = linear_fit(&t, &y).unwrap();
        assert_relative_eq!(a, 4.0, epsilon = 1e-14);
        assert_relative_eq!(b, -2.0, epsilon = 1e-14);
        assert!(r2 > 1.0 - 1e-14);
    }
}
