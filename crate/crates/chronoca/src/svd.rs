//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! The inertia decomposition needs singular values with high *relative*
//! accuracy on standardized residual matrices, which are often close to
//! rank deficient; cyclic one-sided Jacobi delivers that with a small,
//! fully deterministic kernel. Plane rotations orthogonalize column pairs
//! of a working copy until every pair is numerically orthogonal; column
//! norms are then the singular values and the accumulated rotations give
//! the right singular vectors.

use nalgebra::DMatrix;

/// Column pairs count as orthogonal when `|u·v| <= TOL * |u| * |v|`.
const TOL: f64 = 1e-15;

/// More than enough for quadratic convergence at f64 precision; reached
/// only on adversarial inputs, where the result is still usable.
const MAX_SWEEPS: usize = 64;

/// Thin SVD `a = u * diag(sigma) * v^T` with `sigma` sorted in
/// non-increasing order. `u` is `nrows × r` and `v` is `ncols × r` with
/// `r = min(nrows, ncols)`. Columns of `u` whose singular value is zero
/// are zero vectors. Deterministic for identical input.
pub(crate) fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if a.nrows() >= a.ncols() {
        jacobi_tall(a)
    } else {
        let (u, sigma, v) = jacobi_tall(&a.transpose());
        (v, sigma, u)
    }
}

fn jacobi_tall(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let m = a.ncols();
    debug_assert!(n >= m);

    // Column-major working copies; column j of `work` is work[j*n..][..n].
    let mut work: Vec<f64> = a.as_slice().to_vec();
    let mut v: Vec<f64> = vec![0.0; m * m];
    for j in 0..m {
        v[j * m + j] = 1.0;
    }

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let (alpha, beta, gamma) = {
                    let cp = &work[p * n..(p + 1) * n];
                    let cq = &work[q * n..(q + 1) * n];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..n {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;

                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                rotate_pair(&mut work, n, p, q, c, s);
                rotate_pair(&mut v, m, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..m)
        .map(|j| {
            let col = &work[j * n..(j + 1) * n];
            col.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut u = DMatrix::zeros(n, m);
    let mut v_sorted = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        if sigma[src] > 0.0 {
            let inv = 1.0 / sigma[src];
            for i in 0..n {
                u[(i, dst)] = work[src * n + i] * inv;
            }
        }
        for j in 0..m {
            v_sorted[(j, dst)] = v[src * m + j];
        }
    }
    sigma.sort_by(|a, b| b.total_cmp(a));

    (u, sigma, v_sorted)
}

/// Applies the plane rotation `(cp, cq) <- (c*cp - s*cq, s*cp + c*cq)` to
/// columns `p < q` of a column-major `rows × _` buffer.
fn rotate_pair(data: &mut [f64], rows: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = data.split_at_mut(q * rows);
    let cp = &mut head[p * rows..(p + 1) * rows];
    let cq = &mut tail[..rows];
    for i in 0..rows {
        let x = cp[i];
        let y = cq[i];
        cp[i] = c * x - s * y;
        cq[i] = s * x + c * y;
    }
}
