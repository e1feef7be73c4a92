//! Shared test oracles, independent of the library's solver paths.

/// Smallest eigenvalue of a symmetric matrix via Householder
/// tridiagonalization and Sturm-sequence bisection. Hand-rolled on plain
/// vectors so it shares nothing with the dense QR eigensolver it checks.
pub fn smallest_eigenvalue_sturm(matrix: &[Vec<f64>]) -> f64 {
    let (d, e) = tridiagonalize(matrix.to_vec());
    let n = d.len();
    // Gershgorin bounds of the tridiagonal form
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += e[i - 1].abs();
        }
        if i + 1 < n {
            radius += e[i].abs();
        }
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(&d, &e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 * lo.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn tridiagonalize(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm2: f64 = ((k + 1)..n).map(|i| a[i][k] * a[i][k]).sum();
        let norm = norm2.sqrt();
        if norm < 1e-300 {
            continue;
        }
        let alpha = if a[k + 1][k] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for (i, row) in a.iter().enumerate().take(n).skip(k + 1) {
            v[i] = row[k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // w = A v
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[i] = (0..n).map(|j| a[i][j] * v[j]).sum();
        }
        let vw: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        // A <- A - beta (v w^T + w v^T) + beta^2 (v.w) v v^T
        for i in 0..n {
            for j in 0..n {
                a[i][j] += -beta * (v[i] * w[j] + w[i] * v[j]) + beta * beta * vw * v[i] * v[j];
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| a[i + 1][i]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal `(d, e)` strictly below `x`,
/// from the signs of the LDL^T pivots.
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut pivot = 1.0f64;
    for i in 0..d.len() {
        let off2 = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        let denom = if pivot == 0.0 { 1e-300 } else { pivot };
        pivot = d[i] - x - off2 / denom;
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}
