//! Small dense helpers. Matrices are row-major `Vec<f64>` of side `n`.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(m: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

pub(crate) fn quad_form(m: &[f64], n: usize, v: &[f64]) -> f64 {
    dot(v, &mat_vec(m, n, v))
}

/// Sample covariance (denominator `rows.len() - 1`) of the given rows.
pub(crate) fn sample_covariance<R: AsRef<[f64]>>(rows: &[R], n: usize) -> Vec<f64> {
    let m = rows.len() as f64;
    let mut mean = vec![0.0; n];
    for r in rows {
        for (acc, x) in mean.iter_mut().zip(r.as_ref()) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= m);

    let mut cov = vec![0.0; n * n];
    for r in rows {
        let r = r.as_ref();
        for i in 0..n {
            let di = r[i] - mean[i];
            for j in 0..=i {
                cov[i * n + j] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = cov[i * n + j] / (m - 1.0);
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    cov
}

/// Cholesky factorization attempt; `false` when a pivot drops below `-tol`.
/// Pivots in `[-tol, 0]` are treated as zero (semi-definite direction).
pub(crate) fn is_psd(m: &[f64], n: usize, tol: f64) -> bool {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d < -tol {
            return false;
        }
        let d = d.max(0.0).sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = if d > 0.0 { s / d } else { 0.0 };
        }
    }
    true
}

/// Euclidean projection onto the probability simplex (sort-based).
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}
