//! Symmetric tridiagonal solves and eigenpairs.

/// Solves `T x = rhs` for the symmetric tridiagonal `T = (diag, off)`.
pub(crate) fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / den;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
pub(crate) fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues with unit eigenvectors, ascending.
pub(crate) fn lowest_eigenpairs(diag: &[f64], off: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    let k = k.min(n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).abs().max(1.0);
    (0..k)
        .map(|j| {
            // The (j+1)-th eigenvalue: smallest x with count(x) > j.
            let (mut a, mut b) = (lo - 1e-12 * span, hi + 1e-12 * span);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if sturm_count(diag, off, m) > j {
                    b = m;
                } else {
                    a = m;
                }
            }
            let lam = 0.5 * (a + b);
            (lam, inverse_iteration(diag, off, lam, span))
        })
        .collect()
}

fn inverse_iteration(diag: &[f64], off: &[f64], lam: f64, span: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = lam - 1e-13 * span;
    let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        v = thomas(&shifted, off, &v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    // Fix the sign so that the first sizeable entry is positive.
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}
