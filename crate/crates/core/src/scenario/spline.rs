//! Cubic-spline differentiation of uniformly sampled signals.

use crate::error::{Error, Result};

/// Derivative at every knot of the not-a-knot cubic spline through `y`
/// sampled with spacing `h`.
///
/// Needs at least four samples; shorter inputs fall back to finite
/// differences.
pub fn spline_derivative(y: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!(
            "sample spacing must be > 0, got {h}"
        )));
    }
    let n = y.len();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![0.0]),
        2 | 3 => {
            let d = (y[n - 1] - y[0]) / (h * (n - 1) as f64);
            return Ok(vec![d; n]);
        }
        _ => {}
    }
    // Second derivatives m_i satisfy m_{i-1} + 4 m_i + m_{i+1} = 6 Δ²y_i / h²
    // on interior knots. Not-a-knot ends give m_0 = 2m_1 − m_2 and
    // m_{n-1} = 2m_{n-2} − m_{n-3}, which turn the first and last interior
    // rows into 6 m_1 = r_1 and 6 m_{n-2} = r_{n-2}.
    let k = n - 2;
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h))
        .collect();
    let mut sub = vec![1.0; k];
    let mut diag = vec![4.0; k];
    let mut sup = vec![1.0; k];
    diag[0] = 6.0;
    sup[0] = 0.0;
    diag[k - 1] = 6.0;
    sub[k - 1] = 0.0;
    let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let mut m = Vec::with_capacity(n);
    m.push(2.0 * interior[0] - interior.get(1).copied().unwrap_or(interior[0]));
    m.extend_from_slice(&interior);
    let last = if k >= 2 {
        2.0 * interior[k - 1] - interior[k - 2]
    } else {
        interior[k - 1]
    };
    m.push(last);
    let mut d = Vec::with_capacity(n);
    for i in 0..n - 1 {
        d.push((y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0);
    }
    d.push((y[n - 1] - y[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0);
    Ok(d)
}

/// Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
