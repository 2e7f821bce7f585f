//! Small dense polynomials in ascending coefficient order.

use nalgebra::{DMatrix, DVector};

pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Product of two polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].abs() <= scale * 1e-14 {
        n -= 1;
    }
    &coeffs[..n]
}

/// Real roots inside `[lo, hi]`, ascending.
///
/// The interval is cut at the roots of the derivative so that the
/// polynomial is monotone on every piece; each piece holding a sign change
/// is then bisected to full precision.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trimmed(coeffs);
    if c.len() <= 1 || lo > hi {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
    }
    let mut cuts = vec![lo];
    cuts.extend(real_roots_in(&derivative(c), lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    cuts.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        let root = if fa == 0.0 {
            Some(a)
        } else if fb == 0.0 {
            Some(b)
        } else if fa.signum() != fb.signum() {
            Some(bisect(c, a, b, fa))
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().is_none_or(|&last| (r - last).abs() > 1e-12 * (1.0 + r.abs())) {
                roots.push(r);
            }
        }
    }
    roots
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Unweighted least-squares polynomial of the given degree through the
/// points. Returns `None` when there are fewer distinct abscissae than
/// coefficients.
pub fn least_squares(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    assert_eq!(xs.len(), ys.len());
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= degree {
        return None;
    }
    let n = xs.len();
    let design = DMatrix::from_fn(n, degree + 1, |i, j| xs[i].powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let svd = design.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).ok()?;
    Some(sol.iter().copied().collect())
}

/// Sum of squared residuals of `coeffs` on the points.
pub fn residual(coeffs: &[f64], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (eval(coeffs, x) - y).powi(2)).sum()
}

/// Expands `c(t)` with `t = (x - center) / half_width` into monomials of `x`.
pub fn unscale(coeffs: &[f64], center: f64, half_width: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    // (x - center)^k / half_width^k, expanded term by term
    let mut power = vec![1.0];
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = mul(&power, &[-center / half_width, 1.0 / half_width]);
        }
        for (j, p) in power.iter().enumerate() {
            out[j] += c * p;
        }
    }
    out
}
