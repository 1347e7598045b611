//! Small numeric helpers shared across modules.

/// Result of an ordinary least-squares line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// OLS fit of a line through `(x, y)` samples. Needs at least two distinct
/// abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / n).sqrt(),
    })
}

/// Composite Simpson weights for `m` uniformly spaced nodes (h factored out).
/// Falls back to trapezoid weights on the last interval when `m` is even.
pub fn simpson_weights(m: usize) -> Vec<f64> {
    assert!(m >= 2);
    let mut w = vec![0.0; m];
    if m == 2 {
        return vec![0.5, 0.5];
    }
    // largest odd prefix gets Simpson, remainder a trapezoid correction
    let simpson_end = if m % 2 == 1 { m - 1 } else { m - 2 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
        i += 2;
    }
    if m % 2 == 0 {
        w[m - 2] += 0.5;
        w[m - 1] += 0.5;
    }
    w
}

/// `count` points log-spaced in `[a, b]` (inclusive), `0 < a < b`.
pub fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && count >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Euclidean norm of the first `n` components.
pub fn norm_n(p: &[f64], n: usize) -> f64 {
    match n {
        1 => p[0].abs(),
        2 => p[0].hypot(p[1]),
        _ => p[..n].iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1], orders used by the quadrature
/// tables (hard-coded up to 8 points).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    match order {
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        4 => {
            let x1 = 0.3399810435848563;
            let x2 = 0.8611363115940526;
            let w1 = 0.6521451548625461;
            let w2 = 0.3478548451374538;
            (vec![-x2, -x1, x1, x2], vec![w2, w1, w1, w2])
        }
        8 => {
            let xs = [
                0.1834346424956498,
                0.5255324099163290,
                0.7966664774136267,
                0.9602898564975363,
            ];
            let ws = [
                0.3626837833783620,
                0.3137066458778873,
                0.2223810344533745,
                0.1012285362903763,
            ];
            let mut nodes = Vec::with_capacity(8);
            let mut weights = Vec::with_capacity(8);
            for i in (0..4).rev() {
                nodes.push(-xs[i]);
                weights.push(ws[i]);
            }
            for i in 0..4 {
                nodes.push(xs[i]);
                weights.push(ws[i]);
            }
            (nodes, weights)
        }
        _ => panic!("unsupported Gauss order {order}"),
    }
}

/// Integrate `f` over `[a, b]` with composite 8-point Gauss on `cells`
/// uniform subintervals.
pub fn integrate_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(8);
    let hc = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let mid = a + (c as f64 + 0.5) * hc;
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * f(mid + 0.5 * hc * x);
        }
    }
    total * 0.5 * hc
}
