//! Oracles shared by the integration tests. None of them call the library's
//! formulas.

#![allow(dead_code)]

/// Expected absorption times of the walk on `0..=w` that steps down with
/// probability `p`, from the linear system
/// `X_m = 1 + p X_{m-1} + (1 - p) X_{m+1}`, `X_0 = X_w = 0`, solved by the
/// Thomas algorithm.
pub fn absorption_times(w: usize, p: f64) -> Vec<f64> {
    let mut x = vec![0.0; w + 1];
    if w < 2 {
        return x;
    }
    let q = 1.0 - p;
    let n = w - 1;
    // Row i (state i + 1): -p x_{i-1} + x_i - q x_{i+1} = 1.
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = -q;
    d[0] = 1.0;
    for i in 1..n {
        let denom = 1.0 + p * c[i - 1];
        c[i] = -q / denom;
        d[i] = (1.0 + p * d[i - 1]) / denom;
    }
    x[n] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i + 1] = d[i] - c[i] * x[i + 2];
    }
    x
}

/// Two-sample-free Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}
