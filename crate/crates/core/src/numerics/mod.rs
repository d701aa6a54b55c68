//! Numerical building blocks: root finding, quadrature, fits and summaries.

pub mod optimize;
pub mod quad;
pub mod regression;
pub mod root;

pub use optimize::{argmax, golden_section_min};
pub use quad::{integrate, integrate_range, Integral, QuadOptions};
pub use regression::{linear_fit, log_log_fit, polyfit, polyval, LinearFit, PowerLawFit};
pub use root::{brent, expand_upper, RootOptions};

use serde::Serialize;

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary { n, mean: f64::NAN, std_dev: f64::NAN, std_err: f64::NAN };
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        Summary { n, mean, std_dev, std_err: std_dev / nf.sqrt() }
    }
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced in `ln`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basic() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(Summary::of(&[]).mean.is_nan());
    }

    #[test]
    fn spaces_hit_endpoints() {
        let l = log_space(1e5, 1e8, 4);
        assert_eq!(l[0], 1e5);
        assert_eq!(l[3], 1e8);
        assert!((l[1] - 1e6).abs() / 1e6 < 1e-12);
        assert_eq!(lin_space(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
