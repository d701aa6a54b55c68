//! Least-squares fits used to summarise sweeps.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// `y = coefficient * x^exponent`, fitted on log–log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.coefficient * x.powf(self.exponent)
    }
}

/// Ordinary least squares. `None` with fewer than two points or constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Power-law fit through the points with positive coordinates.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Option<PowerLawFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let fit = linear_fit(&lx, &ly)?;
    Some(PowerLawFit {
        exponent: fit.slope,
        coefficient: fit.intercept.exp(),
        r_squared: fit.r_squared,
    })
}

/// Polynomial least squares; coefficients from the constant term upward.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Option<Vec<f64>> {
    let n = x.len().min(y.len());
    let k = degree + 1;
    if n < k {
        return None;
    }
    // Fit on x / scale for conditioning, then rescale the coefficients.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for (xi, yi) in x.iter().zip(y) {
        let t = xi / scale;
        let powers: Vec<f64> = (0..k).map(|p| t.powi(p as i32)).collect();
        for i in 0..k {
            aty[i] += powers[i] * yi;
            for j in 0..k {
                ata[i][j] += powers[i] * powers[j];
            }
        }
    }
    let coef = solve_dense(ata, aty)?;
    Some(
        coef.iter()
            .enumerate()
            .map(|(p, c)| c / scale.powi(p as i32))
            .collect(),
    )
}

pub fn polyval(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Coefficient of determination of `fitted` against `y`.
pub fn r_squared(y: &[f64], fitted: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.05 * v + 0.1).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 0.05).abs() < 1e-14);
        assert!((f.intercept - 0.1).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (1..20).map(|i| i as f64 * 1e-4).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let f = log_log_fit(&x, &y).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.coefficient - 3.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_over_large_range() {
        let x: Vec<f64> = (0..30).map(|i| 1e5 * 10f64.powf(i as f64 / 10.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2e-15 * v * v + 1e-9 * v + 0.5).collect();
        let c = polyfit(&x, &y, 2).unwrap();
        assert!((c[2] - 2e-15).abs() / 2e-15 < 1e-8);
        let fitted: Vec<f64> = x.iter().map(|v| polyval(&c, *v)).collect();
        assert!(r_squared(&y, &fitted) > 1.0 - 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], 2).is_none());
    }
}
