//! Small statistics toolkit: moments, jackknife, weighted least squares,
//! Wilson intervals and isotonic regression.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn sem(x: &[f64]) -> f64 {
    sample_sd(x) / (x.len() as f64).sqrt()
}

/// Jackknife standard error of `stat` over leave-one-out subsamples.
pub fn jackknife_se(x: &[f64], stat: impl Fn(&[f64]) -> f64) -> f64 {
    let n = x.len();
    if n < 3 {
        return 0.0;
    }
    let mut buf = Vec::with_capacity(n - 1);
    let thetas: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v));
            stat(&buf)
        })
        .collect();
    let tm = mean(&thetas);
    ((n - 1) as f64 / n as f64 * thetas.iter().map(|t| (t - tm) * (t - tm)).sum::<f64>()).sqrt()
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

/// Two-sided Student t quantile, e.g. `t_quantile(0.975, dof)`.
pub fn t_quantile(p: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof)
        .map(|t| t.inverse_cdf(p))
        .unwrap_or(f64::NAN)
}

/// Weighted least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    /// Residual degrees of freedom.
    pub dof: usize,
    /// Weighted residual sum of squares.
    pub chi2: f64,
}

impl LinearFit {
    /// Two-sided confidence interval for the slope.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let t = t_quantile(0.5 + level / 2.0, self.dof as f64);
        (self.slope - t * self.slope_se, self.slope + t * self.slope_se)
    }
}

/// Weighted least squares. The covariance is scaled by the reduced chi-square
/// when that exceeds one, so the errors never understate the scatter.
pub fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n || w.len() != n {
        return Err(Error::Insufficient(format!(
            "line fit needs at least 3 points, got {n}"
        )));
    }
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm) * (a - xm)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Insufficient("line fit needs distinct abscissae".into()));
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = (0..n)
        .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let dof = n - 2;
    let scale = (chi2 / dof as f64).max(1.0);
    let slope_se = (scale / sxx).sqrt();
    let intercept_se = (scale * (1.0 / sw + xm * xm / sxx)).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        dof,
        chi2,
    })
}

/// Ordinary least squares: residual variance estimated from the data.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let w = vec![1.0; x.len()];
    let mut f = weighted_line(x, y, &w)?;
    let n = x.len();
    let xm = mean(x);
    let sxx: f64 = x.iter().map(|a| (a - xm) * (a - xm)).sum();
    let s2 = f.chi2 / f.dof as f64;
    f.slope_se = (s2 / sxx).sqrt();
    f.intercept_se = (s2 * (1.0 / n as f64 + xm * xm / sxx)).sqrt();
    Ok(f)
}

/// Weighted least squares through the origin on two regressors,
/// `y = b0 x0 + b1 x1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFit {
    pub coef: [f64; 2],
    /// Covariance of the coefficients, scaled like [`weighted_line`].
    pub cov: [[f64; 2]; 2],
    pub dof: usize,
    pub chi2: f64,
}

impl PlaneFit {
    pub fn se(&self, i: usize) -> f64 {
        self.cov[i][i].sqrt()
    }
}

pub fn weighted_plane(x0: &[f64], x1: &[f64], y: &[f64], w: &[f64]) -> Result<PlaneFit> {
    let n = y.len();
    if n < 3 || x0.len() != n || x1.len() != n || w.len() != n {
        return Err(Error::Insufficient(format!(
            "plane fit needs at least 3 points, got {n}"
        )));
    }
    let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        a00 += w[i] * x0[i] * x0[i];
        a01 += w[i] * x0[i] * x1[i];
        a11 += w[i] * x1[i] * x1[i];
        b0 += w[i] * x0[i] * y[i];
        b1 += w[i] * x1[i] * y[i];
    }
    let det = a00 * a11 - a01 * a01;
    if !(det > 1e-12 * a00 * a11) {
        return Err(Error::Insufficient("plane fit regressors are collinear".into()));
    }
    let inv = [[a11 / det, -a01 / det], [-a01 / det, a00 / det]];
    let coef = [inv[0][0] * b0 + inv[0][1] * b1, inv[1][0] * b0 + inv[1][1] * b1];
    let chi2: f64 = (0..n)
        .map(|i| w[i] * (y[i] - coef[0] * x0[i] - coef[1] * x1[i]).powi(2))
        .sum();
    let dof = n - 2;
    let scale = (chi2 / dof as f64).max(1.0);
    let cov = [
        [scale * inv[0][0], scale * inv[0][1]],
        [scale * inv[1][0], scale * inv[1][1]],
    ];
    Ok(PlaneFit { coef, cov, dof, chi2 })
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Weighted isotonic (nonincreasing) regression by pool-adjacent-violators.
pub fn isotonic_nonincreasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        blocks.push((v, w[i], 1));
        while blocks.len() > 1 {
            let b = blocks[blocks.len() - 1];
            let a = blocks[blocks.len() - 2];
            if a.0 >= b.0 {
                break;
            }
            let wt = a.1 + b.1;
            let m = if wt > 0.0 {
                (a.0 * a.1 + b.0 * b.1) / wt
            } else {
                0.5 * (a.0 + b.0)
            };
            blocks.pop();
            *blocks.last_mut().unwrap() = (m, wt, a.2 + b.2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}
