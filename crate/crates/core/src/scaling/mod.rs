//! Fluctuation-scale curves and the functionals built on them.

mod powerlike;
mod straightness;

pub use powerlike::{
    default_block_base, powerlike_check, sublin_majorant, PowerlikeEnvelope, PowerlikeParams,
    PowerlikeReport, PowerlikeViolation,
};
pub use straightness::{theta_transform, Isometry, StraightnessSpec};

use serde::{Deserialize, Serialize};

use crate::stats::{jackknife_se, sample_sd, weighted_line};
use crate::{Error, Result};

/// Minimum number of samples per abscissa for [`estimate_sigma`].
pub const MIN_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub r: f64,
    pub sigma: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Estimated `(r, sigma_r)` samples, interpolated linearly in log-log
/// coordinates and extrapolated with the end slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaCurve {
    pub entries: Vec<SigmaEntry>,
    pub source: String,
}

impl SigmaCurve {
    pub fn new(entries: Vec<SigmaEntry>, source: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DegenerateCurve("empty curve".into()));
        }
        for w in entries.windows(2) {
            if !(w[1].r > w[0].r) {
                return Err(Error::DegenerateCurve(format!(
                    "abscissae not strictly increasing at r = {}",
                    w[1].r
                )));
            }
        }
        for e in &entries {
            if !(e.r > 0.0 && e.sigma > 0.0 && e.sigma.is_finite() && e.stderr >= 0.0) {
                return Err(Error::DegenerateCurve(format!(
                    "invalid entry r = {}, sigma = {}, stderr = {}",
                    e.r, e.sigma, e.stderr
                )));
            }
        }
        Ok(SigmaCurve {
            entries,
            source: source.into(),
        })
    }

    /// Curve from exact `(r, sigma)` pairs with zero standard errors.
    pub fn from_pairs(pairs: &[(f64, f64)], source: impl Into<String>) -> Result<Self> {
        let entries = pairs
            .iter()
            .map(|&(r, sigma)| SigmaEntry {
                r,
                sigma,
                stderr: 0.0,
                n: 0,
            })
            .collect();
        SigmaCurve::new(entries, source)
    }

    pub fn rs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.r).collect()
    }

    pub fn r_min(&self) -> f64 {
        self.entries[0].r
    }

    pub fn r_max(&self) -> f64 {
        self.entries[self.entries.len() - 1].r
    }

    /// `sigma(r)` for any `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let e = &self.entries;
        if e.len() == 1 {
            return e[0].sigma;
        }
        let lr = r.ln();
        let k = e.partition_point(|x| x.r <= r).clamp(1, e.len() - 1);
        let (a, b) = (&e[k - 1], &e[k]);
        let (la, lb) = (a.r.ln(), b.r.ln());
        let slope = (b.sigma.ln() - a.sigma.ln()) / (lb - la);
        (a.sigma.ln() + slope * (lr - la)).exp()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].sigma > w[0].sigma)
    }
}

/// Standard deviation per abscissa with jackknife standard errors. Each input
/// holds the uncensored samples at one `r`.
pub fn estimate_sigma(samples: &[(f64, Vec<f64>)], source: &str) -> Result<SigmaCurve> {
    let mut entries = Vec::with_capacity(samples.len());
    for (r, xs) in samples {
        if xs.len() < MIN_SAMPLES {
            return Err(Error::Insufficient(format!(
                "{} samples at r = {r}, need {MIN_SAMPLES}",
                xs.len()
            )));
        }
        let sigma = sample_sd(xs);
        if !(sigma > 0.0) {
            return Err(Error::DegenerateCurve(format!("zero spread at r = {r}")));
        }
        entries.push(SigmaEntry {
            r: *r,
            sigma,
            stderr: jackknife_se(xs, sample_sd),
            n: xs.len(),
        });
    }
    SigmaCurve::new(entries, source)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiFit {
    pub chi_hat: f64,
    /// Log of the prefactor.
    pub intercept: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

/// Log-log slope of the curve, weighted by inverse squared relative standard
/// errors (unit weights when any standard error is zero).
pub fn fit_chi(curve: &SigmaCurve) -> Result<ChiFit> {
    if curve.entries.len() < 4 {
        return Err(Error::Insufficient(format!(
            "chi fit needs at least 4 abscissae, got {}",
            curve.entries.len()
        )));
    }
    let x: Vec<f64> = curve.entries.iter().map(|e| e.r.ln()).collect();
    let y: Vec<f64> = curve.entries.iter().map(|e| e.sigma.ln()).collect();
    let w: Vec<f64> = if curve.entries.iter().all(|e| e.stderr > 0.0) {
        curve
            .entries
            .iter()
            .map(|e| (e.sigma / e.stderr).powi(2))
            .collect()
    } else {
        vec![1.0; x.len()]
    };
    let f = weighted_line(&x, &y, &w)?;
    Ok(ChiFit {
        chi_hat: f.slope,
        intercept: f.intercept,
        stderr: f.slope_se,
        ci95: f.slope_ci(0.95),
    })
}

/// Wandering scale `(r sigma_r)^{1/2}` for `r` within the sampled range.
pub fn delta_of(r: f64, curve: &SigmaCurve) -> Result<f64> {
    let tol = 1e-12 * curve.r_max();
    if !(r >= curve.r_min() - tol && r <= curve.r_max() + tol) {
        return Err(Error::InvalidParameter(format!(
            "r = {r} outside the curve range [{}, {}]",
            curve.r_min(),
            curve.r_max()
        )));
    }
    Ok((r * curve.eval(r)).sqrt())
}

/// Running maximum, then a relative perturbation below `1e-9` that makes the
/// sequence strictly increasing.
pub fn monotone_envelope(curve: &SigmaCurve) -> SigmaCurve {
    let n = curve.entries.len();
    let mut best = 0.0f64;
    let entries = curve
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            best = best.max(e.sigma);
            SigmaEntry {
                sigma: best * (1.0 + 1e-9 * i as f64 / n as f64),
                ..*e
            }
        })
        .collect();
    SigmaCurve {
        entries,
        source: format!("{} (monotone envelope)", curve.source),
    }
}

#[cfg(test)]
mod tests;
