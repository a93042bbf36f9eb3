//! Two-sided power-ratio bounds and the sublinearly powerlike majorant.

use serde::{Deserialize, Serialize};

use super::SigmaCurve;
use crate::{Error, Result};

/// Exponents and constants of the two-sided bound
/// `C22 (s/r)^chi1 <= sigma_s / sigma_r <= C23 (s/r)^chi2` for `s >= r >= C21`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerlikeParams {
    pub chi: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub c21: f64,
    pub c22: f64,
    pub c23: f64,
}

impl PowerlikeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.chi1 > 0.0
            && self.chi1 < self.chi
            && self.chi < self.chi2
            && self.c21 > 0.0
            && self.c22 > 0.0
            && self.c23 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid powerlike parameters {self:?}"
            )))
        }
    }

    pub fn is_sublinear(&self) -> bool {
        self.chi2 < 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerlikeViolation {
    pub r: f64,
    pub s: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerlikeReport {
    pub pairs_checked: usize,
    pub violations: Vec<PowerlikeViolation>,
    /// Largest `C22` and smallest `C23` the data allow with the given
    /// exponents and `C21`.
    pub tightest_c22: f64,
    pub tightest_c23: f64,
}

/// Checks every sampled pair `s >= r >= C21` against the two-sided bound.
pub fn powerlike_check(curve: &SigmaCurve, params: &PowerlikeParams) -> Result<PowerlikeReport> {
    params.validate()?;
    let e: Vec<_> = curve.entries.iter().filter(|e| e.r >= params.c21).collect();
    let mut violations = Vec::new();
    let mut pairs = 0;
    let mut c22 = f64::INFINITY;
    let mut c23 = 0.0f64;
    for (i, a) in e.iter().enumerate() {
        for b in &e[i..] {
            pairs += 1;
            let q = b.r / a.r;
            let ratio = b.sigma / a.sigma;
            let lower = params.c22 * q.powf(params.chi1);
            let upper = params.c23 * q.powf(params.chi2);
            c22 = c22.min(ratio / q.powf(params.chi1));
            c23 = c23.max(ratio / q.powf(params.chi2));
            if ratio < lower || ratio > upper {
                violations.push(PowerlikeViolation {
                    r: a.r,
                    s: b.r,
                    ratio,
                    lower,
                    upper,
                });
            }
        }
    }
    Ok(PowerlikeReport {
        pairs_checked: pairs,
        violations,
        tightest_c22: c22,
        tightest_c23: c23,
    })
}

/// `log rho(e^t) - chi t` for `rho` interpolated linearly in log-log
/// coordinates between samples and held at the end values of `f` outside
/// them. Knots are `(t_i, f_i)`.
fn f_knots(samples: &[(f64, f64)], chi: f64) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|&(r, rho)| {
            let t = r.ln();
            (t, rho.ln() - chi * t)
        })
        .collect()
}

fn eval_pl(knots: &[(f64, f64)], t: f64) -> f64 {
    if t <= knots[0].0 {
        return knots[0].1;
    }
    let last = knots[knots.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|x| x.0 <= t);
    let (a, b) = (knots[k - 1], knots[k]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// Supremum of the piecewise-linear `f` over `(lo, hi]`.
fn block_sup(knots: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut best = eval_pl(knots, hi);
    // the sup over a half-open interval of a continuous function equals the
    // max over its closure
    best = best.max(eval_pl(knots, lo));
    for &(t, v) in knots {
        if t > lo && t <= hi {
            best = best.max(v);
        }
    }
    best
}

/// A sublinearly powerlike majorant `rho_tilde >= rho`, built from dyadic
/// block suprema of `f(t) = log rho(e^t) - chi t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerlikeEnvelope {
    pub samples: Vec<(f64, f64)>,
    pub chi: f64,
    pub epsilon: f64,
    /// Block base in log scale: block `k` is `(2^{k-1} M, 2^k M]`.
    pub m: f64,
    /// `betas[k - 1]` is the supremum over block `k`; block 1 is `(0, 2M]`.
    pub betas: Vec<f64>,
    /// `breakpoints[k - 1] = a_k = 3 * 2^{k-2} M`.
    pub breakpoints: Vec<f64>,
    /// Knots of the piecewise-linear `f_tilde`, constant before the first and
    /// after the last.
    pub knots: Vec<(f64, f64)>,
    pub max_slope: f64,
}

impl PowerlikeEnvelope {
    pub fn f_tilde(&self, t: f64) -> f64 {
        eval_pl(&self.knots, t)
    }

    pub fn rho_tilde(&self, r: f64) -> f64 {
        let t = r.ln();
        (self.f_tilde(t) + self.chi * t).exp()
    }

    /// `a_1`, beyond which (in log scale) the ratio slopes are certified.
    pub fn a1(&self) -> f64 {
        self.breakpoints[0]
    }

    /// Constants certified by the slope bound: for all `s >= r > 1` the
    /// ratio `rho_tilde(s) / rho_tilde(r)` lies between `(s/r)^{chi - eps}`
    /// and `(s/r)^{chi + eps}`.
    pub fn params(&self) -> PowerlikeParams {
        PowerlikeParams {
            chi: self.chi,
            chi1: self.chi - self.epsilon,
            chi2: self.chi + self.epsilon,
            c21: 1.0,
            c22: 1.0,
            c23: 1.0,
        }
    }

    /// The majorant evaluated at the sample abscissae.
    pub fn as_curve(&self) -> Result<SigmaCurve> {
        let pairs: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(|&(r, _)| (r, self.rho_tilde(r)))
            .collect();
        SigmaCurve::from_pairs(&pairs, "powerlike majorant")
    }
}

fn validate_samples(samples: &[(f64, f64)], chi: f64, epsilon: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::DegenerateCurve("no samples".into()));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::DegenerateCurve("sample abscissae must increase".into()));
        }
    }
    if let Some(s) = samples
        .iter()
        .find(|s| !(s.0 > 1.0 && s.1 > 0.0 && s.1.is_finite()))
    {
        return Err(Error::InvalidParameter(format!(
            "need r > 1 and rho > 0, got {s:?}"
        )));
    }
    if !(chi > 0.0 && chi < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "chi must lie in (0, 1), got {chi}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn build(samples: &[(f64, f64)], chi: f64, m: f64, epsilon: f64) -> PowerlikeEnvelope {
    let knots = f_knots(samples, chi);
    let t_max = knots[knots.len() - 1].0;
    // blocks up to the one holding t_max, plus one more
    let mut kmax = 1usize;
    while 2f64.powi(kmax as i32) * m < t_max {
        kmax += 1;
    }
    kmax += 1;
    let betas: Vec<f64> = (1..=kmax)
        .map(|k| {
            let hi = 2f64.powi(k as i32) * m;
            let lo = if k == 1 { f64::NEG_INFINITY } else { hi / 2.0 };
            block_sup(&knots, lo, hi)
        })
        .collect();
    let a = |k: usize| 3.0 * 2f64.powi(k as i32 - 2) * m;
    let breakpoints: Vec<f64> = (1..=kmax).map(a).collect();
    let mut tk = vec![(a(1), betas[0])];
    for k in 1..kmax {
        let (bk, bk1) = (betas[k - 1], betas[k]);
        let mid = 2f64.powi(k as i32) * m;
        if bk >= bk1 {
            tk.push((mid, bk));
        } else {
            tk.push((mid, bk1));
        }
        tk.push((a(k + 1), bk1));
    }
    tk.dedup_by(|b, a| b.0 == a.0 && b.1 == a.1);
    let max_slope = tk
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    PowerlikeEnvelope {
        samples: samples.to_vec(),
        chi,
        epsilon,
        m,
        betas,
        breakpoints,
        knots: tk,
        max_slope,
    }
}

/// The majorant for block base `m` (in log scale). Fails with `SlopeBound`
/// when some linear piece is steeper than `epsilon`; a larger `m` then helps.
pub fn sublin_majorant(samples: &[(f64, f64)], chi: f64, m: f64, epsilon: f64) -> Result<PowerlikeEnvelope> {
    validate_samples(samples, chi, epsilon)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "block base must be positive, got {m}"
        )));
    }
    let env = build(samples, chi, m, epsilon);
    if env.max_slope > epsilon {
        return Err(Error::SlopeBound {
            slope: env.max_slope,
            epsilon,
        });
    }
    Ok(env)
}

/// Smallest power of two `M` whose construction has every slope at most
/// `epsilon / 2`.
pub fn default_block_base(samples: &[(f64, f64)], chi: f64, epsilon: f64) -> Result<f64> {
    validate_samples(samples, chi, epsilon)?;
    for e in -40..=60 {
        let m = 2f64.powi(e);
        if build(samples, chi, m, epsilon).max_slope <= epsilon / 2.0 {
            return Ok(m);
        }
    }
    Err(Error::SlopeBound {
        slope: f64::INFINITY,
        epsilon,
    })
}
