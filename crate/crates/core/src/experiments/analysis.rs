//! Post-merge statistics: plug-in `h` and `sigma`, the regression for `mu`,
//! the exact-expectation inequalities checked with `3 x stderr` slack, and
//! the tail reports.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::cylinder::irs_interval;
use super::replica::{PairPlan, ReplicaData};
use super::table::{num, Table, CHECK_COLUMNS, HMU_COLUMNS, TAIL_COLUMNS};
use super::tail::{TailReport, TailShape};
use crate::scaling::{
    delta_of, estimate_sigma, fit_chi, monotone_envelope, ChiFit, SigmaCurve, StraightnessSpec,
};
use crate::stats::{mean, ols_line, quantile, sem, weighted_line, weighted_plane};
use crate::{Error, Result};

/// Largest censored fraction tolerated in any group of observations.
pub const MAX_CENSORED_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HmuSummary {
    pub fit_range: (f64, f64),
    pub chi: ChiFit,
    /// `mu` from the weighted fit `h(r) = mu r + a sigma(r)` over the fit range.
    pub mu_hat: f64,
    pub mu_se: f64,
    pub sigma_coef: f64,
    pub sigma_coef_se: f64,
    /// `[h(R)/R - C sigma_R log R / R, h(R)/R]` at the largest grid value `R`.
    pub mu_bracket: (f64, f64),
    pub c46: f64,
    pub mu_hat_in_bracket: bool,
    /// Log-log slope of `h(r) - mu_hat r` over the fit range.
    pub nonrandom_slope: Option<SlopeFit>,
    pub nonrandom_slope_below_one: bool,
    pub h_over_r_nonincreasing: bool,
    pub lower_bound_holds: bool,
    pub subadditive: bool,
    /// Log-log slope of the median axis-geodesic wandering over the fit range.
    pub xi: Option<SlopeFit>,
    pub xi_predicted: f64,
    pub xi_gap: Option<f64>,
    pub max_censored_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSummary {
    pub epsilon: f64,
    pub pairs: usize,
    pub failures: Vec<(f64, f64)>,
}

/// A tail report without its rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub group: String,
    pub n_total: usize,
    pub n_censored: usize,
    pub monotone_raw: bool,
    pub hard_violations: Vec<(f64, f64)>,
    pub shape: TailShape,
}

impl From<&TailReport> for TailSummary {
    fn from(t: &TailReport) -> Self {
        let first = t.rows.first();
        TailSummary {
            group: t.group.clone(),
            n_total: first.map_or(0, |r| r.n_total),
            n_censored: first.map_or(0, |r| r.n_censored),
            monotone_raw: t.monotone_raw,
            hard_violations: t.hard_violations.clone(),
            shape: t.shape.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSummary {
    pub r: f64,
    pub sigma_r: f64,
    /// Cylinder half-widths `K Delta_r` used for sampling, from the pilot.
    pub half_widths: Vec<(f64, f64)>,
    pub tails: Vec<TailSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WanderingSummary {
    pub r: f64,
    pub k: f64,
    pub delta_r: f64,
    pub delta_pilot: f64,
    /// `K` in units of the final `Delta_r`.
    pub k_effective: f64,
    /// `(C34 log r)^{1/2}`, where `I_{r,s}` switches branch.
    pub branch_boundary: f64,
    pub straddles_branch: bool,
    /// Quantiles 0.5, 0.9, 0.99 of wandering / `Delta_r` over uncensored
    /// geodesics.
    pub wandering_over_delta: [f64; 3],
    pub tail: TailSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraightnessSummary {
    pub c23: f64,
    pub chi2: f64,
    /// Median of the sup of `D_r` along geodesics, per `r`.
    pub medians: Vec<(f64, f64)>,
    pub tails: Vec<TailSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    /// Mean of `|V cap B_r| / r^2` per radius.
    pub means: Vec<(f64, f64)>,
    pub tails: Vec<TailSummary>,
}

/// Piecewise-linear `h` through `(0, 0)` and the grid means, extended with
/// the last slope.
#[derive(Clone, Debug)]
pub(crate) struct HCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl HCurve {
    pub fn new(rs: &[f64], h: &[f64]) -> Self {
        HCurve {
            xs: std::iter::once(0.0).chain(rs.iter().copied()).collect(),
            ys: std::iter::once(0.0).chain(h.iter().copied()).collect(),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = self.xs.partition_point(|x| *x <= r).clamp(1, self.xs.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (r - x0) / (x1 - x0)
    }
}

fn check_censoring(censored: usize, total: usize) -> Result<()> {
    if censored as f64 > MAX_CENSORED_FRACTION * total as f64 {
        Err(Error::ExcessiveCensoring { censored, total })
    } else {
        Ok(())
    }
}

/// `sigma` per axis distance from the uncensored samples.
pub(crate) fn axis_sigma(rs: &[f64], data: &[ReplicaData], source: &str) -> Result<SigmaCurve> {
    let samples: Vec<(f64, Vec<f64>)> = rs
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let v = data
                .iter()
                .map(|d| d.axis[i])
                .filter(|a| !a.censored)
                .map(|a| a.time)
                .collect();
            (r, v)
        })
        .collect();
    estimate_sigma(&samples, source).map_err(|e| {
        // too few samples left because of censoring is a censoring failure
        let worst = samples
            .iter()
            .map(|(_, v)| data.len() - v.len())
            .max()
            .unwrap_or(0);
        match e {
            Error::Insufficient(_) if worst > 0 => Error::ExcessiveCensoring {
                censored: worst,
                total: data.len(),
            },
            e => e,
        }
    })
}

pub(crate) struct HmuResult {
    pub summary: HmuSummary,
    pub curve: SigmaCurve,
    pub h: HCurve,
    pub table: Table,
    pub checks: Table,
    pub monotone: Option<MonotoneSummary>,
}

fn on_grid(rs: &[f64], v: f64) -> Option<usize> {
    rs.iter().position(|&r| (r - v).abs() <= 1e-9 * v)
}

pub(crate) fn analyse_hmu(cfg: &ExperimentConfig, data: &[ReplicaData], source: &str) -> Result<HmuResult> {
    let rs = &cfg.hmu.r;
    let total = data.len();
    let mut h = Vec::new();
    let mut h_se = Vec::new();
    let mut wand = Vec::new();
    let mut censored = Vec::new();
    for i in 0..rs.len() {
        let ok: Vec<_> = data.iter().map(|d| d.axis[i]).filter(|a| !a.censored).collect();
        censored.push(total - ok.len());
        let t: Vec<f64> = ok.iter().map(|a| a.time).collect();
        h.push(mean(&t));
        h_se.push(sem(&t));
        wand.push(ok.iter().map(|a| a.wandering).collect::<Vec<f64>>());
    }
    let curve = axis_sigma(rs, data, source)?;
    let sigma: Vec<f64> = curve.entries.iter().map(|e| e.sigma).collect();
    let (fit_lo, fit_hi) = (cfg.hmu.fit_min, cfg.fit_max());
    let in_fit: Vec<usize> = (0..rs.len())
        .filter(|&i| rs[i] >= fit_lo && rs[i] <= fit_hi)
        .collect();
    let fit_curve = SigmaCurve::new(
        in_fit.iter().map(|&i| curve.entries[i]).collect(),
        curve.source.clone(),
    )?;
    let chi = fit_chi(&fit_curve)?;

    let pick = |v: &[f64]| in_fit.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let w: Vec<f64> = pick(&h_se).iter().map(|s| 1.0 / (s * s).max(1e-300)).collect();
    let plane = weighted_plane(&pick(rs), &pick(&sigma), &pick(&h), &w)?;
    let (mu, mu_se) = (plane.coef[0], plane.se(0));

    let last = rs.len() - 1;
    let rmax = rs[last];
    let hi = h[last] / rmax;
    let lo = hi - cfg.hmu.c46 * sigma[last] * rmax.ln() / rmax;

    let err: Vec<f64> = (0..rs.len()).map(|i| h[i] - mu * rs[i]).collect();
    let err_se: Vec<f64> = (0..rs.len()).map(|i| h_se[i].hypot(rs[i] * mu_se)).collect();
    let pos: Vec<usize> = in_fit.iter().copied().filter(|&i| err[i] > 0.0).collect();
    let nonrandom_slope = if pos.len() >= 3 {
        let x: Vec<f64> = pos.iter().map(|&i| rs[i].ln()).collect();
        let y: Vec<f64> = pos.iter().map(|&i| err[i].ln()).collect();
        let w: Vec<f64> = pos.iter().map(|&i| (err[i] / err_se[i]).powi(2)).collect();
        weighted_line(&x, &y, &w).ok().map(|f| SlopeFit {
            slope: f.slope,
            stderr: f.slope_se,
            ci95: f.slope_ci(0.95),
            points: pos.len(),
        })
    } else {
        None
    };

    let medians: Vec<f64> = in_fit.iter().map(|&i| quantile(&wand[i], 0.5)).collect();
    let xi = if medians.iter().all(|m| *m > 0.0) {
        let x: Vec<f64> = in_fit.iter().map(|&i| rs[i].ln()).collect();
        let y: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
        ols_line(&x, &y).ok().map(|f| SlopeFit {
            slope: f.slope,
            stderr: f.slope_se,
            ci95: f.slope_ci(0.95),
            points: x.len(),
        })
    } else {
        None
    };
    let xi_predicted = (1.0 + chi.chi_hat) / 2.0;

    let mut table = Table::new("hmu", HMU_COLUMNS);
    for i in 0..rs.len() {
        table.push(vec![
            num(rs[i]),
            total.to_string(),
            censored[i].to_string(),
            num(h[i]),
            num(h_se[i]),
            num(h[i] / rs[i]),
            num(h_se[i] / rs[i]),
            num(sigma[i]),
            num(curve.entries[i].stderr),
            num((rs[i] * sigma[i]).sqrt()),
            num(err[i]),
            num(err_se[i]),
            num(err[i] / sigma[i]),
            num(quantile(&wand[i], 0.5)),
            num(quantile(&wand[i], 0.9)),
        ]);
    }

    let mut checks = Table::new("checks", CHECK_COLUMNS);
    let row = |checks: &mut Table,
               name: &str,
               r: f64,
               s: Option<f64>,
               lhs: f64,
               rhs: f64,
               slack: f64,
               pass: bool| {
        checks.push(vec![
            name.into(),
            num(r),
            s.map(num).unwrap_or_default(),
            num(lhs),
            num(rhs),
            num(slack),
            pass.to_string(),
        ]);
        pass
    };
    let mut h_over_r_ok = true;
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let (a, b) = (h[i] / rs[i], h[j] / rs[j]);
            let slack = 3.0 * (h_se[i] / rs[i]).hypot(h_se[j] / rs[j]);
            h_over_r_ok &= row(
                &mut checks,
                "h_over_r",
                rs[i],
                Some(rs[j]),
                b,
                a,
                slack,
                b <= a + slack,
            );
        }
    }
    let mut lower_ok = true;
    for i in 0..rs.len() {
        let slack = 3.0 * h_se[i];
        let rhs = lo * rs[i];
        lower_ok &= row(
            &mut checks,
            "lower_bound",
            rs[i],
            None,
            h[i],
            rhs,
            slack,
            h[i] >= rhs - slack,
        );
    }
    let mut sub_ok = true;
    let eps = cfg.monotone_h.epsilon;
    let mut mono = MonotoneSummary {
        epsilon: eps,
        pairs: 0,
        failures: Vec::new(),
    };
    for i in 0..rs.len() {
        for j in 0..=i {
            let Some(k) = on_grid(rs, rs[i] + rs[j]) else {
                continue;
            };
            let slack = 3.0 * (h_se[k].powi(2) + h_se[i].powi(2) + h_se[j].powi(2)).sqrt();
            let rhs = h[i] + h[j];
            sub_ok &= row(
                &mut checks,
                "subadditive",
                rs[i],
                Some(rs[j]),
                h[k],
                rhs,
                slack,
                h[k] <= rhs + slack,
            );
            if cfg.kind.monotone_h() {
                let slack =
                    3.0 * (h_se[k].powi(2) + h_se[i].powi(2) + ((1.0 - eps) * h_se[j]).powi(2)).sqrt();
                let rhs = h[i] + (1.0 - eps) * h[j];
                mono.pairs += 1;
                if !row(
                    &mut checks,
                    "monotone",
                    rs[i],
                    Some(rs[j]),
                    h[k],
                    rhs,
                    slack,
                    h[k] >= rhs - slack,
                ) {
                    mono.failures.push((rs[i], rs[j]));
                }
            }
        }
    }

    let summary = HmuSummary {
        fit_range: (fit_lo, fit_hi),
        chi,
        mu_hat: mu,
        mu_se,
        sigma_coef: plane.coef[1],
        sigma_coef_se: plane.se(1),
        mu_bracket: (lo, hi),
        c46: cfg.hmu.c46,
        mu_hat_in_bracket: mu >= lo && mu <= hi,
        nonrandom_slope_below_one: nonrandom_slope.is_some_and(|s| s.ci95.1 < 1.0),
        nonrandom_slope,
        h_over_r_nonincreasing: h_over_r_ok,
        lower_bound_holds: lower_ok,
        subadditive: sub_ok,
        xi_gap: xi.map(|x| (x.slope - xi_predicted).abs()),
        xi,
        xi_predicted,
        max_censored_fraction: censored
            .iter()
            .map(|&c| c as f64 / total as f64)
            .fold(0.0, f64::max),
    };
    Ok(HmuResult {
        summary,
        curve,
        h: HCurve::new(rs, &h),
        table,
        checks,
        monotone: cfg.kind.monotone_h().then_some(mono),
    })
}

/// Splits replicas into censored ones and the per-replica statistic of the
/// rest.
fn per_replica<T>(
    groups: &[&[T]],
    censored: impl Fn(&T) -> bool,
    stat: impl Fn(&[T]) -> f64,
) -> Result<(Vec<f64>, usize)> {
    let mut values = Vec::new();
    let mut c = 0;
    for it in groups {
        if it.iter().any(&censored) {
            c += 1;
        } else {
            values.push(stat(it));
        }
    }
    check_censoring(c, groups.len())?;
    Ok((values, c))
}

pub(crate) fn analyse_fluctuation(
    cfg: &ExperimentConfig,
    plans: &[PairPlan],
    data: &[ReplicaData],
    curve: &SigmaCurve,
    h: &HCurve,
    warnings: &mut Vec<String>,
) -> Result<(Table, FluctuationSummary)> {
    let f = &cfg.fluctuation;
    let sigma_r = curve.eval(f.r);
    let mut table = Table::new("fluctuation", TAIL_COLUMNS);
    let mut tails = Vec::new();
    for (k_idx, &k) in f.k.iter().enumerate() {
        if f.t.iter().any(|&t| t > 0.0 && t < f.c26 * k * k) {
            warnings.push(format!(
                "fluctuation: t grid includes values below c26 K^2 = {} for K = {k}; reported anyway",
                f.c26 * k * k
            ));
        }
        let pairs: Vec<&[_]> = data.iter().map(|d| d.fluctuation[k_idx].as_slice()).collect();
        let (two, c) = per_replica(
            &pairs,
            |p| p.censored,
            |ps| {
                ps.iter()
                    .map(|p| (p.time - h.eval(p.dist)).abs() / sigma_r)
                    .fold(0.0, f64::max)
            },
        )?;
        let (one, _) = per_replica(
            &pairs,
            |p| p.censored,
            |ps| {
                ps.iter()
                    .map(|p| (h.eval(p.long) - p.time) / sigma_r)
                    .fold(f64::NEG_INFINITY, f64::max)
            },
        )?;
        for (name, v) in [("two_sided", two), ("one_sided", one)] {
            let t = TailReport::from_values("fluctuation", &format!("{name} k={}", num(k)), &f.t, &v, c);
            table.push_tail(&t);
            tails.push(TailSummary::from(&t));
        }
    }
    Ok((
        table,
        FluctuationSummary {
            r: f.r,
            sigma_r,
            half_widths: f.k.iter().zip(plans).map(|(&k, p)| (k, p.half_width)).collect(),
            tails,
        },
    ))
}

pub(crate) fn analyse_wandering(
    cfg: &ExperimentConfig,
    plan: &PairPlan,
    data: &[ReplicaData],
    curve: &SigmaCurve,
) -> Result<(Table, WanderingSummary)> {
    let wc = &cfg.wandering;
    let r = wc.r;
    let delta = delta_of(r, curve)?;
    let sigma_r = curve.eval(r);
    let mut ok: Vec<&[_]> = Vec::new();
    let mut c = 0;
    for d in data {
        if d.wandering.iter().any(|p| p.censored) {
            c += 1;
        } else {
            ok.push(&d.wandering);
        }
    }
    check_censoring(c, data.len())?;
    let report = TailReport::from_counts(
        "wandering",
        &format!("r={} k={}", num(r), num(wc.k)),
        &wc.s,
        data.len(),
        c,
        |i| {
            let s = wc.s[i];
            let (lo, hi, branch) = irs_interval(r, s, sigma_r, delta, wc.c34);
            let k = ok
                .iter()
                .filter(|ps| {
                    ps.iter()
                        .any(|p| p.max_abs_y > s * delta || p.min_x < lo || p.max_x > hi)
                })
                .count();
            (k, branch.as_str().to_string())
        },
    );
    let ratios: Vec<f64> = ok
        .iter()
        .flat_map(|ps| ps.iter().map(|p| p.wandering / delta))
        .collect();
    let boundary = (wc.c34 * r.ln()).sqrt();
    let mut table = Table::new("wandering", TAIL_COLUMNS);
    table.push_tail(&report);
    let delta_pilot = plan.half_width / wc.k;
    Ok((
        table,
        WanderingSummary {
            r,
            k: wc.k,
            delta_r: delta,
            delta_pilot,
            k_effective: wc.k * delta_pilot / delta,
            branch_boundary: boundary,
            straddles_branch: wc.s.iter().any(|&s| s <= boundary) && wc.s.iter().any(|&s| s > boundary),
            wandering_over_delta: [
                quantile(&ratios, 0.5),
                quantile(&ratios, 0.9),
                quantile(&ratios, 0.99),
            ],
            tail: TailSummary::from(&report),
        },
    ))
}

/// Default upper exponent for `sigma*`.
pub(crate) fn default_chi2(chi_hat: f64) -> f64 {
    (chi_hat + 0.1).clamp(0.05, 0.95)
}

pub(crate) fn analyse_straightness(
    cfg: &ExperimentConfig,
    data: &[ReplicaData],
    curve: &SigmaCurve,
    chi_hat: f64,
) -> Result<(Table, StraightnessSummary)> {
    let sc = &cfg.straightness;
    let chi2 = sc.chi2.unwrap_or_else(|| default_chi2(chi_hat));
    let spec = StraightnessSpec::new(monotone_envelope(curve), sc.c23, chi2)?;
    let mut table = Table::new("straightness", TAIL_COLUMNS);
    let mut tails = Vec::new();
    let mut medians = Vec::new();
    for (i, &r) in sc.r.iter().enumerate() {
        let groups: Vec<&[_]> = data
            .iter()
            .map(|d| std::slice::from_ref(&d.straightness[i]))
            .collect();
        let (v, c) = per_replica(
            &groups,
            |u| u.censored,
            |u| u[0].vertices.iter().map(|&p| spec.d_r(p, r)).fold(0.0, f64::max),
        )?;
        medians.push((r, quantile(&v, 0.5)));
        let t = TailReport::from_values("straightness", &format!("r={}", num(r)), &sc.t, &v, c);
        table.push_tail(&t);
        tails.push(TailSummary::from(&t));
    }
    Ok((
        table,
        StraightnessSummary {
            c23: sc.c23,
            chi2,
            medians,
            tails,
        },
    ))
}

pub(crate) fn analyse_density(cfg: &ExperimentConfig, data: &[ReplicaData]) -> (Table, DensitySummary) {
    let dc = &cfg.density;
    let mut table = Table::new("density", TAIL_COLUMNS);
    let mut tails = Vec::new();
    let mut means = Vec::new();
    for (i, &radius) in dc.radii.iter().enumerate() {
        let v: Vec<f64> = data.iter().flat_map(|d| d.density[i].iter().copied()).collect();
        means.push((radius, mean(&v)));
        let t = TailReport::from_values("density", &format!("radius={}", num(radius)), &dc.a, &v, 0);
        table.push_tail(&t);
        tails.push(TailSummary::from(&t));
    }
    (table, DensitySummary { means, tails })
}
