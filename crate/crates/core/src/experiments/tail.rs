use serde::{Deserialize, Serialize};

use crate::stats::{isotonic_nonincreasing, ols_line, wilson};

/// Normal quantile used for the Wilson intervals (95%).
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Mid-range of a tail: isotonic probabilities within these bounds.
const MID_LO: f64 = 0.01;
const MID_HI: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub x: f64,
    pub n_total: usize,
    pub n_censored: usize,
    pub exceed: usize,
    pub p: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub p_isotonic: f64,
    pub note: String,
}

impl TailRow {
    pub fn n_used(&self) -> usize {
        self.n_total - self.n_censored
    }
}

/// Log-tail slopes over the mid-range.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailShape {
    pub mid_points: usize,
    /// Slope of `log p` against `x`.
    pub log_slope: Option<f64>,
    /// Slope of `log p` against `x log x` (over the points with `x > 1`).
    pub xlogx_slope: Option<f64>,
    pub first_half_slope: Option<f64>,
    pub second_half_slope: Option<f64>,
    /// The second half decays at least as fast as the first, up to two
    /// combined standard errors.
    pub linear_or_steeper: Option<bool>,
}

/// Exceedance probabilities `P(stat >= x)` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub name: String,
    pub group: String,
    pub rows: Vec<TailRow>,
    /// The raw estimates are already nonincreasing.
    pub monotone_raw: bool,
    /// Grid pairs `(x_i, x_j)`, `x_i < x_j`, whose Wilson intervals show an
    /// increase: the lower bound at `x_j` exceeds the upper bound at `x_i`.
    pub hard_violations: Vec<(f64, f64)>,
    pub shape: TailShape,
}

impl TailReport {
    /// Builds the report from exceedance counts; `exceed(i)` counts the
    /// uncensored observations exceeding `grid[i]`.
    pub fn from_counts(
        name: &str,
        group: &str,
        grid: &[f64],
        n_total: usize,
        n_censored: usize,
        mut exceed: impl FnMut(usize) -> (usize, String),
    ) -> Self {
        let used = n_total - n_censored;
        let mut rows: Vec<TailRow> = grid
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let (k, note) = exceed(i);
                let (lo, hi) = wilson(k, used, WILSON_Z);
                TailRow {
                    x,
                    n_total,
                    n_censored,
                    exceed: k,
                    p: if used > 0 {
                        k as f64 / used as f64
                    } else {
                        f64::NAN
                    },
                    wilson_lo: lo,
                    wilson_hi: hi,
                    p_isotonic: 0.0,
                    note,
                }
            })
            .collect();
        let raw: Vec<f64> = rows
            .iter()
            .map(|r| if r.p.is_nan() { 0.0 } else { r.p })
            .collect();
        let iso = isotonic_nonincreasing(&raw, &vec![1.0; raw.len()]);
        for (row, v) in rows.iter_mut().zip(iso) {
            row.p_isotonic = v;
        }
        let monotone_raw = raw.windows(2).all(|w| w[1] <= w[0]);
        let mut hard_violations = Vec::new();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if rows[j].wilson_lo > rows[i].wilson_hi {
                    hard_violations.push((rows[i].x, rows[j].x));
                }
            }
        }
        let shape = tail_shape(&rows);
        TailReport {
            name: name.into(),
            group: group.into(),
            rows,
            monotone_raw,
            hard_violations,
            shape,
        }
    }

    /// Tail of `P(value >= x)` for plain observations.
    pub fn from_values(name: &str, group: &str, grid: &[f64], values: &[f64], n_censored: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        TailReport::from_counts(name, group, grid, values.len() + n_censored, n_censored, |i| {
            let below = sorted.partition_point(|v| *v < grid[i]);
            (sorted.len() - below, String::new())
        })
    }

    pub fn passes(&self) -> bool {
        self.hard_violations.is_empty()
    }
}

fn slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    ols_line(x, y).ok().map(|f| (f.slope, f.slope_se))
}

fn tail_shape(rows: &[TailRow]) -> TailShape {
    let mid: Vec<&TailRow> = rows
        .iter()
        .filter(|r| r.p_isotonic >= MID_LO && r.p_isotonic <= MID_HI)
        .collect();
    let x: Vec<f64> = mid.iter().map(|r| r.x).collect();
    let y: Vec<f64> = mid.iter().map(|r| r.p_isotonic.ln()).collect();
    let mut shape = TailShape {
        mid_points: mid.len(),
        log_slope: slope(&x, &y).map(|s| s.0),
        ..TailShape::default()
    };
    let (xl, yl): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&y)
        .filter(|(x, _)| **x > 1.0)
        .map(|(x, y)| (x * x.ln(), *y))
        .unzip();
    shape.xlogx_slope = slope(&xl, &yl).map(|s| s.0);
    if mid.len() >= 6 {
        let h = mid.len() / 2;
        let a = slope(&x[..h], &y[..h]);
        let b = slope(&x[h..], &y[h..]);
        shape.first_half_slope = a.map(|s| s.0);
        shape.second_half_slope = b.map(|s| s.0);
        if let (Some(a), Some(b)) = (a, b) {
            shape.linear_or_steeper = Some(b.0 <= a.0 + 2.0 * a.1.hypot(b.1));
        }
    }
    shape
}
