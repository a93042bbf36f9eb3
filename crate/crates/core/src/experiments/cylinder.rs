//! The cylinders `G_r(K) = [0, r] x [-K Delta_r, K Delta_r]` and their
//! enlargements `G_{r,s} = I_{r,s} x [-s Delta_r, s Delta_r]`, plus the pair
//! sampler used to approximate sups over `G_r(K)`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::point::Point;
use crate::scaling::{delta_of, SigmaCurve};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrsBranch {
    /// `s <= (C34 log r)^{1/2}`: slack `s^2 sigma_r log r`.
    Log,
    /// Up to `s <= r / Delta_r`: slack `s^2 sigma_r`.
    Square,
    /// Beyond: slack `s Delta_r`.
    Linear,
}

impl IrsBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            IrsBranch::Log => "log",
            IrsBranch::Square => "square",
            IrsBranch::Linear => "linear",
        }
    }
}

/// Longitudinal interval `I_{r,s}` as `(lo, hi, branch)`.
pub fn irs_interval(r: f64, s: f64, sigma_r: f64, delta_r: f64, c34: f64) -> (f64, f64, IrsBranch) {
    let (slack, branch) = if s <= (c34 * r.ln()).sqrt() {
        (s * s * sigma_r * r.ln(), IrsBranch::Log)
    } else if s <= r / delta_r {
        (s * s * sigma_r, IrsBranch::Square)
    } else {
        (s * delta_r, IrsBranch::Linear)
    };
    (-slack, r + slack, branch)
}

/// Whether `u` lies in `G_{r,s}`, with `sigma_r` and `Delta_r` read from the
/// curve.
pub fn in_g_rs(u: Point, r: f64, s: f64, curve: &SigmaCurve, c34: f64) -> Result<bool> {
    if !(r > 1.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need r > 1 and s > 0, got {r}, {s}"
        )));
    }
    let delta = delta_of(r, curve)?;
    let (lo, hi, _) = irs_interval(r, s, curve.eval(r), delta, c34);
    Ok(u.x >= lo && u.x <= hi && u.y.abs() <= s * delta)
}

/// Pairs `x, y` in `[0, r] x [-half_width, half_width]` with
/// `(y - x)_1 >= epsilon r`, Latin-hypercube stratified over the longitudinal
/// displacement and both transverse offsets. With `cone` set, `y_2` is
/// redrawn so that `|(y - x)_2| <= (y - x)_1`.
pub fn cylinder_pairs(
    r: f64,
    half_width: f64,
    epsilon: f64,
    n: usize,
    cone: bool,
    rng: &mut impl Rng,
) -> Vec<(Point, Point)> {
    let strata = |rng: &mut _| {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    };
    let (pd, px, py) = (strata(rng), strata(rng), strata(rng));
    let cell = |k: usize, lo: f64, hi: f64, rng: &mut dyn rand::RngCore| {
        lo + (k as f64 + rng.random::<f64>()) / n as f64 * (hi - lo)
    };
    (0..n)
        .map(|j| {
            let d1 = cell(pd[j], epsilon * r, r, rng);
            let x2 = cell(px[j], -half_width, half_width, rng);
            let mut y2 = cell(py[j], -half_width, half_width, rng);
            if cone && (y2 - x2).abs() > d1 {
                let lo = (x2 - d1).max(-half_width);
                let hi = (x2 + d1).min(half_width);
                y2 = lo + rng.random::<f64>() * (hi - lo);
            }
            let x1 = rng.random::<f64>() * (r - d1);
            (Point::new(x1, x2), Point::new(x1 + d1, y2))
        })
        .collect()
}
