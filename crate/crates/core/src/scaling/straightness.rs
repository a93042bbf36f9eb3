//! The straightness functional `D_r` and the isometries `Theta_uv`.

use serde::{Deserialize, Serialize};

use super::SigmaCurve;
use crate::point::Point;
use crate::{Error, Result};

/// `sigma`, `C23` and `chi2` for evaluating `Xi`, `Phi`, `sigma*` and `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraightnessSpec {
    pub sigma: SigmaCurve,
    pub c23: f64,
    pub chi2: f64,
}

impl StraightnessSpec {
    /// Requires a strictly increasing curve (apply the monotone envelope
    /// first).
    pub fn new(sigma: SigmaCurve, c23: f64, chi2: f64) -> Result<Self> {
        if !sigma.is_strictly_increasing() {
            let bad = sigma
                .entries
                .windows(2)
                .find(|w| !(w[1].sigma > w[0].sigma))
                .map_or(0.0, |w| w[1].r);
            return Err(Error::NotIncreasing(bad));
        }
        if !(c23 > 0.0 && chi2 > 0.0 && chi2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need C23 > 0 and chi2 in (0, 1), got {c23}, {chi2}"
            )));
        }
        Ok(StraightnessSpec { sigma, c23, chi2 })
    }

    pub fn sigma(&self, s: f64) -> f64 {
        self.sigma.eval(s)
    }

    fn inner(&self, t: f64) -> f64 {
        t.powf(1.0 - self.chi2) / (self.sigma(t) * (2.0 + t).ln())
    }

    /// `Phi(s) = s^chi2 / C23 * sup_{t <= s} t^{1-chi2} / (sigma_t log(2+t))`,
    /// the sup taken over the curve's abscissae up to `s` and `s` itself.
    pub fn phi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let sup = self
            .sigma
            .entries
            .iter()
            .take_while(|e| e.r <= s)
            .map(|e| self.inner(e.r))
            .fold(self.inner(s), f64::max);
        s.powf(self.chi2) / self.c23 * sup
    }

    /// `sigma*(s) = s / (C23 Phi(s) log(2+s))`.
    pub fn sigma_star(&self, s: f64) -> f64 {
        s / (self.c23 * self.phi(s) * (2.0 + s).ln())
    }

    /// `Xi(s) = (s sigma(s) log(2+s))^{1/2}`.
    pub fn xi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        (s * self.sigma(s) * (2.0 + s).ln()).sqrt()
    }

    /// `D(u)`: the smaller of the tube cost `|u*|^2 / Xi(u_1)^2` and the
    /// cylinder cost `Phi(max(|u_1|, |u*|))` when `u_1 >= 0`, the cylinder
    /// cost otherwise.
    pub fn d(&self, u: Point) -> f64 {
        let (u1, us) = (u.x, u.y.abs());
        let cyl = self.phi(u1.abs().max(us));
        if u1 < 0.0 {
            return cyl;
        }
        let tube = if us == 0.0 {
            0.0
        } else {
            let x = self.xi(u1);
            if x == 0.0 {
                f64::INFINITY
            } else {
                us * us / (x * x)
            }
        };
        tube.min(cyl)
    }

    /// `D_r(u)`: `D(u)` on the left half and `D(r e_1 - u)` on the right.
    pub fn d_r(&self, u: Point, r: f64) -> f64 {
        if u.x <= r / 2.0 {
            self.d(u)
        } else {
            self.d(Point::new(r - u.x, -u.y))
        }
    }
}

/// Translation by `-u` followed by the rotation taking `v - u` to the
/// positive first axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub origin: Point,
    pub cos: f64,
    pub sin: f64,
}

impl Isometry {
    pub fn apply(&self, p: Point) -> Point {
        let d = p - self.origin;
        Point::new(self.cos * d.x + self.sin * d.y, -self.sin * d.x + self.cos * d.y)
    }

    pub fn invert(&self, q: Point) -> Point {
        self.origin + Point::new(self.cos * q.x - self.sin * q.y, self.sin * q.x + self.cos * q.y)
    }
}

pub fn theta_transform(u: Point, v: Point) -> Result<Isometry> {
    let d = v - u;
    let l = d.norm();
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("theta_transform needs u != v".into()));
    }
    Ok(Isometry {
        origin: u,
        cos: d.x / l,
        sin: d.y / l,
    })
}
