//! Edge speeds, passage times, geodesics and block passage times.
//!
//! Passage times are accumulated as fixed-point integers (2^-64 time units),
//! so sums are associative and the triangle and near-subadditivity
//! inequalities hold exactly rather than up to rounding.

mod dijkstra;
mod geodesic;
mod grid;
mod speeds;

pub use dijkstra::{Dijkstra, Length};
pub(crate) use geodesic::is_censored;
pub use geodesic::{
    entry_point, passage_time, passage_time_between, wandering, GeodesicResult, CENSOR_DISTANCE,
};
pub use grid::{big_m, t_hat, GridMap, GridPoint};
pub use speeds::{sample_speeds, SpeedDistribution, SpeedField};

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// A passage time in fixed point: `ticks / 2^64` time units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PassageTime(pub u128);

impl PassageTime {
    pub const ZERO: PassageTime = PassageTime(0);

    /// Nearest representable time to a nonnegative finite `t`.
    pub fn from_f64(t: f64) -> Self {
        assert!(
            t >= 0.0 && t.is_finite(),
            "passage time must be finite and nonnegative: {t}"
        );
        PassageTime((t * SCALE).round() as u128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE
    }

    pub fn ticks(self) -> u128 {
        self.0
    }
}

impl Add for PassageTime {
    type Output = PassageTime;
    fn add(self, o: PassageTime) -> PassageTime {
        PassageTime(self.0 + o.0)
    }
}

impl std::iter::Sum for PassageTime {
    fn sum<I: Iterator<Item = PassageTime>>(it: I) -> PassageTime {
        it.fold(PassageTime::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for PassageTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
