//! Space-time Poisson sampling and the available-space acceptance rule.
//!
//! A sample point `(v, t)` is accepted iff some closed unit disk around a
//! point `x` with `|x - v| <= 1` contains no earlier sample point in its
//! interior. Feasibility is decided exactly by testing a finite candidate set
//! built from circle intersections.

mod coverage;
mod hole;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::point::{Point, Rect};
use crate::{Error, Result};

pub use coverage::{is_saturated, AcceptanceFilter};
pub use hole::{verify_hole_property, HoleReport};

/// Default margin between the statistics window and the sampled region.
pub const DEFAULT_MARGIN: f64 = 7.0;
/// Default length of a time slab.
pub const DEFAULT_SLAB: f64 = 1.0;
/// Hard cap on the number of slabs before giving up on saturation.
pub const MAX_SLABS: usize = 10_000;

/// Statistics window `[lo, hi]` plus the margin sampled around it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Point,
    pub hi: Point,
    pub margin: f64,
}

impl Window {
    pub fn new(lo: Point, hi: Point, margin: f64) -> Result<Self> {
        let w = Window { lo, hi, margin };
        w.validate()?;
        Ok(w)
    }

    /// Window `[0, width] x [0, height]` with the default margin.
    pub fn with_size(width: f64, height: f64) -> Result<Self> {
        Window::new(Point::ORIGIN, Point::new(width, height), DEFAULT_MARGIN)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lo.x, self.lo.y, self.hi.x, self.hi.y, self.margin]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::DegenerateWindow("non-finite coordinate".into()));
        }
        if self.hi.x < self.lo.x || self.hi.y < self.lo.y {
            return Err(Error::DegenerateWindow(format!(
                "hi {:?} below lo {:?}",
                self.hi, self.lo
            )));
        }
        if self.margin < 0.0 {
            return Err(Error::DegenerateWindow("negative margin".into()));
        }
        Ok(())
    }

    /// The statistics window itself.
    pub fn core(&self) -> Rect {
        Rect::new(self.lo, self.hi)
    }

    /// Region in which sample points are drawn.
    pub fn sample_region(&self) -> Rect {
        self.core().expand(self.margin)
    }

    /// Region that must be covered for saturation: one unit inside the
    /// sampled region.
    pub fn saturation_region(&self) -> Rect {
        self.core().expand((self.margin - 1.0).max(0.0))
    }

    fn sample_area(&self) -> f64 {
        if self.core().area() == 0.0 && self.margin == 0.0 {
            0.0
        } else {
            self.sample_region().area()
        }
    }
}

/// One space-time point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub pos: Point,
    pub time: f64,
}

/// Finite realization of the space-time Poisson process in a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeSample {
    pub window: Window,
    pub points: Vec<SpaceTimePoint>,
    pub rate: f64,
    pub seed: u64,
    /// End of the last generated slab.
    pub t_stop: f64,
}

impl SpaceTimeSample {
    /// Builds a sample from explicit points, rejecting unsorted or tied times.
    pub fn from_points(window: Window, points: Vec<SpaceTimePoint>, rate: f64, seed: u64) -> Result<Self> {
        window.validate()?;
        check_times(&points)?;
        let region = window.sample_region();
        if let Some(p) = points.iter().find(|p| !region.contains(p.pos)) {
            return Err(Error::OutsideWindow(p.pos.x, p.pos.y));
        }
        let t_stop = points.last().map_or(0.0, |p| p.time);
        Ok(SpaceTimeSample {
            window,
            points,
            rate,
            seed,
            t_stop,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_times(points: &[SpaceTimePoint]) -> Result<()> {
    for (i, w) in points.windows(2).enumerate() {
        if !(w[1].time > w[0].time) {
            return Err(Error::UnsortedTimes {
                index: i + 1,
                prev: w[0].time,
                next: w[1].time,
            });
        }
    }
    if let Some(p) = points.first() {
        if !(p.time > 0.0) {
            return Err(Error::UnsortedTimes {
                index: 0,
                prev: 0.0,
                next: p.time,
            });
        }
    }
    Ok(())
}

/// The accepted vertex set of the available-space process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptedSet {
    pub window: Window,
    pub vertices: Vec<Point>,
    pub times: Vec<f64>,
    pub parent_sample_seed: u64,
    pub saturated: bool,
}

/// Draws the Poisson points of one time slab `(t0, t1]` over `region`,
/// sorted by time.
pub fn sample_slab(region: Rect, rate: f64, t0: f64, t1: f64, rng: &mut impl Rng) -> Vec<SpaceTimePoint> {
    let mean = rate * region.area() * (t1 - t0);
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0);
    let mut pts: Vec<SpaceTimePoint> = (0..n)
        .map(|_| {
            let x = region.lo.x + rng.random::<f64>() * region.width();
            let y = region.lo.y + rng.random::<f64>() * region.height();
            // (t0, t1]: 1 - U lies in (0, 1]
            let t = t0 + (1.0 - rng.random::<f64>()) * (t1 - t0);
            SpaceTimePoint {
                pos: Point::new(x, y),
                time: t,
            }
        })
        .collect();
    pts.sort_by(|a, b| a.time.total_cmp(&b.time));
    // ties have probability zero; drop them so times stay strictly increasing
    pts.dedup_by(|b, a| b.time == a.time);
    pts
}

fn validate_rates(rate: f64, t_slab: f64) -> Result<()> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rate must be positive, got {rate}"
        )));
    }
    if !(t_slab > 0.0 && t_slab.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "slab length must be positive, got {t_slab}"
        )));
    }
    Ok(())
}

/// Samples slab by slab until the acceptance filter reports saturation, and
/// returns both the raw sample and the accepted set.
pub fn sample_and_accept(
    window: Window,
    rate: f64,
    t_slab: f64,
    seed: u64,
) -> Result<(SpaceTimeSample, AcceptedSet)> {
    window.validate()?;
    validate_rates(rate, t_slab)?;
    let mut sample = SpaceTimeSample {
        window,
        points: Vec::new(),
        rate,
        seed,
        t_stop: 0.0,
    };
    let mut accepted = AcceptedSet {
        window,
        vertices: Vec::new(),
        times: Vec::new(),
        parent_sample_seed: seed,
        saturated: false,
    };
    if window.sample_area() == 0.0 {
        accepted.saturated = true;
        return Ok((sample, accepted));
    }
    let region = window.sample_region();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut filter = AcceptanceFilter::new(window);
    for k in 0..MAX_SLABS {
        let t0 = k as f64 * t_slab;
        let t1 = (k + 1) as f64 * t_slab;
        for p in sample_slab(region, rate, t0, t1, &mut rng) {
            if filter.push(p.pos, p.time)? {
                accepted.vertices.push(p.pos);
                accepted.times.push(p.time);
            }
            sample.points.push(p);
        }
        sample.t_stop = t1;
        if filter.is_saturated() {
            accepted.saturated = true;
            return Ok((sample, accepted));
        }
    }
    Err(Error::SaturationFailure { slabs: MAX_SLABS })
}

/// Poisson points in the sampled region, generated slab by slab until the
/// acceptance filter reports saturation. Deterministic given the seed.
pub fn sample_space_time(window: Window, rate: f64, t_slab: f64, seed: u64) -> Result<SpaceTimeSample> {
    sample_and_accept(window, rate, t_slab, seed).map(|(s, _)| s)
}

/// Applies the acceptance rule to a sample in time order.
pub fn accept(sample: &SpaceTimeSample) -> Result<AcceptedSet> {
    check_times(&sample.points)?;
    let mut filter = AcceptanceFilter::new(sample.window);
    let mut vertices = Vec::new();
    let mut times = Vec::new();
    for p in &sample.points {
        if filter.push(p.pos, p.time)? {
            vertices.push(p.pos);
            times.push(p.time);
        }
    }
    let saturated = window_is_trivial(&sample.window) || filter.is_saturated();
    Ok(AcceptedSet {
        window: sample.window,
        vertices,
        times,
        parent_sample_seed: sample.seed,
        saturated,
    })
}

fn window_is_trivial(w: &Window) -> bool {
    w.sample_area() == 0.0
}

#[cfg(test)]
mod tests;
