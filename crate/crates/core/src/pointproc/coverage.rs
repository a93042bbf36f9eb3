use crate::point::{unit_circle_intersections, Point, Rect};
use crate::spatial::GridIndex;
use crate::{Error, Result, TAU_GEO};

use super::{SpaceTimeSample, Window};

const FINE: f64 = 0.25;

/// Incremental acceptance filter. Points must be pushed in strictly
/// increasing time order; the decision for each point depends only on the
/// points pushed before it, so batching never changes the outcome.
#[derive(Clone, Debug)]
pub struct AcceptanceFilter {
    sat_region: Rect,
    points: Vec<Point>,
    index: GridIndex,
    fine_origin: Point,
    fine_nx: usize,
    fine_ny: usize,
    covered: Vec<bool>,
    pending: Option<Vec<u32>>,
    last_time: f64,
}

/// `x` is covered iff some point lies strictly within distance 1 of it.
fn covered_by(x: Point, pts: &[Point]) -> bool {
    pts.iter().any(|u| u.dist2(x) < 1.0 - TAU_GEO)
}

impl AcceptanceFilter {
    pub fn new(window: Window) -> Self {
        let bounds = window.sample_region().expand(1.0);
        let fine_nx = ((bounds.width() / FINE).ceil() as usize).max(1);
        let fine_ny = ((bounds.height() / FINE).ceil() as usize).max(1);
        AcceptanceFilter {
            sat_region: window.saturation_region(),
            points: Vec::new(),
            index: GridIndex::new(bounds, 1.0),
            fine_origin: bounds.lo,
            fine_nx,
            fine_ny,
            covered: vec![false; fine_nx * fine_ny],
            pending: None,
            last_time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn fine_rect(&self, ix: usize, iy: usize) -> Rect {
        let lo = Point::new(
            self.fine_origin.x + ix as f64 * FINE,
            self.fine_origin.y + iy as f64 * FINE,
        );
        Rect::new(lo, Point::new(lo.x + FINE, lo.y + FINE))
    }

    fn fine_range(&self, lo: Point, hi: Point) -> (usize, usize, usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / FINE).floor().max(0.0) as usize).min(n - 1);
        (
            f(lo.x, self.fine_origin.x, self.fine_nx),
            f(lo.y, self.fine_origin.y, self.fine_ny),
            f(hi.x, self.fine_origin.x, self.fine_nx),
            f(hi.y, self.fine_origin.y, self.fine_ny),
        )
    }

    /// Pushes the next sample point and reports whether it is accepted.
    pub fn push(&mut self, v: Point, t: f64) -> Result<bool> {
        if !(t > self.last_time) {
            return Err(Error::UnsortedTimes {
                index: self.points.len(),
                prev: self.last_time,
                next: t,
            });
        }
        self.last_time = t;
        let accepted = self.feasible(v);
        let id = self.points.len() as u32;
        self.points.push(v);
        self.index.insert(id, v);
        self.mark_disk(v);
        Ok(accepted)
    }

    fn mark_disk(&mut self, u: Point) {
        let (x0, y0, x1, y1) =
            self.fine_range(Point::new(u.x - 1.0, u.y - 1.0), Point::new(u.x + 1.0, u.y + 1.0));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let k = iy * self.fine_nx + ix;
                if self.covered[k] {
                    continue;
                }
                let r = self.fine_rect(ix, iy);
                if r.corners().iter().all(|c| c.dist2(u) < 1.0 - TAU_GEO) {
                    self.covered[k] = true;
                }
            }
        }
    }

    /// Every fine cell meeting the closed unit disk around `v` is covered.
    fn disk_known_covered(&self, v: Point) -> bool {
        let (x0, y0, x1, y1) =
            self.fine_range(Point::new(v.x - 1.0, v.y - 1.0), Point::new(v.x + 1.0, v.y + 1.0));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                if self.covered[iy * self.fine_nx + ix] {
                    continue;
                }
                if self.fine_rect(ix, iy).dist2_to(v) <= 1.0 + TAU_GEO {
                    return false;
                }
            }
        }
        true
    }

    /// Exact candidate-point test: is some point of the closed unit disk
    /// around `v` outside every open unit disk around an earlier point?
    fn feasible(&self, v: Point) -> bool {
        if self.disk_known_covered(v) {
            return false;
        }
        let mut nbrs: Vec<Point> = self
            .index
            .within(&self.points, v, 2.0)
            .into_iter()
            .map(|i| self.points[i as usize])
            .collect();
        nbrs.sort_by(|a, b| a.dist2(v).total_cmp(&b.dist2(v)));
        candidate_free(v, &nbrs)
    }

    /// Is every point of `rect` within distance `< 1` of some pushed point?
    fn rect_covered(&self, rect: Rect) -> bool {
        let c = (rect.lo + rect.hi) * 0.5;
        let reach = 1.0 + 0.5 * rect.width().hypot(rect.height());
        let pts: Vec<Point> = self
            .index
            .within(&self.points, c, reach + 1e-9)
            .into_iter()
            .map(|i| self.points[i as usize])
            .filter(|u| rect.dist2_to(*u) < 1.0)
            .collect();
        !rect_has_uncovered(rect, &pts)
    }

    /// True iff the saturation region has no uncovered point.
    pub fn is_saturated(&mut self) -> bool {
        if self.sat_region.is_empty() {
            return true;
        }
        let mut pending = match self.pending.take() {
            Some(p) => p,
            None => {
                let (x0, y0, x1, y1) = self.fine_range(self.sat_region.lo, self.sat_region.hi);
                let mut v = Vec::new();
                for iy in y0..=y1 {
                    for ix in x0..=x1 {
                        v.push((iy * self.fine_nx + ix) as u32);
                    }
                }
                v
            }
        };
        let mut saturated = true;
        while let Some(&k) = pending.last() {
            let k = k as usize;
            if self.covered[k] {
                pending.pop();
                continue;
            }
            let full = self.fine_rect(k % self.fine_nx, k / self.fine_nx);
            let clip = full.intersect(&self.sat_region);
            if clip.width() < 0.0 || clip.height() < 0.0 || self.rect_covered(clip) {
                if clip == full {
                    self.covered[k] = true;
                }
                pending.pop();
                continue;
            }
            saturated = false;
            break;
        }
        self.pending = Some(pending);
        saturated
    }
}

/// Candidate-point feasibility for the closed unit disk around `v` against
/// the open unit disks around `nbrs` (all within distance 2 of `v`).
pub(crate) fn candidate_free(v: Point, nbrs: &[Point]) -> bool {
    if !covered_by(v, nbrs) {
        return true;
    }
    for &u in nbrs {
        if let Some(xs) = unit_circle_intersections(v, u) {
            if xs.iter().any(|&x| !covered_by(x, nbrs)) {
                return true;
            }
        }
    }
    for i in 0..nbrs.len() {
        for j in i + 1..nbrs.len() {
            if let Some(xs) = unit_circle_intersections(nbrs[i], nbrs[j]) {
                for x in xs {
                    if x.dist2(v) <= 1.0 + TAU_GEO && !covered_by(x, nbrs) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Does the closed rectangle contain a point at distance `>= 1` from every
/// point of `pts`? Candidates: corners, circle/edge crossings and
/// circle/circle crossings inside the rectangle.
fn rect_has_uncovered(rect: Rect, pts: &[Point]) -> bool {
    let inside = |p: Point| rect.expand(1e-12).contains(p);
    if rect.corners().iter().any(|&c| !covered_by(c, pts)) {
        return true;
    }
    for &u in pts {
        for y in [rect.lo.y, rect.hi.y] {
            let dy = y - u.y;
            if dy.abs() < 1.0 {
                let dx = (1.0 - dy * dy).sqrt();
                for x in [u.x - dx, u.x + dx] {
                    let p = Point::new(x, y);
                    if inside(p) && !covered_by(p, pts) {
                        return true;
                    }
                }
            }
        }
        for x in [rect.lo.x, rect.hi.x] {
            let dx = x - u.x;
            if dx.abs() < 1.0 {
                let dy = (1.0 - dx * dx).sqrt();
                for y in [u.y - dy, u.y + dy] {
                    let p = Point::new(x, y);
                    if inside(p) && !covered_by(p, pts) {
                        return true;
                    }
                }
            }
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if let Some(xs) = unit_circle_intersections(pts[i], pts[j]) {
                for x in xs {
                    if inside(x) && !covered_by(x, pts) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Whether the saturation region of `history.window` is covered by the
/// points that appeared up to `upto_time`.
pub fn is_saturated(history: &SpaceTimeSample, upto_time: f64) -> bool {
    let mut filter = AcceptanceFilter::new(history.window);
    for p in history.points.iter().take_while(|p| p.time <= upto_time) {
        let id = filter.points.len() as u32;
        filter.points.push(p.pos);
        filter.index.insert(id, p.pos);
        filter.mark_disk(p.pos);
    }
    filter.is_saturated()
}
