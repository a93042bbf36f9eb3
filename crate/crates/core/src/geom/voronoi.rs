//! Voronoi cells as clipped intersections of bisector half-planes.

use serde::{Deserialize, Serialize};

use super::delaunay::Triangulation;
use crate::point::{polygon_area, Point, Rect};

/// Relative tolerance used when flagging a cell vertex as lying on the clip
/// rectangle and when merging nearly coincident vertices.
const SNAP: f64 = 1e-9;

/// A Voronoi cell clipped to a rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCell {
    pub site: Point,
    /// Counterclockwise vertex loop.
    pub polygon: Vec<Point>,
    /// True when the cell touches the clip rectangle.
    pub clipped: bool,
}

impl VoronoiCell {
    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon)
    }

    /// Largest distance from the site to a point of the cell.
    pub fn circumradius(&self) -> f64 {
        self.polygon.iter().map(|q| q.dist(self.site)).fold(0.0, f64::max)
    }

    /// Point of the cell farthest from the site, if the cell is nonempty.
    pub fn farthest_vertex(&self) -> Option<Point> {
        self.polygon
            .iter()
            .copied()
            .max_by(|a, b| a.dist2(self.site).total_cmp(&b.dist2(self.site)))
    }
}

/// Keeps the part of `poly` on the site's side of the bisector of `s` and `o`.
fn clip_bisector(poly: &[Point], s: Point, o: Point) -> Vec<Point> {
    // f(x) = (x - m) . (o - s) <= 0 keeps points closer to s
    let m = s.lerp(o, 0.5);
    let d = o - s;
    let f = |p: Point| (p - m).dot(d);
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (fa, fb) = (f(a), f(b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            out.push(a.lerp(b, fa / (fa - fb)));
        }
    }
    out
}

fn dedupe(poly: &mut Vec<Point>, scale: f64) {
    let eps2 = (SNAP * scale) * (SNAP * scale);
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for &p in poly.iter() {
        if out.last().is_none_or(|q| q.dist2(p) > eps2) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist2(*out.last().unwrap()) <= eps2 {
        out.pop();
    }
    *poly = out;
}

/// The cell of `site` against `others`, clipped to `rect`.
pub fn clipped_cell(site: Point, others: impl IntoIterator<Item = Point>, rect: Rect) -> VoronoiCell {
    let mut poly: Vec<Point> = if rect.is_empty() {
        Vec::new()
    } else {
        rect.corners().to_vec()
    };
    for o in others {
        if poly.is_empty() {
            break;
        }
        poly = clip_bisector(&poly, site, o);
    }
    let scale = 1.0 + rect.width().max(rect.height());
    dedupe(&mut poly, scale);
    let tol = SNAP * scale;
    let clipped = poly.iter().any(|p| {
        (p.x - rect.lo.x).abs() <= tol
            || (p.x - rect.hi.x).abs() <= tol
            || (p.y - rect.lo.y).abs() <= tol
            || (p.y - rect.hi.y).abs() <= tol
    });
    VoronoiCell {
        site,
        polygon: poly,
        clipped,
    }
}

/// All Voronoi cells of the triangulation's sites, clipped to `rect`.
pub fn voronoi_cells(tri: &Triangulation, rect: Rect) -> Vec<VoronoiCell> {
    let sites = tri.sites();
    (0..sites.len())
        .map(|i| {
            let nb = tri.neighbors(i).iter().map(|&j| sites[j as usize]);
            clipped_cell(sites[i], nb, rect)
        })
        .collect()
}

/// Circumcenter of a nondegenerate triangle.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * b.cross(c);
    let (b2, c2) = (b.norm2(), c.norm2());
    a + Point::new(c.y * b2 - b.y * c2, b.x * c2 - c.x * b2) * (1.0 / d)
}
