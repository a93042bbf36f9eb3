use serde::{Deserialize, Serialize};

use super::{Dijkstra, PassageTime, SpeedField};
use crate::geom::AcceptedGraph;
use crate::point::{Point, Rect};
use crate::{Error, Result};

/// Index of a point of `origin + q Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: i64,
    pub j: i64,
}

/// The lattice `origin + q Z^2` with `q` in `[4, 5]`, and the map sending a
/// point to its nearest lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub q: f64,
    pub origin: Point,
}

impl GridMap {
    pub fn new(q: f64, origin: Point) -> Result<Self> {
        if !(4.0..=5.0).contains(&q) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must lie in [4, 5], got {q}"
            )));
        }
        Ok(GridMap { q, origin })
    }

    /// Nearest lattice point (halves rounded up).
    pub fn psi(&self, x: Point) -> GridPoint {
        GridPoint {
            i: ((x.x - self.origin.x) / self.q + 0.5).floor() as i64,
            j: ((x.y - self.origin.y) / self.q + 0.5).floor() as i64,
        }
    }

    pub fn position(&self, u: GridPoint) -> Point {
        self.origin + Point::new(u.i as f64 * self.q, u.j as f64 * self.q)
    }

    /// The half-open square of points mapped to `u`.
    pub fn cube(&self, u: GridPoint) -> Rect {
        let c = self.position(u);
        let h = self.q / 2.0;
        Rect::new(c - Point::new(h, h), c + Point::new(h, h))
    }

    /// Vertices `y` with `psi(y) == u`, sorted.
    pub fn sites(&self, graph: &AcceptedGraph, u: GridPoint) -> Vec<usize> {
        let c = self.position(u);
        let mut out: Vec<usize> = graph
            .vertices_near(c, self.q)
            .into_iter()
            .filter(|&v| self.psi(graph.vertices[v]) == u)
            .collect();
        out.sort_unstable();
        out
    }

    fn nonempty_sites(&self, graph: &AcceptedGraph, u: GridPoint) -> Result<Vec<usize>> {
        let s = self.sites(graph, u);
        if s.is_empty() {
            let c = self.position(u);
            return Err(Error::EmptyCube(c.x, c.y));
        }
        Ok(s)
    }
}

/// Least passage time between a site of `F_u` and a site of `F_v`, from one
/// multi-source sweep.
pub fn t_hat(
    graph: &AcceptedGraph,
    speeds: &SpeedField,
    grid: &GridMap,
    u: GridPoint,
    v: GridPoint,
) -> Result<PassageTime> {
    let fu = grid.nonempty_sites(graph, u)?;
    let fv = grid.nonempty_sites(graph, v)?;
    let mut dj = Dijkstra::new(graph.len());
    let mut hit = None;
    dj.run(
        graph,
        |e| Some(speeds.weight(e)),
        &fu,
        |w, d| {
            if fv.binary_search(&w).is_ok() {
                hit = Some(d);
                true
            } else {
                false
            }
        },
    );
    hit.ok_or(Error::Disconnected(fu[0], fv[0]))
}

/// Largest passage time between two sites of `F_u`.
pub fn big_m(
    graph: &AcceptedGraph,
    speeds: &SpeedField,
    grid: &GridMap,
    u: GridPoint,
) -> Result<PassageTime> {
    let fu = grid.nonempty_sites(graph, u)?;
    let mut dj = Dijkstra::new(graph.len());
    let mut best = PassageTime::ZERO;
    for &y in &fu {
        let mut left = fu.len();
        let mut far = PassageTime::ZERO;
        dj.run(
            graph,
            |e| Some(speeds.weight(e)),
            &[y],
            |w, d| {
                if fu.binary_search(&w).is_ok() {
                    far = d;
                    left -= 1;
                }
                left == 0
            },
        );
        if left > 0 {
            return Err(Error::Disconnected(y, fu[0]));
        }
        best = best.max(far);
    }
    Ok(best)
}
