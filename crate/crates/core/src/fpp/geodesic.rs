use serde::{Deserialize, Serialize};

use super::{Dijkstra, PassageTime, SpeedField};
use crate::geom::AcceptedGraph;
use crate::point::{point_line_dist, Point};
use crate::{Error, Result};

/// A geodesic is censored when one of its vertices comes within this distance
/// of the statistics window boundary (or leaves the window).
pub const CENSOR_DISTANCE: f64 = 2.0;

/// Passage time and geodesic between two query points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub x: Point,
    pub y: Point,
    pub time: PassageTime,
    /// Vertex sequence from the cell of `x` to the cell of `y`.
    pub path: Vec<u32>,
    /// Largest distance from a path vertex to the line through `x` and `y`.
    pub wandering: f64,
    pub censored: bool,
}

/// Largest distance from the path's vertices to the line through `x` and
/// `y`; zero when `x == y`.
pub fn wandering(graph: &AcceptedGraph, path: &[u32], x: Point, y: Point) -> f64 {
    if x == y {
        return 0.0;
    }
    path.iter()
        .map(|&v| point_line_dist(graph.vertices[v as usize], x, y))
        .fold(0.0, f64::max)
}

pub(crate) fn is_censored(graph: &AcceptedGraph, path: &[u32]) -> bool {
    path.iter()
        .any(|&v| graph.core_depth(graph.vertices[v as usize]) < CENSOR_DISTANCE)
}

/// Passage time between vertices `a` and `b` with the geodesic, or
/// `Disconnected`.
pub fn passage_time_between(
    graph: &AcceptedGraph,
    speeds: &SpeedField,
    a: usize,
    b: usize,
) -> Result<(PassageTime, Vec<u32>)> {
    let mut dj = Dijkstra::new(graph.len());
    dj.run(graph, |e| Some(speeds.weight(e)), &[a], |v, _| v == b);
    let t = dj.dist(b).ok_or(Error::Disconnected(a, b))?;
    Ok((t, dj.path_to(b).expect("settled")))
}

/// `T(x, y)` between the cells containing `x` and `y`, with the geodesic and
/// its wandering.
pub fn passage_time(
    graph: &AcceptedGraph,
    speeds: &SpeedField,
    x: Point,
    y: Point,
) -> Result<GeodesicResult> {
    let a = graph.cell_of(x)?;
    let b = graph.cell_of(y)?;
    let (time, path) = passage_time_between(graph, speeds, a, b)?;
    Ok(GeodesicResult {
        x,
        y,
        time,
        wandering: wandering(graph, &path, x, y),
        censored: is_censored(graph, &path),
        path,
    })
}

/// First vertex of the geodesic (from the `x` end) whose first coordinate is
/// at least `s`.
pub fn entry_point(graph: &AcceptedGraph, result: &GeodesicResult, s: f64) -> Option<u32> {
    result
        .path
        .iter()
        .copied()
        .find(|&v| graph.vertices[v as usize].x >= s)
}
