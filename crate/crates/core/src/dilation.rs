//! Constructive dilation paths through the Voronoi cells crossed by a segment,
//! and empirical graph dilation by shortest Euclidean paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fpp::{Dijkstra, Length};
use crate::geom::{AcceptedGraph, EdgeKind};
use crate::point::{Point, Rect};
use crate::{Error, Result};

/// Parameters along the segment closer than this are treated as the same
/// crossing.
const TIE: f64 = 1e-12;

/// Pair distances used for stratified sampling.
pub const STRATA: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 50.0];

/// Upper bound on the constructive path length relative to `|y - x|`.
pub fn dilation_bound(delta_g: f64) -> f64 {
    (3.0 + 2.0 * delta_g) / delta_g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationPath {
    pub x: u32,
    pub y: u32,
    /// Sites whose cells the segment passes through, in order.
    pub cell_walk: Vec<u32>,
    /// First point of each walked cell on the segment; `entry_points[0]` is
    /// `x` itself.
    pub entry_points: Vec<Point>,
    /// Indices into `cell_walk` kept by the greedy rule.
    pub selected: Vec<usize>,
    pub path: Vec<u32>,
    pub euclidean_length: f64,
}

impl DilationPath {
    pub fn ratio(&self, graph: &AcceptedGraph) -> f64 {
        let d = graph.vertices[self.x as usize].dist(graph.vertices[self.y as usize]);
        if d == 0.0 {
            1.0
        } else {
            self.euclidean_length / d
        }
    }
}

/// Parameter in `(0, 1]` at which the segment from `x` to `y` leaves the cell
/// of `c` through the bisector with `n`, or `None` if it never moves towards
/// `n`.
fn exit_param(sites: &[Point], c: usize, n: usize, x: Point, dir: Point) -> Option<f64> {
    let (pc, pn) = (sites[c], sites[n]);
    let normal = pn - pc;
    let m = pc.lerp(pn, 0.5);
    let f1 = dir.dot(normal);
    if f1 <= 0.0 {
        return None;
    }
    Some(-(x - m).dot(normal) / f1)
}

/// Exit parameter of the cell of `c` and the neighbours attaining it.
fn cell_exit(graph: &AcceptedGraph, c: usize, x: Point, dir: Point) -> (f64, Vec<usize>) {
    let sites = &graph.vertices;
    let tri = graph.triangulation();
    let mut best = f64::INFINITY;
    let mut who = Vec::new();
    for &n in tri.neighbors(c) {
        let n = n as usize;
        if let Some(t) = exit_param(sites, c, n, x, dir) {
            if t < best - TIE {
                best = t;
                who.clear();
                who.push(n);
            } else if t <= best + TIE {
                best = best.min(t);
                who.push(n);
            }
        }
    }
    (best, who)
}

/// The sequence of cells crossed by the segment from site `x` to site `y`
/// and the entry point of each. Cells met in a single point are skipped.
pub fn segment_cell_walk(graph: &AcceptedGraph, x: usize, y: usize) -> Result<(Vec<u32>, Vec<Point>)> {
    let sites = &graph.vertices;
    let region = graph.window.sample_region();
    let (px, py) = (sites[x], sites[y]);
    if !region.contains(px) || !region.contains(py) {
        return Err(Error::OutsideWindow(py.x, py.y));
    }
    let dir = py - px;
    let mut walk = vec![x as u32];
    let mut entries = vec![px];
    let mut cur = x;
    let limit = graph.len() + 1;
    while cur != y {
        let (t, cands) = cell_exit(graph, cur, px, dir);
        if cands.is_empty() || t > 1.0 + TIE {
            // y's cell contains the rest of the segment; can only happen
            // through rounding at the very end
            return Err(Error::Disconnected(cur, y));
        }
        let next = if cands.len() == 1 {
            cands[0]
        } else {
            // through a Voronoi vertex: move to the cell the segment stays in
            // longest; cells touched at a single point have exit time t
            let mut best: Option<(f64, usize)> = None;
            for &n in &cands {
                let exit = if n == y {
                    f64::INFINITY
                } else {
                    cell_exit(graph, n, px, dir).0
                };
                if exit <= t + TIE {
                    continue;
                }
                if best.is_none_or(|(b, bn)| exit > b || (exit == b && n < bn)) {
                    best = Some((exit, n));
                }
            }
            best.map(|b| b.1).unwrap_or(cands[0])
        };
        cur = next;
        walk.push(cur as u32);
        entries.push(px + dir * t.clamp(0.0, 1.0));
        if walk.len() > limit {
            return Err(Error::Disconnected(x, y));
        }
    }
    Ok((walk, entries))
}

/// Greedy selection over the walk: from the current index `j`, jump to the
/// least later index `i` with `i == m` or `|a_{i+1} - a_{j+1}| > delta_g`.
pub fn select_indices(entries: &[Point], delta_g: f64) -> Vec<usize> {
    let m = entries.len() - 1;
    let mut sel = vec![0usize];
    let mut j = 0;
    while j < m {
        let anchor = entries[j + 1];
        let mut i = j + 1;
        while i < m && entries[i + 1].dist(anchor) <= delta_g {
            i += 1;
        }
        sel.push(i);
        j = i;
    }
    sel
}

/// Constructive path from `x` to `y` whose hops are all graph edges.
pub fn dilation_path(graph: &AcceptedGraph, x: usize, y: usize) -> Result<DilationPath> {
    let (walk, entries) = segment_cell_walk(graph, x, y)?;
    let selected = select_indices(&entries, graph.delta_g);
    let path: Vec<u32> = selected.iter().map(|&j| walk[j]).collect();
    let mut len = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0] as usize, w[1] as usize);
        if graph.edge_between(a, b).is_none() {
            return Err(Error::MissingEdge(a, b));
        }
        len += graph.vertices[a].dist(graph.vertices[b]);
    }
    Ok(DilationPath {
        x: x as u32,
        y: y as u32,
        cell_walk: walk,
        entry_points: entries,
        selected,
        path,
        euclidean_length: len,
    })
}

/// Shortest-path dilation of one pair, over all edges and over Delaunay edges
/// only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDilation {
    pub x: u32,
    pub y: u32,
    pub distance: f64,
    pub full_ratio: f64,
    pub delaunay_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationStats {
    pub pairs: Vec<PairDilation>,
    pub max_full: f64,
    pub max_delaunay: f64,
    /// Counts of full-graph ratios in bins of width 0.05 starting at 1.
    pub histogram: Vec<usize>,
}

/// Shortest Euclidean path ratio for each pair.
pub fn empirical_dilation(graph: &AcceptedGraph, pairs: &[(usize, usize)]) -> Result<DilationStats> {
    let mut dj: Dijkstra<Length> = Dijkstra::new(graph.len());
    let mut out = Vec::with_capacity(pairs.len());
    let full = |e: usize| Some(Length(graph.edges[e].length));
    let del = |e: usize| (graph.edges[e].kind == EdgeKind::Delaunay).then(|| Length(graph.edges[e].length));
    for &(x, y) in pairs {
        let d = graph.vertices[x].dist(graph.vertices[y]);
        let mut ratio = |w: &dyn Fn(usize) -> Option<Length>| -> Result<f64> {
            dj.run(graph, w, &[x], |v, _| v == y);
            let l = dj.dist(y).ok_or(Error::Disconnected(x, y))?.0;
            Ok(if d == 0.0 { 1.0 } else { l / d })
        };
        let full_ratio = ratio(&full)?;
        let delaunay_ratio = ratio(&del)?;
        out.push(PairDilation {
            x: x as u32,
            y: y as u32,
            distance: d,
            full_ratio,
            delaunay_ratio,
        });
    }
    let max_full = out.iter().map(|p| p.full_ratio).fold(0.0, f64::max);
    let max_delaunay = out.iter().map(|p| p.delaunay_ratio).fold(0.0, f64::max);
    let mut histogram = Vec::new();
    for p in &out {
        let b = ((p.full_ratio - 1.0).max(0.0) / 0.05) as usize;
        if histogram.len() <= b {
            histogram.resize(b + 1, 0);
        }
        histogram[b] += 1;
    }
    Ok(DilationStats {
        pairs: out,
        max_full,
        max_delaunay,
        histogram,
    })
}

/// Random vertex pairs inside `region`, with separations close to each of
/// `distances` (`per_distance` pairs each). The second vertex is the cell
/// containing a point at exactly that distance in a uniform direction.
pub fn stratified_pairs(
    graph: &AcceptedGraph,
    region: Rect,
    distances: &[f64],
    per_distance: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let inside: Vec<usize> = (0..graph.len())
        .filter(|&v| region.contains(graph.vertices[v]))
        .collect();
    if inside.is_empty() {
        return Err(Error::Insufficient("no vertices in the pair region".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &d in distances {
        let mut got = 0;
        let mut tries = 0;
        while got < per_distance {
            tries += 1;
            if tries > 1000 * per_distance.max(1) {
                return Err(Error::Insufficient(format!(
                    "region too small for pairs at distance {d}"
                )));
            }
            let x = inside[rng.random_range(0..inside.len())];
            let th = rng.random::<f64>() * std::f64::consts::TAU;
            let q = graph.vertices[x] + Point::new(th.cos(), th.sin()) * d;
            if !region.contains(q) {
                continue;
            }
            let y = graph.cell_of(q)?;
            if y == x || !region.contains(graph.vertices[y]) {
                continue;
            }
            out.push((x, y));
            got += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_and_accept, Window};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn grid_graph() -> AcceptedGraph {
        let w = Window::new(p(0.0, 0.0), p(12.0, 12.0), 1.0).unwrap();
        let mut v = Vec::new();
        for j in 0..7 {
            for i in 0..7 {
                // slight jitter removes cocircular ties
                let e = 1e-3 * ((i * 7 + j) % 5) as f64;
                v.push(p(2.0 * i as f64 + e, 2.0 * j as f64 - e));
            }
        }
        AcceptedGraph::from_vertices(w, v, 0.2).unwrap()
    }

    #[test]
    fn grid_walk_follows_the_row() {
        let g = grid_graph();
        let (walk, entries) = segment_cell_walk(&g, 21, 25).unwrap();
        assert_eq!(walk, vec![21, 22, 23, 24, 25]);
        assert_eq!(entries.len(), 5);
        for (k, a) in entries.iter().enumerate().skip(1) {
            // the segment enters each cell about halfway between sites
            assert!((a.x - (2.0 * k as f64 - 1.0)).abs() < 0.01);
        }
        let dp = dilation_path(&g, 21, 25).unwrap();
        assert_eq!(dp.path, vec![21, 22, 23, 24, 25]);
        assert!(dp.ratio(&g) < 1.001);
    }

    #[test]
    fn adjacent_pair_is_one_hop() {
        let g = grid_graph();
        let dp = dilation_path(&g, 0, 1).unwrap();
        assert_eq!(dp.cell_walk, vec![0, 1]);
        assert_eq!(dp.path, vec![0, 1]);
        assert!((dp.ratio(&g) - 1.0).abs() < 1e-12);
        let s = empirical_dilation(&g, &[(0, 1)]).unwrap();
        assert!((s.pairs[0].full_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_rule() {
        let e = [p(0.0, 0.0), p(0.1, 0.0), p(0.2, 0.0), p(0.5, 0.0), p(0.6, 0.0)];
        // anchor a_1 = 0.1: a_2 is within 0.2 of it, a_3 is not -> j(1) = 2
        assert_eq!(select_indices(&e, 0.2), vec![0, 2, 4]);
        assert_eq!(select_indices(&e[..2], 0.2), vec![0, 1]);
    }

    #[test]
    fn random_graph_paths_respect_the_bound() {
        let w = Window::new(p(0.0, 0.0), p(30.0, 30.0), 7.0).unwrap();
        let (_, acc) = sample_and_accept(w, 1.0, 1.0, 12).unwrap();
        let g = AcceptedGraph::build(&acc, 0.2).unwrap();
        let pairs = stratified_pairs(&g, w.core(), &[2.0, 5.0, 10.0, 20.0], 25, 1).unwrap();
        let stats = empirical_dilation(&g, &pairs).unwrap();
        for (pd, &(x, y)) in stats.pairs.iter().zip(&pairs) {
            let dp = dilation_path(&g, x, y).unwrap();
            let r = dp.ratio(&g);
            assert!(r <= dilation_bound(0.2));
            assert!(pd.full_ratio <= r + 1e-12);
            assert!(pd.full_ratio >= 1.0 - 1e-12);
            assert!(pd.delaunay_ratio <= 1.998 + 0.01);
            // entry points lie on both bordering cells' closures
            for k in 1..dp.cell_walk.len() {
                let a = dp.entry_points[k];
                let s0 = g.vertices[dp.cell_walk[k - 1] as usize];
                let s1 = g.vertices[dp.cell_walk[k] as usize];
                assert!((a.dist(s0) - a.dist(s1)).abs() < 1e-9);
            }
        }
        let rev = empirical_dilation(&g, &pairs.iter().map(|&(a, b)| (b, a)).collect::<Vec<_>>()).unwrap();
        for (a, b) in stats.pairs.iter().zip(&rev.pairs) {
            assert!((a.full_ratio - b.full_ratio).abs() < 1e-12);
        }
    }
}
