//! The augmented Delaunay graph on an accepted vertex set.

use serde::{Deserialize, Serialize};

use super::delaunay::Triangulation;
use super::voronoi::{voronoi_cells, VoronoiCell};
use crate::point::{segment_segment_dist, Point, Rect};
use crate::pointproc::{AcceptedSet, Window};
use crate::seed::SeedChain;
use crate::spatial::GridIndex;
use crate::{Error, Result, TAU_GEO};

/// Default augmentation threshold.
pub const DEFAULT_DELTA_G: f64 = 0.2;
/// Schema id written into exported graph documents.
pub const GRAPH_SCHEMA: &str = "fpplab.graph/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Delaunay,
    Augmentation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub kind: EdgeKind,
    pub length: f64,
}

/// Distance between two convex polygons given as vertex loops; zero when they
/// touch or overlap.
pub fn polygon_distance(p: &[Point], q: &[Point]) -> f64 {
    if p.is_empty() || q.is_empty() {
        return f64::INFINITY;
    }
    if contains_convex(p, q[0]) || contains_convex(q, p[0]) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        for j in 0..q.len() {
            let (c, d) = (q[j], q[(j + 1) % q.len()]);
            best = best.min(segment_segment_dist(a, b, c, d));
        }
    }
    best
}

fn contains_convex(poly: &[Point], x: Point) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|i| (poly[(i + 1) % poly.len()] - poly[i]).cross(x - poly[i]) >= 0.0)
}

/// Augmentation edges: pairs of non-adjacent cells whose polygon distance `d`
/// satisfies `TAU_GEO < d <= delta_g`. Pairs whose cells could not be that
/// close (by circumradius about the sites) are skipped.
pub fn augment(cells: &[VoronoiCell], tri: &Triangulation, delta_g: f64) -> Result<Vec<Edge>> {
    check_delta(delta_g)?;
    let sites = tri.sites();
    if sites.is_empty() {
        return Ok(Vec::new());
    }
    let radii: Vec<f64> = cells.iter().map(|c| c.circumradius()).collect();
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    // cells clipped by the region boundary can be large; they get their own
    // wide query so the common case stays local
    let small = AUG_SMALL_RADIUS.min(rmax);
    let bounds = bounding_rect(sites);
    let index = GridIndex::build(bounds, (2.0 * small + delta_g).max(0.5), sites);
    let pad = |r: f64| r * (1.0 + 1e-12) + TAU_GEO;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for i in 0..sites.len() {
        let big = radii[i] > small;
        let reach = radii[i] + if big { rmax } else { small } + delta_g;
        for j in index.within(sites, sites[i], pad(reach)) {
            let j = j as usize;
            if j == i || (!big && radii[j] > small) {
                continue;
            }
            pairs.push((i.min(j) as u32, i.max(j) as u32));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let boxes: Vec<Rect> = cells.iter().map(|c| polygon_bounds(&c.polygon)).collect();
    let mut out = Vec::new();
    for (i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        if tri.is_adjacent(i, j) || sites[i].dist(sites[j]) > radii[i] + radii[j] + delta_g {
            continue;
        }
        if box_gap(&boxes[i], &boxes[j]) > delta_g {
            continue;
        }
        let d = polygon_distance(&cells[i].polygon, &cells[j].polygon);
        if d > TAU_GEO && d <= delta_g {
            out.push(Edge {
                a: i as u32,
                b: j as u32,
                kind: EdgeKind::Augmentation,
                length: sites[i].dist(sites[j]),
            });
        }
    }
    Ok(out)
}

/// Cells with a larger circumradius are searched individually.
const AUG_SMALL_RADIUS: f64 = 1.5;

fn polygon_bounds(poly: &[Point]) -> Rect {
    if poly.is_empty() {
        return Rect::new(
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
    }
    bounding_rect(poly)
}

fn box_gap(a: &Rect, b: &Rect) -> f64 {
    let dx = (b.lo.x - a.hi.x).max(a.lo.x - b.hi.x).max(0.0);
    let dy = (b.lo.y - a.hi.y).max(a.lo.y - b.hi.y).max(0.0);
    dx.hypot(dy)
}

fn check_delta(delta_g: f64) -> Result<()> {
    if !(delta_g > 0.0 && delta_g < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_g must lie in (0, 1), got {delta_g}"
        )));
    }
    Ok(())
}

fn bounding_rect(pts: &[Point]) -> Rect {
    let mut r = Rect::new(pts[0], pts[0]);
    for p in pts {
        r.lo = Point::new(r.lo.x.min(p.x), r.lo.y.min(p.y));
        r.hi = Point::new(r.hi.x.max(p.x), r.hi.y.max(p.y));
    }
    r
}

/// Vertices, Voronoi cells and the Delaunay-plus-augmentation edge set.
#[derive(Clone, Debug)]
pub struct AcceptedGraph {
    pub window: Window,
    pub vertices: Vec<Point>,
    pub cells: Vec<VoronoiCell>,
    /// Sorted by `(a, b)` with `a < b`.
    pub edges: Vec<Edge>,
    pub delta_g: f64,
    pub seed_chain: Option<SeedChain>,
    tri: Triangulation,
    offsets: Vec<u32>,
    /// `(neighbour, edge index)` pairs, sorted by neighbour.
    adj: Vec<(u32, u32)>,
    index: GridIndex,
}

impl AcceptedGraph {
    /// Builds the graph for an accepted set. Cells are clipped to the sampled
    /// region.
    pub fn build(accepted: &AcceptedSet, delta_g: f64) -> Result<Self> {
        Self::from_vertices(accepted.window, accepted.vertices.clone(), delta_g)
    }

    pub fn from_vertices(window: Window, vertices: Vec<Point>, delta_g: f64) -> Result<Self> {
        window.validate()?;
        check_delta(delta_g)?;
        let region = window.sample_region();
        if let Some(p) = vertices.iter().find(|p| !region.contains(**p)) {
            return Err(Error::OutsideWindow(p.x, p.y));
        }
        let tri = Triangulation::new(vertices.clone())?;
        let cells = voronoi_cells(&tri, region);
        let mut edges: Vec<Edge> = tri
            .edges()
            .into_iter()
            .map(|(a, b)| Edge {
                a,
                b,
                kind: EdgeKind::Delaunay,
                length: vertices[a as usize].dist(vertices[b as usize]),
            })
            .collect();
        edges.extend(augment(&cells, &tri, delta_g)?);
        Ok(Self::assemble(window, vertices, cells, edges, delta_g, None, tri))
    }

    fn assemble(
        window: Window,
        vertices: Vec<Point>,
        cells: Vec<VoronoiCell>,
        mut edges: Vec<Edge>,
        delta_g: f64,
        seed_chain: Option<SeedChain>,
        tri: Triangulation,
    ) -> Self {
        edges.sort_by_key(|e| (e.a, e.b));
        let n = vertices.len();
        let mut deg = vec![0u32; n + 1];
        for e in &edges {
            deg[e.a as usize] += 1;
            deg[e.b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, 0u32); offsets[n] as usize];
        for (k, e) in edges.iter().enumerate() {
            adj[fill[e.a as usize] as usize] = (e.b, k as u32);
            fill[e.a as usize] += 1;
            adj[fill[e.b as usize] as usize] = (e.a, k as u32);
            fill[e.b as usize] += 1;
        }
        for i in 0..n {
            adj[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        let index = GridIndex::build(window.sample_region(), 2.0, &vertices);
        AcceptedGraph {
            window,
            vertices,
            cells,
            edges,
            delta_g,
            seed_chain,
            tri,
            offsets,
            adj,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    /// `(neighbour, edge index)` pairs of vertex `i`, sorted by neighbour.
    pub fn neighbors(&self, i: usize) -> &[(u32, u32)] {
        &self.adj[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Index of the edge joining `i` and `j`, if any.
    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        let nb = self.neighbors(i);
        nb.binary_search_by_key(&(j as u32), |&(v, _)| v)
            .ok()
            .map(|k| nb[k].1 as usize)
    }

    /// Vertex whose cell contains `y`: the nearest vertex, ties to the lowest
    /// index.
    pub fn cell_of(&self, y: Point) -> Result<usize> {
        if !self.window.sample_region().contains(y) {
            return Err(Error::OutsideWindow(y.x, y.y));
        }
        self.index
            .nearest(&self.vertices, y)
            .map(|v| v as usize)
            .ok_or(Error::TooFewSites { needed: 1, got: 0 })
    }

    /// Vertices within the square of half-side `r` around `p` (a superset of
    /// the vertices within distance `r`), unsorted.
    pub fn vertices_near(&self, p: Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let r2 = 2.0 * r * r;
        self.index.for_each_near(p, r, |v| {
            if self.vertices[v as usize].dist2(p) <= r2 {
                out.push(v as usize);
            }
        });
        out
    }

    pub fn augmentation_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Augmentation)
            .count()
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            schema: GRAPH_SCHEMA.to_string(),
            window: self.window,
            delta_g: self.delta_g,
            seed_chain: self.seed_chain,
            sites: self.vertices.clone(),
            edges: self.edges.iter().map(|e| (e.a, e.b, e.kind, e.length)).collect(),
        }
    }

    /// Rebuilds the graph from a document. The edge list is taken verbatim;
    /// the triangulation and cells are recomputed from the sites.
    pub fn from_document(doc: GraphDocument) -> Result<Self> {
        if doc.schema != GRAPH_SCHEMA {
            return Err(Error::Schema {
                expected: GRAPH_SCHEMA.to_string(),
                found: doc.schema,
            });
        }
        doc.window.validate()?;
        check_delta(doc.delta_g)?;
        let n = doc.sites.len();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for &(a, b, kind, length) in &doc.edges {
            if a as usize >= n || b as usize >= n || a >= b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b})")));
            }
            edges.push(Edge { a, b, kind, length });
        }
        let tri = Triangulation::new(doc.sites.clone())?;
        let cells = voronoi_cells(&tri, doc.window.sample_region());
        Ok(Self::assemble(
            doc.window,
            doc.sites,
            cells,
            edges,
            doc.delta_g,
            doc.seed_chain,
            tri,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    /// Distance from `p` to the boundary of the statistics window, negative
    /// outside it.
    pub fn core_depth(&self, p: Point) -> f64 {
        self.window.core().inset_distance(p)
    }
}

/// Serialized form of an [`AcceptedGraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema: String,
    pub window: Window,
    pub delta_g: f64,
    pub seed_chain: Option<SeedChain>,
    pub sites: Vec<Point>,
    pub edges: Vec<(u32, u32, EdgeKind, f64)>,
}
