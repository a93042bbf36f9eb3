//! Acceptability checks on a built graph: no empty unit disk, short
//! interior Delaunay edges, small interior cells, the constructive dilation
//! bound, and ball counts.

use serde::{Deserialize, Serialize};

use crate::dilation::{dilation_bound, dilation_path, empirical_dilation, stratified_pairs, STRATA};
use crate::geom::{AcceptedGraph, EdgeKind};
use crate::point::Point;
use crate::pointproc::{verify_hole_property, AcceptedSet, HoleReport};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Shrinks the sampled region for the empty-disk search.
    pub trim: f64,
    /// Edges and cells count as interior when this far inside the sampled
    /// region.
    pub interior: f64,
    /// Dilation pairs per distance stratum.
    pub pairs_per_distance: usize,
    pub seed: u64,
    pub density_radius: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trim: 1.0,
            interior: 3.0,
            pairs_per_distance: 200,
            seed: 0,
            density_radius: 5.0,
        }
    }
}

/// Counts of a bounded quantity: how many were checked, how many exceeded
/// `limit`, and the largest value seen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub checked: usize,
    pub violations: usize,
    pub worst: f64,
    pub limit: f64,
}

impl BoundCheck {
    fn new(limit: f64) -> Self {
        BoundCheck {
            limit,
            ..Self::default()
        }
    }

    fn add(&mut self, v: f64, ok: bool) {
        self.checked += 1;
        self.worst = self.worst.max(v);
        self.violations += usize::from(!ok);
    }
}

/// `|V cap B_r(c)| / r^2` over a lattice of centres with spacing `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    pub radius: f64,
    pub centers: usize,
    pub mean: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub vertices: usize,
    pub hole: HoleReport,
    /// Interior Delaunay edges, limit 2 (strict).
    pub separation: BoundCheck,
    /// Largest distance from an interior site to its cell, limit 1.
    pub cell_size: BoundCheck,
    /// Constructive path length over `|y - x|`.
    pub dilation: BoundCheck,
    /// Shortest Delaunay-only path length over `|y - x|` (reported only).
    pub delaunay_dilation: f64,
    pub density: Option<DensityStats>,
    pub pass: bool,
}

pub fn verify_graph(graph: &AcceptedGraph, opts: &VerifyOptions) -> Result<VerifyReport> {
    let window = graph.window;
    let accepted = AcceptedSet {
        window,
        vertices: graph.vertices.clone(),
        times: Vec::new(),
        parent_sample_seed: 0,
        saturated: true,
    };
    let hole = verify_hole_property(&accepted, opts.trim)?;
    let region = window.sample_region();
    let interior = |p: Point| region.inset_distance(p) >= opts.interior;

    let mut separation = BoundCheck::new(2.0);
    for e in graph.edges.iter().filter(|e| e.kind == EdgeKind::Delaunay) {
        if interior(graph.vertices[e.a as usize]) && interior(graph.vertices[e.b as usize]) {
            separation.add(e.length, e.length < 2.0);
        }
    }
    let mut cell_size = BoundCheck::new(1.0);
    for c in graph.cells.iter().filter(|c| !c.clipped && interior(c.site)) {
        let r = c.circumradius();
        cell_size.add(r, r <= 1.0 + 1e-9);
    }

    let mut dilation = BoundCheck::new(dilation_bound(graph.delta_g));
    let mut delaunay_dilation = 0.0;
    let core = window.core().expand(-1.0);
    let span = core.width().min(core.height());
    let strata: Vec<f64> = STRATA.iter().copied().filter(|&d| d < span).collect();
    if !core.is_empty() && !strata.is_empty() && opts.pairs_per_distance > 0 {
        let pairs = stratified_pairs(graph, core, &strata, opts.pairs_per_distance, opts.seed)?;
        for &(x, y) in &pairs {
            let p = dilation_path(graph, x, y)?;
            let ratio = p.ratio(graph);
            dilation.add(ratio, ratio <= dilation.limit);
        }
        delaunay_dilation = empirical_dilation(graph, &pairs)?.max_delaunay;
    }

    let r = opts.density_radius;
    let inner = window.core().expand(-r);
    let density = (r > 0.0 && !inner.is_empty()).then(|| {
        let (nx, ny) = (
            (inner.width() / r) as usize + 1,
            (inner.height() / r) as usize + 1,
        );
        let mut vals = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let c = Point::new(inner.lo.x + i as f64 * r, inner.lo.y + j as f64 * r);
                let n = graph
                    .vertices_near(c, r)
                    .into_iter()
                    .filter(|&v| graph.vertices[v].dist2(c) <= r * r)
                    .count();
                vals.push(n as f64 / (r * r));
            }
        }
        DensityStats {
            radius: r,
            centers: vals.len(),
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            max: vals.iter().copied().fold(0.0, f64::max),
        }
    });

    let pass =
        hole.pass && separation.violations == 0 && cell_size.violations == 0 && dilation.violations == 0;
    Ok(VerifyReport {
        vertices: graph.len(),
        hole,
        separation,
        cell_size,
        dilation,
        delaunay_dilation,
        density,
        pass,
    })
}
