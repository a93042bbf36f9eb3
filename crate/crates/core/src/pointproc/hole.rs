use serde::{Deserialize, Serialize};

use super::AcceptedSet;
use crate::geom::{clipped_cell, delaunay};
use crate::point::Point;
use crate::{Error, Result};

/// Largest empty disk centred in the trimmed sampling region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub max_empty_radius: f64,
    /// Centre of a largest empty disk.
    pub witness: Point,
    pub pass: bool,
}

/// Computes the largest radius of an open disk centred in the sampled region
/// shrunk by `trim` that contains no vertex; passes iff it is below 1.
///
/// The maximum is attained at a vertex of some Voronoi cell clipped to the
/// trimmed region. Fewer than three or collinear vertices are handled by
/// clipping against every other vertex.
pub fn verify_hole_property(accepted: &AcceptedSet, trim: f64) -> Result<HoleReport> {
    if !(trim >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trim must be nonnegative, got {trim}"
        )));
    }
    let vs = &accepted.vertices;
    if vs.is_empty() {
        return Err(Error::TooFewSites { needed: 1, got: 0 });
    }
    let region = accepted.window.sample_region().expand(-trim);
    if region.is_empty() {
        return Err(Error::DegenerateWindow(format!(
            "trim {trim} removes the whole sampled region"
        )));
    }
    let mut best = HoleReport {
        max_empty_radius: 0.0,
        witness: region.lo,
        pass: true,
    };
    let mut visit = |cell: crate::geom::VoronoiCell| {
        if let Some(q) = cell.farthest_vertex() {
            let r = q.dist(cell.site);
            if r > best.max_empty_radius {
                best.max_empty_radius = r;
                best.witness = q;
            }
        }
    };
    match delaunay(vs) {
        Ok(tri) => {
            for i in 0..vs.len() {
                let nb = tri.neighbors(i).iter().map(|&j| vs[j as usize]);
                visit(clipped_cell(vs[i], nb, region));
            }
        }
        Err(Error::TooFewSites { .. }) | Err(Error::Collinear) => {
            for (i, &v) in vs.iter().enumerate() {
                let others = vs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &u)| u);
                visit(clipped_cell(v, others, region));
            }
        }
        Err(e) => return Err(e),
    }
    best.pass = best.max_empty_radius < 1.0;
    Ok(best)
}
