//! Delaunay triangulation, Voronoi cells, augmentation edges and the cell map.

mod delaunay;
mod graph;
mod voronoi;

pub use delaunay::{delaunay, in_circle_perturbed, Triangulation};
pub use graph::{
    augment, polygon_distance, AcceptedGraph, Edge, EdgeKind, GraphDocument, DEFAULT_DELTA_G, GRAPH_SCHEMA,
};
pub use voronoi::{circumcenter, clipped_cell, voronoi_cells, VoronoiCell};

#[cfg(test)]
mod tests;
