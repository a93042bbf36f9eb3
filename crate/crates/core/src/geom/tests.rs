use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::point::{point_segment_dist, Point, Rect};
use crate::pointproc::Window;
use crate::Error;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn grid(n: usize, s: f64, origin: Point) -> Vec<Point> {
    let mut v = Vec::new();
    for j in 0..n {
        for i in 0..n {
            v.push(origin + p(i as f64 * s, j as f64 * s));
        }
    }
    v
}

fn random_sites(n: usize, side: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| p(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect()
}

#[test]
fn single_triangle() {
    let t = delaunay(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
    assert_eq!(t.triangles().len(), 1);
    assert_eq!(t.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    assert!(t.adjacency()[0].iter().all(|a| a.is_none()));
}

#[test]
fn square_uses_diagonal_through_lowest_index() {
    let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
    let t = delaunay(&sq).unwrap();
    assert_eq!(t.canonical_triangles(), vec![[0, 1, 2], [0, 2, 3]]);
    // relabelling so that site 1 is lowest flips the diagonal
    let sq2 = [p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.0, 0.0)];
    let t2 = delaunay(&sq2).unwrap();
    assert_eq!(t2.canonical_triangles(), vec![[0, 1, 2], [0, 2, 3]]);
    assert!(t2.is_adjacent(0, 2));
    assert!(!t2.is_adjacent(1, 3));
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(matches!(
        delaunay(&[p(0.0, 0.0), p(1.0, 1.0)]),
        Err(Error::TooFewSites { .. })
    ));
    assert!(matches!(
        delaunay(&[p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(3.0, 3.0)]),
        Err(Error::Collinear)
    ));
    assert!(matches!(
        delaunay(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)]),
        Err(Error::DuplicateSite(..))
    ));
}

#[test]
fn collinear_prefix_then_offline_point() {
    let mut v: Vec<Point> = (0..6).map(|i| p(i as f64, 0.0)).collect();
    v.push(p(2.5, 1.0));
    let t = delaunay(&v).unwrap();
    assert_eq!(t.triangles().len(), 5);
    for i in 0..6 {
        assert!(t.is_adjacent(i, 6));
    }
}

fn check_local_delaunay(t: &Triangulation) {
    let tris = t.triangles();
    for (k, tri) in tris.iter().enumerate() {
        assert!(
            crate::point::orient(
                t.sites()[tri[0] as usize],
                t.sites()[tri[1] as usize],
                t.sites()[tri[2] as usize]
            ) > 0.0
        );
        for i in 0..3 {
            if let Some(nb) = t.adjacency()[k][i] {
                let other = tris[nb as usize]
                    .iter()
                    .copied()
                    .find(|v| !tri.contains(v))
                    .unwrap();
                assert!(!in_circle_perturbed(t.sites(), *tri, other));
            }
        }
    }
}

#[test]
fn random_and_grid_inputs_are_locally_delaunay() {
    for seed in 0..20 {
        let t = delaunay(&random_sites(300, 20.0, seed)).unwrap();
        check_local_delaunay(&t);
        // Euler: t = 2n - 2 - h
        let h = (0..300).filter(|&i| t.on_hull(i)).count();
        assert_eq!(t.triangles().len(), 2 * 300 - 2 - h);
    }
    let g = delaunay(&grid(12, 1.0, Point::ORIGIN)).unwrap();
    check_local_delaunay(&g);
    assert_eq!(g.triangles().len(), 2 * 11 * 11);
}

#[test]
fn grid_cells_are_squares_and_tile() {
    let s = 1.5;
    let sites = grid(8, s, p(0.75, 0.75));
    let t = delaunay(&sites).unwrap();
    let rect = Rect::new(Point::ORIGIN, p(12.0, 12.0));
    let cells = voronoi_cells(&t, rect);
    let total: f64 = cells.iter().map(|c| c.area()).sum();
    assert!((total - rect.area()).abs() / rect.area() < 1e-9);
    for c in &cells {
        assert!((c.area() - s * s).abs() < 1e-9, "{:?}", c);
        assert!(c.area() > 0.0);
    }
    let interior = cells.iter().filter(|c| !c.clipped).count();
    assert_eq!(interior, 36);
}

#[test]
fn voronoi_vertices_are_circumcenters() {
    let sites = random_sites(200, 15.0, 7);
    let t = delaunay(&sites).unwrap();
    let rect = Rect::new(p(-50.0, -50.0), p(65.0, 65.0));
    let cells = voronoi_cells(&t, rect);
    for tri in t.triangles() {
        let [a, b, c] = tri.map(|i| sites[i as usize]);
        let cc = circumcenter(a, b, c);
        if !rect.contains(cc) {
            continue;
        }
        for &i in tri {
            let near = cells[i as usize]
                .polygon
                .iter()
                .map(|q| q.dist(cc))
                .fold(f64::INFINITY, f64::min);
            assert!(near < 1e-7, "circumcenter missing from cell {i}: {near}");
        }
    }
}

#[test]
fn sparse_grid_has_no_augmentation() {
    let w = Window::new(p(0.0, 0.0), p(20.0, 20.0), 1.0).unwrap();
    let sites = grid(9, 2.5, p(0.0, 0.0));
    let g = AcceptedGraph::from_vertices(w, sites, 0.4).unwrap();
    // diagonal grid neighbours touch at a corner (distance 0) and are excluded;
    // other cell gaps are at least 2.5
    assert_eq!(g.augmentation_count(), 0);
}

#[test]
fn augmentation_matches_vertex_segment_oracle() {
    let w = Window::new(p(0.0, 0.0), p(12.0, 12.0), 2.0).unwrap();
    let sites: Vec<Point> = random_sites(150, 16.0, 3)
        .into_iter()
        .map(|q| q - p(2.0, 2.0))
        .collect();
    let g = AcceptedGraph::from_vertices(w, sites.clone(), 0.5).unwrap();
    let oracle = |a: &[Point], b: &[Point]| {
        let mut d = f64::INFINITY;
        for (x, y) in [(a, b), (b, a)] {
            for &q in x {
                for k in 0..y.len() {
                    d = d.min(point_segment_dist(q, y[k], y[(k + 1) % y.len()]));
                }
            }
        }
        d
    };
    let mut expect = Vec::new();
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if g.triangulation().is_adjacent(i, j) {
                continue;
            }
            let d = oracle(&g.cells[i].polygon, &g.cells[j].polygon);
            if d > crate::TAU_GEO && d <= 0.5 {
                expect.push((i as u32, j as u32));
            }
        }
    }
    let got: Vec<(u32, u32)> = g
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Augmentation)
        .map(|e| (e.a, e.b))
        .collect();
    assert!(!got.is_empty());
    assert_eq!(got, expect);
}

#[test]
fn tiny_delta_gives_no_augmentation() {
    let w = Window::new(p(0.0, 0.0), p(10.0, 10.0), 1.0).unwrap();
    let g = AcceptedGraph::from_vertices(w, random_sites(80, 10.0, 9), 1e-12).unwrap();
    assert_eq!(g.augmentation_count(), 0);
    assert!(AcceptedGraph::from_vertices(w, random_sites(80, 10.0, 9), 1.0).is_err());
}

#[test]
fn cell_of_is_nearest_site() {
    let w = Window::new(p(0.0, 0.0), p(10.0, 10.0), 1.0).unwrap();
    let sites = grid(6, 2.0, p(0.0, 0.0));
    let g = AcceptedGraph::from_vertices(w, sites.clone(), 0.2).unwrap();
    for (i, &s) in sites.iter().enumerate() {
        assert_eq!(g.cell_of(s).unwrap(), i);
    }
    assert_eq!(g.cell_of(sites[7] + p(0.9, 0.0)).unwrap(), 7);
    // equidistant between sites 0 and 1: lowest index
    assert_eq!(g.cell_of(p(1.0, 0.0)).unwrap(), 0);
    assert!(matches!(g.cell_of(p(50.0, 0.0)), Err(Error::OutsideWindow(..))));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let y = p(rng.random::<f64>() * 12.0 - 1.0, rng.random::<f64>() * 12.0 - 1.0);
        let lin = (0..sites.len())
            .min_by(|&a, &b| sites[a].dist2(y).total_cmp(&sites[b].dist2(y)))
            .unwrap();
        assert_eq!(g.cell_of(y).unwrap(), lin);
    }
}

#[test]
fn json_round_trip_is_bit_exact() {
    let w = Window::new(p(0.0, 0.0), p(10.0, 10.0), 2.0).unwrap();
    let sites: Vec<Point> = random_sites(120, 14.0, 5)
        .into_iter()
        .map(|q| q - p(2.0, 2.0))
        .collect();
    let mut g = AcceptedGraph::from_vertices(w, sites, 0.3).unwrap();
    g.seed_chain = Some(crate::SeedChain::new(99));
    let s = g.to_json().unwrap();
    let h = AcceptedGraph::from_json(&s).unwrap();
    assert_eq!(h.to_document(), g.to_document());
    for (a, b) in g.vertices.iter().zip(&h.vertices) {
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
    }
    for (a, b) in g.edges.iter().zip(&h.edges) {
        assert_eq!(a.length.to_bits(), b.length.to_bits());
    }
    assert_eq!(h.to_json().unwrap(), s);
    let bad = s.replace(GRAPH_SCHEMA, "other/9");
    assert!(matches!(
        AcceptedGraph::from_json(&bad),
        Err(Error::Schema { .. })
    ));
}

#[test]
fn edge_kinds_partition_pairs() {
    let w = Window::new(p(0.0, 0.0), p(12.0, 12.0), 2.0).unwrap();
    let sites: Vec<Point> = random_sites(150, 16.0, 11)
        .into_iter()
        .map(|q| q - p(2.0, 2.0))
        .collect();
    let g = AcceptedGraph::from_vertices(w, sites, 0.6).unwrap();
    let mut pairs: Vec<(u32, u32)> = g.edges.iter().map(|e| (e.a, e.b)).collect();
    let n = pairs.len();
    pairs.dedup();
    assert_eq!(pairs.len(), n);
    for (k, e) in g.edges.iter().enumerate() {
        assert_eq!(g.edge_between(e.a as usize, e.b as usize), Some(k));
        assert_eq!(g.edge_between(e.b as usize, e.a as usize), Some(k));
    }
}
