//! Uniform bucket grid for radius queries over planar points.

use crate::point::{Point, Rect};

#[derive(Clone, Debug)]
pub struct GridIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl GridIndex {
    pub fn new(bounds: Rect, cell: f64) -> Self {
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        GridIndex {
            origin: bounds.lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    pub fn build(bounds: Rect, cell: f64, points: &[Point]) -> Self {
        let mut g = GridIndex::new(bounds, cell);
        for (i, &p) in points.iter().enumerate() {
            g.insert(i as u32, p);
        }
        g
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor();
        let cy = ((p.y - self.origin.y) / self.cell).floor();
        (
            (cx.max(0.0) as usize).min(self.nx - 1),
            (cy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    pub fn insert(&mut self, id: u32, p: Point) {
        let (cx, cy) = self.cell_of(p);
        self.buckets[cy * self.nx + cx].push(id);
    }

    /// Calls `f` with every id whose bucket intersects the square of half-side
    /// `r` around `p`. Callers filter by exact distance.
    pub fn for_each_near(&self, p: Point, r: f64, mut f: impl FnMut(u32)) {
        let (x0, y0) = self.cell_of(Point::new(p.x - r, p.y - r));
        let (x1, y1) = self.cell_of(Point::new(p.x + r, p.y + r));
        for cy in y0..=y1 {
            let row = cy * self.nx;
            for cx in x0..=x1 {
                for &id in &self.buckets[row + cx] {
                    f(id);
                }
            }
        }
    }

    /// Ids within distance `< r` of `p`.
    pub fn within(&self, points: &[Point], p: Point, r: f64) -> Vec<u32> {
        let r2 = r * r;
        let mut out = Vec::new();
        self.for_each_near(p, r, |id| {
            if points[id as usize].dist2(p) < r2 {
                out.push(id);
            }
        });
        out
    }

    /// Nearest indexed point to `p`; ties go to the lowest id.
    pub fn nearest(&self, points: &[Point], p: Point) -> Option<u32> {
        let (cx, cy) = self.cell_of(p);
        let max_ring = self.nx.max(self.ny);
        let mut best: Option<(f64, u32)> = None;
        for ring in 0..=max_ring {
            let x0 = cx.saturating_sub(ring);
            let y0 = cy.saturating_sub(ring);
            let x1 = (cx + ring).min(self.nx - 1);
            let y1 = (cy + ring).min(self.ny - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let on_ring = x == x0 || x == x1 || y == y0 || y == y1;
                    if !on_ring {
                        continue;
                    }
                    for &id in &self.buckets[y * self.nx + x] {
                        let d = points[id as usize].dist2(p);
                        let better = match best {
                            None => true,
                            Some((bd, bid)) => d < bd || (d == bd && id < bid),
                        };
                        if better {
                            best = Some((d, id));
                        }
                    }
                }
            }
            // everything outside this ring is at least `ring * cell` away
            if let Some((bd, _)) = best {
                let reach = ring as f64 * self.cell;
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = Rect::new(Point::new(0.0, 0.0), Point::new(20.0, 10.0));
        let pts: Vec<Point> = (0..300)
            .map(|_| Point::new(rng.random_range(0.0..20.0), rng.random_range(0.0..10.0)))
            .collect();
        let g = GridIndex::build(b, 1.3, &pts);
        for _ in 0..500 {
            let q = Point::new(rng.random_range(-2.0..22.0), rng.random_range(-2.0..12.0));
            let scan = (0..pts.len())
                .min_by(|&a, &b| pts[a].dist2(q).total_cmp(&pts[b].dist2(q)))
                .unwrap();
            assert_eq!(g.nearest(&pts, q), Some(scan as u32));
        }
    }
}
