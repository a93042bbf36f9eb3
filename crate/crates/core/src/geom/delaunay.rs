//! Incremental Delaunay triangulation (Bowyer-Watson with ghost triangles).
//!
//! Orientation and in-circle signs are exact. Cocircular ties are broken by a
//! symbolic perturbation of the lifted heights, `|p_i|^2 - eps^i` with `eps`
//! infinitesimal: a site with a lower index sits lower on the paraboloid, so
//! among cocircular sites the lowest index wins. For four cocircular sites the
//! chosen diagonal is the one incident to the lowest-index site; in general the
//! result is the unique triangulation whose triangles pass the perturbed
//! empty-circle test.

use std::collections::HashMap;

use crate::point::{orient, Point};
use crate::{Error, Result};

const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Perturbed in-circle test for real sites: is `p` inside the circle through
/// the counterclockwise triangle `t`?
pub fn in_circle_perturbed(sites: &[Point], t: [u32; 3], p: u32) -> bool {
    let [a, b, c] = t.map(|i| sites[i as usize]);
    let d = sites[p as usize];
    let det = robust::incircle(a.coord(), b.coord(), c.coord(), d.coord());
    if det != 0.0 {
        return det > 0.0;
    }
    let (k, &m) = t.iter().enumerate().min_by_key(|(_, &v)| v).unwrap();
    if p < m {
        return true;
    }
    // inside iff p lies across the edge opposite the lowest-index vertex
    let e0 = sites[t[(k + 1) % 3] as usize];
    let e1 = sites[t[(k + 2) % 3] as usize];
    orient(e0, e1, d) < 0.0
}

#[derive(Clone, Copy, Debug)]
struct Tri {
    v: [u32; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [u32; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }
}

/// A planar Delaunay triangulation of distinct sites.
#[derive(Clone, Debug)]
pub struct Triangulation {
    sites: Vec<Point>,
    /// Counterclockwise vertex triples.
    triangles: Vec<[u32; 3]>,
    /// `adjacency[t][i]` is the triangle across the edge opposite vertex `i`.
    adjacency: Vec<[Option<u32>; 3]>,
    nbr_offsets: Vec<u32>,
    nbrs: Vec<u32>,
    on_hull: Vec<bool>,
}

struct Builder<'a> {
    sites: &'a [Point],
    tris: Vec<Tri>,
    free: Vec<u32>,
    stamp: Vec<u32>,
    conflict: Vec<bool>,
    epoch: u32,
    last: u32,
}

impl<'a> Builder<'a> {
    fn alloc(&mut self, t: Tri) -> u32 {
        if let Some(i) = self.free.pop() {
            self.tris[i as usize] = t;
            self.stamp[i as usize] = 0;
            i
        } else {
            self.tris.push(t);
            self.stamp.push(0);
            self.conflict.push(false);
            (self.tris.len() - 1) as u32
        }
    }

    fn p(&self, i: u32) -> Point {
        self.sites[i as usize]
    }

    fn in_conflict(&self, t: &Tri, pi: u32) -> bool {
        if !t.is_ghost() {
            return in_circle_perturbed(self.sites, t.v, pi);
        }
        let (a, b, p) = (self.p(t.v[0]), self.p(t.v[1]), self.p(pi));
        let o = orient(a, b, p);
        if o > 0.0 {
            return true;
        }
        // collinear with a hull edge: conflict only strictly between its ends
        o == 0.0 && (p - a).dot(b - a) > 0.0 && (p - b).dot(a - b) > 0.0
    }

    fn locate(&self, pi: u32) -> Result<u32> {
        let p = self.p(pi);
        let mut t = self.last;
        let mut rot = 0usize;
        let mut steps = 0usize;
        loop {
            let tri = &self.tris[t as usize];
            if tri.is_ghost() {
                return Ok(t);
            }
            let mut moved = false;
            for k in 0..3 {
                let i = (rot + k) % 3;
                let e0 = self.p(tri.v[(i + 1) % 3]);
                let e1 = self.p(tri.v[(i + 2) % 3]);
                if orient(e0, e1, p) < 0.0 {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                for &v in &tri.v {
                    if self.p(v) == p {
                        return Err(Error::DuplicateSite(pi as usize, p.x, p.y));
                    }
                }
                return Ok(t);
            }
            rot = (rot + 1) % 3;
            steps += 1;
            if steps > 4 * self.tris.len() + 16 {
                // a walk in a Delaunay triangulation terminates; fall back to a scan
                return self.scan(pi);
            }
        }
    }

    fn scan(&self, pi: u32) -> Result<u32> {
        for (i, t) in self.tris.iter().enumerate() {
            if t.alive && self.in_conflict(t, pi) {
                return Ok(i as u32);
            }
        }
        let p = self.p(pi);
        Err(Error::DuplicateSite(pi as usize, p.x, p.y))
    }

    fn insert(&mut self, pi: u32) -> Result<()> {
        let seed = self.locate(pi)?;
        self.epoch += 1;
        let epoch = self.epoch;
        // cavity search
        let mut cavity = vec![seed];
        self.stamp[seed as usize] = epoch;
        self.conflict[seed as usize] = true;
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new(); // (e0, e1, outside)
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                let inside = if self.stamp[nb as usize] == epoch {
                    self.conflict[nb as usize]
                } else {
                    let c = self.in_conflict(&self.tris[nb as usize], pi);
                    self.stamp[nb as usize] = epoch;
                    self.conflict[nb as usize] = c;
                    if c {
                        cavity.push(nb);
                        stack.push(nb);
                    }
                    c
                };
                if !inside {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }
        // new triangles [e0, e1, p]
        let mut by_start: HashMap<u32, u32> = HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(e0, e1, outside) in &boundary {
            let t = self.alloc(Tri {
                v: [e0, e1, pi],
                n: [NONE, NONE, outside],
                alive: true,
            });
            // repoint the outside triangle
            let o = &mut self.tris[outside as usize];
            for k in 0..3 {
                if o.v[(k + 1) % 3] == e1 && o.v[(k + 2) % 3] == e0 {
                    o.n[k] = t;
                }
            }
            by_start.insert(e0, t);
            created.push(t);
        }
        for &t in &created {
            let e1 = self.tris[t as usize].v[1];
            // across (e1, p) is the new triangle starting at e1
            self.tris[t as usize].n[0] = by_start[&e1];
        }
        for &t in &created {
            let a = self.tris[t as usize].n[0];
            // t's edge (e1, p) faces a's edge (p, e1), which is opposite a.v[1]
            self.tris[a as usize].n[1] = t;
        }
        for &t in &created {
            let tri = &mut self.tris[t as usize];
            if let Some(k) = tri.v.iter().position(|&v| v == GHOST) {
                if k != 2 {
                    let s = (k + 1) % 3; // rotate so the ghost lands at index 2
                    let v = tri.v;
                    let n = tri.n;
                    tri.v = [v[s], v[(s + 1) % 3], v[(s + 2) % 3]];
                    tri.n = [n[s], n[(s + 1) % 3], n[(s + 2) % 3]];
                }
            }
        }
        self.last = *created
            .iter()
            .find(|&&t| !self.tris[t as usize].is_ghost())
            .unwrap_or(&created[0]);
        if self.tris[self.last as usize].is_ghost() {
            // walk must start from a real triangle
            let g = self.tris[self.last as usize];
            self.last = g.n[2];
        }
        Ok(())
    }
}

/// Insertion order that keeps consecutive sites close (snake over a coarse
/// grid), which keeps the point-location walks short.
fn spatial_order(sites: &[Point]) -> Vec<u32> {
    let n = sites.len();
    let (mut lo, mut hi) = (sites[0], sites[0]);
    for p in sites {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let side = (n as f64 / 4.0).sqrt().ceil().max(1.0);
    let w = (hi.x - lo.x).max(1e-300);
    let h = (hi.y - lo.y).max(1e-300);
    let key = |p: Point| {
        let cx = (((p.x - lo.x) / w * side) as i64).min(side as i64 - 1);
        let cy = (((p.y - lo.y) / h * side) as i64).min(side as i64 - 1);
        let cx = if cy % 2 == 0 { cx } else { side as i64 - 1 - cx };
        (cy, cx)
    };
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (sites[a as usize], sites[b as usize]);
        key(pa)
            .cmp(&key(pb))
            .then(pa.y.total_cmp(&pb.y))
            .then(pa.x.total_cmp(&pb.x))
            .then(a.cmp(&b))
    });
    order
}

impl Triangulation {
    pub fn new(sites: Vec<Point>) -> Result<Self> {
        let n = sites.len();
        if n < 3 {
            return Err(Error::TooFewSites { needed: 3, got: n });
        }
        if n >= GHOST as usize {
            return Err(Error::InvalidParameter("too many sites".into()));
        }
        let order = spatial_order(&sites);
        // first non-degenerate triple in insertion order
        let a = order[0];
        let b_pos = 1;
        let b = order[b_pos];
        if sites[b as usize] == sites[a as usize] {
            return Err(Error::DuplicateSite(
                b as usize,
                sites[b as usize].x,
                sites[b as usize].y,
            ));
        }
        let mut c_pos = None;
        for (k, &i) in order.iter().enumerate().skip(b_pos + 1) {
            if orient(sites[a as usize], sites[b as usize], sites[i as usize]) != 0.0 {
                c_pos = Some(k);
                break;
            }
        }
        let c_pos = c_pos.ok_or(Error::Collinear)?;
        let c = order[c_pos];
        let (b, c) = if orient(sites[a as usize], sites[b as usize], sites[c as usize]) > 0.0 {
            (b, c)
        } else {
            (c, b)
        };
        let mut bl = Builder {
            sites: &sites,
            tris: Vec::with_capacity(2 * n + 8),
            free: Vec::new(),
            stamp: Vec::new(),
            conflict: Vec::new(),
            epoch: 0,
            last: 0,
        };
        // real triangle 0 = [a, b, c]; ghosts across each edge
        // ghost across edge opposite a, i.e. (b, c): ghost [c, b, G]
        let t0 = bl.alloc(Tri {
            v: [a, b, c],
            n: [1, 2, 3],
            alive: true,
        });
        let g_a = bl.alloc(Tri {
            v: [c, b, GHOST],
            n: [NONE, NONE, t0],
            alive: true,
        });
        let g_b = bl.alloc(Tri {
            v: [a, c, GHOST],
            n: [NONE, NONE, t0],
            alive: true,
        });
        let g_c = bl.alloc(Tri {
            v: [b, a, GHOST],
            n: [NONE, NONE, t0],
            alive: true,
        });
        // ghost [x, y, G]: n[0] across (y, G), n[1] across (G, x)
        // g_a = [c, b, G]: across (b, G) is the ghost [b, a, G] = g_c; across (G, c) is g_b [a, c, G]
        bl.tris[g_a as usize].n = [g_c, g_b, t0];
        // g_b = [a, c, G]: across (c, G) is g_a; across (G, a) is g_c
        bl.tris[g_b as usize].n = [g_a, g_c, t0];
        // g_c = [b, a, G]: across (a, G) is g_b; across (G, b) is g_a
        bl.tris[g_c as usize].n = [g_b, g_a, t0];
        bl.last = t0;
        for &i in &order {
            if i == a || i == b || i == c {
                continue;
            }
            bl.insert(i)?;
        }
        let tris = bl.tris;
        let mut remap = vec![u32::MAX; tris.len()];
        let mut triangles = Vec::new();
        for (i, t) in tris.iter().enumerate() {
            if t.alive && !t.is_ghost() {
                remap[i] = triangles.len() as u32;
                triangles.push(t.v);
            }
        }
        let adjacency: Vec<[Option<u32>; 3]> = tris
            .iter()
            .filter(|t| t.alive && !t.is_ghost())
            .map(|t| {
                t.n.map(|nb| {
                    let r = remap[nb as usize];
                    (r != u32::MAX).then_some(r)
                })
            })
            .collect();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut on_hull = vec![false; n];
        for (ti, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (u, v) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                lists[u as usize].push(v);
                lists[v as usize].push(u);
                if adjacency[ti][i].is_none() {
                    on_hull[u as usize] = true;
                    on_hull[v as usize] = true;
                }
            }
        }
        let mut nbr_offsets = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        nbr_offsets.push(0);
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
            nbrs.extend_from_slice(l);
            nbr_offsets.push(nbrs.len() as u32);
        }
        Ok(Triangulation {
            sites,
            triangles,
            adjacency,
            nbr_offsets,
            nbrs,
            on_hull,
        })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn adjacency(&self) -> &[[Option<u32>; 3]] {
        &self.adjacency
    }

    /// Sorted Delaunay neighbours of site `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbrs[self.nbr_offsets[i] as usize..self.nbr_offsets[i + 1] as usize]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn on_hull(&self, i: usize) -> bool {
        self.on_hull[i]
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.nbrs.len() / 2);
        for i in 0..self.sites.len() {
            for &j in self.neighbors(i) {
                if (i as u32) < j {
                    out.push((i as u32, j));
                }
            }
        }
        out
    }

    /// Triangles as sorted index triples, sorted; convenient for comparisons.
    pub fn canonical_triangles(&self) -> Vec<[u32; 3]> {
        let mut v: Vec<[u32; 3]> = self
            .triangles
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort_unstable();
                s
            })
            .collect();
        v.sort_unstable();
        v
    }
}

/// Delaunay triangulation of `sites` (at least three, not all collinear, no
/// duplicates).
pub fn delaunay(sites: &[Point]) -> Result<Triangulation> {
    Triangulation::new(sites.to_vec())
}
