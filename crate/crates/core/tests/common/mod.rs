//! Independent oracles shared by the integration tests. None of them calls
//! into the code under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fpplab::geom::AcceptedGraph;
use fpplab::pointproc::{sample_and_accept, Window, DEFAULT_SLAB};
use fpplab::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer sites with their original indices.
pub type ISite = (i64, i64);

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of the rows `(x, y, h, 1)`.
fn det4(rows: [[i128; 4]; 4]) -> i128 {
    let mut s = 0i128;
    for c in 0..4 {
        let minor: Vec<[i128; 3]> = rows[1..]
            .iter()
            .map(|r| {
                let v: Vec<i128> = (0..4).filter(|&k| k != c).map(|k| r[k]).collect();
                [v[0], v[1], v[2]]
            })
            .collect();
        let d = det3([minor[0], minor[1], minor[2]]);
        s += if c % 2 == 0 {
            rows[0][c] * d
        } else {
            -rows[0][c] * d
        };
    }
    s
}

pub fn orient_i(a: ISite, b: ISite, c: ISite) -> i128 {
    (b.0 - a.0) as i128 * (c.1 - a.1) as i128 - (b.1 - a.1) as i128 * (c.0 - a.0) as i128
}

fn lifted(p: ISite) -> [i128; 4] {
    let (x, y) = (p.0 as i128, p.1 as i128);
    [x, y, x * x + y * y, 1]
}

/// Is site `d` inside the circle through the counterclockwise triangle
/// `t`, with heights perturbed to `|p_i|^2 - eps^i`?
pub fn inside_perturbed(sites: &[ISite], t: [usize; 3], d: usize) -> bool {
    let ids = [t[0], t[1], t[2], d];
    let rows = ids.map(|i| lifted(sites[i]));
    // reference orientation: a point inside a ccw triangle's circle
    let reference = det4([lifted((0, 0)), lifted((4, 0)), lifted((0, 4)), lifted((1, 1))]).signum();
    let d0 = det4(rows);
    if d0 != 0 {
        return d0.signum() == reference;
    }
    // D(h - eps^i) = D0 - sum_i eps^i dD/dh_i; the lowest index with a
    // nonzero partial decides
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by_key(|&k| ids[k]);
    for k in order {
        let mut r = rows;
        for (j, row) in r.iter_mut().enumerate() {
            row[2] = (j == k) as i128;
        }
        let c = det4(r);
        if c != 0 {
            return -c.signum() == reference;
        }
    }
    unreachable!("perturbation always breaks the tie")
}

/// All counterclockwise triangles whose perturbed circumcircle is empty,
/// as sorted index triples.
pub fn brute_force_delaunay(sites: &[ISite]) -> Vec<[u32; 3]> {
    let n = sites.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let o = orient_i(sites[i], sites[j], sites[k]);
                if o == 0 {
                    continue;
                }
                let t = if o > 0 { [i, j, k] } else { [i, k, j] };
                if (0..n).all(|p| p == i || p == j || p == k || !inside_perturbed(sites, t, p)) {
                    out.push([i as u32, j as u32, k as u32]);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// `n` distinct integer sites in `[0, side)^2`, not all collinear.
pub fn lattice_sites(n: usize, side: i64, r: &mut impl Rng) -> Vec<ISite> {
    loop {
        let mut seen = BTreeSet::new();
        let mut v = Vec::new();
        let mut tries = 0;
        while v.len() < n && tries < 100 * n {
            tries += 1;
            let p = (r.random_range(0..side), r.random_range(0..side));
            if seen.insert(p) {
                v.push(p);
            }
        }
        let noncollinear = v.len() >= 3 && (2..v.len()).any(|k| orient_i(v[0], v[1], v[k]) != 0);
        if noncollinear {
            return v;
        }
    }
}

/// Lattice sites as floats scaled by `unit` (a power of two, so exact).
pub fn to_points(sites: &[ISite], unit: f64) -> Vec<Point> {
    sites
        .iter()
        .map(|&(x, y)| Point::new(x as f64 * unit, y as f64 * unit))
        .collect()
}

const TAU: f64 = 1e-9;

/// Candidate points of the acceptance test for `v` against `earlier`.
pub fn acceptance_candidates(v: Point, earlier: &[Point]) -> Vec<Point> {
    let near: Vec<Point> = earlier.iter().copied().filter(|u| u.dist(v) < 2.0).collect();
    let mut c = vec![v];
    let circles = |a: Point, b: Point| -> Vec<Point> {
        let d = a.dist(b);
        if d == 0.0 || d > 2.0 {
            return Vec::new();
        }
        let m = a.lerp(b, 0.5);
        let h = (1.0 - d * d / 4.0).max(0.0).sqrt();
        let n = Point::new(-(b.y - a.y) / d, (b.x - a.x) / d);
        vec![m + n * h, m - n * h]
    };
    for (i, &u) in near.iter().enumerate() {
        c.extend(circles(v, u));
        // the point of the closed disk farthest from u
        let d = v.dist(u);
        if d > 0.0 {
            c.push(v + (v - u) * (1.0 / d));
        }
        for &w in &near[i + 1..] {
            c.extend(circles(u, w));
        }
    }
    c
}

/// Accept iff some candidate lies in the closed unit disk around `v` and
/// outside every open unit disk around an earlier point.
pub fn oracle_accepts(v: Point, earlier: &[Point]) -> bool {
    acceptance_candidates(v, earlier)
        .into_iter()
        .any(|x| x.dist2(v) <= 1.0 + TAU && earlier.iter().all(|u| u.dist2(x) >= 1.0 - TAU))
}

/// Least weight over every simple path from `a` to `b`, by depth-first
/// enumeration over an adjacency matrix.
pub fn enumerate_min_path(w: &[Vec<Option<f64>>], a: usize, b: usize) -> Option<f64> {
    fn go(
        w: &[Vec<Option<f64>>],
        v: usize,
        b: usize,
        seen: &mut Vec<bool>,
        acc: f64,
        best: &mut Option<f64>,
    ) {
        if v == b {
            if best.is_none_or(|x| acc < x) {
                *best = Some(acc);
            }
            return;
        }
        for u in 0..w.len() {
            if let Some(x) = w[v][u] {
                if !seen[u] {
                    seen[u] = true;
                    go(w, u, b, seen, acc + x, best);
                    seen[u] = false;
                }
            }
        }
    }
    let mut seen = vec![false; w.len()];
    seen[a] = true;
    let mut best = None;
    go(w, a, b, &mut seen, 0.0, &mut best);
    best
}

/// A saturated graph on `[0, side]^2` with the default margin.
pub fn saturated_graph(side: f64, delta_g: f64, seed: u64) -> AcceptedGraph {
    let window = Window::with_size(side, side).unwrap();
    let (_, accepted) = sample_and_accept(window, 1.0, DEFAULT_SLAB, seed).unwrap();
    assert!(accepted.saturated);
    AcceptedGraph::build(&accepted, delta_g).unwrap()
}
