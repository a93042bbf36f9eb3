use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::ops::Add;

use crate::geom::AcceptedGraph;

/// Euclidean length ordered by `total_cmp`, for shortest paths on `|e|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Length(pub f64);

impl Eq for Length {}

impl PartialOrd for Length {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Length {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl Add for Length {
    type Output = Length;
    fn add(self, o: Length) -> Length {
        Length(self.0 + o.0)
    }
}

const NO_PRED: u32 = u32::MAX;

/// Reusable shortest-path workspace. Queue ties are broken by vertex index.
#[derive(Clone, Debug)]
pub struct Dijkstra<W> {
    dist: Vec<W>,
    pred: Vec<u32>,
    stamp: Vec<u32>,
    done: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Reverse<(W, u32)>>,
}

impl<W: Copy + Ord + Default + Add<Output = W>> Dijkstra<W> {
    pub fn new(n: usize) -> Self {
        Dijkstra {
            dist: vec![W::default(); n],
            pred: vec![NO_PRED; n],
            stamp: vec![0; n],
            done: vec![0; n],
            epoch: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        if self.dist.len() != n {
            *self = Dijkstra::new(n);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.done.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    /// Runs from `sources` (all at distance zero). `weight(e)` returns the
    /// weight of edge `e`, or `None` to ignore it. `settled(v)` is called as
    /// each vertex is finalised; returning `true` stops the search.
    pub fn run(
        &mut self,
        graph: &AcceptedGraph,
        weight: impl Fn(usize) -> Option<W>,
        sources: &[usize],
        mut settled: impl FnMut(usize, W) -> bool,
    ) {
        self.reset(graph.len());
        let ep = self.epoch;
        for &s in sources {
            if self.stamp[s] != ep {
                self.stamp[s] = ep;
                self.dist[s] = W::default();
                self.pred[s] = NO_PRED;
                self.heap.push(Reverse((W::default(), s as u32)));
            }
        }
        while let Some(Reverse((d, v))) = self.heap.pop() {
            let v = v as usize;
            if self.done[v] == ep || d > self.dist[v] {
                continue;
            }
            self.done[v] = ep;
            if settled(v, d) {
                return;
            }
            for &(u, e) in graph.neighbors(v) {
                let u = u as usize;
                if self.done[u] == ep {
                    continue;
                }
                let Some(w) = weight(e as usize) else { continue };
                let nd = d + w;
                if self.stamp[u] != ep || nd < self.dist[u] {
                    self.stamp[u] = ep;
                    self.dist[u] = nd;
                    self.pred[u] = v as u32;
                    self.heap.push(Reverse((nd, u as u32)));
                }
            }
        }
    }

    /// Final distance of `v`, if it was settled in the last run.
    pub fn dist(&self, v: usize) -> Option<W> {
        (self.done[v] == self.epoch).then(|| self.dist[v])
    }

    /// Vertex sequence from a source to `v`, if `v` was settled.
    pub fn path_to(&self, v: usize) -> Option<Vec<u32>> {
        self.dist(v)?;
        let mut path = vec![v as u32];
        let mut cur = v;
        while self.pred[cur] != NO_PRED {
            cur = self.pred[cur] as usize;
            path.push(cur as u32);
        }
        path.reverse();
        Some(path)
    }
}
