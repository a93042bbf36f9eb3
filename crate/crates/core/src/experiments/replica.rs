//! Raw per-replica measurements. Everything that depends on the merged
//! estimates (`h`, `sigma`, `Delta_r`) is applied afterwards, so a replica is
//! a pure function of its seeds and the plan.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cylinder::cylinder_pairs;
use crate::fpp::{is_censored, sample_speeds, wandering, Dijkstra, PassageTime, SpeedDistribution};
use crate::geom::AcceptedGraph;
use crate::point::Point;
use crate::pointproc::{sample_and_accept, Window, DEFAULT_SLAB};
use crate::seed::{stream, SeedChain};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct PairPlan {
    pub r: f64,
    pub epsilon: f64,
    pub pairs: usize,
    pub half_width: f64,
    pub cone: bool,
}

/// What every replica measures.
#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub window: Window,
    pub speed: SpeedDistribution,
    pub delta_g: f64,
    pub axis_r: Vec<f64>,
    /// One pair set per cylinder width.
    pub fluctuation: Vec<PairPlan>,
    pub wandering: Option<PairPlan>,
    pub straightness_r: Vec<f64>,
    pub density_radii: Vec<f64>,
    pub density_centers: Vec<Point>,
}

impl Plan {
    fn needs_graph(&self) -> bool {
        !self.axis_r.is_empty()
            || !self.fluctuation.is_empty()
            || self.wandering.is_some()
            || !self.straightness_r.is_empty()
    }
}

/// `T(0, r e_1)` and its geodesic's distance from the axis.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AxisSample {
    pub time: f64,
    pub wandering: f64,
    pub censored: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PairSample {
    pub dist: f64,
    pub long: f64,
    pub time: f64,
    pub censored: bool,
}

/// Extent of one geodesic, enough to decide containment in any `G_{r,s}`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PathExtent {
    pub max_abs_y: f64,
    pub min_x: f64,
    pub max_x: f64,
    /// Distance from the line through the query points.
    pub wandering: f64,
    pub censored: bool,
}

/// Union of the geodesic vertices between `B_1(0)` and `B_1(r e_1)`.
#[derive(Clone, Debug)]
pub(crate) struct PathUnion {
    pub vertices: Vec<Point>,
    pub censored: bool,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct ReplicaData {
    pub axis: Vec<AxisSample>,
    pub fluctuation: Vec<Vec<PairSample>>,
    pub wandering: Vec<PathExtent>,
    pub straightness: Vec<PathUnion>,
    /// Per radius, per centre: `|V cap B_r(c)| / r^2`.
    pub density: Vec<Vec<f64>>,
}

fn to_time(t: PassageTime) -> f64 {
    t.to_f64()
}

pub(crate) fn run_replica(plan: &Plan, chain: SeedChain, index: u64) -> Result<ReplicaData> {
    let (_, accepted) = sample_and_accept(
        plan.window,
        1.0,
        DEFAULT_SLAB,
        chain.derive(stream::POINTS, index),
    )?;
    let mut data = ReplicaData {
        density: plan
            .density_radii
            .iter()
            .map(|&r| {
                plan.density_centers
                    .iter()
                    .map(|&c| {
                        let n = accepted.vertices.iter().filter(|v| v.dist2(c) <= r * r).count();
                        n as f64 / (r * r)
                    })
                    .collect()
            })
            .collect(),
        ..ReplicaData::default()
    };
    if !plan.needs_graph() {
        return Ok(data);
    }
    let mut graph = AcceptedGraph::build(&accepted, plan.delta_g)?;
    graph.seed_chain = Some(chain);
    let speeds = sample_speeds(&graph, plan.speed, chain.derive(stream::SPEEDS, index))?;
    let trusted = trusted_edges(&graph);
    let weight = |e: usize| trusted[e].then(|| speeds.weight(e));
    let mut dj: Dijkstra<PassageTime> = Dijkstra::new(graph.len());

    if !plan.axis_r.is_empty() {
        let source = graph.cell_of(Point::ORIGIN)?;
        let targets = plan
            .axis_r
            .iter()
            .map(|&r| graph.cell_of(Point::new(r, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        sweep(&mut dj, &graph, &weight, source, &targets);
        for (&t, &r) in targets.iter().zip(&plan.axis_r) {
            let path = dj.path_to(t).ok_or(Error::Disconnected(source, t))?;
            data.axis.push(AxisSample {
                time: to_time(dj.dist(t).unwrap()),
                wandering: wandering(&graph, &path, Point::ORIGIN, Point::new(r, 0.0)),
                censored: is_censored(&graph, &path),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(chain.derive(stream::PAIRS, index));
    for p in &plan.fluctuation {
        let mut out = Vec::with_capacity(p.pairs);
        for (x, y) in cylinder_pairs(p.r, p.half_width, p.epsilon, p.pairs, p.cone, &mut rng) {
            let (t, path) = query(&mut dj, &graph, &weight, x, y)?;
            out.push(PairSample {
                dist: x.dist(y),
                long: y.x - x.x,
                time: t,
                censored: is_censored(&graph, &path),
            });
        }
        data.fluctuation.push(out);
    }
    if let Some(p) = &plan.wandering {
        for (x, y) in cylinder_pairs(p.r, p.half_width, p.epsilon, p.pairs, p.cone, &mut rng) {
            let (_, path) = query(&mut dj, &graph, &weight, x, y)?;
            let pts = path.iter().map(|&v| graph.vertices[v as usize]);
            let (mut ay, mut lo, mut hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
            for q in pts {
                ay = ay.max(q.y.abs());
                lo = lo.min(q.x);
                hi = hi.max(q.x);
            }
            data.wandering.push(PathExtent {
                max_abs_y: ay,
                min_x: lo,
                max_x: hi,
                wandering: wandering(&graph, &path, x, y),
                censored: is_censored(&graph, &path),
            });
        }
    }

    if !plan.straightness_r.is_empty() {
        let ball = |c: Point| -> Vec<usize> {
            let mut v: Vec<usize> = graph
                .vertices_near(c, 1.0)
                .into_iter()
                .filter(|&i| graph.vertices[i].dist2(c) <= 1.0)
                .collect();
            v.sort_unstable();
            v
        };
        let sources = ball(Point::ORIGIN);
        let targets: Vec<Vec<usize>> = plan
            .straightness_r
            .iter()
            .map(|&r| ball(Point::new(r, 0.0)))
            .collect();
        let all: Vec<usize> = targets.iter().flatten().copied().collect();
        let mut unions: Vec<(Vec<u32>, bool)> = vec![(Vec::new(), false); targets.len()];
        for &s in &sources {
            sweep(&mut dj, &graph, &weight, s, &all);
            for (k, ts) in targets.iter().enumerate() {
                for &t in ts {
                    let path = dj.path_to(t).ok_or(Error::Disconnected(s, t))?;
                    unions[k].1 |= is_censored(&graph, &path);
                    unions[k].0.extend(path);
                }
            }
        }
        for (mut vs, censored) in unions {
            vs.sort_unstable();
            vs.dedup();
            data.straightness.push(PathUnion {
                vertices: vs.iter().map(|&v| graph.vertices[v as usize]).collect(),
                censored,
            });
        }
    }
    Ok(data)
}

/// Distance inside the sampled region's edge beyond which the graph agrees
/// with the one of the unbounded process.
pub(crate) const TRUSTED_INSET: f64 = 3.0;

/// Edges with both endpoints in the core expanded by `margin - 3`. Outside
/// it the acceptance rule misses points beyond the sampled region and the
/// hull produces long artificial edges, which geodesics would exploit.
pub(crate) fn trusted_edges(graph: &AcceptedGraph) -> Vec<bool> {
    let w = graph.window;
    let region = w.core().expand((w.margin - TRUSTED_INSET).max(0.0));
    graph
        .edges
        .iter()
        .map(|e| {
            region.contains(graph.vertices[e.a as usize]) && region.contains(graph.vertices[e.b as usize])
        })
        .collect()
}

/// Single-source run that stops once every target is settled.
fn sweep(
    dj: &mut Dijkstra<PassageTime>,
    graph: &AcceptedGraph,
    weight: &impl Fn(usize) -> Option<PassageTime>,
    source: usize,
    targets: &[usize],
) {
    let mut pending = vec![false; graph.len()];
    let mut left = 0usize;
    for &t in targets {
        if !pending[t] {
            pending[t] = true;
            left += 1;
        }
    }
    dj.run(graph, weight, &[source], |v, _| {
        if pending[v] {
            pending[v] = false;
            left -= 1;
        }
        left == 0
    });
}

fn query(
    dj: &mut Dijkstra<PassageTime>,
    graph: &AcceptedGraph,
    weight: &impl Fn(usize) -> Option<PassageTime>,
    x: Point,
    y: Point,
) -> Result<(f64, Vec<u32>)> {
    let a = graph.cell_of(x)?;
    let b = graph.cell_of(y)?;
    dj.run(graph, weight, &[a], |v, _| v == b);
    let t = dj.dist(b).ok_or(Error::Disconnected(a, b))?;
    Ok((to_time(t), dj.path_to(b).unwrap()))
}
