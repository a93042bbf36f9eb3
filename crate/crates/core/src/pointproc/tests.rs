use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn stp(pos: Point, time: f64) -> SpaceTimePoint {
    SpaceTimePoint { pos, time }
}

fn small_window() -> Window {
    Window::new(p(0.0, 0.0), p(4.0, 4.0), 3.0).unwrap()
}

fn sample_of(points: Vec<(Point, f64)>) -> SpaceTimeSample {
    let pts = points.into_iter().map(|(x, t)| stp(x, t)).collect();
    SpaceTimeSample::from_points(small_window(), pts, 1.0, 0).unwrap()
}

#[test]
fn poisson_counts_match_mean_and_shape() {
    let region = Rect::new(p(0.0, 0.0), p(10.0, 10.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000;
    let counts: Vec<usize> = (0..n)
        .map(|_| sample_slab(region, 1.0, 0.0, 1.0, &mut rng).len())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    assert!(
        (mean - 100.0).abs() < 3.0 * 10.0 / (n as f64).sqrt(),
        "mean {mean}"
    );
    // chi-square over bins of width 5 between 80 and 120 plus two tails
    let pmf = |k: usize| {
        let lf: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
        (k as f64 * 100f64.ln() - 100.0 - lf).exp()
    };
    let edges: Vec<usize> = (80..=120).step_by(5).collect();
    let mut expected = Vec::new();
    let mut observed = Vec::new();
    let below: f64 = (0..edges[0]).map(pmf).sum();
    expected.push(below);
    observed.push(counts.iter().filter(|&&c| c < edges[0]).count());
    for w in edges.windows(2) {
        expected.push((w[0]..w[1]).map(pmf).sum());
        observed.push(counts.iter().filter(|&&c| c >= w[0] && c < w[1]).count());
    }
    let last = *edges.last().unwrap();
    expected.push(1.0 - expected.iter().sum::<f64>());
    observed.push(counts.iter().filter(|&&c| c >= last).count());
    let chi2: f64 = expected
        .iter()
        .zip(&observed)
        .map(|(e, &o)| {
            let e = e * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 9 degrees of freedom; 99.9% quantile is 27.88
    assert!(chi2 < 27.88, "chi2 {chi2}");
}

#[test]
fn slab_times_are_sorted_and_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts = sample_slab(Rect::new(p(0.0, 0.0), p(5.0, 5.0)), 2.0, 3.0, 4.0, &mut rng);
    assert!(!pts.is_empty());
    for w in pts.windows(2) {
        assert!(w[1].time > w[0].time);
    }
    assert!(pts.iter().all(|q| q.time > 3.0 && q.time <= 4.0));
}

#[test]
fn zero_area_window_gives_empty_sample() {
    let w = Window::new(p(1.0, 1.0), p(1.0, 1.0), 0.0).unwrap();
    let (s, a) = sample_and_accept(w, 1.0, 1.0, 5).unwrap();
    assert!(s.is_empty());
    assert!(a.vertices.is_empty());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(Window::new(p(1.0, 0.0), p(0.0, 1.0), 7.0).is_err());
    assert!(Window::new(p(0.0, 0.0), p(1.0, 1.0), -1.0).is_err());
    assert!(sample_space_time(small_window(), 0.0, 1.0, 1).is_err());
    assert!(sample_space_time(small_window(), 1.0, -1.0, 1).is_err());
    let tied = vec![stp(p(1.0, 1.0), 0.5), stp(p(2.0, 1.0), 0.5)];
    assert!(matches!(
        SpaceTimeSample::from_points(small_window(), tied, 1.0, 0),
        Err(Error::UnsortedTimes { .. })
    ));
    let outside = vec![stp(p(100.0, 1.0), 0.5)];
    assert!(SpaceTimeSample::from_points(small_window(), outside, 1.0, 0).is_err());
}

#[test]
fn sampling_is_deterministic_and_saturates() {
    let w = Window::with_size(6.0, 5.0).unwrap();
    let (s1, a1) = sample_and_accept(w, 1.0, 1.0, 77).unwrap();
    let (s2, a2) = sample_and_accept(w, 1.0, 1.0, 77).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(a1, a2);
    assert!(a1.saturated);
    assert_eq!(accept(&s1).unwrap(), a1);
    assert!(is_saturated(&s1, s1.t_stop));
    let (s3, _) = sample_and_accept(w, 1.0, 1.0, 78).unwrap();
    assert_ne!(s1, s3);
    let region = w.sample_region();
    assert!(s1.points.iter().all(|q| region.contains(q.pos)));
}

#[test]
fn first_and_lone_predecessor_are_accepted() {
    let v = p(3.0, 3.0);
    for d in [1e-3, 0.3, 1.0, 1.9] {
        let a = accept(&sample_of(vec![(v + p(d, 0.0), 0.1), (v, 0.2)])).unwrap();
        assert_eq!(a.vertices.len(), 2, "d = {d}");
    }
}

#[test]
fn three_blockers_reject() {
    let v = p(3.0, 3.0);
    let mut pts = Vec::new();
    for (k, deg) in [0.0f64, 120.0, 240.0].iter().enumerate() {
        let th = deg.to_radians();
        pts.push((v + p(th.cos(), th.sin()) * 0.5, 0.1 * (k + 1) as f64));
    }
    pts.push((v, 1.0));
    let a = accept(&sample_of(pts.clone())).unwrap();
    assert_eq!(a.vertices.len(), 3);
    assert!(!a.vertices.contains(&v));
    // two blockers are not enough
    pts.remove(2);
    let a = accept(&sample_of(pts)).unwrap();
    assert!(a.vertices.contains(&v));
}

#[test]
fn prefix_stability_and_locality() {
    let w = Window::with_size(5.0, 5.0).unwrap();
    let s = sample_space_time(w, 1.0, 1.0, 3).unwrap();
    let full = accept(&s).unwrap();
    let mut f = AcceptanceFilter::new(w);
    let k = s.len() / 3;
    let mut out = Vec::new();
    for q in &s.points[..k] {
        if f.push(q.pos, q.time).unwrap() {
            out.push(q.pos);
        }
    }
    let mut g = f.clone();
    for q in &s.points[k..] {
        if g.push(q.pos, q.time).unwrap() {
            out.push(q.pos);
        }
    }
    assert_eq!(out, full.vertices);
    // the decision for a point only depends on earlier points within 2
    let target = s.len() - 1;
    let v = s.points[target].pos;
    let near: Vec<SpaceTimePoint> = s.points[..=target]
        .iter()
        .filter(|q| q.pos.dist(v) < 2.0)
        .copied()
        .collect();
    let local = accept(&SpaceTimeSample::from_points(w, near, 1.0, 3).unwrap()).unwrap();
    assert_eq!(local.vertices.contains(&v), full.vertices.contains(&v));
}

#[test]
fn saturation_checks() {
    let w = small_window();
    let empty = SpaceTimeSample::from_points(w, Vec::new(), 1.0, 0).unwrap();
    assert!(!is_saturated(&empty, 10.0));
    let region = w.sample_region();
    let mut pts = Vec::new();
    let n = (region.width() / 0.5).round() as usize;
    let mut t = 0.0;
    for j in 0..=n {
        for i in 0..=n {
            t += 1e-3;
            pts.push(stp(region.lo + p(i as f64 * 0.5, j as f64 * 0.5), t));
        }
    }
    let s = SpaceTimeSample::from_points(w, pts, 1.0, 0).unwrap();
    assert!(is_saturated(&s, t));
    assert!(!is_saturated(&s, t / 2.0));
}

#[test]
fn hole_property_on_grid_and_single_vertex() {
    let w = Window::new(p(0.0, 0.0), p(4.0, 4.0), 2.0).unwrap();
    let region = w.sample_region();
    let mut vertices = Vec::new();
    for j in 0..=16 {
        for i in 0..=16 {
            vertices.push(region.lo + p(i as f64 * 0.5, j as f64 * 0.5));
        }
    }
    let a = AcceptedSet {
        window: w,
        times: (1..=vertices.len()).map(|i| i as f64).collect(),
        vertices,
        parent_sample_seed: 0,
        saturated: true,
    };
    let r = verify_hole_property(&a, 1.0).unwrap();
    assert!((r.max_empty_radius - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    assert!(r.pass);
    let single = AcceptedSet {
        vertices: vec![p(2.0, 2.0)],
        times: vec![1.0],
        ..a.clone()
    };
    let r = verify_hole_property(&single, 1.0).unwrap();
    assert!(!r.pass);
    assert!((r.max_empty_radius - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    let none = AcceptedSet {
        vertices: Vec::new(),
        times: Vec::new(),
        ..a
    };
    assert!(verify_hole_property(&none, 1.0).is_err());
}

#[test]
fn saturated_samples_have_no_holes() {
    for seed in 0..5 {
        let w = Window::with_size(8.0, 8.0).unwrap();
        let (_, a) = sample_and_accept(w, 1.0, 1.0, seed).unwrap();
        let r = verify_hole_property(&a, 1.0).unwrap();
        assert!(r.pass, "seed {seed}: {r:?}");
        assert!(r.max_empty_radius > 0.5);
    }
}

#[test]
fn random_filter_agrees_with_direct_candidate_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = small_window();
    let mut pts = Vec::new();
    for k in 0..400 {
        pts.push(stp(
            p(rng.random::<f64>() * 6.0, rng.random::<f64>() * 6.0),
            (k + 1) as f64,
        ));
    }
    let s = SpaceTimeSample::from_points(w, pts.clone(), 1.0, 0).unwrap();
    let a = accept(&s).unwrap();
    let mut direct = Vec::new();
    for (i, q) in pts.iter().enumerate() {
        let nbrs: Vec<Point> = pts[..i]
            .iter()
            .map(|u| u.pos)
            .filter(|u| u.dist(q.pos) < 2.0)
            .collect();
        if coverage::candidate_free(q.pos, &nbrs) {
            direct.push(q.pos);
        }
    }
    assert_eq!(a.vertices, direct);
}
