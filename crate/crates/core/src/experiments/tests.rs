use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::analysis::HCurve;
use super::*;
use crate::point::Point;
use crate::scaling::SigmaCurve;
use crate::Error;

const TINY: &str = r#"
schema = "fpplab.experiment/1"
kind = "suite"
name = "tiny"
seed = 5
replicas = 20
pilot_replicas = 20

[window]
length = 40
half_height = 14

[hmu]
r = [10, 15, 20, 25, 30, 35, 40]
fit_min = 10

[fluctuation]
r = 20
k = [1]
pairs = 8

[wandering]
r = 20
pairs = 8

[straightness]
r = [10, 20]

[density]
radii = [3, 5]
centers = 2
"#;

fn tiny() -> ExperimentConfig {
    ExperimentConfig::from_toml(TINY).unwrap()
}

#[test]
fn config_defaults_and_errors() {
    let cfg = ExperimentConfig::from_toml(
        r#"
schema = "fpplab.experiment/1"
kind = "hmu"
seed = 1
replicas = 20
[window]
length = 100
half_height = 20
"#,
    )
    .unwrap();
    assert_eq!(cfg.hmu.r, step_grid(10.0, 100.0, 10.0));
    assert_eq!(cfg.pilot_replicas, 40);
    assert_eq!(cfg.window.pad, 10.0);
    assert_eq!(cfg.fit_max(), 100.0);

    let wrong = TINY.replace("fpplab.experiment/1", "fpplab.experiment/0");
    assert!(matches!(
        ExperimentConfig::from_toml(&wrong),
        Err(Error::Schema { .. })
    ));
    let few = TINY.replace("replicas = 20\npilot", "replicas = 19\npilot");
    assert!(matches!(ExperimentConfig::from_toml(&few), Err(Error::Config(_))));
    let unknown = TINY.replace("name = \"tiny\"", "nme = \"tiny\"");
    assert!(matches!(
        ExperimentConfig::from_toml(&unknown),
        Err(Error::Config(_))
    ));
    let unsorted = TINY.replace("r = [10, 20]", "r = [20, 10]");
    assert!(matches!(
        ExperimentConfig::from_toml(&unsorted),
        Err(Error::Config(_))
    ));
    let far = TINY.replace("[fluctuation]\nr = 20", "[fluctuation]\nr = 60");
    assert!(matches!(ExperimentConfig::from_toml(&far), Err(Error::Config(_))));
}

#[test]
fn step_grid_is_inclusive() {
    assert_eq!(step_grid(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(step_grid(3.0, 4.6, 0.02).len(), 81);
}

fn flat_curve(sigma: f64) -> SigmaCurve {
    SigmaCurve::from_pairs(&[(2.0, sigma), (1000.0, sigma)], "test").unwrap()
}

#[test]
fn irs_branches() {
    let r: f64 = 100.0;
    let (sigma, delta) = (2.0, 10.0);
    let b = r.ln().sqrt();
    let (lo, hi, br) = irs_interval(r, b - 1e-6, sigma, delta, 1.0);
    assert_eq!(br, IrsBranch::Log);
    let slack = (b - 1e-6).powi(2) * sigma * r.ln();
    assert!((hi - r - slack).abs() < 1e-9 && (lo + slack).abs() < 1e-9);
    let (_, hi, br) = irs_interval(r, b + 1e-6, sigma, delta, 1.0);
    assert_eq!(br, IrsBranch::Square);
    assert!((hi - r - (b + 1e-6).powi(2) * sigma).abs() < 1e-9);
    let (_, hi, br) = irs_interval(r, 11.0, sigma, delta, 1.0);
    assert_eq!(br, IrsBranch::Linear);
    assert_eq!(hi, r + 110.0);
    assert_eq!(irs_interval(r, 10.0, sigma, delta, 1.0).2, IrsBranch::Square);
}

#[test]
fn g_rs_membership() {
    let c = flat_curve(1.0);
    let r = 100.0;
    let delta = (r * 1.0f64).sqrt();
    for s in [0.1, 0.5, 1.0, 3.0, 20.0] {
        assert!(in_g_rs(Point::new(r / 2.0, 0.0), r, s, &c, 1.0).unwrap());
        assert!(!in_g_rs(Point::new(r / 2.0, s * delta + 1.0), r, s, &c, 1.0).unwrap());
    }
    assert!(in_g_rs(Point::new(r + 1.0, 0.0), r, 1.0, &c, 1.0).unwrap());
    assert!(!in_g_rs(Point::new(r + 10.0, 0.0), r, 1.0, &c, 1.0).unwrap());
    assert!(in_g_rs(Point::new(0.0, 0.0), r, 0.0, &c, 1.0).is_err());
    assert!(in_g_rs(Point::new(0.0, 0.0), 5000.0, 1.0, &c, 1.0).is_err());
}

#[test]
fn cylinder_pairs_respect_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cone in [false, true] {
        let pairs = cylinder_pairs(50.0, 8.0, 0.25, 64, cone, &mut rng);
        assert_eq!(pairs.len(), 64);
        for (x, y) in &pairs {
            for p in [x, y] {
                assert!(p.x >= 0.0 && p.x <= 50.0 + 1e-9, "{p:?}");
                assert!(p.y.abs() <= 8.0, "{p:?}");
            }
            let d = *y - *x;
            assert!(d.x >= 12.5 - 1e-9);
            if cone {
                assert!(d.y.abs() <= d.x + 1e-9);
            }
        }
        // one displacement per stratum
        let mut strata: Vec<usize> = pairs
            .iter()
            .map(|(x, y)| (((y.x - x.x) - 12.5) / 37.5 * 64.0) as usize)
            .collect();
        strata.sort_unstable();
        assert_eq!(strata, (0..64).collect::<Vec<_>>());
    }
    let a = cylinder_pairs(50.0, 8.0, 0.25, 16, true, &mut ChaCha8Rng::seed_from_u64(9));
    let b = cylinder_pairs(50.0, 8.0, 0.25, 16, true, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
}

#[test]
fn tail_report_basics() {
    let values: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
    let grid = step_grid(0.0, 6.0, 0.5);
    let t = TailReport::from_values("x", "g", &grid, &values, 3);
    assert_eq!(t.rows[0].p, 1.0);
    assert_eq!(t.rows[0].n_total, 53);
    assert_eq!(t.rows[0].n_used(), 50);
    assert_eq!(t.rows.last().unwrap().exceed, 0);
    assert!(t.monotone_raw && t.passes());
    for r in &t.rows {
        assert!(r.wilson_lo <= r.p && r.p <= r.wilson_hi);
        assert!((0.0..=1.0).contains(&r.wilson_lo) && (0.0..=1.0).contains(&r.wilson_hi));
        assert_eq!(r.p, r.p_isotonic);
    }
}

#[test]
fn tail_report_flags_increases() {
    let grid = [0.0, 1.0, 2.0];
    // a small wiggle stays inside the Wilson bands
    let soft = TailReport::from_counts("x", "g", &grid, 100, 0, |i| ([60, 50, 52][i], String::new()));
    assert!(!soft.monotone_raw && soft.passes());
    assert_eq!(soft.rows[1].p_isotonic, soft.rows[2].p_isotonic);
    let hard = TailReport::from_counts("x", "g", &grid, 100, 0, |i| ([60, 5, 95][i], String::new()));
    assert_eq!(hard.hard_violations, vec![(0.0, 2.0), (1.0, 2.0)]);
    assert!(!hard.passes());
}

#[test]
fn tail_shape_of_exponential_and_gaussian() {
    let grid = step_grid(0.0, 10.0, 0.25);
    let n = 1_000_000usize;
    let exp = TailReport::from_counts("x", "g", &grid, n, 0, |i| {
        (((-grid[i]).exp() * n as f64) as usize, String::new())
    });
    assert!((exp.shape.log_slope.unwrap() + 1.0).abs() < 0.01);
    assert_eq!(exp.shape.linear_or_steeper, Some(true));
    let gauss = TailReport::from_counts("x", "g", &grid, n, 0, |i| {
        (
            ((-grid[i] * grid[i] / 2.0).exp() * n as f64) as usize,
            String::new(),
        )
    });
    let s = gauss.shape;
    assert!(s.second_half_slope.unwrap() < s.first_half_slope.unwrap());
    assert_eq!(s.linear_or_steeper, Some(true));
}

#[test]
fn h_curve_interpolates() {
    let h = HCurve::new(&[10.0, 20.0], &[3.0, 5.0]);
    assert_eq!(h.eval(0.0), 0.0);
    assert_eq!(h.eval(5.0), 1.5);
    assert_eq!(h.eval(15.0), 4.0);
    assert_eq!(h.eval(30.0), 7.0);
}

#[test]
fn tables_format_numbers() {
    assert_eq!(num(0.1), "0.1");
    assert_eq!(num(f64::NAN), "nan");
    let mut t = Table::new("checks", CHECK_COLUMNS);
    t.push(vec![
        "a".into(),
        num(1.0),
        num(2.5),
        "x,y".into(),
        "".into(),
        "0".into(),
        "true".into(),
    ]);
    let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
    assert_eq!(s, "check,r,s,lhs,rhs,slack,pass\na,1,2.5,\"x,y\",,0,true\n");
}

#[test]
fn tiny_suite_is_deterministic_across_jobs() {
    let cfg = tiny();
    let a = run(&cfg, 1).unwrap();
    let b = run(&cfg, 3).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.tables, b.tables);
    let names: Vec<&str> = a.tables.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "hmu",
            "checks",
            "fluctuation",
            "wandering",
            "straightness",
            "density"
        ]
    );
    for t in &a.tables {
        let cols = CSV_FILES.iter().find(|(n, _)| *n == t.name).unwrap().1;
        assert_eq!(t.header, cols);
    }
    let hmu = a.table("hmu").unwrap();
    for row in &hmu.rows {
        let total: usize = row[1].parse().unwrap();
        let censored: usize = row[2].parse().unwrap();
        assert_eq!(total, 20);
        assert!(censored <= total);
    }
    for t in ["fluctuation", "wandering", "straightness", "density"] {
        for row in &a.table(t).unwrap().rows {
            let (total, censored, used): (usize, usize, usize) = (
                row[2].parse().unwrap(),
                row[3].parse().unwrap(),
                row[4].parse().unwrap(),
            );
            assert_eq!(used + censored, total);
        }
    }
    // t = 0 and a tiny density threshold are exceeded by every replica
    let first = &a.table("fluctuation").unwrap().rows[0];
    assert_eq!(first[6], "1");
    let dir = tempfile::tempdir().unwrap();
    let files = a.write(dir.path()).unwrap();
    assert_eq!(files.len(), 8);
    assert!(files.iter().all(|f| f.exists()));
}

#[test]
fn density_alone_builds_no_graph() {
    let mut cfg = tiny();
    cfg.kind = ExperimentKind::Density;
    let out = run(&cfg, 2).unwrap();
    assert!(out.sigma.is_none());
    assert_eq!(out.tables.len(), 1);
    let d = out.summary.density.unwrap();
    // the accepted set has density about 1.14 per unit area
    for (_, m) in d.means {
        assert!(m > 2.5 && m < 4.5, "{m}");
    }
}

#[test]
fn narrow_window_is_rejected_after_pilot() {
    let mut cfg = tiny();
    cfg.window.half_height = 9.0;
    cfg.fluctuation.k = vec![4.0];
    let e = run(&cfg, 1).unwrap_err();
    assert!(matches!(e, Error::Config(_)), "{e}");
}

#[test]
fn every_column_is_documented() {
    for (file, cols) in CSV_FILES {
        let docs = column_docs(file).unwrap();
        let names: Vec<&str> = docs.iter().map(|(c, _)| *c).collect();
        assert_eq!(&names, cols, "{file}");
    }
    assert_eq!(csv_schema()["files"].as_array().unwrap().len(), CSV_FILES.len());
}
