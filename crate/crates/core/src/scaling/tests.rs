use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::*;
use crate::point::Point;
use crate::Error;

fn power_curve(c: f64, chi: f64, rs: &[f64]) -> SigmaCurve {
    let pairs: Vec<(f64, f64)> = rs.iter().map(|&r| (r, c * r.powf(chi))).collect();
    SigmaCurve::from_pairs(&pairs, "synthetic").unwrap()
}

const RS: [f64; 8] = [20.0, 40.0, 60.0, 100.0, 140.0, 200.0, 250.0, 300.0];

#[test]
fn sigma_estimates() {
    let constant = vec![(10.0, vec![3.0; 30])];
    assert!(matches!(
        estimate_sigma(&constant, "t"),
        Err(Error::DegenerateCurve(_))
    ));
    assert!(matches!(
        estimate_sigma(&[(10.0, vec![1.0, 2.0])], "t"),
        Err(Error::Insufficient(_))
    ));
    let two: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }).collect();
    let c = estimate_sigma(&[(5.0, two)], "t").unwrap();
    let e = c.entries[0];
    assert!((e.sigma - 1.0).abs() < 3.0 * e.stderr + 0.01, "{e:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<(f64, Vec<f64>)> = RS
        .iter()
        .map(|&r| {
            let d = Normal::new(0.8 * r, r.powf(1.0 / 3.0)).unwrap();
            (r, (0..400).map(|_| d.sample(&mut rng)).collect())
        })
        .collect();
    let curve = estimate_sigma(&samples, "normal").unwrap();
    for e in &curve.entries {
        assert!((e.sigma - e.r.powf(1.0 / 3.0)).abs() < 3.0 * e.stderr, "{e:?}");
    }
}

#[test]
fn chi_of_exact_power_laws() {
    let f = fit_chi(&power_curve(1.0, 1.0 / 3.0, &RS)).unwrap();
    assert!((f.chi_hat - 1.0 / 3.0).abs() < 1e-12);
    let g = fit_chi(&power_curve(2.0, 0.4, &RS)).unwrap();
    assert!((g.chi_hat - 0.4).abs() < 1e-12);
    assert!((g.intercept - 2f64.ln()).abs() < 1e-10);
    assert!(fit_chi(&power_curve(1.0, 0.3, &RS[..3])).is_err());
}

#[test]
fn chi_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut covered = 0;
    for _ in 0..100 {
        let samples: Vec<(f64, Vec<f64>)> = RS
            .iter()
            .map(|&r| {
                let d = Normal::new(0.0, r.powf(0.33)).unwrap();
                (r, (0..100).map(|_| d.sample(&mut rng)).collect())
            })
            .collect();
        let f = fit_chi(&estimate_sigma(&samples, "cov").unwrap()).unwrap();
        if f.ci95.0 <= 0.33 && 0.33 <= f.ci95.1 {
            covered += 1;
        }
    }
    assert!(covered >= 90, "coverage {covered}/100");
}

#[test]
fn delta_values() {
    let c = power_curve(1.0, 1.0 / 3.0, &[10.0, 100.0, 1000.0]);
    assert!((delta_of(100.0, &c).unwrap() - 100f64.powf(2.0 / 3.0)).abs() < 1e-9);
    let k = SigmaCurve::from_pairs(&[(1.0, 2.0), (50.0, 2.0)], "const").unwrap();
    assert!((delta_of(8.0, &k).unwrap() - 4.0).abs() < 1e-12);
    let d30 = delta_of(30.0, &c).unwrap();
    assert!(d30 > delta_of(10.0, &c).unwrap() && d30 < delta_of(100.0, &c).unwrap());
    assert!(delta_of(5000.0, &c).is_err());
    for e in &c.entries {
        let d = delta_of(e.r, &c).unwrap();
        assert!((d * d - e.r * e.sigma).abs() <= 1e-12 * d * d);
    }
}

#[test]
fn envelope_examples() {
    let inc = power_curve(1.0, 0.3, &RS);
    let env = monotone_envelope(&inc);
    for (a, b) in inc.entries.iter().zip(&env.entries) {
        assert!(b.sigma >= a.sigma && b.sigma <= a.sigma * (1.0 + 1e-9));
    }
    let dip =
        SigmaCurve::from_pairs(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 2.5), (5.0, 4.0)], "d").unwrap();
    let env = monotone_envelope(&dip);
    assert!(env.is_strictly_increasing());
    for e in &env.entries[1..4] {
        assert!((e.sigma - 3.0).abs() < 3e-9);
    }
}

#[test]
fn powerlike_examples() {
    let params = PowerlikeParams {
        chi: 1.0 / 3.0,
        chi1: 0.2,
        chi2: 0.45,
        c21: 1.0,
        c22: 1.0,
        c23: 1.0,
    };
    let rep = powerlike_check(&power_curve(1.0, 1.0 / 3.0, &RS), &params).unwrap();
    assert!(rep.violations.is_empty());
    assert_eq!(rep.pairs_checked, RS.len() * (RS.len() + 1) / 2);
    let mut pairs: Vec<(f64, f64)> = RS.iter().map(|&r| (r, r.powf(1.0 / 3.0))).collect();
    for p in &mut pairs[4..] {
        p.1 *= 10.0;
    }
    let jump = SigmaCurve::from_pairs(&pairs, "jump").unwrap();
    let rep = powerlike_check(&jump, &params).unwrap();
    assert!(!rep.violations.is_empty());
    assert!(rep.tightest_c23 > 5.0);
    let bad = PowerlikeParams { chi1: 0.5, ..params };
    assert!(powerlike_check(&jump, &bad).is_err());
}

fn samples_from(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..60)
        .map(|i| {
            let r = 2.0 * 1.15f64.powi(i);
            (r, f(r))
        })
        .collect()
}

#[test]
fn majorant_of_exact_power_is_itself() {
    let s = samples_from(|r| r.powf(0.3));
    let env = sublin_majorant(&s, 0.3, 1.0, 0.05).unwrap();
    assert!(env.betas.iter().all(|b| b.abs() < 1e-12));
    for &(r, rho) in &s {
        assert!((env.rho_tilde(r) - rho).abs() < 1e-9 * rho);
    }
}

#[test]
fn majorant_flat_tops_a_bump() {
    let s = samples_from(|r| {
        let bump = if (20.0..60.0).contains(&r) { 1.5 } else { 1.0 };
        r.powf(0.3) * bump
    });
    let m = default_block_base(&s, 0.3, 0.1).unwrap();
    let env = sublin_majorant(&s, 0.3, m, 0.1).unwrap();
    assert!(env.max_slope <= 0.05);
    // pointwise majorant of the log-log interpolant on a fine grid
    for i in 0..2000 {
        let r = 2.0 * (1.0 + i as f64 * 0.002).powi(2).powf(2.0);
        let r = r.min(s[s.len() - 1].0);
        let k = s.partition_point(|x| x.0 <= r).clamp(1, s.len() - 1);
        let (a, b) = (s[k - 1], s[k]);
        let lr = a.1.ln() + (b.1.ln() - a.1.ln()) * (r.ln() - a.0.ln()) / (b.0.ln() - a.0.ln());
        assert!(env.rho_tilde(r).ln() >= lr - 1e-12, "r = {r}");
    }
    let rep = powerlike_check(&env.as_curve().unwrap(), &env.params()).unwrap();
    assert!(rep.violations.is_empty());
    // too small a block base cannot absorb the bump
    assert!(matches!(
        sublin_majorant(&s, 0.3, 0.05, 0.1),
        Err(Error::SlopeBound { .. })
    ));
}

fn straight_spec() -> StraightnessSpec {
    let rs: Vec<f64> = (0..40).map(|i| 1.25f64.powi(i)).collect();
    StraightnessSpec::new(power_curve(1.0, 1.0 / 3.0, &rs), 2.0, 0.45).unwrap()
}

#[test]
fn straightness_examples() {
    let sp = straight_spec();
    let r = 200.0;
    assert_eq!(sp.d_r(Point::new(r / 4.0, 0.0), r), 0.0);
    let u = Point::new(-3.0, 2.0);
    assert_eq!(sp.d_r(u, r), sp.phi(3.0));
    // the cylinder branch wins once the transverse offset dominates
    for s in [10.0, 50.0, 300.0, 2000.0] {
        let u = Point::new(0.5 * s, s);
        assert!((sp.d(u) - sp.phi(s)).abs() <= 1e-12 * sp.phi(s), "s = {s}");
    }
    let mut prev = 0.0;
    for i in 1..500 {
        let s = i as f64 * 0.7;
        let v = sp.phi(s);
        assert!(v > prev);
        prev = v;
        assert!(sp.sigma_star(s) <= sp.sigma(s) * (1.0 + 1e-12));
        assert!(sp.sigma_star(s) >= sp.sigma(s) / sp.c23 * (1.0 - 1e-12));
    }
    let dip = SigmaCurve::from_pairs(&[(1.0, 1.0), (2.0, 0.5), (3.0, 2.0)], "dip").unwrap();
    assert!(matches!(
        StraightnessSpec::new(dip, 1.0, 0.45),
        Err(Error::NotIncreasing(_))
    ));
}

#[test]
fn theta_examples() {
    let t = theta_transform(Point::new(0.0, 0.0), Point::new(3.0, 0.0)).unwrap();
    assert_eq!(t.apply(Point::new(3.0, 0.0)), Point::new(3.0, 0.0));
    let t = theta_transform(Point::new(1.0, 1.0), Point::new(1.0, 5.0)).unwrap();
    let v = t.apply(Point::new(1.0, 5.0));
    assert!((v.x - 4.0).abs() < 1e-15 && v.y.abs() < 1e-15);
    assert_eq!(t.apply(Point::new(1.0, 1.0)), Point::ORIGIN);
    assert!(theta_transform(Point::ORIGIN, Point::ORIGIN).is_err());
}

proptest! {
    #[test]
    fn envelope_dominates_and_increases(vals in prop::collection::vec(0.01f64..100.0, 1..40)) {
        let pairs: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
        let c = SigmaCurve::from_pairs(&pairs, "p").unwrap();
        let e = monotone_envelope(&c);
        prop_assert!(e.is_strictly_increasing());
        let mut best = 0.0f64;
        for (a, b) in c.entries.iter().zip(&e.entries) {
            best = best.max(a.sigma);
            prop_assert!(b.sigma >= a.sigma);
            prop_assert!(b.sigma <= best * (1.0 + 1e-9));
        }
    }

    #[test]
    fn d_r_is_reflection_symmetric(x in -50.0f64..250.0, y in -80.0f64..80.0) {
        let sp = straight_spec();
        let r = 200.0;
        let u = Point::new(x, y);
        let a = sp.d_r(u, r);
        let b = sp.d_r(Point::new(r - x, -y), r);
        prop_assert!(a >= 0.0);
        // equal up to the rounding of r - (r - x)
        if x != r / 2.0 {
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
        }
    }

    #[test]
    fn theta_is_an_isometry(
        ux in -10.0f64..10.0, uy in -10.0f64..10.0,
        vx in -10.0f64..10.0, vy in -10.0f64..10.0,
        ax in -10.0f64..10.0, ay in -10.0f64..10.0,
        bx in -10.0f64..10.0, by in -10.0f64..10.0,
    ) {
        let (u, v) = (Point::new(ux, uy), Point::new(vx, vy));
        prop_assume!(u.dist(v) > 1e-6);
        let t = theta_transform(u, v).unwrap();
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        prop_assert!((t.apply(a).dist(t.apply(b)) - a.dist(b)).abs() < 1e-12);
        let tv = t.apply(v);
        prop_assert!(tv.y.abs() < 1e-12 && (tv.x - u.dist(v)).abs() < 1e-12);
        prop_assert!(t.invert(t.apply(a)).dist(a) < 1e-12);
    }

    #[test]
    fn majorant_properties(
        bumps in prop::collection::vec(-0.5f64..0.5, 30),
        chi in 0.1f64..0.6,
        eps in 0.02f64..0.2,
    ) {
        let s: Vec<(f64, f64)> = bumps
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let r = 1.5 * 1.3f64.powi(i as i32);
                (r, r.powf(chi) * b.exp())
            })
            .collect();
        let m = default_block_base(&s, chi, eps).unwrap();
        let env = sublin_majorant(&s, chi, m, eps).unwrap();
        for &(r, rho) in &s {
            prop_assert!(env.rho_tilde(r) >= rho * (1.0 - 1e-12));
        }
        let a1 = env.a1().exp();
        let beyond: Vec<f64> = s.iter().map(|x| x.0).filter(|&r| r > a1).collect();
        for i in 0..beyond.len() {
            for j in i + 1..beyond.len() {
                let (r, q) = (beyond[i], beyond[j]);
                let k = (env.rho_tilde(q).ln() - env.rho_tilde(r).ln()) / (q.ln() - r.ln());
                prop_assert!(k >= chi - eps - 1e-9 && k <= chi + eps + 1e-9);
            }
        }
    }
}
