use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flowsep::reparam::{sample_family, FamilySpec, Reparam, ReparamClass};
use flowsep::space::Point;
use flowsep::systems::{lookup_flow, FlowSystem};

const FLOWS: &[&str] = &[
    "annulus-phi",
    "annulus-psi",
    "torus-irrational",
    "torus-fake-saddle",
    "sus-shift",
    "sus-ext-plane",
];

fn sample(f: &FlowSystem, seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    f.space().sample(&mut rng, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metrics_are_symmetric_and_satisfy_the_triangle_inequality(
        which in 0..FLOWS.len(),
        seed in any::<u64>(),
    ) {
        let f = lookup_flow(FLOWS[which]).unwrap();
        let pts = sample(&f, seed, 3);
        let d = |a: &Point, b: &Point| f.space().distance(a, b).unwrap();
        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!((d(a, b) - d(b, a)).abs() < 1e-12);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        prop_assert!(d(a, b) <= f.space().diameter() + 1e-9);
    }

    #[test]
    fn flows_compose_in_time(
        which in 0..FLOWS.len(),
        seed in any::<u64>(),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
    ) {
        let f = lookup_flow(FLOWS[which]).unwrap();
        let x = sample(&f, seed, 1).remove(0);
        let zero = f.evolve(0.0, &x).unwrap();
        prop_assert!(f.space().distance(&zero, &x).unwrap() < 1e-9);
        let stepwise = f.evolve(t, &f.evolve(s, &x).unwrap()).unwrap();
        let direct = f.evolve(s + t, &x).unwrap();
        let tol = if f.is_exact() { 1e-9 } else { 1e-5 };
        prop_assert!(f.space().distance(&stepwise, &direct).unwrap() < tol);
    }

    #[test]
    fn points_survive_encoding(which in 0..FLOWS.len(), seed in any::<u64>()) {
        let f = lookup_flow(FLOWS[which]).unwrap();
        for p in sample(&f, seed, 4) {
            prop_assert_eq!(Point::parse(&p.encode()).unwrap(), p);
        }
    }

    #[test]
    fn sampled_reparametrizations_fix_zero_and_increase(
        seed in any::<u64>(),
        amplitude in 0.0f64..2.0,
        horizon in 1.0f64..50.0,
        knots in 2usize..10,
    ) {
        let spec = FamilySpec {
            class: ReparamClass::K,
            horizon,
            knots,
            amplitude,
            members: 6,
            seed,
        };
        for s in sample_family(&spec).unwrap() {
            prop_assert_eq!(s.eval(0.0), 0.0);
            let mut prev = s.eval(-horizon);
            for i in 1..=200 {
                let t = -horizon + 2.0 * horizon * i as f64 / 200.0;
                let v = s.eval(t);
                prop_assert!(v > prev, "{} not increasing at {t}", s.label());
                prev = v;
            }
        }
    }

    #[test]
    fn reparametrizations_are_lipschitz(
        seed in any::<u64>(),
        t in -20.0f64..20.0,
        h in 1e-6f64..0.5,
    ) {
        let spec = FamilySpec {
            class: ReparamClass::C,
            horizon: 20.0,
            knots: 6,
            amplitude: 1.0,
            members: 4,
            seed,
        };
        for s in sample_family(&spec).unwrap() {
            let jump = (s.eval(t + h) - s.eval(t)).abs();
            prop_assert!(jump <= s.max_abs_slope() * h * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn max_deviation_bounds_a_dense_scan(
        seed in any::<u64>(),
        horizon in 1.0f64..30.0,
    ) {
        let spec = FamilySpec {
            class: ReparamClass::K,
            horizon,
            knots: 5,
            amplitude: 1.5,
            members: 4,
            seed,
        };
        for s in sample_family(&spec).unwrap() {
            let reported = s.max_deviation(horizon);
            let mut scanned = 0.0f64;
            for i in 0..=4000 {
                let t = -horizon + 2.0 * horizon * i as f64 / 4000.0;
                scanned = scanned.max((s.eval(t) - t).abs());
            }
            prop_assert!(scanned <= reported + 1e-9);
            prop_assert!(reported - scanned <= 1e-3 * (1.0 + reported));
        }
    }

    #[test]
    fn knot_lists_round_trip(seed in any::<u64>()) {
        let spec = FamilySpec {
            class: ReparamClass::C,
            horizon: 10.0,
            knots: 6,
            amplitude: 0.7,
            members: 3,
            seed,
        };
        for s in sample_family(&spec).unwrap() {
            let back = Reparam::from_knot_list(&s.to_knot_list()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}

#[test]
fn families_are_reproducible_from_the_seed() {
    let spec = FamilySpec {
        class: ReparamClass::K,
        horizon: 20.0,
        knots: 6,
        amplitude: 0.5,
        members: 8,
        seed: 11,
    };
    assert_eq!(sample_family(&spec).unwrap(), sample_family(&spec).unwrap());
    let other = FamilySpec { seed: 12, ..spec };
    assert_ne!(
        sample_family(&spec).unwrap(),
        sample_family(&other).unwrap()
    );
}

#[test]
fn dilation_deviation_matches_closed_form() {
    let s = Reparam::dilation(1.25);
    assert_relative_eq!(s.max_deviation(8.0), 2.0, epsilon = 1e-12);
}
