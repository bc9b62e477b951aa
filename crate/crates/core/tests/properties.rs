use coupled_fixpoint::generate::{generate_finite_instance, GenParams};
use coupled_fixpoint::hypothesis::{find_epsilon_chain, find_monotone_violation, grid_points};
use coupled_fixpoint::instance::{build_instance, parse_instance, Instance};
use coupled_fixpoint::oracle::{brute_force_cfp, exhaustive_mixed_monotone};
use coupled_fixpoint::solver::lemma_bound;
use coupled_fixpoint::{picard_solve, BoxSpace, CoupledMap, OrderedMetricSpace, Point, ProductPair, SolveConfig};
use proptest::prelude::*;

fn generated(seed: u64, size: usize) -> Instance {
    build_instance(generate_finite_instance(seed, size, &GenParams::default()).unwrap()).unwrap()
}

fn linear() -> CoupledMap {
    CoupledMap::expression(BoxSpace::unit(1), vec!["(2*x - y + 3)/8".into()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_spaces_are_ordered_metric_spaces(seed in 0u64..10_000, size in 2usize..12) {
        let inst = generated(seed, size);
        let s = inst.space().as_finite().unwrap();
        let n = s.len();
        for i in 0..n {
            prop_assert_eq!(s.d(i, i), 0.0);
            prop_assert!(s.le(i, i));
            for j in 0..n {
                prop_assert_eq!(s.d(i, j), s.d(j, i));
                if i != j {
                    prop_assert!(s.d(i, j) > 0.0);
                    prop_assert!(!(s.le(i, j) && s.le(j, i)));
                }
                for k in 0..n {
                    prop_assert!(s.d(i, k) <= s.d(i, j) + s.d(j, k));
                    if s.le(i, j) && s.le(j, k) {
                        prop_assert!(s.le(i, k));
                    }
                }
            }
        }
    }

    #[test]
    fn product_metric_triangle_inequality(
        a in prop::array::uniform2(0.0f64..=1.0),
        b in prop::array::uniform2(0.0f64..=1.0),
        c in prop::array::uniform2(0.0f64..=1.0),
    ) {
        let space: OrderedMetricSpace = BoxSpace::unit(1).into();
        let pair = |p: [f64; 2]| ProductPair::new(Point::scalar(p[0]), Point::scalar(p[1]));
        let (a, b, c) = (pair(a), pair(b), pair(c));
        let ab = space.product_eta(&a, &b).unwrap();
        let bc = space.product_eta(&b, &c).unwrap();
        let ac = space.product_eta(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(ab, space.product_eta(&b, &a).unwrap());
    }

    #[test]
    fn product_order_is_a_partial_order(seed in 0u64..10_000, size in 2usize..7) {
        let inst = generated(seed, size);
        let space = inst.space();
        let pairs: Vec<ProductPair> = (0..size)
            .flat_map(|x| (0..size).map(move |y| ProductPair::new(Point::Index(x), Point::Index(y))))
            .collect();
        for p in &pairs {
            prop_assert!(space.product_leq(p, p).unwrap());
            for q in &pairs {
                if p != q && space.product_leq(p, q).unwrap() {
                    prop_assert!(!space.product_leq(q, p).unwrap());
                    // Swapping both pairs reverses the product order.
                    prop_assert!(space.product_leq(&q.swapped(), &p.swapped()).unwrap());
                }
            }
        }
    }

    #[test]
    fn iterates_follow_the_recursion_and_swap(seed in 0u64..10_000, size in 2usize..10, x in 0usize..10, y in 0usize..10, m in 0usize..8) {
        let inst = generated(seed, size);
        let (x, y) = (Point::Index(x % size), Point::Index(y % size));
        let f = &inst.map;
        let now = f.iterate_m(&x, &y, m).unwrap();
        let next = f.iterate_m(&x, &y, m + 1).unwrap();
        prop_assert_eq!(&next.forward, &f.apply(&now.forward, &now.backward).unwrap());
        prop_assert_eq!(&next.backward, &f.apply(&now.backward, &now.forward).unwrap());
        let swapped = f.iterate_m(&y, &x, m).unwrap();
        prop_assert_eq!(swapped.forward, now.backward);
        prop_assert_eq!(swapped.backward, now.forward);
    }

    #[test]
    fn fixed_pairs_are_stationary(seed in 0u64..10_000, size in 2usize..10) {
        let inst = generated(seed, size);
        for [x, y] in brute_force_cfp(&inst.map).unwrap() {
            let it = inst.map.iterate_m(&Point::Index(x), &Point::Index(y), 5).unwrap();
            prop_assert_eq!(it.forward, Point::Index(x));
            prop_assert_eq!(it.backward, Point::Index(y));
        }
    }

    #[test]
    fn grid_chains_are_minimal(i in 0usize..=8, j in 0usize..=8, k in 1usize..=3) {
        // Grid step 1/8; the longest admissible link is k/8 for eps = (k + 0.5)/8.
        let (i, j) = (i.min(j), i.max(j));
        let space: OrderedMetricSpace = BoxSpace::unit(1).into();
        let grid = grid_points(space.as_box().unwrap(), 0.125);
        let eps = (k as f64 + 0.5) / 8.0;
        let a = Point::scalar(i as f64 / 8.0);
        let b = Point::scalar(j as f64 / 8.0);
        let chain = find_epsilon_chain(&space, &a, &b, eps, &grid).unwrap().unwrap();
        prop_assert!(chain.is_valid(&space, &a, &b).unwrap());
        prop_assert_eq!(chain.n(), (j - i).div_ceil(k));
    }

    #[test]
    fn contraction_shrinks_each_step(x0 in 0.0f64..=0.4, y0 in 0.5f64..=1.0) {
        // Seeds with x0 <= F(x0, y0) and F(y0, x0) <= y0 keep consecutive
        // iterates comparable, where the map contracts by 1/2.
        let cfg = SolveConfig { lambda: 0.6, epsilon: 1.0, ..SolveConfig::default() };
        let r = picard_solve(&linear(), &Point::scalar(x0), &Point::scalar(y0), &cfg).unwrap();
        for w in r.trace.windows(2) {
            prop_assert!(w[1].residual <= 0.5 * w[0].residual + 1e-15);
        }
    }

    #[test]
    fn lemma_bound_decreases(n in 1usize..20, lambda in 0.01f64..0.99, eps in 0.1f64..10.0, m in 0usize..100) {
        let now = lemma_bound(n, lambda, eps, m).unwrap();
        let next = lemma_bound(n, lambda, eps, m + 1).unwrap();
        prop_assert!(next <= now);
        prop_assert!((now - 2.0 * n as f64 * lambda.powi(m as i32) * eps).abs() <= 1e-12 * now.max(1.0));
    }

    #[test]
    fn generated_instances_round_trip(seed in 0u64..10_000, size in 2usize..16) {
        let file = generate_finite_instance(seed, size, &GenParams::default()).unwrap();
        let json = file.to_json();
        let inst = parse_instance(json.as_bytes()).unwrap();
        let again = parse_instance(inst.to_json().as_bytes()).unwrap();
        prop_assert_eq!(&again, &inst);
        prop_assert_eq!(again.to_json(), inst.to_json());
    }
}

#[test]
fn bundled_instances_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("instances");
    for name in ["l1.json", "f1.json", "plane.json", "clipped.json"] {
        let inst = parse_instance(&std::fs::read(dir.join(name)).unwrap()).unwrap();
        let again = parse_instance(inst.to_json().as_bytes()).unwrap();
        assert_eq!(again, inst, "{name}");
    }
}

#[test]
fn generator_is_mixed_monotone_on_a_hundred_seeds() {
    for seed in 0..100 {
        let inst = generated(seed, 2 + (seed as usize % 20));
        assert_eq!(exhaustive_mixed_monotone(&inst.map).unwrap(), None, "seed {seed}");
        let x0 = &inst.x0;
        let y0 = &inst.y0;
        let space = inst.space();
        assert!(space.leq(x0, &inst.map.apply(x0, y0).unwrap()).unwrap(), "seed {seed}");
        assert!(space.leq(&inst.map.apply(y0, x0).unwrap(), y0).unwrap(), "seed {seed}");
    }
}

#[test]
fn product_map_is_not_mixed_monotone() {
    // x·y increases in y on the unit square.
    let map = CoupledMap::expression(BoxSpace::unit(1), vec!["x*y".into()]).unwrap();
    let grid = grid_points(map.space().as_box().unwrap(), 0.25);
    let v = find_monotone_violation(&map, &grid).unwrap().expect("x*y is increasing in y");
    assert!(v.recheck(&map).unwrap());
}
