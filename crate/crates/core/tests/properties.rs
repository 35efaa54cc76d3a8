mod common;

use common::*;
use fracsteady::model::reaction_derivative;
use fracsteady::{
    assemble_operator, boundary_distance, build_grid, gagliardo_seminorm, harvesting_profile, normalization_constant,
    rayleigh_quotient, solve_linear, thresholds, GridFunction, Interval, ModelParams, Order, ProfileKind,
};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn grid_nodes_are_uniform_and_interior(a in -5.0f64..5.0, len in 0.1f64..10.0, n in 2usize..200) {
        let g = build_grid(Interval::new(a, a + len).unwrap(), n).unwrap();
        let nodes = g.nodes();
        prop_assert!(nodes[0] > a && nodes[n - 1] < a + len);
        for w in nodes.windows(2) {
            prop_assert!(((w[1] - w[0]) - g.step()).abs() <= 1e-12 * len);
        }
        let d = boundary_distance(&g);
        prop_assert!(d.values().iter().all(|v| *v > 0.0 && *v <= len / 2.0 + 1e-12));
    }

    #[test]
    fn profiles_are_normalized(seed in any::<u64>(), n in 3usize..80) {
        let g = build_grid(Interval::new(-1.0, 2.0).unwrap(), n).unwrap();
        let mut r = rng(seed);
        let custom = random_function(g, &mut r, 0.0, 3.0).into_values();
        for kind in [ProfileKind::Sine, ProfileKind::Bump, ProfileKind::Custom(custom)] {
            let h = harvesting_profile(&g, &kind).unwrap();
            prop_assert_eq!(h.max(), 1.0);
            prop_assert!(h.min() >= 0.0);
        }
    }

    #[test]
    fn operator_is_symmetric_m_matrix(s in 0.02f64..0.98, n in 2usize..60, len in 0.2f64..6.0) {
        let g = build_grid(Interval::new(0.0, len).unwrap(), n).unwrap();
        let a = assemble_operator(&g, Order::new(s).unwrap()).unwrap();
        let m = a.matrix();
        prop_assert!(m.asymmetry() <= 1e-12);
        for i in 0..n {
            prop_assert!(m.get(i, i) > 0.0);
            let mut off = 0.0;
            for j in 0..n {
                if i != j {
                    prop_assert!(m.get(i, j) < 0.0);
                    off += m.get(i, j).abs();
                }
            }
            // strict diagonal dominance from the exterior contribution
            prop_assert!(m.get(i, i) > off);
        }
        prop_assert!(a.factor().is_ok());
    }

    #[test]
    fn maximum_principle(seed in any::<u64>(), s in 0.05f64..0.95, n in 4usize..64) {
        let a = operator(n, s);
        let mut r = rng(seed);
        let load = random_function(*a.grid(), &mut r, 0.0, 1.0);
        let u = solve_linear(&a, &load).unwrap();
        prop_assert!(u.min() >= 0.0);
    }

    #[test]
    fn quadratic_form_matches_seminorm(seed in any::<u64>(), s in 0.05f64..0.95, n in 2usize..64) {
        let order = Order::new(s).unwrap();
        let a = operator(n, s);
        let mut r = rng(seed);
        let u = random_function(*a.grid(), &mut r, -1.0, 1.0);
        let c = normalization_constant(1, order).unwrap();
        let semi = gagliardo_seminorm(&u, order);
        let q = a.quadratic_form(&u).unwrap();
        prop_assert!((0.5 * c * semi * semi - q).abs() <= 1e-10 * q.abs());
    }

    #[test]
    fn rayleigh_bounded_below_by_lambda1(seed in any::<u64>(), s in 0.1f64..0.9) {
        let p = problem(40, s, 2.0);
        let mut r = rng(seed);
        let v = random_function(*p.a.grid(), &mut r, -1.0, 1.0);
        let rq = rayleigh_quotient(&p.a, &v).unwrap();
        prop_assert!(rq >= p.eig.lambda1 - 1e-9);
        let rq3 = rayleigh_quotient(&p.a, &v.scaled(-3.0)).unwrap();
        prop_assert!((rq3 - rq).abs() <= 1e-12 * rq);
    }

    #[test]
    fn reaction_derivative_matches_finite_differences(
        seed in any::<u64>(), k in 0.1f64..5.0, c in 0.0f64..3.0, eps in 0.0f64..0.5
    ) {
        let g = build_grid(Interval::new(-1.0, 1.0).unwrap(), 50).unwrap();
        let h = harvesting_profile(&g, &ProfileKind::Sine).unwrap();
        let p = ModelParams::new(1.0, k, c, eps, Order::new(0.5).unwrap(), h).unwrap();
        let mut r = rng(seed);
        let u = random_function(g, &mut r, 0.0, 4.0);
        let d = reaction_derivative(&u, &p).unwrap();
        let delta = 1e-5;
        for (i, x) in u.values().iter().enumerate() {
            let hp = p.profile.values()[i];
            let fd = (p.reaction_at(x + delta, hp) - p.reaction_at(x - delta, hp)) / (2.0 * delta);
            prop_assert!((fd - d.values()[i]).abs() <= 1e-7 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn threshold_window_is_nonempty(factor in 1.05f64..6.0, c in 0.05f64..4.0) {
        let p = problem(32, 0.5, factor);
        let params = p.base.with_grazing(c).unwrap();
        let t = thresholds(&params, &p.eig, &p.e).unwrap();
        prop_assert!(t.alpha > 0.0 && t.alpha < 1.0);
        prop_assert!(t.sigma_lower < t.sigma_upper);
        prop_assert!(t.eps_star > 0.0 && t.theta > 0.0 && t.m_lambda > 0.0);
        prop_assert!(t.harvest_margin(params.lambda, t.eps_star) >= -1e-15);
        prop_assert!(t.a_super >= params.lambda * params.carrying_capacity / 4.0);
    }

    #[test]
    fn scaling_a_grid_function_scales_its_norms(seed in any::<u64>(), factor in -4.0f64..4.0) {
        let a = operator(20, 0.4);
        let mut r = rng(seed);
        let u = random_function(*a.grid(), &mut r, -1.0, 1.0);
        let order = Order::new(0.4).unwrap();
        let lhs = gagliardo_seminorm(&u.scaled(factor), order);
        let rhs = factor.abs() * gagliardo_seminorm(&u, order);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        let au = a.apply(&u.scaled(factor)).unwrap();
        let expect = a.apply(&u).unwrap().scaled(factor);
        let diff = au.zip_map(&expect, |x, y| x - y).unwrap();
        prop_assert!(diff.sup_norm() <= 1e-12 * (1.0 + expect.sup_norm()));
    }
}

#[test]
fn grid_function_length_is_checked() {
    let g = build_grid(Interval::new(0.0, 1.0).unwrap(), 4).unwrap();
    assert!(GridFunction::new(g, vec![1.0; 3]).is_err());
}
