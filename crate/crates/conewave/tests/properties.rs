use conewave::config::ExperimentConfig;
use conewave::fields::{gauge_transform, CoefficientSet, ScalarField};
use conewave::forward::GridSpec;
use conewave::geometry::{construct_diverse, unit_direction, DiverseConstruction};
use conewave::inversion::{grid_norm_sq, recover_ab, DEFAULT_CONDITION_THRESHOLD};
use conewave::io::Table;
use conewave::jet::Jet;
use conewave::quad::{GlRule, Spline};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE)]
}

fn bump(center_r: f64) -> impl Strategy<Value = ScalarField> {
    (-1.0..1.0f64, -center_r..center_r, -center_r..center_r, -center_r..center_r, 0.4..0.6f64, 0.2..0.5f64, 0.2..0.4f64)
        .prop_map(|(amp, x, y, z, t, rx, rt)| ScalarField::bump(amp, [x, y, z, t], rx, rt))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::collection::vec(finite(), 3), 0..20)) {
        let mut t = Table::new(&["x", "y", "z"]).meta("note", "p");
        for r in &rows {
            t.push(r.clone());
        }
        let back = Table::from_csv(&t.to_csv()).unwrap();
        prop_assert_eq!(back.rows.len(), rows.len());
        for (a, b) in back.rows.iter().zip(&rows) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn unit_direction_is_unit(x in prop::array::uniform3(-5.0..5.0f64), xi in prop::array::uniform3(-5.0..5.0f64)) {
        prop_assume!((0..3).map(|i| (x[i] - xi[i]).powi(2)).sum::<f64>() > 1e-6);
        let (w, r) = unit_direction(x, xi).unwrap();
        prop_assert!(((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt() - 1.0).abs() < 1e-14);
        for i in 0..3 {
            prop_assert!((xi[i] + r * w[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jet_product_rule(a in prop::array::uniform4(-1.0..1.0f64)) {
        let p = Jet::point(a, 3);
        let f = p[0].times(&p[1]).exp();
        let g = (&p[2] + &p[3]).sin_cos().0;
        let fg = f.times(&g);
        let lhs = fg.d(0);
        let rhs = &f.d(0).times(&g) + &f.times(&g.d(0));
        for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials(c in prop::collection::vec(-1.0..1.0f64, 8), a in -2.0..0.0f64, b in 0.1..2.0f64) {
        let rule = GlRule::new(4);
        let got: f64 = rule.on(a, b).map(|(x, w)| w * c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32)).sum::<f64>()).sum();
        let want: f64 = c.iter().enumerate().map(|(k, ck)| ck * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0)).sum();
        prop_assert!((got - want).abs() < 1e-11 * (1.0 + want.abs()));
    }

    #[test]
    fn spline_interpolates_knots(y in prop::collection::vec(-10.0..10.0f64, 4..30)) {
        let x: Vec<f64> = (0..y.len()).map(|k| k as f64 * 0.3 + (k as f64).sqrt() * 0.01).collect();
        let s = Spline::new(&x, &y);
        for (xi, yi) in x.iter().zip(&y) {
            prop_assert!((s.eval(*xi) - yi).abs() < 1e-10 * (1.0 + yi.abs()));
        }
    }

    #[test]
    fn recover_ab_inverts_exact_profiles(z in prop::array::uniform4(-1.0..1.0f64), x in prop::array::uniform3(-0.55..0.55f64)) {
        let locs = construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n: 2.0 }).unwrap();
        let p: Vec<f64> = locs.iter().map(|&xi| {
            let (th, _) = unit_direction(x, xi).unwrap();
            z[0] + th[0] * z[1] + th[1] * z[2] + th[2] * z[3]
        }).collect();
        let r = recover_ab(&locs, &[(x, 0.5)], &[p], DEFAULT_CONDITION_THRESHOLD).unwrap();
        prop_assert!((r.a[0] - z[0]).abs() < 1e-10);
        for i in 0..3 {
            prop_assert!((r.b[0][i] - z[i + 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_norm_is_quadratic(v in prop::collection::vec(-1.0..1.0f64, 729), s in -3.0..3.0f64, order in 0usize..3) {
        let g = GridSpec::new(1.0, 8, 1.0);
        let nodes: Vec<usize> = (0..g.len()).collect();
        let scaled: Vec<f64> = v.iter().map(|x| s * x).collect();
        let a = grid_norm_sq(&g, &nodes, &v, order);
        let b = grid_norm_sq(&g, &nodes, &scaled, order);
        prop_assert!(a >= 0.0);
        prop_assert!((b - s * s * a).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn gauge_keeps_c_and_curl(a in bump(0.2), b0 in bump(0.2), phi in bump(0.1), x in prop::array::uniform3(-0.4..0.4f64), t in 0.2..0.8f64) {
        let zero = ScalarField::zero;
        let cs = CoefficientSet::new(a, [b0, zero(), zero()], ScalarField::bump(0.5, [0.0, 0.0, 0.0, 0.5], 0.9, 0.5))
            .with_bounds(conewave::fields::Support::new(2.0, -1.0, 2.0)).unwrap();
        let g = gauge_transform(&cs, &phi).unwrap();
        let (c1, c2) = (cs.curl(x, t), g.curl(x, t));
        for i in 0..6 {
            prop_assert!((c1[i] - c2[i]).abs() < 1e-9, "{:?} {:?}", c1, c2);
        }
        prop_assert_eq!(cs.c.value(x, t), g.c.value(x, t));
    }

    #[test]
    fn config_json_round_trip(seed in any::<u64>(), n in 1.8..4.0f64, taus in prop::collection::vec(-3.0..1.0f64, 1..5)) {
        let mut taus = taus;
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        taus.dedup();
        let mut c = ExperimentConfig::minimal();
        c.seed = seed;
        c.taus = taus;
        c.diverse = Some(DiverseConstruction::Standard { rho: 1.0, n });
        let back = ExperimentConfig::parse(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
