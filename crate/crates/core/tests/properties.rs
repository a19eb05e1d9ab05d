use num_complex::Complex64;
use proptest::prelude::*;

use zeroweight::averaging::{disk_average, QuadratureSpec};
use zeroweight::fields::expr::{parse, VarSet};
use zeroweight::fields::{
    counting_measure, measure_geq, Domain, GridSamples, GridSpec, Region, ScalarField, ZeroSequence,
};
use zeroweight::trigconvex::{extend, is_rho_trig_convex, PeriodicProfile};
use zeroweight::zeros::discrete_riesz;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(x, y)| Complex64::new(x, y))
}

fn zeros(max: usize) -> impl Strategy<Value = ZeroSequence> {
    prop::collection::vec((point(0.9), 1u32..4), 0..max).prop_map(|v| ZeroSequence::new(v).unwrap())
}

/// Trigonometric polynomial `a₀ + Σ aₖcos kθ + bₖsin kθ` sampled at `n` nodes.
fn trig_profile(n: usize) -> impl Strategy<Value = PeriodicProfile> {
    (0.5f64..3.0, prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 1..4)).prop_map(move |(a0, terms)| {
        let samples = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                a0 + terms
                    .iter()
                    .enumerate()
                    .map(|(j, (a, b))| a * ((j + 1) as f64 * t).cos() + b * ((j + 1) as f64 * t).sin())
                    .sum::<f64>()
            })
            .collect();
        PeriodicProfile::from_samples(samples, "trig").unwrap()
    })
}

fn expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("z".to_string()),
        Just("re(z)".to_string()),
        Just("abs(z)".to_string()),
        Just("pi".to_string()),
        (-5.0f64..5.0).prop_map(|c| format!("{c}")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("exp(re({a}))")),
            inner.prop_map(|a| format!("log(abs({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bilinear_interpolation_reproduces_affine_fields(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, x in -1.0f64..1.0, y in -1.0f64..0.6,
    ) {
        let z = Complex64::new(x, y);
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 0.6, 11, 9).unwrap();
        let values = grid.nodes().map(|w| a * w.re + b * w.im + c).collect();
        let g = GridSamples::new(grid, values).unwrap();
        let got = g.interpolate(z).unwrap();
        prop_assert!((got - (a * z.re + b * z.im + c)).abs() < 1e-12);
    }

    #[test]
    fn counting_is_additive(s in zeros(6), t in zeros(6), x0 in -1.0f64..0.0, x1 in 0.0f64..1.0) {
        let both = ZeroSequence::new(s.entries().iter().chain(t.entries()).cloned().collect()).unwrap();
        let rect = Region::rect(x0, x1, -1.0, 1.0);
        prop_assert_eq!(counting_measure(&both, &rect), counting_measure(&s, &rect) + counting_measure(&t, &rect));
        prop_assert_eq!(both.total_multiplicity(), s.total_multiplicity() + t.total_multiplicity());
    }

    #[test]
    fn grid_and_domain_print_parse_round_trip(
        x0 in -5.0f64..0.0, w in 0.1f64..5.0, y0 in -5.0f64..0.0, nx in 2usize..300, ny in 2usize..300,
    ) {
        let h = w / (nx - 1) as f64;
        let g = GridSpec::new(x0, x0 + w, y0, y0 + h * (ny - 1) as f64, nx, ny).unwrap();
        let back: GridSpec = g.to_string().parse().unwrap();
        prop_assert_eq!(back, g);
        let d = Domain::rectangle(x0, x0 + w, y0, y0 + 1.0).unwrap();
        let back: Domain = d.to_string().parse().unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn expressions_print_parse_round_trip(src in expr_src(), z in point(2.0)) {
        let e = parse(&src, VarSet::Plane);
        prop_assume!(e.is_ok());
        let e = e.unwrap();
        let again = parse(&e.to_string(), VarSet::Plane).unwrap();
        prop_assert_eq!(again.to_string(), e.to_string());
        match (e.eval(z, 0.0), again.eval(z, 0.0)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(format!("{a:?}"), format!("{b:?}")),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn a_measure_dominates_itself(s in zeros(5), a in -2.0f64..2.0) {
        let field = ScalarField::potential(&s, Domain::WholePlane)
            .plus(&zeroweight::fields::parse_field(&format!("{a}*pow(abs(z),2)"), Domain::WholePlane).unwrap())
            .unwrap();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 33, 33).unwrap();
        let nu = discrete_riesz(&field, &grid).unwrap();
        let part = grid.coarsened(4).unwrap();
        let c = measure_geq(&nu, &nu, &part, 0.0);
        prop_assert!(c.holds);
        prop_assert!(c.margin == 0.0 || c.cells_compared == 0, "{}", c.margin);
    }

    #[test]
    fn riesz_measure_is_linear(
        s in zeros(4), a in -2.0f64..2.0, b in -2.0f64..2.0, x0 in -1.0f64..0.0, x1 in 0.0f64..1.0,
    ) {
        let d = Domain::WholePlane;
        let f = ScalarField::potential(&s, d);
        let g = zeroweight::fields::parse_field("pow(abs(z),2) + re(z)*im(z)*re(z)", d).unwrap();
        let combo = ScalarField::linear_combination(vec![(a, f.clone()), (b, g.clone())], 0.0).unwrap();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 41, 41).unwrap();
        let (mf, mg, mc) =
            (discrete_riesz(&f, &grid).unwrap(), discrete_riesz(&g, &grid).unwrap(), discrete_riesz(&combo, &grid).unwrap());
        let rect = Region::rect(x0, x1, -0.7, 0.9);
        let lhs = mc.mass_in(&rect);
        let rhs = a * mf.mass_in(&rect) + b * mg.mass_in(&rect);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn sub_mean_values_grow_with_the_radius(s in zeros(4), z in point(0.5), r1 in 0.05f64..0.4, dr in 0.01f64..0.4) {
        let f = ScalarField::potential(&s, Domain::WholePlane)
            .plus(&zeroweight::fields::parse_field("pow(abs(z),2)", Domain::WholePlane).unwrap())
            .unwrap();
        let q = QuadratureSpec::default();
        let small = disk_average(&f, z, r1, &q).unwrap().value;
        let large = disk_average(&f, z, r1 + dr, &q).unwrap().value;
        prop_assert!(large >= small - 1e-9, "{small} > {large}");
    }

    #[test]
    fn extension_is_additive_and_homogeneous(
        h1 in trig_profile(256), h2 in trig_profile(256), rho in 0.5f64..3.0, z in point(1.5), t in 0.1f64..3.0, c in 0.0f64..4.0,
    ) {
        prop_assume!(z.norm() > 1e-3);
        let sum = extend(&h1.combine(1.0, &h2, 1.0).unwrap(), rho).raw(z).unwrap();
        let parts = extend(&h1, rho).raw(z).unwrap() + extend(&h2, rho).raw(z).unwrap();
        prop_assert!((sum - parts).abs() < 1e-9 * (1.0 + parts.abs()));
        let e = extend(&h1, rho);
        let scaled = e.raw(z * t).unwrap();
        prop_assert!((scaled - t.powf(rho) * e.raw(z).unwrap()).abs() < 1e-9 * (1.0 + scaled.abs()));
        let cz = extend(&h1.scaled(c), rho).raw(z).unwrap();
        prop_assert!((cz - c * e.raw(z).unwrap()).abs() < 1e-9 * (1.0 + cz.abs()));
    }

    #[test]
    fn verdicts_are_monotone_in_tolerance(h in trig_profile(128), rho in 0.5f64..3.0, t1 in 0.0f64..1e-3, dt in 0.0f64..1e-2) {
        let tight = is_rho_trig_convex(&h, rho, t1).unwrap();
        let loose = is_rho_trig_convex(&h, rho, t1 + dt).unwrap();
        prop_assert!(!tight.holds || loose.holds);
        prop_assert_eq!(tight.margin, loose.margin);
    }
}
