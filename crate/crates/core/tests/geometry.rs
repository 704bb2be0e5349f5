use approx::assert_relative_eq;
use instanton_weld::geometry::*;
use instanton_weld::WeldError;
use proptest::prelude::*;

fn neck() -> NeckParams {
    NeckParams::new(0.5, 2.0, 0.04).with_budget(4, 1.0)
}

fn vec4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter("away from the origin", |v| norm(v) > 1e-3)
}

#[test]
fn radii_product_is_lambda() {
    let (r0, r1, r2, r3) = shell_radii(&neck()).unwrap();
    assert_relative_eq!(r0 * r3, 0.04, max_relative = 1e-14);
    assert_relative_eq!(r1 * r2, 0.04, max_relative = 1e-14);
}

#[test]
fn budget_error_quotes_the_budget() {
    let err = shell_radii(&NeckParams::new(0.5, 2.0, 0.04)).unwrap_err();
    assert!(matches!(err, WeldError::NeckBudget { .. }));
    assert!(err.to_string().contains("1.000000e-2"), "{err}");
}

#[test]
fn neck_map_rejects_the_marked_point() {
    assert!(neck_map([0.0; 4], 0.04, 0).is_err());
}

#[test]
fn jacobian_norm_is_rejected_off_the_annulus() {
    assert!(matches!(neck_jacobian_norm([0.01, 0.0, 0.0, 0.0], &neck()), Err(WeldError::OutsideNeck { .. })));
    assert_relative_eq!(neck_jacobian_norm([0.2, 0.0, 0.0, 0.0], &neck()).unwrap(), 1.0, max_relative = 1e-14);
}

#[test]
fn annulus_l2_of_a_constant_form() {
    let pi = std::f64::consts::PI;
    let (a, b) = (0.1f64, 0.5f64);
    let exact = (0.5 * pi * pi * (b.powi(4) - a.powi(4))).sqrt();
    let got = annulus_l2(|_| [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], a, b, 64, 16);
    assert_relative_eq!(got, exact, max_relative = 1e-2);
}

#[test]
fn classification_of_chart_points() {
    let c = 1.59375;
    let chart = ChartSpec { torus_size: 3.0, resolution: 16, marked_l: [c - 0.5625; 4], marked_r: [c + 0.5625; 4] };
    chart.validate(&neck()).unwrap();
    let at_marked = classify_point(chart.marked_l, &chart, &neck()).unwrap();
    let far = classify_point([0.0; 4], &chart, &neck()).unwrap();
    assert_ne!(at_marked, far);
}

proptest! {
    #[test]
    fn neck_map_is_an_involution(xi in vec4(), axis in 0usize..4) {
        let back = neck_map(neck_map(xi, 0.04, axis).unwrap(), 0.04, axis).unwrap();
        for m in 0..4 {
            prop_assert!((back[m] - xi[m]).abs() <= 1e-12 * norm(&xi).max(1.0));
        }
    }

    #[test]
    fn neck_map_inverts_the_radius(xi in vec4()) {
        let eta = neck_map(xi, 0.04, 0).unwrap();
        prop_assert!((norm(&eta) * norm(&xi) - 0.04).abs() <= 1e-14);
    }

    #[test]
    fn neck_map_is_conformal(xi in vec4(), axis in 0usize..4) {
        let j = neck_jacobian(xi, 0.04, axis);
        let f = 0.04 / xi.iter().map(|t| t * t).sum::<f64>();
        for a in 0..4 {
            for b in 0..4 {
                let g: f64 = (0..4).map(|k| j[k][a] * j[k][b]).sum();
                let want = if a == b { f * f } else { 0.0 };
                prop_assert!((g - want).abs() <= 1e-10 * f * f);
            }
        }
    }

    #[test]
    fn pullback_twice_is_the_identity(xi in vec4(), w in prop::array::uniform6(-1.0f64..1.0)) {
        let inner = |y: Vec4| pullback_two_form(y, 0.04, 0, |_| w).unwrap();
        let twice = pullback_two_form(xi, 0.04, 0, inner).unwrap();
        for c in 0..6 {
            prop_assert!((twice[c] - w[c]).abs() <= 1e-9);
        }
    }

    #[test]
    fn pullback_preserves_the_pointwise_density(xi in vec4(), w in prop::array::uniform6(-1.0f64..1.0)) {
        // |phi^* w|^2 dvol is invariant: the density scales by the fourth power of the conformal factor
        let f = 0.04 / xi.iter().map(|t| t * t).sum::<f64>();
        let pulled = pullback_two_form(xi, 0.04, 0, |_| w).unwrap();
        let lhs: f64 = pulled.iter().map(|t| t * t).sum();
        let rhs: f64 = f.powi(4) * w.iter().map(|t| t * t).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300));
    }

    #[test]
    fn cutoff_is_a_ramp(r in 0.0f64..1.0) {
        let (psi, grad) = cutoff_at([r, 0.0, 0.0, 0.0], &neck()).unwrap();
        let (r0, r1, _, _) = shell_radii(&neck()).unwrap();
        prop_assert!((0.0..=1.0).contains(&psi));
        if r <= r0 { prop_assert_eq!(psi, 0.0); }
        if r >= r1 { prop_assert_eq!(psi, 1.0); }
        prop_assert!(grad[0] >= 0.0);
    }
}
