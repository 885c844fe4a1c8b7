use proptest::prelude::*;

use spatial_risk::geometry::{Point, Region};
use spatial_risk::models::{CorrelationFamily, ExtremalModel};
use spatial_risk::risk::{limiting_risk_measure, r2_variance_1d, r2_variance_2d};

fn model() -> impl Strategy<Value = ExtremalModel> {
    prop_oneof![
        (0.3f64..3.0).prop_map(ExtremalModel::smith_isotropic),
        (0.2f64..2.0).prop_map(ExtremalModel::tube),
        (0.3f64..2.0, 0.3f64..2.0).prop_map(|(c1, c2)| ExtremalModel::schlather(CorrelationFamily::cauchy(c1, c2).unwrap())),
        (0.3f64..2.0, 0.2f64..1.9).prop_map(|(c1, c2)| {
            ExtremalModel::geometric_gaussian(1.0, CorrelationFamily::powered_exponential(c1, c2).unwrap())
        }),
        (0.5f64..2.0, 0.3f64..1.9).prop_map(|(eta, a)| ExtremalModel::brown_resnick(eta, a).unwrap()),
    ]
}

fn region() -> impl Strategy<Value = Region> {
    prop_oneof![(0.3f64..3.0).prop_map(Region::disk), (0.3f64..3.0).prop_map(Region::square)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variance_lies_between_limit_and_perfect_dependence(m in model(), r in region(), lambda in 0.05f64..20.0, u in 0.3f64..4.0) {
        let v = r2_variance_1d(&m, &r, lambda, u).unwrap();
        let top = (-1.0 / u).exp() - (-2.0 / u).exp();
        let k1 = limiting_risk_measure(&m, u).unwrap();
        prop_assert!(v <= top + 1e-9, "{v} above {top}");
        prop_assert!(v >= k1 - 1e-9, "{v} below limit {k1}");
    }

    #[test]
    fn variance_does_not_increase_with_scale(m in model(), r in region(), lambda in 0.05f64..10.0, step in 1.01f64..3.0, u in 0.3f64..4.0) {
        let a = r2_variance_1d(&m, &r, lambda, u).unwrap();
        let b = r2_variance_1d(&m, &r, lambda * step, u).unwrap();
        prop_assert!(b <= a + 1e-9, "{a} -> {b}");
    }

    #[test]
    fn variance_is_translation_invariant(r in region(), x in -50.0f64..50.0, y in -50.0f64..50.0, lambda in 0.2f64..3.0) {
        let m = ExtremalModel::smith([[1.5, 0.4], [0.4, 0.8]]).unwrap();
        let base = r2_variance_2d(&m, &r, lambda, 1.0).unwrap();
        let moved = r2_variance_2d(&m, &r.translated(Point::new(x, y)), lambda, 1.0).unwrap();
        prop_assert!((base - moved).abs() < 1e-6, "{base} vs {moved}");
    }
}
