use proptest::prelude::*;
use voxpht::levelset::{cardinal, LevelSetField};

/// Coefficient by direct summation: ∫N_j g / ∫N_j over the image box, with
/// the per-voxel integrals of the cubic B-spline from Simpson's rule on
/// each polynomial piece (exact for cubics).
fn direct(values: &[f64], m: usize, s: i64) -> f64 {
    let piece = |v: i64| {
        let a = (v - s) as f64;
        (cardinal(3, a) + 4.0 * cardinal(3, a + 0.5) + cardinal(3, a + 1.0)) / 6.0
    };
    let (mut num, mut den) = (0.0, 0.0);
    for v in s.max(0)..(s + 4).min(m as i64) {
        num += piece(v) * values[v as usize];
        den += piece(v);
    }
    num / den
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matches_direct_sum_in_1d_rows(values in prop::collection::vec(0.0f64..255.0, 4..40)) {
        let m = values.len();
        let field = LevelSetField::from_values(2, [m, 1, 1], [1.0; 3], &values, 3);
        for s in -3..m as i64 {
            let c = field.coefficient_at_start([s, 0, 0]);
            prop_assert!((c - direct(&values, m, s)).abs() < 1e-10);
        }
    }

    #[test]
    fn coefficients_are_linear(
        g1 in prop::collection::vec(-500.0f64..500.0, 64),
        g2 in prop::collection::vec(-500.0f64..500.0, 64),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let f = |v: &[f64]| LevelSetField::from_values(2, [8, 8, 1], [0.5, 2.0, 1.0], v, 3);
        let mix: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
        let (c1, c2, cm) = (f(&g1), f(&g2), f(&mix));
        for ((x, y), z) in c1.coefficients().iter().zip(c2.coefficients()).zip(cm.coefficients()) {
            prop_assert!((a * x + b * y - z).abs() < 1e-10);
        }
    }

    /// With all coefficients one the field is one everywhere in the box.
    #[test]
    fn unit_coefficients_sum_to_one(x in 0.0f64..6.0, y in 0.0f64..3.0, z in 0.0f64..4.5) {
        let n = (6 + 3) * (2 + 3) * (3 + 3);
        let field = LevelSetField::with_coefficients(3, [6, 2, 3], [1.0, 1.5, 1.5], 3, vec![1.0; n]).unwrap();
        prop_assert!((field.evaluate([x, y, z]).unwrap() - 1.0).abs() < 1e-12);
    }
}
