use proptest::prelude::*;

use tnqaoa::instance::{random_instance, SpinGlassInstance};
use tnqaoa::lattice::build_square;
use tnqaoa::schedule::*;

fn coeffs(c: usize) -> impl Strategy<Value = InterpCoeffs> {
    (proptest::collection::vec(-3.0f64..3.0, c), proptest::collection::vec(-3.0f64..3.0, c))
        .prop_map(|(u, v)| InterpCoeffs::new(u, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_is_linear((a, b) in (1usize..8).prop_flat_map(|c| (coeffs(c), coeffs(c))), p in 1usize..60) {
        let sum = InterpCoeffs::new(
            a.u.iter().zip(&b.u).map(|(x, y)| x + y).collect(),
            a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect(),
        ).unwrap();
        let (sa, sb, ss) = (
            schedule_from_coeffs(&a, p).unwrap(),
            schedule_from_coeffs(&b, p).unwrap(),
            schedule_from_coeffs(&sum, p).unwrap(),
        );
        for j in 0..p {
            prop_assert!((ss.gammas()[j] - sa.gammas()[j] - sb.gammas()[j]).abs() < 1e-12);
            prop_assert!((ss.betas()[j] - sa.betas()[j] - sb.betas()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn median_stays_within_layer_range(
        (p, rows) in (1usize..10).prop_flat_map(|p| (Just(p), proptest::collection::vec(proptest::collection::vec(-7.0f64..7.0, 2 * p), 1..9)))
    ) {
        let scheds: Vec<Schedule> = rows.iter().map(|r| Schedule::new(r[..p].to_vec(), r[p..].to_vec()).unwrap()).collect();
        let m = median_transfer(&scheds).unwrap();
        for j in 0..p {
            for (vals, got) in [
                (scheds.iter().map(|s| s.gammas()[j]).collect::<Vec<_>>(), m.gammas()[j]),
                (scheds.iter().map(|s| s.betas()[j]).collect::<Vec<_>>(), m.betas()[j]),
            ] {
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo <= got && got <= hi);
            }
        }
    }

    #[test]
    fn zero_budget_training_returns_initial_coefficients(init in coeffs(3), p in 1usize..20) {
        let inst = random_instance(&build_square(2, 2).unwrap(), 0);
        let backend = |_: &SpinGlassInstance, _: &Schedule| -> tnqaoa::Result<f64> { panic!("no evaluations allowed") };
        let cfg = TrainConfig { init: Some(init.clone()), ..TrainConfig::new(p, 3, 0) };
        let out = train_one(&inst, &backend, &cfg).unwrap();
        prop_assert_eq!(&out.coeffs, &init);
        prop_assert_eq!(out.evaluations, 0);
        prop_assert_eq!(out.schedule, schedule_from_coeffs(&init, p).unwrap());
    }
}

#[test]
fn median_rejects_mismatched_depths() {
    let a = Schedule::zeros(2).unwrap();
    let b = Schedule::zeros(3).unwrap();
    assert!(median_transfer(&[a, b]).is_err());
    assert!(median_transfer(&[]).is_err());
}
