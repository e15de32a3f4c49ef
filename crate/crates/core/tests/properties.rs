mod common;

use common::fixture;
use finsler_mroot::calculus::{derivatives, grad_y, hess_y, MetricFunction, Quantity};
use finsler_mroot::kropina::kropina_point;
use finsler_mroot::mth_root::metric_point;
use finsler_mroot::spray::{metric_spray, projective_residual, Metric};
use finsler_mroot::symmetric_tensor::{canonicalize, SymmetricTensor};
use nalgebra::DVector;
use proptest::prelude::*;

fn y2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..2.0, 2)
}

fn x2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9f64..0.9, 2)
}

fn y3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..2.0, 3)
}

fn x3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9f64..0.9, 3)
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent_with_multinomial_count(raw in prop::collection::vec(1usize..=4, 1..=6)) {
        let c = canonicalize(&raw, 4).unwrap();
        prop_assert!(c.indices().windows(2).all(|w| w[0] <= w[1]));
        let again = canonicalize(c.indices(), 4).unwrap();
        prop_assert_eq!(&again, &c);
        let mut counts = [0usize; 5];
        for &i in &raw {
            counts[i] += 1;
        }
        let expected = factorial(raw.len()) / counts.iter().map(|&k| factorial(k)).product::<usize>();
        prop_assert_eq!(c.multiplicity(), expected as u64);
    }

    #[test]
    fn eval_is_homogeneous(coeffs in prop::collection::vec(-2.0f64..2.0, 4), y in y3(), lambda in prop::sample::select(vec![0.5, 2.0, 3.0])) {
        let t = SymmetricTensor::new(3, 4)
            .with(&[1, 1, 1, 1], coeffs[0]).unwrap()
            .with(&[1, 2, 2, 3], coeffs[1]).unwrap()
            .with(&[2, 2, 2, 2], coeffs[2]).unwrap()
            .with(&[1, 1, 3, 3], coeffs[3]).unwrap();
        let a = t.eval(&y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let scaled = t.eval(&ys).unwrap();
        prop_assert!((scaled - lambda.powi(4) * a).abs() <= 1e-12 * (lambda.powi(4) * a.abs()).max(1e-12));
    }

    #[test]
    fn contractions_match_scaled_derivatives(x in x3(), y in y3()) {
        let spec = fixture("fix_quintic3.json");
        let t = spec.field.tensor_at(&x).unwrap();
        let d = derivatives(&MetricFunction::base(&spec.field, Quantity::A), &x, &y).unwrap();
        let ai = t.contract(&y, 1).unwrap().to_vector();
        let aij = t.contract(&y, 2).unwrap().to_matrix();
        let m = 5.0;
        prop_assert!((&d.grad_y / m - &ai).amax() <= 1e-12 * ai.amax());
        prop_assert!((&d.hess_y / (m * (m - 1.0)) - &aij).amax() <= 1e-12 * aij.amax());
    }

    #[test]
    fn hessians_are_exactly_symmetric(x in x3(), y in y3()) {
        let spec = fixture("fix_quintic3.json");
        let b = spec.one_form.as_ref().unwrap();
        for q in [Quantity::F, Quantity::FSquared, Quantity::Fbar, Quantity::FbarSquared] {
            let f = if q.needs_one_form() {
                MetricFunction::kropina(&spec.field, b, q)
            } else {
                MetricFunction::base(&spec.field, q)
            };
            if let Ok(h) = hess_y(&f, &x, &y) {
                prop_assert_eq!(&h, &h.transpose());
            }
        }
    }

    #[test]
    fn supporting_elements_contract_to_the_norm(x in x2(), y in y2()) {
        let spec = fixture("fix_x_bx.json");
        let b = spec.one_form.as_ref().unwrap();
        let p = kropina_point(&spec.field, b, &x, &y).unwrap();
        let yv = DVector::from_column_slice(&y);
        prop_assert!((p.base.l.dot(&yv) - p.base.f).abs() <= 1e-12 * p.base.f);
        prop_assert!((p.lbar.dot(&yv) - p.fbar).abs() <= 1e-12 * p.fbar.abs());
        let gyy = (yv.transpose() * &p.gbar_oracle * &yv)[(0, 0)];
        prop_assert!((gyy - p.fbar * p.fbar).abs() <= 1e-9 * p.fbar * p.fbar);
        let oracle_lbar = grad_y(&MetricFunction::kropina(&spec.field, b, Quantity::Fbar), &x, &y).unwrap();
        prop_assert!((&oracle_lbar - &p.lbar).amax() <= 1e-10 * p.lbar.amax());
    }

    #[test]
    fn fundamental_tensor_is_zero_homogeneous(x in x3(), y in y3(), lambda in 0.3f64..3.0) {
        let spec = fixture("fix_quintic3.json");
        let p = metric_point(&spec.field, &x, &y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let q = metric_point(&spec.field, &x, &ys).unwrap();
        prop_assert!((&p.g - &q.g).amax() <= 1e-12 * p.g.amax());
    }

    #[test]
    fn sprays_are_two_homogeneous(x in x2(), y in y2(), lambda in 0.3f64..3.0) {
        let spec = fixture("fix_x_bx.json");
        let b = spec.one_form.as_ref().unwrap();
        for metric in [Metric::base(&spec.field), Metric::kropina(&spec.field, b)] {
            let g = metric_spray(&metric, &x, &y).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let gs = metric_spray(&metric, &x, &ys).unwrap();
            prop_assert!((&gs - &g * (lambda * lambda)).amax() <= 1e-10 * gs.amax().max(1e-12));
        }
    }

    #[test]
    fn wedge_is_scale_invariant(x in x2(), y in y2(), lambda in 0.3f64..3.0) {
        let spec = fixture("fix_x_bx.json");
        let b = spec.one_form.as_ref().unwrap();
        let w = projective_residual(&spec.field, b, &x, &y).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let ws = projective_residual(&spec.field, b, &x, &ys).unwrap();
        prop_assert!((w - ws).abs() <= 1e-10);
    }

    #[test]
    fn polynomial_partials_match_differences(x in x3(), axis in 0usize..3) {
        let spec = fixture("fix_quintic3.json");
        let b = spec.one_form.as_ref().unwrap();
        let jac = b.jacobian(&x).unwrap();
        let h = 1e-5;
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[axis] += h;
        xm[axis] -= h;
        let (bp, bm) = (b.at(&xp).unwrap(), b.at(&xm).unwrap());
        for i in 0..3 {
            prop_assert!(((bp[i] - bm[i]) / (2.0 * h) - jac[(i, axis)]).abs() <= 1e-9);
        }
    }
}
