use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use orbifold_morse::expr::{check_invariance, ExprError, Expression};
use orbifold_morse::group::{generate_group, AffineIsometry};

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_vec(x.to_vec())
}

#[test]
fn precedence_and_constants() {
    let f = Expression::parse("1 + 2*x1^2 - x2/4 + -x1^3", 2).unwrap();
    // oracle: evaluated by hand at (2, 8)
    assert_eq!(f.eval(&v(&[2.0, 8.0])).unwrap(), 1.0 + 8.0 - 2.0 - 8.0);
    let g = Expression::parse("cos(pi*x1)", 1).unwrap();
    assert!((g.eval(&v(&[1.0])).unwrap() + 1.0).abs() < 1e-15);
}

#[test]
fn parse_errors() {
    assert!(matches!(Expression::parse("x1 +", 1), Err(ExprError::Syntax { .. })));
    assert!(matches!(Expression::parse("tan(x1)", 1), Err(ExprError::UnknownIdentifier { .. })));
    assert!(matches!(Expression::parse("x3", 2), Err(ExprError::VariableOutOfRange { .. })));
    let f = Expression::parse("x1 + x2", 2).unwrap();
    assert!(matches!(f.eval(&v(&[1.0])), Err(ExprError::DimensionMismatch { .. })));
}

#[test]
fn domain_errors_are_reported() {
    let f = Expression::parse("sqrt(x1)", 1).unwrap();
    assert!(f.eval(&v(&[-1.0])).is_err());
    let g = Expression::parse("1/x1", 1).unwrap();
    assert!(g.eval(&v(&[0.0])).is_err());
}

#[test]
fn closed_form_derivatives() {
    // f = x1² x2 + sin(x2): ∇f = (2 x1 x2, x1² + cos x2), H = [[2 x2, 2 x1], [2 x1, -sin x2]]
    let f = Expression::parse("x1^2*x2 + sin(x2)", 2).unwrap();
    let x = v(&[0.7, -1.3]);
    let (val, grad, hess) = f.value_gradient_hessian(&x).unwrap();
    assert!((val - (0.49 * -1.3 + (-1.3f64).sin())).abs() < 1e-14);
    assert!((grad - v(&[2.0 * 0.7 * -1.3, 0.49 + (-1.3f64).cos()])).amax() < 1e-14);
    let expected = DMatrix::from_row_slice(2, 2, &[-2.6, 1.4, 1.4, -(-1.3f64).sin()]);
    assert!((hess - expected).amax() < 1e-14);
}

#[test]
fn f32_evaluation_matches_f64() {
    let f = Expression::parse("exp(x1) * cos(x2)", 2).unwrap();
    let a = f.eval(&DVector::from_vec(vec![0.3f32, 0.4])).unwrap();
    let b = f.eval(&v(&[0.3, 0.4])).unwrap();
    assert!((a as f64 - b).abs() < 1e-6);
}

#[test]
fn invariance_check_finds_violations() {
    let neg = AffineIsometry::linear_map(-DMatrix::<f64>::identity(2, 2)).unwrap();
    let g = generate_group(2, &[neg], false, 8).unwrap();
    let even = Expression::parse("x1^2 + x1*x2 + cos(x2)", 2).unwrap();
    assert!(check_invariance(&even, &g, 64, 1e-9).invariant);
    let odd = Expression::parse("x1^2 + x2", 2).unwrap();
    let report = check_invariance(&odd, &g, 64, 1e-9);
    assert!(!report.invariant);
    assert!(report.worst_violation > 1e-3);
}

proptest! {
    #[test]
    fn hessian_is_symmetric_and_matches_gradient_differences(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
    ) {
        let f = Expression::parse("sin(x1*x2) + exp(x3/3)*x1^2 + sqrt(1 + x2^2 + x3^2)", 3).unwrap();
        let x = v(&[a, b, c]);
        let h = f.hessian(&x).unwrap();
        prop_assert!((&h - h.transpose()).amax() < 1e-12);
        let eps = 1e-6;
        for i in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let col = (f.gradient(&xp).unwrap() - f.gradient(&xm).unwrap()) / (2.0 * eps);
            prop_assert!((col - h.column(i)).amax() < 1e-6 * h.amax().max(1.0));
        }
    }
}
