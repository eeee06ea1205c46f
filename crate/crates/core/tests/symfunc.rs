use hypcurv_core::symfunc::{
    check_structure, elementary_all, f_eval, f_full, f_grad, f_hess, in_uniqueness_class,
    maclaurin_check, maclaurin_pair, margin_survey, normalized_elementary, sum_fi_closed,
    sum_lambda2_fi_closed, uniqueness_margin, Quotient,
};
use hypcurv_core::{CurvatureSpec, Error};
use proptest::prelude::*;

fn q(n: usize, l: usize) -> CurvatureSpec {
    CurvatureSpec::quotient(n, l).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

// Values below were computed independently at 50 digits.
struct Frozen {
    n: usize,
    l: usize,
    lambda: &'static [f64],
    f: f64,
    grad: &'static [f64],
    sum_fi: f64,
    sum_l2_fi: f64,
    margin: f64,
}

const FROZEN: &[Frozen] = &[
    Frozen {
        n: 3,
        l: 1,
        lambda: &[1.0, 2.0, 3.0],
        f: 1.7320508075688773,
        grad: &[0.72168783648703221, 0.28867513459481288, 0.14433756729740644],
        sum_fi: 1.1547005383792515,
        sum_l2_fi: 3.1754264805429417,
        margin: -2.0207259421636902,
    },
    Frozen {
        n: 3,
        l: 0,
        lambda: &[1.0, 2.0, 3.0],
        f: 1.8171205928321397,
        grad: &[0.60570686427737989, 0.30285343213868994, 0.20190228809245996],
        sum_fi: 1.1104625845085298,
        sum_l2_fi: 3.6342411856642793,
        margin: -2.5237786011557495,
    },
    Frozen {
        n: 4,
        l: 2,
        lambda: &[0.5, 3.0, 5.0, 7.0],
        f: 2.0031821818055353,
        grad: &[
            1.8117953491489555,
            0.17437466975377271,
            0.066347435320947666,
            0.034631903052143013,
        ],
        sum_fi: 2.0871493572758189,
        sum_l2_fi: 5.3779699976498926,
        margin: -3.2908206403740737,
    },
    Frozen {
        n: 2,
        l: 1,
        lambda: &[2.0, 3.0],
        f: 2.4,
        grad: &[0.72, 0.32],
        sum_fi: 1.04,
        sum_l2_fi: 5.76,
        margin: -4.72,
    },
];

#[test]
fn frozen_quotient_values() {
    for c in FROZEN {
        let spec = q(c.n, c.l);
        let quot = Quotient::new(c.n, c.l).unwrap();
        assert!(close(f_eval(&spec, c.lambda).unwrap(), c.f, 1e-14), "f n={} l={}", c.n, c.l);
        let g = f_grad(&spec, c.lambda).unwrap();
        for (a, b) in g.iter().zip(c.grad) {
            assert!(close(*a, *b, 1e-13), "grad n={} l={}: {a} vs {b}", c.n, c.l);
        }
        assert!(close(sum_fi_closed(quot, c.lambda).unwrap(), c.sum_fi, 1e-13));
        assert!(close(sum_lambda2_fi_closed(quot, c.lambda).unwrap(), c.sum_l2_fi, 1e-13));
        assert!(close(uniqueness_margin(quot, c.lambda).unwrap(), c.margin, 1e-13));
    }
}

#[test]
fn elementary_polynomials_small_cases() {
    assert_eq!(elementary_all(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
    assert_eq!(normalized_elementary(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0 / 3.0);
    assert_eq!(f_eval(&q(2, 0), &[4.0, 9.0]).unwrap(), 6.0);
    assert!(close(f_eval(&q(2, 1), &[1.0, 3.0]).unwrap(), 1.5, 1e-15));
}

#[test]
fn normalization_at_ones() {
    for n in 1..=5 {
        for l in 0..n {
            let ones = vec![1.0; n];
            let e = f_full(&q(n, l), &ones, true).unwrap();
            assert!((e.value - 1.0).abs() < 1e-13, "n={n} l={l}");
            let s: f64 = e.grad.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n} l={l} sum={s}");
            assert!(e.hess.is_some());
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(CurvatureSpec::quotient(3, 3), Err(Error::InvalidSpec(_))));
    assert!(matches!(CurvatureSpec::quotient(0, 0), Err(Error::InvalidSpec(_))));
    assert!(matches!(
        f_eval(&q(2, 0), &[1.0, -1.0]),
        Err(Error::ConeViolation { index: 1, .. })
    ));
    assert!(matches!(
        f_eval(&q(2, 0), &[1.0, 2.0, 3.0]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(CurvatureSpec::concave_sum(vec![(0.5, q(2, 0)), (0.6, q(2, 1))]).is_err());
    assert!(CurvatureSpec::concave_sum(vec![(0.5, q(2, 0)), (0.5, q(3, 1))]).is_err());
}

#[test]
fn text_form_round_trips() {
    for text in [
        "quotient n=2 l=0",
        "sum(0.5*quotient n=2 l=0, 0.5*quotient n=2 l=1)",
        "product(0.25*quotient n=3 l=0, 0.75*quotient n=3 l=2)",
    ] {
        let spec: CurvatureSpec = text.parse().unwrap();
        assert_eq!(spec.to_string(), text);
    }
    assert!("quotient n=2 l=2".parse::<CurvatureSpec>().is_err());
    assert!("quotient n=2".parse::<CurvatureSpec>().is_err());
    assert!("cubic n=2 l=0".parse::<CurvatureSpec>().is_err());
}

#[test]
fn maclaurin_inequality() {
    let p = maclaurin_pair(&[1.0, 2.0, 3.0], 1).unwrap();
    assert!(p.holds());
    assert!(maclaurin_pair(&[2.0, 2.0, 2.0], 1).unwrap().is_equality(1e-14));
    assert!(maclaurin_check(&[0.1, 5.0, 7.0, 30.0], 2).unwrap());
}

#[test]
fn asymptotic_limits() {
    assert_eq!(Quotient::new(3, 0).unwrap().asymptotic_limit(), f64::INFINITY);
    assert!((Quotient::new(2, 1).unwrap().asymptotic_limit() - 2.0).abs() < 1e-15);
    assert!((Quotient::new(4, 2).unwrap().asymptotic_limit() - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn structure_and_margin_reports() {
    let r = check_structure(&q(3, 2), 500, 7);
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.samples, 500);
    let m = margin_survey(&q(4, 3), 500, 7);
    assert_eq!(m.nonpositive, 0);
    assert_eq!(m.below_one_minus_f2, 0);
    assert!(m.closed_form_error <= 1e-10);
    assert!(in_uniqueness_class(&q(5, 3), 10, 1));
    // The Gauss curvature quotient in dimension 3 is outside the class.
    assert!(!in_uniqueness_class(&q(3, 0), 2000, 1));
}

#[test]
fn structure_report_is_seed_deterministic() {
    let a = check_structure(&q(3, 1), 300, 42);
    let b = check_structure(&q(3, 1), 300, 42);
    assert_eq!(a, b);
}

fn cone_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, n).prop_map(|v| v.into_iter().map(f64::exp).collect())
}

fn spec_and_point() -> impl Strategy<Value = (CurvatureSpec, Vec<f64>)> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 0..n))
        .prop_flat_map(|(n, l)| (Just(q(n, l)), cone_point(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn homogeneous_of_degree_one((spec, lambda) in spec_and_point(), t in 0.01f64..100.0) {
        let f = f_eval(&spec, &lambda).unwrap();
        let scaled: Vec<f64> = lambda.iter().map(|x| t * x).collect();
        let ft = f_eval(&spec, &scaled).unwrap();
        prop_assert!((ft - t * f).abs() <= 1e-12 * t * f);
    }

    #[test]
    fn monotone_and_bounded_by_mean((spec, lambda) in spec_and_point()) {
        let e = f_full(&spec, &lambda, false).unwrap();
        prop_assert!(e.value > 0.0);
        prop_assert!(e.grad.iter().all(|g| *g > 0.0));
        let mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
        prop_assert!(e.value <= mean * (1.0 + 1e-12));
        prop_assert!(e.grad.iter().sum::<f64>() >= 1.0 - 1e-12);
    }

    #[test]
    fn euler_relation((spec, lambda) in spec_and_point()) {
        let e = f_full(&spec, &lambda, false).unwrap();
        let euler: f64 = e.grad.iter().zip(&lambda).map(|(g, x)| g * x).sum();
        prop_assert!((euler - e.value).abs() <= 1e-12 * e.value);
    }

    #[test]
    fn concave_hessian((spec, lambda) in spec_and_point()) {
        let n = lambda.len();
        let h = f_hess(&spec, &lambda).unwrap();
        let frob = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Rayleigh quotients on coordinate and pair directions.
        for i in 0..n {
            prop_assert!(h[i * n + i] <= 1e-8 * (1.0 + frob));
            for j in 0..n {
                let v = h[i * n + i] + h[j * n + j] + 2.0 * h[i * n + j];
                prop_assert!(v <= 2e-8 * (1.0 + frob));
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences((spec, lambda) in spec_and_point()) {
        let g = f_grad(&spec, &lambda).unwrap();
        for i in 0..lambda.len() {
            let step = 1e-6 * lambda[i];
            let mut a = lambda.clone();
            let mut b = lambda.clone();
            a[i] += step;
            b[i] -= step;
            let fd = (f_eval(&spec, &a).unwrap() - f_eval(&spec, &b).unwrap()) / (2.0 * step);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3), "i={} fd={} g={}", i, fd, g[i]);
        }
    }

    #[test]
    fn closed_forms_match_direct_sums((spec, lambda) in spec_and_point()) {
        let quot = spec.as_quotient().unwrap();
        let g = f_grad(&spec, &lambda).unwrap();
        let s1: f64 = g.iter().sum();
        let s2: f64 = g.iter().zip(&lambda).map(|(g, x)| g * x * x).sum();
        let c1 = sum_fi_closed(quot, &lambda).unwrap();
        let c2 = sum_lambda2_fi_closed(quot, &lambda).unwrap();
        let m = uniqueness_margin(quot, &lambda).unwrap();
        prop_assert!((c1 - s1).abs() <= 1e-10 * s1);
        prop_assert!((c2 - s2).abs() <= 1e-10 * s2);
        prop_assert!((m - (s1 - s2)).abs() <= 1e-10 * (s1 + s2));
    }

    #[test]
    fn margin_lower_bound_in_class(n in 2usize..=5, top in any::<bool>(), lambda in cone_point(5)) {
        let l = if top { n - 1 } else { n - 2 };
        let spec = q(n, l);
        let lambda = &lambda[..n];
        let f = f_eval(&spec, lambda).unwrap();
        prop_assume!(f < 1.0);
        let m = uniqueness_margin(spec.as_quotient().unwrap(), lambda).unwrap();
        prop_assert!(m >= 1.0 - f * f - 1e-9, "n={} l={} f={} m={}", n, l, f, m);
    }

    #[test]
    fn combinations_stay_normalized(w in 0.05f64..0.95, lambda in cone_point(3)) {
        let parts = vec![(w, q(3, 0)), (1.0 - w, q(3, 2))];
        for spec in [
            CurvatureSpec::concave_sum(parts.clone()).unwrap(),
            CurvatureSpec::concave_product(parts).unwrap(),
        ] {
            prop_assert!((f_eval(&spec, &[1.0; 3]).unwrap() - 1.0).abs() < 1e-13);
            let f = f_eval(&spec, &lambda).unwrap();
            let mean = lambda.iter().sum::<f64>() / 3.0;
            prop_assert!(f <= mean * (1.0 + 1e-12));
        }
    }
}
