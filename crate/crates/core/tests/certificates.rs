use proptest::prelude::*;

use mems_extremal::certificate::{
    certify, decide, h_function, omega_eval, run_table1, stability_margin, subsolution_margin, sup_h,
    SubsolutionSpec, Verdict, DEFAULT_GRID,
};
use mems_extremal::constants::{hn, ProblemParams};

fn spec(m: f64, n: usize, p: f64) -> SubsolutionSpec {
    SubsolutionSpec::new(m, ProblemParams::new(n, p).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sup_h_closed_form_agrees_with_scan(m in 2.0f64..8.0, n in 5usize..48, p in 2.0f64..5000.0) {
        let s = spec(m, n, p);
        let sup = sup_h(&s).unwrap();
        prop_assert!((sup.sup_value - sup.grid_value).abs() <= 1e-9 * sup.sup_value);
        prop_assert!((0.0..=1.0).contains(&sup.x_star));
    }

    #[test]
    fn quadratic_base_stays_above_one(p in 1.0f64..1e5, r in 0.0f64..=1.0) {
        prop_assert!(spec(2.0, 32, p).base(r) >= 1.0 - 1e-12);
    }

    #[test]
    fn negative_margins_never_certify(
        sub in -10.0f64..10.0, stab in -10.0f64..10.0, beta in 0.0f64..10.0, lp in 0.0f64..10.0, eq: bool,
    ) {
        let v = decide(sub, stab, beta, lp, eq);
        if sub < 0.0 || stab < 0.0 {
            prop_assert_eq!(v, Verdict::Inconclusive);
        }
    }

    #[test]
    fn omega_is_clamped_profile(m in 2.0f64..8.0, p in 2.0f64..1000.0) {
        let s = spec(m, 13, p);
        prop_assert!(omega_eval(&s, 1.0).abs() < 1e-14);
        prop_assert_eq!(omega_eval(&s, 0.0), 1.0);
    }
}

#[test]
fn h_at_endpoints() {
    let s = spec(3.5, 13, 250.0);
    assert!((h_function(&s, 0.0).unwrap() - s.a1.powf(251.0)).abs() < 1e-12 * s.a1.powf(251.0));
    let one = s.a1 + s.a2 * s.k1_val / s.k0_val;
    assert!((h_function(&s, 1.0).unwrap() - one).abs() < 1e-12 * one);
}

#[test]
fn quadratic_candidate_approaches_e2() {
    let e2 = 2f64.exp();
    let gaps: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&p| (sup_h(&spec(2.0, 32, p)).unwrap().sup_value - e2).abs())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn trivial_margins() {
    let s = spec(3.5, 13, 250.0);
    let sup = sup_h(&s).unwrap().sup_value;
    assert_eq!(subsolution_margin(&s, 0.0).unwrap(), -sup);
    assert!(stability_margin(&s, 1e6, DEFAULT_GRID).unwrap().margin < 0.0);
    assert!(stability_margin(&s, 1.0, 999).is_err());
}

#[test]
fn analytic_margin_agrees_with_discrete_operator() {
    for r in run_table1(250.0, DEFAULT_GRID).unwrap() {
        if r.subsolution_margin >= 0.0 {
            assert!(r.discrete_check.pass, "n = {}: {:?}", r.n, r.discrete_check);
        }
    }
}

#[test]
fn equality_branch_is_detected() {
    let (n, p) = (40, 5000.0);
    let s = spec(2.0, n, p);
    let t = hn(n) / (p * s.k0_val);
    let r = certify(&s, t, t, DEFAULT_GRID).unwrap();
    assert!(r.equality_case);
    assert!(r.stability_margin.abs() < 1e-6 * hn(n));
    // at β = λ′ the verdict can only be the singular one or inconclusive
    assert_ne!(r.verdict, Verdict::LambdaStarBounded);
}

#[test]
fn small_p_breaks_some_row() {
    let rows = run_table1(2.0, DEFAULT_GRID).unwrap();
    assert_eq!(rows.len(), 19);
    assert!(rows.iter().any(|r| r.verdict != Verdict::SingularCertified));
}

#[test]
fn boundary_rule_between_bounded_and_singular() {
    // pick a pair that passes both margins, then collapse β onto λ′
    let s = spec(3.5, 31, 250.0);
    let a = certify(&s, 3.15, 4.0, DEFAULT_GRID).unwrap();
    assert_eq!(a.verdict, Verdict::SingularCertified);
    let b = certify(&s, 3.15, 3.15, DEFAULT_GRID).unwrap();
    assert_eq!(b.verdict, Verdict::LambdaStarBounded);
    assert_eq!(b.lambda_star_upper_k0, Some(3.15));
}
