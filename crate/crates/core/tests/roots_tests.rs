//! Root stage: Descartes bounds, isolation by bisection, and the witness
//! family attaining the bound.

mod common;

use avgcycles::averaging::AveragedPolynomial;
use avgcycles::roots::{descartes_bound, isolate_positive_roots, max_positive_roots_witness};
use avgcycles::Error;
use common::*;

fn vertical_target_poly() -> AveragedPolynomial {
    AveragedPolynomial::from_coeffs(VERTICAL_TARGET_COEFFS).unwrap()
}

fn horizontal_target_poly() -> AveragedPolynomial {
    AveragedPolynomial::from_coeffs(HORIZONTAL_TARGET_COEFFS).unwrap()
}

#[test]
fn descartes_bounds_for_the_worked_examples() {
    assert_eq!(descartes_bound(&vertical_target_poly()).unwrap(), 7);
    assert_eq!(descartes_bound(&horizontal_target_poly()).unwrap(), 3);
}

#[test]
fn descartes_bound_edge_cases() {
    let single = AveragedPolynomial::from_coeffs([(1u32, 1.0)]).unwrap();
    assert_eq!(descartes_bound(&single).unwrap(), 0);
    let no_variation = AveragedPolynomial::from_coeffs([(1u32, 2.0), (4, 5.0)]).unwrap();
    assert_eq!(descartes_bound(&no_variation).unwrap(), 0);
    let one_variation = AveragedPolynomial::from_coeffs([(2u32, -1.0), (5, 3.0)]).unwrap();
    assert_eq!(descartes_bound(&one_variation).unwrap(), 1);
    let zero = AveragedPolynomial::from_coeffs(std::iter::empty()).unwrap();
    assert!(matches!(descartes_bound(&zero), Err(Error::ZeroPolynomial)));
}

#[test]
fn witness_family_attains_every_bound() {
    for r in 1..=8u32 {
        let h = max_positive_roots_witness(r).unwrap();
        assert_eq!(
            descartes_bound(&h).unwrap(),
            r - 1,
            "witness r={r} has bound r-1"
        );
        let report = isolate_positive_roots(&h, 1e-9, None).unwrap();
        assert_eq!(report.roots.len() as u32, r - 1, "witness r={r} root count");
        assert!(report.bound_attained, "witness r={r} attains its bound");
        for (k, rec) in report.roots.iter().enumerate() {
            let want = (k + 1) as f64;
            assert!(
                (rec.z_star - want).abs() < 1e-8,
                "witness r={r}: root {} vs {want}",
                rec.z_star
            );
            assert!(rec.simple);
        }
    }
}

#[test]
fn witness_specific_coefficients() {
    // r = 3: z(z-1)(z-2) = 2z - 3z² + z³.
    let h3 = max_positive_roots_witness(3).unwrap();
    let coeffs: Vec<(u32, f64)> = h3.coeffs().collect();
    assert_eq!(coeffs, vec![(1, 2.0), (2, -3.0), (3, 1.0)]);
    // r = 8 reproduces the vertical example's target coefficients.
    let h8 = max_positive_roots_witness(8).unwrap();
    for (n, want) in VERTICAL_TARGET_COEFFS {
        assert_eq!(h8.coeff(n), want, "witness r=8 coefficient of z^{n}");
    }
    // r = 1 is the bare monomial z with no positive roots.
    let h1 = max_positive_roots_witness(1).unwrap();
    assert_eq!(h1.coeffs().collect::<Vec<_>>(), vec![(1, 1.0)]);
    assert!(matches!(
        max_positive_roots_witness(0),
        Err(Error::IndexOutOfRange { .. })
    ));
    assert!(matches!(
        max_positive_roots_witness(9),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn isolates_the_vertical_example_roots() {
    let h = vertical_target_poly();
    let report = isolate_positive_roots(&h, 1e-9, Some(8.0)).unwrap();
    assert_eq!(report.descartes_bound, 7);
    assert_eq!(report.roots.len(), 7);
    assert!(report.bound_attained);
    assert!(report.suspected_multiple.is_empty());
    for (k, rec) in report.roots.iter().enumerate() {
        let want = (k + 1) as f64;
        assert!(
            (rec.z_star - want).abs() < 1e-8,
            "root {} vs {want}",
            rec.z_star
        );
        assert!(rec.simple, "root {want} is simple");
        assert_rel(rec.h_deriv, h.eval_deriv(rec.z_star), 1e-12, "h′ annotation");
        // Bracket invariant: contains the root and spans a sign change.
        let (lo, hi) = rec.bracket;
        assert!(lo <= rec.z_star && rec.z_star <= hi);
        assert!(hi - lo <= 1e-9 * 1.0001, "bracket refined to tolerance");
        assert!(h.eval(lo) * h.eval(hi) < 0.0, "bracket spans a sign change");
    }
    // Roots arrive sorted and distinct.
    for pair in report.roots.windows(2) {
        assert!(pair[0].z_star < pair[1].z_star);
    }
}

#[test]
fn isolates_the_horizontal_example_roots() {
    let h = horizontal_target_poly();
    let report = isolate_positive_roots(&h, 1e-9, Some(8.0)).unwrap();
    assert_eq!(report.descartes_bound, 3);
    assert_eq!(report.roots.len(), 3);
    assert!(report.bound_attained);
    let wants = [1.0, 2f64.sqrt(), 3f64.sqrt()];
    for (rec, want) in report.roots.iter().zip(wants) {
        assert!(
            (rec.z_star - want).abs() < 1e-8,
            "root {} vs {want}",
            rec.z_star
        );
        assert!(rec.simple);
    }
}

#[test]
fn cauchy_bound_reaches_outlying_roots() {
    // z(z-1)(z-9): the automatic search bound (1 + max|cᵢ|/|c_lead| = 11)
    // must cover the root at 9, while an explicit z_max = 5 excludes it.
    let h = AveragedPolynomial::from_coeffs([(1u32, 9.0), (2, -10.0), (3, 1.0)]).unwrap();
    let auto = isolate_positive_roots(&h, 1e-9, None).unwrap();
    assert_eq!(auto.roots.len(), 2);
    assert!((auto.roots[0].z_star - 1.0).abs() < 1e-8);
    assert!((auto.roots[1].z_star - 9.0).abs() < 1e-8);
    assert!((auto.search_interval.1 - 11.0).abs() < 1e-12);
    assert!(auto.bound_attained);

    let capped = isolate_positive_roots(&h, 1e-9, Some(5.0)).unwrap();
    assert_eq!(capped.roots.len(), 1);
    assert!(!capped.bound_attained, "one of two sign variations unrealized");
}

#[test]
fn flags_a_double_root_as_suspected_multiple() {
    // z(z-2)² touches zero at 2 without a sign change. At a coarse tolerance
    // the grid sees the dip and reports it separately from the accepted roots.
    let h = AveragedPolynomial::from_coeffs([(1u32, 4.0), (2, -4.0), (3, 1.0)]).unwrap();
    let report = isolate_positive_roots(&h, 1e-3, Some(5.0)).unwrap();
    assert!(report.roots.is_empty(), "no sign-change roots");
    assert!(
        report
            .suspected_multiple
            .iter()
            .any(|&z| (z - 2.0).abs() < 0.05),
        "suspected multiples {:?} should include ≈2",
        report.suspected_multiple
    );
    assert!(!report.bound_attained, "bound 2 cannot be attained");
}

#[test]
fn zero_polynomial_reports_empty() {
    let zero = AveragedPolynomial::from_coeffs(std::iter::empty()).unwrap();
    let report = isolate_positive_roots(&zero, 1e-9, Some(8.0)).unwrap();
    assert!(report.roots.is_empty());
    assert!(report.suspected_multiple.is_empty());
    assert_eq!(report.descartes_bound, 0);
    assert!(report.bound_attained);
}

#[test]
fn no_positive_roots_when_signs_agree() {
    let h = AveragedPolynomial::from_coeffs([(1u32, 1.0), (3, 2.0), (7, 0.5)]).unwrap();
    let report = isolate_positive_roots(&h, 1e-9, None).unwrap();
    assert!(report.roots.is_empty());
    assert!(report.bound_attained, "bound 0 is trivially attained");
}

#[test]
fn search_interval_is_recorded() {
    let h = horizontal_target_poly();
    let report = isolate_positive_roots(&h, 1e-7, Some(4.0)).unwrap();
    assert_eq!(report.tolerance, 1e-7);
    assert_eq!(report.search_interval, (1e-7, 4.0));
    assert_eq!(report.roots.len(), 3);
}

#[test]
#[should_panic(expected = "tolerance must be positive")]
fn rejects_nonpositive_tolerance() {
    let h = horizontal_target_poly();
    let _ = isolate_positive_roots(&h, 0.0, None);
}
