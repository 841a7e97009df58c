use approx::assert_relative_eq;
use nalgebra::DMatrix;
use nonclassical::bochner::{determinant_test, min_eigenvalue, modulus_test, scan_grid, scan_line, Verdict};
use nonclassical::charfunc::{estimate_on_grid, CharFuncGrid};
use nonclassical::filters::NCFilter;
use nonclassical::grid::GridSpec;
use nonclassical::quasiprob::Filtered;
use nonclassical::states::{charfunc_analytic, equally_spaced_phases, sample_quadratures, AnalyticState};
use nonclassical::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn classical_state() -> impl Strategy<Value = AnalyticState> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| AnalyticState::coherent(a, b)),
        (0.01..3.0f64).prop_map(AnalyticState::thermal),
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, d)| AnalyticState::equal_mixture(vec![
            AnalyticState::coherent(a, b),
            AnalyticState::coherent(d, -a),
        ])),
    ]
}

fn points(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.5..2.5f64, -2.5..2.5f64).prop_map(|(a, b)| c(a, b)), 1..=max)
}

#[test]
fn modulus_examples() {
    let region = scan_grid(&GridSpec::new(1.0, 0.05).unwrap());
    let sq = modulus_test(&AnalyticState::squeezed(0.2, 5.0), &region, 5.0).unwrap();
    assert_eq!(sq.verdict, Verdict::Nonclassical);
    assert_relative_eq!(sq.statistic, 0.4f64.exp(), epsilon = 1e-12);
    let at_one = modulus_test(&AnalyticState::squeezed(0.2, 5.0), &[c(1.0, 0.0)], 5.0).unwrap();
    assert_relative_eq!(at_one.statistic, 1.491_824_7, epsilon = 1e-7);

    let th = modulus_test(&AnalyticState::thermal(1.0), &region, 5.0).unwrap();
    assert_eq!(th.statistic, 1.0);
    assert_eq!(th.points[0], c(0.0, 0.0));
    assert_eq!(th.verdict, Verdict::Inconclusive);
}

#[test]
fn sampled_modulus_needs_significance() {
    let data = sample_quadratures(&AnalyticState::squeezed(0.2, 5.0), &equally_spaced_phases(12), 20_000, 4).unwrap();
    let line = scan_line(0.0, 2.0, 0.1).unwrap();
    let v = modulus_test(&data, &line, 5.0).unwrap();
    assert!(v.is_nonclassical() && v.significance.unwrap() >= 5.0);
    let vac = sample_quadratures(&AnalyticState::coherent(0.0, 0.0), &equally_spaced_phases(12), 20_000, 4).unwrap();
    assert_eq!(modulus_test(&vac, &line, 5.0).unwrap().verdict, Verdict::Inconclusive);
}

#[test]
fn determinant_on_grid_source_and_range_error() {
    let data = sample_quadratures(&AnalyticState::squeezed(0.2, 5.0), &equally_spaced_phases(12), 20_000, 8).unwrap();
    let grid = estimate_on_grid(&data, GridSpec::new(2.0, 0.05).unwrap()).unwrap();
    let v = determinant_test(&grid, &[c(0.0, 0.0), c(1.0, 0.0)], 5.0).unwrap();
    assert!(v.is_nonclassical());
    let (p, r) = (v.sigma, v.sigma_resampled.unwrap());
    assert!(p > 0.0 && (r / p - 1.0).abs() < 0.3, "{p} vs {r}");
    assert!(matches!(
        determinant_test(&grid, &[c(0.0, 0.0), c(2.5, 0.0)], 5.0),
        Err(Error::OutOfRange(_))
    ));
}

#[test]
fn thermal_determinants_are_nonnegative() {
    let pts = [c(0.3, -0.2), c(-1.0, 0.5), c(0.8, 1.1), c(0.0, -1.4)];
    let v = determinant_test(&AnalyticState::thermal(1.0), &pts, 5.0).unwrap();
    assert!(v.statistic >= -1e-10);
    assert_eq!(v.verdict, Verdict::Inconclusive);
}

#[test]
fn analytic_grid_lookup_matches_state() {
    let spec = GridSpec::new(3.0, 0.05).unwrap();
    let grid = CharFuncGrid::analytic(&AnalyticState::squeezed(0.2, 5.0), spec).unwrap();
    let v = determinant_test(&grid, &[c(0.0, 0.0), c(1.0, 0.0)], 5.0).unwrap();
    assert_relative_eq!(v.statistic, 1.0 - 0.8f64.exp(), epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn classical_determinants_nonnegative(state in classical_state(), pts in points(6)) {
        let d = determinant_test(&state, &pts, 5.0).unwrap();
        prop_assert!(d.statistic >= -1e-10, "{} {:?}", d.statistic, pts);
    }

    #[test]
    fn filtering_keeps_classical_verdicts(state in classical_state(), pts in points(6), w in 0.3..3.0f64, tri in any::<bool>()) {
        let filter = if tri { NCFilter::triangular(w).unwrap() } else { NCFilter::autocorrelation(w).unwrap() };
        let f = Filtered { inner: state, filter };
        let d = determinant_test(&f, &pts, 5.0).unwrap();
        prop_assert!(d.statistic >= -1e-10);
        prop_assert_eq!(d.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn modulus_is_two_point_determinant(re in -2.0..2.0f64, im in -2.0..2.0f64, vx in 0.1..0.9f64, vp in 1.1..6.0f64) {
        let state = AnalyticState::squeezed(vx, vp);
        let b = c(re, im);
        let m = modulus_test(&state, &[b], 5.0).unwrap();
        let d = determinant_test(&state, &[c(0.0, 0.0), b], 5.0).unwrap();
        prop_assert!((d.statistic - (1.0 - m.statistic * m.statistic)).abs() <= 1e-9 * m.statistic.powi(2).max(1.0));
        prop_assert_eq!(m.is_nonclassical(), d.is_nonclassical());
    }

    #[test]
    fn hadamard_products_stay_psd(state in classical_state(), pts in points(6), w in 0.3..3.0f64) {
        let filter = NCFilter::autocorrelation(w).unwrap();
        let n = pts.len();
        let a = DMatrix::from_fn(n, n, |i, j| charfunc_analytic(&state, pts[i] - pts[j]).unwrap());
        let b = DMatrix::from_fn(n, n, |i, j| c(filter.eval(pts[i] - pts[j]), 0.0));
        prop_assert!(min_eigenvalue(&a.component_mul(&b)) >= -1e-10);
    }
}
