mod common;

use common::rng;
use lindsim::pauli::{
    entrywise_conjugate, multiply, parse_term, transpose, PauliString, PauliSum, PhasedPauli,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng as _;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn phased(label: &str, theta: f64) -> PhasedPauli {
    PhasedPauli::with_phase(PauliString::parse(label).unwrap(), theta)
}

fn matrix_close(a: &nalgebra::DMatrix<Complex64>, b: &nalgebra::DMatrix<Complex64>, tol: f64) {
    assert!((a - b).norm() <= tol, "matrices differ by {}", (a - b).norm());
}

#[test]
fn parse_and_format_round_trip() {
    for label in ["I", "X", "ZI", "XY", "IXYZ", "YYZZXI"] {
        let p = PauliString::parse(label).unwrap();
        assert_eq!(p.label(), label);
        assert_eq!(p.n(), label.len());
    }
}

#[test]
fn parse_stores_bits_big_endian() {
    let p = PauliString::parse("ZI").unwrap();
    assert!(p.z_bit(0) && !p.x_bit(0));
    assert!(!p.z_bit(1) && !p.x_bit(1));
}

#[test]
fn parse_rejects_bad_letters_with_position() {
    let err = PauliString::parse("Q").unwrap_err().to_string();
    assert!(err.contains("index 0"), "{err}");
    let err = PauliString::parse("XQZ").unwrap_err().to_string();
    assert!(err.contains("index 1"), "{err}");
    assert!(PauliString::parse("").is_err());
}

#[test]
fn parse_term_keeps_coefficient_exact() {
    let (coeff, p) = parse_term("XY", c(0.0, -0.5)).unwrap();
    assert_eq!(coeff, c(0.0, -0.5));
    assert_eq!(p.label(), "XY");
}

#[test]
fn identity_times_x_is_x() {
    let got = multiply(&phased("I", 0.0), &phased("X", 0.0)).unwrap();
    assert_eq!(got.pauli.label(), "X");
    assert!(got.phase().abs() < 1e-15);
}

#[test]
fn x_times_y_is_i_z() {
    let got = multiply(&phased("X", 0.0), &phased("Y", 0.0)).unwrap();
    assert_eq!(got.pauli.label(), "Z");
    assert!((got.phase() - PI / 2.0).abs() < 1e-15);
}

#[test]
fn phase_pi_y_times_y_is_phase_pi_identity() {
    // Dense 2x2 product oracle: (e^{iπ}Y)·Y = e^{iπ}·1.
    let a = phased("Y", PI);
    let b = phased("Y", 0.0);
    let got = multiply(&a, &b).unwrap();
    let oracle = a.to_matrix().unwrap() * b.to_matrix().unwrap();
    matrix_close(&got.to_matrix().unwrap(), &oracle, 1e-12);
    assert_eq!(got.pauli.label(), "I");
    assert!((got.phase() - PI).abs() < 1e-12);
}

#[test]
fn multiply_rejects_size_mismatch() {
    assert!(multiply(&phased("X", 0.0), &phased("XX", 0.0)).is_err());
}

#[test]
fn conjugate_of_x_is_x_and_of_y_flips() {
    let x = entrywise_conjugate(&phased("X", 0.0));
    assert_eq!(x.pauli.label(), "X");
    assert!(x.phase().abs() < 1e-15);
    let y = entrywise_conjugate(&phased("Y", 0.0));
    assert_eq!(y.pauli.label(), "Y");
    assert!((y.phase() - PI).abs() < 1e-15);
}

#[test]
fn conjugate_matches_dense_oracle_on_zy() {
    // conj(e^{iπ/2} Z⊗Y) computed entrywise on the 4x4 matrix.
    let p = phased("ZY", PI / 2.0);
    let got = entrywise_conjugate(&p).to_matrix().unwrap();
    let oracle = p.to_matrix().unwrap().map(|v| v.conj());
    matrix_close(&got, &oracle, 1e-12);
    // −π/2 from the phase plus π from the single Y letter: π/2 total.
    assert!((entrywise_conjugate(&p).phase() - PI / 2.0).abs() < 1e-12);
}

#[test]
fn transpose_examples() {
    let z = transpose(&phased("Z", 0.0));
    assert_eq!(z.pauli.label(), "Z");
    assert!(z.phase().abs() < 1e-15);
    let y = transpose(&phased("Y", 0.0));
    assert!((y.phase() - PI).abs() < 1e-15);
    // Dense transpose oracle on X⊗Y.
    let p = phased("XY", 0.3);
    let got = transpose(&p).to_matrix().unwrap();
    let oracle = p.to_matrix().unwrap().transpose();
    matrix_close(&got, &oracle, 1e-12);
}

#[test]
fn to_matrix_basics() {
    let id = phased("I", 0.0).to_matrix().unwrap();
    matrix_close(&id, &nalgebra::DMatrix::identity(2, 2), 0.0);
    let z = phased("Z", 0.0).to_matrix().unwrap();
    assert_eq!(z[(0, 0)], c(1.0, 0.0));
    assert_eq!(z[(1, 1)], c(-1.0, 0.0));
    // e^{iπ/2} X = [[0, i], [i, 0]].
    let px = phased("X", PI / 2.0).to_matrix().unwrap();
    assert!((px[(0, 1)] - c(0.0, 1.0)).norm() < 1e-15);
    assert!((px[(1, 0)] - c(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn to_matrix_respects_dense_limit() {
    let label = "X".repeat(7);
    let p = PauliString::parse(&label).unwrap();
    assert!(p.to_matrix().is_err());
}

#[test]
fn big_endian_kron_order() {
    // ZI must be Z on the most significant qubit: diag(1,1,−1,−1).
    let zi = phased("ZI", 0.0).to_matrix().unwrap();
    assert_eq!(zi[(0, 0)], c(1.0, 0.0));
    assert_eq!(zi[(1, 1)], c(1.0, 0.0));
    assert_eq!(zi[(2, 2)], c(-1.0, 0.0));
    assert_eq!(zi[(3, 3)], c(-1.0, 0.0));
}

#[test]
fn self_product_of_bare_string_is_identity() {
    let mut r = rng(7);
    for _ in 0..50 {
        let p = PhasedPauli::bare(common::random_pauli(3, &mut r));
        let sq = multiply(&p, &p).unwrap();
        assert!(sq.pauli.is_identity());
        assert!(sq.phase().abs() < 1e-15);
    }
}

#[test]
fn pauli_sum_merges_and_drops_zeros() {
    let x = PauliString::parse("X").unwrap();
    let z = PauliString::parse("Z").unwrap();
    let s = PauliSum::new(
        1,
        vec![(c(1.0, 0.0), x), (c(0.5, 0.0), z), (c(-1.0, 0.0), x)],
    )
    .unwrap();
    assert_eq!(s.len(), 1);
    assert!((s.l1_norm() - 0.5).abs() < 1e-15);
    let empty = PauliSum::new(1, vec![]).unwrap();
    assert_eq!(empty.l1_norm(), 0.0);
    assert!(empty.is_empty());
}

#[test]
fn pauli_sum_rejects_mixed_sizes() {
    let x = PauliString::parse("X").unwrap();
    assert!(PauliSum::new(2, vec![(c(1.0, 0.0), x)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiply_is_matrix_faithful(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let n = 1 + (seed as usize % 3);
        let a = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let b = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let prod = multiply(&a, &b).unwrap();
        let oracle = a.to_matrix().unwrap() * b.to_matrix().unwrap();
        prop_assert!((prod.to_matrix().unwrap() - oracle).norm() < 1e-12);
    }

    #[test]
    fn multiply_is_associative(seed in 0u64..10_000) {
        let mut r = rng(seed.wrapping_add(99));
        let n = 1 + (seed as usize % 3);
        let a = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let b = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let d = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let left = multiply(&multiply(&a, &b).unwrap(), &d).unwrap();
        let right = multiply(&a, &multiply(&b, &d).unwrap()).unwrap();
        prop_assert_eq!(left.pauli, right.pauli);
        let diff = (left.phase() - right.phase()).rem_euclid(2.0 * PI);
        prop_assert!(diff < 1e-9 || (2.0 * PI - diff) < 1e-9);
    }

    #[test]
    fn conjugate_and_transpose_are_involutions(seed in 0u64..10_000) {
        let mut r = rng(seed.wrapping_add(31));
        let n = 1 + (seed as usize % 3);
        let p = PhasedPauli::with_phase(common::random_pauli(n, &mut r), r.gen_range(-6.0..6.0));
        let cc = entrywise_conjugate(&entrywise_conjugate(&p));
        let tt = transpose(&transpose(&p));
        prop_assert_eq!(cc.pauli, p.pauli);
        prop_assert_eq!(tt.pauli, p.pauli);
        prop_assert!((cc.to_matrix().unwrap() - p.to_matrix().unwrap()).norm() < 1e-12);
        prop_assert!((tt.to_matrix().unwrap() - p.to_matrix().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn phase_is_canonical(theta in -100.0f64..100.0) {
        let p = phased("X", theta);
        let ph = p.phase();
        prop_assert!((0.0..2.0 * PI).contains(&ph));
        let diff = (ph - theta).rem_euclid(2.0 * PI);
        prop_assert!(diff < 1e-9 || (2.0 * PI - diff) < 1e-9);
    }
}
