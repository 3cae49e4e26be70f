mod support;

use lagrange_galerkin::mesh::TOL_BARY;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn walk_matches_exhaustive_scan() {
    assert_eq!(support::location_mismatches(), 0);
}

#[test]
fn location_round_trip() {
    let mesh = support::square(16);
    let h = mesh.h();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let loc = mesh.locate_point(x, None).unwrap();
        let b = loc.bary;
        assert!(b.iter().all(|&l| (-TOL_BARY..=1.0 + TOL_BARY).contains(&l)));
        assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let mut back = [0.0; 2];
        for (l, &v) in b.iter().zip(&mesh.triangle(loc.element)) {
            let p = mesh.vertex(v);
            back[0] += l * p[0];
            back[1] += l * p[1];
        }
        assert!((back[0] - x[0]).abs() <= 1e-12 * h && (back[1] - x[1]).abs() <= 1e-12 * h);
        let via_map = mesh.affine(loc.element).map(loc.reference());
        assert!((via_map[0] - x[0]).abs() <= 1e-12 * h && (via_map[1] - x[1]).abs() <= 1e-12 * h);
    }
}

#[test]
fn transport_rhs_against_composite_oracle() {
    let r = support::rhs_oracle();
    // Kinks of the transported field across element edges limit the
    // composite rule to second order; still well below the tolerance.
    assert!(r.oracle_spread < 1e-5, "{}", r.oracle_spread);
    assert!(r.err42 <= 1e-4, "42-point rule: {}", r.err42);
    assert!(r.err7 > r.err42);
}

#[test]
fn fluctuation_against_dense_least_squares() {
    let e = support::projection_oracle_error();
    assert!(e <= 1e-10, "{e}");
}

#[test]
fn pcg_against_dense_cholesky() {
    let e = support::solver_oracle_error();
    assert!(e <= 1e-9, "{e}");
}
