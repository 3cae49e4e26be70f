//! Independent oracles shared by the oracle tests and the acceptance run.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use lagrange_galerkin::characteristics::VelocityField;
use lagrange_galerkin::elements::{evaluate_basis, get_rule, ElementKind};
use lagrange_galerkin::mesh::{
    build_macro_partition, build_uniform_mesh, Diagonal, MacroLevel, Mesh, Rect, Refinement, TauRule, TOL_BARY,
};
use lagrange_galerkin::space::FemSpace;
use lagrange_galerkin::sparse::{solve_spd, CsrMatrix, SolverOptions};
use lagrange_galerkin::stabilization::{fluctuation, MacroQuadrature, ProjectionSpace};
use lagrange_galerkin::transport::{assemble_transport_rhs, Field};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn square(n: usize) -> Mesh {
    build_uniform_mesh(Rect::centered_square(1.0).unwrap(), n, Diagonal::Forward).unwrap()
}

/// Lowest-id element whose barycentric coordinates are all above `-TOL_BARY`.
pub fn scan(mesh: &Mesh, x: [f64; 2]) -> usize {
    (0..mesh.num_elements())
        .find(|&k| mesh.barycentric(k, x).iter().all(|&l| l >= -TOL_BARY))
        .expect("point inside the domain")
}

/// Walk results that disagree with the exhaustive scan, out of 1000 random
/// points per mesh, with and without hints.
pub fn location_mismatches() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = 0;
    for mesh in [square(16), square(9).refine(Refinement::Barycentric3).unwrap()] {
        assert!(mesh.num_elements() <= 512);
        let mut hint = None;
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let expect = scan(&mesh, x);
            let warm = mesh.locate_point(x, hint).unwrap();
            let cold = mesh.locate_point(x, None).unwrap();
            bad += usize::from(warm.element != expect) + usize::from(cold.element != expect);
            hint = Some(warm.element);
        }
    }
    bad
}

/// `b_i` with every element split into `sub^2` sub-triangles, each
/// integrated with the 42-point rule.
pub fn composite_rhs(c: &Field, field: &VelocityField, dt: f64, sub: usize) -> Vec<f64> {
    let space = c.space();
    let mesh = space.mesh();
    let rule = get_rule(42).unwrap();
    let map = field.step_map(c.time + dt, dt);
    let s = 1.0 / sub as f64;
    let mut tris = Vec::with_capacity(sub * sub);
    for i in 0..sub {
        for j in 0..sub - i {
            let (x, y) = (i as f64 * s, j as f64 * s);
            tris.push([[x, y], [x + s, y], [x, y + s]]);
            if i + j + 1 < sub {
                tris.push([[x + s, y], [x + s, y + s], [x, y + s]]);
            }
        }
    }
    assert_eq!(tris.len(), sub * sub);
    let mut b = vec![0.0; space.ndof()];
    for k in 0..mesh.num_elements() {
        let a = mesh.affine(k);
        let dofs = space.element_dofs(k);
        for t in &tris {
            for q in 0..rule.len() {
                let r = rule.reference_point(q);
                let xi = [
                    t[0][0] + r[0] * (t[1][0] - t[0][0]) + r[1] * (t[2][0] - t[0][0]),
                    t[0][1] + r[0] * (t[1][1] - t[0][1]) + r[1] * (t[2][1] - t[0][1]),
                ];
                let w = rule.weights[q] * a.det.abs() * s * s;
                let v = c.evaluate_point(map.apply(a.map(xi)).unwrap()).unwrap();
                let e = evaluate_basis(space.kind(), xi);
                for (&d, phi) in dofs.iter().zip(e.values()) {
                    b[d] += w * v * phi;
                }
            }
        }
    }
    for (bi, &m) in b.iter_mut().zip(space.boundary_mask()) {
        if m {
            *bi = 0.0;
        }
    }
    b
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = b.iter().map(|y| y * y).sum();
    (d / n).sqrt()
}

pub struct RhsOracle {
    /// 256-subdivision oracle vs the 64-subdivision one.
    pub oracle_spread: f64,
    pub err42: f64,
    pub err7: f64,
}

/// P2 field of a smooth function on 512 elements, rotated by a fifth of a
/// time unit.
pub fn rhs_oracle() -> RhsOracle {
    let mesh = Arc::new(square(16));
    assert!(mesh.num_elements() <= 512);
    let space = Arc::new(FemSpace::new(mesh, ElementKind::P2).unwrap());
    let smooth = |x: [f64; 2]| (0.5 * PI * x[0]).cos() * (0.5 * PI * x[1]).cos() * (1.0 + 0.5 * x[0]);
    let c = Field::from_coeffs(space.clone(), space.interpolate(smooth), 0.0).unwrap();
    let field = VelocityField::benchmark_rotation();
    let dt = 0.05;
    let oracle = composite_rhs(&c, &field, dt, 16);
    let coarser = composite_rhs(&c, &field, dt, 8);
    let b42 = assemble_transport_rhs(&c, &field, dt, get_rule(42).unwrap()).unwrap();
    let b7 = assemble_transport_rhs(&c, &field, dt, get_rule(7).unwrap()).unwrap();
    RhsOracle {
        oracle_spread: rel_l2(&coarser, &oracle),
        err42: rel_l2(&b42, &oracle),
        err7: rel_l2(&b7, &oracle),
    }
}

/// Largest pointwise gap between the P1disc fluctuation of P2 basis
/// gradients and a weighted least-squares residual on the monomials
/// {1, x, y} computed with dense normal equations.
pub fn projection_oracle_error() -> f64 {
    let fine = square(2).refine(Refinement::Barycentric3).unwrap();
    let part = build_macro_partition(&fine, MacroLevel::Two, Refinement::Barycentric3, TauRule::Proportional(0.1)).unwrap();
    let mesh = Arc::new(fine);
    let space = FemSpace::new(mesh.clone(), ElementKind::P2).unwrap();
    let rule = get_rule(7).unwrap();
    let mut worst = 0.0f64;
    for mac in part.macros() {
        let mq = MacroQuadrature::new(&mesh, mac, rule);
        let np = mq.len();
        let psi = DMatrix::from_fn(np, 3, |p, j| match j {
            0 => 1.0,
            1 => mq.points[p][0],
            _ => mq.points[p][1],
        });
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&mq.weights));
        let normal = (psi.transpose() * &w * &psi).cholesky().unwrap();
        let mut dofs: Vec<usize> = mac.elements.iter().flat_map(|&k| space.element_dofs(k).to_vec()).collect();
        dofs.sort_unstable();
        dofs.dedup();
        for &dof in &dofs {
            let g: Vec<[f64; 2]> = mac
                .elements
                .iter()
                .flat_map(|&k| {
                    let aff = mesh.affine(k);
                    let local = space.element_dofs(k).iter().position(|&d| d == dof);
                    (0..rule.len()).map(move |q| match local {
                        Some(j) => aff.push_gradient(evaluate_basis(ElementKind::P2, rule.reference_point(q)).grads()[j]),
                        None => [0.0, 0.0],
                    })
                })
                .collect();
            let kappa = fluctuation(&mq, ProjectionSpace::P1Disc, &g).unwrap();
            for comp in 0..2 {
                let gv = DVector::from_fn(np, |p, _| g[p][comp]);
                let coef = normal.solve(&(psi.transpose() * &w * &gv));
                let resid = &gv - &psi * coef;
                for p in 0..np {
                    worst = worst.max((kappa[p][comp] - resid[p]).abs());
                }
            }
        }
    }
    worst
}

/// Largest entry gap between PCG and a dense Cholesky solve of a random
/// SPD system.
pub fn solver_oracle_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 50;
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let a = g.transpose() * &g + DMatrix::identity(n, n);
    let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let exact = a.clone().cholesky().unwrap().solve(&b);
    let dense: Vec<f64> = (0..n * n).map(|i| a[(i / n, i % n)]).collect();
    let csr = CsrMatrix::from_dense(n, &dense);
    let sol = solve_spd(&csr, b.as_slice(), None, SolverOptions::default()).unwrap();
    (0..n).map(|i| (sol.x[i] - exact[i]).abs()).fold(0.0, f64::max)
}
