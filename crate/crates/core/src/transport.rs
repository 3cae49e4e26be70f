//! Conventional Lagrange-Galerkin step: `(c^n, v) = (c^{n-1} o X, v)` for all
//! `v` in `V_h`.
//!
//! The transported integrand is sampled at quadrature points of the
//! destination elements: each point is traced back along the characteristic,
//! located on the mesh, and `c^{n-1}` is evaluated there. No mesh
//! intersection is attempted, so the quality of the right-hand side is set by
//! the quadrature rule.

use std::sync::Arc;

use rayon::prelude::*;

use crate::characteristics::VelocityField;
use crate::elements::{get_rule, QuadratureRule, MAX_LOCAL_DOFS, RULE_SIZES};
use crate::space::FemSpace;
use crate::sparse::{solve_spd, CsrMatrix, SolverOptions};
use crate::{Error, Result};

/// Coefficient vector of a function in a [`FemSpace`] at time `time`.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<FemSpace>,
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn zeros(space: Arc<FemSpace>, time: f64) -> Self {
        let n = space.ndof();
        Self {
            space,
            coeffs: vec![0.0; n],
            time,
        }
    }

    pub fn from_coeffs(space: Arc<FemSpace>, coeffs: Vec<f64>, time: f64) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            space,
            coeffs,
            time,
        })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    /// Point value; points outside the domain are clamped.
    pub fn evaluate_point(&self, x: [f64; 2]) -> Result<f64> {
        let loc = self.space.mesh().locate_point(x, None)?;
        Ok(self.space.evaluate(&self.coeffs, &loc))
    }

    pub(crate) fn check_space(&self, space: &Arc<FemSpace>) -> Result<()> {
        if Arc::ptr_eq(&self.space, space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Per-element quadrature data for one rule: physical points, weights
/// `w_q |det B_K|`, and reference basis tables.
#[derive(Debug, Clone)]
pub struct ElementQuadrature {
    rule: &'static QuadratureRule,
    nq: usize,
    nloc: usize,
    phi: Vec<f64>,
    ref_grads: Vec<[f64; 2]>,
    points: Vec<[f64; 2]>,
    jxw: Vec<f64>,
}

impl ElementQuadrature {
    pub fn new(space: &FemSpace, rule: &'static QuadratureRule) -> Self {
        let kind = space.kind();
        let (nq, nloc) = (rule.len(), kind.ndof());
        let mut phi = Vec::with_capacity(nq * nloc);
        let mut ref_grads = Vec::with_capacity(nq * nloc);
        for q in 0..nq {
            let e = crate::elements::evaluate_basis(kind, rule.reference_point(q));
            phi.extend_from_slice(e.values());
            ref_grads.extend_from_slice(e.grads());
        }
        let mesh = space.mesh();
        let ne = mesh.num_elements();
        let mut points = Vec::with_capacity(ne * nq);
        let mut jxw = Vec::with_capacity(ne * nq);
        for k in 0..ne {
            let a = mesh.affine(k);
            for q in 0..nq {
                points.push(a.map(rule.reference_point(q)));
                jxw.push(rule.weights[q] * a.det.abs());
            }
        }
        Self {
            rule,
            nq,
            nloc,
            phi,
            ref_grads,
            points,
            jxw,
        }
    }

    pub fn rule(&self) -> &'static QuadratureRule {
        self.rule
    }

    pub fn points_per_element(&self) -> usize {
        self.nq
    }

    #[inline]
    pub fn point(&self, k: usize, q: usize) -> [f64; 2] {
        self.points[k * self.nq + q]
    }

    #[inline]
    pub fn weight(&self, k: usize, q: usize) -> f64 {
        self.jxw[k * self.nq + q]
    }

    pub fn weights(&self) -> &[f64] {
        &self.jxw
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Basis values `phi_a(x_q)`.
    #[inline]
    pub fn phi(&self, q: usize) -> &[f64] {
        &self.phi[q * self.nloc..(q + 1) * self.nloc]
    }

    /// Physical basis gradients at point `q` of element `k`, written to `out`.
    pub fn grads(&self, space: &FemSpace, k: usize, q: usize, out: &mut [[f64; 2]]) {
        let a = space.mesh().affine(k);
        for (o, g) in out.iter_mut().zip(&self.ref_grads[q * self.nloc..(q + 1) * self.nloc]) {
            *o = a.push_gradient(*g);
        }
    }

    /// Values of the function `coeffs` at every quadrature point, element-major.
    pub fn values(&self, space: &FemSpace, coeffs: &[f64]) -> Vec<f64> {
        let ne = space.mesh().num_elements();
        let mut out = vec![0.0; ne * self.nq];
        for (k, chunk) in out.chunks_mut(self.nq).enumerate() {
            let dofs = space.element_dofs(k);
            for (q, o) in chunk.iter_mut().enumerate() {
                *o = self.phi(q).iter().zip(dofs).map(|(p, &d)| p * coeffs[d]).sum();
            }
        }
        out
    }

    /// Values of `f` at every quadrature point.
    pub fn sample<F: Fn([f64; 2]) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        self.points.par_iter().map(|&x| f(x)).collect()
    }

    /// `sum_K sum_q w |det B_K| g_q` for element-major samples `g`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.jxw).map(|(g, w)| g * w).sum()
    }
}

/// `c^{n-1} o X^{n,n-1}` sampled at every quadrature point of the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Transported {
    pub values: Vec<f64>,
}

/// Lowest tabulated rule integrating products of two basis functions of
/// `space` and one more degree.
pub fn mass_rule(space: &FemSpace) -> &'static QuadratureRule {
    let need = 2 * space.kind().max_degree() + 1;
    RULE_SIZES
        .iter()
        .map(|&n| get_rule(n).expect("tabulated"))
        .find(|r| r.degree >= need)
        .expect("rule table covers every supported element")
}

/// Mass matrix `M_ij = (phi_j, phi_i)` with Dirichlet rows and columns
/// replaced by the identity.
pub fn assemble_mass(space: &FemSpace, rule: &'static QuadratureRule) -> Result<CsrMatrix> {
    let required = 2 * space.kind().max_degree();
    if rule.degree < required {
        return Err(Error::RuleTooLow {
            required,
            got: rule.degree,
        });
    }
    let quad = ElementQuadrature::new(space, rule);
    let ne = space.mesh().num_elements();
    let nloc = space.local_dofs();
    let mut m = CsrMatrix::from_groups(space.ndof(), (0..ne).map(|k| space.element_dofs(k)));
    let mut block = vec![0.0; nloc * nloc];
    for k in 0..ne {
        block.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..quad.nq {
            let w = quad.weight(k, q);
            let phi = quad.phi(q);
            for a in 0..nloc {
                for b in 0..nloc {
                    block[a * nloc + b] += w * phi[a] * phi[b];
                }
            }
        }
        m.add_block(space.element_dofs(k), &block);
    }
    m.apply_dirichlet(space.boundary_mask());
    Ok(m)
}

/// Traces every quadrature point back one step and evaluates `c_prev` at the
/// foot. Points in the same element share a walk hint chain.
pub fn transport_values(
    c_prev: &Field,
    field: &VelocityField,
    dt: f64,
    quad: &ElementQuadrature,
) -> Result<Transported> {
    field.ensure_divergence_free()?;
    let space = c_prev.space();
    let mesh = space.mesh();
    let map = field.step_map(c_prev.time + dt, dt);
    let nq = quad.nq;
    let mut values = vec![0.0; mesh.num_elements() * nq];
    values
        .par_chunks_mut(nq)
        .enumerate()
        .with_min_len(64)
        .try_for_each(|(k, chunk)| -> Result<()> {
            let mut hint = None;
            for (q, v) in chunk.iter_mut().enumerate() {
                let foot = map.apply(quad.point(k, q))?;
                let loc = mesh.locate_point(foot, hint)?;
                hint = Some(loc.element);
                *v = space.evaluate(&c_prev.coeffs, &loc);
            }
            Ok(())
        })?;
    Ok(Transported { values })
}

/// `b_i = sum_K sum_q w_q |det B_K| g_q phi_i(x_q)` with Dirichlet rows zeroed.
pub fn rhs_from_samples(space: &FemSpace, quad: &ElementQuadrature, samples: &[f64]) -> Vec<f64> {
    let ne = space.mesh().num_elements();
    let (nq, nloc) = (quad.nq, quad.nloc);
    let local: Vec<[f64; MAX_LOCAL_DOFS]> = (0..ne)
        .into_par_iter()
        .with_min_len(64)
        .map(|k| {
            let mut b = [0.0; MAX_LOCAL_DOFS];
            for q in 0..nq {
                let g = quad.weight(k, q) * samples[k * nq + q];
                for (ba, p) in b.iter_mut().zip(quad.phi(q)) {
                    *ba += g * p;
                }
            }
            b
        })
        .collect();
    let mut rhs = vec![0.0; space.ndof()];
    for (k, b) in local.iter().enumerate() {
        for (&d, &v) in space.element_dofs(k).iter().zip(&b[..nloc]) {
            rhs[d] += v;
        }
    }
    for (r, &m) in rhs.iter_mut().zip(space.boundary_mask()) {
        if m {
            *r = 0.0;
        }
    }
    rhs
}

/// Right-hand side `(c_prev o X, phi_i)` of the LG step evaluated with `rule`.
pub fn assemble_transport_rhs(
    c_prev: &Field,
    field: &VelocityField,
    dt: f64,
    rule: &'static QuadratureRule,
) -> Result<Vec<f64>> {
    let quad = ElementQuadrature::new(c_prev.space(), rule);
    let t = transport_values(c_prev, field, dt, &quad)?;
    Ok(rhs_from_samples(c_prev.space(), &quad, &t.values))
}

/// L2 projection of `f` onto `V_h` (zero boundary values).
pub fn l2_project<F: Fn([f64; 2]) -> f64 + Sync>(
    space: &Arc<FemSpace>,
    f: F,
    quad: &ElementQuadrature,
    mass: &CsrMatrix,
    solver: SolverOptions,
) -> Result<Field> {
    let samples = quad.sample(f);
    let rhs = rhs_from_samples(space, quad, &samples);
    let sol = solve_spd(mass, &rhs, None, solver)?;
    Field::from_coeffs(space.clone(), sol.x, 0.0)
}

/// Everything produced by one LG step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub field: Field,
    pub transported: Transported,
    pub rhs: Vec<f64>,
    pub solver_iterations: usize,
}

/// Reusable state for repeated LG steps on one space with one rule: the
/// quadrature cache of the transported integral and the mass matrix.
#[derive(Debug, Clone)]
pub struct LgStepper {
    space: Arc<FemSpace>,
    quad: ElementQuadrature,
    mass: CsrMatrix,
    pub solver: SolverOptions,
}

impl LgStepper {
    /// The mass matrix uses [`mass_rule`]; `rule` only drives the transported
    /// integral.
    pub fn new(space: Arc<FemSpace>, rule: &'static QuadratureRule) -> Result<Self> {
        let mass = assemble_mass(&space, mass_rule(&space))?;
        let quad = ElementQuadrature::new(&space, rule);
        Ok(Self {
            space,
            quad,
            mass,
            solver: SolverOptions::default(),
        })
    }

    pub fn with_mass(space: Arc<FemSpace>, rule: &'static QuadratureRule, mass: CsrMatrix) -> Self {
        let quad = ElementQuadrature::new(&space, rule);
        Self {
            space,
            quad,
            mass,
            solver: SolverOptions::default(),
        }
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn quadrature(&self) -> &ElementQuadrature {
        &self.quad
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Transported samples and right-hand side of the step from `c_prev`.
    pub fn transport(
        &self,
        c_prev: &Field,
        field: &VelocityField,
        dt: f64,
    ) -> Result<(Transported, Vec<f64>)> {
        c_prev.check_space(&self.space)?;
        let t = transport_values(c_prev, field, dt, &self.quad)?;
        let rhs = rhs_from_samples(&self.space, &self.quad, &t.values);
        Ok((t, rhs))
    }

    pub fn step(&self, c_prev: &Field, field: &VelocityField, dt: f64) -> Result<StepOutput> {
        let (transported, rhs) = self.transport(c_prev, field, dt)?;
        let sol = solve_spd(&self.mass, &rhs, Some(&c_prev.coeffs), self.solver)?;
        Ok(StepOutput {
            field: Field::from_coeffs(self.space.clone(), sol.x, c_prev.time + dt)?,
            transported,
            rhs,
            solver_iterations: sol.iterations,
        })
    }

    /// L2 projection of `f` with the transport rule.
    pub fn project<F: Fn([f64; 2]) -> f64 + Sync>(&self, f: F) -> Result<Field> {
        l2_project(&self.space, f, &self.quad, &self.mass, self.solver)
    }
}

/// One conventional LG step with an explicit mass matrix.
pub fn lg_step(
    c_prev: &Field,
    field: &VelocityField,
    dt: f64,
    rule: &'static QuadratureRule,
    mass: &CsrMatrix,
) -> Result<Field> {
    let stepper = LgStepper::with_mass(c_prev.space().clone(), rule, mass.clone());
    Ok(stepper.step(c_prev, field, dt)?.field)
}
