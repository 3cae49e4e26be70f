//! Discontinuity-capturing LG step: the LG step plus the artificial diffusion
//! `dt sum_K (eps_K grad c^n, grad v)_K` with
//! `eps_K = C_eps h_K^alpha |c^n - c^{*n-1}|_K / dt`.
//!
//! The viscosity depends on the unknown, so each step runs a Picard
//! iteration started from the plain LG solution.

use std::sync::Arc;

use rayon::prelude::*;

use crate::characteristics::VelocityField;
use crate::elements::{QuadratureRule, MAX_LOCAL_DOFS};
use crate::space::FemSpace;
use crate::sparse::{solve_spd, CsrMatrix};
use crate::transport::{mass_rule, ElementQuadrature, Field, LgStepper, StepOutput, Transported};
use crate::{Error, Result};

/// How the pointwise residual becomes one value per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Mean of `|r|` over the element's quadrature points.
    #[default]
    Mean,
    /// Largest `|r|` at the element's quadrature points.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcConfig {
    pub c_eps: f64,
    pub alpha: f64,
    /// Picard stops once `||C^{k+1} - C^k|| <= tol ||C^k||`.
    pub tol: f64,
    pub max_iter: usize,
    pub reduction: Reduction,
}

impl Default for DcConfig {
    fn default() -> Self {
        Self {
            c_eps: 0.1,
            alpha: 1.5,
            tol: 1e-8,
            max_iter: 50,
            reduction: Reduction::Mean,
        }
    }
}

impl DcConfig {
    pub fn new(c_eps: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            c_eps,
            alpha,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `0 <= C_eps < 1` (zero switches the diffusion off), `1 <= alpha < 2`.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.c_eps) {
            return Err(Error::Config(format!("c_eps must lie in [0, 1), got {}", self.c_eps)));
        }
        if !(1.0..2.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [1, 2), got {}", self.alpha)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("Picard tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Per-element viscosity from the residual `|c_new(x_q) - c*(x_q)| / dt`
/// at the quadrature points of `quad`.
pub fn residual_viscosity(
    c_new: &Field,
    transported: &Transported,
    quad: &ElementQuadrature,
    dt: f64,
    cfg: &DcConfig,
) -> Vec<f64> {
    let space = c_new.space();
    let mesh = space.mesh();
    let values = quad.values(space, &c_new.coeffs);
    let nq = quad.points_per_element();
    values
        .par_chunks(nq)
        .zip(transported.values.par_chunks(nq))
        .enumerate()
        .map(|(k, (new, star))| {
            let r = new.iter().zip(star).map(|(a, b)| (a - b).abs() / dt);
            let reduced = match cfg.reduction {
                Reduction::Mean => r.sum::<f64>() / nq as f64,
                Reduction::Max => r.fold(0.0, f64::max),
            };
            cfg.c_eps * mesh.diameter(k).powf(cfg.alpha) * reduced
        })
        .collect()
}

/// Element stiffness matrices and their storage positions in the
/// element-pattern matrix, reused for every viscosity.
#[derive(Debug, Clone)]
pub struct DiffusionCache {
    nloc: usize,
    local: Vec<f64>,
    positions: Vec<usize>,
    pattern: CsrMatrix,
    boundary: Vec<bool>,
}

impl DiffusionCache {
    /// The pattern is taken from `pattern` (the mass matrix), whose entries
    /// must include every element block.
    pub fn new(space: &FemSpace, rule: &'static QuadratureRule, pattern: &CsrMatrix) -> Self {
        let quad = ElementQuadrature::new(space, rule);
        let ne = space.mesh().num_elements();
        let nloc = space.local_dofs();
        let mut local = vec![0.0; ne * nloc * nloc];
        local.par_chunks_mut(nloc * nloc).enumerate().for_each(|(k, block)| {
            let mut g = [[0.0; 2]; MAX_LOCAL_DOFS];
            for q in 0..quad.points_per_element() {
                quad.grads(space, k, q, &mut g[..nloc]);
                let w = quad.weight(k, q);
                for a in 0..nloc {
                    for b in 0..nloc {
                        block[a * nloc + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    }
                }
            }
        });
        let positions = (0..ne).flat_map(|k| pattern.block_positions(space.element_dofs(k))).collect();
        let mut zero = pattern.clone();
        zero.values_mut().iter_mut().for_each(|v| *v = 0.0);
        Self {
            nloc,
            local,
            positions,
            pattern: zero,
            boundary: space.boundary_mask().to_vec(),
        }
    }

    /// `A(eps)_ij = sum_K eps_K (grad phi_j, grad phi_i)_K`, boundary rows
    /// and columns removed.
    pub fn assemble(&self, eps: &[f64]) -> CsrMatrix {
        let mut a = self.pattern.clone();
        let nn = self.nloc * self.nloc;
        let values = a.values_mut();
        for (k, &e) in eps.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            let block = &self.local[k * nn..(k + 1) * nn];
            for (&p, &v) in self.positions[k * nn..(k + 1) * nn].iter().zip(block) {
                values[p] += e * v;
            }
        }
        a.zero_masked(&self.boundary);
        a
    }
}

#[derive(Debug, Clone)]
pub struct DcStepOutput {
    pub step: StepOutput,
    /// Picard solves performed.
    pub iterations: usize,
    pub converged: bool,
    /// Viscosity of the final solve.
    pub eps: Vec<f64>,
    /// `sum_K ||eps_K^{1/2} grad c^n||_K^2` with that viscosity.
    pub stab_energy: f64,
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let d: f64 = new.iter().zip(old).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let n: f64 = old.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

/// Repeated DC-LG steps.
#[derive(Debug, Clone)]
pub struct DcStepper {
    lg: LgStepper,
    diffusion: DiffusionCache,
    pub cfg: DcConfig,
}

impl DcStepper {
    pub fn new(space: Arc<FemSpace>, rule: &'static QuadratureRule, cfg: DcConfig) -> Result<Self> {
        cfg.validate()?;
        let lg = LgStepper::new(space.clone(), rule)?;
        let diffusion = DiffusionCache::new(&space, mass_rule(&space), lg.mass());
        Ok(Self { lg, diffusion, cfg })
    }

    pub fn lg(&self) -> &LgStepper {
        &self.lg
    }

    pub fn diffusion(&self) -> &DiffusionCache {
        &self.diffusion
    }

    pub fn step(&self, c_prev: &Field, field: &VelocityField, dt: f64) -> Result<DcStepOutput> {
        let (transported, rhs) = self.lg.transport(c_prev, field, dt)?;
        let space = self.lg.space();
        let mass = self.lg.mass();
        let quad = self.lg.quadrature();
        let solver = self.lg.solver;
        let first = solve_spd(mass, &rhs, Some(&c_prev.coeffs), solver)?;
        let mut solver_iterations = first.iterations;
        let mut current = Field::from_coeffs(space.clone(), first.x, c_prev.time + dt)?;
        let mut eps = vec![0.0; space.mesh().num_elements()];
        let mut a = self.diffusion.assemble(&eps);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.cfg.max_iter {
            eps = residual_viscosity(&current, &transported, quad, dt, &self.cfg);
            a = self.diffusion.assemble(&eps);
            let mut system = mass.clone();
            for (s, v) in system.values_mut().iter_mut().zip(a.values()) {
                *s += dt * v;
            }
            let sol = solve_spd(&system, &rhs, Some(&current.coeffs), solver)?;
            solver_iterations += sol.iterations;
            iterations += 1;
            let change = rel_change(&sol.x, &current.coeffs);
            current.coeffs = sol.x;
            if change <= self.cfg.tol {
                converged = true;
                break;
            }
        }
        let stab_energy = a.quadratic_form(&current.coeffs);
        Ok(DcStepOutput {
            step: StepOutput {
                field: current,
                transported,
                rhs,
                solver_iterations,
            },
            iterations,
            converged,
            eps,
            stab_energy,
        })
    }
}

/// One DC-LG step; returns the new field, the Picard iteration count and
/// the final viscosity.
pub fn dc_step(
    c_prev: &Field,
    field: &VelocityField,
    dt: f64,
    rule: &'static QuadratureRule,
    cfg: &DcConfig,
) -> Result<(Field, usize, Vec<f64>)> {
    let stepper = DcStepper::new(c_prev.space().clone(), rule, *cfg)?;
    let out = stepper.step(c_prev, field, dt)?;
    Ok((out.step.field, out.iterations, out.eps))
}
