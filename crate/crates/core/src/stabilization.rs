//! Local projection stabilization of the LG step.
//!
//! `S_h(c, v) = sum_M tau_M (kappa_M grad c, kappa_M grad v)_M` with the
//! fluctuation operator `kappa_M = id - pi_M`, where `pi_M` is the
//! `L2(M)` projection onto discontinuous polynomials of degree `s` on each
//! macro, applied to each gradient component separately. The LPS-LG step
//! solves `(M + dt S) C^n = b` with the transported right-hand side `b`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::characteristics::VelocityField;
use crate::elements::{evaluate_basis, ElementKind, QuadratureRule};
use crate::mesh::{build_macro_partition, Macro, MacroLevel, MacroPartition, Mesh, Refinement, TauRule};
use crate::space::FemSpace;
use crate::sparse::{solve_spd, CsrMatrix};
use crate::transport::{Field, LgStepper, StepOutput};
use crate::{Error, Result};

/// Projection space `G_h(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionSpace {
    P0Disc,
    P1Disc,
}

impl ProjectionSpace {
    pub fn degree(self) -> usize {
        match self {
            ProjectionSpace::P0Disc => 0,
            ProjectionSpace::P1Disc => 1,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ProjectionSpace::P0Disc => 1,
            ProjectionSpace::P1Disc => 3,
        }
    }

    pub fn kind(self) -> ElementKind {
        match self {
            ProjectionSpace::P0Disc => ElementKind::P0Disc,
            ProjectionSpace::P1Disc => ElementKind::P1Disc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpsVariant {
    /// Macros are single elements.
    OneLevel,
    /// Macros are the coarse elements a mesh was refined from.
    TwoLevel(Refinement),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpsConfig {
    pub projection: ProjectionSpace,
    pub tau: TauRule,
    pub variant: LpsVariant,
}

impl LpsConfig {
    /// P1 plus bubble against element-wise constants.
    pub fn one_level(tau: TauRule) -> Self {
        Self {
            projection: ProjectionSpace::P0Disc,
            tau,
            variant: LpsVariant::OneLevel,
        }
    }

    /// P2 on refined macros against macro-wise linears.
    pub fn two_level(split: Refinement, tau: TauRule) -> Self {
        Self {
            projection: ProjectionSpace::P1Disc,
            tau,
            variant: LpsVariant::TwoLevel(split),
        }
    }

    /// Checks `s <= m - 1` for the element of `space`.
    pub fn check_space(&self, space: &FemSpace) -> Result<()> {
        let m = space.kind().order();
        if self.projection.degree() + 1 > m {
            return Err(Error::Config(format!(
                "projection degree {} needs element order above it, got {}",
                self.projection.degree(),
                space.kind().name()
            )));
        }
        Ok(())
    }

    fn check_partition(&self, partition: &MacroPartition) -> Result<()> {
        match (self.variant, partition.level(), partition.split()) {
            (LpsVariant::OneLevel, MacroLevel::One, _) => Ok(()),
            (LpsVariant::TwoLevel(s), MacroLevel::Two, Some(p)) if s == p => Ok(()),
            _ => Err(Error::Config(format!(
                "LPS variant {:?} does not match a {:?} partition",
                self.variant,
                partition.level()
            ))),
        }
    }

    /// The macro partition of `mesh` this configuration stabilizes on.
    pub fn partition(&self, mesh: &Mesh) -> Result<MacroPartition> {
        match self.variant {
            LpsVariant::OneLevel => build_macro_partition(mesh, MacroLevel::One, Refinement::Barycentric3, self.tau),
            LpsVariant::TwoLevel(split) => build_macro_partition(mesh, MacroLevel::Two, split, self.tau),
        }
    }
}

/// Quadrature points and weights of one macro: the rule on every child,
/// children in macro order.
#[derive(Debug, Clone)]
pub struct MacroQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub center: [f64; 2],
    pub diameter: f64,
}

impl MacroQuadrature {
    pub fn new(mesh: &Mesh, mac: &Macro, rule: &QuadratureRule) -> Self {
        let mut points = Vec::with_capacity(mac.elements.len() * rule.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for &k in &mac.elements {
            let a = mesh.affine(k);
            for q in 0..rule.len() {
                points.push(a.map(rule.reference_point(q)));
                weights.push(rule.weights[q] * a.det.abs());
            }
        }
        let area: f64 = weights.iter().sum();
        let mut center = [0.0; 2];
        for (p, w) in points.iter().zip(&weights) {
            center[0] += w * p[0] / area;
            center[1] += w * p[1] / area;
        }
        Self {
            points,
            weights,
            center,
            diameter: mac.diameter,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Basis of the projection space at point `p`: `1` and the scaled
    /// offsets from the macro center.
    fn psi(&self, proj: ProjectionSpace, p: usize, out: &mut [f64; 3]) {
        out[0] = 1.0;
        if proj == ProjectionSpace::P1Disc {
            let x = self.points[p];
            out[1] = (x[0] - self.center[0]) / self.diameter;
            out[2] = (x[1] - self.center[1]) / self.diameter;
        }
    }
}

/// Cholesky solve of the small SPD system `g x = rhs` in place.
fn solve_gram(n: usize, g: &mut [f64; 9], rhs: &mut [[f64; 2]; 3]) -> Result<()> {
    for j in 0..n {
        let mut d = g[j * 3 + j];
        for k in 0..j {
            d -= g[j * 3 + k] * g[j * 3 + k];
        }
        if !(d > 0.0) {
            return Err(Error::MacroPattern("singular local Gram matrix".into()));
        }
        let d = d.sqrt();
        g[j * 3 + j] = d;
        for i in j + 1..n {
            let mut s = g[i * 3 + j];
            for k in 0..j {
                s -= g[i * 3 + k] * g[j * 3 + k];
            }
            g[i * 3 + j] = s / d;
        }
    }
    for c in 0..2 {
        for i in 0..n {
            let mut s = rhs[i][c];
            for k in 0..i {
                s -= g[i * 3 + k] * rhs[k][c];
            }
            rhs[i][c] = s / g[i * 3 + i];
        }
        for i in (0..n).rev() {
            let mut s = rhs[i][c];
            for k in i + 1..n {
                s -= g[k * 3 + i] * rhs[k][c];
            }
            rhs[i][c] = s / g[i * 3 + i];
        }
    }
    Ok(())
}

/// `pi_M g` at the macro quadrature points for a vector field sampled there.
pub fn local_project(mq: &MacroQuadrature, proj: ProjectionSpace, g: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let ns = proj.dim();
    let mut gram = [0.0; 9];
    let mut rhs = [[0.0; 2]; 3];
    let mut psi = [0.0; 3];
    for (p, (&w, v)) in mq.weights.iter().zip(g).enumerate() {
        mq.psi(proj, p, &mut psi);
        for a in 0..ns {
            rhs[a][0] += w * psi[a] * v[0];
            rhs[a][1] += w * psi[a] * v[1];
            for b in 0..ns {
                gram[a * 3 + b] += w * psi[a] * psi[b];
            }
        }
    }
    solve_gram(ns, &mut gram, &mut rhs)?;
    Ok((0..mq.len())
        .map(|p| {
            mq.psi(proj, p, &mut psi);
            let mut out = [0.0; 2];
            for a in 0..ns {
                out[0] += rhs[a][0] * psi[a];
                out[1] += rhs[a][1] * psi[a];
            }
            out
        })
        .collect())
}

/// `kappa_M g = g - pi_M g`.
pub fn fluctuation(mq: &MacroQuadrature, proj: ProjectionSpace, g: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let pg = local_project(mq, proj, g)?;
    Ok(g.iter().zip(pg).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect())
}

/// Degree the rule must integrate exactly for `S_h` on `space`.
pub fn required_degree(space: &FemSpace, proj: ProjectionSpace) -> usize {
    2 * (space.kind().max_degree() - 1).max(proj.degree())
}

fn check_rule(space: &FemSpace, proj: ProjectionSpace, rule: &QuadratureRule) -> Result<()> {
    let required = required_degree(space, proj);
    if rule.degree < required {
        return Err(Error::RuleTooLow {
            required,
            got: rule.degree,
        });
    }
    Ok(())
}

/// Physical gradients of the global basis functions touching a macro.
struct MacroGradients {
    dofs: Vec<usize>,
    /// `grads[p * dofs.len() + j]`, zero where dof `j` is not supported.
    grads: Vec<[f64; 2]>,
}

fn macro_gradients(space: &FemSpace, mac: &Macro, rule: &QuadratureRule) -> MacroGradients {
    let mesh = space.mesh();
    let mut dofs: Vec<usize> = mac.elements.iter().flat_map(|&k| space.element_dofs(k).iter().copied()).collect();
    dofs.sort_unstable();
    dofs.dedup();
    let nd = dofs.len();
    let nq = rule.len();
    let mut grads = vec![[0.0; 2]; mac.elements.len() * nq * nd];
    for (e, &k) in mac.elements.iter().enumerate() {
        let a = mesh.affine(k);
        let slots: Vec<usize> = space
            .element_dofs(k)
            .iter()
            .map(|d| dofs.binary_search(d).expect("macro dof"))
            .collect();
        for q in 0..nq {
            let basis = evaluate_basis(space.kind(), rule.reference_point(q));
            let row = &mut grads[(e * nq + q) * nd..(e * nq + q + 1) * nd];
            for (&j, g) in slots.iter().zip(basis.grads()) {
                row[j] = a.push_gradient(*g);
            }
        }
    }
    MacroGradients { dofs, grads }
}

/// Dense `tau_M (kappa grad phi_j, kappa grad phi_i)_M` on the macro dofs.
fn macro_block(space: &FemSpace, mac: &Macro, proj: ProjectionSpace, rule: &QuadratureRule) -> Result<(Vec<usize>, Vec<f64>)> {
    let mq = MacroQuadrature::new(space.mesh(), mac, rule);
    let MacroGradients { dofs, grads } = macro_gradients(space, mac, rule);
    let (nd, np) = (dofs.len(), mq.len());
    let mut kappa = vec![[0.0; 2]; np * nd];
    let mut column = vec![[0.0; 2]; np];
    for j in 0..nd {
        for p in 0..np {
            column[p] = grads[p * nd + j];
        }
        for (p, f) in fluctuation(&mq, proj, &column)?.into_iter().enumerate() {
            kappa[p * nd + j] = f;
        }
    }
    let mut block = vec![0.0; nd * nd];
    for p in 0..np {
        let w = mac.tau * mq.weights[p];
        let row = &kappa[p * nd..(p + 1) * nd];
        for i in 0..nd {
            for j in 0..nd {
                block[i * nd + j] += w * (row[i][0] * row[j][0] + row[i][1] * row[j][1]);
            }
        }
    }
    // Exact symmetry.
    for i in 0..nd {
        for j in 0..i {
            let v = 0.5 * (block[i * nd + j] + block[j * nd + i]);
            block[i * nd + j] = v;
            block[j * nd + i] = v;
        }
    }
    Ok((dofs, block))
}

/// Stabilization matrix `S`, with rows and columns of boundary DoFs removed.
pub fn assemble_lps(
    space: &FemSpace,
    partition: &MacroPartition,
    cfg: &LpsConfig,
    rule: &QuadratureRule,
) -> Result<CsrMatrix> {
    cfg.check_space(space)?;
    cfg.check_partition(partition)?;
    check_rule(space, cfg.projection, rule)?;
    let blocks: Vec<(Vec<usize>, Vec<f64>)> = partition
        .macros()
        .par_iter()
        .with_min_len(32)
        .map(|m| macro_block(space, m, cfg.projection, rule))
        .collect::<Result<_>>()?;
    let mut s = CsrMatrix::from_groups(space.ndof(), blocks.iter().map(|(d, _)| d.as_slice()));
    for (dofs, block) in &blocks {
        s.add_block(dofs, block);
    }
    s.zero_masked(space.boundary_mask());
    Ok(s)
}

/// `sum_M tau_M ||kappa_M grad c||^2_M` and `||grad c||^2`, evaluated
/// pointwise at the macro quadrature points.
pub fn fluctuation_energy(
    c: &Field,
    partition: &MacroPartition,
    cfg: &LpsConfig,
    rule: &QuadratureRule,
) -> Result<(f64, f64)> {
    let space = c.space();
    let parts: Vec<(f64, f64)> = partition
        .macros()
        .par_iter()
        .with_min_len(32)
        .map(|m| -> Result<(f64, f64)> {
            let mq = MacroQuadrature::new(space.mesh(), m, rule);
            let MacroGradients { dofs, grads } = macro_gradients(space, m, rule);
            let nd = dofs.len();
            let g: Vec<[f64; 2]> = (0..mq.len())
                .map(|p| {
                    let mut v = [0.0; 2];
                    for (j, &d) in dofs.iter().enumerate() {
                        let gr = grads[p * nd + j];
                        v[0] += c.coeffs[d] * gr[0];
                        v[1] += c.coeffs[d] * gr[1];
                    }
                    v
                })
                .collect();
            let k = fluctuation(&mq, cfg.projection, &g)?;
            let mut stab = 0.0;
            let mut full = 0.0;
            for p in 0..mq.len() {
                let w = mq.weights[p];
                stab += w * (k[p][0] * k[p][0] + k[p][1] * k[p][1]);
                full += w * (g[p][0] * g[p][0] + g[p][1] * g[p][1]);
            }
            Ok((m.tau * stab, full))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold((0.0, 0.0), |(a, b), (s, f)| (a + s, b + f)))
}

/// Equivalent added diffusion `S_h(c, c) / ||grad c||^2`, 0 for constant `c`.
pub fn nu_add(c: &Field, partition: &MacroPartition, cfg: &LpsConfig, rule: &QuadratureRule) -> Result<f64> {
    let (stab, grad) = fluctuation_energy(c, partition, cfg, rule)?;
    Ok(if grad > 0.0 { stab / grad } else { 0.0 })
}

/// Repeated LPS-LG steps with a fixed time step.
#[derive(Debug, Clone)]
pub struct LpsStepper {
    lg: LgStepper,
    stab: CsrMatrix,
    system: CsrMatrix,
    dt: f64,
}

impl LpsStepper {
    /// `rule` drives the transported integral; `S` is assembled exactly.
    pub fn new(
        space: Arc<FemSpace>,
        partition: &MacroPartition,
        cfg: &LpsConfig,
        rule: &'static QuadratureRule,
        dt: f64,
    ) -> Result<Self> {
        let lg = LgStepper::new(space.clone(), rule)?;
        let stab = assemble_lps(&space, partition, cfg, crate::transport::mass_rule(&space))?;
        Ok(Self::from_parts(lg, stab, dt))
    }

    pub fn from_parts(lg: LgStepper, stab: CsrMatrix, dt: f64) -> Self {
        let system = lg.mass().add_scaled(dt, &stab);
        Self { lg, stab, system, dt }
    }

    pub fn lg(&self) -> &LgStepper {
        &self.lg
    }

    pub fn stabilization(&self) -> &CsrMatrix {
        &self.stab
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `S_h(c, c)`.
    pub fn stab_energy(&self, c: &Field) -> f64 {
        self.stab.quadratic_form(&c.coeffs)
    }

    pub fn step(&self, c_prev: &Field, field: &VelocityField) -> Result<StepOutput> {
        let (transported, rhs) = self.lg.transport(c_prev, field, self.dt)?;
        let sol = solve_spd(&self.system, &rhs, Some(&c_prev.coeffs), self.lg.solver)?;
        Ok(StepOutput {
            field: Field::from_coeffs(self.lg.space().clone(), sol.x, c_prev.time + self.dt)?,
            transported,
            rhs,
            solver_iterations: sol.iterations,
        })
    }
}

/// One LPS-LG step with explicit mass and stabilization matrices.
pub fn lps_step(
    c_prev: &Field,
    field: &VelocityField,
    dt: f64,
    rule: &'static QuadratureRule,
    mass: &CsrMatrix,
    stab: &CsrMatrix,
) -> Result<Field> {
    let lg = LgStepper::with_mass(c_prev.space().clone(), rule, mass.clone());
    LpsStepper::from_parts(lg, stab.clone(), dt).step(c_prev, field).map(|o| o.field)
}
