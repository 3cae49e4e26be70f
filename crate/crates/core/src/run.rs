//! Driving a scheme over many steps and recording the diagnostics of every
//! step.

use std::sync::Arc;
use std::time::Instant;

use crate::dc::{DcConfig, DcStepper};
use crate::diagnostics::{self, InitialState, RunFlags, RunRecord, StepRow, TripleNorm};
use crate::elements::{get_rule, ElementKind};
use crate::mesh::{build_mesh_with_leg, Diagonal, Mesh, Refinement};
use crate::problems::Problem;
use crate::space::FemSpace;
use crate::stabilization::{LpsConfig, LpsStepper};
use crate::transport::{ElementQuadrature, Field, LgStepper, StepOutput};
use crate::{Error, Result};

/// Rule of the final error and of the initial projection.
pub const ERROR_RULE: usize = 42;

/// Runs are stopped once `||c^n||` exceeds this multiple of `||c^0||`.
pub const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Lg,
    Lps(LpsConfig),
    Dc(DcConfig),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Lg => "lg",
            Scheme::Lps(_) => "lps",
            Scheme::Dc(_) => "dc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub problem: Problem,
    pub scheme: Scheme,
    pub element: ElementKind,
    /// Grid leg of the (coarse) uniform mesh.
    pub leg: f64,
    pub refine: Option<Refinement>,
    pub diagonal: Diagonal,
    /// Point count of the rule for the transported integral.
    pub quadrature: usize,
    pub dt: f64,
    pub steps: usize,
}

impl RunSetup {
    pub fn new(problem: Problem, scheme: Scheme, element: ElementKind, leg: f64, quadrature: usize, dt: f64, t_end: f64) -> Result<Self> {
        let steps = steps_for(t_end, dt)?;
        let refine = match scheme {
            Scheme::Lps(LpsConfig {
                variant: crate::stabilization::LpsVariant::TwoLevel(split),
                ..
            }) => Some(split),
            _ => None,
        };
        Ok(Self {
            problem,
            scheme,
            element,
            leg,
            refine,
            diagonal: Diagonal::Forward,
            quadrature,
            dt,
            steps,
        })
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let coarse = build_mesh_with_leg(self.problem.domain(), self.leg, self.diagonal)?;
        match self.refine {
            Some(split) => coarse.refine(split),
            None => Ok(coarse),
        }
    }
}

/// Number of steps of length `dt` covering `t_end`; rejects fractional counts.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::Config(format!("time step {dt} and final time {t_end} must be positive")));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::Config(format!("final time {t_end} is not a whole number of steps {dt}")));
    }
    Ok(n as usize)
}

enum Stepper {
    Lg(LgStepper),
    Lps(LpsStepper),
    Dc(DcStepper),
}

struct Advance {
    out: StepOutput,
    stab_energy: f64,
    dc_iters: usize,
    dc_converged: bool,
}

pub struct Simulation {
    setup: RunSetup,
    space: Arc<FemSpace>,
    stepper: Stepper,
    error_quad: ElementQuadrature,
}

impl Simulation {
    pub fn new(setup: RunSetup) -> Result<Self> {
        let rule = get_rule(setup.quadrature)?;
        let mesh = Arc::new(setup.build_mesh()?);
        let space = Arc::new(FemSpace::new(mesh, setup.element)?);
        let stepper = match setup.scheme {
            Scheme::Lg => Stepper::Lg(LgStepper::new(space.clone(), rule)?),
            Scheme::Lps(cfg) => {
                let partition = cfg.partition(space.mesh())?;
                Stepper::Lps(LpsStepper::new(space.clone(), &partition, &cfg, rule, setup.dt)?)
            }
            Scheme::Dc(cfg) => Stepper::Dc(DcStepper::new(space.clone(), rule, cfg)?),
        };
        let error_quad = ElementQuadrature::new(&space, get_rule(ERROR_RULE)?);
        Ok(Self {
            setup,
            space,
            stepper,
            error_quad,
        })
    }

    pub fn setup(&self) -> &RunSetup {
        &self.setup
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    fn lg(&self) -> &LgStepper {
        match &self.stepper {
            Stepper::Lg(s) => s,
            Stepper::Lps(s) => s.lg(),
            Stepper::Dc(s) => s.lg(),
        }
    }

    /// Quadrature of the transported integral, also used for every norm.
    pub fn quadrature(&self) -> &ElementQuadrature {
        self.lg().quadrature()
    }

    /// `L2` projection of the initial condition onto `V_h`.
    pub fn initial(&self) -> Result<Field> {
        let p = self.setup.problem;
        crate::transport::l2_project(&self.space, |x| p.initial(x), &self.error_quad, self.lg().mass(), self.lg().solver)
    }

    fn advance(&self, c: &Field) -> Result<Advance> {
        let field = self.setup.problem.velocity();
        let dt = self.setup.dt;
        Ok(match &self.stepper {
            Stepper::Lg(s) => Advance {
                out: s.step(c, &field, dt)?,
                stab_energy: 0.0,
                dc_iters: 0,
                dc_converged: true,
            },
            Stepper::Lps(s) => {
                let out = s.step(c, &field)?;
                Advance {
                    stab_energy: s.stab_energy(&out.field),
                    out,
                    dc_iters: 0,
                    dc_converged: true,
                }
            }
            Stepper::Dc(s) => {
                let o = s.step(c, &field, dt)?;
                Advance {
                    out: o.step,
                    stab_energy: o.stab_energy,
                    dc_iters: o.iterations,
                    dc_converged: o.converged,
                }
            }
        })
    }

    pub fn run(&self) -> Result<RunRecord> {
        self.run_with(|_, _| Ok(()))
    }

    /// Steps to the final time, calling `observe(n, c^n)` for `n = 0..=N`.
    pub fn run_with<F>(&self, mut observe: F) -> Result<RunRecord>
    where
        F: FnMut(usize, &Field) -> Result<()>,
    {
        let start = Instant::now();
        let quad = self.quadrature();
        let dt = self.setup.dt;
        let mut c = self.initial()?;
        observe(0, &c)?;
        let norm0 = diagnostics::l2_norm_sq(&c, quad).sqrt();
        let (min0, max0) = diagnostics::extrema(&c);
        let mut flags = RunFlags {
            norm_rule: quad.points_per_element(),
            ..RunFlags::default()
        };
        let mut triple = TripleNorm::new();
        let mut rows = Vec::with_capacity(self.setup.steps);
        for n in 1..=self.setup.steps {
            let adv = self.advance(&c)?;
            let next = adv.out.field;
            let norm_sq = diagnostics::l2_norm_sq(&next, quad);
            let (min, max) = diagnostics::extrema(&next);
            let l2norm = norm_sq.sqrt();
            rows.push(StepRow {
                step: n,
                t: n as f64 * dt,
                l2norm,
                dissipation_inc: diagnostics::dissipation(&next, &adv.out.transported.values, quad),
                triple_sq: triple.push(norm_sq, adv.stab_energy, dt),
                min,
                max,
                dc_iters: adv.dc_iters,
                stab_energy: adv.stab_energy,
            });
            if !adv.dc_converged {
                flags.dc_nonconverged += 1;
            }
            if l2norm > 10.0 * norm0 {
                flags.unstable = true;
            }
            c = next;
            c.time = n as f64 * dt;
            observe(n, &c)?;
            if !l2norm.is_finite() || l2norm > BLOWUP * norm0.max(f64::MIN_POSITIVE) {
                flags.diverged_at = Some(n);
                break;
            }
        }
        let p = self.setup.problem;
        let t_end = c.time;
        let l2_error = diagnostics::l2_error(&c, |x| p.exact(x, t_end), &self.error_quad);
        Ok(RunRecord {
            dt,
            initial: InitialState {
                l2norm: norm0,
                min: min0,
                max: max0,
            },
            rows,
            l2_error,
            runtime_s: start.elapsed().as_secs_f64(),
            flags,
        })
    }
}
