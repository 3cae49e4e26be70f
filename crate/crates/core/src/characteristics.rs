//! Characteristic feet `X(x, t_n; t_n - dt)` of divergence-free velocity fields.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::mesh::Rect;
use crate::{Error, Result};

pub type VelocityFn = dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync;

/// User-supplied velocity integrated with classical RK4.
#[derive(Clone)]
pub struct CustomField {
    velocity: Arc<VelocityFn>,
    /// RK4 substeps per time step.
    pub substeps: usize,
    pub divergence_free: bool,
}

impl CustomField {
    pub fn new<F>(velocity: F, divergence_free: bool) -> Self
    where
        F: Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'static,
    {
        Self {
            velocity: Arc::new(velocity),
            substeps: 1,
            divergence_free,
        }
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    fn eval(&self, x: [f64; 2], t: f64) -> Result<[f64; 2]> {
        let u = (self.velocity)(x, t);
        if u[0].is_finite() && u[1].is_finite() {
            Ok(u)
        } else {
            Err(Error::NonFiniteVelocity { x: x[0], y: x[1], t })
        }
    }
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomField")
            .field("substeps", &self.substeps)
            .field("divergence_free", &self.divergence_free)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum VelocityField {
    /// `u = omega (-x2, x1)`: rigid rotation about the origin.
    RigidRotation { omega: f64 },
    Custom(CustomField),
}

impl VelocityField {
    /// The benchmark field `2 pi (-x2, x1)`: one revolution per unit time.
    pub fn benchmark_rotation() -> Self {
        VelocityField::RigidRotation { omega: 2.0 * PI }
    }

    pub fn is_divergence_free(&self) -> bool {
        match self {
            VelocityField::RigidRotation { .. } => true,
            VelocityField::Custom(c) => c.divergence_free,
        }
    }

    pub fn ensure_divergence_free(&self) -> Result<()> {
        if self.is_divergence_free() {
            Ok(())
        } else {
            Err(Error::NotDivergenceFree)
        }
    }

    pub fn velocity(&self, x: [f64; 2], t: f64) -> Result<[f64; 2]> {
        match self {
            VelocityField::RigidRotation { omega } => Ok([-omega * x[1], omega * x[0]]),
            VelocityField::Custom(c) => c.eval(x, t),
        }
    }

    /// Characteristic foot of `x` at `t_n - dt` for the particle located at
    /// `x` at time `t_n`.
    pub fn trace_back(&self, x: [f64; 2], t_n: f64, dt: f64) -> Result<[f64; 2]> {
        self.step_map(t_n, dt).apply(x)
    }

    /// Precomputed foot map for one time step.
    pub fn step_map(&self, t_n: f64, dt: f64) -> StepMap<'_> {
        match self {
            VelocityField::RigidRotation { omega } => {
                let (s, c) = (omega * dt).sin_cos();
                StepMap::Rotation { cos: c, sin: s }
            }
            VelocityField::Custom(field) => StepMap::Rk4 { field, t_n, dt },
        }
    }

    /// `||u||_inf * dt` over `domain`. Custom fields are sampled on a
    /// 101 x 101 grid at time `t`.
    pub fn displacement_bound(&self, domain: &Rect, t: f64, dt: f64) -> Result<f64> {
        let sup = match self {
            VelocityField::RigidRotation { omega } => {
                let corners = [
                    [domain.x0, domain.y0],
                    [domain.x1, domain.y0],
                    [domain.x0, domain.y1],
                    [domain.x1, domain.y1],
                ];
                corners.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max) * omega.abs()
            }
            VelocityField::Custom(c) => {
                let n = 100;
                let mut sup = 0.0f64;
                for j in 0..=n {
                    for i in 0..=n {
                        let x = [
                            domain.x0 + domain.width() * i as f64 / n as f64,
                            domain.y0 + domain.height() * j as f64 / n as f64,
                        ];
                        let u = c.eval(x, t)?;
                        sup = sup.max(u[0].hypot(u[1]));
                    }
                }
                sup
            }
        };
        Ok(sup * dt)
    }
}

/// Foot map of a single step `t_n -> t_n - dt`.
#[derive(Debug, Clone, Copy)]
pub enum StepMap<'a> {
    /// Exact backward rotation by `omega dt`.
    Rotation { cos: f64, sin: f64 },
    Rk4 {
        field: &'a CustomField,
        t_n: f64,
        dt: f64,
    },
}

impl StepMap<'_> {
    #[inline]
    pub fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        match *self {
            StepMap::Rotation { cos, sin } => {
                Ok([cos * x[0] + sin * x[1], -sin * x[0] + cos * x[1]])
            }
            StepMap::Rk4 { field, t_n, dt } => {
                let k = field.substeps.max(1);
                let h = -dt / k as f64;
                let mut p = x;
                let mut t = t_n;
                for _ in 0..k {
                    let k1 = field.eval(p, t)?;
                    let k2 = field.eval(axpy(p, 0.5 * h, k1), t + 0.5 * h)?;
                    let k3 = field.eval(axpy(p, 0.5 * h, k2), t + 0.5 * h)?;
                    let k4 = field.eval(axpy(p, h, k3), t + h)?;
                    p = [
                        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                    ];
                    t += h;
                }
                Ok(p)
            }
        }
    }
}

#[inline]
fn axpy(x: [f64; 2], a: f64, y: [f64; 2]) -> [f64; 2] {
    [x[0] + a * y[0], x[1] + a * y[1]]
}
