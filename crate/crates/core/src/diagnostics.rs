//! Measured quantities: quadrature-consistent norms, dissipation, extrema,
//! log-log rate fits and the per-run record with its CSV form.
//!
//! Norms of discrete fields are evaluated with the same rule as the
//! transported integral, so the step identities of the schemes can be checked
//! without exact integration.

use std::io::{self, Write};

use crate::transport::{ElementQuadrature, Field};
use crate::{Error, Result};

/// `||c - exact||_{L2}` with the quadrature of `quad`.
pub fn l2_error<F: Fn([f64; 2]) -> f64 + Sync>(c: &Field, exact: F, quad: &ElementQuadrature) -> f64 {
    let vals = quad.values(c.space(), &c.coeffs);
    let ex = quad.sample(exact);
    let sq: Vec<f64> = vals.iter().zip(&ex).map(|(a, b)| (a - b).powi(2)).collect();
    quad.integrate(&sq).sqrt()
}

/// `||c||^2` with the quadrature of `quad`.
pub fn l2_norm_sq(c: &Field, quad: &ElementQuadrature) -> f64 {
    let vals = quad.values(c.space(), &c.coeffs);
    let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
    quad.integrate(&sq)
}

/// `||c^n - c^{*n-1}||^2` from transported samples on the same quadrature.
pub fn dissipation(c_new: &Field, transported: &[f64], quad: &ElementQuadrature) -> f64 {
    let vals = quad.values(c_new.space(), &c_new.coeffs);
    let sq: Vec<f64> = vals.iter().zip(transported).map(|(a, b)| (a - b).powi(2)).collect();
    quad.integrate(&sq)
}

/// Running `||c^n||^2 + dt sum_{j <= n} S_h(c^j, c^j)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TripleNorm {
    stab_sum: f64,
}

impl TripleNorm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds step `n` and returns the squared triple norm of `c^n`.
    pub fn push(&mut self, norm_sq: f64, stab_energy: f64, dt: f64) -> f64 {
        self.stab_sum += dt * stab_energy;
        norm_sq + self.stab_sum
    }

    /// `dt sum_j S_h(c^j, c^j)` so far.
    pub fn accumulated(&self) -> f64 {
        self.stab_sum
    }
}

/// Least-squares slope of `log(error)` against `log(param)`.
pub fn fit_rate(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Config("rate fit needs at least two points".into()));
    }
    if series.iter().any(|&(p, e)| !(p > 0.0 && e > 0.0)) {
        return Err(Error::Config("rate fit needs positive values".into()));
    }
    let n = series.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.iter().map(|&(p, e)| (p.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("rate fit needs distinct parameters".into()));
    }
    Ok(sxy / sxx)
}

/// Minimum and maximum over nodal DoF values (vertices, and edge midpoints
/// for P2). Bubble coefficients are not nodal values and are skipped.
pub fn extrema(c: &Field) -> (f64, f64) {
    let space = c.space();
    c.coeffs
        .iter()
        .enumerate()
        .filter(|&(d, _)| space.node(d).is_some())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub t: f64,
    /// `||c^n||`.
    pub l2norm: f64,
    /// `||c^n - c^{*n-1}||^2`.
    pub dissipation_inc: f64,
    pub triple_sq: f64,
    pub min: f64,
    pub max: f64,
    pub dc_iters: usize,
    /// `S_h(c^n, c^n)` for LPS, `sum_K ||eps_K^{1/2} grad c^n||_K^2` for DC.
    pub stab_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub l2norm: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFlags {
    /// Some `||c^n||` exceeded `10 ||c^0||`.
    pub unstable: bool,
    /// Step at which the run was stopped because the solution blew up.
    pub diverged_at: Option<usize>,
    /// Steps whose Picard iteration hit the iteration cap.
    pub dc_nonconverged: usize,
    /// Point count of the rule used for the discrete norms.
    pub norm_rule: usize,
}

impl RunFlags {
    pub fn render(&self) -> String {
        let mut parts = vec![format!("norm_rule={}", self.norm_rule)];
        if self.unstable {
            parts.push("unstable".into());
        }
        if let Some(n) = self.diverged_at {
            parts.push(format!("diverged_at={n}"));
        }
        if self.dc_nonconverged > 0 {
            parts.push(format!("dc_nonconverged={}", self.dc_nonconverged));
        }
        parts.join(";")
    }
}

pub const CSV_HEADER: &str = "step,t,l2norm,dissipation_inc,triple_sq,min,max,dc_iters,stab_energy";

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dt: f64,
    pub initial: InitialState,
    pub rows: Vec<StepRow>,
    pub l2_error: f64,
    pub runtime_s: f64,
    pub flags: RunFlags,
}

impl RunRecord {
    pub fn max_l2norm(&self) -> f64 {
        self.rows.iter().map(|r| r.l2norm).fold(self.initial.l2norm, f64::max)
    }

    pub fn final_extrema(&self) -> (f64, f64) {
        self.rows
            .last()
            .map_or((self.initial.min, self.initial.max), |r| (r.min, r.max))
    }

    /// `||c^N||^2 + sum_n ||c^n - c^{*n-1}||^2 - ||c^0||^2`.
    pub fn energy_defect(&self) -> f64 {
        let last = self.rows.last().map_or(self.initial.l2norm, |r| r.l2norm);
        let diss: f64 = self.rows.iter().map(|r| r.dissipation_inc).sum();
        last * last + diss - self.initial.l2norm.powi(2)
    }

    /// Writes the per-run CSV; `runtime` is printed as 0 when disabled so
    /// reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, mut w: W, with_runtime: bool) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.step,
                fmt_f64(r.t),
                fmt_f64(r.l2norm),
                fmt_f64(r.dissipation_inc),
                fmt_f64(r.triple_sq),
                fmt_f64(r.min),
                fmt_f64(r.max),
                r.dc_iters,
                fmt_f64(r.stab_energy)
            )?;
        }
        let runtime = if with_runtime { self.runtime_s } else { 0.0 };
        writeln!(
            w,
            "# l2_error={} runtime_s={} flags={}",
            fmt_f64(self.l2_error),
            fmt_f64(runtime),
            self.flags.render()
        )
    }
}
