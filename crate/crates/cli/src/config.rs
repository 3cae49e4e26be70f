//! Experiment configuration: a flat `key = value` file with `[run]`, `[lps]`
//! and `[dc]` sections. `#` starts a comment. Unknown sections and keys are
//! errors, and every key may appear at most once.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use lagrange_galerkin::dc::{DcConfig, Reduction};
use lagrange_galerkin::elements::{ElementKind, RULE_SIZES};
use lagrange_galerkin::mesh::{Refinement, TauRule};
use lagrange_galerkin::problems::{Problem, SlotSide};
use lagrange_galerkin::run::{steps_for, RunSetup, Scheme};
use lagrange_galerkin::stabilization::{LpsConfig, LpsVariant, ProjectionSpace};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    Hump,
    SlottedCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeName {
    Lg,
    Lps,
    Dc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// No refinement, except the split required by two-level LPS.
    Auto,
    None,
    Split(Refinement),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauMode {
    Proportional,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpsSection {
    pub level: Level,
    pub split: Refinement,
    pub tau_coeff: f64,
    pub tau_mode: TauMode,
    pub projection: ProjectionSpace,
}

impl Default for LpsSection {
    fn default() -> Self {
        Self {
            level: Level::Two,
            split: Refinement::Barycentric3,
            tau_coeff: 0.1,
            tau_mode: TauMode::Proportional,
            projection: ProjectionSpace::P1Disc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemName,
    pub slot_side: SlotSide,
    pub scheme: SchemeName,
    pub element: ElementKind,
    pub leg: f64,
    pub dt: Vec<f64>,
    pub quadrature: usize,
    pub revolutions: f64,
    pub refine: RefineMode,
    pub output: PathBuf,
    pub seed: u64,
    /// 0 lets the thread pool pick.
    pub threads: usize,
    pub timing: bool,
    pub lps: LpsSection,
    pub dc: DcConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemName::Hump,
            slot_side: SlotSide::Bottom,
            scheme: SchemeName::Lg,
            element: ElementKind::P1,
            leg: 0.05,
            dt: vec![0.01],
            quadrature: 42,
            revolutions: 1.0,
            refine: RefineMode::Auto,
            output: PathBuf::from("out"),
            seed: 0,
            threads: 0,
            timing: true,
            lps: LpsSection::default(),
            dc: DcConfig::default(),
        }
    }
}

fn bad(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!("key `{key}`: cannot parse `{value}`, expected {expected}"))
}

fn num<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            bad(key, value, &format!("one of {}", names.join(", ")))
        })
}

const PROBLEMS: &[(&str, ProblemName)] = &[("hump", ProblemName::Hump), ("slotted_cylinder", ProblemName::SlottedCylinder)];
const SCHEMES: &[(&str, SchemeName)] = &[("lg", SchemeName::Lg), ("lps", SchemeName::Lps), ("dc", SchemeName::Dc)];
const ELEMENTS: &[(&str, ElementKind)] = &[
    ("p1", ElementKind::P1),
    ("p2", ElementKind::P2),
    ("p1bubble", ElementKind::P1Bubble),
];
const SIDES: &[(&str, SlotSide)] = &[("bottom", SlotSide::Bottom), ("top", SlotSide::Top)];
const REFINES: &[(&str, RefineMode)] = &[
    ("auto", RefineMode::Auto),
    ("none", RefineMode::None),
    ("bary3", RefineMode::Split(Refinement::Barycentric3)),
    ("uniform4", RefineMode::Split(Refinement::Uniform4)),
];
const LEVELS: &[(&str, Level)] = &[("one", Level::One), ("two", Level::Two)];
const SPLITS: &[(&str, Refinement)] = &[("3", Refinement::Barycentric3), ("4", Refinement::Uniform4)];
const TAU_MODES: &[(&str, TauMode)] = &[("proportional", TauMode::Proportional), ("constant", TauMode::Constant)];
const PROJECTIONS: &[(&str, ProjectionSpace)] = &[("p0", ProjectionSpace::P0Disc), ("p1", ProjectionSpace::P1Disc)];
const REDUCTIONS: &[(&str, Reduction)] = &[("mean", Reduction::Mean), ("max", Reduction::Max)];
const BOOLS: &[(&str, bool)] = &[("true", true), ("false", false)];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], v: T) -> &'static str {
    options.iter().find(|(_, o)| *o == v).map(|(n, _)| *n).expect("every value has a name")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("line {}: {msg}", lineno + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(name, "run" | "lps" | "dc") {
                    return Err(at(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let sec = section.as_deref().ok_or_else(|| at(format!("key `{key}` outside any section")))?;
            if !seen.insert(format!("{sec}.{key}")) {
                return Err(at(format!("duplicate key `{key}` in [{sec}]")));
            }
            cfg.set(sec, key, value).map_err(|e| match e {
                CliError::Config(m) => at(m),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), CliError> {
        match (section, key) {
            ("run", "problem") => self.problem = choice(key, v, PROBLEMS)?,
            ("run", "slot_side") => self.slot_side = choice(key, v, SIDES)?,
            ("run", "scheme") => self.scheme = choice(key, v, SCHEMES)?,
            ("run", "element") => self.element = choice(key, v, ELEMENTS)?,
            ("run", "leg") => self.leg = num(key, v, "a number")?,
            ("run", "dt") => {
                self.dt = v
                    .split(',')
                    .map(|s| num(key, s.trim(), "a comma-separated list of numbers"))
                    .collect::<Result<_, _>>()?
            }
            ("run", "quadrature") => self.quadrature = num(key, v, "a point count")?,
            ("run", "revolutions") => self.revolutions = num(key, v, "a number")?,
            ("run", "refine") => self.refine = choice(key, v, REFINES)?,
            ("run", "output") => self.output = PathBuf::from(v),
            ("run", "seed") => self.seed = num(key, v, "an unsigned integer")?,
            ("run", "threads") => self.threads = num(key, v, "an unsigned integer")?,
            ("run", "timing") => self.timing = choice(key, v, BOOLS)?,
            ("lps", "level") => self.lps.level = choice(key, v, LEVELS)?,
            ("lps", "split") => self.lps.split = choice(key, v, SPLITS)?,
            ("lps", "tau_coeff") => self.lps.tau_coeff = num(key, v, "a number")?,
            ("lps", "tau_mode") => self.lps.tau_mode = choice(key, v, TAU_MODES)?,
            ("lps", "projection") => self.lps.projection = choice(key, v, PROJECTIONS)?,
            ("dc", "c_eps") => self.dc.c_eps = num(key, v, "a number")?,
            ("dc", "alpha") => self.dc.alpha = num(key, v, "a number")?,
            ("dc", "tol") => self.dc.tol = num(key, v, "a number")?,
            ("dc", "max_iter") => self.dc.max_iter = num(key, v, "an unsigned integer")?,
            ("dc", "reduction") => self.dc.reduction = choice(key, v, REDUCTIONS)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let dt: Vec<String> = self.dt.iter().map(f64::to_string).collect();
        let w = &mut s;
        let _ = writeln!(w, "[run]");
        let _ = writeln!(w, "problem = {}", name_of(PROBLEMS, self.problem));
        let _ = writeln!(w, "slot_side = {}", name_of(SIDES, self.slot_side));
        let _ = writeln!(w, "scheme = {}", name_of(SCHEMES, self.scheme));
        let _ = writeln!(w, "element = {}", name_of(ELEMENTS, self.element));
        let _ = writeln!(w, "leg = {}", self.leg);
        let _ = writeln!(w, "dt = {}", dt.join(", "));
        let _ = writeln!(w, "quadrature = {}", self.quadrature);
        let _ = writeln!(w, "revolutions = {}", self.revolutions);
        let _ = writeln!(w, "refine = {}", name_of(REFINES, self.refine));
        let _ = writeln!(w, "output = {}", self.output.display());
        let _ = writeln!(w, "seed = {}", self.seed);
        let _ = writeln!(w, "threads = {}", self.threads);
        let _ = writeln!(w, "timing = {}", self.timing);
        let _ = writeln!(w, "\n[lps]");
        let _ = writeln!(w, "level = {}", name_of(LEVELS, self.lps.level));
        let _ = writeln!(w, "split = {}", name_of(SPLITS, self.lps.split));
        let _ = writeln!(w, "tau_coeff = {}", self.lps.tau_coeff);
        let _ = writeln!(w, "tau_mode = {}", name_of(TAU_MODES, self.lps.tau_mode));
        let _ = writeln!(w, "projection = {}", name_of(PROJECTIONS, self.lps.projection));
        let _ = writeln!(w, "\n[dc]");
        let _ = writeln!(w, "c_eps = {}", self.dc.c_eps);
        let _ = writeln!(w, "alpha = {}", self.dc.alpha);
        let _ = writeln!(w, "tol = {}", self.dc.tol);
        let _ = writeln!(w, "max_iter = {}", self.dc.max_iter);
        let _ = writeln!(w, "reduction = {}", name_of(REDUCTIONS, self.dc.reduction));
        s
    }

    fn lps_config(&self) -> LpsConfig {
        let tau = match self.lps.tau_mode {
            TauMode::Proportional => TauRule::Proportional(self.lps.tau_coeff),
            TauMode::Constant => TauRule::Constant(self.lps.tau_coeff),
        };
        let variant = match self.lps.level {
            Level::One => LpsVariant::OneLevel,
            Level::Two => LpsVariant::TwoLevel(self.lps.split),
        };
        LpsConfig {
            projection: self.lps.projection,
            tau,
            variant,
        }
    }

    /// Refinement applied to the uniform mesh.
    pub fn refinement(&self) -> Option<Refinement> {
        match self.refine {
            RefineMode::Auto if self.scheme == SchemeName::Lps && self.lps.level == Level::Two => Some(self.lps.split),
            RefineMode::Auto | RefineMode::None => None,
            RefineMode::Split(s) => Some(s),
        }
    }

    /// Checks everything that can be checked without building a mesh.
    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !(self.leg > 0.0 && self.leg <= 2.0) {
            return err(format!("leg must lie in (0, 2], got {}", self.leg));
        }
        if self.dt.is_empty() {
            return err("dt list is empty".into());
        }
        if !(self.revolutions > 0.0) {
            return err(format!("revolutions must be positive, got {}", self.revolutions));
        }
        for &dt in &self.dt {
            steps_for(self.revolutions, dt).map_err(CliError::from)?;
        }
        if !RULE_SIZES.contains(&self.quadrature) {
            return err(format!("quadrature must be one of {RULE_SIZES:?}, got {}", self.quadrature));
        }
        match self.scheme {
            SchemeName::Lg => {}
            SchemeName::Lps => {
                let l = &self.lps;
                if !(l.tau_coeff >= 0.0 && l.tau_coeff.is_finite()) {
                    return err(format!("tau_coeff must be nonnegative, got {}", l.tau_coeff));
                }
                match l.level {
                    Level::One => {
                        if self.element != ElementKind::P1Bubble {
                            return err(format!(
                                "one-level lps requires element p1bubble, got {}",
                                self.element.name()
                            ));
                        }
                        if l.projection != ProjectionSpace::P0Disc {
                            return err("one-level lps projects onto p0".into());
                        }
                    }
                    Level::Two => {
                        if self.element != ElementKind::P2 {
                            return err(format!("two-level lps requires element p2, got {}", self.element.name()));
                        }
                        if self.refinement() != Some(l.split) {
                            return err("two-level lps needs the mesh refined with the macro split".into());
                        }
                    }
                }
            }
            SchemeName::Dc => {
                self.dc.validate().map_err(CliError::from)?;
                if self.element == ElementKind::P1Bubble {
                    return err("dc runs on p1 or p2".into());
                }
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeName::Lg => Scheme::Lg,
            SchemeName::Lps => Scheme::Lps(self.lps_config()),
            SchemeName::Dc => Scheme::Dc(self.dc),
        }
    }

    pub fn problem(&self) -> Problem {
        match self.problem {
            ProblemName::Hump => Problem::RotatingHump,
            ProblemName::SlottedCylinder => Problem::SlottedCylinder(self.slot_side),
        }
    }

    /// The run of one time step of the list.
    pub fn setup(&self, dt: f64) -> Result<RunSetup, CliError> {
        self.validate()?;
        let mut setup = RunSetup::new(
            self.problem(),
            self.scheme(),
            self.element,
            self.leg,
            self.quadrature,
            dt,
            self.revolutions,
        )?;
        setup.refine = self.refinement();
        Ok(setup)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}
