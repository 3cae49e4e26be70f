//! Solid-body rotation benchmarks on `[-1, 1]^2` with `u = 2 pi (-x2, x1)`.

use std::f64::consts::PI;

use crate::characteristics::VelocityField;
use crate::mesh::Rect;

/// Which side of the slotted cylinder the slot opens to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotSide {
    /// Slot cut upward from the bottom of the disk (`x2` from -0.25 to 0.1).
    #[default]
    Bottom,
    /// Slot cut downward from the top of the disk (`x2` from -0.1 to 0.25).
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    /// `cos^3(3 pi r / 2)` for `r <= 1/3` about `(0.5, 0)`.
    RotatingHump,
    /// Unit cylinder of radius 0.25 about `(0.5, 0)` with a slot of width 0.1
    /// and depth 0.35 along `x1 = 0.5`.
    SlottedCylinder(SlotSide),
}

pub const CENTER: [f64; 2] = [0.5, 0.0];
pub const OMEGA: f64 = 2.0 * PI;

pub fn hump_ic(x: [f64; 2]) -> f64 {
    let r = (x[0] - CENTER[0]).hypot(x[1] - CENTER[1]);
    if r <= 1.0 / 3.0 {
        (1.5 * PI * r).cos().powi(3)
    } else {
        0.0
    }
}

pub fn slotted_cylinder_ic(x: [f64; 2], side: SlotSide) -> f64 {
    const RADIUS: f64 = 0.25;
    const HALF_WIDTH: f64 = 0.05;
    const DEPTH: f64 = 0.35;
    let r = (x[0] - CENTER[0]).hypot(x[1] - CENTER[1]);
    if r > RADIUS {
        return 0.0;
    }
    let in_band = (x[0] - CENTER[0]).abs() < HALF_WIDTH;
    let in_slot = match side {
        SlotSide::Bottom => x[1] < CENTER[1] - RADIUS + DEPTH,
        SlotSide::Top => x[1] > CENTER[1] + RADIUS - DEPTH,
    };
    if in_band && in_slot {
        0.0
    } else {
        1.0
    }
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::RotatingHump => "hump",
            Problem::SlottedCylinder(_) => "slotted_cylinder",
        }
    }

    pub fn domain(&self) -> Rect {
        Rect::centered_square(1.0).expect("unit square")
    }

    pub fn velocity(&self) -> VelocityField {
        VelocityField::RigidRotation { omega: OMEGA }
    }

    pub fn initial(&self, x: [f64; 2]) -> f64 {
        match *self {
            Problem::RotatingHump => hump_ic(x),
            Problem::SlottedCylinder(side) => slotted_cylinder_ic(x, side),
        }
    }

    /// `c0(X(x, t; 0))`: the initial profile rotated by `omega t`.
    pub fn exact(&self, x: [f64; 2], t: f64) -> f64 {
        let (s, c) = (OMEGA * t).sin_cos();
        self.initial([c * x[0] + s * x[1], -s * x[0] + c * x[1]])
    }
}
