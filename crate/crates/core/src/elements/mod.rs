//! Reference-triangle basis functions and symmetric quadrature rules.
//!
//! The reference triangle has vertices `(0,0)`, `(1,0)`, `(0,1)`; barycentric
//! coordinates are `lambda0 = 1 - xi - eta`, `lambda1 = xi`, `lambda2 = eta`.

mod basis;
mod quadrature;

pub use basis::{evaluate_basis, BasisEval, ElementKind, MAX_LOCAL_DOFS};
pub use quadrature::{get_rule, integrate_element, QuadratureRule, RULE_SIZES};
