#![allow(clippy::excessive_precision)]

use std::sync::OnceLock;

use crate::mesh::Affine;
use crate::{Error, Result};

/// Point counts with a tabulated rule.
pub const RULE_SIZES: [usize; 5] = [7, 12, 16, 25, 42];

/// Symmetric rule on the reference triangle. Weights sum to the reference
/// area `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(lambda0, lambda1, lambda2)` of each point.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reference coordinates `(xi, eta)` of point `q`.
    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }
}

/// Symmetry orbits in barycentric coordinates. Weights are normalized to one.
enum Orbit {
    Centroid(f64),
    /// `(a, b, b)` and permutations, `b = (1 - a) / 2`.
    Three(f64, f64),
    /// All permutations of `(a, b, 1 - a - b)`.
    Six(f64, f64, f64),
}

use Orbit::{Centroid, Six, Three};

// Dunavant's symmetric rules, orbit parameters resolved to 20 digits from the
// moment equations.
const RULE_7: &[Orbit] = &[
    Centroid(0.22500000000000000000),
    Three(0.13239415278850618074, 0.059715871789769820459),
    Three(0.12593918054482715260, 0.79742698535308732240),
];

const RULE_12: &[Orbit] = &[
    Three(0.11678627572637936603, 0.50142650965817915742),
    Three(0.050844906370206816921, 0.87382197101699554332),
    Six(0.082851075618373575194, 0.053145049844816947353, 0.31035245103378440542),
];

const RULE_16: &[Orbit] = &[
    Centroid(0.14431560767778716825),
    Three(0.095091634267284624794, 0.081414823414553687942),
    Three(0.10321737053471825028, 0.65886138449647958676),
    Three(0.032458497623198080311, 0.89890554336593804908),
    Six(0.027230314174434994265, 0.0083947774099576053372, 0.26311282963463811342),
];

const RULE_25: &[Orbit] = &[
    Centroid(0.090817990382753580095),
    Three(0.036725957756466704717, 0.028844733232685245265),
    Three(0.045321059435527934783, 0.78103684902992589041),
    Six(0.072757916845420108604, 0.14170721941487995476, 0.30793983876412095017),
    Six(0.028327242531057484837, 0.025003534762686386074, 0.24667256063990269392),
    Six(0.0094216669637328234599, 0.0095408154002994575802, 0.066803251012200265774),
];

const RULE_42: &[Orbit] = &[
    Three(0.021883581369428890641, 0.022072179275642722645),
    Three(0.032788353544125350641, 0.16471056131909215498),
    Three(0.051774104507291586315, 0.45304494338232268049),
    Three(0.042162588736993017538, 0.64558893517491312609),
    Three(0.014433699669776667602, 0.87640023381825479747),
    Three(0.0049234036024000816818, 0.96121807750259790364),
    Six(0.024665753212563673963, 0.057124757403647939036, 0.17226668782135557838),
    Six(0.038571510787060683228, 0.092916249356971824758, 0.33686145979634500174),
    Six(0.014436308113533840496, 0.014646950055654409671, 0.29837288213625775297),
    Six(0.0050102288385006717699, 0.0012683309328720250872, 0.11897449769695684540),
];

fn expand(orbits: &[Orbit], degree: usize) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in orbits {
        match *orbit {
            Centroid(w) => {
                points.push([1.0 / 3.0; 3]);
                weights.push(0.5 * w);
            }
            Three(w, a) => {
                let b = 0.5 * (1.0 - a);
                points.extend([[a, b, b], [b, a, b], [b, b, a]]);
                weights.extend([0.5 * w; 3]);
            }
            Six(w, a, b) => {
                let c = 1.0 - a - b;
                points.extend([[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]);
                weights.extend([0.5 * w; 6]);
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Rule with the given number of points (7, 12, 16, 25 or 42), exact for
/// degree 5, 6, 8, 10 and 14 respectively.
pub fn get_rule(points: usize) -> Result<&'static QuadratureRule> {
    static TABLES: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        vec![
            expand(RULE_7, 5),
            expand(RULE_12, 6),
            expand(RULE_16, 8),
            expand(RULE_25, 10),
            expand(RULE_42, 14),
        ]
    });
    RULE_SIZES
        .iter()
        .position(|&n| n == points)
        .map(|i| &tables[i])
        .ok_or(Error::UnsupportedRule(points))
}

/// `int_K f dx` with the rule mapped through the element's affine map.
pub fn integrate_element<F: FnMut([f64; 2]) -> f64>(
    rule: &QuadratureRule,
    element: &Affine,
    mut f: F,
) -> f64 {
    let jac = element.det.abs();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, &w)| w * jac * f(element.map([p[1], p[2]])))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, Diagonal, Rect};
    use approx::assert_relative_eq;

    /// `int_{ref} xi^a eta^b = a! b! / (a + b + 2)!`.
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    fn monomial_quad(rule: &QuadratureRule, a: i32, b: i32) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1].powi(a) * p[2].powi(b))
            .sum()
    }

    #[test]
    fn declared_degrees() {
        let expected = [(7, 5), (12, 6), (16, 8), (25, 10), (42, 14)];
        for (n, d) in expected {
            let r = get_rule(n).unwrap();
            assert_eq!(r.len(), n);
            assert_eq!(r.degree, d);
        }
        assert_eq!(get_rule(13), Err(Error::UnsupportedRule(13)));
    }

    #[test]
    fn weights_positive_and_normalized() {
        for n in RULE_SIZES {
            let r = get_rule(n).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 0.5).abs() <= 1e-14, "rule {n}: sum {sum}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for p in &r.points {
                assert!(p.iter().all(|&l| l > 0.0));
                assert!((p[0] + p[1] + p[2] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exactness_is_sharp() {
        for n in RULE_SIZES {
            let r = get_rule(n).unwrap();
            for deg in 0..=r.degree as u32 {
                for a in 0..=deg {
                    let b = deg - a;
                    let exact = monomial_exact(a, b);
                    let q = monomial_quad(r, a as i32, b as i32);
                    assert!(
                        ((q - exact) / exact).abs() <= 1e-12,
                        "rule {n}: x^{a} y^{b} rel err {}",
                        ((q - exact) / exact).abs()
                    );
                }
            }
            let next = r.degree as u32 + 1;
            let worst = (0..=next)
                .map(|a| {
                    let exact = monomial_exact(a, next - a);
                    ((monomial_quad(r, a as i32, (next - a) as i32) - exact) / exact).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst > 1e-8, "rule {n} is exact beyond degree {}", r.degree);
        }
    }

    #[test]
    fn physical_integrals() {
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let m = build_uniform_mesh(unit, 1, Diagonal::Backward).unwrap();
        // Element 0 is (0,0), (1,0), (0,1).
        assert_eq!(m.triangle(0), [0, 1, 2]);
        let r = get_rule(7).unwrap();
        assert_relative_eq!(integrate_element(r, m.affine(0), |x| x[0]), 1.0 / 6.0, max_relative = 1e-14);

        let sq = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let m = build_uniform_mesh(sq, 2, Diagonal::Forward).unwrap();
        assert_relative_eq!(integrate_element(r, m.affine(3), |_| 1.0), 0.125, max_relative = 1e-14);

        // Degree-14 monomial on a physical element, against the pulled-back closed form.
        let r42 = get_rule(42).unwrap();
        let a = m.affine(0);
        let q = integrate_element(r42, a, |x| {
            let xi = a.inverse_map(x);
            xi[0].powi(9) * xi[1].powi(5)
        });
        let exact = a.det * monomial_exact(9, 5);
        assert_relative_eq!(q, exact, max_relative = 1e-12);
    }
}
