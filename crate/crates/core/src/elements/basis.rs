/// Largest local DoF count among the supported element kinds.
pub const MAX_LOCAL_DOFS: usize = 6;

/// Local polynomial spaces on the reference triangle.
///
/// `P1Bubble` is `P1` enriched with the cubic bubble `27 lambda0 lambda1 lambda2`
/// (value one at the centroid). `P0Disc` and `P1Disc` are the discontinuous
/// projection spaces used by the local projection stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    P1,
    P2,
    P1Bubble,
    P0Disc,
    P1Disc,
}

impl ElementKind {
    pub fn ndof(self) -> usize {
        match self {
            ElementKind::P1 | ElementKind::P1Disc => 3,
            ElementKind::P2 => 6,
            ElementKind::P1Bubble => 4,
            ElementKind::P0Disc => 1,
        }
    }

    /// Degree `m` of the complete polynomial space contained in the element.
    pub fn order(self) -> usize {
        match self {
            ElementKind::P0Disc => 0,
            ElementKind::P1 | ElementKind::P1Bubble | ElementKind::P1Disc => 1,
            ElementKind::P2 => 2,
        }
    }

    /// Highest total degree of any basis function (3 for the bubble).
    pub fn max_degree(self) -> usize {
        match self {
            ElementKind::P1Bubble => 3,
            k => k.order(),
        }
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, ElementKind::P1 | ElementKind::P2 | ElementKind::P1Bubble)
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::P1 => "p1",
            ElementKind::P2 => "p2",
            ElementKind::P1Bubble => "p1bubble",
            ElementKind::P0Disc => "p0disc",
            ElementKind::P1Disc => "p1disc",
        }
    }

    /// Basis values from barycentric coordinates, written to `out[..ndof]`.
    #[inline]
    pub fn values_bary(self, l: [f64; 3], out: &mut [f64]) {
        match self {
            ElementKind::P1 | ElementKind::P1Disc => out[..3].copy_from_slice(&l),
            ElementKind::P2 => {
                out[0] = l[0] * (2.0 * l[0] - 1.0);
                out[1] = l[1] * (2.0 * l[1] - 1.0);
                out[2] = l[2] * (2.0 * l[2] - 1.0);
                out[3] = 4.0 * l[0] * l[1];
                out[4] = 4.0 * l[1] * l[2];
                out[5] = 4.0 * l[2] * l[0];
            }
            ElementKind::P1Bubble => {
                out[..3].copy_from_slice(&l);
                out[3] = 27.0 * l[0] * l[1] * l[2];
            }
            ElementKind::P0Disc => out[0] = 1.0,
        }
    }
}

/// Basis values and reference gradients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub n: usize,
    pub values: [f64; MAX_LOCAL_DOFS],
    pub grads: [[f64; 2]; MAX_LOCAL_DOFS],
}

impl BasisEval {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.n]
    }

    pub fn grads(&self) -> &[[f64; 2]] {
        &self.grads[..self.n]
    }
}

const GRAD_LAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Values and reference gradients of every local basis function at `p`.
///
/// P2 ordering: the three vertices, then the midpoints of edges 01, 12, 20.
pub fn evaluate_basis(kind: ElementKind, p: [f64; 2]) -> BasisEval {
    let l = [1.0 - p[0] - p[1], p[0], p[1]];
    let g = GRAD_LAMBDA;
    let mut e = BasisEval {
        n: kind.ndof(),
        values: [0.0; MAX_LOCAL_DOFS],
        grads: [[0.0; 2]; MAX_LOCAL_DOFS],
    };
    kind.values_bary(l, &mut e.values);
    let lin = |a: f64, ga: [f64; 2], b: f64, gb: [f64; 2]| [a * ga[0] + b * gb[0], a * ga[1] + b * gb[1]];
    match kind {
        ElementKind::P1 | ElementKind::P1Disc => e.grads[..3].copy_from_slice(&g),
        ElementKind::P2 => {
            for i in 0..3 {
                let s = 4.0 * l[i] - 1.0;
                e.grads[i] = [s * g[i][0], s * g[i][1]];
            }
            for (slot, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let d = lin(l[a], g[b], l[b], g[a]);
                e.grads[3 + slot] = [4.0 * d[0], 4.0 * d[1]];
            }
        }
        ElementKind::P1Bubble => {
            e.grads[..3].copy_from_slice(&g);
            let mut d = [0.0; 2];
            for i in 0..3 {
                let c = l[(i + 1) % 3] * l[(i + 2) % 3];
                d[0] += c * g[i][0];
                d[1] += c * g[i][1];
            }
            e.grads[3] = [27.0 * d[0], 27.0 * d[1]];
        }
        ElementKind::P0Disc => {}
    }
    e
}
