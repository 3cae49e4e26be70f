//! Global DoF layout of continuous finite element spaces over a [`Mesh`].
//!
//! Numbering: mesh vertices first (same ids), then for P2 one DoF per edge in
//! order of first appearance while looping over elements and their local
//! edges 01, 12, 20, and for P1Bubble one interior DoF per element.

use std::collections::HashMap;
use std::sync::Arc;

use crate::elements::{ElementKind, MAX_LOCAL_DOFS};
use crate::mesh::{Location, Mesh};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Arc<Mesh>,
    kind: ElementKind,
    nloc: usize,
    element_dofs: Vec<usize>,
    ndof: usize,
    boundary: Vec<bool>,
    /// Physical position of nodal DoFs; `None` for bubble coefficients.
    nodes: Vec<Option<[f64; 2]>>,
}

impl FemSpace {
    pub fn new(mesh: Arc<Mesh>, kind: ElementKind) -> Result<Self> {
        if !kind.is_continuous() {
            return Err(Error::NotConforming(kind.name()));
        }
        let nv = mesh.num_vertices();
        let ne = mesh.num_elements();
        let nloc = kind.ndof();
        let mut element_dofs = Vec::with_capacity(ne * nloc);
        let mut boundary: Vec<bool> = (0..nv).map(|v| mesh.is_boundary_vertex(v)).collect();
        let mut nodes: Vec<Option<[f64; 2]>> = mesh.vertices().iter().map(|&p| Some(p)).collect();
        match kind {
            ElementKind::P1 => {
                for t in mesh.triangles() {
                    element_dofs.extend_from_slice(t);
                }
            }
            ElementKind::P2 => {
                let mut edge_dof = HashMap::with_capacity(3 * ne);
                for k in 0..ne {
                    let t = mesh.triangle(k);
                    let nb = mesh.neighbors(k);
                    element_dofs.extend_from_slice(&t);
                    // Local edge (a, b) is opposite vertex c.
                    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                        let (va, vb) = (t[a], t[b]);
                        let key = (va.min(vb), va.max(vb));
                        let next = nodes.len();
                        let dof = *edge_dof.entry(key).or_insert_with(|| {
                            let (p, q) = (mesh.vertex(va), mesh.vertex(vb));
                            nodes.push(Some([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]));
                            boundary.push(nb[c].is_none());
                            next
                        });
                        element_dofs.push(dof);
                    }
                }
            }
            ElementKind::P1Bubble => {
                for k in 0..ne {
                    element_dofs.extend_from_slice(&mesh.triangle(k));
                    element_dofs.push(nv + k);
                }
                nodes.extend(std::iter::repeat_n(None, ne));
                boundary.extend(std::iter::repeat_n(false, ne));
            }
            ElementKind::P0Disc | ElementKind::P1Disc => unreachable!(),
        }
        Ok(Self {
            ndof: nodes.len(),
            mesh,
            kind,
            nloc,
            element_dofs,
            boundary,
            nodes,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn local_dofs(&self) -> usize {
        self.nloc
    }

    #[inline]
    pub fn element_dofs(&self, k: usize) -> &[usize] {
        &self.element_dofs[k * self.nloc..(k + 1) * self.nloc]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Position of a nodal DoF, `None` for interior bubble coefficients.
    pub fn node(&self, dof: usize) -> Option<[f64; 2]> {
        self.nodes[dof]
    }

    /// Value of the function with coefficients `coeffs` at a located point.
    #[inline]
    pub fn evaluate(&self, coeffs: &[f64], loc: &Location) -> f64 {
        let mut phi = [0.0; MAX_LOCAL_DOFS];
        self.kind.values_bary(loc.bary, &mut phi);
        self.element_dofs(loc.element)
            .iter()
            .zip(&phi[..self.nloc])
            .map(|(&d, &p)| coeffs[d] * p)
            .sum()
    }

    /// Lagrange interpolant of `f`. For P1Bubble the bubble coefficient makes
    /// the interpolant exact at the centroid.
    pub fn interpolate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut c: Vec<f64> = self.nodes.iter().map(|n| n.map_or(0.0, &f)).collect();
        if self.kind == ElementKind::P1Bubble {
            let nv = self.mesh.num_vertices();
            for k in 0..self.mesh.num_elements() {
                let t = self.mesh.triangle(k);
                let mean = (c[t[0]] + c[t[1]] + c[t[2]]) / 3.0;
                c[nv + k] = f(self.mesh.centroid(k)) - mean;
            }
        }
        c
    }
}
