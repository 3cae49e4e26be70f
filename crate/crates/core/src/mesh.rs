//! Triangulations of axis-aligned rectangles.
//!
//! Meshes are immutable once built. Besides connectivity they carry the affine
//! map `F_K(xi) = B_K xi + b_K` of every element, an edge-neighbor table used by
//! the point-location walk and, for refined meshes, the parent of every child
//! element so that macro-element partitions can be reconstructed exactly.

use std::io::{self, Write};

use crate::{Error, Result};

/// Half-width of the barycentric containment band.
pub const TOL_BARY: f64 = 1e-10;

/// Points whose smallest barycentric coordinate is below this value are
/// checked against every element sharing a vertex, so that ties on shared
/// edges and vertices resolve to the lowest element id.
const TIE_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let (width, height) = (x1 - x0, y1 - y0);
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::DegenerateDomain { width, height });
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// The square `[-a, a]^2`.
    pub fn centered_square(a: f64) -> Result<Self> {
        Self::new(-a, a, -a, a)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0].clamp(self.x0, self.x1), p[1].clamp(self.y0, self.y1)]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

/// How each grid cell is cut into two right triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// Diagonal from the lower-left to the upper-right corner.
    #[default]
    Forward,
    /// Diagonal from the lower-right to the upper-left corner.
    Backward,
    /// Forward and backward diagonals in a checkerboard pattern.
    Alternating,
}

/// Refinement rule producing child elements from a coarse triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// Three children joining the vertices to the barycenter.
    Barycentric3,
    /// Four similar children through the edge midpoints.
    Uniform4,
}

impl Refinement {
    pub fn children(self) -> usize {
        match self {
            Refinement::Barycentric3 => 3,
            Refinement::Uniform4 => 4,
        }
    }
}

/// Affine map of an element: `x = B xi + b` with `B = [p1 - p0, p2 - p0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    /// Column-major: `b[0]` is the column `p1 - p0`, `b[1]` is `p2 - p0`.
    pub b: [[f64; 2]; 2],
    pub offset: [f64; 2],
    pub det: f64,
    /// Row-major inverse of `B`.
    pub inv: [[f64; 2]; 2],
}

impl Affine {
    fn from_vertices(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> Self {
        let c0 = [p1[0] - p0[0], p1[1] - p0[1]];
        let c1 = [p2[0] - p0[0], p2[1] - p0[1]];
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        let inv = [[c1[1] / det, -c1[0] / det], [-c0[1] / det, c0[0] / det]];
        Self {
            b: [c0, c1],
            offset: p0,
            det,
            inv,
        }
    }

    /// Reference point to physical point.
    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.offset[0] + self.b[0][0] * xi[0] + self.b[1][0] * xi[1],
            self.offset[1] + self.b[0][1] * xi[0] + self.b[1][1] * xi[1],
        ]
    }

    /// Physical point to reference point.
    #[inline]
    pub fn inverse_map(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.offset[0], x[1] - self.offset[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Pushes a reference gradient forward: `B^{-T} g`.
    #[inline]
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }
}

/// Parent information kept by refined meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub split: Refinement,
    /// Coarse element of every fine element.
    pub parent: Vec<usize>,
    pub coarse_diameter: Vec<f64>,
    pub coarse_area: Vec<f64>,
}

/// Result of a point location: containing element and barycentric
/// coordinates `(lambda0, lambda1, lambda2)` with respect to its vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub element: usize,
    pub bary: [f64; 3],
}

impl Location {
    /// Reference coordinates `(xi, eta) = (lambda1, lambda2)`.
    pub fn reference(&self) -> [f64; 2] {
        [self.bary[1], self.bary[2]]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    domain: Rect,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    /// `neighbors[k][i]` is the element across the edge opposite vertex `i`.
    neighbors: Vec<[Option<usize>; 3]>,
    boundary_vertex: Vec<bool>,
    diameters: Vec<f64>,
    affine: Vec<Affine>,
    vertex_elements_ptr: Vec<usize>,
    vertex_elements: Vec<usize>,
    grid: LocatorGrid,
    leg: Option<[f64; 2]>,
    hierarchy: Option<Hierarchy>,
}

impl Mesh {
    /// Builds the mesh from raw connectivity. Triangles must be
    /// counterclockwise and tile `domain`.
    pub fn from_parts(
        domain: Rect,
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let affine: Vec<Affine> = triangles
            .iter()
            .map(|t| Affine::from_vertices(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .collect();
        if let Some(k) = affine.iter().position(|a| !(a.det > 0.0)) {
            return Err(Error::MacroPattern(format!(
                "element {k} has non-positive orientation"
            )));
        }
        let diameters = triangles
            .iter()
            .map(|t| {
                let d = |a: usize, b: usize| {
                    let (p, q) = (vertices[a], vertices[b]);
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
                };
                d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[2], t[0]))
            })
            .collect();

        let neighbors = build_neighbors(vertices.len(), &triangles);
        let mut boundary_vertex = vec![false; vertices.len()];
        for (t, nb) in triangles.iter().zip(&neighbors) {
            for i in 0..3 {
                if nb[i].is_none() {
                    boundary_vertex[t[(i + 1) % 3]] = true;
                    boundary_vertex[t[(i + 2) % 3]] = true;
                }
            }
        }

        let mut counts = vec![0usize; vertices.len() + 1];
        for t in &triangles {
            for &v in t {
                counts[v + 1] += 1;
            }
        }
        for i in 0..vertices.len() {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut vertex_elements = vec![0; counts[vertices.len()]];
        for (k, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_elements[fill[v]] = k;
                fill[v] += 1;
            }
        }

        let mut mesh = Self {
            domain,
            vertices,
            triangles,
            neighbors,
            boundary_vertex,
            diameters,
            affine,
            vertex_elements_ptr: counts,
            vertex_elements,
            grid: LocatorGrid::default(),
            leg: None,
            hierarchy: None,
        };
        mesh.grid = LocatorGrid::build(&mesh);
        Ok(mesh)
    }

    pub fn domain(&self) -> &Rect {
        &self.domain
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn triangle(&self, k: usize) -> [usize; 3] {
        self.triangles[k]
    }

    pub fn neighbors(&self, k: usize) -> [Option<usize>; 3] {
        self.neighbors[k]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn affine(&self, k: usize) -> &Affine {
        &self.affine[k]
    }

    pub fn area(&self, k: usize) -> f64 {
        self.affine[k].area()
    }

    /// Diameter `h_K` (longest edge).
    pub fn diameter(&self, k: usize) -> f64 {
        self.diameters[k]
    }

    /// Mesh parameter `h = max_K h_K`.
    pub fn h(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.diameters.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max h_K / min h_K`.
    pub fn quasi_uniformity(&self) -> f64 {
        self.h() / self.h_min()
    }

    /// Grid leg lengths `(dx, dy)` of the generating grid, if any.
    pub fn leg(&self) -> Option<[f64; 2]> {
        self.leg
    }

    pub fn hierarchy(&self) -> Option<&Hierarchy> {
        self.hierarchy.as_ref()
    }

    /// Elements having `v` as a vertex, in increasing id order.
    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[self.vertex_elements_ptr[v]..self.vertex_elements_ptr[v + 1]]
    }

    pub fn centroid(&self, k: usize) -> [f64; 2] {
        self.affine[k].map([1.0 / 3.0, 1.0 / 3.0])
    }

    pub fn total_area(&self) -> f64 {
        self.affine.iter().map(Affine::area).sum()
    }

    /// Barycentric coordinates of `x` with respect to element `k`.
    #[inline]
    pub fn barycentric(&self, k: usize, x: [f64; 2]) -> [f64; 3] {
        let r = self.affine[k].inverse_map(x);
        [1.0 - r[0] - r[1], r[0], r[1]]
    }

    #[inline]
    fn contains(&self, k: usize, x: [f64; 2]) -> Option<[f64; 3]> {
        let l = self.barycentric(k, x);
        (l[0] >= -TOL_BARY && l[1] >= -TOL_BARY && l[2] >= -TOL_BARY).then_some(l)
    }

    /// Locates the element containing `x`, starting a neighbor walk at `hint`.
    ///
    /// Points outside the domain are clamped to the nearest boundary point.
    /// Ties on shared edges and vertices resolve to the lowest element id. A
    /// walk that stalls falls back to an exhaustive scan.
    pub fn locate_point(&self, x: [f64; 2], hint: Option<usize>) -> Result<Location> {
        let x = self.domain.clamp(x);
        let mut current = match hint {
            Some(k) if k < self.triangles.len() => k,
            _ => self.grid.guess(x),
        };
        let max_steps = 4 * self.triangles.len().max(16);
        for _ in 0..max_steps {
            let l = self.barycentric(current, x);
            let (imin, lmin) = argmin3(l);
            if lmin >= -TOL_BARY {
                return Ok(self.resolve_tie(current, x, l, lmin));
            }
            match self.neighbors[current][imin] {
                Some(next) => current = next,
                None => {
                    // Most negative edge is on the boundary; try the other
                    // outward edges before giving up on the walk.
                    let mut moved = false;
                    let mut order = [0usize, 1, 2];
                    order.sort_by(|&a, &b| l[a].total_cmp(&l[b]));
                    for &i in &order[1..] {
                        if l[i] < -TOL_BARY {
                            if let Some(next) = self.neighbors[current][i] {
                                current = next;
                                moved = true;
                                break;
                            }
                        }
                    }
                    if !moved {
                        break;
                    }
                }
            }
        }
        self.locate_exhaustive(x)
    }

    fn resolve_tie(&self, k: usize, x: [f64; 2], bary: [f64; 3], lmin: f64) -> Location {
        if lmin >= TIE_BAND {
            return Location { element: k, bary };
        }
        let mut best = Location { element: k, bary };
        for &v in &self.triangles[k] {
            for &other in self.vertex_elements(v) {
                if other < best.element {
                    if let Some(l) = self.contains(other, x) {
                        best = Location {
                            element: other,
                            bary: l,
                        };
                    }
                }
            }
        }
        best
    }

    fn locate_exhaustive(&self, x: [f64; 2]) -> Result<Location> {
        (0..self.triangles.len())
            .find_map(|k| self.contains(k, x).map(|bary| Location { element: k, bary }))
            .ok_or(Error::LocateFailed { x: x[0], y: x[1] })
    }

    /// Refines every element with `split`; the returned mesh remembers the
    /// parent of each child.
    pub fn refine(&self, split: Refinement) -> Result<Mesh> {
        let mut vertices = self.vertices.clone();
        let mut triangles = Vec::with_capacity(self.triangles.len() * split.children());
        let mut parent = Vec::with_capacity(triangles.capacity());
        match split {
            Refinement::Barycentric3 => {
                for (k, &[a, b, c]) in self.triangles.iter().enumerate() {
                    let g = vertices.len();
                    vertices.push(self.centroid(k));
                    triangles.extend([[a, b, g], [b, c, g], [c, a, g]]);
                    parent.extend([k; 3]);
                }
            }
            Refinement::Uniform4 => {
                let mut midpoint = std::collections::HashMap::new();
                let mut mid = |p: usize, q: usize, vertices: &mut Vec<[f64; 2]>| {
                    *midpoint.entry((p.min(q), p.max(q))).or_insert_with(|| {
                        let (x, y) = (vertices[p], vertices[q]);
                        vertices.push([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])]);
                        vertices.len() - 1
                    })
                };
                for (k, &[a, b, c]) in self.triangles.iter().enumerate() {
                    let ab = mid(a, b, &mut vertices);
                    let bc = mid(b, c, &mut vertices);
                    let ca = mid(c, a, &mut vertices);
                    triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
                    parent.extend([k; 4]);
                }
            }
        }
        let mut fine = Mesh::from_parts(self.domain, vertices, triangles)?;
        fine.leg = self.leg;
        fine.hierarchy = Some(Hierarchy {
            split,
            parent,
            coarse_diameter: self.diameters.clone(),
            coarse_area: self.affine.iter().map(Affine::area).collect(),
        });
        Ok(fine)
    }

    /// Writes `NV NT`, the vertex coordinates and the 0-based connectivity.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for p in &self.vertices {
            writeln!(w, "{:.16e} {:.16e}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[inline]
fn argmin3(l: [f64; 3]) -> (usize, f64) {
    let mut i = 0;
    if l[1] < l[i] {
        i = 1;
    }
    if l[2] < l[i] {
        i = 2;
    }
    (i, l[i])
}

fn build_neighbors(nv: usize, triangles: &[[usize; 3]]) -> Vec<[Option<usize>; 3]> {
    let mut edges: std::collections::HashMap<usize, (usize, usize)> = std::collections::HashMap::with_capacity(3 * triangles.len());
    let mut neighbors = vec![[None; 3]; triangles.len()];
    for (k, t) in triangles.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
            let key = a.min(b) * nv + a.max(b);
            if let Some((other, j)) = edges.remove(&key) {
                neighbors[k][i] = Some(other);
                neighbors[other][j] = Some(k);
            } else {
                edges.insert(key, (k, i));
            }
        }
    }
    neighbors
}

/// Uniform bucket grid mapping cells to an element near the cell center; used
/// to seed walks when no hint is available.
#[derive(Debug, Clone, Default)]
struct LocatorGrid {
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    seed: Vec<usize>,
}

impl LocatorGrid {
    fn build(mesh: &Mesh) -> Self {
        let ne = mesh.triangles.len();
        let side = ((ne as f64).sqrt().ceil() as usize).max(1);
        let d = mesh.domain;
        let cell = [d.width() / side as f64, d.height() / side as f64];
        let mut seed = vec![usize::MAX; side * side];
        for k in 0..ne {
            let c = mesh.centroid(k);
            let i = (((c[0] - d.x0) / cell[0]) as usize).min(side - 1);
            let j = (((c[1] - d.y0) / cell[1]) as usize).min(side - 1);
            let slot = &mut seed[j * side + i];
            if *slot == usize::MAX {
                *slot = k;
            }
        }
        // Cells without a centroid inherit the nearest filled cell on the row, or 0.
        let mut last = 0;
        for s in seed.iter_mut() {
            if *s == usize::MAX {
                *s = last;
            } else {
                last = *s;
            }
        }
        Self {
            origin: [d.x0, d.y0],
            cell,
            dims: [side, side],
            seed,
        }
    }

    fn guess(&self, x: [f64; 2]) -> usize {
        if self.seed.is_empty() {
            return 0;
        }
        let i = (((x[0] - self.origin[0]) / self.cell[0]).max(0.0) as usize).min(self.dims[0] - 1);
        let j = (((x[1] - self.origin[1]) / self.cell[1]).max(0.0) as usize).min(self.dims[1] - 1);
        self.seed[j * self.dims[0] + i]
    }
}

/// Structured mesh of `2 n^2` right triangles on `domain`.
pub fn build_uniform_mesh(domain: Rect, n: usize, split: Diagonal) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivision(n));
    }
    let np = n + 1;
    let (dx, dy) = (domain.width() / n as f64, domain.height() / n as f64);
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            // Pin the last row/column to the exact domain bounds.
            let x = if i == n { domain.x1 } else { domain.x0 + i as f64 * dx };
            let y = if j == n { domain.y1 } else { domain.y0 + j as f64 * dy };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * np + i;
            let (v10, v01, v11) = (v00 + 1, v00 + np, v00 + np + 1);
            let forward = match split {
                Diagonal::Forward => true,
                Diagonal::Backward => false,
                Diagonal::Alternating => (i + j) % 2 == 0,
            };
            if forward {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }
    let mut mesh = Mesh::from_parts(domain, vertices, triangles)?;
    mesh.leg = Some([dx, dy]);
    Ok(mesh)
}

/// Uniform mesh whose grid leg is (as close as possible to) `leg`.
pub fn build_mesh_with_leg(domain: Rect, leg: f64, split: Diagonal) -> Result<Mesh> {
    if !(leg > 0.0) {
        return Err(Error::Config(format!("mesh leg must be positive, got {leg}")));
    }
    let n = (domain.width().max(domain.height()) / leg).round().max(1.0) as usize;
    build_uniform_mesh(domain, n, split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroLevel {
    /// Every macro is a single element.
    One,
    /// Macros are the coarse elements of a refined mesh.
    Two,
}

/// Stabilization weight of a macro as a function of its diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// `tau_M = c * h_M`.
    Proportional(f64),
    /// `tau_M = c`.
    Constant(f64),
}

impl TauRule {
    pub fn eval(&self, h_m: f64) -> f64 {
        match *self {
            TauRule::Proportional(c) => c * h_m,
            TauRule::Constant(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Macro {
    pub elements: Vec<usize>,
    pub diameter: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroPartition {
    macros: Vec<Macro>,
    element_macro: Vec<usize>,
    level: MacroLevel,
    split: Option<Refinement>,
    gamma: (f64, f64),
}

impl MacroPartition {
    pub fn macros(&self) -> &[Macro] {
        &self.macros
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    pub fn level(&self) -> MacroLevel {
        self.level
    }

    pub fn split(&self) -> Option<Refinement> {
        self.split
    }

    pub fn macro_of(&self, element: usize) -> usize {
        self.element_macro[element]
    }

    /// `(gamma1, gamma2)` with `gamma1 h_M <= h_K <= gamma2 h_M` for all `K in M`.
    pub fn gamma(&self) -> (f64, f64) {
        self.gamma
    }

    /// Copy of the partition with every `tau_M` recomputed from `rule`.
    pub fn with_tau(&self, rule: TauRule) -> Self {
        let mut out = self.clone();
        for m in &mut out.macros {
            m.tau = rule.eval(m.diameter);
        }
        out
    }
}

pub fn build_macro_partition(
    mesh: &Mesh,
    level: MacroLevel,
    split: Refinement,
    tau_rule: TauRule,
) -> Result<MacroPartition> {
    let ne = mesh.num_elements();
    let (macros, element_macro, split): (Vec<Macro>, Vec<usize>, Option<Refinement>) = match level {
        MacroLevel::One => {
            let macros = (0..ne)
                .map(|k| Macro {
                    elements: vec![k],
                    diameter: mesh.diameter(k),
                    tau: tau_rule.eval(mesh.diameter(k)),
                })
                .collect();
            (macros, (0..ne).collect(), None)
        }
        MacroLevel::Two => {
            let hier = mesh.hierarchy().ok_or_else(|| {
                Error::MacroPattern("mesh was not produced by refinement".into())
            })?;
            if hier.split != split {
                return Err(Error::MacroPattern(format!(
                    "mesh refined with {:?}, partition requested {:?}",
                    hier.split, split
                )));
            }
            let nc = hier.coarse_diameter.len();
            let mut elements = vec![Vec::with_capacity(split.children()); nc];
            for (k, &p) in hier.parent.iter().enumerate() {
                elements[p].push(k);
            }
            for (p, children) in elements.iter().enumerate() {
                if children.len() != split.children() {
                    return Err(Error::MacroPattern(format!(
                        "coarse element {p} has {} children",
                        children.len()
                    )));
                }
                let area: f64 = children.iter().map(|&k| mesh.area(k)).sum();
                let coarse = hier.coarse_area[p];
                if (area - coarse).abs() > 1e-12 * coarse {
                    return Err(Error::MacroPattern(format!(
                        "children of coarse element {p} do not tile it"
                    )));
                }
            }
            let macros = elements
                .into_iter()
                .zip(&hier.coarse_diameter)
                .map(|(elements, &h)| Macro {
                    elements,
                    diameter: h,
                    tau: tau_rule.eval(h),
                })
                .collect();
            (macros, hier.parent.clone(), Some(split))
        }
    };
    let mut gamma = (f64::INFINITY, 0.0f64);
    for m in &macros {
        for &k in &m.elements {
            let r = mesh.diameter(k) / m.diameter;
            gamma.0 = gamma.0.min(r);
            gamma.1 = gamma.1.max(r);
        }
    }
    Ok(MacroPartition {
        macros,
        element_macro,
        level,
        split,
        gamma,
    })
}
