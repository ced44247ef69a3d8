//! C¹ cubic PHT-splines over hierarchical T-meshes.
//!
//! Vertices live on an integer lattice: a root cell spans [`ROOT_SIZE`]
//! lattice units per axis and each refinement halves the cell. Every basis
//! function is attached to a basis vertex and stores one table of `4^d`
//! Bézier ordinates per element it touches.
//!
//! A function is characterised by its Hermite data at its anchor vertex
//! (value, first and mixed derivatives; `2^d` numbers). Its Hermite data at
//! every other basis vertex is zero, and the data at T-vertices follows from
//! the coarser element whose edge or face the T-vertex splits.

mod geometry;
mod io;
mod jacobian;
mod refine;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bernstein;
use crate::error::{Error, Result};
use crate::geom::Vec3;

pub use geometry::{solve_control_points, GeometricInfo};
pub use io::PointField;

/// Lattice units per root cell.
pub const ROOT_SIZE: i64 = 1 << 24;
/// Deepest refinement level the lattice can represent.
pub const MAX_LEVEL: u32 = 24;

/// Lattice coordinates of a vertex. Unused axes are zero.
pub type VertexKey = [i64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ElementClass {
    Interior,
    Boundary1,
    Boundary2,
    Exterior,
    #[default]
    Unclassified,
}

impl ElementClass {
    /// Elements kept in the analysis domain.
    pub fn is_active(self) -> bool {
        matches!(self, ElementClass::Interior | ElementClass::Boundary1 | ElementClass::Unclassified)
    }
}

#[derive(Clone, Debug)]
pub struct Element {
    pub level: u32,
    /// Lower corner in lattice units.
    pub lo: [i64; 3],
    /// Edge length in lattice units.
    pub size: i64,
    pub parent: Option<usize>,
    pub children: Option<Vec<usize>>,
    pub class: ElementClass,
    pub(crate) tables: BTreeMap<usize, Vec<f64>>,
}

impl Element {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Basis functions with a table on this element, with their ordinates.
    pub fn tables(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.tables.iter().map(|(&f, t)| (f, t.as_slice()))
    }

    pub fn corner(&self, bits: usize) -> VertexKey {
        let mut k = self.lo;
        for (a, v) in k.iter_mut().enumerate() {
            if bits >> a & 1 == 1 {
                *v += self.size;
            }
        }
        k
    }
}

#[derive(Clone, Debug)]
pub struct BasisFunction {
    pub anchor: VertexKey,
    /// Bit `a` selects which of the two functions along axis `a`.
    pub corner: usize,
    /// Parametric gaps `(left, right)` per axis used when the function was created.
    pub gaps: [[f64; 2]; 3],
    /// Hermite data at the anchor in binary derivative order.
    pub hermite: Vec<f64>,
    pub control: Vec3,
    pub(crate) support: BTreeSet<usize>,
}

impl BasisFunction {
    /// Elements on which the function has a table.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().copied()
    }

    /// Local knot vector per axis, kept as metadata only.
    pub fn local_knots(&self, anchor: Vec3, dim: usize) -> Vec<[f64; 5]> {
        (0..dim)
            .map(|a| {
                let u = anchor[a];
                let [h1, h2] = self.gaps[a];
                if self.corner >> a & 1 == 0 {
                    [u - h1, u - h1, u, u, u + h2]
                } else {
                    [u - h1, u, u, u + h2, u + h2]
                }
            })
            .collect()
    }
}

/// Value and derivative of the two cubic functions at a vertex with
/// parametric gaps `h1` (below) and `h2` (above). Row 0 holds values, row 1
/// first derivatives; column `b` is function `b`.
pub fn hermite_factor(h1: f64, h2: f64) -> [[f64; 2]; 2] {
    let alpha = 1.0 / (h1 + h2);
    let lambda = h1 * alpha;
    [[1.0 - lambda, lambda], [-3.0 * alpha, 3.0 * alpha]]
}

/// Hierarchical T-mesh carrying a PHT-spline basis and its control points.
#[derive(Clone, Debug)]
pub struct PhtMesh {
    pub(crate) dim: usize,
    pub(crate) n: [usize; 3],
    pub(crate) origin: Vec3,
    pub(crate) cell: Vec3,
    pub(crate) elements: Vec<Element>,
    pub(crate) roots: Vec<usize>,
    pub(crate) functions: Vec<BasisFunction>,
    pub(crate) vertex_fns: BTreeMap<VertexKey, Vec<usize>>,
}

impl PhtMesh {
    /// Uniform tensor mesh with `n[a]` cells on `[lo, hi]`, geometry equal to
    /// the identity map.
    pub fn tensor(dim: usize, n: &[usize], lo: &[f64], hi: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&dim) || n.len() != dim || lo.len() != dim || hi.len() != dim {
            return Err(Error::InvalidArgument(format!("expected {dim} entries per argument")));
        }
        if n.iter().any(|&k| k < 2) {
            return Err(Error::InvalidArgument("need at least 2 elements per axis".into()));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument("empty domain box".into()));
        }
        let mut nn = [1usize; 3];
        let mut origin = [0.0; 3];
        let mut cell = [1.0; 3];
        for a in 0..dim {
            nn[a] = n[a];
            origin[a] = lo[a];
            cell[a] = (hi[a] - lo[a]) / n[a] as f64;
        }
        let mut mesh = PhtMesh {
            dim,
            n: nn,
            origin,
            cell,
            elements: Vec::new(),
            roots: Vec::new(),
            functions: Vec::new(),
            vertex_fns: BTreeMap::new(),
        };
        for k in 0..nn[2] {
            for j in 0..nn[1] {
                for i in 0..nn[0] {
                    let mut lo = [i as i64, j as i64, k as i64];
                    for v in lo.iter_mut() {
                        *v *= ROOT_SIZE;
                    }
                    mesh.roots.push(mesh.elements.len());
                    mesh.elements.push(Element {
                        level: 0,
                        lo,
                        size: ROOT_SIZE,
                        parent: None,
                        children: None,
                        class: ElementClass::Unclassified,
                        tables: BTreeMap::new(),
                    });
                }
            }
        }
        let span = |a: usize| if a < dim { nn[a] + 1 } else { 1 };
        let mut fresh = Vec::new();
        for k in 0..span(2) {
            for j in 0..span(1) {
                for i in 0..span(0) {
                    let key = [i as i64 * ROOT_SIZE, j as i64 * ROOT_SIZE, k as i64 * ROOT_SIZE];
                    let info = GeometricInfo::identity(dim, mesh.param(key));
                    fresh.extend(mesh.add_vertex_functions(key, &info));
                }
            }
        }
        let leaves: Vec<usize> = mesh.roots.clone();
        let all: BTreeSet<usize> = fresh.into_iter().collect();
        for e in leaves {
            mesh.rebuild_leaf(e, &all);
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Root cells per axis.
    pub fn root_counts(&self) -> [usize; 3] {
        self.n
    }

    /// Parametric domain `(lo, hi)`.
    pub fn domain(&self) -> (Vec3, Vec3) {
        let mut hi = self.origin;
        for a in 0..self.dim {
            hi[a] += self.cell[a] * self.n[a] as f64;
        }
        (self.origin, hi)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.elements[e]
    }

    pub fn set_class(&mut self, e: usize, class: ElementClass) {
        self.elements[e].class = class;
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn function(&self, f: usize) -> &BasisFunction {
        &self.functions[f]
    }

    pub fn num_functions(&self) -> usize {
        self.functions.len()
    }

    /// Basis vertices with the ids of their `2^d` functions (ordered by corner bits).
    pub fn basis_vertices(&self) -> impl Iterator<Item = (&VertexKey, &[usize])> {
        self.vertex_fns.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn num_basis_vertices(&self) -> usize {
        self.vertex_fns.len()
    }

    pub fn vertex_functions(&self, key: &VertexKey) -> Option<&[usize]> {
        self.vertex_fns.get(key).map(|v| v.as_slice())
    }

    pub fn control(&self, f: usize) -> Vec3 {
        self.functions[f].control
    }

    pub fn set_control(&mut self, f: usize, p: Vec3) {
        self.functions[f].control = p;
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.elements.len()).filter(move |&e| self.elements[e].is_leaf())
    }

    pub fn active_leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaves().filter(move |&e| self.elements[e].class.is_active())
    }

    /// Ordinates of function `f` on element `e`, if it has any there.
    pub fn table(&self, f: usize, e: usize) -> Option<&[f64]> {
        self.elements[e].tables.get(&f).map(|t| t.as_slice())
    }

    /// Parametric coordinates of a lattice point.
    pub fn param(&self, key: VertexKey) -> Vec3 {
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + self.cell[a] * key[a] as f64 / ROOT_SIZE as f64;
        }
        p
    }

    /// Parametric edge lengths of an element.
    pub fn element_size(&self, e: usize) -> Vec3 {
        let s = self.elements[e].size as f64 / ROOT_SIZE as f64;
        let mut h = [0.0; 3];
        for a in 0..self.dim {
            h[a] = self.cell[a] * s;
        }
        h
    }

    /// Parametric box `(lo, hi)` of an element.
    pub fn element_box(&self, e: usize) -> (Vec3, Vec3) {
        let el = &self.elements[e];
        let lo = self.param(el.lo);
        let h = self.element_size(e);
        let mut hi = lo;
        for a in 0..self.dim {
            hi[a] += h[a];
        }
        (lo, hi)
    }

    pub fn on_domain_boundary(&self, key: &VertexKey) -> bool {
        (0..self.dim).any(|a| key[a] == 0 || key[a] == self.n[a] as i64 * ROOT_SIZE)
    }

    /// Axes along which the vertex sits on the domain boundary.
    pub fn boundary_axes(&self, key: &VertexKey) -> Vec<usize> {
        (0..self.dim).filter(|&a| key[a] == 0 || key[a] == self.n[a] as i64 * ROOT_SIZE).collect()
    }

    /// Leaves whose closed box meets the closed lattice box `[lo, hi]`.
    pub fn leaves_touching(&self, lo: [i64; 3], hi: [i64; 3]) -> Vec<usize> {
        let mut range = [(0usize, 0usize); 3];
        for a in 0..self.dim {
            let r0 = (lo[a].div_euclid(ROOT_SIZE) - 1).clamp(0, self.n[a] as i64 - 1) as usize;
            let r1 = hi[a].div_euclid(ROOT_SIZE).clamp(0, self.n[a] as i64 - 1) as usize;
            range[a] = (r0, r1);
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    stack.push(self.roots[i + self.n[0] * (j + self.n[1] * k)]);
                }
            }
        }
        while let Some(e) = stack.pop() {
            let el = &self.elements[e];
            let meets = (0..self.dim).all(|a| el.lo[a] <= hi[a] && el.lo[a] + el.size >= lo[a]);
            if !meets {
                continue;
            }
            match &el.children {
                Some(c) => stack.extend(c.iter().copied()),
                None => out.push(e),
            }
        }
        out.sort_unstable();
        out
    }

    pub fn leaves_containing(&self, key: VertexKey) -> Vec<usize> {
        self.leaves_touching(key, key)
    }

    pub fn is_corner(&self, e: usize, key: &VertexKey) -> bool {
        let el = &self.elements[e];
        (0..self.dim).all(|a| key[a] == el.lo[a] || key[a] == el.lo[a] + el.size)
    }

    /// A vertex is a basis vertex when it is a corner of every leaf containing it.
    pub fn is_basis_vertex(&self, key: VertexKey) -> bool {
        let leaves = self.leaves_containing(key);
        !leaves.is_empty() && leaves.iter().all(|&e| self.is_corner(e, &key))
    }

    /// Leaf containing parametric point `u`, and the local coordinates in `[0, 1]^d`.
    pub fn locate(&self, u: Vec3) -> Result<(usize, Vec3)> {
        let (lo, hi) = self.domain();
        let mut x = [0.0; 3];
        let mut root = [0usize; 3];
        for a in 0..self.dim {
            let tol = 1e-12 * (hi[a] - lo[a]);
            if !(u[a] >= lo[a] - tol && u[a] <= hi[a] + tol) {
                return Err(Error::OutsideDomain(u));
            }
            x[a] = ((u[a] - self.origin[a]) / self.cell[a]).clamp(0.0, self.n[a] as f64);
            root[a] = (x[a].floor() as usize).min(self.n[a] - 1);
        }
        let mut e = self.roots[root[0] + self.n[0] * (root[1] + self.n[1] * root[2])];
        let scale = ROOT_SIZE as f64;
        while let Some(children) = &self.elements[e].children {
            let el = &self.elements[e];
            let half = el.size / 2;
            let mut bits = 0;
            for a in 0..self.dim {
                if x[a] * scale >= (el.lo[a] + half) as f64 {
                    bits |= 1 << a;
                }
            }
            e = children[bits];
        }
        let el = &self.elements[e];
        let mut t = [0.0; 3];
        for a in 0..self.dim {
            t[a] = ((x[a] * scale - el.lo[a] as f64) / el.size as f64).clamp(0.0, 1.0);
        }
        Ok((e, t))
    }

    /// Values of all basis functions nonzero at `u`, as `(function, value)`.
    pub fn basis_values(&self, u: Vec3) -> Result<Vec<(usize, f64)>> {
        let (e, t) = self.locate(u)?;
        let w = bernstein::tensor_weights(self.dim, t, [0; 3]);
        Ok(self.elements[e]
            .tables
            .iter()
            .map(|(&f, tab)| (f, tab.iter().zip(&w).map(|(a, b)| a * b).sum()))
            .collect())
    }

    /// Nearest vertex along axis `a` in direction `dir` (±1) from a corner
    /// vertex, following the shortest leaf edge.
    pub fn edge_neighbor(&self, key: VertexKey, a: usize, dir: i64) -> Option<VertexKey> {
        let mut best: Option<i64> = None;
        for e in self.leaves_containing(key) {
            if !self.is_corner(e, &key) {
                continue;
            }
            let el = &self.elements[e];
            let towards = if dir > 0 { el.lo[a] == key[a] } else { el.lo[a] + el.size == key[a] };
            if towards {
                best = Some(best.map_or(el.size, |b| b.min(el.size)));
            }
        }
        best.map(|s| {
            let mut n = key;
            n[a] += dir * s;
            n
        })
    }

    /// Parametric gaps per axis around a vertex: the largest adjacent leaf
    /// extent on each side, zero on the domain boundary.
    pub(crate) fn vertex_gaps(&self, key: VertexKey) -> [[f64; 2]; 3] {
        let mut gaps = [[0.0; 2]; 3];
        for e in self.leaves_containing(key) {
            let el = &self.elements[e];
            let h = self.element_size(e);
            for a in 0..self.dim {
                let side = if el.lo[a] < key[a] { 0 } else { 1 };
                gaps[a][side] = f64::max(gaps[a][side], h[a]);
            }
        }
        gaps
    }

    /// Create the `2^d` functions of a new basis vertex, with control points
    /// reproducing `info`. Tables are filled in by the caller.
    pub(crate) fn add_vertex_functions(&mut self, key: VertexKey, info: &GeometricInfo) -> Vec<usize> {
        let d = self.dim;
        let gaps = self.vertex_gaps(key);
        let controls = solve_control_points(info, &gaps);
        let factors: Vec<[[f64; 2]; 2]> = (0..d).map(|a| hermite_factor(gaps[a][0], gaps[a][1])).collect();
        let mut ids = Vec::with_capacity(1 << d);
        for (corner, control) in controls.into_iter().enumerate() {
            let hermite = (0..1usize << d)
                .map(|m| (0..d).map(|a| factors[a][m >> a & 1][corner >> a & 1]).product())
                .collect();
            ids.push(self.functions.len());
            self.functions.push(BasisFunction {
                anchor: key,
                corner,
                gaps,
                hermite,
                control,
                support: BTreeSet::new(),
            });
        }
        self.vertex_fns.insert(key, ids.clone());
        ids
    }

    pub(crate) fn set_table(&mut self, f: usize, e: usize, table: Option<Vec<f64>>) {
        match table {
            Some(t) => {
                self.elements[e].tables.insert(f, t);
                self.functions[f].support.insert(e);
            }
            None => {
                self.elements[e].tables.remove(&f);
                self.functions[f].support.remove(&e);
            }
        }
    }
}

/// Ordinates of a corner block from Hermite data. `upper` bit `a` marks the
/// corner at the upper end of axis `a`; `h` holds the element's parametric
/// edge lengths. Returns `(table index, ordinate)` pairs.
pub(crate) fn corner_block(dim: usize, data: &[f64], upper: usize, h: Vec3) -> Vec<(usize, f64)> {
    let n = 1usize << dim;
    let mut out = Vec::with_capacity(n);
    for o in 0..n {
        let mut v = 0.0;
        for m in 0..n {
            if m & !o != 0 {
                continue;
            }
            let mut w = data[m];
            for a in 0..dim {
                if m >> a & 1 == 1 {
                    let s = if upper >> a & 1 == 1 { -1.0 } else { 1.0 };
                    w *= s * h[a] / 3.0;
                }
            }
            v += w;
        }
        let mut idx = [0usize; 3];
        for a in 0..dim {
            let step = o >> a & 1;
            idx[a] = if upper >> a & 1 == 1 { 3 - step } else { step };
        }
        out.push((bernstein::index(idx), v));
    }
    out
}

/// Hermite data (binary derivative order, parametric units) of a table at
/// local point `t` of an element with edge lengths `h`.
pub(crate) fn hermite_at(dim: usize, table: &[f64], t: Vec3, h: Vec3) -> Vec<f64> {
    (0..1usize << dim)
        .map(|m| {
            let mut order = [0usize; 3];
            let mut scale = 1.0;
            for a in 0..dim {
                if m >> a & 1 == 1 {
                    order[a] = 1;
                    scale /= h[a];
                }
            }
            let w = bernstein::tensor_weights(dim, t, order);
            scale * w.iter().zip(table).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}
