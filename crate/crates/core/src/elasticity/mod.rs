//! Isogeometric linear elasticity on the active leaves of a PHT mesh.
//!
//! Every active basis function carries `d` displacement coefficients,
//! numbered `index * d + component`. Element integrals use a `4^d` Gauss
//! rule on the Bézier pieces; inactive leaves are never visited.

mod exact;
mod study;

use std::collections::BTreeMap;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::bernstein;
use crate::error::{Error, Result};
use crate::geom::{det, inverse, Mat3, Vec3, ZERO};
use crate::pht::PhtMesh;
use crate::sparse::{Cholesky, SymMatrix};

pub use exact::{exact_plate_stress, exact_sphere_stress, Benchmark};
pub use study::{convergence_csv, run_benchmark, stress_vtk, study, BenchmarkRun, Refinement, StudyConfig, StudyRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PlaneStress,
    PlaneStrain,
    Solid,
}

impl Regime {
    pub fn dim(self) -> usize {
        match self {
            Regime::Solid => 3,
            _ => 2,
        }
    }
}

/// Isotropic linear material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub regime: Regime,
}

impl Material {
    pub fn new(young: f64, poisson: f64, regime: Regime) -> Result<Self> {
        if !(young > 0.0 && young.is_finite()) {
            return Err(Error::InvalidArgument(format!("Young's modulus must be positive, got {young}")));
        }
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(Error::InvalidArgument(format!("Poisson's ratio must lie in (-1, 0.5), got {poisson}")));
        }
        Ok(Self { young, poisson, regime })
    }

    /// Effective Lamé parameters `(λ, μ)` for the regime.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young, self.poisson);
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = match self.regime {
            Regime::PlaneStress => e * nu / (1.0 - nu * nu),
            _ => e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        };
        (lambda, mu)
    }

    /// Stress from the displacement gradient `g[i][j] = ∂u_i/∂x_j`.
    pub fn stress(&self, g: &Mat3) -> Mat3 {
        let d = self.regime.dim();
        let (lambda, mu) = self.lame();
        let tr: f64 = (0..d).map(|i| g[i][i]).sum();
        let mut s = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                s[i][j] = mu * (g[i][j] + g[j][i]);
            }
            s[i][i] += lambda * tr;
        }
        s
    }

    /// `σ : C⁻¹ : σ` over the in-plane components.
    pub fn energy_density(&self, s: &Mat3) -> f64 {
        let d = self.regime.dim();
        let (lambda, mu) = self.lame();
        let tr: f64 = (0..d).map(|i| s[i][i]).sum();
        let k = lambda / (d as f64 * lambda + 2.0 * mu);
        let mut out = 0.0;
        for i in 0..d {
            for j in 0..d {
                let eps = (s[i][j] - if i == j { k * tr } else { 0.0 }) / (2.0 * mu);
                out += s[i][j] * eps;
            }
        }
        out
    }
}

/// Gauss-Legendre rule with four points on `[0, 1]`.
pub fn gauss4() -> ([f64; 4], [f64; 4]) {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
    let x = [-b, -a, a, b].map(|v| 0.5 * (v + 1.0));
    let w = [wb, wa, wa, wb].map(|v| 0.5 * v);
    (x, w)
}

/// Tensor Gauss points `(t, weight)` of a unit element.
fn gauss_points(dim: usize) -> Vec<(Vec3, f64)> {
    let (x, w) = gauss4();
    let n = |a: usize| if a < dim { 4 } else { 1 };
    let mut out = Vec::new();
    for k in 0..n(2) {
        for j in 0..n(1) {
            for i in 0..n(0) {
                let idx = [i, j, k];
                let mut t = [0.0; 3];
                let mut wt = 1.0;
                for a in 0..dim {
                    t[a] = x[idx[a]];
                    wt *= w[idx[a]];
                }
                out.push((t, wt));
            }
        }
    }
    out
}

/// Basis values and physical gradients at one point of a leaf.
#[derive(Clone, Debug)]
pub struct PointEval {
    pub x: Vec3,
    /// Jacobian determinant with respect to the local coordinates `t`.
    pub det: f64,
    /// Jacobian columns `∂x/∂t_a`.
    pub jac: [Vec3; 3],
    pub functions: Vec<usize>,
    pub values: Vec<f64>,
    pub grads: Vec<Vec3>,
}

/// Evaluate the basis of leaf `e` at local coordinates `t`.
pub fn eval_point(mesh: &PhtMesh, e: usize, net: &[Vec3], t: Vec3) -> Result<PointEval> {
    let d = mesh.dim();
    let w0 = bernstein::tensor_weights(d, t, [0; 3]);
    let wd: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let mut o = [0; 3];
            o[a] = 1;
            bernstein::tensor_weights(d, t, o)
        })
        .collect();
    let mut x = ZERO;
    let mut jac = [ZERO; 3];
    for (k, c) in net.iter().enumerate() {
        for i in 0..d {
            x[i] += w0[k] * c[i];
            for a in 0..d {
                jac[a][i] += wd[a][k] * c[i];
            }
        }
    }
    let dj = det(&jac, d);
    if !(dj > 0.0) {
        return Err(Error::InvertedElement { element: e, det: dj });
    }
    let inv = inverse(&jac, d).ok_or(Error::InvertedElement { element: e, det: dj })?;
    let el = mesh.element(e);
    let mut functions = Vec::with_capacity(el.tables.len());
    let mut values = Vec::with_capacity(el.tables.len());
    let mut grads = Vec::with_capacity(el.tables.len());
    for (f, tab) in el.tables() {
        let v: f64 = tab.iter().zip(&w0).map(|(a, b)| a * b).sum();
        let mut dt = [0.0; 3];
        for a in 0..d {
            dt[a] = tab.iter().zip(&wd[a]).map(|(p, q)| p * q).sum();
        }
        let mut g = [0.0; 3];
        for i in 0..d {
            g[i] = (0..d).map(|a| inv[a][i] * dt[a]).sum();
        }
        functions.push(f);
        values.push(v);
        grads.push(g);
    }
    Ok(PointEval { x, det: dj, jac, functions, values, grads })
}

/// Assembled stiffness and load over the active functions.
#[derive(Clone, Debug)]
pub struct System {
    pub dim: usize,
    pub material: Material,
    /// Active function of each coefficient slot.
    pub functions: Vec<usize>,
    /// Slot of each mesh function, `usize::MAX` when inactive.
    pub slot: Vec<usize>,
    pub stiffness: SymMatrix,
    pub load: Vec<f64>,
    /// Leaves integrated during assembly.
    pub elements_integrated: usize,
}

impl System {
    pub fn num_dofs(&self) -> usize {
        self.functions.len() * self.dim
    }

    pub fn dof(&self, f: usize, component: usize) -> Option<usize> {
        let s = *self.slot.get(f)?;
        (s != usize::MAX).then_some(s * self.dim + component)
    }

    /// Add `∫ N_f σ n dA` over the domain face where `u_axis` is extreme,
    /// restricted to active leaves. The area element and normal follow from
    /// the geometry: `n dA = det J · J⁻ᵀ N₀ dA₀`.
    pub fn add_traction(&mut self, mesh: &PhtMesh, axis: usize, upper: bool, stress: &dyn Fn(Vec3) -> Mat3) -> Result<()> {
        let d = self.dim;
        let (x, w) = gauss4();
        let n = |a: usize| if a < d && a != axis { 4 } else { 1 };
        let fixed_t = if upper { 1.0 } else { 0.0 };
        let outward = if upper { 1.0 } else { -1.0 };
        for e in face_leaves(mesh, axis, upper) {
            let net = mesh.element_net(e);
            for k in 0..n(2) {
                for j in 0..n(1) {
                    for i in 0..n(0) {
                        let idx = [i, j, k];
                        let mut t = [0.0; 3];
                        let mut wt = 1.0;
                        for a in 0..d {
                            if a == axis {
                                t[a] = fixed_t;
                            } else {
                                t[a] = x[idx[a]];
                                wt *= w[idx[a]];
                            }
                        }
                        let p = eval_point(mesh, e, &net, t)?;
                        let inv = inverse(&p.jac, d).expect("checked by eval_point");
                        // n dA = det J · (row `axis` of J⁻¹) dA₀
                        let mut nda = [0.0; 3];
                        for c in 0..d {
                            nda[c] = outward * p.det * inv[axis][c] * wt;
                        }
                        let s = stress(p.x);
                        let mut tr = [0.0; 3];
                        for r in 0..d {
                            tr[r] = (0..d).map(|c| s[r][c] * nda[c]).sum();
                        }
                        for (&f, &v) in p.functions.iter().zip(&p.values) {
                            for r in 0..d {
                                if let Some(dof) = self.dof(f, r) {
                                    self.load[dof] += v * tr[r];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Coefficient slots of the active functions whose trace on the domain
    /// face `u_axis = min` (or max) is not identically zero.
    pub fn face_functions(&self, mesh: &PhtMesh, axis: usize, upper: bool) -> Vec<usize> {
        let layer = if upper { 3 } else { 0 };
        let mut out: Vec<usize> = Vec::new();
        for e in face_leaves(mesh, axis, upper) {
            for (f, tab) in mesh.element(e).tables() {
                if self.slot[f] == usize::MAX {
                    continue;
                }
                let touches = tab.iter().enumerate().any(|(k, &v)| v != 0.0 && bernstein::multi(k)[axis] == layer);
                if touches {
                    out.push(f);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Fix component `a` on every lower domain face `u_a = min` for each
    /// `a` in `axes`, which imposes symmetry planes aligned with the
    /// parametric faces.
    pub fn symmetry_constraints(&self, mesh: &PhtMesh, axes: &[usize]) -> BTreeMap<usize, f64> {
        let mut fixed = BTreeMap::new();
        for &a in axes {
            for f in self.face_functions(mesh, a, false) {
                fixed.insert(self.dof(f, a).unwrap(), 0.0);
            }
        }
        fixed
    }

    /// Solve with the given coefficient values held fixed.
    pub fn solve(&self, mesh: &PhtMesh, fixed: &BTreeMap<usize, f64>) -> Result<Solution> {
        let n = self.num_dofs();
        let mut reduced = vec![usize::MAX; n];
        let mut free = Vec::new();
        for i in 0..n {
            if !fixed.contains_key(&i) {
                reduced[i] = free.len();
                free.push(i);
            }
        }
        let mut u = vec![0.0; n];
        for (&i, &v) in fixed {
            u[i] = v;
        }
        // rhs = F - K_fc u_c
        let ku = self.stiffness.mul(&u);
        let rhs: Vec<f64> = free.iter().map(|&i| self.load[i] - ku[i]).collect();
        let mut t = Vec::with_capacity(self.stiffness.nnz());
        for c in 0..n {
            if reduced[c] == usize::MAX {
                continue;
            }
            for (r, v) in self.stiffness.column(c) {
                if reduced[r] != usize::MAX {
                    t.push((reduced[r], reduced[c], v));
                }
            }
        }
        let k = SymMatrix::from_triplets(free.len(), &t);
        let mut by_vertex: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for (r, &i) in free.iter().enumerate() {
            by_vertex.entry(mesh.function(self.functions[i / self.dim]).anchor).or_default().push(r);
        }
        let groups: Vec<Vec<usize>> = by_vertex.into_values().collect();
        let chol = Cholesky::factor_grouped(&k, &groups)?;
        let x = chol.solve(&rhs);
        let kx = k.mul(&x);
        let rn: f64 = kx.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residual = if bn > 0.0 { rn / bn } else { rn };
        debug!("solved {} unknowns, factor nnz {}, residual {residual:.2e}", free.len(), chol.nnz());
        for (r, &i) in free.iter().enumerate() {
            u[i] = x[r];
        }
        let mut coeffs = vec![ZERO; mesh.num_functions()];
        for (s, &f) in self.functions.iter().enumerate() {
            for c in 0..self.dim {
                coeffs[f][c] = u[s * self.dim + c];
            }
        }
        Ok(Solution { coeffs, free: free.len(), residual })
    }
}

/// Active leaves with a face on the domain face `u_axis = min` (or max).
fn face_leaves(mesh: &PhtMesh, axis: usize, upper: bool) -> Vec<usize> {
    let hi = mesh.root_counts()[axis] as i64 * crate::pht::ROOT_SIZE;
    mesh.active_leaves()
        .filter(|&e| {
            let el = mesh.element(e);
            if upper {
                el.lo[axis] + el.size == hi
            } else {
                el.lo[axis] == 0
            }
        })
        .collect()
}

/// Functions with a nonzero ordinate on some active leaf, in index order.
pub fn active_functions(mesh: &PhtMesh) -> Vec<usize> {
    let mut used = vec![false; mesh.num_functions()];
    for e in mesh.active_leaves() {
        for (f, tab) in mesh.element(e).tables() {
            if tab.iter().any(|&v| v != 0.0) {
                used[f] = true;
            }
        }
    }
    (0..used.len()).filter(|&f| used[f]).collect()
}

/// Stiffness over the active leaves. Fails on the first quadrature point
/// with a non-positive Jacobian.
pub fn assemble(mesh: &PhtMesh, material: Material) -> Result<System> {
    let d = mesh.dim();
    if material.regime.dim() != d {
        return Err(Error::InvalidArgument(format!("{:?} material on a {d}D mesh", material.regime)));
    }
    let functions = active_functions(mesh);
    let mut slot = vec![usize::MAX; mesh.num_functions()];
    for (s, &f) in functions.iter().enumerate() {
        slot[f] = s;
    }
    let leaves: Vec<usize> = mesh.active_leaves().collect();
    let local = |e: usize| -> Vec<usize> {
        let mut v: Vec<usize> = mesh.element(e).tables().map(|(f, _)| slot[f]).filter(|&s| s != usize::MAX).collect();
        v.sort_unstable();
        v
    };
    // function-level pattern, expanded to components
    let mut fcols: Vec<Vec<usize>> = vec![Vec::new(); functions.len()];
    for &e in &leaves {
        let l = local(e);
        for (j, &c) in l.iter().enumerate() {
            fcols[c].extend_from_slice(&l[..=j]);
        }
    }
    let mut cols = Vec::with_capacity(functions.len() * d);
    for (c, mut rows) in fcols.into_iter().enumerate() {
        rows.sort_unstable();
        rows.dedup();
        for j in 0..d {
            let mut col = Vec::with_capacity(rows.len() * d);
            for &r in &rows {
                for i in 0..d {
                    if r < c || i <= j {
                        col.push(r * d + i);
                    }
                }
            }
            cols.push(col);
        }
    }
    let mut k = SymMatrix::from_pattern(cols);
    let (lambda, mu) = material.lame();
    let points = gauss_points(d);
    for &e in &leaves {
        let net = mesh.element_net(e);
        let idx: Vec<usize> = mesh.element(e).tables().map(|(f, _)| slot[f]).collect();
        let nl = idx.len();
        // local blocks by position in the element's function list
        let mut block = vec![[[0.0; 3]; 3]; nl * nl];
        for &(t, w) in &points {
            let p = eval_point(mesh, e, &net, t)?;
            let scale = w * p.det;
            for a in 0..nl {
                if idx[a] == usize::MAX {
                    continue;
                }
                let ga = p.grads[a];
                for b in 0..nl {
                    if idx[b] == usize::MAX || idx[b] < idx[a] {
                        continue;
                    }
                    let gb = p.grads[b];
                    let dotg: f64 = (0..d).map(|i| ga[i] * gb[i]).sum();
                    let m = &mut block[a * nl + b];
                    for i in 0..d {
                        for j in 0..d {
                            let mut v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
                            if i == j {
                                v += mu * dotg;
                            }
                            m[i][j] += scale * v;
                        }
                    }
                }
            }
        }
        for a in 0..nl {
            for b in 0..nl {
                let (sa, sb) = (idx[a], idx[b]);
                if sa == usize::MAX || sb == usize::MAX || sb < sa {
                    continue;
                }
                let m = &block[a * nl + b];
                for i in 0..d {
                    for j in 0..d {
                        if sa == sb && i > j {
                            continue;
                        }
                        k.add(sa * d + i, sb * d + j, m[i][j]);
                    }
                }
            }
        }
    }
    debug!("assembled {} leaves, {} unknowns, nnz {}", leaves.len(), functions.len() * d, k.nnz());
    Ok(System {
        dim: d,
        material,
        load: vec![0.0; functions.len() * d],
        functions,
        slot,
        stiffness: k,
        elements_integrated: leaves.len(),
    })
}

/// Displacement coefficients per mesh function (zero for inactive ones).
#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: Vec<Vec3>,
    pub free: usize,
    /// Relative residual of the reduced system.
    pub residual: f64,
}

impl Solution {
    /// Interpolant coefficients of a field given at the control points;
    /// exact for fields linear in the physical coordinates.
    pub fn from_control_points(mesh: &PhtMesh, field: impl Fn(Vec3) -> Vec3) -> Self {
        let coeffs = (0..mesh.num_functions()).map(|f| field(mesh.control(f))).collect();
        Self { coeffs, free: 0, residual: 0.0 }
    }

    /// Point, displacement and displacement gradient at local coordinates of a leaf.
    pub fn gradient(&self, mesh: &PhtMesh, e: usize, net: &[Vec3], t: Vec3) -> Result<(Vec3, Vec3, Mat3)> {
        let p = eval_point(mesh, e, net, t)?;
        let mut u = ZERO;
        let mut g = [[0.0; 3]; 3];
        for ((&f, &v), gr) in p.functions.iter().zip(&p.values).zip(&p.grads) {
            let c = self.coeffs[f];
            for i in 0..3 {
                u[i] += v * c[i];
                for j in 0..3 {
                    g[i][j] += c[i] * gr[j];
                }
            }
        }
        Ok((p.x, u, g))
    }

    /// Point and stress at local coordinates of a leaf.
    pub fn stress(&self, mesh: &PhtMesh, material: &Material, e: usize, net: &[Vec3], t: Vec3) -> Result<(Vec3, Mat3)> {
        let (x, _, g) = self.gradient(mesh, e, net, t)?;
        Ok((x, material.stress(&g)))
    }
}

/// `√∫ (σ_h − σ) : C⁻¹ : (σ_h − σ)` over the active leaves.
pub fn energy_norm_error(mesh: &PhtMesh, sol: &Solution, exact: &dyn Fn(Vec3) -> Mat3, material: &Material) -> Result<f64> {
    let points = gauss_points(mesh.dim());
    let mut sum = 0.0;
    for e in mesh.active_leaves() {
        let net = mesh.element_net(e);
        for &(t, w) in &points {
            let (x, _, g) = sol.gradient(mesh, e, &net, t)?;
            let det_j = eval_point(mesh, e, &net, t)?.det;
            let sh = material.stress(&g);
            let se = exact(x);
            let mut diff = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    diff[i][j] = sh[i][j] - se[i][j];
                }
            }
            sum += w * det_j * material.energy_density(&diff);
        }
    }
    Ok(sum.max(0.0).sqrt())
}
