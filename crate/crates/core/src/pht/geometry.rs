use super::{PhtMesh, VertexKey};
use crate::bernstein;
use crate::error::{Error, Result};
use crate::geom::{axpy, det, norm, Vec3, ZERO};

/// Value and derivatives of the geometry map at a vertex.
///
/// Entries are stored in binary order: bit `a` of the index marks a
/// derivative along axis `a` (so in 3D: F, F_u, F_v, F_uv, F_w, F_uw, F_vw,
/// F_uvw).
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricInfo {
    pub dim: usize,
    pub data: Vec<Vec3>,
}

impl GeometricInfo {
    pub fn new(dim: usize, data: Vec<Vec3>) -> Self {
        assert_eq!(data.len(), 1 << dim);
        Self { dim, data }
    }

    /// Information of the identity map at `p`.
    pub fn identity(dim: usize, p: Vec3) -> Self {
        let mut data = vec![ZERO; 1 << dim];
        data[0] = p;
        for a in 0..dim {
            data[1 << a][a] = 1.0;
        }
        Self { dim, data }
    }

    pub fn value(&self) -> Vec3 {
        self.data[0]
    }

    /// First derivative along axis `a`.
    pub fn first(&self, a: usize) -> Vec3 {
        self.data[1 << a]
    }

    /// Entries ordered as value, first derivatives, pairwise mixed, then triple.
    pub fn canonical(&self) -> Vec<Vec3> {
        let order: &[usize] = match self.dim {
            1 => &[0, 1],
            2 => &[0, 1, 2, 3],
            _ => &[0, 1, 2, 4, 3, 5, 6, 7],
        };
        order.iter().map(|&i| self.data[i]).collect()
    }
}

/// Control points of the `2^d` functions at a vertex whose Hermite data
/// reproduce `info`. `gaps[a]` are the parametric knot gaps below and above
/// the vertex along axis `a`. Result is indexed by function corner bits.
pub fn solve_control_points(info: &GeometricInfo, gaps: &[[f64; 2]; 3]) -> Vec<Vec3> {
    let d = info.dim;
    let mut p = info.data.clone();
    for a in 0..d {
        let [h1, h2] = gaps[a];
        assert!(h1 + h2 > 0.0, "degenerate knot gaps");
        for idx in 0..1usize << d {
            if idx >> a & 1 == 1 {
                continue;
            }
            let (f, df) = (p[idx], p[idx | 1 << a]);
            p[idx] = axpy(f, -h1 / 3.0, df);
            p[idx | 1 << a] = axpy(f, h2 / 3.0, df);
        }
    }
    p
}

impl PhtMesh {
    /// Geometric information of the current map at a lattice vertex.
    pub fn geometric_info(&self, key: VertexKey) -> Result<GeometricInfo> {
        let e = *self
            .leaves_containing(key)
            .first()
            .ok_or_else(|| Error::OutsideDomain(self.param(key)))?;
        let el = &self.elements[e];
        let mut t = [0.0; 3];
        for a in 0..self.dim {
            t[a] = (key[a] - el.lo[a]) as f64 / el.size as f64;
        }
        let net = self.element_net(e);
        let h = self.element_size(e);
        let data = (0..1usize << self.dim)
            .map(|m| {
                let mut order = [0; 3];
                let mut s = 1.0;
                for a in 0..self.dim {
                    if m >> a & 1 == 1 {
                        order[a] = 1;
                        s /= h[a];
                    }
                }
                let w = bernstein::tensor_weights(self.dim, t, order);
                let mut v = ZERO;
                for (wi, c) in w.iter().zip(&net) {
                    v = axpy(v, s * wi, *c);
                }
                v
            })
            .collect();
        Ok(GeometricInfo::new(self.dim, data))
    }

    /// Bézier control net of a leaf: the sum of ordinate tables weighted by
    /// control points.
    pub fn element_net(&self, e: usize) -> Vec<Vec3> {
        let mut net = vec![ZERO; bernstein::table_len(self.dim)];
        for (&f, tab) in &self.elements[e].tables {
            let p = self.functions[f].control;
            for (n, &w) in net.iter_mut().zip(tab) {
                if w != 0.0 {
                    *n = axpy(*n, w, p);
                }
            }
        }
        net
    }

    /// Nets of all active leaves.
    pub fn bezier_extraction(&self) -> Vec<(usize, Vec<Vec3>)> {
        self.active_leaves().map(|e| (e, self.element_net(e))).collect()
    }

    /// Point and parametric Jacobian columns at local coordinates of a leaf.
    pub fn eval_element(&self, e: usize, net: &[Vec3], t: Vec3) -> (Vec3, [Vec3; 3]) {
        let h = self.element_size(e);
        eval_net(self.dim, net, t, h)
    }

    /// Physical point and Jacobian columns (`∂F/∂u_a`) at parametric point `u`.
    pub fn evaluate(&self, u: Vec3) -> Result<(Vec3, [Vec3; 3])> {
        let (e, t) = self.locate(u)?;
        let net = self.element_net(e);
        Ok(self.eval_element(e, &net, t))
    }

    pub fn map_point(&self, u: Vec3) -> Result<Vec3> {
        self.evaluate(u).map(|r| r.0)
    }

    /// Minimum of `det J / Π |J_a|` over the closed grid `i / (s - 1)` of
    /// `s^d` points, element boundary included.
    pub fn scaled_jacobian(&self, e: usize, samples: usize) -> f64 {
        let net = self.element_net(e);
        let mut min = f64::INFINITY;
        for_each_node(self.dim, samples.max(2), |t| {
            let (_, j) = self.eval_element(e, &net, t);
            min = min.min(scaled_det(self.dim, &j));
        });
        min
    }

    /// Minimum scaled Jacobian over the active leaves.
    pub fn min_scaled_jacobian(&self, samples: usize) -> f64 {
        self.active_leaves().map(|e| self.scaled_jacobian(e, samples)).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluate a Bézier net and its Jacobian columns with respect to the
/// parametric coordinates of an element of size `h`.
pub(crate) fn eval_net(dim: usize, net: &[Vec3], t: Vec3, h: Vec3) -> (Vec3, [Vec3; 3]) {
    let b: Vec<[f64; 4]> = (0..3).map(|a| if a < dim { bernstein::values(t[a]) } else { [1.0, 0.0, 0.0, 0.0] }).collect();
    let db: Vec<[f64; 4]> = (0..3).map(|a| if a < dim { bernstein::first(t[a]) } else { [0.0; 4] }).collect();
    let mut x = ZERO;
    let mut j = [ZERO; 3];
    for (idx, c) in net.iter().enumerate() {
        let m = bernstein::multi(idx);
        let v = [b[0][m[0]], b[1][m[1]], b[2][m[2]]];
        x = axpy(x, v[0] * v[1] * v[2], *c);
        for a in 0..dim {
            let mut w = db[a][m[a]] / h[a];
            for o in 0..3 {
                if o != a {
                    w *= v[o];
                }
            }
            j[a] = axpy(j[a], w, *c);
        }
    }
    (x, j)
}

pub(crate) fn scaled_det(dim: usize, j: &[Vec3; 3]) -> f64 {
    let denom: f64 = j[..dim].iter().map(|c| norm(*c)).product();
    if denom <= 0.0 {
        return 0.0;
    }
    (det(j, dim) / denom).clamp(-1.0, 1.0)
}

fn for_each_node(dim: usize, s: usize, mut f: impl FnMut(Vec3)) {
    let n = |a: usize| if a < dim { s } else { 1 };
    for k in 0..n(2) {
        for j in 0..n(1) {
            for i in 0..n(0) {
                let m = [i, j, k];
                let mut t = [0.0; 3];
                for a in 0..dim {
                    t[a] = m[a] as f64 / (s - 1) as f64;
                }
                f(t);
            }
        }
    }
}

/// Visit cell-centred sample points `(i + 1/2) / s` of the unit box.
pub(crate) fn for_each_sample(dim: usize, s: usize, mut f: impl FnMut(Vec3)) {
    let n = |a: usize| if a < dim { s } else { 1 };
    for k in 0..n(2) {
        for j in 0..n(1) {
            for i in 0..n(0) {
                let m = [i, j, k];
                let mut t = [0.0; 3];
                for a in 0..dim {
                    t[a] = (m[a] as f64 + 0.5) / s as f64;
                }
                f(t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_gaps_factor() {
        let h = 0.25;
        let info = GeometricInfo::new(1, vec![[0.5, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let p = solve_control_points(&info, &[[h, h], [0.0; 2], [0.0; 2]]);
        // U = [[1/2, 1/2], [-3/(2h), 3/(2h)]] applied to P gives back the data
        let f = 0.5 * p[0][0] + 0.5 * p[1][0];
        let df = (p[1][0] - p[0][0]) * 3.0 / (2.0 * h);
        assert!((f - 0.5).abs() < 1e-15 && (df - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_info_gives_greville_points() {
        let info = GeometricInfo::identity(2, [0.5, 0.5, 0.0]);
        let p = solve_control_points(&info, &[[0.25, 0.25], [0.25, 0.25], [0.0; 2]]);
        let h3 = 0.25 / 3.0;
        assert!(crate::geom::dist(p[0], [0.5 - h3, 0.5 - h3, 0.0]) < 1e-15);
        assert!(crate::geom::dist(p[3], [0.5 + h3, 0.5 + h3, 0.0]) < 1e-15);
    }

    #[test]
    fn canonical_order_3d() {
        let data: Vec<Vec3> = (0..8).map(|i| [i as f64, 0.0, 0.0]).collect();
        let info = GeometricInfo::new(3, data);
        let c: Vec<f64> = info.canonical().iter().map(|v| v[0]).collect();
        assert_eq!(c, vec![0.0, 1.0, 2.0, 4.0, 3.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn identity_mesh_evaluates_to_identity() {
        let m = PhtMesh::tensor(2, &[4, 3], &[0.0, -1.0], &[2.0, 1.0]).unwrap();
        for &u in &[[0.3, 0.2, 0.0], [1.99, -0.99, 0.0], [1.0, 0.0, 0.0]] {
            let (x, j) = m.evaluate(u).unwrap();
            assert!(crate::geom::dist(x, u) < 1e-12);
            assert!((j[0][0] - 1.0).abs() < 1e-12 && j[0][1].abs() < 1e-12);
            assert!((j[1][1] - 1.0).abs() < 1e-12 && j[1][0].abs() < 1e-12);
        }
        for e in m.leaves() {
            assert!((m.scaled_jacobian(e, 3) - 1.0).abs() < 1e-12);
        }
    }
}
