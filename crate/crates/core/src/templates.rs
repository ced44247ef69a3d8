//! Unit circle and unit sphere templates.
//!
//! A template is a `4^d` PHT mesh on `[-2, 2]^d`. Vertices on the outer
//! ring and the centre carry the identity map; vertices with max-norm 1 are
//! pushed onto the unit circle/sphere so the outer edges (faces) of the
//! central elements approximate it.

use crate::error::{Error, Result};
use crate::geom::{axpy, dot, norm, normalize, scale, sub, Mat3, Vec3, ZERO};
use crate::pht::{solve_control_points, GeometricInfo, PhtMesh};

pub const DEFAULT_EPS_SEP: f64 = 0.01;

/// Tangent length of the standard cubic quarter-circle.
pub const QUARTER_CIRCLE_K: f64 = 4.0 * (std::f64::consts::SQRT_2 - 1.0) / 3.0;

/// Derivative magnitude of a cubic Hermite arc of angle `theta` and radius
/// `r` over a parameter interval of length `h`.
pub fn arc_speed(r: f64, theta: f64, h: f64) -> f64 {
    4.0 * r * (theta / 4.0).tan() / h
}

#[derive(Clone, Debug)]
pub struct Template {
    pub dim: usize,
    pub eps_sep: f64,
    pub mesh: PhtMesh,
    /// Central elements whose outer edges/faces approximate the unit circle/sphere.
    pub arc_elements: Vec<usize>,
}

impl Template {
    pub fn circle(eps_sep: f64) -> Result<Self> {
        Self::build(2, eps_sep)
    }

    pub fn sphere(eps_sep: f64) -> Result<Self> {
        Self::build(3, eps_sep)
    }

    fn build(dim: usize, eps_sep: f64) -> Result<Self> {
        if !(0.0..=0.05).contains(&eps_sep) {
            return Err(Error::InvalidArgument(format!("separation {eps_sep} outside [0, 0.05]")));
        }
        let mut mesh = PhtMesh::tensor(dim, &vec![4; dim], &vec![-2.0; dim], &vec![2.0; dim])?;
        let vertices: Vec<_> = mesh.basis_vertices().map(|(k, f)| (*k, f.to_vec())).collect();
        for (key, fns) in vertices {
            let p = mesh.param(key);
            let info = vertex_info(dim, p);
            let gaps = vertex_gaps(dim, p);
            let mut controls = solve_control_points(&info, &gaps);
            separate(dim, &mut controls, eps_sep);
            for (f, c) in fns.iter().zip(controls) {
                mesh.set_control(*f, c);
            }
        }
        let arc_elements = mesh
            .leaves()
            .filter(|&e| {
                let (lo, hi) = mesh.element_box(e);
                (0..dim).all(|a| lo[a] >= -1.0 && hi[a] <= 1.0)
            })
            .collect();
        Ok(Self { dim, eps_sep, mesh, arc_elements })
    }

    /// Parametric points on the outer edges/faces of the central elements,
    /// `n` per edge direction.
    pub fn arc_params(&self, n: usize) -> Vec<Vec3> {
        let mut out = Vec::new();
        for &e in &self.arc_elements {
            let (lo, hi) = self.mesh.element_box(e);
            for a in 0..self.dim {
                // the outer face along axis a sits where |u_a| = 1
                let fixed = if hi[a] >= 1.0 { hi[a] } else { lo[a] };
                let others: Vec<usize> = (0..self.dim).filter(|&b| b != a).collect();
                let m = if others.len() == 2 { n } else { 1 };
                for i in 0..n {
                    for j in 0..m {
                        let mut u = [0.0; 3];
                        u[a] = fixed;
                        let s = [i as f64 / (n - 1).max(1) as f64, j as f64 / (m.max(2) - 1) as f64];
                        for (k, &b) in others.iter().enumerate() {
                            u[b] = lo[b] + s[k] * (hi[b] - lo[b]);
                        }
                        out.push(u);
                    }
                }
            }
        }
        out
    }

    /// Largest deviation of sampled arc points from the unit circle/sphere.
    pub fn arc_error(&self, n: usize) -> f64 {
        self.arc_params(n)
            .into_iter()
            .map(|u| (norm(self.mesh.map_point(u).unwrap()) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Control points mapped by `x -> center + radius * R x`.
    pub fn instantiate(&self, center: Vec3, radius: f64, rotation: &Mat3) -> Result<Vec<Vec3>> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {radius}")));
        }
        check_orthogonal(rotation)?;
        Ok(self
            .mesh
            .functions()
            .iter()
            .map(|f| {
                let p = f.control;
                let rp = [dot(rotation[0], p), dot(rotation[1], p), dot(rotation[2], p)];
                axpy(center, radius, rp)
            })
            .collect())
    }

    /// A copy of the template mesh with instantiated control points.
    pub fn instantiate_mesh(&self, center: Vec3, radius: f64, rotation: &Mat3) -> Result<PhtMesh> {
        let controls = self.instantiate(center, radius, rotation)?;
        let mut m = self.mesh.clone();
        for (f, c) in controls.into_iter().enumerate() {
            m.set_control(f, c);
        }
        Ok(m)
    }
}

pub fn check_orthogonal(r: &Mat3) -> Result<()> {
    let mut err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let v: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            err = err.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if err < 1e-12 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rotation is not orthogonal (error {err:e})")))
    }
}

fn vertex_gaps(dim: usize, p: Vec3) -> [[f64; 2]; 3] {
    let mut g = [[0.0; 2]; 3];
    for a in 0..dim {
        g[a] = [if p[a] > -2.0 { 1.0 } else { 0.0 }, if p[a] < 2.0 { 1.0 } else { 0.0 }];
    }
    g
}

fn max_norm(dim: usize, p: Vec3) -> f64 {
    (0..dim).map(|a| p[a].abs()).fold(0.0, f64::max)
}

/// Hermite data of the template map at an integer vertex `p`.
fn vertex_info(dim: usize, p: Vec3) -> GeometricInfo {
    let mut info = GeometricInfo::identity(dim, p);
    if max_norm(dim, p) != 1.0 {
        return info;
    }
    let n = normalize(p).unwrap();
    info.data[0] = n;
    for a in 0..dim {
        info.data[1 << a] = if dim == 2 { circle_derivative(p, a) } else { sphere_derivative(p, a) };
    }
    if dim == 3 {
        for a in 0..3 {
            for b in a + 1..3 {
                info.data[1 << a | 1 << b] = sphere_twist(p, a, b);
            }
        }
    }
    info
}

/// Split quarter-circle cubic: axis vertices are the arc ends, diagonal
/// vertices the arc midpoints.
fn circle_derivative(p: Vec3, a: usize) -> Vec3 {
    let k = QUARTER_CIRCLE_K;
    let mut e = ZERO;
    e[a] = 1.0;
    if p[a] == 0.0 {
        // tangential at an arc end
        return scale(e, 1.5 * k);
    }
    if p[1 - a] == 0.0 {
        // transversal at an arc end
        return e;
    }
    // arc midpoint: C'(1/2) / 2 along the circle, oriented with increasing u_a
    let n = normalize(p).unwrap();
    let tau = normalize(sub(e, scale(n, dot(e, n)))).unwrap();
    scale(tau, 0.375 * (2.0 - k) * std::f64::consts::SQRT_2)
}

/// Equal-angle chart of the cube face `|u_c| = 1` onto the sphere:
/// `u -> normalize(v)` with `v_c = ±1` and `v_b = tan(π u_b / 4)`.
/// Returns `(v, dv_b/du_b)`.
fn face_chart(p: Vec3, c: usize) -> (Vec3, Vec3) {
    let q = std::f64::consts::FRAC_PI_4;
    let mut v = [0.0; 3];
    let mut dv = [0.0; 3];
    for b in 0..3 {
        if b == c {
            v[b] = p[b].signum();
        } else {
            let t = (q * p[b]).tan();
            v[b] = t;
            dv[b] = q * (1.0 + t * t);
        }
    }
    (v, dv)
}

/// Face through `p` containing direction `a` (and `b`, if given).
fn face_axis(p: Vec3, a: usize, b: Option<usize>) -> Option<usize> {
    (0..3).find(|&c| c != a && Some(c) != b && p[c].abs() == 1.0)
}

fn sphere_derivative(p: Vec3, a: usize) -> Vec3 {
    let Some(c) = face_axis(p, a, None) else {
        // transversal direction at a face centre
        let mut e = ZERO;
        e[a] = 1.0;
        return e;
    };
    let (v, dv) = face_chart(p, c);
    let r = norm(v);
    let mut d = scale(v, -v[a] / (r * r * r));
    d[a] += 1.0 / r;
    scale(d, dv[a])
}

fn sphere_twist(p: Vec3, a: usize, b: usize) -> Vec3 {
    let Some(c) = face_axis(p, a, Some(b)) else {
        return ZERO;
    };
    let (v, dv) = face_chart(p, c);
    let r = norm(v);
    let (r3, r5) = (r * r * r, r * r * r * r * r);
    let mut d = scale(v, 3.0 * v[a] * v[b] / r5);
    d[a] -= v[b] / r3;
    d[b] -= v[a] / r3;
    scale(d, dv[a] * dv[b])
}

/// Move coincident control points of one vertex apart along their
/// parametric diagonal directions.
pub fn separate(dim: usize, controls: &mut [Vec3], eps: f64) {
    if eps == 0.0 {
        return;
    }
    let orig = controls.to_vec();
    let scale_ref = orig.iter().map(|p| norm(*p)).fold(1.0, f64::max);
    for (i, p) in orig.iter().enumerate() {
        let repeated = orig.iter().enumerate().any(|(j, q)| j != i && norm(sub(*p, *q)) < 1e-12 * scale_ref);
        if !repeated {
            continue;
        }
        let mut s = ZERO;
        for (a, v) in s.iter_mut().enumerate().take(dim) {
            *v = if i >> a & 1 == 1 { 1.0 } else { -1.0 };
        }
        controls[i] = axpy(*p, eps / (dim as f64).sqrt(), s);
    }
}
