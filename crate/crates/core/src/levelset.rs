//! Smooth B-spline level-set field built from a voxel image.
//!
//! Coefficients are local weighted averages of the image,
//! `c_j = ∫ N_j g / ∫ N_j` over the image box, computed as one separable
//! filter pass per axis. Knots sit on voxel faces (image corner at the
//! origin), so every basis function whose support meets the image box gets
//! a coefficient: `M + p` of them along an axis with `M` voxels.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dot, norm, Vec3};
use crate::image_io::GrayImage;

/// Gradients at or below this norm (intensity per unit length) are treated
/// as degenerate by [`LevelSetField::normal`] and [`LevelSetField::curvature`].
pub const GRAD_EPS: f64 = 1e-8 * 255.0;

/// Cardinal B-spline of degree `p` with knots `0, 1, ..., p + 1`.
pub fn cardinal(p: usize, x: f64) -> f64 {
    if x < 0.0 || x >= (p + 1) as f64 {
        return 0.0;
    }
    if p == 0 {
        return 1.0;
    }
    let q = p as f64;
    (x * cardinal(p - 1, x) + (q + 1.0 - x) * cardinal(p - 1, x - 1.0)) / q
}

/// `k`-th derivative of [`cardinal`].
pub fn cardinal_derivative(p: usize, k: usize, x: f64) -> f64 {
    if k > p {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for i in 0..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * cardinal(p - k, x - i as f64);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    sum
}

/// Integrals of the cardinal B-spline of degree `p` over its `p + 1`
/// consecutive unit knot spans.
pub fn kernel_weights(p: usize) -> Vec<f64> {
    assert!(p >= 1, "degree must be at least 1");
    // ∫_i^{i+1} N_p = N_{p+1}(i + 1)
    (0..=p).map(|i| cardinal(p + 1, (i + 1) as f64)).collect()
}

/// Tensor-product B-spline field `f(X) = Σ_j N_j(X) c_j` over the image box.
#[derive(Clone, Debug)]
pub struct LevelSetField {
    dim: usize,
    degree: usize,
    voxels: [usize; 3],
    spacing: [f64; 3],
    dims: [usize; 3],
    coeff: Vec<f64>,
}

/// Value, gradient and Hessian at one point.
#[derive(Clone, Copy, Debug)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: [[f64; 3]; 3],
}

impl LevelSetField {
    /// Filter `img` into spline coefficients.
    pub fn from_image(img: &GrayImage, p: usize) -> Self {
        let values: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
        Self::from_values(img.dim(), img.dims(), img.spacing(), &values, p)
    }

    /// Same as [`from_image`](Self::from_image) for arbitrary real voxel values.
    pub fn from_values(dim: usize, voxels: [usize; 3], spacing: [f64; 3], values: &[f64], p: usize) -> Self {
        assert_eq!(values.len(), voxels.iter().product::<usize>());
        let weights = kernel_weights(p);
        let mut grid = values.to_vec();
        let mut dims = voxels;
        for axis in 0..dim {
            let (next, nd) = filter_axis(&grid, dims, axis, &weights);
            grid = next;
            dims = nd;
        }
        Self { dim, degree: p, voxels, spacing, dims, coeff: grid }
    }

    /// Field with caller-supplied coefficients on the grid implied by the image.
    pub fn with_coefficients(dim: usize, voxels: [usize; 3], spacing: [f64; 3], p: usize, coeff: Vec<f64>) -> Result<Self> {
        let mut dims = [1; 3];
        for a in 0..dim {
            dims[a] = voxels[a] + p;
        }
        let n: usize = dims.iter().product();
        if coeff.len() != n {
            return Err(Error::SizeMismatch { expected: n, found: coeff.len() });
        }
        Ok(Self { dim, degree: p, voxels, spacing, dims, coeff })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient grid extents.
    pub fn coeff_dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// Coefficient of the basis function whose support starts at knot
    /// `start` (voxel units, may be negative) along each axis.
    pub fn coefficient_at_start(&self, start: [i64; 3]) -> f64 {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for a in 0..3 {
            let i = if a < self.dim { (start[a] + self.degree as i64) as usize } else { 0 };
            idx += i * stride;
            stride *= self.dims[a];
        }
        self.coeff[idx]
    }

    /// Physical extent of the field domain.
    pub fn extent(&self) -> Vec3 {
        let mut e = [0.0; 3];
        for a in 0..self.dim {
            e[a] = self.voxels[a] as f64 * self.spacing[a];
        }
        e
    }

    pub fn contains(&self, x: Vec3) -> bool {
        let e = self.extent();
        (0..self.dim).all(|a| x[a] >= -1e-9 * e[a].max(1.0) && x[a] <= e[a] * (1.0 + 1e-12) + 1e-9)
    }

    /// Per-axis cell index and basis weights (derivative orders 0..=2).
    fn axis_weights(&self, x: Vec3) -> Result<([usize; 3], [[[f64; 4]; 3]; 3])> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x));
        }
        let p = self.degree;
        assert!(p <= 3, "field evaluation supports degree <= 3");
        let mut cell = [0usize; 3];
        let mut w = [[[0.0; 4]; 3]; 3];
        for a in 0..3 {
            if a >= self.dim {
                w[a][0][0] = 1.0;
                continue;
            }
            let u = (x[a] / self.spacing[a]).clamp(0.0, self.voxels[a] as f64);
            let c = (u.floor() as usize).min(self.voxels[a] - 1);
            let t = u - c as f64;
            cell[a] = c;
            let h = self.spacing[a];
            for j in 0..=p {
                // basis b = c + j has start knot c + j - p
                let y = t + (p - j) as f64;
                w[a][0][j] = cardinal(p, y);
                w[a][1][j] = cardinal_derivative(p, 1, y) / h;
                w[a][2][j] = cardinal_derivative(p, 2, y) / (h * h);
            }
        }
        Ok((cell, w))
    }

    fn contract(&self, cell: [usize; 3], w: &[[[f64; 4]; 3]; 3], order: [usize; 3]) -> f64 {
        let p = self.degree;
        let n = |a: usize| if a < self.dim { p + 1 } else { 1 };
        let mut sum = 0.0;
        for k in 0..n(2) {
            for j in 0..n(1) {
                let wjk = w[1][order[1]][j] * w[2][order[2]][k];
                if wjk == 0.0 {
                    continue;
                }
                let base = (cell[0]) + self.dims[0] * ((cell[1] + j) + self.dims[1] * (cell[2] + k));
                let row = &self.coeff[base..base + n(0)];
                let mut s = 0.0;
                for (i, c) in row.iter().enumerate() {
                    s += w[0][order[0]][i] * c;
                }
                sum += wjk * s;
            }
        }
        sum
    }

    pub fn evaluate(&self, x: Vec3) -> Result<f64> {
        let (cell, w) = self.axis_weights(x)?;
        Ok(self.contract(cell, &w, [0, 0, 0]))
    }

    pub fn gradient(&self, x: Vec3) -> Result<Vec3> {
        let (cell, w) = self.axis_weights(x)?;
        let mut g = [0.0; 3];
        for a in 0..self.dim {
            let mut o = [0; 3];
            o[a] = 1;
            g[a] = self.contract(cell, &w, o);
        }
        Ok(g)
    }

    /// Value, gradient and Hessian from one set of basis weights.
    pub fn sample(&self, x: Vec3) -> Result<FieldSample> {
        let (cell, w) = self.axis_weights(x)?;
        let mut s = FieldSample { value: self.contract(cell, &w, [0; 3]), gradient: [0.0; 3], hessian: [[0.0; 3]; 3] };
        for a in 0..self.dim {
            let mut o = [0; 3];
            o[a] = 1;
            s.gradient[a] = self.contract(cell, &w, o);
            for b in a..self.dim {
                let mut o = [0; 3];
                o[a] += 1;
                o[b] += 1;
                let v = self.contract(cell, &w, o);
                s.hessian[a][b] = v;
                s.hessian[b][a] = v;
            }
        }
        Ok(s)
    }

    /// Unit normal, pointing from low (inside) to high (outside) intensity.
    pub fn normal(&self, x: Vec3) -> Result<Vec3> {
        let g = self.gradient(x)?;
        let n = norm(g);
        if n <= GRAD_EPS {
            return Err(Error::DegenerateGradient(n));
        }
        Ok([g[0] / n, g[1] / n, g[2] / n])
    }

    /// Divergence of the unit normal field. Equals the curvature of the
    /// contour in 2D and the sum of principal curvatures in 3D; positive
    /// where the low-intensity region is convex.
    pub fn curvature(&self, x: Vec3) -> Result<f64> {
        let s = self.sample(x)?;
        curvature_from(&s)
    }

    /// Dump coefficients as little-endian f64 plus a JSON header.
    pub fn save_coefficients(&self, path: &Path) -> Result<()> {
        let header = CoefficientHeader {
            dims: self.dims[..self.dim].to_vec(),
            degree: self.degree,
            voxels: self.voxels[..self.dim].to_vec(),
            spacing: self.spacing[..self.dim].to_vec(),
        };
        let hp = path.with_extension("json");
        fs::write(&hp, serde_json::to_string_pretty(&header)?).map_err(|e| Error::io(&hp, e))?;
        let bytes: Vec<u8> = self.coeff.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

pub fn curvature_from(s: &FieldSample) -> Result<f64> {
    let g = s.gradient;
    let gn = norm(g);
    if gn <= GRAD_EPS {
        return Err(Error::DegenerateGradient(gn));
    }
    let h = &s.hessian;
    let trace = h[0][0] + h[1][1] + h[2][2];
    let hg = [dot(h[0], g), dot(h[1], g), dot(h[2], g)];
    Ok((gn * gn * trace - dot(g, hg)) / (gn * gn * gn))
}

#[derive(Serialize, Deserialize)]
struct CoefficientHeader {
    dims: Vec<usize>,
    degree: usize,
    voxels: Vec<usize>,
    spacing: Vec<f64>,
}

/// One filter pass along `axis`: grid extent `M` becomes `M + p`.
fn filter_axis(grid: &[f64], dims: [usize; 3], axis: usize, weights: &[f64]) -> (Vec<f64>, [usize; 3]) {
    let p = weights.len() - 1;
    let m = dims[axis];
    let mut out_dims = dims;
    out_dims[axis] = m + p;
    // truncated denominators depend only on the distance to the image edge
    let denom: Vec<f64> = (0..m + p)
        .map(|b| {
            (0..=p)
                .filter(|&i| {
                    let v = b as i64 - p as i64 + i as i64;
                    v >= 0 && (v as usize) < m
                })
                .map(|i| weights[i])
                .sum()
        })
        .collect();
    let in_stride = [1, dims[0], dims[0] * dims[1]];
    let out_stride = [1, out_dims[0], out_dims[0] * out_dims[1]];
    let mut out = vec![0.0; out_dims.iter().product()];
    let (o1, o2) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    for j in 0..dims[o2] {
        for i in 0..dims[o1] {
            let ib = i * in_stride[o1] + j * in_stride[o2];
            let ob = i * out_stride[o1] + j * out_stride[o2];
            for b in 0..m + p {
                let mut s = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    let v = b as i64 - p as i64 + k as i64;
                    if v >= 0 && (v as usize) < m {
                        s += w * grid[ib + v as usize * in_stride[axis]];
                    }
                }
                out[ob + b * out_stride[axis]] = s / denom[b];
            }
        }
    }
    (out, out_dims)
}
