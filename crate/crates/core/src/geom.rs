//! Small fixed-size vector helpers.
//!
//! Points are always stored as `[f64; 3]`; 2D data keeps the third
//! component at zero so that one code path serves both dimensions.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO: Vec3 = [0.0; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// `a + s * b`
#[inline]
pub fn axpy(a: Vec3, s: f64, b: Vec3) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Determinant of the leading `dim x dim` block of a column matrix.
/// `cols[j]` is the j-th column.
pub fn det(cols: &[Vec3], dim: usize) -> f64 {
    match dim {
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        _ => dot(cols[0], cross(cols[1], cols[2])),
    }
}

/// Inverse of the leading `dim x dim` block, returned row-major as `inv[i][j]`.
pub fn inverse(cols: &[Vec3], dim: usize) -> Option<Mat3> {
    let d = det(cols, dim);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => inv[0][0] = 1.0 / d,
        2 => {
            // matrix a[i][j] = cols[j][i]
            inv[0][0] = cols[1][1] / d;
            inv[0][1] = -cols[1][0] / d;
            inv[1][0] = -cols[0][1] / d;
            inv[1][1] = cols[0][0] / d;
        }
        _ => {
            let a = |i: usize, j: usize| cols[j][i];
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1)) / d;
                }
            }
        }
    }
    Some(inv)
}

/// Apply a row-major 3x3 matrix.
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Angle between two vectors in radians.
pub fn angle(a: Vec3, b: Vec3) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

/// Unit eigenvector of the smallest eigenvalue of a symmetric matrix,
/// restricted to the leading `dim` coordinates (cyclic Jacobi).
pub fn smallest_eigenvector(m: &Mat3, dim: usize) -> Vec3 {
    let mut a = *m;
    let mut v = identity();
    for _ in 0..50 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let i = (0..dim).min_by(|&x, &y| a[x][x].total_cmp(&a[y][y])).unwrap();
    let mut out = [0.0; 3];
    for k in 0..dim {
        out[k] = v[k][i];
    }
    out
}

/// Rotation (row-major) taking unit vector `from` onto unit vector `to`.
pub fn rotation_between(from: Vec3, to: Vec3) -> Mat3 {
    let v = cross(from, to);
    let c = dot(from, to);
    let s2 = dot(v, v);
    if s2 < 1e-30 {
        if c > 0.0 {
            return identity();
        }
        // 180 degrees: rotate about any axis orthogonal to `from`
        let trial = if from[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let axis = normalize(cross(from, trial)).unwrap();
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = 2.0 * axis[i] * axis[j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        return r;
    }
    let k = 1.0 / (1.0 + c);
    let vx = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
    let mut r = identity();
    for i in 0..3 {
        for j in 0..3 {
            let mut vx2 = 0.0;
            for l in 0..3 {
                vx2 += vx[i][l] * vx[l][j];
            }
            r[i][j] += vx[i][j] + k * vx2;
        }
    }
    r
}
