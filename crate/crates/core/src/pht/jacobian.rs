//! Exact Bernstein form of the Jacobian determinant of a Bézier element,
//! used to certify that an element is not inverted.

use super::PhtMesh;
use crate::bernstein;
use crate::geom::Vec3;

/// Tensor-product polynomial in Bernstein form on the unit box.
#[derive(Clone, Debug, PartialEq)]
struct Poly {
    deg: [usize; 3],
    coef: Vec<f64>,
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl Poly {
    fn len(deg: [usize; 3]) -> usize {
        (deg[0] + 1) * (deg[1] + 1) * (deg[2] + 1)
    }

    fn at(&self, i: [usize; 3]) -> usize {
        i[0] + (self.deg[0] + 1) * (i[1] + (self.deg[1] + 1) * i[2])
    }

    fn indices(deg: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
        (0..=deg[2]).flat_map(move |k| (0..=deg[1]).flat_map(move |j| (0..=deg[0]).map(move |i| [i, j, k])))
    }

    fn mul(&self, o: &Poly) -> Poly {
        let deg = [self.deg[0] + o.deg[0], self.deg[1] + o.deg[1], self.deg[2] + o.deg[2]];
        // in the scaled basis C(n, i) tⁱ (1 - t)ⁿ⁻ⁱ the product is a convolution
        let scaled = |p: &Poly| -> Vec<f64> {
            Poly::indices(p.deg).map(|i| p.coef[p.at(i)] * (0..3).map(|a| binom(p.deg[a], i[a])).product::<f64>()).collect()
        };
        let (a, b) = (scaled(self), scaled(o));
        let mut out = Poly { deg, coef: vec![0.0; Poly::len(deg)] };
        let (sx, sy) = (deg[0] + 1, (deg[0] + 1) * (deg[1] + 1));
        let bidx: Vec<usize> = Poly::indices(o.deg).map(|j| j[0] + sx * j[1] + sy * j[2]).collect();
        for (ia, i) in Poly::indices(self.deg).enumerate() {
            let va = a[ia];
            if va == 0.0 {
                continue;
            }
            let base = i[0] + sx * i[1] + sy * i[2];
            for (vb, &off) in b.iter().zip(&bidx) {
                out.coef[base + off] += va * vb;
            }
        }
        for k in Poly::indices(deg) {
            let idx = out.at(k);
            out.coef[idx] /= (0..3).map(|ax| binom(deg[ax], k[ax])).product::<f64>();
        }
        out
    }

    fn axpy(&mut self, s: f64, o: &Poly) {
        assert_eq!(self.deg, o.deg);
        for (a, b) in self.coef.iter_mut().zip(&o.coef) {
            *a += s * b;
        }
    }

    /// Halves of the polynomial split at `t = 1/2` along `axis`.
    fn split(&self, axis: usize) -> (Poly, Poly) {
        let n = self.deg[axis];
        let mut lo = self.clone();
        let mut hi = self.clone();
        let mut other = self.deg;
        other[axis] = 0;
        for base in Poly::indices(other) {
            let mut row: Vec<f64> = (0..=n)
                .map(|m| {
                    let mut i = base;
                    i[axis] = m;
                    self.coef[self.at(i)]
                })
                .collect();
            let mut left = vec![0.0; n + 1];
            let mut right = vec![0.0; n + 1];
            for r in 0..=n {
                left[r] = row[0];
                right[n - r] = row[n - r];
                for m in 0..n - r {
                    row[m] = 0.5 * (row[m] + row[m + 1]);
                }
            }
            for m in 0..=n {
                let mut i = base;
                i[axis] = m;
                let idx = self.at(i);
                lo.coef[idx] = left[m];
                hi.coef[idx] = right[m];
            }
        }
        (lo, hi)
    }

    fn min_coef(&self) -> f64 {
        self.coef.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Values at the box corners, which equal the corner coefficients.
    fn min_corner(&self) -> f64 {
        let mut m = f64::INFINITY;
        for bits in 0..8 {
            let i = [0, 1, 2].map(|a| if bits >> a & 1 == 1 { self.deg[a] } else { 0 });
            m = m.min(self.coef[self.at(i)]);
        }
        m
    }
}

/// Component `c` of `∂x/∂t_axis` as a Bernstein polynomial.
fn derivative(dim: usize, net: &[Vec3], axis: usize, c: usize) -> Poly {
    let mut deg = [0; 3];
    for a in 0..dim {
        deg[a] = if a == axis { 2 } else { 3 };
    }
    let mut p = Poly { deg, coef: vec![0.0; Poly::len(deg)] };
    for i in Poly::indices(deg) {
        let mut j = i;
        j[axis] += 1;
        let v = 3.0 * (net[bernstein::index(j)][c] - net[bernstein::index(i)][c]);
        let idx = p.at(i);
        p.coef[idx] = v;
    }
    p
}

fn determinant(dim: usize, net: &[Vec3]) -> Poly {
    let d = |a: usize, c: usize| derivative(dim, net, a, c);
    match dim {
        2 => {
            let mut p = d(0, 0).mul(&d(1, 1));
            p.axpy(-1.0, &d(0, 1).mul(&d(1, 0)));
            p
        }
        _ => {
            // det = Σ_c J_c0 · (J_1 × J_2)_c
            let mut total: Option<Poly> = None;
            for c in 0..3 {
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                let mut cross = d(1, c1).mul(&d(2, c2));
                cross.axpy(-1.0, &d(1, c2).mul(&d(2, c1)));
                let term = d(0, c).mul(&cross);
                match total.as_mut() {
                    Some(t) => t.axpy(1.0, &term),
                    None => total = Some(term),
                }
            }
            total.unwrap()
        }
    }
}

/// Whether the polynomial is positive on the box: decided by the sign of
/// its Bernstein coefficients, splitting the box up to `depth` times.
fn certify(p: &Poly, dim: usize, depth: usize, axis: usize) -> bool {
    if p.min_corner() <= 0.0 {
        return false;
    }
    if p.min_coef() > 0.0 {
        return true;
    }
    if depth == 0 {
        // undecided: accept, the corner values of every sub-box are positive
        return true;
    }
    let (lo, hi) = p.split(axis);
    let next = (axis + 1) % dim;
    certify(&lo, dim, depth - 1, next) && certify(&hi, dim, depth - 1, next)
}

impl PhtMesh {
    /// Whether `det J > 0` on the whole leaf, up to a subdivision depth of
    /// three splits per axis.
    pub fn jacobian_positive(&self, e: usize) -> bool {
        let net = self.element_net(e);
        let p = determinant(self.dim, &net);
        certify(&p, self.dim, 3 * self.dim, 0)
    }
}
