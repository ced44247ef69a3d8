//! Cubic Bernstein polynomials on `[0, 1]` and tensor-product helpers.

/// Values of the four cubic Bernstein polynomials at `t`.
#[inline]
pub fn values(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * t * s * s, 3.0 * t * t * s, t * t * t]
}

/// First derivatives with respect to `t`.
#[inline]
pub fn first(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [-3.0 * s * s, 3.0 * s * s - 6.0 * t * s, 6.0 * t * s - 3.0 * t * t, 3.0 * t * t]
}

/// Second derivatives with respect to `t`.
#[inline]
pub fn second(t: f64) -> [f64; 4] {
    [6.0 * (1.0 - t), -12.0 + 18.0 * t, 6.0 - 18.0 * t, 6.0 * t]
}

/// Derivative of order `k` (0, 1, 2).
#[inline]
pub fn derivative(t: f64, k: usize) -> [f64; 4] {
    match k {
        0 => values(t),
        1 => first(t),
        2 => second(t),
        3 => [-6.0, 18.0, -18.0, 6.0],
        _ => [0.0; 4],
    }
}

/// Split one cubic segment at `t = 1/2` (de Casteljau).
#[inline]
pub fn split_half(b: [f64; 4]) -> ([f64; 4], [f64; 4]) {
    let b01 = 0.5 * (b[0] + b[1]);
    let b12 = 0.5 * (b[1] + b[2]);
    let b23 = 0.5 * (b[2] + b[3]);
    let b012 = 0.5 * (b01 + b12);
    let b123 = 0.5 * (b12 + b23);
    let mid = 0.5 * (b012 + b123);
    ([b[0], b01, b012, mid], [mid, b123, b23, b[3]])
}

/// Number of entries in a tensor table of dimension `dim`.
#[inline]
pub const fn table_len(dim: usize) -> usize {
    match dim {
        1 => 4,
        2 => 16,
        _ => 64,
    }
}

/// Linear index of a tensor multi-index (axis 0 fastest).
#[inline]
pub fn index(i: [usize; 3]) -> usize {
    i[0] + 4 * i[1] + 16 * i[2]
}

/// Multi-index of a linear table index.
#[inline]
pub fn multi(idx: usize) -> [usize; 3] {
    [idx % 4, (idx / 4) % 4, idx / 16]
}

/// Subdivide a tensor table at the midpoint of every axis.
/// Children are returned in binary order: bit `a` set means the upper half
/// along axis `a`.
pub fn subdivide(table: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut parts: Vec<Vec<f64>> = vec![table.to_vec()];
    for axis in 0..dim {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for part in &parts {
            let mut lo = part.clone();
            let mut hi = part.clone();
            for_each_line(dim, axis, |line| {
                let b = [part[line[0]], part[line[1]], part[line[2]], part[line[3]]];
                let (l, h) = split_half(b);
                for k in 0..4 {
                    lo[line[k]] = l[k];
                    hi[line[k]] = h[k];
                }
            });
            next.push(lo);
            next.push(hi);
        }
        // reorder so that bit `axis` of the child index selects lo/hi
        let half = parts.len();
        let mut ordered = vec![Vec::new(); half * 2];
        for (p, pair) in next.chunks(2).enumerate() {
            ordered[p] = pair[0].clone();
            ordered[p + half] = pair[1].clone();
        }
        parts = ordered;
    }
    parts
}

/// Visit every line of four entries parallel to `axis`.
pub fn for_each_line(dim: usize, axis: usize, mut f: impl FnMut([usize; 4])) {
    let ranges: [usize; 3] = [
        if dim > 0 { 4 } else { 1 },
        if dim > 1 { 4 } else { 1 },
        if dim > 2 { 4 } else { 1 },
    ];
    let mut r = ranges;
    r[axis] = 1;
    for k in 0..r[2] {
        for j in 0..r[1] {
            for i in 0..r[0] {
                let mut line = [0usize; 4];
                for (s, l) in line.iter_mut().enumerate() {
                    let mut m = [i, j, k];
                    m[axis] = s;
                    *l = index(m);
                }
                f(line);
            }
        }
    }
}

/// Per-axis Bernstein factors for a point; `order[a]` selects the derivative.
pub fn tensor_weights(dim: usize, t: [f64; 3], order: [usize; 3]) -> Vec<f64> {
    let b: Vec<[f64; 4]> = (0..3)
        .map(|a| if a < dim { derivative(t[a], order[a]) } else { [1.0, 0.0, 0.0, 0.0] })
        .collect();
    let n = table_len(dim);
    let mut w = vec![0.0; n];
    for (idx, wi) in w.iter_mut().enumerate() {
        let m = multi(idx);
        *wi = b[0][m[0]] * b[1][m[1]] * b[2][m[2]];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for &t in &[0.0, 0.13, 0.5, 0.99, 1.0] {
            let s: f64 = values(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            let d: f64 = first(t).iter().sum();
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn split_reproduces_polynomial() {
        let b = [0.3, -1.0, 2.0, 0.7];
        let eval = |c: [f64; 4], t: f64| values(t).iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        let (l, h) = split_half(b);
        for &t in &[0.0, 0.25, 0.6, 1.0] {
            assert!((eval(l, t) - eval(b, 0.5 * t)).abs() < 1e-14);
            assert!((eval(h, t) - eval(b, 0.5 + 0.5 * t)).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_subdivision_2d() {
        let table: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let eval = |tab: &[f64], t: [f64; 3]| {
            tensor_weights(2, t, [0; 3]).iter().zip(tab).map(|(w, c)| w * c).sum::<f64>()
        };
        let kids = subdivide(&table, 2);
        for (c, kid) in kids.iter().enumerate() {
            let off = [(c & 1) as f64 * 0.5, ((c >> 1) & 1) as f64 * 0.5];
            for &(s, t) in &[(0.1, 0.2), (0.7, 0.9), (0.5, 0.5)] {
                let a = eval(kid, [s, t, 0.0]);
                let b = eval(&table, [off[0] + 0.5 * s, off[1] + 0.5 * t, 0.0]);
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
