//! Symmetric sparse matrices and a direct Cholesky solver.
//!
//! The fill-reducing ordering is a minimum-degree elimination on a
//! compressed graph whose nodes are groups of unknowns that share a
//! sparsity pattern (the components of the functions at one vertex).

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};

/// Symmetric matrix stored as its upper triangle in compressed columns.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    n: usize,
    colptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
}

impl SymMatrix {
    /// Sum duplicate `(i, j, v)` entries; entries below the diagonal are
    /// mirrored into the upper triangle.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> =
            triplets.iter().map(|&(i, j, v)| if i <= j { (j, i, v) } else { (i, j, v) }).collect();
        entries.sort_unstable_by_key(|&(c, r, _)| (c, r));
        let mut colptr = vec![0; n + 1];
        let mut rows = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (c, r, v) in entries {
            if last == Some((c, r)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((c, r));
            rows.push(r);
            vals.push(v);
            colptr[c + 1] += 1;
        }
        for c in 0..n {
            colptr[c + 1] += colptr[c];
        }
        Self { n, colptr, rows, vals }
    }

    /// Zero matrix with a fixed pattern: `cols[c]` lists the rows `r <= c`
    /// stored in column `c`.
    pub fn from_pattern(cols: Vec<Vec<usize>>) -> Self {
        let n = cols.len();
        let mut colptr = Vec::with_capacity(n + 1);
        colptr.push(0);
        let mut rows = Vec::new();
        for mut c in cols {
            c.sort_unstable();
            c.dedup();
            rows.extend(c);
            colptr.push(rows.len());
        }
        let vals = vec![0.0; rows.len()];
        Self { n, colptr, rows, vals }
    }

    /// Add `v` to entry `(i, j)`, which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let span = self.colptr[c]..self.colptr[c + 1];
        let p = self.rows[span.clone()].binary_search(&r).expect("entry outside the sparsity pattern");
        self.vals[span.start + p] += v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    /// Upper-triangle entries `(row, value)` of column `c`.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.colptr[c]..self.colptr[c + 1]).map(move |p| (self.rows[p], self.vals[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.column(c).find(|&(k, _)| k == r).map_or(0.0, |(_, v)| v)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for (r, v) in self.column(c) {
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = Vec::with_capacity(self.nnz());
        for c in 0..self.n {
            for (r, v) in self.column(c) {
                t.push((inv[r], inv[c], v));
            }
        }
        Self::from_triplets(self.n, &t)
    }
}

/// Minimum-degree order of a graph given by adjacency lists.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut g: Vec<BTreeSet<usize>> = adj.iter().enumerate().map(|(i, a)| a.iter().copied().filter(|&j| j != i).collect()).collect();
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((g[i].len(), i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if done[v] || deg != g[v].len() {
            continue;
        }
        done[v] = true;
        order.push(v);
        let nb: Vec<usize> = std::mem::take(&mut g[v]).into_iter().collect();
        for &u in &nb {
            g[u].remove(&v);
            for &w in &nb {
                if w != u {
                    g[u].insert(w);
                }
            }
            heap.push(Reverse((g[u].len(), u)));
        }
    }
    order
}

/// Expand an order of groups into an order of unknowns.
pub fn expand_groups(order: &[usize], groups: &[Vec<usize>]) -> Vec<usize> {
    order.iter().flat_map(|&g| groups[g].iter().copied()).collect()
}

/// Columns per panel in the dense part of a supernode.
const PANEL: usize = 48;

/// Supernodal Cholesky factor `L` of a permuted matrix, `P A Pᵀ = L Lᵀ`.
///
/// Consecutive columns with nested patterns are stored together as one
/// dense column-major block whose rows are the pattern of the first column.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    /// First column of each supernode, with `n` appended.
    first: Vec<usize>,
    /// Row indices of each supernode, concatenated.
    rowptr: Vec<usize>,
    rows: Vec<usize>,
    /// Dense blocks, concatenated.
    valptr: Vec<usize>,
    vals: Vec<f64>,
    nnz: usize,
}

fn etree(a: &SymMatrix) -> Vec<usize> {
    let n = a.n;
    let mut parent = vec![usize::MAX; n];
    let mut ancestor = vec![usize::MAX; n];
    for k in 0..n {
        for (mut i, _) in a.column(k) {
            while i != usize::MAX && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == usize::MAX {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L`, written to `stack[top..]`.
fn ereach(a: &SymMatrix, k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = a.n;
    let mut top = n;
    mark[k] = k;
    for (i0, _) in a.column(k) {
        if i0 > k {
            continue;
        }
        let mut i = i0;
        let mut path = Vec::new();
        while mark[i] != k {
            path.push(i);
            mark[i] = k;
            i = parent[i];
        }
        // descendants before ancestors
        for &p in path.iter().rev() {
            top -= 1;
            stack[top] = p;
        }
    }
    top
}

impl Cholesky {
    /// Factor `a` with the fill-reducing permutation `perm` (`perm[new] = old`).
    pub fn factor(a: &SymMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n;
        if perm.len() != n {
            return Err(Error::InvalidArgument("permutation length".into()));
        }
        let c = a.permuted(&perm);
        let parent = etree(&c);
        let mut stack = vec![0; n];
        let mut mark = vec![usize::MAX; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let nnz = counts.iter().sum();

        // column j + 1 continues the supernode of j when its pattern is
        // that of j without j itself
        let mut first = vec![0];
        for j in 1..n {
            if !(parent[j - 1] == j && counts[j - 1] == counts[j] + 1) {
                first.push(j);
            }
        }
        first.push(n);
        let ns = first.len() - 1;
        let mut owner = vec![0; n];
        for s in 0..ns {
            owner[first[s]..first[s + 1]].fill(s);
        }

        // patterns of the leading columns
        let mut pattern: Vec<Vec<usize>> = (0..ns).map(|s| (first[s]..first[s + 1]).collect()).collect();
        mark.fill(usize::MAX);
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                let s = owner[i];
                if i == first[s] && k >= first[s + 1] {
                    pattern[s].push(k);
                }
            }
        }
        let mut rowptr = vec![0];
        let mut valptr = vec![0];
        let mut rows = Vec::new();
        for s in 0..ns {
            rows.extend_from_slice(&pattern[s]);
            rowptr.push(rows.len());
            valptr.push(valptr[s] + pattern[s].len() * (first[s + 1] - first[s]));
        }
        drop(pattern);

        // lower triangle by columns
        let mut lower: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for col in 0..n {
            for (r, v) in c.column(col) {
                lower[r].push((col, v));
            }
        }

        let mut vals = vec![0.0; valptr[ns]];
        let mut relpos = vec![0usize; n];
        let mut pos = vec![0usize; ns];
        let mut link: Vec<Vec<usize>> = vec![Vec::new(); ns];
        let mut update = Vec::new();
        for s in 0..ns {
            let (f, l) = (first[s], first[s + 1]);
            let w = l - f;
            let srows = &rows[rowptr[s]..rowptr[s + 1]];
            let nr = srows.len();
            for (p, &r) in srows.iter().enumerate() {
                relpos[r] = p;
            }
            let (done, rest) = vals.split_at_mut(valptr[s]);
            let block = &mut rest[..nr * w];
            for j in f..l {
                for &(i, v) in &lower[j] {
                    block[(j - f) * nr + relpos[i]] += v;
                }
            }
            let diag: Vec<f64> = (0..w).map(|j| block[j * nr + j]).collect();

            for d in std::mem::take(&mut link[s]) {
                let drows = &rows[rowptr[d]..rowptr[d + 1]];
                let (ndr, wd) = (drows.len(), first[d + 1] - first[d]);
                let p0 = pos[d];
                let p1 = p0 + drows[p0..].partition_point(|&r| r < l);
                let (m, k) = (ndr - p0, p1 - p0);
                update.clear();
                update.resize(m * k, 0.0);
                let dv = &done[valptr[d]..valptr[d + 1]];
                // update = L_d[p0.., :] · L_d[p0..p1, :]ᵀ
                // SAFETY: both operands lie inside `dv` (rows p0..ndr of a
                // column-major ndr × wd block) and `update` holds m × k values.
                unsafe {
                    matrixmultiply::dgemm(
                        m,
                        wd,
                        k,
                        1.0,
                        dv.as_ptr().add(p0),
                        1,
                        ndr as isize,
                        dv.as_ptr().add(p0),
                        ndr as isize,
                        1,
                        0.0,
                        update.as_mut_ptr(),
                        1,
                        m as isize,
                    );
                }
                for cc in 0..k {
                    let col = drows[p0 + cc] - f;
                    let dst = &mut block[col * nr..(col + 1) * nr];
                    let src = &update[cc * m..(cc + 1) * m];
                    for rr in cc..m {
                        dst[relpos[drows[p0 + rr]]] -= src[rr];
                    }
                }
                pos[d] = p1;
                if p1 < ndr {
                    link[owner[drows[p1]]].push(d);
                }
            }

            // dense factor of the diagonal block and the rows below it, in
            // panels of columns
            for j0 in (0..w).step_by(PANEL) {
                let j1 = (j0 + PANEL).min(w);
                if j0 > 0 {
                    let (m, k) = (nr - j0, j1 - j0);
                    update.clear();
                    update.resize(m * k, 0.0);
                    // SAFETY: columns 0..j0 and rows j0..nr of the nr × w block.
                    unsafe {
                        matrixmultiply::dgemm(
                            m,
                            j0,
                            k,
                            1.0,
                            block.as_ptr().add(j0),
                            1,
                            nr as isize,
                            block.as_ptr().add(j0),
                            nr as isize,
                            1,
                            0.0,
                            update.as_mut_ptr(),
                            1,
                            m as isize,
                        );
                    }
                    for cc in 0..k {
                        let dst = &mut block[(j0 + cc) * nr + j0..(j0 + cc + 1) * nr];
                        for (v, u) in dst.iter_mut().zip(&update[cc * m..(cc + 1) * m]) {
                            *v -= u;
                        }
                    }
                }
                for j in j0..j1 {
                    let (left, right) = block.split_at_mut(j * nr);
                    let colj = &mut right[..nr];
                    for k in j0..j {
                        let colk = &left[k * nr..(k + 1) * nr];
                        let ljk = colk[j];
                        for r in j..nr {
                            colj[r] -= ljk * colk[r];
                        }
                    }
                    let d = colj[j];
                    // a pivot that lost all but round-off of its diagonal marks a null space
                    if !(d > 1e-10 * diag[j].abs()) {
                        return Err(Error::Singular(format!("pivot {} is {d:e}", f + j)));
                    }
                    let dj = d.sqrt();
                    colj[j] = dj;
                    for v in &mut colj[j + 1..] {
                        *v /= dj;
                    }
                }
            }
            if nr > w {
                pos[s] = w;
                link[owner[srows[w]]].push(s);
            }
        }
        Ok(Self { n, perm, first, rowptr, rows, valptr, vals, nnz })
    }

    /// Factor with a minimum-degree order on the given unknown groups.
    pub fn factor_grouped(a: &SymMatrix, groups: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![usize::MAX; a.n];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                owner[i] = g;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(Error::InvalidArgument("groups must cover all unknowns".into()));
        }
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); groups.len()];
        for c in 0..a.n {
            for (r, _) in a.column(c) {
                let (gr, gc) = (owner[r], owner[c]);
                if gr != gc {
                    adj[gr].insert(gc);
                    adj[gc].insert(gr);
                }
            }
        }
        let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        let order = minimum_degree(&adj);
        Self::factor(a, expand_groups(&order, groups))
    }

    /// Nonzeros of `L`.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        let ns = self.first.len() - 1;
        for s in 0..ns {
            let (f, w) = (self.first[s], self.first[s + 1] - self.first[s]);
            let rows = &self.rows[self.rowptr[s]..self.rowptr[s + 1]];
            let nr = rows.len();
            let block = &self.vals[self.valptr[s]..self.valptr[s + 1]];
            for j in 0..w {
                let col = &block[j * nr..(j + 1) * nr];
                let yj = y[f + j] / col[j];
                y[f + j] = yj;
                for r in j + 1..nr {
                    y[rows[r]] -= col[r] * yj;
                }
            }
        }
        for s in (0..ns).rev() {
            let (f, w) = (self.first[s], self.first[s + 1] - self.first[s]);
            let rows = &self.rows[self.rowptr[s]..self.rowptr[s + 1]];
            let nr = rows.len();
            let block = &self.vals[self.valptr[s]..self.valptr[s + 1]];
            for j in (0..w).rev() {
                let col = &block[j * nr..(j + 1) * nr];
                let mut v = y[f + j];
                for r in j + 1..nr {
                    v -= col[r] * y[rows[r]];
                }
                y[f + j] = v / col[j];
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_2d(m: usize) -> SymMatrix {
        let id = |i: usize, j: usize| i + m * j;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((id(i, j), id(i, j), 4.0));
                if i + 1 < m {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                }
                if j + 1 < m {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                }
            }
        }
        SymMatrix::from_triplets(m * m, &t)
    }

    #[test]
    fn solves_laplacian() {
        let a = laplacian_2d(12);
        let n = a.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul(&x0);
        let groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let f = Cholesky::factor_grouped(&a, &groups).unwrap();
        let x = f.solve(&b);
        let err = x.iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        // minimum degree should beat the natural order's fill
        let natural = Cholesky::factor(&a, (0..n).collect()).unwrap();
        assert!(f.nnz() <= natural.nnz());
    }

    #[test]
    fn dense_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20;
        let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut v: f64 = (0..n).map(|k| m[i][k] * m[j][k]).sum();
                if i == j {
                    v += n as f64;
                }
                t.push((i, j, v));
            }
        }
        let a = SymMatrix::from_triplets(n, &t);
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let x = Cholesky::factor(&a, (0..n).rev().collect()).unwrap().solve(&b);
        let r = a.mul(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn detects_singular() {
        let a = SymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]);
        assert!(matches!(Cholesky::factor(&a, vec![0, 1]), Err(Error::Singular(_))));
    }

    #[test]
    fn triplets_mirror_lower_entries() {
        let a = SymMatrix::from_triplets(2, &[(1, 0, 2.0), (0, 1, 1.0), (0, 0, 1.0)]);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn pattern_accumulates() {
        let mut a = SymMatrix::from_pattern(vec![vec![0], vec![1, 0]]);
        a.add(1, 0, 2.0);
        a.add(0, 1, 1.0);
        a.add(1, 1, 4.0);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.nnz(), 3);
    }

    /// Three unknowns per grid node, coupled like elasticity components,
    /// so that supernodes span several columns and update each other.
    #[test]
    fn grouped_blocks_solve() {
        let m = 9;
        let lap = laplacian_2d(m);
        let c = [[2.0, 0.5, 0.1], [0.5, 3.0, 0.2], [0.1, 0.2, 1.5]];
        let mut t = Vec::new();
        for col in 0..lap.dim() {
            for (row, v) in lap.column(col) {
                for i in 0..3 {
                    for j in 0..3 {
                        if row == col && i > j {
                            continue;
                        }
                        t.push((3 * row + i, 3 * col + j, v * c[i][j]));
                    }
                }
            }
        }
        let a = SymMatrix::from_triplets(3 * lap.dim(), &t);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul(&x0);
        let groups: Vec<Vec<usize>> = (0..lap.dim()).map(|g| vec![3 * g, 3 * g + 1, 3 * g + 2]).collect();
        let f = Cholesky::factor_grouped(&a, &groups).unwrap();
        let x = f.solve(&b);
        let err = x.iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }
}
