//! Cross-insertion refinement and basis modification.

use std::collections::{BTreeMap, BTreeSet};

use super::{corner_block, hermite_at, Element, ElementClass, PhtMesh, VertexKey, MAX_LEVEL};
use crate::bernstein;
use crate::error::{Error, Result};

enum CornerKind {
    Basis,
    /// T-vertex; data comes from the coarser leaf at the given local point.
    Hosted(usize, [f64; 3]),
}

impl PhtMesh {
    /// Split a leaf into `2^d` children, first refining coarser leaves that
    /// touch it so that adjacent leaves differ by at most one level.
    /// Returns every vertex that became a basis vertex.
    pub fn refine_element(&mut self, e: usize) -> Result<Vec<VertexKey>> {
        if e >= self.elements.len() {
            return Err(Error::OutOfBounds(format!("element {e}")));
        }
        if !self.elements[e].is_leaf() {
            return Err(Error::AlreadyRefined(e));
        }
        let mut out = Vec::new();
        self.refine_balanced(e, &mut out)?;
        Ok(out)
    }

    /// Refine several leaves; entries already refined by balancing are skipped.
    pub fn refine_elements(&mut self, elems: &[usize]) -> Result<Vec<VertexKey>> {
        let mut out = Vec::new();
        for &e in elems {
            if self.elements[e].is_leaf() {
                self.refine_balanced(e, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Refine every leaf once.
    pub fn refine_uniform(&mut self) -> Result<()> {
        let leaves: Vec<usize> = self.leaves().collect();
        self.refine_elements(&leaves).map(|_| ())
    }

    fn refine_balanced(&mut self, e: usize, out: &mut Vec<VertexKey>) -> Result<()> {
        loop {
            let el = &self.elements[e];
            let hi = el.corner((1 << self.dim) - 1);
            let coarse: Vec<usize> = self
                .leaves_touching(el.lo, hi)
                .into_iter()
                .filter(|&c| self.elements[c].level < el.level)
                .collect();
            if coarse.is_empty() {
                break;
            }
            for c in coarse {
                if self.elements[c].is_leaf() {
                    self.refine_balanced(c, out)?;
                }
            }
        }
        self.split(e, out)
    }

    fn split(&mut self, e: usize, out: &mut Vec<VertexKey>) -> Result<()> {
        let d = self.dim;
        let (level, lo, size, class) = {
            let el = &self.elements[e];
            (el.level, el.lo, el.size, el.class)
        };
        if level >= MAX_LEVEL {
            return Err(Error::InvalidArgument(format!("element {e} is at the finest level")));
        }
        let half = size / 2;
        let mut kids = Vec::with_capacity(1 << d);
        for bits in 0..1usize << d {
            let mut clo = lo;
            for a in 0..d {
                clo[a] += (bits >> a & 1) as i64 * half;
            }
            kids.push(self.elements.len());
            self.elements.push(Element {
                level: level + 1,
                lo: clo,
                size: half,
                parent: Some(e),
                children: None,
                class,
                tables: BTreeMap::new(),
            });
        }
        self.elements[e].children = Some(kids.clone());

        let old = std::mem::take(&mut self.elements[e].tables);
        let mut touched: BTreeSet<usize> = BTreeSet::new();
        for (f, table) in old {
            self.functions[f].support.remove(&e);
            touched.insert(f);
            for (k, sub) in bernstein::subdivide(&table, d).into_iter().enumerate() {
                if sub.iter().any(|&v| v != 0.0) {
                    self.set_table(f, kids[k], Some(sub));
                }
            }
        }

        // lattice points of the parent that are not its corners
        let mut fresh = Vec::new();
        let span = |a: usize| if a < d { 3 } else { 1 };
        for k in 0..span(2) {
            for j in 0..span(1) {
                for i in 0..span(0) {
                    let m = [i, j, k];
                    if (0..d).all(|a| m[a] != 1) {
                        continue;
                    }
                    let mut key = lo;
                    for a in 0..d {
                        key[a] += m[a] as i64 * half;
                    }
                    if !self.vertex_fns.contains_key(&key) && self.is_basis_vertex(key) {
                        fresh.push(key);
                    }
                }
            }
        }
        // geometric information must come from the unmodified map
        let infos: Vec<_> = fresh.iter().map(|&v| self.geometric_info(v)).collect::<Result<_>>()?;
        let mut work: BTreeSet<(u32, usize)> = kids.iter().map(|&c| (level + 1, c)).collect();
        for (&v, info) in fresh.iter().zip(&infos) {
            for leaf in self.leaves_containing(v) {
                work.insert((self.elements[leaf].level, leaf));
                touched.extend(self.elements[leaf].tables.keys().copied());
            }
            touched.extend(self.add_vertex_functions(v, info));
        }
        out.extend(fresh);

        while let Some((lvl, f)) = work.pop_first() {
            if self.rebuild_leaf(f, &touched) {
                let el = &self.elements[f];
                let hi = el.corner((1 << d) - 1);
                for g in self.leaves_touching(el.lo, hi) {
                    if self.elements[g].level > lvl {
                        work.insert((self.elements[g].level, g));
                    }
                }
            }
        }
        Ok(())
    }

    fn corner_kinds(&self, f: usize) -> Vec<(VertexKey, CornerKind)> {
        let el = &self.elements[f];
        (0..1usize << self.dim)
            .map(|bits| {
                let key = el.corner(bits);
                if self.vertex_fns.contains_key(&key) {
                    return (key, CornerKind::Basis);
                }
                let host = self
                    .leaves_containing(key)
                    .into_iter()
                    .filter(|&h| !self.is_corner(h, &key))
                    .min_by_key(|&h| self.elements[h].level)
                    .expect("T-vertex without a coarser host");
                let hel = &self.elements[host];
                let mut t = [0.0; 3];
                for a in 0..self.dim {
                    t[a] = (key[a] - hel.lo[a]) as f64 / hel.size as f64;
                }
                (key, CornerKind::Hosted(host, t))
            })
            .collect()
    }

    /// Recompute the tables of the `touched` functions on leaf `f` from
    /// anchor data and T-vertex hosts. Returns whether anything changed.
    pub(crate) fn rebuild_leaf(&mut self, f: usize, touched: &BTreeSet<usize>) -> bool {
        let d = self.dim;
        let corners = self.corner_kinds(f);
        let mut cands: BTreeSet<usize> = self.elements[f].tables.keys().copied().collect();
        for (key, kind) in &corners {
            match kind {
                CornerKind::Basis => cands.extend(self.vertex_fns[key].iter().copied()),
                CornerKind::Hosted(h, _) => cands.extend(self.elements[*h].tables.keys().copied()),
            }
        }
        let h = self.element_size(f);
        let mut changed = false;
        for phi in cands.into_iter().filter(|p| touched.contains(p)) {
            let mut table = vec![0.0; bernstein::table_len(d)];
            for (bits, (key, kind)) in corners.iter().enumerate() {
                let data = match kind {
                    CornerKind::Basis if self.functions[phi].anchor == *key => self.functions[phi].hermite.clone(),
                    CornerKind::Basis => continue,
                    CornerKind::Hosted(host, t) => match self.elements[*host].tables.get(&phi) {
                        Some(ht) => hermite_at(d, ht, *t, self.element_size(*host)),
                        None => continue,
                    },
                };
                for (i, v) in corner_block(d, &data, bits, h) {
                    table[i] = v;
                }
            }
            let new = if table.iter().any(|&v| v != 0.0) { Some(table) } else { None };
            if self.elements[f].tables.get(&phi) != new.as_ref() {
                self.set_table(phi, f, new);
                changed = true;
            }
        }
        changed
    }

    /// Mark every leaf with the given class.
    pub fn classify_all(&mut self, class: ElementClass) {
        for el in self.elements.iter_mut().filter(|e| e.is_leaf()) {
            el.class = class;
        }
    }
}
