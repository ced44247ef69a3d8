//! Mesh persistence (JSON topology plus a binary blob) and VTK export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::{for_each_sample, scaled_det};
use super::{BasisFunction, Element, ElementClass, PhtMesh};
use crate::bernstein;
use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Serialize, Deserialize)]
struct ElementRecord {
    level: u32,
    lo: [i64; 3],
    size: i64,
    parent: Option<usize>,
    children: Option<Vec<usize>>,
    class: ElementClass,
}

#[derive(Serialize, Deserialize)]
struct FunctionRecord {
    anchor: [i64; 3],
    corner: usize,
    gaps: [[f64; 2]; 3],
}

#[derive(Serialize, Deserialize)]
struct MeshRecord {
    dim: usize,
    n: [usize; 3],
    origin: Vec3,
    cell: Vec3,
    roots: Vec<usize>,
    elements: Vec<ElementRecord>,
    functions: Vec<FunctionRecord>,
    blob: String,
}

/// Per-sample scalar written as VTK point data; called with the element
/// and local coordinates.
pub type PointField<'a> = (&'a str, &'a dyn Fn(usize, Vec3) -> f64);

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn u64(&mut self) -> Result<u64> {
        let b = self
            .bytes
            .get(self.pos..self.pos + 8)
            .ok_or_else(|| Error::MalformedHeader("mesh blob truncated".into()))?;
        self.pos += 8;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        self.u64().map(f64::from_bits)
    }
}

impl PhtMesh {
    /// Write `path` (JSON) and a sibling `.bin` file with ordinates and control points.
    pub fn save(&self, path: &Path) -> Result<()> {
        let blob_path = path.with_extension("bin");
        let record = MeshRecord {
            dim: self.dim,
            n: self.n,
            origin: self.origin,
            cell: self.cell,
            roots: self.roots.clone(),
            elements: self
                .elements
                .iter()
                .map(|e| ElementRecord {
                    level: e.level,
                    lo: e.lo,
                    size: e.size,
                    parent: e.parent,
                    children: e.children.clone(),
                    class: e.class,
                })
                .collect(),
            functions: self
                .functions
                .iter()
                .map(|f| FunctionRecord { anchor: f.anchor, corner: f.corner, gaps: f.gaps })
                .collect(),
            blob: blob_path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
        };
        fs::write(path, serde_json::to_string(&record)?).map_err(|e| Error::io(path, e))?;

        let mut bytes = Vec::new();
        let mut put = |v: f64| bytes.extend_from_slice(&v.to_le_bytes());
        for f in &self.functions {
            f.control.iter().for_each(|&v| put(v));
            f.hermite.iter().for_each(|&v| put(v));
        }
        for e in self.elements.iter().filter(|e| e.is_leaf()) {
            bytes.extend_from_slice(&(e.tables.len() as u64).to_le_bytes());
            for (&f, tab) in &e.tables {
                bytes.extend_from_slice(&(f as u64).to_le_bytes());
                for &v in tab {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        fs::write(&blob_path, bytes).map_err(|e| Error::io(&blob_path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rec: MeshRecord = serde_json::from_str(&text)?;
        let blob_path = path.with_file_name(&rec.blob);
        let bytes = fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
        let mut r = Reader { bytes: &bytes, pos: 0 };
        let d = rec.dim;
        let mut functions = Vec::with_capacity(rec.functions.len());
        let mut vertex_fns: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for (id, f) in rec.functions.into_iter().enumerate() {
            let control = [r.f64()?, r.f64()?, r.f64()?];
            let hermite = (0..1 << d).map(|_| r.f64()).collect::<Result<_>>()?;
            vertex_fns.entry(f.anchor).or_default().push(id);
            functions.push(BasisFunction {
                anchor: f.anchor,
                corner: f.corner,
                gaps: f.gaps,
                hermite,
                control,
                support: BTreeSet::new(),
            });
        }
        let mut elements: Vec<Element> = rec
            .elements
            .into_iter()
            .map(|e| Element {
                level: e.level,
                lo: e.lo,
                size: e.size,
                parent: e.parent,
                children: e.children,
                class: e.class,
                tables: BTreeMap::new(),
            })
            .collect();
        let len = bernstein::table_len(d);
        for (id, e) in elements.iter_mut().enumerate().filter(|(_, e)| e.is_leaf()) {
            let count = r.u64()?;
            for _ in 0..count {
                let f = r.u64()? as usize;
                let tab = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                let func = functions
                    .get_mut(f)
                    .ok_or_else(|| Error::MalformedHeader(format!("unknown function {f}")))?;
                func.support.insert(id);
                e.tables.insert(f, tab);
            }
        }
        Ok(PhtMesh { dim: d, n: rec.n, origin: rec.origin, cell: rec.cell, elements, roots: rec.roots, functions, vertex_fns })
    }

    /// Legacy VTK export of the active leaves, each sampled on a
    /// `res^d` grid of linear cells.
    pub fn write_vtk(&self, path: &Path, res: usize, fields: &[PointField]) -> Result<()> {
        let text = self.vtk_string(res, fields);
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn vtk_string(&self, res: usize, fields: &[PointField]) -> String {
        let d = self.dim;
        let res = res.max(1);
        let per = |a: usize| if a < d { res + 1 } else { 1 };
        let npe = per(0) * per(1) * per(2);
        let leaves: Vec<usize> = self.active_leaves().collect();
        let mut pts = Vec::new();
        let mut scalars = vec![Vec::new(); fields.len()];
        let mut cell_info = Vec::new();
        for &e in &leaves {
            let net = self.element_net(e);
            for k in 0..per(2) {
                for j in 0..per(1) {
                    for i in 0..per(0) {
                        let t = [i as f64 / res as f64, j as f64 / res as f64, k as f64 / res as f64];
                        let mut tt = [0.0; 3];
                        tt[..d].copy_from_slice(&t[..d]);
                        pts.push(self.eval_element(e, &net, tt).0);
                        for (s, (_, f)) in scalars.iter_mut().zip(fields) {
                            s.push(f(e, tt));
                        }
                    }
                }
            }
            let mut sj = f64::INFINITY;
            for_each_sample(d, res, |t| {
                let (_, jac) = self.eval_element(e, &net, t);
                sj = sj.min(scaled_det(d, &jac));
            });
            cell_info.push((self.elements[e].level, self.elements[e].class, sj));
        }
        let mut out = String::new();
        let _ = writeln!(out, "# vtk DataFile Version 3.0\npht mesh\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(out, "POINTS {} double", pts.len());
        for p in &pts {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
        }
        let sub = |a: usize| if a < d { res } else { 1 };
        let ncell = leaves.len() * sub(0) * sub(1) * sub(2);
        let nv = 1 << d;
        let _ = writeln!(out, "CELLS {} {}", ncell, ncell * (nv + 1));
        let id = |i: usize, j: usize, k: usize| i + per(0) * (j + per(1) * k);
        for (li, _) in leaves.iter().enumerate() {
            let base = li * npe;
            for k in 0..sub(2) {
                for j in 0..sub(1) {
                    for i in 0..sub(0) {
                        let mut corners = vec![id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k)];
                        if d == 3 {
                            corners.extend([id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)]);
                        } else if d == 1 {
                            corners.truncate(2);
                        }
                        let _ = write!(out, "{}", nv);
                        for c in corners {
                            let _ = write!(out, " {}", base + c);
                        }
                        out.push('\n');
                    }
                }
            }
        }
        let ctype = match d {
            1 => 3,
            2 => 9,
            _ => 12,
        };
        let _ = writeln!(out, "CELL_TYPES {ncell}");
        for _ in 0..ncell {
            let _ = writeln!(out, "{ctype}");
        }
        let per_elem = ncell / leaves.len().max(1);
        let _ = writeln!(out, "CELL_DATA {ncell}");
        let class_id = |c: ElementClass| match c {
            ElementClass::Interior => 0,
            ElementClass::Boundary1 => 1,
            ElementClass::Boundary2 => 2,
            ElementClass::Exterior => 3,
            ElementClass::Unclassified => 4,
        };
        for (name, pick) in [("level", 0), ("class", 1), ("scaled_jacobian", 2)] {
            let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for &(lvl, class, sj) in &cell_info {
                let v = match pick {
                    0 => lvl as f64,
                    1 => class_id(class) as f64,
                    _ => sj,
                };
                for _ in 0..per_elem {
                    let _ = writeln!(out, "{v}");
                }
            }
        }
        if !fields.is_empty() {
            let _ = writeln!(out, "POINT_DATA {}", pts.len());
            for ((name, _), vals) in fields.iter().zip(&scalars) {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in vals {
                    let _ = writeln!(out, "{v}");
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = PhtMesh::tensor(2, &[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        m.refine_element(4).unwrap();
        m.set_class(0, ElementClass::Exterior);
        let p = dir.path().join("mesh.json");
        m.save(&p).unwrap();
        let back = PhtMesh::load(&p).unwrap();
        assert_eq!(back.num_functions(), m.num_functions());
        assert_eq!(back.element(0).class, ElementClass::Exterior);
        for u in [[0.3, 0.41, 0.0], [0.5, 0.5, 0.0]] {
            assert_eq!(back.map_point(u).unwrap(), m.map_point(u).unwrap());
        }
        let mut again = back.clone();
        let first = again.leaves().next().unwrap();
        again.refine_element(first).unwrap();
        assert_eq!(again.num_functions(), 4 * again.num_basis_vertices());
    }

    #[test]
    fn vtk_counts() {
        let m = PhtMesh::tensor(2, &[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let s = m.vtk_string(2, &[]);
        assert!(s.contains("POINTS 36 double"));
        assert!(s.contains("CELLS 16 80"));
    }
}
