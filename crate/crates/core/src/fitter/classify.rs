use std::collections::BTreeMap;

use serde::Serialize;

use crate::geom::Vec3;
use crate::levelset::LevelSetField;
use crate::pht::{ElementClass, PhtMesh, VertexKey};

/// Element counts per class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub interior: usize,
    pub boundary1: usize,
    pub boundary2: usize,
    pub exterior: usize,
}

impl ClassCounts {
    pub fn active(&self) -> usize {
        self.interior + self.boundary1
    }

    pub fn total(&self) -> usize {
        self.interior + self.boundary1 + self.boundary2 + self.exterior
    }
}

/// A point is internal when it lies in the field domain below the threshold.
pub fn is_internal(field: &LevelSetField, x: Vec3, threshold: f64) -> bool {
    field.evaluate(x).is_ok_and(|v| v < threshold)
}

/// Class from the number of internal samples out of `total`.
pub fn class_from_counts(internal: usize, total: usize, percent: f64) -> ElementClass {
    if internal == total {
        ElementClass::Interior
    } else if internal == 0 {
        ElementClass::Exterior
    } else if 100.0 * internal as f64 > percent * total as f64 {
        ElementClass::Boundary1
    } else {
        ElementClass::Boundary2
    }
}

/// Local sample coordinates `i / (s - 1)` per axis, element boundary included.
pub fn sample_grid(dim: usize, s: usize) -> Vec<Vec3> {
    let s = s.max(2);
    let n = |a: usize| if a < dim { s } else { 1 };
    let mut out = Vec::with_capacity(s.pow(dim as u32));
    for k in 0..n(2) {
        for j in 0..n(1) {
            for i in 0..n(0) {
                let m = [i, j, k];
                let mut t = [0.0; 3];
                for a in 0..dim {
                    t[a] = m[a] as f64 / (s - 1) as f64;
                }
                out.push(t);
            }
        }
    }
    out
}

/// Classify every leaf by sampling the field through the current geometry.
pub fn classify_elements(
    mesh: &mut PhtMesh,
    field: &LevelSetField,
    threshold: f64,
    percent: f64,
    samples: usize,
) -> ClassCounts {
    let grid = sample_grid(mesh.dim(), samples);
    let leaves: Vec<usize> = mesh.leaves().collect();
    let mut counts = ClassCounts::default();
    for e in leaves {
        let net = mesh.element_net(e);
        let internal = grid
            .iter()
            .filter(|&&t| is_internal(field, mesh.eval_element(e, &net, t).0, threshold))
            .count();
        let class = class_from_counts(internal, grid.len(), percent);
        match class {
            ElementClass::Interior => counts.interior += 1,
            ElementClass::Boundary1 => counts.boundary1 += 1,
            ElementClass::Boundary2 => counts.boundary2 += 1,
            _ => counts.exterior += 1,
        }
        mesh.set_class(e, class);
    }
    counts
}

/// A vertex selected for adjustment.
#[derive(Clone, Debug, PartialEq)]
pub struct Marked {
    pub key: VertexKey,
    /// `Boundary1` for vertices outside the contour, `Boundary2` for inside.
    pub kind: ElementClass,
    /// Leaves of class `kind` having the vertex as a corner.
    pub owners: Vec<usize>,
}

/// Corners of B1 elements lying outside the contour and corners of B2
/// elements lying inside, in lexicographic order of their lattice keys.
pub fn mark_adjustable_vertices(mesh: &PhtMesh, field: &LevelSetField, threshold: f64) -> Vec<Marked> {
    let mut found: BTreeMap<VertexKey, ElementClass> = BTreeMap::new();
    for e in mesh.leaves() {
        let class = mesh.element(e).class;
        if !matches!(class, ElementClass::Boundary1 | ElementClass::Boundary2) {
            continue;
        }
        for bits in 0..1usize << mesh.dim() {
            let key = mesh.element(e).corner(bits);
            if found.contains_key(&key) || mesh.vertex_functions(&key).is_none() {
                continue;
            }
            let Ok(info) = mesh.geometric_info(key) else { continue };
            let inside = is_internal(field, info.value(), threshold);
            if (class == ElementClass::Boundary1) != inside {
                found.insert(key, class);
            }
        }
    }
    found
        .into_iter()
        .map(|(key, kind)| {
            let owners = mesh
                .leaves_containing(key)
                .into_iter()
                .filter(|&e| mesh.element(e).class == kind)
                .collect();
            Marked { key, kind, owners }
        })
        .collect()
}

/// Search direction for a marked vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    /// Bisect along the segment towards `target`; if it has no sign change,
    /// retry once towards `extend`.
    Segment { target: VertexKey, extend: Option<VertexKey> },
    Nearest,
}

fn opposite(mesh: &PhtMesh, e: usize, key: &VertexKey) -> VertexKey {
    let el = mesh.element(e);
    let mut o = *key;
    for a in 0..mesh.dim() {
        o[a] = if key[a] == el.lo[a] { el.lo[a] + el.size } else { el.lo[a] };
    }
    o
}

/// Sign of leaf `e` relative to `key` along each axis.
pub fn side(mesh: &PhtMesh, e: usize, key: &VertexKey) -> [i64; 3] {
    let el = mesh.element(e);
    let mut s = [0; 3];
    for a in 0..mesh.dim() {
        s[a] = if el.lo[a] >= key[a] { 1 } else { -1 };
    }
    s
}

/// Walk from `key` towards `target` only along the axes in `axes`, stopping
/// at the shorter of the owners' edges.
fn partial_target(mesh: &PhtMesh, owners: &[usize], key: &VertexKey, axes: &[usize]) -> VertexKey {
    let size = owners.iter().map(|&e| mesh.element(e).size).min().unwrap();
    let s = side(mesh, owners[0], key);
    let mut t = *key;
    for &a in axes {
        t[a] += s[a] * size;
    }
    t
}

/// Direction rules by the number and arrangement of same-type owners.
pub fn adjust_direction(mesh: &PhtMesh, m: &Marked) -> Direction {
    let d = mesh.dim();
    let owners = &m.owners;
    if owners.is_empty() {
        return Direction::Nearest;
    }
    let sides: Vec<[i64; 3]> = owners.iter().map(|&e| side(mesh, e, &m.key)).collect();
    // axes on which all owners lie on the same side of the vertex
    let common: Vec<usize> = (0..d).filter(|&a| sides.iter().all(|s| s[a] == sides[0][a])).collect();
    let diag = |e: usize| opposite(mesh, e, &m.key);
    match (d, owners.len()) {
        (_, 1) => Direction::Segment { target: diag(owners[0]), extend: None },
        (2, 2) if common.len() == 1 => {
            Direction::Segment { target: partial_target(mesh, owners, &m.key, &common), extend: Some(diag(owners[0])) }
        }
        (2, 2) => Direction::Segment { target: diag(owners[0]), extend: None },
        (2, 3) => {
            // the middle cell shares an edge with both others
            let mid = (0..3)
                .find(|&i| (0..3).filter(|&j| j != i).all(|j| (0..2).filter(|&a| sides[i][a] != sides[j][a]).count() == 1))
                .unwrap_or(0);
            Direction::Segment { target: diag(owners[mid]), extend: None }
        }
        (3, 2) if common.len() == 2 => {
            Direction::Segment { target: partial_target(mesh, owners, &m.key, &common), extend: Some(diag(owners[0])) }
        }
        (3, 4) if common.len() == 1 => {
            Direction::Segment { target: partial_target(mesh, owners, &m.key, &common), extend: Some(diag(owners[0])) }
        }
        _ => Direction::Nearest,
    }
}
