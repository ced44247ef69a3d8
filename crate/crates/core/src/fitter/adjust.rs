use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::classify::{side, Direction, Marked};
use crate::error::{Error, Result};
use crate::geom::{axpy, dist, dot, norm, normalize, scale, smallest_eigenvector, sub, Vec3, ZERO};
use crate::levelset::{curvature_from, LevelSetField, GRAD_EPS};
use crate::pht::{solve_control_points, GeometricInfo, PhtMesh, VertexKey};
use crate::templates::arc_speed;

/// Residual at which the nearest-point search stops.
pub const NEWTON_STOP: f64 = 255e-6;

/// Bisection for `f(x) = threshold` on the straight segment `[a, b]`.
/// `tol` is relative to the segment length.
pub fn bisect(field: &LevelSetField, a: Vec3, b: Vec3, threshold: f64, tol: f64) -> Result<Vec3> {
    let g = |x: Vec3| field.evaluate(x).map(|v| v - threshold);
    let (fa, fb) = (g(a)?, g(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let at = |s: f64| axpy(a, s, sub(b, a));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = g(at(mid))?;
        if fm == 0.0 {
            return Ok(at(mid));
        }
        if fm.signum() == fa.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

/// Damped Newton projection of `x` onto the contour. Steps are limited to
/// `max_step`; coordinates listed in `fixed` are kept.
pub fn nearest_point(
    field: &LevelSetField,
    x: Vec3,
    threshold: f64,
    max_step: f64,
    fixed: &[usize],
) -> Result<Vec3> {
    let mut p = x;
    for _ in 0..100 {
        let v = field.evaluate(p)? - threshold;
        if v.abs() < NEWTON_STOP {
            return Ok(p);
        }
        let mut g = field.gradient(p)?;
        for &a in fixed {
            g[a] = 0.0;
        }
        let gg = dot(g, g);
        if gg.sqrt() <= GRAD_EPS {
            return Err(Error::DegenerateGradient(gg.sqrt()));
        }
        let mut step = scale(g, -v / gg);
        let len = norm(step);
        if len > max_step {
            step = scale(step, max_step / len);
        }
        let mut next = axpy(p, 1.0, step);
        // halve until the residual does not grow
        let mut tries = 0;
        while field.evaluate(next).map_or(true, |w| (w - threshold).abs() > v.abs()) && tries < 30 {
            step = scale(step, 0.5);
            next = axpy(p, 1.0, step);
            tries += 1;
        }
        p = next;
    }
    Err(Error::NoConvergence)
}

/// Where a marked vertex should move.
pub fn cut_location(
    mesh: &PhtMesh,
    field: &LevelSetField,
    m: &Marked,
    dir: &Direction,
    threshold: f64,
    tol: f64,
) -> Result<Vec3> {
    let start = mesh.geometric_info(m.key)?.value();
    let fixed = mesh.boundary_axes(&m.key);
    let project = |mut t: VertexKey| {
        for &a in &fixed {
            t[a] = m.key[a];
        }
        t
    };
    if let Direction::Segment { target, extend } = dir {
        for t in std::iter::once(*target).chain(*extend) {
            let t = project(t);
            if t == m.key {
                continue;
            }
            let end = mesh.geometric_info(t)?.value();
            match bisect(field, start, end, threshold, tol) {
                Ok(x) => return Ok(x),
                Err(Error::NoBracket) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let h = mesh
        .leaves_containing(m.key)
        .iter()
        .map(|&e| norm(mesh.element_size(e)))
        .fold(f64::INFINITY, f64::min);
    nearest_point(field, start, threshold, 0.25 * h, &fixed)
}

/// Outcome of the cut search at one vertex.
#[derive(Clone, Debug, Serialize)]
pub struct Cut {
    pub key: VertexKey,
    pub from: Vec3,
    pub point: Vec3,
    /// Unit normal of the contour pointing out of the low-intensity region.
    pub normal: Option<Vec3>,
    /// Level-set curvature: contour curvature (2D) or half the sum of
    /// principal curvatures (3D).
    pub curvature: f64,
}

/// How much of the computed data an adjusted vertex kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Full,
    TranslateOnly,
    Reverted,
}

/// Smallest edge length of the leaves around a vertex, in physical units
/// of the current map.
fn local_size(mesh: &PhtMesh, key: VertexKey) -> f64 {
    let d = mesh.dim();
    let mut h = f64::INFINITY;
    let info = mesh.geometric_info(key).ok();
    for e in mesh.leaves_containing(key) {
        let s = mesh.element_size(e);
        for a in 0..d {
            let speed = info.as_ref().map_or(1.0, |i| norm(i.first(a)));
            h = h.min(s[a] * speed);
        }
    }
    h
}

/// Contour data at a cut point.
pub fn describe_cut(
    mesh: &PhtMesh,
    field: &LevelSetField,
    key: VertexKey,
    from: Vec3,
    point: Vec3,
) -> Cut {
    let d = mesh.dim();
    let sample = field.sample(point).ok();
    let normal = sample.and_then(|s| if norm(s.gradient) > GRAD_EPS { normalize(s.gradient) } else { None });
    let div = sample.and_then(|s| curvature_from(&s).ok()).unwrap_or(0.0);
    let curvature = if d == 3 { 0.5 * div } else { div };
    Cut { key, from, point, normal, curvature }
}

/// Mesh queries around one vertex for the Hermite construction.
struct Around {
    /// Per axis, neighbours joined by an edge on the active/inactive interface.
    tangential: Vec<(usize, Vec<(i64, VertexKey)>)>,
    /// Active minus inactive leaf sides.
    balance: [i64; 3],
}

fn edge_is_interface(mesh: &PhtMesh, a: VertexKey, b: VertexKey) -> bool {
    let mut mid = a;
    for i in 0..3 {
        mid[i] = (a[i] + b[i]) / 2;
    }
    let (mut act, mut inact) = (false, false);
    for e in mesh.leaves_containing(mid) {
        if mesh.element(e).class.is_active() {
            act = true;
        } else {
            inact = true;
        }
    }
    act && inact
}

fn around(mesh: &PhtMesh, key: VertexKey) -> Around {
    let d = mesh.dim();
    let mut tangential = Vec::new();
    for a in 0..d {
        let mut n = Vec::new();
        for dir in [-1, 1] {
            if let Some(w) = mesh.edge_neighbor(key, a, dir) {
                if edge_is_interface(mesh, key, w) {
                    n.push((dir, w));
                }
            }
        }
        if !n.is_empty() {
            tangential.push((a, n));
        }
    }
    let mut balance = [0; 3];
    for e in mesh.leaves_containing(key) {
        let s = side(mesh, e, &key);
        let sign = if mesh.element(e).class.is_active() { 1 } else { -1 };
        for a in 0..d {
            balance[a] += sign * s[a];
        }
    }
    Around { tangential, balance }
}

fn project_out(v: Vec3, n: Vec3) -> Vec3 {
    axpy(v, -dot(v, n), n)
}

/// Normal and curvature of the contour at `x` from the chords to
/// neighbouring boundary points: the normal is the direction the unit
/// chords spread least along, oriented like `reference`; the curvature is
/// the mean of `-2 c·n / |c|²` (positive for convex regions).
pub fn chord_estimate(dim: usize, chords: &[Vec3], reference: Vec3) -> Option<(Vec3, f64)> {
    if chords.len() < dim {
        return None;
    }
    let mut m = [[0.0; 3]; 3];
    for c in chords {
        let u = normalize(*c)?;
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] += u[i] * u[j];
            }
        }
    }
    let mut n = smallest_eigenvector(&m, dim);
    if dot(n, reference) < 0.0 {
        n = scale(n, -1.0);
    }
    // the unit chords must span the tangent space
    let spread: f64 = chords.iter().map(|c| norm(project_out(normalize(*c).unwrap(), n))).sum();
    if spread < 0.5 * (dim - 1) as f64 {
        return None;
    }
    let k = chords.iter().map(|c| -2.0 * dot(*c, n) / dot(*c, *c)).sum::<f64>() / chords.len() as f64;
    Some((n, k))
}

/// New Hermite data at an adjusted vertex. `positions` holds the new
/// location of every vertex adjusted in this pass.
pub fn hermite_data(
    mesh: &PhtMesh,
    cut: &Cut,
    positions: &BTreeMap<VertexKey, Vec3>,
    eps_sep: f64,
    radius_clamp: f64,
) -> Result<GeometricInfo> {
    let d = mesh.dim();
    let old = mesh.geometric_info(cut.key)?;
    let mut info = old.clone();
    info.data[0] = cut.point;
    let Some(field_normal) = cut.normal else {
        return Ok(info);
    };
    let ar = around(mesh, cut.key);
    if ar.tangential.is_empty() {
        return Ok(info);
    }
    let pos = |k: VertexKey| -> Result<Vec3> {
        match positions.get(&k) {
            Some(p) => Ok(*p),
            None => mesh.geometric_info(k).map(|i| i.value()),
        }
    };
    let mut chords = Vec::new();
    for (_, nbrs) in &ar.tangential {
        for &(_, w) in nbrs {
            chords.push(sub(pos(w)?, cut.point));
        }
    }
    let h = local_size(mesh, cut.key);
    let (n, curvature) = chord_estimate(d, &chords, field_normal).unwrap_or((field_normal, cut.curvature));
    let radius = if curvature != 0.0 { 1.0 / curvature.abs() } else { f64::INFINITY };
    let radius = radius.clamp(h / radius_clamp, radius_clamp * h);
    let curvature = curvature.signum() * curvature.abs().min(1.0 / radius);
    let tang: BTreeSet<usize> = ar.tangential.iter().map(|t| t.0).collect();
    for (a, nbrs) in &ar.tangential {
        let mut chord = ZERO;
        let mut speed = 0.0;
        for &(dir, w) in nbrs {
            let pw = pos(w)?;
            let c = sub(pw, cut.point);
            chord = axpy(chord, dir as f64, scale(c, 1.0 / norm(c).max(1e-300)));
            let h = mesh.param(w)[*a] - mesh.param(cut.key)[*a];
            let len = norm(c);
            let theta = 2.0 * (len / (2.0 * radius)).min(1.0).asin();
            speed += arc_speed(radius, theta, h.abs());
        }
        speed /= nbrs.len() as f64;
        let tau = normalize(project_out(chord, n))
            .or_else(|| normalize(project_out(old.first(*a), n)))
            .ok_or_else(|| Error::InvalidArgument("tangent direction undefined".into()))?;
        info.data[1 << a] = scale(tau, speed);
    }
    let flat = tang.len() + 1 == d;
    for m in 0..d {
        if tang.contains(&m) {
            continue;
        }
        if flat {
            let f = old.first(m);
            let s = if dot(f, n) >= 0.0 { 1.0 } else { -1.0 };
            info.data[1 << m] = scale(n, s * norm(f));
        }
    }
    for idx in 0..1usize << d {
        if idx.count_ones() < 2 {
            continue;
        }
        info.data[idx] = ZERO;
        if flat && idx.count_ones() == 2 {
            let axes: Vec<usize> = (0..d).filter(|&a| idx >> a & 1 == 1).collect();
            let t = axes.iter().copied().find(|a| tang.contains(a));
            let m = axes.iter().copied().find(|a| !tang.contains(a));
            if let (Some(t), Some(m)) = (t, m) {
                let fm = dot(info.first(m), n);
                info.data[idx] = scale(info.first(t), curvature * fm);
            }
        }
    }
    if tang.len() == d {
        // corner of the active region: tilt the antiparallel tangents apart
        let delta = 2.0 * eps_sep;
        for a in 0..d {
            let g = ar.balance[a].signum();
            if g != 0 {
                let f = info.first(a);
                info.data[1 << a] = axpy(f, -(g as f64) * delta * norm(f), n);
            }
        }
        if d == 2 {
            let mut toward = [0.0; 2];
            for (a, nbrs) in &ar.tangential {
                toward[*a] = nbrs.iter().map(|&(dir, _)| dir as f64).sum::<f64>().signum();
            }
            info.data[3] = scale(n, corner_twist(&info, n, curvature, toward));
        }
    }
    constrain_to_faces(mesh, cut.key, &old, &mut info);
    Ok(info)
}

/// Normal twist `F_uv = x n` at a 2D corner so that `det J` does not
/// decrease when leaving the vertex along either boundary edge. The edges
/// are taken as arcs of curvature `kappa`, so `F_aa = -kappa |F_a|² n`.
/// `toward[a]` is the direction of the boundary neighbour along axis `a`.
fn corner_twist(info: &GeometricInfo, n: Vec3, kappa: f64, toward: [f64; 2]) -> f64 {
    let det2 = |p: Vec3, q: Vec3| p[0] * q[1] - p[1] * q[0];
    let (f0, f1) = (info.first(0), info.first(1));
    let acc = |f: Vec3| scale(n, -kappa * dot(f, f));
    // ∂_0 det = det(F_00, F_1) + x det(F_0, n), ∂_1 det = x det(n, F_1) + det(F_0, F_11)
    let rows = [(det2(acc(f0), f1), det2(f0, n), toward[0]), (det2(f0, acc(f1)), det2(n, f1), toward[1])];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(r, g, s) in &rows {
        if s == 0.0 || (s * g).abs() < 1e-300 {
            continue;
        }
        let x = -r / g;
        if s * g > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
    }
    if lo <= hi {
        0.0f64.clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Keep domain-boundary faces planar: on the face `u_a = const`, the
/// coordinate `a` of the position and of every derivative without a
/// component along `a` is unchanged from `old`.
fn constrain_to_faces(mesh: &PhtMesh, key: VertexKey, old: &GeometricInfo, info: &mut GeometricInfo) {
    for a in mesh.boundary_axes(&key) {
        for idx in 0..info.data.len() {
            if idx >> a & 1 == 0 {
                info.data[idx][a] = old.data[idx][a];
            }
        }
    }
}

/// Data that moves the vertex without changing its derivatives.
pub fn translated(mesh: &PhtMesh, key: VertexKey, point: Vec3) -> Result<GeometricInfo> {
    let old = mesh.geometric_info(key)?;
    let mut info = old.clone();
    info.data[0] = point;
    constrain_to_faces(mesh, key, &old, &mut info);
    Ok(info)
}

/// Replace the control points of the functions at `key` so the map takes
/// on `info` there. Returns the previous control points.
pub fn apply_info(mesh: &mut PhtMesh, key: VertexKey, info: &GeometricInfo) -> Vec<Vec3> {
    let fns = mesh.vertex_functions(&key).expect("basis vertex").to_vec();
    let gaps = mesh.function(fns[0]).gaps;
    let controls = solve_control_points(info, &gaps);
    let old: Vec<Vec3> = fns.iter().map(|&f| mesh.control(f)).collect();
    // functions are stored by corner bits
    for &f in &fns {
        let c = mesh.function(f).corner;
        mesh.set_control(f, controls[c]);
    }
    old
}

fn restore(mesh: &mut PhtMesh, key: VertexKey, old: &[Vec3]) {
    let fns = mesh.vertex_functions(&key).expect("basis vertex").to_vec();
    for (&f, &p) in fns.iter().zip(old) {
        mesh.set_control(f, p);
    }
}

/// Active leaves whose map depends on the functions at `key`.
fn affected(mesh: &PhtMesh, key: VertexKey) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &f in mesh.vertex_functions(&key).unwrap_or(&[]) {
        out.extend(mesh.function(f).support().filter(|&e| mesh.element(e).class.is_active()));
    }
    out
}

/// Positivity verdicts per element, dropped when the element's net changes.
#[derive(Default)]
struct Validity(HashMap<usize, bool>);

impl Validity {
    fn check(&mut self, mesh: &PhtMesh, elems: &BTreeSet<usize>) -> bool {
        elems.iter().all(|&e| *self.0.entry(e).or_insert_with(|| mesh.jacobian_positive(e)))
    }

    fn forget(&mut self, elems: &BTreeSet<usize>) {
        for e in elems {
            self.0.remove(e);
        }
    }
}

/// Apply all adjustments, then fall back per vertex to translation and
/// finally to no change wherever an active element is inverted.
pub fn apply_adjustments(
    mesh: &mut PhtMesh,
    data: &[(VertexKey, GeometricInfo, GeometricInfo)],
) -> Vec<Outcome> {
    let mut saved = Vec::with_capacity(data.len());
    for (key, full, _) in data {
        saved.push(apply_info(mesh, *key, full));
    }
    let mut outcome = vec![Outcome::Full; data.len()];
    let around: Vec<BTreeSet<usize>> = data.iter().map(|(key, _, _)| affected(mesh, *key)).collect();
    let mut cache = Validity::default();
    for stage in [Outcome::TranslateOnly, Outcome::Reverted] {
        let mut changed = true;
        while changed {
            changed = false;
            for (i, (key, _, trans)) in data.iter().enumerate() {
                if outcome[i] == Outcome::Reverted || outcome[i] == stage {
                    continue;
                }
                if cache.check(mesh, &around[i]) {
                    continue;
                }
                cache.forget(&around[i]);
                match stage {
                    Outcome::TranslateOnly => {
                        apply_info(mesh, *key, trans);
                    }
                    _ => restore(mesh, *key, &saved[i]),
                }
                outcome[i] = stage;
                changed = true;
            }
        }
    }
    outcome
}

/// One Jacobi smoothing step for a point and its neighbours.
pub fn laplacian_step(p: Vec3, neighbors: &[Vec3], lambda: f64) -> Vec3 {
    if neighbors.is_empty() {
        return p;
    }
    let mut avg = ZERO;
    for q in neighbors {
        avg = axpy(avg, 1.0 / neighbors.len() as f64, *q);
    }
    axpy(p, lambda, sub(avg, p))
}

/// Laplacian smoothing of the free vertices of active elements. Each
/// vertex's control points translate rigidly.
pub fn smooth(
    mesh: &mut PhtMesh,
    pinned: &BTreeSet<VertexKey>,
    lambda: f64,
    iterations: usize,
) -> Result<()> {
    let d = mesh.dim();
    let mut free = BTreeSet::new();
    for e in mesh.active_leaves() {
        for bits in 0..1usize << d {
            let k = mesh.element(e).corner(bits);
            if !pinned.contains(&k) && !mesh.on_domain_boundary(&k) && mesh.vertex_functions(&k).is_some() {
                free.insert(k);
            }
        }
    }
    for _ in 0..iterations {
        let mut moves = Vec::with_capacity(free.len());
        for &k in &free {
            let p = mesh.geometric_info(k)?.value();
            let mut nb = Vec::new();
            for a in 0..d {
                for dir in [-1, 1] {
                    if let Some(w) = mesh.edge_neighbor(k, a, dir) {
                        nb.push(mesh.map_point(mesh.param(w))?);
                    }
                }
            }
            moves.push((k, sub(laplacian_step(p, &nb, lambda), p)));
        }
        moves.retain(|(_, delta)| norm(*delta) > 0.0);
        let around: Vec<BTreeSet<usize>> = moves.iter().map(|(k, _)| affected(mesh, *k)).collect();
        for &(k, delta) in &moves {
            shift(mesh, k, delta);
        }
        // undo the moves around elements the step inverted
        let mut cache = Validity::default();
        let mut kept = vec![true; moves.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for (i, &(k, delta)) in moves.iter().enumerate() {
                if kept[i] && !cache.check(mesh, &around[i]) {
                    shift(mesh, k, scale(delta, -1.0));
                    cache.forget(&around[i]);
                    kept[i] = false;
                    changed = true;
                }
            }
        }
    }
    Ok(())
}

fn shift(mesh: &mut PhtMesh, key: VertexKey, delta: Vec3) {
    for f in mesh.vertex_functions(&key).unwrap().to_vec() {
        let c = mesh.control(f);
        mesh.set_control(f, axpy(c, 1.0, delta));
    }
}

/// Distance moved by each cut, for reporting.
pub fn displacement(cut: &Cut) -> f64 {
    dist(cut.from, cut.point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(dim: usize) -> LevelSetField {
        // f = 10 x over a 32-voxel box
        let n = 32;
        let dims = if dim == 2 { [n, n, 1] } else { [n, n, n] };
        let mut v = Vec::new();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let _ = (j, k);
                    v.push(10.0 * (i as f64 + 0.5));
                }
            }
        }
        LevelSetField::from_values(dim, dims, [1.0; 3], &v, 3)
    }

    #[test]
    fn bisection_meets_tolerance() {
        let f = ramp(2);
        let x = bisect(&f, [2.0, 5.0, 0.0], [30.0, 5.0, 0.0], 200.0, 1e-9).unwrap();
        assert!((f.evaluate(x).unwrap() - 200.0).abs() < 255e-4);
        assert!((x[0] - 20.0).abs() < 1e-6);
        assert!(matches!(bisect(&f, [2.0, 5.0, 0.0], [3.0, 5.0, 0.0], 200.0, 1e-9), Err(Error::NoBracket)));
    }

    #[test]
    fn newton_projection() {
        let f = ramp(2);
        let x = nearest_point(&f, [25.0, 7.0, 0.0], 200.0, 2.0, &[]).unwrap();
        assert!((f.evaluate(x).unwrap() - 200.0).abs() < 255e-6);
        assert!((x[1] - 7.0).abs() < 1e-9);
    }

    #[test]
    fn laplacian_example() {
        let p = laplacian_step([0.0; 3], &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 0.1);
        assert!(dist(p, [0.05, 0.05, 0.0]) < 1e-15);
    }

    #[test]
    fn apply_reproduces_info() {
        let mut m = PhtMesh::tensor(2, &[3, 3], &[0.0, 0.0], &[3.0, 3.0]).unwrap();
        let r = crate::pht::ROOT_SIZE;
        let key = [r, r, 0];
        let mut info = m.geometric_info(key).unwrap();
        info.data[0] = [1.2, 0.9, 0.0];
        info.data[1] = [0.9, 0.1, 0.0];
        info.data[3] = [0.05, -0.02, 0.0];
        apply_info(&mut m, key, &info);
        let back = m.geometric_info(key).unwrap();
        for (a, b) in back.data.iter().zip(&info.data) {
            assert!(dist(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn inverted_adjustment_is_reverted() {
        let mut m = PhtMesh::tensor(2, &[3, 3], &[0.0, 0.0], &[3.0, 3.0]).unwrap();
        let r = crate::pht::ROOT_SIZE;
        let key = [r, r, 0];
        let before = m.geometric_info(key).unwrap();
        let mut bad = before.clone();
        bad.data[0] = [2.9, 2.9, 0.0];
        let out = apply_adjustments(&mut m, &[(key, bad.clone(), bad)]);
        assert_eq!(out, vec![Outcome::Reverted]);
        assert_eq!(m.geometric_info(key).unwrap(), before);
    }

    #[test]
    fn smoothing_keeps_pinned_and_boundary() {
        let mut m = PhtMesh::tensor(2, &[3, 3], &[0.0, 0.0], &[3.0, 3.0]).unwrap();
        let r = crate::pht::ROOT_SIZE;
        let moved = [r, r, 0];
        let mut info = m.geometric_info(moved).unwrap();
        info.data[0] = [1.3, 1.0, 0.0];
        apply_info(&mut m, moved, &info);
        let pinned: BTreeSet<VertexKey> = [moved].into();
        smooth(&mut m, &pinned, 0.1, 3).unwrap();
        assert!(dist(m.geometric_info(moved).unwrap().value(), [1.3, 1.0, 0.0]) < 1e-12);
        assert!(dist(m.geometric_info([0, r, 0]).unwrap().value(), [0.0, 1.0, 0.0]) < 1e-12);
        // (2, 1) moves towards its neighbour average, x = 2.075 at the start
        let p = m.geometric_info([2 * r, r, 0]).unwrap().value();
        assert!(p[0] > 2.0 && p[0] < 2.075, "{p:?}");
    }
}
