//! Boundary fitting of a PHT mesh to the threshold contour of a level set.
//!
//! Each level classifies the leaves against the contour, moves the marked
//! vertices onto it with template-shaped Hermite data, smooths the free
//! vertices and refines the boundary elements for the next level.

mod adjust;
mod classify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::{debug, info};
use serde::Serialize;

pub use adjust::{
    apply_adjustments, apply_info, bisect, chord_estimate, cut_location, describe_cut, displacement, hermite_data, laplacian_step,
    nearest_point, smooth, translated, Cut, Outcome, NEWTON_STOP,
};
pub use classify::{
    adjust_direction, class_from_counts, classify_elements, is_internal, mark_adjustable_vertices, sample_grid,
    side, ClassCounts, Direction, Marked,
};

use crate::error::{Error, Result};
use crate::geom::{norm, Vec3};
use crate::image_io::Shape;
use crate::levelset::LevelSetField;
use crate::pht::{ElementClass, PhtMesh, VertexKey};
use crate::templates::DEFAULT_EPS_SEP;

#[derive(Clone, Debug, Serialize)]
pub struct FitConfig {
    /// Intensity separating inside (below) from outside.
    pub threshold: f64,
    /// Percentage of internal samples above which a cut element is kept.
    pub percent: f64,
    /// Classification samples per axis.
    pub samples: usize,
    pub lambda: f64,
    pub smooth_iterations: usize,
    /// Number of boundary refinements after the initial level.
    pub levels: usize,
    /// Bisection tolerance relative to the search segment.
    pub bisect_tol: f64,
    pub radius_clamp: f64,
    pub eps_sep: f64,
    /// Move vertices onto the contour; without it only classification runs.
    pub adjust: bool,
    /// Samples per axis, element boundary included, for scaled Jacobian checks.
    pub jacobian_samples: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            threshold: 200.0,
            percent: 50.0,
            samples: 5,
            lambda: 0.1,
            smooth_iterations: 3,
            levels: 2,
            bisect_tol: 1e-6,
            radius_clamp: 10.0,
            eps_sep: DEFAULT_EPS_SEP,
            adjust: true,
            jacobian_samples: 9,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.threshold > 0.0 && self.threshold < 255.0) {
            return bad("threshold must lie in (0, 255)");
        }
        if !(self.percent > 0.0 && self.percent < 100.0) {
            return bad("percent must lie in (0, 100)");
        }
        if self.samples < 2 {
            return bad("need at least 2 samples per axis");
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad("lambda must lie in (0, 1)");
        }
        if !(self.bisect_tol > 0.0 && self.bisect_tol < 1.0) {
            return bad("bisection tolerance must lie in (0, 1)");
        }
        if !(self.radius_clamp >= 1.0) {
            return bad("radius clamp must be at least 1");
        }
        if !(0.0..=0.05).contains(&self.eps_sep) {
            return bad("separation must lie in [0, 0.05]");
        }
        Ok(())
    }
}

/// Statistics of one fitting level.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub leaves: usize,
    pub functions: usize,
    pub counts: ClassCounts,
    pub marked: usize,
    pub adjusted: usize,
    pub translate_only: usize,
    pub reverted: usize,
    pub failed_cuts: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub min_scaled_jacobian: f64,
}

pub struct FitResult {
    pub mesh: PhtMesh,
    pub reports: Vec<LevelReport>,
    /// Cut records per level.
    pub cuts: Vec<Vec<Cut>>,
}

impl FitResult {
    pub fn csv(&self) -> String {
        report_csv(&self.reports)
    }
}

pub fn report_csv(reports: &[LevelReport]) -> String {
    let mut s = String::from("level,active,b1,b2,max_error,mean_error,min_scaled_jacobian\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6e},{:.6e},{:.6}",
            r.level,
            r.counts.active(),
            r.counts.boundary1,
            r.counts.boundary2,
            r.max_error,
            r.mean_error,
            r.min_scaled_jacobian
        );
    }
    s
}

/// Tensor mesh over the field's extent with identity geometry.
pub fn initial_mesh(field: &LevelSetField, n: &[usize]) -> Result<PhtMesh> {
    let d = field.dim();
    let ext = field.extent();
    PhtMesh::tensor(d, n, &vec![0.0; d], &ext[..d])
}

/// Classify, mark, adjust and smooth once on the current mesh.
pub fn fit_level(
    mesh: &mut PhtMesh,
    field: &LevelSetField,
    cfg: &FitConfig,
    level: usize,
) -> Result<(LevelReport, Vec<Cut>)> {
    let counts = classify_elements(mesh, field, cfg.threshold, cfg.percent, cfg.samples);
    let mut report = LevelReport { level, counts, ..Default::default() };
    let mut cuts = Vec::new();
    if cfg.adjust {
        let marks = mark_adjustable_vertices(mesh, field, cfg.threshold);
        report.marked = marks.len();
        let mut positions = BTreeMap::new();
        for m in &marks {
            let dir = adjust_direction(mesh, m);
            let from = mesh.geometric_info(m.key)?.value();
            match cut_location(mesh, field, m, &dir, cfg.threshold, cfg.bisect_tol) {
                Ok(x) => {
                    positions.insert(m.key, x);
                    cuts.push(describe_cut(mesh, field, m.key, from, x));
                }
                Err(e) => {
                    debug!("no cut for vertex {:?}: {e}", m.key);
                    report.failed_cuts += 1;
                }
            }
        }
        let mut data = Vec::with_capacity(cuts.len());
        for c in &cuts {
            let full = hermite_data(mesh, c, &positions, cfg.eps_sep, cfg.radius_clamp)?;
            let trans = translated(mesh, c.key, c.point)?;
            data.push((c.key, full, trans));
        }
        let outcomes = apply_adjustments(mesh, &data);
        let mut pinned = BTreeSet::new();
        for (c, o) in cuts.iter().zip(&outcomes) {
            match o {
                Outcome::Full => report.adjusted += 1,
                Outcome::TranslateOnly => report.translate_only += 1,
                Outcome::Reverted => report.reverted += 1,
            }
            if *o != Outcome::Reverted {
                pinned.insert(c.key);
            }
        }
        smooth(mesh, &pinned, cfg.lambda, cfg.smooth_iterations)?;
    }
    report.leaves = mesh.leaves().count();
    report.functions = mesh.num_functions();
    Ok((report, cuts))
}

/// Fit `levels + 1` times, refining the boundary elements in between.
pub fn fit(field: &LevelSetField, n: &[usize], cfg: &FitConfig, reference: Option<&Shape>) -> Result<FitResult> {
    cfg.validate()?;
    let mut mesh = initial_mesh(field, n)?;
    let mut reports = Vec::new();
    let mut all_cuts = Vec::new();
    for level in 0..=cfg.levels {
        let (mut report, cuts) = fit_level(&mut mesh, field, cfg, level).map_err(|e| e.in_stage("fit"))?;
        let (max, mean) = boundary_error(&mesh, field, cfg.threshold, reference, 9);
        report.max_error = max;
        report.mean_error = mean;
        report.min_scaled_jacobian = mesh.min_scaled_jacobian(cfg.jacobian_samples);
        info!(
            "level {level}: {} active, {} B1, {} B2, max error {:.4e}, min scaled Jacobian {:.4}",
            report.counts.active(),
            report.counts.boundary1,
            report.counts.boundary2,
            max,
            report.min_scaled_jacobian
        );
        reports.push(report);
        all_cuts.push(cuts);
        if level < cfg.levels {
            refine_boundary(&mut mesh)?;
        }
    }
    Ok(FitResult { mesh, reports, cuts: all_cuts })
}

/// Refine every B1/B2 leaf and the leaves sharing a face with one.
pub fn refine_boundary(mesh: &mut PhtMesh) -> Result<usize> {
    let d = mesh.dim();
    let cut: Vec<usize> = mesh
        .leaves()
        .filter(|&e| matches!(mesh.element(e).class, ElementClass::Boundary1 | ElementClass::Boundary2))
        .collect();
    let mut targets: BTreeSet<usize> = cut.iter().copied().collect();
    for &e in &cut {
        let el = mesh.element(e);
        let (lo, size) = (el.lo, el.size);
        let mut hi = lo;
        for a in 0..d {
            hi[a] += size;
        }
        for n in mesh.leaves_touching(lo, hi) {
            let nl = mesh.element(n);
            let overlap = (0..d).filter(|&a| nl.lo[a] < hi[a] && nl.lo[a] + nl.size > lo[a]).count();
            if overlap + 1 == d {
                targets.insert(n);
            }
        }
    }
    let targets: Vec<usize> = targets.into_iter().collect();
    mesh.refine_elements(&targets)?;
    Ok(targets.len())
}

/// Sample the faces between active and inactive leaves that are not on the
/// domain boundary, `per_axis` points along each face direction.
pub fn interface_points(mesh: &PhtMesh, per_axis: usize) -> Vec<Vec3> {
    let d = mesh.dim();
    let (dlo, dhi) = mesh.domain();
    let mut out = Vec::new();
    let n = per_axis.max(2);
    for e in mesh.active_leaves() {
        let (lo, hi) = mesh.element_box(e);
        let net = mesh.element_net(e);
        for a in 0..d {
            for upper in [false, true] {
                let fixed = if upper { hi[a] } else { lo[a] };
                if (fixed - dlo[a]).abs() < 1e-12 * (dhi[a] - dlo[a]) || (fixed - dhi[a]).abs() < 1e-12 * (dhi[a] - dlo[a]) {
                    continue;
                }
                let others: Vec<usize> = (0..d).filter(|&b| b != a).collect();
                let m = if others.len() == 2 { n } else { 1 };
                for i in 0..n {
                    for j in 0..m {
                        let s = [i as f64 / (n - 1) as f64, j as f64 / (m.max(2) - 1) as f64];
                        let mut t = [0.0; 3];
                        t[a] = if upper { 1.0 } else { 0.0 };
                        let mut probe = [0.0; 3];
                        for (k, &b) in others.iter().enumerate() {
                            t[b] = s[k];
                            probe[b] = lo[b] + s[k] * (hi[b] - lo[b]);
                        }
                        let h = hi[a] - lo[a];
                        probe[a] = fixed + if upper { 1e-6 * h } else { -1e-6 * h };
                        let Ok((nb, _)) = mesh.locate(probe) else { continue };
                        if mesh.element(nb).class.is_active() {
                            continue;
                        }
                        out.push(mesh.eval_element(e, &net, t).0);
                    }
                }
            }
        }
    }
    out
}

/// Max and mean distance of interface samples to the reference boundary,
/// or to the contour (first-order estimate) without one.
pub fn boundary_error(
    mesh: &PhtMesh,
    field: &LevelSetField,
    threshold: f64,
    reference: Option<&Shape>,
    per_axis: usize,
) -> (f64, f64) {
    let pts = interface_points(mesh, per_axis);
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    let dist = |x: Vec3| match reference {
        Some(s) => s.boundary_distance(x),
        None => match field.sample(x) {
            Ok(s) => (s.value - threshold).abs() / norm(s.gradient).max(1e-12),
            Err(_) => f64::INFINITY,
        },
    };
    let d: Vec<f64> = pts.into_iter().map(dist).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    (max, d.iter().sum::<f64>() / d.len() as f64)
}

/// Vertices adjusted at some level, with their latest cut.
pub fn adjusted_vertices(result: &FitResult) -> BTreeMap<VertexKey, Cut> {
    let mut out = BTreeMap::new();
    for level in &result.cuts {
        for c in level {
            out.insert(c.key, c.clone());
        }
    }
    out
}
