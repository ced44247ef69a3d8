//! Benchmark runs and convergence studies on fitted meshes.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use log::info;
use serde::Serialize;

use super::{assemble, energy_norm_error, Benchmark, Material, Regime, Solution};
use crate::error::Result;
use crate::fitter::{fit, FitConfig};
use crate::geom::{Mat3, Vec3};
use crate::image_io::{synthesize_phantom, Shape};
use crate::levelset::LevelSetField;
use crate::pht::{PhtMesh, PointField};

/// Result of one solve on one mesh.
#[derive(Clone, Debug)]
pub struct BenchmarkRun {
    pub solution: Solution,
    pub dofs: usize,
    pub active_elements: usize,
    pub elements_integrated: usize,
    pub energy_error: f64,
    /// Point on the hole at the `x = 0` symmetry face and the stress
    /// component tangential to the hole there (2D only).
    pub hole_stress: Option<(Vec3, f64)>,
}

/// Solve the benchmark on `mesh` with exact tractions on the far faces and
/// symmetry on the faces through the hole centre.
pub fn run_benchmark(mesh: &PhtMesh, bench: &Benchmark, material: Material) -> Result<BenchmarkRun> {
    let d = mesh.dim();
    let mut sys = assemble(mesh, material)?;
    let exact = |x: Vec3| bench.stress(x);
    for a in 0..d {
        sys.add_traction(mesh, a, true, &exact)?;
    }
    let axes: Vec<usize> = (0..d).collect();
    let fixed = sys.symmetry_constraints(mesh, &axes);
    let solution = sys.solve(mesh, &fixed)?;
    let energy_error = energy_norm_error(mesh, &solution, &exact, &material)?;
    let hole_stress = if d == 2 { hole_point_stress(mesh, &solution, &material)? } else { None };
    Ok(BenchmarkRun {
        dofs: solution.free,
        active_elements: mesh.active_leaves().count(),
        elements_integrated: sys.elements_integrated,
        energy_error,
        hole_stress,
        solution,
    })
}

/// `σ_xx` at the lowest active point of the `x = 0` face, which is where
/// the fitted hole boundary meets that symmetry plane.
fn hole_point_stress(mesh: &PhtMesh, sol: &Solution, material: &Material) -> Result<Option<(Vec3, f64)>> {
    let Some(e) = mesh
        .active_leaves()
        .filter(|&e| mesh.element(e).lo[0] == 0)
        .min_by_key(|&e| mesh.element(e).lo[1])
    else {
        return Ok(None);
    };
    let net = mesh.element_net(e);
    let (x, s) = sol.stress(mesh, material, e, &net, [0.0; 3])?;
    Ok(Some((x, s[0][0])))
}

/// How the mesh changes from one study level to the next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// Fit a fresh `n0 · 2^k` mesh to the image at level `k`.
    Refit,
    /// Fit once on the first level, then only refine uniformly; the
    /// geometry and the active set stay those of the first fit.
    FixedGeometry,
}

/// Inputs of a convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct StudyConfig {
    pub benchmark: Benchmark,
    pub material: Material,
    /// Edge length of the square (cube) domain with the hole at a corner.
    pub length: f64,
    /// Image voxels per axis.
    pub voxels: usize,
    /// Elements per axis on the first level; level `k` uses `n0 · 2^k`.
    pub n0: usize,
    pub levels: usize,
    pub refinement: Refinement,
    pub fit: FitConfig,
}

impl StudyConfig {
    /// Plate with a unit hole in `[0, 4]²`; `refit = false` gives the
    /// fixed-geometry baseline.
    pub fn plate(levels: usize, refit: bool) -> Self {
        Self {
            benchmark: Benchmark::PlateWithHole { sigma: 10.0, radius: 1.0 },
            material: Material { young: 1e5, poisson: 0.3, regime: Regime::PlaneStress },
            length: 4.0,
            voxels: 2048,
            n0: 4,
            levels,
            refinement: if refit { Refinement::Refit } else { Refinement::FixedGeometry },
            fit: FitConfig { threshold: 127.5, levels: 0, ..Default::default() },
        }
    }

    pub fn sphere(levels: usize, refit: bool) -> Self {
        Self {
            benchmark: Benchmark::SphericalHole { sigma: 10.0, radius: 1.0, nu: 0.3 },
            material: Material { young: 1e5, poisson: 0.3, regime: Regime::Solid },
            length: 2.0,
            voxels: 64,
            n0: 4,
            levels,
            refinement: if refit { Refinement::Refit } else { Refinement::FixedGeometry },
            fit: FitConfig { threshold: 127.5, levels: 0, ..Default::default() },
        }
    }

    pub fn shape(&self) -> Shape {
        match self.benchmark {
            Benchmark::PlateWithHole { radius, .. } => Shape::PlateWithHoleQuarter { radius },
            Benchmark::SphericalHole { radius, .. } => Shape::HollowSphereOctant { inner: radius, outer: None },
        }
    }
}

/// One level of a convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub level: usize,
    pub elements_per_axis: usize,
    pub dofs: usize,
    pub active_elements: usize,
    pub energy_error: f64,
    /// Error divided by the previous level's error.
    pub ratio: Option<f64>,
    pub hole_stress: Option<f64>,
    pub min_scaled_jacobian: f64,
    pub seconds: f64,
}

/// Solve the benchmark on a sequence of meshes, refined as
/// `cfg.refinement` says. Returns the rows and the finest mesh and solution.
pub fn study(cfg: &StudyConfig) -> Result<(Vec<StudyRow>, PhtMesh, Solution)> {
    let d = cfg.benchmark.dim();
    let dims = vec![cfg.voxels; d];
    let spacing = vec![cfg.length / cfg.voxels as f64; d];
    let phantom = synthesize_phantom(cfg.shape(), &dims, &spacing)?;
    let field = LevelSetField::from_image(&phantom.image, 3);
    let mut rows: Vec<StudyRow> = Vec::new();
    let mut last: Option<(PhtMesh, Solution)> = None;
    for level in 0..cfg.levels {
        let start = Instant::now();
        let n = cfg.n0 << level;
        let mesh = match (cfg.refinement, last.take()) {
            (Refinement::FixedGeometry, Some((mut mesh, _))) => {
                mesh.refine_uniform()?;
                mesh
            }
            _ => fit(&field, &vec![n; d], &cfg.fit, Some(&phantom.shape))?.mesh,
        };
        let run = run_benchmark(&mesh, &cfg.benchmark, cfg.material)?;
        let ratio = rows.last().map(|r| run.energy_error / r.energy_error);
        let row = StudyRow {
            level,
            elements_per_axis: n,
            dofs: run.dofs,
            active_elements: run.active_elements,
            energy_error: run.energy_error,
            ratio,
            hole_stress: run.hole_stress.map(|h| h.1),
            min_scaled_jacobian: mesh.min_scaled_jacobian(cfg.fit.jacobian_samples),
            seconds: start.elapsed().as_secs_f64(),
        };
        info!("level {level}: {} dofs, energy error {:.4e}, ratio {:?}", row.dofs, row.energy_error, row.ratio);
        rows.push(row);
        last = Some((mesh, run.solution));
    }
    let (mesh, sol) = last.ok_or_else(|| crate::Error::InvalidArgument("study needs at least one level".into()))?;
    Ok((rows, mesh, sol))
}

/// CSV with columns `level,dofs,energy_error,ratio`.
pub fn convergence_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("level,dofs,energy_error,ratio\n");
    for r in rows {
        let ratio = r.ratio.map_or(String::new(), |v| format!("{v:.6}"));
        out.push_str(&format!("{},{},{:.6e},{}\n", r.level, r.dofs, r.energy_error, ratio));
    }
    out
}

/// Write the numerical stress, the exact stress difference and the
/// displacement sampled on every active leaf.
pub fn stress_vtk(
    path: &Path,
    mesh: &PhtMesh,
    sol: &Solution,
    material: &Material,
    bench: &Benchmark,
    res: usize,
) -> Result<()> {
    let d = mesh.dim();
    let nets: HashMap<usize, Vec<Vec3>> = mesh.active_leaves().map(|e| (e, mesh.element_net(e))).collect();
    let eval = |e: usize, t: Vec3| -> Option<(Vec3, Vec3, Mat3)> {
        let (x, u, g) = sol.gradient(mesh, e, &nets[&e], t).ok()?;
        Some((x, u, material.stress(&g)))
    };
    let comps: Vec<(String, usize, usize)> = if d == 2 {
        vec![("sigma_xx".into(), 0, 0), ("sigma_yy".into(), 1, 1), ("sigma_xy".into(), 0, 1)]
    } else {
        let names = ["x", "y", "z"];
        [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)]
            .iter()
            .map(|&(i, j)| (format!("sigma_{}{}", names[i], names[j]), i, j))
            .collect()
    };
    let mut closures: Vec<(String, Box<dyn Fn(usize, Vec3) -> f64 + '_>)> = Vec::new();
    for (name, i, j) in comps {
        closures.push((name.clone(), Box::new(move |e, t| eval(e, t).map_or(f64::NAN, |r| r.2[i][j]))));
        closures.push((
            format!("{name}_error"),
            Box::new(move |e, t| eval(e, t).map_or(f64::NAN, |r| r.2[i][j] - bench.stress(r.0)[i][j])),
        ));
    }
    for (c, name) in ["u_x", "u_y", "u_z"].iter().enumerate().take(d) {
        closures.push((name.to_string(), Box::new(move |e, t| eval(e, t).map_or(f64::NAN, |r| r.1[c]))));
    }
    let fields: Vec<PointField> = closures.iter().map(|(n, f)| (n.as_str(), f.as_ref() as &dyn Fn(usize, Vec3) -> f64)).collect();
    mesh.write_vtk(path, res, &fields)
}
