//! End-to-end runs behind the command line: phantom synthesis, fitting and
//! benchmark analysis. Each run writes its files and a `manifest.json`
//! into one output directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::elasticity::{convergence_csv, stress_vtk, study, Benchmark, Material, Refinement, StudyConfig};
use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig};
use crate::image_io::{load_image, save_pgm, save_raw, synthesize_phantom, GrayImage, ImageFormat, Shape};
use crate::levelset::LevelSetField;

/// Built-in phantoms with fixed sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    /// Radius 100 in a 512² image.
    Disk,
    /// Radii 60 and 120 in a 512² image.
    Annulus,
    /// Unit hole in `[0, 4]²` sampled by 512² voxels.
    PlateWithHoleQuarter,
    /// Radius 40 in a 128³ image.
    Sphere,
    /// Shell between radii 40 and 56 in a 64³ image.
    HollowSphereOctant,
}

impl PhantomKind {
    /// Shape, voxel counts and spacing.
    pub fn setup(self) -> (Shape, Vec<usize>, Vec<f64>) {
        match self {
            PhantomKind::Disk => (Shape::Disk { center: [256.0; 2], radius: 100.0 }, vec![512; 2], vec![1.0; 2]),
            PhantomKind::Annulus => {
                (Shape::Annulus { center: [256.0; 2], inner: 60.0, outer: 120.0 }, vec![512; 2], vec![1.0; 2])
            }
            PhantomKind::PlateWithHoleQuarter => {
                (Shape::PlateWithHoleQuarter { radius: 1.0 }, vec![512; 2], vec![4.0 / 512.0; 2])
            }
            PhantomKind::Sphere => (Shape::Sphere { center: [64.0; 3], radius: 40.0 }, vec![128; 3], vec![1.0; 3]),
            PhantomKind::HollowSphereOctant => {
                (Shape::HollowSphereOctant { inner: 40.0, outer: Some(56.0) }, vec![64; 3], vec![1.0; 3])
            }
        }
    }
}

impl FromStr for PhantomKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "disk" => PhantomKind::Disk,
            "annulus" => PhantomKind::Annulus,
            "plate-with-hole-quarter" | "plate" => PhantomKind::PlateWithHoleQuarter,
            "sphere" => PhantomKind::Sphere,
            "hollow-sphere-octant" | "octant" => PhantomKind::HollowSphereOctant,
            _ => return Err(format!("unknown phantom '{s}'")),
        })
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or("?"))
    }
}

/// Benchmarks available to `analyze`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    PlateWithHole,
    SphericalHole,
}

impl FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plate-with-hole" | "plate" => Ok(BenchmarkKind::PlateWithHole),
            "spherical-hole" | "sphere" => Ok(BenchmarkKind::SphericalHole),
            _ => Err(format!("unknown benchmark '{s}'")),
        }
    }
}

/// Where the image comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum ImageSource {
    File { path: PathBuf, format: ImageFormat },
    Phantom { kind: PhantomKind },
}

impl ImageSource {
    /// The image and, for phantoms, the analytic shape.
    pub fn load(&self) -> Result<(GrayImage, Option<Shape>)> {
        match self {
            ImageSource::File { path, format } => Ok((load_image(path, *format)?, None)),
            ImageSource::Phantom { kind } => {
                let (shape, dims, spacing) = kind.setup();
                let p = synthesize_phantom(shape, &dims, &spacing)?;
                Ok((p.image, Some(p.shape)))
            }
        }
    }
}

/// Configuration of a `fit` run.
#[derive(Clone, Debug, Serialize)]
pub struct FitRun {
    pub image: ImageSource,
    /// Embedding elements per axis.
    pub n: usize,
    pub fit: FitConfig,
    /// Samples per element and axis in the VTK export.
    pub vtk_resolution: usize,
    pub seed: u64,
}

/// Configuration of an `analyze` run.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeRun {
    pub study: StudyConfig,
    pub vtk_resolution: usize,
    pub seed: u64,
}

impl AnalyzeRun {
    /// Benchmark study with the given load, material and refinement mode.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: BenchmarkKind,
        levels: usize,
        n0: Option<usize>,
        sigma: f64,
        young: f64,
        poisson: f64,
        refit: bool,
        seed: u64,
    ) -> Result<Self> {
        let mut study = match kind {
            BenchmarkKind::PlateWithHole => StudyConfig::plate(levels, refit),
            BenchmarkKind::SphericalHole => StudyConfig::sphere(levels, refit),
        };
        study.material = Material::new(young, poisson, study.material.regime)?;
        study.benchmark = match study.benchmark {
            Benchmark::PlateWithHole { radius, .. } => Benchmark::PlateWithHole { sigma, radius },
            Benchmark::SphericalHole { radius, .. } => Benchmark::SphericalHole { sigma, radius, nu: poisson },
        };
        if let Some(n0) = n0 {
            study.n0 = n0;
        }
        if levels == 0 {
            return Err(Error::InvalidArgument("a study needs at least one level".into()));
        }
        Ok(Self { study, vtk_resolution: 4, seed })
    }
}

/// Files written by a run and a JSON summary of its results.
#[derive(Clone, Debug, Default)]
pub struct RunRecord {
    pub outputs: Vec<PathBuf>,
    pub summary: Value,
}

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn write(path: PathBuf, text: &str, record: &mut RunRecord) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    record.outputs.push(path);
    Ok(())
}

/// Write a phantom image: PGM in 2D, RAW plus JSON sidecar in 3D.
pub fn run_phantom(kind: PhantomKind, out: &Path) -> Result<RunRecord> {
    create_dir(out)?;
    let (shape, dims, spacing) = kind.setup();
    let p = synthesize_phantom(shape, &dims, &spacing).map_err(|e| e.in_stage("image_io"))?;
    let mut record = RunRecord::default();
    if p.image.dim() == 2 {
        let path = out.join("phantom.pgm");
        save_pgm(&p.image, &path)?;
        record.outputs.push(path);
    } else {
        let path = out.join("phantom.raw");
        save_raw(&p.image, &path)?;
        record.outputs.push(crate::image_io::raw_header_path(&path));
        record.outputs.push(path);
    }
    let inside = p.image.data().iter().filter(|&&v| v == 0).count();
    record.summary = json!({ "shape": p.shape, "dims": dims, "spacing": spacing, "inside_voxels": inside });
    Ok(record)
}

/// Image to level set to fitted mesh; writes the mesh, a VTK view and the
/// per-level report.
pub fn run_fit(cfg: &FitRun, out: &Path) -> Result<RunRecord> {
    create_dir(out)?;
    let (image, shape) = cfg.image.load().map_err(|e| e.in_stage("image_io"))?;
    let field = LevelSetField::from_image(&image, 3);
    if cfg.n < 2 {
        return Err(Error::InvalidArgument("need at least 2 elements per axis".into()).in_stage("fit"));
    }
    let n = vec![cfg.n; image.dim()];
    let result = fit(&field, &n, &cfg.fit, shape.as_ref())?;
    let mut record = RunRecord::default();
    let mesh_path = out.join("mesh.json");
    result.mesh.save(&mesh_path).map_err(|e| e.in_stage("export"))?;
    record.outputs.push(mesh_path.clone());
    record.outputs.push(mesh_path.with_extension("bin"));
    let vtk = out.join("mesh.vtk");
    result.mesh.write_vtk(&vtk, cfg.vtk_resolution, &[]).map_err(|e| e.in_stage("export"))?;
    record.outputs.push(vtk);
    write(out.join("fit_report.csv"), &result.csv(), &mut record)?;
    record.summary = json!({ "levels": result.reports });
    Ok(record)
}

/// Convergence study of a benchmark; writes the CSV and the stress field
/// of the finest level.
pub fn run_analyze(cfg: &AnalyzeRun, out: &Path) -> Result<RunRecord> {
    create_dir(out)?;
    let (rows, mesh, sol) = study(&cfg.study).map_err(|e| e.in_stage("analyze"))?;
    let mut record = RunRecord::default();
    write(out.join("convergence.csv"), &convergence_csv(&rows), &mut record)?;
    let vtk = out.join("stress.vtk");
    stress_vtk(&vtk, &mesh, &sol, &cfg.study.material, &cfg.study.benchmark, cfg.vtk_resolution)
        .map_err(|e| e.in_stage("export"))?;
    record.outputs.push(vtk);
    let mode = match cfg.study.refinement {
        Refinement::Refit => "refit",
        Refinement::FixedGeometry => "fixed-geometry",
    };
    record.summary = json!({ "mode": mode, "rows": rows });
    Ok(record)
}

/// Everything needed to repeat a run.
#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a C,
    status: &'a str,
    error: Option<String>,
    outputs: Vec<String>,
    summary: &'a Value,
    seconds: f64,
}

/// Time `run`, then write `out/manifest.json` whether it succeeded or not.
pub fn with_manifest<C: Serialize>(
    command: &str,
    config: &C,
    seed: u64,
    out: &Path,
    run: impl FnOnce() -> Result<RunRecord>,
) -> Result<RunRecord> {
    let start = Instant::now();
    let result = run();
    let empty = Value::Null;
    let (status, error, outputs, summary) = match &result {
        Ok(r) => ("ok", None, r.outputs.iter().map(|p| p.display().to_string()).collect(), &r.summary),
        Err(e) => ("error", Some(e.to_string()), Vec::new(), &empty),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config,
        status,
        error,
        outputs,
        summary,
        seconds: start.elapsed().as_secs_f64(),
    };
    create_dir(out)?;
    let path = out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!("hollow-sphere-octant".parse::<PhantomKind>().unwrap(), PhantomKind::HollowSphereOctant);
        assert_eq!(PhantomKind::PlateWithHoleQuarter.to_string(), "plate-with-hole-quarter");
        assert_eq!("sphere".parse::<BenchmarkKind>().unwrap(), BenchmarkKind::SphericalHole);
        assert!("cube".parse::<PhantomKind>().is_err());
    }

    #[test]
    fn phantom_run_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let r = with_manifest("phantom", &PhantomKind::Disk, 7, dir.path(), || run_phantom(PhantomKind::Disk, dir.path()))
            .unwrap();
        assert!(dir.path().join("phantom.pgm").exists());
        let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["status"], "ok");
        assert_eq!(m["seed"], 7);
        assert_eq!(m["config"], "disk");
        assert_eq!(m["summary"]["inside_voxels"], r.summary["inside_voxels"]);
    }

    #[test]
    fn missing_input_is_tagged() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = FitRun {
            image: ImageSource::File { path: dir.path().join("absent.pgm"), format: ImageFormat::Pgm },
            n: 8,
            fit: FitConfig::default(),
            vtk_resolution: 2,
            seed: 0,
        };
        let err = with_manifest("fit", &cfg, 0, dir.path(), || run_fit(&cfg, dir.path())).unwrap_err();
        assert!(err.to_string().starts_with("image_io:"), "{err}");
        let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["status"], "error");
    }
}
