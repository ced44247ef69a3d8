//! Active-domain economy: a thin spherical shell octant embedded in a
//! 32³ mesh. Only the active leaves are integrated.

use std::time::Instant;

use voxpht::elasticity::{assemble, Material, Regime};
use voxpht::fitter::{fit, FitConfig};
use voxpht::image_io::{synthesize_phantom, Shape};
use voxpht::levelset::LevelSetField;

fn main() -> voxpht::Result<()> {
    env_logger::init();
    let start = Instant::now();
    let shape = Shape::HollowSphereOctant { inner: 40.0, outer: Some(56.0) };
    let phantom = synthesize_phantom(shape, &[64, 64, 64], &[1.0; 3])?;
    let field = LevelSetField::from_image(&phantom.image, 3);
    let cfg = FitConfig { threshold: 127.5, levels: 0, ..Default::default() };
    let result = fit(&field, &[32, 32, 32], &cfg, Some(&phantom.shape))?;
    let mesh = &result.mesh;
    let total = mesh.leaves().count();
    let active = mesh.active_leaves().count();
    println!("fit: {:.1}s", start.elapsed().as_secs_f64());
    print!("{}", result.csv());
    let material = Material { young: 1e5, poisson: 0.3, regime: Regime::Solid };
    let t = Instant::now();
    let sys = assemble(mesh, material)?;
    println!(
        "{active} of {total} leaves active ({:.1}%), {} integrated, {} unknowns, assembly {:.1}s",
        100.0 * active as f64 / total as f64,
        sys.elements_integrated,
        sys.num_dofs(),
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
