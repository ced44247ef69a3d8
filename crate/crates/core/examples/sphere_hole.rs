//! Two-level study of a solid with a spherical cavity under uniaxial
//! tension, re-fitted against fixed geometry.

use voxpht::elasticity::{convergence_csv, study, StudyConfig};

fn main() -> voxpht::Result<()> {
    env_logger::init();
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    for refit in [true, false] {
        let cfg = StudyConfig::sphere(levels, refit);
        let (rows, _, _) = study(&cfg)?;
        println!("{}", if refit { "re-fitted every level" } else { "fixed geometry" });
        print!("{}", convergence_csv(&rows));
        for r in &rows {
            println!(
                "  {}^3: {} active, min scaled Jacobian {:.3}, {:.1}s",
                r.elements_per_axis, r.active_elements, r.min_scaled_jacobian, r.seconds
            );
        }
    }
    Ok(())
}
