//! Convergence of the quarter plate with a circular hole: re-fitting the
//! boundary at every level against keeping the first fitted geometry.

use voxpht::elasticity::{convergence_csv, study, StudyConfig};

fn main() -> voxpht::Result<()> {
    env_logger::init();
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for refit in [true, false] {
        let mut cfg = StudyConfig::plate(levels, refit);
        if let Some(v) = std::env::args().nth(2).and_then(|s| s.parse().ok()) {
            cfg.voxels = v;
        }
        let (rows, _, _) = study(&cfg)?;
        println!("{}", if refit { "re-fitted every level" } else { "fixed geometry" });
        print!("{}", convergence_csv(&rows));
        for r in &rows {
            println!(
                "  {}x{}: {} active, min scaled Jacobian {:.3}, sigma_xx at the hole {:.3}, {:.2}s",
                r.elements_per_axis,
                r.elements_per_axis,
                r.active_elements,
                r.min_scaled_jacobian,
                r.hole_stress.unwrap_or(f64::NAN),
                r.seconds
            );
        }
    }
    Ok(())
}
