//! Closed-form stresses of the plate-with-hole and spherical-hole benchmarks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Polar components `(σ_rr, σ_θθ, σ_rθ)` around a circular hole of radius
/// `radius` in an infinite plate under remote tension `sigma` along x.
pub fn exact_plate_stress(r: f64, theta: f64, sigma: f64, radius: f64) -> Result<[f64; 3]> {
    if !(r >= radius) {
        return Err(Error::InvalidArgument(format!("r = {r} inside the hole of radius {radius}")));
    }
    Ok(plate_polar(r, theta, sigma, radius))
}

fn plate_polar(r: f64, theta: f64, s: f64, a: f64) -> [f64; 3] {
    let q2 = a * a / (r * r);
    let q4 = q2 * q2;
    let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let rr = 0.5 * s * (1.0 - q2) + 0.5 * s * (1.0 - 4.0 * q2 + 3.0 * q4) * c2;
    let tt = 0.5 * s * (1.0 + q2) - 0.5 * s * (1.0 + 3.0 * q4) * c2;
    let rt = -0.5 * s * (1.0 + 2.0 * q2 - 3.0 * q4) * s2;
    [rr, tt, rt]
}

/// Spherical components `(σ_RR, σ_θθ, σ_ββ, σ_Rβ)` around a spherical hole
/// of radius `a` under remote tension `sigma` along the polar axis. `beta`
/// is the polar angle; the second σ_RR fraction is `6a²/R⁵` as printed in
/// the source, which equals the dimensionally consistent `6a⁵/R⁵` for `a = 1`.
pub fn exact_sphere_stress(rc: f64, beta: f64, sigma: f64, a: f64, nu: f64) -> Result<[f64; 4]> {
    if !(rc >= a) {
        return Err(Error::InvalidArgument(format!("R = {rc} inside the hole of radius {a}")));
    }
    Ok(sphere_spherical(rc, beta, sigma, a, nu))
}

fn sphere_spherical(rc: f64, beta: f64, s: f64, a: f64, nu: f64) -> [f64; 4] {
    let c2 = beta.cos().powi(2);
    let s2 = beta.sin().powi(2);
    let k = 7.0 - 5.0 * nu;
    let a3 = a.powi(3) / rc.powi(3);
    let a5 = a.powi(5) / rc.powi(5);
    let a2r5 = a.powi(2) / rc.powi(5);
    let rr = s * c2 + s / k * (a3 * (6.0 - 5.0 * (5.0 - nu) * c2) + 6.0 * a2r5 * (3.0 * c2 - 1.0));
    let tt = 3.0 * s / (2.0 * k) * (a3 * (5.0 * nu - 2.0 + 5.0 * (1.0 - 2.0 * nu) * c2) + a5 * (1.0 - 5.0 * c2));
    let bb = s * s2 + s / (2.0 * k) * (a3 * (4.0 - 5.0 * nu + 5.0 * (1.0 - 2.0 * nu) * c2) + 3.0 * a5 * (3.0 - 7.0 * c2));
    let rb = s * (-1.0 + 1.0 / k * (-5.0 * a3 * (1.0 + nu) + 12.0 * a5)) * beta.sin() * beta.cos();
    [rr, tt, bb, rb]
}

/// A benchmark with a closed-form stress field in Cartesian components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Benchmark {
    /// Quarter plate, hole centred at the origin, tension along x.
    PlateWithHole { sigma: f64, radius: f64 },
    /// Octant, hole centred at the origin, tension along z.
    SphericalHole { sigma: f64, radius: f64, nu: f64 },
}

impl Benchmark {
    pub fn dim(&self) -> usize {
        match self {
            Benchmark::PlateWithHole { .. } => 2,
            Benchmark::SphericalHole { .. } => 3,
        }
    }

    /// Cartesian stress tensor at `x`. The closed form is evaluated as is
    /// for points inside the hole, which only matters for meshes that do
    /// not follow the hole boundary.
    pub fn stress(&self, x: Vec3) -> [[f64; 3]; 3] {
        match *self {
            Benchmark::PlateWithHole { sigma, radius } => {
                let r = x[0].hypot(x[1]).max(1e-12);
                let th = x[1].atan2(x[0]);
                let [rr, tt, rt] = plate_polar(r, th, sigma, radius);
                let (c, s) = (th.cos(), th.sin());
                let xx = rr * c * c + tt * s * s - 2.0 * rt * s * c;
                let yy = rr * s * s + tt * c * c + 2.0 * rt * s * c;
                let xy = (rr - tt) * s * c + rt * (c * c - s * s);
                [[xx, xy, 0.0], [xy, yy, 0.0], [0.0; 3]]
            }
            Benchmark::SphericalHole { sigma, radius, nu } => {
                let rc = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
                let beta = (x[2] / rc).clamp(-1.0, 1.0).acos();
                let th = x[1].atan2(x[0]);
                let [rr, tt, bb, rb] = sphere_spherical(rc, beta, sigma, radius, nu);
                let (sb, cb, st, ct) = (beta.sin(), beta.cos(), th.sin(), th.cos());
                let er = [sb * ct, sb * st, cb];
                let eb = [cb * ct, cb * st, -sb];
                let et = [-st, ct, 0.0];
                let mut out = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] = rr * er[i] * er[j]
                            + bb * eb[i] * eb[j]
                            + tt * et[i] * et[j]
                            + rb * (er[i] * eb[j] + eb[i] * er[j]);
                    }
                }
                out
            }
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Benchmark::PlateWithHole { radius, .. } | Benchmark::SphericalHole { radius, .. } => radius,
        }
    }
}
