//! The holomorphic map catalog: Taylor coefficients, univalence, and the
//! Jacobian of the blend `(1 - t) z + t f(z)`.
//!
//!     cargo run --release --example holomorphic_maps

use hadamard_fem::deform::ConformalBlend;
use hadamard_fem::holomorphic::HolomorphicMap;
use num_complex::Complex64;

fn main() -> hadamard_fem::Result<()> {
    let series = HolomorphicMap::power_series(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.3)])?;
    for map in [HolomorphicMap::Identity, HolomorphicMap::Cos, HolomorphicMap::Exp, series] {
        let c: Vec<String> = map.taylor_coefficients(4).iter().map(|a| format!("{:.4}{:+.4}i", a.re, a.im)).collect();
        println!("{:<13} univalent: {:<6} a_0..a_4 = {}", map.name(), format!("{:?}", map.univalent_on_disk()), c.join(", "));
    }

    let blend = ConformalBlend::new(HolomorphicMap::Cos);
    let z = Complex64::new(0.5, 0.5);
    for t in [-0.2, 0.0, 0.2, 1.0] {
        let (a, da, d2a) = blend.jacobian_derivatives(t, z);
        println!("cos blend at z = {z}, t = {t:+.1}: g = {:.5}, a = {a:.5}, da/dt = {da:+.5}, d2a/dt2 = {d2a:.5}", blend.eval(t, z));
    }
    Ok(())
}
