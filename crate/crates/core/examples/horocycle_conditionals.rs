//! Conditional measures on an unstable horocycle and their scaling law.

use horolab::checks::sample_vector;
use horolab::group::FuchsianGroup;
use horolab::patterson::{build_patterson, conditional_within, PattersonConfig};

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_schottky();
    let (delta, _) = g.critical_exponent(20.0)?;
    let m = build_patterson(&g, &PattersonConfig::new(delta, 12)?)?;
    let u = sample_vector(&g, 8, 60, 0.0)?;
    for t in [1.0f64, 2.0, 3.0] {
        let big = conditional_within(&u, &m, delta, t.exp()).horoball_mass(t.exp());
        let small = conditional_within(&u.geodesic_flow(-t), &m, delta, 1.0).horoball_mass(1.0);
        println!("t = {t}: mass {big:.6e} vs e^(delta t) * {small:.6e} = {:.6e}", small * (delta * t).exp());
    }
    Ok(())
}
