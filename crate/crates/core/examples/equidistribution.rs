//! Horocyclic averages against the Patterson-Sullivan integral.

use horolab::averages::ps_averages;
use horolab::checks::{sample_vector, BumpSpec};
use horolab::group::FuchsianGroup;
use horolab::patterson::{build_patterson, coarsen, conditional_within, ps_integrals, PattersonConfig};

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_schottky();
    let (delta, _) = g.critical_exponent(24.0)?;
    let m = build_patterson(&g, &PattersonConfig::new(delta, 14)?)?;
    let psi = BumpSpec::isotropic(0.0, 2.5, 1.2).build(&g)?;
    let reference = ps_integrals(&g, &coarsen(&m, &g, 1e-3)?, delta, std::slice::from_ref(&psi), 0.05)?[0].estimate;
    let radii: Vec<f64> = (1..=6).map(|k| (k as f64).exp()).collect();
    let u = sample_vector(&g, 8, 60, 0.0)?;
    let cond = conditional_within(&u, &m, delta, radii[5]);
    let rows = ps_averages(&g, &cond, &radii, &[psi], 0.0)?;
    println!("reference {reference:.5}");
    for (r, row) in radii.iter().zip(rows) {
        println!("r = {r:>8.2}: average {:.5}", row[0]);
    }
    Ok(())
}
