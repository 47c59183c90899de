//! Ratios of Lebesgue averages on the cusped group and the BR reference.

use horolab::averages::lebesgue_averages;
use horolab::checks::{sample_vector, BumpSpec};
use horolab::geometry::BASEPOINT;
use horolab::group::FuchsianGroup;
use horolab::patterson::{br_integrals, build_patterson, coarsen, PattersonConfig, ReferenceWindow};

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_cusped();
    let (delta, _) = g.critical_exponent(14.0)?;
    let m = build_patterson(&g, &PattersonConfig::new(delta, 12)?)?;
    let psi = BumpSpec::isotropic(0.0, 1.0, 0.75).build(&g)?;
    let phi = BumpSpec::isotropic(0.0, 2.2, 0.7).build(&g)?;
    let window = ReferenceWindow { center: BASEPOINT, radius: 0.5 };
    let q = br_integrals(&g, &coarsen(&m, &g, 1e-3)?, delta, &[psi.clone(), phi.clone()], None, &window, 0.05)?;
    println!("BR ratio {:.4}", q[0].estimate / q[1].estimate);
    let u = sample_vector(&g, 4, 60, 0.0)?;
    let radii: Vec<f64> = [2.0f64, 3.0, 4.0, 5.0].iter().map(|x| x.exp()).collect();
    for (r, row) in radii.iter().zip(lebesgue_averages(&g, &u, &radii, &[psi, phi])?) {
        println!("r = {r:>7.2}: ratio {:.4}", row[0] / row[1]);
    }
    Ok(())
}
