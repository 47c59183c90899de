//! Mass of horocyclic averages in the compact part of the cusped surface.

use horolab::averages::mass_in_compact;
use horolab::checks::sample_vector;
use horolab::group::FuchsianGroup;
use horolab::patterson::{build_patterson, conditional_within, PattersonConfig};

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_cusped();
    let (delta, _) = g.critical_exponent(14.0)?;
    let m = build_patterson(&g, &PattersonConfig::new(delta, 12)?)?;
    let radii: Vec<f64> = [2.0f64, 4.0, 6.0].iter().map(|x| x.exp()).collect();
    let u = sample_vector(&g, 2, 60, 0.0)?;
    let cond = conditional_within(&u, &m, delta, radii[2]);
    for k in [1.5, 3.0, 10.0, 50.0] {
        let s = mass_in_compact(&g, &cond, &radii, k, "nondiv", Some(2))?;
        println!("K_height {k:>4}: {:.3?}", s.values);
    }
    Ok(())
}
