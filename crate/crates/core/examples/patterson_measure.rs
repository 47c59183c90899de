//! Building the atomic Patterson measure and checking conformality.

use horolab::checks::BumpSpec;
use horolab::group::FuchsianGroup;
use horolab::patterson::{build_patterson, coarsen, conformality_defect, ps_integrals, PattersonConfig};

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_schottky();
    let (delta, _) = g.critical_exponent(20.0)?;
    let m = build_patterson(&g, &PattersonConfig::new(delta, 12)?)?;
    println!("{} atoms, exponent {delta:.4}", m.len());

    let a = g.parse_word("a")?;
    for cutoff in [6, 8, 10, 12] {
        let d = conformality_defect(&m.truncate(cutoff)?, &g, &a, delta)?;
        println!("cutoff {cutoff:>2}: median conformality defect {d:.3e}");
    }

    let bump = BumpSpec::isotropic(0.0, 1.0, 0.75).build(&g)?;
    let coarse = coarsen(&m, &g, 1e-3)?;
    let q = ps_integrals(&g, &coarse, delta, &[bump], 0.05)?;
    println!("m_PS integral of the bump {:.5} over {} cells", q[0].estimate, q[0].n_cells);
    Ok(())
}
