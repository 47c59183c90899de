//! Orbit counting and the regression estimate of the critical exponent.

use horolab::group::FuchsianGroup;

fn main() -> horolab::Result<()> {
    let cases = [
        (FuchsianGroup::default_schottky(), 24.0),
        (FuchsianGroup::default_cusped(), 14.0),
        (FuchsianGroup::default_parabolic(), 30.0),
    ];
    for (g, t_max) in cases {
        let (delta, stderr) = g.critical_exponent(t_max)?;
        let counts = g.orbit_counts(&[t_max / 2.0, t_max])?;
        println!("{:>9}: delta {delta:.4} +- {stderr:.1e}, N({}) = {}, N({t_max}) = {}", g.name(), t_max / 2.0, counts[0], counts[1]);
    }
    let p = FuchsianGroup::default_parabolic();
    println!("parabolic growth constant on [5, 30]: {:.3}", p.check_parabolic_growth(5.0, 30.0)?);
    Ok(())
}
