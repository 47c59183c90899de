//! Closing times of horocycles based at the cusp.

use horolab::averages::periodic_closure;
use horolab::geometry::{BoundaryPoint, UnitTangent};
use horolab::group::FuchsianGroup;

fn main() -> horolab::Result<()> {
    let g = FuchsianGroup::default_cusped();
    let p = g.parse_word("p")?[0];
    let u = UnitTangent::from_coordinates(BoundaryPoint::Infinity, BoundaryPoint::Finite(0.5), 0.0)?;
    for s in [0.0, 0.5, 1.0, 2.0] {
        let c = periodic_closure(&g, p, &u.geodesic_flow(-s))?;
        println!("s = {s}: t0 = {:+.9}, t0 e^s = {:+.9}, residual {:.1e}", c.t0, c.t0 * f64::exp(s), c.residual);
    }
    Ok(())
}
