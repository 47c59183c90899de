//! Unit tangent vectors as frames, the two flows and Busemann functions.

use horolab::geometry::{busemann, hamenstadt_distance, BoundaryPoint, PlanePoint, UnitTangent, BASEPOINT};

fn main() -> horolab::Result<()> {
    let u = UnitTangent::pointing(PlanePoint::new(0.3, 1.7)?, 1.0)?;
    println!("u: base {:?}, backward {}, forward {}", u.base(), u.backward(), u.forward());

    // g^t h^s u = h^{s e^t} g^t u
    let (s, t) = (0.8, 1.5);
    let lhs = u.horocycle_flow(s).geodesic_flow(t);
    let rhs = u.geodesic_flow(t).horocycle_flow(s * f64::exp(t));
    println!("conjugation defect {:.2e}", lhs.frame_distance(&rhs));

    // the horocycle is parametrized by the Hamenstadt distance
    for s in [0.5, 5.0, 50.0] {
        println!("d(u, h^{s} u) = {:.12}", hamenstadt_distance(&u, &u.horocycle_flow(s))?);
    }

    // the Busemann coordinate grows by t along the geodesic flow
    println!("s(u) = {:.6}, s(g^2 u) = {:.6}", u.busemann_coordinate(), u.geodesic_flow(2.0).busemann_coordinate());
    let xi = BoundaryPoint::Finite(-0.4);
    println!("beta_xi(u, o) = {:.6}", busemann(xi, u.base(), BASEPOINT));
    Ok(())
}
