//! Upper half-plane geometry.
//!
//! The unit tangent bundle of the hyperbolic plane is identified with
//! `PSL(2, R)`: a frame `g` is the unit vector based at `g·i` pointing along
//! the geodesic from `g·0` to `g·∞`. The identity frame therefore sits at `i`
//! with backward endpoint `0` and forward endpoint `∞`.
//!
//! The geodesic flow is right multiplication by `diag(e^{t/2}, e^{-t/2})`,
//! the horocycle flow right multiplication by `[[1, 0], [t, 1]]`, and
//! isometries act on the left. Boundary points carry `∞` as its own variant so
//! that no formula ever divides by a sentinel value.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// The base point `o = i` used for Busemann coordinates and orbit counting.
pub const BASEPOINT: PlanePoint = PlanePoint { x: 0.0, y: 1.0 };

/// An orientation-preserving isometry `z ↦ (az + b)/(cz + d)`, stored as a
/// unit-determinant matrix in canonical sign (first nonzero entry positive).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds an isometry from matrix entries, rescaling to determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("isometry entries must be finite"));
        }
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::invalid(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has non-positive determinant {det}"
            )));
        }
        let k = 1.0 / det.sqrt();
        Ok(Self::renormalized(a * k, b * k, c * k, d * k))
    }

    /// Rescales to determinant one and fixes the global sign.
    ///
    /// For large entries the computed determinant is dominated by rounding
    /// (`ad` and `bc` cancel), so the rescaling is skipped there and only the
    /// sign is fixed.
    #[inline]
    fn renormalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let size = a * a + b * b + c * c + d * d;
        let k = if size < 1e6 {
            1.0 / (a * d - b * c).sqrt()
        } else {
            1.0
        };
        let (mut a, mut b, mut c, mut d) = (a * k, b * k, c * k, d * k);
        let lead = if a != 0.0 {
            a
        } else if b != 0.0 {
            b
        } else if c != 0.0 {
            c
        } else {
            d
        };
        if lead < 0.0 {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        Isometry { a, b, c, d }
    }

    /// Diagonal matrix realizing the time-`t` geodesic flow.
    pub fn geodesic(t: f64) -> Self {
        let h = (0.5 * t).exp();
        Isometry {
            a: h,
            b: 0.0,
            c: 0.0,
            d: 1.0 / h,
        }
    }

    /// Lower unipotent matrix realizing the time-`t` horocycle flow.
    pub fn horocycle(t: f64) -> Self {
        Isometry {
            a: 1.0,
            b: 0.0,
            c: t,
            d: 1.0,
        }
    }

    /// Upper unipotent translation `z ↦ z + t`.
    pub fn translation(t: f64) -> Self {
        Isometry {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Exact inverse: the adjugate has the same determinant, so only the sign
    /// convention is reapplied.
    pub fn inverse(&self) -> Self {
        let (a, b, c, d) = (self.d, -self.b, -self.c, self.a);
        let lead = if a != 0.0 { a } else if b != 0.0 { b } else { c };
        if lead < 0.0 {
            Isometry { a: -a, b: -b, c: -c, d: -d }
        } else {
            Isometry { a, b, c, d }
        }
    }

    pub fn compose(&self, rhs: &Isometry) -> Self {
        Self::renormalized(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// `M^n` by repeated squaring; negative powers use the inverse.
    pub fn pow(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Isometry::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Squared Frobenius norm; `cosh d(i, M·i) = |M|²/2`.
    pub fn norm_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Hyperbolic displacement `d(i, M·i)`.
    pub fn displacement(&self) -> f64 {
        hyperbolic_distance(BASEPOINT, self.apply(BASEPOINT))
    }

    pub fn apply(&self, p: PlanePoint) -> PlanePoint {
        let (x, y) = (p.x, p.y);
        let re = self.c * x + self.d;
        let im = self.c * y;
        let den = re * re + im * im;
        PlanePoint {
            x: ((self.a * x + self.b) * re + self.a * self.c * y * y) / den,
            y: y / den,
        }
    }

    pub fn apply_boundary(&self, xi: BoundaryPoint) -> BoundaryPoint {
        match xi {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Distance between two frames as elements of `PSL(2, R)`: the largest
    /// entrywise difference, minimized over the sign ambiguity.
    pub fn frame_distance(&self, other: &Isometry) -> f64 {
        let p = [
            (self.a - other.a).abs(),
            (self.b - other.b).abs(),
            (self.c - other.c).abs(),
            (self.d - other.d).abs(),
        ];
        let m = [
            (self.a + other.a).abs(),
            (self.b + other.b).abs(),
            (self.c + other.c).abs(),
            (self.d + other.d).abs(),
        ];
        let plus = p.iter().cloned().fold(0.0, f64::max);
        let minus = m.iter().cloned().fold(0.0, f64::max);
        plus.min(minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.frame_distance(&Isometry::IDENTITY) <= tol
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, rhs: Isometry) -> Isometry {
        self.compose(&rhs)
    }
}

impl Mul<&Isometry> for &Isometry {
    type Output = Isometry;
    fn mul(self, rhs: &Isometry) -> Isometry {
        self.compose(rhs)
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point `x + iy` of the upper half-plane, `y > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(PlanePoint { x, y })
    }

    /// Coordinates on the hyperboloid `-X0² + X1² + X2² = -1`.
    fn hyperboloid(&self) -> [f64; 3] {
        let r2 = self.x * self.x + self.y * self.y;
        [
            (r2 + 1.0) / (2.0 * self.y),
            (r2 - 1.0) / (2.0 * self.y),
            self.x / self.y,
        ]
    }

    fn from_hyperboloid(v: [f64; 3]) -> Self {
        let y = 1.0 / (v[0] - v[1]);
        PlanePoint { x: v[2] * y, y }
    }
}

/// Hyperbolic distance, evaluated in the cancellation-free `asinh` form.
pub fn hyperbolic_distance(p: PlanePoint, q: PlanePoint) -> f64 {
    let chord = (p.x - q.x).hypot(p.y - q.y);
    2.0 * (chord / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// Geodesic midpoint of two points.
pub fn midpoint(p: PlanePoint, q: PlanePoint) -> PlanePoint {
    let (u, v) = (p.hyperboloid(), q.hyperboloid());
    let s = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    let n = (s[0] * s[0] - s[1] * s[1] - s[2] * s[2]).sqrt();
    PlanePoint::from_hyperboloid([s[0] / n, s[1] / n, s[2] / n])
}

/// Forward endpoint of the geodesic ray from `i` through `z`.
///
/// The ray lies on the semicircle centered at `m = (|z|² − 1)/(2x)`; the far
/// root is taken in the cancellation-free form. Fails when `z = i`.
pub fn ray_endpoint(z: PlanePoint) -> Result<BoundaryPoint> {
    let r2 = z.x * z.x + z.y * z.y;
    if z.x == 0.0 {
        return if z.y > 1.0 {
            Ok(BoundaryPoint::Infinity)
        } else if z.y < 1.0 {
            Ok(BoundaryPoint::Finite(0.0))
        } else {
            Err(Error::invalid("ray from the base point to itself has no direction"))
        };
    }
    let m = (r2 - 1.0) / (2.0 * z.x);
    let rho = m.hypot(1.0);
    let end = if z.x > 0.0 {
        if m < 0.0 {
            1.0 / (rho - m)
        } else {
            m + rho
        }
    } else if m > 0.0 {
        -1.0 / (rho + m)
    } else {
        m - rho
    };
    Ok(BoundaryPoint::Finite(end))
}

/// A point of the boundary circle `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            BoundaryPoint::Finite(x) => Some(*x),
            BoundaryPoint::Infinity => None,
        }
    }

    /// Angle of the point on the circle seen from `i`: `2·atan(x)`, with `∞`
    /// at `π`.
    pub fn angle(&self) -> f64 {
        match self {
            BoundaryPoint::Finite(x) => 2.0 * x.atan(),
            BoundaryPoint::Infinity => PI,
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        let half = 0.5 * theta;
        if (half.abs() - 0.5 * PI).abs() < 1e-300 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(half.tan())
        }
    }

    /// Angular distance seen from `i`, in `[0, π]`.
    pub fn visual_distance(&self, other: &BoundaryPoint) -> f64 {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
            _ => {
                let d = (self.angle() - other.angle()).abs();
                d.min(2.0 * PI - d)
            }
        }
    }

    /// Parses `inf`, `+inf`, `-inf` or `∞` as the point at infinity.
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim() {
            "inf" | "+inf" | "-inf" | "infinity" | "∞" => Some(BoundaryPoint::Infinity),
            t => t.parse::<f64>().ok().filter(|v| v.is_finite()).map(BoundaryPoint::Finite),
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => write!(f, "{x}"),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Busemann cocycle `β_ξ(p, q) = lim_{z→ξ} d(p, z) − d(q, z)`.
///
/// At `∞` this is `log(Im q / Im p)`; at a finite `ξ` the map `z ↦ −1/(z − ξ)`
/// moves `ξ` to `∞`, and the imaginary part becomes `y / |z − ξ|²`.
pub fn busemann(xi: BoundaryPoint, p: PlanePoint, q: PlanePoint) -> f64 {
    match xi {
        BoundaryPoint::Infinity => (q.y / p.y).ln(),
        BoundaryPoint::Finite(x) => {
            let dp = (p.x - x) * (p.x - x) + p.y * p.y;
            let dq = (q.x - x) * (q.x - x) + q.y * q.y;
            ((q.y * dp) / (p.y * dq)).ln()
        }
    }
}

/// The complete geodesic with endpoints `a ≠ b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
}

impl Geodesic {
    pub fn new(a: BoundaryPoint, b: BoundaryPoint) -> Result<Self> {
        if a == b {
            return Err(Error::invalid("geodesic endpoints coincide"));
        }
        Ok(Geodesic { a, b })
    }

    /// Hyperbolic distance from `p` to the geodesic.
    pub fn distance_to(&self, p: PlanePoint) -> f64 {
        match (self.a, self.b) {
            (BoundaryPoint::Finite(x0), BoundaryPoint::Infinity)
            | (BoundaryPoint::Infinity, BoundaryPoint::Finite(x0)) => ((p.x - x0).abs() / p.y).asinh(),
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                let rho = 0.5 * (b - a).abs();
                // |z - m|² - ρ² = (x - a)(x - b) + y²
                let power = (p.x - a) * (p.x - b) + p.y * p.y;
                (power.abs() / (2.0 * rho * p.y)).asinh()
            }
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => f64::NAN,
        }
    }

    /// Orthogonal projection of `p` onto the geodesic.
    pub fn closest_point(&self, p: PlanePoint) -> PlanePoint {
        let chart = geodesic_chart(self.a, self.b);
        let q = chart.inverse().apply(p);
        chart.apply(PlanePoint {
            x: 0.0,
            y: q.x.hypot(q.y),
        })
    }
}

/// A frame mapping `0 ↦ from` and `∞ ↦ to`, with no control of the base point.
fn geodesic_chart(from: BoundaryPoint, to: BoundaryPoint) -> Isometry {
    match (from, to) {
        (BoundaryPoint::Finite(m), BoundaryPoint::Infinity) => Isometry::translation(m),
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(p)) => Isometry {
            a: p,
            b: -1.0,
            c: 1.0,
            d: 0.0,
        },
        (BoundaryPoint::Finite(m), BoundaryPoint::Finite(p)) => {
            let k = if p > m { 1.0 } else { -1.0 };
            let scale = 1.0 / (p - m).abs().sqrt();
            Isometry::renormalized(p * k * scale, m * scale, k * scale, scale)
        }
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => Isometry::IDENTITY,
    }
}

/// A unit tangent vector of the hyperbolic plane, stored as its frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitTangent {
    frame: Isometry,
}

impl UnitTangent {
    pub fn identity() -> Self {
        UnitTangent {
            frame: Isometry::IDENTITY,
        }
    }

    pub fn from_frame(frame: Isometry) -> Self {
        UnitTangent { frame }
    }

    pub fn frame(&self) -> &Isometry {
        &self.frame
    }

    pub fn base(&self) -> PlanePoint {
        self.frame.apply(BASEPOINT)
    }

    /// Backward endpoint `u⁻ = frame·0`.
    pub fn backward(&self) -> BoundaryPoint {
        self.frame.apply_boundary(BoundaryPoint::Finite(0.0))
    }

    /// Forward endpoint `u⁺ = frame·∞`.
    pub fn forward(&self) -> BoundaryPoint {
        self.frame.apply_boundary(BoundaryPoint::Infinity)
    }

    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        (self.backward(), self.forward())
    }

    /// `β_{u⁻}(π(u), o)`; increases by `t` under the time-`t` geodesic flow.
    pub fn busemann_coordinate(&self) -> f64 {
        busemann(self.backward(), self.base(), BASEPOINT)
    }

    /// Inverse of `u ↦ (u⁻, u⁺, β_{u⁻}(π(u), o))`.
    pub fn from_coordinates(backward: BoundaryPoint, forward: BoundaryPoint, s: f64) -> Result<Self> {
        if backward == forward {
            return Err(Error::invalid(format!(
                "coincident endpoints {backward} = {forward}"
            )));
        }
        if !s.is_finite() {
            return Err(Error::invalid("Busemann coordinate must be finite"));
        }
        let chart = UnitTangent::from_frame(geodesic_chart(backward, forward));
        let shift = s - chart.busemann_coordinate();
        Ok(chart.geodesic_flow(shift))
    }

    pub fn geodesic_flow(&self, t: f64) -> Self {
        UnitTangent {
            frame: self.frame.compose(&Isometry::geodesic(t)),
        }
    }

    pub fn horocycle_flow(&self, t: f64) -> Self {
        UnitTangent {
            frame: self.frame.compose(&Isometry::horocycle(t)),
        }
    }

    /// Left action `γ·u`.
    pub fn translate(&self, g: &Isometry) -> Self {
        UnitTangent {
            frame: g.compose(&self.frame),
        }
    }

    /// Vector based at `base` with Euclidean direction `angle` (`π/2` points
    /// straight up).
    pub fn pointing(base: PlanePoint, angle: f64) -> Result<Self> {
        if !(base.y > 0.0) || !base.x.is_finite() || !base.y.is_finite() || !angle.is_finite() {
            return Err(Error::invalid(format!(
                "cannot place a vector at ({}, {}) with angle {angle}",
                base.x, base.y
            )));
        }
        let r = base.y.sqrt();
        let phi = 0.5 * (angle - 0.5 * PI);
        let (s, c) = phi.sin_cos();
        let frame = Isometry::new(r, base.x / r, 0.0, 1.0 / r)?
            .compose(&Isometry::new(c, s, -s, c)?);
        Ok(UnitTangent { frame })
    }

    /// Euclidean direction of the vector at its base point, in `(-π, π]`.
    pub fn direction_angle(&self) -> f64 {
        let [_, _, c, d] = self.frame.entries();
        wrap_angle(0.5 * PI - 2.0 * c.atan2(d))
    }

    pub fn frame_distance(&self, other: &UnitTangent) -> f64 {
        self.frame.frame_distance(&other.frame)
    }

    /// Horocycle parameter `s` such that `h^s(self)` points at `xi`;
    /// `None` when `xi` is the backward endpoint.
    pub fn horocycle_parameter_toward(&self, xi: BoundaryPoint) -> Option<f64> {
        match self.frame.inverse().apply_boundary(xi) {
            BoundaryPoint::Infinity => Some(0.0),
            BoundaryPoint::Finite(x) if x == 0.0 => None,
            BoundaryPoint::Finite(x) => Some(1.0 / x),
        }
    }
}

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Whether `v` lies on the strong unstable horocycle `H⁺(u)`: same backward
/// endpoint and zero Busemann difference there.
///
/// Both conditions are evaluated in the chart of `u`, where `u⁻ = 0`.
pub fn same_leaf(u: &UnitTangent, v: &UnitTangent, tol: f64) -> bool {
    let w = v.translate(&u.frame.inverse());
    match w.backward() {
        BoundaryPoint::Infinity => false,
        BoundaryPoint::Finite(x) => {
            x.abs() <= tol && busemann(BoundaryPoint::Finite(0.0), BASEPOINT, w.base()).abs() <= tol
        }
    }
}

/// Hamenstädt distance evaluated with an explicit point `x` on the geodesic
/// joining the forward endpoints. No leaf check is done here.
pub fn hamenstadt_distance_via(u: &UnitTangent, v: &UnitTangent, x: PlanePoint) -> f64 {
    let e = 0.5 * busemann(u.forward(), x, u.base()) + 0.5 * busemann(v.forward(), x, v.base());
    e.exp()
}

/// Leaf-intrinsic distance on `H⁺(u)`.
///
/// Evaluated in the chart of `u` (so `u⁺ = ∞`), at the point of the geodesic
/// `(u⁺ v⁺)` closest to the midpoint of the two base points.
pub fn hamenstadt_distance(u: &UnitTangent, v: &UnitTangent) -> Result<f64> {
    let scale = 1.0 + u.frame.norm_sq().sqrt() * v.frame.norm_sq().sqrt();
    if !same_leaf(u, v, 1e-9 * scale) {
        return Err(Error::invalid("vectors are not on one strong unstable leaf"));
    }
    let chart = u.frame.inverse();
    let (u0, v0) = (UnitTangent::identity(), v.translate(&chart));
    let vp = v0.forward();
    if vp.is_infinite() {
        return Ok(0.0);
    }
    let g = Geodesic::new(BoundaryPoint::Infinity, vp)?;
    let x = g.closest_point(midpoint(u0.base(), v0.base()));
    Ok(hamenstadt_distance_via(&u0, &v0, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iso(a: f64, b: f64, c: f64, d: f64) -> Isometry {
        Isometry::new(a, b, c, d).unwrap()
    }

    fn pt(x: f64, y: f64) -> PlanePoint {
        PlanePoint::new(x, y).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mobius_examples() {
        let p = Isometry::IDENTITY.apply(BASEPOINT);
        assert_eq!(p, BASEPOINT);
        let t = iso(1.0, 1.0, 0.0, 1.0);
        assert_eq!(t.apply_boundary(BoundaryPoint::Infinity), BoundaryPoint::Infinity);
        // -1/(2i) = i/2
        let s = iso(0.0, -1.0, 1.0, 0.0);
        let q = s.apply(pt(0.0, 2.0));
        assert!(close(q.x, 0.0, 1e-15) && close(q.y, 0.5, 1e-15));
    }

    #[test]
    fn pole_maps_to_infinity() {
        let m = iso(2.0, 1.0, 1.0, 1.0);
        assert_eq!(m.apply_boundary(BoundaryPoint::Finite(-1.0)), BoundaryPoint::Infinity);
        assert_eq!(m.apply_boundary(BoundaryPoint::Infinity), BoundaryPoint::Finite(2.0));
    }

    #[test]
    fn rejects_singular_matrix() {
        assert!(Isometry::new(1.0, 2.0, 2.0, 4.0).is_err());
        assert!(Isometry::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(PlanePoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn canonical_sign() {
        let m = iso(-2.0, 0.0, 0.0, -0.5);
        assert_eq!(m.entries(), [2.0, 0.0, 0.0, 0.5]);
        let n = iso(0.0, -1.0, 1.0, 0.0);
        assert_eq!(n.entries(), [0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hyperbolic_distance(BASEPOINT, BASEPOINT), 0.0);
        assert!(close(hyperbolic_distance(BASEPOINT, pt(0.0, 2.0)), 2f64.ln(), 1e-15));
    }

    #[test]
    fn busemann_examples() {
        let p = pt(0.3, 0.7);
        assert_eq!(busemann(BoundaryPoint::Finite(1.2), p, p), 0.0);
        assert_eq!(busemann(BoundaryPoint::Infinity, p, p), 0.0);
        // finite-distance oracle d(i, iT) - d(2i, iT)
        let far = pt(0.0, 1e6);
        let oracle = hyperbolic_distance(BASEPOINT, far) - hyperbolic_distance(pt(0.0, 2.0), far);
        let b = busemann(BoundaryPoint::Infinity, BASEPOINT, pt(0.0, 2.0));
        assert!(close(b, 2f64.ln(), 1e-15));
        assert!(close(b, oracle, 1e-9));
        let b0 = busemann(BoundaryPoint::Finite(0.0), BASEPOINT, pt(0.0, 2.0));
        assert!(close(b0, -(2f64.ln()), 1e-15));
    }

    #[test]
    fn endpoints_conventions() {
        let u = UnitTangent::identity();
        assert_eq!(u.endpoints(), (BoundaryPoint::Finite(0.0), BoundaryPoint::Infinity));
        let r = UnitTangent::from_frame(iso(0.0, -1.0, 1.0, 0.0));
        assert_eq!(r.endpoints(), (BoundaryPoint::Infinity, BoundaryPoint::Finite(0.0)));
        assert_eq!(u.busemann_coordinate(), 0.0);
    }

    #[test]
    fn pointing_places_vectors() {
        let u = UnitTangent::pointing(BASEPOINT, 0.5 * PI).unwrap();
        assert!(u.frame_distance(&UnitTangent::identity()) < 1e-15);
        for angle in [-3.0, -1.0, 0.0, 2.0, 3.1] {
            let v = UnitTangent::pointing(PlanePoint { x: 1.5, y: 0.3 }, angle).unwrap();
            assert!((v.direction_angle() - angle).abs() < 1e-12);
            assert!(hyperbolic_distance(v.base(), PlanePoint { x: 1.5, y: 0.3 }) < 1e-12);
        }
        assert!(UnitTangent::pointing(PlanePoint { x: 0.0, y: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn from_coordinates_identity() {
        let u = UnitTangent::from_coordinates(BoundaryPoint::Finite(0.0), BoundaryPoint::Infinity, 0.0)
            .unwrap();
        assert!(u.frame_distance(&UnitTangent::identity()) < 1e-15);
        assert!(UnitTangent::from_coordinates(BoundaryPoint::Infinity, BoundaryPoint::Infinity, 0.0)
            .is_err());
        assert!(UnitTangent::from_coordinates(
            BoundaryPoint::Finite(0.5),
            BoundaryPoint::Finite(0.5),
            1.0
        )
        .is_err());
    }

    #[test]
    fn from_coordinates_unit_semicircle() {
        // Root-find the Busemann-zero point on the unit semicircle by bisection
        // in the angle, independently of the chart construction.
        let f = |theta: f64| busemann(BoundaryPoint::Finite(-1.0), pt(theta.cos(), theta.sin()), BASEPOINT);
        let (mut lo, mut hi) = (1e-3, PI - 1e-3);
        // f is positive near 1 and tends to -inf near -1
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = 0.5 * (lo + hi);
        let u = UnitTangent::from_coordinates(BoundaryPoint::Finite(-1.0), BoundaryPoint::Finite(1.0), 0.0)
            .unwrap();
        let b = u.base();
        assert!(close(b.x, theta.cos(), 1e-12) && close(b.y, theta.sin(), 1e-12));
        assert_eq!(u.backward(), BoundaryPoint::Finite(-1.0));
        assert!(close(u.forward().finite().unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn geodesic_flow_examples() {
        let u = UnitTangent::identity().geodesic_flow(1.5);
        let b = u.base();
        assert!(close(b.x, 0.0, 1e-15) && close(b.y, 1.5f64.exp(), 1e-12));
        assert_eq!(UnitTangent::identity().geodesic_flow(0.0), UnitTangent::identity());
        assert!(close(u.busemann_coordinate(), 1.5, 1e-14));
    }

    #[test]
    fn horocycle_flow_example() {
        let u = UnitTangent::identity().horocycle_flow(1.0);
        assert_eq!(u.frame().entries(), [1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn hamenstadt_examples() {
        let u = UnitTangent::from_coordinates(BoundaryPoint::Finite(0.3), BoundaryPoint::Finite(-2.0), 0.4)
            .unwrap();
        assert_eq!(hamenstadt_distance(&u, &u).unwrap(), 0.0);
        let v = u.horocycle_flow(-2.5);
        assert!(close(hamenstadt_distance(&u, &v).unwrap(), 2.5, 1e-12));
        assert!(hamenstadt_distance(&u, &u.geodesic_flow(0.2)).is_err());
        // dilation under the geodesic flow
        let t = 0.8;
        let d = hamenstadt_distance(&u.geodesic_flow(t), &v.geodesic_flow(t)).unwrap();
        assert!(close(d, t.exp() * 2.5, 1e-11));
    }

    #[test]
    fn same_leaf_examples() {
        let u = UnitTangent::from_coordinates(BoundaryPoint::Finite(1.0), BoundaryPoint::Finite(4.0), -0.3)
            .unwrap();
        assert!(same_leaf(&u, &u.horocycle_flow(3.0), 1e-10));
        assert!(!same_leaf(&u, &u.geodesic_flow(0.5), 1e-10));
        let w = UnitTangent::from_coordinates(BoundaryPoint::Finite(1.5), BoundaryPoint::Finite(4.0), -0.3)
            .unwrap();
        assert!(!same_leaf(&u, &w, 1e-10));
    }

    #[test]
    fn geodesic_projection_and_distance() {
        let g = Geodesic::new(BoundaryPoint::Finite(-1.0), BoundaryPoint::Finite(1.0)).unwrap();
        let p = pt(0.0, 3.0);
        assert!(close(g.distance_to(p), 3f64.ln(), 1e-14));
        let c = g.closest_point(p);
        assert!(close(c.x, 0.0, 1e-14) && close(c.y, 1.0, 1e-14));
        let v = Geodesic::new(BoundaryPoint::Finite(2.0), BoundaryPoint::Infinity).unwrap();
        let q = pt(3.0, 1.0);
        assert!(close(v.distance_to(q), hyperbolic_distance(q, v.closest_point(q)), 1e-13));
    }

    #[test]
    fn midpoint_is_equidistant() {
        let (p, q) = (pt(-1.3, 0.2), pt(2.0, 4.0));
        let m = midpoint(p, q);
        let d = hyperbolic_distance(p, q);
        assert!(close(hyperbolic_distance(p, m), 0.5 * d, 1e-12));
        assert!(close(hyperbolic_distance(q, m), 0.5 * d, 1e-12));
    }

    #[test]
    fn ray_endpoint_examples() {
        assert_eq!(ray_endpoint(pt(0.0, 5.0)).unwrap(), BoundaryPoint::Infinity);
        assert_eq!(ray_endpoint(pt(0.0, 0.5)).unwrap(), BoundaryPoint::Finite(0.0));
        assert!(ray_endpoint(BASEPOINT).is_err());
        // points on the unit semicircle end at ±1
        let e = ray_endpoint(pt(0.6, 0.8)).unwrap().finite().unwrap();
        assert!(close(e, 1.0, 1e-15));
        let e = ray_endpoint(pt(-0.6, 0.8)).unwrap().finite().unwrap();
        assert!(close(e, -1.0, 1e-15));
    }

    fn arb_iso() -> impl Strategy<Value = Isometry> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.2f64..3.0).prop_map(|(x, ly, ang, k)| {
            // translation · dilation · rotation, always well conditioned
            let y = ly.exp();
            let t = Isometry::new(y.sqrt(), x / y.sqrt(), 0.0, 1.0 / y.sqrt()).unwrap();
            let r = Isometry::new(ang.cos(), ang.sin(), -ang.sin(), ang.cos()).unwrap();
            let s = Isometry::geodesic(k.ln());
            t * r * s
        })
    }

    fn arb_point() -> impl Strategy<Value = PlanePoint> {
        (-4.0f64..4.0, -3.0f64..3.0).prop_map(|(x, ly)| PlanePoint { x, y: ly.exp() })
    }

    fn arb_boundary() -> impl Strategy<Value = BoundaryPoint> {
        prop_oneof![
            9 => (-5.0f64..5.0).prop_map(BoundaryPoint::Finite),
            1 => Just(BoundaryPoint::Infinity),
        ]
    }

    proptest! {
        #[test]
        fn distance_is_isometry_invariant(m in arb_iso(), p in arb_point(), q in arb_point()) {
            let d0 = hyperbolic_distance(p, q);
            let d1 = hyperbolic_distance(m.apply(p), m.apply(q));
            prop_assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0));
            prop_assert!((hyperbolic_distance(q, p) - d0).abs() == 0.0);
        }

        #[test]
        fn busemann_cocycle(xi in arb_boundary(), p in arb_point(), q in arb_point(), r in arb_point()) {
            let lhs = busemann(xi, p, q) + busemann(xi, q, r);
            prop_assert!((lhs - busemann(xi, p, r)).abs() <= 1e-10);
        }

        #[test]
        fn busemann_equivariant(m in arb_iso(), xi in arb_boundary(), p in arb_point(), q in arb_point()) {
            let lhs = busemann(m.apply_boundary(xi), m.apply(p), m.apply(q));
            prop_assert!((lhs - busemann(xi, p, q)).abs() <= 1e-10);
        }

        #[test]
        fn ray_endpoint_lies_on_ray(p in arb_point()) {
            prop_assume!(hyperbolic_distance(p, BASEPOINT) > 1e-3);
            let xi = ray_endpoint(p).unwrap();
            // i, p and xi are aligned: d(i, p) equals the Busemann difference
            let b = busemann(xi, BASEPOINT, p);
            prop_assert!((b - hyperbolic_distance(BASEPOINT, p)).abs() <= 1e-9);
        }

        #[test]
        fn round_trip_coordinates(m in arb_iso()) {
            let u = UnitTangent::from_frame(m);
            let (a, b) = u.endpoints();
            let v = UnitTangent::from_coordinates(a, b, u.busemann_coordinate()).unwrap();
            prop_assert!(u.frame_distance(&v) <= 1e-9);
        }

        #[test]
        fn endpoints_equivariant(m in arb_iso(), g in arb_iso()) {
            let u = UnitTangent::from_frame(m);
            let (a, b) = u.translate(&g).endpoints();
            prop_assert!(a.visual_distance(&g.apply_boundary(u.backward())) <= 1e-12);
            prop_assert!(b.visual_distance(&g.apply_boundary(u.forward())) <= 1e-12);
        }

        #[test]
        fn geodesic_flow_group_law(m in arb_iso(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
            let u = UnitTangent::from_frame(m);
            let lhs = u.geodesic_flow(s).geodesic_flow(t);
            prop_assert!(lhs.frame_distance(&u.geodesic_flow(s + t)) <= 1e-12 * lhs.frame().norm_sq());
            prop_assert!((u.geodesic_flow(t).busemann_coordinate() - u.busemann_coordinate() - t).abs() <= 1e-10);
        }

        #[test]
        fn flows_conjugate(m in arb_iso(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
            let u = UnitTangent::from_frame(m);
            let lhs = u.horocycle_flow(s).geodesic_flow(t);
            let rhs = u.geodesic_flow(t).horocycle_flow(s * t.exp());
            prop_assert!(lhs.frame_distance(&rhs) <= 1e-9);
        }

        #[test]
        fn horocycle_keeps_backward_endpoint(m in arb_iso(), t in -50.0f64..50.0) {
            let u = UnitTangent::from_frame(m);
            let v = u.horocycle_flow(t);
            prop_assert!(v.backward().visual_distance(&u.backward()) <= 1e-12);
            prop_assert!(same_leaf(&u, &v, 1e-9));
        }

        #[test]
        fn hamenstadt_well_defined(m in arb_iso(), t in 0.05f64..20.0, k in -3.0f64..3.0) {
            let u = UnitTangent::from_frame(m);
            let v = u.horocycle_flow(t);
            let g = Geodesic::new(u.forward(), v.forward()).unwrap();
            let x1 = g.closest_point(midpoint(u.base(), v.base()));
            // slide along the geodesic by distance k
            let chart = geodesic_chart(g.a, g.b);
            let y = chart.inverse().apply(x1);
            let x2 = chart.apply(PlanePoint { x: 0.0, y: y.y.hypot(y.x) * k.exp() });
            let d1 = hamenstadt_distance_via(&u, &v, x1);
            let d2 = hamenstadt_distance_via(&u, &v, x2);
            prop_assert!((d1 - d2).abs() <= 1e-9 * d1);
            prop_assert!((d1 - t).abs() <= 1e-9 * t.max(1.0));
        }

        #[test]
        fn hamenstadt_isometry_invariant(m in arb_iso(), g in arb_iso(), t in -20.0f64..20.0) {
            let u = UnitTangent::from_frame(m);
            let v = u.horocycle_flow(t);
            let d0 = hamenstadt_distance(&u, &v).unwrap();
            let d1 = hamenstadt_distance(&u.translate(&g), &v.translate(&g)).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0));
            prop_assert!((hamenstadt_distance(&v, &u).unwrap() - d0).abs() <= 1e-10 * d0.max(1.0));
        }
    }
}
