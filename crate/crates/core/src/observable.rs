//! Test functions on the unit tangent bundle of the quotient surface.
//!
//! A function is evaluated on the representative of a frame in the
//! fundamental domain, so it is invariant under the group by construction.
//! Compactly supported functions keep their support ball strictly inside the
//! fundamental domain; this keeps them continuous across the walls.

use crate::error::{Error, Result};
use crate::geometry::{
    busemann, hyperbolic_distance, wrap_angle, Isometry, PlanePoint, UnitTangent, BASEPOINT,
};
use crate::group::FuchsianGroup;

/// Width of the ramp of the smoothed cusp indicator, in height units.
pub const CUSP_RAMP: f64 = 0.1;

/// `exp(1 − 1/(1 − x²))` on `|x| < 1`, zero outside; equal to 1 at 0.
pub fn bump_profile(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

/// Smooth bump in base point and direction around a center frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    center: UnitTangent,
    base: PlanePoint,
    angle: f64,
    w_base: f64,
    w_angle: f64,
}

impl Bump {
    pub fn center(&self) -> &UnitTangent {
        &self.center
    }

    pub fn base_width(&self) -> f64 {
        self.w_base
    }

    pub fn angle_width(&self) -> f64 {
        self.w_angle
    }

    fn eval(&self, rep: &Isometry) -> f64 {
        let p = rep.apply(BASEPOINT);
        let d = hyperbolic_distance(p, self.base);
        if d >= self.w_base {
            return 0.0;
        }
        let radial = bump_profile(d / self.w_base);
        if self.w_angle.is_infinite() {
            return radial;
        }
        let dir = UnitTangent::from_frame(*rep).direction_angle();
        let diff = wrap_angle(dir - self.angle).abs();
        radial * bump_profile(diff / self.w_angle)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    Bump(Bump),
    /// C¹ smoothed indicator of `{cusp height ≤ height}`; the height of a
    /// base point is `exp β_ξ(o, p)` maximized over the cusp points `ξ`.
    CuspCutoff { height: f64 },
    /// Indicator of the base point lying in a ball.
    Ball { center: PlanePoint, radius: f64 },
    /// `offset + scale·inner`.
    Affine {
        inner: Box<TestFunction>,
        offset: f64,
        scale: f64,
    },
}

/// Where a test function may be nonzero, in the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Everywhere,
    Ball { center: PlanePoint, radius: f64 },
}

impl TestFunction {
    /// Bump of radius `w_base` (hyperbolic distance) and angular half-width
    /// `w_angle`; pass `f64::INFINITY` for no angular dependence.
    pub fn bump(group: &FuchsianGroup, center: UnitTangent, w_base: f64, w_angle: f64) -> Result<Self> {
        if !(w_base > 0.0) || !(w_angle > 0.0) {
            return Err(Error::invalid("bump widths must be positive"));
        }
        let base = center.base();
        check_inside(group, base, w_base)?;
        Ok(TestFunction::Bump(Bump {
            center,
            base,
            angle: center.direction_angle(),
            w_base,
            w_angle,
        }))
    }

    pub fn ball(group: &FuchsianGroup, center: PlanePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        check_inside(group, center, radius)?;
        Ok(TestFunction::Ball { center, radius })
    }

    pub fn cusp_cutoff(group: &FuchsianGroup, height: f64) -> Result<Self> {
        if group.cusp_points().is_empty() {
            return Err(Error::invalid("cusp cutoff needs a group with cusps"));
        }
        if !(height > 0.0) {
            return Err(Error::invalid("cusp height must be positive"));
        }
        Ok(TestFunction::CuspCutoff { height })
    }

    pub fn support(&self) -> Support {
        match self {
            TestFunction::Bump(b) => Support::Ball {
                center: b.base,
                radius: b.w_base,
            },
            TestFunction::Ball { center, radius } => Support::Ball {
                center: *center,
                radius: *radius,
            },
            _ => Support::Everywhere,
        }
    }

    /// Supremum of `|ψ|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Constant(c) => c.abs(),
            TestFunction::Affine { inner, offset, scale } => offset.abs() + scale.abs() * inner.sup_norm(),
            _ => 1.0,
        }
    }

    /// Value at a frame already in the fundamental domain.
    pub fn eval_rep(&self, group: &FuchsianGroup, rep: &Isometry) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Bump(b) => b.eval(rep),
            TestFunction::Ball { center, radius } => {
                if hyperbolic_distance(rep.apply(BASEPOINT), *center) < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::CuspCutoff { height } => {
                let h = cusp_height(group, rep.apply(BASEPOINT));
                smooth_step((height + CUSP_RAMP - h) / CUSP_RAMP)
            }
            TestFunction::Affine { inner, offset, scale } => offset + scale * inner.eval_rep(group, rep),
        }
    }

    pub fn eval(&self, group: &FuchsianGroup, v: &UnitTangent) -> Result<f64> {
        if let TestFunction::Constant(c) = self {
            return Ok(*c);
        }
        Ok(self.eval_rep(group, &group.representative(v.frame())?))
    }
}

/// Evaluates several functions with one reduction.
pub fn eval_all(
    group: &FuchsianGroup,
    fns: &[TestFunction],
    frame: &Isometry,
    out: &mut [f64],
) -> Result<()> {
    let rep = group.representative(frame)?;
    for (f, o) in fns.iter().zip(out.iter_mut()) {
        *o = f.eval_rep(group, &rep);
    }
    Ok(())
}

/// `exp β_ξ(o, p)` maximized over the cusp points; `1` with no cusps.
pub fn cusp_height(group: &FuchsianGroup, p: PlanePoint) -> f64 {
    let cusps = group.cusp_points();
    if cusps.is_empty() {
        return 1.0;
    }
    cusps
        .iter()
        .map(|&xi| busemann(xi, BASEPOINT, p).exp())
        .fold(0.0, f64::max)
}

/// `0` below 0, `1` above 1, `3x² − 2x³` between.
fn smooth_step(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

fn check_inside(group: &FuchsianGroup, center: PlanePoint, radius: f64) -> Result<()> {
    let margin = group.wall_margin(center);
    if margin <= radius {
        return Err(Error::invalid(format!(
            "support ball of radius {radius} at ({}, {}) leaves the fundamental domain (wall margin {margin:.4})",
            center.x, center.y
        )));
    }
    Ok(())
}
