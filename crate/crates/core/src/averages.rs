//! Averages of test functions over horocycle balls `B⁺(u, r) = {h^s u : |s| < r}`
//! and the experiments built on them.
//!
//! Three leafwise measures are supported: the Patterson–Sullivan conditional
//! (atom sums, exact given the measure), arc length (adaptive Simpson), and
//! a positive weighted density of the base point.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Isometry, UnitTangent};
use crate::group::{FuchsianGroup, GeneratorKind, LimitClass, LimitSample, Letter};
use crate::observable::{eval_all, TestFunction};
use crate::patterson::{conditional_within, AtomicBoundaryMeasure, ConditionalHorocycleMeasure};

/// Width of the pieces the orbit integrals are split into before adaptive
/// refinement; smaller than any bump the experiments use.
const PIECE: f64 = 0.1;
const MAX_DEPTH: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoroBall {
    pub center: UnitTangent,
    pub radius: f64,
}

impl HoroBall {
    pub fn new(center: UnitTangent, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("horoball radius must be positive and finite"));
        }
        Ok(HoroBall { center, radius })
    }

    pub fn contains_param(&self, s: f64) -> bool {
        s.abs() < self.radius
    }
}

/// Leafwise measure used for averaging.
#[derive(Clone, Debug, PartialEq)]
pub enum HaarDensity {
    /// Arc length.
    Constant,
    /// The Patterson–Sullivan conditional.
    Ps,
    /// Arc length times `1 + amplitude·f(base point)` with `f ∈ [0, 1]`.
    Weighted { bump: TestFunction, amplitude: f64 },
}

impl HaarDensity {
    pub fn weighted(bump: TestFunction, amplitude: f64) -> Result<Self> {
        if !(amplitude > -1.0) || !amplitude.is_finite() {
            return Err(Error::invalid("density amplitude must exceed −1 to stay positive"));
        }
        if let TestFunction::Constant(c) = bump {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::invalid("density profile must take values in [0, 1]"));
            }
        }
        Ok(HaarDensity::Weighted { bump, amplitude })
    }

    pub fn name(&self) -> &'static str {
        match self {
            HaarDensity::Constant => "constant",
            HaarDensity::Ps => "ps",
            HaarDensity::Weighted { .. } => "weighted",
        }
    }

    /// Density as a test function, for the Burger–Roblin quadrature.
    pub fn leaf_density(&self) -> Option<TestFunction> {
        match self {
            HaarDensity::Weighted { bump, amplitude } => Some(TestFunction::Affine {
                inner: Box::new(bump.clone()),
                offset: 1.0,
                scale: *amplitude,
            }),
            _ => None,
        }
    }
}

/// Series of averages against an increasing abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageSeries {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub reference: f64,
    pub experiment_id: String,
    pub seed: Option<u64>,
}

impl AverageSeries {
    pub fn new(
        abscissae: Vec<f64>,
        values: Vec<f64>,
        reference: f64,
        experiment_id: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(Error::invalid("abscissae and values differ in length"));
        }
        if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("abscissae must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite series value {v}")));
        }
        Ok(AverageSeries {
            abscissae,
            values,
            reference,
            experiment_id: experiment_id.into(),
            seed,
        })
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// `|value − reference| / |reference|` at every abscissa.
    pub fn relative_errors(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| (v - self.reference).abs() / self.reference.abs())
            .collect()
    }
}

/// Where the backward endpoint of a constructed vector sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorClass {
    /// Radial limit point.
    Radial,
    /// Parabolic fixed point: the horocycle closes up.
    Parabolic,
    /// Not a limit point.
    Wandering,
}

impl VectorClass {
    pub fn name(&self) -> &'static str {
        match self {
            VectorClass::Radial => "E_R",
            VectorClass::Parabolic => "E_P",
            VectorClass::Wandering => "wandering",
        }
    }
}

/// A vector built from endpoint samples, tagged by its backward endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructedVector {
    pub vector: UnitTangent,
    pub class: VectorClass,
    pub witness: String,
}

/// `u = from_coordinates(backward, forward, s)`. A `None` backward sample
/// means an explicit point outside the limit set.
pub fn construct_vector(
    backward: &LimitSample,
    forward: BoundaryPoint,
    s: f64,
) -> Result<ConstructedVector> {
    let vector = UnitTangent::from_coordinates(backward.point, forward, s)?;
    let class = match backward.class {
        LimitClass::Radial => VectorClass::Radial,
        LimitClass::Parabolic => VectorClass::Parabolic,
    };
    Ok(ConstructedVector {
        vector,
        class,
        witness: backward.witness.clone(),
    })
}

pub fn construct_wandering(
    group: &FuchsianGroup,
    backward: BoundaryPoint,
    forward: BoundaryPoint,
    s: f64,
) -> Result<ConstructedVector> {
    if group.domain_of(backward).is_some() {
        return Err(Error::invalid(format!(
            "{backward} lies in a generator domain; pick a point of the fundamental domain's free arcs"
        )));
    }
    Ok(ConstructedVector {
        vector: UnitTangent::from_coordinates(backward, forward, s)?,
        class: VectorClass::Wandering,
        witness: format!("explicit:{backward}"),
    })
}

/// Atom averages of several functions over several radii in one pass.
/// Functions are evaluated at `h^{s}u·g^{t}` with `t = push`, so `push ≠ 0`
/// averages `ψ∘g^t`. Returns `[radius][function]`.
pub fn ps_averages(
    group: &FuchsianGroup,
    cond: &ConditionalHorocycleMeasure,
    radii: &[f64],
    psis: &[TestFunction],
    push: f64,
) -> Result<Vec<Vec<f64>>> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let max_lw = cond
        .params()
        .iter()
        .zip(cond.log_weights())
        .filter(|(s, _)| s.abs() < r_max)
        .map(|(_, &w)| w)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_lw.is_finite() {
        return Err(Error::numeric(format!(
            "no conditional mass within radius {r_max}"
        )));
    }
    let frame = *cond.leaf().frame();
    let tail = Isometry::geodesic(push);
    let mut mass = vec![0.0; radii.len()];
    let mut sums = vec![vec![0.0; psis.len()]; radii.len()];
    let mut vals = vec![0.0; psis.len()];
    for (&s, &lw) in cond.params().iter().zip(cond.log_weights()) {
        if !(s.abs() < r_max) {
            continue;
        }
        let w = (lw - max_lw).exp();
        let f = frame.compose(&Isometry::horocycle(s));
        let f = if push == 0.0 { f } else { f.compose(&tail) };
        eval_all(group, psis, &f, &mut vals)?;
        for (k, &r) in radii.iter().enumerate() {
            if s.abs() < r {
                mass[k] += w;
                for (acc, v) in sums[k].iter_mut().zip(&vals) {
                    *acc += w * v;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        if !(mass[k] > 0.0) {
            return Err(Error::numeric(format!("no conditional mass within radius {r}")));
        }
        out.push(sums[k].iter().map(|v| v / mass[k]).collect());
    }
    Ok(out)
}

/// `M_{r,u}(ψ)` against the Patterson–Sullivan conditional.
pub fn average_ps(
    group: &FuchsianGroup,
    cond: &ConditionalHorocycleMeasure,
    r: f64,
    psi: &TestFunction,
) -> Result<f64> {
    Ok(ps_averages(group, cond, &[r], std::slice::from_ref(psi), 0.0)?[0][0])
}

/// `|M_{r,u}(ψ) − M_{re^{−t}, g^{−t}u}(ψ∘g^t)|`, each side from its own
/// conditional measure.
pub fn flow_commutation_residual(
    group: &FuchsianGroup,
    u: &UnitTangent,
    r: f64,
    t: f64,
    psi: &TestFunction,
    measure: &AtomicBoundaryMeasure,
    delta: f64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let lhs_cond = conditional_within(u, measure, delta, r);
    let lhs = average_ps(group, &lhs_cond, r, psi)?;
    let v = u.geodesic_flow(-t);
    let r2 = r * (-t).exp();
    let rhs_cond = conditional_within(&v, measure, delta, r2);
    let rhs = ps_averages(group, &rhs_cond, &[r2], std::slice::from_ref(psi), t)?[0][0];
    Ok((lhs - rhs).abs())
}

/// Adaptive Simpson on a vector-valued integrand; `whole` holds the
/// three-point estimate on `[a, b]`.
#[allow(clippy::too_many_arguments)]
fn simpson_refine(
    f: &mut dyn FnMut(f64, &mut [f64]) -> Result<()>,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    whole: &[f64],
    tol: f64,
    depth: u32,
    out: &mut [f64],
) -> Result<()> {
    let n = out.len();
    let m = 0.5 * (a + b);
    let h = b - a;
    let mut flm = vec![0.0; n];
    let mut frm = vec![0.0; n];
    f(0.5 * (a + m), &mut flm)?;
    f(0.5 * (m + b), &mut frm)?;
    let left: Vec<f64> = (0..n).map(|k| h / 12.0 * (fa[k] + 4.0 * flm[k] + fm[k])).collect();
    let right: Vec<f64> = (0..n).map(|k| h / 12.0 * (fm[k] + 4.0 * frm[k] + fb[k])).collect();
    let err = (0..n)
        .map(|k| (left[k] + right[k] - whole[k]).abs())
        .fold(0.0, f64::max);
    if depth == 0 || err <= 15.0 * tol {
        for k in 0..n {
            out[k] += left[k] + right[k] + (left[k] + right[k] - whole[k]) / 15.0;
        }
        return Ok(());
    }
    simpson_refine(f, a, m, fa, &flm, fm, &left, 0.5 * tol, depth - 1, out)?;
    simpson_refine(f, m, b, fm, &frm, fb, &right, 0.5 * tol, depth - 1, out)
}

/// `∫_a^b f` for a vector-valued `f`, split into pieces of width at most
/// [`PIECE`], absolute tolerance `tol` overall.
pub(crate) fn integrate_vec(
    f: &mut dyn FnMut(f64, &mut [f64]) -> Result<()>,
    a: f64,
    b: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<()> {
    if b <= a {
        return Ok(());
    }
    let n = out.len();
    let pieces = ((b - a) / PIECE).ceil().max(1.0) as usize;
    let step = (b - a) / pieces as f64;
    let piece_tol = tol / pieces as f64;
    let mut fa = vec![0.0; n];
    let mut fm = vec![0.0; n];
    let mut fb = vec![0.0; n];
    f(a, &mut fa)?;
    for i in 0..pieces {
        let lo = a + step * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + step };
        f(0.5 * (lo + hi), &mut fm)?;
        f(hi, &mut fb)?;
        let whole: Vec<f64> = (0..n).map(|k| (hi - lo) / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k])).collect();
        simpson_refine(f, lo, hi, &fa, &fm, &fb, &whole, piece_tol, MAX_DEPTH, out)?;
        std::mem::swap(&mut fa, &mut fb);
    }
    Ok(())
}

/// Arc-length integrals `∫_{−r}^{r} ψ(h^s u)·f(h^s u) ds` for each radius
/// and function, with `f` the optional leaf density. Returns
/// `[radius][function]` plus the integrals of `f` alone as the last column.
fn orbit_integrals(
    group: &FuchsianGroup,
    u: &UnitTangent,
    radii: &[f64],
    psis: &[TestFunction],
    density: Option<&TestFunction>,
) -> Result<Vec<Vec<f64>>> {
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be positive and increasing"));
    }
    let n = psis.len() + 1;
    let frame = *u.frame();
    let mut vals = vec![0.0; psis.len()];
    let mut f = |s: f64, out: &mut [f64]| -> Result<()> {
        let g = frame.compose(&Isometry::horocycle(s));
        let rep = group.representative(&g)?;
        let w = match density {
            Some(d) => d.eval_rep(group, &rep),
            None => 1.0,
        };
        for (v, psi) in vals.iter_mut().zip(psis) {
            *v = psi.eval_rep(group, &rep);
        }
        for k in 0..psis.len() {
            out[k] = vals[k] * w;
        }
        out[psis.len()] = w;
        Ok(())
    };
    let mut acc = vec![0.0; n];
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let tol = 1e-6 * (r - prev);
        integrate_vec(&mut f, -r, -prev, tol, &mut acc)?;
        integrate_vec(&mut f, prev, r, tol, &mut acc)?;
        prev = r;
        out.push(acc.clone());
    }
    Ok(out)
}

/// Arc-length averages `(1/2r)∫_{−r}^{r} ψ(h^s u) ds` for several radii
/// and functions, `[radius][function]`.
pub fn lebesgue_averages(
    group: &FuchsianGroup,
    u: &UnitTangent,
    radii: &[f64],
    psis: &[TestFunction],
) -> Result<Vec<Vec<f64>>> {
    let ints = orbit_integrals(group, u, radii, psis, None)?;
    Ok(ints
        .iter()
        .zip(radii)
        .map(|(row, r)| row[..psis.len()].iter().map(|v| v / (2.0 * r)).collect())
        .collect())
}

pub fn average_lebesgue(group: &FuchsianGroup, u: &UnitTangent, t: f64, psi: &TestFunction) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("averaging window must be positive"));
    }
    Ok(lebesgue_averages(group, u, &[t], std::slice::from_ref(psi))?[0][0])
}

/// `M^α_{r,u}(ψ)` for several radii and functions, `[radius][function]`.
/// The Patterson–Sullivan choice needs the conditional measure of `u`.
pub fn haar_averages(
    group: &FuchsianGroup,
    u: &UnitTangent,
    radii: &[f64],
    psis: &[TestFunction],
    alpha: &HaarDensity,
    cond: Option<&ConditionalHorocycleMeasure>,
) -> Result<Vec<Vec<f64>>> {
    match alpha {
        HaarDensity::Constant => lebesgue_averages(group, u, radii, psis),
        HaarDensity::Ps => {
            let cond = cond.ok_or_else(|| {
                Error::invalid("Patterson–Sullivan averages need a conditional measure")
            })?;
            if cond.leaf().frame_distance(u) > 1e-12 {
                return Err(Error::invalid("conditional measure belongs to another vector"));
            }
            ps_averages(group, cond, radii, psis, 0.0)
        }
        HaarDensity::Weighted { .. } => {
            let dens = alpha.leaf_density();
            let ints = orbit_integrals(group, u, radii, psis, dens.as_ref())?;
            Ok(ints
                .iter()
                .map(|row| {
                    let mass = row[psis.len()];
                    row[..psis.len()].iter().map(|v| v / mass).collect()
                })
                .collect())
        }
    }
}

pub fn average_haar(
    group: &FuchsianGroup,
    u: &UnitTangent,
    r: f64,
    psi: &TestFunction,
    alpha: &HaarDensity,
    cond: Option<&ConditionalHorocycleMeasure>,
) -> Result<f64> {
    Ok(haar_averages(group, u, &[r], std::slice::from_ref(psi), alpha, cond)?[0][0])
}

/// `M^α_{r,u}(ψ)/M^α_{r,u}(φ)` over the radii.
#[allow(clippy::too_many_arguments)]
pub fn ratio_series(
    group: &FuchsianGroup,
    u: &UnitTangent,
    psi: &TestFunction,
    phi: &TestFunction,
    radii: &[f64],
    alpha: &HaarDensity,
    cond: Option<&ConditionalHorocycleMeasure>,
    reference: f64,
    experiment_id: &str,
    seed: Option<u64>,
) -> Result<AverageSeries> {
    let rows = haar_averages(group, u, radii, &[psi.clone(), phi.clone()], alpha, cond)?;
    let last = rows.last().ok_or_else(|| Error::invalid("no radii"))?;
    if last[1] == 0.0 {
        return Err(Error::numeric(format!(
            "denominator average vanishes at radius {}",
            radii[radii.len() - 1]
        )));
    }
    let values = rows
        .iter()
        .map(|r| if r[1] == 0.0 { f64::NAN } else { r[0] / r[1] })
        .collect::<Vec<_>>();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::numeric("denominator average vanishes at a small radius"));
    }
    AverageSeries::new(radii.to_vec(), values, reference, experiment_id, seed)
}

/// `t ↦ M_{r,u}(ψ∘g^t)`.
#[allow(clippy::too_many_arguments)]
pub fn mixing_series(
    group: &FuchsianGroup,
    cond: &ConditionalHorocycleMeasure,
    r: f64,
    psi: &TestFunction,
    times: &[f64],
    reference: f64,
    experiment_id: &str,
    seed: Option<u64>,
) -> Result<AverageSeries> {
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        values.push(ps_averages(group, cond, &[r], std::slice::from_ref(psi), t)?[0][0]);
    }
    AverageSeries::new(times.to_vec(), values, reference, experiment_id, seed)
}

/// `r ↦ M_{r,u}(χ)` for the smoothed indicator of `{cusp height ≤ K}`.
pub fn mass_in_compact(
    group: &FuchsianGroup,
    cond: &ConditionalHorocycleMeasure,
    radii: &[f64],
    k_height: f64,
    experiment_id: &str,
    seed: Option<u64>,
) -> Result<AverageSeries> {
    let chi = if group.cusp_points().is_empty() {
        TestFunction::Constant(1.0)
    } else {
        TestFunction::cusp_cutoff(group, k_height)?
    };
    let rows = ps_averages(group, cond, radii, &[chi], 0.0)?;
    AverageSeries::new(
        radii.to_vec(),
        rows.iter().map(|r| r[0]).collect(),
        1.0,
        experiment_id,
        seed,
    )
}

/// Smallest height on the grid whose mass series stays at or above
/// `target` over the radii.
pub fn calibrate_k_height(
    group: &FuchsianGroup,
    cond: &ConditionalHorocycleMeasure,
    radii: &[f64],
    candidates: &[f64],
    target: f64,
) -> Result<f64> {
    for &k in candidates {
        let s = mass_in_compact(group, cond, radii, k, "calibration", None)?;
        if s.values.iter().all(|v| *v >= target) {
            return Ok(k);
        }
    }
    Err(Error::numeric(format!(
        "no candidate height reaches mass {target}"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closure {
    pub t0: f64,
    pub residual: f64,
}

/// `t0` minimizing the frame distance between `p·u` and `h^{t0}u`.
///
/// When `u⁻` is fixed by `p`, `u⁻¹pu` is the unipotent `n_{t0}` and the
/// closed form seeds the refinement; otherwise a scan of the window
/// `|t0| ≤ 10·e^{|s(u)|}` does.
pub fn periodic_closure(group: &FuchsianGroup, p: Letter, u: &UnitTangent) -> Result<Closure> {
    if group.letter_kind(p) != GeneratorKind::Parabolic {
        return Err(Error::invalid(format!(
            "{} is not a parabolic generator",
            group.letter_name(p)
        )));
    }
    let pu = u.translate(group.matrix(p));
    let cost = |t: f64| pu.frame_distance(&u.horocycle_flow(t));
    let window = 10.0 * u.busemann_coordinate().abs().exp();
    let conj = u.frame().inverse().compose(group.matrix(p)).compose(u.frame());
    let [a, b, c, d] = conj.entries();
    let sign = if a + d < 0.0 { -1.0 } else { 1.0 };
    let seed = sign * c;
    let unipotent = b.abs() < 1e-6 && (sign * a - 1.0).abs() < 1e-6 && seed.abs() <= window;
    let (mut best, mut best_cost) = (seed, if unipotent { cost(seed) } else { f64::INFINITY });
    let bracket = if unipotent {
        1e-3 * (1.0 + seed.abs())
    } else {
        let n = 4000;
        let step = 2.0 * window / n as f64;
        for i in 0..=n {
            let t = -window + step * i as f64;
            let v = cost(t);
            if v < best_cost {
                best = t;
                best_cost = v;
            }
        }
        step
    };
    let t0 = golden_section(&cost, best - bracket, best + bracket, 1e-10);
    let refined = cost(t0);
    let (t0, residual) = if refined < best_cost { (t0, refined) } else { (best, best_cost) };
    Ok(Closure { t0, residual })
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BASEPOINT;
    use crate::group::WordSpec;
    use crate::patterson::{build_patterson, conditional_on_horocycle, PattersonConfig};

    fn radial_vector(g: &FuchsianGroup, seed: u64) -> UnitTangent {
        let back = g.sample_limit_point(&WordSpec::Random { seed, depth: 40 }).unwrap();
        let fwd = g.sample_limit_point(&WordSpec::Random { seed: seed + 1000, depth: 40 }).unwrap();
        construct_vector(&back, fwd.point, 0.0).unwrap().vector
    }

    #[test]
    fn constants_average_to_one() {
        let g = FuchsianGroup::default_schottky();
        let m = build_patterson(&g, &PattersonConfig::new(0.468, 8).unwrap()).unwrap();
        let u = radial_vector(&g, 1);
        let c = conditional_on_horocycle(&u, &m, 0.468);
        let one = TestFunction::Constant(1.0);
        assert!((average_ps(&g, &c, 5.0, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((average_lebesgue(&g, &u, 3.0, &one).unwrap() - 1.0).abs() < 1e-12);
        let w = HaarDensity::weighted(TestFunction::ball(&g, BASEPOINT, 0.3).unwrap(), 2.0).unwrap();
        assert!((average_haar(&g, &u, 3.0, &one, &w, None).unwrap() - 1.0).abs() < 1e-12);
        let r = flow_commutation_residual(&g, &u, 5.0, 0.0, &one, &m, 0.468).unwrap();
        assert_eq!(r, 0.0);
        assert!(average_ps(&g, &c, 1e-12, &one).is_err());
    }

    #[test]
    fn commutation_identity() {
        let g = FuchsianGroup::default_schottky();
        let m = build_patterson(&g, &PattersonConfig::new(0.468, 8).unwrap()).unwrap();
        let psi = TestFunction::bump(&g, UnitTangent::identity(), 0.5, 1.5).unwrap();
        for seed in [2, 3] {
            let u = radial_vector(&g, seed);
            for t in [-2.0, 1.0, 3.0] {
                let r = flow_commutation_residual(&g, &u, 20.0, t, &psi, &m, 0.468).unwrap();
                assert!(r <= 1e-9, "{seed} {t} {r}");
            }
        }
    }

    #[test]
    fn lebesgue_window_shift_bound() {
        let g = FuchsianGroup::default_schottky();
        let psi = TestFunction::bump(&g, UnitTangent::identity(), 0.5, 1.5).unwrap();
        let u = UnitTangent::identity();
        let t = 6.0;
        for s0 in [0.3, 1.0] {
            let a = average_lebesgue(&g, &u, t, &psi).unwrap();
            let b = average_lebesgue(&g, &u.horocycle_flow(s0), t, &psi).unwrap();
            assert!((a - b).abs() <= 2.0 * s0 / (2.0 * t) + 1e-6);
        }
        // monotone window mass for ψ ≥ 0
        let rows = lebesgue_averages(&g, &u, &[1.0, 2.0, 4.0], &[psi]).unwrap();
        let masses: Vec<f64> = rows.iter().zip([1.0, 2.0, 4.0]).map(|(r, w)| r[0] * 2.0 * w).collect();
        assert!(masses.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn lebesgue_vanishes_off_support() {
        // horizontal horocycle at height 50 never meets the ball at i
        let g = FuchsianGroup::default_schottky();
        let u = UnitTangent::from_coordinates(BoundaryPoint::Infinity, BoundaryPoint::Finite(0.0), -(50f64.ln()))
            .unwrap();
        assert!((u.base().y - 50.0).abs() < 1e-9);
        let ball = TestFunction::ball(&g, BASEPOINT, 0.5).unwrap();
        assert_eq!(average_lebesgue(&g, &u, 0.5, &ball).unwrap(), 0.0);
    }

    #[test]
    fn ratio_series_reciprocal() {
        let g = FuchsianGroup::default_schottky();
        let u = radial_vector(&g, 5);
        let psi = TestFunction::bump(&g, UnitTangent::identity(), 0.5, 1.5).unwrap();
        let phi = TestFunction::ball(&g, BASEPOINT, 0.6).unwrap();
        let radii = [200.0, 400.0];
        let a = ratio_series(&g, &u, &psi, &phi, &radii, &HaarDensity::Constant, None, 1.0, "x", None).unwrap();
        let b = ratio_series(&g, &u, &phi, &psi, &radii, &HaarDensity::Constant, None, 1.0, "x", None).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x * y - 1.0).abs() < 1e-12);
        }
        let same = ratio_series(&g, &u, &psi, &psi, &radii, &HaarDensity::Constant, None, 1.0, "x", None).unwrap();
        assert!(same.values.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn ps_density_matches_average_ps() {
        let g = FuchsianGroup::default_schottky();
        let m = build_patterson(&g, &PattersonConfig::new(0.468, 8).unwrap()).unwrap();
        let u = radial_vector(&g, 7);
        let c = conditional_on_horocycle(&u, &m, 0.468);
        let psi = TestFunction::bump(&g, UnitTangent::identity(), 0.5, 1.5).unwrap();
        let a = average_haar(&g, &u, 30.0, &psi, &HaarDensity::Ps, Some(&c)).unwrap();
        let b = average_ps(&g, &c, 30.0, &psi).unwrap();
        assert!((a - b).abs() <= 1e-9);
        let mix = mixing_series(&g, &c, 30.0, &psi, &[0.0, 1.0], 0.0, "m", None).unwrap();
        assert_eq!(mix.values[0], b);
    }

    #[test]
    fn closure_on_cusp() {
        let g = FuchsianGroup::default_cusped();
        let p = g.parse_word("p").unwrap()[0];
        let u = UnitTangent::from_coordinates(BoundaryPoint::Infinity, BoundaryPoint::Finite(0.5), 0.0).unwrap();
        let c = periodic_closure(&g, p, &u).unwrap();
        assert!(c.residual <= 1e-8);
        assert!((c.t0.abs() - 4.0).abs() < 1e-8, "{}", c.t0);
        for s in [0.5, 1.0, 2.0] {
            let d = periodic_closure(&g, p, &u.geodesic_flow(-s)).unwrap();
            assert!((d.t0 - (-s).exp() * c.t0).abs() <= 1e-8, "{s} {} {}", d.t0, c.t0);
        }
        let b = g.parse_word("b").unwrap()[0];
        assert!(periodic_closure(&g, b, &u).is_err());
        let radial = radial_vector(&g, 11);
        assert!(periodic_closure(&g, p, &radial).unwrap().residual > 1e-3);
    }

    #[test]
    fn series_validation() {
        assert!(AverageSeries::new(vec![1.0, 1.0], vec![0.0, 0.0], 0.0, "x", None).is_err());
        assert!(AverageSeries::new(vec![1.0], vec![f64::NAN], 0.0, "x", None).is_err());
    }
}
