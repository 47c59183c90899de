//! Atomic Patterson measures, their conditionals on horocycles, and
//! quadratures for the Patterson–Sullivan and Burger–Roblin integrals.
//!
//! The measure is the orbital sum `Σ e^{−s·d(o, γo)} δ_{ξ(γ)}` over reduced
//! words of bounded length, where `ξ(γ)` is the endpoint of the ray from `o`
//! through `γo`. Words are generated by prepending letters, so the word
//! `xγ` sits at a computable index next to `γ`; this makes the conformality
//! check an exact word match rather than a nearest-atom search.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    busemann, ray_endpoint, BoundaryPoint, Geodesic, Isometry, PlanePoint, UnitTangent, BASEPOINT,
};
use crate::group::{record_enumerated, FuchsianGroup, Letter};
use crate::observable::{Support, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PattersonConfig {
    /// Exponent `s` of the orbital sum, normally the estimated critical
    /// exponent.
    pub exponent: f64,
    /// Maximal word length.
    pub cutoff: usize,
}

impl PattersonConfig {
    pub fn new(exponent: f64, cutoff: usize) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::invalid("Patterson exponent must be positive"));
        }
        if cutoff < 4 {
            return Err(Error::invalid("Patterson cutoff must be at least 4"));
        }
        Ok(PattersonConfig { exponent, cutoff })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub point: BoundaryPoint,
    pub log_weight: f64,
}

/// Layout of the words behind the atoms: word 0 is the identity, then words
/// of length 1, 2, … in prepend order.
#[derive(Clone, Debug, PartialEq)]
struct WordTree {
    letters: usize,
    layer_start: Vec<usize>,
    first: Vec<u8>,
}

impl WordTree {
    fn cutoff(&self) -> usize {
        self.layer_start.len() - 2
    }

    fn layer_of(&self, w: usize) -> usize {
        self.layer_start.partition_point(|&s| s <= w) - 1
    }

    /// Index of the word `x·w`, if reduced and within the cutoff.
    fn prepend(&self, x: Letter, w: usize) -> Option<usize> {
        if w == 0 {
            return Some(1 + x.index());
        }
        let k = self.layer_of(w);
        if k >= self.cutoff() {
            return None;
        }
        let forbidden = Letter(self.first[w]).inverse();
        if x == forbidden {
            return None;
        }
        let off = if x < forbidden { x.index() } else { x.index() - 1 };
        let j = w - self.layer_start[k];
        Some(self.layer_start[k + 1] + j * (self.letters - 1) + off)
    }
}

/// Finitely many weighted points on the boundary, total mass one.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicBoundaryMeasure {
    atoms: Vec<Atom>,
    exponent: f64,
    tree: Option<WordTree>,
}

impl AtomicBoundaryMeasure {
    /// Normalizes arbitrary log-weights to a probability measure.
    pub fn from_atoms(atoms: Vec<Atom>, exponent: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure needs at least one atom"));
        }
        let mut m = AtomicBoundaryMeasure {
            atoms,
            exponent,
            tree: None,
        };
        m.normalize()?;
        Ok(m)
    }

    fn normalize(&mut self) -> Result<()> {
        let lz = log_sum_exp(self.atoms.iter().map(|a| a.log_weight));
        if !lz.is_finite() {
            return Err(Error::numeric("measure has no finite mass"));
        }
        for a in &mut self.atoms {
            a.log_weight -= lz;
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Word-length cutoff, for measures built from a group.
    pub fn cutoff(&self) -> Option<usize> {
        self.tree.as_ref().map(|t| t.cutoff())
    }

    pub fn total_mass(&self) -> f64 {
        log_sum_exp(self.atoms.iter().map(|a| a.log_weight)).exp()
    }

    /// The measure built from the shorter words only, renormalized. Shares
    /// the enumeration of a deeper build.
    pub fn truncate(&self, cutoff: usize) -> Result<Self> {
        let tree = self
            .tree
            .as_ref()
            .ok_or_else(|| Error::invalid("only group-built measures can be truncated"))?;
        if cutoff > tree.cutoff() || cutoff < 1 {
            return Err(Error::invalid(format!(
                "cannot truncate a cutoff-{} measure to {cutoff}",
                tree.cutoff()
            )));
        }
        let words = tree.layer_start[cutoff + 1];
        let mut out = AtomicBoundaryMeasure {
            atoms: self.atoms[..words - 1].to_vec(),
            exponent: self.exponent,
            tree: Some(WordTree {
                letters: tree.letters,
                layer_start: tree.layer_start[..cutoff + 2].to_vec(),
                first: tree.first[..words].to_vec(),
            }),
        };
        out.normalize()?;
        Ok(out)
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Orbital-sum approximation of the Patterson measure.
pub fn build_patterson(group: &FuchsianGroup, cfg: &PattersonConfig) -> Result<AtomicBoundaryMeasure> {
    let n = group.letter_count();
    if n == 0 {
        return Err(Error::invalid("trivial group has no Patterson measure"));
    }
    let total = group.word_count(cfg.cutoff) as usize;
    let mut points = Vec::with_capacity(total - 1);
    let mut disp = Vec::with_capacity(total - 1);
    let mut first = Vec::with_capacity(total);
    let mut layer_start = vec![0usize, 1];
    first.push(u8::MAX);
    let mut layer: Vec<Isometry> = Vec::new();
    for x in group.letters() {
        let m = *group.matrix(x);
        let p = m.apply(BASEPOINT);
        points.push(ray_endpoint(p)?);
        disp.push(m.displacement());
        first.push(x.0);
        layer.push(m);
    }
    for k in 2..=cfg.cutoff {
        layer_start.push(first.len());
        let parent_start = layer_start[k - 1];
        let keep = k < cfg.cutoff;
        let mut next = Vec::with_capacity(if keep { layer.len() * (n - 1) } else { 0 });
        for (j, pm) in layer.iter().enumerate() {
            let forbidden = Letter(first[parent_start + j]).inverse();
            for x in group.letters() {
                if x == forbidden {
                    continue;
                }
                let m = group.matrix(x).compose(pm);
                let p = m.apply(BASEPOINT);
                points.push(ray_endpoint(p)?);
                disp.push(m.displacement());
                first.push(x.0);
                if keep {
                    next.push(m);
                }
            }
        }
        layer = next;
    }
    layer_start.push(first.len());
    record_enumerated(first.len() as u64);
    if points.len() < 100 {
        return Err(Error::invalid(format!(
            "only {} atoms at cutoff {}; need at least 100",
            points.len(),
            cfg.cutoff
        )));
    }
    let atoms = points
        .into_iter()
        .zip(disp)
        .map(|(point, d)| Atom {
            point,
            log_weight: -cfg.exponent * d,
        })
        .collect();
    let mut m = AtomicBoundaryMeasure {
        atoms,
        exponent: cfg.exponent,
        tree: Some(WordTree {
            letters: n,
            layer_start,
            first,
        }),
    };
    m.normalize()?;
    Ok(m)
}

/// Median over matched atom pairs `(ξ(w), ξ(γw))` of
/// `|log(weight(γw)/weight(w)) + δ·β_{ξ(w)}(γ⁻¹o, o)|`.
///
/// Pairs are matched by word: `γw` must be a reduced word within the cutoff.
pub fn conformality_defect(
    measure: &AtomicBoundaryMeasure,
    group: &FuchsianGroup,
    gamma: &[Letter],
    delta: f64,
) -> Result<f64> {
    if gamma.is_empty() {
        return Ok(0.0);
    }
    let tree = measure
        .tree
        .as_ref()
        .ok_or_else(|| Error::invalid("conformality check needs a group-built measure"))?;
    let word = group.word(gamma)?;
    let back = word.matrix.inverse().apply(BASEPOINT);
    let mut values = Vec::new();
    // depth-first over the words so each orbit point is available without
    // storing a whole layer of matrices
    let mut stack: Vec<(usize, Isometry)> = group
        .letters()
        .map(|x| (1 + x.index(), *group.matrix(x)))
        .collect();
    while let Some((w, m)) = stack.pop() {
        for x in group.letters() {
            if let Some(child) = tree.prepend(x, w) {
                stack.push((child, group.matrix(x).compose(&m)));
            }
        }
        let mut target = Some(w);
        for &x in gamma.iter().rev() {
            target = target.and_then(|t| tree.prepend(x, t));
        }
        let Some(t) = target else { continue };
        let src = &measure.atoms[w - 1];
        let defect = match orbit_defect(back, m.apply(BASEPOINT)) {
            Some(d) => delta * d,
            None => {
                let dst = &measure.atoms[t - 1];
                dst.log_weight - src.log_weight + delta * busemann(src.point, back, BASEPOINT)
            }
        };
        values.push(defect.abs());
    }
    if values.is_empty() {
        return Err(Error::numeric("no matched atom pairs for the conformality check"));
    }
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*m)
}

/// `d(p, z) − d(o, z) − β_ξ(p, o)` with `ξ` the endpoint of the ray from `o`
/// through `z`. Far out along the orbit this is of order `e^{−2d(o,z)}`,
/// which the difference of stored log-weights cannot resolve; here every
/// term is expanded so that no cancellation happens. `None` when `z` is on
/// the imaginary axis.
fn orbit_defect(p: PlanePoint, z: PlanePoint) -> Option<f64> {
    if z.x == 0.0 || !z.x.is_finite() {
        return None;
    }
    let m = (z.x * z.x + z.y * z.y - 1.0) / (2.0 * z.x);
    let rho = m.hypot(1.0);
    let branch = if z.x > 0.0 { -rho } else { rho };
    // ξ − x from (ξ − x)((m − x) ∓ ρ) = −y²
    let e = -z.y * z.y / ((m - z.x) + branch);
    let xi = z.x + e;
    let y2 = z.y * z.y;
    // log(X_q/X_p) splits into log1p terms against the Poisson kernels
    let term = |q: PlanePoint| {
        let n = (q.x - xi) * (q.x - xi) + q.y * q.y;
        let extra = e * (2.0 * (q.x - z.x) - e) + y2;
        let inv_x = 2.0 * q.y * z.y / (n + extra);
        let c = (-inv_x * inv_x / (2.0 * (1.0 + (1.0 - inv_x * inv_x).sqrt()))).ln_1p();
        (extra / n).ln_1p() + c
    };
    Some(term(p) - term(BASEPOINT))
}

/// Atoms of the conditional measure on the strong unstable horocycle of a
/// vector: `h^{s}u` carries the weight of its forward endpoint times
/// `e^{δ·β_ξ(o, π(h^s u))}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalHorocycleMeasure {
    leaf: UnitTangent,
    exponent: f64,
    params: Vec<f64>,
    log_weights: Vec<f64>,
}

impl ConditionalHorocycleMeasure {
    pub fn leaf(&self) -> &UnitTangent {
        &self.leaf
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// `log μ(B⁺(u, r))`, `−∞` when the ball holds no atom.
    pub fn log_horoball_mass(&self, r: f64) -> f64 {
        log_sum_exp(
            self.params
                .iter()
                .zip(&self.log_weights)
                .filter(move |(s, _)| s.abs() < r)
                .map(|(_, &lw)| lw),
        )
    }

    pub fn horoball_mass(&self, r: f64) -> f64 {
        self.log_horoball_mass(r).exp()
    }

    /// Image under the time-`t` geodesic flow by the scaling law: parameters
    /// dilate by `e^t`, weights by `e^{δt}`.
    pub fn pushed(&self, t: f64) -> Self {
        let k = t.exp();
        ConditionalHorocycleMeasure {
            leaf: self.leaf.geodesic_flow(t),
            exponent: self.exponent,
            params: self.params.iter().map(|s| s * k).collect(),
            log_weights: self.log_weights.iter().map(|w| w + self.exponent * t).collect(),
        }
    }
}

pub fn conditional_on_horocycle(
    u: &UnitTangent,
    measure: &AtomicBoundaryMeasure,
    delta: f64,
) -> ConditionalHorocycleMeasure {
    conditional_within(u, measure, delta, f64::INFINITY)
}

/// Conditional measure restricted to parameters `|s| < r_max`.
pub fn conditional_within(
    u: &UnitTangent,
    measure: &AtomicBoundaryMeasure,
    delta: f64,
    r_max: f64,
) -> ConditionalHorocycleMeasure {
    let inv = u.frame().inverse();
    let base = u.base();
    let mut params = Vec::new();
    let mut log_weights = Vec::new();
    for a in &measure.atoms {
        let s = match inv.apply_boundary(a.point) {
            BoundaryPoint::Infinity => 0.0,
            BoundaryPoint::Finite(x) if x == 0.0 => continue,
            BoundaryPoint::Finite(x) => 1.0 / x,
        };
        if !(s.abs() < r_max) {
            continue;
        }
        // β_ξ(π u, π h^s u) = ln(1 + s²) for ξ the forward end of h^s u
        let beta = busemann(a.point, BASEPOINT, base) + (s * s).ln_1p();
        params.push(s);
        log_weights.push(a.log_weight + delta * beta);
    }
    ConditionalHorocycleMeasure {
        leaf: *u,
        exponent: delta,
        params,
        log_weights,
    }
}

/// Atoms merged into angular bins, tagged with the domain that holds them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseMeasure {
    pub points: Vec<BoundaryPoint>,
    pub weights: Vec<f64>,
    pub domains: Vec<Letter>,
    pub resolution: f64,
}

impl CoarseMeasure {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Bins atoms by the angle `2·atan ξ` with bins of width `resolution`; each
/// bin keeps its total weight at the weighted mean angle.
pub fn coarsen(
    measure: &AtomicBoundaryMeasure,
    group: &FuchsianGroup,
    resolution: f64,
) -> Result<CoarseMeasure> {
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::invalid("coarsening resolution must lie in (0, 1)"));
    }
    let bins = (2.0 * PI / resolution).ceil() as usize;
    let n = group.letter_count();
    // one accumulator per (domain, bin)
    let mut mass = vec![0.0f64; bins * n.max(1)];
    let mut moment = vec![0.0f64; bins * n.max(1)];
    for a in &measure.atoms {
        let theta = a.point.angle();
        let dom = group
            .domain_of(a.point)
            .ok_or_else(|| Error::numeric(format!("atom {} lies outside every domain", a.point)))?;
        let bin = (((theta + PI) / resolution) as usize).min(bins - 1);
        let w = a.log_weight.exp();
        let k = dom.index() * bins + bin;
        mass[k] += w;
        moment[k] += w * theta;
    }
    let mut out = CoarseMeasure {
        points: Vec::new(),
        weights: Vec::new(),
        domains: Vec::new(),
        resolution,
    };
    for (k, (&m, &mo)) in mass.iter().zip(&moment).enumerate() {
        if m > 0.0 {
            out.points.push(BoundaryPoint::from_angle(mo / m));
            out.weights.push(m);
            out.domains.push(Letter((k / bins) as u8));
        }
    }
    Ok(out)
}

/// `d_o(ξ, η)^{−2δ}` with the visual distance `d_o = |sin((θ − θ')/2)|` seen
/// from `o = i`. This is the invariant density of the Patterson–Sullivan
/// measure in endpoint coordinates.
pub fn visual_density(xi: BoundaryPoint, eta: BoundaryPoint, delta: f64) -> f64 {
    (0.5 * (xi.angle() - eta.angle())).sin().abs().powf(-2.0 * delta)
}

/// Euclidean form `|ξ − η|^{−2δ}` for finite endpoints. Differs from
/// [`visual_density`] by the factor `((1 + ξ²)(1 + η²))^{δ}`, a function of
/// the endpoints alone.
pub fn euclidean_density(xi: f64, eta: f64, delta: f64) -> f64 {
    (xi - eta).abs().powf(-2.0 * delta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub estimate: f64,
    /// Number of quadrature nodes that entered the sum.
    pub n_cells: usize,
    pub grid_h: f64,
}

/// Parameter `t` where the geodesic `ξ⁻ → ξ⁺` (time origin as in
/// [`UnitTangent::from_coordinates`]) crosses the wall of `domain`.
fn wall_crossing(chart_inv: &Isometry, wall: &Geodesic) -> Option<f64> {
    let a = chart_inv.apply_boundary(wall.a).finite()?;
    let b = chart_inv.apply_boundary(wall.b).finite()?;
    let prod = -a * b;
    if prod > 0.0 {
        Some(0.5 * prod.ln())
    } else {
        None
    }
}

/// Composite Simpson rule on `[a, b]` with step at most `h`.
pub(crate) fn simpson(a: f64, b: f64, h: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, usize)> {
    if b <= a {
        return Ok((0.0, 0));
    }
    let mut n = ((b - a) / h).ceil() as usize;
    n = n.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let step = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + step * i as f64)?;
    }
    Ok((sum * step / 3.0, n + 1))
}

/// `∫ψ dm_PS` over the unit tangent bundle of the quotient, normalized to a
/// probability.
///
/// Sums over ordered pairs of coarse atoms with the [`visual_density`]; each
/// geodesic is integrated over its segment in the fundamental domain, whose
/// length (the normalizer) is known in closed form from the two wall
/// crossings.
pub fn ps_integrals(
    group: &FuchsianGroup,
    coarse: &CoarseMeasure,
    delta: f64,
    psis: &[TestFunction],
    grid_h: f64,
) -> Result<Vec<QuadratureEstimate>> {
    let mut num = vec![0.0; psis.len()];
    let mut cells = vec![0usize; psis.len()];
    let mut norm = 0.0;
    for i in 0..coarse.len() {
        let (xm, dm) = (coarse.points[i], coarse.domains[i]);
        let wall_m = group.domain(dm).wall();
        for j in 0..coarse.len() {
            let dp = coarse.domains[j];
            if dp == dm {
                continue;
            }
            let xp = coarse.points[j];
            let dens = coarse.weights[i] * coarse.weights[j] * visual_density(xm, xp, delta);
            let chart = UnitTangent::from_coordinates(xm, xp, 0.0)?;
            let inv = chart.frame().inverse();
            let (Some(t_out), Some(t_in)) = (
                wall_crossing(&inv, &wall_m),
                wall_crossing(&inv, &group.domain(dp).wall()),
            ) else {
                return Err(Error::numeric(format!(
                    "geodesic {xm} → {xp} does not cross its domain walls"
                )));
            };
            if t_in <= t_out {
                continue;
            }
            norm += dens * (t_in - t_out);
            let geo = Geodesic { a: xm, b: xp };
            for (k, psi) in psis.iter().enumerate() {
                let (lo, hi) = match (psi, psi.support()) {
                    (TestFunction::Constant(c), _) => {
                        num[k] += dens * c * (t_in - t_out);
                        continue;
                    }
                    (_, Support::Everywhere) => (t_out, t_in),
                    (_, Support::Ball { center, radius }) => {
                        let d = geo.distance_to(center);
                        if d >= radius {
                            continue;
                        }
                        let c = inv.apply(center);
                        let tc = c.x.hypot(c.y).ln();
                        let half = (radius.cosh() / d.cosh()).acosh();
                        ((tc - half).max(t_out), (tc + half).min(t_in))
                    }
                };
                let (val, n) = simpson(lo, hi, grid_h, |t| {
                    psi.eval(group, &chart.geodesic_flow(t))
                })?;
                num[k] += dens * val;
                cells[k] += n;
            }
        }
    }
    if !(norm > 0.0) {
        return Err(Error::numeric("Patterson–Sullivan normalizer vanishes"));
    }
    Ok(num
        .iter()
        .zip(cells)
        .map(|(v, n)| QuadratureEstimate {
            estimate: v / norm,
            n_cells: n,
            grid_h,
        })
        .collect())
}

/// Compact window fixing the scale of the Burger–Roblin measure: unit mass
/// on the set of vectors based in a ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceWindow {
    pub center: PlanePoint,
    pub radius: f64,
}

/// Leaf coordinates of one atom: levels `s` of horocycles at `ξ` crossing a
/// ball, weighted by the transverse density `e^{−δs}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalSlice {
    pub point: BoundaryPoint,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Levels `s ∈ [β_ξ(c, o) − r, β_ξ(c, o) + r]` on a Simpson grid of step at
/// most `h`, with weights `w_ξ e^{−δs}·(Simpson factor)`.
pub fn transversal_slice(
    point: BoundaryPoint,
    mass: f64,
    center: PlanePoint,
    radius: f64,
    delta: f64,
    h: f64,
) -> TransversalSlice {
    let sc = busemann(point, center, BASEPOINT);
    let mut n = ((2.0 * radius / h).ceil() as usize).max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let step = 2.0 * radius / n as f64;
    let mut grid = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = sc - radius + step * i as f64;
        let simpson = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        grid.push(s);
        weights.push(mass * (-delta * s).exp() * simpson * step / 3.0);
    }
    TransversalSlice {
        point,
        grid,
        weights,
    }
}

/// Endpoint of the geodesic from `xi` through `c`.
fn through(xi: BoundaryPoint, c: PlanePoint) -> BoundaryPoint {
    match xi {
        BoundaryPoint::Infinity => BoundaryPoint::Finite(c.x),
        BoundaryPoint::Finite(x) => {
            // z ↦ −1/(z − x) sends x to ∞
            let dx = c.x - x;
            let r2 = dx * dx + c.y * c.y;
            let img = -dx / r2;
            if img == 0.0 {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Finite(x - 1.0 / img)
            }
        }
    }
}

/// Half-length of the horocyclic chord inside a ball of radius `r` whose
/// center sits at signed depth `tau` inside the horoball (`tau = s − s_c`
/// for the leaf at level `s` and the leaf through the center at `s_c`).
fn chord_half_length(tau: f64, r: f64) -> f64 {
    let q = r.cosh() - tau.cosh();
    if q <= 0.0 {
        0.0
    } else {
        (2.0 * tau.exp() * q).sqrt()
    }
}

/// `∫_{−r}^{r} e^{−δτ}·2·chord(τ) dτ`, the window mass per unit of
/// `w_ξ e^{−δ β_ξ(c, o)}`. The substitution `τ = r sin φ` removes the
/// square-root endpoints.
fn window_profile(r: f64, delta: f64) -> f64 {
    let n = 2000;
    let h = PI / n as f64;
    let f = |phi: f64| {
        let tau = r * phi.sin();
        (-delta * tau).exp() * 2.0 * chord_half_length(tau, r) * r * phi.cos()
    };
    let mut sum = f(-0.5 * PI) + f(0.5 * PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(-0.5 * PI + h * i as f64);
    }
    sum * h / 3.0
}

/// `∫ψ·f d(μ∘λ)` relative to the reference window, where `f` is an optional
/// positive leafwise density (`None` for arc length).
///
/// Outer sum over transversal slices at each coarse atom; inner Simpson rule
/// along the horocyclic chord through the support ball of `ψ`.
pub fn br_integrals(
    group: &FuchsianGroup,
    coarse: &CoarseMeasure,
    delta: f64,
    psis: &[TestFunction],
    density: Option<&TestFunction>,
    window: &ReferenceWindow,
    grid_h: f64,
) -> Result<Vec<QuadratureEstimate>> {
    if group.wall_margin(window.center) <= window.radius {
        return Err(Error::invalid("reference window leaves the fundamental domain"));
    }
    let profile = window_profile(window.radius, delta);
    let mut window_mass = 0.0;
    for (xi, w) in coarse.points.iter().zip(&coarse.weights) {
        window_mass += w * (-delta * busemann(*xi, window.center, BASEPOINT)).exp();
    }
    window_mass *= profile;
    if !(window_mass > 0.0) {
        return Err(Error::numeric("reference window has zero mass"));
    }
    let mut out = Vec::with_capacity(psis.len());
    for psi in psis {
        let Support::Ball { center, radius } = psi.support() else {
            return Err(Error::invalid("Burger–Roblin quadrature needs compactly supported functions"));
        };
        let mut total = 0.0;
        let mut cells = 0usize;
        for (xi, w) in coarse.points.iter().zip(&coarse.weights) {
            let eta = through(*xi, center);
            let slice = transversal_slice(*xi, *w, center, radius, delta, grid_h);
            let sc = busemann(*xi, center, BASEPOINT);
            for (s, sw) in slice.grid.iter().zip(&slice.weights) {
                let half = chord_half_length(s - sc, radius);
                if half == 0.0 {
                    continue;
                }
                let u0 = UnitTangent::from_coordinates(*xi, eta, *s)?;
                let (val, n) = simpson(-half, half, grid_h, |sigma| {
                    let v = u0.horocycle_flow(sigma);
                    let dens = match density {
                        Some(f) => f.eval(group, &v)?,
                        None => 1.0,
                    };
                    Ok(psi.eval(group, &v)? * dens)
                })?;
                total += sw * val;
                cells += n;
            }
        }
        out.push(QuadratureEstimate {
            estimate: total / window_mass,
            n_cells: cells,
            grid_h,
        });
    }
    Ok(out)
}
