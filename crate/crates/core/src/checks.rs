//! The invariant and experiment suite behind `horolab checks`.
//!
//! Each check is a function of a shared [`CheckContext`] that builds the
//! expensive objects (critical exponents, depth-14 Patterson measures) once.
//! Thresholds live in [`CheckConfig`] so that the run manifest can echo
//! them.

use std::f64::consts::PI;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::averages::{
    calibrate_k_height, construct_vector, flow_commutation_residual, lebesgue_averages,
    mass_in_compact, periodic_closure, ps_averages,
};
use crate::error::{Error, Result};
use crate::geometry::{
    busemann, hamenstadt_distance, hyperbolic_distance, BoundaryPoint, PlanePoint, UnitTangent,
    BASEPOINT,
};
use crate::group::{enumerated_words, FuchsianGroup, WordSpec};
use crate::observable::TestFunction;
use crate::patterson::{
    br_integrals, build_patterson, coarsen, conditional_within, conformality_defect,
    ps_integrals, AtomicBoundaryMeasure, CoarseMeasure, PattersonConfig, ReferenceWindow,
};

/// Bump description: base point, direction angle (`π/2` is straight up),
/// radius, and angular half-width (`inf` for isotropic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpSpec {
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    pub w_base: f64,
    pub w_angle: f64,
}

impl BumpSpec {
    pub const fn isotropic(x: f64, y: f64, w_base: f64) -> Self {
        BumpSpec {
            x,
            y,
            angle: 0.5 * PI,
            w_base,
            w_angle: f64::INFINITY,
        }
    }

    pub fn build(&self, group: &FuchsianGroup) -> Result<TestFunction> {
        let center = UnitTangent::pointing(PlanePoint { x: self.x, y: self.y }, self.angle)?;
        TestFunction::bump(group, center, self.w_base, self.w_angle)
    }

    /// `x y angle w_base w_angle`.
    pub fn parse(text: &str) -> Option<Self> {
        let v: Vec<f64> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "inf" => Some(f64::INFINITY),
                _ => t.parse().ok(),
            })
            .collect::<Option<_>>()?;
        match v[..] {
            [x, y, angle, w_base, w_angle] => Some(BumpSpec {
                x,
                y,
                angle,
                w_base,
                w_angle,
            }),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        format!("{} {} {} {} {}", self.x, self.y, self.angle, self.w_base, self.w_angle)
    }
}

/// Radial vector `from_coordinates(ξ⁻, ξ⁺, s)` with `ξ⁻` from the random
/// word of `seed` and `ξ⁺` from the word of `seed + 100`.
pub fn sample_vector(group: &FuchsianGroup, seed: u64, depth: usize, s: f64) -> Result<UnitTangent> {
    let back = group.sample_limit_point(&WordSpec::Random { seed, depth })?;
    let fwd = group.sample_limit_point(&WordSpec::Random {
        seed: seed.wrapping_add(100),
        depth,
    })?;
    Ok(construct_vector(&back, fwd.point, s)?.vector)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub random_cases: usize,
    pub schottky_t_max: f64,
    pub cusped_t_max: f64,
    pub cutoff: usize,
    pub conformality_cutoffs: Vec<usize>,
    pub commutation_cutoff: usize,
    pub vector_depth: usize,
    pub resolution: f64,
    pub grid_h: f64,
    pub equidist_seed: u64,
    pub equidist_bumps: Vec<BumpSpec>,
    pub equidist_log_radii: Vec<f64>,
    pub equidist_tolerance: f64,
    pub mixing_seed: u64,
    pub mixing_time: f64,
    pub mixing_tolerance: f64,
    pub ratio_seed: u64,
    pub ratio_bumps: [BumpSpec; 2],
    pub ratio_window: ReferenceWindow,
    pub ratio_stability: f64,
    pub ratio_tolerance: f64,
    pub nondiv_seed: u64,
    pub calibration_seed: u64,
    pub k_candidates: Vec<f64>,
    pub calibration_target: f64,
    pub nondiv_threshold: f64,
    pub scaling_tolerance: f64,
    pub closure_dilations: Vec<f64>,
    pub time_budget: f64,
    pub word_budget: u64,
    pub verify_rerun: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 20240601,
            random_cases: 1000,
            schottky_t_max: 24.0,
            cusped_t_max: 14.0,
            cutoff: 14,
            conformality_cutoffs: vec![10, 12, 14],
            commutation_cutoff: 10,
            vector_depth: 60,
            resolution: 1e-3,
            grid_h: 0.05,
            equidist_seed: 8,
            equidist_bumps: vec![
                BumpSpec::isotropic(0.0, 1.0, 0.75),
                BumpSpec::isotropic(0.0, 2.5, 1.2),
                BumpSpec::isotropic(2.0, 1.5, 0.9),
            ],
            equidist_log_radii: vec![2.0, 4.0, 6.0],
            equidist_tolerance: 0.20,
            mixing_seed: 8,
            mixing_time: 6.0,
            mixing_tolerance: 0.20,
            ratio_seed: 4,
            ratio_bumps: [
                BumpSpec::isotropic(0.0, 1.0, 0.75),
                BumpSpec::isotropic(0.0, 2.2, 0.7),
            ],
            ratio_window: ReferenceWindow {
                center: BASEPOINT,
                radius: 0.5,
            },
            ratio_stability: 0.10,
            ratio_tolerance: 0.25,
            nondiv_seed: 2,
            calibration_seed: 1,
            k_candidates: vec![1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0],
            calibration_target: 0.9,
            nondiv_threshold: 0.8,
            scaling_tolerance: 0.05,
            closure_dilations: vec![0.5, 1.0, 2.0],
            time_budget: 600.0,
            word_budget: 1_000_000,
            verify_rerun: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub threshold: String,
    pub seconds: f64,
    /// Raw numbers behind `measured`, for the determinism digest.
    pub values: Vec<f64>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} check {:>2} {}: {} (threshold {}) [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.seconds
        )
    }
}

struct GroupData {
    group: FuchsianGroup,
    delta: f64,
    measure: AtomicBoundaryMeasure,
    coarse: CoarseMeasure,
}

/// Lazily built shared objects; safe to share between test threads.
pub struct CheckContext {
    pub cfg: CheckConfig,
    schottky: OnceLock<GroupData>,
    cusped: OnceLock<GroupData>,
    building: Mutex<()>,
}

impl CheckContext {
    pub fn new(cfg: CheckConfig) -> Self {
        CheckContext {
            cfg,
            schottky: OnceLock::new(),
            cusped: OnceLock::new(),
            building: Mutex::new(()),
        }
    }

    fn data(&self, cusped: bool) -> Result<&GroupData> {
        let cell = if cusped { &self.cusped } else { &self.schottky };
        if let Some(d) = cell.get() {
            return Ok(d);
        }
        let _guard = self.building.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(d) = cell.get() {
            return Ok(d);
        }
        let (group, t_max) = if cusped {
            (FuchsianGroup::default_cusped(), self.cfg.cusped_t_max)
        } else {
            (FuchsianGroup::default_schottky(), self.cfg.schottky_t_max)
        };
        let (delta, _) = group.critical_exponent(t_max)?;
        let measure = build_patterson(&group, &PattersonConfig::new(delta, self.cfg.cutoff)?)?;
        let coarse = coarsen(&measure, &group, self.cfg.resolution)?;
        Ok(cell.get_or_init(|| GroupData {
            group,
            delta,
            measure,
            coarse,
        }))
    }

    pub fn schottky_exponent(&self) -> Result<f64> {
        Ok(self.data(false)?.delta)
    }

    pub fn cusped_exponent(&self) -> Result<f64> {
        Ok(self.data(true)?.delta)
    }
}

fn outcome(
    id: u32,
    name: &'static str,
    passed: bool,
    measured: String,
    threshold: String,
    start: Instant,
    values: Vec<f64>,
) -> CheckOutcome {
    CheckOutcome {
        id,
        name,
        passed,
        measured,
        threshold,
        seconds: start.elapsed().as_secs_f64(),
        values,
    }
}

fn random_vector(rng: &mut ChaCha8Rng) -> UnitTangent {
    let base = PlanePoint {
        x: rng.random_range(-3.0..3.0),
        y: rng.random_range(-2.0f64..2.0).exp(),
    };
    UnitTangent::pointing(base, rng.random_range(-PI..PI)).expect("finite base point")
}

fn random_point(rng: &mut ChaCha8Rng) -> PlanePoint {
    PlanePoint {
        x: rng.random_range(-2.0..2.0),
        y: rng.random_range(-1.5f64..1.5).exp(),
    }
}

pub fn busemann_oracle(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let xi = if rng.random_bool(0.1) {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(rng.random_range(-5.0..5.0))
        };
        let (p, q) = (random_point(&mut rng), random_point(&mut rng));
        // i lies on the geodesic from the antipode of ξ to ξ, at coordinate 0
        let anti = match xi {
            BoundaryPoint::Finite(x) if x != 0.0 => BoundaryPoint::Finite(-1.0 / x),
            BoundaryPoint::Finite(_) => BoundaryPoint::Infinity,
            BoundaryPoint::Infinity => BoundaryPoint::Finite(0.0),
        };
        let o = UnitTangent::from_coordinates(anti, xi, 0.0)?;
        debug_assert!(hyperbolic_distance(o.base(), BASEPOINT) < 1e-9);
        let z = o.geodesic_flow(15.0).base();
        let approx = hyperbolic_distance(p, z) - hyperbolic_distance(q, z);
        worst = worst.max((busemann(xi, p, q) - approx).abs());
    }
    Ok(outcome(
        1,
        "Busemann oracle",
        worst <= 1e-6,
        format!("max error {worst:.3e} over 500 cases"),
        "1e-6".into(),
        start,
        vec![worst],
    ))
}

pub fn hamenstadt_parametrization(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 2);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.random_cases {
        let u = random_vector(&mut rng);
        let t = rng.random_range(-100.0..100.0);
        let d = hamenstadt_distance(&u, &u.horocycle_flow(t))?;
        worst = worst.max((d - t.abs()).abs());
    }
    Ok(outcome(
        2,
        "Hamenstadt parametrization",
        worst <= 1e-9,
        format!("max |d(u, h^t u) - |t|| = {worst:.3e}"),
        "1e-9".into(),
        start,
        vec![worst],
    ))
}

pub fn flow_conjugation(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 3);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.random_cases {
        let u = random_vector(&mut rng);
        let s = rng.random_range(-10.0..10.0);
        let t = rng.random_range(-3.0..3.0);
        let a = u.horocycle_flow(s).geodesic_flow(t);
        let b = u.geodesic_flow(t).horocycle_flow(s * t.exp());
        worst = worst.max(a.frame_distance(&b));
    }
    Ok(outcome(
        3,
        "flow conjugation",
        worst <= 1e-9,
        format!("max frame distance {worst:.3e}"),
        "1e-9".into(),
        start,
        vec![worst],
    ))
}

pub fn flow_commutation(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(false)?;
    let measure = d.measure.truncate(ctx.cfg.commutation_cutoff)?;
    let psi = ctx.cfg.equidist_bumps[0].build(&d.group)?;
    let mut worst: f64 = 0.0;
    for k in 0..5u64 {
        let u = sample_vector(&d.group, ctx.cfg.seed.wrapping_add(k), ctx.cfg.vector_depth, 0.0)?;
        for j in 0..5 {
            let r = (j as f64).exp();
            for i in 0..5 {
                let t = -3.0 + 1.5 * i as f64;
                let res = flow_commutation_residual(&d.group, &u, r, t, &psi, &measure, d.delta);
                match res {
                    Ok(v) => worst = worst.max(v),
                    // an empty ball on both sides is not a violation
                    Err(Error::Numeric(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(outcome(
        4,
        "flow commutation",
        worst <= 1e-9,
        format!("max residual {worst:.3e} over a 5x5x5 grid"),
        "1e-9".into(),
        start,
        vec![worst],
    ))
}

pub fn parabolic_exponent(_ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let g = FuchsianGroup::default_parabolic();
    let (delta, stderr) = g.critical_exponent(30.0)?;
    let growth = g.check_parabolic_growth(5.0, 30.0)?;
    Ok(outcome(
        5,
        "parabolic exponent",
        (delta - 0.5).abs() <= 0.02 && growth <= 10.0,
        format!("delta {delta:.4} (stderr {stderr:.1e}), growth constant {growth:.3}"),
        "0.5 +- 0.02, growth <= 10".into(),
        start,
        vec![delta, stderr, growth],
    ))
}

pub fn scaling_law(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(false)?;
    let u = sample_vector(&d.group, ctx.cfg.equidist_seed, ctx.cfg.vector_depth, 0.0)?;
    let mut worst_rel: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    let mut values = Vec::new();
    for t in [1.0f64, 2.0, 3.0] {
        let big = conditional_within(&u, &d.measure, d.delta, t.exp()).log_horoball_mass(t.exp());
        let small_cond = conditional_within(&u.geodesic_flow(-t), &d.measure, d.delta, 1.0);
        let small = small_cond.log_horoball_mass(1.0) + d.delta * t;
        let rel = ((big - small).exp() - 1.0).abs();
        worst_rel = worst_rel.max(rel);
        // atom by atom: the pushed small ball against a direct build
        let pushed = small_cond.pushed(t);
        let direct = conditional_within(&u, &d.measure, d.delta, t.exp());
        if pushed.len() != direct.len() {
            worst_exact = f64::INFINITY;
        } else {
            for k in 0..direct.len() {
                let ds = (pushed.params()[k] - direct.params()[k]).abs() / (1.0 + direct.params()[k].abs());
                let dw = (pushed.log_weights()[k] - direct.log_weights()[k]).abs();
                worst_exact = worst_exact.max(ds).max(dw);
            }
        }
        values.push(rel);
    }
    values.push(worst_exact);
    Ok(outcome(
        6,
        "horoball scaling",
        worst_rel <= ctx.cfg.scaling_tolerance && worst_exact <= 1e-10,
        format!("max relative error {worst_rel:.3e}; atomic identity {worst_exact:.3e}"),
        format!("{}, 1e-10", ctx.cfg.scaling_tolerance),
        start,
        values,
    ))
}

pub fn conformality_trend(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut values = Vec::new();
    let mut ok = true;
    for cusped in [false, true] {
        let d = ctx.data(cusped)?;
        let measures = ctx
            .cfg
            .conformality_cutoffs
            .iter()
            .map(|&c| d.measure.truncate(c))
            .collect::<Result<Vec<_>>>()?;
        for l in d.group.letters().filter(|l| !l.is_inverse()) {
            let defects = measures
                .iter()
                .map(|m| conformality_defect(m, &d.group, &[l], d.delta))
                .collect::<Result<Vec<_>>>()?;
            ok &= defects.windows(2).all(|w| w[1] < w[0]);
            lines.push(format!(
                "{}:{} {}",
                d.group.name(),
                d.group.letter_name(l),
                defects.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(">")
            ));
            values.extend(defects);
        }
    }
    Ok(outcome(
        7,
        "conformality trend",
        ok,
        lines.join("; "),
        "strictly decreasing".into(),
        start,
        values,
    ))
}

pub fn equidistribution(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(false)?;
    let psis = ctx
        .cfg
        .equidist_bumps
        .iter()
        .map(|b| b.build(&d.group))
        .collect::<Result<Vec<_>>>()?;
    let refs = ps_integrals(&d.group, &d.coarse, d.delta, &psis, ctx.cfg.grid_h)?;
    let radii: Vec<f64> = ctx.cfg.equidist_log_radii.iter().map(|x| x.exp()).collect();
    let u = sample_vector(&d.group, ctx.cfg.equidist_seed, ctx.cfg.vector_depth, 0.0)?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let cond = conditional_within(&u, &d.measure, d.delta, r_max);
    let rows = ps_averages(&d.group, &cond, &radii, &psis, 0.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for (k, q) in refs.iter().enumerate() {
        let errs: Vec<f64> = rows.iter().map(|row| (row[k] - q.estimate).abs()).collect();
        let rel = errs.last().copied().unwrap_or(f64::NAN) / q.estimate.abs();
        ok &= errs.windows(2).all(|w| w[1] < w[0]) && rel <= ctx.cfg.equidist_tolerance;
        parts.push(format!(
            "psi{k}: ref {:.4} err {} rel {rel:.3}",
            q.estimate,
            errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(">")
        ));
        values.push(q.estimate);
        values.extend(errs);
    }
    Ok(outcome(
        8,
        "equidistribution trend",
        ok,
        parts.join("; "),
        format!("decreasing, final relative error <= {}", ctx.cfg.equidist_tolerance),
        start,
        values,
    ))
}

pub fn lebesgue_ratio(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(true)?;
    let psi = ctx.cfg.ratio_bumps[0].build(&d.group)?;
    let phi = ctx.cfg.ratio_bumps[1].build(&d.group)?;
    let br = br_integrals(
        &d.group,
        &d.coarse,
        d.delta,
        &[psi.clone(), phi.clone()],
        None,
        &ctx.cfg.ratio_window,
        ctx.cfg.grid_h,
    )?;
    let reference = br[0].estimate / br[1].estimate;
    let u = sample_vector(&d.group, ctx.cfg.ratio_seed, ctx.cfg.vector_depth, 0.0)?;
    let rows = lebesgue_averages(&d.group, &u, &[4f64.exp(), 6f64.exp()], &[psi, phi])?;
    let (r4, r6) = (rows[0][0] / rows[0][1], rows[1][0] / rows[1][1]);
    let stability = (r6 - r4).abs() / r6.abs();
    let err = (r6 - reference).abs() / reference.abs();
    Ok(outcome(
        9,
        "Lebesgue ratio",
        stability <= ctx.cfg.ratio_stability && err <= ctx.cfg.ratio_tolerance,
        format!(
            "ratio(e4) {r4:.4}, ratio(e6) {r6:.4}, reference {reference:.4}; drift {stability:.3}, error {err:.3}"
        ),
        format!("drift <= {}, error <= {}", ctx.cfg.ratio_stability, ctx.cfg.ratio_tolerance),
        start,
        vec![r4, r6, reference],
    ))
}

pub fn mixing(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(false)?;
    let psi = ctx.cfg.equidist_bumps[0].build(&d.group)?;
    let reference = ps_integrals(&d.group, &d.coarse, d.delta, std::slice::from_ref(&psi), ctx.cfg.grid_h)?[0].estimate;
    let u = sample_vector(&d.group, ctx.cfg.mixing_seed, ctx.cfg.vector_depth, 0.0)?;
    let cond = conditional_within(&u, &d.measure, d.delta, 1.0);
    let value = ps_averages(&d.group, &cond, &[1.0], &[psi], ctx.cfg.mixing_time)?[0][0];
    let err = (value - reference).abs() / reference.abs();
    Ok(outcome(
        10,
        "mixing",
        err <= ctx.cfg.mixing_tolerance,
        format!("M(t={}) {value:.4} vs reference {reference:.4}, error {err:.3}", ctx.cfg.mixing_time),
        format!("{}", ctx.cfg.mixing_tolerance),
        start,
        vec![value, reference],
    ))
}

pub fn non_divergence(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let d = ctx.data(true)?;
    let radii: Vec<f64> = [2.0f64, 4.0, 6.0].iter().map(|x| x.exp()).collect();
    let r_max = radii[2];
    let calib = sample_vector(&d.group, ctx.cfg.calibration_seed, ctx.cfg.vector_depth, 0.0)?;
    let calib = conditional_within(&calib, &d.measure, d.delta, r_max);
    let k = calibrate_k_height(&d.group, &calib, &radii, &ctx.cfg.k_candidates, ctx.cfg.calibration_target)?;
    let u = sample_vector(&d.group, ctx.cfg.nondiv_seed, ctx.cfg.vector_depth, 0.0)?;
    let cond = conditional_within(&u, &d.measure, d.delta, r_max);
    let series = mass_in_compact(&d.group, &cond, &radii, k, "nondiv", Some(ctx.cfg.nondiv_seed))?;
    let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(outcome(
        11,
        "non-divergence",
        min >= ctx.cfg.nondiv_threshold,
        format!("K_height {k}, min mass {min:.3}"),
        format!(">= {}", ctx.cfg.nondiv_threshold),
        start,
        vec![k, min],
    ))
}

pub fn closure(ctx: &CheckContext) -> Result<CheckOutcome> {
    let start = Instant::now();
    let g = FuchsianGroup::default_cusped();
    let p = g.parse_word("p")?[0];
    let u = UnitTangent::from_coordinates(BoundaryPoint::Infinity, BoundaryPoint::Finite(0.5), 0.0)?;
    let base = periodic_closure(&g, p, &u)?;
    let mut dilation: f64 = 0.0;
    let mut values = vec![base.t0, base.residual];
    for &s in &ctx.cfg.closure_dilations {
        let c = periodic_closure(&g, p, &u.geodesic_flow(-s))?;
        dilation = dilation.max((c.t0 - (-s).exp() * base.t0).abs());
        values.push(c.t0);
    }
    let control = sample_vector(&g, ctx.cfg.seed, ctx.cfg.vector_depth, 0.0)?;
    let control = periodic_closure(&g, p, &control)?;
    values.push(control.residual);
    Ok(outcome(
        12,
        "periodic closure",
        base.residual <= 1e-8 && dilation <= 1e-8,
        format!(
            "t0 {:.6}, residual {:.2e}, dilation error {dilation:.2e}; radial control residual {:.3}",
            base.t0, base.residual, control.residual
        ),
        "1e-8".into(),
        start,
        values,
    ))
}

pub type Criterion = fn(&CheckContext) -> Result<CheckOutcome>;

pub const CRITERIA: [Criterion; 12] = [
    busemann_oracle,
    hamenstadt_parametrization,
    flow_conjugation,
    flow_commutation,
    parabolic_exponent,
    scaling_law,
    conformality_trend,
    equidistribution,
    lebesgue_ratio,
    mixing,
    non_divergence,
    closure,
];

fn digest(outcomes: &[CheckOutcome]) -> u64 {
    let mut h = DefaultHasher::new();
    for o in outcomes {
        o.id.hash(&mut h);
        o.passed.hash(&mut h);
        for v in &o.values {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub outcomes: Vec<CheckOutcome>,
    pub digest: u64,
    pub words: u64,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn run_once(cfg: &CheckConfig) -> Result<(Vec<CheckOutcome>, u64)> {
    let ctx = CheckContext::new(cfg.clone());
    let outcomes = CRITERIA.iter().map(|c| c(&ctx)).collect::<Result<Vec<_>>>()?;
    let d = digest(&outcomes);
    Ok((outcomes, d))
}

/// Runs checks 1 to 12, then judges the suite itself: wall time, words
/// enumerated on this thread, and (when enabled) a bitwise rerun.
pub fn run_suite(cfg: &CheckConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let words0 = enumerated_words();
    let (mut outcomes, d) = run_once(cfg)?;
    let words = enumerated_words() - words0;
    let seconds = start.elapsed().as_secs_f64();
    let rerun = if cfg.verify_rerun {
        Some(run_once(cfg)?.1)
    } else {
        None
    };
    let identical = rerun.map(|r| r == d);
    let passed = seconds <= cfg.time_budget && words <= cfg.word_budget && identical != Some(false);
    outcomes.push(CheckOutcome {
        id: 13,
        name: "suite budget",
        passed,
        measured: format!(
            "{seconds:.1}s, {words} words enumerated, rerun {}",
            match identical {
                Some(true) => "bitwise identical",
                Some(false) => "DIFFERS",
                None => "skipped",
            }
        ),
        threshold: format!("{}s, {} words, identical rerun", cfg.time_budget, cfg.word_budget),
        seconds,
        values: vec![words as f64],
    });
    Ok(SuiteReport {
        outcomes,
        digest: d,
        words,
        seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_spec_round_trip() {
        let b = BumpSpec::parse("0 1.5 1.5707963267948966 0.5 inf").unwrap();
        assert_eq!(b, BumpSpec::isotropic(0.0, 1.5, 0.5));
        assert_eq!(BumpSpec::parse(&b.render()), Some(b));
        assert!(BumpSpec::parse("0 1 2").is_none());
        assert!(BumpSpec::parse("0 1 2 x 1").is_none());
    }

    #[test]
    fn cheap_criteria_pass() {
        let ctx = CheckContext::new(CheckConfig {
            random_cases: 200,
            ..CheckConfig::default()
        });
        for c in [busemann_oracle, hamenstadt_parametrization, flow_conjugation, closure] {
            let o = c(&ctx).unwrap();
            assert!(o.passed, "{}", o.line());
        }
    }
}
