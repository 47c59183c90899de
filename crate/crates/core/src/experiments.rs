//! Experiment configs and the runner behind the `horolab` binary.
//!
//! A config file uses the same key–value format as group files. `[run]`
//! names the group and the seed, and one section named after the experiment
//! holds its parameters:
//!
//! ```text
//! [run]
//! group = builtin:schottky   # or a path relative to this file
//! seed = 8
//! plot = true
//!
//! [equidist]
//! log_radii = 2 4 6
//! bumps = 0 1 1.5707963267948966 0.75 inf; 2 1.5 1.5707963267948966 0.9 inf
//! ```
//!
//! Every key can be overridden from the command line as `key=value` (the
//! experiment's own section) or `section.key=value`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::averages::{
    calibrate_k_height, lebesgue_averages, mass_in_compact, mixing_series, periodic_closure,
    ps_averages, AverageSeries,
};
use crate::checks::{run_suite, sample_vector, BumpSpec, CheckConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, PlanePoint, UnitTangent};
use crate::group::FuchsianGroup;
use crate::io::{atoms_csv, quadrature_csv, series_csv, series_svg, write_atomic, Manifest};
use crate::kv::{Document, Entry, Section};
use crate::patterson::{
    br_integrals, build_patterson, coarsen, conditional_within, conformality_defect,
    ps_integrals, AtomicBoundaryMeasure, CoarseMeasure, PattersonConfig, ReferenceWindow,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    GroupInfo,
    Exponent,
    Patterson,
    Equidist,
    Mixing,
    Nondiv,
    Closure,
    Checks,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::GroupInfo,
        Experiment::Exponent,
        Experiment::Patterson,
        Experiment::Equidist,
        Experiment::Mixing,
        Experiment::Nondiv,
        Experiment::Closure,
        Experiment::Checks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GroupInfo => "group-info",
            Experiment::Exponent => "exponent",
            Experiment::Patterson => "patterson",
            Experiment::Equidist => "equidist",
            Experiment::Mixing => "mixing",
            Experiment::Nondiv => "nondiv",
            Experiment::Closure => "closure",
            Experiment::Checks => "checks",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Experiments that sample vectors or random cases need a seed.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Experiment::Equidist | Experiment::Mixing | Experiment::Nondiv | Experiment::Checks
        )
    }

    fn keys(self) -> &'static [&'static str] {
        const MEASURE: [&str; 4] = ["t_max", "cutoff", "resolution", "grid_h"];
        match self {
            Experiment::GroupInfo => &["max_len", "radii"],
            Experiment::Exponent => &["t_max", "growth_from"],
            Experiment::Patterson => &["t_max", "cutoff", "resolution", "grid_h", "bumps", "conformality"],
            Experiment::Equidist => &[
                MEASURE[0], MEASURE[1], MEASURE[2], MEASURE[3], "depth", "s", "log_radii", "bumps",
                "mode", "window",
            ],
            Experiment::Mixing => &[
                MEASURE[0], MEASURE[1], MEASURE[2], MEASURE[3], "depth", "s", "radius", "times", "bumps",
            ],
            Experiment::Nondiv => &[
                "t_max", "cutoff", "depth", "s", "log_radii", "k_height", "calibration_seed",
                "candidates", "target",
            ],
            Experiment::Closure => &["letter", "backward", "forward", "s", "dilations"],
            Experiment::Checks => CHECK_KEYS,
        }
    }
}

const RUN_KEYS: &[&str] = &["group", "seed", "plot"];

const CHECK_KEYS: &[&str] = &[
    "random_cases",
    "schottky_t_max",
    "cusped_t_max",
    "cutoff",
    "vector_depth",
    "resolution",
    "grid_h",
    "equidist_seed",
    "equidist_tolerance",
    "mixing_seed",
    "mixing_time",
    "mixing_tolerance",
    "ratio_seed",
    "ratio_stability",
    "ratio_tolerance",
    "nondiv_seed",
    "calibration_seed",
    "calibration_target",
    "nondiv_threshold",
    "scaling_tolerance",
    "time_budget",
    "word_budget",
    "verify_rerun",
];

#[derive(Clone, Debug, PartialEq)]
pub enum GroupSource {
    Builtin(String),
    File(PathBuf),
}

impl GroupSource {
    pub fn load(&self) -> Result<FuchsianGroup> {
        match self {
            GroupSource::Builtin(name) => match name.as_str() {
                "schottky" => Ok(FuchsianGroup::default_schottky()),
                "cusped" => Ok(FuchsianGroup::default_cusped()),
                "parabolic" => Ok(FuchsianGroup::default_parabolic()),
                other => Err(Error::Config(format!("unknown builtin group `{other}`"))),
            },
            GroupSource::File(path) => FuchsianGroup::from_file(path),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GroupSource::Builtin(name) => format!("builtin:{name}"),
            GroupSource::File(path) => path.display().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureParams {
    pub t_max: f64,
    pub cutoff: usize,
    pub resolution: f64,
    pub grid_h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorParams {
    pub depth: usize,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquidistMode {
    /// Horocyclic averages against `m_PS`, one series per bump.
    Ps,
    /// Ratio of Lebesgue averages of two bumps against the BR ratio.
    LebesgueRatio(ReferenceWindow),
}

#[derive(Clone, Debug, PartialEq)]
pub enum KHeight {
    Fixed(f64),
    Calibrate { seed: u64, candidates: Vec<f64>, target: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    GroupInfo { max_len: usize, radii: Vec<f64> },
    Exponent { t_max: f64, growth_from: Option<f64> },
    Patterson { measure: MeasureParams, bumps: Vec<BumpSpec>, conformality: bool },
    Equidist { measure: MeasureParams, vector: VectorParams, log_radii: Vec<f64>, bumps: Vec<BumpSpec>, mode: EquidistMode },
    Mixing { measure: MeasureParams, vector: VectorParams, radius: f64, times: Vec<f64>, bumps: Vec<BumpSpec> },
    Nondiv { measure: MeasureParams, vector: VectorParams, log_radii: Vec<f64>, k_height: KHeight },
    Closure { letter: String, backward: BoundaryPoint, forward: BoundaryPoint, s: f64, dilations: Vec<f64> },
    Checks(Box<CheckConfig>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub config_path: PathBuf,
    pub group: Option<GroupSource>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub deterministic: bool,
    pub plot: bool,
    pub params: Params,
    /// Effective `section.key = value` pairs, echoed into the manifest.
    pub echo: Vec<(String, String)>,
}

/// Typed reads from one section with defaults.
struct Reader<'a> {
    doc: &'a Document,
    section: Option<&'a Section>,
}

impl<'a> Reader<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| self.doc.get(s, key))
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.entry(key).map_or(Ok(default), |e| self.doc.value(e))
    }

    fn list_or<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        self.entry(key).map_or(Ok(default), |e| self.doc.list(e))
    }

    fn line(&self, key: &str) -> usize {
        self.entry(key).map_or(self.section.map_or(0, |s| s.line), |e| e.line)
    }

    fn fail(&self, key: &str, msg: impl Into<String>) -> Error {
        self.doc.error(self.line(key), msg)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.or(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.fail(key, format!("`{key}` must be positive and finite")));
        }
        Ok(v)
    }

    fn increasing(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        let v: Vec<f64> = self.list_or(key, default)?;
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(self.fail(key, format!("`{key}` must be a non-empty increasing list")));
        }
        Ok(v)
    }

    fn bumps(&self, default: Vec<BumpSpec>) -> Result<Vec<BumpSpec>> {
        let Some(e) = self.entry("bumps") else {
            return Ok(default);
        };
        let out = e
            .value
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                BumpSpec::parse(t)
                    .filter(|b| b.y > 0.0 && b.w_base > 0.0 && b.w_angle > 0.0)
                    .ok_or_else(|| self.doc.error(e.line, format!("bad bump `{}`, want `x y angle w_base w_angle`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if out.is_empty() {
            return Err(self.doc.error(e.line, "`bumps` is empty"));
        }
        Ok(out)
    }

    fn measure(&self) -> Result<MeasureParams> {
        let cutoff: usize = self.or("cutoff", 12)?;
        if cutoff < 4 {
            return Err(self.fail("cutoff", "`cutoff` must be at least 4"));
        }
        Ok(MeasureParams {
            t_max: self.positive("t_max", 14.0)?,
            cutoff,
            resolution: self.positive("resolution", 1e-3)?,
            grid_h: self.positive("grid_h", 0.05)?,
        })
    }

    fn vector(&self) -> Result<VectorParams> {
        let depth: usize = self.or("depth", 60)?;
        if depth < 8 {
            return Err(self.fail("depth", "`depth` must be at least 8"));
        }
        let s: f64 = self.or("s", 0.0)?;
        if !s.is_finite() {
            return Err(self.fail("s", "`s` must be finite"));
        }
        Ok(VectorParams { depth, s })
    }

    fn boundary(&self, key: &str, default: BoundaryPoint) -> Result<BoundaryPoint> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => BoundaryPoint::parse(&e.value)
                .ok_or_else(|| self.doc.error(e.line, format!("`{key}` must be a real number or inf"))),
        }
    }
}

fn default_bumps() -> Vec<BumpSpec> {
    CheckConfig::default().equidist_bumps
}

fn apply_override(doc: &mut Document, experiment: Experiment, text: &str) -> Result<()> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{text}` is not key=value")))?;
    let (key, value) = (key.trim(), value.trim());
    let (section, key) = match key.split_once('.') {
        Some((s, k)) => (s.to_string(), k.to_string()),
        None if RUN_KEYS.contains(&key) => ("run".to_string(), key.to_string()),
        None => (experiment.name().to_string(), key.to_string()),
    };
    let allowed = if section == "run" {
        RUN_KEYS
    } else if section == experiment.name() {
        experiment.keys()
    } else {
        return Err(Error::Config(format!(
            "override section `{section}` does not apply to `{}`",
            experiment.name()
        )));
    };
    if !allowed.contains(&key.as_str()) {
        return Err(Error::Config(format!("unknown override key `{section}.{key}`")));
    }
    let entry = Entry {
        key: key.clone(),
        value: value.to_string(),
        line: 0,
    };
    match doc.sections.iter_mut().find(|s| s.name == section) {
        Some(s) => match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => *e = entry,
            None => s.entries.push(entry),
        },
        None => doc.sections.push(Section {
            name: section,
            line: 0,
            entries: vec![entry],
        }),
    }
    Ok(())
}

impl ExperimentConfig {
    /// Reads and validates everything; nothing is computed or written.
    pub fn load(
        path: &Path,
        experiment: Experiment,
        overrides: &[String],
        seed: Option<u64>,
        out: Option<PathBuf>,
        deterministic: bool,
    ) -> Result<Self> {
        let mut doc = Document::read(path)?;
        for o in overrides {
            apply_override(&mut doc, experiment, o)?;
        }
        // overridden entries carry line 0; report them as such
        Self::from_document(&doc, path, experiment, seed, out, deterministic).map_err(|e| match e {
            Error::Parse { line: 0, message, .. } => Error::Config(format!("override: {message}")),
            other => other,
        })
    }

    fn from_document(
        doc: &Document,
        path: &Path,
        experiment: Experiment,
        seed: Option<u64>,
        out: Option<PathBuf>,
        deterministic: bool,
    ) -> Result<Self> {
        for s in &doc.sections {
            if s.name == "run" {
                doc.check_keys(s, RUN_KEYS)?;
            } else if s.name == experiment.name() {
                doc.check_keys(s, experiment.keys())?;
            } else if Experiment::parse(&s.name).is_none() {
                return Err(doc.error(s.line, format!("unknown section [{}]", s.name)));
            }
        }
        let run = Reader {
            doc,
            section: doc.section("run"),
        };
        let group = match run.entry("group") {
            None if experiment == Experiment::Checks => None,
            None => return Err(run.fail("group", "[run] needs a `group` key")),
            Some(e) => Some(match e.value.strip_prefix("builtin:") {
                Some(name) => {
                    if !["schottky", "cusped", "parabolic"].contains(&name) {
                        return Err(doc.error(e.line, format!("unknown builtin group `{name}`")));
                    }
                    GroupSource::Builtin(name.to_string())
                }
                None => {
                    let base = path.parent().unwrap_or(Path::new("."));
                    GroupSource::File(base.join(&e.value))
                }
            }),
        };
        let seed = match seed {
            Some(s) => Some(s),
            None => run.entry("seed").map(|e| doc.value::<u64>(e)).transpose()?,
        };
        if experiment.randomized() && seed.is_none() {
            return Err(Error::Config(format!(
                "`{}` is randomized and needs a seed ([run] seed or --seed)",
                experiment.name()
            )));
        }
        let plot: bool = run.or("plot", false)?;
        let r = Reader {
            doc,
            section: doc.section(experiment.name()),
        };
        let params = match experiment {
            Experiment::GroupInfo => Params::GroupInfo {
                max_len: r.or("max_len", 6)?,
                radii: r.increasing("radii", vec![5.0, 10.0, 15.0, 20.0])?,
            },
            Experiment::Exponent => {
                let t_max = r.positive("t_max", 24.0)?;
                let growth_from = r.entry("growth_from").map(|e| doc.value::<f64>(e)).transpose()?;
                if growth_from.is_some_and(|t| !(t > 0.0 && t < t_max)) {
                    return Err(r.fail("growth_from", "`growth_from` must lie in (0, t_max)"));
                }
                Params::Exponent { t_max, growth_from }
            }
            Experiment::Patterson => Params::Patterson {
                measure: r.measure()?,
                bumps: r.bumps(Vec::new())?,
                conformality: r.or("conformality", true)?,
            },
            Experiment::Equidist => {
                let bumps = r.bumps(default_bumps())?;
                let mode = match r.or("mode", "ps".to_string())?.as_str() {
                    "ps" => EquidistMode::Ps,
                    "lebesgue-ratio" => {
                        if bumps.len() != 2 {
                            return Err(r.fail("bumps", "lebesgue-ratio needs exactly two bumps"));
                        }
                        let w: Vec<f64> = r.list_or("window", vec![0.0, 1.0, 0.5])?;
                        let [x, y, radius] = w[..] else {
                            return Err(r.fail("window", "`window` is `x y radius`"));
                        };
                        if !(y > 0.0 && radius > 0.0) {
                            return Err(r.fail("window", "window needs y > 0 and radius > 0"));
                        }
                        EquidistMode::LebesgueRatio(ReferenceWindow {
                            center: PlanePoint { x, y },
                            radius,
                        })
                    }
                    other => return Err(r.fail("mode", format!("unknown mode `{other}`, want ps or lebesgue-ratio"))),
                };
                Params::Equidist {
                    measure: r.measure()?,
                    vector: r.vector()?,
                    log_radii: r.increasing("log_radii", vec![2.0, 4.0, 6.0])?,
                    bumps,
                    mode,
                }
            }
            Experiment::Mixing => Params::Mixing {
                measure: r.measure()?,
                vector: r.vector()?,
                radius: r.positive("radius", 1.0)?,
                times: r.increasing("times", vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])?,
                bumps: r.bumps(default_bumps())?,
            },
            Experiment::Nondiv => {
                let k_height = match r.entry("k_height").map(|e| e.value.as_str()) {
                    None | Some("calibrate") => {
                        let target: f64 = r.or("target", 0.9)?;
                        if !(target > 0.0 && target < 1.0) {
                            return Err(r.fail("target", "`target` must lie in (0, 1)"));
                        }
                        KHeight::Calibrate {
                            seed: r.or("calibration_seed", 1)?,
                            candidates: r.increasing("candidates", CheckConfig::default().k_candidates)?,
                            target,
                        }
                    }
                    Some(_) => KHeight::Fixed(r.positive("k_height", 1.0)?),
                };
                Params::Nondiv {
                    measure: r.measure()?,
                    vector: r.vector()?,
                    log_radii: r.increasing("log_radii", vec![2.0, 4.0, 6.0])?,
                    k_height,
                }
            }
            Experiment::Closure => {
                let backward = r.boundary("backward", BoundaryPoint::Infinity)?;
                let forward = r.boundary("forward", BoundaryPoint::Finite(0.5))?;
                if backward == forward {
                    return Err(r.fail("forward", "`backward` and `forward` coincide"));
                }
                Params::Closure {
                    letter: r.or("letter", "p".to_string())?,
                    backward,
                    forward,
                    s: r.or("s", 0.0)?,
                    dilations: r.increasing("dilations", vec![0.5, 1.0, 2.0])?,
                }
            }
            Experiment::Checks => Params::Checks(Box::new(check_config(&r, seed.unwrap_or_default())?)),
        };
        let mut echo = vec![
            ("run.group".to_string(), group.as_ref().map_or("default".into(), |g| g.describe())),
            ("run.seed".to_string(), seed.map_or("none".into(), |s| s.to_string())),
            ("run.plot".to_string(), plot.to_string()),
        ];
        if let Some(s) = r.section {
            for e in &s.entries {
                echo.push((format!("{}.{}", s.name, e.key), e.value.clone()));
            }
        }
        Ok(ExperimentConfig {
            experiment,
            config_path: path.to_path_buf(),
            group,
            seed,
            out: out.unwrap_or_else(|| PathBuf::from("out")),
            deterministic,
            plot,
            params,
            echo,
        })
    }
}

fn check_config(r: &Reader, seed: u64) -> Result<CheckConfig> {
    let d = CheckConfig::default();
    let fraction = |key: &str, default: f64| -> Result<f64> {
        let v = r.positive(key, default)?;
        if v > 1.0 {
            return Err(r.fail(key, format!("`{key}` must be at most 1")));
        }
        Ok(v)
    };
    let cutoff: usize = r.or("cutoff", d.cutoff)?;
    if cutoff < 8 {
        return Err(r.fail("cutoff", "`cutoff` must be at least 8"));
    }
    Ok(CheckConfig {
        seed,
        random_cases: r.or("random_cases", d.random_cases)?,
        schottky_t_max: r.positive("schottky_t_max", d.schottky_t_max)?,
        cusped_t_max: r.positive("cusped_t_max", d.cusped_t_max)?,
        conformality_cutoffs: vec![cutoff - 4, cutoff - 2, cutoff],
        cutoff,
        vector_depth: r.or("vector_depth", d.vector_depth)?,
        resolution: r.positive("resolution", d.resolution)?,
        grid_h: r.positive("grid_h", d.grid_h)?,
        equidist_seed: r.or("equidist_seed", d.equidist_seed)?,
        equidist_tolerance: fraction("equidist_tolerance", d.equidist_tolerance)?,
        mixing_seed: r.or("mixing_seed", d.mixing_seed)?,
        mixing_time: r.positive("mixing_time", d.mixing_time)?,
        mixing_tolerance: fraction("mixing_tolerance", d.mixing_tolerance)?,
        ratio_seed: r.or("ratio_seed", d.ratio_seed)?,
        ratio_stability: fraction("ratio_stability", d.ratio_stability)?,
        ratio_tolerance: fraction("ratio_tolerance", d.ratio_tolerance)?,
        nondiv_seed: r.or("nondiv_seed", d.nondiv_seed)?,
        calibration_seed: r.or("calibration_seed", d.calibration_seed)?,
        calibration_target: fraction("calibration_target", d.calibration_target)?,
        nondiv_threshold: fraction("nondiv_threshold", d.nondiv_threshold)?,
        scaling_tolerance: fraction("scaling_tolerance", d.scaling_tolerance)?,
        time_budget: r.positive("time_budget", d.time_budget)?,
        word_budget: r.or("word_budget", d.word_budget)?,
        verify_rerun: r.or("verify_rerun", d.verify_rerun)?,
        ..d
    })
}

/// What a run produced, before anything is written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<(String, Vec<u8>)>,
    pub results: Vec<(String, String)>,
    pub thresholds: Vec<(String, String)>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
    /// Set when a check ran but did not meet its threshold.
    pub failed: bool,
}

impl RunReport {
    fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    fn number(&mut self, key: &str, v: f64) {
        let text = if v != 0.0 && !(1e-4..1e9).contains(&v.abs()) {
            format!("{v:e}")
        } else {
            v.to_string()
        };
        self.result(key, text);
    }

    fn series(&mut self, name: &str, title: &str, series: &[AverageSeries], plot: bool) -> Result<()> {
        self.files.push((format!("{name}.csv"), series_csv(series)?));
        if plot {
            self.files.push((format!("{name}.svg"), series_svg(title, series).into_bytes()));
        }
        Ok(())
    }
}

struct Prepared {
    group: FuchsianGroup,
    delta: f64,
    measure: AtomicBoundaryMeasure,
}

fn prepare(group: FuchsianGroup, m: &MeasureParams, report: &mut RunReport) -> Result<Prepared> {
    let (delta, stderr) = group.critical_exponent(m.t_max)?;
    report.number("delta", delta);
    report.number("delta_stderr", stderr);
    let measure = build_patterson(&group, &PattersonConfig::new(delta, m.cutoff)?)?;
    report.result("atoms", measure.len());
    Ok(Prepared { group, delta, measure })
}

fn coarse(p: &Prepared, m: &MeasureParams) -> Result<CoarseMeasure> {
    coarsen(&p.measure, &p.group, m.resolution)
}

fn vector(p: &Prepared, seed: u64, v: &VectorParams) -> Result<UnitTangent> {
    sample_vector(&p.group, seed, v.depth, v.s)
}

/// Computes the experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::default();
    let group = match &cfg.group {
        Some(src) => Some(src.load()?),
        None => None,
    };
    let need_group = || group.clone().ok_or_else(|| Error::Config("experiment needs a group".into()));
    let seed = cfg.seed.unwrap_or_default();
    let id = cfg.experiment.name();
    match &cfg.params {
        Params::GroupInfo { max_len, radii } => {
            let g = need_group()?;
            let mut text = String::new();
            let _ = writeln!(text, "name = {}", g.name());
            let _ = writeln!(text, "kind = {}", g.kind().name());
            for gen in g.generators() {
                let [a, b, c, d] = gen.matrix.entries();
                let _ = writeln!(
                    text,
                    "generator {} = {} [{a:.9} {b:.9} {c:.9} {d:.9}] trace {:.6}",
                    gen.label,
                    gen.kind.name(),
                    gen.matrix.trace()
                );
            }
            let cusps: Vec<String> = g.cusp_points().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(text, "cusps = {}", if cusps.is_empty() { "none".into() } else { cusps.join(" ") });
            for n in 1..=*max_len {
                let _ = writeln!(text, "words of length <= {n} = {}", g.word_count(n));
            }
            for (r, c) in radii.iter().zip(g.orbit_counts(radii)?) {
                let _ = writeln!(text, "orbit points within {r} = {c}");
            }
            report.summary.extend(text.lines().map(String::from));
            report.files.push(("group_info.txt".into(), text.into_bytes()));
        }
        Params::Exponent { t_max, growth_from } => {
            let g = need_group()?;
            let (delta, stderr) = g.critical_exponent(*t_max)?;
            let grid: Vec<f64> = (0..)
                .map(|k| 0.5 * t_max + 0.25 * k as f64)
                .take_while(|t| *t <= t_max + 1e-9)
                .collect();
            let logs: Vec<f64> = g.orbit_counts(&grid)?.iter().map(|&n| (n.max(1) as f64).ln()).collect();
            let series = AverageSeries::new(grid, logs, delta, id, None)?;
            report.series("exponent", "log orbit count", &[series], cfg.plot)?;
            report.number("delta", delta);
            report.number("delta_stderr", stderr);
            report.summary.push(format!("critical exponent {delta:.5} (stderr {stderr:.1e})"));
            if let Some(t0) = growth_from {
                let growth = g.check_parabolic_growth(*t0, *t_max)?;
                report.number("growth_constant", growth);
                report.summary.push(format!("growth constant {growth:.4}"));
            }
        }
        Params::Patterson { measure, bumps, conformality } => {
            let p = prepare(need_group()?, measure, &mut report)?;
            report.files.push(("atoms.csv".into(), atoms_csv(&p.measure)?));
            if *conformality {
                for l in p.group.letters() {
                    let d = conformality_defect(&p.measure, &p.group, &[l], p.delta)?;
                    report.number(&format!("conformality_{}", p.group.letter_name(l)), d);
                }
            }
            if !bumps.is_empty() {
                let psis = bumps.iter().map(|b| b.build(&p.group)).collect::<Result<Vec<_>>>()?;
                let c = coarse(&p, measure)?;
                let q = ps_integrals(&p.group, &c, p.delta, &psis, measure.grid_h)?;
                let rows: Vec<(String, _)> = q.into_iter().enumerate().map(|(k, e)| (format!("psi{k}"), e)).collect();
                for (name, e) in &rows {
                    report.number(&format!("integral_{name}"), e.estimate);
                }
                report.files.push(("quadrature.csv".into(), quadrature_csv(&rows)?));
            }
            report.summary.push(format!("{} atoms at exponent {:.5}", p.measure.len(), p.delta));
        }
        Params::Equidist { measure, vector: v, log_radii, bumps, mode } => {
            let p = prepare(need_group()?, measure, &mut report)?;
            let psis = bumps.iter().map(|b| b.build(&p.group)).collect::<Result<Vec<_>>>()?;
            let radii: Vec<f64> = log_radii.iter().map(|x| x.exp()).collect();
            let u = vector(&p, seed, v)?;
            let c = coarse(&p, measure)?;
            let series = match mode {
                EquidistMode::Ps => {
                    let refs = ps_integrals(&p.group, &c, p.delta, &psis, measure.grid_h)?;
                    let cond = conditional_within(&u, &p.measure, p.delta, radii[radii.len() - 1]);
                    let rows = ps_averages(&p.group, &cond, &radii, &psis, 0.0)?;
                    refs.iter()
                        .enumerate()
                        .map(|(k, q)| {
                            let values = rows.iter().map(|row| row[k]).collect();
                            AverageSeries::new(radii.clone(), values, q.estimate, format!("{id}:psi{k}"), Some(seed))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                EquidistMode::LebesgueRatio(window) => {
                    let q = br_integrals(&p.group, &c, p.delta, &psis, None, window, measure.grid_h)?;
                    let reference = q[0].estimate / q[1].estimate;
                    let rows = lebesgue_averages(&p.group, &u, &radii, &psis)?;
                    if rows.iter().any(|r| r[1] == 0.0) {
                        return Err(Error::numeric("denominator average vanishes; enlarge the radii or the second bump"));
                    }
                    let values = rows.iter().map(|r| r[0] / r[1]).collect();
                    vec![AverageSeries::new(radii.clone(), values, reference, format!("{id}:ratio"), Some(seed))?]
                }
            };
            for s in &series {
                let err = s.relative_errors().last().copied().unwrap_or(f64::NAN);
                report.number(&format!("{}_final_relative_error", s.experiment_id), err);
                report.summary.push(format!("{}: reference {:.5}, final {:.5}, relative error {err:.3}", s.experiment_id, s.reference, s.last().unwrap_or(f64::NAN)));
            }
            report.series(id, "horocyclic averages", &series, cfg.plot)?;
        }
        Params::Mixing { measure, vector: v, radius, times, bumps } => {
            let p = prepare(need_group()?, measure, &mut report)?;
            let psis = bumps.iter().map(|b| b.build(&p.group)).collect::<Result<Vec<_>>>()?;
            let c = coarse(&p, measure)?;
            let refs = ps_integrals(&p.group, &c, p.delta, &psis, measure.grid_h)?;
            let u = vector(&p, seed, v)?;
            let cond = conditional_within(&u, &p.measure, p.delta, *radius);
            let series = psis
                .iter()
                .zip(&refs)
                .enumerate()
                .map(|(k, (psi, q))| mixing_series(&p.group, &cond, *radius, psi, times, q.estimate, &format!("{id}:psi{k}"), Some(seed)))
                .collect::<Result<Vec<_>>>()?;
            for s in &series {
                let err = s.relative_errors().last().copied().unwrap_or(f64::NAN);
                report.number(&format!("{}_final_relative_error", s.experiment_id), err);
                report.summary.push(format!("{}: reference {:.5}, final relative error {err:.3}", s.experiment_id, s.reference));
            }
            report.series(id, "pushed horoball averages", &series, cfg.plot)?;
        }
        Params::Nondiv { measure, vector: v, log_radii, k_height } => {
            let p = prepare(need_group()?, measure, &mut report)?;
            let radii: Vec<f64> = log_radii.iter().map(|x| x.exp()).collect();
            let r_max = radii[radii.len() - 1];
            let k = match k_height {
                KHeight::Fixed(k) => *k,
                KHeight::Calibrate { seed: cs, candidates, target } => {
                    let w = vector(&p, *cs, v)?;
                    let cond = conditional_within(&w, &p.measure, p.delta, r_max);
                    calibrate_k_height(&p.group, &cond, &radii, candidates, *target)?
                }
            };
            let u = vector(&p, seed, v)?;
            let cond = conditional_within(&u, &p.measure, p.delta, r_max);
            let series = mass_in_compact(&p.group, &cond, &radii, k, id, Some(seed))?;
            let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
            report.number("k_height", k);
            report.number("min_mass", min);
            report.summary.push(format!("K_height {k}, minimum mass in the compact part {min:.4}"));
            report.series(id, "mass in the compact part", &[series], cfg.plot)?;
        }
        Params::Closure { letter, backward, forward, s, dilations } => {
            let g = need_group()?;
            let word = g.parse_word(letter)?;
            let [p] = word[..] else {
                return Err(Error::Config(format!("closure letter `{letter}` must be a single letter")));
            };
            let u = UnitTangent::from_coordinates(*backward, *forward, *s)?;
            let base = periodic_closure(&g, p, &u)?;
            let mut abscissae = vec![0.0];
            let mut values = vec![base.t0];
            let mut worst: f64 = base.residual;
            for &d in dilations {
                let c = periodic_closure(&g, p, &u.geodesic_flow(-d))?;
                worst = worst.max(c.residual);
                abscissae.push(d);
                values.push(c.t0 / (-d).exp());
            }
            // each value is t0(g^{-s}u)·e^{s}, which the dilation law pins to t0(u)
            let series = AverageSeries::new(abscissae, values, base.t0, id, None)?;
            let dev = series.values.iter().map(|v| (v - base.t0).abs()).fold(0.0, f64::max);
            report.number("t0", base.t0);
            report.number("max_residual", worst);
            report.number("max_dilation_deviation", dev);
            report.summary.push(format!("t0 {:.9}, residual {worst:.2e}, dilation deviation {dev:.2e}", base.t0));
            report.series(id, "rescaled closing times", &[series], cfg.plot)?;
        }
        Params::Checks(check_cfg) => {
            let suite = run_suite(check_cfg)?;
            let mut table = String::new();
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::numeric(format!("csv: {e}"));
            w.write_record(["id", "name", "passed", "threshold", "values"]).map_err(csv_err)?;
            for o in &suite.outcomes {
                let _ = writeln!(table, "{}", o.line());
                report.summary.push(o.line());
                report.thresholds.push((format!("check_{}", o.id), o.threshold.clone()));
                report.result(&format!("check_{}", o.id), if o.passed { "PASS" } else { "FAIL" });
                let values: Vec<String> = o.values.iter().map(|v| format!("{v:e}")).collect();
                w.write_record([o.id.to_string(), o.name.to_string(), o.passed.to_string(), o.threshold.clone(), values.join(" ")])
                    .map_err(csv_err)?;
            }
            report.result("digest", format!("{:016x}", suite.digest));
            report.result("words", suite.words);
            report.failed = !suite.all_passed();
            report.files.push(("checks.csv".into(), w.into_inner().map_err(|e| Error::numeric(e.to_string()))?));
            report.files.push(("checks.txt".into(), table.into_bytes()));
        }
    }
    Ok(report)
}

/// Runs the experiment and writes its files plus `manifest.txt` (last)
/// into the output directory. Returns the report for the caller to print.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let report = execute(cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    for (name, bytes) in &report.files {
        write_atomic(&cfg.out.join(name), bytes)?;
    }
    let mut m = Manifest::default();
    m.set("run", "experiment", cfg.experiment.name());
    m.set("run", "config", cfg.config_path.display());
    m.set("run", "version", env!("CARGO_PKG_VERSION"));
    m.set("run", "deterministic", cfg.deterministic);
    m.set("run", "wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    m.set("run", "files", report.files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "));
    for (k, v) in &cfg.echo {
        m.set("config", k, v);
    }
    for (k, v) in &report.thresholds {
        m.set("thresholds", k, v);
    }
    for (k, v) in &report.results {
        m.set("results", k, v);
    }
    write_atomic(&cfg.out.join("manifest.txt"), m.render().as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, exp: Experiment, overrides: &[&str], seed: Option<u64>) -> Result<ExperimentConfig> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.conf");
        std::fs::write(&path, text).unwrap();
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::load(&path, exp, &o, seed, None, false)
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::parse(e.name()), Some(e));
        }
        assert_eq!(Experiment::parse("nope"), None);
    }

    #[test]
    fn seed_is_mandatory_when_randomized() {
        let text = "[run]\ngroup = builtin:schottky\n";
        assert!(matches!(load(text, Experiment::Equidist, &[], None), Err(Error::Config(_))));
        assert!(load(text, Experiment::Equidist, &[], Some(3)).is_ok());
        assert!(load(text, Experiment::Exponent, &[], None).is_ok());
    }

    #[test]
    fn errors_carry_lines() {
        let text = "[run]\ngroup = builtin:schottky\n\n[exponent]\nt_max = -1\n";
        match load(text, Experiment::Exponent, &[], None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let text = "[run]\ngroup = builtin:schottky\n[exponent]\nbogus = 1\n";
        assert!(matches!(load(text, Experiment::Exponent, &[], None), Err(Error::Parse { line: 4, .. })));
        let text = "[run]\ngroup = builtin:nowhere\n";
        assert!(matches!(load(text, Experiment::Exponent, &[], None), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn overrides_replace_and_validate() {
        let text = "[run]\ngroup = builtin:schottky\n[exponent]\nt_max = 10\n";
        let c = load(text, Experiment::Exponent, &["t_max=12", "exponent.growth_from=4"], None).unwrap();
        assert_eq!(c.params, Params::Exponent { t_max: 12.0, growth_from: Some(4.0) });
        assert!(matches!(load(text, Experiment::Exponent, &["t_max=x"], None), Err(Error::Config(_))));
        assert!(matches!(load(text, Experiment::Exponent, &["nope=1"], None), Err(Error::Config(_))));
        assert!(matches!(load(text, Experiment::Exponent, &["t_max"], None), Err(Error::Config(_))));
        let c = load(text, Experiment::Equidist, &["seed=5", "bumps=0 1 1.57 0.5 inf"], None).unwrap();
        assert_eq!(c.seed, Some(5));
    }

    #[test]
    fn group_paths_resolve_against_the_config() {
        let c = load("[run]\ngroup = g/my.group\n", Experiment::GroupInfo, &[], None).unwrap();
        match c.group {
            Some(GroupSource::File(p)) => assert!(p.ends_with("g/my.group") && p.is_absolute()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn closure_runs_without_io() {
        let c = load("[run]\ngroup = builtin:cusped\n", Experiment::Closure, &[], None).unwrap();
        let r = execute(&c).unwrap();
        let dev: f64 = r.results.iter().find(|(k, _)| k == "max_dilation_deviation").unwrap().1.parse().unwrap();
        assert!(dev <= 1e-8);
        assert_eq!(r.files.len(), 1);
    }
}
