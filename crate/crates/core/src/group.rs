//! Free-product Fuchsian groups given by ping-pong data.
//!
//! Every generator `g` carries two boundary intervals: `D(g)` and `D(g⁻¹)`,
//! with `g` mapping the complement of `D(g⁻¹)` into `D(g)`. An interval
//! `(lo, hi)` runs in the positive direction of the boundary circle and may
//! pass through `∞`. Each interval bounds an open half-plane (the side of the
//! geodesic `lo–hi` facing the interval); the fundamental domain is the
//! complement of all these half-planes.
//!
//! Letters index generators and their inverses: generator `j` is letter `2j`
//! and its inverse is `2j + 1`.

use std::cell::Cell;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    hyperbolic_distance, BoundaryPoint, Geodesic, Isometry, PlanePoint, UnitTangent, BASEPOINT,
};
use crate::kv::Document;

/// Default group definitions shipped with the crate.
pub const SCHOTTKY_GROUP: &str = include_str!("../data/schottky.group");
pub const CUSPED_GROUP: &str = include_str!("../data/cusped.group");
pub const PARABOLIC_GROUP: &str = include_str!("../data/parabolic.group");

const TRACE_TOL: f64 = 1e-10;
const BOUNDARY_TOL: f64 = 1e-9;
const REDUCE_STEPS: usize = 10_000;
/// Word-length cutoff of the orbit-counting search.
pub const DEFAULT_MAX_WORD_LEN: usize = 4096;

thread_local! {
    static ENUMERATED: Cell<u64> = const { Cell::new(0) };
}

/// Number of group words enumerated so far on the current thread, by orbit
/// counting and Patterson construction alike.
pub fn enumerated_words() -> u64 {
    ENUMERATED.with(|c| c.get())
}

pub(crate) fn record_enumerated(n: u64) {
    ENUMERATED.with(|c| c.set(c.get() + n));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u8);

impl Letter {
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Hyperbolic,
    Parabolic,
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hyperbolic => "hyperbolic",
            Self::Parabolic => "parabolic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "hyperbolic" => Some(Self::Hyperbolic),
            "parabolic" => Some(Self::Parabolic),
            _ => None,
        }
    }
}

/// Closed boundary arc from `lo` to `hi` in the positive direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryInterval {
    pub lo: BoundaryPoint,
    pub hi: BoundaryPoint,
}

impl BoundaryInterval {
    pub fn new(lo: BoundaryPoint, hi: BoundaryPoint) -> Result<Self> {
        if lo == hi {
            return Err(Error::invalid("degenerate boundary interval"));
        }
        Ok(BoundaryInterval { lo, hi })
    }

    /// Angle swept from `lo` to `x` in the positive direction, in `[0, 2π)`.
    pub fn offset(&self, x: BoundaryPoint) -> f64 {
        (x.angle() - self.lo.angle()).rem_euclid(2.0 * PI)
    }

    pub fn width(&self) -> f64 {
        self.offset(self.hi)
    }

    /// Closed membership with an angular tolerance.
    pub fn contains(&self, x: BoundaryPoint, tol: f64) -> bool {
        let off = self.offset(x);
        off <= self.width() + tol || off >= 2.0 * PI - tol
    }

    /// The point halfway along the arc, seen from `i`.
    pub fn midpoint(&self) -> BoundaryPoint {
        BoundaryPoint::from_angle(self.lo.angle() + 0.5 * self.width())
    }

    pub fn wall(&self) -> Geodesic {
        Geodesic {
            a: self.lo,
            b: self.hi,
        }
    }

    pub fn region(&self) -> HalfPlane {
        match (self.lo, self.hi) {
            (BoundaryPoint::Finite(lo), BoundaryPoint::Finite(hi)) => {
                let center = 0.5 * (lo + hi);
                let radius = 0.5 * (hi - lo).abs();
                if lo < hi {
                    HalfPlane::Disk { center, radius }
                } else {
                    HalfPlane::Exterior { center, radius }
                }
            }
            (BoundaryPoint::Finite(x0), BoundaryPoint::Infinity) => HalfPlane::Right { x0 },
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(x0)) => HalfPlane::Left { x0 },
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => unreachable!("validated"),
        }
    }

    pub fn map(&self, m: &Isometry) -> BoundaryInterval {
        BoundaryInterval {
            lo: m.apply_boundary(self.lo),
            hi: m.apply_boundary(self.hi),
        }
    }
}

impl fmt::Display for BoundaryInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Open half-plane bounded by a geodesic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HalfPlane {
    Disk { center: f64, radius: f64 },
    Exterior { center: f64, radius: f64 },
    Right { x0: f64 },
    Left { x0: f64 },
}

impl HalfPlane {
    /// Signed power of `p`: negative inside, positive outside, zero on the wall.
    fn power(&self, p: PlanePoint) -> f64 {
        match *self {
            HalfPlane::Disk { center, radius } => {
                let dx = p.x - center;
                dx * dx + p.y * p.y - radius * radius
            }
            HalfPlane::Exterior { center, radius } => {
                let dx = p.x - center;
                radius * radius - dx * dx - p.y * p.y
            }
            HalfPlane::Right { x0 } => x0 - p.x,
            HalfPlane::Left { x0 } => p.x - x0,
        }
    }

    pub fn contains(&self, p: PlanePoint) -> bool {
        self.power(p) < 0.0
    }

    /// Hyperbolic distance from `p` to the bounding geodesic.
    pub fn wall_distance(&self, p: PlanePoint) -> f64 {
        match *self {
            HalfPlane::Disk { radius, .. } | HalfPlane::Exterior { radius, .. } => {
                (self.power(p).abs() / (2.0 * radius * p.y)).asinh()
            }
            HalfPlane::Right { .. } | HalfPlane::Left { .. } => (self.power(p).abs() / p.y).asinh(),
        }
    }

    /// Signed distance: negative inside the half-plane.
    pub fn signed_distance(&self, p: PlanePoint) -> f64 {
        let d = self.wall_distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub label: String,
    pub matrix: Isometry,
    pub kind: GeneratorKind,
    /// `D(g)`, the target of the ping-pong map.
    pub domain: BoundaryInterval,
    /// `D(g⁻¹)`.
    pub inverse_domain: BoundaryInterval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    ConvexCocompact,
    WithCusps,
}

impl GroupKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "convex_cocompact" => Some(Self::ConvexCocompact),
            "with_cusps" => Some(Self::WithCusps),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::ConvexCocompact => "convex_cocompact",
            GroupKind::WithCusps => "with_cusps",
        }
    }
}

/// An element of the group, kept with its letters.
#[derive(Clone, Debug, PartialEq)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub matrix: Isometry,
    /// `d(o, γo)`.
    pub displacement: f64,
}

impl Word {
    pub fn identity() -> Self {
        Word {
            letters: Vec::new(),
            matrix: Isometry::IDENTITY,
            displacement: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitClass {
    Radial,
    Parabolic,
}

impl LimitClass {
    pub fn name(&self) -> &'static str {
        match self {
            LimitClass::Radial => "radial",
            LimitClass::Parabolic => "parabolic",
        }
    }
}

/// A sampled limit point with its defining word.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSample {
    pub point: BoundaryPoint,
    pub class: LimitClass,
    pub witness: String,
    /// Visual width of the last nested interval; zero for periodic words.
    pub error_bound: f64,
}

/// An infinite reduced word.
#[derive(Clone, Debug, PartialEq)]
pub enum WordSpec {
    /// `prefix · period · period · …`
    Periodic { prefix: Vec<Letter>, period: Vec<Letter> },
    /// Uniformly random reduced letters, truncated at `depth`.
    Random { seed: u64, depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitCount {
    pub count: u64,
    /// Set when the word-length cutoff stopped the search early.
    pub lower_bound: bool,
}

/// A finitely generated free product of cyclic groups, given by ping-pong
/// data.
#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    name: String,
    kind: GroupKind,
    generators: Vec<Generator>,
    matrices: Vec<Isometry>,
    domains: Vec<BoundaryInterval>,
    regions: Vec<HalfPlane>,
    cusps: Vec<BoundaryPoint>,
    exact: bool,
}

impl FuchsianGroup {
    pub fn new(name: impl Into<String>, kind: GroupKind, generators: Vec<Generator>) -> Result<Self> {
        if generators.len() > 64 {
            return Err(Error::invalid("at most 64 generators are supported"));
        }
        let mut matrices = Vec::new();
        let mut domains = Vec::new();
        for g in &generators {
            matrices.push(g.matrix);
            matrices.push(g.matrix.inverse());
            domains.push(g.domain);
            domains.push(g.inverse_domain);
        }
        let regions = domains.iter().map(|d| d.region()).collect();
        let mut group = FuchsianGroup {
            name: name.into(),
            kind,
            generators,
            matrices,
            domains,
            regions,
            cusps: Vec::new(),
            exact: true,
        };
        group.exact = group.validate()?;
        group.cusps = group
            .generators
            .iter()
            .filter(|g| g.kind == GeneratorKind::Parabolic)
            .filter_map(|g| fixed_points(&g.matrix).ok().map(|f| f.0))
            .collect();
        Ok(group)
    }

    /// Checks traces, disjointness and the ping-pong condition; returns
    /// whether every pairing is exact (walls mapped onto walls).
    fn validate(&self) -> Result<bool> {
        let mut has_parabolic = false;
        for g in &self.generators {
            let tr = g.matrix.trace().abs();
            let parabolic = (tr - 2.0).abs() <= TRACE_TOL;
            match g.kind {
                GeneratorKind::Parabolic if !parabolic => {
                    return Err(Error::invalid(format!(
                        "generator {} declared parabolic but |trace| = {tr}",
                        g.label
                    )))
                }
                GeneratorKind::Hyperbolic if tr <= 2.0 + TRACE_TOL => {
                    return Err(Error::invalid(format!(
                        "generator {} declared hyperbolic but |trace| = {tr}",
                        g.label
                    )))
                }
                _ => {}
            }
            has_parabolic |= parabolic;
        }
        match (self.kind, has_parabolic) {
            (GroupKind::WithCusps, false) => {
                return Err(Error::invalid("group declared with_cusps has no parabolic generator"))
            }
            (GroupKind::ConvexCocompact, true) => {
                return Err(Error::invalid("group declared convex_cocompact has a parabolic generator"))
            }
            _ => {}
        }
        let n = self.domains.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.domains[i], self.domains[j]);
                let shared = [a.lo, a.hi]
                    .iter()
                    .filter(|p| [b.lo, b.hi].iter().any(|q| p.visual_distance(q) <= BOUNDARY_TOL))
                    .count();
                let strict_overlap = a.contains(b.midpoint(), 0.0)
                    || b.contains(a.midpoint(), 0.0)
                    || (a.contains(b.lo, -BOUNDARY_TOL) && a.offset(b.lo) > BOUNDARY_TOL)
                    || (a.contains(b.hi, -BOUNDARY_TOL) && a.offset(b.hi) > BOUNDARY_TOL)
                    || (b.contains(a.lo, -BOUNDARY_TOL) && b.offset(a.lo) > BOUNDARY_TOL)
                    || (b.contains(a.hi, -BOUNDARY_TOL) && b.offset(a.hi) > BOUNDARY_TOL);
                let own_parabolic_pair =
                    i / 2 == j / 2 && self.generators[i / 2].kind == GeneratorKind::Parabolic;
                if strict_overlap || (shared > 0 && !(own_parabolic_pair && shared == 1)) {
                    return Err(Error::invalid(format!(
                        "domains {} and {} are not disjoint",
                        self.letter_name(Letter(i as u8)),
                        self.letter_name(Letter(j as u8))
                    )));
                }
            }
        }
        let mut exact = true;
        for l in 0..n {
            let m = &self.matrices[l];
            let target = self.domains[l];
            let source = self.domains[l ^ 1];
            // complement of the source runs from source.hi to source.lo
            let image_lo = m.apply_boundary(source.hi);
            let image_hi = m.apply_boundary(source.lo);
            let ok = target.contains(image_lo, BOUNDARY_TOL)
                && target.contains(image_hi, BOUNDARY_TOL)
                && (target.offset(image_lo) <= target.offset(image_hi) + BOUNDARY_TOL
                    || target.offset(image_lo) >= 2.0 * PI - BOUNDARY_TOL);
            if !ok {
                return Err(Error::invalid(format!(
                    "ping-pong fails for {}: complement of {} maps to [{image_lo}, {image_hi}], outside {}",
                    self.letter_name(Letter(l as u8)),
                    source,
                    target
                )));
            }
            exact &= image_lo.visual_distance(&target.lo) <= BOUNDARY_TOL
                && image_hi.visual_distance(&target.hi) <= BOUNDARY_TOL;
        }
        for (l, r) in self.regions.iter().enumerate() {
            if r.contains(BASEPOINT) || r.wall_distance(BASEPOINT) <= BOUNDARY_TOL {
                return Err(Error::invalid(format!(
                    "base point i is not strictly inside the fundamental domain (domain of {})",
                    self.letter_name(Letter(l as u8))
                )));
            }
        }
        Ok(exact)
    }

    /// Parses the group-definition format.
    ///
    /// ```text
    /// [group]
    /// name = schottky
    /// kind = convex_cocompact        # or with_cusps
    ///
    /// [generator]
    /// label = a
    /// kind = hyperbolic              # or parabolic
    /// matrix = 3 8.36 1 3            # rescaled to determinant 1
    /// domain = 2.2 3.8               # D(a); `inf` denotes ∞
    /// inverse_domain = -3.8 -2.2     # D(a⁻¹)
    /// ```
    pub fn parse(text: &str, path: impl AsRef<Path>) -> Result<Self> {
        let doc = Document::parse(text, path.as_ref())?;
        let header = doc
            .section("group")
            .ok_or_else(|| doc.error(1, "missing [group] section"))?;
        doc.check_keys(header, &["name", "kind"])?;
        let name = doc.require(header, "name")?.value.clone();
        let kind_entry = doc.require(header, "kind")?;
        let kind = GroupKind::parse(&kind_entry.value).ok_or_else(|| {
            doc.error(
                kind_entry.line,
                format!("unknown group kind `{}`", kind_entry.value),
            )
        })?;
        for s in &doc.sections {
            if s.name != "group" && s.name != "generator" {
                return Err(doc.error(s.line, format!("unknown section [{}]", s.name)));
            }
        }
        let mut generators = Vec::new();
        for s in doc.sections("generator") {
            doc.check_keys(s, &["label", "kind", "matrix", "domain", "inverse_domain"])?;
            let label = doc.require(s, "label")?.value.clone();
            if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == '\'') {
                return Err(doc.error(s.line, format!("invalid label `{label}`")));
            }
            if generators.iter().any(|g: &Generator| g.label == label) {
                return Err(doc.error(s.line, format!("duplicate label `{label}`")));
            }
            let k = doc.require(s, "kind")?;
            let gkind = GeneratorKind::parse(&k.value)
                .ok_or_else(|| doc.error(k.line, format!("unknown generator kind `{}`", k.value)))?;
            let m = doc.require(s, "matrix")?;
            let entries: Vec<f64> = doc.list(m)?;
            if entries.len() != 4 {
                return Err(doc.error(m.line, "matrix needs four entries `a b c d`"));
            }
            let matrix = Isometry::new(entries[0], entries[1], entries[2], entries[3])
                .map_err(|e| doc.error(m.line, e.to_string()))?;
            let interval = |key: &str| -> Result<BoundaryInterval> {
                let e = doc.require(s, key)?;
                let pts: Vec<&str> = e.value.split_whitespace().collect();
                if pts.len() != 2 {
                    return Err(doc.error(e.line, format!("{key} needs two endpoints `lo hi`")));
                }
                let parse = |t: &str| {
                    BoundaryPoint::parse(t)
                        .ok_or_else(|| doc.error(e.line, format!("bad boundary point `{t}`")))
                };
                BoundaryInterval::new(parse(pts[0])?, parse(pts[1])?)
                    .map_err(|err| doc.error(e.line, err.to_string()))
            };
            generators.push(Generator {
                label,
                matrix,
                kind: gkind,
                domain: interval("domain")?,
                inverse_domain: interval("inverse_domain")?,
            });
        }
        let line = header.line;
        FuchsianGroup::new(name, kind, generators).map_err(|e| match e {
            Error::InvalidInput(msg) => doc.error(line, msg),
            other => other,
        })
    }

    /// Group-file text that [`FuchsianGroup::parse`] reads back to `self`.
    /// Matrices are written already normalized to determinant one.
    pub fn render(&self) -> String {
        let mut out = format!("[group]\nname = {}\nkind = {}\n", self.name, self.kind.name());
        for g in &self.generators {
            let [a, b, c, d] = g.matrix.entries();
            out.push_str(&format!(
                "\n[generator]\nlabel = {}\nkind = {}\nmatrix = {a:e} {b:e} {c:e} {d:e}\ndomain = {} {}\ninverse_domain = {} {}\n",
                g.label,
                g.kind.name(),
                g.domain.lo,
                g.domain.hi,
                g.inverse_domain.lo,
                g.inverse_domain.hi
            ));
        }
        out
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Two hyperbolic generators pairing four intervals symmetric under
    /// `x ↦ −x`.
    pub fn default_schottky() -> Self {
        Self::parse(SCHOTTKY_GROUP, "schottky.group").expect("shipped group is valid")
    }

    /// A parabolic `z ↦ z + 4` and one hyperbolic generator.
    pub fn default_cusped() -> Self {
        Self::parse(CUSPED_GROUP, "cusped.group").expect("shipped group is valid")
    }

    /// The cyclic group generated by `z ↦ z + 1`.
    pub fn default_parabolic() -> Self {
        Self::parse(PARABOLIC_GROUP, "parabolic.group").expect("shipped group is valid")
    }

    /// Subgroup generated by the listed generators, with the same domains.
    pub fn subgroup(&self, labels: &[&str]) -> Result<Self> {
        let mut gens = Vec::new();
        for l in labels {
            let g = self
                .generators
                .iter()
                .find(|g| g.label == *l)
                .ok_or_else(|| Error::invalid(format!("no generator labelled {l}")))?;
            gens.push(g.clone());
        }
        let kind = if gens.iter().any(|g| g.kind == GeneratorKind::Parabolic) {
            GroupKind::WithCusps
        } else {
            GroupKind::ConvexCocompact
        };
        FuchsianGroup::new(format!("{}<{}>", self.name, labels.join(",")), kind, gens)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn letter_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.matrices.len() as u8).map(Letter)
    }

    pub fn matrix(&self, l: Letter) -> &Isometry {
        &self.matrices[l.index()]
    }

    pub fn domain(&self, l: Letter) -> &BoundaryInterval {
        &self.domains[l.index()]
    }

    pub fn region(&self, l: Letter) -> &HalfPlane {
        &self.regions[l.index()]
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn letter_kind(&self, l: Letter) -> GeneratorKind {
        self.generators[l.generator()].kind
    }

    /// Display name: the label, or its inverse as the uppercase label (single
    /// lowercase letters) or `label'`.
    pub fn letter_name(&self, l: Letter) -> String {
        let label = &self.generators[l.generator()].label;
        if !l.is_inverse() {
            return label.clone();
        }
        let mut chars = label.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => c.to_ascii_uppercase().to_string(),
            _ => format!("{label}'"),
        }
    }

    pub fn word_name(&self, letters: &[Letter]) -> String {
        if letters.is_empty() {
            return "e".into();
        }
        let names: Vec<String> = letters.iter().map(|&l| self.letter_name(l)).collect();
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Parses a word written with letter names, either packed (`abAB`) or
    /// separated by spaces.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(Vec::new());
        }
        let lookup = |tok: &str| {
            self.letters()
                .find(|&l| self.letter_name(l) == tok)
                .ok_or_else(|| Error::invalid(format!("unknown letter `{tok}`")))
        };
        if text.contains(char::is_whitespace) {
            text.split_whitespace().map(lookup).collect()
        } else if self.letters().all(|l| self.letter_name(l).chars().count() == 1) {
            text.chars().map(|c| lookup(&c.to_string())).collect()
        } else {
            lookup(text).map(|l| vec![l])
        }
    }

    pub fn is_reduced(letters: &[Letter]) -> bool {
        letters.windows(2).all(|w| w[1] != w[0].inverse())
    }

    pub fn word(&self, letters: &[Letter]) -> Result<Word> {
        if letters.iter().any(|l| l.index() >= self.letter_count()) {
            return Err(Error::invalid("letter out of range"));
        }
        if !Self::is_reduced(letters) {
            return Err(Error::invalid(format!(
                "word {} is not reduced",
                self.word_name(letters)
            )));
        }
        let matrix = letters
            .iter()
            .fold(Isometry::IDENTITY, |acc, &l| acc.compose(self.matrix(l)));
        Ok(Word {
            letters: letters.to_vec(),
            matrix,
            displacement: matrix.displacement(),
        })
    }

    /// Breadth-first stream of every reduced word of length at most
    /// `max_len`, each exactly once.
    pub fn enumerate_words(&self, max_len: usize) -> WordStream<'_> {
        let mut queue = VecDeque::new();
        queue.push_back(Word::identity());
        WordStream {
            group: self,
            max_len,
            queue,
        }
    }

    /// Closed form `1 + Σ_{k=1..L} 2m(2m−1)^{k−1}` for the number of reduced
    /// words.
    pub fn word_count(&self, max_len: usize) -> u64 {
        let n = self.letter_count() as u64;
        if n == 0 {
            return 1;
        }
        let mut total = 1u64;
        let mut layer = n;
        for _ in 0..max_len {
            total += layer;
            layer *= n - 1;
        }
        total
    }

    /// Number of group elements with `d(o, γo) ≤ radius`.
    pub fn orbit_count(&self, radius: f64) -> Result<OrbitCount> {
        let (disp, lower_bound) = self.orbit_displacements(radius, DEFAULT_MAX_WORD_LEN)?;
        Ok(OrbitCount {
            count: disp.len() as u64,
            lower_bound,
        })
    }

    /// Sorted displacements `d(o, γo) ≤ radius`, and whether the word-length
    /// cutoff interfered.
    pub fn orbit_displacements(&self, radius: f64, max_len: usize) -> Result<(Vec<f64>, bool)> {
        if !(radius >= 0.0) {
            return Err(Error::invalid("orbit radius must be non-negative"));
        }
        if self.generators.len() == 1 {
            return Ok((self.cyclic_displacements(radius)?, false));
        }
        let limit = 2.0 * radius.cosh();
        let mut out = vec![0.0];
        let mut hit_cutoff = false;
        let mut visited = 0u64;
        let mut stack: Vec<(Isometry, Letter, usize)> = Vec::new();
        for l in self.letters() {
            stack.push((*self.matrix(l), l, 1));
        }
        while let Some((m, last, len)) = stack.pop() {
            visited += 1;
            // all descendants of m lie beyond the image of the wall of D(last⁻¹)
            let wall = self.domain(last.inverse()).map(&m).wall();
            if wall.distance_to(BASEPOINT) > radius {
                continue;
            }
            if m.norm_sq() <= limit {
                out.push(m.displacement());
            }
            if len == max_len {
                hit_cutoff = true;
                continue;
            }
            for l in self.letters() {
                if l != last.inverse() {
                    stack.push((m.compose(self.matrix(l)), l, len + 1));
                }
            }
        }
        record_enumerated(visited);
        out.retain(|&d| d <= radius);
        out.sort_by(f64::total_cmp);
        Ok((out, hit_cutoff))
    }

    /// One-generator groups: `|n| ≤ N(T)` with `N` found by doubling and
    /// bisection on `d(o, gⁿo)`, which increases with `n`.
    fn cyclic_displacements(&self, radius: f64) -> Result<Vec<f64>> {
        let g = self.generators[0].matrix;
        let disp = |n: i64| g.pow(n).displacement();
        let mut hi = 1i64;
        while disp(hi) <= radius {
            hi *= 2;
            if hi > 1 << 40 {
                return Err(Error::numeric("orbit of the cyclic group is too dense to count"));
            }
        }
        let mut lo = hi / 2; // disp(lo) <= radius or lo = 0
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if disp(mid) <= radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut out = Vec::with_capacity(2 * lo as usize + 1);
        out.push(0.0);
        for n in 1..=lo {
            let d = disp(n);
            out.push(d);
            out.push(d);
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Counting function on a grid, using one enumeration.
    pub fn orbit_counts(&self, radii: &[f64]) -> Result<Vec<u64>> {
        let rmax = radii.iter().cloned().fold(0.0, f64::max);
        let (disp, _) = self.orbit_displacements(rmax, DEFAULT_MAX_WORD_LEN)?;
        Ok(radii
            .iter()
            .map(|&r| disp.partition_point(|&d| d <= r) as u64)
            .collect())
    }

    /// Partial Poincaré series `Σ e^{−s·d(o, γo)}` over words of length at
    /// most `max_len`.
    pub fn poincare_series(&self, s: f64, max_len: usize) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::invalid("Poincaré exponent must be non-negative"));
        }
        Ok(self
            .enumerate_words(max_len)
            .map(|w| (-s * w.displacement).exp())
            .sum())
    }

    /// Critical exponent as the least-squares slope of `log count(T)` over
    /// `T ∈ [t_max/2, t_max]` with step 0.25, with its standard error.
    pub fn critical_exponent(&self, t_max: f64) -> Result<(f64, f64)> {
        if self.generators.is_empty() {
            return Ok((0.0, 0.0));
        }
        let grid: Vec<f64> = (0..)
            .map(|k| 0.5 * t_max + 0.25 * k as f64)
            .take_while(|&t| t <= t_max + 1e-12)
            .collect();
        let counts = self.orbit_counts(&grid)?;
        let last = *counts.last().unwrap_or(&0);
        if last < 1000 {
            return Err(Error::numeric(format!(
                "only {last} orbit points within {t_max}; need at least 1000"
            )));
        }
        let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
        Ok(least_squares_slope(&grid, &ys))
    }

    /// Worst two-sided constant `max(count·e^{−T/2}, e^{T/2}/count)` over a
    /// grid of `T` in `[t_min, t_max]`, for a group generated by one
    /// parabolic element.
    pub fn check_parabolic_growth(&self, t_min: f64, t_max: f64) -> Result<f64> {
        if self.generators.len() != 1 || self.generators[0].kind != GeneratorKind::Parabolic {
            return Err(Error::invalid("growth check needs a group generated by one parabolic"));
        }
        if !(t_min > 0.0 && t_max >= t_min) {
            return Err(Error::invalid("growth check needs 0 < t_min ≤ t_max"));
        }
        let steps = ((t_max - t_min) / 0.01).ceil() as usize;
        let grid: Vec<f64> = (0..=steps)
            .map(|k| (t_min + 0.01 * k as f64).min(t_max))
            .collect();
        let counts = self.orbit_counts(&grid)?;
        Ok(grid
            .iter()
            .zip(&counts)
            .map(|(&t, &c)| {
                let scaled = c as f64 * (-0.5 * t).exp();
                scaled.max(1.0 / scaled)
            })
            .fold(1.0, f64::max))
    }

    /// Index of a letter whose open region contains `p`.
    fn region_containing(&self, p: PlanePoint) -> Option<Letter> {
        self.letters().find(|&l| self.region(l).contains(p))
    }

    pub fn in_fundamental_domain(&self, p: PlanePoint) -> bool {
        self.region_containing(p).is_none()
    }

    /// Distance from `p` to the nearest wall of the fundamental domain;
    /// negative outside it.
    pub fn wall_margin(&self, p: PlanePoint) -> f64 {
        self.regions
            .iter()
            .map(|r| r.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Moves the base point of `u` into the fundamental domain.
    ///
    /// Returns the representative together with the word `γ` such that
    /// `rep = γ·u`. A base point left on a wall of an inverse letter's domain
    /// is moved to the paired wall, so that ties resolve to the generator.
    pub fn reduce(&self, u: &UnitTangent) -> Result<(UnitTangent, Word)> {
        let (frame, letters) = self.reduce_frame(u.frame())?;
        let word = self.word(&letters)?;
        Ok((UnitTangent::from_frame(frame), word))
    }

    /// Reduction returning the representative frame and the letters of `γ`.
    pub fn reduce_frame(&self, frame: &Isometry) -> Result<(Isometry, Vec<Letter>)> {
        if !self.exact {
            return Err(Error::invalid("reduction needs exactly paired domains"));
        }
        let mut frame = *frame;
        let mut applied: Vec<Letter> = Vec::new();
        let mut p = frame.apply(BASEPOINT);
        let mut steps = 0usize;
        while let Some(l) = self.region_containing(p) {
            let inv = l.inverse();
            frame = self.matrix(inv).compose(&frame);
            p = frame.apply(BASEPOINT);
            applied.push(inv);
            steps += 1;
            if steps > REDUCE_STEPS {
                return Err(Error::numeric(format!(
                    "reduction did not terminate after {REDUCE_STEPS} steps"
                )));
            }
        }
        for l in self.letters().filter(|l| l.is_inverse()) {
            if self.region(l).wall_distance(p) <= 1e-13 {
                let g = l.inverse();
                frame = self.matrix(g).compose(&frame);
                applied.push(g);
                break;
            }
        }
        applied.reverse();
        // free reduction in case the tie step cancelled a letter
        let mut letters: Vec<Letter> = Vec::with_capacity(applied.len());
        for l in applied {
            if letters.last() == Some(&l.inverse()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok((frame, letters))
    }

    /// Representative frame only; same rule as [`reduce_frame`](Self::reduce_frame)
    /// without tracking letters.
    pub fn representative(&self, frame: &Isometry) -> Result<Isometry> {
        if !self.exact {
            return Err(Error::invalid("reduction needs exactly paired domains"));
        }
        let mut frame = *frame;
        let mut p = frame.apply(BASEPOINT);
        let mut steps = 0usize;
        while let Some(l) = self.region_containing(p) {
            frame = self.matrix(l.inverse()).compose(&frame);
            p = frame.apply(BASEPOINT);
            steps += 1;
            if steps > REDUCE_STEPS {
                return Err(Error::numeric(format!(
                    "reduction did not terminate after {REDUCE_STEPS} steps"
                )));
            }
        }
        for l in self.letters().filter(|l| l.is_inverse()) {
            if self.region(l).wall_distance(p) <= 1e-13 {
                frame = self.matrix(l.inverse()).compose(&frame);
                break;
            }
        }
        Ok(frame)
    }

    /// Fixed points of the parabolic generators.
    pub fn cusp_points(&self) -> &[BoundaryPoint] {
        &self.cusps
    }

    /// Letter whose closed domain contains `xi`, if any.
    pub fn domain_of(&self, xi: BoundaryPoint) -> Option<Letter> {
        self.letters().find(|&l| self.domain(l).contains(xi, BOUNDARY_TOL))
    }

    /// Reduced base point only.
    pub fn reduce_point(&self, p: PlanePoint) -> Result<(PlanePoint, Isometry)> {
        let mut q = p;
        let mut acc = Isometry::IDENTITY;
        let mut steps = 0usize;
        while let Some(l) = self.region_containing(q) {
            let m = self.matrix(l.inverse());
            q = m.apply(q);
            acc = m.compose(&acc);
            steps += 1;
            if steps > REDUCE_STEPS {
                return Err(Error::numeric(format!(
                    "reduction did not terminate after {REDUCE_STEPS} steps"
                )));
            }
        }
        Ok((q, acc))
    }

    /// Limit point of an infinite reduced word.
    pub fn sample_limit_point(&self, spec: &WordSpec) -> Result<LimitSample> {
        match spec {
            WordSpec::Periodic { prefix, period } => {
                if period.is_empty() {
                    return Err(Error::invalid("periodic word needs a non-empty period"));
                }
                let mut full = prefix.clone();
                full.extend_from_slice(period);
                full.extend_from_slice(period);
                if !Self::is_reduced(&full) {
                    return Err(Error::invalid(format!(
                        "word {}({})^∞ is not reduced",
                        self.word_name(prefix),
                        self.word_name(period)
                    )));
                }
                let p = self.word(period)?;
                let (attracting, _) = fixed_points(&p.matrix)?;
                let pre = self.word(prefix)?;
                let point = pre.matrix.apply_boundary(attracting);
                let parabolic = period.iter().all(|&l| l == period[0])
                    && self.letter_kind(period[0]) == GeneratorKind::Parabolic;
                Ok(LimitSample {
                    point,
                    class: if parabolic {
                        LimitClass::Parabolic
                    } else {
                        LimitClass::Radial
                    },
                    witness: format!("{}({})^inf", self.word_name(prefix), self.word_name(period)),
                    error_bound: 0.0,
                })
            }
            WordSpec::Random { seed, depth } => {
                if *depth == 0 {
                    return Err(Error::invalid("random word needs positive depth"));
                }
                if self.letter_count() < 2 {
                    return Err(Error::invalid("random words need at least one generator"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let n = self.letter_count() as u8;
                let mut letters: Vec<Letter> = Vec::with_capacity(*depth);
                while letters.len() < *depth {
                    let l = Letter(rng.random_range(0..n));
                    if letters.last().map_or(true, |p| *p != l.inverse()) {
                        letters.push(l);
                    }
                }
                let last = *letters.last().expect("depth > 0");
                let prefix = self.word(&letters[..letters.len() - 1])?;
                let interval = self.domain(last).map(&prefix.matrix);
                let point = prefix.matrix.apply_boundary(self.domain(last).midpoint());
                Ok(LimitSample {
                    point,
                    class: LimitClass::Radial,
                    witness: format!("seed={seed}:{}", self.word_name(&letters)),
                    error_bound: interval.lo.visual_distance(&interval.hi),
                })
            }
        }
    }
}

/// Least-squares slope and its standard error.
pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - icpt - slope * x;
            r * r
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Fixed points of a non-identity isometry as `(attracting, repelling)`;
/// parabolic maps have a single fixed point and no repelling one.
pub fn fixed_points(m: &Isometry) -> Result<(BoundaryPoint, Option<BoundaryPoint>)> {
    if m.is_identity(1e-12) {
        return Err(Error::invalid("the identity has no isolated fixed points"));
    }
    let [a, b, c, d] = m.entries();
    let tr = (a + d).abs();
    if tr < 2.0 - TRACE_TOL {
        return Err(Error::invalid("elliptic element has no boundary fixed points"));
    }
    let parabolic = (tr - 2.0).abs() <= TRACE_TOL;
    if c == 0.0 {
        if parabolic {
            return Ok((BoundaryPoint::Infinity, None));
        }
        let finite = BoundaryPoint::Finite(b / (d - a));
        return Ok(if a.abs() > 1.0 {
            (BoundaryPoint::Infinity, Some(finite))
        } else {
            (finite, Some(BoundaryPoint::Infinity))
        });
    }
    if parabolic {
        return Ok((BoundaryPoint::Finite((a - d) / (2.0 * c)), None));
    }
    // c z² + (d − a) z − b = 0
    let bq = d - a;
    let disc = ((a + d) * (a + d) - 4.0).max(0.0).sqrt();
    let q = -0.5 * (bq + if bq >= 0.0 { disc } else { -disc });
    let z1 = q / c;
    let z2 = -b / q;
    let attracting = |z: f64| (c * z + d).abs() > 1.0;
    Ok(if attracting(z1) {
        (BoundaryPoint::Finite(z1), Some(BoundaryPoint::Finite(z2)))
    } else {
        (BoundaryPoint::Finite(z2), Some(BoundaryPoint::Finite(z1)))
    })
}

/// Breadth-first iterator over reduced words.
pub struct WordStream<'a> {
    group: &'a FuchsianGroup,
    max_len: usize,
    queue: VecDeque<Word>,
}

impl Iterator for WordStream<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let w = self.queue.pop_front()?;
        record_enumerated(1);
        if w.len() < self.max_len {
            let last = w.letters.last().copied();
            for l in self.group.letters() {
                if Some(l.inverse()) == last {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                let matrix = w.matrix.compose(self.group.matrix(l));
                self.queue.push_back(Word {
                    letters,
                    matrix,
                    displacement: matrix.displacement(),
                });
            }
        }
        Some(w)
    }
}

/// `d(o, γo)` directly from the base point images; used by tests as an
/// independent path.
pub fn displacement_of(m: &Isometry) -> f64 {
    hyperbolic_distance(BASEPOINT, m.apply(BASEPOINT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shipped_groups_are_valid() {
        let s = FuchsianGroup::default_schottky();
        assert_eq!(s.kind(), GroupKind::ConvexCocompact);
        assert!(s.is_exact());
        let c = FuchsianGroup::default_cusped();
        assert_eq!(c.kind(), GroupKind::WithCusps);
        assert!(c.is_exact());
        let p = FuchsianGroup::default_parabolic();
        assert_eq!(p.generators().len(), 1);
    }

    #[test]
    fn word_counts() {
        let g = FuchsianGroup::default_schottky();
        assert_eq!(g.enumerate_words(0).count(), 1);
        assert_eq!(g.enumerate_words(1).count(), 5);
        assert_eq!(g.enumerate_words(3).count(), 53);
        for l in 0..6 {
            assert_eq!(g.enumerate_words(l).count() as u64, g.word_count(l));
        }
        assert_eq!(g.word_count(14), 9_565_937);
        let words: Vec<_> = g.enumerate_words(3).map(|w| w.letters).collect();
        let mut dedup = words.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), words.len());
        assert!(words.iter().all(|w| FuchsianGroup::is_reduced(w)));
    }

    #[test]
    fn word_matrices_match_products() {
        let g = FuchsianGroup::default_cusped();
        for w in g.enumerate_words(4) {
            let direct = g.word(&w.letters).unwrap();
            assert!(w.matrix.frame_distance(&direct.matrix) <= 1e-10);
            assert!(close(w.displacement, displacement_of(&w.matrix), 1e-9));
        }
    }

    #[test]
    fn free_product_spot_check() {
        let g = FuchsianGroup::default_cusped();
        for w in g.enumerate_words(8).skip(1).step_by(97) {
            assert!(!w.matrix.is_identity(1e-8), "{}", g.word_name(&w.letters));
        }
    }

    #[test]
    fn orbit_count_basics() {
        let g = FuchsianGroup::default_schottky();
        assert_eq!(g.orbit_count(0.0).unwrap().count, 1);
        let mut prev = 0;
        for t in [1.0, 3.0, 5.0, 8.0, 10.0] {
            let c = g.orbit_count(t).unwrap();
            assert!(!c.lower_bound);
            assert!(c.count >= prev);
            prev = c.count;
        }
    }

    #[test]
    fn orbit_count_matches_brute_force() {
        let g = FuchsianGroup::default_schottky();
        let t = 9.0;
        let brute = g
            .enumerate_words(12)
            .filter(|w| w.displacement <= t)
            .count() as u64;
        assert_eq!(g.orbit_count(t).unwrap().count, brute);
        let c = FuchsianGroup::default_cusped();
        let brute = c
            .enumerate_words(9)
            .filter(|w| w.displacement <= 6.0)
            .count() as u64;
        assert_eq!(c.orbit_count(6.0).unwrap().count, brute);
    }

    #[test]
    fn orbit_count_flags_cutoff() {
        let g = FuchsianGroup::default_cusped();
        let (_, hit) = g.orbit_displacements(12.0, 3).unwrap();
        assert!(hit);
    }

    #[test]
    fn cyclic_count_matches_closed_form() {
        // d(i, i + 4n) = 2 asinh(2n)
        let g = FuchsianGroup::default_cusped().subgroup(&["p"]).unwrap();
        for t in [1.0, 4.0, 9.5, 20.0] {
            let n = ((0.5 * t as f64).sinh() / 2.0).floor() as u64;
            assert_eq!(g.orbit_count(t).unwrap().count, 1 + 2 * n, "T = {t}");
        }
    }

    #[test]
    fn parabolic_exponent_and_growth() {
        let g = FuchsianGroup::default_parabolic();
        let (delta, err) = g.critical_exponent(30.0).unwrap();
        assert!(close(delta, 0.5, 0.02), "{delta} ± {err}");
        let d1 = g.check_parabolic_growth(1.0, 1.0).unwrap();
        assert!(d1 >= 1.0);
        let d = g.check_parabolic_growth(5.0, 30.0).unwrap();
        assert!(d.is_finite() && d <= 10.0);
        let p4 = FuchsianGroup::default_cusped().subgroup(&["p"]).unwrap();
        assert!(p4.check_parabolic_growth(5.0, 30.0).unwrap().is_finite());
    }

    #[test]
    fn trivial_group_exponent() {
        let g = FuchsianGroup::new("trivial", GroupKind::ConvexCocompact, vec![]).unwrap();
        assert_eq!(g.critical_exponent(10.0).unwrap(), (0.0, 0.0));
        assert_eq!(g.orbit_count(5.0).unwrap().count, 1);
    }

    #[test]
    fn too_few_points_rejected() {
        let g = FuchsianGroup::default_schottky();
        assert!(matches!(g.critical_exponent(2.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn poincare_series_examples() {
        let g = FuchsianGroup::default_schottky();
        assert!(close(g.poincare_series(200.0, 4).unwrap(), 1.0, 1e-12));
        assert_eq!(g.poincare_series(0.0, 3).unwrap(), 53.0);
        let a = g.poincare_series(0.5, 5).unwrap();
        let b = g.poincare_series(0.7, 5).unwrap();
        assert!(a > b);
        // below exponent 1/2 the parabolic partial sums keep growing
        let p = FuchsianGroup::default_parabolic();
        let sums: Vec<f64> = [250, 500, 1000, 2000]
            .iter()
            .map(|&l| p.poincare_series(0.4, l).unwrap())
            .collect();
        for w in sums.windows(2) {
            assert!(w[1] - w[0] > 0.5 * (sums[1] - sums[0]));
        }
    }

    #[test]
    fn parabolic_dominated_by_group() {
        let g = FuchsianGroup::default_cusped();
        let (dg, eg) = g.critical_exponent(18.0).unwrap();
        let p = g.subgroup(&["p"]).unwrap();
        let (dp, _) = p.critical_exponent(30.0).unwrap();
        assert!(close(dp, 0.5, 0.02));
        assert!(dp < dg - 3.0 * eg, "{dp} vs {dg} ± {eg}");
    }

    #[test]
    fn fixed_point_examples() {
        let t = Isometry::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(fixed_points(&t).unwrap(), (BoundaryPoint::Infinity, None));
        let d = Isometry::new(2.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(
            fixed_points(&d).unwrap(),
            (BoundaryPoint::Infinity, Some(BoundaryPoint::Finite(0.0)))
        );
        assert!(fixed_points(&Isometry::IDENTITY).is_err());
        let g = Isometry::new(2.0, 1.0, 3.0, 2.0).unwrap();
        let c = g * d * g.inverse();
        let (att, rep) = fixed_points(&c).unwrap();
        assert!(att.visual_distance(&g.apply_boundary(BoundaryPoint::Infinity)) < 1e-12);
        assert!(rep.unwrap().visual_distance(&g.apply_boundary(BoundaryPoint::Finite(0.0))) < 1e-12);
    }

    #[test]
    fn periodic_samples() {
        let g = FuchsianGroup::default_cusped();
        let p = g.parse_word("p").unwrap();
        let s = g
            .sample_limit_point(&WordSpec::Periodic {
                prefix: vec![],
                period: p.clone(),
            })
            .unwrap();
        assert_eq!(s.point, BoundaryPoint::Infinity);
        assert_eq!(s.class, LimitClass::Parabolic);
        let ab = g.parse_word("pb").unwrap();
        let s = g
            .sample_limit_point(&WordSpec::Periodic {
                prefix: vec![],
                period: ab.clone(),
            })
            .unwrap();
        assert_eq!(s.class, LimitClass::Radial);
        // quadratic-formula oracle on the product matrix
        let [a, _, c, d] = g.word(&ab).unwrap().matrix.entries();
        let disc = ((a + d) * (a + d) - 4.0).sqrt();
        let roots = [((a - d) + disc) / (2.0 * c), ((a - d) - disc) / (2.0 * c)];
        let att = roots
            .iter()
            .copied()
            .find(|z| (c * z + d).abs() > 1.0)
            .unwrap();
        assert!(close(s.point.finite().unwrap(), att, 1e-10));
        let bad = g.parse_word("bB").unwrap();
        assert!(g
            .sample_limit_point(&WordSpec::Periodic {
                prefix: vec![],
                period: bad,
            })
            .is_err());
        // period that does not close up into a reduced word
        let bad = g.parse_word("pbP").unwrap();
        assert!(g
            .sample_limit_point(&WordSpec::Periodic {
                prefix: vec![],
                period: bad,
            })
            .is_err());
    }

    #[test]
    fn random_samples_nest() {
        let g = FuchsianGroup::default_schottky();
        for seed in 0..20 {
            let s = g.sample_limit_point(&WordSpec::Random { seed, depth: 30 }).unwrap();
            assert_eq!(s.class, LimitClass::Radial);
            assert!(s.error_bound < 1e-6, "{} {}", s.error_bound, s.witness);
            let first = g.parse_word(&s.witness.split(':').nth(1).unwrap()[..1]).unwrap()[0];
            assert!(g.domain(first).contains(s.point, 1e-12));
        }
        let a = g.sample_limit_point(&WordSpec::Random { seed: 7, depth: 30 }).unwrap();
        let b = g.sample_limit_point(&WordSpec::Random { seed: 7, depth: 30 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduce_examples() {
        let g = FuchsianGroup::default_schottky();
        let u = UnitTangent::identity().horocycle_flow(0.3);
        let (rep, w) = g.reduce(&u).unwrap();
        assert_eq!(rep, u);
        assert!(w.is_empty());
        let gamma = g.word(&g.parse_word("abA").unwrap()).unwrap();
        let (rep2, w2) = g.reduce(&u.translate(&gamma.matrix)).unwrap();
        assert!(rep2.frame_distance(&u) < 1e-10);
        assert_eq!(w2.letters, g.parse_word("aBA").unwrap());
    }

    #[test]
    fn wall_tie_goes_to_generator() {
        let g = FuchsianGroup::default_cusped();
        // x = -2 is the wall of D(p⁻¹); it pairs with x = 2
        let u = UnitTangent::from_frame(Isometry::translation(-2.0));
        let (rep, w) = g.reduce(&u).unwrap();
        assert!((rep.base().x - 2.0).abs() < 1e-12);
        assert_eq!(w.letters, g.parse_word("p").unwrap());
        let (rep2, w2) = g.reduce(&rep).unwrap();
        assert_eq!(rep2, rep);
        assert!(w2.is_empty());
    }

    #[test]
    fn reduce_guard() {
        let g = FuchsianGroup::default_schottky();
        let deep = UnitTangent::from_frame(Isometry::geodesic(-1000.0).compose(&Isometry::translation(2.5)));
        // base point far below the limit set; either reduces or reports
        match g.reduce(&deep) {
            Ok((rep, _)) => assert!(g.in_fundamental_domain(rep.base())),
            Err(e) => assert_eq!(e.exit_code(), 2),
        }
    }

    #[test]
    fn parse_errors() {
        let bad = "[group]\nname = x\nkind = convex_cocompact\n[generator]\nlabel = a\nkind = hyperbolic\nmatrix = 1 2 3\ndomain = 1 2\ninverse_domain = -2 -1\n";
        let e = FuchsianGroup::parse(bad, "g.group").unwrap_err();
        assert!(e.to_string().starts_with("g.group:7:"), "{e}");
        let overlapping = "[group]\nname = x\nkind = convex_cocompact\n[generator]\nlabel = a\nkind = hyperbolic\nmatrix = 1 0.36 1 1\ndomain = 0.2 1.8\ninverse_domain = -1.8 0.5\n";
        assert!(FuchsianGroup::parse(overlapping, "g").is_err());
        let wrong_kind = CUSPED_GROUP.replace("with_cusps", "convex_cocompact");
        assert!(FuchsianGroup::parse(&wrong_kind, "g").is_err());
        let typo = SCHOTTKY_GROUP.replace("inverse_domain", "inverse_domian");
        assert!(FuchsianGroup::parse(&typo, "g").is_err());
    }

    #[test]
    fn symmetric_schottky() {
        let g = FuchsianGroup::default_schottky();
        for l in g.letters().filter(|l| !l.is_inverse()) {
            let [a, b, c, d] = g.matrix(l).entries();
            let [ia, ib, ic, id] = g.matrix(l.inverse()).entries();
            // σ g σ = g⁻¹ for σ: z ↦ −z̄
            assert_eq!([a, -b, -c, d], [ia, ib, ic, id]);
        }
    }

    fn arb_frame() -> impl Strategy<Value = UnitTangent> {
        (-2.0f64..2.0, -1.5f64..1.5, -3.0f64..3.0).prop_map(|(x, ly, ang)| {
            let y = ly.exp();
            let t = Isometry::new(y.sqrt(), x / y.sqrt(), 0.0, 1.0 / y.sqrt()).unwrap();
            let r = Isometry::new(ang.cos(), ang.sin(), -ang.sin(), ang.cos()).unwrap();
            UnitTangent::from_frame(t * r)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn displacement_symmetric(idx in 0usize..53) {
            let g = FuchsianGroup::default_cusped();
            let w = g.enumerate_words(3).nth(idx).unwrap();
            let inv = w.matrix.inverse();
            prop_assert!((w.displacement - displacement_of(&inv)).abs() <= 1e-10);
        }

        #[test]
        fn reduce_is_invariant(u in arb_frame(), which in 0u8..4, cusped in any::<bool>()) {
            let g = if cusped { FuchsianGroup::default_cusped() } else { FuchsianGroup::default_schottky() };
            let (rep, w) = g.reduce(&u).unwrap();
            prop_assert!(g.in_fundamental_domain(rep.base()));
            prop_assert!(rep.frame_distance(&u.translate(&w.matrix)) <= 1e-9 * (1.0 + w.matrix.norm_sq()));
            let (rep2, w2) = g.reduce(&rep).unwrap();
            prop_assert!(w2.is_empty());
            prop_assert_eq!(rep2, rep);
            let moved = u.translate(g.matrix(Letter(which)));
            let (rep3, _) = g.reduce(&moved).unwrap();
            prop_assert!(rep3.frame_distance(&rep) <= 1e-8);
        }
    }
}
