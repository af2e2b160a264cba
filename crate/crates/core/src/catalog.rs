//! Catalog stars and the three indexed feature catalogs.
//!
//! * the pair catalog holds every unordered pair within `psi_max` keyed on
//!   the interstar angle,
//! * the trio catalogs hold every combination of three mutually close stars
//!   keyed on (area, moment), one table for spherical and one for planar
//!   features,
//! * the permutation catalog holds ordered trios (central, closest,
//!   second closest) keyed on (θ₁, θ₂, φ).
//!
//! Every table is sorted on its first feature. A range query binary searches
//! the first interval and filters the remaining features row by row, so it
//! returns exactly what a linear scan with the same predicate returns.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::features::{planar_features, spherical_features, TrioFeatures, DEFAULT_MOMENT_DEPTH};
use crate::geometry::{angular_separation, interior_angle, UnitVector3, Vector3};

const RAD: f64 = core::f64::consts::PI / 180.0;

/// Spherical to Cartesian conversion with `alpha` and `delta` in degrees.
pub fn to_cartesian(alpha: f64, delta: f64, r: f64) -> Vector3 {
    let (sa, ca) = (alpha * RAD).sin_cos();
    let (sd, cd) = (delta * RAD).sin_cos();
    Vector3::new(r * cd * ca, r * cd * sa, r * sd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogStar {
    pub id: u32,
    /// Right ascension in degrees, `[0, 360)`.
    pub alpha: f64,
    /// Declination in degrees, `[-90, 90]`.
    pub delta: f64,
    pub magnitude: f64,
    pub v: UnitVector3,
}

impl CatalogStar {
    /// Builds a star, wrapping `alpha` into `[0, 360)`. Returns `None` when
    /// the declination is out of range or a coordinate is not finite.
    pub fn new(id: u32, alpha: f64, delta: f64, magnitude: f64) -> Option<Self> {
        if !alpha.is_finite() || !delta.is_finite() || !(-90.0..=90.0).contains(&delta) {
            return None;
        }
        let mut alpha = alpha - 360.0 * Float::floor(alpha / 360.0);
        if alpha >= 360.0 {
            alpha = 0.0;
        }
        let v = UnitVector3::from_vector(to_cartesian(alpha, delta, 1.0))?;
        Some(Self { id, alpha, delta, magnitude, v })
    }
}

// ---------------------------------------------------------------------------
// Source table parsing

#[derive(Debug, Clone, PartialEq)]
pub enum Delimiter {
    Whitespace,
    Char(char),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

/// Layout of a delimited star table.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFormat {
    pub delimiter: Delimiter,
    pub has_header: bool,
    pub id: ColumnRef,
    pub alpha: ColumnRef,
    pub delta: ColumnRef,
    pub magnitude: ColumnRef,
    pub angle_unit: AngleUnit,
}

impl SourceFormat {
    /// Comma separated table with a `HIP,RArad,DErad,Hpmag` header.
    pub fn hip_csv() -> Self {
        Self {
            delimiter: Delimiter::Char(','),
            has_header: true,
            id: ColumnRef::Name("HIP".to_string()),
            alpha: ColumnRef::Name("RArad".to_string()),
            delta: ColumnRef::Name("DErad".to_string()),
            magnitude: ColumnRef::Name("Hpmag".to_string()),
            angle_unit: AngleUnit::Radians,
        }
    }

    /// The whitespace separated Hipparcos new reduction main table (`hip2.dat`).
    pub fn hip2_dat() -> Self {
        Self {
            delimiter: Delimiter::Whitespace,
            has_header: false,
            id: ColumnRef::Index(0),
            alpha: ColumnRef::Index(4),
            delta: ColumnRef::Index(5),
            magnitude: ColumnRef::Index(19),
            angle_unit: AngleUnit::Radians,
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self.delimiter {
            Delimiter::Whitespace => line.split_whitespace().collect(),
            Delimiter::Char(c) => line.split(c).map(str::trim).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedSource {
    pub stars: Vec<CatalogStar>,
    /// Rows with an unparseable field.
    pub malformed: usize,
    /// Rows without a right ascension or declination.
    pub missing_position: usize,
}

fn resolve(col: &ColumnRef, header: Option<&[&str]>) -> Result<usize> {
    match (col, header) {
        (ColumnRef::Index(i), _) => Ok(*i),
        (ColumnRef::Name(name), Some(h)) => {
            h.iter().position(|c| c == name).ok_or_else(|| Error::MissingColumn(name.clone()))
        }
        (ColumnRef::Name(name), None) => Err(Error::MissingColumn(name.clone())),
    }
}

/// Parses a star table, keeping stars strictly brighter than `magnitude_cutoff`.
///
/// Stars without a position are skipped and counted. A missing magnitude is
/// read as +∞. The result is sorted by catalog id.
pub fn parse_catalog_text(text: &str, format: &SourceFormat, magnitude_cutoff: f64) -> Result<ParsedSource> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header_fields: Option<Vec<&str>> = if format.has_header {
        match lines.next() {
            Some(h) => Some(format.split(h)),
            None => return Ok(ParsedSource::default()),
        }
    } else {
        None
    };
    let header = header_fields.as_deref();
    let cols = [
        resolve(&format.id, header)?,
        resolve(&format.alpha, header)?,
        resolve(&format.delta, header)?,
        resolve(&format.magnitude, header)?,
    ];
    let scale = match format.angle_unit {
        AngleUnit::Degrees => 1.0,
        AngleUnit::Radians => 1.0 / RAD,
    };

    let mut out = ParsedSource::default();
    for line in lines {
        let fields = format.split(line);
        let get = |i: usize| fields.get(i).copied().unwrap_or("");
        let (id, alpha, delta, mag) = (get(cols[0]), get(cols[1]), get(cols[2]), get(cols[3]));
        if alpha.is_empty() || delta.is_empty() {
            out.missing_position += 1;
            continue;
        }
        let parsed = (|| {
            let id: u32 = id.parse().ok()?;
            let alpha: f64 = alpha.parse().ok()?;
            let delta: f64 = delta.parse().ok()?;
            let mag: f64 = if mag.is_empty() { f64::INFINITY } else { mag.parse().ok()? };
            CatalogStar::new(id, alpha * scale, delta * scale, mag)
        })();
        match parsed {
            Some(star) if star.magnitude < magnitude_cutoff => out.stars.push(star),
            Some(_) => {}
            None => out.malformed += 1,
        }
    }
    out.stars.sort_by_key(|s| s.id);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Feature tables

/// Closed interval on one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `[value - 3 sigma, value + 3 sigma]`.
    pub fn around(value: f64, sigma: f64) -> Self {
        Self { lo: value - 3.0 * sigma, hi: value + 3.0 * sigma }
    }

    pub fn everything() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A row of a feature table.
pub trait FeatureRow {
    const FEATURES: usize;
    fn feature(&self, i: usize) -> f64;
    fn star_ids(&self) -> &[u32];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntry {
    pub ids: [u32; 2],
    /// Interstar angle in degrees.
    pub theta: f64,
}

impl FeatureRow for PairEntry {
    const FEATURES: usize = 1;
    fn feature(&self, _i: usize) -> f64 {
        self.theta
    }
    fn star_ids(&self) -> &[u32] {
        &self.ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrioEntry {
    /// Ascending catalog ids.
    pub ids: [u32; 3],
    pub area: f64,
    pub moment: f64,
}

impl FeatureRow for TrioEntry {
    const FEATURES: usize = 2;
    fn feature(&self, i: usize) -> f64 {
        if i == 0 {
            self.area
        } else {
            self.moment
        }
    }
    fn star_ids(&self) -> &[u32] {
        &self.ids
    }
}

/// Ordered trio `(central, closest, second closest)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermEntry {
    pub ids: [u32; 3],
    /// θ(closest, central), degrees.
    pub theta1: f64,
    /// θ(second closest, central), degrees.
    pub theta2: f64,
    /// Interior angle at the central star, degrees.
    pub phi: f64,
}

impl FeatureRow for PermEntry {
    const FEATURES: usize = 3;
    fn feature(&self, i: usize) -> f64 {
        match i {
            0 => self.theta1,
            1 => self.theta2,
            _ => self.phi,
        }
    }
    fn star_ids(&self) -> &[u32] {
        &self.ids
    }
}

/// Counts catalog accesses. One range query is one access.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessCounter {
    pub count: u32,
}

impl AccessCounter {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn tick(&mut self) {
        self.count += 1;
    }
}

/// Rows sorted on their first feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable<R> {
    rows: Vec<R>,
}

impl<R> Default for FeatureTable<R> {
    fn default() -> Self {
        Self { rows: Vec::new() }
    }
}

impl<R: FeatureRow + Copy> FeatureTable<R> {
    pub fn from_rows(mut rows: Vec<R>) -> Self {
        rows.sort_by(|a, b| a.feature(0).partial_cmp(&b.feature(0)).unwrap_or(Ordering::Equal).then_with(|| a.star_ids().cmp(b.star_ids())));
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[R] {
        &self.rows
    }

    /// Rows whose every feature lies in its closed interval. Missing
    /// intervals match anything. Always counts as one catalog access.
    pub fn query(&self, predicate: &[Interval], counter: &mut AccessCounter) -> Vec<R> {
        counter.tick();
        let first = predicate.first().copied().unwrap_or_else(Interval::everything);
        if first.lo > first.hi {
            return Vec::new();
        }
        let start = self.rows.partition_point(|r| r.feature(0) < first.lo);
        let end = self.rows.partition_point(|r| r.feature(0) <= first.hi);
        if start >= end {
            return Vec::new();
        }
        self.rows[start..end]
            .iter()
            .filter(|r| predicate.iter().enumerate().skip(1).take(R::FEATURES - 1).all(|(i, iv)| iv.contains(r.feature(i))))
            .copied()
            .collect()
    }

    /// Reference implementation of [`FeatureTable::query`] by full scan.
    pub fn scan(&self, predicate: &[Interval]) -> Vec<R> {
        self.rows
            .iter()
            .filter(|r| predicate.iter().enumerate().take(R::FEATURES).all(|(i, iv)| iv.contains(r.feature(i))))
            .copied()
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Catalog construction

/// Which triangle features a trio table stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Spherical,
    Planar,
}

impl FeatureKind {
    pub fn compute(self, a: &UnitVector3, b: &UnitVector3, c: &UnitVector3, depth: u32) -> TrioFeatures {
        match self {
            FeatureKind::Spherical => spherical_features(a, b, c, depth),
            FeatureKind::Planar => planar_features(a, b, c),
        }
    }
}

/// Which stars lie within `psi_max` of each other.
///
/// Stars are addressed by position in the slice handed to [`NeighborGraph::new`].
pub struct NeighborGraph {
    n: usize,
    /// `forward[i]`: neighbors `j > i`, ascending.
    forward: Vec<Vec<u32>>,
}

impl NeighborGraph {
    pub fn new(stars: &[CatalogStar], psi_max: f64) -> Self {
        let n = stars.len();
        let cos_max = (psi_max * RAD).cos();
        let mut forward = alloc::vec![Vec::new(); n];
        // sweep in declination order; a pair can only be close when the
        // declinations differ by at most psi_max
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| stars[a].delta.partial_cmp(&stars[b].delta).unwrap_or(Ordering::Equal));
        for (x, &i) in order.iter().enumerate() {
            for &j in &order[x + 1..] {
                if stars[j].delta - stars[i].delta > psi_max + 1e-9 {
                    break;
                }
                // cheap reject before the exact angle test
                if stars[i].v.dot(&stars[j].v) < cos_max - 1e-9 {
                    continue;
                }
                if angular_separation(&stars[i].v, &stars[j].v) <= psi_max {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    forward[lo].push(hi as u32);
                }
            }
        }
        for list in &mut forward {
            list.sort_unstable();
        }
        Self { n, forward }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.forward[lo].binary_search(&(hi as u32)).is_ok()
    }

    /// Neighbors of `i` with a larger index.
    pub fn forward(&self, i: usize) -> &[u32] {
        &self.forward[i]
    }

    pub fn pair_count(&self) -> usize {
        self.forward.iter().map(Vec::len).sum()
    }

    /// Calls `f(i, j, k)` with `i < j < k` for every mutually close trio
    /// whose smallest member is `i`.
    pub fn for_each_trio_from(&self, i: usize, mut f: impl FnMut(usize, usize, usize)) {
        let fw = &self.forward[i];
        for (x, &j) in fw.iter().enumerate() {
            for &k in &fw[x + 1..] {
                if self.adjacent(j as usize, k as usize) {
                    f(i, j as usize, k as usize);
                }
            }
        }
    }

    pub fn for_each_trio(&self, mut f: impl FnMut(usize, usize, usize)) {
        for i in 0..self.n {
            self.for_each_trio_from(i, &mut f);
        }
    }

    pub fn trio_count(&self) -> usize {
        let mut c = 0;
        self.for_each_trio(|_, _, _| c += 1);
        c
    }
}

pub fn pair_row(a: &CatalogStar, b: &CatalogStar) -> PairEntry {
    let (a, b) = if a.id < b.id { (a, b) } else { (b, a) };
    PairEntry { ids: [a.id, b.id], theta: angular_separation(&a.v, &b.v) }
}

/// Trio row with members in ascending id order.
pub fn trio_row(a: &CatalogStar, b: &CatalogStar, c: &CatalogStar, kind: FeatureKind, depth: u32) -> TrioEntry {
    let mut m = [a, b, c];
    m.sort_by_key(|s| s.id);
    let f = kind.compute(&m[0].v, &m[1].v, &m[2].v, depth);
    TrioEntry { ids: [m[0].id, m[1].id, m[2].id], area: f.area, moment: f.moment }
}

/// Orders the two outer stars of a permutation row: closer to `central`
/// first, equal separations broken by ascending catalog id.
pub fn order_by_proximity<'a>(
    central: &CatalogStar,
    p: &'a CatalogStar,
    q: &'a CatalogStar,
) -> (&'a CatalogStar, &'a CatalogStar, f64, f64) {
    let tp = angular_separation(&central.v, &p.v);
    let tq = angular_separation(&central.v, &q.v);
    if tp < tq || (tp == tq && p.id < q.id) {
        (p, q, tp, tq)
    } else {
        (q, p, tq, tp)
    }
}

/// The three ordered rows of one trio combination, one per central star.
pub fn permutation_rows(a: &CatalogStar, b: &CatalogStar, c: &CatalogStar) -> [PermEntry; 3] {
    let row = |central: &CatalogStar, p: &CatalogStar, q: &CatalogStar| {
        let (c1, c2, theta1, theta2) = order_by_proximity(central, p, q);
        let phi = interior_angle(&central.v, &c1.v, &c2.v).unwrap_or(0.0);
        PermEntry { ids: [central.id, c1.id, c2.id], theta1, theta2, phi }
    };
    [row(a, b, c), row(b, a, c), row(c, a, b)]
}

pub fn build_pair_catalog(stars: &[CatalogStar], psi_max: f64) -> FeatureTable<PairEntry> {
    let graph = NeighborGraph::new(stars, psi_max);
    build_pair_catalog_from(stars, &graph)
}

pub fn build_pair_catalog_from(stars: &[CatalogStar], graph: &NeighborGraph) -> FeatureTable<PairEntry> {
    let mut rows = Vec::with_capacity(graph.pair_count());
    for i in 0..graph.len() {
        for &j in graph.forward(i) {
            rows.push(pair_row(&stars[i], &stars[j as usize]));
        }
    }
    FeatureTable::from_rows(rows)
}

pub fn build_trio_catalog(stars: &[CatalogStar], psi_max: f64, kind: FeatureKind, depth: u32) -> FeatureTable<TrioEntry> {
    let graph = NeighborGraph::new(stars, psi_max);
    build_trio_catalog_from(stars, &graph, kind, depth)
}

pub fn build_trio_catalog_from(
    stars: &[CatalogStar],
    graph: &NeighborGraph,
    kind: FeatureKind,
    depth: u32,
) -> FeatureTable<TrioEntry> {
    let mut rows = Vec::new();
    graph.for_each_trio(|i, j, k| rows.push(trio_row(&stars[i], &stars[j], &stars[k], kind, depth)));
    FeatureTable::from_rows(rows)
}

pub fn build_trio_permutation_catalog(stars: &[CatalogStar], psi_max: f64) -> FeatureTable<PermEntry> {
    let graph = NeighborGraph::new(stars, psi_max);
    build_trio_permutation_catalog_from(stars, &graph)
}

pub fn build_trio_permutation_catalog_from(stars: &[CatalogStar], graph: &NeighborGraph) -> FeatureTable<PermEntry> {
    let mut rows = Vec::new();
    graph.for_each_trio(|i, j, k| rows.extend(permutation_rows(&stars[i], &stars[j], &stars[k])));
    FeatureTable::from_rows(rows)
}

// ---------------------------------------------------------------------------
// The store

/// Build-time parameters recorded alongside the tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogParams {
    pub psi_max: f64,
    pub magnitude_cutoff: f64,
    pub moment_depth: u32,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self { psi_max: crate::DEFAULT_PSI_MAX, magnitude_cutoff: crate::DEFAULT_MAGNITUDE_CUTOFF, moment_depth: DEFAULT_MOMENT_DEPTH }
    }
}

/// Immutable set of bright stars and their feature catalogs.
#[derive(Debug, Clone)]
pub struct CatalogStore {
    pub params: CatalogParams,
    /// Sorted by catalog id.
    stars: Vec<CatalogStar>,
    /// Star positions sorted by declination, for neighborhood lookups.
    by_declination: Vec<(f64, u32)>,
    pub pairs: FeatureTable<PairEntry>,
    pub trios_spherical: FeatureTable<TrioEntry>,
    pub trios_planar: FeatureTable<TrioEntry>,
    pub permutations: FeatureTable<PermEntry>,
}

impl CatalogStore {
    /// Builds every table from `stars` on the current thread.
    pub fn build(stars: Vec<CatalogStar>, params: CatalogParams) -> Self {
        let mut stars = stars;
        stars.sort_by_key(|s| s.id);
        let graph = NeighborGraph::new(&stars, params.psi_max);
        let pairs = build_pair_catalog_from(&stars, &graph);
        let trios_spherical = build_trio_catalog_from(&stars, &graph, FeatureKind::Spherical, params.moment_depth);
        let trios_planar = build_trio_catalog_from(&stars, &graph, FeatureKind::Planar, params.moment_depth);
        let permutations = build_trio_permutation_catalog_from(&stars, &graph);
        Self::from_parts(stars, params, pairs, trios_spherical, trios_planar, permutations)
    }

    /// Assembles a store from tables that were built or loaded elsewhere.
    pub fn from_parts(
        mut stars: Vec<CatalogStar>,
        params: CatalogParams,
        pairs: FeatureTable<PairEntry>,
        trios_spherical: FeatureTable<TrioEntry>,
        trios_planar: FeatureTable<TrioEntry>,
        permutations: FeatureTable<PermEntry>,
    ) -> Self {
        stars.sort_by_key(|s| s.id);
        let mut by_declination: Vec<(f64, u32)> = stars.iter().map(|s| (s.delta, s.id)).collect();
        by_declination.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
        Self { params, stars, by_declination, pairs, trios_spherical, trios_planar, permutations }
    }

    pub fn stars(&self) -> &[CatalogStar] {
        &self.stars
    }

    pub fn star(&self, id: u32) -> Option<&CatalogStar> {
        self.stars.binary_search_by_key(&id, |s| s.id).ok().map(|i| &self.stars[i])
    }

    pub fn trios(&self, kind: FeatureKind) -> &FeatureTable<TrioEntry> {
        match kind {
            FeatureKind::Spherical => &self.trios_spherical,
            FeatureKind::Planar => &self.trios_planar,
        }
    }

    /// Stars strictly within `radius` degrees of `center`, ascending id.
    /// Counts as one catalog access.
    pub fn nearby_stars(&self, center: &UnitVector3, radius: f64, counter: &mut AccessCounter) -> Vec<CatalogStar> {
        counter.tick();
        self.nearby_stars_uncounted(center, radius)
    }

    /// [`CatalogStore::nearby_stars`] without touching an access counter;
    /// used by image synthesis, which is not part of identification.
    pub fn nearby_stars_uncounted(&self, center: &UnitVector3, radius: f64) -> Vec<CatalogStar> {
        let dec = center.z().clamp(-1.0, 1.0).asin() / RAD;
        let (lo, hi) = (dec - radius, dec + radius);
        let start = self.by_declination.partition_point(|(d, _)| *d < lo);
        let end = self.by_declination.partition_point(|(d, _)| *d <= hi);
        let mut out: Vec<CatalogStar> = self.by_declination[start..end]
            .iter()
            .filter_map(|(_, id)| self.star(*id))
            .filter(|s| angular_separation(&s.v, center) < radius)
            .copied()
            .collect();
        out.sort_by_key(|s| s.id);
        out
    }
}
