//! The six lost-in-space identification methods.
//!
//! Every method follows the same loop: pick an image subset `b`, query a
//! feature catalog for candidates `R`, select a single candidate `r` (the
//! `|R| = 1` criterion, after pivoting for the triangle methods), then build
//! a bijection `h: b -> r`. The first confident `h` is returned.
//!
//! Image stars are referred to by their position in the image slice.

mod angle;
mod composite;
mod dmt;
mod interior;
mod order;
mod pyramid;
mod triangle;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::catalog::{AccessCounter, CatalogStore, FeatureTable, FeatureRow, Interval};
use crate::geometry::UnitVector3;

pub use dmt::{dmt, pairings};
pub use order::{pyramid_trios, sequential_pairs, sequential_trios};
pub use pyramid::fc;
pub use triangle::partial_match;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Angle,
    InteriorAngle,
    SphericalTriangle,
    PlanarTriangle,
    Pyramid,
    CompositePyramid,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Angle,
        Method::InteriorAngle,
        Method::SphericalTriangle,
        Method::PlanarTriangle,
        Method::Pyramid,
        Method::CompositePyramid,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Angle => "ANG",
            Method::InteriorAngle => "INT",
            Method::SphericalTriangle => "SPH",
            Method::PlanarTriangle => "PLN",
            Method::Pyramid => "PYR",
            Method::CompositePyramid => "COM",
        }
    }

    /// Size of the image subset `b`.
    pub fn arity(self) -> usize {
        match self {
            Method::Angle => 2,
            _ => 3,
        }
    }

    /// Whether `h` is built by the direct match test.
    pub fn uses_dmt(self) -> bool {
        !matches!(self, Method::InteriorAngle | Method::Pyramid)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.tag().eq_ignore_ascii_case(s))
            .ok_or(crate::Error::InvalidConfig("unknown method tag"))
    }
}

/// Query deviations and loop limits for one method.
///
/// Angles are in degrees, areas in steradians (spherical) or squared chord
/// units (planar).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub sigma_theta: f64,
    pub sigma_phi: f64,
    pub sigma_a: f64,
    pub sigma_tau: f64,
    /// Overlay tolerance of the direct match test.
    pub sigma_o: f64,
    pub access_limit: u32,
    /// Field of view, degrees.
    pub psi: f64,
    /// β verification stage of the two pyramid methods.
    pub verification: bool,
    pub moment_depth: u32,
}

pub const DEFAULT_ACCESS_LIMIT: u32 = 500;

impl MethodConfig {
    /// Tuned deviations: 1e-4° for the pair angle methods, 1e-2 for the
    /// interior angle method and 1e-9 for triangle features.
    pub fn for_method(method: Method) -> Self {
        let base = MethodConfig {
            sigma_theta: 1e-4,
            sigma_phi: 1e-2,
            sigma_a: 1e-9,
            sigma_tau: 1e-9,
            sigma_o: 1e-4,
            access_limit: DEFAULT_ACCESS_LIMIT,
            psi: crate::DEFAULT_PSI_MAX,
            verification: true,
            moment_depth: crate::features::DEFAULT_MOMENT_DEPTH,
        };
        match method {
            Method::InteriorAngle => MethodConfig { sigma_theta: 1e-2, sigma_phi: 1e-2, ..base },
            _ => base,
        }
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        let sigmas = [self.sigma_theta, self.sigma_phi, self.sigma_a, self.sigma_tau, self.sigma_o];
        if sigmas.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(crate::Error::InvalidConfig("every sigma must be positive and finite"));
        }
        if self.access_limit < 1 {
            return Err(crate::Error::InvalidConfig("access limit must be at least 1"));
        }
        if !(self.psi > 0.0 && self.psi <= 180.0) {
            return Err(crate::Error::InvalidConfig("field of view must be in (0, 180]"));
        }
        Ok(())
    }
}

/// Map from image star index to catalog id. Empty means "no confident match".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bijection {
    pub pairs: Vec<(usize, u32)>,
}

impl Bijection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(b: &[usize], r: &[u32]) -> Self {
        Self { pairs: b.iter().copied().zip(r.iter().copied()).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, image_index: usize) -> Option<u32> {
        self.pairs.iter().find(|(i, _)| *i == image_index).map(|(_, id)| *id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Identified,
    Exhausted,
    AccessLimit,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::Identified => "identified",
            Outcome::Exhausted => "exhausted",
            Outcome::AccessLimit => "access_limit",
        }
    }
}

impl FromStr for Outcome {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identified" => Ok(Outcome::Identified),
            "exhausted" => Ok(Outcome::Exhausted),
            "access_limit" => Ok(Outcome::AccessLimit),
            _ => Err(crate::Error::InvalidConfig("unknown outcome tag")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub method: Method,
    /// The last image subset examined.
    pub b: Vec<usize>,
    /// The selected catalog tuple, empty unless identified.
    pub r: Vec<u32>,
    pub h: Bijection,
    pub outcome: Outcome,
    /// Accesses made by query, pivot and verification steps.
    pub accesses_query: u32,
    /// All accesses, including the direct match test's neighborhood lookups.
    pub accesses_total: u32,
    /// Whether the very first query met `|R| = 1` before any pivot.
    pub first_query_unique: Option<bool>,
    /// Query accesses spent when a single candidate tuple was first
    /// obtained (after pivoting, before verification).
    pub accesses_to_r: Option<u32>,
}

/// Mutable state of one identification run.
pub(crate) struct Run<'a> {
    pub store: &'a CatalogStore,
    pub cfg: &'a MethodConfig,
    pub image: &'a [UnitVector3],
    pub query: AccessCounter,
    pub dmt: AccessCounter,
    pub first_query_unique: Option<bool>,
    pub r_obtained_at: Option<u32>,
    pub last_b: Vec<usize>,
}

impl<'a> Run<'a> {
    pub(crate) fn new(store: &'a CatalogStore, cfg: &'a MethodConfig, image: &'a [UnitVector3]) -> Self {
        Self {
            store,
            cfg,
            image,
            query: AccessCounter::new(),
            dmt: AccessCounter::new(),
            first_query_unique: None,
            r_obtained_at: None,
            last_b: Vec::new(),
        }
    }

    pub fn total(&self) -> u32 {
        self.query.count + self.dmt.count
    }

    /// True once no further image subset may be started.
    pub fn limit_reached(&self) -> bool {
        self.total() >= self.cfg.access_limit
    }

    pub fn search<R: FeatureRow + Copy>(&mut self, table: &FeatureTable<R>, predicate: &[Interval]) -> Vec<R> {
        table.query(predicate, &mut self.query)
    }

    pub fn note_first_query(&mut self, candidates: usize) {
        if self.first_query_unique.is_none() {
            self.first_query_unique = Some(candidates == 1);
        }
    }

    /// Records the access count the first time a unique `r` is in hand.
    pub fn note_r_obtained(&mut self) {
        if self.r_obtained_at.is_none() {
            self.r_obtained_at = Some(self.query.count);
        }
    }

    pub fn dmt(&mut self, b: &[usize], r: &[u32]) -> Bijection {
        dmt::dmt(b, r, self.image, self.store, self.cfg, &mut self.dmt)
    }

    fn finish(self, method: Method, outcome: Outcome, r: Vec<u32>, h: Bijection) -> IdentificationResult {
        IdentificationResult {
            method,
            b: self.last_b.clone(),
            r,
            h,
            outcome,
            accesses_query: self.query.count,
            accesses_total: self.total(),
            first_query_unique: self.first_query_unique,
            accesses_to_r: self.r_obtained_at,
        }
    }

    pub fn identified(self, method: Method, b: Vec<usize>, r: Vec<u32>, h: Bijection) -> IdentificationResult {
        let mut run = self;
        run.last_b = b;
        run.finish(method, Outcome::Identified, r, h)
    }

    pub fn failed(self, method: Method, outcome: Outcome) -> IdentificationResult {
        self.finish(method, outcome, Vec::new(), Bijection::empty())
    }
}

/// Runs `method` on `image` against `store`.
pub fn identify(method: Method, image: &[UnitVector3], store: &CatalogStore, cfg: &MethodConfig) -> IdentificationResult {
    let run = Run::new(store, cfg, image);
    match method {
        Method::Angle => angle::identify(run),
        Method::InteriorAngle => interior::identify(run),
        Method::SphericalTriangle => triangle::identify(run, crate::catalog::FeatureKind::Spherical),
        Method::PlanarTriangle => triangle::identify(run, crate::catalog::FeatureKind::Planar),
        Method::Pyramid => pyramid::identify(run),
        Method::CompositePyramid => composite::identify(run),
    }
}

/// The candidate set of the first image subset a method would examine.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryStep {
    pub b: Vec<usize>,
    /// Candidate catalog tuples. Positional for INT and PYR, unordered otherwise.
    pub candidates: Vec<Vec<u32>>,
    pub accesses: u32,
}

/// Performs only the catalog query step for the method's first subset.
/// Returns `None` when the image is too small.
pub fn first_query(method: Method, image: &[UnitVector3], store: &CatalogStore, cfg: &MethodConfig) -> Option<QueryStep> {
    let mut run = Run::new(store, cfg, image);
    let (b, candidates) = match method {
        Method::Angle => {
            let b = sequential_pairs(image.len()).into_iter().next()?;
            (alloc::vec![b.0, b.1], angle::query(&mut run, b.0, b.1))
        }
        Method::InteriorAngle => {
            let b = interior::subset(image, 0)?;
            (b.to_vec(), interior::query(&mut run, b))
        }
        Method::SphericalTriangle | Method::PlanarTriangle => {
            let (i, j, k) = sequential_trios(image.len()).into_iter().next()?;
            let kind = if method == Method::SphericalTriangle {
                crate::catalog::FeatureKind::Spherical
            } else {
                crate::catalog::FeatureKind::Planar
            };
            let r = triangle::query(&mut run, kind, [i, j, k]);
            (alloc::vec![i, j, k], r.iter().map(|t| t.ids.to_vec()).collect())
        }
        Method::CompositePyramid => {
            let (i, j, k) = pyramid_trios(image.len()).into_iter().next()?;
            let r = triangle::query(&mut run, composite::FEATURES, [i, j, k]);
            (alloc::vec![i, j, k], r.iter().map(|t| t.ids.to_vec()).collect())
        }
        Method::Pyramid => {
            let (i, j, k) = pyramid_trios(image.len()).into_iter().next()?;
            let q = pyramid::query(&mut run, [i, j, k]);
            (alloc::vec![i, j, k], q.candidates().into_iter().map(|t| t.to_vec()).collect())
        }
    };
    Some(QueryStep { b, candidates, accesses: run.query.count })
}
