//! Parallel catalog construction.
//!
//! Rows are generated per smallest member star on a rayon pool and then
//! sorted, so the result does not depend on the number of workers.

use rayon::prelude::*;
use starid_core::catalog::{
    build_pair_catalog_from, permutation_rows, trio_row, CatalogParams, FeatureKind, FeatureTable, NeighborGraph,
    PermEntry, TrioEntry,
};
use starid_core::{CatalogStar, CatalogStore};

pub fn trio_table(stars: &[CatalogStar], graph: &NeighborGraph, kind: FeatureKind, depth: u32) -> FeatureTable<TrioEntry> {
    let rows: Vec<TrioEntry> = (0..graph.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            graph.for_each_trio_from(i, |i, j, k| out.push(trio_row(&stars[i], &stars[j], &stars[k], kind, depth)));
            out
        })
        .collect();
    FeatureTable::from_rows(rows)
}

pub fn permutation_table(stars: &[CatalogStar], graph: &NeighborGraph) -> FeatureTable<PermEntry> {
    let rows: Vec<PermEntry> = (0..graph.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            graph.for_each_trio_from(i, |i, j, k| out.extend(permutation_rows(&stars[i], &stars[j], &stars[k])));
            out
        })
        .collect();
    FeatureTable::from_rows(rows)
}

/// Row counts of the three catalogs without building them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableCounts {
    pub stars: usize,
    pub pairs: usize,
    pub trios: usize,
    pub permutations: usize,
}

pub fn count_tables(stars: &[CatalogStar], psi_max: f64) -> TableCounts {
    let graph = NeighborGraph::new(stars, psi_max);
    let trios: usize = (0..graph.len())
        .into_par_iter()
        .map(|i| {
            let mut c = 0usize;
            graph.for_each_trio_from(i, |_, _, _| c += 1);
            c
        })
        .sum();
    TableCounts { stars: stars.len(), pairs: graph.pair_count(), trios, permutations: 3 * trios }
}

/// Builds every table using the current rayon pool.
pub fn build_store(mut stars: Vec<CatalogStar>, params: CatalogParams) -> CatalogStore {
    stars.sort_by_key(|s| s.id);
    let graph = NeighborGraph::new(&stars, params.psi_max);
    log::info!("{} stars, {} pairs", stars.len(), graph.pair_count());
    let pairs = build_pair_catalog_from(&stars, &graph);
    let trios_spherical = trio_table(&stars, &graph, FeatureKind::Spherical, params.moment_depth);
    log::info!("{} trios", trios_spherical.len());
    let trios_planar = trio_table(&stars, &graph, FeatureKind::Planar, params.moment_depth);
    let permutations = permutation_table(&stars, &graph);
    CatalogStore::from_parts(stars, params, pairs, trios_spherical, trios_planar, permutations)
}

/// Runs `f` on a pool of `jobs` workers (`0` means one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
