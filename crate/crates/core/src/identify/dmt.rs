//! Direct match test: choose between the `d!` ways of pairing `b` with `r`
//! by counting how many catalog stars the implied attitude overlays.

use alloc::vec::Vec;

use crate::catalog::{AccessCounter, CatalogStar, CatalogStore};
use crate::geometry::{find_positive_overlay, triad, UnitVector3};

use super::{Bijection, MethodConfig};

/// Orderings of `0..d` in lexicographic order, so for `d = 3` the list runs
/// (0,1,2), (0,2,1), (1,0,2), (1,2,0), (2,0,1), (2,1,0).
pub fn pairings(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, d: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for x in 0..d {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(prefix, d, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(d), d, &mut out);
    out
}

/// Overlay counts per pairing, `None` where TRIAD is degenerate.
pub(crate) fn overlay_scores(
    b: &[usize],
    r: &[CatalogStar],
    image: &[UnitVector3],
    nearby: &[CatalogStar],
    sigma_o: f64,
) -> Vec<Option<usize>> {
    pairings(b.len())
        .iter()
        .map(|p| {
            let a = triad(&image[b[0]], &image[b[1]], &r[p[0]].v, &r[p[1]].v).ok()?;
            Some(find_positive_overlay(nearby, image, &a, sigma_o).len())
        })
        .collect()
}

/// Returns the pairing of `b` with `r` whose attitude overlays the most
/// catalog stars near `r`. Ties go to the earlier pairing. When every pairing
/// overlays exactly `|b|` stars the result is the empty bijection.
///
/// The neighborhood lookup counts as one catalog access.
pub fn dmt(
    b: &[usize],
    r: &[u32],
    image: &[UnitVector3],
    store: &CatalogStore,
    cfg: &MethodConfig,
    counter: &mut AccessCounter,
) -> Bijection {
    debug_assert_eq!(b.len(), r.len());
    let stars: Option<Vec<CatalogStar>> = r.iter().map(|id| store.star(*id).copied()).collect();
    let Some(stars) = stars else {
        return Bijection::empty();
    };
    let vectors: Vec<UnitVector3> = stars.iter().map(|s| s.v).collect();
    let Some(center) = UnitVector3::centroid(&vectors) else {
        return Bijection::empty();
    };
    let nearby = store.nearby_stars(&center, cfg.psi / 2.0, counter);
    let scores = overlay_scores(b, &stars, image, &nearby, cfg.sigma_o);

    let valid: Vec<(usize, usize)> = scores.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s))).collect();
    if valid.is_empty() || valid.iter().all(|(_, s)| *s == b.len()) {
        return Bijection::empty();
    }
    let mut best = valid[0];
    for &(i, s) in &valid[1..] {
        if s > best.1 {
            best = (i, s);
        }
    }
    let p = &pairings(b.len())[best.0];
    let mapped: Vec<u32> = p.iter().map(|&x| r[x]).collect();
    Bijection::from_pairs(b, &mapped)
}
