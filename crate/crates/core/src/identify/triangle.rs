//! Spherical and planar triangle methods, with candidate pivoting.

use alloc::vec::Vec;

use crate::catalog::{FeatureKind, Interval, TrioEntry};

use super::{sequential_trios, IdentificationResult, Method, Outcome, Run};

pub(crate) fn query(run: &mut Run<'_>, kind: FeatureKind, b: [usize; 3]) -> Vec<TrioEntry> {
    let img = run.image;
    let f = kind.compute(&img[b[0]], &img[b[1]], &img[b[2]], run.cfg.moment_depth);
    let pred = [Interval::around(f.area, run.cfg.sigma_a), Interval::around(f.moment, run.cfg.sigma_tau)];
    let store = run.store;
    run.search(store.trios(kind), &pred)
}

fn shared(a: &[u32; 3], b: &[u32; 3]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

/// Tuples of `r_bar` sharing at least two stars with some tuple of `r`.
pub fn partial_match(r: &[TrioEntry], r_bar: &[TrioEntry]) -> Vec<TrioEntry> {
    r_bar.iter().filter(|rb| r.iter().any(|x| shared(&x.ids, &rb.ids) >= 2)).copied().collect()
}

/// Narrows `r` by re-querying with `(b_i, b_j, β)` for successive unused
/// stars β, keeping partial matches, until at most one candidate is left or
/// the pool runs dry. Returns the surviving candidates together with the
/// subset they were queried with.
pub(crate) fn pivot(
    run: &mut Run<'_>,
    kind: FeatureKind,
    b: [usize; 3],
    r: Vec<TrioEntry>,
) -> (Vec<TrioEntry>, [usize; 3]) {
    if r.len() == 1 {
        return (r, b);
    }
    let pool: Vec<usize> = (0..run.image.len()).filter(|x| !b.contains(x)).collect();
    let mut current = r;
    for beta in pool {
        let b_bar = [b[0], b[1], beta];
        let r_bar = query(run, kind, b_bar);
        current = partial_match(&current, &r_bar);
        if current.len() <= 1 {
            return (current, b_bar);
        }
    }
    (Vec::new(), b)
}

pub(crate) fn identify(mut run: Run<'_>, kind: FeatureKind) -> IdentificationResult {
    let method = match kind {
        FeatureKind::Spherical => Method::SphericalTriangle,
        FeatureKind::Planar => Method::PlanarTriangle,
    };
    for (i, j, k) in sequential_trios(run.image.len()) {
        if run.limit_reached() {
            return run.failed(method, Outcome::AccessLimit);
        }
        let b = [i, j, k];
        run.last_b = b.to_vec();
        let mut r = query(&mut run, kind, b);
        run.note_first_query(r.len());
        let mut b_used = b;
        if r.len() != 1 {
            (r, b_used) = pivot(&mut run, kind, b, r);
        }
        if let Some(first) = r.first() {
            run.note_r_obtained();
            run.last_b = b_used.to_vec();
            let h = run.dmt(&b_used, &first.ids);
            if !h.is_empty() {
                let mapped = h.pairs.iter().map(|p| p.1).collect();
                return run.identified(method, b_used.to_vec(), mapped, h);
            }
        }
    }
    run.failed(method, Outcome::Exhausted)
}
