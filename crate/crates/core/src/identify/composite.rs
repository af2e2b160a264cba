//! Composite pyramid method: pyramid subset order and β verification on top
//! of planar triangle features, with the direct match test building `h`.

use alloc::vec::Vec;

use crate::catalog::FeatureKind;

use super::pyramid::{fc, reference_star};
use super::triangle::query;
use super::{pyramid_trios, IdentificationResult, Method, Outcome, Run};

pub(crate) const FEATURES: FeatureKind = FeatureKind::Planar;

pub(crate) fn identify(mut run: Run<'_>) -> IdentificationResult {
    let n = run.image.len();
    let verify = run.cfg.verification;
    if verify && n < 4 {
        return run.failed(Method::CompositePyramid, Outcome::Exhausted);
    }
    for (i, j, k) in pyramid_trios(n) {
        if run.limit_reached() {
            return run.failed(Method::CompositePyramid, Outcome::AccessLimit);
        }
        let b = [i, j, k];
        run.last_b = b.to_vec();
        let r = query(&mut run, FEATURES, b);
        run.note_first_query(r.len());
        if r.len() != 1 {
            continue;
        }
        run.note_r_obtained();
        if verify {
            let Some(beta) = reference_star(n, b) else {
                continue;
            };
            let t12 = query(&mut run, FEATURES, [i, j, beta]);
            let t13 = query(&mut run, FEATURES, [i, k, beta]);
            let t23 = query(&mut run, FEATURES, [j, k, beta]);
            let ids = |t: &[crate::catalog::TrioEntry]| t.iter().map(|x| x.ids).collect::<Vec<_>>();
            let (t12, t13, t23) = (ids(&t12), ids(&t13), ids(&t23));
            let left = fc(t12.iter().map(|t| &t[..]), t13.iter().map(|t| &t[..]));
            let right = fc(t13.iter().map(|t| &t[..]), t23.iter().map(|t| &t[..]));
            let t_beta = left.iter().filter(|x| right.contains(x)).count();
            if t_beta != 1 {
                continue;
            }
        }
        let h = run.dmt(&b, &r[0].ids);
        if !h.is_empty() {
            let mapped = h.pairs.iter().map(|p| p.1).collect();
            return run.identified(Method::CompositePyramid, b.to_vec(), mapped, h);
        }
    }
    run.failed(Method::CompositePyramid, Outcome::Exhausted)
}
