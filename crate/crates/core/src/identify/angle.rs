//! Angle method: pairs of stars keyed on their interstar angle.

use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::Interval;
use crate::geometry::angular_separation;

use super::{sequential_pairs, IdentificationResult, Method, Outcome, Run};

pub(crate) fn query(run: &mut Run<'_>, i: usize, j: usize) -> Vec<Vec<u32>> {
    let theta = angular_separation(&run.image[i], &run.image[j]);
    let pred = [Interval::around(theta, run.cfg.sigma_theta)];
    let store = run.store;
    run.search(&store.pairs, &pred).into_iter().map(|p| p.ids.to_vec()).collect()
}

pub(crate) fn identify(mut run: Run<'_>) -> IdentificationResult {
    for (i, j) in sequential_pairs(run.image.len()) {
        if run.limit_reached() {
            return run.failed(Method::Angle, Outcome::AccessLimit);
        }
        run.last_b = vec![i, j];
        let candidates = query(&mut run, i, j);
        run.note_first_query(candidates.len());
        if candidates.len() == 1 {
            run.note_r_obtained();
            let r = candidates.into_iter().next().unwrap_or_default();
            let h = run.dmt(&[i, j], &r);
            if !h.is_empty() {
                let mapped = h.pairs.iter().map(|p| p.1).collect();
                return run.identified(Method::Angle, vec![i, j], mapped, h);
            }
        }
    }
    run.failed(Method::Angle, Outcome::Exhausted)
}
