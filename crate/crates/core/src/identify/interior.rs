//! Interior angle method: a central star, its two closest neighbors, and the
//! ordered trio catalog. The stored ordering makes the bijection positional.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::catalog::Interval;
use crate::geometry::{angular_separation, interior_angle, UnitVector3};

use super::{Bijection, IdentificationResult, Method, Outcome, Run};

/// `(c, c1, c2)` with `c1`, `c2` the closest and second closest stars to
/// `c`. Equal separations go to the lower index.
pub(crate) fn subset(image: &[UnitVector3], c: usize) -> Option<[usize; 3]> {
    if image.len() < 3 || c >= image.len() {
        return None;
    }
    let mut others: Vec<(f64, usize)> =
        (0..image.len()).filter(|&i| i != c).map(|i| (angular_separation(&image[c], &image[i]), i)).collect();
    others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    Some([c, others[0].1, others[1].1])
}

pub(crate) fn query(run: &mut Run<'_>, b: [usize; 3]) -> Vec<Vec<u32>> {
    let img = run.image;
    let theta1 = angular_separation(&img[b[0]], &img[b[1]]);
    let theta2 = angular_separation(&img[b[0]], &img[b[2]]);
    // coincident stars have no interior angle; an impossible interval keeps the access
    let phi = interior_angle(&img[b[0]], &img[b[1]], &img[b[2]]).unwrap_or(f64::NAN);
    let cfg = run.cfg;
    let phi_iv = if phi.is_nan() { Interval::new(1.0, 0.0) } else { Interval::around(phi, cfg.sigma_phi) };
    let pred = [Interval::around(theta1, cfg.sigma_theta), Interval::around(theta2, cfg.sigma_theta), phi_iv];
    let store = run.store;
    run.search(&store.permutations, &pred).into_iter().map(|p| p.ids.to_vec()).collect()
}

pub(crate) fn identify(mut run: Run<'_>) -> IdentificationResult {
    for c in 0..run.image.len() {
        if run.limit_reached() {
            return run.failed(Method::InteriorAngle, Outcome::AccessLimit);
        }
        let Some(b) = subset(run.image, c) else {
            break;
        };
        run.last_b = b.to_vec();
        let candidates = query(&mut run, b);
        run.note_first_query(candidates.len());
        if candidates.len() == 1 {
            run.note_r_obtained();
            let r = candidates.into_iter().next().unwrap_or_default();
            let h = Bijection::from_pairs(&b, &r);
            return run.identified(Method::InteriorAngle, b.to_vec(), r, h);
        }
    }
    run.failed(Method::InteriorAngle, Outcome::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_tie_goes_to_lower_index() {
        let img = [
            UnitVector3::new(1.0, 0.0, 0.0).unwrap(),
            UnitVector3::new(1.0, 0.1, 0.0).unwrap(),
            UnitVector3::new(1.0, -0.1, 0.0).unwrap(),
            UnitVector3::new(1.0, 0.0, 0.1).unwrap(),
        ];
        assert_eq!(subset(&img, 0), Some([0, 1, 2]));
        assert_eq!(subset(&img[..2], 0), None);
    }
}
