//! Pyramid method: three pair queries per trio vote for each star's
//! identity, followed by a fourth reference star β as a check.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::catalog::{Interval, PairEntry};
use crate::geometry::angular_separation;

use super::{pyramid_trios, Bijection, IdentificationResult, Method, Outcome, Run};

/// Flattens two sets of tuples into star sets and intersects them.
/// The result is ascending.
pub fn fc<'a, A, B>(t1: A, t2: B) -> Vec<u32>
where
    A: IntoIterator<Item = &'a [u32]>,
    B: IntoIterator<Item = &'a [u32]>,
{
    let flat1: BTreeSet<u32> = t1.into_iter().flatten().copied().collect();
    let flat2: BTreeSet<u32> = t2.into_iter().flatten().copied().collect();
    flat1.intersection(&flat2).copied().collect()
}

fn ids(t: &[PairEntry]) -> impl Iterator<Item = &[u32]> {
    t.iter().map(|p| &p.ids[..])
}

/// Pair queries for each `(a, b)` in `pairs`, one access each.
pub(crate) fn find_t<const N: usize>(run: &mut Run<'_>, pairs: [(usize, usize); N]) -> [Vec<PairEntry>; N] {
    let store = run.store;
    pairs.map(|(a, b)| {
        let theta = angular_separation(&run.image[a], &run.image[b]);
        run.search(&store.pairs, &[Interval::around(theta, run.cfg.sigma_theta)])
    })
}

/// Per-star candidate sets of one trio.
pub(crate) struct TrioVotes {
    pub ti: Vec<u32>,
    pub tj: Vec<u32>,
    pub tk: Vec<u32>,
}

impl TrioVotes {
    /// Every `(t_i, t_j, t_k)` from the candidate sets.
    pub fn candidates(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for &a in &self.ti {
            for &b in &self.tj {
                for &c in &self.tk {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    /// The single candidate when every star has exactly one distinct vote.
    pub fn unique(&self) -> Option<[u32; 3]> {
        match (&self.ti[..], &self.tj[..], &self.tk[..]) {
            ([a], [b], [c]) if a != b && b != c && a != c => Some([*a, *b, *c]),
            _ => None,
        }
    }

    pub fn count(&self) -> usize {
        self.ti.len() * self.tj.len() * self.tk.len()
    }
}

pub(crate) fn query(run: &mut Run<'_>, b: [usize; 3]) -> TrioVotes {
    let [i, j, k] = b;
    let [tij, tik, tjk] = find_t(run, [(i, j), (i, k), (j, k)]);
    TrioVotes { ti: fc(ids(&tij), ids(&tik)), tj: fc(ids(&tij), ids(&tjk)), tk: fc(ids(&tik), ids(&tjk)) }
}

/// Reference star for verification: the first star after `b_k` (wrapping
/// around the image) that is not part of `b`.
pub(crate) fn reference_star(n: usize, b: [usize; 3]) -> Option<usize> {
    (1..n).map(|s| (b[2] + s) % n).find(|x| !b.contains(x))
}

pub(crate) fn identify(mut run: Run<'_>) -> IdentificationResult {
    let n = run.image.len();
    let verify = run.cfg.verification;
    if verify && n < 4 {
        return run.failed(Method::Pyramid, Outcome::Exhausted);
    }
    for (i, j, k) in pyramid_trios(n) {
        if run.limit_reached() {
            return run.failed(Method::Pyramid, Outcome::AccessLimit);
        }
        let b = [i, j, k];
        run.last_b = b.to_vec();
        let votes = query(&mut run, b);
        run.note_first_query(votes.count());
        let Some(r) = votes.unique() else {
            continue;
        };
        run.note_r_obtained();
        if verify {
            let Some(beta) = reference_star(n, b) else {
                continue;
            };
            let [tib, tjb, tkb] = find_t(&mut run, [(i, beta), (j, beta), (k, beta)]);
            let left = fc(ids(&tib), ids(&tjb));
            let right = fc(ids(&tjb), ids(&tkb));
            let t_beta: Vec<u32> = left.iter().filter(|x| right.contains(x)).copied().collect();
            if t_beta.len() != 1 {
                continue;
            }
        }
        let h = Bijection::from_pairs(&b, &r);
        return run.identified(Method::Pyramid, b.to_vec(), r.to_vec(), h);
    }
    run.failed(Method::Pyramid, Outcome::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fc_worked_example() {
        let tij: Vec<[u32; 2]> = vec![[1123, 9001], [8234, 33]];
        let tjk: Vec<[u32; 2]> = vec![[612, 1123], [33, 345]];
        let got = fc(tij.iter().map(|t| &t[..]), tjk.iter().map(|t| &t[..]));
        assert_eq!(got, vec![33, 1123]);
    }

    #[test]
    fn fc_disjoint_is_empty() {
        let a: Vec<[u32; 2]> = vec![[1, 2]];
        let b: Vec<[u32; 2]> = vec![[3, 4]];
        assert!(fc(a.iter().map(|t| &t[..]), b.iter().map(|t| &t[..])).is_empty());
    }

    #[test]
    fn reference_star_wraps() {
        assert_eq!(reference_star(5, [0, 1, 2]), Some(3));
        assert_eq!(reference_star(5, [2, 3, 4]), Some(0));
        assert_eq!(reference_star(5, [0, 2, 4]), Some(1));
        assert_eq!(reference_star(3, [0, 1, 2]), None);
    }

    #[test]
    fn unique_needs_distinct_singletons() {
        let v = TrioVotes { ti: vec![1], tj: vec![2], tk: vec![3] };
        assert_eq!(v.unique(), Some([1, 2, 3]));
        let v = TrioVotes { ti: vec![1], tj: vec![1], tk: vec![3] };
        assert_eq!(v.unique(), None);
        let v = TrioVotes { ti: vec![1, 4], tj: vec![2], tk: vec![3] };
        assert_eq!(v.count(), 2);
        assert_eq!(v.unique(), None);
    }
}
