//! Image subset iteration orders (0-based indices).

use alloc::vec::Vec;

/// `C(n, 2)` with the first star fixed while the second advances.
pub fn sequential_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// `C(n, 3)` in lexicographic order.
pub fn sequential_trios(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// `C(n, 3)` ordered by the gaps `dj`, `dk` so that every member changes
/// quickly and a false star cannot persist through many consecutive trios.
pub fn pyramid_trios(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for dj in 1..=(n - 2) {
        for dk in 1..=(n - 1 - dj) {
            for i in 0..(n - dj - dk) {
                let j = i + dj;
                out.push((i, j, j + dk));
            }
        }
    }
    out
}
