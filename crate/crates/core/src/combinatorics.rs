//! Small counting helpers shared by the state builders.

use itertools::Itertools;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact binomial coefficient; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Sign of a permutation given in one-line notation.
pub fn permutation_sign(perm: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let s = permutation_sign(&p);
            (p, s)
        })
        .collect()
}

/// `k`-subsets of `0..n` in colexicographic order.
pub fn colex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    subsets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    subsets
}

pub fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !subset.contains(i)).collect()
}
