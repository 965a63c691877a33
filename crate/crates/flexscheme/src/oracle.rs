//! Independent brute-force enumeration of avoidance classes: the ground
//! truth every scheme is checked against.
//!
//! Two implementations are kept permanently. The tree oracle extends
//! avoiders length by length; the naive oracle filters all n! permutations.
//! They validate each other, so a bug in one cannot silently confirm a bug
//! in a scheme.

use crate::count::{count_from_usize, Count, EnumSequence};
use crate::error::{Error, Result};
use crate::perm::{occurs, Basis, Permutation};

/// Default bound on n for the tree oracle.
pub const DEFAULT_ORACLE_CAP: usize = 10;

/// Default bound on n for the naive all-permutations oracle, which walks n!
/// candidates per term.
pub const DEFAULT_NAIVE_CAP: usize = 8;

/// All permutations of length `n` avoiding every pattern of `basis`, in
/// lexicographic order.
///
/// Avoiders of length n are exactly the avoiders of length n-1 with the new
/// maximum inserted somewhere (avoidance survives deleting the maximum), so
/// each step only filters one-element extensions, and only for occurrences
/// that use the inserted value.
pub fn avoiders(basis: &Basis, n: usize) -> Vec<Permutation> {
    let mut current = vec![Permutation::empty()];
    for len in 1..=n {
        current = extend_avoiders(&current, len, basis);
    }
    current.sort();
    current
}

// One tree-extension step: all avoiders of length `len` from those of length
// `len - 1`.
fn extend_avoiders(current: &[Permutation], len: usize, basis: &Basis) -> Vec<Permutation> {
    let mut next = Vec::new();
    for perm in current {
        for pos in 0..len {
            let mut values = perm.values().to_vec();
            values.insert(pos, len);
            if !contains_using_max(&values, pos, basis) {
                next.push(Permutation::new(values).expect("insertion keeps a permutation"));
            }
        }
    }
    next
}

// The inserted value is the strict maximum, so any new occurrence must use it
// in the pattern's maximum role.
fn contains_using_max(values: &[usize], pos: usize, basis: &Basis) -> bool {
    basis.patterns().iter().any(|p| {
        let max_role = p
            .values()
            .iter()
            .position(|&v| v == p.len())
            .expect("pattern contains its maximum");
        occurs(values, p.values(), Some((pos, max_role)))
    })
}

/// Enumerates the avoidance class of `basis` by tree extension up to
/// `n_max`, within the default cap.
pub fn brute_sequence<C: Count>(basis: &Basis, n_max: usize) -> Result<EnumSequence<C>> {
    brute_sequence_capped(basis, n_max, DEFAULT_ORACLE_CAP)
}

pub fn brute_sequence_capped<C: Count>(
    basis: &Basis,
    n_max: usize,
    cap: usize,
) -> Result<EnumSequence<C>> {
    if n_max > cap {
        return Err(Error::ResourceLimit(format!(
            "oracle term {n_max} exceeds cap {cap}"
        )));
    }
    let mut terms: Vec<C> = Vec::with_capacity(n_max + 1);
    let mut current = vec![Permutation::empty()];
    terms.push(count_from_usize(current.len()));
    for len in 1..=n_max {
        current = extend_avoiders(&current, len, basis);
        terms.push(count_from_usize(current.len()));
    }
    Ok(EnumSequence::new(basis.clone(), terms))
}

/// Enumerates by generating all n! permutations and filtering; the slow,
/// obviously-correct cross-check for the tree oracle.
pub fn naive_sequence<C: Count>(basis: &Basis, n_max: usize) -> Result<EnumSequence<C>> {
    naive_sequence_capped(basis, n_max, DEFAULT_NAIVE_CAP)
}

pub fn naive_sequence_capped<C: Count>(
    basis: &Basis,
    n_max: usize,
    cap: usize,
) -> Result<EnumSequence<C>> {
    if n_max > cap {
        return Err(Error::ResourceLimit(format!(
            "naive oracle term {n_max} exceeds cap {cap}"
        )));
    }
    let mut terms: Vec<C> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let count = crate::perm::all_permutations(n)
            .into_iter()
            .filter(|perm| perm.avoids_all(basis))
            .count();
        terms.push(count_from_usize(count));
    }
    Ok(EnumSequence::new(basis.clone(), terms))
}
