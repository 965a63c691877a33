//! Bounded brute-force materialization and counting of the permutation sets
//! indexed by a (downfix, gap vector) pair: all permutations realizing the
//! pair, and the subset avoiding a basis. This is the measurement primitive
//! behind rule discovery and verification.

use std::collections::BTreeSet;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::gaps::GapVector;
use crate::perm::{occurs, Basis, Permutation};

/// Default bound on the gap-vector norm for brute-force enumeration; a guard
/// against runaway (norm)! blowups, overridable where counters are built.
pub const DEFAULT_NORM_CAP: usize = 10;

/// Memo key for counts indexed by downfix and gap vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CountKey {
    pub downfix: Permutation,
    pub gaps: GapVector,
}

impl CountKey {
    pub fn new(downfix: Permutation, gaps: GapVector) -> Self {
        CountKey { downfix, gaps }
    }
}

/// Counts avoiders with a given downfix and gap vector, caching results.
///
/// The cache is concurrency-safe: lookups may run in parallel and an insert
/// can only race with inserts of the same value, so any interleaving yields
/// the same answers as a fresh counter.
pub struct ZCounter {
    basis: Basis,
    cap: usize,
    cache: DashMap<CountKey, usize>,
}

impl ZCounter {
    pub fn new(basis: Basis) -> Self {
        Self::with_cap(basis, DEFAULT_NORM_CAP)
    }

    pub fn with_cap(basis: Basis, cap: usize) -> Self {
        ZCounter {
            basis,
            cap,
            cache: DashMap::new(),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// |Z(B, pi, g)|: the number of permutations with downfix `pi` and gap
    /// vector `g` avoiding every basis pattern.
    pub fn count_z(&self, pi: &Permutation, g: &GapVector) -> Result<usize> {
        check_pair(pi, g, self.cap)?;
        let key = CountKey::new(pi.clone(), g.clone());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(*hit);
        }
        let count = count_avoiding_realizations(&self.basis, pi, g);
        self.cache.insert(key, count);
        Ok(count)
    }

    pub fn is_viable(&self, pi: &Permutation, g: &GapVector) -> Result<bool> {
        Ok(self.count_z(pi, g)? > 0)
    }
}

/// Materializes Y(pi, g): every permutation of length |pi| + ||g||_1 whose
/// values <= |pi| spell out `pi` at the positions dictated by `g`. The
/// result has exactly (||g||_1)! elements.
pub fn build_y(pi: &Permutation, g: &GapVector) -> Result<BTreeSet<Permutation>> {
    build_y_capped(pi, g, DEFAULT_NORM_CAP)
}

pub fn build_y_capped(
    pi: &Permutation,
    g: &GapVector,
    cap: usize,
) -> Result<BTreeSet<Permutation>> {
    check_pair(pi, g, cap)?;
    let mut out = BTreeSet::new();
    walk_realizations(pi, g, None, &mut |seq| {
        out.insert(Permutation::new(seq.to_vec()).expect("realization is a permutation"));
    });
    Ok(out)
}

fn check_pair(pi: &Permutation, g: &GapVector, cap: usize) -> Result<()> {
    if g.len() != pi.len() + 1 {
        return Err(Error::invalid(format!(
            "gap vector of length {} does not fit downfix of length {}",
            g.len(),
            pi.len()
        )));
    }
    if g.norm() > cap {
        return Err(Error::ResourceLimit(format!(
            "gap norm {} exceeds enumeration cap {cap}",
            g.norm()
        )));
    }
    Ok(())
}

fn count_avoiding_realizations(basis: &Basis, pi: &Permutation, g: &GapVector) -> usize {
    let mut count = 0usize;
    walk_realizations(pi, g, Some(basis), &mut |_| count += 1);
    count
}

// Depth-first generation of the realizations of (pi, g), position by
// position. Downfix positions carry forced values; gap positions branch over
// the unused large values in increasing order. When a basis is supplied, a
// branch is abandoned as soon as a forbidden pattern completes at the newest
// element: every extension of such a prefix contains the pattern, and
// conversely a surviving full-length prefix avoids the basis outright.
fn walk_realizations(
    pi: &Permutation,
    g: &GapVector,
    prune: Option<&Basis>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let l = pi.len();
    let n = l + g.norm();
    // slots[p] = Some(forced downfix value) or None for a gap slot.
    let mut slots: Vec<Option<usize>> = Vec::with_capacity(n);
    for (i, &gap) in g.as_slice().iter().enumerate() {
        for _ in 0..gap {
            slots.push(None);
        }
        if i < l {
            slots.push(Some(pi.values()[i]));
        }
    }
    debug_assert_eq!(slots.len(), n);

    let mut prefix: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; g.norm()]; // tracks values l+1..=n
    walk_rec(&slots, l, prune, &mut prefix, &mut used, emit);
}

fn walk_rec(
    slots: &[Option<usize>],
    l: usize,
    prune: Option<&Basis>,
    prefix: &mut Vec<usize>,
    used: &mut [bool],
    emit: &mut dyn FnMut(&[usize]),
) {
    let pos = prefix.len();
    if pos == slots.len() {
        emit(prefix);
        return;
    }
    match slots[pos] {
        Some(forced) => {
            prefix.push(forced);
            if !completes_pattern(prefix, prune) {
                walk_rec(slots, l, prune, prefix, used, emit);
            }
            prefix.pop();
        }
        None => {
            for v in 0..used.len() {
                if used[v] {
                    continue;
                }
                used[v] = true;
                prefix.push(l + 1 + v);
                if !completes_pattern(prefix, prune) {
                    walk_rec(slots, l, prune, prefix, used, emit);
                }
                prefix.pop();
                used[v] = false;
            }
        }
    }
}

fn completes_pattern(prefix: &[usize], prune: Option<&Basis>) -> bool {
    match prune {
        None => false,
        Some(basis) => {
            let last = prefix.len() - 1;
            basis
                .patterns()
                .iter()
                .any(|p| occurs(prefix, p.values(), Some((last, p.len() - 1))))
        }
    }
}
