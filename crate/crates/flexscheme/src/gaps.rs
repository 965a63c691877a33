//! Gap vectors and gap conditions, the componentwise dominance order, and
//! the deletion / refinement operators on (downfix, gap vector) pairs.
//!
//! A permutation with downfix of length l has a gap vector of length l+1:
//! entry i counts the non-downfix elements between downfix positions i-1 and
//! i (entry 1 before the first, entry l+1 after the last). A gap condition
//! has the same shape but acts as a componentwise lower bound.

use std::fmt;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Actual gap sizes of a concrete permutation relative to a downfix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapVector {
    gaps: Vec<usize>,
}

/// Componentwise lower bound on gap vectors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapCondition {
    bounds: Vec<usize>,
}

impl GapVector {
    pub fn new(gaps: Vec<usize>) -> Self {
        GapVector { gaps }
    }

    pub fn zeros(len: usize) -> Self {
        GapVector { gaps: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.gaps
    }

    /// l1 norm: the number of non-downfix elements.
    pub fn norm(&self) -> usize {
        self.gaps.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.gaps.iter().all(|&g| g == 0)
    }

    /// The dominance test g >= h componentwise.
    pub fn satisfies(&self, cond: &GapCondition) -> Result<bool> {
        if self.len() != cond.len() {
            return Err(Error::invalid(format!(
                "gap vector of length {} cannot be compared to condition of length {}",
                self.len(),
                cond.len()
            )));
        }
        Ok(self.satisfies_unchecked(cond))
    }

    pub(crate) fn satisfies_unchecked(&self, cond: &GapCondition) -> bool {
        debug_assert_eq!(self.len(), cond.len());
        self.gaps.iter().zip(&cond.bounds).all(|(&g, &h)| g >= h)
    }

    /// Componentwise <= against another vector of the same length.
    pub fn dominated_by(&self, other: &GapVector) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.gaps.iter().zip(&other.gaps).all(|(&a, &b)| a <= b)
    }
}

impl GapCondition {
    pub fn new(bounds: Vec<usize>) -> Self {
        GapCondition { bounds }
    }

    pub fn zeros(len: usize) -> Self {
        GapCondition {
            bounds: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.bounds
    }

    pub fn norm(&self) -> usize {
        self.bounds.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bounds.iter().all(|&h| h == 0)
    }

    /// The smallest gap vector satisfying this condition.
    pub fn to_vector(&self) -> GapVector {
        GapVector {
            gaps: self.bounds.clone(),
        }
    }

    /// True iff every vector satisfying `self` also satisfies `other`.
    pub fn implies(&self, other: &GapCondition) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.bounds.iter().zip(&other.bounds).all(|(&a, &b)| a >= b)
    }
}

impl fmt::Debug for GapVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.gaps)
    }
}

impl fmt::Debug for GapCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.bounds)
    }
}

/// Deletes downfix position `r` (1-based): the downfix loses that element and
/// is reduced, and the gaps around it merge. The norm is preserved.
pub fn delete(pi: &Permutation, g: &GapVector, r: usize) -> Result<(Permutation, GapVector)> {
    check_shape(pi, g)?;
    if r == 0 || r > pi.len() {
        return Err(Error::invalid(format!(
            "deletion position {r} out of range 1..={}",
            pi.len()
        )));
    }
    let new_pi = pi.delete_pos(r)?;
    let mut gaps = g.gaps.clone();
    let merged = gaps[r - 1] + gaps[r];
    gaps[r - 1] = merged;
    gaps.remove(r);
    Ok((new_pi, GapVector { gaps }))
}

/// Refines by promoting the next value into gap `i` (1-based): the new
/// maximum becomes downfix position `i`, with `j` of the gap's elements left
/// before it and the rest after. The norm decreases by exactly 1.
pub fn refine(
    pi: &Permutation,
    g: &GapVector,
    i: usize,
    j: usize,
) -> Result<(Permutation, GapVector)> {
    check_shape(pi, g)?;
    if i == 0 || i > g.len() {
        return Err(Error::invalid(format!(
            "gap index {i} out of range 1..={}",
            g.len()
        )));
    }
    let gi = g.gaps[i - 1];
    if gi == 0 || j > gi - 1 {
        return Err(Error::invalid(format!(
            "offset {j} invalid for gap of size {gi}"
        )));
    }
    let new_pi = pi.refine_at(i);
    let mut gaps = Vec::with_capacity(g.len() + 1);
    gaps.extend_from_slice(&g.gaps[..i - 1]);
    gaps.push(j);
    gaps.push(gi - j - 1);
    gaps.extend_from_slice(&g.gaps[i..]);
    Ok((new_pi, GapVector { gaps }))
}

fn check_shape(pi: &Permutation, g: &GapVector) -> Result<()> {
    if g.len() != pi.len() + 1 {
        return Err(Error::invalid(format!(
            "gap vector of length {} does not fit downfix of length {}",
            g.len(),
            pi.len()
        )));
    }
    Ok(())
}

/// All gap conditions of the given length with l1 norm <= `max_norm`,
/// ordered by decreasing norm and lexicographically descending within a
/// norm; the all-zeros condition comes last.
pub fn conditions_up_to(len: usize, max_norm: usize) -> Vec<GapCondition> {
    let mut out = Vec::new();
    for norm in (0..=max_norm).rev() {
        for v in compositions(len, norm) {
            out.push(GapCondition { bounds: v });
        }
    }
    out
}

/// All gap vectors of the given length with l1 norm exactly `norm`,
/// lexicographically descending.
pub fn vectors_with_norm(len: usize, norm: usize) -> Vec<GapVector> {
    compositions(len, norm)
        .into_iter()
        .map(|v| GapVector { gaps: v })
        .collect()
}

// Weak compositions of `total` into `len` parts, first part largest first.
fn compositions(len: usize, total: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(len);
    fn rec(len: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len - 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(len, total - first, prefix, out);
            prefix.pop();
        }
    }
    rec(len, total, &mut prefix, &mut out);
    out
}
