//! The counter scalar used by the enumeration engines.
//!
//! Term counts grow like c^n for a class-dependent constant c, so fixed-width
//! integers overflow once n gets into the forties even for slow-growing
//! classes. Everything that accumulates counts is therefore generic over a
//! [`Count`] scalar: plug in `u64` for bounded runs where speed matters, or
//! [`BigCount`] when terms must stay exact for arbitrary n.

use std::fmt;
use std::ops::AddAssign;

use num_traits::{FromPrimitive, One, Zero};

use crate::perm::Basis;

/// Scalar in which enumeration terms are accumulated.
///
/// Blanket-implemented for every type with the right arithmetic; in practice
/// that means the unsigned primitives and [`BigCount`].
pub trait Count:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + AddAssign
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Count for T where
    T: Clone
        + PartialEq
        + fmt::Debug
        + fmt::Display
        + Zero
        + One
        + AddAssign
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Fast machine-word counter; fine for terms below 2^64.
pub type Count64 = u64;

/// Double-word counter for sequences that outgrow `u64` but stay below
/// 2^128.
pub type Count128 = u128;

/// Exact arbitrary-precision counter; the default for user-facing output.
pub type BigCount = num_bigint::BigUint;

pub(crate) fn count_from_usize<C: Count>(n: usize) -> C {
    C::from_usize(n).expect("count scalar cannot represent a set cardinality")
}

/// An enumeration sequence for an avoidance class: `terms[n]` is the number
/// of permutations of length n avoiding every pattern of `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumSequence<C> {
    basis: Basis,
    terms: Vec<C>,
}

impl<C: Count> EnumSequence<C> {
    pub fn new(basis: Basis, terms: Vec<C>) -> Self {
        EnumSequence { basis, terms }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn terms(&self) -> &[C] {
        &self.terms
    }

    pub fn term(&self, n: usize) -> Option<&C> {
        self.terms.get(n)
    }

    /// Largest n with a computed term.
    pub fn n_max(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

impl<C: Count> fmt::Display for EnumSequence<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
            first = false;
        }
        Ok(())
    }
}
