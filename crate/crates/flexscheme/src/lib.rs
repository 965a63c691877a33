//! Flexible enumeration schemes for pattern-avoiding permutation classes.
//!
//! Given a finite set of forbidden patterns, this crate searches for a
//! *flexible scheme*: a finite collection of replacement rules that reduce
//! any sufficiently long downfix to a shorter one, where the deleted
//! position may depend on the gap vector through a first-match list of gap
//! conditions. A scheme is a certificate: once found, the enumeration
//! sequence of the avoidance class follows in polynomial time per term, and
//! every rule was verified against bounded brute force during discovery.
//!
//! The main entry points:
//!
//! - [`discovery::discover`] searches for a scheme within depth and
//!   gap-norm bounds;
//! - [`scheme::Scheme`] evaluates and (de)serializes schemes;
//! - [`oracle::brute_sequence`] enumerates the class directly, as ground
//!   truth for verification.
//!
//! Counting is generic over the [`Count`] scalar; use [`Count64`] for speed
//! or [`BigCount`] for exact terms at any length.

pub mod class_sets;
pub mod count;
pub mod discovery;
pub mod error;
pub mod gaps;
pub mod oracle;
pub mod perm;
pub mod scheme;

pub use count::{BigCount, Count, Count128, Count64, EnumSequence};
pub use error::{Error, Result};
pub use gaps::{GapCondition, GapVector};
pub use perm::{Basis, Permutation, Symmetry};
pub use scheme::Scheme;
