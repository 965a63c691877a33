//! The flexible-scheme data model, structural validation, the memoized
//! term counter, and sequence enumeration.
//!
//! A scheme is a collection of replacement rules, one per downfix. A rule
//! either carries an ordered case list, where the first case whose gap
//! condition is satisfied decides whether the class is empty there (action
//! 0) or which downfix position to delete (action r >= 1), or carries no
//! cases at all, meaning the downfix cannot be reduced yet and counting
//! recurses into its refinements.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::class_sets::CountKey;
use crate::count::{Count, EnumSequence};
use crate::error::{Error, Result};
use crate::gaps::{self, GapCondition, GapVector};
use crate::perm::{Basis, Permutation};

pub const SCHEME_FORMAT: &str = "flexscheme-v1";

/// One (gap condition, action) pair. Action 0 means the class is empty
/// whenever this is the first satisfied condition; action r >= 1 names the
/// downfix position to delete.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Case {
    pub condition: GapCondition,
    pub action: usize,
}

impl Case {
    pub fn new(condition: GapCondition, action: usize) -> Self {
        Case { condition, action }
    }
}

/// A downfix together with its ordered case list (possibly empty).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReplacementRule {
    downfix: Permutation,
    cases: Vec<Case>,
}

impl ReplacementRule {
    pub fn new(downfix: Permutation, cases: Vec<Case>) -> Self {
        ReplacementRule { downfix, cases }
    }

    pub fn unresolved(downfix: Permutation) -> Self {
        ReplacementRule {
            downfix,
            cases: Vec::new(),
        }
    }

    pub fn downfix(&self) -> &Permutation {
        &self.downfix
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    /// No cases: counting must recurse into refinements of this downfix.
    pub fn is_unresolved(&self) -> bool {
        self.cases.is_empty()
    }
}

/// A violation found by [`Scheme::validate`]. Violations are data, not
/// errors: an invalid scheme can still be inspected and reserialized.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    MissingRoot,
    RootHasCases,
    ConditionLength {
        downfix: Permutation,
        case: usize,
    },
    ActionRange {
        downfix: Permutation,
        case: usize,
        action: usize,
    },
    LastCaseNotAllZeros {
        downfix: Permutation,
    },
    MissingRefinement {
        downfix: Permutation,
        refinement: Permutation,
    },
    MissingDeletionTarget {
        downfix: Permutation,
        case: usize,
        target: Permutation,
    },
    UnresolvedContainsPattern {
        downfix: Permutation,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRoot => write!(f, "no rule for the empty downfix"),
            Violation::RootHasCases => {
                write!(f, "the empty-downfix rule must have no cases")
            }
            Violation::ConditionLength { downfix, case } => write!(
                f,
                "rule {downfix:?}: case {case} has a condition of the wrong length"
            ),
            Violation::ActionRange { downfix, case, action } => write!(
                f,
                "rule {downfix:?}: case {case} action {action} exceeds the downfix length"
            ),
            Violation::LastCaseNotAllZeros { downfix } => write!(
                f,
                "rule {downfix:?}: last condition is not all-zeros, so some gap vectors match no case"
            ),
            Violation::MissingRefinement { downfix, refinement } => write!(
                f,
                "rule {downfix:?} has no cases but refinement {refinement:?} has no rule"
            ),
            Violation::MissingDeletionTarget { downfix, case, target } => write!(
                f,
                "rule {downfix:?}: case {case} deletes to {target:?}, which has no rule"
            ),
            Violation::UnresolvedContainsPattern { downfix } => write!(
                f,
                "rule {downfix:?} has no cases but the downfix contains a basis pattern"
            ),
        }
    }
}

/// A basis plus a closed collection of replacement rules: the certificate
/// that enables polynomial-time counting of the avoidance class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scheme {
    basis: Basis,
    rules: BTreeMap<Permutation, ReplacementRule>,
    max_gap_norm: usize,
}

impl Scheme {
    pub fn new(
        basis: Basis,
        rules: impl IntoIterator<Item = ReplacementRule>,
        max_gap_norm: usize,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for rule in rules {
            if map.insert(rule.downfix().clone(), rule).is_some() {
                return Err(Error::invalid("duplicate rule for one downfix"));
            }
        }
        Ok(Scheme {
            basis,
            rules: map,
            max_gap_norm,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn max_gap_norm(&self) -> usize {
        self.max_gap_norm
    }

    pub fn rule_for(&self, downfix: &Permutation) -> Option<&ReplacementRule> {
        self.rules.get(downfix)
    }

    /// Rules in canonical downfix order.
    pub fn rules(&self) -> impl Iterator<Item = &ReplacementRule> {
        self.rules.values()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Maximum downfix length appearing in the scheme.
    pub fn depth(&self) -> usize {
        self.rules.keys().map(Permutation::len).max().unwrap_or(0)
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self.rules.get(&Permutation::empty()) {
            None => out.push(Violation::MissingRoot),
            Some(root) if !root.is_unresolved() => out.push(Violation::RootHasCases),
            _ => {}
        }
        for rule in self.rules.values() {
            let downfix = rule.downfix();
            for (idx, case) in rule.cases().iter().enumerate() {
                if case.condition.len() != downfix.len() + 1 {
                    out.push(Violation::ConditionLength {
                        downfix: downfix.clone(),
                        case: idx,
                    });
                }
                if case.action > downfix.len() {
                    out.push(Violation::ActionRange {
                        downfix: downfix.clone(),
                        case: idx,
                        action: case.action,
                    });
                    continue;
                }
                if case.action >= 1 {
                    if let Ok(target) = downfix.delete_pos(case.action) {
                        if !self.rules.contains_key(&target) {
                            out.push(Violation::MissingDeletionTarget {
                                downfix: downfix.clone(),
                                case: idx,
                                target,
                            });
                        }
                    }
                }
            }
            if let Some(last) = rule.cases().last() {
                if !last.condition.is_zero() {
                    out.push(Violation::LastCaseNotAllZeros {
                        downfix: downfix.clone(),
                    });
                }
            }
            if rule.is_unresolved() {
                if !downfix.avoids_all(&self.basis) {
                    out.push(Violation::UnresolvedContainsPattern {
                        downfix: downfix.clone(),
                    });
                }
                for refinement in downfix.refinements() {
                    if !self.rules.contains_key(&refinement) {
                        out.push(Violation::MissingRefinement {
                            downfix: downfix.clone(),
                            refinement,
                        });
                    }
                }
            }
        }
        out
    }

    /// Builds a validated evaluator with a fresh memo.
    pub fn evaluator<C: Count>(&self) -> Result<Evaluator<'_, C>> {
        let violations = self.validate();
        if let Some(first) = violations.first() {
            return Err(Error::SchemeIntegrity(format!(
                "{first} ({} violations total)",
                violations.len()
            )));
        }
        Ok(Evaluator {
            scheme: self,
            memo: DashMap::new(),
        })
    }

    /// One-shot count of the class members with the given downfix and gap
    /// vector.
    pub fn find_term<C: Count>(&self, pi: &Permutation, g: &GapVector) -> Result<C> {
        self.evaluator()?.find_term(pi, g)
    }

    /// Terms 0..=n_max of the class enumeration sequence.
    pub fn enumerate<C: Count>(&self, n_max: usize) -> Result<EnumSequence<C>> {
        self.evaluator()?.enumerate(n_max)
    }

    pub fn to_json(&self) -> String {
        let doc = SchemeDoc::from(self);
        let mut text =
            serde_json::to_string_pretty(&doc).expect("scheme serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SchemeDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Memoized term computation for one scheme.
///
/// Results are memoized per (downfix, gap vector) key; the memo is shared
/// across calls, so enumerating successive terms reuses earlier work. The
/// memo accepts concurrent lookups and idempotent inserts.
pub struct Evaluator<'a, C: Count> {
    scheme: &'a Scheme,
    memo: DashMap<CountKey, C>,
}

// How the value of a key is produced once its dependencies are known.
enum Step {
    Leaf(NodeValue),
    SumRefinements(Vec<CountKey>),
    CopyDeletion(CountKey),
}

enum NodeValue {
    Zero,
    One,
}

impl<'a, C: Count> Evaluator<'a, C> {
    pub fn scheme(&self) -> &Scheme {
        self.scheme
    }

    /// Number of distinct keys memoized so far.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// The number of class members with downfix `pi` and gap vector `g`.
    ///
    /// Follows the rule for `pi`: with no cases, a zero vector counts one
    /// permutation and anything else sums over refinements; otherwise the
    /// first satisfied case either reports emptiness or defers to the
    /// deletion target. An explicit work stack replaces recursion, since
    /// refine/delete chains grow linearly with the norm.
    pub fn find_term(&self, pi: &Permutation, g: &GapVector) -> Result<C> {
        let root = CountKey::new(pi.clone(), g.clone());
        let mut stack = vec![root.clone()];
        while let Some(key) = stack.pop() {
            if self.memo.contains_key(&key) {
                continue;
            }
            match self.plan(&key)? {
                Step::Leaf(NodeValue::Zero) => {
                    self.memo.insert(key, C::zero());
                }
                Step::Leaf(NodeValue::One) => {
                    self.memo.insert(key, C::one());
                }
                Step::SumRefinements(children) => {
                    let missing: Vec<CountKey> = children
                        .iter()
                        .filter(|c| !self.memo.contains_key(c))
                        .cloned()
                        .collect();
                    if missing.is_empty() {
                        let mut acc = C::zero();
                        for child in &children {
                            acc += self.memo.get(child).expect("child memoized").clone();
                        }
                        self.memo.insert(key, acc);
                    } else {
                        stack.push(key);
                        stack.extend(missing);
                    }
                }
                Step::CopyDeletion(child) => {
                    if let Some(v) = self.memo.get(&child).map(|v| v.clone()) {
                        self.memo.insert(key, v);
                    } else {
                        stack.push(key);
                        stack.push(child);
                    }
                }
            }
        }
        Ok(self.memo.get(&root).expect("root memoized").clone())
    }

    fn plan(&self, key: &CountKey) -> Result<Step> {
        let rule = self.scheme.rule_for(&key.downfix).ok_or_else(|| {
            Error::SchemeIntegrity(format!("no rule for reachable downfix {:?}", key.downfix))
        })?;
        if rule.is_unresolved() {
            if key.gaps.is_zero() {
                return Ok(Step::Leaf(NodeValue::One));
            }
            let mut children = Vec::with_capacity(key.gaps.norm());
            for i in 1..=key.gaps.len() {
                for j in 0..key.gaps.as_slice()[i - 1] {
                    let (rp, rg) = gaps::refine(&key.downfix, &key.gaps, i, j)?;
                    children.push(CountKey::new(rp, rg));
                }
            }
            return Ok(Step::SumRefinements(children));
        }
        let case = rule
            .cases()
            .iter()
            .find(|c| key.gaps.satisfies_unchecked(&c.condition))
            .ok_or_else(|| {
                Error::SchemeIntegrity(format!(
                    "no case of rule {:?} matches gap vector {:?}",
                    key.downfix, key.gaps
                ))
            })?;
        if case.action == 0 {
            Ok(Step::Leaf(NodeValue::Zero))
        } else {
            let (dp, dg) = gaps::delete(&key.downfix, &key.gaps, case.action)?;
            Ok(Step::CopyDeletion(CountKey::new(dp, dg)))
        }
    }

    /// Terms 0..=n_max, sharing the memo across terms.
    pub fn enumerate(&self, n_max: usize) -> Result<EnumSequence<C>> {
        let empty = Permutation::empty();
        let mut terms = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            terms.push(self.find_term(&empty, &GapVector::new(vec![n]))?);
        }
        Ok(EnumSequence::new(self.scheme.basis().clone(), terms))
    }
}

// On-disk document. Field order and the rejection of unknown fields are part
// of the format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDoc {
    format: String,
    basis: Vec<String>,
    max_gap_norm: usize,
    rules: Vec<RuleDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    downfix: Vec<usize>,
    cases: Vec<CaseDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    condition: Vec<usize>,
    action: usize,
}

impl From<&Scheme> for SchemeDoc {
    fn from(s: &Scheme) -> Self {
        SchemeDoc {
            format: SCHEME_FORMAT.to_string(),
            basis: s.basis.patterns().iter().map(|p| p.to_string()).collect(),
            max_gap_norm: s.max_gap_norm,
            rules: s
                .rules
                .values()
                .map(|rule| RuleDoc {
                    downfix: rule.downfix().values().to_vec(),
                    cases: rule
                        .cases()
                        .iter()
                        .map(|c| CaseDoc {
                            condition: c.condition.as_slice().to_vec(),
                            action: c.action,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SchemeDoc> for Scheme {
    type Error = Error;

    fn try_from(doc: SchemeDoc) -> Result<Self> {
        if doc.format != SCHEME_FORMAT {
            return Err(Error::Format(format!(
                "unsupported format {:?}, expected {SCHEME_FORMAT:?}",
                doc.format
            )));
        }
        let basis = Basis::new(
            doc.basis
                .iter()
                .map(|s| Permutation::from_str(s))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Format(format!("bad basis pattern: {e}")))?,
        )?;
        let rules = doc
            .rules
            .into_iter()
            .map(|r| {
                let downfix = Permutation::new(r.downfix)
                    .map_err(|e| Error::Format(format!("bad downfix: {e}")))?;
                let cases = r
                    .cases
                    .into_iter()
                    .map(|c| Case::new(GapCondition::new(c.condition), c.action))
                    .collect();
                Ok(ReplacementRule::new(downfix, cases))
            })
            .collect::<Result<Vec<_>>>()?;
        Scheme::new(basis, rules, doc.max_gap_norm)
    }
}
