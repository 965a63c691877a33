//! Automatic scheme discovery: breadth-first refinement of downfixes,
//! candidate gap-condition search, and the finite certification of each
//! accepted case.
//!
//! Certification rests on two facts about a basis B, downfix pi, and gap
//! condition h. First, the viable gap vectors form a lower order ideal, so a
//! single empty count at g = h proves the class empty on the whole region
//! above h. Second, if deleting downfix position r preserves counts for every
//! g with ||g||_1 <= ||B||_inf - 1 + ||h||_1 that satisfies h and none of the
//! previously accepted conditions, it preserves counts for every such g
//! without the norm bound. Both checks are bounded brute force.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::class_sets::{ZCounter, DEFAULT_NORM_CAP};
use crate::error::{Error, Result};
use crate::gaps::{self, conditions_up_to, vectors_with_norm, GapCondition, GapVector};
use crate::perm::{Basis, Permutation};
use crate::scheme::{Case, ReplacementRule, Scheme};

/// Search style: traditional rules delete one fixed position outside the
/// nonviable regions; flexible rules may pick a different position per
/// condition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Es,
    Fs,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Es => write!(f, "es"),
            Mode::Fs => write!(f, "fs"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "es" => Ok(Mode::Es),
            "fs" => Ok(Mode::Fs),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// Limits for one discovery run.
#[derive(Clone, Debug)]
pub struct SearchBounds {
    pub max_depth: usize,
    pub max_gap_norm: usize,
    pub time_budget: Option<Duration>,
}

impl SearchBounds {
    pub fn new(max_depth: usize, max_gap_norm: usize) -> Result<Self> {
        if max_depth == 0 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        Ok(SearchBounds {
            max_depth,
            max_gap_norm,
            time_budget: None,
        })
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }
}

/// What a failed or interrupted search leaves behind: the downfixes that
/// could not be reduced within the bounds.
#[derive(Clone, Debug)]
pub struct FailureReport {
    pub basis: Basis,
    pub mode: Mode,
    pub max_depth: usize,
    pub max_gap_norm: usize,
    pub frontier: Vec<Permutation>,
    pub elapsed: Duration,
}

#[derive(Debug)]
pub enum DiscoveryOutcome {
    /// A scheme was assembled and passes validation.
    Found(Scheme),
    /// Every branch was explored; the frontier downfixes are irreducible
    /// within the bounds.
    Irreducible(FailureReport),
    /// The time budget ran out first; the frontier reflects the partial
    /// state.
    TimedOut(FailureReport),
}

impl DiscoveryOutcome {
    pub fn scheme(&self) -> Option<&Scheme> {
        match self {
            DiscoveryOutcome::Found(s) => Some(s),
            _ => None,
        }
    }
}

/// True iff the class is empty for every gap vector satisfying `h`: by
/// downward closure of viability, emptiness at g = h already decides it.
pub fn nonviable(zc: &ZCounter, pi: &Permutation, h: &GapCondition) -> Result<bool> {
    Ok(zc.count_z(pi, &h.to_vector())? == 0)
}

/// Certifies that deleting downfix position `r` preserves counts on the
/// region of gap vectors satisfying `h` but none of `priors`, by checking
/// every such vector with norm at most ||B||_inf - 1 + ||h||_1.
pub fn verify_case(
    zc: &ZCounter,
    pi: &Permutation,
    h: &GapCondition,
    priors: &[GapCondition],
    r: usize,
) -> Result<bool> {
    if r == 0 || r > pi.len() {
        return Err(Error::invalid(format!(
            "deletion position {r} out of range 1..={}",
            pi.len()
        )));
    }
    if h.len() != pi.len() + 1 || priors.iter().any(|p| p.len() != h.len()) {
        return Err(Error::invalid("condition length does not fit the downfix"));
    }
    let bound = (zc.basis().max_len() + h.norm()).saturating_sub(1);
    if h.norm() > bound {
        // Only possible for the empty basis; no vector to check.
        return Ok(true);
    }
    for extra_norm in 0..=bound - h.norm() {
        for extra in vectors_with_norm(h.len(), extra_norm) {
            let g = GapVector::new(
                h.as_slice()
                    .iter()
                    .zip(extra.as_slice())
                    .map(|(a, b)| a + b)
                    .collect(),
            );
            if priors.iter().any(|p| g.satisfies_unchecked(p)) {
                continue;
            }
            let (dp, dg) = gaps::delete(pi, &g, r)?;
            if zc.count_z(pi, &g)? != zc.count_z(&dp, &dg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) enum RuleSearch {
    Found(Vec<Case>),
    Unresolved,
    TimedOut,
}

/// Searches for a case list reducing `pi`, trying candidate conditions of
/// norm at most `max_gap_norm` in the fixed global order. Returns the cases
/// once the all-zeros condition is accepted, or `None` if it never is.
///
/// The candidate list is swept repeatedly: a condition rejected while its
/// region was still large may verify later, once other accepted cases have
/// carved that region down. A sweep that accepts nothing is a fixpoint, so
/// the search resolves a downfix exactly when some valid case list over the
/// candidate conditions exists. Acceptance order is deterministic and
/// determines the case order.
pub fn find_rule(
    zc: &ZCounter,
    pi: &Permutation,
    max_gap_norm: usize,
    mode: Mode,
) -> Result<Option<Vec<Case>>> {
    match find_rule_budgeted(zc, pi, max_gap_norm, mode, None)? {
        RuleSearch::Found(cases) => Ok(Some(cases)),
        RuleSearch::Unresolved => Ok(None),
        RuleSearch::TimedOut => unreachable!("no deadline was supplied"),
    }
}

pub(crate) fn find_rule_budgeted(
    zc: &ZCounter,
    pi: &Permutation,
    max_gap_norm: usize,
    mode: Mode,
    deadline: Option<Instant>,
) -> Result<RuleSearch> {
    let candidates = conditions_up_to(pi.len() + 1, max_gap_norm);
    let mut decided = vec![false; candidates.len()];
    let mut accepted: Vec<Case> = Vec::new();
    loop {
        let mut progress = false;
        for (idx, h) in candidates.iter().enumerate() {
            if decided[idx] {
                continue;
            }
            if expired(deadline) {
                return Ok(RuleSearch::TimedOut);
            }
            // A candidate above an accepted condition is unreachable: any
            // vector satisfying it already matched earlier.
            if accepted.iter().any(|c| h.implies(&c.condition)) {
                decided[idx] = true;
                continue;
            }
            if nonviable(zc, pi, h)? {
                accepted.push(Case::new(h.clone(), 0));
                decided[idx] = true;
                progress = true;
            } else if mode == Mode::Es && !h.is_zero() {
                // Traditional rules only delete on the final, unconditional
                // case, and viability does not change between sweeps.
                decided[idx] = true;
                continue;
            } else {
                let priors: Vec<GapCondition> =
                    accepted.iter().map(|c| c.condition.clone()).collect();
                for r in 1..=pi.len() {
                    if expired(deadline) {
                        return Ok(RuleSearch::TimedOut);
                    }
                    if verify_case(zc, pi, h, &priors, r)? {
                        accepted.push(Case::new(h.clone(), r));
                        decided[idx] = true;
                        progress = true;
                        break;
                    }
                }
            }
            if accepted.last().is_some_and(|c| c.condition.is_zero()) {
                return Ok(RuleSearch::Found(accepted));
            }
        }
        if !progress {
            return Ok(RuleSearch::Unresolved);
        }
    }
}

/// Runs the full search for `basis`: process downfixes shortest first,
/// starting from the empty downfix and 1; downfixes containing a basis
/// pattern are closed with a single (all-zeros, 0) case; otherwise a rule is
/// searched for, and an unreduced downfix below the depth bound fans out
/// into its refinements. Deletion targets of accepted cases are enqueued as
/// well, so the assembled scheme is closed.
///
/// With `try_symmetries`, the search runs independently for each basis in
/// the symmetry class (in canonical order) and the first success wins; the
/// enumeration sequence is the same for every member.
pub fn discover(
    basis: &Basis,
    bounds: &SearchBounds,
    mode: Mode,
    try_symmetries: bool,
) -> Result<DiscoveryOutcome> {
    discover_with_cap(basis, bounds, mode, try_symmetries, DEFAULT_NORM_CAP)
}

pub fn discover_with_cap(
    basis: &Basis,
    bounds: &SearchBounds,
    mode: Mode,
    try_symmetries: bool,
    cap: usize,
) -> Result<DiscoveryOutcome> {
    if bounds.max_depth == 0 {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    let needed = (basis.max_len() + bounds.max_gap_norm)
        .saturating_sub(1)
        .max(bounds.max_gap_norm);
    if needed > cap {
        return Err(Error::ResourceLimit(format!(
            "these bounds require counting up to gap norm {needed}, above the cap {cap}; raise the cap"
        )));
    }
    let start = Instant::now();
    let deadline = bounds.time_budget.map(|d| start + d);
    let variants = if try_symmetries {
        basis.symmetry_class()
    } else {
        vec![basis.clone()]
    };
    let mut first_failure: Option<FailureReport> = None;
    for variant in &variants {
        match attempt(variant, bounds, mode, cap, deadline, start)? {
            AttemptResult::Found(scheme) => return Ok(DiscoveryOutcome::Found(scheme)),
            AttemptResult::Unresolved(report) => {
                if first_failure.is_none() {
                    first_failure = Some(report);
                }
            }
            AttemptResult::TimedOut(report) => {
                // The budget is shared; later variants would start expired.
                return Ok(DiscoveryOutcome::TimedOut(report));
            }
        }
    }
    Ok(DiscoveryOutcome::Irreducible(
        first_failure.expect("at least one variant ran"),
    ))
}

enum AttemptResult {
    Found(Scheme),
    Unresolved(FailureReport),
    TimedOut(FailureReport),
}

fn attempt(
    basis: &Basis,
    bounds: &SearchBounds,
    mode: Mode,
    cap: usize,
    deadline: Option<Instant>,
    start: Instant,
) -> Result<AttemptResult> {
    let zc = ZCounter::with_cap(basis.clone(), cap);
    let mut rules: BTreeMap<Permutation, ReplacementRule> = BTreeMap::new();
    rules.insert(
        Permutation::empty(),
        ReplacementRule::unresolved(Permutation::empty()),
    );
    let mut pending: BTreeSet<Permutation> = BTreeSet::new();
    pending.insert(Permutation::new(vec![1])?);
    let mut blocked = false;

    while let Some(pi) = pending.pop_first() {
        if rules.contains_key(&pi) {
            continue;
        }
        if expired(deadline) {
            let report = report(basis, bounds, mode, &rules, &pending, start);
            return Ok(AttemptResult::TimedOut(report));
        }
        if !pi.avoids_all(basis) {
            // The class is empty everywhere below this downfix.
            let zeros = GapCondition::zeros(pi.len() + 1);
            rules.insert(
                pi.clone(),
                ReplacementRule::new(pi, vec![Case::new(zeros, 0)]),
            );
            continue;
        }
        match find_rule_budgeted(&zc, &pi, bounds.max_gap_norm, mode, deadline)? {
            RuleSearch::TimedOut => {
                let report = report(basis, bounds, mode, &rules, &pending, start);
                return Ok(AttemptResult::TimedOut(report));
            }
            RuleSearch::Found(cases) => {
                for case in &cases {
                    if case.action >= 1 {
                        let target = pi.delete_pos(case.action)?;
                        if !rules.contains_key(&target) {
                            pending.insert(target);
                        }
                    }
                }
                rules.insert(pi.clone(), ReplacementRule::new(pi, cases));
            }
            RuleSearch::Unresolved => {
                if pi.len() < bounds.max_depth {
                    for child in pi.refinements() {
                        if !rules.contains_key(&child) {
                            pending.insert(child);
                        }
                    }
                } else {
                    blocked = true;
                }
                rules.insert(pi.clone(), ReplacementRule::unresolved(pi));
            }
        }
    }

    if blocked {
        let report = report(basis, bounds, mode, &rules, &pending, start);
        return Ok(AttemptResult::Unresolved(report));
    }
    let scheme = Scheme::new(basis.clone(), rules.into_values(), bounds.max_gap_norm)?;
    debug_assert!(scheme.validate().is_empty());
    Ok(AttemptResult::Found(scheme))
}

// The frontier is every unresolved downfix in the current state (the empty
// root aside), plus anything still waiting in the queue.
fn report(
    basis: &Basis,
    bounds: &SearchBounds,
    mode: Mode,
    rules: &BTreeMap<Permutation, ReplacementRule>,
    pending: &BTreeSet<Permutation>,
    start: Instant,
) -> FailureReport {
    let mut frontier: BTreeSet<Permutation> = rules
        .values()
        .filter(|r| r.is_unresolved() && !r.downfix().is_empty())
        .map(|r| r.downfix().clone())
        .collect();
    frontier.extend(pending.iter().cloned());
    FailureReport {
        basis: basis.clone(),
        mode,
        max_depth: bounds.max_depth,
        max_gap_norm: bounds.max_gap_norm,
        frontier: frontier.into_iter().collect(),
        elapsed: start.elapsed(),
    }
}

fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn b(s: &str) -> Basis {
        s.parse().unwrap()
    }

    fn gc(v: &[usize]) -> GapCondition {
        GapCondition::new(v.to_vec())
    }

    fn bounds(depth: usize, norm: usize) -> SearchBounds {
        SearchBounds::new(depth, norm).unwrap()
    }

    #[test]
    fn nonviable_examples() {
        let zc = ZCounter::new(b("123"));
        assert!(nonviable(&zc, &p("12"), &gc(&[0, 0, 1])).unwrap());
        assert!(!nonviable(&zc, &p("12"), &gc(&[0, 1, 0])).unwrap());
        let zc = ZCounter::new(b("12"));
        assert!(nonviable(&zc, &p("12"), &gc(&[0, 0, 0])).unwrap());
    }

    #[test]
    fn verify_case_examples() {
        let zc = ZCounter::new(b("1423;2314"));
        assert!(verify_case(&zc, &p("321"), &gc(&[0, 1, 0, 0]), &[], 3).unwrap());
        assert!(verify_case(&zc, &p("321"), &gc(&[0, 0, 0, 0]), &[gc(&[0, 1, 0, 0])], 1).unwrap());

        let zc = ZCounter::new(b("123"));
        assert!(verify_case(&zc, &p("12"), &gc(&[0, 0, 0]), &[gc(&[0, 0, 1])], 2).unwrap());
        // Deleting position 1 of 21 does not preserve counts.
        assert!(!verify_case(&zc, &p("21"), &gc(&[0, 0, 0]), &[], 1).unwrap());
        assert!(verify_case(&zc, &p("21"), &gc(&[0, 0, 0]), &[], 2).unwrap());

        assert!(verify_case(&zc, &p("21"), &gc(&[0, 0, 0]), &[], 3).is_err());
    }

    // Replays a rule's first-match semantics on every vector up to a norm
    // limit and checks the decision against direct counting.
    fn assert_rule_sound(zc: &ZCounter, pi: &Permutation, cases: &[Case], norm_limit: usize) {
        for norm in 0..=norm_limit {
            for g in vectors_with_norm(pi.len() + 1, norm) {
                let case = cases
                    .iter()
                    .find(|c| g.satisfies_unchecked(&c.condition))
                    .expect("the all-zeros case matches everything");
                let lhs = zc.count_z(pi, &g).unwrap();
                if case.action == 0 {
                    assert_eq!(lhs, 0, "pi={pi:?} g={g:?}");
                } else {
                    let (dp, dg) = gaps::delete(pi, &g, case.action).unwrap();
                    let rhs = zc.count_z(&dp, &dg).unwrap();
                    assert_eq!(lhs, rhs, "pi={pi:?} g={g:?} action={}", case.action);
                }
            }
        }
    }

    #[test]
    fn find_rule_for_length_two_downfixes() {
        let zc = ZCounter::new(b("123"));
        let cases = find_rule(&zc, &p("12"), 2, Mode::Fs).unwrap().unwrap();
        let last = cases.last().unwrap();
        assert!(last.condition.is_zero());
        // Emptiness above one trailing element must be covered somewhere.
        assert!(cases
            .iter()
            .any(|c| c.action == 0 && c.condition.as_slice()[2] >= 1));
        assert_rule_sound(&zc, &p("12"), &cases, 5);

        // The exact case list depends on the fixed candidate order, so the
        // correctness statement is semantic: every decision the rule makes
        // must preserve counts.
        let cases = find_rule(&zc, &p("21"), 2, Mode::Fs).unwrap().unwrap();
        let last = cases.last().unwrap();
        assert!(last.condition.is_zero());
        assert!(last.action >= 1);
        assert_rule_sound(&zc, &p("21"), &cases, 5);
    }

    #[test]
    fn find_rule_unresolved_examples() {
        let zc = ZCounter::new(b("123"));
        assert!(find_rule(&zc, &p("1"), 2, Mode::Fs).unwrap().is_none());

        let zc = ZCounter::new(b("1423;2314"));
        assert!(find_rule(&zc, &p("1"), 2, Mode::Fs).unwrap().is_none());
    }

    #[test]
    fn discover_single_length_three_pattern() {
        let outcome = discover(&b("123"), &bounds(8, 2), Mode::Fs, false).unwrap();
        let scheme = outcome.scheme().expect("search succeeds");
        assert_eq!(scheme.depth(), 2);
        let downfixes: Vec<&Permutation> = scheme.rules().map(|r| r.downfix()).collect();
        assert_eq!(
            downfixes,
            vec![&Permutation::empty(), &p("1"), &p("12"), &p("21")]
        );
        assert!(scheme.validate().is_empty());
        let seq = scheme.enumerate::<u64>(9).unwrap();
        let want = oracle::brute_sequence::<u64>(&b("123"), 9).unwrap();
        assert_eq!(seq.terms(), want.terms());
    }

    #[test]
    fn discover_traditional_rules_where_they_exist() {
        // A class known to reduce with one fixed deletion per downfix outside
        // the nonviable regions.
        let outcome = discover(&b("1342;1432"), &bounds(8, 2), Mode::Es, false).unwrap();
        let scheme = outcome.scheme().expect("traditional search succeeds");
        for rule in scheme.rules() {
            let mut cases = rule.cases().to_vec();
            if let Some(last) = cases.pop() {
                // All earlier cases mark empty regions.
                assert!(cases.iter().all(|c| c.action == 0));
                assert!(last.condition.is_zero());
            }
        }
        let seq = scheme.enumerate::<u64>(8).unwrap();
        let want = oracle::brute_sequence::<u64>(&b("1342;1432"), 8).unwrap();
        assert_eq!(seq.terms(), want.terms());
    }

    #[test]
    fn discover_respects_the_cap() {
        let err = discover_with_cap(&b("12345"), &bounds(3, 8), Mode::Fs, false, 10);
        assert!(matches!(err, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn discover_times_out() {
        let tight = bounds(8, 2).with_time_budget(Duration::from_millis(0));
        let outcome = discover(&b("1423;2314"), &tight, Mode::Fs, false).unwrap();
        assert!(matches!(outcome, DiscoveryOutcome::TimedOut(_)));
    }

    #[test]
    fn scheme_for_basis_containing_one() {
        let outcome = discover(&b("1"), &bounds(2, 1), Mode::Fs, false).unwrap();
        let scheme = outcome.scheme().expect("trivial scheme");
        let seq = scheme.enumerate::<u64>(4).unwrap();
        assert_eq!(seq.terms(), &[1, 0, 0, 0, 0]);
    }

    #[test]
    fn empty_basis_counts_factorials() {
        let outcome = discover(&Basis::empty(), &bounds(3, 2), Mode::Fs, false).unwrap();
        let scheme = outcome.scheme().expect("every deletion works");
        let seq = scheme.enumerate::<u64>(5).unwrap();
        assert_eq!(seq.terms(), &[1, 1, 2, 6, 24, 120]);
    }

    #[test]
    fn symmetry_fallback_returns_an_equivalent_scheme() {
        let outcome = discover(&b("321"), &bounds(8, 2), Mode::Fs, true).unwrap();
        let scheme = outcome.scheme().expect("some symmetry succeeds");
        let seq = scheme.enumerate::<u64>(8).unwrap();
        let want = oracle::brute_sequence::<u64>(&b("321"), 8).unwrap();
        assert_eq!(seq.terms(), want.terms());
    }
}
