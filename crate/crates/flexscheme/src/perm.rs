//! Permutations in one-line notation, pattern containment, downfix
//! extraction, and the eight symmetries of pattern sets.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaps::GapVector;

/// A permutation of 1..=n in one-line notation. The empty sequence is the
/// empty permutation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    values: Vec<usize>,
}

impl Permutation {
    pub fn empty() -> Self {
        Permutation { values: Vec::new() }
    }

    /// Builds a permutation, checking that `values` is a rearrangement of
    /// 1..=n.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v > n {
                return Err(Error::invalid(format!(
                    "value {v} out of range 1..={n} for a permutation"
                )));
            }
            if seen[v - 1] {
                return Err(Error::invalid(format!("duplicate value {v}")));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { values })
    }

    /// The reduction of a sequence of distinct values: the unique permutation
    /// whose elements occur in the same relative order.
    pub fn reduce<T: Ord>(seq: &[T]) -> Result<Self> {
        let mut order: Vec<usize> = (0..seq.len()).collect();
        order.sort_by(|&a, &b| seq[a].cmp(&seq[b]));
        for w in order.windows(2) {
            if seq[w[0]] == seq[w[1]] {
                return Err(Error::invalid("cannot reduce a sequence with duplicates"));
            }
        }
        let mut values = vec![0usize; seq.len()];
        for (rank, &idx) in order.iter().enumerate() {
            values[idx] = rank + 1;
        }
        Ok(Permutation { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// True iff some subsequence of `self` reduces to `pattern`. Every
    /// permutation contains the empty pattern.
    pub fn contains(&self, pattern: &Permutation) -> bool {
        occurs(&self.values, &pattern.values, None)
    }

    /// True iff `self` contains none of the basis patterns.
    pub fn avoids_all(&self, basis: &Basis) -> bool {
        basis.patterns().iter().all(|p| !self.contains(p))
    }

    /// Splits off the downfix of the values 1..=l: the subsequence of values
    /// <= l in positional order, together with the gap vector recording how
    /// many larger values sit before, between, and after them.
    pub fn downfix_split(&self, l: usize) -> Result<(Permutation, GapVector)> {
        let n = self.len();
        if l > n {
            return Err(Error::invalid(format!(
                "downfix size {l} exceeds permutation length {n}"
            )));
        }
        let mut downfix = Vec::with_capacity(l);
        let mut gaps = vec![0usize; l + 1];
        for &v in &self.values {
            if v <= l {
                downfix.push(v);
            } else {
                gaps[downfix.len()] += 1;
            }
        }
        Ok((Permutation { values: downfix }, GapVector::new(gaps)))
    }

    pub fn apply_symmetry(&self, op: Symmetry) -> Permutation {
        let n = self.len();
        let values = match op {
            Symmetry::Reverse => self.values.iter().rev().copied().collect(),
            Symmetry::Complement => self.values.iter().map(|&v| n + 1 - v).collect(),
            Symmetry::Inverse => {
                let mut out = vec![0usize; n];
                for (i, &v) in self.values.iter().enumerate() {
                    out[v - 1] = i + 1;
                }
                out
            }
        };
        Permutation { values }
    }

    /// Inserts the new maximum n+1 so that it becomes downfix position `i`
    /// (1-based); `i` may be anywhere in 1..=n+1.
    pub fn refine_at(&self, i: usize) -> Permutation {
        debug_assert!(i >= 1 && i <= self.len() + 1);
        let mut values = self.values.clone();
        values.insert(i - 1, self.len() + 1);
        Permutation { values }
    }

    /// All permutations obtained by inserting the new maximum, in position
    /// order.
    pub fn refinements(&self) -> Vec<Permutation> {
        (1..=self.len() + 1).map(|i| self.refine_at(i)).collect()
    }

    /// Deletes position `r` (1-based) and reduces.
    pub fn delete_pos(&self, r: usize) -> Result<Permutation> {
        if r == 0 || r > self.len() {
            return Err(Error::invalid(format!(
                "position {r} out of range 1..={}",
                self.len()
            )));
        }
        let removed = self.values[r - 1];
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|&(idx, _)| idx != r - 1)
            .map(|(_, &v)| if v > removed { v - 1 } else { v })
            .collect();
        Ok(Permutation { values })
    }
}

// Canonical order: length first, then lexicographic.
impl Ord for Permutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.values.cmp(&other.values))
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text form: contiguous digits for length <= 9, comma-separated otherwise.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
        } else {
            for (i, v) in self.values.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "<empty>")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty permutation text"));
        }
        let values: Vec<usize> = if s.contains(',') {
            s.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad entry {part:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::invalid(format!("bad digit {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

/// The three generators of the symmetry group of pattern sets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Symmetry {
    Reverse,
    Complement,
    Inverse,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Reverse, Symmetry::Complement, Symmetry::Inverse];
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symmetry::Reverse => write!(f, "reverse"),
            Symmetry::Complement => write!(f, "complement"),
            Symmetry::Inverse => write!(f, "inverse"),
        }
    }
}

/// A finite set of forbidden patterns.
///
/// Construction canonicalizes: patterns are deduplicated, sorted by length
/// then lexicographically, and any pattern containing another basis pattern
/// is dropped (it can never change the avoidance class).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basis {
    patterns: Vec<Permutation>,
}

impl Basis {
    pub fn new(patterns: impl IntoIterator<Item = Permutation>) -> Result<Self> {
        let mut sorted: Vec<Permutation> = patterns.into_iter().collect();
        for p in &sorted {
            if p.is_empty() {
                return Err(Error::invalid("basis patterns must be non-empty"));
            }
        }
        sorted.sort();
        sorted.dedup();
        let mut kept: Vec<Permutation> = Vec::with_capacity(sorted.len());
        for p in sorted {
            // Shorter patterns were kept first, so one containment pass suffices.
            if !kept.iter().any(|q| p.contains(q)) {
                kept.push(p);
            }
        }
        Ok(Basis { patterns: kept })
    }

    pub fn empty() -> Self {
        Basis {
            patterns: Vec::new(),
        }
    }

    pub fn patterns(&self) -> &[Permutation] {
        &self.patterns
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    /// Length of the longest pattern (0 for the empty basis).
    pub fn max_len(&self) -> usize {
        self.patterns
            .iter()
            .map(Permutation::len)
            .max()
            .unwrap_or(0)
    }

    pub fn map_symmetry(&self, op: Symmetry) -> Basis {
        Basis::new(self.patterns.iter().map(|p| p.apply_symmetry(op)))
            .expect("symmetry image of a valid basis is valid")
    }

    /// The orbit of this basis under the symmetry group, sorted; the first
    /// member is the canonical representative. At most 8 members.
    pub fn symmetry_class(&self) -> Vec<Basis> {
        let mut orbit: BTreeSet<Basis> = BTreeSet::new();
        orbit.insert(self.clone());
        loop {
            let mut next: Vec<Basis> = Vec::new();
            for b in &orbit {
                for op in Symmetry::ALL {
                    let img = b.map_symmetry(op);
                    if !orbit.contains(&img) {
                        next.push(img);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            orbit.extend(next);
        }
        orbit.into_iter().collect()
    }

    /// The minimum of the symmetry class under the canonical basis order.
    pub fn canonical_representative(&self) -> Basis {
        self.symmetry_class()
            .into_iter()
            .next()
            .expect("orbit contains at least the basis itself")
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Patterns separated by ";".
impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.iter().all(|p| p.is_empty()) {
            return Err(Error::invalid("basis text contains no patterns"));
        }
        Basis::new(
            parts
                .into_iter()
                .filter(|p| !p.is_empty())
                .map(Permutation::from_str)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// All permutations of length n in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        if current.len() == n {
            out.push(Permutation {
                values: current.clone(),
            });
            return;
        }
        for v in 1..=n {
            if !used[v - 1] {
                used[v - 1] = true;
                current.push(v);
                rec(n, current, used, out);
                current.pop();
                used[v - 1] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

/// Every basis of the pattern family described by `lengths`: one pattern per
/// entry, all distinct. Supports the single and pair families.
pub fn family_bases(lengths: &[usize]) -> Result<Vec<Basis>> {
    match lengths {
        [l] => all_permutations(*l)
            .into_iter()
            .map(|p| Basis::new([p]))
            .collect(),
        [l1, l2] => {
            let mut out = Vec::new();
            if l1 == l2 {
                let perms = all_permutations(*l1);
                for (i, p) in perms.iter().enumerate() {
                    for q in &perms[i + 1..] {
                        out.push(Basis::new([p.clone(), q.clone()])?);
                    }
                }
            } else {
                for p in all_permutations(*l1.min(l2)) {
                    for q in all_permutations(*l1.max(l2)) {
                        out.push(Basis::new([p.clone(), q.clone()])?);
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::invalid(
            "pattern families are described by one or two lengths",
        )),
    }
}

/// Canonical representatives of the symmetry classes of a pattern family,
/// sorted.
pub fn family_representatives(lengths: &[usize]) -> Result<Vec<Basis>> {
    let mut reps: BTreeSet<Basis> = BTreeSet::new();
    for b in family_bases(lengths)? {
        reps.insert(b.canonical_representative());
    }
    Ok(reps.into_iter().collect())
}

/// Core subsequence matcher: does `seq` (distinct values) contain an
/// occurrence of the pattern `pat`?
///
/// With `pin = Some((pos, role))` the occurrence must use `seq[pos]` as the
/// pattern's `role`-th element (0-based). Matching is by relative order only,
/// so `seq` need not be a permutation of 1..=n.
pub(crate) fn occurs(seq: &[usize], pat: &[usize], pin: Option<(usize, usize)>) -> bool {
    let k = pat.len();
    if k == 0 {
        return true;
    }
    if k > seq.len() {
        return false;
    }
    if let Some((pos, role)) = pin {
        // Enough room on both sides of the pinned position.
        if pos < role || seq.len() - pos - 1 < k - role - 1 {
            return false;
        }
    }
    let mut small = [0usize; 32];
    if k <= small.len() {
        occurs_rec(seq, pat, pin, &mut small[..k], 0, 0)
    } else {
        let mut buf = vec![0usize; k];
        occurs_rec(seq, pat, pin, &mut buf, 0, 0)
    }
}

fn occurs_rec(
    seq: &[usize],
    pat: &[usize],
    pin: Option<(usize, usize)>,
    chosen: &mut [usize],
    t: usize,
    start: usize,
) -> bool {
    let k = pat.len();
    if t == k {
        return true;
    }
    let candidate_ok = |v: usize, chosen: &[usize]| -> bool {
        for s in 0..t {
            if (v > chosen[s]) != (pat[t] > pat[s]) {
                return false;
            }
        }
        if let Some((pos, role)) = pin {
            // Stay consistent with the pinned element before reaching it.
            if t != role && (v > seq[pos]) != (pat[t] > pat[role]) {
                return false;
            }
        }
        true
    };
    if let Some((pos, role)) = pin {
        if t == role {
            let v = seq[pos];
            if start <= pos && candidate_ok(v, chosen) {
                chosen[t] = v;
                return occurs_rec(seq, pat, pin, chosen, t + 1, pos + 1);
            }
            return false;
        }
    }
    let end = match pin {
        Some((pos, role)) if t < role => pos,
        _ => seq.len(),
    };
    for idx in start..end {
        // Not enough positions left for the remaining pattern elements.
        if seq.len() - idx < k - t {
            break;
        }
        if let Some((pos, role)) = pin {
            if t < role && pos - idx < role - t {
                break;
            }
        }
        let v = seq[idx];
        if candidate_ok(v, chosen) {
            chosen[t] = v;
            if occurs_rec(seq, pat, pin, chosen, t + 1, idx + 1) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn b(s: &str) -> Basis {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Permutation::reduce(&[2, 5, 3]).unwrap(), p("132"));
        assert_eq!(Permutation::reduce(&[2, 4, 5, 1, 3]).unwrap(), p("24513"));
        assert_eq!(Permutation::reduce(&[9, 1]).unwrap(), p("21"));
        assert!(Permutation::reduce(&[1, 1]).is_err());
        assert_eq!(
            Permutation::reduce::<usize>(&[]).unwrap(),
            Permutation::empty()
        );
    }

    #[test]
    fn containment_examples() {
        assert!(p("24513").contains(&p("132")));
        assert!(!p("24513").contains(&p("321")));
        assert!(p("24513").contains(&Permutation::empty()));
        assert!(p("24513").avoids_all(&b("321")));
        assert!(!p("24513").avoids_all(&b("132;321")));
        assert!(Permutation::empty().avoids_all(&b("1")));
    }

    #[test]
    fn downfix_examples() {
        let (d, g) = p("24513").downfix_split(2).unwrap();
        assert_eq!(d, p("21"));
        assert_eq!(g.as_slice(), &[0, 2, 1]);

        let (d, g) = p("24513").downfix_split(5).unwrap();
        assert_eq!(d, p("24513"));
        assert_eq!(g.as_slice(), &[0, 0, 0, 0, 0, 0]);

        let (d, g) = p("24513").downfix_split(3).unwrap();
        assert_eq!(d, p("213"));
        assert_eq!(g.as_slice(), &[0, 2, 0, 0]);

        assert!(p("24513").downfix_split(6).is_err());
    }

    #[test]
    fn all_downfixes_of_24513() {
        let expected = ["", "1", "21", "213", "2413", "24513"];
        for (l, text) in expected.iter().enumerate() {
            let (d, _) = p("24513").downfix_split(l).unwrap();
            let want = if text.is_empty() {
                Permutation::empty()
            } else {
                p(text)
            };
            assert_eq!(d, want);
        }
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(p("123").apply_symmetry(Symmetry::Reverse), p("321"));
        assert_eq!(p("24513").apply_symmetry(Symmetry::Complement), p("42153"));
        // Value 1 sits at position 4, value 2 at position 1, and so on.
        assert_eq!(p("24513").apply_symmetry(Symmetry::Inverse), p("41523"));
    }

    #[test]
    fn inverse_is_involution() {
        for perm in all_permutations(5) {
            let twice = perm
                .apply_symmetry(Symmetry::Inverse)
                .apply_symmetry(Symmetry::Inverse);
            assert_eq!(twice, perm);
        }
    }

    #[test]
    fn symmetry_class_examples() {
        let class = b("123").symmetry_class();
        assert_eq!(class, vec![b("123"), b("321")]);
        assert_eq!(b("123").canonical_representative(), b("123"));

        assert_eq!(b("123;321").symmetry_class().len(), 1);

        let class = b("1423;2314").symmetry_class();
        assert!(class.len() <= 8);
        assert!(class.contains(&b("1423;2314")));
        // Orbit closure: each generator maps members to members.
        for member in &class {
            for op in Symmetry::ALL {
                assert!(class.contains(&member.map_symmetry(op)));
            }
        }
        assert_eq!(8 % class.len(), 0);
    }

    #[test]
    fn basis_drops_redundant_patterns() {
        // 1234 contains 123, so it never affects the class.
        let basis = b("123;1234");
        assert_eq!(basis.patterns(), &[p("123")]);
        assert_eq!(basis.max_len(), 3);
        let basis = b("132;132");
        assert_eq!(basis.len(), 1);
    }

    #[test]
    fn basis_text_forms() {
        assert_eq!(b("1423;2314").to_string(), "1423;2314");
        assert_eq!(b("2314;1423"), b("1423;2314"));
        assert!("".parse::<Basis>().is_err());
        assert!(";;".parse::<Basis>().is_err());
    }

    #[test]
    fn long_permutation_text_round_trip() {
        let long: Permutation = "2,4,5,1,3,6,7,8,9,10".parse().unwrap();
        assert_eq!(long.len(), 10);
        assert_eq!(long.to_string(), "2,4,5,1,3,6,7,8,9,10");
        assert_eq!(long.to_string().parse::<Permutation>().unwrap(), long);
    }

    #[test]
    fn family_counts() {
        assert_eq!(family_bases(&[3]).unwrap().len(), 6);
        assert_eq!(family_bases(&[3, 3]).unwrap().len(), 15);
        assert_eq!(family_representatives(&[3]).unwrap().len(), 2);
        assert_eq!(family_representatives(&[5]).unwrap().len(), 23);
    }

    #[test]
    fn refinement_positions() {
        assert_eq!(p("24513").refine_at(2), p("264513"));
        let refs = p("1").refinements();
        assert_eq!(refs, vec![p("21"), p("12")]);
        assert_eq!(Permutation::empty().refinements(), vec![p("1")]);
    }

    #[test]
    fn delete_positions() {
        assert_eq!(p("24513").delete_pos(1).unwrap(), p("3412"));
        assert_eq!(p("321").delete_pos(3).unwrap(), p("21"));
        assert!(p("321").delete_pos(4).is_err());
        assert!(p("321").delete_pos(0).is_err());
    }

    #[test]
    fn pinned_occurrence() {
        // 24513: the 132 occurrence 2-5-3 ends at the last position.
        let seq = [2usize, 4, 5, 1, 3];
        assert!(occurs(&seq, &[1, 3, 2], Some((4, 2))));
        // No occurrence of 132 uses position 3 (the value 1) as its first element
        // followed by a descent pair ending later... 1,3 -> needs two more after.
        assert!(!occurs(&seq, &[3, 2, 1], Some((2, 0))));
    }
}
