//! Multiplicities as arbitrary sets of naturals, stored as normalized ranges.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultiplicityError {
    #[error("range {lo}..{hi} is empty (lower bound exceeds upper bound)")]
    Inverted { lo: u64, hi: u64 },
}

/// Inclusive range; `hi == None` means unbounded.
pub type Range = (u64, Option<u64>);

/// A set of permitted link counts.
///
/// Ranges are sorted by lower bound, pairwise non-overlapping and
/// non-adjacent; only the last one may be unbounded. Two sets are equal iff
/// they contain the same naturals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiplicitySet {
    ranges: Vec<Range>,
}

impl MultiplicitySet {
    pub fn empty() -> Self {
        Self { ranges: Vec::new() }
    }

    pub fn exactly(n: u64) -> Self {
        Self { ranges: vec![(n, Some(n))] }
    }

    pub fn between(lo: u64, hi: u64) -> Result<Self, MultiplicityError> {
        Self::from_ranges([(lo, Some(hi))])
    }

    pub fn at_least(lo: u64) -> Self {
        Self { ranges: vec![(lo, None)] }
    }

    /// `[0..*]`
    pub fn any() -> Self {
        Self::at_least(0)
    }

    pub fn from_ranges(ranges: impl IntoIterator<Item = Range>) -> Result<Self, MultiplicityError> {
        let mut raw: Vec<Range> = Vec::new();
        for (lo, hi) in ranges {
            if let Some(hi) = hi {
                if lo > hi {
                    return Err(MultiplicityError::Inverted { lo, hi });
                }
            }
            raw.push((lo, hi));
        }
        Ok(Self { ranges: normalize(raw) })
    }

    pub fn ranges(&self) -> &[Range] {
        &self.ranges
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo <= n && hi.is_none_or(|hi| n <= hi))
    }

    pub fn union(&self, other: &Self) -> Self {
        let merged = self.ranges.iter().chain(&other.ranges).copied().collect();
        Self { ranges: normalize(merged) }
    }

    /// `self ⊆ other`. A normalized set's ranges are maximal intervals, so each
    /// of our ranges must fit inside a single range of `other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.ranges.iter().all(|&(lo, hi)| {
            other.ranges.iter().any(|&(olo, ohi)| {
                olo <= lo
                    && match (hi, ohi) {
                        (_, None) => true,
                        (None, Some(_)) => false,
                        (Some(h), Some(oh)) => h <= oh,
                    }
            })
        })
    }

    pub fn with_zero(&self) -> Self {
        self.union(&Self::exactly(0))
    }
}

fn normalize(mut ranges: Vec<Range>) -> Vec<Range> {
    ranges.sort();
    let mut out: Vec<Range> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        if let Some(last) = out.last_mut() {
            let touches = match last.1 {
                None => true,
                Some(last_hi) => lo <= last_hi.saturating_add(1),
            };
            if touches {
                last.1 = match (last.1, hi) {
                    (None, _) | (_, None) => None,
                    (Some(a), Some(b)) => Some(a.max(b)),
                };
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

impl fmt::Display for MultiplicitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match hi {
                Some(hi) if hi == lo => write!(f, "{lo}")?,
                Some(hi) => write!(f, "{lo}..{hi}")?,
                None => write!(f, "{lo}..*")?,
            }
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const LIMIT: u64 = 20;

    fn explicit(m: &MultiplicitySet) -> BTreeSet<u64> {
        (0..=LIMIT).filter(|&n| m.contains(n)).collect()
    }

    fn range_strategy() -> impl Strategy<Value = Range> {
        (0..=LIMIT, prop::option::of(0..=LIMIT), any::<bool>()).prop_map(|(a, b, unbounded)| {
            if unbounded {
                (a, None)
            } else {
                let b = b.unwrap_or(a);
                (a.min(b), Some(a.max(b)))
            }
        })
    }

    fn set_strategy() -> impl Strategy<Value = (MultiplicitySet, BTreeSet<u64>, bool)> {
        prop::collection::vec(range_strategy(), 0..4).prop_map(|rs| {
            let mut members = BTreeSet::new();
            let mut unbounded = None::<u64>;
            for &(lo, hi) in &rs {
                match hi {
                    Some(hi) => members.extend(lo..=hi),
                    None => {
                        members.extend(lo..=LIMIT);
                        unbounded = Some(unbounded.map_or(lo, |u: u64| u.min(lo)));
                    }
                }
            }
            (MultiplicitySet::from_ranges(rs).unwrap(), members, unbounded.is_some())
        })
    }

    proptest! {
        #[test]
        fn member_matches_explicit_set((m, members, _) in set_strategy()) {
            prop_assert_eq!(explicit(&m), members);
        }

        #[test]
        fn union_matches_explicit_union((a, ea, _) in set_strategy(), (b, eb, _) in set_strategy()) {
            let u = a.union(&b);
            let expected: BTreeSet<u64> = ea.union(&eb).copied().collect();
            prop_assert_eq!(explicit(&u), expected);
        }

        #[test]
        fn subset_matches_explicit_subset((a, ea, ua) in set_strategy(), (b, eb, ub) in set_strategy()) {
            // Above LIMIT an unbounded set is only covered by another unbounded set.
            let expected = ea.is_subset(&eb) && (!ua || ub);
            prop_assert_eq!(a.is_subset(&b), expected);
        }

        #[test]
        fn normalized_form_is_canonical((m, _, _) in set_strategy()) {
            let rs = m.ranges();
            for w in rs.windows(2) {
                let hi = w[0].1.expect("only the last range may be unbounded");
                prop_assert!(hi + 1 < w[1].0);
            }
            let rebuilt = MultiplicitySet::from_ranges(rs.iter().copied()).unwrap();
            prop_assert_eq!(rebuilt, m);
        }
    }

    #[test]
    fn surface_forms_normalize() {
        let a = MultiplicitySet::from_ranges([(0, Some(0)), (1, Some(1))]).unwrap();
        let b = MultiplicitySet::between(0, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "[0..1]");
        assert_eq!(MultiplicitySet::exactly(1).to_string(), "[1]");
        assert_eq!(MultiplicitySet::any().to_string(), "[0..*]");
        let gap = MultiplicitySet::from_ranges([(5, None), (1, Some(2))]).unwrap();
        assert_eq!(gap.to_string(), "[1..2, 5..*]");
        assert_eq!(MultiplicitySet::empty().to_string(), "[]");
    }

    #[test]
    fn inverted_range_rejected() {
        assert_eq!(MultiplicitySet::between(3, 1), Err(MultiplicityError::Inverted { lo: 3, hi: 1 }));
    }

    #[test]
    fn with_zero_makes_optional() {
        let one = MultiplicitySet::exactly(1);
        assert_eq!(one.with_zero(), MultiplicitySet::between(0, 1).unwrap());
        assert!(one.is_subset(&one.with_zero()));
        assert!(!MultiplicitySet::exactly(2).is_subset(&one));
    }
}
