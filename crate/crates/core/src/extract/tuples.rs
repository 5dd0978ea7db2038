//! Picking additive tuples that each own a private element.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::set::GSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleSelection {
    /// Indices into the input family.
    pub chosen: Vec<usize>,
    /// `private[i]` lies in tuple `chosen[i]` and in no other chosen tuple.
    pub private: Vec<usize>,
    /// Elements involved in some tuple.
    pub involved: usize,
    /// `floor(|M| / s)`.
    pub target: usize,
}

impl TupleSelection {
    pub fn r(&self) -> usize {
        self.chosen.len()
    }
}

/// Checks even length, entries in `A`, pairwise distinct entries and equal half sums.
fn validate(a: &GSet, t: &[usize]) -> Result<()> {
    let g = a.group();
    let bad = |why: &str| Err(Error::InvalidArgument(format!("tuple {t:?}: {why}")));
    if t.is_empty() || !t.len().is_multiple_of(2) {
        return bad("length must be even and positive");
    }
    if !t.iter().all(|&x| a.contains(x)) {
        return bad("entry outside the set");
    }
    if t.iter().collect::<BTreeSet<_>>().len() != t.len() {
        return bad("entries must be pairwise distinct");
    }
    let h = t.len() / 2;
    let sum = |xs: &[usize]| xs.iter().fold(g.zero(), |acc, &x| g.add(acc, x));
    if sum(&t[..h]) != sum(&t[h..]) {
        return bad("half sums differ");
    }
    Ok(())
}

/// Repeatedly takes the element with the fewest memberships among the remaining
/// tuples, keeps its first tuple, and discards every tuple containing it.
///
/// Candidates are restricted to elements outside already chosen tuples, so each
/// private element stays out of all other chosen tuples. Ties go to the smaller rank.
pub fn select_disjoint_tuples(a: &GSet, tuples: &[Vec<usize>]) -> Result<TupleSelection> {
    let s = match tuples.first() {
        None => return Ok(TupleSelection { chosen: vec![], private: vec![], involved: 0, target: 0 }),
        Some(t) => t.len(),
    };
    for t in tuples {
        validate(a, t)?;
        if t.len() != s {
            return Err(Error::InvalidArgument("all tuples must have the same length".into()));
        }
    }
    let involved: BTreeSet<usize> = tuples.iter().flatten().copied().collect();
    let mut alive: Vec<bool> = vec![true; tuples.len()];
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    let (mut chosen, mut private) = (Vec::new(), Vec::new());
    loop {
        let mut best: Option<(usize, usize, usize)> = None; // (count, element, first tuple)
        for &x in &involved {
            if taken.contains(&x) {
                continue;
            }
            let mut count = 0;
            let mut first = None;
            for (i, t) in tuples.iter().enumerate() {
                if alive[i] && t.contains(&x) {
                    count += 1;
                    first.get_or_insert(i);
                }
            }
            if let Some(f) = first {
                if best.is_none_or(|(c, _, _)| count < c) {
                    best = Some((count, x, f));
                }
            }
        }
        let Some((_, x, f)) = best else { break };
        chosen.push(f);
        private.push(x);
        taken.extend(tuples[f].iter().copied());
        for (i, t) in tuples.iter().enumerate() {
            if t.contains(&x) {
                alive[i] = false;
            }
        }
    }
    Ok(TupleSelection { chosen, private, involved: involved.len(), target: involved.len() / s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissociation::dimension_profile;
    use crate::group::GroupSpec;

    fn private_ok(sel: &TupleSelection, tuples: &[Vec<usize>]) -> bool {
        sel.private.iter().enumerate().all(|(i, x)| {
            tuples[sel.chosen[i]].contains(x)
                && sel.chosen.iter().enumerate().all(|(j, &c)| j == i || !tuples[c].contains(x))
        })
    }

    #[test]
    fn tuple_examples() {
        let g = GroupSpec::cyclic(10).unwrap();
        let a = GSet::from_ranks(&g, 0..4).unwrap();
        let one = vec![vec![0, 3, 1, 2]];
        assert_eq!(select_disjoint_tuples(&a, &one).unwrap().r(), 1);

        let b = GSet::from_ranks(&g, 0..10).unwrap();
        let two = vec![vec![0, 3, 1, 2], vec![4, 9, 6, 7]];
        let sel = select_disjoint_tuples(&b, &two).unwrap();
        assert_eq!(sel.r(), 2);
        assert!(private_ok(&sel, &two));

        let mut all = Vec::new();
        for (p, q) in [(0, 3), (3, 0)] {
            for (r, s) in [(1, 2), (2, 1)] {
                all.push(vec![p, q, r, s]);
                all.push(vec![r, s, p, q]);
            }
        }
        let sel = select_disjoint_tuples(&a, &all).unwrap();
        assert_eq!(sel.r(), 1);
        assert_eq!(sel.target, 1);
        let dim = dimension_profile(&a).dim.value;
        // 0 is never in a dissociated set and 1 + 2 - 3 = 0, so dim = 2.
        assert_eq!(dim, 2);
        assert!(dim <= a.len() - sel.r());
    }

    #[test]
    fn malformed_tuples_rejected() {
        let a = GSet::from_ranks(&GroupSpec::cyclic(10).unwrap(), 0..4).unwrap();
        assert!(select_disjoint_tuples(&a, &[vec![0, 3, 1]]).is_err());
        assert!(select_disjoint_tuples(&a, &[vec![0, 3, 2, 1, 0, 0]]).is_err());
        assert!(select_disjoint_tuples(&a, &[vec![0, 1, 2, 3]]).is_err());
        assert!(select_disjoint_tuples(&a, &[vec![0, 3, 1, 9]]).is_err());
    }
}
