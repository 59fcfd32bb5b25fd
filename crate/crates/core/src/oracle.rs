//! Brute-force reference miner for small databases.
//!
//! Nothing here shares code with the seq-array miner: utilities come from
//! enumerating every instance of a pattern, and the candidate patterns are
//! enumerated twice, once from the sequences' own subsequences and once by
//! unpruned growth from the empty pattern, and the two must agree.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::miner::MinUtility;
use crate::pattern::Pattern;
use crate::qsdb::{ItemId, QSequence, Qsdb, UtilityTable};
use crate::seqstore::ExtKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sequences: usize,
    pub max_distinct_items: usize,
    /// Items per sequence.
    pub max_sequence_length: usize,
    /// Longer patterns are not enumerated.
    pub max_pattern_length: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_sequences: 8,
            max_distinct_items: 8,
            max_sequence_length: 10,
            max_pattern_length: 6,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is {actual}, above the oracle limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error("the two enumerations disagree on pattern {0}")]
    Disagreement(Pattern),
}

impl OracleLimits {
    pub fn check(&self, db: &Qsdb) -> Result<(), OracleError> {
        let over = |what, actual, limit| {
            if actual > limit {
                Err(OracleError::LimitExceeded {
                    what,
                    actual,
                    limit,
                })
            } else {
                Ok(())
            }
        };
        over("sequence count", db.len(), self.max_sequences)?;
        over(
            "distinct item count",
            db.distinct_items().len(),
            self.max_distinct_items,
        )?;
        let longest = db.sequences().iter().map(QSequence::len).max().unwrap_or(0);
        over("sequence length", longest, self.max_sequence_length)
    }
}

fn eu(table: &UtilityTable, item: ItemId) -> u64 {
    table.get(item).expect("validated database")
}

/// Utility of `pattern` at one instance, `elements[k]` being the 0-based
/// element matched by the pattern's k-th itemset. `None` if the positions
/// are not an instance.
pub fn instance_utility(
    pattern: &Pattern,
    elements: &[usize],
    seq: &QSequence,
    table: &UtilityTable,
) -> Option<u64> {
    if elements.len() != pattern.size() || elements.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    let mut total = 0;
    for (set, &j) in pattern.itemsets().iter().zip(elements) {
        let element = seq.elements().get(j)?;
        for &i in set {
            total += eu(table, i) * element.quantity(i)? as u64;
        }
    }
    Some(total)
}

/// Every instance of `pattern` in `seq`, as element positions.
pub fn instances(pattern: &Pattern, seq: &QSequence) -> Vec<Vec<usize>> {
    fn walk(
        sets: &[Vec<ItemId>],
        seq: &QSequence,
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((set, rest)) = sets.split_first() else {
            out.push(cur.clone());
            return;
        };
        for j in from..seq.elements().len() {
            let e = &seq.elements()[j];
            if set.iter().all(|&i| e.quantity(i).is_some()) {
                cur.push(j);
                walk(rest, seq, j + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if !pattern.is_empty() {
        walk(pattern.itemsets(), seq, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// `u(t, S)`, or `None` when `S` does not contain `t`.
pub fn sequence_utility(pattern: &Pattern, seq: &QSequence, table: &UtilityTable) -> Option<u64> {
    instances(pattern, seq)
        .iter()
        .map(|pos| instance_utility(pattern, pos, seq, table).expect("an instance"))
        .max()
}

/// `u(t, D)`.
pub fn exact_utility(pattern: &Pattern, db: &Qsdb) -> u64 {
    db.sequences()
        .iter()
        .filter_map(|s| sequence_utility(pattern, s, db.utilities()))
        .sum()
}

/// Greedy leftmost containment test, kept apart from `instances` so the
/// extension-driven enumeration does not lean on it.
fn contains(seq: &QSequence, pattern: &Pattern) -> bool {
    let mut sets = pattern.itemsets().iter().peekable();
    for e in seq.elements() {
        match sets.peek() {
            None => break,
            Some(set) if set.iter().all(|&i| e.items().any(|x| x == i)) => {
                sets.next();
            }
            Some(_) => {}
        }
    }
    sets.peek().is_none()
}

/// All distinct subsequences of each sequence, up to `cap` items.
pub fn enumerate_by_embedding(db: &Qsdb, cap: usize) -> BTreeSet<Pattern> {
    fn walk(
        seq: &QSequence,
        from: usize,
        sets: &mut Vec<Vec<ItemId>>,
        len: usize,
        cap: usize,
        out: &mut BTreeSet<Pattern>,
    ) {
        for j in from..seq.elements().len() {
            let items: Vec<ItemId> = seq.elements()[j].items().collect();
            for mask in 1u32..(1 << items.len()) {
                let n = mask.count_ones() as usize;
                if len + n > cap {
                    continue;
                }
                let subset: Vec<ItemId> = (0..items.len())
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| items[b])
                    .collect();
                sets.push(subset);
                out.insert(Pattern::new(sets.clone()).expect("sorted subsets"));
                walk(seq, j + 1, sets, len + n, cap, out);
                sets.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    for seq in db.sequences() {
        walk(seq, 0, &mut Vec::new(), 0, cap, &mut out);
    }
    out
}

/// Unpruned growth from the empty pattern, keeping every contained child.
pub fn enumerate_by_extension(db: &Qsdb, cap: usize) -> BTreeSet<Pattern> {
    fn grow(db: &Qsdb, items: &[ItemId], p: &mut Pattern, cap: usize, out: &mut BTreeSet<Pattern>) {
        if p.len() >= cap {
            return;
        }
        for kind in [ExtKind::I, ExtKind::S] {
            for &i in items {
                if !p.can_extend(i, kind) {
                    continue;
                }
                p.push(i, kind);
                if db.sequences().iter().any(|s| contains(s, p)) {
                    out.insert(p.clone());
                    grow(db, items, p, cap, out);
                }
                p.pop();
            }
        }
    }
    let items: Vec<ItemId> = db.distinct_items().into_iter().collect();
    let mut out = BTreeSet::new();
    grow(db, &items, &mut Pattern::empty(), cap, &mut out);
    out
}

/// Every pattern contained in some sequence, in canonical order, after
/// checking that both enumeration strategies produce the same set.
pub fn enumerate_patterns(db: &Qsdb, limits: &OracleLimits) -> Result<Vec<Pattern>, OracleError> {
    limits.check(db)?;
    let a = enumerate_by_embedding(db, limits.max_pattern_length);
    let b = enumerate_by_extension(db, limits.max_pattern_length);
    if let Some(p) = a.symmetric_difference(&b).next() {
        return Err(OracleError::Disagreement(p.clone()));
    }
    Ok(a.into_iter().collect())
}

/// Every enumerated pattern with its exact utility.
pub fn pattern_utilities(
    db: &Qsdb,
    limits: &OracleLimits,
) -> Result<Vec<(Pattern, u64)>, OracleError> {
    Ok(enumerate_patterns(db, limits)?
        .into_iter()
        .map(|p| {
            let u = exact_utility(&p, db);
            (p, u)
        })
        .collect())
}

pub fn mine_bruteforce(
    db: &Qsdb,
    min: &MinUtility,
    limits: &OracleLimits,
) -> Result<Vec<(Pattern, u64)>, OracleError> {
    let mut all = pattern_utilities(db, limits)?;
    all.retain(|&(_, u)| min.passes(u));
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::{resolve_threshold, Threshold};
    use crate::qsdb::fixture::{self, *};
    use crate::qsdb::parse_database_str;

    fn p(s: &[&[u32]]) -> Pattern {
        Pattern::from_ids(s).unwrap()
    }

    fn at(db: &Qsdb, ratio: &str) -> Vec<(Pattern, u64)> {
        let min = resolve_threshold(&Threshold::ratio(ratio).unwrap(), db);
        let limits = OracleLimits {
            max_pattern_length: 10,
            ..OracleLimits::default()
        };
        mine_bruteforce(db, &min, &limits).unwrap()
    }

    #[test]
    fn instance_utilities_on_fixture() {
        let db = fixture::database();
        let s1 = &db.sequences()[0];
        let s3 = &db.sequences()[2];
        let t = db.utilities();
        assert_eq!(instance_utility(&p(&[&[A], &[A]]), &[0, 2], s1, t), Some(9));
        assert_eq!(instance_utility(&p(&[&[A], &[A]]), &[2, 0], s1, t), None);
        assert_eq!(instances(&p(&[&[A, D]]), s3), vec![vec![0], vec![2]]);
        assert_eq!(sequence_utility(&p(&[&[A, D]]), s3, t), Some(7));
        assert_eq!(exact_utility(&p(&[&[A, D]]), &db), 11);
        assert_eq!(exact_utility(&p(&[&[C], &[A]]), &db), 0);
        assert_eq!(exact_utility(&p(&[&[A, B], &[A, D]]), &db), 25);
    }

    #[test]
    fn tiny_enumerations() {
        let one = parse_database_str("1:1 -2\n", "1:1\n").unwrap();
        let limits = OracleLimits::default();
        assert_eq!(enumerate_patterns(&one, &limits).unwrap(), vec![p(&[&[1]])]);
        let pair = parse_database_str("1:1 2:1 -2\n", "1:1\n2:1\n").unwrap();
        assert_eq!(
            enumerate_patterns(&pair, &limits).unwrap(),
            vec![p(&[&[1]]), p(&[&[1, 2]]), p(&[&[2]])]
        );
    }

    #[test]
    fn strategies_agree_on_fixture() {
        let db = fixture::database();
        for cap in [1, 3, 6, 10] {
            let a = enumerate_by_embedding(&db, cap);
            let b = enumerate_by_extension(&db, cap);
            assert_eq!(a, b, "cap {cap}");
            assert!(a.iter().all(|q| q.len() <= cap));
        }
        assert_eq!(enumerate_by_embedding(&db, 1).len(), 6);
    }

    #[test]
    fn fixture_results() {
        let db = fixture::database();
        assert_eq!(at(&db, "0.5"), vec![(p(&[&[A, B], &[A, D]]), 25)]);
        assert!(at(&db, "1.0").is_empty());
        assert!(at(&db, "0.2").contains(&(p(&[&[A, D]]), 11)));
    }

    #[test]
    fn limits_are_enforced() {
        let db = fixture::database();
        let tight = OracleLimits {
            max_sequences: 3,
            ..OracleLimits::default()
        };
        assert!(matches!(
            enumerate_patterns(&db, &tight),
            Err(OracleError::LimitExceeded {
                actual: 4,
                limit: 3,
                ..
            })
        ));
        let short = OracleLimits {
            max_sequence_length: 5,
            ..OracleLimits::default()
        };
        assert!(short.check(&db).is_err());
        assert!(OracleLimits::default().check(&db).is_ok());
    }

    #[test]
    fn invariant_under_sequence_order() {
        let db = fixture::database();
        let mut seqs = db.sequences().to_vec();
        seqs.reverse();
        let rev = Qsdb::new(seqs, db.utilities().clone()).unwrap();
        assert_eq!(at(&db, "0.1"), at(&rev, "0.1"));
    }
}
