use std::fmt;

use crate::qsdb::{ItemId, ItemNames};
use crate::seqstore::ExtKind;

/// An ordered list of non-empty itemsets, ids strictly increasing within
/// each. Ordering is lexicographic over itemsets.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    itemsets: Vec<Vec<ItemId>>,
}

impl Pattern {
    pub fn empty() -> Pattern {
        Pattern::default()
    }

    /// Fails on empty itemsets or unsorted ids.
    pub fn new(itemsets: Vec<Vec<ItemId>>) -> Option<Pattern> {
        let ok = itemsets
            .iter()
            .all(|s| !s.is_empty() && s.windows(2).all(|w| w[0] < w[1]));
        ok.then_some(Pattern { itemsets })
    }

    /// Convenience for tests and fixtures: raw ids, each inner slice one itemset.
    pub fn from_ids(itemsets: &[&[u32]]) -> Option<Pattern> {
        let sets = itemsets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&i| ItemId::new(i))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Pattern::new(sets)
    }

    pub fn itemsets(&self) -> &[Vec<ItemId>] {
        &self.itemsets
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    /// Total number of items.
    pub fn len(&self) -> usize {
        self.itemsets.iter().map(Vec::len).sum()
    }

    /// Number of itemsets.
    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    pub fn last_item(&self) -> Option<ItemId> {
        self.itemsets.last().and_then(|s| s.last()).copied()
    }

    /// Whether `t ◇ item` under `kind` is a legal extension.
    pub fn can_extend(&self, item: ItemId, kind: ExtKind) -> bool {
        match kind {
            ExtKind::S => true,
            ExtKind::I => self.last_item().is_some_and(|last| last < item),
        }
    }

    pub fn extended(&self, item: ItemId, kind: ExtKind) -> Pattern {
        let mut p = self.clone();
        p.push(item, kind);
        p
    }

    /// In-place extension. Panics on an illegal I-Extension.
    pub fn push(&mut self, item: ItemId, kind: ExtKind) {
        assert!(self.can_extend(item, kind), "illegal extension");
        match kind {
            ExtKind::S => self.itemsets.push(vec![item]),
            ExtKind::I => self.itemsets.last_mut().expect("non-empty").push(item),
        }
    }

    /// Undoes the last `push`.
    pub fn pop(&mut self) {
        let last = self.itemsets.last_mut().expect("non-empty pattern");
        last.pop();
        if last.is_empty() {
            self.itemsets.pop();
        }
    }

    /// Whether `other` is reachable from `self` by a chain of extensions,
    /// i.e. `self` is an ancestor of `other` in the pattern tree.
    pub fn is_growth_prefix_of(&self, other: &Pattern) -> bool {
        let n = self.itemsets.len();
        if n == 0 {
            return true;
        }
        n <= other.itemsets.len()
            && self.itemsets[..n - 1] == other.itemsets[..n - 1]
            && other.itemsets[n - 1].starts_with(&self.itemsets[n - 1])
    }

    /// `i1 i2 -1 i3 -2`
    pub fn encode(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Option<Pattern> {
        let body = text.trim().strip_suffix("-2")?.trim_end();
        if body.is_empty() {
            return None;
        }
        let sets = body
            .split(" -1")
            .map(|set| {
                set.split_whitespace()
                    .map(|t| t.parse::<u32>().ok().and_then(ItemId::new))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Pattern::new(sets)
    }

    pub fn render(&self, names: &ItemNames) -> String {
        let sets: Vec<String> = self
            .itemsets
            .iter()
            .map(|s| {
                let items: Vec<String> = s
                    .iter()
                    .map(|&i| names.name(i).map_or_else(|| i.to_string(), str::to_string))
                    .collect();
                format!("{{{}}}", items.join(" "))
            })
            .collect();
        format!("<{}>", sets.join(","))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, set) in self.itemsets.iter().enumerate() {
            if n > 0 {
                f.write_str("-1 ")?;
            }
            for i in set {
                write!(f, "{i} ")?;
            }
        }
        f.write_str("-2")
    }
}
