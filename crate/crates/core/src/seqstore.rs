//! Seq-arrays and sequence projections.
//!
//! Item indices are 1-based as in the usual remaining-sequence notation:
//! slot 0 of every array is a sentinel (item 0, utility 0, element 0), so
//! `remaining(0)` is the utility of the whole sequence and the empty prefix
//! is encoded by a single virtual extension entry at index 0.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::qsdb::{ItemId, QSequence, Qsdb, UtilityTable};

/// Per-position record; the fields read together sit on one cache line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Slot {
    util: u64,
    rem: u64,
    item: u32,
    elem: u32,
    /// First item index of the element after the one holding this slot.
    next_elem: u32,
}

/// Array encoding of one q-sequence: items, utilities, remaining utilities
/// and element numbers by item index, plus an item-indices table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqArray {
    slots: Box<[Slot]>,
    // item-indices table in CSR form: keys ascending, then offsets, then positions
    table: Box<[u32]>,
    n_keys: u32,
}

impl SeqArray {
    /// Builds the arrays for `seq`. Every item must have an external utility.
    pub fn build(seq: &QSequence, table: &UtilityTable) -> SeqArray {
        let k = seq.len();
        let mut slots = Vec::with_capacity(k + 1);
        slots.push(Slot {
            next_elem: 1,
            ..Slot::default()
        });
        for (j, element) in seq.elements().iter().enumerate() {
            let end = (slots.len() + element.len()) as u32;
            for &(item, q) in element.entries() {
                let eu = table.get(item).expect("validated database");
                slots.push(Slot {
                    util: eu * q as u64,
                    rem: 0,
                    item: item.get(),
                    elem: j as u32 + 1,
                    next_elem: end,
                });
            }
        }
        for q in (0..k).rev() {
            slots[q].rem = slots[q + 1].rem + slots[q + 1].util;
        }

        let mut pairs: Vec<(u32, u32)> = (1..=k as u32)
            .map(|q| (slots[q as usize].item, q))
            .collect();
        pairs.sort_unstable();
        let mut keys = Vec::new();
        let mut offsets = Vec::new();
        let mut positions = Vec::with_capacity(k);
        for (n, &(item, q)) in pairs.iter().enumerate() {
            if n == 0 || pairs[n - 1].0 != item {
                keys.push(item);
                offsets.push(positions.len() as u32);
            }
            positions.push(q);
        }
        offsets.push(positions.len() as u32);
        let n_keys = keys.len() as u32;
        keys.extend(offsets);
        keys.extend(positions);

        SeqArray {
            slots: slots.into(),
            table: keys.into(),
            n_keys,
        }
    }

    /// Number of items `k`.
    #[inline]
    pub fn len(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn item(&self, q: usize) -> u32 {
        self.slots[q].item
    }

    #[inline]
    pub fn utility(&self, q: usize) -> u64 {
        self.slots[q].util
    }

    /// `u(S/_q)` with nothing removed.
    #[inline]
    pub fn remaining(&self, q: usize) -> u64 {
        self.slots[q].rem
    }

    #[inline]
    pub fn element(&self, q: usize) -> u32 {
        self.slots[q].elem
    }

    /// Index one past the last item of the element that holds `q`.
    #[inline]
    pub fn element_end(&self, q: usize) -> usize {
        self.slots[q].next_elem as usize
    }

    pub fn items_vec(&self) -> Vec<u32> {
        self.slots[1..].iter().map(|s| s.item).collect()
    }

    pub fn utilities_vec(&self) -> Vec<u64> {
        self.slots[1..].iter().map(|s| s.util).collect()
    }

    pub fn remaining_vec(&self) -> Vec<u64> {
        self.slots[1..].iter().map(|s| s.rem).collect()
    }

    pub fn elements_vec(&self) -> Vec<u32> {
        self.slots[1..].iter().map(|s| s.elem).collect()
    }

    /// Remaining utilities including the sentinel slot 0.
    pub(crate) fn remaining_all(&self) -> Vec<u64> {
        self.slots.iter().map(|s| s.rem).collect()
    }

    fn keys(&self) -> &[u32] {
        &self.table[..self.n_keys as usize]
    }

    /// Ascending item indices where `item` occurs.
    #[inline]
    pub fn occurrences(&self, item: u32) -> &[u32] {
        let n = self.n_keys as usize;
        match self.keys().binary_search(&item) {
            Ok(pos) => {
                let base = 2 * n + 1;
                let lo = self.table[n + pos] as usize;
                let hi = self.table[n + pos + 1] as usize;
                &self.table[base + lo..base + hi]
            }
            Err(_) => &[],
        }
    }

    pub fn distinct_items(&self) -> &[u32] {
        self.keys()
    }

    pub fn contains(&self, item: u32) -> bool {
        self.keys().binary_search(&item).is_ok()
    }

    /// Approximate heap footprint in bytes.
    pub fn heap_bytes(&self) -> usize {
        self.slots.len() * std::mem::size_of::<Slot>() + self.table.len() * 4
    }

    /// One line per array, then the item-indices table.
    pub fn debug_dump(&self) -> String {
        fn join<T: ToString>(xs: &[T]) -> String {
            xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
        }
        let mut out = String::new();
        writeln!(out, "item: {}", join(&self.items_vec())).unwrap();
        writeln!(out, "utility: {}", join(&self.utilities_vec())).unwrap();
        writeln!(out, "remaining: {}", join(&self.remaining_vec())).unwrap();
        writeln!(out, "element: {}", join(&self.elements_vec())).unwrap();
        let table: Vec<String> = self
            .keys()
            .iter()
            .map(|&i| format!("{i}->[{}]", join(self.occurrences(i))))
            .collect();
        writeln!(out, "indices: {}", table.join(" ")).unwrap();
        out
    }
}

/// Seq-arrays of a whole database, addressed by position.
#[derive(Clone, Debug)]
pub struct SeqStore {
    arrays: Vec<SeqArray>,
    max_item: u32,
}

impl SeqStore {
    pub fn build(db: &Qsdb) -> SeqStore {
        let arrays: Vec<SeqArray> = db
            .sequences()
            .iter()
            .map(|s| SeqArray::build(s, db.utilities()))
            .collect();
        let max_item = db.max_item().map_or(0, ItemId::get);
        SeqStore { arrays, max_item }
    }

    #[inline]
    pub fn get(&self, seq: u32) -> &SeqArray {
        &self.arrays[seq as usize]
    }

    pub fn arrays(&self) -> &[SeqArray] {
        &self.arrays
    }

    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn max_item(&self) -> u32 {
        self.max_item
    }

    pub fn heap_bytes(&self) -> usize {
        self.arrays.iter().map(SeqArray::heap_bytes).sum()
    }
}

/// Items treated as utility-zero in remaining-utility reads of one branch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RemainingOverlay {
    pub removed: BTreeSet<ItemId>,
}

impl RemainingOverlay {
    pub fn new() -> RemainingOverlay {
        RemainingOverlay::default()
    }

    pub fn with_items(items: impl IntoIterator<Item = ItemId>) -> RemainingOverlay {
        RemainingOverlay {
            removed: items.into_iter().collect(),
        }
    }

    pub fn is_removed(&self, item: u32) -> bool {
        ItemId::new(item).is_some_and(|i| self.removed.contains(&i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeError {
    pub index: usize,
    pub len: usize,
}

/// `u(S/_index)` with the overlay's items contributing nothing.
pub fn remaining_utility(
    sa: &SeqArray,
    index: usize,
    ov: &RemainingOverlay,
) -> Result<u64, RangeError> {
    if index > sa.len() {
        return Err(RangeError {
            index,
            len: sa.len(),
        });
    }
    let removed: u64 = (index + 1..=sa.len())
        .filter(|&q| ov.is_removed(sa.item(q)))
        .map(|q| sa.utility(q))
        .sum();
    Ok(sa.remaining(index) - removed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtKind {
    /// Add the item to the last itemset.
    I,
    /// Append the item as a new itemset.
    S,
}

/// `acu` = utility of the pattern at this extension position;
/// `index` = item index of the extension item.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionEntry {
    pub acu: u64,
    pub index: u32,
}

/// Extension entries of one projection; nearly always one or two.
pub type Entries = SmallVec<[ExtensionEntry; 2]>;

/// A pattern's view of one q-sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqProjection {
    pub seq: u32,
    pub entries: Entries,
    /// Remaining utilities with the branch's removed items subtracted;
    /// `None` means the sequence's own array applies.
    rem: Option<Arc<[u64]>>,
}

impl SeqProjection {
    pub fn new(seq: u32, entries: impl Into<Entries>) -> SeqProjection {
        SeqProjection {
            seq,
            entries: entries.into(),
            rem: None,
        }
    }

    /// Same remaining-utility view as `parent`, new entries.
    pub fn child(&self, entries: impl Into<Entries>) -> SeqProjection {
        SeqProjection {
            seq: self.seq,
            entries: entries.into(),
            rem: self.rem.clone(),
        }
    }

    #[inline]
    pub fn remaining(&self, sa: &SeqArray, q: usize) -> u64 {
        match &self.rem {
            Some(r) => r[q],
            None => sa.remaining(q),
        }
    }

    pub fn has_overlay(&self) -> bool {
        self.rem.is_some()
    }

    /// Recomputes the remaining-utility view from scratch under `ov`.
    pub fn set_overlay(&mut self, sa: &SeqArray, ov: &RemainingOverlay) {
        let mut rem = sa.remaining_all();
        let mut acc = 0;
        for q in (1..=sa.len()).rev() {
            rem[q] -= acc;
            if ov.is_removed(sa.item(q)) {
                acc += sa.utility(q);
            }
        }
        rem[0] -= acc;
        self.rem = if acc == 0 { None } else { Some(rem.into()) };
    }

    /// Subtracts the items flagged in `newly_removed` (indexed by item id)
    /// from the current view. Only positions after the first entry are
    /// inspected, since no read ever happens before it. Returns whether
    /// the view changed.
    pub fn remove_items(&mut self, sa: &SeqArray, newly_removed: &[bool]) -> bool {
        let first = match self.entries.first() {
            Some(e) => e.index as usize,
            None => return false,
        };
        let hit = (first + 1..=sa.len()).any(|q| newly_removed[sa.item(q) as usize]);
        if !hit {
            return false;
        }
        let total: u64 = (first + 1..=sa.len())
            .filter(|&q| newly_removed[sa.item(q) as usize])
            .map(|q| sa.utility(q))
            .sum();
        // removed utility strictly after q is `total` minus what lies in
        // (first, q]; positions before the first entry are never read
        let mut after = total;
        let old = self.rem.take();
        let rem: Arc<[u64]> = (0..=sa.len())
            .map(|q| {
                if q > first && newly_removed[sa.item(q) as usize] {
                    after -= sa.utility(q);
                }
                let base = match &old {
                    Some(r) => r[q],
                    None => sa.remaining(q),
                };
                if q < first {
                    base
                } else {
                    base - after
                }
            })
            .collect();
        self.rem = Some(rem);
        true
    }

    /// `u(t, S)`: the largest entry utility.
    pub fn utility(&self) -> u64 {
        self.entries.iter().map(|e| e.acu).max().unwrap_or(0)
    }

    /// `PEU(t, p, S)` for one entry.
    #[inline]
    pub fn entry_peu(&self, sa: &SeqArray, e: &ExtensionEntry) -> u64 {
        e.acu + self.remaining(sa, e.index as usize)
    }

    /// `PEU(t, S)`: max over entries of acu plus remaining utility.
    pub fn peu(&self, sa: &SeqArray) -> u64 {
        self.entries
            .iter()
            .map(|e| self.entry_peu(sa, e))
            .max()
            .unwrap_or(0)
    }

    pub fn heap_bytes(&self) -> usize {
        self.entries.spilled() as usize
            * self.entries.capacity()
            * std::mem::size_of::<ExtensionEntry>()
            + self.rem.as_ref().map_or(0, |r| r.len() * 8)
    }
}

/// Projections of one pattern, one per containing sequence, ascending by `seq`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProjectedDb {
    pub projections: Vec<SeqProjection>,
}

impl ProjectedDb {
    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn utility(&self) -> u64 {
        self.projections.iter().map(SeqProjection::utility).sum()
    }

    pub fn heap_bytes(&self) -> usize {
        self.projections
            .iter()
            .map(SeqProjection::heap_bytes)
            .sum::<usize>()
            + self.projections.capacity() * std::mem::size_of::<SeqProjection>()
    }

    /// Applies `ov` to every projection (recomputed from the base arrays).
    pub fn set_overlay(&mut self, store: &SeqStore, ov: &RemainingOverlay) {
        for p in &mut self.projections {
            let sa = store.get(p.seq);
            p.set_overlay(sa, ov);
        }
    }
}

/// The empty prefix: every sequence, one virtual entry at index 0.
pub fn project_root(store: &SeqStore) -> ProjectedDb {
    ProjectedDb {
        projections: (0..store.len() as u32)
            .map(|seq| SeqProjection::new(seq, vec![ExtensionEntry { acu: 0, index: 0 }]))
            .collect(),
    }
}

/// Writes the entries of `t ◇ item` into `out` (cleared first).
///
/// S-Extension: an occurrence `x` pairs with entries in earlier elements.
/// I-Extension: `x` pairs with an entry of the same element at a smaller
/// index. Each occurrence keeps the best compatible predecessor.
pub fn extend_entries(
    sa: &SeqArray,
    entries: &[ExtensionEntry],
    item: u32,
    kind: ExtKind,
    out: &mut Vec<ExtensionEntry>,
) {
    out.clear();
    let occ = sa.occurrences(item);
    if occ.is_empty() || entries.is_empty() {
        return;
    }
    match kind {
        ExtKind::S => {
            let mut best: Option<u64> = None;
            let mut e = 0;
            for &x in occ {
                let ex = sa.element(x as usize);
                while e < entries.len() && sa.element(entries[e].index as usize) < ex {
                    best = Some(best.map_or(entries[e].acu, |b| b.max(entries[e].acu)));
                    e += 1;
                }
                if let Some(b) = best {
                    out.push(ExtensionEntry {
                        acu: b + sa.utility(x as usize),
                        index: x,
                    });
                }
            }
        }
        ExtKind::I => {
            let mut e = 0;
            for &x in occ {
                let ex = sa.element(x as usize);
                while e < entries.len() && sa.element(entries[e].index as usize) < ex {
                    e += 1;
                }
                let mut best: Option<u64> = None;
                let mut f = e;
                while f < entries.len()
                    && sa.element(entries[f].index as usize) == ex
                    && entries[f].index < x
                {
                    best = Some(best.map_or(entries[f].acu, |b| b.max(entries[f].acu)));
                    f += 1;
                }
                if let Some(b) = best {
                    out.push(ExtensionEntry {
                        acu: b + sa.utility(x as usize),
                        index: x,
                    });
                }
            }
        }
    }
}

/// A child projection together with `u(t', S)` and `PEU(t', S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extended {
    pub projection: SeqProjection,
    pub utility: u64,
    pub peu: u64,
}

/// Projection of `t ◇ item`, or `None` when the sequence does not contain it.
pub fn extend_projection(
    sa: &SeqArray,
    proj: &SeqProjection,
    item: ItemId,
    kind: ExtKind,
) -> Option<Extended> {
    let mut entries = Vec::new();
    extend_entries(sa, &proj.entries, item.get(), kind, &mut entries);
    if entries.is_empty() {
        return None;
    }
    let projection = proj.child(entries);
    let utility = projection.utility();
    let peu = projection.peu(sa);
    Some(Extended {
        projection,
        utility,
        peu,
    })
}
