//! Utility upper bounds: SWU, PEU, RSU and TRSU.
//!
//! All remaining-utility reads go through the projection's current view,
//! so bounds computed inside a branch already exclude the items that
//! branch has pruned.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::qsdb::{ItemId, Qsdb};
use crate::seqstore::{
    extend_entries, ExtKind, ExtensionEntry, ProjectedDb, SeqArray, SeqProjection, SeqStore,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Swu,
    Peu,
    Rsu,
    Trsu,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Swu => "swu",
            BoundKind::Peu => "peu",
            BoundKind::Rsu => "rsu",
            BoundKind::Trsu => "trsu",
        })
    }
}

/// Sum of `u(S)` over the sequences containing each item.
pub fn swu_table(db: &Qsdb) -> BTreeMap<ItemId, u64> {
    let mut swu = BTreeMap::new();
    for (pos, seq) in db.sequences().iter().enumerate() {
        let mut items: Vec<ItemId> = seq.items().collect();
        items.sort_unstable();
        items.dedup();
        for i in items {
            *swu.entry(i).or_insert(0) += db.sequence_utility(pos);
        }
    }
    swu
}

/// `PEU(t, D)` for the pattern whose projection is `pdb`.
pub fn peu_of_pattern(store: &SeqStore, pdb: &ProjectedDb) -> u64 {
    pdb.projections
        .iter()
        .map(|p| p.peu(store.get(p.seq)))
        .sum()
}

/// `RSU(t ◇ item, S)`: `PEU(t, S)` if the sequence contains the extension.
pub fn rsu_in(sa: &SeqArray, proj: &SeqProjection, item: ItemId, kind: ExtKind) -> u64 {
    let mut buf = Vec::new();
    extend_entries(sa, &proj.entries, item.get(), kind, &mut buf);
    if buf.is_empty() {
        0
    } else {
        proj.peu(sa)
    }
}

pub fn rsu(store: &SeqStore, pdb: &ProjectedDb, item: ItemId, kind: ExtKind) -> u64 {
    pdb.projections
        .iter()
        .map(|p| rsu_in(store.get(p.seq), p, item, kind))
        .sum()
}

/// First occurrence of `item` that can extend entry `e`.
pub(crate) fn first_compatible(
    sa: &SeqArray,
    e: &ExtensionEntry,
    item: u32,
    kind: ExtKind,
) -> Option<u32> {
    let occ = sa.occurrences(item);
    let elem = sa.element(e.index as usize);
    match kind {
        ExtKind::S => {
            let pos = occ.partition_point(|&x| sa.element(x as usize) <= elem);
            occ.get(pos).copied()
        }
        ExtKind::I => {
            let pos = occ.partition_point(|&x| x <= e.index);
            occ.get(pos)
                .copied()
                .filter(|&x| sa.element(x as usize) == elem)
        }
    }
}

/// Per-projection facts every TRSU evaluation needs.
pub(crate) struct PeuProfile {
    pub peu: u64,
    /// `PEU(t, S)` is attained at the first extension position.
    pub at_first: bool,
    /// `suffix[j]` = max entry PEU over entries `j..`.
    pub suffix: Vec<u64>,
}

impl PeuProfile {
    pub fn new(sa: &SeqArray, proj: &SeqProjection) -> PeuProfile {
        let mut p = PeuProfile {
            peu: 0,
            at_first: false,
            suffix: Vec::new(),
        };
        p.refill(sa, proj);
        p
    }

    pub fn refill(&mut self, sa: &SeqArray, proj: &SeqProjection) {
        let n = proj.entries.len();
        self.suffix.clear();
        self.suffix.resize(n + 1, 0);
        for j in (0..n).rev() {
            self.suffix[j] = self.suffix[j + 1].max(proj.entry_peu(sa, &proj.entries[j]));
        }
        self.peu = self.suffix[0];
        self.at_first = n > 0 && proj.entry_peu(sa, &proj.entries[0]) == self.peu;
    }
}

/// TRSU of `t ◇ item` in one sequence, given the first extension index
/// `first_new` of the extended pattern and the entry `pi` with the largest
/// index below it.
///
/// When PEU is attained at the first extension position, the utility
/// strictly between entry `pi` and `first_new` is deducted. Entries after
/// `pi` may still reach into that gap, so each of them contributes its own
/// exact look-ahead `acu + u(S/_{x-1})` (x its first compatible occurrence)
/// and the bound is the larger of the two.
pub(crate) fn trsu_value(
    sa: &SeqArray,
    proj: &SeqProjection,
    profile: &PeuProfile,
    pi: usize,
    first_new: u32,
    item: u32,
    kind: ExtKind,
) -> u64 {
    if !profile.at_first {
        return profile.peu;
    }
    let entries = &proj.entries;
    let tail = proj.remaining(sa, first_new as usize - 1);
    let gap = proj.remaining(sa, entries[pi].index as usize) - tail;
    let mut value = profile.peu - gap;
    if profile.suffix[pi + 1] > value {
        for e in &entries[pi + 1..] {
            if let Some(x) = first_compatible(sa, e, item, kind) {
                value = value.max(e.acu + proj.remaining(sa, x as usize - 1));
            }
        }
    }
    value
}

/// `TRSU(t ◇ item, S)`; 0 when the sequence does not contain the extension.
pub fn trsu_in(sa: &SeqArray, proj: &SeqProjection, item: ItemId, kind: ExtKind) -> u64 {
    let mut buf = Vec::new();
    extend_entries(sa, &proj.entries, item.get(), kind, &mut buf);
    let Some(first) = buf.first() else {
        return 0;
    };
    let profile = PeuProfile::new(sa, proj);
    let pi = proj
        .entries
        .iter()
        .rposition(|e| e.index < first.index)
        .expect("a compatible predecessor precedes the first extension");
    trsu_value(sa, proj, &profile, pi, first.index, item.get(), kind)
}

pub fn trsu(store: &SeqStore, pdb: &ProjectedDb, item: ItemId, kind: ExtKind) -> u64 {
    pdb.projections
        .iter()
        .map(|p| trsu_in(store.get(p.seq), p, item, kind))
        .sum()
}

/// The bound selected by `kind` for `t ◇ item` (`Peu` ignores the item, `Swu`
/// is only meaningful at the root where it coincides with RSU).
pub fn bound(
    kind: BoundKind,
    store: &SeqStore,
    pdb: &ProjectedDb,
    item: ItemId,
    ext: ExtKind,
) -> u64 {
    match kind {
        BoundKind::Trsu => trsu(store, pdb, item, ext),
        BoundKind::Rsu | BoundKind::Swu => rsu(store, pdb, item, ext),
        BoundKind::Peu => peu_of_pattern(store, pdb),
    }
}
