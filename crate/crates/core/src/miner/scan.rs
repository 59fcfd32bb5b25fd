//! One pass over a projected database that finds every extension item and
//! accumulates its RSU and TRSU.

use crate::bounds::{trsu_value, PeuProfile};
use crate::qsdb::ItemId;
use crate::seqstore::{ExtKind, ProjectedDb, SeqProjection, SeqStore};

/// An extension item found by a scan with its accumulated bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub item: ItemId,
    pub kind: ExtKind,
    pub rsu: u64,
    /// Only filled when the scan computed TRSU.
    pub trsu: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ScanMode {
    pub trsu: bool,
    /// Record which projections contain each extension.
    pub record: bool,
}

/// Projection indices of each candidate. A recording scan appends raw
/// `(key, projection)` pairs; `retain_sorted` buckets them by candidate.
#[derive(Debug, Default)]
pub(crate) struct Occurrences {
    pairs: Vec<(u32, u32)>,
    /// `(key, lo, hi)` sorted by key, ranges into `projs`.
    groups: Vec<(u32, u32, u32)>,
    projs: Vec<u32>,
}

impl Occurrences {
    fn key(item: u32, kind: ExtKind) -> u32 {
        item * 2 + matches!(kind, ExtKind::S) as u32
    }

    fn clear(&mut self) {
        self.pairs.clear();
        self.groups.clear();
        self.projs.clear();
    }

    /// Keeps the pairs of `keep` candidates, grouped by candidate and in
    /// projection order within each group. Linear in the recorded pairs.
    pub fn retain_sorted(&mut self, keep: &[Candidate]) {
        let mut keys: Vec<u32> = keep
            .iter()
            .map(|c| Self::key(c.item.get(), c.kind))
            .collect();
        keys.sort_unstable();
        let bucket = |k: u32| keys.binary_search(&k).ok();
        let mut counts = vec![0u32; keys.len() + 1];
        let mut slot: Vec<u32> = Vec::with_capacity(self.pairs.len());
        for &(k, _) in &self.pairs {
            let b = bucket(k).map_or(u32::MAX, |b| b as u32);
            if b != u32::MAX {
                counts[b as usize + 1] += 1;
            }
            slot.push(b);
        }
        for b in 1..counts.len() {
            counts[b] += counts[b - 1];
        }
        self.groups = keys
            .iter()
            .enumerate()
            .map(|(b, &k)| (k, counts[b], counts[b + 1]))
            .collect();
        let mut fill = counts;
        self.projs = vec![0; *fill.last().unwrap_or(&0) as usize];
        for (&(_, p), &b) in self.pairs.iter().zip(&slot) {
            if b != u32::MAX {
                self.projs[fill[b as usize] as usize] = p;
                fill[b as usize] += 1;
            }
        }
        // the pairs are dead weight while the children recurse
        self.pairs = Vec::new();
    }

    pub fn projections_of(&self, item: ItemId, kind: ExtKind) -> impl Iterator<Item = usize> + '_ {
        let key = Self::key(item.get(), kind);
        let range = match self.groups.binary_search_by_key(&key, |g| g.0) {
            Ok(g) => self.groups[g].1 as usize..self.groups[g].2 as usize,
            Err(_) => 0..0,
        };
        self.projs[range].iter().map(|&p| p as usize)
    }

    pub fn heap_bytes(&self) -> usize {
        self.pairs.capacity() * 8 + self.groups.capacity() * 12 + self.projs.capacity() * 4
    }
}

#[derive(Clone, Copy, Default)]
struct Acc {
    rsu: u64,
    trsu: u64,
    stamp: u32,
    touched: bool,
}

/// Reusable scratch space sized by the largest item id.
pub(crate) struct Scanner {
    acc_i: Vec<Acc>,
    acc_s: Vec<Acc>,
    touched_i: Vec<u32>,
    touched_s: Vec<u32>,
    stamp: u32,
    profile: PeuProfile,
}

impl Scanner {
    pub fn new(max_item: u32) -> Scanner {
        let n = max_item as usize + 1;
        Scanner {
            acc_i: vec![Acc::default(); n],
            acc_s: vec![Acc::default(); n],
            touched_i: Vec::new(),
            touched_s: Vec::new(),
            stamp: 0,
            profile: PeuProfile {
                peu: 0,
                at_first: false,
                suffix: Vec::new(),
            },
        }
    }

    fn next_stamp(&mut self) -> u32 {
        if self.stamp == u32::MAX {
            for a in self.acc_i.iter_mut().chain(self.acc_s.iter_mut()) {
                a.stamp = 0;
            }
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    /// Scans `pdb`, skipping items flagged in `removed`. Candidates come back
    /// I-Extensions first, each group ascending by item.
    pub fn scan(
        &mut self,
        store: &SeqStore,
        pdb: &ProjectedDb,
        removed: &[bool],
        mode: ScanMode,
        occ: &mut Occurrences,
    ) -> Vec<Candidate> {
        occ.clear();
        for (pi, proj) in pdb.projections.iter().enumerate() {
            self.scan_one(store, pi as u32, proj, removed, mode, occ);
        }
        let mut out = Vec::with_capacity(self.touched_i.len() + self.touched_s.len());
        for (touched, acc, kind) in [
            (&mut self.touched_i, &mut self.acc_i, ExtKind::I),
            (&mut self.touched_s, &mut self.acc_s, ExtKind::S),
        ] {
            touched.sort_unstable();
            for &it in touched.iter() {
                let a = &mut acc[it as usize];
                out.push(Candidate {
                    item: ItemId::new(it).expect("real item"),
                    kind,
                    rsu: a.rsu,
                    trsu: mode.trsu.then_some(a.trsu),
                });
                a.rsu = 0;
                a.trsu = 0;
                a.touched = false;
            }
            touched.clear();
        }
        out
    }

    fn scan_one(
        &mut self,
        store: &SeqStore,
        pi: u32,
        proj: &SeqProjection,
        removed: &[bool],
        mode: ScanMode,
        occ: &mut Occurrences,
    ) {
        let sa = store.get(proj.seq);
        let entries = &proj.entries;
        if entries.is_empty() {
            return;
        }
        self.profile.refill(sa, proj);
        let peu = self.profile.peu;
        let stamp = self.next_stamp();

        for (j, e) in entries.iter().enumerate() {
            let end = sa.element_end(e.index as usize);
            for q in e.index as usize + 1..end {
                let it = sa.item(q);
                if removed[it as usize] {
                    continue;
                }
                let a = &mut self.acc_i[it as usize];
                if a.stamp == stamp {
                    continue;
                }
                if !a.touched {
                    a.touched = true;
                    self.touched_i.push(it);
                }
                a.stamp = stamp;
                a.rsu += peu;
                if mode.trsu {
                    a.trsu += trsu_value(sa, proj, &self.profile, j, q as u32, it, ExtKind::I);
                }
                if mode.record {
                    occ.pairs.push((Occurrences::key(it, ExtKind::I), pi));
                }
            }
        }

        let start = sa.element_end(entries[0].index as usize);
        let mut j = 0;
        for q in start..=sa.len() {
            while j + 1 < entries.len() && (entries[j + 1].index as usize) < q {
                j += 1;
            }
            let it = sa.item(q);
            if removed[it as usize] {
                continue;
            }
            let a = &mut self.acc_s[it as usize];
            if a.stamp == stamp {
                continue;
            }
            if !a.touched {
                a.touched = true;
                self.touched_s.push(it);
            }
            a.stamp = stamp;
            a.rsu += peu;
            if mode.trsu {
                a.trsu += trsu_value(sa, proj, &self.profile, j, q as u32, it, ExtKind::S);
            }
            if mode.record {
                occ.pairs.push((Occurrences::key(it, ExtKind::S), pi));
            }
        }
    }
}
