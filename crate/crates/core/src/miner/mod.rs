//! Depth-first pattern growth over the lexicographic sequence tree.
//!
//! Each node runs irrelevant-item pruning (IIP) on its projection, scans for
//! I- and S-Extension items, drops the ones whose bound (TRSU or RSU) misses
//! the threshold (EP), and evaluates the survivors: the utility test always
//! comes before the PEU test that decides whether to descend.

mod scan;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{swu_table, BoundKind};
use crate::pattern::Pattern;
use crate::qsdb::{ItemId, Qsdb};
use crate::seqstore::{extend_entries, project_root, ExtKind, ProjectedDb, SeqStore};

pub use scan::Candidate;
use scan::{Occurrences, ScanMode, Scanner};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid ratio `{0}`: expected a decimal in (0, 1]")]
    Ratio(String),
    #[error("minimum utility must be a positive integer")]
    MinUtil,
    #[error("the pruning bound must be trsu or rsu, not {0}")]
    Bound(BoundKind),
}

/// Either `ξ` as an exact decimal, or an absolute minimum utility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    /// `numer / 10^scale`, as written.
    Ratio {
        numer: u64,
        scale: u32,
    },
    Absolute(u64),
}

impl Threshold {
    pub fn ratio(text: &str) -> Result<Threshold, ConfigError> {
        let bad = || ConfigError::Ratio(text.to_string());
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
            || frac.len() > 18
            || int.len() > 2
        {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let numer: u64 = digits.parse().map_err(|_| bad())?;
        let scale = frac.len() as u32;
        let one = 10u64.pow(scale);
        if numer == 0 || numer > one {
            return Err(bad());
        }
        Ok(Threshold::Ratio { numer, scale })
    }

    pub fn absolute(min: u64) -> Result<Threshold, ConfigError> {
        if min == 0 {
            return Err(ConfigError::MinUtil);
        }
        Ok(Threshold::Absolute(min))
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Threshold::Ratio { numer, scale } => {
                let one = 10u64.pow(scale);
                if scale == 0 {
                    write!(f, "{numer}")
                } else {
                    write!(
                        f,
                        "{}.{:0width$}",
                        numer / one,
                        numer % one,
                        width = scale as usize
                    )
                }
            }
            Threshold::Absolute(u) => write!(f, "{u}"),
        }
    }
}

/// The resolved test `u ≥ ξ × u(D)`, evaluated in exact integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinUtility {
    // u passes iff u * lhs_scale >= rhs
    lhs_scale: u128,
    rhs: u128,
}

impl MinUtility {
    pub fn passes(&self, u: u64) -> bool {
        u as u128 * self.lhs_scale >= self.rhs
    }

    /// `ξ × u(D)` as a float, for display only.
    pub fn value(&self) -> f64 {
        self.rhs as f64 / self.lhs_scale as f64
    }
}

/// Turns the configured threshold into a predicate against `u(D)` of `db`.
pub fn resolve_threshold(threshold: &Threshold, db: &Qsdb) -> MinUtility {
    resolve_against(threshold, db.total_utility())
}

pub fn resolve_against(threshold: &Threshold, total: u64) -> MinUtility {
    match *threshold {
        Threshold::Ratio { numer, scale } => MinUtility {
            lhs_scale: 10u128.pow(scale),
            rhs: numer as u128 * total as u128,
        },
        Threshold::Absolute(u) => MinUtility {
            lhs_scale: 1,
            rhs: u as u128,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub threshold: Threshold,
    /// Bound used by early pruning; TRSU or RSU.
    pub bound: BoundKind,
    pub iip: bool,
    pub ep: bool,
    pub peu_prune: bool,
    pub swu_prefilter: bool,
    /// Cap on pattern length (total items); `None` is unlimited.
    pub max_pattern_length: Option<usize>,
    /// Worker threads for first-level branches; 1 is sequential.
    pub threads: usize,
}

impl MinerConfig {
    pub fn new(threshold: Threshold) -> MinerConfig {
        MinerConfig {
            threshold,
            bound: BoundKind::Trsu,
            iip: true,
            ep: true,
            peu_prune: true,
            swu_prefilter: true,
            max_pattern_length: None,
            threads: 1,
        }
    }

    /// Short label such as `trsu+iip+ep`.
    pub fn label(&self) -> String {
        let mut parts = vec![self.bound.to_string()];
        for (on, name) in [
            (self.iip, "iip"),
            (self.ep, "ep"),
            (self.peu_prune, "peu"),
            (self.swu_prefilter, "swu"),
        ] {
            if on {
                parts.push(name.to_string());
            }
        }
        parts.join("+")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self.bound {
            BoundKind::Trsu | BoundKind::Rsu => {}
            other => return Err(ConfigError::Bound(other)),
        }
        match self.threshold {
            Threshold::Ratio { numer, scale } if numer == 0 || numer > 10u64.pow(scale) => {
                Err(ConfigError::Ratio(self.threshold.to_string()))
            }
            Threshold::Absolute(0) => Err(ConfigError::MinUtil),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MineStats {
    /// Patterns whose utility was evaluated.
    pub candidates: u64,
    pub husps: u64,
    pub swu_removed: u64,
    pub iip_removed: u64,
    pub ep_discarded: u64,
    pub peu_stopped: u64,
    pub elapsed_ms: f64,
    /// Seq-arrays plus the largest simultaneous footprint of live projections.
    pub peak_memory_bytes: u64,
}

impl MineStats {
    fn absorb(&mut self, other: &MineStats) {
        self.candidates += other.candidates;
        self.husps += other.husps;
        self.iip_removed += other.iip_removed;
        self.ep_discarded += other.ep_discarded;
        self.peu_stopped += other.peu_stopped;
    }

    /// Stats without the timing and memory fields, which vary run to run.
    pub fn counters(&self) -> [u64; 6] {
        [
            self.candidates,
            self.husps,
            self.swu_removed,
            self.iip_removed,
            self.ep_discarded,
            self.peu_stopped,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HuspResult {
    /// Sorted by pattern, each pattern once.
    pub patterns: Vec<(Pattern, u64)>,
    pub stats: MineStats,
}

impl HuspResult {
    /// One `pattern #UTIL: u` line per HUSP.
    pub fn to_result_text(&self) -> String {
        let mut out = String::new();
        for (p, u) in &self.patterns {
            out.push_str(&format!("{p} #UTIL: {u}\n"));
        }
        out
    }

    pub fn utility_of(&self, p: &Pattern) -> Option<u64> {
        self.patterns
            .binary_search_by(|(q, _)| q.cmp(p))
            .ok()
            .map(|i| self.patterns[i].1)
    }
}

/// What the miner saw when it evaluated a candidate extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateEvent {
    pub parent: Pattern,
    pub item: ItemId,
    pub kind: ExtKind,
    pub rsu: u64,
    pub trsu: u64,
    pub parent_peu: u64,
    /// Survived early pruning.
    pub kept: bool,
}

/// A pattern whose utility was calculated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatedEvent {
    pub pattern: Pattern,
    pub utility: u64,
    pub peu: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MineEvent {
    Removed { prefix: Pattern, items: Vec<ItemId> },
    Candidate(CandidateEvent),
    Evaluated(EvaluatedEvent),
}

/// Removes every item whose SWU misses `min` (judged against the original
/// `u(D)`), dropping emptied elements and sequences.
pub fn swu_prefilter(db: &Qsdb, min: &MinUtility) -> (Qsdb, Vec<ItemId>) {
    let swu = swu_table(db);
    let dropped: Vec<ItemId> = swu
        .iter()
        .filter(|&(_, &u)| !min.passes(u))
        .map(|(&i, _)| i)
        .collect();
    if dropped.is_empty() {
        return (db.clone(), dropped);
    }
    let filtered = db.retain_items(|i| min.passes(swu.get(&i).copied().unwrap_or(0)));
    (filtered, dropped)
}

/// Runs the IIP pass on `pdb`: every item whose RSU misses the threshold
/// under both extension kinds is flagged in `removed` and subtracted from
/// the remaining utilities of the affected projections.
pub fn apply_iip(
    store: &SeqStore,
    pdb: &mut ProjectedDb,
    removed: &mut [bool],
    min: &MinUtility,
) -> Vec<ItemId> {
    let mut scanner = Scanner::new(store.max_item());
    let mut occ = Occurrences::default();
    iip_pass(store, pdb, removed, min, &mut scanner, &mut occ)
}

fn iip_pass(
    store: &SeqStore,
    pdb: &mut ProjectedDb,
    removed: &mut [bool],
    min: &MinUtility,
    scanner: &mut Scanner,
    occ: &mut Occurrences,
) -> Vec<ItemId> {
    let found = scanner.scan(store, pdb, removed, ScanMode::default(), occ);
    let dropped = irrelevant_items(&found, min);
    remove_from(store, pdb, removed, &dropped);
    dropped
}

/// Items whose RSU fails under both extension kinds.
fn irrelevant_items(found: &[Candidate], min: &MinUtility) -> Vec<ItemId> {
    let mut best: Vec<(ItemId, u64)> = found.iter().map(|c| (c.item, c.rsu)).collect();
    best.sort_unstable_by_key(|&(i, _)| i);
    let mut dropped = Vec::new();
    for group in best.chunk_by(|a, b| a.0 == b.0) {
        let rsu = group.iter().map(|g| g.1).max().unwrap_or(0);
        if !min.passes(rsu) {
            dropped.push(group[0].0);
        }
    }
    dropped
}

fn remove_from(store: &SeqStore, pdb: &mut ProjectedDb, removed: &mut [bool], dropped: &[ItemId]) {
    if dropped.is_empty() {
        return;
    }
    let mut newly = vec![false; removed.len()];
    for i in dropped {
        newly[i.index()] = true;
        removed[i.index()] = true;
    }
    for p in &mut pdb.projections {
        let sa = store.get(p.seq);
        p.remove_items(sa, &newly);
    }
}

/// Finds the extension items of `pdb` and splits them into survivors
/// (`iList`, `sList`) and the ones early pruning discards under `bound`.
pub fn scan_extensions(
    store: &SeqStore,
    pdb: &ProjectedDb,
    removed: &[bool],
    min: &MinUtility,
    bound: BoundKind,
) -> ExtensionLists {
    let mut scanner = Scanner::new(store.max_item());
    let mut occ = Occurrences::default();
    let mode = ScanMode {
        trsu: true,
        record: false,
    };
    let found = scanner.scan(store, pdb, removed, mode, &mut occ);
    let mut lists = ExtensionLists::default();
    for c in found {
        let b = match bound {
            BoundKind::Trsu => c.trsu.expect("trsu scanned"),
            _ => c.rsu,
        };
        let dest = match (min.passes(b), c.kind) {
            (false, _) => &mut lists.discarded,
            (true, ExtKind::I) => &mut lists.i_list,
            (true, ExtKind::S) => &mut lists.s_list,
        };
        dest.push(c);
    }
    lists
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtensionLists {
    pub i_list: Vec<Candidate>,
    pub s_list: Vec<Candidate>,
    pub discarded: Vec<Candidate>,
}

struct Engine<'a, 'o> {
    store: &'a SeqStore,
    cfg: &'a MinerConfig,
    min: MinUtility,
    removed: Vec<bool>,
    scanner: Scanner,
    prefix: Pattern,
    found: Vec<(Pattern, u64)>,
    stats: MineStats,
    live_bytes: usize,
    peak_bytes: usize,
    observer: Option<&'o mut (dyn FnMut(MineEvent) + 'o)>,
}

impl<'a, 'o> Engine<'a, 'o> {
    fn new(store: &'a SeqStore, cfg: &'a MinerConfig, min: MinUtility) -> Engine<'a, 'o> {
        Engine {
            store,
            cfg,
            min,
            removed: vec![false; store.max_item() as usize + 1],
            scanner: Scanner::new(store.max_item()),
            prefix: Pattern::empty(),
            found: Vec::new(),
            stats: MineStats::default(),
            live_bytes: 0,
            peak_bytes: 0,
            observer: None,
        }
    }

    fn emit(&mut self, ev: impl FnOnce() -> MineEvent) {
        if let Some(obs) = self.observer.as_mut() {
            obs(ev());
        }
    }

    fn track(&mut self, bytes: usize) {
        self.live_bytes += bytes;
        self.peak_bytes = self.peak_bytes.max(self.live_bytes);
    }

    fn at_length_cap(&self) -> bool {
        self.cfg
            .max_pattern_length
            .is_some_and(|cap| self.prefix.len() >= cap)
    }

    /// IIP, then the EP scan. Returns the surviving candidates (I first)
    /// and where each occurs. Newly removed items are returned for undo.
    fn prepare(&mut self, pdb: &mut ProjectedDb) -> (Vec<Candidate>, Occurrences, Vec<ItemId>) {
        let mut occ = Occurrences::default();
        let want_trsu = self.cfg.ep && self.cfg.bound == BoundKind::Trsu || self.observer.is_some();
        let mode = ScanMode {
            trsu: want_trsu,
            record: true,
        };
        // One scan serves both IIP and EP unless IIP removes something, in
        // which case the bounds are recomputed on the reduced projections.
        let mut found = self
            .scanner
            .scan(self.store, pdb, &self.removed, mode, &mut occ);
        let dropped = if self.cfg.iip {
            irrelevant_items(&found, &self.min)
        } else {
            Vec::new()
        };
        if !dropped.is_empty() {
            self.stats.iip_removed += dropped.len() as u64;
            remove_from(self.store, pdb, &mut self.removed, &dropped);
            let prefix = self.prefix.clone();
            let items = dropped.clone();
            self.emit(|| MineEvent::Removed { prefix, items });
            found = self
                .scanner
                .scan(self.store, pdb, &self.removed, mode, &mut occ);
        }
        let parent_peu = if self.observer.is_some() {
            pdb.projections
                .iter()
                .map(|p| p.peu(self.store.get(p.seq)))
                .sum()
        } else {
            0
        };
        let mut keep = Vec::with_capacity(found.len());
        for c in found {
            let bound = match self.cfg.bound {
                BoundKind::Trsu => c.trsu.unwrap_or(c.rsu),
                _ => c.rsu,
            };
            let kept = !self.cfg.ep || self.min.passes(bound);
            if !kept {
                self.stats.ep_discarded += 1;
            }
            if self.observer.is_some() {
                let ev = CandidateEvent {
                    parent: self.prefix.clone(),
                    item: c.item,
                    kind: c.kind,
                    rsu: c.rsu,
                    trsu: c.trsu.unwrap_or(c.rsu),
                    parent_peu,
                    kept,
                };
                self.emit(|| MineEvent::Candidate(ev));
            }
            if kept {
                keep.push(c);
            }
        }
        occ.retain_sorted(&keep);
        (keep, occ, dropped)
    }

    fn undo(&mut self, dropped: &[ItemId]) {
        for i in dropped {
            self.removed[i.index()] = false;
        }
    }

    fn pattern_growth(&mut self, pdb: &mut ProjectedDb) {
        if pdb.is_empty() || self.at_length_cap() {
            return;
        }
        let (keep, occ, dropped) = self.prepare(pdb);
        let occ_bytes = occ.heap_bytes();
        self.track(occ_bytes);
        for c in &keep {
            self.utility_calculation(c.item, c.kind, pdb, &occ);
        }
        self.live_bytes -= occ_bytes;
        self.undo(&dropped);
    }

    /// Builds the projection of `prefix ◇ item`, reports it if it is a HUSP
    /// and descends if its PEU allows.
    fn utility_calculation(
        &mut self,
        item: ItemId,
        kind: ExtKind,
        parent: &ProjectedDb,
        occ: &Occurrences,
    ) {
        self.stats.candidates += 1;
        let mut child = ProjectedDb::default();
        let mut utility = 0u64;
        let mut peu = 0u64;
        let mut buf = Vec::new();
        for pi in occ.projections_of(item, kind) {
            let p = &parent.projections[pi];
            let sa = self.store.get(p.seq);
            extend_entries(sa, &p.entries, item.get(), kind, &mut buf);
            debug_assert!(!buf.is_empty());
            let proj = p.child(crate::seqstore::Entries::from_slice(&buf));
            utility += proj.utility();
            peu += proj.peu(sa);
            child.projections.push(proj);
        }
        self.prefix.push(item, kind);
        if self.observer.is_some() {
            let ev = EvaluatedEvent {
                pattern: self.prefix.clone(),
                utility,
                peu,
            };
            self.emit(|| MineEvent::Evaluated(ev));
        }
        if self.min.passes(utility) {
            self.found.push((self.prefix.clone(), utility));
            self.stats.husps += 1;
        }
        if !self.cfg.peu_prune || self.min.passes(peu) {
            let bytes = child.heap_bytes();
            self.track(bytes);
            self.pattern_growth(&mut child);
            self.live_bytes -= bytes;
        } else {
            self.stats.peu_stopped += 1;
        }
        self.prefix.pop();
    }
}

/// Mines every high-utility sequential pattern of `db`.
/// Patterns found under one first-level candidate, with its counters and peak bytes.
type Branch = (Vec<(Pattern, u64)>, MineStats, usize);

pub fn mine(db: &Qsdb, cfg: &MinerConfig) -> Result<HuspResult, ConfigError> {
    run(db, cfg, None)
}

/// Sequential mining that reports IIP removals, scanned candidates and
/// evaluated patterns to `observer`.
pub fn mine_observed(
    db: &Qsdb,
    cfg: &MinerConfig,
    observer: &mut dyn FnMut(MineEvent),
) -> Result<HuspResult, ConfigError> {
    run(db, cfg, Some(observer))
}

fn run(
    db: &Qsdb,
    cfg: &MinerConfig,
    observer: Option<&mut dyn FnMut(MineEvent)>,
) -> Result<HuspResult, ConfigError> {
    cfg.validate()?;
    let started = Instant::now();
    let min = resolve_threshold(&cfg.threshold, db);
    let (work, swu_dropped) = if cfg.swu_prefilter {
        swu_prefilter(db, &min)
    } else {
        (db.clone(), Vec::new())
    };
    let store = SeqStore::build(&work);
    let mut root = project_root(&store);

    let mut engine = Engine::new(&store, cfg, min);
    engine.track(store.heap_bytes() + root.heap_bytes());
    let parallel = observer.is_none() && cfg.threads > 1;
    engine.observer = observer;

    let mut stats;
    let mut found;
    if parallel {
        let (keep, occ, _dropped) = engine.prepare(&mut root);
        let removed = engine.removed.clone();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .expect("thread pool");
        let branches: Vec<Branch> = pool.install(|| {
            keep.par_iter()
                .map(|c| {
                    let mut sub = Engine::new(&store, cfg, min);
                    sub.removed = removed.clone();
                    sub.utility_calculation(c.item, c.kind, &root, &occ);
                    (sub.found, sub.stats, sub.peak_bytes)
                })
                .collect()
        });
        stats = engine.stats.clone();
        found = Vec::new();
        let mut branch_peak = 0;
        for (f, s, peak) in branches {
            found.extend(f);
            stats.absorb(&s);
            branch_peak = branch_peak.max(peak);
        }
        stats.peak_memory_bytes = (engine.peak_bytes + occ.heap_bytes() + branch_peak) as u64;
    } else {
        engine.pattern_growth(&mut root);
        stats = engine.stats.clone();
        stats.peak_memory_bytes = engine.peak_bytes as u64;
        found = std::mem::take(&mut engine.found);
    }
    found.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    found.dedup_by(|a, b| a.0 == b.0);
    stats.husps = found.len() as u64;
    stats.swu_removed = swu_dropped.len() as u64;
    stats.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(HuspResult {
        patterns: found,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsdb::fixture::{self, *};
    use crate::seqstore::{extend_projection, RemainingOverlay};

    fn ratio(s: &str) -> Threshold {
        Threshold::ratio(s).unwrap()
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!(ratio("0.2"), Threshold::Ratio { numer: 2, scale: 1 });
        assert_eq!(ratio("1"), Threshold::Ratio { numer: 1, scale: 0 });
        assert_eq!(
            ratio("1.00"),
            Threshold::Ratio {
                numer: 100,
                scale: 2
            }
        );
        assert_eq!(ratio(".5"), Threshold::Ratio { numer: 5, scale: 1 });
        for bad in ["0", "0.0", "1.5", "-0.1", "1e-3", "", ".", "abc", " 0.1"] {
            assert!(Threshold::ratio(bad).is_err(), "{bad}");
        }
        assert_eq!(ratio("0.050").to_string(), "0.050");
        assert!(Threshold::absolute(0).is_err());
    }

    #[test]
    fn exact_threshold_comparison() {
        let m = resolve_against(&ratio("0.2"), 47);
        assert!((m.value() - 9.4).abs() < 1e-12);
        assert!(m.passes(11));
        assert!(m.passes(10));
        assert!(!m.passes(9));
        let half = resolve_against(&ratio("0.5"), 47);
        assert!((half.value() - 23.5).abs() < 1e-12);
        assert!(!half.passes(23));
        assert!(half.passes(24));
        let all = resolve_against(&ratio("1.0"), 47);
        assert!(!all.passes(46));
        assert!(all.passes(47));
        let abs = resolve_against(&Threshold::Absolute(10), 47);
        assert!(abs.passes(10) && !abs.passes(9));
    }

    #[test]
    fn prefilter_drops_c_only() {
        let db = fixture::database();
        let min = resolve_threshold(&ratio("0.5"), &db);
        let (filtered, dropped) = swu_prefilter(&db, &min);
        assert_eq!(dropped, vec![item(C)]);
        assert!(!filtered.distinct_items().contains(&item(C)));
        assert_eq!(filtered.distinct_items().len(), 5);
        let tiny = resolve_threshold(&ratio("0.000001"), &db);
        let (same, none) = swu_prefilter(&db, &tiny);
        assert!(none.is_empty());
        assert_eq!(same, db);
    }

    fn a_projection(store: &SeqStore) -> ProjectedDb {
        let root = project_root(store);
        ProjectedDb {
            projections: root
                .projections
                .iter()
                .filter_map(|p| extend_projection(store.get(p.seq), p, item(A), ExtKind::S))
                .map(|e| e.projection)
                .collect(),
        }
    }

    #[test]
    fn iip_on_a_removes_e_and_f() {
        let db = fixture::database();
        let min = resolve_threshold(&ratio("0.5"), &db);
        let (work, _) = swu_prefilter(&db, &min);
        let store = SeqStore::build(&work);
        let mut a = a_projection(&store);
        let mut removed = vec![false; store.max_item() as usize + 1];
        let dropped = apply_iip(&store, &mut a, &mut removed, &min);
        assert_eq!(dropped, vec![item(E), item(F)]);
        assert!(removed[E as usize] && removed[F as usize]);
        assert_eq!(crate::bounds::peu_of_pattern(&store, &a), 27);
        let mut expected = a_projection(&store);
        expected.set_overlay(&store, &RemainingOverlay::with_items([item(E), item(F)]));
        for (x, y) in a.projections.iter().zip(&expected.projections) {
            let sa = store.get(x.seq);
            // positions before the first entry are never read
            for q in x.entries[0].index as usize..=sa.len() {
                assert_eq!(x.remaining(sa, q), y.remaining(sa, q));
            }
        }
        let tiny = resolve_threshold(&ratio("0.000001"), &db);
        let mut b = a_projection(&store);
        let mut none = vec![false; store.max_item() as usize + 1];
        assert!(apply_iip(&store, &mut b, &mut none, &tiny).is_empty());
    }

    #[test]
    fn ep_scan_on_reduced_a() {
        let db = fixture::database();
        let min = resolve_threshold(&ratio("0.5"), &db);
        let (work, _) = swu_prefilter(&db, &min);
        let store = SeqStore::build(&work);
        let mut a = a_projection(&store);
        let mut removed = vec![false; store.max_item() as usize + 1];
        apply_iip(&store, &mut a, &mut removed, &min);
        let lists = scan_extensions(&store, &a, &removed, &min, BoundKind::Trsu);
        let view = |l: &[Candidate]| -> Vec<(u32, u64)> {
            l.iter().map(|c| (c.item.get(), c.trsu.unwrap())).collect()
        };
        assert_eq!(view(&lists.i_list), vec![(B, 27), (D, 25)]);
        assert_eq!(view(&lists.s_list), vec![(D, 24)]);
        assert_eq!(view(&lists.discarded), vec![(A, 21)]);
        assert!(lists.i_list.iter().all(|c| c.item.get() > A));
        let rsu = scan_extensions(&store, &a, &removed, &min, BoundKind::Rsu);
        assert!(rsu.discarded.is_empty());
        assert_eq!(rsu.i_list.len() + rsu.s_list.len(), 4);
    }

    #[test]
    fn scan_matches_per_item_bounds() {
        let db = fixture::database();
        let store = SeqStore::build(&db);
        let a = a_projection(&store);
        let removed = vec![false; store.max_item() as usize + 1];
        let min = resolve_threshold(&ratio("0.01"), &db);
        let lists = scan_extensions(&store, &a, &removed, &min, BoundKind::Trsu);
        for c in lists.i_list.iter().chain(&lists.s_list) {
            assert_eq!(c.rsu, crate::bounds::rsu(&store, &a, c.item, c.kind));
            assert_eq!(
                c.trsu.unwrap(),
                crate::bounds::trsu(&store, &a, c.item, c.kind)
            );
        }
    }

    #[test]
    fn fixture_at_half() {
        let db = fixture::database();
        let res = mine(&db, &MinerConfig::new(ratio("0.5"))).unwrap();
        let expected = Pattern::from_ids(&[&[A, B], &[A, D]]).unwrap();
        assert_eq!(res.patterns, vec![(expected, 25)]);
        assert_eq!(res.to_result_text(), "1 2 -1 1 4 -2 #UTIL: 25\n");
        assert_eq!(res.stats.swu_removed, 1);
        assert!(res.stats.husps <= res.stats.candidates);
    }

    #[test]
    fn walkthrough_events_at_half() {
        let db = fixture::database();
        // without the prefilter, root IIP removes c alone; with it, u(S4)
        // shrinks and f's root RSU (23) fails too
        let mut cfg = MinerConfig::new(ratio("0.5"));
        cfg.swu_prefilter = false;
        let mut events = Vec::new();
        let res = mine_observed(&db, &cfg, &mut |e| events.push(e)).unwrap();
        assert_eq!(res.patterns.len(), 1);
        let a = Pattern::from_ids(&[&[A]]).unwrap();
        assert_eq!(
            events[0],
            MineEvent::Removed {
                prefix: Pattern::empty(),
                items: vec![item(C)],
            }
        );
        let evaluated = |p: &Pattern| {
            events.iter().find_map(|e| match e {
                MineEvent::Evaluated(ev) if &ev.pattern == p => Some((ev.utility, ev.peu)),
                _ => None,
            })
        };
        // root: only <{a}> survives
        let root_kept: Vec<u32> = events
            .iter()
            .filter_map(|e| match e {
                MineEvent::Candidate(c) if c.parent.is_empty() && c.kept => Some(c.item.get()),
                _ => None,
            })
            .collect();
        assert_eq!(root_kept, vec![A]);
        assert_eq!(evaluated(&a), Some((12, 29)));
        assert!(events.contains(&MineEvent::Removed {
            prefix: a.clone(),
            items: vec![item(E), item(F)],
        }));
        let kept_under_a: Vec<(ExtKind, u32)> = events
            .iter()
            .filter_map(|e| match e {
                MineEvent::Candidate(c) if c.parent == a && c.kept => Some((c.kind, c.item.get())),
                _ => None,
            })
            .collect();
        assert_eq!(
            kept_under_a,
            vec![(ExtKind::I, B), (ExtKind::I, D), (ExtKind::S, D)]
        );
        assert_eq!(
            evaluated(&Pattern::from_ids(&[&[A, B]]).unwrap()),
            Some((16, 27))
        );
        assert_eq!(
            evaluated(&Pattern::from_ids(&[&[A, D]]).unwrap()).map(|x| x.1),
            Some(17)
        );
        assert_eq!(
            evaluated(&Pattern::from_ids(&[&[A], &[D]]).unwrap()).map(|x| x.1),
            Some(19)
        );
        assert_eq!(
            evaluated(&Pattern::from_ids(&[&[A, B], &[A, D]]).unwrap()).map(|x| x.0),
            Some(25)
        );
    }

    #[test]
    fn empty_database_mines_nothing() {
        let db = Qsdb::empty(Default::default());
        let res = mine(&db, &MinerConfig::new(ratio("0.5"))).unwrap();
        assert!(res.patterns.is_empty());
        assert_eq!(res.stats.candidates, 0);
    }

    #[test]
    fn rejects_peu_as_ep_bound() {
        let mut cfg = MinerConfig::new(ratio("0.5"));
        cfg.bound = BoundKind::Peu;
        assert_eq!(
            mine(&fixture::database(), &cfg),
            Err(ConfigError::Bound(BoundKind::Peu))
        );
    }

    #[test]
    fn parallel_matches_sequential() {
        let db = fixture::database();
        let mut cfg = MinerConfig::new(ratio("0.1"));
        let seq = mine(&db, &cfg).unwrap();
        cfg.threads = 4;
        let par = mine(&db, &cfg).unwrap();
        assert_eq!(seq.patterns, par.patterns);
        assert_eq!(seq.stats.counters(), par.stats.counters());
    }
}

#[cfg(test)]
mod prefilter_interplay {
    use super::*;
    use crate::qsdb::fixture::{self, *};

    #[test]
    fn prefilter_lets_root_iip_drop_f() {
        let mut events = Vec::new();
        let cfg = MinerConfig::new(Threshold::ratio("0.5").unwrap());
        mine_observed(&fixture::database(), &cfg, &mut |e| events.push(e)).unwrap();
        assert_eq!(
            events[0],
            MineEvent::Removed {
                prefix: Pattern::empty(),
                items: vec![item(F)],
            }
        );
    }
}
