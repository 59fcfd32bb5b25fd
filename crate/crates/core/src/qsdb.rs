//! Quantitative sequence databases: data model, text formats and the
//! elementary utility arithmetic everything else builds on.
//!
//! Sequence file: one q-sequence per line, tokens `item:quantity`, `-1`
//! between elements, `-2` at the end, single spaces between tokens. Lines
//! starting with `#` and blank lines are skipped.
//!
//! ```text
//! # S1
//! 1:2 2:2 -1 6:1 -1 1:1 4:1 -2
//! ```
//!
//! Utility file: one `item:externalUtility` pair per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Positive item identifier. Integer order is the global item order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(u32);

impl ItemId {
    pub fn new(id: u32) -> Option<ItemId> {
        (id >= 1).then_some(ItemId(id))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("line {line}: item {item} has no external utility")]
    UnknownItem { line: usize, item: u32 },
    #[error("line {line}, column {column}: {what} must be a positive integer")]
    NonPositive {
        line: usize,
        column: usize,
        what: &'static str,
    },
    #[error("line {line}: element {element} is empty")]
    EmptyElement { line: usize, element: usize },
    #[error("line {line}: items of element {element} are not strictly increasing")]
    UnsortedElement { line: usize, element: usize },
    #[error("line {line}: duplicate external utility for item {item}")]
    DuplicateUtility { line: usize, item: u32 },
    #[error("duplicate sequence id {0}")]
    DuplicateSid(u64),
    #[error("sequence {0} has no items")]
    EmptySequence(u64),
    #[error("utility arithmetic overflowed 64 bits")]
    Overflow,
    #[error("item {item} does not occur in element {element}")]
    ItemAbsent { item: u32, element: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One element (q-itemset): items strictly increasing, quantities ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QElement {
    entries: Vec<(ItemId, u32)>,
}

/// Structural violation of a [`QElement`] invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementFault {
    Empty,
    Unsorted,
    ZeroQuantity,
}

impl QElement {
    pub fn new(entries: Vec<(ItemId, u32)>) -> Result<QElement, ElementFault> {
        if entries.is_empty() {
            return Err(ElementFault::Empty);
        }
        if entries.iter().any(|&(_, q)| q == 0) {
            return Err(ElementFault::ZeroQuantity);
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(ElementFault::Unsorted);
        }
        Ok(QElement { entries })
    }

    pub fn entries(&self) -> &[(ItemId, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn quantity(&self, item: ItemId) -> Option<u32> {
        self.entries
            .binary_search_by_key(&item, |&(i, _)| i)
            .ok()
            .map(|pos| self.entries[pos].1)
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSequence {
    pub sid: u64,
    elements: Vec<QElement>,
}

impl QSequence {
    pub fn new(sid: u64, elements: Vec<QElement>) -> Result<QSequence, DataError> {
        if elements.is_empty() {
            return Err(DataError::EmptySequence(sid));
        }
        Ok(QSequence { sid, elements })
    }

    pub fn elements(&self) -> &[QElement] {
        &self.elements
    }

    /// Total number of items across all elements.
    pub fn len(&self) -> usize {
        self.elements.iter().map(QElement::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.elements.iter().flat_map(QElement::items)
    }
}

/// External utility per item.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilityTable {
    eu: BTreeMap<ItemId, u64>,
}

impl UtilityTable {
    pub fn new() -> UtilityTable {
        UtilityTable::default()
    }

    /// Inserts or replaces; zero utilities are rejected.
    pub fn insert(&mut self, item: ItemId, eu: u64) -> Result<(), DataError> {
        if eu == 0 {
            return Err(DataError::NonPositive {
                line: 0,
                column: 0,
                what: "external utility",
            });
        }
        self.eu.insert(item, eu);
        Ok(())
    }

    pub fn get(&self, item: ItemId) -> Option<u64> {
        self.eu.get(&item).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, u64)> + '_ {
        self.eu.iter().map(|(&i, &u)| (i, u))
    }

    pub fn len(&self) -> usize {
        self.eu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eu.is_empty()
    }

    pub fn max_item(&self) -> Option<ItemId> {
        self.eu.keys().next_back().copied()
    }
}

impl FromIterator<(ItemId, u64)> for UtilityTable {
    fn from_iter<T: IntoIterator<Item = (ItemId, u64)>>(iter: T) -> Self {
        UtilityTable {
            eu: iter.into_iter().collect(),
        }
    }
}

/// `u(i, j, S) = eu(i) × q(i, j, S)`; `elem_index` is 1-based.
pub fn item_utility(
    item: ItemId,
    elem_index: usize,
    seq: &QSequence,
    table: &UtilityTable,
) -> Result<u64, DataError> {
    let absent = || DataError::ItemAbsent {
        item: item.get(),
        element: elem_index,
    };
    let element = elem_index
        .checked_sub(1)
        .and_then(|j| seq.elements.get(j))
        .ok_or_else(absent)?;
    let q = element.quantity(item).ok_or_else(absent)?;
    let eu = table.get(item).ok_or(DataError::UnknownItem {
        line: 0,
        item: item.get(),
    })?;
    eu.checked_mul(q as u64).ok_or(DataError::Overflow)
}

/// `u(S)`: sum of every item utility in the sequence.
pub fn sequence_utility(seq: &QSequence, table: &UtilityTable) -> Result<u64, DataError> {
    let mut total = 0u64;
    for (j, element) in seq.elements.iter().enumerate() {
        for &(item, _) in element.entries() {
            let u = item_utility(item, j + 1, seq, table)?;
            total = total.checked_add(u).ok_or(DataError::Overflow)?;
        }
    }
    Ok(total)
}

/// A validated quantitative sequence database. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qsdb {
    sequences: Vec<QSequence>,
    utilities: UtilityTable,
    seq_utilities: Vec<u64>,
    total_utility: u64,
}

impl Qsdb {
    pub fn new(sequences: Vec<QSequence>, utilities: UtilityTable) -> Result<Qsdb, DataError> {
        let mut sids = BTreeSet::new();
        let mut seq_utilities = Vec::with_capacity(sequences.len());
        let mut total = 0u64;
        for seq in &sequences {
            if !sids.insert(seq.sid) {
                return Err(DataError::DuplicateSid(seq.sid));
            }
            let u = sequence_utility(seq, &utilities)?;
            seq_utilities.push(u);
            total = total.checked_add(u).ok_or(DataError::Overflow)?;
        }
        Ok(Qsdb {
            sequences,
            utilities,
            seq_utilities,
            total_utility: total,
        })
    }

    pub fn empty(utilities: UtilityTable) -> Qsdb {
        Qsdb {
            sequences: Vec::new(),
            utilities,
            seq_utilities: Vec::new(),
            total_utility: 0,
        }
    }

    pub fn sequences(&self) -> &[QSequence] {
        &self.sequences
    }

    pub fn utilities(&self) -> &UtilityTable {
        &self.utilities
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// `u(D)`, computed once at construction.
    pub fn total_utility(&self) -> u64 {
        self.total_utility
    }

    /// `u(S)` of the sequence at `pos` (position in the database, not sid).
    pub fn sequence_utility(&self, pos: usize) -> u64 {
        self.seq_utilities[pos]
    }

    /// Recomputes `u(D)` from scratch in a single pass over every item.
    pub fn database_utility(&self) -> u64 {
        self.sequences
            .iter()
            .flat_map(|s| s.elements.iter())
            .flat_map(|e| e.entries.iter())
            .map(|&(i, q)| self.utilities.get(i).unwrap_or(0) * q as u64)
            .sum()
    }

    /// Largest item id that occurs in any sequence.
    pub fn max_item(&self) -> Option<ItemId> {
        self.sequences.iter().flat_map(|s| s.items()).max()
    }

    pub fn distinct_items(&self) -> BTreeSet<ItemId> {
        self.sequences.iter().flat_map(|s| s.items()).collect()
    }

    /// Same utility table, subset of sequences chosen by `keep`.
    pub fn filter_sequences(&self, mut keep: impl FnMut(&QSequence) -> bool) -> Qsdb {
        let mut sequences = Vec::new();
        let mut seq_utilities = Vec::new();
        for (s, &u) in self.sequences.iter().zip(&self.seq_utilities) {
            if keep(s) {
                sequences.push(s.clone());
                seq_utilities.push(u);
            }
        }
        let total_utility = seq_utilities.iter().sum();
        Qsdb {
            sequences,
            utilities: self.utilities.clone(),
            seq_utilities,
            total_utility,
        }
    }

    /// Drops every occurrence of the items rejected by `keep`, then any
    /// element or sequence left empty.
    pub fn retain_items(&self, mut keep: impl FnMut(ItemId) -> bool) -> Qsdb {
        let sequences: Vec<QSequence> = self
            .sequences
            .iter()
            .filter_map(|s| {
                let elements: Vec<QElement> = s
                    .elements
                    .iter()
                    .filter_map(|e| {
                        let entries: Vec<_> = e
                            .entries
                            .iter()
                            .copied()
                            .filter(|&(i, _)| keep(i))
                            .collect();
                        (!entries.is_empty()).then_some(QElement { entries })
                    })
                    .collect();
                (!elements.is_empty()).then_some(QSequence {
                    sid: s.sid,
                    elements,
                })
            })
            .collect();
        Qsdb::new(sequences, self.utilities.clone()).expect("a subset of a valid database is valid")
    }
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> DataError {
    DataError::Syntax {
        line,
        column,
        msg: msg.into(),
    }
}

/// Splits on single spaces, yielding (1-based column, token). Doubled,
/// leading or trailing spaces and tabs are syntax errors.
fn tokens(line_no: usize, line: &str) -> Result<Vec<(usize, &str)>, DataError> {
    let mut out = Vec::new();
    let mut col = 1;
    for tok in line.split(' ') {
        if tok.is_empty() {
            return Err(syntax(
                line_no,
                col,
                "expected a single space between tokens",
            ));
        }
        if let Some(off) = tok.find(|c: char| c.is_whitespace()) {
            return Err(syntax(line_no, col + off, "unexpected whitespace"));
        }
        out.push((col, tok));
        col += tok.len() + 1;
    }
    Ok(out)
}

fn parse_u64(line: usize, column: usize, text: &str, what: &'static str) -> Result<u64, DataError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, column, format!("invalid {what} `{text}`")));
    }
    let v: u64 = text
        .parse()
        .map_err(|_| syntax(line, column, format!("{what} `{text}` out of range")))?;
    if v == 0 {
        return Err(DataError::NonPositive { line, column, what });
    }
    Ok(v)
}

fn parse_pair(
    line: usize,
    column: usize,
    tok: &str,
    what: &'static str,
) -> Result<(ItemId, u64), DataError> {
    let (item, value) = tok.split_once(':').ok_or_else(|| {
        syntax(
            line,
            column,
            format!("expected `item:{what}`, found `{tok}`"),
        )
    })?;
    let item = parse_u64(line, column, item, "item id")?;
    let item = u32::try_from(item).map_err(|_| syntax(line, column, "item id out of range"))?;
    let value = parse_u64(line, column + tok.find(':').unwrap_or(0) + 1, value, what)?;
    Ok((ItemId(item), value))
}

/// Lines that carry content, with 1-based line numbers.
fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String), DataError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(n, line)| match line {
            Err(e) => Some(Err(DataError::Io(e))),
            Ok(l) if l.is_empty() || l.starts_with('#') => None,
            Ok(l) => Some(Ok((n + 1, l))),
        })
}

pub fn parse_utilities(reader: impl BufRead) -> Result<UtilityTable, DataError> {
    let mut eu = BTreeMap::new();
    for line in content_lines(reader) {
        let (n, text) = line?;
        let toks = tokens(n, &text)?;
        if toks.len() != 1 {
            return Err(syntax(
                n,
                toks[1].0,
                "expected exactly one `item:utility` per line",
            ));
        }
        let (item, u) = parse_pair(n, 1, toks[0].1, "external utility")?;
        if eu.insert(item, u).is_some() {
            return Err(DataError::DuplicateUtility {
                line: n,
                item: item.get(),
            });
        }
    }
    Ok(UtilityTable { eu })
}

fn parse_sequence_line(
    n: usize,
    text: &str,
    sid: u64,
    table: &UtilityTable,
) -> Result<QSequence, DataError> {
    let toks = tokens(n, text)?;
    let mut elements = Vec::new();
    let mut current: Vec<(ItemId, u32)> = Vec::new();
    let mut terminated = false;
    for &(col, tok) in &toks {
        if terminated {
            return Err(syntax(n, col, "tokens after sequence terminator `-2`"));
        }
        match tok {
            "-1" | "-2" => {
                let element = elements.len() + 1;
                match QElement::new(std::mem::take(&mut current)) {
                    Ok(e) => elements.push(e),
                    Err(ElementFault::Empty) => {
                        return Err(DataError::EmptyElement { line: n, element })
                    }
                    Err(ElementFault::Unsorted) => {
                        return Err(DataError::UnsortedElement { line: n, element })
                    }
                    Err(ElementFault::ZeroQuantity) => unreachable!("quantities checked on parse"),
                }
                terminated = tok == "-2";
            }
            _ => {
                let (item, q) = parse_pair(n, col, tok, "quantity")?;
                let q = u32::try_from(q).map_err(|_| syntax(n, col, "quantity out of range"))?;
                if table.get(item).is_none() {
                    return Err(DataError::UnknownItem {
                        line: n,
                        item: item.get(),
                    });
                }
                current.push((item, q));
            }
        }
    }
    if !terminated {
        let col = text.len() + 1;
        return Err(syntax(n, col, "missing sequence terminator `-2`"));
    }
    QSequence::new(sid, elements)
}

/// Parses a sequence file against a utility file and validates the result.
pub fn parse_database(sequences: impl BufRead, utilities: impl BufRead) -> Result<Qsdb, DataError> {
    let table = parse_utilities(utilities)?;
    let mut seqs = Vec::new();
    for line in content_lines(sequences) {
        let (n, text) = line?;
        let sid = seqs.len() as u64;
        seqs.push(parse_sequence_line(n, &text, sid, &table)?);
    }
    Qsdb::new(seqs, table)
}

pub fn parse_database_str(sequences: &str, utilities: &str) -> Result<Qsdb, DataError> {
    parse_database(sequences.as_bytes(), utilities.as_bytes())
}

pub fn write_sequences(db: &Qsdb, mut out: impl Write) -> io::Result<()> {
    for seq in &db.sequences {
        let mut line = String::new();
        for (j, element) in seq.elements.iter().enumerate() {
            if j > 0 {
                line.push_str("-1 ");
            }
            for &(item, q) in element.entries() {
                line.push_str(&format!("{item}:{q} "));
            }
        }
        line.push_str("-2");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_utilities(table: &UtilityTable, mut out: impl Write) -> io::Result<()> {
    for (item, eu) in table.iter() {
        writeln!(out, "{item}:{eu}")?;
    }
    Ok(())
}

pub fn sequences_to_string(db: &Qsdb) -> String {
    let mut buf = Vec::new();
    write_sequences(db, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn utilities_to_string(table: &UtilityTable) -> String {
    let mut buf = Vec::new();
    write_utilities(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Name ↔ id mapping (`name:id` per line) so letter-named data reads naturally.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemNames {
    by_name: BTreeMap<String, ItemId>,
    by_id: BTreeMap<ItemId, String>,
}

impl ItemNames {
    pub fn parse(reader: impl BufRead) -> Result<ItemNames, DataError> {
        let mut names = ItemNames::default();
        for line in content_lines(reader) {
            let (n, text) = line?;
            let (name, id) = text
                .split_once(':')
                .ok_or_else(|| syntax(n, 1, "expected `name:id`"))?;
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(syntax(n, 1, format!("invalid item name `{name}`")));
            }
            let id = parse_u64(n, name.len() + 2, id, "item id")?;
            let id = ItemId(u32::try_from(id).map_err(|_| syntax(n, 1, "item id out of range"))?);
            names.insert(name, id).map_err(|msg| syntax(n, 1, msg))?;
        }
        Ok(names)
    }

    /// `a`, `b`, `c`, … mapped to 1, 2, 3, …
    pub fn alphabetic(count: u32) -> ItemNames {
        let mut names = ItemNames::default();
        for id in 1..=count.min(26) {
            let name = char::from(b'a' + (id - 1) as u8).to_string();
            names.insert(&name, ItemId(id)).expect("distinct letters");
        }
        names
    }

    fn insert(&mut self, name: &str, id: ItemId) -> Result<(), String> {
        if self.by_name.contains_key(name) {
            return Err(format!("duplicate item name `{name}`"));
        }
        if self.by_id.contains_key(&id) {
            return Err(format!("duplicate item id {id}"));
        }
        self.by_name.insert(name.to_string(), id);
        self.by_id.insert(id, name.to_string());
        Ok(())
    }

    pub fn id(&self, name: &str) -> Option<ItemId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: ItemId) -> Option<&str> {
        self.by_id.get(&id).map(String::as_str)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Converts SPMF's inline-utility format (`item[utility]` tokens, `-1`
/// after each itemset, `-2`, optional `SUtility:n`) into a database with a
/// separate utility table. Each item's external utility becomes the gcd of
/// its occurrence utilities, so every quantity stays an exact integer.
pub fn import_spmf_inline(reader: impl BufRead) -> Result<Qsdb, DataError> {
    let mut raw: Vec<Vec<Vec<(ItemId, u64)>>> = Vec::new();
    let mut eu: BTreeMap<ItemId, u64> = BTreeMap::new();
    for line in content_lines(reader) {
        let (n, text) = line?;
        let mut elements = Vec::new();
        let mut current: Vec<(ItemId, u64)> = Vec::new();
        let mut declared = None;
        let mut col = 1;
        for tok in text.split_whitespace() {
            match tok {
                "-1" => {
                    if current.is_empty() {
                        return Err(DataError::EmptyElement {
                            line: n,
                            element: elements.len() + 1,
                        });
                    }
                    elements.push(std::mem::take(&mut current));
                }
                "-2" => {
                    if !current.is_empty() {
                        elements.push(std::mem::take(&mut current));
                    }
                }
                _ if tok.starts_with("SUtility:") => {
                    declared = Some(parse_u64(
                        n,
                        col,
                        &tok["SUtility:".len()..],
                        "sequence utility",
                    )?);
                }
                _ => {
                    let (item, rest) = tok.split_once('[').ok_or_else(|| {
                        syntax(n, col, format!("expected `item[utility]`, found `{tok}`"))
                    })?;
                    let util = rest
                        .strip_suffix(']')
                        .ok_or_else(|| syntax(n, col, "missing `]`"))?;
                    let id = parse_u64(n, col, item, "item id")?;
                    let id = ItemId(
                        u32::try_from(id).map_err(|_| syntax(n, col, "item id out of range"))?,
                    );
                    let util = parse_u64(n, col, util, "item utility")?;
                    current.push((id, util));
                    let g = eu.entry(id).or_insert(util);
                    *g = gcd(*g, util);
                }
            }
            col += tok.len() + 1;
        }
        if !current.is_empty() {
            elements.push(current);
        }
        if elements.is_empty() {
            return Err(syntax(n, 1, "sequence has no items"));
        }
        for (j, e) in elements.iter_mut().enumerate() {
            e.sort_by_key(|&(i, _)| i);
            if e.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(DataError::UnsortedElement {
                    line: n,
                    element: j + 1,
                });
            }
        }
        if let Some(d) = declared {
            let sum: u64 = elements.iter().flatten().map(|&(_, u)| u).sum();
            if sum != d {
                return Err(syntax(
                    n,
                    1,
                    format!("SUtility:{d} does not match item utilities ({sum})"),
                ));
            }
        }
        raw.push(elements);
    }
    let table = UtilityTable { eu: eu.clone() };
    let sequences = raw
        .into_iter()
        .enumerate()
        .map(|(sid, elements)| {
            let elements = elements
                .into_iter()
                .map(|e| {
                    let entries = e
                        .into_iter()
                        .map(|(i, u)| (i, (u / eu[&i]) as u32))
                        .collect();
                    QElement::new(entries).expect("sorted, distinct, positive")
                })
                .collect();
            QSequence::new(sid as u64, elements)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Qsdb::new(sequences, table)
}

/// The running example: four q-sequences over items a..f (ids 1..6) with
/// external utilities a:3 b:1 c:2 d:1 e:1 f:1.
pub mod fixture {
    use super::*;

    pub const A: u32 = 1;
    pub const B: u32 = 2;
    pub const C: u32 = 3;
    pub const D: u32 = 4;
    pub const E: u32 = 5;
    pub const F: u32 = 6;

    pub const SEQUENCES: &str = "\
1:2 2:2 -1 6:1 -1 1:1 4:1 -2
2:1 -1 4:1 6:1 -1 5:1 -1 4:2 -2
1:2 2:2 4:1 -1 4:1 -1 1:1 4:2 5:1 -2
3:2 -1 4:2 -1 5:1 -1 3:2 -1 6:1 -2
";

    pub const UTILITIES: &str = "1:3\n2:1\n3:2\n4:1\n5:1\n6:1\n";

    pub fn database() -> Qsdb {
        parse_database_str(SEQUENCES, UTILITIES).expect("fixture parses")
    }

    pub fn item(id: u32) -> ItemId {
        ItemId::new(id).expect("positive id")
    }
}

#[cfg(test)]
mod tests {
    use super::fixture::*;
    use super::*;

    #[test]
    fn parses_first_fixture_line() {
        let db =
            parse_database_str("1:2 2:2 -1 6:1 -1 1:1 4:1 -2\n", "1:3\n2:1\n4:1\n6:1").unwrap();
        let s1 = &db.sequences()[0];
        let shape: Vec<Vec<(u32, u32)>> = s1
            .elements()
            .iter()
            .map(|e| e.entries().iter().map(|&(i, q)| (i.get(), q)).collect())
            .collect();
        assert_eq!(
            shape,
            vec![vec![(1, 2), (2, 2)], vec![(6, 1)], vec![(1, 1), (4, 1)]]
        );
        assert_eq!(db.total_utility(), 13);
    }

    #[test]
    fn empty_sequence_file() {
        let db = parse_database_str("", UTILITIES).unwrap();
        assert_eq!(db.len(), 0);
        assert_eq!(db.total_utility(), 0);
    }

    #[test]
    fn rejects_unsorted_element() {
        let err = parse_database_str("2:1 1:1 -2\n", UTILITIES).unwrap_err();
        assert!(
            matches!(
                err,
                DataError::UnsortedElement {
                    line: 1,
                    element: 1
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("1:0 -2", "quantity"),
            ("1:1  2:1 -2", "space"),
            ("1:1 -1 -2", "empty"),
            ("1:1 -1 -1 2:1 -2", "empty"),
            ("1:1 2:1", "terminator"),
            ("1:1 -2 2:1", "after"),
            ("x:1 -2", "item"),
            ("9:1 -2", "external utility"),
            ("1:1 1:2 -2", "increasing"),
        ];
        for (line, needle) in cases {
            let err = parse_database_str(line, UTILITIES).unwrap_err().to_string();
            assert!(err.contains(needle), "{line:?} -> {err}");
        }
    }

    #[test]
    fn syntax_errors_report_columns() {
        match parse_database_str("1:1 2:x -2", UTILITIES).unwrap_err() {
            DataError::Syntax { line, column, .. } => assert_eq!((line, column), (1, 7)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_utility_files() {
        assert!(matches!(
            parse_utilities("1:3\n1:4\n".as_bytes()),
            Err(DataError::DuplicateUtility { line: 2, item: 1 })
        ));
        assert!(matches!(
            parse_utilities("1:0\n".as_bytes()),
            Err(DataError::NonPositive { .. })
        ));
    }

    #[test]
    fn item_and_sequence_utilities() {
        let db = database();
        let t = db.utilities();
        let s1 = &db.sequences()[0];
        assert_eq!(item_utility(item(A), 1, s1, t).unwrap(), 6);
        assert_eq!(item_utility(item(B), 1, s1, t).unwrap(), 2);
        assert_eq!(item_utility(item(F), 2, s1, t).unwrap(), 1);
        assert!(matches!(
            item_utility(item(F), 1, s1, t),
            Err(DataError::ItemAbsent {
                item: 6,
                element: 1
            })
        ));
        assert_eq!(sequence_utility(s1, t).unwrap(), 13);
        assert_eq!(sequence_utility(&db.sequences()[2], t).unwrap(), 16);
        let single = parse_database_str("1:1 -2", UTILITIES).unwrap();
        assert_eq!(single.total_utility(), 3);
    }

    #[test]
    fn database_utilities() {
        let db = database();
        assert_eq!(db.total_utility(), 47);
        assert_eq!(db.database_utility(), 47);
        let per: Vec<u64> = (0..4).map(|i| db.sequence_utility(i)).collect();
        assert_eq!(per, vec![13, 6, 16, 12]);
        let without_s4 = db.filter_sequences(|s| s.sid != 3);
        assert_eq!(without_s4.total_utility(), 35);
    }

    #[test]
    fn overflow_is_an_error() {
        let huge = format!("1:{}\n", u64::MAX / 2);
        let err = parse_database_str("1:2 -1 1:2 -2", &huge).unwrap_err();
        assert!(matches!(err, DataError::Overflow));
    }

    #[test]
    fn text_round_trip_of_fixture() {
        let db = database();
        assert_eq!(sequences_to_string(&db), SEQUENCES);
        assert_eq!(utilities_to_string(db.utilities()), UTILITIES);
    }

    #[test]
    fn retain_items_drops_empty_elements() {
        let db = database().retain_items(|i| i.get() != C);
        assert_eq!(db.sequences()[3].elements().len(), 3);
        assert_eq!(db.total_utility(), 47 - 8);
    }

    #[test]
    fn names_file() {
        let names = ItemNames::parse("a:1\nb:2\n# comment\nzz:26\n".as_bytes()).unwrap();
        assert_eq!(names.id("zz"), Some(item(26)));
        assert_eq!(names.name(item(2)), Some("b"));
        assert!(ItemNames::parse("a:1\na:2\n".as_bytes()).is_err());
        assert_eq!(ItemNames::alphabetic(6).id("f"), Some(item(6)));
    }

    #[test]
    fn spmf_import_splits_utilities() {
        let text = "1[6] 2[2] -1 6[1] -1 1[3] 4[1] -1 -2 SUtility:13\n2[1] -1 4[1] 6[1] -1 -2 SUtility:3\n";
        let db = import_spmf_inline(text.as_bytes()).unwrap();
        assert_eq!(db.utilities().get(item(A)), Some(3));
        assert_eq!(db.sequences()[0].elements()[0].quantity(item(A)), Some(2));
        assert_eq!(db.total_utility(), 16);
        let bad = "1[6] -1 -2 SUtility:7\n";
        assert!(import_spmf_inline(bad.as_bytes()).is_err());
    }
}
