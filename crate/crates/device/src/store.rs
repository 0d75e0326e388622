use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::io::{self, Write};
use std::ops::Range;

use crate::token::{Pseudonym, TokenId};

/// What a device can measure about a contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactObservation {
    pub day: u32,
    pub distance: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceRecord {
    pub day: u32,
    pub own_token: TokenId,
    pub peer_token: TokenId,
    pub distance: f64,
    pub duration: f64,
}

/// Local contact log of one device plus its per-day scoring state.
///
/// Records are kept sorted by day; within a day they stay in insertion
/// order. `own_index` maps every own token to an absolute record position
/// (`base` + offset) so pruning a prefix does not require reindexing.
#[derive(Debug, Clone, Default)]
pub struct DeviceStore {
    records: Vec<DeviceRecord>,
    own_index: HashMap<TokenId, usize>,
    base: usize,
    flags: HashSet<u32>,
    score: u32,
    pseudonym: Option<Pseudonym>,
}

impl DeviceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[DeviceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub(crate) fn append(&mut self, record: DeviceRecord) {
        let in_order = self
            .records
            .last()
            .is_none_or(|last| last.day <= record.day);
        if in_order {
            self.own_index
                .insert(record.own_token, self.base + self.records.len());
            self.records.push(record);
        } else {
            let at = self.records.partition_point(|r| r.day <= record.day);
            self.records.insert(at, record);
            self.reindex();
        }
    }

    fn reindex(&mut self) {
        self.own_index = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.own_token, self.base + i))
            .collect();
    }

    pub fn owns(&self, token: TokenId) -> bool {
        self.own_index.contains_key(&token)
    }

    /// Position and content of the record carrying `token` as own token.
    pub fn record_for(&self, token: TokenId) -> Option<(usize, &DeviceRecord)> {
        let i = *self.own_index.get(&token)? - self.base;
        Some((i, &self.records[i]))
    }

    /// Positions of the records with `from <= day <= to`.
    pub fn window_range(&self, from: u32, to: u32) -> Range<usize> {
        if from > to {
            return 0..0;
        }
        let lo = self.records.partition_point(|r| r.day < from);
        let hi = self.records.partition_point(|r| r.day <= to);
        lo..hi
    }

    pub fn window(&self, from: u32, to: u32) -> &[DeviceRecord] {
        &self.records[self.window_range(from, to)]
    }

    /// Peer tokens of the records in `[from, to]`, in record order.
    pub fn peer_tokens_in(&self, from: u32, to: u32) -> Vec<TokenId> {
        self.window(from, to).iter().map(|r| r.peer_token).collect()
    }

    /// Drops records older than `current_day - t_w` and returns their own
    /// tokens so the router can forget them.
    pub fn prune_window(&mut self, current_day: u32, t_w: u32) -> Vec<TokenId> {
        assert!(t_w >= 1, "window must span at least one day");
        let cutoff = current_day.saturating_sub(t_w);
        let cut = self.records.partition_point(|r| r.day < cutoff);
        let dropped: Vec<TokenId> = self.records.drain(..cut).map(|r| r.own_token).collect();
        for t in &dropped {
            self.own_index.remove(t);
        }
        self.base += cut;
        dropped
    }

    pub fn score(&self) -> u32 {
        self.score
    }

    pub fn has_flag(&self, iteration: u32) -> bool {
        self.flags.contains(&iteration)
    }

    /// Raises the flag of `iteration`. Returns false, and leaves the score
    /// alone, if the flag was already up.
    pub fn raise_flag(&mut self, iteration: u32) -> bool {
        if self.flags.insert(iteration) {
            self.score += 1;
            true
        } else {
            false
        }
    }

    pub fn flags_raised(&self) -> usize {
        self.flags.len()
    }

    pub fn reset_scores(&mut self) {
        self.flags.clear();
        self.score = 0;
    }

    pub fn pseudonym(&self) -> Option<Pseudonym> {
        self.pseudonym
    }

    pub(crate) fn set_pseudonym(&mut self, p: Pseudonym) {
        self.pseudonym = Some(p);
    }

    /// Diagnostic text dump, one `day own peer distance duration` line per record.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            writeln!(
                out,
                "{} {} {} {:.3} {:.3}",
                r.day, r.own_token, r.peer_token, r.distance, r.duration
            )?;
        }
        Ok(())
    }
}
