use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

/// One remembered period: post-snap forecast `c_q`, basis image `x_q = F(c_q)`
/// and action `a_q`, all in normalized coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    /// Interned id of `c`, used only for lookup.
    #[serde(skip)]
    pub(crate) id: u32,
}

#[derive(Serialize, Deserialize)]
struct WindowData {
    capacity: usize,
    entries: VecDeque<WindowEntry>,
}

/// The last `R − 1` periods, oldest first.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "WindowData", into = "WindowData")]
pub struct RecallWindow {
    capacity: usize,
    entries: VecDeque<WindowEntry>,
    ids: HashMap<Vec<u64>, u32>,
}

impl PartialEq for RecallWindow {
    fn eq(&self, other: &Self) -> bool {
        self.capacity == other.capacity && self.entries == other.entries
    }
}

impl From<WindowData> for RecallWindow {
    fn from(d: WindowData) -> Self {
        let mut w = RecallWindow { capacity: d.capacity, entries: VecDeque::new(), ids: HashMap::new() };
        for e in d.entries {
            w.push(e);
        }
        w
    }
}

impl From<RecallWindow> for WindowData {
    fn from(w: RecallWindow) -> Self {
        WindowData { capacity: w.capacity, entries: w.entries }
    }
}

impl RecallWindow {
    /// Window for recall `R`; holds at most `R − 1` pairs.
    pub fn new(recall: usize) -> Self {
        let capacity = recall.saturating_sub(1);
        Self { capacity, entries: VecDeque::with_capacity(capacity.min(1 << 16)), ids: HashMap::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &VecDeque<WindowEntry> {
        &self.entries
    }

    /// Number of distinct forecast values interned so far.
    pub(crate) fn id_count(&self) -> usize {
        self.ids.len()
    }

    pub(crate) fn push(&mut self, mut entry: WindowEntry) {
        if self.capacity == 0 {
            return;
        }
        while self.entries.len() >= self.capacity {
            self.entries.pop_front();
        }
        let key: Vec<u64> = entry.c.iter().map(|v| v.to_bits()).collect();
        let next = self.ids.len() as u32;
        entry.id = *self.ids.entry(key).or_insert(next);
        self.entries.push_back(entry);
    }

    /// Entries newest first with their discount `λ^{age}`, the newest having age 1.
    pub fn weighted(&self, lambda: f64) -> impl Iterator<Item = (f64, &WindowEntry)> {
        let mut w = 1.0;
        self.entries.iter().rev().map(move |e| {
            w *= lambda;
            (w, e)
        })
    }
}
