use super::{encode, CodeSpec, Trellis};
use crate::error::{Error, Result};
use crate::Bit;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;

/// Error-event weight distribution of a single convolutional code.
///
/// An error event leaves the zero state at a fixed section and returns to it
/// for the first time later. `w(d)` sums the input weights of all events of
/// output weight `d`. With this normalization the union bound
/// `sum_d w(d) P(d)` is already per information bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpectrum {
    /// d -> (number of events, total input weight w(d))
    entries: BTreeMap<u32, (u64, u64)>,
    /// (d, event length in sections) -> total input weight
    by_length: BTreeMap<(u32, u32), u64>,
    free_distance: u32,
    d_max: u32,
}

impl DistanceSpectrum {
    /// Minimum distance f.
    pub fn free_distance(&self) -> u32 {
        self.free_distance
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    /// Total input weight of the events at output weight `d` (0 if none).
    pub fn input_weight(&self, d: u32) -> u64 {
        self.entries.get(&d).map_or(0, |e| e.1)
    }

    /// Number of distinct events at output weight `d`.
    pub fn multiplicity(&self, d: u32) -> u64 {
        self.entries.get(&d).map_or(0, |e| e.0)
    }

    /// `(d, w(d))` for every weight with at least one event, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.entries.iter().map(|(&d, &(_, w))| (d, w))
    }

    /// Input weight of the events of weight `d` that span `sections` trellis
    /// sections, counting the `memory` sections needed to re-merge.
    pub fn input_weight_by_length(&self, d: u32, sections: u32) -> u64 {
        self.by_length.get(&(d, sections)).copied().unwrap_or(0)
    }

    /// Keeps only the entries with `d <= d_max`.
    pub fn truncated(&self, d_max: u32) -> Self {
        Self {
            entries: self.entries.range(..=d_max).map(|(&k, &v)| (k, v)).collect(),
            by_length: self
                .by_length
                .iter()
                .filter(|((d, _), _)| *d <= d_max)
                .map(|(&k, &v)| (k, v))
                .collect(),
            free_distance: self.free_distance,
            d_max: d_max.min(self.d_max),
        }
    }

    /// Writes `d,events,w` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        wr.write_record(["d", "events", "w"]).map_err(io)?;
        for (&d, &(events, w)) in &self.entries {
            wr.write_record([d.to_string(), events.to_string(), w.to_string()])
                .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Minimum output weight needed to reach state 0 from every state.
pub(crate) fn weight_to_zero(t: &Trellis) -> Vec<u32> {
    let n = t.n_states();
    let mut dist = vec![u32::MAX; n];
    dist[0] = 0;
    // Bellman-Ford; weights are non-negative and paths short.
    loop {
        let mut changed = false;
        for s in 0..n {
            for b in 0..2 {
                let ns = t.next_state(s, b);
                if dist[ns] == u32::MAX {
                    continue;
                }
                let cand = dist[ns] + t.output_weight(s, b);
                if cand < dist[s] {
                    dist[s] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

/// Enumerates every error event of weight at most `d_max`.
///
/// The search advances one trellis section at a time, merging partial paths
/// that share (state, weight) so the work grows with the number of distinct
/// weights rather than the number of paths. Partial paths that cannot return
/// to the zero state within the budget are pruned.
pub fn compute_distance_spectrum(code: &CodeSpec, d_max: u32) -> Result<DistanceSpectrum> {
    if d_max < 1 {
        return Err(Error::InvalidArgument("d_max must be at least 1".into()));
    }
    let t = code.trellis();
    let to_zero = weight_to_zero(t);
    // A non-catastrophic path longer than this has exceeded d_max.
    let max_sections = (t.n_states() as u64 * (d_max as u64 + 2)) as u32;

    let mut entries: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    let mut by_length: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    // (state, d) -> (paths, summed input weight)
    let mut frontier: HashMap<(u32, u32), (u64, u64)> = HashMap::new();
    let s0 = t.next_state(0, 1);
    let d0 = t.output_weight(0, 1);
    if s0 == 0 {
        if d0 <= d_max {
            entries.insert(d0, (1, 1));
            by_length.insert((d0, 1), 1);
        }
    } else if d0 + to_zero[s0] <= d_max {
        frontier.insert((s0 as u32, d0), (1, 1));
    }

    let mut section = 1u32;
    while !frontier.is_empty() {
        section += 1;
        if section > max_sections {
            return Err(Error::InvalidCode(format!(
                "code {} is catastrophic (zero-weight cycle)",
                code.label()
            )));
        }
        let mut next: HashMap<(u32, u32), (u64, u64)> = HashMap::with_capacity(frontier.len());
        for (&(s, d), &(count, inw)) in &frontier {
            for b in 0..2u8 {
                let ns = t.next_state(s as usize, b);
                let nd = d + t.output_weight(s as usize, b);
                if nd + to_zero[ns] > d_max {
                    continue;
                }
                let nw = inw + b as u64 * count;
                if ns == 0 {
                    let e = entries.entry(nd).or_default();
                    e.0 += count;
                    e.1 += nw;
                    *by_length.entry((nd, section)).or_default() += nw;
                } else {
                    let e = next.entry((ns as u32, nd)).or_default();
                    e.0 += count;
                    e.1 += nw;
                }
            }
        }
        frontier = next;
    }

    let free_distance = match entries.iter().find(|(_, &(_, w))| w > 0) {
        Some((&d, _)) => d,
        None => {
            return Err(Error::Truncated(format!(
                "no error event of code {} has weight <= {d_max}",
                code.label()
            )))
        }
    };
    Ok(DistanceSpectrum {
        entries,
        by_length,
        free_distance,
        d_max,
    })
}

/// Weight distribution of the whole terminated block code for `k` inputs:
/// d -> (number of codewords, summed input weight). Counts are kept in f64
/// because multi-event codewords grow polynomially in `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub k: usize,
    pub d_max: u32,
    pub entries: BTreeMap<u32, (f64, f64)>,
}

/// Block spectrum by dynamic programming over the `k + memory` sections of
/// the zero-tail trellis.
pub fn block_spectrum(code: &CodeSpec, k: usize, d_max: u32) -> BlockSpectrum {
    let t = code.trellis();
    let s = t.n_states();
    let width = d_max as usize + 1;
    let mut cur = vec![(0.0f64, 0.0f64); s * width];
    cur[0] = (1.0, 0.0);
    for sec in 0..code.sections(k) {
        let mut next = vec![(0.0, 0.0); s * width];
        let inputs: &[u8] = if sec < k { &[0, 1] } else { &[0] };
        for st in 0..s {
            for &b in inputs {
                let ns = t.next_state(st, b);
                let w = t.output_weight(st, b) as usize;
                for d in 0..width.saturating_sub(w) {
                    let (c, iw) = cur[st * width + d];
                    if c == 0.0 {
                        continue;
                    }
                    let slot = &mut next[ns * width + d + w];
                    slot.0 += c;
                    slot.1 += iw + b as f64 * c;
                }
            }
        }
        cur = next;
    }
    let entries = (1..width)
        .filter(|&d| cur[d].0 > 0.0)
        .map(|d| (d as u32, cur[d]))
        .collect();
    BlockSpectrum { k, d_max, entries }
}

/// Block spectrum by encoding all `2^k` messages. Only for tiny `k`.
pub fn brute_force_block_spectrum(code: &CodeSpec, k: usize, d_max: u32) -> BlockSpectrum {
    assert!(k <= 24, "brute force over 2^{k} messages");
    let mut entries: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for m in 1u32..(1 << k) {
        let u: Vec<Bit> = (0..k).map(|i| ((m >> i) & 1) as Bit).collect();
        let d = encode(&u, code).iter().filter(|&&b| b == 1).count() as u32;
        if d <= d_max {
            let e = entries.entry(d).or_default();
            e.0 += 1.0;
            e.1 += m.count_ones() as f64;
        }
    }
    BlockSpectrum { k, d_max, entries }
}
