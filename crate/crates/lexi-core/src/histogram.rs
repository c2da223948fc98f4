//! Sampled exponent histogramming modelled after a multi-lane hardware unit.
//!
//! Incoming exponents are dealt round-robin across `lanes` local caches. Each
//! cache holds `cache_depth` (exponent, count) pairs and evicts in insertion
//! order (FIFO), not recency order; an eviction writes the evicted count to
//! the shared global histogram through an arbiter that grants one writer at a
//! time for a fixed three cycles. A final flush drains every lane, so the
//! global histogram always ends exact regardless of lane or depth choices:
//! the caches are a bandwidth optimization, never a lossy approximation.

use crate::error::{Error, Result};

/// Cycles the global-histogram port is held per granted write.
pub const ARBITER_WRITE_CYCLES: u64 = 3;
/// Largest alphabet the codebook stage will code directly; everything beyond
/// the 32 most frequent exponents routes through the escape symbol.
pub const MAX_CODED_SYMBOLS: usize = 32;

/// Sampling and lane-geometry knobs for codebook construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EncoderConfig {
    pub lanes: usize,
    pub cache_depth: usize,
    /// How many leading values of a layer feed the histogram.
    pub sample_size: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            lanes: 10,
            cache_depth: 8,
            sample_size: 512,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lanes == 0 {
            return Err(Error::InvalidInput {
                detail: "lanes must be >= 1".into(),
            });
        }
        if self.cache_depth == 0 {
            return Err(Error::InvalidInput {
                detail: "cache depth must be >= 1".into(),
            });
        }
        if self.sample_size == 0 {
            return Err(Error::InvalidInput {
                detail: "sample size must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// Outcome of feeding one exponent to a lane cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestEvent {
    /// Exponent already resident; its local count incremented.
    Hit,
    /// Exponent inserted into a free slot.
    Insert,
    /// Cache was full: the oldest-inserted entry was written out to make room.
    Evict { exponent: u8, count: u64 },
}

/// One lane's local cache: at most `depth` (exponent, count) pairs in
/// insertion order. Front of the deque is the oldest insertion.
#[derive(Debug, Clone)]
pub struct LaneCache {
    slots: std::collections::VecDeque<(u8, u64)>,
    depth: usize,
}

impl LaneCache {
    pub fn new(depth: usize) -> Self {
        assert!(depth >= 1, "lane cache needs at least one slot");
        LaneCache {
            slots: std::collections::VecDeque::with_capacity(depth),
            depth,
        }
    }

    /// Feeds one exponent; a hit bumps the resident count in place (insertion
    /// order is unchanged), a miss inserts, and a miss into a full cache first
    /// evicts the entry with the smallest insertion index.
    pub fn ingest(&mut self, exponent: u8) -> IngestEvent {
        if let Some(slot) = self.slots.iter_mut().find(|(e, _)| *e == exponent) {
            slot.1 += 1;
            return IngestEvent::Hit;
        }
        if self.slots.len() < self.depth {
            self.slots.push_back((exponent, 1));
            return IngestEvent::Insert;
        }
        let (evicted, count) = self.slots.pop_front().expect("full cache is non-empty");
        self.slots.push_back((exponent, 1));
        IngestEvent::Evict {
            exponent: evicted,
            count,
        }
    }

    /// Drains all resident entries in insertion order.
    pub fn flush(&mut self) -> Vec<(u8, u64)> {
        self.slots.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Exact exponent frequency table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentHistogram {
    pub counts: [u64; 256],
}

impl ExponentHistogram {
    pub fn new() -> Self {
        ExponentHistogram { counts: [0; 256] }
    }

    /// Brute-force count over a slice; the oracle the lane model must match.
    pub fn from_exponents(exponents: &[u8]) -> Self {
        let mut h = Self::new();
        for &e in exponents {
            h.counts[e as usize] += 1;
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (u8, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(e, &c)| (e as u8, c))
    }
}

impl Default for ExponentHistogram {
    fn default() -> Self {
        Self::new()
    }
}

/// Cycle accounting for one histogram run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HistogramRun {
    /// Cycle at which the last global-histogram write completes (ingest fully
    /// overlaps with writes; the phase ends when the flush drains).
    pub histogram_cycles: u64,
    /// How far arbiter serialization stretched the phase past pure ingest
    /// (`ceil(n / lanes)` cycles).
    pub arbiter_stall_cycles: u64,
    pub hits: u64,
    pub misses: u64,
}

impl HistogramRun {
    pub fn lane_hit_rate(&self) -> f64 {
        if self.hits + self.misses == 0 {
            return 0.0;
        }
        self.hits as f64 / (self.hits + self.misses) as f64
    }
}

/// Runs the lane-cache model over `exponents` and returns the exact global
/// histogram plus cycle accounting.
///
/// Value `i` reaches lane `i % lanes` during cycle `i / lanes`, so eviction
/// writes are requested in value order, which is exactly FIFO arrival order
/// with lane index breaking same-cycle ties. Each granted write holds the
/// global-histogram port for [`ARBITER_WRITE_CYCLES`]; the flush writes queue
/// up at the cycle after the last ingest.
pub fn run_histogram(exponents: &[u8], cfg: &EncoderConfig) -> Result<(ExponentHistogram, HistogramRun)> {
    cfg.validate()?;
    if exponents.is_empty() {
        return Err(Error::EmptyInput("run_histogram"));
    }

    let lanes_n = cfg.lanes;
    let mut lanes: Vec<LaneCache> = (0..lanes_n).map(|_| LaneCache::new(cfg.cache_depth)).collect();
    let mut histogram = ExponentHistogram::new();
    let mut hits = 0u64;
    let mut misses = 0u64;
    // (issue_cycle, exponent, count), appended in arrival order.
    let mut writes: Vec<(u64, u8, u64)> = Vec::new();

    for (i, &e) in exponents.iter().enumerate() {
        let cycle = (i / lanes_n) as u64;
        match lanes[i % lanes_n].ingest(e) {
            IngestEvent::Hit => hits += 1,
            IngestEvent::Insert => misses += 1,
            IngestEvent::Evict { exponent, count } => {
                misses += 1;
                writes.push((cycle, exponent, count));
            }
        }
    }

    let ingest_cycles = (exponents.len() as u64).div_ceil(lanes_n as u64);
    for lane in &mut lanes {
        for (exponent, count) in lane.flush() {
            writes.push((ingest_cycles, exponent, count));
        }
    }

    let mut port_free = 0u64;
    for (issue, exponent, count) in writes {
        let start = issue.max(port_free);
        port_free = start + ARBITER_WRITE_CYCLES;
        histogram.counts[exponent as usize] += count;
    }

    let histogram_cycles = ingest_cycles.max(port_free);
    let run = HistogramRun {
        histogram_cycles,
        arbiter_stall_cycles: histogram_cycles - ingest_cycles,
        hits,
        misses,
    };
    Ok((histogram, run))
}
