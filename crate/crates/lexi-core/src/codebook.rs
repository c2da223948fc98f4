//! Per-layer canonical Huffman codebooks over exponent alphabets of at most
//! 32 coded symbols plus one escape.
//!
//! The build pipeline mirrors a fixed-function hardware unit: a 32-slot
//! bitonic sorter (15 compare-exchange passes), tree construction over the
//! sorted list (31 merge steps), and staged decode-LUT programming (32 slots),
//! for a fixed 15 + 31 + 32 = 78-cycle codebook pipeline regardless of how
//! many symbols a layer actually uses.
//!
//! The escape is a real pseudo-symbol with frequency 1: it participates in
//! tree construction and canonical ordering, is forced last in its length
//! class, and always sits at the maximum code length, so its codeword is the
//! all-ones pattern at its own length. On the wire an escaped exponent is the
//! escape codeword followed by the raw 8-bit exponent.

use std::collections::{BTreeMap, VecDeque};

use crate::bitio::BitReader;
use crate::error::{Error, Result};
use crate::histogram::{run_histogram, EncoderConfig, ExponentHistogram, HistogramRun, MAX_CODED_SYMBOLS};

/// Compare-exchange passes of the 32-input bitonic sorter, one per cycle.
pub const SORT_CYCLES: u64 = 15;
/// Merge steps to reduce the 32-entry sorted list, one per cycle.
pub const TREE_CYCLES: u64 = 31;
/// Staged-LUT programming slots, one per cycle.
pub const LUT_PROGRAM_CYCLES: u64 = 32;
/// Fixed codebook pipeline latency after histogramming.
pub const CODEBOOK_PIPELINE_CYCLES: u64 = SORT_CYCLES + TREE_CYCLES + LUT_PROGRAM_CYCLES;

/// Cumulative window widths of the four decode stages.
pub const STAGE_WIDTH_BITS: [u32; 4] = [8, 16, 24, 32];
/// Canonical ranks resolved per stage (stage 4 admits a ninth slot so the
/// escape of a full 33-entry codebook fits).
pub const STAGE_RANK_CAPACITY: [usize; 4] = [8, 8, 8, 9];

/// A codebook symbol: a coded exponent or the escape. The derived order
/// (exponents ascending, escape last) is exactly the canonical tie order
/// within a code-length class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    Exponent(u8),
    Escape,
}

/// One canonical codeword: `len` significant bits in the low bits of `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Code {
    pub bits: u32,
    pub len: u8,
}

impl Code {
    /// True when the codeword is all ones at its own length.
    pub fn is_all_ones(&self) -> bool {
        self.bits == (((1u64 << self.len) - 1) as u32)
    }
}

/// Sorts at most 32 (exponent, count) pairs by descending count, ties by
/// ascending exponent, through a genuine 32-input bitonic network padded with
/// zero-count sentinels. Sentinels never leave the pad region because real
/// counts are positive or tie ahead of the sentinel's 0xFF exponent.
pub fn bitonic_sort_desc(pairs: &[(u8, u64)]) -> Vec<(u8, u64)> {
    assert!(
        pairs.len() <= MAX_CODED_SYMBOLS,
        "bitonic sorter is {MAX_CODED_SYMBOLS} wide, got {} items",
        pairs.len()
    );
    const N: usize = 32;
    let mut slots: [(u8, u64); N] = [(u8::MAX, 0); N];
    slots[..pairs.len()].copy_from_slice(pairs);

    // Ascending network over the key (count descending, exponent ascending).
    let key = |s: &(u8, u64)| (std::cmp::Reverse(s.1), s.0);
    let mut passes = 0u64;
    let mut k = 2;
    while k <= N {
        let mut j = k / 2;
        while j > 0 {
            for i in 0..N {
                let l = i ^ j;
                if l > i {
                    let ascending = i & k == 0;
                    if ascending == (key(&slots[i]) > key(&slots[l])) {
                        slots.swap(i, l);
                    }
                }
            }
            passes += 1;
            j /= 2;
        }
        k *= 2;
    }
    debug_assert_eq!(passes, SORT_CYCLES);
    slots[..pairs.len()].to_vec()
}

/// Bit budget for the codeword at 0-based canonical rank `rank0`: the staged
/// decoder holds ranks 1..=8 in a window of 8 bits, 9..=16 in 16, 17..=24 in
/// 24 and the rest in 32.
pub(crate) fn rank_cap(rank0: usize) -> u8 {
    match rank0 / 8 {
        0 => 8,
        1 => 16,
        2 => 24,
        _ => 32,
    }
}

/// Minimum-cost code lengths with a per-symbol length cap, by package-merge.
///
/// Returns one length per input index with `lengths[i] <= caps[i]` and the
/// Kraft sum exactly 1. Requires `sum 2^-caps[i] <= 1` (a feasible code
/// exists) and at least two symbols. Cost is optimal for the caps: each
/// selected coin of symbol `i` at level `l` is one of its singletons, so a
/// symbol never exceeds its own cap, and the coin-collector selection
/// minimizes total weight.
fn package_merge_with_caps(weights: &[u64], caps: &[u8]) -> Vec<u8> {
    let n = weights.len();
    assert!(n >= 2 && n == caps.len());
    debug_assert!(
        caps.iter()
            .map(|&c| 1u128 << (32 - c as u32))
            .sum::<u128>()
            <= 1u128 << 32,
        "caps admit no complete code"
    );
    #[derive(Clone)]
    struct Item {
        weight: u128,
        counts: Vec<u8>,
    }
    let max_cap = caps.iter().copied().max().unwrap();
    let mut prev: Vec<Item> = Vec::new();
    for level in (1..=max_cap).rev() {
        let mut cur: Vec<Item> = Vec::new();
        for i in 0..n {
            if caps[i] >= level {
                let mut counts = vec![0u8; n];
                counts[i] = 1;
                cur.push(Item {
                    weight: weights[i] as u128,
                    counts,
                });
            }
        }
        for pair in prev.chunks_exact(2) {
            let mut counts = pair[0].counts.clone();
            for (c, d) in counts.iter_mut().zip(&pair[1].counts) {
                *c += d;
            }
            cur.push(Item {
                weight: pair[0].weight + pair[1].weight,
                counts,
            });
        }
        cur.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.counts.cmp(&b.counts)));
        prev = cur;
    }
    let take = 2 * (n - 1);
    assert!(prev.len() >= take, "feasible caps always yield enough items");
    let mut lengths = vec![0u8; n];
    for item in &prev[..take] {
        for (l, &c) in lengths.iter_mut().zip(&item.counts) {
            *l += c;
        }
    }
    // Package-merge can stop short of Kraft equality; shortening the longest
    // code closes the gap (the remainder is always a multiple of its term)
    // and only lowers cost, so the result stays optimal and complete.
    let full = 1u128 << 32;
    loop {
        let kraft: u128 = lengths.iter().map(|&l| 1u128 << (32 - l as u32)).sum();
        if kraft == full {
            break;
        }
        debug_assert!(kraft < full);
        let deepest = (0..n).max_by_key(|&i| lengths[i]).unwrap();
        lengths[deepest] -= 1;
    }
    lengths
}

/// Huffman code lengths for positive-count symbols via the two-queue method.
///
/// Merge order is the sorter's rank order reversed (count ascending; ties:
/// escape first, then larger exponent), with leaves preferred over merged
/// nodes on weight ties, so lengths are a pure function of the input.
///
/// When an escape symbol is present and shares the minimum weight, its length
/// is swapped up to the maximum length if tree shape left it shallower; the
/// swap partner has equal weight, so the code stays optimal while the escape
/// keeps its all-ones canonical slot.
///
/// The staged decoder bounds the k-th shortest codeword by its stage window
/// (8/16/24/32 bits for ranks 1-8/9-16/17-24/25-33). Free Huffman trees can
/// breach that: a heavy dyadic head with a sparse tail pushes rank 8 to 9
/// bits. Such codes are rebuilt with per-rank caps via package-merge, giving
/// the cheapest lengths the decoder hardware can actually hold.
pub fn build_huffman(freqs: &[(Symbol, u64)]) -> Result<BTreeMap<Symbol, u8>> {
    let mut items: Vec<(Symbol, u64)> = freqs.iter().copied().filter(|&(_, c)| c > 0).collect();
    if items.is_empty() {
        return Err(Error::NoSymbols);
    }
    if items.len() == 1 {
        // Degenerate alphabet: a single symbol still needs one bit on the
        // wire. (The pipeline never hits this: the escape makes two leaves.)
        return Ok(BTreeMap::from([(items[0].0, 1)]));
    }
    items.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));

    struct Node {
        weight: u64,
        kids: Option<(usize, usize)>,
    }
    let mut nodes: Vec<Node> = items
        .iter()
        .map(|&(_, w)| Node {
            weight: w,
            kids: None,
        })
        .collect();
    let mut leaves: VecDeque<usize> = (0..items.len()).collect();
    let mut merged: VecDeque<usize> = VecDeque::new();

    let take_min = |nodes: &[Node], leaves: &mut VecDeque<usize>, merged: &mut VecDeque<usize>| {
        match (leaves.front(), merged.front()) {
            (Some(&l), Some(&m)) => {
                if nodes[l].weight <= nodes[m].weight {
                    leaves.pop_front().unwrap()
                } else {
                    merged.pop_front().unwrap()
                }
            }
            (Some(_), None) => leaves.pop_front().unwrap(),
            (None, Some(_)) => merged.pop_front().unwrap(),
            (None, None) => unreachable!("ran out of nodes before the root"),
        }
    };

    for _ in 0..items.len() - 1 {
        let a = take_min(&nodes, &mut leaves, &mut merged);
        let b = take_min(&nodes, &mut leaves, &mut merged);
        nodes.push(Node {
            weight: nodes[a].weight + nodes[b].weight,
            kids: Some((a, b)),
        });
        merged.push_back(nodes.len() - 1);
    }

    let root = nodes.len() - 1;
    let mut depth = vec![0u8; nodes.len()];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if let Some((a, b)) = nodes[n].kids {
            depth[a] = depth[n] + 1;
            depth[b] = depth[n] + 1;
            stack.push(a);
            stack.push(b);
        }
    }

    let mut lengths: BTreeMap<Symbol, u8> = items
        .iter()
        .enumerate()
        .map(|(i, &(s, _))| (s, depth[i]))
        .collect();

    if let Some(&esc_len) = lengths.get(&Symbol::Escape) {
        let esc_weight = items.iter().find(|(s, _)| *s == Symbol::Escape).unwrap().1;
        let max_len = *lengths.values().max().unwrap();
        if esc_len < max_len {
            let partner = items
                .iter()
                .filter(|&&(s, w)| s != Symbol::Escape && w == esc_weight && lengths[&s] == max_len)
                .map(|&(s, _)| s)
                .max();
            if let Some(p) = partner {
                lengths.insert(p, esc_len);
                lengths.insert(Symbol::Escape, max_len);
            }
        }
    }

    let mut sorted: Vec<u8> = lengths.values().copied().collect();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &l)| l > rank_cap(i)) {
        // Rebuild under the decoder's per-rank caps. Weight-descending symbol
        // order pairs heavier symbols with the tighter early caps; the capped
        // optimum assigned length-ascending to that order satisfies every cap
        // (caps are nondecreasing, so the i-th shortest length fits cap i).
        // Ties are broken exponent-ascending with the escape last, so the
        // escape, being minimum-weight, lands on the deepest length and keeps
        // its all-ones codeword.
        let mut by_weight = items.clone();
        by_weight.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let weights: Vec<u64> = by_weight.iter().map(|&(_, w)| w).collect();
        let caps: Vec<u8> = (0..weights.len()).map(rank_cap).collect();
        let mut capped = package_merge_with_caps(&weights, &caps);
        capped.sort_unstable();
        lengths = by_weight
            .iter()
            .zip(&capped)
            .map(|(&(s, _), &l)| (s, l))
            .collect();
    }
    Ok(lengths)
}

/// A complete canonical prefix code over exponents plus an optional escape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    /// All entries in canonical rank order: ascending length, then ascending
    /// exponent, escape last within its length class.
    entries: Vec<(Symbol, Code)>,
    /// Direct-mapped encode LUT: exponent -> codeword.
    encode_lut: Box<[Option<Code>; 256]>,
    escape: Option<Code>,
}

impl Codebook {
    pub fn code_for(&self, exponent: u8) -> Option<Code> {
        self.encode_lut[exponent as usize]
    }

    pub fn escape(&self) -> Option<Code> {
        self.escape
    }

    /// Entries in canonical rank order.
    pub fn canonical_entries(&self) -> &[(Symbol, Code)] {
        &self.entries
    }

    pub fn coded_count(&self) -> usize {
        self.entries.len() - self.escape.is_some() as usize
    }

    /// Wire header: one count byte, then (exponent, code length) pairs in
    /// canonical order. The escape's length is not stored: it is the unique
    /// length completing the Kraft equality, so the decoder re-derives it.
    pub fn wire_header(&self) -> Vec<u8> {
        let coded: Vec<(u8, u8)> = self
            .entries
            .iter()
            .filter_map(|&(s, c)| match s {
                Symbol::Exponent(e) => Some((e, c.len)),
                Symbol::Escape => None,
            })
            .collect();
        let mut out = Vec::with_capacity(1 + 2 * coded.len());
        out.push(coded.len() as u8);
        for (e, l) in coded {
            out.push(e);
            out.push(l);
        }
        out
    }

    /// Parses and validates a wire header, returning the rebuilt codebook and
    /// the number of bytes consumed.
    pub fn from_wire_header(bytes: &[u8]) -> Result<(Codebook, usize)> {
        let &n = bytes.first().ok_or(Error::Truncated {
            what: "codebook header count byte",
        })?;
        let n = n as usize;
        if n == 0 || n > MAX_CODED_SYMBOLS {
            return Err(Error::BadCodebookHeader {
                detail: format!("coded symbol count {n} outside 1..=32"),
            });
        }
        let need = 1 + 2 * n;
        if bytes.len() < need {
            return Err(Error::Truncated {
                what: "codebook header entries",
            });
        }

        let mut lengths: BTreeMap<Symbol, u8> = BTreeMap::new();
        let mut seen = [false; 256];
        let mut prev: Option<(u8, u8)> = None;
        let mut kraft: u64 = 0;
        for i in 0..n {
            let e = bytes[1 + 2 * i];
            let l = bytes[2 + 2 * i];
            if !(1..=32).contains(&l) {
                return Err(Error::BadCodebookHeader {
                    detail: format!("code length {l} for exponent {e} outside 1..=32"),
                });
            }
            if seen[e as usize] {
                return Err(Error::BadCodebookHeader {
                    detail: format!("duplicate exponent {e}"),
                });
            }
            seen[e as usize] = true;
            if let Some(p) = prev {
                if (l, e) <= p {
                    return Err(Error::BadCodebookHeader {
                        detail: "entries not in canonical (length, exponent) order".into(),
                    });
                }
            }
            prev = Some((l, e));
            kraft += 1u64 << (32 - l as u32);
            lengths.insert(Symbol::Exponent(e), l);
        }

        let full = 1u64 << 32;
        if kraft >= full {
            return Err(Error::BadCodebookHeader {
                detail: "coded lengths leave no room for the escape".into(),
            });
        }
        let rem = full - kraft;
        if rem & (rem - 1) != 0 {
            return Err(Error::BadCodebookHeader {
                detail: "Kraft remainder is not a power of two; no single escape length completes the code"
                    .into(),
            });
        }
        let esc_len = 32 - rem.trailing_zeros() as u8;
        if esc_len == 0 {
            // rem == 2^32 is impossible here (n >= 1), but keep the guard.
            return Err(Error::BadCodebookHeader {
                detail: "derived escape length 0".into(),
            });
        }
        lengths.insert(Symbol::Escape, esc_len);
        let cb = assign_canonical(&lengths)?;
        Ok((cb, need))
    }
}

/// Builds canonical codewords from code lengths.
///
/// Entries are ordered by (length, symbol) with the escape ordered after all
/// exponents, and consecutive codewords increase numerically, so the code is
/// a pure function of its lengths. The lengths must satisfy the Kraft
/// equality exactly: this crate only speaks complete codes.
pub fn assign_canonical(lengths: &BTreeMap<Symbol, u8>) -> Result<Codebook> {
    if lengths.is_empty() {
        return Err(Error::NoSymbols);
    }
    let coded = lengths.keys().filter(|s| **s != Symbol::Escape).count();
    if coded > MAX_CODED_SYMBOLS {
        return Err(Error::BadCodebookHeader {
            detail: format!("{coded} coded symbols exceeds {MAX_CODED_SYMBOLS}"),
        });
    }
    let mut kraft: u64 = 0;
    for (&s, &l) in lengths {
        if !(1..=32).contains(&l) {
            return Err(Error::KraftViolation {
                detail: format!("length {l} for {s:?} outside 1..=32"),
            });
        }
        kraft += 1u64 << (32 - l as u32);
    }
    if kraft != 1u64 << 32 {
        return Err(Error::KraftViolation {
            detail: format!("sum of 2^-len is {} / 2^32, want exactly 2^32", kraft),
        });
    }

    let mut order: Vec<(Symbol, u8)> = lengths.iter().map(|(&s, &l)| (s, l)).collect();
    order.sort_by_key(|&(s, l)| (l, s));

    let mut entries = Vec::with_capacity(order.len());
    let mut encode_lut: Box<[Option<Code>; 256]> = Box::new([None; 256]);
    let mut escape = None;
    let mut code: u64 = 0;
    let mut prev_len: u8 = order[0].1;
    for (s, l) in order {
        code <<= l - prev_len;
        prev_len = l;
        let c = Code {
            bits: code as u32,
            len: l,
        };
        code += 1;
        match s {
            Symbol::Exponent(e) => encode_lut[e as usize] = Some(c),
            Symbol::Escape => escape = Some(c),
        }
        entries.push((s, c));
    }
    // Kraft equality means the last codeword is all ones at the max length.
    debug_assert_eq!(code, 1u64 << prev_len);

    Ok(Codebook {
        entries,
        encode_lut,
        escape,
    })
}

/// One programmed decoder slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableEntry {
    pub symbol: Symbol,
    pub code: Code,
}

/// The staged decode tables: stage `k` compares the bitstream window against
/// at most eight canonical entries (nine in the last stage) whose ranks fall
/// in its slice, under cumulative window widths of 8/16/24/32 bits.
///
/// Rank placement is safe because code construction caps the k-th shortest
/// codeword at its stage window, so every entry fits where its rank lands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderTables {
    stages: [Vec<TableEntry>; 4],
}

impl DecoderTables {
    pub fn stage(&self, k: usize) -> &[TableEntry] {
        &self.stages[k]
    }

    /// Resolves the next symbol from the reader, returning the symbol and the
    /// zero-based stage that matched. For an escape the caller still needs to
    /// read the 8 raw exponent bits that follow.
    ///
    /// Prefix-freeness makes a false match impossible: a wrong entry matching
    /// the window would be a prefix of the true codeword or extend it.
    pub fn decode_symbol(&self, r: &mut BitReader<'_>) -> Result<(Symbol, usize)> {
        let remaining = r.remaining();
        for (k, stage) in self.stages.iter().enumerate() {
            for e in stage {
                let len = e.code.len as u64;
                if len <= remaining && r.peek_bits(e.code.len as u32) == e.code.bits as u64 {
                    r.skip(len)?;
                    return Ok((e.symbol, k));
                }
            }
        }
        // A complete code matches every sufficiently long bit string, so the
        // only way to get here is running out of bits mid-codeword.
        Err(Error::CorruptStream {
            detail: format!("no codeword fits in the {remaining} bits left"),
        })
    }
}

/// Programs the staged tables from a codebook's canonical entries.
pub fn build_decoder_tables(cb: &Codebook) -> DecoderTables {
    let mut stages: [Vec<TableEntry>; 4] = Default::default();
    let mut rank = 0usize;
    for &(symbol, code) in cb.canonical_entries() {
        let stage = match rank {
            0..=7 => 0,
            8..=15 => 1,
            16..=23 => 2,
            _ => 3,
        };
        assert!(
            code.len as u32 <= STAGE_WIDTH_BITS[stage],
            "rank {} codeword of {} bits exceeds stage {} window",
            rank + 1,
            code.len,
            stage + 1
        );
        assert!(stages[stage].len() < STAGE_RANK_CAPACITY[stage]);
        stages[stage].push(TableEntry { symbol, code });
        rank += 1;
    }
    DecoderTables { stages }
}

/// Cycle accounting for one codebook build.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CycleReport {
    pub histogram_cycles: u64,
    pub arbiter_stall_cycles: u64,
    pub sort_cycles: u64,
    pub tree_cycles: u64,
    pub lut_program_cycles: u64,
    /// Sort + tree + LUT; fixed at 78 by the 32-entry hardware sizing.
    pub total_pipeline_cycles: u64,
    pub lane_hit_rate: f64,
}

impl CycleReport {
    fn from_run(run: &HistogramRun) -> Self {
        CycleReport {
            histogram_cycles: run.histogram_cycles,
            arbiter_stall_cycles: run.arbiter_stall_cycles,
            sort_cycles: SORT_CYCLES,
            tree_cycles: TREE_CYCLES,
            lut_program_cycles: LUT_PROGRAM_CYCLES,
            total_pipeline_cycles: CODEBOOK_PIPELINE_CYCLES,
            lane_hit_rate: run.lane_hit_rate(),
        }
    }
}

/// A built layer codebook with its decode tables and cycle report.
#[derive(Debug, Clone)]
pub struct LayerBuild {
    pub codebook: Codebook,
    pub tables: DecoderTables,
    pub cycles: CycleReport,
}

/// Selects the symbols to code from a histogram: every nonzero exponent when
/// at most 32 are present, otherwise the 32 most frequent (ties prefer the
/// smaller exponent), run through the bitonic sorter for rank order.
fn select_coded(h: &ExponentHistogram) -> Vec<(u8, u64)> {
    let mut all: Vec<(u8, u64)> = h.iter_nonzero().collect();
    if all.len() > MAX_CODED_SYMBOLS {
        all.sort_by_key(|&(e, c)| (std::cmp::Reverse(c), e));
        all.truncate(MAX_CODED_SYMBOLS);
    }
    bitonic_sort_desc(&all)
}

/// Builds the canonical codebook (coded symbols plus escape) for a histogram.
pub fn codebook_from_histogram(h: &ExponentHistogram) -> Result<Codebook> {
    let ranked = select_coded(h);
    if ranked.is_empty() {
        return Err(Error::NoSymbols);
    }
    let mut freqs: Vec<(Symbol, u64)> = ranked
        .iter()
        .map(|&(e, c)| (Symbol::Exponent(e), c))
        .collect();
    freqs.push((Symbol::Escape, 1));
    let lengths = build_huffman(&freqs)?;
    assign_canonical(&lengths)
}

/// Builds a layer's codebook from the leading `cfg.sample_size` exponents via
/// the lane-cache histogram model.
pub fn build_layer_codebook(exponents: &[u8], cfg: &EncoderConfig) -> Result<LayerBuild> {
    cfg.validate()?;
    if exponents.is_empty() {
        return Err(Error::EmptyInput("build_layer_codebook"));
    }
    let sample = &exponents[..exponents.len().min(cfg.sample_size)];
    let (h, run) = run_histogram(sample, cfg)?;
    let codebook = codebook_from_histogram(&h)?;
    let tables = build_decoder_tables(&codebook);
    Ok(LayerBuild {
        codebook,
        tables,
        cycles: CycleReport::from_run(&run),
    })
}

/// Builds a codebook from an exact whole-stream histogram (the offline path
/// used for weight files, where no sampling window applies).
pub fn build_offline_codebook(exponents: &[u8]) -> Result<Codebook> {
    if exponents.is_empty() {
        return Err(Error::EmptyInput("build_offline_codebook"));
    }
    codebook_from_histogram(&ExponentHistogram::from_exponents(exponents))
}
