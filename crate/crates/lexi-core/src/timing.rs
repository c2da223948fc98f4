//! Link-level timing model: how long tensor transfers take over a flit-based
//! interconnect, with and without exponent compression, plus the latency of
//! building a codebook at runtime.
//!
//! Every transfer is charged in whole flits. A flit carries
//! `flit_bits - flit_header_bits` payload bits, so an uncompressed tensor of
//! `n` bf16 values needs `ceil(16n / 120)` flits and a compressed one
//! `ceil(((8 + 8/cr) * n + codebook_header_bits) / 120)`: the sign and
//! mantissa planes ride through untouched and only the exponent plane
//! shrinks by the measured exponent ratio `cr`.

use serde::Serialize;

use crate::codebook::{build_offline_codebook, CODEBOOK_PIPELINE_CYCLES};
use crate::error::{Error, Result};
use crate::histogram::EncoderConfig;

/// Worst-case codebook wire header: 1 count byte + 32 (exponent, length)
/// pairs, carried in control flits ahead of a layer's data.
pub const MAX_CODEBOOK_HEADER_BITS: u64 = (1 + 2 * 32) * 8;

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkModel {
    /// Sustained link bandwidth in bits per nanosecond.
    pub bandwidth_bits_per_ns: f64,
    pub flit_bits: u32,
    pub flit_header_bits: u32,
    /// Encoder/decoder clock period in nanoseconds.
    pub cycle_ns: f64,
    pub decode_lanes: u32,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            bandwidth_bits_per_ns: 100.0,
            flit_bits: 128,
            flit_header_bits: 8,
            cycle_ns: 1.0,
            decode_lanes: 10,
        }
    }
}

impl LinkModel {
    pub fn payload_bits(&self) -> u32 {
        self.flit_bits - self.flit_header_bits
    }

    /// Whole flits needed to move `bits` payload bits.
    pub fn flits_for_bits(&self, bits: f64) -> u64 {
        if bits <= 0.0 {
            return 0;
        }
        (bits / self.payload_bits() as f64).ceil() as u64
    }

    /// One flit per cycle keeps the link busy when the flit is at least as
    /// wide as what the link drains per cycle.
    pub fn decoder_keeps_pace(&self) -> bool {
        self.flit_bits as f64 >= self.bandwidth_bits_per_ns * self.cycle_ns
    }

    /// Nanoseconds to push `bits` payload bits, whole-flit granularity.
    pub fn transfer_ns(&self, bits: f64) -> f64 {
        self.flits_for_bits(bits) as f64 * self.flit_bits as f64 / self.bandwidth_bits_per_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TransferKind {
    Weight,
    Activation,
    HybridCache,
}

impl TransferKind {
    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "weight" => Ok(TransferKind::Weight),
            "activation" => Ok(TransferKind::Activation),
            "hybridcache" => Ok(TransferKind::HybridCache),
            _ => Err(Error::InvalidInput {
                detail: format!("unknown transfer kind {s:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TrafficMode {
    Uncompressed,
    WeightsOnly,
    Lexi,
}

impl TrafficMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uncompressed" => Ok(TrafficMode::Uncompressed),
            "weights" | "weights-only" => Ok(TrafficMode::WeightsOnly),
            "lexi" => Ok(TrafficMode::Lexi),
            _ => Err(Error::InvalidInput {
                detail: format!("unknown traffic mode {s:?}"),
            }),
        }
    }

    /// Which transfers travel compressed under this mode. Weights are
    /// compressed offline; activations and cache lines need the runtime path.
    pub fn compresses(&self, kind: TransferKind) -> bool {
        match self {
            TrafficMode::Uncompressed => false,
            TrafficMode::WeightsOnly => kind == TransferKind::Weight,
            TrafficMode::Lexi => true,
        }
    }
}

/// One row of a traffic trace.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TransferRecord {
    pub layer_id: String,
    pub kind: TransferKind,
    pub value_count: u64,
    pub src: String,
    pub dst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_file: Option<String>,
    /// Exponent-plane ratio measured from attached data, when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_cr: Option<f64>,
    /// Wire header size of the measured codebook, when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebook_header_bits: Option<u64>,
}

/// Parses trace rows of the form `layerId,kind,valueCount,src,dst[,dataFile]`.
/// `data_file` is kept as-is; the caller decides how to resolve and measure it.
pub fn parse_trace_csv(bytes: &[u8]) -> Result<Vec<TransferRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::InvalidInput {
            detail: format!("trace row {}: {e}", idx + 1),
        })?;
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 5 && row.len() != 6 {
            return Err(Error::InvalidInput {
                detail: format!(
                    "trace row {}: expected 5 or 6 fields, found {}",
                    idx + 1,
                    row.len()
                ),
            });
        }
        let value_count: u64 = row[2].parse().map_err(|_| Error::InvalidInput {
            detail: format!("trace row {}: bad value count {:?}", idx + 1, &row[2]),
        })?;
        if value_count == 0 {
            return Err(Error::InvalidInput {
                detail: format!("trace row {}: value count must be at least 1", idx + 1),
            });
        }
        let data_file = row.get(5).filter(|s| !s.is_empty()).map(str::to_owned);
        records.push(TransferRecord {
            layer_id: row[0].to_string(),
            kind: TransferKind::parse(&row[1])
                .map_err(|e| Error::InvalidInput { detail: format!("trace row {}: {e}", idx + 1) })?,
            value_count,
            src: row[3].to_string(),
            dst: row[4].to_string(),
            data_file,
            measured_cr: None,
            codebook_header_bits: None,
        });
    }
    Ok(records)
}

/// Measures the exponent-plane ratio of a value stream with the exact
/// offline codebook, returning `(cr, codebook_header_bits)`.
pub fn measure_exponent_cr(values: &[u16]) -> Result<(f64, u64)> {
    let cb = build_offline_codebook(&values.iter().map(|&v| (v >> 7) as u8).collect::<Vec<_>>())?;
    let mut bits = 0u64;
    for &v in values {
        let exp = (v >> 7) as u8;
        bits += match cb.code_for(exp) {
            Some(code) => code.len as u64,
            None => {
                let esc = cb.escape().ok_or(Error::NoSymbols)?;
                esc.len as u64 + 8
            }
        };
    }
    let header_bits = cb.wire_header().len() as u64 * 8;
    Ok((8.0 * values.len() as f64 / bits as f64, header_bits))
}

/// Payload bits a transfer occupies on the wire.
///
/// `cr` of `None` means the transfer travels uncompressed.
pub fn transfer_bits(value_count: u64, cr: Option<f64>, codebook_header_bits: u64) -> f64 {
    let n = value_count as f64;
    match cr {
        None => 16.0 * n,
        Some(cr) => (8.0 + 8.0 / cr) * n + codebook_header_bits as f64,
    }
}

fn effective_cr(record: &TransferRecord, default_cr: f64) -> (f64, u64) {
    match (record.measured_cr, record.codebook_header_bits) {
        (Some(cr), Some(bits)) => (cr, bits),
        (Some(cr), None) => (cr, MAX_CODEBOOK_HEADER_BITS),
        _ => (default_cr, MAX_CODEBOOK_HEADER_BITS),
    }
}

/// Time for one transfer under one mode, whole-flit granularity.
pub fn transfer_time_ns(
    record: &TransferRecord,
    mode: TrafficMode,
    link: &LinkModel,
    default_cr: f64,
) -> Result<f64> {
    let bits = if mode.compresses(record.kind) {
        let (cr, header_bits) = effective_cr(record, default_cr);
        if !(cr.is_finite() && cr > 0.0) {
            return Err(Error::InvalidInput {
                detail: format!("compression ratio must be positive and finite, got {cr}"),
            });
        }
        transfer_bits(record.value_count, Some(cr), header_bits)
    } else {
        transfer_bits(record.value_count, None, 0)
    };
    Ok(link.transfer_ns(bits))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TransferTiming {
    pub layer_id: String,
    pub kind: TransferKind,
    pub value_count: u64,
    pub src: String,
    pub dst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_cr: Option<f64>,
    pub ns_uncompressed: f64,
    pub ns_weights_only: f64,
    pub ns_lexi: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationReport {
    pub link: LinkModel,
    pub default_cr: f64,
    pub transfer_count: usize,
    pub total_value_count: u64,
    /// Codebook build pipeline charged once per distinct layer that sends
    /// runtime-compressed traffic in full-compression mode.
    pub startup_cycles_per_layer: u64,
    pub startup_layer_count: usize,
    pub startup_ns_total: f64,
    pub total_ns_uncompressed: f64,
    pub total_ns_weights_only: f64,
    pub total_ns_lexi: f64,
    pub reduction_weights_only_percent: f64,
    pub reduction_lexi_percent: f64,
    pub transfers: Vec<TransferTiming>,
}

/// Runs a trace through all three traffic modes.
///
/// The full-compression total includes one codebook-build startup
/// (`CODEBOOK_PIPELINE_CYCLES` plus the histogram phase is modeled separately
/// by [`codebook_latency`]; here only the fixed pipeline is charged) per
/// distinct layer whose traffic is compressed at runtime, i.e. per layer with
/// activation or cache transfers. Offline-compressed weights never pay it.
pub fn simulate_trace(
    records: &[TransferRecord],
    link: &LinkModel,
    default_cr: f64,
) -> Result<SimulationReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trace has no transfers"));
    }
    if !(default_cr.is_finite() && default_cr > 0.0) {
        return Err(Error::InvalidInput {
            detail: format!("compression ratio must be positive and finite, got {default_cr}"),
        });
    }
    let mut transfers = Vec::with_capacity(records.len());
    let mut total_uncompressed = 0.0;
    let mut total_weights_only = 0.0;
    let mut total_lexi = 0.0;
    let mut total_values = 0u64;
    let mut runtime_layers: Vec<&str> = Vec::new();
    for r in records {
        let ns_uncompressed = transfer_time_ns(r, TrafficMode::Uncompressed, link, default_cr)?;
        let ns_weights_only = transfer_time_ns(r, TrafficMode::WeightsOnly, link, default_cr)?;
        let ns_lexi = transfer_time_ns(r, TrafficMode::Lexi, link, default_cr)?;
        total_uncompressed += ns_uncompressed;
        total_weights_only += ns_weights_only;
        total_lexi += ns_lexi;
        total_values += r.value_count;
        if r.kind != TransferKind::Weight && !runtime_layers.iter().any(|l| *l == r.layer_id) {
            runtime_layers.push(&r.layer_id);
        }
        transfers.push(TransferTiming {
            layer_id: r.layer_id.clone(),
            kind: r.kind,
            value_count: r.value_count,
            src: r.src.clone(),
            dst: r.dst.clone(),
            measured_cr: r.measured_cr,
            ns_uncompressed,
            ns_weights_only,
            ns_lexi,
        });
    }
    let startup_ns_total =
        runtime_layers.len() as f64 * CODEBOOK_PIPELINE_CYCLES as f64 * link.cycle_ns;
    total_lexi += startup_ns_total;
    let reduction = |t: f64| 100.0 * (1.0 - t / total_uncompressed);
    Ok(SimulationReport {
        link: *link,
        default_cr,
        transfer_count: records.len(),
        total_value_count: total_values,
        startup_cycles_per_layer: CODEBOOK_PIPELINE_CYCLES as u64,
        startup_layer_count: runtime_layers.len(),
        startup_ns_total,
        total_ns_uncompressed: total_uncompressed,
        total_ns_weights_only: total_weights_only,
        total_ns_lexi: total_lexi,
        reduction_weights_only_percent: reduction(total_weights_only),
        reduction_lexi_percent: reduction(total_lexi),
        transfers,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CodebookLatency {
    pub histogram_phase_cycles: u64,
    pub pipeline_cycles: u64,
    pub total_cycles: u64,
    pub total_ns: f64,
}

/// Latency from first sampled value to a programmed decode table: the
/// histogram phase (`ceil(sample/lanes)` ingest plus arbiter stalls) followed
/// by the fixed sort/tree/program pipeline.
pub fn codebook_latency(
    cfg: &EncoderConfig,
    arbiter_stall_cycles: u64,
    link: &LinkModel,
) -> Result<CodebookLatency> {
    cfg.validate()?;
    let ingest = (cfg.sample_size as u64).div_ceil(cfg.lanes as u64);
    let histogram_phase_cycles = ingest + arbiter_stall_cycles;
    let pipeline_cycles = CODEBOOK_PIPELINE_CYCLES as u64;
    let total_cycles = histogram_phase_cycles + pipeline_cycles;
    Ok(CodebookLatency {
        histogram_phase_cycles,
        pipeline_cycles,
        total_cycles,
        total_ns: total_cycles as f64 * link.cycle_ns,
    })
}
