//! Lossless compression of BF16 tensor streams built around the observation
//! that almost all of the information sits in the 8-bit exponent field.
//!
//! The pipeline: sample a layer's exponents into a histogram (modelled after a
//! multi-lane cached hardware unit), build a canonical Huffman codebook with an
//! escape symbol for exponents outside the top 32, pack sign/mantissa/exponent
//! planes into fixed 128-bit flits (or a file container), and decode through a
//! four-stage lookup pipeline. Baseline codecs (RLE, base-delta) and a link
//! timing model round out the crate so compression ratios and transfer-time
//! reductions can be measured end to end.

pub mod baselines;
pub mod bf16;
pub mod bitio;
pub mod codebook;
pub mod container;
pub mod error;
pub mod flit;
pub mod histogram;
pub mod io;
pub mod stream;
pub mod synth;
pub mod timing;

pub use bf16::{profile_stream, Bf16Triple, FieldEntropyReport};
pub use codebook::{
    build_layer_codebook, Code, Codebook, CycleReport, DecoderTables, LayerBuild, Symbol,
};
pub use container::{compress_to_vec, decompress_from_slice, ContainerStats};
pub use error::{Error, Result};
pub use flit::Flit;
pub use histogram::{run_histogram, EncoderConfig, ExponentHistogram, LaneCache};
pub use stream::{decode_flit, decode_layer, encode_layer, EncodedLayer, EncodeStats};
pub use timing::{
    simulate_trace, transfer_time_ns, LinkModel, SimulationReport, TrafficMode, TransferKind,
    TransferRecord,
};
