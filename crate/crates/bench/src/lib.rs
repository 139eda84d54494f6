//! Shared fixtures for the criterion benches.

use rdp_core::{build_codec, LossyMethod, SourceModel, TwoStageCodec};

pub fn paper_source() -> SourceModel {
    SourceModel::paper_mixed()
}

/// A mid-sized codec that keeps both branches busy.
pub fn sample_codec(n: usize, m: u128, method: LossyMethod) -> TwoStageCodec {
    build_codec(&paper_source(), n, m, method, 7).expect("benchmark codec parameters are valid")
}
