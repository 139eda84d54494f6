//! Two-stage block code.
//!
//! Blocks whose self-information is strictly below `log2 M` are indexed
//! losslessly into `{1, …, M}` by (type class, rank within class). Every
//! other block is sent as `M + j` where `j` is its nearest codeword in a
//! lossy codebook of at most `M` blocks. The index space is `{1, …, 2M}`.

mod eval;
mod lossy;

use std::fmt;
use std::str::FromStr;

pub use eval::{
    epsilon_exact, evaluate, exact_distortion, sigma_exact, CodecMetrics, EvalOptions, Measured,
    DEFAULT_EXACT_CAP, MAX_EXACT_LEN,
};
pub use lossy::{NearestTable, GREEDY_MAX_CODEWORDS, GREEDY_MAX_LEN, RANDOM_MAX_CODEWORDS};

use crate::block::{Block, MAX_DENSE_LEN};
use crate::error::{invalid, Error, Result};
use crate::ranking;
use crate::sources::{exact_binomials, log2_u128, SourceModel};

/// How the lossy codebook is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossyMethod {
    /// Codewords drawn iid from the dominant source component.
    Random,
    /// Greedy mass-weighted Hamming covering; codebooks are nested in `M`.
    GreedyCover,
    /// Evenly spread representatives of quantized ones-counts.
    TypeQuantize,
}

impl LossyMethod {
    pub const ALL: [LossyMethod; 3] = [Self::Random, Self::GreedyCover, Self::TypeQuantize];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::GreedyCover => "greedy-cover",
            Self::TypeQuantize => "type-quantize",
        }
    }
}

impl fmt::Display for LossyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown lossy method `{s}`")))
    }
}

/// Branch rule shared by the codec and the exact epsilon: strict `<`.
pub(crate) fn in_lossless_set(log2_atom_prob: f64, log2_m: f64) -> bool {
    -log2_atom_prob < log2_m
}

/// The high-probability set `T_n`, as a union of whole type classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessStage {
    member: Vec<bool>,
    /// First zero-based index of each class, `None` for excluded classes.
    offsets: Vec<Option<u128>>,
    size: u128,
}

impl LosslessStage {
    fn build(model: &SourceModel, n: usize, log2_m: f64) -> Self {
        let counts = exact_binomials(n);
        let mut member = Vec::with_capacity(n + 1);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut size = 0u128;
        for k in 0..=n {
            let keep = in_lossless_set(model.atom_log_prob(k, n), log2_m);
            member.push(keep);
            if keep {
                offsets.push(Some(size));
                size += counts[k];
            } else {
                offsets.push(None);
            }
        }
        Self { member, offsets, size }
    }

    /// Number of blocks in `T_n`.
    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn contains_class(&self, k: usize) -> bool {
        self.member[k]
    }

    pub fn contains(&self, x: &Block) -> bool {
        self.member[x.ones()]
    }

    /// Ones-counts of the classes in `T_n`, ascending.
    pub fn classes(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&k| self.member[k]).collect()
    }

    fn rank(&self, x: &Block) -> Option<u128> {
        self.offsets[x.ones()].map(|off| off + ranking::rank(x.bits()) as u128)
    }

    fn unrank(&self, n: usize, r: u128) -> Option<Block> {
        if r >= self.size {
            return None;
        }
        // Last class whose offset does not exceed r.
        let (k, off) = self
            .offsets
            .iter()
            .enumerate()
            .filter_map(|(k, o)| o.map(|o| (k, o)))
            .take_while(|&(_, o)| o <= r)
            .last()?;
        Some(Block::from_raw(ranking::unrank(n, k, (r - off) as u64), n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageCodec {
    n: usize,
    m: u128,
    method: Option<LossyMethod>,
    lossless: LosslessStage,
    codebook: Vec<Block>,
}

/// Builds the two-stage codec with per-stage budget `m`.
pub fn build_codec(
    model: &SourceModel,
    n: usize,
    m: u128,
    method: LossyMethod,
    seed: u64,
) -> Result<TwoStageCodec> {
    if n == 0 || n > MAX_DENSE_LEN {
        return Err(invalid(format!("codec block length must lie in 1..={MAX_DENSE_LEN}")));
    }
    if m == 0 {
        return Err(invalid("codeword budget M must be at least 1"));
    }
    if m > u128::MAX / 2 {
        return Err(invalid("codeword budget M is too large for the index space"));
    }
    let lossless = LosslessStage::build(model, n, log2_u128(m));
    // Every member has probability above 1/M, so fewer than M of them exist.
    if lossless.size >= m {
        return Err(Error::Capacity { size: lossless.size, budget: m });
    }
    let codebook = match method {
        LossyMethod::Random => lossy::random_codebook(model, n, m, seed)?,
        LossyMethod::GreedyCover => lossy::greedy_cover_codebook(model, n, m)?,
        LossyMethod::TypeQuantize => lossy::type_quantize_codebook(n, m)?,
    };
    debug_assert!(!codebook.is_empty() && codebook.len() as u128 <= m);
    Ok(TwoStageCodec { n, m, method: Some(method), lossless, codebook })
}

impl TwoStageCodec {
    /// Assembles a codec around an explicit lossy codebook.
    pub fn with_codebook(model: &SourceModel, n: usize, m: u128, codebook: Vec<Block>) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_LEN || m == 0 || m > u128::MAX / 2 {
            return Err(invalid("invalid block length or budget"));
        }
        if codebook.is_empty() || codebook.len() as u128 > m {
            return Err(invalid(format!("codebook must hold between 1 and {m} blocks")));
        }
        if codebook.iter().any(|c| c.len() != n) {
            return Err(invalid("codebook blocks must have length n"));
        }
        let lossless = LosslessStage::build(model, n, log2_u128(m));
        if lossless.size >= m {
            return Err(Error::Capacity { size: lossless.size, budget: m });
        }
        Ok(Self { n, m, method: None, lossless, codebook })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u128 {
        self.m
    }

    /// `None` for codecs assembled from an explicit codebook.
    pub fn method(&self) -> Option<LossyMethod> {
        self.method
    }

    pub fn lossless(&self) -> &LosslessStage {
        &self.lossless
    }

    pub fn codebook(&self) -> &[Block] {
        &self.codebook
    }

    /// `log2(2M) / n`.
    pub fn rate(&self) -> f64 {
        (log2_u128(self.m) + 1.0) / self.n as f64
    }

    /// Lowest-index nearest codeword and its distance.
    pub fn nearest(&self, x: &Block) -> (usize, usize) {
        let mut best = (0, usize::MAX);
        for (j, c) in self.codebook.iter().enumerate() {
            let d = x.hamming(c);
            if d < best.1 {
                best = (j, d);
                if d == 0 {
                    break;
                }
            }
        }
        best
    }

    /// Index in `{1, …, 2M}`.
    pub fn encode(&self, x: &Block) -> Result<u128> {
        if x.len() != self.n {
            return Err(invalid(format!("block has length {}, codec expects {}", x.len(), self.n)));
        }
        Ok(match self.lossless.rank(x) {
            Some(r) => 1 + r,
            None => self.m + 1 + self.nearest(x).0 as u128,
        })
    }

    pub fn decode(&self, index: u128) -> Result<Block> {
        let fail = |reason: &str| Error::Decode { index, reason: reason.to_string() };
        if index == 0 || index > 2 * self.m {
            return Err(fail("outside the index space {1, …, 2M}"));
        }
        if index <= self.m {
            self.lossless
                .unrank(self.n, index - 1)
                .ok_or_else(|| fail("lossless index not assigned to any block"))
        } else {
            let j = index - self.m - 1;
            self.codebook
                .get(j as usize)
                .copied()
                .ok_or_else(|| fail("lossy index beyond the codebook"))
        }
    }

    /// `decode(encode(x))` without the round trip through the index.
    pub fn reconstruct(&self, x: &Block) -> Block {
        if self.lossless.contains(x) {
            *x
        } else {
            self.codebook[self.nearest(x).0]
        }
    }
}
