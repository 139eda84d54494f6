//! Exact and Monte Carlo evaluation of two-stage codecs.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::lossy::NearestTable;
use super::{in_lossless_set, TwoStageCodec};
use crate::block::Block;
use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;
use crate::rng::substream;
use crate::sources::{build_type_table, sample_block, Budget, SourceModel};
use crate::spectra::{plimsup_estimate, PLIMSUP_MIN_SAMPLES};
use crate::tradeoff::TradeoffPoint;

pub const DEFAULT_EXACT_CAP: usize = 20;

/// Hard ceiling for anything that enumerates all `2^n` blocks.
pub const MAX_EXACT_LEN: usize = 24;

/// Longest block for which sampling uses a precomputed nearest table.
const MC_TABLE_MAX_LEN: usize = 20;

/// Monte Carlo samples per substream.
const CHUNK: usize = 4096;

/// A value that is either computed exactly or estimated by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Exact(f64),
    Estimated { mean: f64, stderr: f64, samples: usize },
    /// A sample statistic without a standard error.
    Sampled { value: f64, samples: usize },
}

impl Measured {
    pub fn value(&self) -> f64 {
        match *self {
            Measured::Exact(v) => v,
            Measured::Estimated { mean, .. } => mean,
            Measured::Sampled { value, .. } => value,
        }
    }

    pub fn stderr(&self) -> Option<f64> {
        match *self {
            Measured::Estimated { stderr, .. } => Some(stderr),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Measured::Exact(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub samples: usize,
    pub seed: u64,
    pub exact_cap: usize,
    /// Tail probability for the per-block distortion quantile.
    pub tail: f64,
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, exact_cap: DEFAULT_EXACT_CAP, tail: 0.01, workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecMetrics {
    /// `log2(2M) / n`.
    pub rate: f64,
    /// Expected per-symbol Hamming distortion.
    pub distortion: Measured,
    /// `(1 - tail)`-quantile of the per-symbol block distortion, when
    /// available.
    pub distortion_quantile: Option<Measured>,
    /// Variational distance between reconstruction and source laws; only
    /// computed exactly.
    pub sigma: Option<f64>,
    /// Probability that the lossy branch is used.
    pub epsilon: f64,
}

impl CodecMetrics {
    pub fn operating_point(&self) -> Option<TradeoffPoint> {
        TradeoffPoint::new(self.rate, self.distortion.value(), self.sigma?).ok()
    }
}

/// Exact probability that a block falls outside `T_n`.
pub fn epsilon_exact(model: &SourceModel, n: usize, m: &Budget) -> Result<f64> {
    let table = build_type_table(model, n)?;
    Ok(table.fraction_where(|row| !in_lossless_set(row.log2_atom_prob, m.log2())))
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if cap > MAX_EXACT_LEN {
        return Err(Error::ResourceLimit(format!("exact cap {cap} exceeds {MAX_EXACT_LEN}")));
    }
    if n > cap {
        return Err(Error::ExactCapExceeded { n, cap });
    }
    Ok(())
}

struct ExactPass {
    distortion: f64,
    /// Distortion units `d` (Hamming distance) mapped to probability.
    histogram: Vec<f64>,
    sigma: f64,
}

fn exact_pass(codec: &TwoStageCodec, model: &SourceModel) -> Result<ExactPass> {
    let n = codec.n();
    let atom = model.atom_probs(n);
    let table = NearestTable::build(codec.codebook(), n)?;
    let mut distortion = CompensatedSum::new();
    let mut histogram = vec![CompensatedSum::new(); n + 1];
    let mut lossy_mass = vec![CompensatedSum::new(); codec.codebook().len()];
    for bits in 0..1u64 << n {
        let x = Block::from_raw(bits, n);
        let p = atom[x.ones()];
        if codec.lossless().contains(&x) {
            histogram[0].add(p);
            continue;
        }
        let (j, d) = table.lookup(&x);
        distortion.add(p * d as f64);
        histogram[d].add(p);
        lossy_mass[j].add(p);
    }
    // Merge duplicate codewords; BTreeMap keeps the summation order fixed.
    let mut pushforward: BTreeMap<u64, CompensatedSum> = BTreeMap::new();
    for (c, mass) in codec.codebook().iter().zip(&lossy_mass) {
        pushforward.entry(c.bits()).or_default().add(mass.value());
    }
    // One-sided sum: only reconstruction blocks can gain mass. Lossless
    // members keep their own probability, so their excess is the lossy mass.
    let mut sigma = CompensatedSum::new();
    for (&bits, mass) in &pushforward {
        let y = Block::from_raw(bits, n);
        let excess = if codec.lossless().contains(&y) {
            mass.value()
        } else {
            mass.value() - atom[y.ones()]
        };
        if excess > 0.0 {
            sigma.add(excess);
        }
    }
    Ok(ExactPass {
        distortion: distortion.value() / n as f64,
        histogram: histogram.iter().map(CompensatedSum::value).collect(),
        sigma: sigma.value(),
    })
}

/// Exact `σ(P_{g(f(X^n))}, P_{X^n})` by enumerating all blocks.
pub fn sigma_exact(codec: &TwoStageCodec, model: &SourceModel, exact_cap: usize) -> Result<f64> {
    check_cap(codec.n(), exact_cap)?;
    Ok(exact_pass(codec, model)?.sigma)
}

/// Exact expected per-symbol Hamming distortion.
pub fn exact_distortion(codec: &TwoStageCodec, model: &SourceModel, exact_cap: usize) -> Result<f64> {
    check_cap(codec.n(), exact_cap)?;
    Ok(exact_pass(codec, model)?.distortion)
}

fn histogram_quantile(histogram: &[f64], n: usize, q: f64) -> f64 {
    let mut acc = 0.0;
    for (d, &mass) in histogram.iter().enumerate() {
        acc += mass;
        if acc >= q - 1e-15 {
            return d as f64 / n as f64;
        }
    }
    1.0
}

fn monte_carlo(
    codec: &TwoStageCodec,
    model: &SourceModel,
    opts: &EvalOptions,
) -> Result<(Measured, Option<Measured>)> {
    if opts.samples == 0 {
        return Err(invalid("Monte Carlo evaluation needs at least one sample"));
    }
    let n = codec.n();
    let table = if n <= MC_TABLE_MAX_LEN {
        Some(NearestTable::build(codec.codebook(), n)?)
    } else {
        None
    };
    let chunks = opts.samples.div_ceil(CHUNK);
    let run_chunk = |c: usize| -> Result<Vec<f64>> {
        let mut rng = substream(opts.seed, 1 + c as u64);
        let count = CHUNK.min(opts.samples - c * CHUNK);
        (0..count)
            .map(|_| {
                let (x, _) = sample_block(model, n, &mut rng)?;
                let d = if codec.lossless().contains(&x) {
                    0
                } else if let Some(t) = &table {
                    t.lookup(&x).1
                } else {
                    codec.nearest(&x).1
                };
                Ok(d as f64 / n as f64)
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::ResourceLimit(format!("thread pool: {e}")))?;
    // Ordered collect: merging follows chunk order, not completion order.
    let per_chunk: Vec<Vec<f64>> =
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect::<Result<_>>())?;
    let values: Vec<f64> = per_chunk.into_iter().flatten().collect();

    let count = values.len();
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / count as f64;
    let var = if count > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().value()
            / (count - 1) as f64
    } else {
        0.0
    };
    let distortion = Measured::Estimated { mean, stderr: (var / count as f64).sqrt(), samples: count };
    let quantile = if count >= PLIMSUP_MIN_SAMPLES {
        let q = plimsup_estimate(&[(n, values)], opts.tail)?;
        Some(Measured::Sampled { value: q, samples: count })
    } else {
        None
    };
    Ok((distortion, quantile))
}

/// Rate, distortion, σ and ε of a codec.
///
/// Distortion and σ are exact when `n <= exact_cap`; above it distortion is
/// sampled and σ is left out, since a plug-in estimate of σ is biased.
pub fn evaluate(codec: &TwoStageCodec, model: &SourceModel, opts: &EvalOptions) -> Result<CodecMetrics> {
    if opts.exact_cap > MAX_EXACT_LEN {
        return Err(Error::ResourceLimit(format!("exact cap {} exceeds {MAX_EXACT_LEN}", opts.exact_cap)));
    }
    if !(opts.tail > 0.0 && opts.tail < 0.5) {
        return Err(invalid(format!("tail must lie in (0, 0.5), got {}", opts.tail)));
    }
    let n = codec.n();
    let epsilon = epsilon_exact(model, n, &Budget::new(codec.m())?)?;
    let (distortion, distortion_quantile, sigma) = if n <= opts.exact_cap {
        let pass = exact_pass(codec, model)?;
        let q = histogram_quantile(&pass.histogram, n, 1.0 - opts.tail);
        (Measured::Exact(pass.distortion), Some(Measured::Exact(q)), Some(pass.sigma))
    } else {
        let (d, q) = monte_carlo(codec, model, opts)?;
        (d, q, None)
    };
    Ok(CodecMetrics { rate: codec.rate(), distortion, distortion_quantile, sigma, epsilon })
}
