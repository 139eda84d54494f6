//! Lossy-stage codebook constructions and nearest-codeword lookup.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::block::Block;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::sources::{sample_block, SourceModel};

pub const RANDOM_MAX_CODEWORDS: u128 = 1 << 20;
pub const GREEDY_MAX_LEN: usize = 24;
pub const GREEDY_MAX_CODEWORDS: u128 = 1 << 16;

pub(super) fn random_codebook(model: &SourceModel, n: usize, m: u128, seed: u64) -> Result<Vec<Block>> {
    if m > RANDOM_MAX_CODEWORDS {
        return Err(Error::ResourceLimit(format!(
            "random codebooks are limited to {RANDOM_MAX_CODEWORDS} codewords, M = {m}"
        )));
    }
    let dominant = model.components()[model.dominant_component()];
    let source = SourceModel::bernoulli(dominant.p)?;
    let mut rng = substream(seed, 0);
    (0..m).map(|_| sample_block(&source, n, &mut rng).map(|(b, _)| b)).collect()
}

pub(super) fn type_quantize_codebook(n: usize, m: u128) -> Result<Vec<Block>> {
    let levels = m.min(n as u128 + 1) as usize;
    let width = (n + 1) as f64 / levels as f64;
    let mut ones: Vec<usize> = (0..levels)
        .map(|i| (((i as f64 + 0.5) * width - 0.5).round() as usize).min(n))
        .collect();
    ones.dedup();
    ones.into_iter().map(|k| Block::balanced(n, k)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    block: u32,
    evaluated_at: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap on gain; the smaller block wins ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.block.cmp(&self.block))
    }
}

/// Greedy codebook minimizing expected Hamming distortion over all blocks.
///
/// Each step adds the block that most reduces `Σ P(x) d(x, codebook)`,
/// starting from distance `n` everywhere. The objective is submodular, so
/// stale heap gains are upper bounds and lazy re-evaluation is exact. The
/// pick sequence does not depend on `M`, so codebooks are nested.
pub(super) fn greedy_cover_codebook(model: &SourceModel, n: usize, m: u128) -> Result<Vec<Block>> {
    if n > GREEDY_MAX_LEN || m > GREEDY_MAX_CODEWORDS {
        return Err(Error::ResourceLimit(format!(
            "greedy covering needs n <= {GREEDY_MAX_LEN} and M <= {GREEDY_MAX_CODEWORDS} (n = {n}, M = {m})"
        )));
    }
    let size = 1usize << n;
    let atom = model.atom_probs(n);
    let weight: Vec<f64> = (0..size).map(|x| atom[(x as u64).count_ones() as usize]).collect();
    let mut dist = vec![n as u8; size];

    let gain_of = |y: usize, dist: &[u8]| -> f64 {
        let mut g = 0.0;
        for (x, (&w, &d)) in weight.iter().zip(dist).enumerate() {
            let e = ((x ^ y).count_ones()) as u8;
            if e < d {
                g += w * (d - e) as f64;
            }
        }
        g
    };

    // Before the first pick the gain depends only on the candidate's weight.
    let class_gain: Vec<f64> = (0..=n).map(|k| gain_of((1usize << k) - 1, &dist)).collect();
    let mut heap: BinaryHeap<Candidate> = (0..size)
        .map(|y| Candidate {
            gain: class_gain[(y as u64).count_ones() as usize],
            block: y as u32,
            evaluated_at: 0,
        })
        .collect();

    let mut picks: Vec<Block> = Vec::new();
    while (picks.len() as u128) < m {
        let Some(top) = heap.pop() else { break };
        if top.evaluated_at as usize == picks.len() {
            if top.gain <= 0.0 {
                break;
            }
            let y = top.block as usize;
            for (x, d) in dist.iter_mut().enumerate() {
                *d = (*d).min(((x ^ y).count_ones()) as u8);
            }
            picks.push(Block::from_raw(y as u64, n));
        } else {
            let gain = gain_of(top.block as usize, &dist);
            heap.push(Candidate { gain, block: top.block, evaluated_at: picks.len() as u32 });
        }
    }
    if picks.is_empty() {
        // Only reachable when every block has zero probability weight.
        picks.push(Block::from_raw(0, n));
    }
    Ok(picks)
}

/// Distance to, and lowest index of, the nearest codeword for every block.
#[derive(Debug, Clone)]
pub struct NearestTable {
    dist: Vec<u8>,
    index: Vec<u32>,
}

impl NearestTable {
    /// Multi-source breadth-first search over the hypercube.
    ///
    /// A block at distance `d` takes the smallest label among its
    /// neighbours at distance `d - 1`, which is the smallest index among
    /// its nearest codewords.
    pub fn build(codebook: &[Block], n: usize) -> Result<Self> {
        if n > crate::codec::MAX_EXACT_LEN {
            return Err(Error::ResourceLimit(format!(
                "nearest-codeword tables need n <= {}",
                crate::codec::MAX_EXACT_LEN
            )));
        }
        let size = 1usize << n;
        let mut dist = vec![u8::MAX; size];
        let mut index = vec![u32::MAX; size];
        let mut layer = Vec::new();
        for (j, c) in codebook.iter().enumerate() {
            let b = c.bits() as usize;
            if dist[b] == u8::MAX {
                dist[b] = 0;
                index[b] = j as u32;
                layer.push(b);
            }
        }
        let mut d = 0u8;
        while !layer.is_empty() {
            let mut next = Vec::new();
            for &u in &layer {
                for bit in 0..n {
                    let v = u ^ (1 << bit);
                    if dist[v] == u8::MAX {
                        dist[v] = d + 1;
                        index[v] = index[u];
                        next.push(v);
                    } else if dist[v] == d + 1 && index[u] < index[v] {
                        index[v] = index[u];
                    }
                }
            }
            layer = next;
            d += 1;
        }
        Ok(Self { dist, index })
    }

    pub fn lookup(&self, x: &Block) -> (usize, usize) {
        let b = x.bits() as usize;
        (self.index[b] as usize, self.dist[b] as usize)
    }
}
