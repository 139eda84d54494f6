//! Exhaustive (distortion, σ) frontiers of deterministic block codes.
//!
//! A deterministic encoder/decoder pair with at most `M` reconstruction
//! values is the same thing as a map `φ: {0,1}^n → {0,1}^n` whose image has
//! at most `M` elements, so the search runs over such maps directly.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::block::Block;
use crate::error::{invalid, Error, Result};
use crate::rng::substream;
use crate::sources::{top_mass, Budget, SourceModel};

/// Largest block length searched exhaustively.
pub const EXHAUSTIVE_MAX_LEN: usize = 3;
/// Largest block length accepted by the heuristic search.
pub const HEURISTIC_MAX_LEN: usize = 4;
/// Coordinate tolerance used by Pareto filtering.
pub const PARETO_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    /// Local search from random restarts; the result is not certified.
    Heuristic { restarts: usize, seed: u64 },
}

/// A codec given by its reconstruction codebook and encoder table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub codebook: Vec<Block>,
    /// `encoder[x]` is the codebook position used for block `x`.
    pub encoder: Vec<usize>,
}

impl Witness {
    fn from_map(map: &[u8], n: usize) -> Self {
        let mut image: Vec<u8> = map.to_vec();
        image.sort_unstable();
        image.dedup();
        let encoder = map.iter().map(|y| image.binary_search(y).unwrap()).collect();
        let codebook = image.into_iter().map(|y| Block::from_raw(y as u64, n)).collect();
        Self { codebook, encoder }
    }

    /// Exact `(D, σ)` of this codec.
    pub fn evaluate(&self, model: &SourceModel, n: usize) -> (f64, f64) {
        let map: Vec<u8> = self.encoder.iter().map(|&j| self.codebook[j].bits() as u8).collect();
        Evaluator::new(model, n).eval(&map)
    }

    /// `codebook-blocks encoder-digits`, e.g. `00,11 0001`.
    pub fn to_line(&self) -> String {
        let book: Vec<String> = self.codebook.iter().map(Block::to_string).collect();
        let digits: String = self
            .encoder
            .iter()
            .map(|&j| char::from_digit(j as u32, 36).expect("codebooks hold at most 16 blocks"))
            .collect();
        format!("{} {}", book.join(","), digits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub m: usize,
    pub distortion: f64,
    pub sigma: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub n: usize,
    pub m: usize,
    pub exhaustive: bool,
    /// Ascending in distortion, descending in σ.
    pub points: Vec<FrontierPoint>,
}

impl Frontier {
    pub fn min_distortion(&self) -> f64 {
        self.points.iter().map(|p| p.distortion).fold(f64::INFINITY, f64::min)
    }

    pub fn min_sigma(&self) -> f64 {
        self.points.iter().map(|p| p.sigma).fold(f64::INFINITY, f64::min)
    }

    /// Whether some frontier point is at least as good in both coordinates.
    pub fn weakly_dominates(&self, distortion: f64, sigma: f64) -> bool {
        self.points.iter().any(|p| {
            p.distortion <= distortion + PARETO_TOLERANCE && p.sigma <= sigma + PARETO_TOLERANCE
        })
    }
}

struct Evaluator {
    n: usize,
    prob: Vec<f64>,
}

impl Evaluator {
    fn new(model: &SourceModel, n: usize) -> Self {
        let atom = model.atom_probs(n);
        let prob = (0..1u32 << n).map(|x| atom[x.count_ones() as usize]).collect();
        Self { n, prob }
    }

    fn size(&self) -> usize {
        self.prob.len()
    }

    fn eval(&self, map: &[u8]) -> (f64, f64) {
        let mut recon = [0.0f64; 16];
        let mut distortion = 0.0;
        for (x, &y) in map.iter().enumerate() {
            let p = self.prob[x];
            distortion += p * (x as u32 ^ y as u32).count_ones() as f64;
            recon[y as usize] += p;
        }
        let sigma = (0..self.size()).map(|y| (recon[y] - self.prob[y]).max(0.0)).sum();
        (distortion / self.n as f64, sigma)
    }
}

/// Pareto antichain; the first point inserted wins near-ties.
#[derive(Default)]
struct Archive {
    points: Vec<(f64, f64, Vec<u8>)>,
}

impl Archive {
    fn insert(&mut self, d: f64, s: f64, map: &[u8]) {
        let tol = PARETO_TOLERANCE;
        if self.points.iter().any(|(pd, ps, _)| *pd <= d + tol && *ps <= s + tol) {
            return;
        }
        self.points.retain(|(pd, ps, _)| !(d <= *pd + tol && s <= *ps + tol));
        self.points.push((d, s, map.to_vec()));
    }

    fn merge(&mut self, other: Archive) {
        for (d, s, map) in other.points {
            self.insert(d, s, &map);
        }
    }
}

struct Partial {
    map: Vec<u8>,
    image: u16,
    distortion: f64,
    recon: [f64; 16],
}

fn dfs(ev: &Evaluator, budget: usize, state: &mut Partial, archive: &mut Archive) {
    let size = ev.size();
    let x = state.map.len();
    if x == size {
        let sigma = (0..size).map(|y| (state.recon[y] - ev.prob[y]).max(0.0)).sum();
        archive.insert(state.distortion / ev.n as f64, sigma, &state.map);
        return;
    }
    let p = ev.prob[x];
    for y in 0..size as u8 {
        let next = state.image | (1 << y);
        if next.count_ones() as usize > budget {
            continue;
        }
        // Same accumulation order as `Evaluator::eval`, so witnesses
        // re-evaluate to identical values.
        let (saved_d, saved_r, saved_i) = (state.distortion, state.recon[y as usize], state.image);
        state.distortion += p * (x as u32 ^ y as u32).count_ones() as f64;
        state.recon[y as usize] += p;
        state.image = next;
        state.map.push(y);
        dfs(ev, budget, state, archive);
        state.map.pop();
        state.distortion = saved_d;
        state.recon[y as usize] = saved_r;
        state.image = saved_i;
    }
}

fn exhaustive(ev: &Evaluator, budget: usize) -> Archive {
    let size = ev.size();
    // One task per value of φ(0); merging in task order keeps the
    // lexicographically first witness on ties.
    let parts: Vec<Archive> = (0..size as u8)
        .into_par_iter()
        .map(|y0| {
            let mut archive = Archive::default();
            let p = ev.prob[0];
            let mut recon = [0.0; 16];
            recon[y0 as usize] += p;
            let mut state = Partial {
                map: vec![y0],
                image: 1 << y0,
                distortion: 0.0 + p * (y0 as u32).count_ones() as f64,
                recon,
            };
            dfs(ev, budget, &mut state, &mut archive);
            archive
        })
        .collect();
    let mut all = Archive::default();
    for part in parts {
        all.merge(part);
    }
    all
}

fn local_search(ev: &Evaluator, budget: usize, restarts: usize, seed: u64) -> Archive {
    let size = ev.size();
    let parts: Vec<Archive> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let alpha = if restarts > 1 { r as f64 / (restarts - 1) as f64 } else { 0.5 };
            let objective = |(d, s): (f64, f64)| alpha * d + (1.0 - alpha) * s;
            let mut archive = Archive::default();

            let book: Vec<u8> = sample(&mut rng, size, budget).into_iter().map(|y| y as u8).collect();
            let mut map: Vec<u8> = (0..size).map(|_| book[rng.random_range(0..book.len())]).collect();
            let mut uses = vec![0usize; size];
            for &y in &map {
                uses[y as usize] += 1;
            }
            let mut current = ev.eval(&map);
            archive.insert(current.0, current.1, &map);
            loop {
                let mut improved = false;
                for x in 0..size {
                    let old = map[x];
                    let image = uses.iter().filter(|&&u| u > 0).count();
                    for y in 0..size as u8 {
                        if y == old {
                            continue;
                        }
                        let grows = uses[y as usize] == 0;
                        let shrinks = uses[old as usize] == 1;
                        if grows && !shrinks && image >= budget {
                            continue;
                        }
                        map[x] = y;
                        let cand = ev.eval(&map);
                        archive.insert(cand.0, cand.1, &map);
                        if objective(cand) < objective(current) - 1e-15 {
                            uses[old as usize] -= 1;
                            uses[y as usize] += 1;
                            current = cand;
                            improved = true;
                            break;
                        }
                        map[x] = old;
                    }
                }
                if !improved {
                    break;
                }
            }
            archive
        })
        .collect();
    let mut all = Archive::default();
    for part in parts {
        all.merge(part);
    }
    all
}

/// Pareto frontier of exact `(D, σ)` over all deterministic codecs with at
/// most `m` reconstruction values.
pub fn enumerate_frontier(model: &SourceModel, n: usize, m: usize, mode: SearchMode) -> Result<Frontier> {
    if n == 0 {
        return Err(invalid("block length must be at least 1"));
    }
    if m == 0 {
        return Err(invalid("codebook size must be at least 1"));
    }
    let size = 1usize << n.min(HEURISTIC_MAX_LEN + 1);
    let budget = m.min(size);
    let ev = Evaluator::new(model, n.min(HEURISTIC_MAX_LEN));
    let (archive, exhaustive_run) = match mode {
        SearchMode::Exhaustive => {
            if n > EXHAUSTIVE_MAX_LEN {
                return Err(Error::ResourceLimit(format!(
                    "exhaustive frontier search needs n <= {EXHAUSTIVE_MAX_LEN}; use the heuristic for n = {HEURISTIC_MAX_LEN}"
                )));
            }
            (exhaustive(&ev, budget), true)
        }
        SearchMode::Heuristic { restarts, seed } => {
            if n > HEURISTIC_MAX_LEN {
                return Err(Error::ResourceLimit(format!(
                    "heuristic frontier search needs n <= {HEURISTIC_MAX_LEN}"
                )));
            }
            if restarts == 0 {
                return Err(invalid("heuristic search needs at least one restart"));
            }
            (local_search(&ev, budget, restarts, seed), false)
        }
    };
    let mut points: Vec<FrontierPoint> = archive
        .points
        .into_iter()
        .map(|(distortion, sigma, map)| FrontierPoint {
            m,
            distortion,
            sigma,
            witness: Witness::from_map(&map, n),
        })
        .collect();
    points.sort_by(|a, b| a.distortion.total_cmp(&b.distortion).then(b.sigma.total_cmp(&a.sigma)));
    Ok(Frontier { n, m, exhaustive: exhaustive_run, points })
}

/// Minimum σ over codecs with at most `m` reconstruction values:
/// `1 - (mass of the m most probable blocks)`.
pub fn min_sigma_closed_form(model: &SourceModel, n: usize, m: &Budget) -> Result<f64> {
    Ok(1.0 - top_mass(model, n, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{binary_entropy, binary_entropy_inv};

    fn uniform() -> SourceModel {
        SourceModel::bernoulli(0.5).unwrap()
    }

    #[test]
    fn single_codeword_n1() {
        let f = enumerate_frontier(&uniform(), 1, 1, SearchMode::Exhaustive).unwrap();
        assert_eq!(f.points.len(), 1);
        assert_eq!((f.points[0].distortion, f.points[0].sigma), (0.5, 0.5));
        // Ties keep the first witness in enumeration order.
        assert_eq!(f.points[0].witness.to_line(), "0 00");
    }

    #[test]
    fn two_codewords_n2() {
        let f = enumerate_frontier(&uniform(), 2, 2, SearchMode::Exhaustive).unwrap();
        assert!(f.points.iter().any(|p| (p.distortion - 0.25).abs() < 1e-12 && (p.sigma - 0.5).abs() < 1e-12));
        assert!((f.min_distortion() - 0.25).abs() < 1e-12);
        assert!((f.min_sigma() - 0.5).abs() < 1e-12);
        let closed = min_sigma_closed_form(&uniform(), 2, &Budget::new(2).unwrap()).unwrap();
        assert!((f.min_sigma() - closed).abs() < 1e-12);
    }

    #[test]
    fn full_budget_contains_identity() {
        for model in [uniform(), SourceModel::paper_mixed()] {
            for n in 1..=3 {
                let f = enumerate_frontier(&model, n, 1 << n, SearchMode::Exhaustive).unwrap();
                assert_eq!(f.points.len(), 1);
                assert_eq!((f.points[0].distortion, f.points[0].sigma), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((min_sigma_closed_form(&uniform(), 2, &Budget::new(2).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(min_sigma_closed_form(&SourceModel::paper_mixed(), 6, &Budget::pow2(6)).unwrap(), 0.0);
        let v = min_sigma_closed_form(&SourceModel::paper_mixed(), 2, &Budget::new(1).unwrap()).unwrap();
        assert!((v - 19.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn frontier_properties_over_configurations() {
        let models = [uniform(), SourceModel::paper_mixed(), "bernoulli:0.2".parse().unwrap(), "mix:0.3*0.1,0.7*0.65".parse().unwrap()];
        for model in &models {
            for n in 1..=3usize {
                let budgets: Vec<usize> = if n < 3 { (1..=1 << n).collect() } else { vec![1, 2, 3, 4, 8] };
                for m in budgets {
                    let f = enumerate_frontier(model, n, m, SearchMode::Exhaustive).unwrap();
                    let closed = min_sigma_closed_form(model, n, &Budget::new(m as u128).unwrap()).unwrap();
                    assert!((f.min_sigma() - closed).abs() <= 1e-12, "n={n} m={m}");
                    for w in f.points.windows(2) {
                        // Antichain: D strictly up, σ strictly down.
                        assert!(w[1].distortion > w[0].distortion + PARETO_TOLERANCE);
                        assert!(w[1].sigma < w[0].sigma - PARETO_TOLERANCE);
                    }
                    for p in &f.points {
                        let (d, s) = p.witness.evaluate(model, n);
                        assert_eq!((d, s), (p.distortion, p.sigma));
                        assert!(p.witness.codebook.len() <= m);
                        assert!(p.sigma >= closed - 1e-12);
                        if let [c] = model.components() {
                            let rate = (m as f64).log2() / n as f64;
                            let gap = (binary_entropy(c.p).unwrap() - rate).max(0.0);
                            assert!(p.distortion >= binary_entropy_inv(gap).unwrap() - 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn heuristic_is_flagged_and_sound() {
        let model = SourceModel::paper_mixed();
        let mode = SearchMode::Heuristic { restarts: 16, seed: 1 };
        let f = enumerate_frontier(&model, 4, 3, mode).unwrap();
        assert!(!f.exhaustive);
        assert!(!f.points.is_empty());
        let closed = min_sigma_closed_form(&model, 4, &Budget::new(3).unwrap()).unwrap();
        for p in &f.points {
            assert!(p.sigma >= closed - 1e-12);
            assert!(p.witness.codebook.len() <= 3);
        }
        assert_eq!(f, enumerate_frontier(&model, 4, 3, mode).unwrap());
        // Heuristic at n = 3 never beats the exhaustive frontier.
        let exact = enumerate_frontier(&model, 3, 3, SearchMode::Exhaustive).unwrap();
        let approx = enumerate_frontier(&model, 3, 3, mode).unwrap();
        for p in &approx.points {
            assert!(exact.weakly_dominates(p.distortion, p.sigma));
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(enumerate_frontier(&uniform(), 4, 2, SearchMode::Exhaustive), Err(Error::ResourceLimit(_))));
        let h = SearchMode::Heuristic { restarts: 4, seed: 0 };
        assert!(matches!(enumerate_frontier(&uniform(), 5, 2, h), Err(Error::ResourceLimit(_))));
        assert!(enumerate_frontier(&uniform(), 2, 0, SearchMode::Exhaustive).is_err());
    }
}
