//! Binary memoryless sources and finite mixtures of them.
//!
//! Every block probability depends only on the ones-count `k`, so the exact
//! computations run over the `n + 1` type classes instead of all `2^n`
//! blocks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::block::{Block, MAX_DENSE_LEN};
use crate::error::{invalid, Error, Result};
use crate::numeric::{log2_one_minus, log2_sum_exp2, xlog2y, CompensatedSum};

/// Allowed deviation of the mixture weights from a unit sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Largest block length with exact integer binomial coefficients.
pub const EXACT_BINOMIAL_MAX_N: usize = 64;

/// One memoryless Bernoulli component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    /// Probability of symbol 1.
    pub p: f64,
}

/// A weighted finite mixture of Bernoulli sources.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    components: Vec<Component>,
}

impl SourceModel {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("a source needs at least one component"));
        }
        for c in &components {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(invalid(format!("component weight {} must lie in (0, 1]", c.weight)));
            }
            if !(0.0..=1.0).contains(&c.p) {
                return Err(invalid(format!("component probability {} must lie in [0, 1]", c.p)));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![Component { weight: 1.0, p }])
    }

    /// Equal mixture of Bernoulli(1/2) and Bernoulli(3/4).
    pub fn paper_mixed() -> Self {
        Self {
            components: vec![
                Component { weight: 0.5, p: 0.5 },
                Component { weight: 0.5, p: 0.75 },
            ],
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_single(&self) -> bool {
        self.components.len() == 1
    }

    pub fn is_paper_mixed(&self) -> bool {
        *self == Self::paper_mixed()
    }

    /// Index of the component with the largest entropy; ties go to the
    /// heavier, then earlier, component.
    pub fn dominant_component(&self) -> usize {
        let mut best = 0;
        for (j, c) in self.components.iter().enumerate().skip(1) {
            let b = &self.components[best];
            let (hc, hb) = (crate::spectra::entropy_unchecked(c.p), crate::spectra::entropy_unchecked(b.p));
            if hc > hb || (hc == hb && c.weight > b.weight) {
                best = j;
            }
        }
        best
    }

    /// Log2-probability of any single block of length `n` with `k` ones.
    pub fn block_log_prob(&self, k: usize, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(invalid("block length must be at least 1"));
        }
        if k > n {
            return Err(invalid(format!("ones-count {k} exceeds block length {n}")));
        }
        Ok(self.atom_log_prob(k, n))
    }

    pub(crate) fn atom_log_prob(&self, k: usize, n: usize) -> f64 {
        let (k, zeros) = (k as f64, (n - k) as f64);
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                let ones_part = xlog2y(k, c.p);
                let zeros_part = if zeros == 0.0 { 0.0 } else { zeros * log2_one_minus(c.p) };
                c.weight.log2() + ones_part + zeros_part
            })
            .collect();
        log2_sum_exp2(&terms)
    }

    /// Per-ones-count atom probabilities for dense enumeration.
    pub(crate) fn atom_probs(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.atom_log_prob(k, n).exp2()).collect()
    }
}

impl fmt::Display for SourceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_paper_mixed() {
            return f.write_str("paper-mixed");
        }
        if let [c] = self.components.as_slice() {
            return write!(f, "bernoulli:{}", c.p);
        }
        f.write_str("mix:")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}*{}", c.weight, c.p)?;
        }
        Ok(())
    }
}

impl FromStr for SourceModel {
    type Err = Error;

    /// Accepts `paper-mixed`, `bernoulli:p` or `mix:w1*p1,w2*p2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: String| Error::ParseSource { spec: s.to_string(), reason };
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| fail(format!("`{}` is not a number ({e})", t.trim())))
        };
        let spec = s.trim();
        let model = if spec == "paper-mixed" {
            Ok(Self::paper_mixed())
        } else if let Some(p) = spec.strip_prefix("bernoulli:") {
            Self::bernoulli(number(p)?)
        } else if let Some(list) = spec.strip_prefix("mix:") {
            let components = list
                .split(',')
                .map(|item| {
                    let (w, p) = item
                        .split_once('*')
                        .ok_or_else(|| fail(format!("component `{item}` is not `weight*p`")))?;
                    Ok(Component { weight: number(w)?, p: number(p)? })
                })
                .collect::<Result<Vec<_>>>()?;
            Self::new(components)
        } else {
            return Err(fail("expected `paper-mixed`, `bernoulli:p` or `mix:w*p,...`".into()));
        };
        model.map_err(|e| match e {
            Error::InvalidArgument(reason) => fail(reason),
            other => other,
        })
    }
}

/// One ones-count class of `{0,1}^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeClass {
    pub k: usize,
    /// `C(n, k)` exactly, when `n <= 64`.
    pub count: Option<u128>,
    pub log2_count: f64,
    /// Log2-probability of each single block in the class.
    pub log2_atom_prob: f64,
}

impl TypeClass {
    pub fn log2_mass(&self) -> f64 {
        self.log2_count + self.log2_atom_prob
    }

    pub fn mass(&self) -> f64 {
        self.log2_mass().exp2()
    }

    /// Normalized self-information `-(1/n) log2 P(x)` of the class atoms.
    pub fn rate(&self, n: usize) -> f64 {
        -self.log2_atom_prob / n as f64
    }
}

/// Exact block statistics of a source at block length `n`.
#[derive(Debug, Clone)]
pub struct TypeClassTable {
    pub n: usize,
    pub rows: Vec<TypeClass>,
}

impl TypeClassTable {
    pub fn total_mass(&self) -> f64 {
        let logs: Vec<f64> = self.rows.iter().map(TypeClass::log2_mass).collect();
        log2_sum_exp2(&logs).exp2()
    }

    /// Probability of the classes selected by `keep`, normalized by the
    /// computed total so that selecting every class gives exactly 1.
    pub fn fraction_where(&self, keep: impl FnMut(&TypeClass) -> bool) -> f64 {
        (self.mass_where(keep) / self.total_mass()).min(1.0)
    }

    /// Sum of class masses selected by `keep`, accumulated in the log domain.
    pub fn mass_where(&self, mut keep: impl FnMut(&TypeClass) -> bool) -> f64 {
        let logs: Vec<f64> = self.rows.iter().filter(|r| keep(r)).map(TypeClass::log2_mass).collect();
        if logs.is_empty() {
            0.0
        } else {
            log2_sum_exp2(&logs).exp2()
        }
    }
}

pub(crate) fn exact_binomials(n: usize) -> Vec<u128> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c: u128 = 1;
    row.push(c);
    for k in 1..=n {
        c = c * (n - k + 1) as u128 / k as u128;
        row.push(c);
    }
    row
}

pub fn build_type_table(model: &SourceModel, n: usize) -> Result<TypeClassTable> {
    if n == 0 {
        return Err(invalid("block length must be at least 1"));
    }
    let exact = (n <= EXACT_BINOMIAL_MAX_N).then(|| exact_binomials(n));
    let rows = (0..=n)
        .map(|k| {
            let count = exact.as_ref().map(|row| row[k]);
            let log2_count = match count {
                Some(c) => (c as f64).log2(),
                None => statrs::function::factorial::ln_binomial(n as u64, k as u64)
                    / std::f64::consts::LN_2,
            };
            TypeClass { k, count, log2_count, log2_atom_prob: model.atom_log_prob(k, n) }
        })
        .collect();
    Ok(TypeClassTable { n, rows })
}

pub fn block_log_prob(model: &SourceModel, k: usize, n: usize) -> Result<f64> {
    model.block_log_prob(k, n)
}

fn draw_component<R: Rng + ?Sized>(model: &SourceModel, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, c) in model.components.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            return j;
        }
    }
    model.components.len() - 1
}

fn draw_bit<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    // Strict comparison keeps p = 0 and p = 1 degenerate.
    rng.random::<f64>() < p
}

/// Draws a dense block; returns the latent component index alongside it.
pub fn sample_block<R: Rng + ?Sized>(
    model: &SourceModel,
    n: usize,
    rng: &mut R,
) -> Result<(Block, usize)> {
    if n == 0 || n > MAX_DENSE_LEN {
        return Err(invalid(format!("dense sampling needs 1 <= n <= {MAX_DENSE_LEN}")));
    }
    let j = draw_component(model, rng);
    let p = model.components[j].p;
    let mut bits = 0u64;
    for _ in 0..n {
        bits = (bits << 1) | draw_bit(p, rng) as u64;
    }
    Ok((Block::from_raw(bits, n), j))
}

/// Draws only the ones-count of a block, for lengths too long to store.
pub fn sample_ones<R: Rng + ?Sized>(
    model: &SourceModel,
    n: usize,
    rng: &mut R,
) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(invalid("block length must be at least 1"));
    }
    let j = draw_component(model, rng);
    let binom = Binomial::new(n as u64, model.components[j].p)
        .map_err(|e| invalid(format!("binomial sampler: {e}")))?;
    Ok((binom.sample(rng) as usize, j))
}

/// Size of a codebook or reconstruction set, possibly astronomically large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    count: Option<u128>,
    log2: f64,
}

impl Budget {
    pub fn new(count: u128) -> Result<Self> {
        if count == 0 {
            return Err(invalid("budget must be at least 1"));
        }
        Ok(Self { count: Some(count), log2: log2_u128(count) })
    }

    /// `2^exponent`; kept exact while it fits in 128 bits.
    pub fn pow2(exponent: u32) -> Self {
        let count = (exponent < 128).then(|| 1u128 << exponent);
        Self { count, log2: exponent as f64 }
    }

    /// `floor(2^(n * rate))`.
    pub fn from_rate(n: usize, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid(format!("rate {rate} must be a finite non-negative number")));
        }
        let bits = n as f64 * rate;
        if bits < 127.0 {
            Self::new((bits.exp2().floor() as u128).max(1))
        } else {
            Ok(Self { count: None, log2: bits })
        }
    }

    pub fn count(&self) -> Option<u128> {
        self.count
    }

    pub fn log2(&self) -> f64 {
        self.log2
    }

    /// Twice the budget (the two-stage index space).
    pub fn doubled(&self) -> Self {
        Self { count: self.count.and_then(|c| c.checked_mul(2)), log2: self.log2 + 1.0 }
    }
}

pub(crate) fn log2_u128(x: u128) -> f64 {
    (x as f64).log2()
}

/// Total probability of the `budget` most probable blocks of length `n`.
pub fn top_mass(model: &SourceModel, n: usize, budget: &Budget) -> Result<f64> {
    let table = build_type_table(model, n)?;
    if budget.log2 >= n as f64 {
        return Ok(1.0);
    }
    let mut rows = table.rows.clone();
    rows.sort_by(|a, b| b.log2_atom_prob.total_cmp(&a.log2_atom_prob).then(a.k.cmp(&b.k)));
    let mut acc = CompensatedSum::new();
    match budget.count {
        Some(mut remaining) if n <= EXACT_BINOMIAL_MAX_N => {
            for r in &rows {
                if remaining == 0 {
                    break;
                }
                let size = r.count.expect("exact counts below the cap");
                let take = remaining.min(size);
                acc.add((log2_u128(take) + r.log2_atom_prob).exp2());
                remaining -= take;
            }
        }
        _ => {
            // Log-domain budget for block lengths beyond exact integers.
            let mut log2_remaining = budget.log2;
            for r in &rows {
                if log2_remaining == f64::NEG_INFINITY {
                    break;
                }
                if r.log2_count <= log2_remaining {
                    acc.add(r.mass());
                    let ratio = (r.log2_count - log2_remaining).exp2();
                    log2_remaining = if ratio >= 1.0 {
                        f64::NEG_INFINITY
                    } else {
                        log2_remaining + (-ratio).ln_1p() / std::f64::consts::LN_2
                    };
                } else {
                    acc.add((log2_remaining + r.log2_atom_prob).exp2());
                    log2_remaining = f64::NEG_INFINITY;
                }
            }
        }
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn parses_all_forms() {
        assert_eq!("paper-mixed".parse::<SourceModel>().unwrap(), SourceModel::paper_mixed());
        assert_eq!(
            "mix:0.5*0.5,0.5*0.75".parse::<SourceModel>().unwrap(),
            SourceModel::paper_mixed()
        );
        let b: SourceModel = "bernoulli:0.3".parse().unwrap();
        assert_eq!(b.components(), &[Component { weight: 1.0, p: 0.3 }]);
        assert_eq!(b.to_string(), "bernoulli:0.3");
        assert_eq!(SourceModel::paper_mixed().to_string(), "paper-mixed");
        let m: SourceModel = "mix:0.25*0.5,0.75*0.75".parse().unwrap();
        assert_eq!(m.to_string().parse::<SourceModel>().unwrap(), m);
    }

    #[test]
    fn rejects_bad_sources() {
        for bad in ["", "bernoulli:1.5", "bernoulli:x", "mix:0.5*0.5", "mix:0.5*0.5,0.6*0.2", "mix:0.5,0.5", "gauss:1"] {
            assert!(bad.parse::<SourceModel>().is_err(), "{bad}");
        }
        assert!(SourceModel::new(vec![]).is_err());
        assert!(SourceModel::new(vec![Component { weight: 0.0, p: 0.5 }, Component { weight: 1.0, p: 0.5 }]).is_err());
    }

    #[test]
    fn block_log_prob_examples() {
        let uniform = SourceModel::bernoulli(0.5).unwrap();
        assert_eq!(uniform.block_log_prob(3, 8).unwrap(), -8.0);
        let mixed = SourceModel::paper_mixed();
        close(mixed.block_log_prob(1, 1).unwrap(), (5.0f64 / 8.0).log2(), 1e-15);
        close(mixed.block_log_prob(1, 1).unwrap(), -0.678072, 1e-6);
        close(mixed.block_log_prob(0, 2).unwrap(), (5.0f64 / 32.0).log2(), 1e-15);
        assert!(mixed.block_log_prob(3, 2).is_err());
        assert!(mixed.block_log_prob(0, 0).is_err());
    }

    #[test]
    fn degenerate_components() {
        let ones = SourceModel::bernoulli(1.0).unwrap();
        assert_eq!(ones.block_log_prob(4, 4).unwrap(), 0.0);
        assert_eq!(ones.block_log_prob(3, 4).unwrap(), f64::NEG_INFINITY);
        let zeros = SourceModel::bernoulli(0.0).unwrap();
        assert_eq!(zeros.block_log_prob(0, 4).unwrap(), 0.0);
    }

    #[test]
    fn type_table_examples() {
        let uniform = build_type_table(&SourceModel::bernoulli(0.5).unwrap(), 2).unwrap();
        let got: Vec<_> = uniform.rows.iter().map(|r| (r.k, r.count.unwrap(), r.log2_atom_prob)).collect();
        assert_eq!(got, vec![(0, 1, -2.0), (1, 2, -2.0), (2, 1, -2.0)]);

        let mixed = build_type_table(&SourceModel::paper_mixed(), 1).unwrap();
        assert_eq!(mixed.rows[0].count, Some(1));
        assert_eq!(mixed.rows[1].count, Some(1));
        close(mixed.rows[0].log2_atom_prob, (3.0f64 / 8.0).log2(), 1e-15);
        close(mixed.rows[1].log2_atom_prob, (5.0f64 / 8.0).log2(), 1e-15);
    }

    #[test]
    fn type_table_mass_is_one_for_long_blocks() {
        for n in [1usize, 10, 64, 65, 1000, 100_000] {
            let t = build_type_table(&SourceModel::paper_mixed(), n).unwrap();
            close(t.total_mass(), 1.0, 1e-9);
        }
    }

    #[test]
    fn sampling_degenerate_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones = SourceModel::bernoulli(1.0).unwrap();
        let zeros = SourceModel::bernoulli(0.0).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_block(&ones, 4, &mut rng).unwrap().0.to_string(), "1111");
            assert_eq!(sample_block(&zeros, 4, &mut rng).unwrap().0.to_string(), "0000");
        }
    }

    #[test]
    fn long_block_sampling_concentrates() {
        let model = SourceModel::paper_mixed();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 2000;
        let mut good = 0;
        for _ in 0..draws {
            let (k, j) = sample_ones(&model, 10_000, &mut rng).unwrap();
            let frac = k as f64 / 10_000.0;
            if (frac - model.components()[j].p).abs() <= 0.02 {
                good += 1;
            }
        }
        assert!(good as f64 >= 0.99 * draws as f64);
    }

    #[test]
    fn top_mass_examples() {
        let uniform = SourceModel::bernoulli(0.5).unwrap();
        close(top_mass(&uniform, 2, &Budget::new(2).unwrap()).unwrap(), 0.5, 1e-15);
        assert_eq!(top_mass(&uniform, 2, &Budget::new(4).unwrap()).unwrap(), 1.0);
        let mixed = SourceModel::paper_mixed();
        close(top_mass(&mixed, 2, &Budget::new(1).unwrap()).unwrap(), 13.0 / 32.0, 1e-15);
        assert_eq!(top_mass(&mixed, 5, &Budget::pow2(200)).unwrap(), 1.0);
    }

    #[test]
    fn top_mass_log_domain_agrees_with_exact_path() {
        // n = 64 runs the exact path; compare against a log-only budget.
        let model = SourceModel::paper_mixed();
        let exact = top_mass(&model, 64, &Budget::pow2(40)).unwrap();
        let logged = top_mass(&model, 64, &Budget { count: None, log2: 40.0 }).unwrap();
        close(exact, logged, 1e-9);
    }

    #[test]
    fn dominant_component_prefers_entropy() {
        assert_eq!(SourceModel::paper_mixed().dominant_component(), 0);
        let m: SourceModel = "mix:0.9*0.9,0.1*0.4".parse().unwrap();
        assert_eq!(m.dominant_component(), 1);
    }

    #[test]
    fn budget_from_rate() {
        assert_eq!(Budget::from_rate(10, 0.5).unwrap().count(), Some(32));
        assert_eq!(Budget::from_rate(10, 0.0).unwrap().count(), Some(1));
        let huge = Budget::from_rate(1000, 0.9).unwrap();
        assert_eq!(huge.count(), None);
        assert_eq!(huge.log2(), 900.0);
        assert!(Budget::from_rate(4, -1.0).is_err());
        assert!(Budget::new(0).is_err());
    }
}
