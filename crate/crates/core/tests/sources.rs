use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rdp_core::{block_log_prob, build_type_table, sample_block, top_mass, Block, Budget, SourceModel};

fn models() -> Vec<SourceModel> {
    vec![
        SourceModel::paper_mixed(),
        SourceModel::bernoulli(0.5).unwrap(),
        SourceModel::bernoulli(0.11).unwrap(),
        "mix:0.2*0.05,0.3*0.6,0.5*0.9".parse().unwrap(),
    ]
}

#[test]
fn enumerated_blocks_sum_to_one() {
    for model in models() {
        for n in [1, 2, 5, 12, 20] {
            let total: f64 = (0u64..1 << n)
                .map(|bits| {
                    let k = bits.count_ones() as usize;
                    block_log_prob(&model, k, n).unwrap().exp2()
                })
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(build_type_table(&model, n).unwrap().total_mass(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn top_mass_grows_with_budget_and_saturates() {
    for model in models() {
        for n in [1, 4, 9, 16] {
            let mut last = 0.0;
            for m in 1..=(1u128 << n) {
                let t = top_mass(&model, n, &Budget::new(m).unwrap()).unwrap();
                assert!(t + 1e-12 >= last, "n = {n}, m = {m}");
                last = t;
            }
            assert_abs_diff_eq!(last, 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn single_letter_frequencies_match_the_law() {
    let model = SourceModel::paper_mixed();
    let draws = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ones = (0..draws)
        .filter(|_| sample_block(&model, 1, &mut rng).unwrap().0.ones() == 1)
        .count();
    let p = block_log_prob(&model, 1, 1).unwrap().exp2();
    assert_abs_diff_eq!(p, 0.625, epsilon = 1e-15);
    let stderr = (p * (1.0 - p) / draws as f64).sqrt();
    let freq = ones as f64 / draws as f64;
    assert!((freq - p).abs() < 3.0 * stderr, "freq {freq} vs {p}");
}

#[test]
fn blocks_with_equal_weight_are_equally_likely() {
    let model: SourceModel = "mix:0.7*0.2,0.3*0.85".parse().unwrap();
    let n = 10;
    let brute = |x: &Block| -> f64 {
        model
            .components()
            .iter()
            .map(|c| {
                let bits: f64 = (0..n).map(|i| if x.symbol(i) { c.p } else { 1.0 - c.p }).product();
                c.weight * bits
            })
            .sum()
    };
    let mut by_class = vec![None; n + 1];
    for bits in 0u64..1 << n {
        let x = Block::new(bits, n).unwrap();
        let p = brute(&x);
        let k = x.ones();
        let reference = *by_class[k].get_or_insert(p);
        assert_abs_diff_eq!(p, reference, epsilon = 1e-15);
        assert_abs_diff_eq!(p.log2(), block_log_prob(&model, k, n).unwrap(), epsilon = 1e-12);
    }
}
