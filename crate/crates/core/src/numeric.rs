//! Small log-domain helpers shared by the probability code.

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `log2(Σ 2^x_i)` without overflow or underflow of the dominant terms.
pub fn log2_sum_exp2(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if terms.len() == 1 {
        return max;
    }
    let acc: CompensatedSum = terms.iter().map(|&t| (t - max).exp2()).collect();
    max + acc.value().log2()
}

/// `x * log2(y)` with the `0 * log 0 = 0` convention.
pub fn xlog2y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.log2()
    }
}

/// `log2(1 - p)`, exact for p in [1/2, 1] and accurate for small p.
pub fn log2_one_minus(p: f64) -> f64 {
    if p >= 0.5 {
        (1.0 - p).log2()
    } else {
        (-p).ln_1p() / std::f64::consts::LN_2
    }
}
