use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Longest block with a dense bit representation.
pub const MAX_DENSE_LEN: usize = 63;

/// A binary word `x_1 … x_n` packed into a `u64`.
///
/// `x_1` is the most significant of the `n` low bits, so numeric order on
/// `bits` equals lexicographic order on the word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Block {
    bits: u64,
    len: u8,
}

impl Block {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_LEN {
            return Err(invalid(format!(
                "dense blocks need 1 <= n <= {MAX_DENSE_LEN}, got {n}"
            )));
        }
        if bits >> n != 0 {
            return Err(invalid(format!("bits {bits:#x} do not fit in {n} positions")));
        }
        Ok(Self { bits, len: n as u8 })
    }

    /// Caller guarantees `1 <= n <= 63` and `bits < 2^n`.
    pub(crate) fn from_raw(bits: u64, n: usize) -> Self {
        debug_assert!((1..=MAX_DENSE_LEN).contains(&n) && bits >> n == 0);
        Self { bits, len: n as u8 }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ones-count, i.e. the type-class index.
    pub fn ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Symbol at word position `i` (0-based, `x_{i+1}`).
    pub fn symbol(&self, i: usize) -> bool {
        assert!(i < self.len());
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn hamming(&self, other: &Block) -> usize {
        debug_assert_eq!(self.len, other.len);
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Builds a block from symbols in word order.
    pub fn from_symbols(symbols: &[bool]) -> Result<Self> {
        let mut bits = 0u64;
        for &s in symbols {
            bits = (bits << 1) | s as u64;
        }
        Self::new(bits, symbols.len())
    }

    /// The block with `k` ones spread as evenly as possible over the word.
    pub fn balanced(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(invalid(format!("ones-count {k} exceeds length {n}")));
        }
        let symbols: Vec<bool> = (0..n).map(|i| (i + 1) * k / n > i * k / n).collect();
        Self::from_symbols(&symbols)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.symbol(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("unexpected symbol `{other}` in block"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_symbols(&symbols)
    }
}
