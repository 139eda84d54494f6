//! Combinatorial number system over fixed-weight words of up to 64 bits.

use std::sync::OnceLock;

const SIZE: usize = 65;

fn pascal() -> &'static [[u64; SIZE]; SIZE] {
    static TABLE: OnceLock<Box<[[u64; SIZE]; SIZE]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0u64; SIZE]; SIZE]);
        for a in 0..SIZE {
            t[a][0] = 1;
            for b in 1..=a {
                t[a][b] = t[a - 1][b - 1] + if b < a { t[a - 1][b] } else { 0 };
            }
        }
        t
    })
}

/// `C(a, b)` for `a <= 64`; zero when `b > a`.
pub fn choose(a: usize, b: usize) -> u64 {
    if b > a {
        0
    } else {
        pascal()[a][b]
    }
}

/// Position of `bits` among all words of the same weight, in increasing
/// numeric order.
pub fn rank(bits: u64) -> u64 {
    let mut r = 0;
    let mut seen = 0;
    let mut rest = bits;
    while rest != 0 {
        let pos = rest.trailing_zeros() as usize;
        seen += 1;
        r += choose(pos, seen);
        rest &= rest - 1;
    }
    r
}

/// Inverse of [`rank`] for words of length `n` with `ones` set bits.
pub fn unrank(n: usize, mut ones: usize, mut ordinal: u64) -> u64 {
    debug_assert!(ordinal < choose(n, ones));
    let mut bits = 0;
    for pos in (0..n).rev() {
        if ones == 0 {
            break;
        }
        let below = choose(pos, ones);
        if ordinal >= below {
            ordinal -= below;
            bits |= 1 << pos;
            ones -= 1;
        }
    }
    bits
}
