//! The signature potential of an alternating forest.
//!
//! `ψ_t = (−⌊log_{1.01}(5^{2t}|X_t|)⌋, ⌊log_{1.01}(5^{2t+1}|Y_t|)⌋)` with
//! `log 0 := 0`, followed by a sentinel `∞`. Floors are computed with
//! big-integer comparisons `101^k ≤ N · 100^k` only.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub psi: Vec<(i64, i64)>,
}

impl Signature {
    /// Builds the signature from per-layer sizes `(|X_t|, |Y_t|)`, `t = 0..=ℓ`.
    pub fn from_sizes(sizes: &[(usize, usize)]) -> Self {
        let psi = sizes
            .iter()
            .enumerate()
            .map(|(t, &(x, y))| {
                let t = t as u32;
                (
                    -floor_log_1_01(&scaled(x, 2 * t)),
                    floor_log_1_01(&scaled(y, 2 * t + 1)),
                )
            })
            .collect();
        Signature { psi }
    }

    /// FNV-1a over the coordinates; stable across platforms and runs.
    pub fn hash64(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &(p, q) in &self.psi {
            for byte in p.to_le_bytes().into_iter().chain(q.to_le_bytes()) {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

impl Ord for Signature {
    /// Lexicographic, with the trailing `∞` making a proper prefix larger.
    fn cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.psi.iter().zip(&other.psi) {
            match x.cmp(y) {
                Ordering::Equal => continue,
                unequal => return unequal,
            }
        }
        other.psi.len().cmp(&self.psi.len())
    }
}

impl PartialOrd for Signature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (p, q) in &self.psi {
            write!(f, "({p},{q}),")?;
        }
        write!(f, "∞)")
    }
}

fn scaled(count: usize, power_of_five: u32) -> BigUint {
    if count == 0 {
        return BigUint::zero();
    }
    BigUint::from(5u32).pow(power_of_five) * BigUint::from(count)
}

/// `⌊log_{1.01} n⌋` for `n ≥ 1`, and `0` for `n = 0`.
///
/// The answer is the largest `k` with `101^k ≤ n · 100^k`. Since
/// `1.01^69 < 2`, `69 · (bits(n) − 1)` is a lower bound to start from.
pub fn floor_log_1_01(n: &BigUint) -> i64 {
    if n.is_zero() {
        return 0;
    }
    let mut k = 69 * (n.bits() - 1);
    let mut num = BigUint::from(101u32).pow(k as u32);
    let mut den = n * BigUint::from(100u32).pow(k as u32);
    loop {
        num *= 101u32;
        den *= 100u32;
        if num > den {
            return k as i64;
        }
        k += 1;
    }
}
