//! Residue sets in prime fields `F_p`, `p < 2^63`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Precondition, Result};
use crate::sets::tokens;

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a non-zero residue modulo a prime.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller–Rabin; the witness set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &sp in &SMALL {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A set of residues in `[0, p)` for a prime `p`, stored sorted.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpSet {
    p: u64,
    elems: Vec<u64>,
}

pub const MAX_MODULUS: u64 = 1 << 63;

impl FpSet {
    /// Reduces every residue modulo `p`; fails unless `p` is prime.
    pub fn new(p: u64, elems: impl IntoIterator<Item = u64>) -> Result<Self> {
        if !is_prime(p) || p >= MAX_MODULUS {
            return Err(Precondition::NotPrime(p).into());
        }
        let mut elems: Vec<u64> = elems.into_iter().map(|x| x % p).collect();
        elems.sort_unstable();
        elems.dedup();
        Ok(FpSet { p, elems })
    }

    pub fn from_signed(p: u64, elems: impl IntoIterator<Item = i128>) -> Result<Self> {
        FpSet::new(p, elems.into_iter().map(|x| x.rem_euclid(p as i128) as u64))
    }

    pub fn full(p: u64) -> Result<Self> {
        FpSet::new(p, 0..p)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn elements(&self) -> &[u64] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elems.binary_search(&(x % self.p)).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.elems.first() == Some(&0)
    }

    pub(crate) fn same_field(&self, other: &FpSet) -> Result<()> {
        if self.p != other.p {
            Err(Precondition::ModulusMismatch(self.p, other.p).into())
        } else {
            Ok(())
        }
    }

    pub fn sumset(&self, other: &FpSet) -> Result<FpSet> {
        self.same_field(other)?;
        let p = self.p;
        Ok(FpSet::new_unchecked(p, self.pairs(other, |a, b| (a + b) % p)))
    }

    pub fn product_set(&self, other: &FpSet) -> Result<FpSet> {
        self.same_field(other)?;
        let p = self.p;
        Ok(FpSet::new_unchecked(p, self.pairs(other, |a, b| mul_mod(a, b, p))))
    }

    /// `{a / b : a ∈ A, b ∈ B, b ≠ 0}`.
    pub fn quotient_set(&self, other: &FpSet) -> Result<FpSet> {
        self.same_field(other)?;
        let p = self.p;
        let invs: Vec<u64> = other.elems.iter().filter(|&&b| b != 0).map(|&b| inv_mod(b, p)).collect();
        let mut out = Vec::with_capacity(self.len() * invs.len());
        for &a in &self.elems {
            for &bi in &invs {
                out.push(mul_mod(a, bi, p));
            }
        }
        Ok(FpSet::new_unchecked(p, out))
    }

    /// `A + x`.
    pub fn translate(&self, x: u64) -> FpSet {
        let p = self.p;
        FpSet::new_unchecked(p, self.elems.iter().map(|&a| (a + x % p) % p).collect())
    }

    pub fn intersection_size(&self, other: &FpSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.elems.len() && j < other.elems.len() {
            match self.elems[i].cmp(&other.elems[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    fn pairs(&self, other: &FpSet, f: impl Fn(u64, u64) -> u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &a in &self.elems {
            for &b in &other.elems {
                out.push(f(a, b));
            }
        }
        out
    }

    pub(crate) fn new_unchecked(p: u64, mut elems: Vec<u64>) -> FpSet {
        elems.sort_unstable();
        elems.dedup();
        FpSet { p, elems }
    }

    /// `p=<p>` followed by the residues, the inverse of [`parse_fp_set`].
    pub fn to_text(&self) -> String {
        let mut s = format!("p={}", self.p);
        for x in &self.elems {
            s.push(' ');
            s.push_str(&x.to_string());
        }
        s
    }
}

impl fmt::Debug for FpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)?;
        f.debug_set().entries(self.elems.iter()).finish()
    }
}

/// Parses `p=<prime>` followed by integer residues (any sign; reduced mod p).
pub fn parse_fp_set(text: &str) -> Result<FpSet> {
    let mut toks = tokens(text);
    let head = toks.next().ok_or_else(|| Error::Parse("missing \"p=<prime>\" header".into()))?;
    let p: u64 = head
        .strip_prefix("p=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected \"p=<prime>\", found {head:?}")))?;
    let elems = toks
        .map(|t| t.parse::<i128>().map_err(|_| Error::Parse(format!("malformed residue {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    FpSet::from_signed(p, elems)
}
