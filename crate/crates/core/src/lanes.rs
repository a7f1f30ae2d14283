//! Fixed-width fast paths for pairwise kernels.
//!
//! Every pairwise construction (sumsets, convolutions, energies, triple
//! counts) runs over one of three integer lanes chosen from the magnitude of
//! the inputs: `i64` when every part is below 2^31 (integer images: 2^30),
//! `i128` below 2^63 (2^62), and `BigInt` otherwise. The bounds guarantee that
//! the products and differences formed below never overflow their lane, so
//! every lane computes the same exact answer.

use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::{lcm_all, Rational};

pub(crate) trait Lane:
    Clone + Ord + Hash + Integer + Signed + Into<BigInt> + Send + Sync + std::fmt::Debug + 'static
{
    fn from_big(n: &BigInt) -> Self;
}

impl Lane for i64 {
    fn from_big(n: &BigInt) -> Self {
        n.to_i64().expect("lane bound checked")
    }
}

impl Lane for i128 {
    fn from_big(n: &BigInt) -> Self {
        n.to_i128().expect("lane bound checked")
    }
}

impl Lane for BigInt {
    fn from_big(n: &BigInt) -> Self {
        n.clone()
    }
}

/// A fraction in lowest terms with positive denominator, in lane `T`.
pub(crate) type Frac<T> = (T, T);

#[inline]
pub(crate) fn reduce<T: Lane>(n: T, d: T) -> Frac<T> {
    debug_assert!(!d.is_zero());
    if d.is_one() {
        return (n, d);
    }
    let g = n.gcd(&d);
    let (mut n, mut d) = if g.is_one() { (n, d) } else { (n / g.clone(), d / g) };
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    (n, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PairOp {
    /// a + b
    Sum,
    /// b - a
    Diff,
    /// a * b
    Prod,
    /// b / a, requires a != 0
    Quot,
}

#[inline]
pub(crate) fn combine<T: Lane>(op: PairOp, a: &Frac<T>, b: &Frac<T>) -> Frac<T> {
    let (an, ad) = a;
    let (bn, bd) = b;
    match op {
        PairOp::Sum => {
            if ad.is_one() && bd.is_one() {
                (an.clone() + bn.clone(), T::one())
            } else {
                reduce(an.clone() * bd.clone() + bn.clone() * ad.clone(), ad.clone() * bd.clone())
            }
        }
        PairOp::Diff => {
            if ad.is_one() && bd.is_one() {
                (bn.clone() - an.clone(), T::one())
            } else {
                reduce(bn.clone() * ad.clone() - an.clone() * bd.clone(), ad.clone() * bd.clone())
            }
        }
        PairOp::Prod => reduce(an.clone() * bn.clone(), ad.clone() * bd.clone()),
        PairOp::Quot => reduce(bn.clone() * ad.clone(), bd.clone() * an.clone()),
    }
}

pub(crate) fn frac_to_rational<T: Lane>(f: &Frac<T>) -> Rational {
    Rational::new(f.0.clone().into(), f.1.clone().into()).expect("nonzero denominator")
}

/// Visitor invoked with the inputs converted to a common rational lane.
pub(crate) trait FracVisitor {
    type Out;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> Self::Out;
}

fn parts_below(sets: &[&[Rational]], bits: u64) -> bool {
    sets.iter().flat_map(|s| s.iter()).all(|r| r.numer().bits() <= bits && r.denom().bits() <= bits)
}

pub(crate) fn dispatch_frac<V: FracVisitor>(sets: &[&[Rational]], v: V) -> V::Out {
    fn conv<T: Lane>(sets: &[&[Rational]]) -> Vec<Vec<Frac<T>>> {
        sets.iter().map(|s| s.iter().map(|r| (T::from_big(r.numer()), T::from_big(r.denom()))).collect()).collect()
    }
    if parts_below(sets, 31) {
        v.visit::<i64>(conv(sets))
    } else if parts_below(sets, 63) {
        v.visit::<i128>(conv(sets))
    } else {
        v.visit::<BigInt>(conv(sets))
    }
}

/// Visitor invoked with all inputs scaled by one common positive factor into
/// integers of a common lane. Used by dilation-invariant counts.
pub(crate) trait IntVisitor {
    type Out;
    fn visit<T: Lane>(self, sets: Vec<Vec<T>>) -> Self::Out;
}

/// Scales every rational by the lcm of all denominators.
pub(crate) fn integer_image(sets: &[&[Rational]]) -> Vec<Vec<BigInt>> {
    let l = lcm_all(sets.iter().flat_map(|s| s.iter().map(|r| r.denom())));
    sets.iter().map(|s| s.iter().map(|r| r.numer() * (&l / r.denom())).collect()).collect()
}

pub(crate) fn dispatch_int<V: IntVisitor>(sets: &[&[Rational]], v: V) -> V::Out {
    dispatch_scaled(integer_image(sets), v)
}

pub(crate) fn dispatch_scaled<V: IntVisitor>(ints: Vec<Vec<BigInt>>, v: V) -> V::Out {
    let max_bits = ints.iter().flat_map(|s| s.iter()).map(|n| n.bits()).max().unwrap_or(0);
    fn conv<T: Lane>(ints: &[Vec<BigInt>]) -> Vec<Vec<T>> {
        ints.iter().map(|s| s.iter().map(T::from_big).collect()).collect()
    }
    if max_bits <= 30 {
        v.visit::<i64>(conv(&ints))
    } else if max_bits <= 62 {
        v.visit::<i128>(conv(&ints))
    } else {
        v.visit::<BigInt>(ints)
    }
}

/// Sorts keys in place and returns the run lengths of equal keys together with
/// one representative per run.
pub(crate) fn runs<K: Ord + Clone>(keys: &mut [K]) -> Vec<(K, u64)> {
    keys.sort_unstable();
    let mut out: Vec<(K, u64)> = Vec::new();
    for k in keys.iter() {
        match out.last_mut() {
            Some((last, c)) if last == k => *c += 1,
            _ => out.push((k.clone(), 1)),
        }
    }
    out
}

/// Multiplicities only; cheaper than [`runs`] when keys are not needed.
pub(crate) fn run_lengths<K: Ord>(keys: &mut [K]) -> Vec<u64> {
    keys.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        out.push((j - i) as u64);
        i = j;
    }
    out
}

/// Σ c^k over multiplicities, exact.
pub(crate) fn power_sum(counts: &[u64], k: u32) -> BigUint {
    if k == 2 {
        // Σ c² ≤ (Σ c)², and Σ c is a pair count far below 2^64.
        let s: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        return BigUint::from(s);
    }
    counts.iter().fold(BigUint::zero(), |acc, &c| acc + num_traits::pow(BigUint::from(c), k as usize))
}

// ---------------------------------------------------------------------------
// Hash keys in F_q, q = 2⁶⁴ − 59
// ---------------------------------------------------------------------------
//
// `n/m ↦ n·m⁻¹ mod q` is a ring homomorphism on rationals whose denominator is
// prime to q, so equal values always share a key. Distinct values may collide;
// every consumer checks runs of equal keys exactly. 2, 3, 5 and 7 are
// primitive roots mod q, so geometric progressions in them do not wrap.

pub(crate) const HASH_Q: u64 = u64::MAX - 58;

/// `2⁶⁴ mod q`.
const FOLD: u128 = 59;

#[inline]
fn reduce_q(t: u128) -> u64 {
    let t = (t >> 64) * FOLD + (t as u64 as u128);
    let mut t = (t >> 64) * FOLD + (t as u64 as u128);
    while t >= HASH_Q as u128 {
        t -= HASH_Q as u128;
    }
    t as u64
}

#[inline]
pub(crate) fn mul_q(a: u64, b: u64) -> u64 {
    reduce_q(a as u128 * b as u128)
}

#[inline]
pub(crate) fn sub_q(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        (HASH_Q - b) + a
    }
}

fn residue_q(n: &BigInt) -> u64 {
    let q = BigInt::from(HASH_Q);
    let r = n % &q;
    let r = if r.is_negative() { r + q } else { r };
    r.to_u64().expect("reduced residue")
}

pub(crate) fn inv_q(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a, HASH_Q - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_q(acc, base);
        }
        base = mul_q(base, base);
        e >>= 1;
    }
    acc
}

/// Key of `r`, or `None` when its denominator is divisible by q.
pub(crate) fn hash_q(r: &Rational) -> Option<u64> {
    let m = residue_q(r.denom());
    (m != 0).then(|| mul_q(residue_q(r.numer()), inv_q(m)))
}

/// Key of a rational with a non-zero key, as needed for division.
pub(crate) fn hash_unit(r: &Rational) -> Option<u64> {
    hash_q(r).filter(|&h| h != 0 || r.is_zero())
}

/// Rationals as `(numerator, denominator)` in `i128` when every part fits.
pub(crate) fn small_parts(vals: &[Rational]) -> Option<Vec<(i128, i128)>> {
    vals.iter().map(|d| Some((d.numer().to_i128()?, d.denom().to_i128()?))).collect()
}

/// `∏ xs == ∏ ys` in `i128`, or `None` on overflow.
#[inline]
pub(crate) fn products_equal(xs: [i128; 4], ys: [i128; 4]) -> Option<bool> {
    let p = |v: [i128; 4]| v[0].checked_mul(v[1])?.checked_mul(v[2])?.checked_mul(v[3]);
    Some(p(xs)? == p(ys)?)
}

/// `|a|·|b|` as `(high, low)` 128-bit halves.
#[inline]
fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    const M: u128 = u64::MAX as u128;
    let (a1, a0, b1, b0) = (a >> 64, a & M, b >> 64, b & M);
    let (p00, p01, p10, p11) = (a0 * b0, a0 * b1, a1 * b0, a1 * b1);
    let mid = (p00 >> 64) + (p01 & M) + (p10 & M);
    let lo = (p00 & M) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// `a·b == c·d`, exactly.
#[inline]
pub(crate) fn cross_equal(a: i128, b: i128, c: i128, d: i128) -> bool {
    let neg = |x: i128, y: i128| (x < 0) != (y < 0) && x != 0 && y != 0;
    let zero = |x: i128, y: i128| x == 0 || y == 0;
    if zero(a, b) || zero(c, d) {
        return zero(a, b) && zero(c, d);
    }
    neg(a, b) == neg(c, d)
        && wide_mul(a.unsigned_abs(), b.unsigned_abs()) == wide_mul(c.unsigned_abs(), d.unsigned_abs())
}

/// Counts the multiplicities of `values` given keys that agree on equal
/// values. `same(i, j)` is a fast exact equality test (`None` when it cannot
/// decide) and `value(i)` the exact fallback.
pub(crate) fn verified_run_lengths<P: Copy>(
    keys: &mut [(u64, P)],
    same: impl Fn(P, P) -> Option<bool>,
    value: impl Fn(P) -> Rational,
) -> Vec<u64> {
    keys.sort_unstable_by_key(|k| k.0);
    let mut out = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j].0 == keys[i].0 {
            j += 1;
        }
        let head = keys[i].1;
        let uniform = keys[i + 1..j].iter().all(|k| same(head, k.1).unwrap_or_else(|| value(head) == value(k.1)));
        if uniform {
            out.push((j - i) as u64);
        } else {
            let mut vals: Vec<Rational> = keys[i..j].iter().map(|k| value(k.1)).collect();
            out.extend(run_lengths(&mut vals));
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn modular_arithmetic_matches_big_integers() {
        let q = num_bigint::BigUint::from(HASH_Q);
        for (a, b) in [(HASH_Q - 1, HASH_Q - 1), (HASH_Q - 1, 2), (1 << 63, 1 << 62), (12345, 0)] {
            let want = (num_bigint::BigUint::from(a) * b) % &q;
            assert_eq!(num_bigint::BigUint::from(mul_q(a, b)), want);
            assert_eq!(mul_q(a, inv_q(a.max(1))), if a == 0 { 0 } else { 1 });
        }
        assert_eq!(sub_q(1, 2), HASH_Q - 1);
        assert_eq!(hash_q(&Rational::new(1, 2).unwrap()).map(|h| mul_q(h, 2)), Some(1));
    }

    #[test]
    fn cross_products_are_exact_past_128_bits() {
        let big = i128::MAX;
        assert!(cross_equal(big, big, big, big));
        assert!(!cross_equal(big, big, big, big - 1));
        assert!(cross_equal(-big, 6, 3 * 2, -big));
        assert!(!cross_equal(-big, 6, 6, big));
        assert!(cross_equal(0, 5, 7, 0));
        assert!(!cross_equal(0, 5, 7, 1));
        let (x, y) = (1i128 << 100, 3i128 << 90);
        assert!(cross_equal(x, y, y * 2, x / 2));
        for (a, b) in [(u128::MAX, u128::MAX), (1 << 64, 1 << 64), (12345, 678910)] {
            let (hi, lo) = wide_mul(a, b);
            let want = num_bigint::BigUint::from(a) * num_bigint::BigUint::from(b);
            assert_eq!((num_bigint::BigUint::from(hi) << 128) + lo, want);
        }
    }

    #[test]
    fn reduce_normalizes_sign_and_gcd() {
        assert_eq!(reduce(6i64, -4), (-3, 2));
        assert_eq!(reduce(0i64, -7), (0, 1));
        assert_eq!(reduce(BigInt::from(10), BigInt::from(5)), (BigInt::from(2), BigInt::one()));
    }

    struct Probe;
    impl FracVisitor for Probe {
        type Out = &'static str;
        fn visit<T: Lane>(self, _: Vec<Vec<Frac<T>>>) -> &'static str {
            std::any::type_name::<T>()
        }
    }

    #[test]
    fn lane_selection() {
        let small = vec![Rational::from(5), Rational::new(-3, 7).unwrap()];
        let mid = vec![Rational::from(1i64 << 40)];
        let big = vec![Rational::from(BigInt::one() << 70u32)];
        assert_eq!(dispatch_frac(&[&small], Probe), "i64");
        assert_eq!(dispatch_frac(&[&small, &mid], Probe), "i128");
        assert_eq!(dispatch_frac(&[&big], Probe), std::any::type_name::<BigInt>());
    }

    #[test]
    fn hash_is_multiplicative_and_verified_runs_split_collisions() {
        let r = |t: &str| -> Rational { t.parse().unwrap() };
        let (x, y) = (r("-7/12"), r("5/9"));
        assert_eq!(hash_q(&(&x * &y)), Some(mul_q(hash_q(&x).unwrap(), hash_q(&y).unwrap())));
        assert_eq!(hash_q(&(&x - &y)), Some(sub_q(hash_q(&x).unwrap(), hash_q(&y).unwrap())));
        assert_eq!(hash_q(&Rational::new(1, HASH_Q).unwrap()), None);
        // 0 and q collide by construction.
        let vals = [r("0"), Rational::from(HASH_Q), r("0"), r("3")];
        let mut keys: Vec<(u64, usize)> = vals.iter().enumerate().map(|(i, v)| (hash_q(v).unwrap(), i)).collect();
        let mut counts = verified_run_lengths(&mut keys, |_, _| None, |i| vals[i].clone());
        counts.sort_unstable();
        assert_eq!(counts, vec![1, 1, 2]);
    }

    #[test]
    fn combine_matches_big_rationals() {
        let vals: Vec<Rational> = ["3/4", "-5/6", "7", "-2", "1/9"].iter().map(|s| s.parse().unwrap()).collect();
        for a in &vals {
            for b in &vals {
                let fa = (a.numer().to_i64().unwrap(), a.denom().to_i64().unwrap());
                let fb = (b.numer().to_i64().unwrap(), b.denom().to_i64().unwrap());
                assert_eq!(frac_to_rational(&combine(PairOp::Sum, &fa, &fb)), a + b);
                assert_eq!(frac_to_rational(&combine(PairOp::Diff, &fa, &fb)), b - a);
                assert_eq!(frac_to_rational(&combine(PairOp::Prod, &fa, &fb)), a * b);
                assert_eq!(frac_to_rational(&combine(PairOp::Quot, &fa, &fb)), b / a);
            }
        }
    }
}
