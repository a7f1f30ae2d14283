//! Prime-field experiments: multiplicative subgroups and shift intersections.

use num_bigint::BigUint;
use serde::Serialize;

use crate::energies::{fp_mixed_energy, Group};
use crate::error::{budget, Precondition, Result};
use crate::field::{inv_mod, is_prime, mul_mod, pow_mod, prime_factors, FpSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubgroupSpec {
    pub p: u64,
    pub d: u64,
    /// `g^{(p−1)/d}` for the least primitive root `g`.
    pub generator: u64,
}

/// Least primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Precondition::NotPrime(p).into());
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = prime_factors(p - 1);
    Ok((2..p).find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1)).expect("cyclic group"))
}

pub fn subgroup_spec(p: u64, d: u64) -> Result<SubgroupSpec> {
    if !is_prime(p) {
        return Err(Precondition::NotPrime(p).into());
    }
    if d == 0 || !(p - 1).is_multiple_of(d) {
        return Err(Precondition::NotDivisor { d, p }.into());
    }
    let g = primitive_root(p)?;
    Ok(SubgroupSpec { p, d, generator: pow_mod(g, (p - 1) / d, p) })
}

/// The unique subgroup of order `d` in `F_p^*`.
pub fn subgroup(p: u64, d: u64) -> Result<FpSet> {
    let spec = subgroup_spec(p, d)?;
    budget("subgroup order", d as u128, crate::sets::DEFAULT_SET_CAP as u128)?;
    let mut elems = Vec::with_capacity(d as usize);
    let mut x = 1;
    for _ in 0..d {
        elems.push(x);
        x = mul_mod(x, spec.generator, p);
    }
    FpSet::new(p, elems)
}

/// Least prime `p ≡ 1 (mod d)` with `p ≥ min`, if one is at most `max`.
pub fn subgroup_prime(d: u64, min: u64, max: u64) -> Option<u64> {
    if d == 0 {
        return None;
    }
    let mut p = min.max(2).div_ceil(d) * d + 1;
    if p - d >= min.max(2) {
        p -= d;
    }
    while p <= max {
        if is_prime(p) {
            return Some(p);
        }
        p += d;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftMax {
    pub value: usize,
    /// Least `x ≠ 0` attaining the maximum.
    pub argmax: u64,
}

/// `max_{x≠0} |A ∩ (A + x)|`, read off the difference multiplicities.
pub fn shift_intersection_max(a: &FpSet) -> ShiftMax {
    let p = a.modulus();
    let elems = a.elements();
    let mut best = ShiftMax { value: 0, argmax: 1 };
    if p <= 1 << 24 {
        let mut counts = vec![0u32; p as usize];
        for &x in elems {
            for &y in elems {
                counts[((y + p - x) % p) as usize] += 1;
            }
        }
        for (x, &c) in counts.iter().enumerate().skip(1) {
            if c as usize > best.value {
                best = ShiftMax { value: c as usize, argmax: x as u64 };
            }
        }
    } else {
        let mut diffs: Vec<u64> =
            elems.iter().flat_map(|&x| elems.iter().map(move |&y| (y + p - x) % p)).filter(|&d| d != 0).collect();
        for (x, c) in crate::lanes::runs(&mut diffs) {
            if c as usize > best.value {
                best = ShiftMax { value: c as usize, argmax: x };
            }
        }
    }
    best
}

/// `E⁺(A, C)` in `F_p`.
pub fn fp_energy(a: &FpSet, c: &FpSet) -> Result<BigUint> {
    Ok(fp_mixed_energy(a, c, Group::Additive)?.value)
}

/// `(λ, |A ∩ λ⁻¹A|)` for every `λ ∈ A/A`, in increasing `λ`; requires `0 ∉ A`.
pub fn fp_fiber_sizes(a: &FpSet) -> Result<Vec<(u64, usize)>> {
    if a.contains_zero() {
        return Err(Precondition::ZeroInMultiplicativeSet.into());
    }
    let p = a.modulus();
    let q = a.quotient_set(a)?;
    Ok(q.elements()
        .iter()
        .map(|&lam| {
            let li = inv_mod(lam, p);
            (lam, a.elements().iter().filter(|&&x| a.contains(mul_mod(x, li, p))).count())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::fp_energy_k;

    #[test]
    fn subgroup_examples() {
        assert_eq!(subgroup(7, 3).unwrap().elements(), &[1, 2, 4]);
        assert_eq!(subgroup(13, 4).unwrap().elements(), &[1, 5, 8, 12]);
        assert_eq!(subgroup(101, 1).unwrap().elements(), &[1]);
        let oracle: Vec<u64> = (1..13).filter(|&x| pow_mod(x, 4, 13) == 1).collect();
        assert_eq!(subgroup(13, 4).unwrap().elements(), oracle.as_slice());
        assert!(subgroup(12, 2).is_err());
        assert!(matches!(
            subgroup(13, 5),
            Err(crate::error::Error::Precondition(Precondition::NotDivisor { d: 5, p: 13 }))
        ));
    }

    #[test]
    fn subgroups_are_closed() {
        for (p, d) in [(101, 10), (10007, 2), (97, 32), (7, 6)] {
            let h = subgroup(p, d).unwrap();
            assert_eq!(h.len() as u64, d);
            assert_eq!(h.product_set(&h).unwrap(), h);
            assert_eq!(h.quotient_set(&h).unwrap(), h);
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(7).unwrap(), 3);
        assert_eq!(primitive_root(13).unwrap(), 2);
        assert_eq!(primitive_root(2).unwrap(), 1);
        assert!(primitive_root(9).is_err());
    }

    #[test]
    fn subgroup_primes() {
        assert_eq!(subgroup_prime(8, 64, 10007), Some(73));
        assert_eq!(subgroup_prime(3, 2, 100), Some(7));
        assert_eq!(subgroup_prime(128, 16384, 10007), None);
        let p = subgroup_prime(64, 4096, 10007).unwrap();
        assert!(p >= 4096 && (p - 1).is_multiple_of(64) && is_prime(p));
    }

    #[test]
    fn shift_examples() {
        let a = FpSet::new(7, [1, 2, 4]).unwrap();
        assert_eq!(shift_intersection_max(&a), ShiftMax { value: 1, argmax: 1 });
        assert_eq!(shift_intersection_max(&FpSet::full(11).unwrap()), ShiftMax { value: 11, argmax: 1 });
        assert_eq!(shift_intersection_max(&FpSet::new(5, [0]).unwrap()), ShiftMax { value: 0, argmax: 1 });
    }

    #[test]
    fn shift_matches_direct_intersections() {
        let a = FpSet::new(31, [0, 3, 4, 9, 10, 17, 30]).unwrap();
        let direct = (1..31).map(|x| (a.intersection_size(&a.translate(x)), x)).fold((0, 1), |best, (v, x)| {
            if v > best.0 {
                (v, x)
            } else {
                best
            }
        });
        let got = shift_intersection_max(&a);
        assert_eq!((got.value, got.argmax), direct);
        for x in 1..31 {
            assert_eq!(a.intersection_size(&a.translate(x)), a.intersection_size(&a.translate(31 - x)));
        }
    }

    #[test]
    fn fp_energy_examples() {
        let z = FpSet::new(7, [0]).unwrap();
        assert_eq!(fp_energy(&z, &z).unwrap(), BigUint::from(1u32));
        let a = FpSet::new(7, [1, 2, 4]).unwrap();
        assert_eq!(fp_energy(&a, &a).unwrap(), BigUint::from(15u32));
        let f = FpSet::full(5).unwrap();
        assert_eq!(fp_energy(&f, &f).unwrap(), BigUint::from(125u32));
        assert!(fp_energy(&a, &f).is_err());
    }

    #[test]
    fn fiber_sizes_give_multiplicative_energy() {
        let a = FpSet::new(31, [1, 2, 3, 5, 8, 13, 21]).unwrap();
        let sum: usize = fp_fiber_sizes(&a).unwrap().iter().map(|(_, s)| s * s).sum();
        assert_eq!(BigUint::from(sum), fp_energy_k(&a, 2, Group::Multiplicative).unwrap().value);
        assert!(fp_fiber_sizes(&FpSet::new(7, [0, 1]).unwrap()).is_err());
    }
}
