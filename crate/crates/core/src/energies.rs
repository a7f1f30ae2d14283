//! Representation functions, energies, Gowers norms and the quantity M(A).

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{budget, Error, Precondition, Result};
use crate::field::{inv_mod, mul_mod, FpSet};
use crate::lanes::{self, combine, frac_to_rational, Frac, FracVisitor, IntVisitor, Lane, PairOp};
use crate::rational::Rational;
use crate::sets::{all_fibers, setop, RSet, SetOpKind, PAIR_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Additive,
    Multiplicative,
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add" | "additive" | "+" => Ok(Group::Additive),
            "mul" | "multiplicative" | "*" | "x" => Ok(Group::Multiplicative),
            other => Err(Error::Invalid(format!("unknown group {other:?} (expected add|mul)"))),
        }
    }
}

/// Value → multiplicity table, sorted by value. Zero multiplicities are never
/// stored. Multiplicities are pair counts, so `u64` is exact for any input the
/// pair budget admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMap<K> {
    entries: Vec<(K, u64)>,
}

impl<K: Ord> CountMap<K> {
    pub(crate) fn from_unsorted(mut entries: Vec<(K, u64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        debug_assert!(entries.iter().all(|e| e.1 > 0));
        CountMap { entries }
    }

    pub fn get(&self, key: &K) -> u64 {
        self.entries.binary_search_by(|e| e.0.cmp(key)).map_or(0, |i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(K, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> u128 {
        self.entries.iter().map(|e| e.1 as u128).sum()
    }

    /// Σ_x count(x)^k.
    pub fn power_sum(&self, k: u32) -> BigUint {
        let counts: Vec<u64> = self.entries.iter().map(|e| e.1).collect();
        lanes::power_sum(&counts, k)
    }

    /// Σ_x self(x)·other(x).
    pub fn inner(&self, other: &CountMap<K>) -> BigUint {
        let (mut i, mut j) = (0, 0);
        let mut acc: u128 = 0;
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.entries[i].1 as u128 * other.entries[j].1 as u128;
                    i += 1;
                    j += 1;
                }
            }
        }
        BigUint::from(acc)
    }
}

impl<K: std::fmt::Display> Serialize for CountMap<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            value: String,
            count: String,
        }
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (k, c) in &self.entries {
            seq.serialize_element(&Entry { value: k.to_string(), count: c.to_string() })?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergyValue {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub value: BigUint,
    pub k: u32,
    pub group: Group,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GowersValue {
    pub k: u32,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub value: BigUint,
}

fn corr_op(group: Group) -> PairOp {
    match group {
        Group::Additive => PairOp::Diff,
        Group::Multiplicative => PairOp::Quot,
    }
}

fn conv_op(group: Group) -> PairOp {
    match group {
        Group::Additive => PairOp::Sum,
        Group::Multiplicative => PairOp::Prod,
    }
}

fn check_inputs(a: &RSet, b: &RSet, group: Group) -> Result<()> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    if group == Group::Multiplicative {
        a.require_nonzero()?;
        b.require_nonzero()?;
    }
    budget("element pairs", a.len() as u128 * b.len() as u128, PAIR_BUDGET)
}

fn pair_keys<T: Lane>(op: PairOp, a: &[Frac<T>], b: &[Frac<T>]) -> Vec<Frac<T>> {
    let mut keys = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            keys.push(combine(op, x, y));
        }
    }
    keys
}

struct KeyedCounts(PairOp);

impl FracVisitor for KeyedCounts {
    type Out = Vec<(Rational, u64)>;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> Self::Out {
        let mut keys = pair_keys(self.0, &sets[0], &sets[1]);
        lanes::runs(&mut keys).into_iter().map(|(k, c)| (frac_to_rational(&k), c)).collect()
    }
}

struct Counts(PairOp);

impl FracVisitor for Counts {
    type Out = Vec<u64>;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> Vec<u64> {
        let mut keys = pair_keys(self.0, &sets[0], &sets[1]);
        lanes::run_lengths(&mut keys)
    }
}

/// `x ↦ (A∘B)(x)`: the number of pairs `(a, b) ∈ A×B` with `b − a = x`
/// (additive) or `b / a = x` (multiplicative).
pub fn correlation(a: &RSet, b: &RSet, group: Group) -> Result<CountMap<Rational>> {
    check_inputs(a, b, group)?;
    let entries = lanes::dispatch_frac(&[a.elements(), b.elements()], KeyedCounts(corr_op(group)));
    Ok(CountMap::from_unsorted(entries))
}

/// `x ↦ (A∗B)(x)`: pairs with `a + b = x` (resp. `a·b = x`).
pub fn convolution(a: &RSet, b: &RSet, group: Group) -> Result<CountMap<Rational>> {
    check_inputs(a, b, group)?;
    let entries = lanes::dispatch_frac(&[a.elements(), b.elements()], KeyedCounts(conv_op(group)));
    Ok(CountMap::from_unsorted(entries))
}

/// Multiplicities of `A∘B` without materializing the values.
pub(crate) fn correlation_counts(a: &RSet, b: &RSet, group: Group) -> Result<Vec<u64>> {
    check_inputs(a, b, group)?;
    Ok(lanes::dispatch_frac(&[a.elements(), b.elements()], Counts(corr_op(group))))
}

/// Multiplicities of `A∘A`. The value multiset is symmetric under `x ↦ −x`
/// (resp. `x ↦ 1/x`), so only pairs with `a < b` (resp. `|a| < |b|`) are keyed;
/// the fixed points `0`/`1` and `−1` are counted directly.
fn self_correlation_counts(a: &RSet, group: Group) -> Result<Vec<u64>> {
    check_inputs(a, a, group)?;
    let vals = a.elements();
    let hashes: Option<Vec<u64>> = vals.iter().map(lanes::hash_unit).collect();
    let (Some(h), Some(sm)) = (hashes, lanes::small_parts(vals)) else {
        return correlation_counts(a, a, group);
    };
    let n = vals.len();
    let mut fixed = vec![n as u64];
    let mut keys: Vec<(u64, (u32, u32))> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    match group {
        Group::Additive => {
            for j in 0..n {
                for i in 0..j {
                    keys.push((lanes::sub_q(h[j], h[i]), (i as u32, j as u32)));
                }
            }
        }
        Group::Multiplicative => {
            let inv: Vec<u64> = h.iter().map(|&x| lanes::inv_q(x)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            let abs: Vec<Rational> = vals.iter().map(Rational::abs).collect();
            order.sort_by(|&x, &y| abs[x].cmp(&abs[y]));
            let class: Vec<usize> = order
                .iter()
                .scan((0usize, None::<&Rational>), |(c, prev), &i| {
                    if prev.is_some_and(|p| *p != abs[i]) {
                        *c += 1;
                    }
                    *prev = Some(&abs[i]);
                    Some(*c)
                })
                .collect();
            let mut antipodal = 0u64;
            for jj in 0..n {
                let j = order[jj];
                for ii in 0..jj {
                    if class[ii] == class[jj] {
                        antipodal += 1;
                        continue;
                    }
                    let i = order[ii];
                    keys.push((lanes::mul_q(h[j], inv[i]), (i as u32, j as u32)));
                }
            }
            if antipodal > 0 {
                fixed.push(2 * antipodal);
            }
        }
    }
    let same = |(i, j): (u32, u32), (k, l): (u32, u32)| -> Option<bool> {
        let [(ni, mi), (nj, mj), (nk, mk), (nl, ml)] = [i, j, k, l].map(|x| sm[x as usize]);
        match group {
            // a_j − a_i = a_l − a_k  ⇔  a_j + a_k = a_l + a_i
            Group::Additive => {
                let lhs = nj.checked_mul(mk)?.checked_add(nk.checked_mul(mj)?)?.checked_mul(ml.checked_mul(mi)?)?;
                let rhs = nl.checked_mul(mi)?.checked_add(ni.checked_mul(ml)?)?.checked_mul(mj.checked_mul(mk)?)?;
                Some(lhs == rhs)
            }
            // a_j / a_i = a_l / a_k  ⇔  a_j·a_k = a_l·a_i
            Group::Multiplicative => lanes::products_equal([nj, nk, ml, mi], [nl, ni, mj, mk]),
        }
    };
    let value = |(i, j): (u32, u32)| {
        let (x, y) = (&vals[i as usize], &vals[j as usize]);
        match group {
            Group::Additive => y - x,
            Group::Multiplicative => y / x,
        }
    };
    let runs = lanes::verified_run_lengths(&mut keys, same, value);
    fixed.extend(runs.iter().flat_map(|&c| [c, c]));
    Ok(fixed)
}

/// `E_k(A) = Σ_x (A∘A)(x)^k`, the number of 2k-tuples with equal differences
/// (resp. ratios).
pub fn energy(a: &RSet, k: u32, group: Group) -> Result<EnergyValue> {
    if k < 2 {
        return Err(Precondition::OrderTooSmall { k, min: 2 }.into());
    }
    let counts = self_correlation_counts(a, group)?;
    Ok(EnergyValue { value: lanes::power_sum(&counts, k), k, group })
}

/// `E(A, B) = Σ_x (A∘B)(x)²`.
pub fn mixed_energy(a: &RSet, b: &RSet, group: Group) -> Result<EnergyValue> {
    let counts = correlation_counts(a, b, group)?;
    Ok(EnergyValue { value: lanes::power_sum(&counts, 2), k: 2, group })
}

/// The three expressions for the energy of a pair of sets, computed along
/// independent routes: `Σ(A∗B)²`, `Σ(A∘B)²` and `Σ_x (A∘A)(x)(B∘B)(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergyForms {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub convolution: BigUint,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub correlation: BigUint,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub self_correlations: BigUint,
}

impl EnergyForms {
    pub fn agree(&self) -> bool {
        self.convolution == self.correlation && self.correlation == self.self_correlations
    }
}

struct FormsVisitor(Group);

impl FracVisitor for FormsVisitor {
    type Out = EnergyForms;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> EnergyForms {
        let (a, b) = (&sets[0], &sets[1]);
        let conv = lanes::run_lengths(&mut pair_keys(conv_op(self.0), a, b));
        let corr = lanes::run_lengths(&mut pair_keys(corr_op(self.0), a, b));
        let aa = CountMap::from_unsorted(lanes::runs(&mut pair_keys(corr_op(self.0), a, a)));
        let bb = CountMap::from_unsorted(lanes::runs(&mut pair_keys(corr_op(self.0), b, b)));
        EnergyForms {
            convolution: lanes::power_sum(&conv, 2),
            correlation: lanes::power_sum(&corr, 2),
            self_correlations: aa.inner(&bb),
        }
    }
}

pub fn energy_forms(a: &RSet, b: &RSet, group: Group) -> Result<EnergyForms> {
    check_inputs(a, b, group)?;
    check_inputs(a, a, group)?;
    check_inputs(b, b, group)?;
    Ok(lanes::dispatch_frac(&[a.elements(), b.elements()], FormsVisitor(group)))
}

struct ProductEquation;

impl IntVisitor for ProductEquation {
    type Out = BigUint;
    fn visit<T: Lane>(self, sets: Vec<Vec<T>>) -> BigUint {
        let mut keys = Vec::with_capacity(sets[0].len() * sets[1].len());
        for x in &sets[0] {
            for y in &sets[1] {
                keys.push(x.clone() * y.clone());
            }
        }
        lanes::power_sum(&lanes::run_lengths(&mut keys), 2)
    }
}

/// `#{(x₁, x₂, y₁, y₂) ∈ X²×Y² : x₁y₁ = x₂y₂}` as a polynomial identity count,
/// so zero elements are allowed. Agrees with the multiplicative
/// [`mixed_energy`] whenever `0 ∉ X ∪ Y`.
pub fn product_equation_count(x: &RSet, y: &RSet) -> Result<BigUint> {
    x.require_nonempty()?;
    y.require_nonempty()?;
    budget("element pairs", x.len() as u128 * y.len() as u128, PAIR_BUDGET)?;
    // x·y scales uniformly under a common dilation, so counts are unchanged.
    Ok(lanes::dispatch_int(&[x.elements(), y.elements()], ProductEquation))
}

// ---------------------------------------------------------------------------
// F_p
// ---------------------------------------------------------------------------

fn fp_keys(a: &FpSet, b: &FpSet, op: PairOp) -> Result<Vec<u64>> {
    a.same_field(b)?;
    a.elements().first().ok_or(Precondition::EmptySet)?;
    b.elements().first().ok_or(Precondition::EmptySet)?;
    let p = a.modulus();
    if op == PairOp::Quot && (a.contains_zero() || b.contains_zero()) {
        return Err(Precondition::ZeroInMultiplicativeSet.into());
    }
    budget("element pairs", a.len() as u128 * b.len() as u128, PAIR_BUDGET)?;
    let mut keys = Vec::with_capacity(a.len() * b.len());
    match op {
        PairOp::Sum => {
            for &x in a.elements() {
                keys.extend(b.elements().iter().map(|&y| (x + y) % p));
            }
        }
        PairOp::Diff => {
            for &x in a.elements() {
                keys.extend(b.elements().iter().map(|&y| (y + p - x) % p));
            }
        }
        PairOp::Prod => {
            for &x in a.elements() {
                keys.extend(b.elements().iter().map(|&y| mul_mod(x, y, p)));
            }
        }
        PairOp::Quot => {
            for &x in a.elements() {
                let xi = inv_mod(x, p);
                keys.extend(b.elements().iter().map(|&y| mul_mod(y, xi, p)));
            }
        }
    }
    Ok(keys)
}

/// Residue-keyed correlation `x ↦ (A∘B)(x)` in `F_p`.
pub fn fp_correlation(a: &FpSet, b: &FpSet, group: Group) -> Result<CountMap<u64>> {
    let mut keys = fp_keys(a, b, corr_op(group))?;
    Ok(CountMap::from_unsorted(lanes::runs(&mut keys)))
}

pub fn fp_convolution(a: &FpSet, b: &FpSet, group: Group) -> Result<CountMap<u64>> {
    let mut keys = fp_keys(a, b, conv_op(group))?;
    Ok(CountMap::from_unsorted(lanes::runs(&mut keys)))
}

pub fn fp_energy_k(a: &FpSet, k: u32, group: Group) -> Result<EnergyValue> {
    if k < 2 {
        return Err(Precondition::OrderTooSmall { k, min: 2 }.into());
    }
    let mut keys = fp_keys(a, a, corr_op(group))?;
    Ok(EnergyValue { value: lanes::power_sum(&lanes::run_lengths(&mut keys), k), k, group })
}

pub fn fp_mixed_energy(a: &FpSet, b: &FpSet, group: Group) -> Result<EnergyValue> {
    let mut keys = fp_keys(a, b, corr_op(group))?;
    Ok(EnergyValue { value: lanes::power_sum(&lanes::run_lengths(&mut keys), 2), k: 2, group })
}

pub fn fp_energy_forms(a: &FpSet, b: &FpSet, group: Group) -> Result<EnergyForms> {
    let conv = lanes::run_lengths(&mut fp_keys(a, b, conv_op(group))?);
    let corr = lanes::run_lengths(&mut fp_keys(a, b, corr_op(group))?);
    let aa = fp_correlation(a, a, group)?;
    let bb = fp_correlation(b, b, group)?;
    Ok(EnergyForms {
        convolution: lanes::power_sum(&conv, 2),
        correlation: lanes::power_sum(&corr, 2),
        self_correlations: aa.inner(&bb),
    })
}

// ---------------------------------------------------------------------------
// Gowers norms
// ---------------------------------------------------------------------------

pub const DEFAULT_GOWERS_CAP: u32 = 5;

/// `‖A‖_{U^k}`, the non-normalized multiplicative Gowers norm: the number of
/// tuples `(x, g₁, …, g_k)` with every corner `x·∏_{i∈S} g_i` in `A`.
pub fn gowers_norm(a: &RSet, k: u32) -> Result<GowersValue> {
    gowers_norm_capped(a, k, DEFAULT_GOWERS_CAP)
}

pub fn gowers_norm_capped(a: &RSet, k: u32, cap: u32) -> Result<GowersValue> {
    if k < 2 {
        return Err(Precondition::OrderTooSmall { k, min: 2 }.into());
    }
    budget("Gowers order", k as u128, cap as u128)?;
    a.require_nonempty()?;
    a.require_nonzero()?;
    let mut memo = HashMap::new();
    let value = gowers_rec(a, k, &mut memo)?;
    Ok(GowersValue { k, value })
}

/// Divides by the least element; dilates of one set share a key (up to sign).
fn dilation_key(a: &RSet) -> RSet {
    let m = a.min().expect("non-empty").clone();
    if m.is_one() {
        return a.clone();
    }
    RSet::new(a.iter().map(|x| x / &m))
}

fn gowers_rec(a: &RSet, k: u32, memo: &mut HashMap<(u32, RSet), BigUint>) -> Result<BigUint> {
    if a.len() == 1 {
        return Ok(BigUint::one());
    }
    let key = (k, dilation_key(a));
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let total = if k == 2 {
        energy(a, 2, Group::Multiplicative)?.value
    } else {
        let mut total = BigUint::zero();
        for (_, f) in all_fibers(a)? {
            total += gowers_rec(&f, k - 1, memo)?;
        }
        total
    };
    memo.insert(key, total.clone());
    Ok(total)
}

/// Direct corner count for `‖A‖_{U^k}`: for each base point `x` every
/// generator is forced into `A/x`, so the enumeration is `|A|^{k+1}·2^k`
/// membership tests. Intended as an oracle for small sets.
pub fn gowers_bruteforce(a: &RSet, k: u32) -> Result<BigUint> {
    a.require_nonempty()?;
    a.require_nonzero()?;
    budget("parallelepiped tuples", (a.len() as u128).pow(k + 1), 1 << 26)?;
    let n = a.len();
    let mut count = BigUint::zero();
    for x in a {
        let gens: Vec<Rational> = a.iter().map(|y| y / x).collect();
        for t in 0..n.pow(k) {
            let idx: Vec<usize> = (0..k).map(|i| (t / n.pow(i)) % n).collect();
            let all_in = (0u32..(1 << k)).all(|mask| {
                let mut corner = x.clone();
                for (i, &gi) in idx.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        corner = corner * &gens[gi];
                    }
                }
                a.contains(&corner)
            });
            if all_in {
                count += 1u32;
            }
        }
    }
    Ok(count)
}

/// `E^×_k(A)` computed from the fiber sizes `|A_λ| = (A∘A)(λ)`.
pub fn multiplicative_energy_k(a: &RSet, k: u32) -> Result<BigUint> {
    Ok(energy(a, k, Group::Multiplicative)?.value)
}

// ---------------------------------------------------------------------------
// M(A)
// ---------------------------------------------------------------------------

/// A named candidate set `B` for the minimum defining `M(A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub name: String,
    pub set: RSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MHat {
    pub value: Rational,
    /// Name of the minimizing candidate; the first one wins ties.
    pub argmin: String,
    pub product_set_size: usize,
}

/// `|AB|² / (|A||B|)`.
pub fn m_ratio(a: &RSet, b: &RSet) -> Result<Rational> {
    let ab = setop(SetOpKind::Product, a, b)?;
    let num = Rational::from(ab.len() as u64).pow(2);
    Ok(num / Rational::from((a.len() * b.len()) as u64))
}

/// `min_B |AB|²/(|A||B|)` over the supplied candidates. The true `M(A)`
/// minimizes over every non-empty `B`, so this is an upper bound for it.
pub fn m_hat(a: &RSet, candidates: &[Candidate]) -> Result<MHat> {
    a.require_nonempty()?;
    a.require_nonzero()?;
    if candidates.is_empty() {
        return Err(Precondition::EmptyCandidates.into());
    }
    let mut best: Option<MHat> = None;
    for c in candidates {
        c.set.require_nonempty()?;
        c.set.require_nonzero()?;
        let ab = setop(SetOpKind::Product, a, &c.set)?;
        let value = Rational::from(ab.len() as u64).pow(2) / Rational::from((a.len() * c.set.len()) as u64);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(MHat { value, argmin: c.name.clone(), product_set_size: ab.len() });
        }
    }
    Ok(best.expect("non-empty candidates"))
}

/// Default candidates: `A`, `A⁻¹`, `{1}` and the dyadic popularity classes
/// of `A`. The popularity of `x ∈ A` is `Σ_{b∈A} (A∘A)(b/x)`, the total size
/// of the fibers containing `x`; class `j` holds the `x` whose popularity lies
/// in `[2^j, 2^{j+1})`.
pub fn default_candidates(a: &RSet) -> Result<Vec<Candidate>> {
    a.require_nonempty()?;
    let mut out = vec![
        Candidate { name: "A".into(), set: a.clone() },
        Candidate { name: "A^-1".into(), set: a.reciprocals()? },
        Candidate { name: "{1}".into(), set: RSet::singleton(Rational::one()) },
    ];
    let mut pop: BTreeMap<Rational, u64> = BTreeMap::new();
    for (_, f) in all_fibers(a)? {
        for x in &f {
            *pop.entry(x.clone()).or_default() += f.len() as u64;
        }
    }
    let mut classes: BTreeMap<u32, Vec<Rational>> = BTreeMap::new();
    for (x, p) in pop {
        classes.entry(63 - p.leading_zeros()).or_default().push(x);
    }
    for (j, xs) in classes {
        let set = RSet::new(xs);
        if set.len() < a.len() {
            out.push(Candidate { name: format!("pop[2^{j}]"), set });
        }
    }
    Ok(out)
}
