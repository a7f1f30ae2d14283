//! Finite sets of rationals and their arithmetic.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{budget, Error, Precondition, Result};
use crate::lanes::{self, combine, frac_to_rational, Frac, FracVisitor, Lane, PairOp};
use crate::rational::Rational;

/// Largest derived set any construction may produce unless overridden.
pub const DEFAULT_SET_CAP: usize = 1 << 20;

/// Largest number of element pairs a single pairwise construction may visit.
pub const PAIR_BUDGET: u128 = 1 << 27;

/// A finite set of rationals, deduplicated and stored in increasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RSet {
    elems: Vec<Rational>,
}

impl RSet {
    pub fn new(elems: impl IntoIterator<Item = Rational>) -> Self {
        let mut elems: Vec<Rational> = elems.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        RSet { elems }
    }

    /// Trusted constructor for already sorted, deduplicated input.
    pub(crate) fn from_sorted(elems: Vec<Rational>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        RSet { elems }
    }

    pub fn from_ints(it: impl IntoIterator<Item = i64>) -> Self {
        RSet::new(it.into_iter().map(Rational::from))
    }

    pub fn singleton(x: Rational) -> Self {
        RSet { elems: vec![x] }
    }

    pub fn elements(&self) -> &[Rational] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.elems.iter()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn min(&self) -> Option<&Rational> {
        self.elems.first()
    }

    pub fn max(&self) -> Option<&Rational> {
        self.elems.last()
    }

    pub fn is_subset(&self, other: &RSet) -> bool {
        self.len() <= other.len() && self.elems.iter().all(|x| other.contains(x))
    }

    pub fn intersection(&self, other: &RSet) -> RSet {
        RSet::from_sorted(self.elems.iter().filter(|x| other.contains(x)).cloned().collect())
    }

    pub fn union(&self, other: &RSet) -> RSet {
        RSet::new(self.elems.iter().chain(other.elems.iter()).cloned())
    }

    pub fn without_zero(&self) -> RSet {
        RSet::from_sorted(self.elems.iter().filter(|x| !x.is_zero()).cloned().collect())
    }

    /// `{x⁻¹ : x ∈ A}`.
    pub fn reciprocals(&self) -> Result<RSet> {
        self.require_nonzero()?;
        Ok(RSet::new(self.elems.iter().map(|x| x.recip().expect("nonzero"))))
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Precondition::EmptySet.into())
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_nonzero(&self) -> Result<()> {
        if self.contains_zero() {
            Err(Precondition::ZeroInMultiplicativeSet.into())
        } else {
            Ok(())
        }
    }

    /// Whitespace-separated canonical tokens, the inverse of [`parse_set`].
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.elems.iter().map(|x| x.to_string()).collect();
        parts.join(" ")
    }
}

impl fmt::Debug for RSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elems.iter()).finish()
    }
}

impl FromIterator<Rational> for RSet {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RSet::new(iter)
    }
}

impl<'a> IntoIterator for &'a RSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl Serialize for RSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elems.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(RSet::new(Vec::<Rational>::deserialize(d)?))
    }
}

/// Drops `#` comments and splits on whitespace.
pub(crate) fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split_once('#').map_or(l, |(before, _)| before))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|t| !t.is_empty())
}

/// Parses rational tokens (`p` or `p/q`) separated by whitespace or commas (`p` or `p/q`); `#` starts a
/// comment that runs to the end of the line.
pub fn parse_set(text: &str) -> Result<RSet> {
    let elems = tokens(text).map(Rational::parse).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(RSet::new(elems))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOpKind {
    Sum,
    Difference,
    Product,
    Quotient,
}

impl std::str::FromStr for SetOpKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" | "+" => Ok(SetOpKind::Sum),
            "difference" | "diff" | "-" => Ok(SetOpKind::Difference),
            "product" | "prod" | "*" => Ok(SetOpKind::Product),
            "quotient" | "quot" | "/" => Ok(SetOpKind::Quotient),
            other => Err(Error::Invalid(format!("unknown set operation {other:?}"))),
        }
    }
}

struct SetOpVisitor {
    kind: SetOpKind,
    cap: usize,
}

impl FracVisitor for SetOpVisitor {
    type Out = Result<RSet>;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> Result<RSet> {
        let (a, b) = (&sets[0], &sets[1]);
        let mut keys: Vec<Frac<T>> = Vec::with_capacity(a.len() * b.len());
        match self.kind {
            SetOpKind::Sum => pairs(a, b, PairOp::Sum, &mut keys),
            // combine(Diff, x, y) = y - x, so iterate B outside.
            SetOpKind::Difference => pairs(b, a, PairOp::Diff, &mut keys),
            SetOpKind::Product => pairs(a, b, PairOp::Prod, &mut keys),
            SetOpKind::Quotient => {
                let nonzero: Vec<Frac<T>> = b.iter().filter(|f| !f.0.is_zero()).cloned().collect();
                pairs(&nonzero, a, PairOp::Quot, &mut keys)
            }
        }
        keys.sort_unstable();
        keys.dedup();
        if keys.len() > self.cap {
            return Err(Error::Budget {
                what: "derived set size".into(),
                needed: keys.len() as u128,
                limit: self.cap as u128,
            });
        }
        Ok(RSet::new(keys.iter().map(frac_to_rational)))
    }
}

fn pairs<T: Lane>(xs: &[Frac<T>], ys: &[Frac<T>], op: PairOp, out: &mut Vec<Frac<T>>) {
    for x in xs {
        for y in ys {
            out.push(combine(op, x, y));
        }
    }
}

/// `A ∘ B` for `∘ ∈ {+, −, ×, ÷}`; quotients skip zero divisors.
pub fn setop(kind: SetOpKind, a: &RSet, b: &RSet) -> Result<RSet> {
    setop_capped(kind, a, b, DEFAULT_SET_CAP)
}

pub fn setop_capped(kind: SetOpKind, a: &RSet, b: &RSet, cap: usize) -> Result<RSet> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    budget("element pairs", (a.len() as u128) * (b.len() as u128), PAIR_BUDGET)?;
    lanes::dispatch_frac(&[a.elements(), b.elements()], SetOpVisitor { kind, cap })
}

/// `kA = A + ⋯ + A` (k copies).
pub fn iterated_sumset(a: &RSet, k: u32) -> Result<RSet> {
    iterated_sumset_capped(a, k, DEFAULT_SET_CAP)
}

pub fn iterated_sumset_capped(a: &RSet, k: u32, cap: usize) -> Result<RSet> {
    if k == 0 {
        return Err(Precondition::ZeroIterationCount.into());
    }
    a.require_nonempty()?;
    let mut acc = a.clone();
    for _ in 1..k {
        acc = setop_capped(SetOpKind::Sum, &acc, a, cap)?;
    }
    Ok(acc)
}

/// `{u·a + v : a ∈ A}`.
pub fn affine_image(a: &RSet, u: &Rational, v: &Rational) -> Result<RSet> {
    if u.is_zero() {
        return Err(Precondition::ZeroDilation.into());
    }
    let mut elems: Vec<Rational> = a.iter().map(|x| u * x + v).collect();
    if u.is_negative() {
        elems.reverse();
    }
    Ok(RSet::from_sorted(elems))
}

/// `A_λ = A ∩ λ⁻¹A = {x ∈ A : λx ∈ A}`.
pub fn fiber(a: &RSet, lambda: &Rational) -> Result<RSet> {
    if lambda.is_zero() {
        return Err(Precondition::ZeroFiberScalar.into());
    }
    a.require_nonzero()?;
    Ok(RSet::from_sorted(a.iter().filter(|x| a.contains(&(lambda * *x))).cloned().collect()))
}

struct FiberVisitor;

impl FracVisitor for FiberVisitor {
    type Out = Vec<(Rational, Vec<usize>)>;
    fn visit<T: Lane>(self, sets: Vec<Vec<Frac<T>>>) -> Self::Out {
        let a = &sets[0];
        let mut keyed: Vec<(Frac<T>, u32)> = Vec::with_capacity(a.len() * a.len());
        for (i, x) in a.iter().enumerate() {
            for y in a {
                keyed.push((combine(PairOp::Quot, x, y), i as u32));
            }
        }
        keyed.sort_unstable();
        let mut out: Vec<(Rational, Vec<usize>)> = Vec::new();
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i;
            let mut members = Vec::new();
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                members.push(keyed[j].1 as usize);
                j += 1;
            }
            out.push((frac_to_rational(&keyed[i].0), members));
            i = j;
        }
        out
    }
}

/// Every non-empty fiber: `(λ, A_λ)` for each `λ ∈ A/A`, in increasing `λ`.
pub fn all_fibers(a: &RSet) -> Result<Vec<(Rational, RSet)>> {
    a.require_nonempty()?;
    a.require_nonzero()?;
    budget("element pairs", (a.len() as u128).pow(2), PAIR_BUDGET)?;
    let groups = lanes::dispatch_frac(&[a.elements()], FiberVisitor);
    let mut out: Vec<(Rational, RSet)> = groups
        .into_iter()
        .map(|(lam, idx)| (lam, RSet::from_sorted(idx.into_iter().map(|i| a.elems[i].clone()).collect())))
        .collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}
