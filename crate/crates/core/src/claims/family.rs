//! Deterministic, seeded set families.
//!
//! A family is written `kind[:param:param]`, e.g. `gp:1:2`, `ap:0:3`,
//! `random`, `random:1000:50`, `gp-subset:2:3`, `gp-ap:2:1`, `fp-subgroup`,
//! `fp-subgroup:97`, `fp-random:10007`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{is_prime, FpSet};
use crate::fplab::{subgroup, subgroup_prime};
use crate::rational::Rational;
use crate::sets::RSet;

/// Largest modulus the automatic subgroup family will use.
pub const SUBGROUP_MAX_PRIME: u64 = 10007;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `start + i·step`.
    Ap { start: Rational, step: Rational },
    /// `start·ratio^i`.
    Gp { start: Rational, ratio: Rational },
    /// Distinct `±u/v` with `1 ≤ u ≤ numer_max`, `1 ≤ v ≤ denom_max`.
    Random { numer_max: u64, denom_max: u64 },
    /// A uniform `n`-subset of `{ratio^i : i < spread·n}`.
    GpSubset { ratio: Rational, spread: u32 },
    /// `{ratio^i : i < ⌈n/2⌉} ∪ {−step·j : 1 ≤ j ≤ ⌊n/2⌋}`.
    GpAp { ratio: Rational, step: Rational },
    /// The order-`n` subgroup of `F_p^*`; without `p`, the least prime
    /// `p ≡ 1 (mod n)` with `p ≥ n²` and `p ≤ 10007`.
    FpSubgroup { p: Option<u64> },
    /// A uniform `n`-subset of `F_p^*`.
    FpRandom { p: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub seed: u64,
}

/// A generated input: a set of rationals or of residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSet {
    Rational(RSet),
    Fp(FpSet),
}

impl GenSet {
    pub fn len(&self) -> usize {
        match self {
            GenSet::Rational(s) => s.len(),
            GenSet::Fp(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_text(&self) -> String {
        match self {
            GenSet::Rational(s) => s.to_text(),
            GenSet::Fp(s) => s.to_text(),
        }
    }
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, seed: u64) -> Self {
        FamilySpec { kind, seed }
    }

    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        Ok(FamilySpec { kind: text.parse()?, seed })
    }

    pub fn is_random(&self) -> bool {
        matches!(self.kind, FamilyKind::Random { .. } | FamilyKind::GpSubset { .. } | FamilyKind::FpRandom { .. })
    }

    pub fn is_prime_field(&self) -> bool {
        matches!(self.kind, FamilyKind::FpSubgroup { .. } | FamilyKind::FpRandom { .. })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        FamilySpec { kind: self.kind.clone(), seed }
    }

    fn rng(&self, n: usize) -> ChaCha8Rng {
        let salt = self
            .kind
            .to_string()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt ^ (n as u64).rotate_left(32))
    }

    /// The family member of size `n`.
    pub fn generate(&self, n: usize) -> Result<GenSet> {
        if n == 0 {
            return Err(Error::Invalid("family sizes must be positive".into()));
        }
        let conflict = |msg: &str| Err(Error::Invalid(format!("family {}: {msg}", self.kind)));
        Ok(match &self.kind {
            FamilyKind::Ap { start, step } => {
                if step.is_zero() {
                    return conflict("step must be non-zero");
                }
                GenSet::Rational(RSet::new((0..n).map(|i| start + &(step * &Rational::from(i)))))
            }
            FamilyKind::Gp { start, ratio } => {
                if start.is_zero() || ratio.is_zero() || ratio.abs().is_one() {
                    return conflict("start must be non-zero and |ratio| ∉ {0, 1}");
                }
                GenSet::Rational(RSet::new(powers(ratio, n).map(|r| start * &r)))
            }
            FamilyKind::Random { numer_max, denom_max } => {
                let room = 2 * (*numer_max as u128) * (*denom_max as u128);
                if *numer_max == 0 || *denom_max == 0 || room < 4 * n as u128 {
                    return conflict("value range too small for the requested size");
                }
                let mut rng = self.rng(n);
                let mut vals = std::collections::BTreeSet::new();
                while vals.len() < n {
                    let u = rng.gen_range(1..=*numer_max) as i64;
                    let v = rng.gen_range(1..=*denom_max) as i64;
                    let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                    vals.insert(Rational::from(s * u) / Rational::from(v));
                }
                GenSet::Rational(RSet::new(vals))
            }
            FamilyKind::GpSubset { ratio, spread } => {
                if ratio.is_zero() || ratio.abs().is_one() || *spread == 0 {
                    return conflict("|ratio| ∉ {0, 1} and spread ≥ 1 required");
                }
                let pool: Vec<Rational> = powers(ratio, *spread as usize * n).collect();
                let mut rng = self.rng(n);
                let picked = index::sample(&mut rng, pool.len(), n);
                GenSet::Rational(RSet::new(picked.into_iter().map(|i| pool[i].clone())))
            }
            FamilyKind::GpAp { ratio, step } => {
                if ratio.is_zero() || ratio.abs().is_one() || step.is_zero() {
                    return conflict("|ratio| ∉ {0, 1} and a non-zero step required");
                }
                let head = n.div_ceil(2);
                let mut vals: std::collections::BTreeSet<Rational> = powers(ratio, head).collect();
                let mut j = 1u64;
                while vals.len() < n {
                    vals.insert(-(step * &Rational::from(j)));
                    j += 1;
                }
                GenSet::Rational(RSet::new(vals))
            }
            FamilyKind::FpSubgroup { p } => {
                let p = match p {
                    Some(p) => *p,
                    None => {
                        let n64 = n as u64;
                        match subgroup_prime(n64, n64 * n64, SUBGROUP_MAX_PRIME) {
                            Some(p) => p,
                            None => {
                                return conflict(&format!(
                                    "no prime p ≤ {SUBGROUP_MAX_PRIME} with p ≡ 1 (mod {n}) and p ≥ {n}²"
                                ))
                            }
                        }
                    }
                };
                GenSet::Fp(subgroup(p, n as u64)?)
            }
            FamilyKind::FpRandom { p } => {
                if !is_prime(*p) {
                    return conflict("modulus must be prime");
                }
                if n as u64 > p - 1 {
                    return conflict("size exceeds |F_p^*|");
                }
                let mut rng = self.rng(n);
                let picked = index::sample(&mut rng, (*p - 1) as usize, n);
                GenSet::Fp(FpSet::new(*p, picked.into_iter().map(|i| i as u64 + 1))?)
            }
        })
    }

    /// A second, independent input of size `⌈n/2⌉`: the family with seed
    /// `seed + offset`, or for subgroups a random subset of the same field.
    pub fn companion(&self, first: &GenSet, n: usize, offset: u64) -> Result<GenSet> {
        let m = n.div_ceil(2);
        match (&self.kind, first) {
            (FamilyKind::FpSubgroup { .. }, GenSet::Fp(a)) => {
                FamilySpec::new(FamilyKind::FpRandom { p: a.modulus() }, self.seed.wrapping_add(offset)).generate(m)
            }
            _ => self.with_seed(self.seed.wrapping_add(offset)).generate(m),
        }
    }
}

fn powers(ratio: &Rational, n: usize) -> impl Iterator<Item = Rational> + '_ {
    (0..n).scan(Rational::from(1), move |acc, _| {
        let cur = acc.clone();
        *acc = &*acc * ratio;
        Some(cur)
    })
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Ap { start, step } => write!(f, "ap:{start}:{step}"),
            FamilyKind::Gp { start, ratio } => write!(f, "gp:{start}:{ratio}"),
            FamilyKind::Random { numer_max, denom_max } => write!(f, "random:{numer_max}:{denom_max}"),
            FamilyKind::GpSubset { ratio, spread } => write!(f, "gp-subset:{ratio}:{spread}"),
            FamilyKind::GpAp { ratio, step } => write!(f, "gp-ap:{ratio}:{step}"),
            FamilyKind::FpSubgroup { p: None } => write!(f, "fp-subgroup"),
            FamilyKind::FpSubgroup { p: Some(p) } => write!(f, "fp-subgroup:{p}"),
            FamilyKind::FpRandom { p } => write!(f, "fp-random:{p}"),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.kind, f)
    }
}

impl Serialize for FamilySpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let mut parts = text.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let args: Vec<&str> = parts.collect();
        let bad = || Error::Parse(format!("malformed family {text:?}"));
        let q = |i: usize, default: &str| -> Result<Rational> {
            args.get(i).copied().unwrap_or(default).parse::<Rational>().map_err(|_| bad())
        };
        let int = |i: usize, default: u64| -> Result<u64> {
            args.get(i).map_or(Ok(default), |s| s.parse::<u64>().map_err(|_| bad()))
        };
        let arity = |max: usize| if args.len() > max { Err(bad()) } else { Ok(()) };
        match kind.as_str() {
            "ap" => {
                arity(2)?;
                Ok(FamilyKind::Ap { start: q(0, "1")?, step: q(1, "1")? })
            }
            "gp" => {
                arity(2)?;
                Ok(FamilyKind::Gp { start: q(0, "1")?, ratio: q(1, "2")? })
            }
            "random" => {
                arity(2)?;
                Ok(FamilyKind::Random { numer_max: int(0, 1_000_000)?, denom_max: int(1, 1000)? })
            }
            "gp-subset" => {
                arity(2)?;
                Ok(FamilyKind::GpSubset { ratio: q(0, "2")?, spread: int(1, 2)? as u32 })
            }
            "gp-ap" | "gp+ap" => {
                arity(2)?;
                Ok(FamilyKind::GpAp { ratio: q(0, "2")?, step: q(1, "1")? })
            }
            "fp-subgroup" => {
                arity(1)?;
                Ok(FamilyKind::FpSubgroup { p: args.first().map(|_| int(0, 0)).transpose()? })
            }
            "fp-random" => {
                if args.len() != 1 {
                    return Err(Error::Parse(format!("family {text:?} needs a modulus: fp-random:<p>")));
                }
                Ok(FamilyKind::FpRandom { p: int(0, 0)? })
            }
            _ => Err(Error::Parse(format!("unknown family {text:?}"))),
        }
    }
}

/// Strictly increasing input sizes: `a..b` doubles from `a` up to `b`,
/// `a,b,c` lists sizes explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeRange(Vec<usize>);

impl SizeRange {
    pub fn new(mut sizes: Vec<usize>) -> Result<Self> {
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.is_empty() || sizes[0] == 0 {
            return Err(Error::Parse("size range must be non-empty and positive".into()));
        }
        Ok(SizeRange(sizes))
    }

    pub fn doubling(from: usize, to: usize) -> Result<Self> {
        if from == 0 || from > to {
            return Err(Error::Parse(format!("empty size range {from}..{to}")));
        }
        SizeRange::new(std::iter::successors(Some(from), |&n| n.checked_mul(2)).take_while(|&n| n <= to).collect())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for SizeRange {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed size range {text:?}"));
        if let Some((a, b)) = text.split_once("..") {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            return SizeRange::doubling(a, b);
        }
        SizeRange::new(text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?)
    }
}

impl fmt::Display for SizeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
