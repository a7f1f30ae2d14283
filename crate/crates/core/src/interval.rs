//! Closed intervals with rational endpoints, used to enclose quantities that
//! involve fractional powers and base-2 logarithms without floating point.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(r: impl Into<Rational>) -> Self {
        let r = r.into();
        Interval { lo: r.clone(), hi: r }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = cands.iter().min().expect("four").clone();
        let hi = cands.iter().max().expect("four").clone();
        Interval { lo, hi }
    }

    /// `None` when the divisor contains zero.
    pub fn div(&self, o: &Interval) -> Option<Interval> {
        Some(self.mul(&o.recip()?))
    }

    pub fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval { lo: self.hi.recip()?, hi: self.lo.recip()? })
    }

    /// Integer power of a non-negative interval.
    pub fn powi(&self, e: i32) -> Option<Interval> {
        assert!(!self.lo.is_negative(), "powi of a signed interval");
        let pos = Interval { lo: self.lo.pow(e.abs()), hi: self.hi.pow(e.abs()) };
        if e < 0 {
            pos.recip()
        } else {
            Some(pos)
        }
    }

    /// `x^{num/den}` for a non-negative interval; `None` for `0` to a negative power.
    pub fn powf(&self, num: i32, den: u32) -> Option<Interval> {
        assert!(den > 0);
        let p = self.powi(num)?;
        if den == 1 {
            return Some(p);
        }
        Some(Interval { lo: root_enclosure(&p.lo, den).lo, hi: root_enclosure(&p.hi, den).hi })
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().max(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().min(o.hi.clone()) }
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Rational> for Interval {
    fn from(r: Rational) -> Self {
        Interval::point(r)
    }
}

/// `[⌊log₂ n⌋, ⌈log₂ n⌉]`, a point exactly when `n` is a power of two.
pub fn log2_bracket(n: u64) -> Interval {
    assert!(n >= 1, "log of zero");
    let fl = 63 - n.leading_zeros() as i64;
    let cl = if n.is_power_of_two() { fl } else { fl + 1 };
    Interval::new(Rational::from(fl), Rational::from(cl))
}

/// Significant bits kept by [`root_enclosure`].
const ROOT_BITS: i64 = 48;

/// `[lo, hi]` with `lo^n ≤ x ≤ hi^n` for `x ≥ 0`; a point when the root is an
/// exact dyadic rational at the working precision.
pub fn root_enclosure(x: &Rational, n: u32) -> Interval {
    assert!(!x.is_negative(), "root of a negative number");
    assert!(n > 0);
    if x.is_zero() || n == 1 {
        return Interval::point(x.clone());
    }
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    let root_bits = (a.bits() as i64 - b.bits() as i64) / n as i64;
    let shift = (ROOT_BITS - root_bits).max(0) as u64;
    let scaled = a << (shift * n as u64);
    let t = &scaled / b;
    let r: BigUint = t.nth_root(n);
    let exact = (&scaled % b).is_zero() && num_traits::pow(r.clone(), n as usize) == t;
    let den = BigInt::from(BigUint::from(1u32) << shift);
    let to_q = |v: BigUint| Rational::new(BigInt::from_biguint(Sign::Plus, v), den.clone()).expect("non-zero");
    let lo = to_q(r.clone());
    let hi = if exact { lo.clone() } else { to_q(r + 1u32) };
    Interval::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn brackets() {
        assert_eq!(log2_bracket(1), Interval::point(0));
        assert_eq!(log2_bracket(8), Interval::point(3));
        assert_eq!(log2_bracket(12), Interval::new(q("3"), q("4")));
    }

    #[test]
    fn roots_enclose() {
        assert_eq!(root_enclosure(&q("16"), 2), Interval::point(4));
        assert_eq!(root_enclosure(&q("1/4"), 2), Interval::point(q("1/2")));
        for (x, n) in [("2", 2), ("1000000007/3", 3), ("5/1234567", 4), ("123456789012345678901234567890", 2)] {
            let r = root_enclosure(&q(x), n);
            assert!(r.lo().pow(n as i32) <= q(x) && q(x) <= r.hi().pow(n as i32), "{x}");
            let width = (r.hi() - r.lo()) / r.hi().clone();
            assert!(width.to_f64() < 1e-13, "{x}: {r}");
        }
    }

    #[test]
    fn arithmetic() {
        let a = Interval::new(q("1"), q("2"));
        let b = Interval::new(q("-3"), q("4"));
        assert_eq!(a.mul(&b), Interval::new(q("-6"), q("8")));
        assert!(a.div(&b).is_none());
        assert_eq!(b.div(&a).unwrap(), Interval::new(q("-3"), q("4")));
        assert_eq!(a.powi(-2).unwrap(), Interval::new(q("1/4"), q("1")));
        let p = Interval::point(q("8")).powf(3, 2).unwrap();
        assert!(p.lo() < &q("22628/1000") && p.hi() > &q("22627/1000"));
        assert_eq!(Interval::point(q("0")).powf(-1, 2), None);
        assert_eq!(format!("{}", Interval::new(q("1/2"), q("1"))), "[1/2, 1]");
    }
}
