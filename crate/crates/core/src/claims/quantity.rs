//! Non-negative real quantities carried as a rigorous rational enclosure plus
//! a natural-log estimate used only for regression and plotting.

use num_bigint::BigUint;

use crate::interval::{log2_bracket, Interval};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub(crate) struct Quantity {
    pub iv: Interval,
    /// `ln` of the value; `-inf` for zero.
    pub ln: f64,
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return num_traits::ToPrimitive::to_f64(n).expect("finite").ln();
    }
    let shift = bits - 64;
    num_traits::ToPrimitive::to_f64(&(n >> shift)).expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

impl Quantity {
    pub fn exact(r: Rational) -> Self {
        assert!(!r.is_negative(), "quantities are non-negative");
        let ln = if r.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
        };
        Quantity { iv: Interval::point(r), ln }
    }

    pub fn int(n: impl Into<BigUint>) -> Self {
        Quantity::exact(Rational::from(num_bigint::BigInt::from(n.into())))
    }

    pub fn count(n: usize) -> Self {
        Quantity::int(n as u64)
    }

    /// `log₂ n` enclosed by `[⌊log₂ n⌋, ⌈log₂ n⌉]`.
    pub fn log2(n: usize) -> Self {
        Quantity { iv: log2_bracket(n as u64), ln: (n as f64).log2().ln() }
    }

    pub fn mul(&self, o: &Quantity) -> Self {
        Quantity { iv: self.iv.mul(&o.iv), ln: self.ln + o.ln }
    }

    /// `None` when the divisor may vanish.
    pub fn div(&self, o: &Quantity) -> Option<Self> {
        Some(Quantity { iv: self.iv.div(&o.iv)?, ln: self.ln - o.ln })
    }

    pub fn add(&self, o: &Quantity) -> Self {
        let (hi, lo) = if self.ln >= o.ln { (self.ln, o.ln) } else { (o.ln, self.ln) };
        let ln = if lo == f64::NEG_INFINITY { hi } else { hi + (lo - hi).exp().ln_1p() };
        Quantity { iv: self.iv.add(&o.iv), ln }
    }

    /// `x^{num/den}`; `None` for `0` to a negative power.
    pub fn pow(&self, num: i32, den: u32) -> Option<Self> {
        Some(Quantity { iv: self.iv.powf(num, den)?, ln: self.ln * num as f64 / den as f64 })
    }

    pub fn min(&self, o: &Quantity) -> Self {
        Quantity { iv: self.iv.min(&o.iv), ln: self.ln.min(o.ln) }
    }

    pub fn display(&self) -> String {
        self.iv.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates_track_enclosures() {
        let a = Quantity::count(1000);
        let b = Quantity::log2(16).mul(&a.pow(3, 2).unwrap());
        let v = b.ln.exp();
        assert!(b.iv.lo().to_f64() <= v * (1.0 + 1e-12) && v <= b.iv.hi().to_f64() * (1.0 + 1e-12));
        let s = Quantity::count(3).add(&Quantity::count(5));
        assert!((s.ln.exp() - 8.0).abs() < 1e-12);
        assert_eq!(s.iv, Interval::point(8));
        assert!(Quantity::count(0).div(&Quantity::count(0)).is_none());
        let big = Quantity::int(BigUint::from(3u32).pow(2000));
        assert!((big.ln - 2000.0 * 3f64.ln()).abs() < 1e-6);
    }
}
