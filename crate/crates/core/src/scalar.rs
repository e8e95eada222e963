//! Working-precision scalars for the optimizer.
//!
//! Every closed form and the nonlinear residual are written against [`Real`],
//! implemented for `f64` and for [`Ext`], a 192-bit binary float (57 decimal
//! digits) backed by `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Decimal digits carried by the type.
    const DIGITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn pi() -> Self;
    fn epsilon() -> Self;
    fn is_finite(&self) -> bool;
    /// Decimal rendering with `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Real for f64 {
    const DIGITS: u32 = 15;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
}

/// Binary precision of [`Ext`] in bits.
pub const EXT_BITS: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Extended-precision real. NaN propagates like IEEE NaN and is caught by
/// [`Real::is_finite`].
#[derive(Clone)]
pub struct Ext(BigFloat);

impl Ext {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    /// Parses a decimal literal at full working precision.
    pub fn parse(s: &str) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, EXT_BITS, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Ext(v))
        }
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(20))
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(40))
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        Ext(self.0.add(&rhs.0, EXT_BITS, RM))
    }
}

impl Sub for Ext {
    type Output = Ext;
    fn sub(self, rhs: Ext) -> Ext {
        Ext(self.0.sub(&rhs.0, EXT_BITS, RM))
    }
}

impl Mul for Ext {
    type Output = Ext;
    fn mul(self, rhs: Ext) -> Ext {
        Ext(self.0.mul(&rhs.0, EXT_BITS, RM))
    }
}

impl Div for Ext {
    type Output = Ext;
    fn div(self, rhs: Ext) -> Ext {
        Ext(self.0.div(&rhs.0, EXT_BITS, RM))
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(self.0.neg())
    }
}

impl Real for Ext {
    const DIGITS: u32 = 57;

    fn from_f64(x: f64) -> Self {
        Ext(BigFloat::from_f64(x, EXT_BITS))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        // Mantissa words are little-endian; the value is 0.m * 2^e.
        let n = words.len();
        if n == 0 || words[n - 1] == 0 {
            return 0.0;
        }
        let hi = words[n - 1] as f64;
        let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
        let m = hi + lo * 2f64.powi(-64);
        let e = e as i32 - 64;
        // Split the scaling to keep intermediate powers finite.
        let v = m * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    fn ln(&self) -> Self {
        Ext(with_consts(|cc| self.0.ln(EXT_BITS, RM, cc)))
    }

    fn exp(&self) -> Self {
        Ext(with_consts(|cc| self.0.exp(EXT_BITS, RM, cc)))
    }

    fn sin(&self) -> Self {
        Ext(with_consts(|cc| self.0.sin(EXT_BITS, RM, cc)))
    }

    fn sqrt(&self) -> Self {
        Ext(self.0.sqrt(EXT_BITS, RM))
    }

    fn abs(&self) -> Self {
        Ext(self.0.abs())
    }

    fn pi() -> Self {
        Ext(with_consts(|cc| cc.pi(EXT_BITS, RM)))
    }

    fn epsilon() -> Self {
        Ext(BigFloat::from_f64(2f64.powi(1 - EXT_BITS as i32), EXT_BITS))
    }

    fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    fn to_decimal(&self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        if self.0.is_zero() {
            return "0".to_string();
        }
        // Scale into [1, 10) and peel digits in extended arithmetic.
        let neg = self.0.is_negative();
        let mut x = self.abs();
        let mut exp10 = x.to_f64().log10().floor() as i32;
        let ten = Ext::from_f64(10.0);
        let scale = pow_int(&ten, exp10.unsigned_abs());
        x = if exp10 >= 0 { x / scale } else { x * scale };
        while x >= ten {
            x = x / ten.clone();
            exp10 += 1;
        }
        while x < Ext::one() {
            x = x * ten.clone();
            exp10 -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.to_f64().floor().clamp(0.0, 9.0) as u8;
            ds.push(d);
            x = (x - Ext::from_f64(d as f64)) * ten.clone();
        }
        // Round half up on the guard digit.
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push_str(&format!("e{exp10}"));
        s
    }
}

fn pow_int(base: &Ext, mut n: u32) -> Ext {
    let mut acc = Ext::one();
    let mut b = base.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        n >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_round_trips_f64() {
        for &x in &[1.0, -2.5, 3.0e-7, 1.234_567_890_123_456_7e12, 0.968096, 321.074] {
            let e = Ext::from_f64(x);
            assert_eq!(e.to_f64(), x, "{x}");
        }
        assert_eq!(Ext::zero().to_f64(), 0.0);
    }

    #[test]
    fn ext_carries_more_than_forty_digits() {
        // (1 + 1e-45) - 1 survives in extended arithmetic.
        let tiny = Ext::parse("1e-45").unwrap();
        let d = (Ext::one() + tiny) - Ext::one();
        let r = d.to_f64() / 1e-45;
        assert!((r - 1.0).abs() < 1e-10, "{r}");
        assert!(Ext::epsilon().to_f64() < 1e-40);
    }

    #[test]
    fn ext_transcendentals_match_f64() {
        let x = Ext::from_f64(0.7);
        assert!((x.ln().to_f64() - 0.7f64.ln()).abs() < 1e-15);
        assert!((x.exp().to_f64() - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.sin().to_f64() - 0.7f64.sin()).abs() < 1e-15);
        assert!((Ext::pi().to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn ext_decimal_rendering() {
        let ln2 = Ext::from_f64(2.0).ln();
        assert_eq!(
            ln2.to_decimal(40),
            "6.931471805599453094172321214581765680755e-1"
        );
        assert_eq!(Ext::from_f64(-1250.0).to_decimal(3), "-1.25e3");
        assert_eq!(Ext::from_f64(9.9996).to_decimal(3), "1.00e1");
    }
}
