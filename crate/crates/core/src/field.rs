//! Scalar fields used by every matrix routine in the crate.
//!
//! Three instantiations are provided:
//!
//! * [`Zp`], the prime field with a process-wide modulus (default
//!   2,147,483,629). Products of two residues fit in a `u64`.
//! * [`Rational`], arbitrary precision rationals (always in lowest terms).
//! * `f64`, used only where square roots are needed (QR normalization) and
//!   for demos.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use std::str::FromStr;

use malachite_base::num::arithmetic::traits::{Mod, Pow, Reciprocal};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
use malachite_nz::integer::Integer;

use crate::error::{Error, Result};

/// Arbitrary precision rational numbers, always in lowest terms.
pub type Rational = malachite_q::Rational;

/// `num / den` as a rational. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from_integers(Integer::from(num), Integer::from(den))
}

/// Nearest `f64` to `q`.
pub fn to_f64(q: &Rational) -> f64 {
    f64::rounding_from(q, RoundingMode::Nearest).0
}

/// Operations every scalar type must support.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact (pivoting picks the first nonzero).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_i64(v: i64) -> Self;
    /// Image of `num / den`. `None` when `den` maps to zero.
    fn from_ratio(num: &Integer, den: &Integer) -> Option<Self>;
    /// Pivot score for inexact fields. Exact fields may return anything.
    fn magnitude(&self) -> f64;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() + a.clone() * b.clone();
    }

    /// `self -= a * b`.
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() - a.clone() * b.clone();
    }

    /// `self *= a`.
    fn mul_assign_ref(&mut self, a: &Self) {
        *self = self.clone() * a.clone();
    }
}

/// A field with a total order compatible with its arithmetic, needed by the
/// simplex ratio test.
pub trait OrderedField: Field + PartialOrd {}

impl OrderedField for Rational {}
impl OrderedField for f64 {}

/// Default modulus of [`Zp`].
pub const DEFAULT_MODULUS: u64 = 2_147_483_629;

static MODULUS: AtomicU64 = AtomicU64::new(DEFAULT_MODULUS);

/// Current modulus of [`Zp`].
#[inline]
pub fn modulus() -> u64 {
    MODULUS.load(Ordering::Relaxed)
}

/// Changes the modulus of [`Zp`].
///
/// The modulus is fixed for a run: this must be called before any [`Zp`]
/// value is created. Values created under a different modulus are
/// meaningless afterwards.
pub fn set_modulus(p: u64) -> Result<()> {
    if p >= 1 << 32 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    MODULUS.store(p, Ordering::Relaxed);
    Ok(())
}

/// Trial division, sufficient for 32-bit moduli.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Element of the prime field Z_p, stored in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Zp(u64);

impl Zp {
    pub fn new(v: u64) -> Self {
        Zp(v % modulus())
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn from_integer(v: &Integer) -> Self {
        let r = v.mod_op(Integer::from(modulus()));
        Zp(u64::try_from(&r).expect("residue fits in u64"))
    }
}

impl fmt::Debug for Zp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Zp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Zp {
    type Output = Zp;
    #[inline]
    fn add(self, rhs: Zp) -> Zp {
        let p = modulus();
        let s = self.0 + rhs.0;
        Zp(if s >= p { s - p } else { s })
    }
}

impl Sub for Zp {
    type Output = Zp;
    #[inline]
    fn sub(self, rhs: Zp) -> Zp {
        if self.0 >= rhs.0 {
            Zp(self.0 - rhs.0)
        } else {
            Zp(self.0 + modulus() - rhs.0)
        }
    }
}

impl Mul for Zp {
    type Output = Zp;
    #[inline]
    fn mul(self, rhs: Zp) -> Zp {
        Zp(self.0 * rhs.0 % modulus())
    }
}

impl Neg for Zp {
    type Output = Zp;
    #[inline]
    fn neg(self) -> Zp {
        if self.0 == 0 {
            self
        } else {
            Zp(modulus() - self.0)
        }
    }
}

impl Field for Zp {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zp(0)
    }

    fn one() -> Self {
        Zp(1 % modulus())
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // extended Euclid on (a, p)
        let p = modulus() as i64;
        let (mut r0, mut r1) = (self.0 as i64, p);
        let (mut s0, mut s1) = (1i64, 0i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(Zp(s0.rem_euclid(p) as u64))
    }

    fn from_i64(v: i64) -> Self {
        Zp(v.rem_euclid(modulus() as i64) as u64)
    }

    fn from_ratio(num: &Integer, den: &Integer) -> Option<Self> {
        let d = Zp::from_integer(den).inv()?;
        Some(Zp::from_integer(num) * d)
    }

    fn magnitude(&self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            1.0
        }
    }
}

impl Field for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::ZERO
    }

    fn one() -> Self {
        Rational::ONE
    }

    fn is_zero(&self) -> bool {
        *self == Rational::ZERO
    }

    fn inv(&self) -> Option<Self> {
        if Field::is_zero(self) {
            None
        } else {
            Some(self.reciprocal())
        }
    }

    fn from_i64(v: i64) -> Self {
        Rational::from(v)
    }

    fn from_ratio(num: &Integer, den: &Integer) -> Option<Self> {
        if *den == Integer::ZERO {
            None
        } else {
            Some(Rational::from_integers_ref(num, den))
        }
    }

    fn magnitude(&self) -> f64 {
        to_f64(self).abs()
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }

    fn mul_assign_ref(&mut self, a: &Self) {
        *self *= a;
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / *self)
        }
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: &Integer, den: &Integer) -> Option<Self> {
        if *den == Integer::ZERO {
            return None;
        }
        Some(to_f64(&Rational::from_integers_ref(num, den)))
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

/// Reduction homomorphism from the rationals to Z_p.
///
/// Returns `None` when the denominator is divisible by p.
pub fn reduce_rational(q: &Rational) -> Option<Zp> {
    let num = Integer::from_sign_and_abs(*q >= 0u32, q.to_numerator());
    Zp::from_ratio(&num, &Integer::from(q.to_denominator()))
}

/// Parses `"p/q"`, an integer, or a decimal literal into a field element.
pub fn parse_scalar<F: Field>(text: &str) -> Option<F> {
    let (num, den) = parse_ratio(text.trim())?;
    F::from_ratio(&num, &den)
}

fn parse_int(text: &str) -> Option<Integer> {
    Integer::from_str(text.strip_prefix('+').unwrap_or(text)).ok()
}

fn parse_ratio(text: &str) -> Option<(Integer, Integer)> {
    if let Some((n, d)) = text.split_once('/') {
        return Some((parse_int(n.trim())?, parse_int(d.trim())?));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.trim_start().starts_with('-');
        let int_part = match int {
            "" | "-" | "+" => Integer::ZERO,
            s => parse_int(s)?,
        };
        let scale = Integer::from(10u32).pow(frac.len() as u64);
        let frac_part = parse_int(frac)?;
        let signed_frac = if negative { -frac_part } else { frac_part };
        return Some((int_part * &scale + signed_frac, scale));
    }
    Some((parse_int(text)?, Integer::ONE))
}
