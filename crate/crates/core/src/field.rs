//! The exact-field contract and the ordered field of rationals.
//!
//! A [`Field`] value is a context: it owns whatever tables the arithmetic
//! needs and every operation goes through it. Elements are plain values;
//! a context rejects elements that belong to a different context.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync;

    /// 0 or an odd prime.
    fn characteristic(&self) -> u64;
    /// `None` for infinite fields.
    fn cardinality(&self) -> Option<u64>;
    fn is_ordered(&self) -> bool {
        false
    }
    fn contains(&self, x: &Self::Elem) -> bool;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` exactly for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Membership in the image of the square map (so 0 is a square).
    fn is_square(&self, x: &Self::Elem) -> bool;
    /// A canonical square root, or `None` for non-squares.
    fn sqrt(&self, x: &Self::Elem) -> Option<Self::Elem>;

    /// All elements in the fixed enumeration order, starting `0, 1`.
    fn elements(&self) -> Result<Vec<Self::Elem>>;

    fn parse(&self, s: &str) -> Result<Self::Elem>;

    /// A preferred representative of the square class of `x`.
    fn square_class_rep(&self, x: &Self::Elem) -> Self::Elem {
        x.clone()
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn square(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn ensure(&self, x: &Self::Elem) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }
}

/// `|x| = x` for squares (zero included) and `-x` otherwise.
pub fn square_abs<F: Field>(k: &F, x: &F::Elem) -> F::Elem {
    if k.is_square(x) {
        x.clone()
    } else {
        k.neg(x)
    }
}

/// Exact rational number in canonical form (reduced, positive denominator).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Rational(self.0.recip()))
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Non-negative square root when it is rational.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = perfect_sqrt(self.numer())?;
        let d = perfect_sqrt(self.denom())?;
        Some(Rational::from_big(n, d))
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }

    /// Square-free integer in the same square class (zero maps to zero).
    pub fn squarefree_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        // n/d and n*d differ by the square d^2.
        let prod = self.numer() * self.denom();
        let sign = prod.sign();
        let Some(mut m) = prod.abs().to_u128() else {
            return self.clone();
        };
        let mut out: u128 = 1;
        let mut p: u128 = 2;
        while p * p <= m && p <= 1_000_000 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e % 2 == 1 {
                out *= p;
            }
            p += if p == 2 { 1 } else { 2 };
        }
        out *= m;
        let v = BigInt::from(out);
        Rational::from_big(if sign == Sign::Minus { -v } else { v }, BigInt::one())
    }
}

fn perfect_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::parse(s, "expected an integer or a fraction n/d"))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(Error::parse(s, "zero denominator"));
                }
                Ok(Rational::from_big(parse_int(n)?, d))
            }
            None => Ok(Rational::from_big(parse_int(s)?, BigInt::one())),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// The ordered field of rational numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Rational;

    fn characteristic(&self) -> u64 {
        0
    }

    fn cardinality(&self) -> Option<u64> {
        None
    }

    fn is_ordered(&self) -> bool {
        true
    }

    fn contains(&self, _x: &Rational) -> bool {
        true
    }

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn one(&self) -> Rational {
        Rational::one()
    }

    fn from_i64(&self, n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }

    fn neg(&self, a: &Rational) -> Rational {
        -a
    }

    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }

    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }

    fn inv(&self, a: &Rational) -> Option<Rational> {
        a.recip()
    }

    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }

    fn is_square(&self, x: &Rational) -> bool {
        x.is_square()
    }

    fn sqrt(&self, x: &Rational) -> Option<Rational> {
        x.sqrt()
    }

    fn elements(&self) -> Result<Vec<Rational>> {
        Err(Error::InfiniteBase)
    }

    fn parse(&self, s: &str) -> Result<Rational> {
        s.parse()
    }

    fn square_class_rep(&self, x: &Rational) -> Rational {
        x.squarefree_part()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rational_squares() {
        let k = Rationals;
        assert!(k.is_square(&q(4, 9)));
        assert!(!k.is_square(&q(2, 1)));
        assert!(!k.is_square(&q(-4, 9)));
        assert!(k.is_square(&Rational::zero()));
        assert_eq!(k.sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(k.sqrt(&q(2, 1)), None);
        assert_eq!(k.sqrt(&q(8, 18)), Some(q(2, 3)));
    }

    #[test]
    fn canonical_form_is_structural() {
        assert_eq!(q(2, 4), q(-1, -2));
        assert_eq!(q(6, -9).numer(), &BigInt::from(-2));
        assert_eq!(q(6, -9).denom(), &BigInt::from(3));
    }

    #[test]
    fn squarefree_normalization() {
        assert_eq!(q(12, 1).squarefree_part(), q(3, 1));
        assert_eq!(q(-8, 1).squarefree_part(), q(-2, 1));
        assert_eq!(q(1, 2).squarefree_part(), q(2, 1));
        assert_eq!(q(-4, 9).squarefree_part(), q(-1, 1));
        assert_eq!(q(18, 50).squarefree_part(), q(1, 1));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/4".parse::<Rational>().unwrap(), q(3, 4));
        assert_eq!(" -2 ".parse::<Rational>().unwrap(), q(-2, 1));
        assert_eq!("6/-8".parse::<Rational>().unwrap().to_string(), "-3/4");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn square_abs_includes_zero() {
        let k = Rationals;
        assert_eq!(square_abs(&k, &Rational::zero()), Rational::zero());
        assert_eq!(square_abs(&k, &q(4, 1)), q(4, 1));
        assert_eq!(square_abs(&k, &q(-4, 1)), q(4, 1));
        assert_eq!(square_abs(&k, &q(2, 1)), q(-2, 1));
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..30).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn field_axioms(a in small(), b in small(), c in small()) {
            let k = Rationals;
            prop_assert_eq!(k.mul(&k.mul(&a, &b), &c), k.mul(&a, &k.mul(&b, &c)));
            prop_assert_eq!(k.mul(&a, &k.add(&b, &c)), k.add(&k.mul(&a, &b), &k.mul(&a, &c)));
            if let Some(ai) = k.inv(&a) {
                prop_assert_eq!(k.mul(&a, &ai), k.one());
            } else {
                prop_assert!(a.is_zero());
            }
        }

        #[test]
        fn canonical_form_closed(a in small(), b in small()) {
            for r in [&a + &b, &a - &b, &a * &b] {
                prop_assert!(r.denom().is_positive());
                prop_assert!(num_integer::Integer::gcd(r.numer(), r.denom()).is_one());
            }
        }

        #[test]
        fn squares_of_squares(a in small()) {
            let k = Rationals;
            let s = k.square(&a);
            prop_assert!(k.is_square(&s));
            let r = k.sqrt(&s).unwrap();
            prop_assert_eq!(k.square(&r), s);
            prop_assert!(!r.is_negative());
        }

        #[test]
        fn order_is_compatible(a in small(), b in small(), c in small()) {
            if a < b {
                prop_assert!(&a + &c < &b + &c);
                if c.is_positive() {
                    prop_assert!(&a * &c < &b * &c);
                }
            }
        }
    }
}
