//! Finite fields `F_q`, `q = p^n` odd.
//!
//! Elements are coefficient vectors over `F_p` modulo a fixed monic
//! irreducible polynomial. The enumeration index of an element is
//! `c_0 + c_1 p + ... + c_{n-1} p^{n-1}`, so the order starts `0, 1, ..., p-1`
//! and continues with `x, x+1, ...`. Multiplication runs through
//! discrete-log tables built once per field.
//!
//! The modulus is the first monic irreducible polynomial of degree `n` when
//! the lower coefficients `(c_0, ..., c_{n-1})` are read as a base-`p`
//! number; for `n = 1` it is `x` itself.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Field;

pub const DEFAULT_SIZE_BOUND: u64 = 4096;

/// Element of a [`PrimePowerField`].
///
/// `id` encodes `(p, n)`, which determines the field because the modulus is
/// chosen deterministically. Ordering within one field follows the
/// enumeration index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fq {
    id: u32,
    idx: u32,
}

impl Fq {
    /// Position in the field's enumeration order.
    pub fn index(self) -> u32 {
        self.idx
    }

    pub fn characteristic(self) -> u32 {
        self.id >> 8
    }

    pub fn degree(self) -> u32 {
        self.id & 0xff
    }

    /// Coefficients `c_0, ..., c_{n-1}` over the prime field.
    pub fn coefficients(self) -> Vec<u32> {
        let p = self.characteristic();
        let mut v = self.idx;
        (0..self.degree())
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 1 || self.idx < self.characteristic() {
            return write!(f, "{}", self.idx);
        }
        let mut terms = Vec::new();
        for (j, c) in self.coefficients().into_iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && j > 0 { String::new() } else { c.to_string() };
            terms.push(match j {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{j}"),
            });
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Fq {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.degree() == 1 {
            serializer.serialize_u32(self.idx)
        } else {
            serializer.collect_str(self)
        }
    }
}

#[derive(Debug)]
struct Tables {
    p: u32,
    n: u32,
    q: u32,
    id: u32,
    /// Monic, coefficients low to high, length `n + 1`.
    modulus: Vec<u32>,
    generator: u32,
    /// `exp[k] = g^k` for `k < 2(q-1)`, so log sums need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The finite field `F_{p^n}`.
#[derive(Clone)]
pub struct PrimePowerField {
    t: Arc<Tables>,
}

impl fmt::Debug for PrimePowerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.t.q)?;
        if self.t.n > 1 {
            write!(f, " (modulus {:?})", self.t.modulus)?;
        }
        Ok(())
    }
}

impl PartialEq for PrimePowerField {
    fn eq(&self, other: &Self) -> bool {
        self.t.id == other.t.id
    }
}

impl Eq for PrimePowerField {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl PrimePowerField {
    /// `F_{p^n}` with the default size bound `q <= 4096`.
    pub fn new(p: u64, n: u32) -> Result<Self> {
        Self::with_bound(p, n, DEFAULT_SIZE_BOUND)
    }

    pub fn with_bound(p: u64, n: u32, bound: u64) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if n == 0 {
            return Err(Error::NotOddPrimePower(1));
        }
        let order = u128::from(p).pow(n);
        if order > u128::from(bound) || order > u128::from(u32::MAX >> 8) {
            return Err(Error::SizeBoundExceeded { order, bound });
        }
        let (p32, q) = (p as u32, order as u32);
        let modulus = if n == 1 {
            vec![0, 1]
        } else {
            first_irreducible(p32, n as usize)
        };
        let mulmod = |a: u32, b: u32| -> u32 {
            if n == 1 {
                ((u64::from(a) * u64::from(b)) % p) as u32
            } else {
                encode(&poly_mulmod(&decode(a, p32, n), &decode(b, p32, n), &modulus, p32), p32)
            }
        };

        let order_factors = prime_factors(u64::from(q - 1));
        let generator = (1..q)
            .find(|&g| {
                // g has full order iff g^((q-1)/r) != 1 for every prime r | q-1.
                order_factors.iter().all(|&r| {
                    let mut acc = 1u32;
                    let mut base = g;
                    let mut e = u64::from(q - 1) / r;
                    while e > 0 {
                        if e & 1 == 1 {
                            acc = mulmod(acc, base);
                        }
                        base = mulmod(base, base);
                        e >>= 1;
                    }
                    acc != 1
                })
            })
            .expect("multiplicative group of a finite field is cyclic");

        let cyc = (q - 1) as usize;
        let mut exp = Vec::with_capacity(2 * cyc);
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for k in 0..cyc {
            exp.push(cur);
            log[cur as usize] = k as u32;
            cur = mulmod(cur, generator);
        }
        assert_eq!(cur, 1, "generator order mismatch");
        exp.extend_from_within(..cyc);

        Ok(PrimePowerField {
            t: Arc::new(Tables {
                p: p32,
                n,
                q,
                id: (p32 << 8) | n,
                modulus,
                generator,
                exp,
                log,
            }),
        })
    }

    /// `F_q` from its order.
    pub fn from_order(q: u64) -> Result<Self> {
        Self::from_order_with_bound(q, DEFAULT_SIZE_BOUND)
    }

    pub fn from_order_with_bound(q: u64, bound: u64) -> Result<Self> {
        let factors = prime_factors(q);
        if factors.len() != 1 || factors[0] == 2 {
            return Err(Error::NotOddPrimePower(q));
        }
        let p = factors[0];
        let mut n = 0;
        let mut m = q;
        while m > 1 {
            m /= p;
            n += 1;
        }
        Self::with_bound(p, n, bound)
    }

    pub fn p(&self) -> u64 {
        u64::from(self.t.p)
    }

    pub fn n(&self) -> u32 {
        self.t.n
    }

    pub fn q(&self) -> u64 {
        u64::from(self.t.q)
    }

    /// Monic modulus, coefficients from the constant term up.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    /// A primitive element (generator of the multiplicative group).
    pub fn generator(&self) -> Fq {
        self.elem(self.t.generator)
    }

    /// The element at enumeration index `idx`.
    pub fn element(&self, idx: u64) -> Option<Fq> {
        (idx < self.q()).then(|| self.elem(idx as u32))
    }

    fn elem(&self, idx: u32) -> Fq {
        Fq { id: self.t.id, idx }
    }

    #[inline]
    fn check(&self, a: Fq) {
        assert!(
            a.id == self.t.id && a.idx < self.t.q,
            "element {a} does not belong to F_{}",
            self.t.q
        );
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, x: &Fq) -> Fq {
        self.pow(x, self.p())
    }

    /// Least nonzero non-square in enumeration order.
    pub fn smallest_nonsquare(&self) -> Fq {
        (1..self.t.q)
            .map(|i| self.elem(i))
            .find(|x| !self.is_square(x))
            .expect("odd finite fields have (q-1)/2 non-squares")
    }

    /// Enumeration index of `x` read as an integer modulo `p`, when `x` lies
    /// in the prime field.
    pub fn as_prime_field(&self, x: &Fq) -> Option<u64> {
        self.check(*x);
        (x.idx < self.t.p).then_some(u64::from(x.idx))
    }
}

impl Field for PrimePowerField {
    type Elem = Fq;

    fn characteristic(&self) -> u64 {
        self.p()
    }

    fn cardinality(&self) -> Option<u64> {
        Some(self.q())
    }

    fn contains(&self, x: &Fq) -> bool {
        x.id == self.t.id && x.idx < self.t.q
    }

    fn zero(&self) -> Fq {
        self.elem(0)
    }

    fn one(&self) -> Fq {
        self.elem(1)
    }

    fn from_i64(&self, n: i64) -> Fq {
        self.elem(n.rem_euclid(i64::from(self.t.p)) as u32)
    }

    #[inline]
    fn add(&self, a: &Fq, b: &Fq) -> Fq {
        self.check(*a);
        self.check(*b);
        let p = self.t.p;
        if self.t.n == 1 {
            let s = a.idx + b.idx;
            return self.elem(if s >= p { s - p } else { s });
        }
        let (mut x, mut y, mut out, mut place) = (a.idx, b.idx, 0, 1);
        for _ in 0..self.t.n {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        self.elem(out)
    }

    #[inline]
    fn neg(&self, a: &Fq) -> Fq {
        self.check(*a);
        let p = self.t.p;
        if self.t.n == 1 {
            return self.elem(if a.idx == 0 { 0 } else { p - a.idx });
        }
        let (mut x, mut out, mut place) = (a.idx, 0, 1);
        for _ in 0..self.t.n {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        self.elem(out)
    }

    #[inline]
    fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        self.check(*a);
        self.check(*b);
        if a.idx == 0 || b.idx == 0 {
            return self.zero();
        }
        let t = &self.t;
        self.elem(t.exp[(t.log[a.idx as usize] + t.log[b.idx as usize]) as usize])
    }

    fn inv(&self, a: &Fq) -> Option<Fq> {
        self.check(*a);
        if a.idx == 0 {
            return None;
        }
        let t = &self.t;
        let cyc = t.q - 1;
        Some(self.elem(t.exp[((cyc - t.log[a.idx as usize]) % cyc) as usize]))
    }

    /// Euler's criterion: `x^((q-1)/2)` is 0 or 1.
    fn is_square(&self, x: &Fq) -> bool {
        let e = self.pow(x, (self.q() - 1) / 2);
        e.idx <= 1
    }

    /// The root that comes first in enumeration order.
    fn sqrt(&self, x: &Fq) -> Option<Fq> {
        self.check(*x);
        if x.idx == 0 {
            return Some(self.zero());
        }
        let l = self.t.log[x.idx as usize];
        if l % 2 == 1 {
            return None;
        }
        let r = self.elem(self.t.exp[(l / 2) as usize]);
        Some(r.min(self.neg(&r)))
    }

    fn elements(&self) -> Result<Vec<Fq>> {
        Ok((0..self.t.q).map(|i| self.elem(i)).collect())
    }

    /// Integers (reduced mod `p`) or polynomials in `x` such as `2x^2+x+1`.
    fn parse(&self, s: &str) -> Result<Fq> {
        let src = s.trim();
        if src.is_empty() {
            return Err(Error::parse(s, "empty literal"));
        }
        if let Ok(v) = src.parse::<i64>() {
            return Ok(self.from_i64(v));
        }
        let p = i64::from(self.t.p);
        let mut coeffs = vec![0i64; self.t.n as usize];
        for (sign, term) in split_signed_terms(src) {
            let (coef, power) = match term.split_once('x') {
                None => (term.as_str(), 0usize),
                Some((c, rest)) => {
                    let power = match rest.strip_prefix('^') {
                        Some(e) => e
                            .parse::<usize>()
                            .map_err(|_| Error::parse(s, "bad exponent"))?,
                        None if rest.is_empty() => 1,
                        None => return Err(Error::parse(s, "unexpected text after x")),
                    };
                    (c.trim_end_matches('*'), power)
                }
            };
            let c = if coef.is_empty() {
                1
            } else {
                coef.parse::<i64>()
                    .map_err(|_| Error::parse(s, "bad coefficient"))?
            };
            if power >= coeffs.len() {
                return Err(Error::parse(s, "degree must stay below the field degree"));
            }
            coeffs[power] += sign * c;
        }
        let mut idx = 0i64;
        for c in coeffs.iter().rev() {
            idx = idx * p + c.rem_euclid(p);
        }
        Ok(self.elem(idx as u32))
    }
}

/// Splits `a+b-c` into signed terms; leading sign allowed.
pub(crate) fn split_signed_terms(s: &str) -> Vec<(i64, String)> {
    let mut out = Vec::new();
    let mut sign = 1;
    let mut cur = String::new();
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        if (ch == '+' || ch == '-') && !cur.is_empty() {
            out.push((sign, std::mem::take(&mut cur)));
            sign = if ch == '-' { -1 } else { 1 };
        } else if ch == '-' {
            sign = -sign;
        } else if ch != '+' {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push((sign, cur));
    }
    out
}

fn decode(idx: u32, p: u32, n: u32) -> Vec<u32> {
    let mut v = idx;
    (0..n)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn encode(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

// Dense polynomials over F_p, coefficients low to high.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = u64::from(a);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % u64::from(p);
        }
        base = base * base % u64::from(p);
        e >>= 1;
    }
    acc as u32
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = trim(m.to_vec());
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let f = (u64::from(*r.last().unwrap()) * u64::from(lead_inv) % u64::from(p)) as u32;
        for (i, &mc) in m.iter().enumerate() {
            let sub = (u64::from(f) * u64::from(mc) % u64::from(p)) as u32;
            r[i + shift] = (r[i + shift] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + u64::from(x) * u64::from(y)) % u64::from(p);
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_rem(&poly_mul(a, b, p), m, p);
    r.resize(m.len() - 1, 0);
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^(p^k) mod m`.
fn x_pow_p_pow(k: u32, m: &[u32], p: u32) -> Vec<u32> {
    let mut x = vec![0, 1];
    x.resize(m.len() - 1, 0);
    let mut cur = poly_rem(&x, m, p);
    for _ in 0..k {
        // cur <- cur^p
        let mut acc = vec![1u32];
        let mut base = cur.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_rem(&poly_mul(&acc, &base, p), m, p);
            }
            base = poly_rem(&poly_mul(&base, &base, p), m, p);
            e >>= 1;
        }
        cur = acc;
    }
    trim(cur)
}

fn has_root(m: &[u32], p: u32) -> bool {
    (0..p).any(|x| {
        m.iter()
            .rev()
            .fold(0u64, |acc, &c| (acc * u64::from(x) + u64::from(c)) % u64::from(p))
            == 0
    })
}

/// Rabin's test: `x^(p^n) = x mod m` and `gcd(x^(p^(n/r)) - x, m) = 1` for
/// every prime `r | n`.
pub(crate) fn rabin_irreducible(m: &[u32], p: u32) -> bool {
    let n = (m.len() - 1) as u32;
    if n == 1 {
        return true;
    }
    let sub_x = |f: Vec<u32>| {
        let mut f = f;
        f.resize(f.len().max(2), 0);
        f[1] = (f[1] + p - 1) % p;
        trim(f)
    };
    if !sub_x(x_pow_p_pow(n, m, p)).is_empty() {
        return false;
    }
    prime_factors(u64::from(n)).into_iter().all(|r| {
        let g = poly_gcd(m, &sub_x(x_pow_p_pow(n / r as u32, m, p)), p);
        g.len() == 1
    })
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    if m.len() == 3 {
        !has_root(m, p)
    } else {
        rabin_irreducible(m, p)
    }
}

fn first_irreducible(p: u32, n: usize) -> Vec<u32> {
    let count = u64::from(p).pow(n as u32);
    (0..count)
        .map(|k| {
            let mut m = decode(k as u32, p, n as u32);
            m.push(1);
            m
        })
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}
