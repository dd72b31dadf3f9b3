//! Quadratic extensions `l = k(w)`, `w^2 = t`, with `t` a nonzero non-square.
//!
//! Conjugation is `u + v w -> u - v w`. Over a finite base this is the
//! Frobenius `x -> x^q` of `F_{q^2}`; the two are compared in tests only.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Field;

/// `u + v w`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtElem<E> {
    pub u: E,
    pub v: E,
}

impl<E> ExtElem<E> {
    pub fn new(u: E, v: E) -> Self {
        ExtElem { u, v }
    }
}

impl<E: fmt::Display> fmt::Display for ExtElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = self.u.to_string();
        let v = self.v.to_string();
        let v_term = match v.as_str() {
            "0" => None,
            "1" => Some("w".to_string()),
            "-1" => Some("-w".to_string()),
            _ if v[1..].contains(['+', '-']) => Some(format!("({v})*w")),
            _ => Some(format!("{v}*w")),
        };
        match (u.as_str(), v_term) {
            (_, None) => write!(f, "{u}"),
            ("0", Some(t)) => write!(f, "{t}"),
            (_, Some(t)) if t.starts_with('-') => write!(f, "{u}{t}"),
            (_, Some(t)) => write!(f, "{u}+{t}"),
        }
    }
}

impl<E: fmt::Display> fmt::Debug for ExtElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<E: fmt::Display> Serialize for ExtElem<E> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Debug)]
pub struct QuadExt<F: Field> {
    base: F,
    t: F::Elem,
}

impl<F: Field> PartialEq for QuadExt<F>
where
    F: PartialEq,
{
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.t == other.t
    }
}

impl<F: Field> QuadExt<F> {
    /// Rejects `t = 0` and squares; `t` is replaced by the base field's
    /// preferred square-class representative.
    pub fn new(base: F, t: F::Elem) -> Result<Self> {
        base.ensure(&t)?;
        if base.is_square(&t) {
            return Err(Error::SquareParameter(t.to_string()));
        }
        let t = base.square_class_rep(&t);
        Ok(QuadExt { base, t })
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    /// The parameter `t = w^2`.
    pub fn t(&self) -> &F::Elem {
        &self.t
    }

    pub fn elem(&self, u: F::Elem, v: F::Elem) -> ExtElem<F::Elem> {
        ExtElem { u, v }
    }

    pub fn from_base(&self, u: F::Elem) -> ExtElem<F::Elem> {
        ExtElem {
            u,
            v: self.base.zero(),
        }
    }

    pub fn zero(&self) -> ExtElem<F::Elem> {
        self.from_base(self.base.zero())
    }

    pub fn one(&self) -> ExtElem<F::Elem> {
        self.from_base(self.base.one())
    }

    /// The square root `w` of `t`; spans the purely imaginary line.
    pub fn w(&self) -> ExtElem<F::Elem> {
        ExtElem {
            u: self.base.zero(),
            v: self.base.one(),
        }
    }

    pub fn from_i64(&self, n: i64) -> ExtElem<F::Elem> {
        self.from_base(self.base.from_i64(n))
    }

    pub fn contains(&self, x: &ExtElem<F::Elem>) -> bool {
        self.base.contains(&x.u) && self.base.contains(&x.v)
    }

    pub fn ensure(&self, x: &ExtElem<F::Elem>) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, a: &ExtElem<F::Elem>, b: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        let k = &self.base;
        ExtElem {
            u: k.add(&a.u, &b.u),
            v: k.add(&a.v, &b.v),
        }
    }

    pub fn sub(&self, a: &ExtElem<F::Elem>, b: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        let k = &self.base;
        ExtElem {
            u: k.sub(&a.u, &b.u),
            v: k.sub(&a.v, &b.v),
        }
    }

    pub fn neg(&self, a: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        ExtElem {
            u: self.base.neg(&a.u),
            v: self.base.neg(&a.v),
        }
    }

    pub fn mul(&self, a: &ExtElem<F::Elem>, b: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        let k = &self.base;
        let uu = k.mul(&a.u, &b.u);
        let vv = k.mul(&a.v, &b.v);
        ExtElem {
            u: k.add(&uu, &k.mul(&self.t, &vv)),
            v: k.add(&k.mul(&a.u, &b.v), &k.mul(&a.v, &b.u)),
        }
    }

    /// `s * x` for `s` in the base field.
    pub fn scale(&self, s: &F::Elem, x: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        ExtElem {
            u: self.base.mul(s, &x.u),
            v: self.base.mul(s, &x.v),
        }
    }

    pub fn square(&self, a: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &ExtElem<F::Elem>, mut e: u64) -> ExtElem<F::Elem> {
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

    pub fn conj(&self, a: &ExtElem<F::Elem>) -> ExtElem<F::Elem> {
        ExtElem {
            u: a.u.clone(),
            v: self.base.neg(&a.v),
        }
    }

    /// `x conj(x) = u^2 - t v^2`.
    pub fn norm(&self, a: &ExtElem<F::Elem>) -> F::Elem {
        let k = &self.base;
        k.sub(&k.square(&a.u), &k.mul(&self.t, &k.square(&a.v)))
    }

    /// `x + conj(x) = 2u`.
    pub fn trace(&self, a: &ExtElem<F::Elem>) -> F::Elem {
        self.base.add(&a.u, &a.u)
    }

    pub fn inv(&self, a: &ExtElem<F::Elem>) -> Option<ExtElem<F::Elem>> {
        let ni = self.base.inv(&self.norm(a))?;
        Some(self.scale(&ni, &self.conj(a)))
    }

    pub fn div(&self, a: &ExtElem<F::Elem>, b: &ExtElem<F::Elem>) -> Option<ExtElem<F::Elem>> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    pub fn is_zero(&self, a: &ExtElem<F::Elem>) -> bool {
        self.base.is_zero(&a.u) && self.base.is_zero(&a.v)
    }

    /// Fixed by conjugation.
    pub fn in_base(&self, a: &ExtElem<F::Elem>) -> bool {
        self.base.is_zero(&a.v)
    }

    /// `conj(x) = -x`.
    pub fn is_imaginary(&self, a: &ExtElem<F::Elem>) -> bool {
        self.base.is_zero(&a.u)
    }

    /// `k* ∪ (Im l \ {0})`.
    pub fn in_punctured_axes(&self, a: &ExtElem<F::Elem>) -> bool {
        !self.is_zero(a) && (self.in_base(a) || self.is_imaginary(a))
    }

    /// All `q^2` elements, ordered by `u` then `v`.
    pub fn elements(&self) -> Result<Vec<ExtElem<F::Elem>>> {
        let ks = self.base.elements()?;
        Ok(ks
            .iter()
            .flat_map(|u| {
                ks.iter().map(move |v| ExtElem {
                    u: u.clone(),
                    v: v.clone(),
                })
            })
            .collect())
    }

    pub fn units(&self) -> Result<Vec<ExtElem<F::Elem>>> {
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| !self.is_zero(x))
            .collect())
    }

    /// Kernel of the norm on `l*`.
    pub fn unit_circle(&self) -> Result<Vec<ExtElem<F::Elem>>> {
        let one = self.base.one();
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| self.norm(x) == one)
            .collect())
    }

    pub fn punctured_axes(&self) -> Result<Vec<ExtElem<F::Elem>>> {
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| self.in_punctured_axes(x))
            .collect())
    }

    /// Whether every element of `k*` is a norm from `l*`.
    pub fn norm_surjective(&self) -> Result<bool> {
        let units = self.base.elements()?.len() - 1;
        let image: std::collections::HashSet<F::Elem> =
            self.units()?.iter().map(|x| self.norm(x)).collect();
        Ok(image.len() == units)
    }

    /// Accepts `u`, `v*w`, `u+v*w`, `w`, `-w` and parenthesized
    /// coefficients such as `(x+1)*w`.
    pub fn parse(&self, s: &str) -> Result<ExtElem<F::Elem>> {
        let k = &self.base;
        let mut out = self.zero();
        let terms = split_top_level(s);
        if terms.is_empty() {
            return Err(Error::parse(s, "empty literal"));
        }
        for (neg, term) in terms {
            let (is_w, coef) = match term.strip_suffix('w') {
                Some(c) => (true, c.strip_suffix('*').unwrap_or(c)),
                None => (false, term.as_str()),
            };
            let coef = coef
                .strip_prefix('(')
                .and_then(|c| c.strip_suffix(')'))
                .unwrap_or(coef);
            let mut c = if coef.is_empty() {
                k.one()
            } else {
                k.parse(coef)?
            };
            if neg {
                c = k.neg(&c);
            }
            if is_w {
                out.v = k.add(&out.v, &c);
            } else {
                out.u = k.add(&out.u, &c);
            }
        }
        Ok(out)
    }
}

/// Splits at `+`/`-` outside parentheses. A sign directly after `^`, `/`
/// or `*` stays in its term.
fn split_top_level(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut neg = false;
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        let glued = matches!(cur.chars().last(), Some('^' | '/' | '*' | '('));
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && !glued => {
                if !cur.is_empty() {
                    out.push((neg, std::mem::take(&mut cur)));
                    neg = false;
                }
                if ch == '-' {
                    neg = !neg;
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.is_empty() {
        out.push((neg, cur));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Rationals};
    use crate::finite_field::PrimePowerField;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn fext(q: u64) -> QuadExt<PrimePowerField> {
        let k = PrimePowerField::from_order(q).unwrap();
        let t = k.smallest_nonsquare();
        QuadExt::new(k, t).unwrap()
    }

    fn f7_t3() -> QuadExt<PrimePowerField> {
        let k = PrimePowerField::new(7, 1).unwrap();
        let t = k.from_i64(3);
        QuadExt::new(k, t).unwrap()
    }

    #[test]
    fn construction_rejects_squares() {
        let k = PrimePowerField::new(7, 1).unwrap();
        assert!(matches!(
            QuadExt::new(k.clone(), k.from_i64(2)),
            Err(Error::SquareParameter(_))
        ));
        assert!(QuadExt::new(k.clone(), k.zero()).is_err());
        assert!(QuadExt::new(Rationals, Rational::from(4)).is_err());
        let l = QuadExt::new(Rationals, Rational::from(12)).unwrap();
        assert_eq!(l.t(), &Rational::from(3));
        let l = QuadExt::new(Rationals, Rational::new(-1, 4)).unwrap();
        assert_eq!(l.t(), &Rational::from(-1));
    }

    #[test]
    fn conjugation_and_norm_examples() {
        let l = f7_t3();
        let k = l.base();
        assert_eq!(l.conj(&l.one()), l.one());
        assert_eq!(l.conj(&l.w()), l.elem(k.zero(), k.from_i64(-1)));
        let x = l.elem(k.one(), k.one());
        assert_eq!(l.norm(&x), k.from_i64(5));
        assert_eq!(l.norm(&l.from_i64(3)), k.from_i64(9));
        assert_eq!(l.trace(&x), k.from_i64(2));
        assert!(l.norm_surjective().unwrap());
    }

    #[test]
    fn infinite_base_has_no_enumeration() {
        let l = QuadExt::new(Rationals, Rational::from(-1)).unwrap();
        assert_eq!(l.unit_circle().unwrap_err(), Error::InfiniteBase);
        assert_eq!(l.punctured_axes().unwrap_err(), Error::InfiniteBase);
        assert_eq!(l.norm_surjective().unwrap_err(), Error::InfiniteBase);
    }

    #[test]
    fn circle_and_axes_cardinalities() {
        let k3 = PrimePowerField::new(3, 1).unwrap();
        let l = QuadExt::new(k3.clone(), k3.from_i64(2)).unwrap();
        assert_eq!(l.unit_circle().unwrap().len(), 4);
        assert_eq!(l.punctured_axes().unwrap().len(), 4);
        assert_eq!(f7_t3().unit_circle().unwrap().len(), 8);
        for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
            let l = fext(q);
            let s = l.unit_circle().unwrap();
            assert_eq!(s.len() as u64, q + 1);
            assert!(s.contains(&l.one()) && s.contains(&l.from_i64(-1)));
            assert_eq!(l.punctured_axes().unwrap().len() as u64, 2 * (q - 1));
            assert!(!l.in_punctured_axes(&l.add(&l.one(), &l.w())));
            assert!(l.norm_surjective().unwrap());
        }
    }

    #[test]
    fn conjugation_is_frobenius() {
        for q in [3u64, 5, 9, 25, 27] {
            let l = fext(q);
            for x in l.elements().unwrap() {
                assert_eq!(l.pow(&x, q), l.conj(&x), "q={q} x={x}");
            }
        }
    }

    #[test]
    fn axes_are_the_square_roots_of_base_units() {
        let k = PrimePowerField::new(5, 1).unwrap();
        let l = QuadExt::new(k.clone(), k.from_i64(2)).unwrap();
        for x in l.elements().unwrap() {
            let sq = l.square(&x);
            let in_k_star = l.in_base(&sq) && !l.is_zero(&sq);
            assert_eq!(l.in_punctured_axes(&x), in_k_star, "x={x}");
        }
    }

    #[test]
    fn norm_image_is_represented_by_the_binary_form() {
        for q in [3u64, 5, 7, 9] {
            let l = fext(q);
            let k = l.base();
            let tp = k.neg(l.t());
            let els = k.elements().unwrap();
            let mut form_values = HashSet::new();
            for x in &els {
                for y in &els {
                    if !(k.is_zero(x) && k.is_zero(y)) {
                        form_values.insert(k.add(&k.square(x), &k.mul(&tp, &k.square(y))));
                    }
                }
            }
            let norms: HashSet<_> = l.units().unwrap().iter().map(|x| l.norm(x)).collect();
            assert_eq!(norms, form_values);
        }
    }

    #[test]
    fn decomposition_into_base_and_imaginary_line() {
        let l = fext(9);
        let k = l.base();
        let imag: Vec<_> = l
            .elements()
            .unwrap()
            .into_iter()
            .filter(|x| l.conj(x) == l.neg(x))
            .collect();
        assert_eq!(imag.len(), 9);
        assert!(imag.iter().all(|x| l.is_imaginary(x)));
        for x in l.elements().unwrap() {
            let tr = l.trace(&x);
            assert_eq!(l.add(&x, &l.conj(&x)), l.from_base(tr));
            let re = l.from_base(x.u);
            let im = l.elem(k.zero(), x.v);
            assert_eq!(l.add(&re, &im), x);
        }
    }

    #[test]
    fn exhaustive_norm_multiplicativity_f9() {
        let l = fext(9);
        let els = l.elements().unwrap();
        let k = l.base();
        for a in &els {
            for b in &els {
                assert_eq!(l.norm(&l.mul(a, b)), k.mul(&l.norm(a), &l.norm(b)));
            }
        }
    }

    #[test]
    fn parse_display() {
        let l = fext(9);
        for x in l.elements().unwrap() {
            assert_eq!(l.parse(&x.to_string()).unwrap(), x, "{x}");
        }
        let r = QuadExt::new(Rationals, Rational::from(-1)).unwrap();
        let x = r.elem(Rational::new(1, 2), Rational::new(-3, 4));
        assert_eq!(x.to_string(), "1/2-3/4*w");
        assert_eq!(r.parse("1/2-3/4*w").unwrap(), x);
        assert_eq!(r.parse("-w").unwrap(), r.neg(&r.w()));
        assert_eq!(r.parse("2 + w - 1").unwrap(), r.add(&r.one(), &r.w()));
    }

    fn f49() -> impl Strategy<Value = (u64, u64)> {
        (0u64..49, 0u64..49)
    }

    proptest! {
        #[test]
        fn conj_is_an_involutive_automorphism((a0, a1) in f49(), (b0, b1) in f49()) {
            let l = fext(49);
            let k = l.base();
            let a = l.elem(k.element(a0).unwrap(), k.element(a1).unwrap());
            let b = l.elem(k.element(b0).unwrap(), k.element(b1).unwrap());
            prop_assert_eq!(l.conj(&l.conj(&a)), a.clone());
            prop_assert_eq!(l.conj(&l.mul(&a, &b)), l.mul(&l.conj(&a), &l.conj(&b)));
            prop_assert_eq!(l.conj(&l.add(&a, &b)), l.add(&l.conj(&a), &l.conj(&b)));
            prop_assert_eq!(l.norm(&l.mul(&a, &b)), k.mul(&l.norm(&a), &l.norm(&b)));
            if let Some(ai) = l.inv(&a) {
                prop_assert_eq!(l.mul(&a, &ai), l.one());
            } else {
                prop_assert!(l.is_zero(&a));
            }
        }

        #[test]
        fn rational_extension_arithmetic(
            a in (-20i64..20, 1i64..9, -20i64..20, 1i64..9),
            b in (-20i64..20, 1i64..9, -20i64..20, 1i64..9),
            t in prop::sample::select(vec![-1i64, 2, -3, 5, 6]),
        ) {
            let l = QuadExt::new(Rationals, Rational::from(t)).unwrap();
            let x = l.elem(Rational::new(a.0, a.1), Rational::new(a.2, a.3));
            let y = l.elem(Rational::new(b.0, b.1), Rational::new(b.2, b.3));
            prop_assert_eq!(l.norm(&l.mul(&x, &y)), l.norm(&x) * l.norm(&y));
            prop_assert_eq!(l.conj(&l.mul(&x, &y)), l.mul(&l.conj(&x), &l.conj(&y)));
            if !l.is_zero(&x) {
                prop_assert_eq!(l.mul(&x, &l.inv(&x).unwrap()), l.one());
            }
        }
    }
}
