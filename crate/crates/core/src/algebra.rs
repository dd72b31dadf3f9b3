//! The 4-dimensional algebras `A(l, c)` on `l^2`.
//!
//! Multiplication of columns `(x, y)` and `(w, z)`:
//!
//! ```text
//! (x, y)(w, z) = (x w + (c2 y + c3 conj(y)) z,  y w + ((1 - c1) x + c1 conj(x)) z)
//! ```
//!
//! The fixed `k`-basis is `e0 = (1, 0)`, `e1 = (w, 0)`, `e2 = (0, 1)`,
//! `e3 = (0, w)`, i.e. `{1, u, j, ju}` with `u = (w, 0)` and `j = (0, 1)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::{square_abs, Field, Rational, Rationals};
use crate::linalg::{self, Matrix};
use crate::quad_ext::{ExtElem, QuadExt};

/// Structure parameters `(c1, c2, c3)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple<E> {
    pub c1: E,
    pub c2: E,
    pub c3: E,
}

impl<E> Triple<E> {
    pub fn new(c1: E, c2: E, c3: E) -> Self {
        Triple { c1, c2, c3 }
    }
}

impl<E: fmt::Display> fmt::Display for Triple<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.c1, self.c2, self.c3)
    }
}

impl<E: fmt::Display> fmt::Debug for Triple<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<E: Serialize> Serialize for Triple<E> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(3)?;
        t.serialize_element(&self.c1)?;
        t.serialize_element(&self.c2)?;
        t.serialize_element(&self.c3)?;
        t.end()
    }
}

/// Parses `c1,c2,c3`, optionally wrapped in parentheses.
pub fn parse_triple<F: Field>(k: &F, s: &str) -> Result<Triple<F::Elem>> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::parse(s, "expected three comma-separated entries"));
    }
    Ok(Triple::new(
        k.parse(parts[0])?,
        k.parse(parts[1])?,
        k.parse(parts[2])?,
    ))
}

/// The column `(x, y)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlgElem<E> {
    pub x: ExtElem<E>,
    pub y: ExtElem<E>,
}

impl<E: fmt::Display> fmt::Display for AlgElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", self.x, self.y)
    }
}

impl<E: fmt::Display> fmt::Debug for AlgElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<E: fmt::Display> Serialize for AlgElem<E> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TripleType {
    N,
    S,
    K,
}

impl fmt::Display for TripleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TripleType::N => "N",
            TripleType::S => "S",
            TripleType::K => "K",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Certified,
    Unknown,
}

/// Joint eigenspaces `A_ij = E_alpha((-1)^i) ∩ E_beta((-1)^j)` as row bases
/// of coordinate vectors.
#[derive(Debug, Clone)]
pub struct VGrading<E> {
    pub components: [[Vec<Vec<E>>; 2]; 2],
}

impl<E> VGrading<E> {
    pub fn component(&self, i: usize, j: usize) -> &[Vec<E>] {
        &self.components[i][j]
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraSpec<F: Field> {
    ext: QuadExt<F>,
    c: Triple<F::Elem>,
}

type Elem<F> = AlgElem<<F as Field>::Elem>;

impl<F: Field> AlgebraSpec<F> {
    pub fn new(ext: QuadExt<F>, c: Triple<F::Elem>) -> Result<Self> {
        let k = ext.base();
        k.ensure(&c.c1)?;
        k.ensure(&c.c2)?;
        k.ensure(&c.c3)?;
        Ok(AlgebraSpec { ext, c })
    }

    pub fn ext(&self) -> &QuadExt<F> {
        &self.ext
    }

    pub fn base(&self) -> &F {
        self.ext.base()
    }

    pub fn triple(&self) -> &Triple<F::Elem> {
        &self.c
    }

    pub fn elem(&self, x: ExtElem<F::Elem>, y: ExtElem<F::Elem>) -> Elem<F> {
        AlgElem { x, y }
    }

    pub fn zero(&self) -> Elem<F> {
        self.elem(self.ext.zero(), self.ext.zero())
    }

    pub fn one(&self) -> Elem<F> {
        self.elem(self.ext.one(), self.ext.zero())
    }

    /// `j = (0, 1)`.
    pub fn j(&self) -> Elem<F> {
        self.elem(self.ext.zero(), self.ext.one())
    }

    /// `u = (w, 0)`, a nonzero imaginary element of `1_A l`.
    pub fn u(&self) -> Elem<F> {
        self.elem(self.ext.w(), self.ext.zero())
    }

    pub fn contains(&self, a: &Elem<F>) -> bool {
        self.ext.contains(&a.x) && self.ext.contains(&a.y)
    }

    pub fn add(&self, a: &Elem<F>, b: &Elem<F>) -> Elem<F> {
        self.elem(self.ext.add(&a.x, &b.x), self.ext.add(&a.y, &b.y))
    }

    pub fn sub(&self, a: &Elem<F>, b: &Elem<F>) -> Elem<F> {
        self.elem(self.ext.sub(&a.x, &b.x), self.ext.sub(&a.y, &b.y))
    }

    pub fn neg(&self, a: &Elem<F>) -> Elem<F> {
        self.elem(self.ext.neg(&a.x), self.ext.neg(&a.y))
    }

    pub fn scale(&self, s: &F::Elem, a: &Elem<F>) -> Elem<F> {
        self.elem(self.ext.scale(s, &a.x), self.ext.scale(s, &a.y))
    }

    /// Right `l`-vector-space action `(x, y) s = (x s, y s)`.
    pub fn right_scalar(&self, a: &Elem<F>, s: &ExtElem<F::Elem>) -> Elem<F> {
        self.elem(self.ext.mul(&a.x, s), self.ext.mul(&a.y, s))
    }

    pub fn is_zero(&self, a: &Elem<F>) -> bool {
        self.ext.is_zero(&a.x) && self.ext.is_zero(&a.y)
    }

    pub fn mul(&self, a: &Elem<F>, b: &Elem<F>) -> Elem<F> {
        let l = &self.ext;
        let k = l.base();
        let (x, y, w, z) = (&a.x, &a.y, &b.x, &b.y);
        let top = l.add(
            &l.scale(&self.c.c2, y),
            &l.scale(&self.c.c3, &l.conj(y)),
        );
        let bottom = l.add(
            &l.scale(&k.sub(&k.one(), &self.c.c1), x),
            &l.scale(&self.c.c1, &l.conj(x)),
        );
        self.elem(
            l.add(&l.mul(x, w), &l.mul(&top, z)),
            l.add(&l.mul(y, w), &l.mul(&bottom, z)),
        )
    }

    /// [`Self::mul`] after checking both operands belong to this algebra.
    pub fn checked_mul(&self, a: &Elem<F>, b: &Elem<F>) -> Result<Elem<F>> {
        if self.contains(a) && self.contains(b) {
            Ok(self.mul(a, b))
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// `(1 - c1) x^2 + c1 x conj(x) - c2 y^2 - c3 y conj(y)`.
    pub fn q_c(&self, a: &Elem<F>) -> ExtElem<F::Elem> {
        let l = &self.ext;
        let k = l.base();
        let (x, y) = (&a.x, &a.y);
        let t1 = l.scale(&k.sub(&k.one(), &self.c.c1), &l.square(x));
        let t2 = l.scale(&self.c.c1, &l.mul(x, &l.conj(x)));
        let t3 = l.scale(&self.c.c2, &l.square(y));
        let t4 = l.scale(&self.c.c3, &l.mul(y, &l.conj(y)));
        l.sub(&l.add(&t1, &t2), &l.add(&t3, &t4))
    }

    /// Matrix of `L_a` over `l` with respect to `(1_A, j)`:
    /// `[[x, c2 y + c3 conj(y)], [y, (1 - c1) x + c1 conj(x)]]`.
    pub fn left_l_matrix(&self, a: &Elem<F>) -> [[ExtElem<F::Elem>; 2]; 2] {
        let col0 = self.mul(a, &self.one());
        let col1 = self.mul(a, &self.j());
        [[col0.x, col1.x], [col0.y, col1.y]]
    }

    /// Determinant over `l` of [`Self::left_l_matrix`].
    pub fn left_l_det(&self, a: &Elem<F>) -> ExtElem<F::Elem> {
        let l = &self.ext;
        let [[p, r], [s, t]] = self.left_l_matrix(a);
        l.sub(&l.mul(&p, &t), &l.mul(&r, &s))
    }

    pub fn basis(&self) -> [Elem<F>; 4] {
        let l = &self.ext;
        [
            self.elem(l.one(), l.zero()),
            self.elem(l.w(), l.zero()),
            self.elem(l.zero(), l.one()),
            self.elem(l.zero(), l.w()),
        ]
    }

    pub fn coords(&self, a: &Elem<F>) -> Vec<F::Elem> {
        vec![a.x.u.clone(), a.x.v.clone(), a.y.u.clone(), a.y.v.clone()]
    }

    pub fn from_coords(&self, v: &[F::Elem]) -> Elem<F> {
        let l = &self.ext;
        self.elem(
            l.elem(v[0].clone(), v[1].clone()),
            l.elem(v[2].clone(), v[3].clone()),
        )
    }

    /// `k`-matrix (columns are images of the basis) of a `k`-linear map.
    pub fn operator_matrix(&self, f: impl Fn(&Elem<F>) -> Elem<F>) -> Matrix<F::Elem> {
        let cols: Vec<Vec<F::Elem>> = self.basis().iter().map(|e| self.coords(&f(e))).collect();
        (0..4)
            .map(|r| (0..4).map(|c| cols[c][r].clone()).collect())
            .collect()
    }

    pub fn left_matrix(&self, a: &Elem<F>) -> Matrix<F::Elem> {
        self.operator_matrix(|b| self.mul(a, b))
    }

    pub fn right_matrix(&self, a: &Elem<F>) -> Matrix<F::Elem> {
        self.operator_matrix(|b| self.mul(b, a))
    }

    /// `S` iff `(c1, c2) = (1, 0)`, `K` iff `(c1, c3) = (0, 0)`, else `N`.
    /// Pattern only; meaningful for admissible triples.
    pub fn triple_type(&self) -> TripleType {
        let k = self.base();
        let c = &self.c;
        if c.c1 == k.one() && k.is_zero(&c.c2) {
            TripleType::S
        } else if k.is_zero(&c.c1) && k.is_zero(&c.c3) {
            TripleType::K
        } else {
            TripleType::N
        }
    }

    /// Exhaustive anisotropy scan of `q_c` over `l^2 \ {0}`.
    pub fn is_admissible_bruteforce(&self, budget: &Budget) -> Result<bool> {
        let q = self.base().cardinality().ok_or(Error::InfiniteBase)?;
        budget.check_algebra(q)?;
        let ls = self.ext.elements()?;
        let isotropic = ls.par_iter().any(|x| {
            ls.iter().any(|y| {
                let a = self.elem(x.clone(), y.clone());
                !self.is_zero(&a) && self.ext.is_zero(&self.q_c(&a))
            })
        });
        Ok(!isotropic)
    }

    /// `(1 - c1) c2 != 0`, `1 - 2 c1` a non-square and
    /// `c3 = -c1 |c2| / |1 - c1|`.
    pub fn is_admissible_closed_form_fq(&self) -> Result<bool> {
        let k = self.base();
        if k.cardinality().is_none() {
            return Err(Error::InfiniteBase);
        }
        let c = &self.c;
        let one_minus = k.sub(&k.one(), &c.c1);
        if k.is_zero(&one_minus) || k.is_zero(&c.c2) {
            return Ok(false);
        }
        let disc = k.sub(&k.one(), &k.add(&c.c1, &c.c1));
        if k.is_square(&disc) {
            return Ok(false);
        }
        let num = k.neg(&k.mul(&c.c1, &square_abs(k, &c.c2)));
        let expected = k
            .div(&num, &square_abs(k, &one_minus))
            .expect("|1 - c1| is nonzero");
        Ok(c.c3 == expected)
    }

    /// Type with admissibility established by exhaustive scan.
    pub fn checked_triple_type(&self, budget: &Budget) -> Result<TripleType> {
        if self.is_admissible_bruteforce(budget)? {
            Ok(self.triple_type())
        } else {
            Err(Error::InadmissibleTriple)
        }
    }

    /// Basis (coordinate rows) of `{z : (e_i e_j) z = e_i (e_j z)}`.
    pub fn right_nucleus(&self) -> Vec<Vec<F::Elem>> {
        let k = self.base();
        let basis = self.basis();
        let mut rows: Matrix<F::Elem> = Vec::with_capacity(64);
        for ei in &basis {
            let li = self.left_matrix(ei);
            for ej in &basis {
                let lij = self.left_matrix(&self.mul(ei, ej));
                let lj = self.left_matrix(ej);
                for r in 0..4 {
                    rows.push(
                        (0..4)
                            .map(|c| {
                                let comp = (0..4).fold(k.zero(), |acc, m| {
                                    k.add(&acc, &k.mul(&li[r][m], &lj[m][c]))
                                });
                                k.sub(&lij[r][c], &comp)
                            })
                            .collect(),
                    );
                }
            }
        }
        linalg::kernel(k, &rows, 4)
    }

    pub fn is_associative(&self) -> bool {
        let b = self.basis();
        b.iter().all(|x| {
            b.iter().all(|y| {
                b.iter().all(|z| {
                    self.mul(&self.mul(x, y), z) == self.mul(x, &self.mul(y, z))
                })
            })
        })
    }

    pub fn is_commutative(&self) -> bool {
        let b = self.basis();
        b.iter()
            .all(|x| b.iter().all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// `(x, y) -> (x, -y)`.
    pub fn alpha(&self, a: &Elem<F>) -> Elem<F> {
        self.elem(a.x.clone(), self.ext.neg(&a.y))
    }

    /// `(x, y) -> (conj(x), conj(y))`.
    pub fn beta(&self, a: &Elem<F>) -> Elem<F> {
        self.elem(self.ext.conj(&a.x), self.ext.conj(&a.y))
    }

    /// `E_f(eps)` for a `k`-linear operator `f`, as a row basis.
    pub fn eigenspace(&self, op: &Matrix<F::Elem>, eps: &F::Elem) -> Vec<Vec<F::Elem>> {
        let k = self.base();
        let shifted: Matrix<F::Elem> = (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| {
                        if r == c {
                            k.sub(&op[r][c], eps)
                        } else {
                            op[r][c].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        linalg::kernel(k, &shifted, 4)
    }

    /// Grading by the ordered Kleinian pair `(f, g)`.
    pub fn v_grading_for(&self, f: &Matrix<F::Elem>, g: &Matrix<F::Elem>) -> VGrading<F::Elem> {
        let k = self.base();
        let sign = |i: usize| if i == 0 { k.one() } else { k.neg(&k.one()) };
        let comp = |i: usize, j: usize| {
            let ef = self.eigenspace(f, &sign(i));
            let eg = self.eigenspace(g, &sign(j));
            intersect(k, &ef, &eg)
        };
        VGrading {
            components: [[comp(0, 0), comp(0, 1)], [comp(1, 0), comp(1, 1)]],
        }
    }

    /// Grading by `(alpha, beta)`: `A_00 = k 1`, `A_01 = Im(l) 1_A`,
    /// `A_10 = k j`, `A_11 = j Im(l)`.
    pub fn v_grading(&self) -> VGrading<F::Elem> {
        let a = self.operator_matrix(|x| self.alpha(x));
        let b = self.operator_matrix(|x| self.beta(x));
        self.v_grading_for(&a, &b)
    }

    /// `tr(L_{ab})`.
    pub fn trace_form(&self, a: &Elem<F>, b: &Elem<F>) -> F::Elem {
        let k = self.base();
        let m = self.left_matrix(&self.mul(a, b));
        (0..4).fold(k.zero(), |acc, i| k.add(&acc, &m[i][i]))
    }

    /// Gram matrix of the trace form on the fixed basis.
    pub fn gram_matrix(&self) -> Matrix<F::Elem> {
        let b = self.basis();
        b.iter()
            .map(|x| b.iter().map(|y| self.trace_form(x, y)).collect())
            .collect()
    }

    /// `{z : tau(v, z) = 0 for every row v}`.
    pub fn orthogonal_complement(&self, rows: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
        let k = self.base();
        let g = self.gram_matrix();
        let m: Matrix<F::Elem> = rows
            .iter()
            .map(|v| {
                (0..4)
                    .map(|c| {
                        (0..4).fold(k.zero(), |acc, r| k.add(&acc, &k.mul(&v[r], &g[r][c])))
                    })
                    .collect()
            })
            .collect();
        if m.is_empty() {
            return (0..4)
                .map(|i| (0..4).map(|j| if i == j { k.one() } else { k.zero() }).collect())
                .collect();
        }
        linalg::kernel(k, &m, 4)
    }
}

fn intersect<F: Field>(k: &F, a: &[Vec<F::Elem>], b: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    // v = sum s_i a_i = sum t_j b_j; solve for (s, -t) in the kernel.
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = a[0].len();
    let cols = a.len() + b.len();
    let m: Matrix<F::Elem> = (0..n)
        .map(|r| {
            a.iter()
                .map(|v| v[r].clone())
                .chain(b.iter().map(|v| k.neg(&v[r])))
                .collect()
        })
        .collect();
    let ker = linalg::kernel(k, &m, cols);
    let vs: Vec<Vec<F::Elem>> = ker
        .iter()
        .map(|s| {
            (0..n)
                .map(|r| {
                    a.iter()
                        .zip(s)
                        .fold(k.zero(), |acc, (v, si)| k.add(&acc, &k.mul(si, &v[r])))
                })
                .collect()
        })
        .collect();
    let (red, piv) = linalg::rref(k, &vs);
    red.into_iter().take(piv.len()).collect()
}

impl AlgebraSpec<Rationals> {
    /// Sufficient test for anisotropy over `Q(sqrt(-1))`: the first
    /// component of `q_c` is a diagonal form in `(a, b, e, f)`, and if all four
    /// coefficients are positive only the zero vector is isotropic.
    pub fn positivity_certificate(&self) -> Result<Certificate> {
        let t = self.ext.t();
        if *t != Rational::from(-1) {
            return Err(Error::WrongExtension);
        }
        let c = &self.c;
        let one = Rational::one();
        let diagonal = [
            one.clone(),
            &(&one - &(&c.c1 + &c.c1)) * t,
            -(&c.c2 + &c.c3),
            &(&c.c3 - &c.c2) * t,
        ];
        let ok = diagonal.iter().all(Rational::is_positive);
        Ok(if ok {
            Certificate::Certified
        } else {
            Certificate::Unknown
        })
    }

    /// Bounded search for a nonzero isotropic vector of `q_c`.
    ///
    /// Writing `x = a + b w`, `y = e + f w`, the two components of `q_c` are
    ///
    /// ```text
    /// a^2 + (1 - 2 c1) t b^2 - (c2 + c3) e^2 + (c3 - c2) t f^2
    /// 2 (1 - c1) a b - 2 c2 e f
    /// ```
    ///
    /// Both are homogeneous, so it suffices to take `b, e, f` integral. For
    /// each `|b|, |e|, |f| <= height` the second equation fixes `a` (or
    /// leaves it free, in which case the first one is solved for `a`).
    /// Returned witnesses are re-checked against [`Self::q_c`].
    pub fn find_isotropy_witness(&self, height: u32) -> Option<AlgElem<Rational>> {
        if let Some(w) = self.structured_probes() {
            return Some(w);
        }
        let sc = ScaledForm::new(self.ext.t(), &self.c);
        let h = i64::from(height);
        let found = (-h..=h).into_par_iter().find_map_first(|b| {
            for e in -h..=h {
                for f in -h..=h {
                    // (b, e, f) and its negative give the same equations.
                    if (b, e, f) <= (0, 0, 0) {
                        continue;
                    }
                    if let Some(a) = sc.solve_a(b, e, f) {
                        return Some((a, b, e, f));
                    }
                }
            }
            None
        });
        let (a, b, e, f) = found?;
        let l = &self.ext;
        let w = self.elem(
            l.elem(a, Rational::from(b)),
            l.elem(Rational::from(e), Rational::from(f)),
        );
        assert!(
            l.is_zero(&self.q_c(&w)) && !self.is_zero(&w),
            "isotropy search returned a non-witness {w}"
        );
        Some(w)
    }

    /// Witnesses of the shapes `(s, 1)`, `(s, w)` and `(w, s)`, `s` rational.
    fn structured_probes(&self) -> Option<AlgElem<Rational>> {
        let l = &self.ext;
        let t = l.t().clone();
        let c = &self.c;
        let one = Rational::one();
        let mut candidates = Vec::new();
        // q(s, 1) = s^2 - (c2 + c3)
        if let Some(s) = (&c.c2 + &c.c3).sqrt() {
            candidates.push(self.elem(l.from_base(s), l.one()));
        }
        // q(s, w) = s^2 - (c2 - c3) t
        if let Some(s) = (&(&c.c2 - &c.c3) * &t).sqrt() {
            candidates.push(self.elem(l.from_base(s), l.w()));
        }
        // q(w, s) = (1 - 2 c1) t - (c2 + c3) s^2
        let lead = &(&one - &(&c.c1 + &c.c1)) * &t;
        let c23 = &c.c2 + &c.c3;
        if c23.is_zero() {
            if lead.is_zero() {
                candidates.push(self.elem(l.w(), l.zero()));
            }
        } else if let Some(s) = (&lead / &c23).sqrt() {
            candidates.push(self.elem(l.w(), l.from_base(s)));
        }
        candidates
            .into_iter()
            .find(|w| l.is_zero(&self.q_c(w)) && !self.is_zero(w))
    }
}

/// `q_c` components scaled to integer coefficients.
struct ScaledForm {
    /// `D q1 = D a^2 + p_b b^2 + p_e e^2 + p_f f^2`.
    d: BigInt,
    p_b: BigInt,
    p_e: BigInt,
    p_f: BigInt,
    /// `D q2 / 2 = m_ab a b - m_ef e f`.
    m_ab: BigInt,
    m_ef: BigInt,
    small: Option<[i128; 6]>,
}

impl ScaledForm {
    fn new(t: &Rational, c: &Triple<Rational>) -> Self {
        let one = Rational::one();
        let raw = [
            one.clone(),
            &(&one - &(&c.c1 + &c.c1)) * t,
            -(&c.c2 + &c.c3),
            &(&c.c3 - &c.c2) * t,
            &one - &c.c1,
            c.c2.clone(),
        ];
        let lcm = raw.iter().fold(BigInt::one(), |acc, r| {
            num_integer::Integer::lcm(&acc, r.denom())
        });
        let ints: Vec<BigInt> = raw
            .iter()
            .map(|r| r.numer() * (&lcm / r.denom()))
            .collect();
        // Leave headroom for products with |b|, |e|, |f| up to ~2^20.
        let small = ints
            .iter()
            .map(|v| v.to_i128().filter(|x| x.abs() < (1i128 << 20)))
            .collect::<Option<Vec<_>>>()
            .map(|v| [v[0], v[1], v[2], v[3], v[4], v[5]]);
        ScaledForm {
            d: ints[0].clone(),
            p_b: ints[1].clone(),
            p_e: ints[2].clone(),
            p_f: ints[3].clone(),
            m_ab: ints[4].clone(),
            m_ef: ints[5].clone(),
            small,
        }
    }

    fn solve_a(&self, b: i64, e: i64, f: i64) -> Option<Rational> {
        if let Some([d, pb, pe, pf, mab, mef]) = self.small {
            if b.unsigned_abs().max(e.unsigned_abs()).max(f.unsigned_abs()) < (1 << 20) {
                return solve_small(d, pb, pe, pf, mab, mef, b.into(), e.into(), f.into());
            }
        }
        self.solve_big(b.into(), e.into(), f.into())
    }

    fn solve_big(&self, b: BigInt, e: BigInt, f: BigInt) -> Option<Rational> {
        let rest = &self.p_b * &b * &b + &self.p_e * &e * &e + &self.p_f * &f * &f;
        let den = &self.m_ab * &b;
        let num = &self.m_ef * &e * &f;
        if den.is_zero() {
            if !num.is_zero() {
                return None;
            }
            // D a^2 = -rest
            let target = -(&rest) * &self.d;
            if target.is_negative() {
                return None;
            }
            let r = target.sqrt();
            if &r * &r != target {
                return None;
            }
            let a = Rational::from_big(r, self.d.clone());
            let all_zero = a.is_zero() && b.is_zero() && e.is_zero() && f.is_zero();
            return (!all_zero).then_some(a);
        }
        // a = num / den; D num^2 + den^2 rest = 0
        (&self.d * &num * &num + &den * &den * &rest)
            .is_zero()
            .then(|| Rational::from_big(num, den))
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_small(
    d: i128,
    pb: i128,
    pe: i128,
    pf: i128,
    mab: i128,
    mef: i128,
    b: i128,
    e: i128,
    f: i128,
) -> Option<Rational> {
    let rest = pb * b * b + pe * e * e + pf * f * f;
    let den = mab * b;
    let num = mef * e * f;
    if den == 0 {
        if num != 0 {
            return None;
        }
        let target = -rest * d;
        if target < 0 {
            return None;
        }
        let r = target.sqrt();
        if r * r != target || (r == 0 && b == 0 && e == 0 && f == 0) {
            return None;
        }
        return Some(Rational::from_big(r.into(), d.into()));
    }
    let lhs = d.checked_mul(num)?.checked_mul(num)?;
    let rhs = den.checked_mul(den)?.checked_mul(rest)?;
    (lhs.checked_add(rhs)? == 0).then(|| Rational::from_big(num.into(), den.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::PrimePowerField;
    use proptest::prelude::*;

    fn f7_algebra(c: (i64, i64, i64)) -> AlgebraSpec<PrimePowerField> {
        let k = PrimePowerField::new(7, 1).unwrap();
        let l = QuadExt::new(k.clone(), k.from_i64(3)).unwrap();
        AlgebraSpec::new(l, Triple::new(k.from_i64(c.0), k.from_i64(c.1), k.from_i64(c.2))).unwrap()
    }

    fn rational_algebra(t: i64, c: (Rational, Rational, Rational)) -> AlgebraSpec<Rationals> {
        let l = QuadExt::new(Rationals, Rational::from(t)).unwrap();
        AlgebraSpec::new(l, Triple::new(c.0, c.1, c.2)).unwrap()
    }

    fn quaternions() -> AlgebraSpec<Rationals> {
        rational_algebra(-1, (1.into(), 0.into(), (-1).into()))
    }

    fn fq_algebras(q: u64) -> Vec<AlgebraSpec<PrimePowerField>> {
        let k = PrimePowerField::from_order(q).unwrap();
        let l = QuadExt::new(k.clone(), k.smallest_nonsquare()).unwrap();
        let els = k.elements().unwrap();
        let mut out = Vec::new();
        for c1 in &els {
            for c2 in &els {
                for c3 in &els {
                    out.push(
                        AlgebraSpec::new(l.clone(), Triple::new(*c1, *c2, *c3)).unwrap(),
                    );
                }
            }
        }
        out
    }

    fn admissible(q: u64) -> Vec<AlgebraSpec<PrimePowerField>> {
        fq_algebras(q)
            .into_iter()
            .filter(|a| a.is_admissible_closed_form_fq().unwrap())
            .collect()
    }

    #[test]
    fn unity_and_basis_products() {
        let a = f7_algebra((5, 1, 4));
        let l = a.ext();
        for x in l.elements().unwrap().iter().step_by(5) {
            for y in l.elements().unwrap().iter().step_by(7) {
                let b = a.elem(x.clone(), y.clone());
                assert_eq!(a.mul(&a.one(), &b), b);
                assert_eq!(a.mul(&b, &a.one()), b);
            }
        }
        let k = a.base();
        // j^2 = (c2 + c3) 1, u^2 = t 1, j u = (0, w)
        assert_eq!(a.mul(&a.j(), &a.j()), a.scale(&k.from_i64(5), &a.one()));
        assert_eq!(a.mul(&a.u(), &a.u()), a.scale(&k.from_i64(3), &a.one()));
        assert_eq!(a.mul(&a.j(), &a.u()), a.basis()[3]);
    }

    #[test]
    fn quaternion_relations() {
        let h = quaternions();
        let (i, j) = (h.u(), h.j());
        let minus_one = h.neg(&h.one());
        assert_eq!(h.mul(&j, &j), minus_one);
        assert_eq!(h.mul(&i, &i), minus_one);
        let ij = h.mul(&i, &j);
        assert_eq!(ij, h.neg(&h.mul(&j, &i)));
        assert_eq!(h.mul(&ij, &ij), minus_one);
        assert_eq!(ij, h.neg(&h.basis()[3]));
        assert!(h.is_associative());
        assert!(!h.is_commutative());
        assert_eq!(h.triple_type(), TripleType::S);
        assert_eq!(h.right_nucleus().len(), 4);
    }

    #[test]
    fn q_c_examples() {
        let a = f7_algebra((5, 1, 4));
        let k = a.base();
        assert_eq!(a.q_c(&a.one()), a.ext().one());
        // q_c(j) = -c2 - c3
        assert_eq!(a.q_c(&a.j()), a.ext().from_base(k.from_i64(-5)));
    }

    #[test]
    fn determinant_law_exhaustive() {
        for q in [3u64, 5, 7] {
            let k = PrimePowerField::from_order(q).unwrap();
            let l = QuadExt::new(k.clone(), k.smallest_nonsquare()).unwrap();
            let els = l.elements().unwrap();
            let triples = [(2, 1, 3), (0, 1, 1), (1, 0, 2), (q as i64 - 1, 2, 1)];
            for (c1, c2, c3) in triples {
                let a = AlgebraSpec::new(
                    l.clone(),
                    Triple::new(k.from_i64(c1), k.from_i64(c2), k.from_i64(c3)),
                )
                .unwrap();
                for x in &els {
                    for y in &els {
                        let v = a.elem(x.clone(), y.clone());
                        assert_eq!(a.q_c(&v), a.left_l_det(&v));
                    }
                }
            }
        }
    }

    #[test]
    fn l_linearity_in_the_right_slot() {
        let k = PrimePowerField::new(3, 1).unwrap();
        let l = QuadExt::new(k.clone(), k.from_i64(2)).unwrap();
        let els = l.elements().unwrap();
        let alg: Vec<_> = els
            .iter()
            .flat_map(|x| els.iter().map(move |y| (x.clone(), y.clone())))
            .collect();
        for c in [(2, 1, 1), (1, 0, 1), (0, 2, 0)] {
            let a = AlgebraSpec::new(
                l.clone(),
                Triple::new(k.from_i64(c.0), k.from_i64(c.1), k.from_i64(c.2)),
            )
            .unwrap();
            for (x, y) in &alg {
                let p = a.elem(x.clone(), y.clone());
                for (w, z) in &alg {
                    let r = a.elem(w.clone(), z.clone());
                    for s in &els {
                        assert_eq!(
                            a.mul(&p, &a.right_scalar(&r, s)),
                            a.right_scalar(&a.mul(&p, &r), s)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let budget = Budget::default();
        let a = f7_algebra((5, 1, 4));
        assert!(a.is_admissible_bruteforce(&budget).unwrap());
        assert!(a.is_admissible_closed_form_fq().unwrap());
        assert_eq!(a.checked_triple_type(&budget).unwrap(), TripleType::N);
        for c3 in 0..7 {
            let s = f7_algebra((1, 0, c3));
            assert!(!s.is_admissible_bruteforce(&budget).unwrap());
            assert_eq!(s.checked_triple_type(&budget), Err(Error::InadmissibleTriple));
            assert!(!f7_algebra((1, 1, c3)).is_admissible_closed_form_fq().unwrap());
        }
        assert!(!f7_algebra((0, 0, 0)).is_admissible_bruteforce(&budget).unwrap());
        assert!(matches!(
            quaternions().is_admissible_bruteforce(&budget),
            Err(Error::InfiniteBase)
        ));
        let k = PrimePowerField::new(17, 1).unwrap();
        let l = QuadExt::new(k.clone(), k.smallest_nonsquare()).unwrap();
        let big = AlgebraSpec::new(l, Triple::new(k.one(), k.one(), k.one())).unwrap();
        assert!(matches!(
            big.is_admissible_bruteforce(&budget),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn closed_form_matches_bruteforce_small() {
        // The full sweep up to q = 9 lives in the acceptance suite.
        for q in [3u64, 5] {
            for a in fq_algebras(q) {
                assert_eq!(
                    a.is_admissible_bruteforce(&Budget::default()).unwrap(),
                    a.is_admissible_closed_form_fq().unwrap(),
                    "q={q} c={}",
                    a.triple()
                );
            }
        }
    }

    #[test]
    fn division_iff_operators_bijective() {
        for q in [3u64, 5] {
            for a in fq_algebras(q).into_iter().step_by(if q == 3 { 1 } else { 3 }) {
                let k = a.base();
                let els = a.ext().elements().unwrap();
                let bijective = els.iter().all(|x| {
                    els.iter().all(|y| {
                        let v = a.elem(x.clone(), y.clone());
                        a.is_zero(&v)
                            || (!k.is_zero(&linalg::det(k, &a.left_matrix(&v)))
                                && !k.is_zero(&linalg::det(k, &a.right_matrix(&v))))
                    })
                });
                assert_eq!(bijective, a.is_admissible_bruteforce(&Budget::default()).unwrap());
            }
        }
    }

    #[test]
    fn nucleus_and_type_n() {
        let a = f7_algebra((5, 1, 4));
        let k = a.base();
        let nuc = a.right_nucleus();
        assert_eq!(nuc.len(), 2);
        let ell: Vec<Vec<_>> = vec![a.coords(&a.one()), a.coords(&a.u())];
        assert!(linalg::same_span(k, &nuc, &ell));
        assert!(!a.is_associative());
        assert!(!a.is_commutative());
        for a in admissible(5) {
            let dim = a.right_nucleus().len();
            assert_eq!(dim == 2, a.triple_type() == TripleType::N);
            assert_eq!(a.triple_type() == TripleType::N, !a.is_associative());
        }
    }

    #[test]
    fn v_grading_components() {
        for q in [3u64, 5, 7, 9] {
            let k = PrimePowerField::from_order(q).unwrap();
            let l = QuadExt::new(k.clone(), k.smallest_nonsquare()).unwrap();
            // Any triple works for the eigenspace shapes.
            let a = AlgebraSpec::new(l, Triple::new(k.from_i64(2), k.one(), k.one())).unwrap();
            let g = a.v_grading();
            let b = a.basis();
            let expect = [[&b[0], &b[1]], [&b[2], &b[3]]];
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(g.component(i, j).len(), 1);
                    assert!(linalg::same_span(
                        &k,
                        g.component(i, j),
                        &[a.coords(expect[i][j])]
                    ));
                }
            }
            // Grading law on the graded basis.
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for (m, n) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let x = a.from_coords(&g.component(i, j)[0]);
                    let y = a.from_coords(&g.component(m, n)[0]);
                    let target = g.component((i + m) % 2, (j + n) % 2);
                    let mut rows = target.to_vec();
                    rows.push(a.coords(&a.mul(&x, &y)));
                    assert_eq!(linalg::rank(&k, &rows), 1);
                }
            }
        }
    }

    #[test]
    fn kleinian_pair_actions() {
        let a = f7_algebra((5, 1, 4));
        let l = a.ext();
        let k = a.base();
        let v = a.elem(l.elem(k.from_i64(2), k.from_i64(3)), l.elem(k.from_i64(4), k.one()));
        assert_eq!(a.alpha(&v), a.elem(v.x.clone(), l.neg(&v.y)));
        assert_eq!(a.beta(&v), a.elem(l.conj(&v.x), l.conj(&v.y)));
        assert_eq!(a.alpha(&a.alpha(&v)), v);
        assert_eq!(a.beta(&a.alpha(&v)), a.alpha(&a.beta(&v)));
    }

    #[test]
    fn trace_form_properties() {
        for a in admissible(5).into_iter().chain(admissible(7)) {
            let k = a.base();
            let four = k.from_i64(4);
            assert_eq!(a.trace_form(&a.one(), &a.one()), four);
            let g = a.gram_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(g[i][j], g[j][i]);
                    if i != j {
                        assert!(k.is_zero(&g[i][j]));
                    }
                }
            }
            assert!(!k.is_zero(&linalg::det(k, &g)));
            let beta = a.operator_matrix(|x| a.beta(x));
            let plus = a.eigenspace(&beta, &k.one());
            let minus = a.eigenspace(&beta, &k.neg(&k.one()));
            assert!(linalg::same_span(k, &a.orthogonal_complement(&plus), &minus));
            let alpha = a.operator_matrix(|x| a.alpha(x));
            let plus = a.eigenspace(&alpha, &k.one());
            let minus = a.eigenspace(&alpha, &k.neg(&k.one()));
            assert!(linalg::same_span(k, &a.orthogonal_complement(&plus), &minus));
        }
    }

    #[test]
    fn graded_components_orthogonality() {
        for a in admissible(5) {
            let k = a.base();
            let g = a.v_grading();
            let els = k.elements().unwrap();
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let base = a.from_coords(&g.component(i, j)[0]);
                for s in &els {
                    for r in &els {
                        let x = a.scale(s, &base);
                        let y = a.scale(r, &base);
                        assert_eq!(
                            k.is_zero(&a.trace_form(&x, &y)),
                            a.is_zero(&a.mul(&x, &y))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn positivity_certificate_examples() {
        let q = |n, d| Rational::new(n, d);
        let cert = |c: (Rational, Rational, Rational)| {
            rational_algebra(-1, c).positivity_certificate().unwrap()
        };
        assert_eq!(cert((q(1, 1), q(1, 1), q(-2, 1))), Certificate::Certified);
        assert_eq!(cert((q(1, 1), q(0, 1), q(-1, 1))), Certificate::Certified);
        assert_eq!(cert((q(0, 1), q(0, 1), q(0, 1))), Certificate::Unknown);
        assert_eq!(cert((q(1, 2), q(0, 1), q(-1, 1))), Certificate::Unknown);
        assert_eq!(
            rational_algebra(2, (q(1, 1), q(1, 1), q(-2, 1))).positivity_certificate(),
            Err(Error::WrongExtension)
        );
    }

    #[test]
    fn isotropy_witnesses() {
        let q = |n, d| Rational::new(n, d);
        // c2 + c3 = 4 is a square: (2, 1).
        let a = rational_algebra(-1, (q(1, 1), q(1, 1), q(3, 1)));
        let w = a.find_isotropy_witness(4).unwrap();
        assert!(a.ext().is_zero(&a.q_c(&w)));
        // c1 = 1/4: q(w, s) = (1/2)(-1) - (c2 + c3) s^2 with c2 + c3 = -1/2.
        let a = rational_algebra(-1, (q(1, 4), q(-1, 4), q(-1, 4)));
        assert!(a.find_isotropy_witness(4).is_some());
        // Certified algebras have no witness.
        assert!(quaternions().find_isotropy_witness(6).is_none());
        let a = rational_algebra(-1, (q(1, 1), q(1, 1), q(-2, 1)));
        assert!(a.find_isotropy_witness(6).is_none());
    }

    #[test]
    fn grid_search_finds_non_structured_witness() {
        // t = 2, c = (-2, 0, -1): none of the probe shapes applies, but
        // (x, y) = (3, 3 + 3w) is isotropic.
        let q = |n, d| Rational::new(n, d);
        let a = rational_algebra(2, (q(-2, 1), q(0, 1), q(-1, 1)));
        assert!(a.structured_probes().is_none());
        let w = a.find_isotropy_witness(3).unwrap();
        assert!(a.ext().is_zero(&a.q_c(&w)));
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-12i64..12, 1i64..5).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn q_c_is_the_determinant_over_rationals(
            c1 in small_rational(), c2 in small_rational(), c3 in small_rational(),
            v in prop::collection::vec(small_rational(), 4),
            t in prop::sample::select(vec![-1i64, 2, 3, -5]),
        ) {
            let a = rational_algebra(t, (c1, c2, c3));
            let x = a.from_coords(&v);
            prop_assert_eq!(a.q_c(&x), a.left_l_det(&x));
            prop_assert_eq!(a.mul(&a.one(), &x), x.clone());
            prop_assert_eq!(a.mul(&x, &a.one()), x);
        }

        #[test]
        fn witnesses_are_sound(
            c1 in small_rational(), c2 in small_rational(), c3 in small_rational(),
        ) {
            let a = rational_algebra(-1, (c1, c2, c3));
            if let Some(w) = a.find_isotropy_witness(3) {
                prop_assert!(!a.is_zero(&w));
                prop_assert!(a.ext().is_zero(&a.q_c(&w)));
                prop_assert_eq!(a.positivity_certificate().unwrap(), Certificate::Unknown);
            }
        }

        #[test]
        fn quaternion_norm_is_multiplicative(
            u in prop::collection::vec(small_rational(), 4),
            v in prop::collection::vec(small_rational(), 4),
        ) {
            let h = quaternions();
            let (a, b) = (h.from_coords(&u), h.from_coords(&v));
            let l = h.ext();
            prop_assert_eq!(h.q_c(&h.mul(&a, &b)), l.mul(&h.q_c(&a), &h.q_c(&b)));
        }
    }
}
