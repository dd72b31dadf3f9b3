//! Morphisms between algebras over the same extension `l`.
//!
//! For `a` in `l*(c, d) = {a : c1 = d1, c2 / a^2 = d2, c3 / (a conj(a)) = d3}`
//! the maps `phi_a(x, y) = (x, a y)` and `psi_a(x, y) = (conj(x), a conj(y))`
//! are morphisms `A(l, c) -> A(l, d)`. Composition follows
//! `(a, i)(b, j) = (a sigma^i(b), i + j)`, where `i = 0` is `phi` and
//! `i = 1` is `psi`.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{AlgElem, AlgebraSpec, Triple, TripleType};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::{Field, Rational, Rationals};
use crate::linalg::{self, Matrix};
use crate::quad_ext::{ExtElem, QuadExt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismKind {
    Phi,
    Psi,
}

impl MorphismKind {
    fn bit(self) -> u8 {
        match self {
            MorphismKind::Phi => 0,
            MorphismKind::Psi => 1,
        }
    }

    fn from_bit(b: u8) -> Self {
        if b % 2 == 0 {
            MorphismKind::Phi
        } else {
            MorphismKind::Psi
        }
    }
}

/// `phi_a` or `psi_a`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(bound(serialize = "E: fmt::Display"))]
pub struct MorphismWitness<E> {
    pub kind: MorphismKind,
    pub a: ExtElem<E>,
}

impl<E: fmt::Display> fmt::Display for MorphismWitness<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            MorphismKind::Phi => "phi",
            MorphismKind::Psi => "psi",
        };
        write!(f, "{name}[{}]", self.a)
    }
}

impl<E: fmt::Display> fmt::Debug for MorphismWitness<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<E: Clone> MorphismWitness<E> {
    pub fn phi(a: ExtElem<E>) -> Self {
        MorphismWitness {
            kind: MorphismKind::Phi,
            a,
        }
    }

    pub fn psi(a: ExtElem<E>) -> Self {
        MorphismWitness {
            kind: MorphismKind::Psi,
            a,
        }
    }

    /// Checked construction: `a` must lie in `l*(c, d)`.
    pub fn new<F: Field<Elem = E>>(
        l: &QuadExt<F>,
        c: &Triple<E>,
        d: &Triple<E>,
        kind: MorphismKind,
        a: ExtElem<E>,
    ) -> Result<Self>
    where
        E: fmt::Display,
    {
        if in_ell_star(l, c, d, &a) {
            Ok(MorphismWitness { kind, a })
        } else {
            Err(Error::NotAWitness(a.to_string()))
        }
    }

    pub fn apply<F: Field<Elem = E>>(&self, l: &QuadExt<F>, v: &AlgElem<E>) -> AlgElem<E> {
        match self.kind {
            MorphismKind::Phi => AlgElem {
                x: v.x.clone(),
                y: l.mul(&self.a, &v.y),
            },
            MorphismKind::Psi => AlgElem {
                x: l.conj(&v.x),
                y: l.mul(&self.a, &l.conj(&v.y)),
            },
        }
    }

    /// `self ∘ other`.
    pub fn compose<F: Field<Elem = E>>(&self, l: &QuadExt<F>, other: &Self) -> Self {
        let b = match self.kind {
            MorphismKind::Phi => other.a.clone(),
            MorphismKind::Psi => l.conj(&other.a),
        };
        MorphismWitness {
            kind: MorphismKind::from_bit(self.kind.bit() + other.kind.bit()),
            a: l.mul(&self.a, &b),
        }
    }

    pub fn is_identity<F: Field<Elem = E>>(&self, l: &QuadExt<F>) -> bool
    where
        E: PartialEq,
    {
        self.kind == MorphismKind::Phi && self.a == l.one()
    }
}

/// Membership `a ∈ l*(c, d)`.
pub fn in_ell_star<F: Field>(
    l: &QuadExt<F>,
    c: &Triple<F::Elem>,
    d: &Triple<F::Elem>,
    a: &ExtElem<F::Elem>,
) -> bool {
    let k = l.base();
    if l.is_zero(a) || c.c1 != d.c1 {
        return false;
    }
    let a2 = l.square(a);
    let c2_over = l.div(&l.from_base(c.c2.clone()), &a2).expect("a is nonzero");
    if c2_over != l.from_base(d.c2.clone()) {
        return false;
    }
    let n = l.norm(a);
    k.div(&c.c3, &n).expect("norm of a unit is nonzero") == d.c3
}

/// `l*(c, d)` by scanning `l*`.
pub fn ell_star_set<F: Field>(
    l: &QuadExt<F>,
    c: &Triple<F::Elem>,
    d: &Triple<F::Elem>,
) -> Result<Vec<ExtElem<F::Elem>>> {
    if c.c1 != d.c1 {
        return Ok(Vec::new());
    }
    Ok(l.units()?
        .into_iter()
        .filter(|a| in_ell_star(l, c, d, a))
        .collect())
}

/// Answer for `l*(c, d)` over a rational base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EllStar {
    /// `complete` marks a full enumeration of a finite set.
    Nonempty {
        witnesses: Vec<ExtElem<Rational>>,
        complete: bool,
    },
    Empty,
    Undecided,
}

impl EllStar {
    pub fn is_nonempty(&self) -> Option<bool> {
        match self {
            EllStar::Nonempty { .. } => Some(true),
            EllStar::Empty => Some(false),
            EllStar::Undecided => None,
        }
    }
}

/// `l*(c, d)` over `Q(sqrt t)`.
///
/// With `c2 d2 != 0` the set is finite: `a^2 = c2 / d2` has at most two
/// roots in `l`, each then checked against the norm condition. With
/// `c2 = d2 = 0` it is the solution set of the norm equation
/// `a conj(a) = c3 / d3`, searched up to `height`; an exhausted search
/// yields [`EllStar::Undecided`] unless a sign obstruction applies.
pub fn ell_star_rational(
    l: &QuadExt<Rationals>,
    c: &Triple<Rational>,
    d: &Triple<Rational>,
    height: u32,
) -> EllStar {
    if c.c1 != d.c1 || c.c2.is_zero() != d.c2.is_zero() {
        return EllStar::Empty;
    }
    let t = l.t().clone();
    if !c.c2.is_zero() {
        let r = &c.c2 / &d.c2;
        let root = if let Some(s) = r.sqrt() {
            l.from_base(s)
        } else if let Some(s) = (&r / &t).sqrt() {
            l.elem(Rational::zero(), s)
        } else {
            return EllStar::Empty;
        };
        let witnesses: Vec<_> = [root.clone(), l.neg(&root)]
            .into_iter()
            .filter(|a| in_ell_star(l, c, d, a))
            .collect();
        return if witnesses.is_empty() {
            EllStar::Empty
        } else {
            EllStar::Nonempty {
                witnesses,
                complete: true,
            }
        };
    }
    match (c.c3.is_zero(), d.c3.is_zero()) {
        (true, true) => {
            return EllStar::Nonempty {
                witnesses: vec![l.one()],
                complete: false,
            }
        }
        (false, false) => {}
        _ => return EllStar::Empty,
    }
    let r = &c.c3 / &d.c3;
    // u^2 - t v^2 > 0 for every unit when t < 0.
    if t.is_negative() && r.is_negative() {
        return EllStar::Empty;
    }
    match norm_representation(&t, &r, height) {
        Some(a) => {
            let a = l.elem(a.0, a.1);
            debug_assert!(in_ell_star(l, c, d, &a));
            EllStar::Nonempty {
                witnesses: vec![a],
                complete: false,
            }
        }
        None => EllStar::Undecided,
    }
}

/// `(u, v)` with `u^2 - t v^2 = r`, searching `u = U / z`, `v = V / z` with
/// `1 <= z <= height` and `|V| <= height * max(1, |denominators|)`.
fn norm_representation(t: &Rational, r: &Rational, height: u32) -> Option<(Rational, Rational)> {
    if let Some(s) = r.sqrt() {
        return Some((s, Rational::zero()));
    }
    // Clear denominators: t = tn/td, r = rn/rd.
    // (U/z)^2 - t (V/z)^2 = r  <=>  td rd U^2 = rd tn V^2 + td rn z^2 (after scaling by td rd z^2).
    let (tn, td) = (t.numer().clone(), t.denom().clone());
    let (rn, rd) = (r.numer().clone(), r.denom().clone());
    let h = i64::from(height);
    for z in 1..=h {
        let z = BigInt::from(z);
        for v in 0..=h {
            let v = BigInt::from(v);
            let rhs = &rd * &tn * &v * &v + &td * &rn * &z * &z;
            let scale = &td * &rd;
            // U^2 = rhs / scale must be a perfect square of an integer.
            if rhs < BigInt::zero() || !(&rhs % &scale).is_zero() {
                continue;
            }
            let target = &rhs / &scale;
            let u = target.sqrt();
            if &u * &u == target {
                let zq = Rational::from_big(z.clone(), BigInt::from(1));
                let uq = &Rational::from_big(u, BigInt::from(1)) / &zq;
                let vq = &Rational::from_big(v, BigInt::from(1)) / &zq;
                return Some((uq, vq));
            }
        }
    }
    None
}

/// `A(l, c) ≅ A(l, d)` over a finite base.
pub fn is_isomorphic<F: Field>(
    l: &QuadExt<F>,
    c: &Triple<F::Elem>,
    d: &Triple<F::Elem>,
) -> Result<bool> {
    Ok(!ell_star_set(l, c, d)?.is_empty())
}

/// `k`-matrix (on the fixed basis) of the linear map given by a witness.
pub fn witness_matrix<F: Field>(
    a: &AlgebraSpec<F>,
    w: &MorphismWitness<F::Elem>,
) -> Matrix<F::Elem> {
    a.operator_matrix(|v| w.apply(a.ext(), v))
}

/// Whether `m` (columns = images of the fixed basis of `src`) is unital and
/// respects all 16 basis products.
pub fn is_algebra_morphism<F: Field>(
    src: &AlgebraSpec<F>,
    dst: &AlgebraSpec<F>,
    m: &Matrix<F::Elem>,
) -> bool {
    let k = src.base();
    let f = |v: &AlgElem<F::Elem>| dst.from_coords(&linalg::mat_vec(k, m, &src.coords(v)));
    let basis = src.basis();
    let images: Vec<_> = basis.iter().map(&f).collect();
    if images[0] != dst.one() {
        return false;
    }
    (0..4).all(|i| {
        (0..4).all(|j| f(&src.mul(&basis[i], &basis[j])) == dst.mul(&images[i], &images[j]))
    })
}

/// Whether a witness really is a morphism `A(l, c) -> A(l, d)`, checked on
/// basis products.
pub fn is_morphism_check<F: Field>(
    src: &AlgebraSpec<F>,
    dst: &AlgebraSpec<F>,
    w: &MorphismWitness<F::Elem>,
) -> bool {
    !src.ext().is_zero(&w.a) && is_algebra_morphism(src, dst, &witness_matrix(src, w))
}

/// Every algebra morphism `A -> B`, found by scanning images of the
/// generators `u = (w, 0)` and `j = (0, 1)`.
///
/// Images are pruned to `P^2 = t 1_B` and `Q^2 = (c2 + c3) 1_B`, which any
/// morphism must satisfy. The candidate map sends `1, u, j, ju` to
/// `1, P, Q, Q P`.
pub fn brute_force_morphisms<F: Field>(
    src: &AlgebraSpec<F>,
    dst: &AlgebraSpec<F>,
    budget: &Budget,
) -> Result<Vec<Matrix<F::Elem>>> {
    let k = src.base();
    let q = k.cardinality().ok_or(Error::InfiniteBase)?;
    budget.check_morphisms(q)?;
    if src.ext().t() != dst.ext().t() || !dst.base().contains(src.ext().t()) {
        return Err(Error::ContextMismatch);
    }
    let (one, u, j) = (src.one(), src.u(), src.j());
    let ju = src.mul(&j, &u);
    let gens = [one.clone(), u.clone(), j.clone(), ju.clone()];
    let gen_rows: Vec<Vec<F::Elem>> = gens.iter().map(|g| src.coords(g)).collect();
    assert_eq!(linalg::rank(k, &gen_rows), 4, "1, u, j, ju must be a basis");

    let u2 = src.mul(&u, &u);
    let j2 = src.mul(&j, &j);
    // u^2 and j^2 are scalar multiples of 1_A.
    assert!(src.ext().in_base(&u2.x) && src.ext().is_zero(&u2.y));
    assert!(src.ext().in_base(&j2.x) && src.ext().is_zero(&j2.y));
    let target_u = dst.scale(&u2.x.u, &dst.one());
    let target_j = dst.scale(&j2.x.u, &dst.one());

    let ls = dst.ext().elements()?;
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    for x in &ls {
        for y in &ls {
            let v = dst.elem(x.clone(), y.clone());
            let sq = dst.mul(&v, &v);
            if sq == target_u {
                ps.push(v.clone());
            }
            if sq == target_j {
                qs.push(v);
            }
        }
    }

    // Coordinates of the fixed basis in terms of (1, u, j, ju).
    let gen_matrix: Matrix<F::Elem> = (0..4)
        .map(|r| (0..4).map(|c| gen_rows[c][r].clone()).collect())
        .collect();
    let gen_inv = invert(k, &gen_matrix);

    let mut out = Vec::new();
    for p in &ps {
        for qq in &qs {
            let images = [dst.one(), p.clone(), qq.clone(), dst.mul(qq, p)];
            let img_matrix: Matrix<F::Elem> = (0..4)
                .map(|r| {
                    (0..4)
                        .map(|c| dst.coords(&images[c])[r].clone())
                        .collect()
                })
                .collect();
            let m = matmul(k, &img_matrix, &gen_inv);
            if is_algebra_morphism(src, dst, &m) {
                out.push(m);
            }
        }
    }
    Ok(out)
}

fn matmul<F: Field>(k: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|c| {
                    row.iter()
                        .zip(b)
                        .fold(k.zero(), |acc, (x, brow)| k.add(&acc, &k.mul(x, &brow[c])))
                })
                .collect()
        })
        .collect()
}

fn invert<F: Field>(k: &F, m: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let n = m.len();
    let aug: Matrix<F::Elem> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { k.one() } else { k.zero() }));
            r
        })
        .collect();
    let (red, piv) = linalg::rref(k, &aug);
    assert_eq!(piv.len(), n, "matrix is singular");
    red.into_iter().map(|r| r[n..].to_vec()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AutTag {
    KleinFour,
    /// `S(l/k) ⋊ C2`.
    SSemidirectC2,
    /// `A* / k*`.
    UnitsModCenter,
}

impl fmt::Display for AutTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AutTag::KleinFour => "KLEIN_FOUR",
            AutTag::SSemidirectC2 => "S_SEMIDIRECT_C2",
            AutTag::UnitsModCenter => "UNITS_MOD_CENTER",
        })
    }
}

#[derive(Clone, Serialize)]
#[serde(bound(serialize = "E: fmt::Display"))]
pub struct AutGroup<E> {
    pub tag: AutTag,
    /// `None` for groups reported symbolically.
    pub order: Option<u64>,
    pub elements: Vec<MorphismWitness<E>>,
    /// `table[i][j]` is the index of `elements[i] ∘ elements[j]`.
    pub table: Vec<Vec<usize>>,
}

/// Automorphism group of a division algebra `A(l, c)`.
///
/// Enumerated as `{phi_a, psi_a : a ∈ l*(c, c)}` when that set is finite or
/// the base is finite; type `S` is reported symbolically.
pub fn aut_group<F: Field>(a: &AlgebraSpec<F>) -> Result<AutGroup<F::Elem>> {
    let l = a.ext();
    let k = l.base();
    let c = a.triple();
    let symbolic = |tag| AutGroup {
        tag,
        order: None,
        elements: Vec::new(),
        table: Vec::new(),
    };
    if a.triple_type() == TripleType::S {
        return Ok(symbolic(AutTag::UnitsModCenter));
    }
    let witnesses = if !k.is_zero(&c.c2) {
        // a^2 = 1 and a conj(a) = 1.
        vec![l.one(), l.neg(&l.one())]
    } else if k.cardinality().is_some() {
        ell_star_set(l, c, c)?
    } else {
        return Ok(symbolic(AutTag::SSemidirectC2));
    };
    debug_assert!(witnesses.iter().all(|w| in_ell_star(l, c, c, w)));

    let mut elements: Vec<MorphismWitness<F::Elem>> = witnesses
        .iter()
        .flat_map(|w| [MorphismWitness::phi(w.clone()), MorphismWitness::psi(w.clone())])
        .collect();
    elements.sort();
    let index = |w: &MorphismWitness<F::Elem>| elements.iter().position(|e| e == w);
    let table: Vec<Vec<usize>> = elements
        .iter()
        .map(|x| {
            elements
                .iter()
                .map(|y| index(&x.compose(l, y)).expect("automorphisms are closed under composition"))
                .collect()
        })
        .collect();

    let n = elements.len();
    let id = elements
        .iter()
        .position(|e| e.is_identity(l))
        .expect("identity is an automorphism");
    let abelian = (0..n).all(|i| (0..n).all(|j| table[i][j] == table[j][i]));
    let exponent_two = (0..n).all(|i| table[i][i] == id);
    let tag = if n == 4 && abelian && exponent_two {
        AutTag::KleinFour
    } else {
        // phi-part is abelian, psi_1 has order 2 and inverts it.
        let phis: Vec<usize> = (0..n)
            .filter(|&i| elements[i].kind == MorphismKind::Phi)
            .collect();
        let psi1 = index(&MorphismWitness::psi(l.one())).expect("psi_1 is an automorphism");
        let phi_abelian = phis.iter().all(|&i| phis.iter().all(|&j| table[i][j] == table[j][i]));
        let inverts = phis
            .iter()
            .all(|&i| table[table[psi1][i]][psi1] == inverse(&table, id, i));
        if phi_abelian && table[psi1][psi1] == id && inverts {
            AutTag::SSemidirectC2
        } else {
            unreachable!("automorphism group of an algebra of type N has one of the known shapes")
        }
    };
    Ok(AutGroup {
        tag,
        order: Some(n as u64),
        elements,
        table,
    })
}

impl<E: fmt::Display> fmt::Debug for AutGroup<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AutGroup")
            .field("tag", &self.tag)
            .field("order", &self.order)
            .field("elements", &self.elements)
            .finish()
    }
}

fn inverse(table: &[Vec<usize>], id: usize, i: usize) -> usize {
    (0..table.len())
        .find(|&j| table[i][j] == id)
        .expect("group elements are invertible")
}

/// Distinct maps among a list of matrices (as a set).
pub fn matrix_set<E: Clone + Eq + std::hash::Hash>(ms: &[Matrix<E>]) -> HashSet<Matrix<E>> {
    ms.iter().cloned().collect()
}
