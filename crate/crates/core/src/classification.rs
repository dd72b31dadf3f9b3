//! Classification pipelines.
//!
//! Over `F_q` three admissibility deciders are kept independent: the
//! anisotropy scan of `q_c`, the reduction `c -> (a, b)` followed by
//! membership in `B = {(a, a) : 1 - a^2 not a square}`, and the closed form.
//! The transversal is `{(c1, 1, -c1 / |1 - c1|) : c1 != 1, 1 - 2 c1 not a
//! square}`.
//!
//! Over square-ordered fields only the membership predicates are exposed,
//! evaluated on exact rationals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, Triple, TripleType};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::{square_abs, Field, Rational};
use crate::finite_field::{Fq, PrimePowerField};
use crate::groupoid::{self, SemidirectGroup};
use crate::morphisms::{self, ell_star_set};
use crate::quad_ext::QuadExt;

/// `(a, b) ∈ B`: `a = b` and `1 - a^2` is not a square.
pub fn b_set_membership<F: Field>(k: &F, a: &F::Elem, b: &F::Elem) -> bool {
    a == b && !k.is_square(&k.sub(&k.one(), &k.square(a)))
}

/// `h_{a,b}(x, y) = x^2 - y^2 + a x conj(x) + b y conj(y)` on `l^2`.
pub fn h_ab<F: Field>(
    l: &QuadExt<F>,
    a: &F::Elem,
    b: &F::Elem,
    x: &crate::quad_ext::ExtElem<F::Elem>,
    y: &crate::quad_ext::ExtElem<F::Elem>,
) -> crate::quad_ext::ExtElem<F::Elem> {
    let k = l.base();
    let s = l.sub(&l.square(x), &l.square(y));
    let n = k.add(&k.mul(a, &l.norm(x)), &k.mul(b, &l.norm(y)));
    l.add(&s, &l.from_base(n))
}

/// Exhaustive anisotropy scan of `h_{a,b}`.
pub fn h_ab_anisotropic<F: Field>(
    l: &QuadExt<F>,
    a: &F::Elem,
    b: &F::Elem,
    budget: &Budget,
) -> Result<bool> {
    let q = l.base().cardinality().ok_or(Error::InfiniteBase)?;
    budget.check_algebra(q)?;
    let ls = l.elements()?;
    let isotropic = ls.par_iter().any(|x| {
        ls.iter().any(|y| {
            !(l.is_zero(x) && l.is_zero(y)) && l.is_zero(&h_ab(l, a, b, x, y))
        })
    });
    Ok(!isotropic)
}

/// `{m : m^2 - 1 is a square}` (zero counts as a square).
pub fn m1_set<F: Field>(k: &F) -> Result<Vec<F::Elem>> {
    Ok(k.elements()?
        .into_iter()
        .filter(|m| k.is_square(&k.sub(&k.square(m), &k.one())))
        .collect())
}

/// `{m : m^2 - 1 is not a nonzero square}`.
pub fn m2_set<F: Field>(k: &F) -> Result<Vec<F::Elem>> {
    Ok(k.elements()?
        .into_iter()
        .filter(|m| {
            let d = k.sub(&k.square(m), &k.one());
            k.is_zero(&d) || !k.is_square(&d)
        })
        .collect())
}

/// The criterion for `b^2 != a^2` on a second-type field:
/// `(a, b) ∈ B` iff `(a + b) m1 != 2 + (a - b) m2` for all `m1 ∈ M1`,
/// `m2 ∈ M2`. `None` when `b^2 = a^2`. Only finite bases are enumerable.
pub fn b_general_criterion<F: Field>(k: &F, a: &F::Elem, b: &F::Elem) -> Result<Option<bool>> {
    if k.square(a) == k.square(b) {
        return Ok(None);
    }
    let (m1, m2) = (m1_set(k)?, m2_set(k)?);
    let s = k.add(a, b);
    let d = k.sub(a, b);
    let two = k.from_i64(2);
    let hit = m1.iter().any(|x| {
        let lhs = k.mul(&s, x);
        m2.iter().any(|y| lhs == k.add(&two, &k.mul(&d, y)))
    });
    Ok(Some(!hit))
}

/// `(c1 / |1 - c1|, -c3 / |c2|)`, or `None` when `(1 - c1) c2 = 0`.
pub fn from_c_to_b<F: Field>(k: &F, c: &Triple<F::Elem>) -> Option<(F::Elem, F::Elem)> {
    let one_minus = k.sub(&k.one(), &c.c1);
    if k.is_zero(&one_minus) || k.is_zero(&c.c2) {
        return None;
    }
    let a = k.div(&c.c1, &square_abs(k, &one_minus))?;
    let b = k.div(&k.neg(&c.c3), &square_abs(k, &c.c2))?;
    Some((a, b))
}

/// Admissibility through the reduction to `B`.
pub fn admissible_via_b<F: Field>(k: &F, c: &Triple<F::Elem>) -> bool {
    from_c_to_b(k, c).is_some_and(|(a, b)| b_set_membership(k, &a, &b))
}

/// Members in increasing order of `c1`.
pub fn fq_transversal<F: Field>(k: &F) -> Result<Vec<Triple<F::Elem>>> {
    let one = k.one();
    let mut out = Vec::new();
    for c1 in k.elements()? {
        if c1 == one {
            continue;
        }
        let disc = k.sub(&one, &k.add(&c1, &c1));
        if k.is_square(&disc) {
            continue;
        }
        let c3 = k
            .div(&k.neg(&c1), &square_abs(k, &k.sub(&one, &c1)))
            .expect("c1 != 1");
        out.push(Triple::new(c1, one.clone(), c3));
    }
    out.sort();
    Ok(out)
}

/// `(q - 1) / 2` when `-1` is a square in `F_q`, `(q - 3) / 2` otherwise.
pub fn transversal_size_formula(q: u64) -> u64 {
    if q % 4 == 1 {
        (q - 1) / 2
    } else {
        (q - 3) / 2
    }
}

/// Every triple of `k^3` in enumeration order.
fn all_triples<F: Field>(k: &F) -> Result<Vec<Triple<F::Elem>>> {
    let els = k.elements()?;
    let mut out = Vec::with_capacity(els.len().pow(3));
    for c1 in &els {
        for c2 in &els {
            for c3 in &els {
                out.push(Triple::new(c1.clone(), c2.clone(), c3.clone()));
            }
        }
    }
    Ok(out)
}

/// Admissible triples by exhaustive anisotropy scans, sorted.
pub fn bruteforce_admissible<F: Field>(l: &QuadExt<F>, budget: &Budget) -> Result<Vec<Triple<F::Elem>>> {
    let q = l.base().cardinality().ok_or(Error::InfiniteBase)?;
    budget.check_sweep(q)?;
    budget.check_algebra(q)?;
    let triples = all_triples(l.base())?;
    let flags: Vec<bool> = triples
        .par_iter()
        .map(|c| {
            AlgebraSpec::new(l.clone(), c.clone())?.is_admissible_bruteforce(budget)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<_> = triples
        .into_iter()
        .zip(flags)
        .filter_map(|(c, f)| f.then_some(c))
        .collect();
    out.sort();
    Ok(out)
}

/// Triples on which the three deciders disagree; empty on success.
pub fn oracle_disagreements<F: Field>(
    l: &QuadExt<F>,
    budget: &Budget,
) -> Result<Vec<Triple<F::Elem>>> {
    let k = l.base();
    let brute = bruteforce_admissible(l, budget)?;
    let mut bad = Vec::new();
    for c in all_triples(k)? {
        let by_brute = brute.binary_search(&c).is_ok();
        let by_b = admissible_via_b(k, &c);
        let by_closed = AlgebraSpec::new(l.clone(), c.clone())?.is_admissible_closed_form_fq()?;
        if by_brute != by_b || by_brute != by_closed {
            bad.push(c);
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub q: u64,
    pub t: Fq,
    pub admissible_count: usize,
    pub transversal: Vec<Triple<Fq>>,
    pub isoclass_count: usize,
    pub cross_checks: BTreeMap<String, bool>,
    /// Checks not run because they exceed the budget.
    pub skipped: Vec<String>,
}

impl ClassificationReport {
    pub fn all_checks_pass(&self) -> bool {
        self.cross_checks.values().all(|&v| v)
    }
}

/// Transversal over `F_q` with cross-checks against the independent oracles.
pub fn fq_classify(k: &PrimePowerField, budget: &Budget) -> Result<ClassificationReport> {
    fq_classify_with_t(k, k.smallest_nonsquare(), budget)
}

pub fn fq_classify_with_t(
    k: &PrimePowerField,
    t: Fq,
    budget: &Budget,
) -> Result<ClassificationReport> {
    let q = k.q();
    budget.check_algebra(q)?;
    let l = QuadExt::new(k.clone(), t)?;
    let transversal = fq_transversal(k)?;
    let admissible = groupoid::finite_admissible(&l)?;
    let mut checks = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut record = |name: &str, v: Result<bool>, skipped: &mut Vec<String>| match v {
        Ok(b) => {
            checks.insert(name.to_string(), b);
            Ok(())
        }
        Err(Error::BudgetExceeded { .. }) => {
            skipped.push(name.to_string());
            Ok(())
        }
        Err(e) => Err(e),
    };

    record(
        "closed_form_matches_bruteforce",
        oracle_disagreements(&l, budget).map(|bad| bad.is_empty()),
        &mut skipped,
    )?;
    let by_b: Vec<_> = all_triples(k)?
        .into_iter()
        .filter(|c| admissible_via_b(k, c))
        .collect();
    record("reduction_matches_closed_form", Ok(by_b == admissible), &mut skipped)?;

    let sound = transversal.iter().try_fold(true, |acc, c| {
        Ok::<_, Error>(acc && AlgebraSpec::new(l.clone(), c.clone())?.is_admissible_bruteforce(budget)?)
    });
    record("transversal_admissible", sound, &mut skipped)?;

    let mut exact_one = true;
    for c in &admissible {
        let hits = transversal
            .iter()
            .filter(|d| !ell_star_set(&l, c, d).map(|s| s.is_empty()).unwrap_or(true))
            .count();
        exact_one &= hits == 1;
    }
    record("transversal_exhaustive_and_irredundant", Ok(exact_one), &mut skipped)?;

    let group = SemidirectGroup::new(l.clone(), 1)?;
    let part = groupoid::orbits(&group, &admissible)?;
    record(
        "orbit_count_matches_transversal",
        Ok(part.orbits.len() == transversal.len()),
        &mut skipped,
    )?;
    record(
        "size_formula",
        Ok(transversal.len() as u64 == transversal_size_formula(q)),
        &mut skipped,
    )?;

    // |Aut| = 2 |l*(c, c)|; checked on all objects through l*(c, c) and on the
    // transversal through the brute-force morphism scan when affordable.
    let aut_by_ell_star = admissible.iter().try_fold(true, |acc, c| {
        Ok::<_, Error>(acc && 2 * ell_star_set(&l, c, c)?.len() == 4)
    });
    record("aut_order_four", aut_by_ell_star, &mut skipped)?;
    let aut_brute = transversal.iter().try_fold(true, |acc, c| {
        let a = AlgebraSpec::new(l.clone(), c.clone())?;
        Ok::<_, Error>(acc && morphisms::brute_force_morphisms(&a, &a, budget)?.len() == 4)
    });
    record("aut_order_four_bruteforce", aut_brute, &mut skipped)?;

    let purity = admissible.iter().all(|c| {
        let a = AlgebraSpec::new(l.clone(), c.clone()).expect("same base");
        a.triple_type() == TripleType::N && !k.is_zero(&c.c2)
    });
    record("type_n_purity", Ok(purity), &mut skipped)?;
    record("norm_surjective", l.norm_surjective(), &mut skipped)?;

    Ok(ClassificationReport {
        q,
        t: l.t().clone(),
        admissible_count: admissible.len(),
        isoclass_count: transversal.len(),
        transversal,
        cross_checks: checks,
        skipped,
    })
}

/// Membership predicates for the parameter sets over a square-ordered base.
#[derive(Debug, Clone, Copy, Default)]
pub struct OrderedSetPredicates;

pub fn ordered_predicates() -> OrderedSetPredicates {
    OrderedSetPredicates
}

impl OrderedSetPredicates {
    fn half() -> Rational {
        Rational::new(1, 2)
    }

    /// `c1 > 1/2` and `c3 < c2 < -c3`.
    pub fn in_c(&self, c: &Triple<Rational>) -> bool {
        c.c1 > Self::half() && c.c3 < c.c2 && c.c2 < -c.c3.clone()
    }

    /// `c1 > 1/2`, `c3 < 0`, `c1 != 1` and `c2 = 0`.
    pub fn in_cn0(&self, c: &Triple<Rational>) -> bool {
        c.c1 > Self::half() && c.c3.is_negative() && c.c1 != Rational::one() && c.c2.is_zero()
    }

    pub fn in_cn1(&self, c: &Triple<Rational>) -> bool {
        self.in_c(c) && !c.c2.is_zero()
    }

    /// `c2 = 0`, `c3 = -1`, `c1 > 1/2` and `c1 != 1`.
    pub fn in_tn0(&self, c: &Triple<Rational>) -> bool {
        c.c2.is_zero() && c.c3 == Rational::from(-1) && c.c1 > Self::half() && c.c1 != Rational::one()
    }

    /// `c2 = 1`, `c1 > 1/2` and `c3 < -1`.
    pub fn in_tn1(&self, c: &Triple<Rational>) -> bool {
        c.c2 == Rational::one() && c.c1 > Self::half() && c.c3 < Rational::from(-1)
    }
}

/// Symbolic summary of the classification over a square-ordered field,
/// which cannot be enumerated.
#[derive(Debug, Clone, Serialize)]
pub struct SquareOrderedSummary {
    pub c: &'static str,
    pub c_n0: &'static str,
    pub c_n1: &'static str,
    pub t_n0: &'static str,
    pub t_n1: &'static str,
    /// The unique type-S class, the quaternions.
    pub type_s: Triple<Rational>,
}

pub fn square_ordered_summary() -> SquareOrderedSummary {
    SquareOrderedSummary {
        c: "c1 > 1/2 and c3 < c2 < -c3",
        c_n0: "c1 > 1/2, c1 != 1, c2 = 0, c3 < 0",
        c_n1: "c1 > 1/2, c3 < c2 < -c3, c2 != 0",
        t_n0: "c1 > 1/2, c1 != 1, c2 = 0, c3 = -1",
        t_n1: "c1 > 1/2, c2 = 1, c3 < -1",
        type_s: Triple::new(Rational::one(), Rational::zero(), Rational::from(-1)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    /// The norm `l* -> k*` is not surjective.
    FirstType,
    /// The norm is surjective.
    SecondType,
    /// The base has several quadratic extensions, so no single type applies.
    NotUniqueClass,
}

/// Finite bases: decided by enumerating the norm image. Infinite bases:
/// `NotUniqueClass` once two distinct non-trivial square classes are found.
pub fn dichotomy<F: Field>(k: &F) -> Result<Dichotomy> {
    if k.cardinality().is_some() {
        let t = k
            .elements()?
            .into_iter()
            .find(|x| !k.is_square(x))
            .expect("odd finite fields have non-squares");
        let l = QuadExt::new(k.clone(), t)?;
        return Ok(if l.norm_surjective()? {
            Dichotomy::SecondType
        } else {
            Dichotomy::FirstType
        });
    }
    let (two, three) = (k.from_i64(2), k.from_i64(3));
    if !k.is_square(&two) && !k.is_square(&three) && !k.is_square(&k.mul(&two, &three)) {
        Ok(Dichotomy::NotUniqueClass)
    } else {
        Err(Error::InfiniteBase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use std::collections::BTreeSet;

    fn ext(q: u64) -> QuadExt<PrimePowerField> {
        let k = PrimePowerField::from_order(q).unwrap();
        QuadExt::new(k.clone(), k.smallest_nonsquare()).unwrap()
    }

    fn f(k: &PrimePowerField, v: &[i64; 3]) -> Triple<Fq> {
        Triple::new(k.from_i64(v[0]), k.from_i64(v[1]), k.from_i64(v[2]))
    }

    #[test]
    fn b_membership_examples() {
        let k = PrimePowerField::new(7, 1).unwrap();
        for a in 1..7 {
            let a = k.from_i64(a);
            assert!(!b_set_membership(&k, &a, &k.neg(&a)));
        }
        assert!(!b_set_membership(&k, &k.from_i64(2), &k.from_i64(2)));
        assert!(b_set_membership(&k, &k.from_i64(3), &k.from_i64(3)));
    }

    #[test]
    fn b_membership_matches_h_anisotropy() {
        for q in [3u64, 5, 7] {
            let l = ext(q);
            let k = l.base();
            let els = k.elements().unwrap();
            for a in &els {
                for b in &els {
                    let aniso = h_ab_anisotropic(&l, a, b, &Budget::default()).unwrap();
                    assert_eq!(b_set_membership(k, a, b), aniso, "q={q} a={a} b={b}");
                    if let Some(crit) = b_general_criterion(k, a, b).unwrap() {
                        assert_eq!(crit, aniso, "q={q} a={a} b={b}");
                        assert!(!crit);
                    }
                }
            }
        }
    }

    #[test]
    fn m_set_counts() {
        for q in [3u64, 5, 7, 9, 11, 13] {
            let k = PrimePowerField::from_order(q).unwrap();
            assert_eq!(m1_set(&k).unwrap().len() as u64, (q + 1) / 2, "q={q}");
            assert_eq!(m2_set(&k).unwrap().len() as u64, (q + 3) / 2, "q={q}");
        }
    }

    #[test]
    fn c_to_b_examples() {
        let k = PrimePowerField::new(7, 1).unwrap();
        assert_eq!(from_c_to_b(&k, &f(&k, &[1, 3, 2])), None);
        assert_eq!(from_c_to_b(&k, &f(&k, &[4, 0, 2])), None);
        let (a, b) = from_c_to_b(&k, &f(&k, &[5, 1, 4])).unwrap();
        assert_eq!((a, b), (k.from_i64(3), k.from_i64(3)));
        assert!(admissible_via_b(&k, &f(&k, &[5, 1, 4])));
    }

    #[test]
    fn three_deciders_agree() {
        for q in [3u64, 5, 7, 9] {
            let l = ext(q);
            assert!(oracle_disagreements(&l, &Budget::default()).unwrap().is_empty(), "q={q}");
        }
    }

    #[test]
    fn transversal_examples() {
        let k3 = PrimePowerField::new(3, 1).unwrap();
        assert!(fq_transversal(&k3).unwrap().is_empty());
        assert!(bruteforce_admissible(&ext(3), &Budget::default()).unwrap().is_empty());
        let k7 = PrimePowerField::new(7, 1).unwrap();
        assert_eq!(
            fq_transversal(&k7).unwrap(),
            vec![f(&k7, &[5, 1, 4]), f(&k7, &[6, 1, 4])]
        );
        let k5 = PrimePowerField::new(5, 1).unwrap();
        let t5 = fq_transversal(&k5).unwrap();
        let c1s: Vec<_> = t5.iter().map(|c| c.c1).collect();
        assert_eq!(c1s, vec![k5.from_i64(2), k5.from_i64(4)]);
    }

    #[test]
    fn transversal_size_against_orbit_count() {
        let frozen = [(3u64, 0usize), (5, 2), (7, 2), (9, 4), (11, 4), (13, 6)];
        for (q, n) in frozen {
            let l = ext(q);
            let adm = groupoid::finite_admissible(&l).unwrap();
            let g = SemidirectGroup::new(l.clone(), 1).unwrap();
            let orbits = groupoid::orbits(&g, &adm).unwrap().orbits.len();
            assert_eq!(orbits, n, "q={q}");
            assert_eq!(fq_transversal(l.base()).unwrap().len(), n);
            assert_eq!(transversal_size_formula(q) as usize, n);
        }
    }

    #[test]
    fn classify_small_fields() {
        let b = Budget::default();
        let r3 = fq_classify(&PrimePowerField::new(3, 1).unwrap(), &b).unwrap();
        assert_eq!((r3.admissible_count, r3.isoclass_count), (0, 0));
        assert!(r3.all_checks_pass());

        let r7 = fq_classify(&PrimePowerField::new(7, 1).unwrap(), &b).unwrap();
        assert_eq!(r7.isoclass_count, 2);
        assert_eq!(r7.admissible_count, 12);
        assert!(r7.all_checks_pass(), "{:?}", r7.cross_checks);
        assert!(r7.skipped.is_empty());
        let json = serde_json::to_string(&r7).unwrap();
        assert!(json.contains("\"transversal\":[[5,1,4],[6,1,4]]"), "{json}");

        let r11 = fq_classify(&PrimePowerField::new(11, 1).unwrap(), &b).unwrap();
        assert_eq!(r11.isoclass_count, 4);
        assert!(r11.all_checks_pass());
        let skipped: BTreeSet<_> = r11.skipped.iter().map(String::as_str).collect();
        assert_eq!(
            skipped,
            BTreeSet::from(["closed_form_matches_bruteforce", "aut_order_four_bruteforce"])
        );
    }

    #[test]
    fn ordered_examples() {
        let p = ordered_predicates();
        let r = |a: i64, b: i64| Rational::new(a, b);
        let tn1 = Triple::new(r(1, 1), r(1, 1), r(-2, 1));
        assert!(p.in_tn1(&tn1) && p.in_c(&tn1) && p.in_cn1(&tn1));
        let tn0 = Triple::new(r(3, 4), r(0, 1), r(-1, 1));
        assert!(p.in_tn0(&tn0) && p.in_cn0(&tn0));
        // The quaternion triple lies in C but in neither type-N block.
        let h = square_ordered_summary().type_s;
        assert!(p.in_c(&h) && !p.in_cn0(&h) && !p.in_cn1(&h));
    }

    #[test]
    fn dichotomy_examples() {
        for q in [7u64, 9] {
            let k = PrimePowerField::from_order(q).unwrap();
            assert_eq!(dichotomy(&k).unwrap(), Dichotomy::SecondType);
        }
        assert_eq!(dichotomy(&Rationals).unwrap(), Dichotomy::NotUniqueClass);
    }

    #[test]
    fn ordered_grid_consistency() {
        let p = ordered_predicates();
        let quarter = |n: i64| Rational::new(n, 4);
        for k in -4..=4 {
            let c1 = Rational::new(1, 2) + Rational::new(k, 8);
            for b in -12..=12 {
                for d in -12..=12 {
                    let c = Triple::new(c1.clone(), quarter(b), quarter(d));
                    assert!(!p.in_tn0(&c) || p.in_cn0(&c));
                    assert!(!p.in_tn1(&c) || p.in_cn1(&c));
                    assert!(!(p.in_cn0(&c) && p.in_cn1(&c)));
                }
            }
        }
    }
}
