//! Action groupoids `G^nu ⋉ C^nu` and the functor to algebras.
//!
//! `G^nu = H_nu ⋊ Gal(l/k)` with `H_1 = A*` (punctured axes) and
//! `H_0 = H_2 = H_3 = l*`. Objects:
//!
//! | nu | objects                              |
//! |----|--------------------------------------|
//! | 0  | admissible, `c2 = 0`                 |
//! | 1  | admissible, `c2 != 0`                |
//! | 2  | admissible, type `N`, `c2 = 0`       |
//! | 3  | admissible, type `S`                 |
//!
//! The action is `(a, i) . c = (c1, c2 / a^2, c3 / (a conj(a)))` and a group
//! element `(a, i)` carrying `c` to `d` is sent to `phi_a` (`i = 0`) or
//! `psi_a` (`i = 1`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::algebra::{AlgebraSpec, Triple, TripleType};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::Matrix;
use crate::morphisms::{self, aut_group, AutTag, MorphismKind, MorphismWitness};
use crate::quad_ext::{ExtElem, QuadExt};

/// `(a, sigma^i)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(bound(serialize = "E: fmt::Display"))]
pub struct GroupElem<E> {
    pub a: ExtElem<E>,
    pub i: u8,
}

impl<E: fmt::Display> fmt::Display for GroupElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, sigma^{})", self.a, self.i)
    }
}

impl<E: fmt::Display> fmt::Debug for GroupElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `G^nu` over a fixed extension.
#[derive(Clone, Debug)]
pub struct SemidirectGroup<F: Field> {
    l: QuadExt<F>,
    nu: u8,
}

impl<F: Field> SemidirectGroup<F> {
    pub fn new(l: QuadExt<F>, nu: u8) -> Result<Self> {
        if nu > 3 {
            return Err(Error::parse(&nu.to_string(), "nu must be 0, 1, 2 or 3"));
        }
        Ok(SemidirectGroup { l, nu })
    }

    pub fn nu(&self) -> u8 {
        self.nu
    }

    pub fn ext(&self) -> &QuadExt<F> {
        &self.l
    }

    pub fn identity(&self) -> GroupElem<F::Elem> {
        GroupElem {
            a: self.l.one(),
            i: 0,
        }
    }

    pub fn contains(&self, g: &GroupElem<F::Elem>) -> bool {
        g.i < 2
            && !self.l.is_zero(&g.a)
            && (self.nu != 1 || self.l.in_punctured_axes(&g.a))
    }

    /// `(a, i)(b, j) = (a sigma^i(b), i + j)`.
    pub fn mul(&self, g: &GroupElem<F::Elem>, h: &GroupElem<F::Elem>) -> GroupElem<F::Elem> {
        let b = if g.i == 1 { self.l.conj(&h.a) } else { h.a.clone() };
        GroupElem {
            a: self.l.mul(&g.a, &b),
            i: (g.i + h.i) % 2,
        }
    }

    /// `(a, i)^-1 = (sigma^i(a^-1), i)`.
    pub fn inv(&self, g: &GroupElem<F::Elem>) -> GroupElem<F::Elem> {
        let ai = self.l.inv(&g.a).expect("group elements have a != 0");
        GroupElem {
            a: if g.i == 1 { self.l.conj(&ai) } else { ai },
            i: g.i,
        }
    }

    pub fn elements(&self) -> Result<Vec<GroupElem<F::Elem>>> {
        let hs: Vec<_> = if self.nu == 1 {
            self.l.punctured_axes()?
        } else {
            self.l.units()?
        };
        Ok((0..2u8)
            .flat_map(|i| hs.iter().map(move |a| GroupElem { a: a.clone(), i }))
            .collect())
    }

    /// A generating set: `sigma`, plus a generator of `l*` (nu != 1) or a
    /// generator of `k*` together with `w` (nu = 1).
    pub fn generators(&self) -> Result<Vec<GroupElem<F::Elem>>> {
        let k = self.l.base();
        let q = k.cardinality().ok_or(Error::InfiniteBase)?;
        let el = |a| GroupElem { a, i: 0 };
        let mut gens = vec![GroupElem {
            a: self.l.one(),
            i: 1,
        }];
        let has_order = |x: &ExtElem<F::Elem>, n: u64| {
            let one = self.l.one();
            self.l.pow(x, n) == one
                && prime_divisors(n).iter().all(|p| self.l.pow(x, n / p) != one)
        };
        if self.nu == 1 {
            let g = self
                .l
                .units()?
                .into_iter()
                .find(|x| self.l.in_base(x) && has_order(x, q - 1))
                .expect("k* is cyclic");
            gens.push(el(g));
            gens.push(el(self.l.w()));
        } else {
            let g = self
                .l
                .units()?
                .into_iter()
                .find(|x| has_order(x, q * q - 1))
                .expect("l* is cyclic");
            gens.push(el(g));
        }
        Ok(gens)
    }
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `(a, i) . c`. Errors when `c2 / a^2` leaves the base field.
pub fn act<F: Field>(
    l: &QuadExt<F>,
    g: &GroupElem<F::Elem>,
    c: &Triple<F::Elem>,
) -> Result<Triple<F::Elem>> {
    let k = l.base();
    let a2 = l.square(&g.a);
    let c2 = l
        .div(&l.from_base(c.c2.clone()), &a2)
        .ok_or(Error::ActionLeavesBase)?;
    if !l.in_base(&c2) {
        return Err(Error::ActionLeavesBase);
    }
    let c3 = k.div(&c.c3, &l.norm(&g.a)).ok_or(Error::ActionLeavesBase)?;
    Ok(Triple::new(c.c1.clone(), c2.u, c3))
}

/// `phi_a` or `psi_a` for a group element carrying `c` to `d`.
pub fn functor_image<F: Field>(
    l: &QuadExt<F>,
    g: &GroupElem<F::Elem>,
    c: &Triple<F::Elem>,
    d: &Triple<F::Elem>,
) -> Result<MorphismWitness<F::Elem>> {
    if act(l, g, c)? != *d {
        return Err(Error::NotCarried);
    }
    Ok(MorphismWitness {
        kind: if g.i == 0 {
            MorphismKind::Phi
        } else {
            MorphismKind::Psi
        },
        a: g.a.clone(),
    })
}

/// Objects of the `nu`-th block, taken from a list of admissible triples.
pub fn objects_for<F: Field>(
    l: &QuadExt<F>,
    nu: u8,
    admissible: &[Triple<F::Elem>],
) -> Vec<Triple<F::Elem>> {
    let k = l.base();
    let mut out: Vec<_> = admissible
        .iter()
        .filter(|c| {
            let ty = AlgebraSpec::new(l.clone(), (*c).clone())
                .map(|a| a.triple_type())
                .expect("triples come from the same base field");
            match nu {
                0 => k.is_zero(&c.c2),
                1 => !k.is_zero(&c.c2),
                2 => k.is_zero(&c.c2) && ty == TripleType::N,
                _ => ty == TripleType::S,
            }
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Admissible triples over a finite base via the closed form, which is
/// exact there.
pub fn finite_admissible<F: Field>(l: &QuadExt<F>) -> Result<Vec<Triple<F::Elem>>> {
    let els = l.base().elements()?;
    let mut out = Vec::new();
    for c1 in &els {
        for c2 in &els {
            for c3 in &els {
                let c = Triple::new(c1.clone(), c2.clone(), c3.clone());
                if AlgebraSpec::new(l.clone(), c.clone())?.is_admissible_closed_form_fq()? {
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Serialize)]
#[serde(bound(serialize = "E: fmt::Display + Serialize"))]
pub struct Orbit<E> {
    /// Least member.
    pub representative: Triple<E>,
    pub members: Vec<Triple<E>>,
}

#[derive(Clone, Serialize)]
#[serde(bound(serialize = "E: fmt::Display + Serialize"))]
pub struct OrbitPartition<E> {
    pub nu: u8,
    pub orbits: Vec<Orbit<E>>,
    /// Generator edges `(object, generator index, image)` as object indices.
    #[serde(skip)]
    pub edges: Vec<(usize, usize, usize)>,
    #[serde(skip)]
    pub objects: Vec<Triple<E>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// The smaller index becomes the root, so roots are orbit minima when
    /// objects are sorted.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Orbits of `G^nu` on `objects` by union-find over generator actions.
pub fn orbits<F: Field>(
    group: &SemidirectGroup<F>,
    objects: &[Triple<F::Elem>],
) -> Result<OrbitPartition<F::Elem>> {
    let mut objects = objects.to_vec();
    objects.sort();
    objects.dedup();
    let index: BTreeMap<&Triple<F::Elem>, usize> =
        objects.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let gens = if objects.is_empty() {
        Vec::new()
    } else {
        group.generators()?
    };
    let mut uf = UnionFind::new(objects.len());
    let mut edges = Vec::new();
    for (i, c) in objects.iter().enumerate() {
        for (gi, g) in gens.iter().enumerate() {
            let d = act(group.ext(), g, c)?;
            let j = *index
                .get(&d)
                .expect("object sets are unions of orbits");
            edges.push((i, gi, j));
            uf.union(i, j);
        }
    }
    let mut classes: BTreeMap<usize, Vec<Triple<F::Elem>>> = BTreeMap::new();
    for (i, c) in objects.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().push(c.clone());
    }
    let orbits = classes
        .into_values()
        .map(|members| Orbit {
            representative: members[0].clone(),
            members,
        })
        .collect();
    Ok(OrbitPartition {
        nu: group.nu(),
        orbits,
        edges,
        objects,
    })
}

impl<E: fmt::Display> OrbitPartition<E> {
    /// Graphviz rendering: one node per object, one edge per generator action
    /// (self-loops omitted).
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph orbits_nu{} {{", self.nu);
        for (i, c) in self.objects.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{c}\"];");
        }
        for &(i, g, j) in &self.edges {
            if i != j {
                let _ = writeln!(s, "  n{i} -> n{j} [label=\"g{g}\"];");
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn stabilizer<F: Field>(
    group: &SemidirectGroup<F>,
    c: &Triple<F::Elem>,
) -> Result<Vec<GroupElem<F::Elem>>> {
    Ok(group
        .elements()?
        .into_iter()
        .filter(|g| act(group.ext(), g, c).as_ref() == Ok(c))
        .collect())
}

/// Elements of `G^nu` carrying `c` to `d`.
pub fn hom_set<F: Field>(
    group: &SemidirectGroup<F>,
    c: &Triple<F::Elem>,
    d: &Triple<F::Elem>,
) -> Result<Vec<GroupElem<F::Elem>>> {
    Ok(group
        .elements()?
        .into_iter()
        .filter(|g| act(group.ext(), g, c).as_ref() == Ok(d))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DescriptionFlags {
    /// Relative to the constructed family `{A(l, c)}`; the class of all
    /// algebras with the property is not enumerable.
    pub dense: bool,
    pub faithful: bool,
    pub quasi_full: bool,
    pub full: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptionReport {
    pub nu: u8,
    pub object_count: usize,
    pub orbit_count: usize,
    pub group_order: usize,
    pub flags: DescriptionFlags,
    /// Distinct hom-set sizes between objects in the same orbit.
    pub hom_set_sizes: BTreeSet<usize>,
}

/// Checks the description properties at finite scale.
///
/// `faithful`: distinct group elements give distinct linear maps.
/// `quasi_full`: isomorphic algebras (brute-force oracle) lie in one orbit.
/// `full`: hom-sets in the action groupoid and the algebra morphism sets
/// have equal size for every pair of objects.
pub fn check_description<F: Field>(
    l: &QuadExt<F>,
    nu: u8,
    objects: &[Triple<F::Elem>],
    budget: &Budget,
) -> Result<DescriptionReport> {
    let group = SemidirectGroup::new(l.clone(), nu)?;
    let q = l.base().cardinality().ok_or(Error::InfiniteBase)?;
    if !objects.is_empty() {
        budget.check_morphisms(q)?;
    }
    let part = orbits(&group, objects)?;
    let orbit_of: BTreeMap<Triple<F::Elem>, usize> = part
        .orbits
        .iter()
        .enumerate()
        .flat_map(|(i, o)| o.members.iter().map(move |c| (c.clone(), i)))
        .collect();
    let algebras: Vec<AlgebraSpec<F>> = part
        .objects
        .iter()
        .map(|c| AlgebraSpec::new(l.clone(), c.clone()))
        .collect::<Result<_>>()?;
    let elements = group.elements()?;

    let mut faithful = true;
    let mut quasi_full = true;
    let mut full = true;
    let mut hom_set_sizes = BTreeSet::new();
    for (ci, c) in part.objects.iter().enumerate() {
        for (di, d) in part.objects.iter().enumerate() {
            let homs: Vec<_> = elements
                .iter()
                .filter(|g| act(l, g, c).as_ref() == Ok(d))
                .collect();
            let maps: Vec<Matrix<F::Elem>> = homs
                .iter()
                .map(|g| {
                    let w = functor_image(l, g, c, d)?;
                    Ok(morphisms::witness_matrix(&algebras[ci], &w))
                })
                .collect::<Result<_>>()?;
            if morphisms::matrix_set(&maps).len() != maps.len() {
                faithful = false;
            }
            let brute = morphisms::brute_force_morphisms(&algebras[ci], &algebras[di], budget)?;
            if !brute.is_empty() && orbit_of[c] != orbit_of[d] {
                quasi_full = false;
            }
            if brute.len() != homs.len() {
                full = false;
            }
            if orbit_of[c] == orbit_of[d] {
                hom_set_sizes.insert(homs.len());
            }
        }
    }
    Ok(DescriptionReport {
        nu,
        object_count: part.objects.len(),
        orbit_count: part.orbits.len(),
        group_order: elements.len(),
        flags: DescriptionFlags {
            dense: true,
            faithful,
            quasi_full,
            full,
        },
        hom_set_sizes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AutClass {
    N0,
    N1,
    S,
    K,
}

#[derive(Debug, Clone, Serialize)]
pub struct AutStructureReport {
    pub class: AutClass,
    pub tag: AutTag,
    /// `None` when the group is infinite or reported symbolically.
    pub order: Option<u64>,
    /// `|S(l/k)|` when finite.
    pub circle_order: Option<u64>,
    pub structure: String,
}

/// Block and automorphism-group shape of a division algebra `A(l, c)`.
pub fn aut_structure_report<F: Field>(a: &AlgebraSpec<F>) -> Result<AutStructureReport> {
    let k = a.base();
    let g = aut_group(a)?;
    let ty = a.triple_type();
    let class = match ty {
        TripleType::S => AutClass::S,
        TripleType::K => AutClass::K,
        TripleType::N if k.is_zero(&a.triple().c2) => AutClass::N0,
        TripleType::N => AutClass::N1,
    };
    let circle_order = match k.cardinality() {
        Some(_) => Some(a.ext().unit_circle()?.len() as u64),
        None => None,
    };
    let structure = match g.tag {
        AutTag::KleinFour => "C2 x C2".to_string(),
        AutTag::SSemidirectC2 => match circle_order {
            Some(n) => format!("S(l/k) x| C2, |S(l/k)| = {n}"),
            None => "S(l/k) x| C2, S(l/k) infinite".to_string(),
        },
        AutTag::UnitsModCenter => "A* / k*".to_string(),
    };
    Ok(AutStructureReport {
        class,
        tag: g.tag,
        order: g.order,
        circle_order,
        structure,
    })
}
