//! Exact Gaussian elimination over a [`Field`]. Pivot = first nonzero entry.

use crate::field::Field;

pub type Matrix<E> = Vec<Vec<E>>;

/// Reduced row echelon form and the pivot columns.
pub fn rref<F: Field>(k: &F, m: &Matrix<F::Elem>) -> (Matrix<F::Elem>, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !k.is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(r, p);
        let inv = k.inv(&a[r][c]).expect("pivot is nonzero");
        for x in a[r].iter_mut() {
            *x = k.mul(x, &inv);
        }
        for i in 0..rows {
            if i != r && !k.is_zero(&a[i][c]) {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = k.mul(&f, &a[r][j]);
                    a[i][j] = k.sub(&a[i][j], &d);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<F: Field>(k: &F, m: &Matrix<F::Elem>) -> usize {
    rref(k, m).1.len()
}

/// Basis of `{x : m x = 0}`.
pub fn kernel<F: Field>(k: &F, m: &Matrix<F::Elem>, cols: usize) -> Vec<Vec<F::Elem>> {
    let (r, pivots) = rref(k, m);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![k.zero(); cols];
            v[free] = k.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = k.neg(&r[row][free]);
            }
            v
        })
        .collect()
}

pub fn det<F: Field>(k: &F, m: &Matrix<F::Elem>) -> F::Elem {
    let n = m.len();
    let mut a = m.clone();
    let mut d = k.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !k.is_zero(&a[i][c])) else {
            return k.zero();
        };
        if p != c {
            a.swap(p, c);
            d = k.neg(&d);
        }
        d = k.mul(&d, &a[c][c]);
        let inv = k.inv(&a[c][c]).expect("pivot is nonzero");
        for i in c + 1..n {
            if !k.is_zero(&a[i][c]) {
                let f = k.mul(&a[i][c], &inv);
                for j in c..n {
                    let s = k.mul(&f, &a[c][j]);
                    a[i][j] = k.sub(&a[i][j], &s);
                }
            }
        }
    }
    d
}

pub fn mat_vec<F: Field>(k: &F, m: &Matrix<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(k.zero(), |acc, (a, b)| k.add(&acc, &k.mul(a, b)))
        })
        .collect()
}

/// Whether two families of row vectors span the same subspace.
pub fn same_span<F: Field>(k: &F, a: &[Vec<F::Elem>], b: &[Vec<F::Elem>]) -> bool {
    let ra = rank(k, &a.to_vec());
    let rb = rank(k, &b.to_vec());
    let both: Matrix<F::Elem> = a.iter().chain(b).cloned().collect();
    ra == rb && rank(k, &both) == ra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Rationals};
    use crate::finite_field::PrimePowerField;

    fn r(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter()
            .map(|row| row.iter().map(|&x| Rational::from(x)).collect())
            .collect()
    }

    #[test]
    fn determinant_and_rank() {
        let k = Rationals;
        let m = r(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]);
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(det(&k, &m), Rational::zero());
        assert_eq!(rank(&k, &m), 2);
        let m = r(&[&[0, 1], &[1, 0]]);
        assert_eq!(det(&k, &m), Rational::from(-1));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let k = Rationals;
        let m = r(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let ker = kernel(&k, &m, 4);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(mat_vec(&k, &m, v).iter().all(Rational::is_zero));
        }
    }

    #[test]
    fn finite_field_determinant_matches_cofactor_expansion() {
        let k = PrimePowerField::new(5, 1).unwrap();
        let els = k.elements().unwrap();
        for a in &els {
            for b in &els {
                let m = vec![vec![a.clone(), b.clone()], vec![k.from_i64(3), a.clone()]];
                let expect = k.sub(&k.mul(a, a), &k.mul(b, &k.from_i64(3)));
                assert_eq!(det(&k, &m), expect);
            }
        }
    }

    #[test]
    fn spans() {
        let k = Rationals;
        let a = r(&[&[1, 0, 1], &[0, 1, 0]]);
        let b = r(&[&[1, 1, 1], &[1, -1, 1]]);
        assert!(same_span(&k, &a, &b));
        assert!(!same_span(&k, &a, &r(&[&[1, 0, 0]])));
    }
}
