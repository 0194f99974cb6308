//! Smith normal form and cokernels of integer matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::matrix::IntMatrix;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, its entries
/// nonnegative and each dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// The diagonal of `D`, including trailing zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smallest nonzero |entry| in the block below and right of `(t, t)`,
/// first in row-major order on ties.
fn pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for r in t..a.rows() {
        for c in t..a.cols() {
            let x = a.get(r, c);
            if x.is_zero() {
                continue;
            }
            let x = x.abs();
            if best.as_ref().is_none_or(|(_, _, b)| x < *b) {
                best = Some((r, c, x));
            }
        }
    }
    best.map(|(r, c, _)| (r, c))
}

pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        let Some((pr, pc)) = pivot(&d, t) else {
            break;
        };
        d.swap_rows(t, pr);
        u.swap_rows(t, pr);
        d.swap_cols(t, pc);
        v.swap_cols(t, pc);

        let p = d.get(t, t).clone();
        let mut dirty = false;
        for r in t + 1..m {
            let q = d.get(r, t).div_floor(&p);
            if !q.is_zero() {
                d.add_row(r, t, &-&q);
                u.add_row(r, t, &-&q);
            }
            dirty |= !d.get(r, t).is_zero();
        }
        for c in t + 1..n {
            let q = d.get(t, c).div_floor(&p);
            if !q.is_zero() {
                d.add_col(c, t, &-&q);
                v.add_col(c, t, &-&q);
            }
            dirty |= !d.get(t, c).is_zero();
        }
        if dirty {
            // a remainder smaller than the pivot is left; pick again
            continue;
        }
        let offender = (t + 1..m).find(|&r| (t + 1..n).any(|c| !d.get(r, c).is_multiple_of(&p)));
        if let Some(r) = offender {
            d.add_row(t, r, &BigInt::one());
            u.add_row(t, r, &BigInt::one());
            continue;
        }
        if p.is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    SnfResult { u, d, v }
}

/// A finitely generated abelian group `Z^free ⊕ Z/d_1 ⊕ …` with
/// `2 ≤ d_1 | d_2 | …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// Canonical group from a list of cyclic orders: 0 gives a free factor,
    /// 1 vanishes.
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let mut free_rank = 0;
        let mut primes: Vec<BigInt> = Vec::new();
        for o in orders {
            let o = o.abs();
            if o.is_zero() {
                free_rank += 1;
            } else if !o.is_one() {
                primes.push(o);
            }
        }
        // invariant factors from an arbitrary list: repeatedly combine via gcd/lcm
        let mut torsion = primes;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..torsion.len() {
                for j in i + 1..torsion.len() {
                    if !torsion[j].is_multiple_of(&torsion[i]) {
                        let g = torsion[i].gcd(&torsion[j]);
                        let l = torsion[i].lcm(&torsion[j]);
                        torsion[i] = g;
                        torsion[j] = l;
                        changed = true;
                    }
                }
            }
            torsion.retain(|x| !x.is_one());
            torsion.sort();
        }
        AbelianGroup { free_rank, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut orders: Vec<BigInt> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        orders.extend(std::iter::repeat_n(BigInt::zero(), self.free_rank + other.free_rank));
        Self::from_cyclic_orders(&orders)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" + "))
    }
}

struct Divisor<'a>(&'a BigInt);

impl Serialize for Divisor<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(x) => s.serialize_u64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AbelianGroup", 3)?;
        st.serialize_field("free_rank", &self.free_rank)?;
        let torsion: Vec<Divisor> = self.torsion.iter().map(Divisor).collect();
        st.serialize_field("torsion", &torsion)?;
        st.serialize_field("display", &self.to_string())?;
        st.end()
    }
}

/// `Z^rows` modulo the column span of `a`.
pub fn cokernel(a: &IntMatrix) -> AbelianGroup {
    let snf = smith_normal_form(a);
    let diag = snf.diagonal();
    let mut orders: Vec<BigInt> = diag.clone();
    // rows beyond the diagonal are untouched free coordinates
    orders.extend(std::iter::repeat_n(BigInt::zero(), a.rows() - diag.len()));
    AbelianGroup::from_cyclic_orders(&orders)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn random_matrix(rng: &mut StdRng, max: usize) -> IntMatrix {
        let r = rng.gen_range(1..=max);
        let c = rng.gen_range(1..=max);
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        IntMatrix::from_rows(&rows).unwrap()
    }

    fn check_invariants(a: &IntMatrix, s: &SnfResult) {
        assert_eq!(&(&s.u * a) * &s.v, s.d, "U A V = D for {a}");
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
        assert!(s.d.is_diagonal());
        let diag = s.diagonal();
        assert!(diag.iter().all(|x| !x.is_negative()));
        for w in diag.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]) || w[0].is_zero() && w[1].is_zero(), "{diag:?}");
        }
    }

    /// gcd of all k×k minors, by enumeration.
    fn minor_gcd(a: &IntMatrix, k: usize) -> BigInt {
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = subsets(n - 1, k);
            for mut s in subsets(n - 1, k - 1) {
                s.push(n - 1);
                out.push(s);
            }
            out
        }
        let mut g = BigInt::zero();
        for rs in subsets(a.rows(), k) {
            for cs in subsets(a.cols(), k) {
                let rows: Vec<Vec<i64>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| a.get(r, c).to_i64().unwrap()).collect())
                    .collect();
                g = g.gcd(&IntMatrix::from_rows(&rows).unwrap().determinant().unwrap());
            }
        }
        g
    }

    #[test]
    fn small_examples() {
        let s = smith_normal_form(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        let s = smith_normal_form(&IntMatrix::diagonal(&[2, 3]));
        assert_eq!(s.diagonal(), big(&[1, 6]));
        for m in 0..5 {
            assert_eq!(smith_normal_form(&IntMatrix::diagonal(&[m])).diagonal(), big(&[m]));
        }
        let empty = smith_normal_form(&IntMatrix::zeros(0, 3));
        assert_eq!(empty.d.rows(), 0);
        assert_eq!(cokernel(&IntMatrix::zeros(0, 3)), AbelianGroup::free(0));
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel(&IntMatrix::zeros(2, 2)).to_string(), "Z^2");
        let mut a = IntMatrix::zeros(3, 2);
        a.set(0, 0, BigInt::one());
        a.set(1, 1, BigInt::from(5));
        assert_eq!(cokernel(&a).to_string(), "Z + Z/5");
        assert_eq!(cokernel(&IntMatrix::diagonal(&[2, 3])).to_string(), "Z/6");
        assert_eq!(cokernel(&IntMatrix::diagonal(&[1, 1])).to_string(), "0");
        assert_eq!(cokernel(&IntMatrix::diagonal(&[0, 4, 6])).to_string(), "Z + Z/2 + Z/12");
    }

    #[test]
    fn cyclic_orders_are_canonical() {
        let g = AbelianGroup::from_cyclic_orders(&big(&[4, 6, 0, 1]));
        assert_eq!(g.free_rank, 1);
        assert_eq!(g.torsion, big(&[2, 12]));
        let h = AbelianGroup::free(2).direct_sum(&AbelianGroup::from_cyclic_orders(&big(&[5])));
        assert_eq!(h.to_string(), "Z^2 + Z/5");
    }

    #[test]
    fn random_matrices_satisfy_all_invariants() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for i in 0..500 {
            let a = random_matrix(&mut rng, 8);
            let s = smith_normal_form(&a);
            check_invariants(&a, &s);
            if a.rows() <= 5 && a.cols() <= 5 {
                let diag = s.diagonal();
                let mut prod = BigInt::one();
                for k in 1..=diag.len() {
                    prod *= &diag[k - 1];
                    assert_eq!(prod, minor_gcd(&a, k), "case {i}: {a}");
                }
                let rank_a = (1..=diag.len()).take_while(|&k| !minor_gcd(&a, k).is_zero()).count();
                assert_eq!(s.rank(), rank_a);
            }
        }
    }

    #[test]
    fn cokernel_is_invariant_under_unimodular_changes() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 6);
            let mut b = a.clone();
            for _ in 0..6 {
                let q = BigInt::from(rng.gen_range(-3..=3));
                if rng.gen_bool(0.5) && b.rows() > 1 {
                    let (x, y) = (rng.gen_range(0..b.rows()), rng.gen_range(0..b.rows()));
                    if x != y {
                        b.add_row(x, y, &q);
                    }
                    b.swap_rows(0, b.rows() - 1);
                } else if b.cols() > 1 {
                    let (x, y) = (rng.gen_range(0..b.cols()), rng.gen_range(0..b.cols()));
                    if x != y {
                        b.add_col(x, y, &q);
                    }
                    b.negate_row(0);
                }
            }
            assert_eq!(cokernel(&a), cokernel(&b));
        }
    }

    #[test]
    fn deterministic() {
        let a = IntMatrix::from_rows(&[vec![4, 6, 2], vec![6, 9, 3], vec![2, -3, 7]]).unwrap();
        assert_eq!(smith_normal_form(&a), smith_normal_form(&a));
    }
}
