//! Action of twist words on the first homology of a closed surface.
//!
//! Basis order is `u_1, v_1, …, u_g, v_g` with `⟨u_i, v_i⟩ = 1`. A twist
//! `t_c^n` acts by the transvection `x ↦ x + n⟨x, c⟩c`, so for `g = 1` and
//! `c = u_1` it sends `v_1 ↦ v_1 − u_1`. Matrices act on column vectors and a
//! word's matrix is the product of its letters' matrices in written order,
//! which makes the rightmost letter act first.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::IntMatrix;
use crate::model::{ModelKind, SurfaceModel};
use crate::planar::{RelationWord, Verdict};
use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("class of length {found} in genus {genus}")]
    Dimension { genus: usize, found: usize },
    #[error("symplectic check needs an even square matrix, got {rows}x{cols}")]
    OddDimension { rows: usize, cols: usize },
    #[error("no homology class assigned to `{0}`")]
    Unassigned(String),
    #[error("model is not a closed surface")]
    NotClosed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SymplecticSpace {
    pub genus: usize,
}

pub type HomologyClass = Vec<i64>;

impl SymplecticSpace {
    pub fn new(genus: usize) -> Self {
        SymplecticSpace { genus }
    }

    pub fn dim(&self) -> usize {
        2 * self.genus
    }

    pub fn basis_label(&self, i: usize) -> String {
        format!("{}{}", if i % 2 == 0 { 'u' } else { 'v' }, i / 2 + 1)
    }

    /// `e_i` for basis index `i`.
    pub fn basis(&self, i: usize) -> HomologyClass {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }

    /// `J` with `⟨x, y⟩ = xᵀ J y`.
    pub fn form(&self) -> IntMatrix {
        let mut j = IntMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.genus {
            j.set(2 * i, 2 * i + 1, BigInt::from(1));
            j.set(2 * i + 1, 2 * i, BigInt::from(-1));
        }
        j
    }

    pub fn pairing(&self, x: &[i64], y: &[i64]) -> Result<i64, HomologyError> {
        self.check(x)?;
        self.check(y)?;
        Ok((0..self.genus).map(|i| x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i]).sum())
    }

    fn check(&self, c: &[i64]) -> Result<(), HomologyError> {
        if c.len() != self.dim() {
            return Err(HomologyError::Dimension {
                genus: self.genus,
                found: c.len(),
            });
        }
        Ok(())
    }

    /// Matrix of `x ↦ x + n⟨x, c⟩c`.
    pub fn transvection(&self, c: &[i64], n: i64) -> Result<IntMatrix, HomologyError> {
        self.check(c)?;
        let mut m = IntMatrix::identity(self.dim());
        // ⟨e_j, c⟩ for each basis vector e_j
        let pair: Vec<i64> = (0..self.dim())
            .map(|j| self.pairing(&self.basis(j), c).expect("basis has the right length"))
            .collect();
        for (r, &cr) in c.iter().enumerate() {
            for (col, &p) in pair.iter().enumerate() {
                let add = BigInt::from(n) * cr * p;
                if !add.is_zero() {
                    let v = m.get(r, col) + add;
                    m.set(r, col, v);
                }
            }
        }
        Ok(m)
    }

    /// True iff `Mᵀ J M = J`.
    pub fn symplectic_check(m: &IntMatrix) -> Result<bool, HomologyError> {
        if !m.is_square() || m.rows() % 2 == 1 {
            return Err(HomologyError::OddDimension {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let j = SymplecticSpace::new(m.rows() / 2).form();
        Ok(&(&m.transpose() * &j) * m == j)
    }
}

/// Homology classes of the twist curves of a closed model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassTable {
    pub space: SymplecticSpace,
    pub classes: BTreeMap<String, HomologyClass>,
}

impl ClassTable {
    pub fn new(genus: usize, classes: impl IntoIterator<Item = (String, HomologyClass)>) -> Result<Self, HomologyError> {
        let space = SymplecticSpace::new(genus);
        let classes: BTreeMap<_, _> = classes.into_iter().collect();
        for c in classes.values() {
            space.check(c)?;
        }
        Ok(ClassTable { space, classes })
    }

    pub fn from_model(model: &SurfaceModel) -> Result<Self, HomologyError> {
        let ModelKind::ClosedGenus { genus } = model.kind() else {
            return Err(HomologyError::NotClosed);
        };
        Self::new(
            genus,
            model
                .curves()
                .iter()
                .filter_map(|c| c.class.clone().map(|v| (c.name.clone(), v))),
        )
    }

    pub fn class(&self, name: &str) -> Result<&HomologyClass, HomologyError> {
        self.classes
            .get(name)
            .ok_or_else(|| HomologyError::Unassigned(name.to_string()))
    }

    /// Product of transvections, letters in written order. Symbols without a
    /// class are rejected; abstract diffeomorphisms only disappear through
    /// capping, which maps them to the identity symbol `1`.
    pub fn word_to_matrix(&self, w: &Word) -> Result<IntMatrix, HomologyError> {
        let mut acc = IntMatrix::identity(self.space.dim());
        for p in w.letters() {
            if p.is_identity() || p.exp == 0 {
                continue;
            }
            let t = self.space.transvection(self.class(&p.symbol)?, p.exp)?;
            acc = &acc * &t;
        }
        Ok(acc)
    }

    pub fn check_identity_homology(&self, r: &RelationWord) -> Result<Verdict, HomologyError> {
        let l = self.word_to_matrix(&r.lhs)?;
        let rt = self.word_to_matrix(&r.rhs)?;
        for c in 0..self.space.dim() {
            let (lc, rc) = (l.column(c), rt.column(c));
            if lc != rc {
                let show = |v: Vec<BigInt>| v.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ");
                return Ok(Verdict::Fails {
                    witness: self.space.basis_label(c),
                    lhs_image: show(lc),
                    rhs_image: show(rc),
                });
            }
        }
        Ok(Verdict::Holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn transvection_examples() {
        let s = SymplecticSpace::new(1);
        assert!(s.transvection(&[0, 0], 3).unwrap().is_identity());
        let t = s.transvection(&[1, 0], 1).unwrap();
        // columns are images: u1 ↦ u1, v1 ↦ v1 − u1
        assert_eq!(t, IntMatrix::from_rows(&[vec![1, -1], vec![0, 1]]).unwrap());
        let g3 = SymplecticSpace::new(3);
        let c = [1, -2, 0, 1, 3, 0];
        for (a, b) in [(1, 2), (-3, 1), (4, -4)] {
            let lhs = &g3.transvection(&c, a).unwrap() * &g3.transvection(&c, b).unwrap();
            assert_eq!(lhs, g3.transvection(&c, a + b).unwrap());
        }
        assert!(s.transvection(&[1, 0, 0], 1).is_err());
    }

    #[test]
    fn symplectic_checks() {
        assert!(SymplecticSpace::symplectic_check(&IntMatrix::identity(4)).unwrap());
        let mut d = IntMatrix::identity(4);
        d.set(0, 0, BigInt::from(2));
        assert!(!SymplecticSpace::symplectic_check(&d).unwrap());
        assert!(SymplecticSpace::symplectic_check(&IntMatrix::identity(3)).is_err());
    }

    #[test]
    fn random_transvections_are_symplectic_and_natural() {
        let s = SymplecticSpace::new(3);
        let mut rng = StdRng::seed_from_u64(3);
        let random_class = |rng: &mut StdRng| -> Vec<i64> { (0..6).map(|_| rng.gen_range(-3..=3)).collect() };
        for _ in 0..50 {
            // P from a few transvections, with its inverse built alongside
            let mut p = IntMatrix::identity(6);
            let mut p_inv = IntMatrix::identity(6);
            for _ in 0..4 {
                let c = random_class(&mut rng);
                let n = rng.gen_range(-2..=2);
                p = &p * &s.transvection(&c, n).unwrap();
                p_inv = &s.transvection(&c, -n).unwrap() * &p_inv;
            }
            assert!(p_inv.try_mul(&p).unwrap().is_identity());
            let c = random_class(&mut rng);
            let n = rng.gen_range(-3..=3);
            let t = s.transvection(&c, n).unwrap();
            assert!(SymplecticSpace::symplectic_check(&t).unwrap());
            assert!(SymplecticSpace::symplectic_check(&p).unwrap());
            let pc: Vec<i64> = p
                .apply(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
                .unwrap()
                .iter()
                .map(|x| i64::try_from(x).unwrap())
                .collect();
            assert_eq!(&(&p * &t) * &p_inv, s.transvection(&pc, n).unwrap());
        }
    }

    fn table() -> ClassTable {
        ClassTable::new(
            3,
            [
                ("a1", vec![1, 0, 0, 0, 0, 0]),
                ("a2", vec![0, 0, 1, 0, 0, 0]),
                ("b", vec![0, 0, 0, 0, 1, 0]),
                ("b1", vec![0, 1, 0, 0, 0, 0]),
            ]
            .map(|(n, c)| (n.to_string(), c)),
        )
        .unwrap()
    }

    #[test]
    fn word_matrices() {
        let t = table();
        assert!(t.word_to_matrix(&Word::empty()).unwrap().is_identity());
        assert!(t.word_to_matrix(&w("1 a1 a1^-1")).unwrap().is_identity());
        let ab = t.word_to_matrix(&w("a1 b1")).unwrap();
        let a = t.word_to_matrix(&w("a1")).unwrap();
        let b = t.word_to_matrix(&w("b1")).unwrap();
        assert_eq!(ab, &a * &b);
        let comm = t.word_to_matrix(&w("[a1^2 a2^-1, b1^3]")).unwrap();
        let u = t.word_to_matrix(&w("a1^2 a2^-1")).unwrap();
        let v = t.word_to_matrix(&w("b1^3")).unwrap();
        let u_inv = t.word_to_matrix(&w("a2 a1^-2")).unwrap();
        let v_inv = t.word_to_matrix(&w("b1^-3")).unwrap();
        assert_eq!(comm, &(&(&u * &v) * &u_inv) * &v_inv);
        assert_eq!(t.word_to_matrix(&w("phi")).unwrap_err(), HomologyError::Unassigned("phi".into()));
    }

    #[test]
    fn identity_checks() {
        let t = table();
        let holds = RelationWord {
            lhs: Word::empty(),
            rhs: w("[a1 a2^-1, b^5]"),
        };
        assert!(t.check_identity_homology(&holds).unwrap().holds());
        let fails = RelationWord {
            lhs: w("b^5"),
            rhs: w("b^6"),
        };
        match t.check_identity_homology(&fails).unwrap() {
            Verdict::Fails { witness, .. } => assert_eq!(witness, "v3"),
            Verdict::Holds => panic!("different powers agree"),
        }
    }
}
