//! Spheres with holes: the twist catalog, push maps, the daisy family and
//! the power relation, with exact verification through the groupoid action.
//!
//! Picture the model with δ as a small central boundary and the holes
//! `1..d` placed counterclockwise around it. The basepoint `v0` sits on δ;
//! the arc `e_l` runs counterclockwise along δ and then radially out to hole
//! `l`, where `b_l` is the boundary loop. With `γ_l = e_l b_l e_l⁻¹` and
//! `Δ = (γ_1 ⋯ γ_d)⁻¹` (the loop around δ), a twist about a curve separating
//! a cyclic run `S` of holes from δ and the rest fixes every `b_l`, fixes
//! `e_l` for `l ∉ S`, and sends `e_l ↦ W_l · e_l` for `l ∈ S`:
//!
//! * `S = {i..j}` not passing hole d → 1: `W = (γ_i ⋯ γ_j)⁻¹` for every `l`;
//! * `S` wrapping, with complement run `T` (which then sits between the ends
//!   of `S`): `W_l = γ_T Δ` below `T` and `W_l = Δ γ_T` above it, where
//!   `γ_T` is the product over `T` in increasing order.
//!
//! The boundary twists `a_i` and the outer twist δ are the cases `S = {i}` and
//! `S = {1..d}`. Names: `delta`, `a<i>`, `x<i>` for the curve enclosing every
//! hole except `i`, and `c<i>-<j>` for other runs from `i` to `j`.
//!
//! The catalog also carries `rot`, the rotation of the picture by one petal
//! (hole `l` to hole `l+1`), slid back along δ so that it fixes `v0`. It
//! conjugates the twist about each run onto the twist about the shifted run,
//! which ties the wrapping formula to the plain one; every model is checked
//! against those records when it is built.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::groupoid::{
    AutomorphismTable, EdgeGen, EdgeKind, GenId, GeneratorSystem, Letter, VertexId,
};
use crate::model::{
    CatalogError, ConjugationRecord, CurveEntry, CurveKind, CyclicInterval, ElementEntry, ModelKind, SurfaceModel,
    TwistAction,
};
use crate::word::{MappingClass, Word};

pub const DELTA: &str = "delta";
pub const ROTATION: &str = "rot";

pub fn hole_curve(i: usize) -> String {
    format!("a{i}")
}

pub fn complement_curve(i: usize) -> String {
    format!("x{i}")
}

/// Left and right sides of `α ∪ δ` inside its pair of pants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcOrientation {
    Clockwise,
    Counterclockwise,
}

/// An arc based at δ enclosing a cyclic run of holes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ArcSpec {
    pub enclosed: CyclicInterval,
    pub orientation: ArcOrientation,
}

impl ArcSpec {
    pub fn clockwise(enclosed: CyclicInterval) -> Self {
        ArcSpec {
            enclosed,
            orientation: ArcOrientation::Clockwise,
        }
    }
}

/// A relation `lhs = rhs` between two twist words of one model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationWord {
    pub lhs: MappingClass,
    pub rhs: MappingClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails {
        /// Generator whose images differ.
        witness: String,
        lhs_image: String,
        rhs_image: String,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Sign of the loop inserted by a positive twist relative to the table in
/// the module docs. Pinned by the lantern relation in [`check_anchor`].
const TWIST_SIGN: i64 = 1;

fn interval_name(s: &CyclicInterval) -> String {
    if s.len + 1 == s.holes {
        let missing = s.complement().expect("proper run").start;
        complement_curve(missing)
    } else {
        format!("c{}-{}", s.start, s.end())
    }
}

struct Loops {
    sys: GeneratorSystem,
    /// `γ_l` as letters, index `l - 1`.
    gamma: Vec<Vec<Letter>>,
}

impl Loops {
    fn new(holes: usize) -> Self {
        let mut gens = Vec::with_capacity(2 * holes);
        for i in 1..=holes {
            gens.push(EdgeGen {
                name: format!("e{i}"),
                source: VertexId(0),
                target: VertexId(i),
                kind: EdgeKind::Arc,
            });
            gens.push(EdgeGen {
                name: format!("b{i}"),
                source: VertexId(i),
                target: VertexId(i),
                kind: EdgeKind::BoundaryLoop,
            });
        }
        let sys = GeneratorSystem::new(holes + 1, gens).expect("static generator system");
        let gamma = (1..=holes)
            .map(|i| {
                let e = Letter::new(GenId(2 * (i - 1)), false);
                let b = Letter::new(GenId(2 * (i - 1) + 1), false);
                vec![e, b, e.inv()]
            })
            .collect();
        Loops { sys, gamma }
    }

    fn arc(&self, l: usize) -> GenId {
        GenId(2 * (l - 1))
    }

    fn product(&self, holes: impl IntoIterator<Item = usize>) -> Vec<Letter> {
        holes
            .into_iter()
            .flat_map(|l| self.gamma[l - 1].iter().copied())
            .collect()
    }

    fn inverse(letters: &[Letter]) -> Vec<Letter> {
        letters.iter().rev().map(|l| l.inv()).collect()
    }

    fn power(letters: &[Letter], n: i64) -> Vec<Letter> {
        let base = if n < 0 { Self::inverse(letters) } else { letters.to_vec() };
        base.repeat(n.unsigned_abs() as usize)
    }

    /// Positive-twist insertion loop for hole `l ∈ S`.
    fn insertion(&self, s: &CyclicInterval, l: usize) -> Vec<Letter> {
        let d = s.holes;
        if !s.wraps() {
            let run = self.product(s.members());
            return Self::power(&run, -TWIST_SIGN);
        }
        let t = s.complement().expect("wrapping run is proper");
        let gamma_t = self.product(t.members());
        let delta = Self::inverse(&self.product(1..=d));
        let w = if l < t.start {
            [gamma_t, delta].concat()
        } else {
            [delta, gamma_t].concat()
        };
        Self::power(&w, TWIST_SIGN)
    }

    fn table(&self, s: &CyclicInterval, sign: i64) -> AutomorphismTable {
        let mut images = AutomorphismTable::identity(&self.sys).images().to_vec();
        for l in s.members() {
            let gen = self.arc(l);
            let w = Self::power(&self.insertion(s, l), sign);
            let letters: Vec<Letter> = w.into_iter().chain([Letter::new(gen, false)]).collect();
            images[gen.0] = self.sys.reduce(VertexId(0), &letters).expect("well-typed twist image");
        }
        AutomorphismTable::from_images(&self.sys, images).expect("endpoint-preserving twist")
    }

    /// `e_l ↦ e_{l+1}`, `b_l ↦ b_{l+1}`, except `e_d ↦ Δ e_1`: the arc to the
    /// last hole, rotated, winds once more around δ.
    fn rotation(&self, step: i64) -> AutomorphismTable {
        let d = self.gamma.len();
        let shift = |l: usize| ((l as i64 - 1 + step).rem_euclid(d as i64)) as usize + 1;
        let mut perm = vec![VertexId(0)];
        perm.extend((1..=d).map(|l| VertexId(shift(l))));
        let delta = Self::inverse(&self.product(1..=d));
        let mut images = Vec::with_capacity(2 * d);
        for l in 1..=d {
            let target = shift(l);
            let mut letters = Vec::new();
            if step > 0 && l == d {
                letters.extend(delta.iter().copied());
            } else if step < 0 && l == 1 {
                letters.extend(Self::inverse(&delta));
            }
            letters.push(Letter::new(self.arc(target), false));
            images.push(self.sys.reduce(VertexId(0), &letters).expect("well-typed rotation"));
            images.push(self.sys.generator_word(GenId(self.arc(target).0 + 1)));
        }
        AutomorphismTable::from_images_permuting(&self.sys, perm, images).expect("rotation table")
    }

    fn action(&self, s: &CyclicInterval) -> TwistAction {
        TwistAction {
            forward: self.table(s, 1),
            inverse: self.table(s, -1),
        }
    }
}

/// Holes enclosed on the non-δ side of a curve, used for disjointness.
fn enclosed_set(kind: &CurveKind, holes: usize) -> BTreeSet<usize> {
    match kind {
        CurveKind::BoundaryParallel(i) => [*i].into(),
        CurveKind::OuterParallel => (1..=holes).collect(),
        CurveKind::Convex(s) => s.members().into_iter().collect(),
        CurveKind::Abstract => BTreeSet::new(),
    }
}

/// Two separating curves are disjoint up to isotopy iff their hole sets are
/// nested or disjoint.
fn compatible(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    a.is_subset(b) || b.is_subset(a) || a.is_disjoint(b)
}

/// The catalog of a sphere with `p ≥ 3` boundary components: δ, every
/// `a_i`, and a convex curve for every cyclic run of 2..d-1 holes. For
/// `p = 3` the single pair curve `c1-2` (isotopic to δ) is included.
pub fn holed_sphere(p: usize) -> Result<SurfaceModel, CatalogError> {
    if p < 3 {
        return Err(CatalogError::InvalidModel(format!(
            "a holed sphere needs at least 3 boundary components, got {p}"
        )));
    }
    let d = p - 1;
    let loops = Loops::new(d);
    let mut specs: Vec<(String, CurveKind, CyclicInterval)> = Vec::new();
    specs.push((DELTA.to_string(), CurveKind::OuterParallel, CyclicInterval::full(d)));
    for i in 1..=d {
        let s = CyclicInterval::singleton(i, d).expect("hole in range");
        specs.push((hole_curve(i), CurveKind::BoundaryParallel(i), s));
    }
    for len in 2..d {
        for start in 1..=d {
            let s = CyclicInterval::new(start, len, d).expect("run in range");
            specs.push((interval_name(&s), CurveKind::Convex(s), s));
        }
    }
    if d == 2 {
        let s = CyclicInterval::full(2);
        specs.push(("c1-2".to_string(), CurveKind::Convex(s), s));
    }

    let sets: Vec<BTreeSet<usize>> = specs.iter().map(|(_, k, _)| enclosed_set(k, d)).collect();
    let curves = specs
        .iter()
        .enumerate()
        .map(|(i, (name, kind, s))| {
            let disjoint_with = specs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && compatible(&sets[i], &sets[j]))
                .map(|(_, (n, _, _))| n.clone())
                .collect();
            CurveEntry {
                name: name.clone(),
                kind: kind.clone(),
                disjoint_with,
                class: None,
                action: Some(loops.action(s)),
            }
        })
        .collect();

    let rotation = ElementEntry {
        name: ROTATION.to_string(),
        action: TwistAction {
            forward: loops.rotation(1),
            inverse: loops.rotation(-1),
        },
    };
    let conjugations = specs
        .iter()
        .filter_map(|(name, kind, s)| {
            let image = match kind {
                CurveKind::OuterParallel => return None,
                CurveKind::BoundaryParallel(i) => hole_curve(i % d + 1),
                CurveKind::Convex(_) if d == 2 => return None,
                _ => interval_name(&CyclicInterval::new(s.start % d + 1, s.len, d).expect("shifted run")),
            };
            Some(ConjugationRecord {
                by: Word::letter(ROTATION, 1),
                curve: name.clone(),
                image,
            })
        })
        .collect();
    let model = SurfaceModel::new(
        ModelKind::HoledSphere { boundaries: p },
        Some(loops.sys.clone()),
        curves,
        vec![rotation],
        conjugations,
    )?;
    check_anchor(&model)?;
    check_conjugations(&model)?;
    Ok(model)
}

/// Rejects any catalog whose twist orientation breaks the all-positive
/// daisy relation (the lantern relation when there are three holes).
pub fn check_anchor(model: &SurfaceModel) -> Result<(), CatalogError> {
    let ModelKind::HoledSphere { boundaries } = model.kind() else {
        return Ok(());
    };
    let d = boundaries - 1;
    if d < 3 {
        return Ok(());
    }
    let rel = daisy_relation(d).map_err(|e| CatalogError::AnchorFailed(e.to_string()))?;
    match verify_relation(model, &rel)? {
        Verdict::Holds => Ok(()),
        Verdict::Fails { witness, .. } => Err(CatalogError::AnchorFailed(format!(
            "daisy relation with {d} petals fails on generator {witness}"
        ))),
    }
}

/// Checks `f · t_c · f⁻¹ = t_{f(c)}` for every conjugation record.
pub fn check_conjugations(model: &SurfaceModel) -> Result<(), CatalogError> {
    for r in model.conjugations() {
        let lhs = Word::letter(&r.curve, 1).conjugated_by(&r.by);
        if !model.auto_equal(&lhs, &Word::letter(&r.image, 1))? {
            return Err(CatalogError::AnchorFailed(format!(
                "conjugating {} by {} does not give {}",
                r.curve, r.by, r.image
            )));
        }
    }
    Ok(())
}

/// `Push_δ(α) = t_{α'} t_δ⁻¹ t_{α''}⁻¹` for a clockwise arc: `α'` separates δ
/// and the enclosed holes from the rest, `α''` encloses the holes. A side
/// that is null-homotopic contributes the identity symbol; a side parallel to
/// a boundary is that boundary twist. A counterclockwise arc is the reversed
/// loop, whose push is the inverse word.
pub fn push(model: &SurfaceModel, arc: &ArcSpec) -> Result<MappingClass, CatalogError> {
    let ModelKind::HoledSphere { boundaries } = model.kind() else {
        return Err(CatalogError::InvalidModel("push maps need a holed sphere".into()));
    };
    let d = boundaries - 1;
    let s = arc.enclosed;
    if s.holes != d {
        return Err(CatalogError::InvalidModel(format!(
            "arc encloses holes of a {}-hole model, this one has {d}",
            s.holes
        )));
    }
    let side_name = |run: Option<CyclicInterval>| -> Result<Word, CatalogError> {
        let Some(run) = run else {
            return Ok(Word::identity());
        };
        let name = if run.is_full() {
            DELTA.to_string()
        } else if run.len == 1 {
            hole_curve(run.start)
        } else if d == 2 {
            "c1-2".to_string()
        } else {
            interval_name(&run)
        };
        if model.curve(&name).is_none() {
            return Err(CatalogError::UnknownSymbol(name));
        }
        Ok(Word::letter(&name, 1))
    };
    let left = side_name(s.complement())?;
    let right = side_name(Some(s))?;
    let clockwise = left
        .concat(&Word::letter(DELTA, -1))
        .concat(&right.inverse());
    Ok(match arc.orientation {
        ArcOrientation::Clockwise => clockwise.reduced(),
        ArcOrientation::Counterclockwise => clockwise.inverse().reduced(),
    })
}

/// `t_δ^{d−2} t_{a_1} ⋯ t_{a_d} = t_{x_1} ⋯ t_{x_d}` on the sphere with
/// `d + 1` boundary components.
pub fn daisy_relation(d: usize) -> Result<RelationWord, CatalogError> {
    if d < 3 {
        return Err(CatalogError::InvalidModel(format!(
            "the daisy relation needs at least 3 petals, got {d}"
        )));
    }
    let mut lhs = Word::letter(DELTA, d as i64 - 2);
    let mut rhs = Word::empty();
    for i in 1..=d {
        lhs = lhs.concat(&Word::letter(&hole_curve(i), 1));
        rhs = rhs.concat(&Word::letter(&complement_curve(i), 1));
    }
    Ok(RelationWord { lhs, rhs })
}

/// The commutator-ready factorization of `t_δ^{2k}` on the five-holed
/// sphere, as a word: `∏_{i=1}^{k} (x1 a2⁻¹ x2 a1⁻¹)^{x3^{i−1}} · x3^k a4^{−k} x4^k a3^{−k}`.
pub fn power_relation(k: i64) -> Result<RelationWord, CatalogError> {
    if k < 1 {
        return Err(CatalogError::InvalidModel(format!("power relation needs k ≥ 1, got {k}")));
    }
    let block: Word = "x1 a2^-1 x2 a1^-1".parse().expect("literal");
    let mut rhs = Word::empty();
    for i in 1..=k {
        rhs = rhs.concat(&block.conjugated_by(&Word::letter("x3", i - 1)));
    }
    let tail = Word::from_letters(
        [("x3", k), ("a4", -k), ("x4", k), ("a3", -k)]
            .into_iter()
            .map(|(s, e)| crate::word::Power::new(s, e))
            .collect(),
    );
    Ok(RelationWord {
        lhs: Word::letter(DELTA, 2 * k),
        rhs: rhs.concat(&tail),
    })
}

/// Exact check of `lhs = rhs` through the groupoid action.
pub fn verify_relation(model: &SurfaceModel, r: &RelationWord) -> Result<Verdict, CatalogError> {
    let sys = model
        .generators()
        .ok_or_else(|| CatalogError::InvalidModel("verification needs a holed sphere".into()))?;
    let l = model.evaluate(&r.lhs)?;
    let rt = model.evaluate(&r.rhs)?;
    Ok(match l.first_difference(&rt) {
        None => Verdict::Holds,
        Some(g) => Verdict::Fails {
            witness: sys.gen(g).name.clone(),
            lhs_image: sys.render(l.image(g)),
            rhs_image: sys.render(rt.image(g)),
        },
    })
}

/// Rendered image of a generator under a twist word, for reports.
pub fn image_of(model: &SurfaceModel, word: &MappingClass, gen: &str) -> Result<String, CatalogError> {
    let sys = model
        .generators()
        .ok_or_else(|| CatalogError::InvalidModel("model has no groupoid action".into()))?;
    let id = sys
        .gen_id(gen)
        .ok_or_else(|| CatalogError::UnknownSymbol(gen.to_string()))?;
    let t = model.evaluate(word)?;
    Ok(sys.render(t.image(id)))
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn catalog_contents() {
        let m3 = holed_sphere(3).unwrap();
        let names: Vec<_> = m3.curves().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["delta", "a1", "a2", "c1-2"]);
        let m4 = holed_sphere(4).unwrap();
        assert_eq!(m4.curves().len(), 1 + 3 + 3);
        assert!(m4.curve("x1").is_some() && m4.curve("x3").is_some());
        let m5 = holed_sphere(5).unwrap();
        // delta, four holes, four pairs, four triples
        assert_eq!(m5.curves().len(), 13);
        for n in ["c1-2", "c4-1", "x1", "x4"] {
            assert!(m5.curve(n).is_some(), "{n}");
        }
        assert!(holed_sphere(2).is_err());
    }

    #[test]
    fn disjointness_follows_hole_sets() {
        let m = holed_sphere(5).unwrap();
        assert!(m.declared_disjoint("a1", "x2"));
        assert!(m.declared_disjoint("delta", "x3"));
        assert!(m.declared_disjoint("c1-2", "c3-4"));
        assert!(!m.declared_disjoint("x1", "x2"));
        assert!(!m.declared_disjoint("c1-2", "c2-3"));
        assert!(m.declared_disjoint("a1", "x1"));
        assert!(!m.declared_disjoint("c4-1", "c1-2"));
    }

    #[test]
    fn boundary_twist_sends_arc_around_hole() {
        let m = holed_sphere(4).unwrap();
        // e1 ↦ (e1 b1 e1⁻¹)⁻² e1 = e1 b1^-2
        assert_eq!(image_of(&m, &w("a1^2"), "e1").unwrap(), "e1 b1^-2");
        assert_eq!(image_of(&m, &w("a1^-1"), "e1").unwrap(), "e1 b1");
        assert_eq!(image_of(&m, &w("a1"), "e2").unwrap(), "e2");
        assert_eq!(image_of(&m, &w("a1"), "b1").unwrap(), "b1");
    }

    #[test]
    fn disjoint_twists_commute_and_others_do_not() {
        for p in 4..=6 {
            let m = holed_sphere(p).unwrap();
            for a in m.curves() {
                for b in m.curves() {
                    let ab = m.evaluate(&Word::letter(&a.name, 1).concat(&Word::letter(&b.name, 1))).unwrap();
                    let ba = m.evaluate(&Word::letter(&b.name, 1).concat(&Word::letter(&a.name, 1))).unwrap();
                    let declared = a.name == b.name || m.declared_disjoint(&a.name, &b.name);
                    assert_eq!(ab == ba, declared, "p={p} {} {}", a.name, b.name);
                }
            }
        }
    }

    #[test]
    fn basic_twists_are_distinct_and_nontrivial() {
        let m = holed_sphere(5).unwrap();
        let mut seen = vec![m.evaluate(&Word::identity()).unwrap()];
        for n in ["delta", "a1", "a2", "a3", "a4"] {
            let t = m.evaluate(&Word::letter(n, 1)).unwrap();
            assert!(!seen.contains(&t), "{n}");
            seen.push(t);
        }
    }

    #[test]
    fn boundary_twists_have_infinite_order() {
        let m = holed_sphere(4).unwrap();
        for n in -3..=3i64 {
            let t = m.evaluate(&Word::letter("delta", n)).unwrap();
            assert_eq!(t.is_identity(), n == 0);
        }
    }

    #[test]
    fn lantern_and_daisy_hold() {
        for d in 3..=6 {
            let m = holed_sphere(d + 1).unwrap();
            assert!(verify_relation(&m, &daisy_relation(d).unwrap()).unwrap().holds(), "d={d}");
        }
        assert!(daisy_relation(2).is_err());
    }

    #[test]
    fn corrupted_daisy_reports_a_witness() {
        let m = holed_sphere(5).unwrap();
        let mut r = daisy_relation(4).unwrap();
        r.rhs = r.rhs.concat(&w("a2"));
        match verify_relation(&m, &r).unwrap() {
            Verdict::Fails { witness, lhs_image, rhs_image } => {
                assert_eq!(witness, "e2");
                assert_ne!(lhs_image, rhs_image);
            }
            Verdict::Holds => panic!("corrupted relation holds"),
        }
    }

    #[test]
    fn power_relation_small_k() {
        let m = holed_sphere(5).unwrap();
        for k in 1..=3 {
            assert!(verify_relation(&m, &power_relation(k).unwrap()).unwrap().holds(), "k={k}");
        }
        assert!(power_relation(0).is_err());
    }

    #[test]
    fn rotation_conjugates_runs_onto_shifted_runs() {
        for p in 3..=7 {
            let m = holed_sphere(p).unwrap();
            let expected = m.curves().len() - if p == 3 { 2 } else { 1 };
            assert_eq!(m.conjugations().len(), expected);
            check_conjugations(&m).unwrap();
        }
        let m = holed_sphere(5).unwrap();
        // four petal steps make a full turn, slid back along δ
        assert!(m.auto_equal(&w("rot^4"), &w("delta")).unwrap());
    }

    #[test]
    fn push_examples() {
        let m = holed_sphere(5).unwrap();
        let one = ArcSpec::clockwise(CyclicInterval::singleton(1, 4).unwrap());
        assert_eq!(push(&m, &one).unwrap(), w("x1 delta^-1 a1^-1"));
        let all = ArcSpec::clockwise(CyclicInterval::full(4));
        assert_eq!(push(&m, &all).unwrap(), w("delta^-2"));
        let ccw = ArcSpec {
            enclosed: CyclicInterval::singleton(1, 4).unwrap(),
            orientation: ArcOrientation::Counterclockwise,
        };
        assert!(m.auto_equal(&push(&m, &ccw).unwrap().concat(&push(&m, &one).unwrap()), &Word::identity()).unwrap());
    }

    #[test]
    fn push_is_natural_along_adjacent_runs() {
        let m = holed_sphere(5).unwrap();
        let d = 4;
        for start in 1..=d {
            for la in 1..d {
                for lb in 1..=(d - la) {
                    let a = CyclicInterval::new(start, la, d).unwrap();
                    let b = CyclicInterval::new((start + la - 1) % d + 1, lb, d).unwrap();
                    let ab = CyclicInterval::new(start, la + lb, d).unwrap();
                    let lhs = push(&m, &ArcSpec::clockwise(a))
                        .unwrap()
                        .concat(&push(&m, &ArcSpec::clockwise(b)).unwrap());
                    let rhs = push(&m, &ArcSpec::clockwise(ab)).unwrap();
                    assert!(m.auto_equal(&lhs, &rhs).unwrap(), "{start} {la} {lb}");
                }
            }
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism() {
        let m = holed_sphere(5).unwrap();
        let names: Vec<String> = m.curves().iter().map(|c| c.name.clone()).collect();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let random_word = |rng: &mut rand::rngs::StdRng| {
            let len = rng.gen_range(0..=8);
            Word::from_letters(
                (0..len)
                    .map(|_| {
                        let n = &names[rng.gen_range(0..names.len())];
                        crate::word::Power::new(n, if rng.gen_bool(0.5) { 1 } else { -1 })
                    })
                    .collect(),
            )
        };
        for _ in 0..100 {
            let u = random_word(&mut rng);
            let v = random_word(&mut rng);
            let whole = m.evaluate(&u.concat(&v)).unwrap();
            let parts = m.evaluate(&u).unwrap().compose(&m.evaluate(&v).unwrap());
            assert_eq!(whole, parts);
            assert!(m.evaluate(&u.concat(&u.inverse())).unwrap().is_identity());
        }
    }
}
