//! Surface models and their named-curve catalogs.
//!
//! A holed-sphere model carries a [`GeneratorSystem`] and, for every catalog
//! curve, the groupoid automorphisms of the positive and negative twist. A
//! closed-genus model carries homology classes instead. Either way, the
//! catalog records which curves are declared disjoint.
//!
//! Composition convention: in a word `s1 s2 ... sn` the rightmost twist acts
//! first, so `evaluate(s1 s2) = evaluate(s1) ∘ evaluate(s2)`.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::groupoid::{AutomorphismTable, GeneratorSystem, GroupoidError};
use crate::word::{MappingClass, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// Sphere with `boundaries` boundary components; component 0 is δ.
    HoledSphere { boundaries: usize },
    ClosedGenus { genus: usize },
}

/// A cyclic run of consecutive holes `start, start+1, ...` (1-based, wrapping
/// after `holes`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CyclicInterval {
    pub start: usize,
    pub len: usize,
    pub holes: usize,
}

impl CyclicInterval {
    pub fn new(start: usize, len: usize, holes: usize) -> Option<Self> {
        (holes >= 1 && (1..=holes).contains(&start) && (1..=holes).contains(&len))
            .then_some(CyclicInterval { start, len, holes })
    }

    pub fn singleton(i: usize, holes: usize) -> Option<Self> {
        Self::new(i, 1, holes)
    }

    pub fn full(holes: usize) -> Self {
        CyclicInterval {
            start: 1,
            len: holes,
            holes,
        }
    }

    /// Last hole of the run.
    pub fn end(&self) -> usize {
        (self.start + self.len - 2) % self.holes + 1
    }

    /// Members in cyclic order starting at `start`.
    pub fn members(&self) -> Vec<usize> {
        (0..self.len)
            .map(|k| (self.start - 1 + k) % self.holes + 1)
            .collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        (1..=self.holes).contains(&i) && (i + self.holes - self.start) % self.holes < self.len
    }

    pub fn is_full(&self) -> bool {
        self.len == self.holes
    }

    /// True if the run passes from hole `holes` back to hole 1.
    pub fn wraps(&self) -> bool {
        !self.is_full() && self.start + self.len - 1 > self.holes
    }

    /// The complementary run; `None` for the full interval.
    pub fn complement(&self) -> Option<CyclicInterval> {
        (!self.is_full()).then(|| CyclicInterval {
            start: self.end() % self.holes + 1,
            len: self.holes - self.len,
            holes: self.holes,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum CurveKind {
    /// Parallel to hole `i` (the curve a_i).
    BoundaryParallel(usize),
    /// Parallel to the distinguished boundary δ.
    OuterParallel,
    /// Encloses a cyclic run of holes and nothing else.
    Convex(CyclicInterval),
    /// A curve on a closed model, known only through its class and
    /// disjointness declarations.
    Abstract,
}

/// Forward and inverse tables of a twist or other catalog element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistAction {
    pub forward: AutomorphismTable,
    pub inverse: AutomorphismTable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveEntry {
    pub name: String,
    pub kind: CurveKind,
    pub disjoint_with: BTreeSet<String>,
    pub class: Option<Vec<i64>>,
    pub action: Option<TwistAction>,
}

/// A named automorphism that is not a twist, such as a symmetry of the model
/// that permutes holes. It may appear in conjugators but not in
/// disjointness declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementEntry {
    pub name: String,
    pub action: TwistAction,
}

/// `by · t_curve · by⁻¹ = t_image`, recorded for curves whose image under a
/// catalog element is again a catalog curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugationRecord {
    pub by: Word,
    pub curve: String,
    pub image: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("duplicate curve `{0}`")]
    DuplicateCurve(String),
    #[error("`{a}` is declared disjoint from `{b}` but not conversely")]
    AsymmetricDisjointness { a: String, b: String },
    #[error("curve `{0}` has no twist action")]
    MissingAction(String),
    #[error("curve `{0}`: inverse action does not undo the forward action")]
    BadInverse(String),
    #[error("curve `{0}` has no homology class")]
    MissingClass(String),
    #[error("orientation anchor failed: {0}")]
    AnchorFailed(String),
    #[error("catalog line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    kind: ModelKind,
    generators: Option<GeneratorSystem>,
    curves: Vec<CurveEntry>,
    index: HashMap<String, usize>,
    elements: Vec<ElementEntry>,
    conjugations: Vec<ConjugationRecord>,
}

impl SurfaceModel {
    /// Assembles and validates a model: unique names, symmetric disjointness,
    /// twist actions on holed spheres (with working inverses), classes of the
    /// right length on closed models.
    pub fn new(
        kind: ModelKind,
        generators: Option<GeneratorSystem>,
        curves: Vec<CurveEntry>,
        elements: Vec<ElementEntry>,
        conjugations: Vec<ConjugationRecord>,
    ) -> Result<Self, CatalogError> {
        let mut index = HashMap::new();
        for (i, c) in curves.iter().enumerate() {
            if c.name == crate::word::IDENTITY {
                return Err(CatalogError::InvalidModel("`1` is reserved".into()));
            }
            if index.insert(c.name.clone(), i).is_some() {
                return Err(CatalogError::DuplicateCurve(c.name.clone()));
            }
        }
        let mut element_names = BTreeSet::new();
        for e in &elements {
            if e.name == crate::word::IDENTITY || index.contains_key(&e.name) || !element_names.insert(&e.name) {
                return Err(CatalogError::DuplicateCurve(e.name.clone()));
            }
        }
        for c in &curves {
            for other in &c.disjoint_with {
                let j = *index
                    .get(other)
                    .ok_or_else(|| CatalogError::UnknownSymbol(other.clone()))?;
                if !curves[j].disjoint_with.contains(&c.name) {
                    return Err(CatalogError::AsymmetricDisjointness {
                        a: c.name.clone(),
                        b: other.clone(),
                    });
                }
            }
        }
        match kind {
            ModelKind::HoledSphere { boundaries } => {
                if boundaries < 3 {
                    return Err(CatalogError::InvalidModel(format!(
                        "a holed sphere needs at least 3 boundary components, got {boundaries}"
                    )));
                }
                let sys = generators
                    .as_ref()
                    .ok_or_else(|| CatalogError::InvalidModel("holed sphere without generators".into()))?;
                let named = curves
                    .iter()
                    .map(|c| (&c.name, c.action.as_ref()))
                    .chain(elements.iter().map(|e| (&e.name, Some(&e.action))));
                for (name, act) in named {
                    let act = act.ok_or_else(|| CatalogError::MissingAction(name.clone()))?;
                    if act.forward.images().len() != sys.len() || act.inverse.images().len() != sys.len() {
                        return Err(CatalogError::InvalidModel(format!(
                            "`{name}` has a table of the wrong size"
                        )));
                    }
                    if !act.forward.compose(&act.inverse).is_identity()
                        || !act.inverse.compose(&act.forward).is_identity()
                    {
                        return Err(CatalogError::BadInverse(name.clone()));
                    }
                }
            }
            ModelKind::ClosedGenus { genus } => {
                if !elements.is_empty() {
                    return Err(CatalogError::InvalidModel("closed models carry no elements".into()));
                }
                if genus < 1 {
                    return Err(CatalogError::InvalidModel("closed model needs genus ≥ 1".into()));
                }
                for c in &curves {
                    let class = c
                        .class
                        .as_ref()
                        .ok_or_else(|| CatalogError::MissingClass(c.name.clone()))?;
                    if class.len() != 2 * genus {
                        return Err(CatalogError::InvalidModel(format!(
                            "class of `{}` has length {}, expected {}",
                            c.name,
                            class.len(),
                            2 * genus
                        )));
                    }
                }
            }
        }
        for r in &conjugations {
            for s in r.by.symbols().chain([r.curve.as_str(), r.image.as_str()]) {
                if s != crate::word::IDENTITY && !index.contains_key(s) && !element_names.contains(&s.to_string()) {
                    return Err(CatalogError::UnknownSymbol(s.to_string()));
                }
            }
        }
        Ok(SurfaceModel {
            kind,
            generators,
            curves,
            index,
            elements,
            conjugations,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn boundary_count(&self) -> usize {
        match self.kind {
            ModelKind::HoledSphere { boundaries } => boundaries,
            ModelKind::ClosedGenus { .. } => 0,
        }
    }

    /// Number of holes a_1..a_d besides δ (holed spheres only).
    pub fn holes(&self) -> usize {
        self.boundary_count().saturating_sub(1)
    }

    pub fn generators(&self) -> Option<&GeneratorSystem> {
        self.generators.as_ref()
    }

    pub fn curves(&self) -> &[CurveEntry] {
        &self.curves
    }

    pub fn curve(&self, name: &str) -> Option<&CurveEntry> {
        self.index.get(name).map(|&i| &self.curves[i])
    }

    pub fn elements(&self) -> &[ElementEntry] {
        &self.elements
    }

    pub fn conjugations(&self) -> &[ConjugationRecord] {
        &self.conjugations
    }

    pub fn declared_disjoint(&self, a: &str, b: &str) -> bool {
        self.curve(a).is_some_and(|c| c.disjoint_with.contains(b))
    }

    fn sys(&self) -> Result<&GeneratorSystem, CatalogError> {
        self.generators
            .as_ref()
            .ok_or_else(|| CatalogError::InvalidModel("model has no groupoid action".into()))
    }

    fn action(&self, name: &str) -> Result<&TwistAction, CatalogError> {
        let Some(c) = self.curve(name) else {
            return self
                .elements
                .iter()
                .find(|e| e.name == name)
                .map(|e| &e.action)
                .ok_or_else(|| CatalogError::UnknownSymbol(name.to_string()));
        };
        c.action
            .as_ref()
            .ok_or_else(|| CatalogError::MissingAction(name.to_string()))
    }

    /// The length-|power| word of the (inverse) twist about `name`.
    pub fn twist(&self, name: &str, power: i64) -> Result<MappingClass, CatalogError> {
        if self.curve(name).is_none() {
            return Err(CatalogError::UnknownSymbol(name.to_string()));
        }
        Ok(Word::letter(name, power))
    }

    /// Groupoid automorphism of a word in twists and elements, rightmost letter acting first.
    pub fn evaluate(&self, word: &MappingClass) -> Result<AutomorphismTable, CatalogError> {
        let sys = self.sys()?;
        let mut acc = AutomorphismTable::identity(sys);
        for p in word.letters() {
            if p.is_identity() {
                continue;
            }
            let act = self.action(&p.symbol)?;
            let step = if p.exp > 0 { &act.forward } else { &act.inverse };
            for _ in 0..p.exp.unsigned_abs() {
                acc = acc.compose(step);
            }
        }
        Ok(acc)
    }

    pub fn auto_equal(&self, w1: &MappingClass, w2: &MappingClass) -> Result<bool, CatalogError> {
        Ok(self.evaluate(w1)? == self.evaluate(w2)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_arithmetic() {
        let i = CyclicInterval::new(4, 3, 5).unwrap();
        assert_eq!(i.members(), vec![4, 5, 1]);
        assert_eq!(i.end(), 1);
        assert!(i.wraps());
        assert!(i.contains(1) && i.contains(5) && !i.contains(2));
        let c = i.complement().unwrap();
        assert_eq!(c.members(), vec![2, 3]);
        assert!(!c.wraps());
        assert!(CyclicInterval::full(4).complement().is_none());
        assert!(!CyclicInterval::full(4).wraps());
        assert!(CyclicInterval::new(0, 1, 3).is_none());
        assert!(CyclicInterval::new(1, 4, 3).is_none());
    }
}
