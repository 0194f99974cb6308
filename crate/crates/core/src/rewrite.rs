//! Checked derivations between words in twist symbols and abstract
//! diffeomorphisms.
//!
//! A [`Derivation`] is a start word, an end word and a list of primitive
//! steps, each acting on syllable positions. [`check_derivation`] replays the
//! steps and accepts only if every step is licensed and the replay lands on
//! the end word letter for letter. Licenses come from an [`OracleSet`]:
//! commutations, conjugations `f t_c f⁻¹ = t_{c'}` and named relations, each
//! tagged with where it comes from. Relations verified on a planar model are
//! facts; the properties of `phi` and `psi` are assumptions and are listed as
//! such in every outcome that uses them.
//!
//! Step script, one step per line (`#` starts a comment):
//!
//! ```text
//! start delta^2
//! end x1 x2 x3 x4 a4^-1 a3^-1 a2^-1 a1^-1
//! insert 1 : a1 a1^-1        insert a freely trivial word before syllable 1
//! delete 1 2                 delete 2 syllables that freely cancel
//! split 0 1                  s^n -> s^1 s^(n-1)
//! merge 0                    s^a s^b -> s^(a+b)
//! swap 3                     exchange syllables 3 and 4 (needs a commutation)
//! conjugate 2                f c^n f^-1 -> c'^n
//! expand 2 psi               c'^n -> psi c^n psi^-1
//! substitute 0 daisy         lhs -> rhs (append `reverse` for rhs -> lhs)
//! ```
//!
//! A `start` or `end` of just `1` is the empty word.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::model::{CatalogError, SurfaceModel};
use crate::planar::{self, RelationWord, DELTA};
use crate::word::{Power, Word, WordError, IDENTITY};

pub const PHI: &str = "phi";
pub const PSI: &str = "psi";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Checked exactly through the groupoid action of a holed sphere.
    PlanarVerified,
    /// Read off a catalog's disjointness declarations.
    Declared,
    /// Assumed; reported with every result that depends on it.
    Axiom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Oracle {
    Commute {
        u: String,
        v: String,
        provenance: Provenance,
    },
    /// `by · t_curve · by⁻¹ = t_image`
    Conjugate {
        by: String,
        curve: String,
        image: String,
        provenance: Provenance,
    },
    Relation {
        name: String,
        relation: RelationWord,
        provenance: Provenance,
    },
}

impl Oracle {
    pub fn label(&self) -> String {
        match self {
            Oracle::Commute { u, v, .. } => format!("commute({u},{v})"),
            Oracle::Conjugate { by, curve, image, .. } => format!("conjugate({by},{curve},{image})"),
            Oracle::Relation { name, .. } => format!("relation({name})"),
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Oracle::Commute { provenance, .. }
            | Oracle::Conjugate { provenance, .. }
            | Oracle::Relation { provenance, .. } => *provenance,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("step {index}: {reason}")]
    Step { index: usize, reason: String },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("oracle `{0}` does not hold on the planar model")]
    OracleFailed(String),
    #[error("no capping rule for `{0}`")]
    NoCapRule(String),
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleSet {
    oracles: Vec<Oracle>,
}

impl OracleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, o: Oracle) {
        if !self.oracles.iter().any(|x| x.label() == o.label()) {
            self.oracles.push(o);
        }
    }

    pub fn extend(&mut self, other: OracleSet) {
        for o in other.oracles {
            self.push(o);
        }
    }

    pub fn oracles(&self) -> &[Oracle] {
        &self.oracles
    }

    pub fn len(&self) -> usize {
        self.oracles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oracles.is_empty()
    }

    /// A copy with the oracle of the given label removed.
    pub fn without(&self, label: &str) -> OracleSet {
        OracleSet {
            oracles: self.oracles.iter().filter(|o| o.label() != label).cloned().collect(),
        }
    }

    fn commute(&self, a: &str, b: &str) -> Option<&Oracle> {
        self.oracles
            .iter()
            .find(|o| matches!(o, Oracle::Commute { u, v, .. } if (u == a && v == b) || (u == b && v == a)))
    }

    fn conjugate(&self, f: &str, c: &str) -> Option<(&Oracle, &str)> {
        self.oracles.iter().find_map(|o| match o {
            Oracle::Conjugate { by, curve, image, .. } if by == f && curve == c => Some((o, image.as_str())),
            _ => None,
        })
    }

    fn preimage(&self, f: &str, img: &str) -> Option<(&Oracle, &str)> {
        self.oracles.iter().find_map(|o| match o {
            Oracle::Conjugate { by, curve, image, .. } if by == f && image == img => Some((o, curve.as_str())),
            _ => None,
        })
    }

    fn relation(&self, name: &str) -> Option<(&Oracle, &RelationWord)> {
        self.oracles.iter().find_map(|o| match o {
            Oracle::Relation { name: n, relation, .. } if n == name => Some((o, relation)),
            _ => None,
        })
    }

    /// Commutations for every declared-disjoint pair of a holed sphere, each
    /// confirmed by evaluation, plus the daisy relation when the model has at
    /// least three holes.
    pub fn planar(model: &SurfaceModel) -> Result<OracleSet, RewriteError> {
        let mut set = OracleSet::new();
        for a in model.curves() {
            for b in &a.disjoint_with {
                if a.name >= *b {
                    continue;
                }
                let ab = Word::letter(&a.name, 1).concat(&Word::letter(b, 1));
                let ba = Word::letter(b, 1).concat(&Word::letter(&a.name, 1));
                let o = Oracle::Commute {
                    u: a.name.clone(),
                    v: b.clone(),
                    provenance: Provenance::PlanarVerified,
                };
                if !model.auto_equal(&ab, &ba)? {
                    return Err(RewriteError::OracleFailed(o.label()));
                }
                set.push(o);
            }
        }
        let d = model.holes();
        if d >= 3 {
            let relation = planar::daisy_relation(d)?;
            if !planar::verify_relation(model, &relation)?.holds() {
                return Err(RewriteError::OracleFailed("relation(daisy)".into()));
            }
            set.push(Oracle::Relation {
                name: "daisy".into(),
                relation,
                provenance: Provenance::PlanarVerified,
            });
        }
        Ok(set)
    }

    /// `phi` carries `x1, a2` to `a1, x2`; `psi` carries `x3, a4` to `a3, x4`.
    pub fn phi_psi_axioms() -> OracleSet {
        let mut set = OracleSet::new();
        for (by, curve, image) in [(PHI, "x1", "a1"), (PHI, "a2", "x2"), (PSI, "x3", "a3"), (PSI, "a4", "x4")] {
            set.push(Oracle::Conjugate {
                by: by.into(),
                curve: curve.into(),
                image: image.into(),
                provenance: Provenance::Axiom,
            });
        }
        set
    }

    /// A curve `b` off the five-holed sphere: disjoint from every `a_i` and
    /// `x_i`, and commuting with `psi`.
    pub fn outside_curve_axioms(b: &str) -> OracleSet {
        let mut set = OracleSet::new();
        set.push(Oracle::Commute {
            u: PSI.into(),
            v: b.into(),
            provenance: Provenance::Axiom,
        });
        for i in 1..=4 {
            for c in [planar::hole_curve(i), planar::complement_curve(i)] {
                set.push(Oracle::Commute {
                    u: b.into(),
                    v: c,
                    provenance: Provenance::Axiom,
                });
            }
        }
        set
    }

    /// Commutations read off a closed model's disjointness declarations.
    pub fn declared(model: &SurfaceModel) -> OracleSet {
        let mut set = OracleSet::new();
        for a in model.curves() {
            for b in &a.disjoint_with {
                if a.name < *b {
                    set.push(Oracle::Commute {
                        u: a.name.clone(),
                        v: b.clone(),
                        provenance: Provenance::Declared,
                    });
                }
            }
        }
        set
    }

    /// Planar oracles of the five-holed sphere, the `phi`/`psi` axioms and
    /// the axioms for the curve `b`.
    pub fn standard() -> Result<OracleSet, RewriteError> {
        let mut set = OracleSet::planar(&planar::holed_sphere(5)?)?;
        set.extend(OracleSet::phi_psi_axioms());
        set.extend(OracleSet::outside_curve_axioms("b"));
        Ok(set)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Step {
    Insert { at: usize, word: Word },
    Delete { at: usize, len: usize },
    Split { at: usize, first: i64 },
    Merge { at: usize },
    Swap { at: usize },
    Conjugate { at: usize },
    Expand { at: usize, by: String },
    Substitute { at: usize, relation: String, reverse: bool },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Insert { at, word } => write!(f, "insert {at} : {word}"),
            Step::Delete { at, len } => write!(f, "delete {at} {len}"),
            Step::Split { at, first } => write!(f, "split {at} {first}"),
            Step::Merge { at } => write!(f, "merge {at}"),
            Step::Swap { at } => write!(f, "swap {at}"),
            Step::Conjugate { at } => write!(f, "conjugate {at}"),
            Step::Expand { at, by } => write!(f, "expand {at} {by}"),
            Step::Substitute { at, relation, reverse } => {
                write!(f, "substitute {at} {relation}{}", if *reverse { " reverse" } else { "" })
            }
        }
    }
}

fn syllable(w: &Word, at: usize) -> Result<&Power, String> {
    w.letters()
        .get(at)
        .ok_or_else(|| format!("position {at} is past the end of a {}-syllable word", w.len()))
}

/// Applies one step, returning the new word and the oracle it used.
pub fn apply_step<'o>(w: &Word, step: &Step, oracles: &'o OracleSet) -> Result<(Word, Option<&'o Oracle>), String> {
    let n = w.len();
    match step {
        Step::Insert { at, word } => {
            if *at > n {
                return Err(format!("insertion point {at} is past the end"));
            }
            if !word.is_trivial() {
                return Err(format!("`{word}` does not freely cancel"));
            }
            Ok((w.splice(*at, *at, word), None))
        }
        Step::Delete { at, len } => {
            if at + len > n {
                return Err(format!("deletion {at}+{len} is past the end"));
            }
            let cut = w.slice(*at, at + len);
            if !cut.is_trivial() {
                return Err(format!("`{cut}` does not freely cancel"));
            }
            Ok((w.splice(*at, at + len, &Word::empty()), None))
        }
        Step::Split { at, first } => {
            let p = syllable(w, *at)?;
            if p.is_identity() || *first == 0 || *first == p.exp {
                return Err(format!("cannot split `{p}` with first part {first}"));
            }
            let parts = Word::from_letters(vec![Power::new(&p.symbol, *first), Power::new(&p.symbol, p.exp - first)]);
            Ok((w.splice(*at, at + 1, &parts), None))
        }
        Step::Merge { at } => {
            let (p, q) = (syllable(w, *at)?, syllable(w, at + 1)?);
            if p.symbol != q.symbol || p.is_identity() || p.exp + q.exp == 0 {
                return Err(format!("cannot merge `{p}` and `{q}`"));
            }
            let merged = Word::letter(&p.symbol, p.exp + q.exp);
            Ok((w.splice(*at, at + 2, &merged), None))
        }
        Step::Swap { at } => {
            let (p, q) = (syllable(w, *at)?, syllable(w, at + 1)?);
            let oracle = if p.symbol == q.symbol || p.is_identity() || q.is_identity() {
                None
            } else {
                Some(
                    oracles
                        .commute(&p.symbol, &q.symbol)
                        .ok_or_else(|| format!("no license to swap `{p}` and `{q}`"))?,
                )
            };
            let swapped = Word::from_letters(vec![q.clone(), p.clone()]);
            Ok((w.splice(*at, at + 2, &swapped), oracle))
        }
        Step::Conjugate { at } => {
            let (f, c, g) = (syllable(w, *at)?, syllable(w, at + 1)?, syllable(w, at + 2)?);
            if f.exp != 1 || g.symbol != f.symbol || g.exp != -1 {
                return Err(format!("`{f} {c} {g}` is not a conjugate f c^n f^-1"));
            }
            let (o, image) = oracles
                .conjugate(&f.symbol, &c.symbol)
                .ok_or_else(|| format!("no conjugation of `{}` by `{}` is known", c.symbol, f.symbol))?;
            Ok((w.splice(*at, at + 3, &Word::letter(image, c.exp)), Some(o)))
        }
        Step::Expand { at, by } => {
            let p = syllable(w, *at)?;
            let (o, curve) = oracles
                .preimage(by, &p.symbol)
                .ok_or_else(|| format!("no conjugation by `{by}` produces `{}`", p.symbol))?;
            let expanded = Word::from_letters(vec![Power::new(by, 1), Power::new(curve, p.exp), Power::new(by, -1)]);
            Ok((w.splice(*at, at + 1, &expanded), Some(o)))
        }
        Step::Substitute { at, relation, reverse } => {
            let (o, r) = oracles
                .relation(relation)
                .ok_or_else(|| format!("no relation named `{relation}`"))?;
            let (from, to) = if *reverse { (&r.rhs, &r.lhs) } else { (&r.lhs, &r.rhs) };
            if at + from.len() > n || w.letters()[*at..at + from.len()] != *from.letters() {
                return Err(format!("`{from}` does not occur at position {at}"));
            }
            Ok((w.splice(*at, at + from.len(), to), Some(o)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub start: Word,
    pub end: Word,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum CheckOutcome {
    Holds {
        /// Labels of every oracle used, in order of first use.
        oracles: Vec<String>,
        /// The subset of `oracles` that are axioms.
        axioms: Vec<String>,
        /// Weakest provenance among the oracles used.
        weakest: Option<Provenance>,
    },
    Fails {
        step: usize,
        reason: String,
    },
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds { .. })
    }
}

/// Replays `d` and accepts iff every step is licensed by `oracles` and the
/// last word equals `d.end` exactly.
pub fn check_derivation(d: &Derivation, oracles: &OracleSet) -> CheckOutcome {
    let mut w = d.start.clone();
    let mut used: Vec<&Oracle> = Vec::new();
    for (i, step) in d.steps.iter().enumerate() {
        match apply_step(&w, step, oracles) {
            Ok((next, o)) => {
                if let Some(o) = o {
                    if !used.iter().any(|u| u.label() == o.label()) {
                        used.push(o);
                    }
                }
                w = next;
            }
            Err(reason) => return CheckOutcome::Fails { step: i, reason },
        }
    }
    if w.letters() != d.end.letters() {
        return CheckOutcome::Fails {
            step: d.steps.len(),
            reason: format!("chain ends at `{w}`, expected `{}`", d.end),
        };
    }
    CheckOutcome::Holds {
        oracles: used.iter().map(|o| o.label()).collect(),
        axioms: used
            .iter()
            .filter(|o| o.provenance() == Provenance::Axiom)
            .map(|o| o.label())
            .collect(),
        weakest: used.iter().map(|o| o.provenance()).max(),
    }
}

impl Derivation {
    pub fn to_script(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "start {}", self.start);
        let _ = writeln!(out, "end {}", self.end);
        for s in &self.steps {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn parse_script(text: &str) -> Result<Derivation, RewriteError> {
        let mut start = None;
        let mut end = None;
        let mut steps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| RewriteError::Script { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let word = |s: &str| -> Result<Word, RewriteError> {
                s.trim().parse().map_err(|e: WordError| err(e.to_string()))
            };
            // a lone `1` is how the empty word prints
            let endpoint = |s: &str| -> Result<Word, RewriteError> {
                let w = word(s)?;
                Ok(if w == Word::identity() { Word::empty() } else { w })
            };
            let (head, rest) = content.split_once(' ').unwrap_or((content, ""));
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let pos = |i: usize| -> Result<usize, RewriteError> {
                fields
                    .get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(format!("`{head}` needs a position")))
            };
            let step = match head {
                "start" => {
                    start = Some(endpoint(rest)?);
                    continue;
                }
                "end" => {
                    end = Some(endpoint(rest)?);
                    continue;
                }
                "insert" => {
                    let (p, w) = rest.split_once(" : ").ok_or_else(|| err("expected `insert <at> : <word>`".into()))?;
                    Step::Insert {
                        at: p.trim().parse().map_err(|_| err("bad position".into()))?,
                        word: word(w)?,
                    }
                }
                "delete" => Step::Delete { at: pos(0)?, len: pos(1)? },
                "split" => Step::Split {
                    at: pos(0)?,
                    first: fields
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("split needs an exponent".into()))?,
                },
                "merge" => Step::Merge { at: pos(0)? },
                "swap" => Step::Swap { at: pos(0)? },
                "conjugate" => Step::Conjugate { at: pos(0)? },
                "expand" => Step::Expand {
                    at: pos(0)?,
                    by: fields.get(1).ok_or_else(|| err("expand needs a conjugator".into()))?.to_string(),
                },
                "substitute" => Step::Substitute {
                    at: pos(0)?,
                    relation: fields.get(1).ok_or_else(|| err("substitute needs a relation".into()))?.to_string(),
                    reverse: match fields.get(2) {
                        None => false,
                        Some(&"reverse") => true,
                        Some(other) => return Err(err(format!("unexpected `{other}`"))),
                    },
                },
                other => return Err(err(format!("unknown rule `{other}`"))),
            };
            steps.push(step);
        }
        let line = text.lines().count();
        Ok(Derivation {
            start: start.ok_or(RewriteError::Script {
                line,
                message: "missing start".into(),
            })?,
            end: end.ok_or(RewriteError::Script {
                line,
                message: "missing end".into(),
            })?,
            steps,
        })
    }
}

/// Builds a derivation step by step, applying each step as it is recorded.
struct Chain<'a> {
    start: Word,
    word: Word,
    steps: Vec<Step>,
    oracles: &'a OracleSet,
}

impl<'a> Chain<'a> {
    fn new(start: Word, oracles: &'a OracleSet) -> Self {
        Chain {
            word: start.clone(),
            start,
            steps: Vec::new(),
            oracles,
        }
    }

    fn step(&mut self, s: Step) -> Result<(), RewriteError> {
        let (next, _) = apply_step(&self.word, &s, self.oracles).map_err(|reason| RewriteError::Step {
            index: self.steps.len(),
            reason,
        })?;
        self.word = next;
        self.steps.push(s);
        Ok(())
    }

    /// Reorders syllables into `target` by adjacent swaps. Equal syllables
    /// keep their relative order.
    fn permute_to(&mut self, target: &[Power]) -> Result<(), RewriteError> {
        let mut taken = vec![false; target.len()];
        let mut keys = Vec::with_capacity(self.word.len());
        for p in self.word.letters() {
            let k = (0..target.len())
                .find(|&j| !taken[j] && target[j] == *p)
                .ok_or_else(|| RewriteError::NotApplicable(format!("`{p}` has no place in the target")))?;
            taken[k] = true;
            keys.push(k);
        }
        if keys.len() != target.len() {
            return Err(RewriteError::NotApplicable("target has extra syllables".into()));
        }
        let mut sorted = false;
        while !sorted {
            sorted = true;
            for i in 0..keys.len().saturating_sub(1) {
                if keys[i] > keys[i + 1] {
                    self.step(Step::Swap { at: i })?;
                    keys.swap(i, i + 1);
                    sorted = false;
                }
            }
        }
        Ok(())
    }

    /// Rewrites the `2r` syllables at `at` from `u · f(u⁻¹)` to `[u, f]`.
    fn bracket(&mut self, at: usize, len: usize, by: &str) -> Result<(), RewriteError> {
        let r = len / 2;
        for j in 0..r {
            self.step(Step::Expand { at: at + r + 3 * j, by: by.into() })?;
        }
        for j in 0..r.saturating_sub(1) {
            self.step(Step::Delete { at: at + r + 2 + j, len: 2 })?;
        }
        Ok(())
    }

    fn finish(self) -> Derivation {
        Derivation {
            start: self.start,
            end: self.word,
            steps: self.steps,
        }
    }
}

fn letters(spec: &[(&str, i64)]) -> Vec<Power> {
    spec.iter().map(|&(s, e)| Power::new(s, e)).collect()
}

fn power_steps(c: &mut Chain<'_>, k: i64) -> Result<(), RewriteError> {
    let ku = k as usize;
    for i in 0..ku - 1 {
        c.step(Step::Split { at: i, first: 2 })?;
    }
    // t_δ^{2k} = t_δ^{2k} · A^k t_{x4}^{-k} · t_{x4}^k A^{-k}, A = t_{a1}⋯t_{a4}
    let a_block = letters(&[("a1", 1), ("a2", 1), ("a3", 1), ("a4", 1)]);
    let mut w: Vec<Power> = (0..ku).flat_map(|_| a_block.iter().cloned()).collect();
    w.extend(std::iter::repeat_n(Power::new("x4", -1), ku));
    let w = Word::from_letters(w);
    c.step(Step::Insert {
        at: ku,
        word: w.concat(&w.inverse()),
    })?;
    // (δ² A x4⁻¹)^k x4^k A^{-k}
    let mut target: Vec<Power> = Vec::new();
    for _ in 0..ku {
        target.push(Power::new(DELTA, 2));
        target.extend(a_block.iter().cloned());
        target.push(Power::new("x4", -1));
    }
    target.extend(w.inverse().into_letters());
    c.permute_to(&target)?;
    for j in 0..ku {
        c.step(Step::Substitute {
            at: 3 * j,
            relation: "daisy".into(),
            reverse: false,
        })?;
        c.step(Step::Delete { at: 3 * j + 3, len: 2 })?;
    }
    // (x1 x2 x3)^k x4^k A^{-k}
    for _ in 1..ku {
        c.step(Step::Merge { at: 3 * ku })?;
    }
    // x3 after block i becomes x3^{-(i-1)} x3^i
    for i in 2..=ku {
        c.step(Step::Split {
            at: 3 * i - 1 + (i - 2),
            first: -(i as i64 - 1),
        })?;
    }
    let rhs = planar::power_relation(k)?.rhs;
    let mut spread = Vec::new();
    for p in rhs.letters() {
        if (p.symbol == "a4" || p.symbol == "a3") && p.exp == -k {
            spread.extend(std::iter::repeat_n(Power::new(&p.symbol, -1), ku));
        } else {
            spread.push(p.clone());
        }
    }
    c.permute_to(&spread)?;
    for sym in ["a4", "a3"] {
        let at = rhs
            .letters()
            .iter()
            .position(|p| p.symbol == sym && p.exp == -k)
            .expect("power relation has both tails");
        for _ in 1..ku {
            c.step(Step::Merge { at })?;
        }
    }
    debug_assert_eq!(c.word, rhs);
    Ok(())
}

/// From `t_δ^{2k}` to the right side of the power relation on the five-holed
/// sphere, through the daisy relation and commutations of `t_δ` and the
/// `t_{a_i}` with everything else.
pub fn derive_power_relation(k: i64, oracles: &OracleSet) -> Result<Derivation, RewriteError> {
    if k < 1 {
        return Err(RewriteError::InvalidArgument(format!("k must be at least 1, got {k}")));
    }
    let mut c = Chain::new(Word::letter(DELTA, 2 * k), oracles);
    power_steps(&mut c, k)?;
    Ok(c.finish())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorPair {
    pub u: Word,
    pub v: Word,
}

impl CommutatorPair {
    pub fn new(u: Word, v: Word) -> Self {
        CommutatorPair { u, v }
    }

    /// `u v u⁻¹ v⁻¹`, unreduced.
    pub fn expand(&self) -> Word {
        Word::commutator(&self.u, &self.v)
    }

    pub fn conjugated_by(&self, g: &Word) -> CommutatorPair {
        CommutatorPair {
            u: self.u.conjugated_by(g),
            v: self.v.conjugated_by(g),
        }
    }
}

impl fmt::Display for CommutatorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.u, self.v)
    }
}

/// Rewrites `u · f(u⁻¹)` as the single bracket `[u, f]`, where `f(u⁻¹)`
/// replaces each syllable `c^n` of `u⁻¹` by `f(c)^n` via conjugation oracles.
pub fn insert_commutator(w: &Word, by: &str, oracles: &OracleSet) -> Result<(CommutatorPair, Derivation), RewriteError> {
    let n = w.len();
    if n == 0 || n % 2 == 1 {
        return Err(RewriteError::NotApplicable(format!("`{w}` does not split as u · f(u⁻¹)")));
    }
    let u = w.slice(0, n / 2);
    for (p, q) in u.inverse().letters().iter().zip(&w.letters()[n / 2..]) {
        let image = oracles.conjugate(by, &p.symbol).map(|(_, i)| i);
        if p.is_identity() || image != Some(q.symbol.as_str()) || p.exp != q.exp {
            return Err(RewriteError::NotApplicable(format!(
                "`{q}` is not the image of `{p}` under `{by}`"
            )));
        }
    }
    let mut c = Chain::new(w.clone(), oracles);
    c.bracket(0, n, by)?;
    let pair = CommutatorPair::new(u, Word::letter(by, 1));
    debug_assert_eq!(c.word, pair.expand());
    Ok((pair, c.finish()))
}

/// What is appended to the basic factorization of `t_δ^{2k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Extension {
    None,
    /// `[u, psi] t_c^m t_c^{-m} = [u, psi t_c^m]` for a curve `c` commuting
    /// with `psi` and with the entries of `u`.
    TwistSecond { curve: String, power: i64 },
    /// A trailing `[t_c^m, 1]`.
    TrailingPair { curve: String, power: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorFactorization {
    pub target: Word,
    pub factors: Vec<CommutatorPair>,
    pub count: usize,
    pub derivation: Derivation,
}

impl CommutatorFactorization {
    pub fn expanded(&self) -> Word {
        Word::product(self.factors.iter().map(CommutatorPair::expand).collect::<Vec<_>>().iter())
    }

    /// Checks the derivation and that it ends at the expanded brackets.
    pub fn certify(&self, oracles: &OracleSet) -> CheckOutcome {
        if self.derivation.start.letters() != self.target.letters() || self.count != self.factors.len() {
            return CheckOutcome::Fails {
                step: 0,
                reason: "factorization does not match its derivation".into(),
            };
        }
        let expanded = self.expanded();
        if self.derivation.end.letters() != expanded.letters() {
            return CheckOutcome::Fails {
                step: self.derivation.steps.len(),
                reason: format!("derivation ends at `{}`, brackets expand to `{expanded}`", self.derivation.end),
            };
        }
        check_derivation(&self.derivation, oracles)
    }
}

/// `t_δ^{2k}` as `k + 1` commutators: `k` conjugates of
/// `[t_{x1} t_{a2}⁻¹, phi]` and `[t_{x3}^k t_{a4}^{-k}, psi]`, optionally
/// extended.
pub fn lifted_factorization(k: i64, ext: &Extension, oracles: &OracleSet) -> Result<CommutatorFactorization, RewriteError> {
    if k < 1 {
        return Err(RewriteError::InvalidArgument(format!("k must be at least 1, got {k}")));
    }
    let target = Word::letter(DELTA, 2 * k);
    let mut c = Chain::new(target.clone(), oracles);
    power_steps(&mut c, k)?;

    let mut factors = Vec::new();
    let mut pos = 0;
    let base = CommutatorPair::new(Word::from_letters(letters(&[("x1", 1), ("a2", -1)])), Word::letter(PHI, 1));
    for i in 1..=k {
        let gamma = Word::letter("x3", i - 1);
        let inner = pos + gamma.len();
        c.bracket(inner, 4, PHI)?;
        if !gamma.is_empty() {
            // γ u φ u⁻¹ φ⁻¹ γ⁻¹ → γuγ⁻¹ · γφγ⁻¹ · γu⁻¹γ⁻¹ · γφ⁻¹γ⁻¹
            let fill = gamma.inverse().concat(&gamma);
            for at in [inner + 2, inner + 5, inner + 9] {
                c.step(Step::Insert { at, word: fill.clone() })?;
            }
        }
        let pair = base.conjugated_by(&gamma);
        pos += pair.expand().len();
        factors.push(pair);
    }
    c.bracket(pos, 4, PSI)?;
    let mut last = CommutatorPair::new(
        Word::from_letters(letters(&[("x3", k), ("a4", -k)])),
        Word::letter(PSI, 1),
    );
    match ext {
        Extension::None => factors.push(last),
        Extension::TwistSecond { curve, power } => {
            if *power != 0 {
                let end = c.word.len();
                let bm = Word::letter(curve, *power);
                c.step(Step::Insert {
                    at: end,
                    word: bm.concat(&bm.inverse()),
                })?;
                for at in [end - 1, end - 2, end - 3] {
                    c.step(Step::Swap { at })?;
                }
                c.step(Step::Swap { at: end })?;
                last.v = last.v.concat(&bm);
            }
            factors.push(last);
        }
        Extension::TrailingPair { curve, power } => {
            factors.push(last);
            let u = if *power == 0 {
                Word::identity()
            } else {
                Word::letter(curve, *power)
            };
            let pair = CommutatorPair::new(u, Word::identity());
            let end = c.word.len();
            c.step(Step::Insert {
                at: end,
                word: pair.expand(),
            })?;
            factors.push(pair);
        }
    }
    let count = factors.len();
    let f = CommutatorFactorization {
        target,
        factors,
        count,
        derivation: c.finish(),
    };
    if f.derivation.end.letters() != f.expanded().letters() {
        return Err(RewriteError::NotApplicable("bracket bookkeeping went wrong".into()));
    }
    Ok(f)
}

pub fn commutatorize_even_power(k: i64, oracles: &OracleSet) -> Result<CommutatorFactorization, RewriteError> {
    lifted_factorization(k, &Extension::None, oracles)
}

/// Derives `1 = ∏ [u_i, v_i]` from the empty word: brackets that freely
/// cancel are inserted whole, others as `u v v⁻¹ u⁻¹` followed by swaps that
/// need `v` to commute with `u`.
pub fn derive_trivial_product(pairs: &[CommutatorPair], oracles: &OracleSet) -> Result<Derivation, RewriteError> {
    let mut c = Chain::new(Word::empty(), oracles);
    for p in pairs {
        let at = c.word.len();
        let e = p.expand();
        if e.is_trivial() {
            c.step(Step::Insert { at, word: e })?;
            continue;
        }
        let (nu, nv) = (p.u.len(), p.v.len());
        c.step(Step::Insert {
            at,
            word: p.u.concat(&p.v).concat(&p.v.inverse()).concat(&p.u.inverse()),
        })?;
        // u v [v⁻¹ u⁻¹] → u v [u⁻¹ v⁻¹]
        let mut target: Vec<Power> = c.word.letters()[..at + nu + nv].to_vec();
        target.extend(p.u.inverse().into_letters());
        target.extend(p.v.inverse().into_letters());
        c.permute_to(&target)?;
    }
    Ok(c.finish())
}

/// Images of symbols under capping the boundary of the genus-two piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapRules {
    pub genus: usize,
    pub images: BTreeMap<String, Word>,
}

impl CapRules {
    /// `t_δ, phi, psi ↦ 1`, `x_i ↦ a_i`, `a4 ↦ a1`. For genus two the third
    /// hole curve joins the second, so `a3, x3 ↦ a2`, and the extra curve is
    /// `b1`; otherwise it is `b`.
    pub fn for_genus(g: usize) -> Result<CapRules, RewriteError> {
        if g < 2 {
            return Err(RewriteError::InvalidArgument(format!("capping needs genus at least 2, got {g}")));
        }
        let mut images: BTreeMap<String, Word> = BTreeMap::new();
        for s in [DELTA, PHI, PSI, IDENTITY] {
            images.insert(s.into(), Word::empty());
        }
        let a3 = if g == 2 { "a2" } else { "a3" };
        for (from, to) in [
            ("a1", "a1"),
            ("a2", "a2"),
            ("a3", a3),
            ("a4", "a1"),
            ("x1", "a1"),
            ("x2", "a2"),
            ("x3", a3),
            ("x4", "a1"),
        ] {
            images.insert(from.into(), Word::letter(to, 1));
        }
        let extra = if g == 2 { "b1" } else { "b" };
        images.insert(extra.into(), Word::letter(extra, 1));
        Ok(CapRules { genus: g, images })
    }

    /// The image word, freely reduced.
    pub fn cap(&self, w: &Word) -> Result<Word, RewriteError> {
        let out = w.substitute(|s| {
            self.images
                .get(s)
                .cloned()
                .ok_or_else(|| RewriteError::NoCapRule(s.to_string()))
        })?;
        Ok(out.reduced())
    }

    /// Entries that cap to nothing become the identity symbol `1`.
    pub fn cap_pair(&self, p: &CommutatorPair) -> Result<CommutatorPair, RewriteError> {
        let entry = |w: &Word| -> Result<Word, RewriteError> {
            let c = self.cap(w)?;
            Ok(if c.is_empty() { Word::identity() } else { c })
        };
        Ok(CommutatorPair::new(entry(&p.u)?, entry(&p.v)?))
    }
}

pub fn cap_boundary(w: &Word, rules: &CapRules) -> Result<Word, RewriteError> {
    rules.cap(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    fn planar5() -> OracleSet {
        OracleSet::planar(&planar::holed_sphere(5).unwrap()).unwrap()
    }

    #[test]
    fn trivial_and_single_step_derivations() {
        let o = planar5();
        let d = Derivation {
            start: w("a1 x3"),
            end: w("a1 x3"),
            steps: vec![],
        };
        assert!(check_derivation(&d, &o).holds());
        let d = Derivation {
            start: w("a1 x3"),
            end: w("x3 a1"),
            steps: vec![Step::Swap { at: 0 }],
        };
        match check_derivation(&d, &o) {
            CheckOutcome::Holds { oracles, axioms, weakest } => {
                assert_eq!(oracles, ["commute(a1,x3)"]);
                assert!(axioms.is_empty());
                assert_eq!(weakest, Some(Provenance::PlanarVerified));
            }
            other => panic!("{other:?}"),
        }
        let without = o.without("commute(a1,x3)");
        assert_eq!(check_derivation(&d, &without), CheckOutcome::Fails {
            step: 0,
            reason: "no license to swap `a1` and `x3`".into()
        });
        let d = Derivation {
            start: w("x1 x2"),
            end: w("x2 x1"),
            steps: vec![Step::Swap { at: 0 }],
        };
        assert!(!check_derivation(&d, &o).holds());
    }

    #[test]
    fn malformed_steps_fail() {
        let o = planar5();
        let cases = [
            (w("a1"), Step::Swap { at: 0 }),
            (w("a1"), Step::Insert { at: 0, word: w("a1") }),
            (w("a1 a2"), Step::Delete { at: 0, len: 2 }),
            (w("a1^2"), Step::Split { at: 0, first: 2 }),
            (w("a1 a1^-1"), Step::Merge { at: 0 }),
            (w("x1"), Step::Expand { at: 0, by: "psi".into() }),
            (
                w("delta a1"),
                Step::Substitute {
                    at: 0,
                    relation: "daisy".into(),
                    reverse: false,
                },
            ),
        ];
        for (start, step) in cases {
            let d = Derivation {
                end: start.clone(),
                start,
                steps: vec![step.clone()],
            };
            assert!(!check_derivation(&d, &o).holds(), "{step}");
        }
    }

    #[test]
    fn power_derivation_matches_the_exact_relation() {
        let o = planar5();
        let m = planar::holed_sphere(5).unwrap();
        for k in 1..=4 {
            let d = derive_power_relation(k, &o).unwrap();
            let r = planar::power_relation(k).unwrap();
            assert_eq!(d.end.letters(), r.rhs.letters());
            assert_eq!(d.start, r.lhs);
            assert!(check_derivation(&d, &o).holds());
            assert!(planar::verify_relation(&m, &r).unwrap().holds());
        }
        assert!(derive_power_relation(0, &o).is_err());
    }

    #[test]
    fn every_used_oracle_is_needed() {
        let o = planar5();
        for k in 1..=2 {
            let d = derive_power_relation(k, &o).unwrap();
            let CheckOutcome::Holds { oracles, .. } = check_derivation(&d, &o) else {
                panic!("derivation fails");
            };
            assert!(oracles.contains(&"relation(daisy)".to_string()));
            for label in &oracles {
                assert!(!check_derivation(&d, &o.without(label)).holds(), "k={k} {label}");
            }
            // the chain never moves t_δ past t_{x1}
            assert!(!oracles.contains(&"commute(delta,x1)".to_string()));
        }
    }

    #[test]
    fn commutator_insertion() {
        let o = OracleSet::phi_psi_axioms();
        let (pair, d) = insert_commutator(&w("x3^2 a4^-2 x4^2 a3^-2"), PSI, &o).unwrap();
        assert_eq!(pair.to_string(), "[x3^2 a4^-2, psi]");
        assert!(check_derivation(&d, &o).holds());
        let (pair, _) = insert_commutator(&w("x1 a2^-1 x2 a1^-1"), PHI, &o).unwrap();
        assert_eq!(pair.to_string(), "[x1 a2^-1, phi]");
        assert!(insert_commutator(&w("x1 1"), PHI, &o).is_err());
        assert!(insert_commutator(&w("x1 a2^-1 x2"), PHI, &o).is_err());
        assert!(insert_commutator(&w("x1 a2^-1 x2 a1^-1"), PSI, &o).is_err());
    }

    #[test]
    fn even_powers_as_commutators() {
        let mut o = planar5();
        o.extend(OracleSet::phi_psi_axioms());
        for k in 1..=6 {
            let f = commutatorize_even_power(k, &o).unwrap();
            assert_eq!(f.count, k as usize + 1);
            match f.certify(&o) {
                CheckOutcome::Holds { axioms, weakest, .. } => {
                    assert_eq!(axioms.len(), 4);
                    assert_eq!(weakest, Some(Provenance::Axiom));
                }
                other => panic!("k={k}: {other:?}"),
            }
        }
        let f = commutatorize_even_power(2, &o).unwrap();
        assert_eq!(f.factors[1].to_string(), "[x3 x1 a2^-1 x3^-1, x3 phi x3^-1]");
        assert_eq!(f.factors[2].to_string(), "[x3^2 a4^-2, psi]");
        for ax in OracleSet::phi_psi_axioms().oracles() {
            assert!(!f.certify(&o.without(&ax.label())).holds(), "{}", ax.label());
        }
    }

    #[test]
    fn extensions() {
        let mut o = OracleSet::standard().unwrap();
        o.extend(OracleSet::outside_curve_axioms("b1"));
        let f = lifted_factorization(
            2,
            &Extension::TwistSecond {
                curve: "b".into(),
                power: 3,
            },
            &o,
        )
        .unwrap();
        assert_eq!(f.factors.last().unwrap().to_string(), "[x3^2 a4^-2, psi b^3]");
        assert!(f.certify(&o).holds());
        assert!(!f.certify(&o.without("commute(psi,b)")).holds());
        let f = lifted_factorization(
            1,
            &Extension::TrailingPair {
                curve: "b1".into(),
                power: 2,
            },
            &o,
        )
        .unwrap();
        assert_eq!(f.count, 3);
        assert_eq!(f.factors[2].to_string(), "[b1^2, 1]");
        assert!(f.certify(&o).holds());
        let f = lifted_factorization(
            1,
            &Extension::TrailingPair {
                curve: "b1".into(),
                power: 0,
            },
            &o,
        )
        .unwrap();
        assert_eq!(f.factors[2].to_string(), "[1, 1]");
        assert!(f.certify(&o).holds());
    }

    #[test]
    fn capping() {
        let r3 = CapRules::for_genus(3).unwrap();
        assert!(r3.cap(&w("delta^4")).unwrap().is_empty());
        let p = r3.cap_pair(&CommutatorPair::new(w("x1 a2^-1"), w("phi"))).unwrap();
        assert_eq!(p.to_string(), "[a1 a2^-1, 1]");
        let p = r3.cap_pair(&CommutatorPair::new(w("x3^2 a4^-2"), w("psi b^5"))).unwrap();
        assert_eq!(p.to_string(), "[a3^2 a1^-2, b^5]");
        let r2 = CapRules::for_genus(2).unwrap();
        let p = r2.cap_pair(&CommutatorPair::new(w("x3^2 a4^-2"), w("psi"))).unwrap();
        assert_eq!(p.to_string(), "[a2^2 a1^-2, 1]");
        assert_eq!(r3.cap(&w("q")).unwrap_err(), RewriteError::NoCapRule("q".into()));
        assert!(CapRules::for_genus(1).is_err());
        let (u, v) = (w("x1 a2^-1 phi"), w("x3 psi delta^2 a4"));
        assert_eq!(r3.cap(&u.concat(&v)).unwrap(), r3.cap(&u).unwrap().concat(&r3.cap(&v).unwrap()).reduced());
    }

    #[test]
    fn capped_products_derive_from_the_empty_word() {
        let mut o = OracleSet::new();
        for a in ["a1", "a2", "a3"] {
            o.push(Oracle::Commute {
                u: "b".into(),
                v: a.into(),
                provenance: Provenance::Declared,
            });
        }
        let pairs = vec![
            CommutatorPair::new(w("a1 a2^-1"), Word::identity()),
            CommutatorPair::new(w("a3^2 a1^-2"), w("b^5")),
        ];
        let d = derive_trivial_product(&pairs, &o).unwrap();
        assert_eq!(d.end, Word::product([pairs[0].expand(), pairs[1].expand()].iter()));
        assert!(check_derivation(&d, &o).holds());
        assert!(derive_trivial_product(&pairs, &OracleSet::new()).is_err());
    }

    #[test]
    fn scripts_round_trip() {
        let o = OracleSet::standard().unwrap();
        let f = commutatorize_even_power(2, &o).unwrap();
        let text = f.derivation.to_script();
        let back = Derivation::parse_script(&text).unwrap();
        assert_eq!(back, f.derivation);
        assert!(check_derivation(&back, &o).holds());
        assert!(matches!(
            Derivation::parse_script("start a1\nend a1\nfrobnicate 3\n"),
            Err(RewriteError::Script { line: 3, .. })
        ));
        assert!(Derivation::parse_script("end a1\n").is_err());
    }
}
