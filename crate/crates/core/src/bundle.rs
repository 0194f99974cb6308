//! Surface bundles over surfaces through their monodromy factorizations.
//!
//! A genus-`g` bundle over a genus-`h` base is a factorization
//! `1 = ∏_{i=1}^h [α_i, β_i]` in the mapping class group of the closed fiber.
//! A lift `t_δ^n = ∏ [α̃_i, β̃_i]` over the one-holed fiber gives a section
//! with self-intersection `e = −n`. Two families are built here from the
//! power relation on the five-holed sphere:
//!
//! * `X_m` with fiber genus `g ≥ 3` over base genus `h = k + 1`, last pair
//!   `[t_{a3}^k t_{a1}^{-k}, t_b^m]`;
//! * `Y_m` with fiber genus 2 over base genus `H = k + 2`, with an extra pair
//!   `[t_{b1}^m, 1]`, so the section has `|e| = 2H − 4`.
//!
//! Factorization text format, one record per line (`#` starts a comment):
//!
//! ```text
//! fiber 3
//! base 2
//! boundary-power 2          optional; present for lifts
//! pair a1 a2^-1 | 1
//! pair a3 a1^-1 | b^5
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::homology::{ClassTable, HomologyError};
use crate::matrix::IntMatrix;
use crate::model::{CatalogError, CurveEntry, CurveKind, ModelKind, SurfaceModel};
use crate::planar::{RelationWord, Verdict};
use crate::rewrite::{
    self, CapRules, CheckOutcome, CommutatorFactorization, CommutatorPair, Extension, OracleSet, Provenance,
    RewriteError,
};
use crate::snf::{cokernel, AbelianGroup};
use crate::word::{Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("uncertified: {0}")]
    Uncertified(String),
    #[error("no class assignment passes the homology check: {0}")]
    GateFailed(String),
    #[error("factorization line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub section_admissible: bool,
    pub flat_parallel_admissible: bool,
}

/// Bounds on the self-intersection `e` of a section of a bundle over a
/// genus-`h` base: `|e| ≤ 2h − 2` always, `|e| ≤ h − 1` when the bundle is
/// flat with the section parallel.
pub fn milnor_wood(h: i64, e: i64) -> Result<Admissibility, BundleError> {
    if h < 1 {
        return Err(BundleError::Range(format!("base genus must be at least 1, got {h}")));
    }
    Ok(Admissibility {
        section_admissible: e.abs() <= 2 * h - 2,
        flat_parallel_admissible: e.abs() <= h - 1,
    })
}

/// Commutators needed to write `t_δ^n`: `⌊(n + 3)/2⌋`.
pub fn cl_floor(n: i64) -> Result<i64, BundleError> {
    if n < 1 {
        return Err(BundleError::Range(format!("n must be at least 1, got {n}")));
    }
    Ok((n + 3).div_euclid(2))
}

/// Stable commutator length of `t_δ`, the limit of `cl_floor(n)/n`.
pub fn scl_tdelta() -> Ratio<i64> {
    Ratio::new(1, 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonodromyFactorization {
    pub fiber_genus: usize,
    pub base_genus: usize,
    pub pairs: Vec<CommutatorPair>,
}

impl MonodromyFactorization {
    pub fn new(fiber_genus: usize, pairs: Vec<CommutatorPair>) -> Result<Self, BundleError> {
        if fiber_genus < 2 || pairs.is_empty() {
            return Err(BundleError::Range(format!(
                "need fiber genus ≥ 2 and at least one pair, got {fiber_genus} and {}",
                pairs.len()
            )));
        }
        Ok(MonodromyFactorization {
            fiber_genus,
            base_genus: pairs.len(),
            pairs,
        })
    }

    /// `∏ [α_i, β_i]`, unreduced.
    pub fn product(&self) -> Word {
        Word::product(self.pairs.iter().map(CommutatorPair::expand).collect::<Vec<_>>().iter())
    }

    /// Every entry conjugated by `g`.
    pub fn conjugated_by(&self, g: &Word) -> MonodromyFactorization {
        MonodromyFactorization {
            pairs: self.pairs.iter().map(|p| p.conjugated_by(g)).collect(),
            ..self.clone()
        }
    }

    pub fn to_text(&self, boundary_power: Option<i64>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fiber {}", self.fiber_genus);
        let _ = writeln!(out, "base {}", self.base_genus);
        if let Some(n) = boundary_power {
            let _ = writeln!(out, "boundary-power {n}");
        }
        for p in &self.pairs {
            let _ = writeln!(out, "pair {} | {}", p.u, p.v);
        }
        out
    }

    /// Parses the text format; returns the factorization and the boundary
    /// power if one is given.
    pub fn parse_text(text: &str) -> Result<(MonodromyFactorization, Option<i64>), BundleError> {
        let (mut fiber, mut base, mut power) = (None, None, None);
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| BundleError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (head, rest) = content.split_once(' ').unwrap_or((content, ""));
            let number = |s: &str| -> Result<i64, BundleError> {
                s.trim().parse().map_err(|_| err(format!("`{}` is not an integer", s.trim())))
            };
            let word = |s: &str| -> Result<Word, BundleError> {
                s.trim().parse().map_err(|e: WordError| err(e.to_string()))
            };
            match head {
                "fiber" => fiber = Some(number(rest)?),
                "base" => base = Some(number(rest)?),
                "boundary-power" => power = Some(number(rest)?),
                "pair" => {
                    let (u, v) = rest.split_once('|').ok_or_else(|| err("expected `pair <word> | <word>`".into()))?;
                    pairs.push(CommutatorPair::new(word(u)?, word(v)?));
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let end = text.lines().count();
        let fiber = fiber.ok_or(BundleError::Parse {
            line: end,
            message: "missing `fiber`".into(),
        })?;
        let f = MonodromyFactorization::new(usize::try_from(fiber).unwrap_or(0), pairs)?;
        if let Some(b) = base {
            if b != f.base_genus as i64 {
                return Err(BundleError::Parse {
                    line: end,
                    message: format!("`base {b}` but {} pairs", f.base_genus),
                });
            }
        }
        Ok((f, power))
    }
}

/// Ordered from strongest to weakest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateLevel {
    PlanarExact,
    DerivationWithAxioms,
    HomologyOnly,
}

impl CertificateLevel {
    pub fn from_outcome(o: &CheckOutcome) -> Option<CertificateLevel> {
        match o {
            CheckOutcome::Holds { weakest, .. } => Some(match weakest {
                Some(Provenance::Axiom) => CertificateLevel::DerivationWithAxioms,
                _ => CertificateLevel::PlanarExact,
            }),
            CheckOutcome::Fails { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftedFactorization {
    pub base: MonodromyFactorization,
    pub boundary_power: i64,
    pub lift: CommutatorFactorization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SelfIntersection {
    /// `−n` for boundary twist power `n`.
    pub e: i64,
    pub abs: i64,
}

/// `e = −n`, after re-checking the lift.
pub fn section_selfintersection(f: &LiftedFactorization, oracles: &OracleSet) -> Result<SelfIntersection, BundleError> {
    if f.lift.target != Word::letter(crate::planar::DELTA, f.boundary_power) {
        return Err(BundleError::Uncertified(format!(
            "lift starts at `{}`, not the boundary twist power {}",
            f.lift.target, f.boundary_power
        )));
    }
    match f.lift.certify(oracles) {
        CheckOutcome::Holds { .. } => Ok(SelfIntersection {
            e: -f.boundary_power,
            abs: f.boundary_power.abs(),
        }),
        CheckOutcome::Fails { step, reason } => Err(BundleError::Uncertified(format!("step {step}: {reason}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionRecord {
    pub name: String,
    pub self_intersection: i64,
    pub disjoint_from: BTreeSet<String>,
}

impl SectionRecord {
    /// Accepts the record only if `|e| ≤ 2h − 2`.
    pub fn new(name: &str, e: i64, base_genus: usize, disjoint_from: &[&str]) -> Result<Self, BundleError> {
        if !milnor_wood(base_genus as i64, e)?.section_admissible {
            return Err(BundleError::Range(format!(
                "section `{name}` with |e| = {} over base genus {base_genus}",
                e.abs()
            )));
        }
        Ok(SectionRecord {
            name: name.into(),
            self_intersection: e,
            disjoint_from: disjoint_from.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// Symmetric table of declared-disjoint twist symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DisjointnessTable {
    pairs: BTreeSet<(String, String)>,
}

impl DisjointnessTable {
    pub fn from_model(model: &SurfaceModel) -> Self {
        let mut t = DisjointnessTable::default();
        for c in model.curves() {
            for d in &c.disjoint_with {
                t.declare(&c.name, d);
            }
        }
        t
    }

    pub fn declare(&mut self, a: &str, b: &str) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.pairs.insert((x.to_string(), y.to_string()));
    }

    pub fn disjoint(&self, a: &str, b: &str) -> bool {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.pairs.contains(&(x.to_string(), y.to_string()))
    }

    /// The table with every declaration involving `symbol` dropped.
    pub fn without(&self, symbol: &str) -> Self {
        DisjointnessTable {
            pairs: self.pairs.iter().filter(|(a, b)| a != symbol && b != symbol).cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BracketJustification {
    SecondEntryIdentity,
    SupportDisjointness { pairs: Vec<(String, String)> },
    Unjustified { intersecting: (String, String) },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlatnessVerdict {
    Certified,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatnessCertificate {
    pub brackets: Vec<BracketJustification>,
    pub verdict: FlatnessVerdict,
}

fn twist_symbols(w: &Word) -> BTreeSet<&str> {
    w.letters().iter().filter(|p| !p.is_identity()).map(|p| p.symbol.as_str()).collect()
}

/// Lifting each twist to a twist supported near its curve, a bracket lifts
/// to the identity when its second entry is trivial or when every symbol of
/// one entry is disjoint from every symbol of the other.
pub fn flatness_certificate(f: &MonodromyFactorization, table: &DisjointnessTable) -> FlatnessCertificate {
    let brackets: Vec<BracketJustification> = f
        .pairs
        .iter()
        .map(|p| {
            let v = p.v.reduced();
            let (us, vs) = (twist_symbols(&p.u), twist_symbols(&v));
            if vs.is_empty() {
                return BracketJustification::SecondEntryIdentity;
            }
            let mut pairs = Vec::new();
            for a in &us {
                for b in &vs {
                    if a == b {
                        continue;
                    }
                    if !table.disjoint(a, b) {
                        return BracketJustification::Unjustified {
                            intersecting: (a.to_string(), b.to_string()),
                        };
                    }
                    pairs.push((a.to_string(), b.to_string()));
                }
            }
            BracketJustification::SupportDisjointness { pairs }
        })
        .collect();
    let verdict = if brackets.iter().any(|b| matches!(b, BracketJustification::Unjustified { .. })) {
        FlatnessVerdict::Unknown
    } else {
        FlatnessVerdict::Certified
    };
    FlatnessCertificate { brackets, verdict }
}

/// `H₁` of the total space: `Z^{2h}` from the base plus the coinvariants of
/// the fiber, `H₁(Σ_g) / span{(M − I)x}` over all monodromy entries `M`.
pub fn h1_total_space(f: &MonodromyFactorization, table: &ClassTable) -> Result<AbelianGroup, BundleError> {
    let n = table.space.dim();
    if table.space.genus != f.fiber_genus {
        return Err(BundleError::Range(format!(
            "class table has genus {}, factorization has fiber genus {}",
            table.space.genus, f.fiber_genus
        )));
    }
    let mut relations = IntMatrix::zeros(n, 0);
    for p in &f.pairs {
        for w in [&p.u, &p.v] {
            let m = table.word_to_matrix(w)?;
            let d = m.try_sub(&IntMatrix::identity(n)).expect("square of the same size");
            relations = relations.hconcat(&d).expect("same row count");
        }
    }
    Ok(AbelianGroup::free(2 * f.base_genus).direct_sum(&cokernel(&relations)))
}

/// A bundle with `b₁` odd and `b₂ > 0` admits no complex structure with
/// either orientation.
pub fn complex_obstruction(b1: u64, b2: u64) -> bool {
    b1 % 2 == 1 && b2 > 0
}

/// `b₂` of the total space from its Euler characteristic
/// `(2 − 2g)(2 − 2h) = 2 − 2b₁ + b₂`.
pub fn second_betti(fiber_genus: usize, base_genus: usize, b1: usize) -> i64 {
    let (g, h) = (fiber_genus as i64, base_genus as i64);
    (2 - 2 * g) * (2 - 2 * h) - 2 + 2 * b1 as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Xm,
    Ym,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCertificate {
    /// The lift `t_δ^n = ∏[α̃_i, β̃_i]` over the one-holed fiber.
    pub lift: CheckOutcome,
    /// `1 = ∏[α_i, β_i]` on the closed fiber, from declared disjointness.
    pub closed: CheckOutcome,
    /// The same relation acting on `H₁` of the fiber.
    pub homology: Verdict,
    /// Weakest level among the three.
    pub level: Option<CertificateLevel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyMember {
    pub family: Family,
    pub m: i64,
    pub k: i64,
    pub factorization: MonodromyFactorization,
    pub lift: LiftedFactorization,
    pub sections: Vec<SectionRecord>,
    pub self_intersection: SelfIntersection,
    pub certificate: RelationCertificate,
}

/// Planar oracles, `phi`/`psi` axioms and axioms for `b` and `b1`.
pub fn lift_oracles() -> &'static OracleSet {
    static CELL: OnceLock<OracleSet> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut set = OracleSet::standard().expect("the five-holed sphere verifies");
        set.extend(OracleSet::outside_curve_axioms("b1"));
        set
    })
}

/// Classes on the closed fiber, gated by the `H₁` formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GatedClassTable {
    pub table: ClassTable,
    pub model_curves: Vec<String>,
    /// Candidates for the third hole curve and whether each passes.
    pub candidates: Vec<(String, bool)>,
    pub chosen: String,
}

fn class_label(c: &[i64]) -> String {
    let space = crate::homology::SymplecticSpace::new(c.len() / 2);
    let mut s = String::new();
    for (i, &x) in c.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let sign = if x < 0 { "-" } else if s.is_empty() { "" } else { "+" };
        let mag = if x.abs() == 1 { String::new() } else { x.abs().to_string() };
        let _ = write!(s, "{sign}{mag}{}", space.basis_label(i));
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn unit(genus: usize, idx: usize, sign: i64) -> Vec<i64> {
    let mut v = vec![0; 2 * genus];
    v[idx] = sign;
    v
}

/// Closed fiber of genus `g` with `a1 = u1`, `a2 = u2`, the given `a3`,
/// `b = u3` and `b1 = v1` (for `g = 2` only `a1, a2, b1`). Disjointness:
/// the `a_i` pairwise, `b` from every `a_i`, `b1` from everything but `a1`.
pub fn closed_fiber_model(g: usize, a3: Option<Vec<i64>>) -> Result<SurfaceModel, BundleError> {
    if g < 2 {
        return Err(BundleError::Range(format!("fiber genus must be at least 2, got {g}")));
    }
    let mut entries: Vec<(&str, Vec<i64>)> = vec![("a1", unit(g, 0, 1)), ("a2", unit(g, 2, 1))];
    if g >= 3 {
        entries.push(("a3", a3.unwrap_or_else(|| unit(g, 2, 1))));
        entries.push(("b", unit(g, 4, 1)));
    }
    entries.push(("b1", unit(g, 1, 1)));
    let names: Vec<&str> = entries.iter().map(|(n, _)| *n).collect();
    let disjoint = |a: &str, b: &str| -> bool {
        if a == b {
            return false;
        }
        let is_a = |s: &str| s.starts_with('a');
        (is_a(a) && is_a(b)) || (a == "b" || b == "b") || ((a == "b1" || b == "b1") && a != "a1" && b != "a1")
    };
    let curves = entries
        .iter()
        .map(|(name, class)| CurveEntry {
            name: name.to_string(),
            kind: CurveKind::Abstract,
            disjoint_with: names.iter().filter(|o| disjoint(name, o)).map(|o| o.to_string()).collect(),
            class: Some(class.clone()),
            action: None,
        })
        .collect();
    Ok(SurfaceModel::new(
        ModelKind::ClosedGenus { genus: g },
        None,
        curves,
        vec![],
        vec![],
    )?)
}

fn xm_formula(g: usize, h: usize, m: i64) -> AbelianGroup {
    AbelianGroup::free(2 * h + 2 * g - 3).direct_sum(&AbelianGroup::from_cyclic_orders(&[BigInt::from(m)]))
}

fn ym_formula(base: usize, m: i64) -> AbelianGroup {
    AbelianGroup::free(2 * base + 1).direct_sum(&AbelianGroup::from_cyclic_orders(&[BigInt::from(m)]))
}

/// Tries candidate classes for `a3` and keeps the first whose table
/// reproduces `H₁(X_m) = Z^{2h+2g−3} ⊕ Z_m` for `h ∈ {2, 3}`, `m ∈ 0..=6`.
/// The result is cached per genus.
pub fn xm_class_table(g: usize) -> Result<(GatedClassTable, SurfaceModel), BundleError> {
    type Cache = Mutex<BTreeMap<usize, (GatedClassTable, SurfaceModel)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache lock").get(&g) {
        return Ok(hit.clone());
    }
    let gated = gate_xm_class_table(g)?;
    cache.lock().expect("cache lock").insert(g, gated.clone());
    Ok(gated)
}

fn gate_xm_class_table(g: usize) -> Result<(GatedClassTable, SurfaceModel), BundleError> {
    if g < 3 {
        return Err(BundleError::Range(format!("X_m needs fiber genus at least 3, got {g}")));
    }
    let mut cands: Vec<Vec<i64>> = Vec::new();
    for idx in [2, 0, 4] {
        for s in [1, -1] {
            cands.push(unit(g, idx, s));
        }
    }
    for s in [1, -1] {
        let mut c = unit(g, 0, 1);
        c[2] = s;
        cands.push(c);
    }
    if g >= 4 {
        cands.push(unit(g, 6, 1));
    }
    let mut report = Vec::new();
    let mut chosen = None;
    for c in cands {
        let model = closed_fiber_model(g, Some(c.clone()))?;
        let table = ClassTable::from_model(&model)?;
        let mut ok = true;
        'grid: for h in 2..=3 {
            for m in 0..=6 {
                let f = xm_factorization(g, h, m)?;
                if h1_total_space(&f, &table)? != xm_formula(g, h, m) {
                    ok = false;
                    break 'grid;
                }
            }
        }
        report.push((class_label(&c), ok));
        if ok && chosen.is_none() {
            chosen = Some((class_label(&c), table, model));
        }
    }
    let (label, table, model) = chosen.ok_or_else(|| BundleError::GateFailed(format!("genus {g}")))?;
    Ok((
        GatedClassTable {
            model_curves: model.curves().iter().map(|c| c.name.clone()).collect(),
            table,
            candidates: report,
            chosen: label,
        },
        model,
    ))
}

/// The genus-2 table, accepted only if it reproduces
/// `H₁(Y_m) = Z^{2H+1} ⊕ Z_m` for `H ∈ {3, 4, 5}`, `m ∈ 0..=6`.
pub fn ym_class_table() -> Result<(GatedClassTable, SurfaceModel), BundleError> {
    let model = closed_fiber_model(2, None)?;
    let table = ClassTable::from_model(&model)?;
    for base in 3..=5 {
        for m in 0..=6 {
            let f = ym_factorization(base, m)?;
            if h1_total_space(&f, &table)? != ym_formula(base, m) {
                return Err(BundleError::GateFailed(format!("genus 2 at H = {base}, m = {m}")));
            }
        }
    }
    Ok((
        GatedClassTable {
            model_curves: model.curves().iter().map(|c| c.name.clone()).collect(),
            table,
            candidates: vec![],
            chosen: "a1=u1 a2=u2 b1=v1".into(),
        },
        model,
    ))
}

fn xm_lift(h: usize, m: i64) -> Result<CommutatorFactorization, BundleError> {
    let k = h as i64 - 1;
    Ok(rewrite::lifted_factorization(
        k,
        &Extension::TwistSecond {
            curve: "b".into(),
            power: m,
        },
        lift_oracles(),
    )?)
}

fn ym_lift(base: usize, m: i64) -> Result<CommutatorFactorization, BundleError> {
    let k = base as i64 - 2;
    Ok(rewrite::lifted_factorization(
        k,
        &Extension::TrailingPair {
            curve: "b1".into(),
            power: m,
        },
        lift_oracles(),
    )?)
}

fn capped(g: usize, lift: &CommutatorFactorization) -> Result<MonodromyFactorization, BundleError> {
    let rules = CapRules::for_genus(g)?;
    let pairs = lift.factors.iter().map(|p| rules.cap_pair(p)).collect::<Result<Vec<_>, _>>()?;
    MonodromyFactorization::new(g, pairs)
}

fn check_xm(g: usize, h: usize, m: i64) -> Result<(), BundleError> {
    if g < 3 || h < 2 || m < 0 {
        return Err(BundleError::Range(format!("X_m needs g ≥ 3, h ≥ 2, m ≥ 0; got ({g}, {h}, {m})")));
    }
    Ok(())
}

/// The capped factorization of `X_m` without certificates.
pub fn xm_factorization(g: usize, h: usize, m: i64) -> Result<MonodromyFactorization, BundleError> {
    check_xm(g, h, m)?;
    capped(g, &xm_lift(h, m)?)
}

pub fn ym_factorization(base: usize, m: i64) -> Result<MonodromyFactorization, BundleError> {
    if base < 3 || m < 0 {
        return Err(BundleError::Range(format!("Y_m needs base genus ≥ 3 and m ≥ 0; got ({base}, {m})")));
    }
    capped(2, &ym_lift(base, m)?)
}

fn assemble(
    family: Family,
    m: i64,
    k: i64,
    lift: CommutatorFactorization,
    factorization: MonodromyFactorization,
    model: &SurfaceModel,
    table: &ClassTable,
) -> Result<FamilyMember, BundleError> {
    let h = factorization.base_genus;
    let lifted = LiftedFactorization {
        base: factorization.clone(),
        boundary_power: 2 * k,
        lift,
    };
    let oracles = lift_oracles();
    let si = section_selfintersection(&lifted, oracles)?;
    let lift_outcome = lifted.lift.certify(oracles);
    let closed_oracles = OracleSet::declared(model);
    let closed_derivation = rewrite::derive_trivial_product(&factorization.pairs, &closed_oracles)?;
    let closed = rewrite::check_derivation(&closed_derivation, &closed_oracles);
    let homology = table.check_identity_homology(&RelationWord {
        lhs: Word::empty(),
        rhs: factorization.product(),
    })?;
    let level = match (CertificateLevel::from_outcome(&lift_outcome), CertificateLevel::from_outcome(&closed)) {
        (Some(a), Some(b)) if homology.holds() => Some(a.max(b)),
        (None, _) | (_, None) if homology.holds() => Some(CertificateLevel::HomologyOnly),
        _ => None,
    };
    let sections = vec![
        SectionRecord::new("S", si.e, h, &["S0"])?,
        SectionRecord::new("S0", 0, h, &["S"])?,
    ];
    Ok(FamilyMember {
        family,
        m,
        k,
        factorization,
        lift: lifted,
        sections,
        self_intersection: si,
        certificate: RelationCertificate {
            lift: lift_outcome,
            closed,
            homology,
            level,
        },
    })
}

/// `X_m`: fiber genus `g ≥ 3` over base genus `h ≥ 2`, with sections `S`
/// (`|e| = 2h − 2`) and `S0` (`e = 0`).
pub fn build_xm(g: usize, h: usize, m: i64) -> Result<(FamilyMember, GatedClassTable), BundleError> {
    check_xm(g, h, m)?;
    let (gated, model) = xm_class_table(g)?;
    let lift = xm_lift(h, m)?;
    let f = capped(g, &lift)?;
    let member = assemble(Family::Xm, m, h as i64 - 1, lift, f, &model, &gated.table)?;
    Ok((member, gated))
}

/// `Y_m`: fiber genus 2 over base genus `H ≥ 3`, section `|e| = 2H − 4`.
pub fn build_ym(base: usize, m: i64) -> Result<(FamilyMember, GatedClassTable), BundleError> {
    let f = ym_factorization(base, m)?;
    let (gated, model) = ym_class_table()?;
    let lift = ym_lift(base, m)?;
    let member = assemble(Family::Ym, m, base as i64 - 2, lift, f, &model, &gated.table)?;
    Ok((member, gated))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistinguisherReport {
    pub labels: Vec<String>,
    pub groups: Vec<AbelianGroup>,
    /// `equal[i][j]` iff the two `H₁` agree.
    pub equal: Vec<Vec<bool>>,
    pub collisions: Vec<(usize, usize)>,
}

pub fn family_distinguisher(
    items: &[(String, MonodromyFactorization)],
    table: &ClassTable,
) -> Result<DistinguisherReport, BundleError> {
    let groups = items
        .iter()
        .map(|(_, f)| h1_total_space(f, table))
        .collect::<Result<Vec<_>, _>>()?;
    let n = groups.len();
    let equal: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| groups[i] == groups[j]).collect()).collect();
    let collisions = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| equal[i][j])
        .collect();
    Ok(DistinguisherReport {
        labels: items.iter().map(|(l, _)| l.clone()).collect(),
        groups,
        equal,
        collisions,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonliftConclusion {
    /// The marked-point monodromy image admits no lift to diffeomorphisms.
    NoLift,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonliftReport {
    pub family: Family,
    pub fiber_genus: usize,
    pub base_genus: usize,
    pub m: i64,
    pub factorization: MonodromyFactorization,
    pub sections: Vec<SectionRecord>,
    pub self_intersection: SelfIntersection,
    /// `h − 1`, the bound for a parallel section of a flat bundle.
    pub parallel_bound: i64,
    pub violation: bool,
    pub conclusion: NonliftConclusion,
}

/// `r` pairwise disjoint sections: `S` and `r − 1` push-offs of `S0`. If the
/// bundle is flat and `|e(S)| > h − 1`, a lift of the monodromy fixing `r`
/// points would make `S` parallel, which the bound rules out. Fiber genus 2
/// selects `Y_m` with `h` as its base genus.
pub fn nonlifting_report(g: usize, h: usize, m: i64, r: usize) -> Result<NonliftReport, BundleError> {
    if r < 1 {
        return Err(BundleError::Range("at least one marked point is needed".into()));
    }
    let (member, _) = if g == 2 { build_ym(h, m)? } else { build_xm(g, h, m)? };
    let e = member.self_intersection.e;
    let mut names = vec!["S".to_string()];
    names.extend((1..r).map(|i| format!("S{i}")));
    let sections = names
        .iter()
        .map(|n| {
            let others: Vec<&str> = names.iter().filter(|o| *o != n).map(String::as_str).collect();
            SectionRecord::new(n, if n == "S" { e } else { 0 }, h, &others)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let flat = flatness_certificate(
        &member.factorization,
        &DisjointnessTable::from_model(&if g == 2 {
            closed_fiber_model(2, None)?
        } else {
            xm_class_table(g)?.1
        }),
    );
    let adm = milnor_wood(h as i64, e)?;
    let violation = !adm.flat_parallel_admissible;
    Ok(NonliftReport {
        family: member.family,
        fiber_genus: g,
        base_genus: h,
        m,
        factorization: member.factorization,
        sections,
        self_intersection: member.self_intersection,
        parallel_bound: h as i64 - 1,
        violation,
        conclusion: if violation && flat.verdict == FlatnessVerdict::Certified {
            NonliftConclusion::NoLift
        } else {
            NonliftConclusion::Inconclusive
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn milnor_wood_examples() {
        let mw = |h, e| {
            let a = milnor_wood(h, e).unwrap();
            (a.section_admissible, a.flat_parallel_admissible)
        };
        assert_eq!(mw(2, 2), (true, false));
        assert_eq!(mw(1, 0), (true, true));
        assert_eq!(mw(3, -5), (false, false));
        assert_eq!(mw(2, 1), (true, true));
        assert!(milnor_wood(0, 0).is_err());
        for h in 1..8 {
            for e in 0..20 {
                let (a, b) = mw(h, e);
                let (a2, b2) = mw(h, e + 1);
                assert!(a >= a2 && b >= b2);
                let (a3, b3) = mw(h + 1, e);
                assert!(a3 >= a && b3 >= b);
                assert_eq!(mw(h, -e), (a, b));
            }
        }
    }

    #[test]
    fn commutator_lengths() {
        assert_eq!(cl_floor(1).unwrap(), 2);
        for k in 1..=50 {
            assert_eq!(cl_floor(2 * k).unwrap(), k + 1);
            assert_eq!(cl_floor(2 * k + 1).unwrap(), k + 2);
        }
        assert!(cl_floor(0).is_err());
        assert_eq!(scl_tdelta(), Ratio::new(1, 2));
        for n in 1..=100 {
            assert!(Ratio::new(cl_floor(n).unwrap(), n) >= scl_tdelta());
        }
        let gap = Ratio::new(cl_floor(100).unwrap(), 100) - scl_tdelta();
        assert!(gap <= Ratio::new(3, 100));
    }

    #[test]
    fn xm_pairs() {
        let f = xm_factorization(3, 2, 1).unwrap();
        let shown: Vec<String> = f.pairs.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["[a1 a2^-1, 1]", "[a3 a1^-1, b]"]);
        let f = xm_factorization(3, 3, 0).unwrap();
        assert_eq!(f.pairs[2].to_string(), "[a3^2 a1^-2, 1]");
        assert_eq!(f.pairs[1].to_string(), "[a3 a1 a2^-1 a3^-1, 1]");
        for h in 2..6 {
            assert_eq!(xm_factorization(4, h, 3).unwrap().base_genus, h);
        }
        assert!(xm_factorization(2, 2, 1).is_err());
        assert!(xm_factorization(3, 1, 1).is_err());
    }

    #[test]
    fn ym_pairs() {
        let f = ym_factorization(3, 2).unwrap();
        let shown: Vec<String> = f.pairs.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["[a1 a2^-1, 1]", "[a2 a1^-1, 1]", "[b1^2, 1]"]);
        let f = ym_factorization(3, 0).unwrap();
        assert_eq!(f.pairs[2].to_string(), "[1, 1]");
    }

    #[test]
    fn xm_build_and_homology() {
        let (x, gated) = build_xm(3, 2, 5).unwrap();
        assert_eq!(gated.chosen, "u2");
        assert_eq!(x.self_intersection, SelfIntersection { e: -2, abs: 2 });
        assert_eq!(x.certificate.level, Some(CertificateLevel::DerivationWithAxioms));
        assert!(x.certificate.closed.holds() && x.certificate.homology.holds());
        assert_eq!(h1_total_space(&x.factorization, &gated.table).unwrap().to_string(), "Z^7 + Z/5");
        let (x0, _) = build_xm(3, 2, 0).unwrap();
        assert_eq!(h1_total_space(&x0.factorization, &gated.table).unwrap().to_string(), "Z^8");
        // global conjugation does not change H₁
        let g = w("a1 b^2 a3^-1");
        assert_eq!(
            h1_total_space(&x.factorization.conjugated_by(&g), &gated.table).unwrap(),
            h1_total_space(&x.factorization, &gated.table).unwrap()
        );
        let trivial = MonodromyFactorization::new(3, vec![CommutatorPair::new(Word::identity(), Word::identity()); 2]).unwrap();
        assert_eq!(h1_total_space(&trivial, &gated.table).unwrap(), AbelianGroup::free(10));
        // a third curve in its own class fails the gate
        assert!(gated.candidates.iter().any(|(c, ok)| c == "u3" && !ok));
    }

    #[test]
    fn corrupted_capped_relation_fails_on_homology() {
        let (x, gated) = build_xm(3, 3, 5).unwrap();
        let good = RelationWord {
            lhs: Word::empty(),
            rhs: x.factorization.product(),
        };
        assert!(gated.table.check_identity_homology(&good).unwrap().holds());
        // t_b^m on one side only
        let last = x.factorization.pairs.last().unwrap();
        let bad = RelationWord {
            lhs: Word::empty(),
            rhs: Word::product([last.u.clone(), w("b^6"), last.u.inverse(), w("b^-5")].iter()),
        };
        assert!(!gated.table.check_identity_homology(&bad).unwrap().holds());
    }

    #[test]
    fn flatness() {
        let (_, model) = xm_class_table(3).unwrap();
        let table = DisjointnessTable::from_model(&model);
        let f = xm_factorization(3, 3, 4).unwrap();
        let cert = flatness_certificate(&f, &table);
        assert_eq!(cert.verdict, FlatnessVerdict::Certified);
        assert_eq!(cert.brackets[0], BracketJustification::SecondEntryIdentity);
        assert!(matches!(cert.brackets[2], BracketJustification::SupportDisjointness { .. }));
        assert_eq!(flatness_certificate(&f, &table.without("b")).verdict, FlatnessVerdict::Unknown);
        let dual = MonodromyFactorization::new(3, vec![CommutatorPair::new(w("a1"), w("b1"))]).unwrap();
        assert_eq!(flatness_certificate(&dual, &table).verdict, FlatnessVerdict::Unknown);
    }

    #[test]
    fn obstruction() {
        assert!(!complex_obstruction(4, 6));
        assert!(!complex_obstruction(3, 0));
        for g in 2..6 {
            for h in 2..6 {
                assert!(complex_obstruction(2 * h + 2 * g - 3, 2));
            }
        }
        assert_eq!(second_betti(3, 2, 7), 4 * 3 * 2 - 4);
    }

    #[test]
    fn text_round_trip() {
        let f = xm_factorization(3, 3, 2).unwrap();
        let text = f.to_text(Some(4));
        assert_eq!(MonodromyFactorization::parse_text(&text).unwrap(), (f, Some(4)));
        assert!(matches!(
            MonodromyFactorization::parse_text("fiber 3\nbase 2\npair a1 | 1\n"),
            Err(BundleError::Parse { .. })
        ));
        assert!(matches!(
            MonodromyFactorization::parse_text("fiber 3\npair a1 1\n"),
            Err(BundleError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn nonlift() {
        let r = nonlifting_report(3, 2, 1, 1).unwrap();
        assert!(r.violation);
        assert_eq!((r.self_intersection.abs, r.parallel_bound), (2, 1));
        assert_eq!(r.conclusion, NonliftConclusion::NoLift);
        let r = nonlifting_report(3, 2, 1, 3).unwrap();
        assert_eq!(r.sections.len(), 3);
        assert!(r.sections.iter().all(|s| s.disjoint_from.len() == 2));
        let r = nonlifting_report(2, 3, 1, 1).unwrap();
        assert!(!r.violation);
        assert_eq!(r.conclusion, NonliftConclusion::Inconclusive);
        assert_eq!(nonlifting_report(2, 4, 1, 2).unwrap().conclusion, NonliftConclusion::NoLift);
    }
}
