//! Subcommands and the JSON report they produce.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use twistbench::bundle::{self, FamilyMember, FlatnessVerdict, GatedClassTable};
use twistbench::model::{ModelKind, SurfaceModel};
use twistbench::planar::{self, ArcSpec, Verdict};
use twistbench::rewrite::{self, CheckOutcome, Derivation, OracleSet};
use twistbench::{catalog, model::CyclicInterval};

#[derive(Parser, Debug)]
#[command(name = "twistbench", version, about = "Exact checks of twist relations and surface bundle invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check relations on a holed sphere through the groupoid action.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Build and check rewrite derivations.
    Derive {
        #[command(subcommand)]
        what: DeriveCmd,
    },
    /// Commutator count for the n-th power of the boundary twist.
    Cl {
        #[arg(long)]
        n: i64,
    },
    /// Self-intersection bounds for a section over a genus-h base.
    Bounds {
        #[arg(long)]
        h: i64,
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
    },
    /// Build one bundle of the X_m or Y_m family.
    Family {
        #[command(subcommand)]
        which: FamilyCmd,
    },
    /// Compare first homology across a range of m.
    Distinguish {
        #[command(subcommand)]
        which: DistinguishCmd,
    },
    /// Report why the marked-point monodromy does not lift.
    Nonlift {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        m: i64,
        #[arg(long)]
        marked: usize,
    },
    /// Print a built-in catalog in the line format.
    Catalog {
        /// Holed sphere with this many boundary components.
        #[arg(long, conflicts_with = "closed")]
        sphere: Option<usize>,
        /// Closed fiber of this genus with the gated class table.
        #[arg(long)]
        closed: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    Lantern {
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    Daisy {
        #[arg(long)]
        petals: usize,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    Power {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    PushNaturality {
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DeriveCmd {
    Power {
        #[arg(long)]
        k: i64,
    },
    Commutatorize {
        #[arg(long)]
        k: i64,
    },
    /// Replay a step script.
    Check {
        #[arg(long)]
        script: PathBuf,
        /// Take oracles from this catalog instead of the built-in set.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum FamilyCmd {
    Xm {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        m: i64,
        #[command(flatten)]
        extras: Extras,
    },
    Ym {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        m: i64,
        #[command(flatten)]
        extras: Extras,
    },
}

#[derive(clap::Args, Debug)]
pub struct Extras {
    /// First homology of the total space.
    #[arg(long)]
    h1: bool,
    /// Flatness certificate from disjoint supports.
    #[arg(long)]
    flat: bool,
    /// Betti numbers and the complex-structure obstruction.
    #[arg(long)]
    obstruction: bool,
}

#[derive(Subcommand, Debug)]
pub enum DistinguishCmd {
    Xm {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, value_parser = parse_range)]
        m_range: (i64, i64),
    },
    Ym {
        #[arg(long)]
        base: usize,
        #[arg(long, value_parser = parse_range)]
        m_range: (i64, i64),
    },
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: i64 = a.parse().map_err(|_| format!("`{a}` is not an integer"))?;
    let b: i64 = b.parse().map_err(|_| format!("`{b}` is not an integer"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct VerdictLine {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub command: Vec<String>,
    pub verdicts: Vec<VerdictLine>,
    /// Weakest provenance among positive verdicts.
    pub provenance: Option<String>,
    pub assumptions: Vec<String>,
    pub result: Value,
    pub elapsed_ms: u128,
}

pub enum Outcome {
    Ok,
    Failed,
}

impl Report {
    fn new(result: Value) -> Self {
        Report {
            command: vec![],
            verdicts: vec![],
            provenance: None,
            assumptions: vec![],
            result,
            elapsed_ms: 0,
        }
    }

    fn verdict(&mut self, name: &str, holds: bool, provenance: Option<&str>) {
        self.verdicts.push(VerdictLine {
            name: name.into(),
            holds,
            provenance: provenance.map(str::to_string),
        });
        if holds {
            if let Some(p) = provenance {
                let rank = |s: &str| LEVELS.iter().position(|l| *l == s).unwrap_or(0);
                if self.provenance.as_deref().is_none_or(|q| rank(p) > rank(q)) {
                    self.provenance = Some(p.to_string());
                }
            }
        }
    }

    fn assume(&mut self, axioms: &[String]) {
        for a in axioms {
            if !self.assumptions.contains(a) {
                self.assumptions.push(a.clone());
            }
        }
    }

    pub fn outcome(&self) -> Outcome {
        if self.verdicts.iter().all(|v| v.holds) {
            Outcome::Ok
        } else {
            Outcome::Failed
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!("twistbench {}", self.command.join(" "));
        for v in &self.verdicts {
            let _ = write!(
                s,
                "\n  {:<28} {}",
                v.name,
                if v.holds { "holds" } else { "FAILS" }
            );
            if let Some(p) = &v.provenance {
                let _ = write!(s, " ({p})");
            }
        }
        if !self.assumptions.is_empty() {
            let _ = write!(s, "\n  assuming {}", self.assumptions.join(", "));
        }
        s
    }
}

/// Strongest first.
const LEVELS: [&str; 5] = ["arithmetic", "planar-exact", "declared", "derivation-with-axioms", "homology-only"];

type CmdResult = Result<Report, String>;

fn load_catalog(path: &Path) -> Result<SurfaceModel, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    catalog::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn sphere(catalog: &Option<PathBuf>, boundaries: usize) -> Result<SurfaceModel, String> {
    let m = match catalog {
        Some(p) => load_catalog(p)?,
        None => planar::holed_sphere(boundaries).map_err(|e| e.to_string())?,
    };
    if m.kind() != (ModelKind::HoledSphere { boundaries }) {
        return Err(format!("this check needs a sphere with {boundaries} boundary components"));
    }
    Ok(m)
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("verdicts serialize")
}

fn outcome_parts(o: &CheckOutcome) -> (bool, Option<&'static str>, Vec<String>) {
    match o {
        CheckOutcome::Holds { axioms, .. } => (
            true,
            Some(if axioms.is_empty() { "planar-exact" } else { "derivation-with-axioms" }),
            axioms.clone(),
        ),
        CheckOutcome::Fails { .. } => (false, None, vec![]),
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Verify { what } => verify(what),
        Command::Derive { what } => derive(what),
        Command::Cl { n } => {
            let v = bundle::cl_floor(*n).map_err(|e| e.to_string())?;
            let mut r = Report::new(json!({ "n": n, "commutators": v, "scl": bundle::scl_tdelta().to_string() }));
            r.verdict("formula", v == (n + 3) / 2, Some("arithmetic"));
            Ok(r)
        }
        Command::Bounds { h, e } => {
            let a = bundle::milnor_wood(*h, *e).map_err(|e| e.to_string())?;
            let mut r = Report::new(json!({
                "h": h, "e": e,
                "section_bound": 2 * h - 2, "parallel_bound": h - 1,
                "section_admissible": a.section_admissible,
                "flat_parallel_admissible": a.flat_parallel_admissible,
            }));
            r.verdict("computed", true, Some("arithmetic"));
            Ok(r)
        }
        Command::Family { which } => family(which),
        Command::Distinguish { which } => distinguish(which),
        Command::Nonlift { g, h, m, marked } => {
            let rep = bundle::nonlifting_report(*g, *h, *m, *marked).map_err(|e| e.to_string())?;
            let mut r = Report::new(json!({
                "report": rep,
                "factorization_text": rep.factorization.to_text(Some(rep.self_intersection.abs)),
            }));
            r.verdict("sections-admissible", true, Some("derivation-with-axioms"));
            r.assume(&phi_psi_labels());
            Ok(r)
        }
        Command::Catalog { sphere, closed } => {
            let model = match (sphere, closed) {
                (Some(p), None) => planar::holed_sphere(*p).map_err(|e| e.to_string())?,
                (None, Some(2)) => bundle::ym_class_table().map_err(|e| e.to_string())?.1,
                (None, Some(g)) => bundle::xm_class_table(*g).map_err(|e| e.to_string())?.1,
                _ => return Err("give --sphere P or --closed G".into()),
            };
            let mut r = Report::new(json!({ "catalog": catalog::render(&model) }));
            r.verdict("loaded", true, None);
            Ok(r)
        }
    }
}

fn phi_psi_labels() -> Vec<String> {
    OracleSet::phi_psi_axioms().oracles().iter().map(|o| o.label()).collect()
}

fn verify(what: &VerifyCmd) -> CmdResult {
    match what {
        VerifyCmd::Lantern { catalog } => relation_report(&sphere(catalog, 4)?, 3, "lantern"),
        VerifyCmd::Daisy { petals, catalog } => {
            if *petals < 3 {
                return Err(format!("the daisy relation needs at least 3 petals, got {petals}"));
            }
            relation_report(&sphere(catalog, petals + 1)?, *petals, "daisy")
        }
        VerifyCmd::Power { k, catalog } => {
            let m = sphere(catalog, 5)?;
            let rel = planar::power_relation(*k).map_err(|e| e.to_string())?;
            let v = planar::verify_relation(&m, &rel).map_err(|e| e.to_string())?;
            let oracles = OracleSet::planar(&m).map_err(|e| e.to_string())?;
            let d = rewrite::derive_power_relation(*k, &oracles).map_err(|e| e.to_string())?;
            let check = rewrite::check_derivation(&d, &oracles);
            let same = d.end.letters() == rel.rhs.letters();
            let mut r = Report::new(json!({
                "lhs": rel.lhs.to_string(),
                "rhs": rel.rhs.to_string(),
                "planar": verdict_json(&v),
                "derivation": { "steps": d.steps.len(), "check": check },
            }));
            r.verdict("planar-action", v.holds(), Some("planar-exact"));
            let (ok, prov, axioms) = outcome_parts(&check);
            r.verdict("derivation-from-daisy", ok && same, prov);
            r.assume(&axioms);
            Ok(r)
        }
        VerifyCmd::PushNaturality { catalog } => {
            let m = sphere(catalog, 5)?;
            let mut product = twistbench::word::Word::empty();
            let mut singles = Vec::new();
            for i in 1..=4 {
                let arc = ArcSpec::clockwise(CyclicInterval::singleton(i, 4).expect("hole index"));
                let p = planar::push(&m, &arc).map_err(|e| e.to_string())?;
                singles.push(p.to_string());
                product = product.concat(&p);
            }
            let full = planar::push(&m, &ArcSpec::clockwise(CyclicInterval::full(4))).map_err(|e| e.to_string())?;
            let eq = m.auto_equal(&product, &full).map_err(|e| e.to_string())?;
            let mut r = Report::new(json!({
                "pushes": singles,
                "product": product.to_string(),
                "push_full": full.to_string(),
            }));
            r.verdict("push-naturality", eq, Some("planar-exact"));
            Ok(r)
        }
    }
}

fn relation_report(m: &SurfaceModel, petals: usize, name: &str) -> CmdResult {
    let rel = planar::daisy_relation(petals).map_err(|e| e.to_string())?;
    let v = planar::verify_relation(m, &rel).map_err(|e| e.to_string())?;
    let mut r = Report::new(json!({
        "petals": petals,
        "lhs": rel.lhs.to_string(),
        "rhs": rel.rhs.to_string(),
        "planar": verdict_json(&v),
    }));
    r.verdict(name, v.holds(), Some("planar-exact"));
    Ok(r)
}

fn derive(what: &DeriveCmd) -> CmdResult {
    let standard = bundle::lift_oracles();
    match what {
        DeriveCmd::Power { k } => {
            let d = rewrite::derive_power_relation(*k, standard).map_err(|e| e.to_string())?;
            let check = rewrite::check_derivation(&d, standard);
            let mut r = Report::new(json!({
                "start": d.start.to_string(),
                "end": d.end.to_string(),
                "steps": d.steps.len(),
                "check": check,
                "script": d.to_script(),
            }));
            let (ok, prov, axioms) = outcome_parts(&check);
            r.verdict("derivation", ok, prov);
            r.assume(&axioms);
            Ok(r)
        }
        DeriveCmd::Commutatorize { k } => {
            let f = rewrite::commutatorize_even_power(*k, standard).map_err(|e| e.to_string())?;
            let check = f.certify(standard);
            let expected = bundle::cl_floor(2 * k).map_err(|e| e.to_string())?;
            let mut r = Report::new(json!({
                "target": f.target.to_string(),
                "factors": f.factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "count": f.count,
                "cl_floor": expected,
                "check": check,
                "script": f.derivation.to_script(),
            }));
            let (ok, prov, axioms) = outcome_parts(&check);
            r.verdict("derivation", ok, prov);
            r.verdict("count", f.count as i64 == expected, Some("arithmetic"));
            r.assume(&axioms);
            Ok(r)
        }
        DeriveCmd::Check { script, catalog } => {
            let text = std::fs::read_to_string(script).map_err(|e| format!("{}: {e}", script.display()))?;
            let d = Derivation::parse_script(&text).map_err(|e| format!("{}: {e}", script.display()))?;
            let oracles = match catalog {
                None => standard.clone(),
                Some(p) => {
                    let m = load_catalog(p)?;
                    match m.kind() {
                        ModelKind::HoledSphere { .. } => {
                            let mut o = OracleSet::planar(&m).map_err(|e| e.to_string())?;
                            o.extend(OracleSet::phi_psi_axioms());
                            o
                        }
                        ModelKind::ClosedGenus { .. } => OracleSet::declared(&m),
                    }
                }
            };
            let check = rewrite::check_derivation(&d, &oracles);
            let mut r = Report::new(json!({
                "start": d.start.to_string(),
                "end": d.end.to_string(),
                "steps": d.steps.len(),
                "check": check,
            }));
            let (ok, _, axioms) = outcome_parts(&check);
            let prov = match &check {
                CheckOutcome::Holds { weakest: Some(p), .. } => Some(match p {
                    rewrite::Provenance::PlanarVerified => "planar-exact",
                    rewrite::Provenance::Declared => "declared",
                    rewrite::Provenance::Axiom => "derivation-with-axioms",
                }),
                CheckOutcome::Holds { weakest: None, .. } => Some("planar-exact"),
                CheckOutcome::Fails { .. } => None,
            };
            r.verdict("derivation", ok, prov);
            r.assume(&axioms);
            Ok(r)
        }
    }
}

fn level_name(l: Option<bundle::CertificateLevel>) -> Option<&'static str> {
    l.map(|l| match l {
        bundle::CertificateLevel::PlanarExact => "planar-exact",
        bundle::CertificateLevel::DerivationWithAxioms => "derivation-with-axioms",
        bundle::CertificateLevel::HomologyOnly => "homology-only",
    })
}

fn family(which: &FamilyCmd) -> CmdResult {
    let (member, gated, extras, expected) = match which {
        FamilyCmd::Xm { g, h, m, extras } => {
            let (member, gated) = bundle::build_xm(*g, *h, *m).map_err(|e| e.to_string())?;
            (member, gated, extras, (2 * h + 2 * g - 3, *m))
        }
        FamilyCmd::Ym { base, m, extras } => {
            let (member, gated) = bundle::build_ym(*base, *m).map_err(|e| e.to_string())?;
            (member, gated, extras, (2 * base + 1, *m))
        }
    };
    family_report(&member, &gated, extras, expected)
}

fn family_report(member: &FamilyMember, gated: &GatedClassTable, extras: &Extras, expected: (usize, i64)) -> CmdResult {
    let f = &member.factorization;
    let cert = &member.certificate;
    let mut result = json!({
        "family": member.family,
        "fiber_genus": f.fiber_genus,
        "base_genus": f.base_genus,
        "m": member.m,
        "k": member.k,
        "pairs": f.pairs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "lifted_pairs": member.lift.lift.factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "boundary_power": member.lift.boundary_power,
        "self_intersection": member.self_intersection,
        "sections": member.sections,
        "certificate": cert,
        "class_table": gated,
        "factorization_text": f.to_text(Some(member.lift.boundary_power)),
    });
    let mut r = Report::new(Value::Null);
    let (lift_ok, lift_prov, axioms) = outcome_parts(&cert.lift);
    r.verdict("lift", lift_ok, lift_prov);
    r.verdict("closed-relation", cert.closed.holds(), Some("declared"));
    r.verdict("homology-relation", cert.homology.holds(), Some("homology-only"));
    r.verdict("certificate", cert.level.is_some(), level_name(cert.level));
    r.assume(&axioms);
    let h = f.base_genus as i64;
    let adm = bundle::milnor_wood(h, member.self_intersection.e).map_err(|e| e.to_string())?;
    result["admissibility"] = json!(adm);
    if extras.h1 {
        let group = bundle::h1_total_space(f, &gated.table).map_err(|e| e.to_string())?;
        let want = twistbench::snf::AbelianGroup::free(expected.0)
            .direct_sum(&twistbench::snf::AbelianGroup::from_cyclic_orders(&[expected.1.into()]));
        result["h1"] = json!(group);
        result["h1_expected"] = json!(want);
        r.verdict("h1-formula", group == want, Some("homology-only"));
    }
    if extras.flat {
        let model = closed_model(member)?;
        let c = bundle::flatness_certificate(f, &bundle::DisjointnessTable::from_model(&model));
        r.verdict("flat", c.verdict == FlatnessVerdict::Certified, Some("declared"));
        result["flatness"] = json!(c);
    }
    if extras.obstruction {
        let group = bundle::h1_total_space(f, &gated.table).map_err(|e| e.to_string())?;
        let b1 = group.free_rank;
        let b2 = bundle::second_betti(f.fiber_genus, f.base_genus, b1);
        let obstructed = bundle::complex_obstruction(b1 as u64, b2.max(0) as u64);
        result["b1"] = json!(b1);
        result["b2"] = json!(b2);
        result["complex_obstruction"] = json!(obstructed);
        r.verdict("no-complex-structure", obstructed, Some("homology-only"));
    }
    r.result = result;
    Ok(r)
}

fn closed_model(member: &FamilyMember) -> Result<SurfaceModel, String> {
    let g = member.factorization.fiber_genus;
    if g == 2 {
        bundle::closed_fiber_model(2, None).map_err(|e| e.to_string())
    } else {
        Ok(bundle::xm_class_table(g).map_err(|e| e.to_string())?.1)
    }
}

fn distinguish(which: &DistinguishCmd) -> CmdResult {
    let (items, table, label) = match which {
        DistinguishCmd::Xm { g, h, m_range } => {
            let (gated, _) = bundle::xm_class_table(*g).map_err(|e| e.to_string())?;
            let items = (m_range.0..=m_range.1)
                .map(|m| Ok((format!("X_{m}"), bundle::xm_factorization(*g, *h, m)?)))
                .collect::<Result<Vec<_>, bundle::BundleError>>()
                .map_err(|e| e.to_string())?;
            (items, gated.table, "xm")
        }
        DistinguishCmd::Ym { base, m_range } => {
            let (gated, _) = bundle::ym_class_table().map_err(|e| e.to_string())?;
            let items = (m_range.0..=m_range.1)
                .map(|m| Ok((format!("Y_{m}"), bundle::ym_factorization(*base, m)?)))
                .collect::<Result<Vec<_>, bundle::BundleError>>()
                .map_err(|e| e.to_string())?;
            (items, gated.table, "ym")
        }
    };
    let rep = bundle::family_distinguisher(&items, &table).map_err(|e| e.to_string())?;
    let groups: Vec<String> = rep.groups.iter().map(ToString::to_string).collect();
    let mut r = Report::new(json!({ "family": label, "report": rep, "h1": groups }));
    r.verdict("pairwise-distinct", rep.collisions.is_empty(), Some("homology-only"));
    Ok(r)
}
