//! Line-oriented catalog files.
//!
//! ```text
//! # comment
//! model holed-sphere 5            | model closed-genus 3
//! gen e1 0 1 arc                  generator: name, source, target, arc|loop
//! gen b1 1 1 loop
//! curve delta outer               outer | boundary <i> | convex <start> <len> | abstract
//! curve a1 boundary 1
//! disjoint a1 : delta a2 x1       the curve's full disjointness set
//! class a1 : 1 0 0 0 0 0          homology class (closed models)
//! image a1 + e1 : e1 b1^-1        forward (+) or inverse (-) image
//! element rot : 0 2 3 4 1         symmetry with its vertex permutation
//! image rot - e1 : e4 ...
//! conj rot : a1 -> a2             rot · t_a1 · rot⁻¹ = t_a2
//! ```
//!
//! Generators without an `image` line are fixed. Curve and element names
//! share one namespace. Loading validates the model and, for holed spheres,
//! re-runs the orientation anchor and every conjugation record.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::groupoid::{AutomorphismTable, EdgeGen, EdgeKind, GeneratorSystem, GroupoidWord, VertexId};
use crate::model::{
    CatalogError, ConjugationRecord, CurveEntry, CurveKind, CyclicInterval, ElementEntry, ModelKind, SurfaceModel,
    TwistAction,
};
use crate::planar;

fn write_table(out: &mut String, sys: &GeneratorSystem, name: &str, sign: char, t: &AutomorphismTable) {
    for (g, img) in sys.generators().iter().zip(t.images()) {
        let fixed = img.len() == 1 && sys.gen(img.letters()[0].gen).name == g.name && !img.letters()[0].inverse;
        if !fixed {
            let _ = writeln!(out, "image {name} {sign} {} : {}", g.name, sys.render(img));
        }
    }
}

/// Renders a model in the catalog format; [`parse`] reads it back.
pub fn render(model: &SurfaceModel) -> String {
    let mut out = String::new();
    match model.kind() {
        ModelKind::HoledSphere { boundaries } => {
            let _ = writeln!(out, "model holed-sphere {boundaries}");
        }
        ModelKind::ClosedGenus { genus } => {
            let _ = writeln!(out, "model closed-genus {genus}");
        }
    }
    if let Some(sys) = model.generators() {
        for g in sys.generators() {
            let kind = match g.kind {
                EdgeKind::Arc => "arc",
                EdgeKind::BoundaryLoop => "loop",
            };
            let _ = writeln!(out, "gen {} {} {} {kind}", g.name, g.source.0, g.target.0);
        }
    }
    for c in model.curves() {
        let kind = match &c.kind {
            CurveKind::OuterParallel => "outer".to_string(),
            CurveKind::BoundaryParallel(i) => format!("boundary {i}"),
            CurveKind::Convex(s) => format!("convex {} {}", s.start, s.len),
            CurveKind::Abstract => "abstract".to_string(),
        };
        let _ = writeln!(out, "curve {} {kind}", c.name);
    }
    for c in model.curves() {
        let set: Vec<&str> = c.disjoint_with.iter().map(String::as_str).collect();
        let _ = writeln!(out, "disjoint {} : {}", c.name, set.join(" "));
    }
    for c in model.curves() {
        if let Some(class) = &c.class {
            let v: Vec<String> = class.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "class {} : {}", c.name, v.join(" "));
        }
    }
    if let Some(sys) = model.generators() {
        for c in model.curves() {
            if let Some(act) = &c.action {
                write_table(&mut out, sys, &c.name, '+', &act.forward);
                write_table(&mut out, sys, &c.name, '-', &act.inverse);
            }
        }
        for e in model.elements() {
            let perm: Vec<String> = e.action.forward.vertex_map().iter().map(|v| v.0.to_string()).collect();
            let _ = writeln!(out, "element {} : {}", e.name, perm.join(" "));
            write_table(&mut out, sys, &e.name, '+', &e.action.forward);
            write_table(&mut out, sys, &e.name, '-', &e.action.inverse);
        }
    }
    for r in model.conjugations() {
        let _ = writeln!(out, "conj {} : {} -> {}", r.by, r.curve, r.image);
    }
    out
}

struct Pending {
    kind: CurveKind,
    disjoint: BTreeSet<String>,
    class: Option<Vec<i64>>,
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, CatalogError> {
    s.parse().map_err(|_| CatalogError::Syntax {
        line,
        message: format!("expected a number, found `{s}`"),
    })
}

/// Parses and validates a catalog file.
pub fn parse(text: &str) -> Result<SurfaceModel, CatalogError> {
    let syntax = |line: usize, message: &str| CatalogError::Syntax {
        line,
        message: message.to_string(),
    };
    let mut kind = None;
    let mut gens = Vec::new();
    let mut order: Vec<String> = Vec::new();
    let mut curves: HashMap<String, Pending> = HashMap::new();
    let mut elements: Vec<(String, Vec<VertexId>)> = Vec::new();
    // (owner, forward?, generator, image text, line)
    let mut images: Vec<(String, bool, String, String, usize)> = Vec::new();
    let mut conj = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, tail) = match content.split_once(" : ") {
            Some((h, t)) => (h.trim(), Some(t.trim())),
            None => (content, None),
        };
        let fields: Vec<&str> = head.split_whitespace().collect();
        match (fields[0], tail) {
            ("model", None) if fields.len() == 3 => {
                let n = num(line, fields[2])?;
                kind = Some(match fields[1] {
                    "holed-sphere" => ModelKind::HoledSphere { boundaries: n },
                    "closed-genus" => ModelKind::ClosedGenus { genus: n },
                    _ => return Err(syntax(line, "unknown model kind")),
                });
            }
            ("gen", None) if fields.len() == 5 => {
                let kind = match fields[4] {
                    "arc" => EdgeKind::Arc,
                    "loop" => EdgeKind::BoundaryLoop,
                    _ => return Err(syntax(line, "generator kind must be arc or loop")),
                };
                gens.push(EdgeGen {
                    name: fields[1].to_string(),
                    source: VertexId(num(line, fields[2])?),
                    target: VertexId(num(line, fields[3])?),
                    kind,
                });
            }
            ("curve", None) if fields.len() >= 3 => {
                let holes = match kind {
                    Some(ModelKind::HoledSphere { boundaries }) => boundaries - 1,
                    _ => 0,
                };
                let ck = match &fields[2..] {
                    ["outer"] => CurveKind::OuterParallel,
                    ["abstract"] => CurveKind::Abstract,
                    ["boundary", i] => CurveKind::BoundaryParallel(num(line, i)?),
                    ["convex", s, l] => CurveKind::Convex(
                        CyclicInterval::new(num(line, s)?, num(line, l)?, holes)
                            .ok_or_else(|| syntax(line, "hole run out of range"))?,
                    ),
                    _ => return Err(syntax(line, "unknown curve kind")),
                };
                let name = fields[1].to_string();
                if curves
                    .insert(
                        name.clone(),
                        Pending {
                            kind: ck,
                            disjoint: BTreeSet::new(),
                            class: None,
                        },
                    )
                    .is_some()
                {
                    return Err(CatalogError::DuplicateCurve(name));
                }
                order.push(name);
            }
            ("disjoint", Some(rest)) if fields.len() == 2 => {
                let c = curves
                    .get_mut(fields[1])
                    .ok_or_else(|| CatalogError::UnknownSymbol(fields[1].to_string()))?;
                c.disjoint.extend(rest.split_whitespace().map(str::to_string));
            }
            ("disjoint", None) if fields.len() == 2 => {}
            ("class", Some(rest)) if fields.len() == 2 => {
                let v = rest.split_whitespace().map(|s| num(line, s)).collect::<Result<Vec<i64>, _>>()?;
                curves
                    .get_mut(fields[1])
                    .ok_or_else(|| CatalogError::UnknownSymbol(fields[1].to_string()))?
                    .class = Some(v);
            }
            ("image", Some(rest)) if fields.len() == 4 => {
                let forward = match fields[2] {
                    "+" => true,
                    "-" => false,
                    _ => return Err(syntax(line, "image sign must be + or -")),
                };
                images.push((fields[1].to_string(), forward, fields[3].to_string(), rest.to_string(), line));
            }
            ("element", Some(rest)) if fields.len() == 2 => {
                let perm = rest
                    .split_whitespace()
                    .map(|s| num(line, s).map(VertexId))
                    .collect::<Result<Vec<_>, _>>()?;
                elements.push((fields[1].to_string(), perm));
            }
            ("conj", Some(rest)) => {
                let by = head["conj".len()..]
                    .trim()
                    .parse()
                    .map_err(|e: crate::word::WordError| syntax(line, &e.to_string()))?;
                let (c, img) = rest
                    .split_once("->")
                    .ok_or_else(|| syntax(line, "expected `curve -> image`"))?;
                conj.push(ConjugationRecord {
                    by,
                    curve: c.trim().to_string(),
                    image: img.trim().to_string(),
                });
            }
            _ => return Err(syntax(line, "unrecognized record")),
        }
    }

    let kind = kind.ok_or_else(|| syntax(1, "missing model line"))?;
    let sys = match kind {
        ModelKind::HoledSphere { .. } => Some(GeneratorSystem::new(
            gens.iter().map(|g| g.target.0.max(g.source.0)).max().map_or(1, |m| m + 1),
            gens,
        )?),
        ModelKind::ClosedGenus { .. } => {
            if !gens.is_empty() {
                return Err(CatalogError::InvalidModel("closed models carry no generators".into()));
            }
            None
        }
    };

    let mut tables: HashMap<(String, bool), Vec<GroupoidWord>> = HashMap::new();
    let perms: HashMap<&str, &Vec<VertexId>> = elements.iter().map(|(n, p)| (n.as_str(), p)).collect();
    if let Some(sys) = &sys {
        let identity_images = AutomorphismTable::identity(sys).images().to_vec();
        for name in order.iter().chain(elements.iter().map(|(n, _)| n)) {
            for fwd in [true, false] {
                tables.insert((name.clone(), fwd), identity_images.clone());
            }
        }
        for (owner, fwd, gen, text, line) in images {
            let id = sys.gen_id(&gen).ok_or_else(|| CatalogError::UnknownSymbol(gen.clone()))?;
            let source = sys.gen(id).source;
            let start = match perms.get(owner.as_str()) {
                Some(p) => {
                    let p = if fwd { p.to_vec() } else { inverse_perm(p) };
                    *p.get(source.0).ok_or_else(|| syntax(line, "vertex permutation too short"))?
                }
                None => source,
            };
            let word = sys.parse(&text, start)?;
            let slot = tables
                .get_mut(&(owner.clone(), fwd))
                .ok_or_else(|| CatalogError::UnknownSymbol(owner.clone()))?;
            slot[id.0] = word;
        }
    } else if !images.is_empty() {
        return Err(CatalogError::InvalidModel("closed models carry no twist tables".into()));
    }

    let mut table = |name: &str, perm: Option<&Vec<VertexId>>| -> Result<TwistAction, CatalogError> {
        let sys = sys.as_ref().expect("tables exist only with generators");
        let mut build = |fwd: bool| -> Result<AutomorphismTable, CatalogError> {
            let imgs = tables.remove(&(name.to_string(), fwd)).expect("initialized above");
            Ok(match perm {
                None => AutomorphismTable::from_images(sys, imgs)?,
                Some(p) => {
                    let p = if fwd { p.clone() } else { inverse_perm(p) };
                    AutomorphismTable::from_images_permuting(sys, p, imgs)?
                }
            })
        };
        Ok(TwistAction {
            forward: build(true)?,
            inverse: build(false)?,
        })
    };

    let mut entries = Vec::with_capacity(order.len());
    for name in &order {
        let p = curves.remove(name).expect("recorded with its name");
        let action = match sys {
            Some(_) => Some(table(name, None)?),
            None => None,
        };
        entries.push(CurveEntry {
            name: name.clone(),
            kind: p.kind,
            disjoint_with: p.disjoint,
            class: p.class,
            action,
        });
    }
    let mut element_entries = Vec::with_capacity(elements.len());
    for (name, perm) in &elements {
        if sys.is_none() {
            return Err(CatalogError::InvalidModel("closed models carry no elements".into()));
        }
        element_entries.push(ElementEntry {
            name: name.clone(),
            action: table(name, Some(perm))?,
        });
    }
    let model = SurfaceModel::new(kind, sys, entries, element_entries, conj)?;
    planar::check_anchor(&model)?;
    planar::check_conjugations(&model)?;
    Ok(model)
}

fn inverse_perm(p: &[VertexId]) -> Vec<VertexId> {
    let mut out = vec![VertexId(0); p.len()];
    for (i, v) in p.iter().enumerate() {
        if v.0 < out.len() {
            out[v.0] = VertexId(i);
        }
    }
    out
}
