//! Free groupoids on typed edge generators.
//!
//! A [`GeneratorSystem`] fixes a finite set of vertices (one basepoint per
//! boundary component of a surface) and edge generators between them. Paths
//! are written left to right: `w1 · w2` traverses `w1` first, so the target of
//! `w1` must equal the source of `w2`.
//!
//! Words are stored freely reduced. An [`AutomorphismTable`] records the image
//! of every generator and acts on words by substitution.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Arc,
    BoundaryLoop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeGen {
    pub name: String,
    pub source: VertexId,
    pub target: VertexId,
    pub kind: EdgeKind,
}

/// Index of a generator inside its [`GeneratorSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: GenId,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: GenId, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("letter {position} starts at {found} but the path is at {expected}")]
    NotComposable {
        position: usize,
        expected: VertexId,
        found: VertexId,
    },
    #[error("cannot concatenate: first word ends at {left}, second starts at {right}")]
    EndpointMismatch { left: VertexId, right: VertexId },
    #[error("vertex {0} is not part of this generator system")]
    UnknownVertex(VertexId),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("boundary loop `{0}` must start and end at the same vertex")]
    LoopNotClosed(String),
    #[error("malformed word `{0}`")]
    Parse(String),
    #[error("image of `{gen}` runs {found_src}->{found_tgt}, expected {src}->{tgt}")]
    ImageEndpoints {
        gen: String,
        src: VertexId,
        tgt: VertexId,
        found_src: VertexId,
        found_tgt: VertexId,
    },
}

/// A reduced, endpoint-typed path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupoidWord {
    letters: Vec<Letter>,
    source: VertexId,
    target: VertexId,
}

impl GroupoidWord {
    pub fn empty(at: VertexId) -> Self {
        GroupoidWord {
            letters: Vec::new(),
            source: at,
            target: at,
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reversed letters with flipped exponents.
    pub fn inverse(&self) -> Self {
        GroupoidWord {
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
            source: self.target,
            target: self.source,
        }
    }
}

/// Vertices and edge generators of a free groupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSystem {
    vertices: usize,
    gens: Vec<EdgeGen>,
    by_name: HashMap<String, GenId>,
}

impl GeneratorSystem {
    pub fn new(vertices: usize, gens: Vec<EdgeGen>) -> Result<Self, GroupoidError> {
        let mut by_name = HashMap::new();
        for (i, g) in gens.iter().enumerate() {
            for v in [g.source, g.target] {
                if v.0 >= vertices {
                    return Err(GroupoidError::UnknownVertex(v));
                }
            }
            if g.kind == EdgeKind::BoundaryLoop && g.source != g.target {
                return Err(GroupoidError::LoopNotClosed(g.name.clone()));
            }
            if by_name.insert(g.name.clone(), GenId(i)).is_some() {
                return Err(GroupoidError::DuplicateGenerator(g.name.clone()));
            }
        }
        Ok(GeneratorSystem {
            vertices,
            gens,
            by_name,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn generators(&self) -> &[EdgeGen] {
        &self.gens
    }

    pub fn gen(&self, id: GenId) -> &EdgeGen {
        &self.gens[id.0]
    }

    pub fn gen_id(&self, name: &str) -> Option<GenId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    fn letter_source(&self, l: Letter) -> VertexId {
        let g = self.gen(l.gen);
        if l.inverse {
            g.target
        } else {
            g.source
        }
    }

    fn letter_target(&self, l: Letter) -> VertexId {
        let g = self.gen(l.gen);
        if l.inverse {
            g.source
        } else {
            g.target
        }
    }

    /// The one-letter word of a generator.
    pub fn generator_word(&self, id: GenId) -> GroupoidWord {
        let g = self.gen(id);
        GroupoidWord {
            letters: vec![Letter::new(id, false)],
            source: g.source,
            target: g.target,
        }
    }

    /// Type-checks a letter sequence starting at `start` and freely reduces it.
    pub fn reduce(&self, start: VertexId, letters: &[Letter]) -> Result<GroupoidWord, GroupoidError> {
        if start.0 >= self.vertices {
            return Err(GroupoidError::UnknownVertex(start));
        }
        let mut at = start;
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for (position, &l) in letters.iter().enumerate() {
            let src = self.letter_source(l);
            if src != at {
                return Err(GroupoidError::NotComposable {
                    position,
                    expected: at,
                    found: src,
                });
            }
            at = self.letter_target(l);
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(GroupoidWord {
            letters: out,
            source: start,
            target: at,
        })
    }

    pub fn concat(&self, w1: &GroupoidWord, w2: &GroupoidWord) -> Result<GroupoidWord, GroupoidError> {
        if w1.target != w2.source {
            return Err(GroupoidError::EndpointMismatch {
                left: w1.target,
                right: w2.source,
            });
        }
        let mut letters = w1.letters.clone();
        for &l in &w2.letters {
            if letters.last() == Some(&l.inv()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(GroupoidWord {
            letters,
            source: w1.source,
            target: w2.target,
        })
    }

    /// Concatenates a nonempty chain of words.
    pub fn product(&self, words: &[&GroupoidWord]) -> Result<GroupoidWord, GroupoidError> {
        let mut iter = words.iter();
        let Some(first) = iter.next() else {
            return Err(GroupoidError::Parse("empty product".into()));
        };
        let mut acc = (*first).clone();
        for w in iter {
            acc = self.concat(&acc, w)?;
        }
        Ok(acc)
    }

    /// Parses a space-separated word such as `e1 b1^-2 e1^-1`; `1` is the
    /// empty word. `start` types the empty word and checks composability.
    pub fn parse(&self, text: &str, start: VertexId) -> Result<GroupoidWord, GroupoidError> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            if token == "1" {
                continue;
            }
            let (name, exp) = match token.split_once('^') {
                Some((n, e)) => {
                    let exp: i64 = e.parse().map_err(|_| GroupoidError::Parse(token.to_string()))?;
                    (n, exp)
                }
                None => (token, 1),
            };
            let id = self
                .gen_id(name)
                .ok_or_else(|| GroupoidError::UnknownGenerator(name.to_string()))?;
            let l = Letter::new(id, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                letters.push(l);
            }
        }
        self.reduce(start, &letters)
    }

    /// Renders a word with run-length exponents, e.g. `e1 b1^2`.
    pub fn render(&self, w: &GroupoidWord) -> String {
        if w.letters.is_empty() {
            return "1".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < w.letters.len() {
            let l = w.letters[i];
            let mut run = 1;
            while i + run < w.letters.len() && w.letters[i + run] == l {
                run += 1;
            }
            let name = &self.gen(l.gen).name;
            let exp = if l.inverse { -(run as i64) } else { run as i64 };
            parts.push(if exp == 1 {
                name.clone()
            } else {
                format!("{name}^{exp}")
            });
            i += run;
        }
        parts.join(" ")
    }
}

/// Images of every generator of a [`GeneratorSystem`]. Twist tables fix
/// every vertex; a table may also permute vertices (a relabeling symmetry of
/// the model), in which case each image runs between the permuted endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AutomorphismTable {
    images: Vec<GroupoidWord>,
    vertices: Vec<VertexId>,
}

impl AutomorphismTable {
    pub fn identity(sys: &GeneratorSystem) -> Self {
        AutomorphismTable {
            images: (0..sys.len()).map(|i| sys.generator_word(GenId(i))).collect(),
            vertices: (0..sys.vertex_count()).map(VertexId).collect(),
        }
    }

    /// A table over a vertex permutation: `perm[v]` is the image of vertex `v`.
    pub fn from_images_permuting(
        sys: &GeneratorSystem,
        perm: Vec<VertexId>,
        images: Vec<GroupoidWord>,
    ) -> Result<Self, GroupoidError> {
        let mut seen = vec![false; sys.vertex_count()];
        if perm.len() != sys.vertex_count() {
            return Err(GroupoidError::Parse("vertex permutation has the wrong length".into()));
        }
        for v in &perm {
            if v.0 >= seen.len() || std::mem::replace(&mut seen[v.0], true) {
                return Err(GroupoidError::Parse("vertex map is not a permutation".into()));
            }
        }
        if images.len() != sys.len() {
            return Err(GroupoidError::Parse(format!(
                "table has {} images for {} generators",
                images.len(),
                sys.len()
            )));
        }
        for (g, img) in sys.generators().iter().zip(&images) {
            let (src, tgt) = (perm[g.source.0], perm[g.target.0]);
            if img.source != src || img.target != tgt {
                return Err(GroupoidError::ImageEndpoints {
                    gen: g.name.clone(),
                    src,
                    tgt,
                    found_src: img.source,
                    found_tgt: img.target,
                });
            }
        }
        Ok(AutomorphismTable { images, vertices: perm })
    }

    pub fn vertex_map(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn fixes_vertices(&self) -> bool {
        self.vertices.iter().enumerate().all(|(i, v)| v.0 == i)
    }

    /// Builds a table from explicit images, checking that each image
    /// endpoint-matches its generator.
    pub fn from_images(sys: &GeneratorSystem, images: Vec<GroupoidWord>) -> Result<Self, GroupoidError> {
        if images.len() != sys.len() {
            return Err(GroupoidError::Parse(format!(
                "table has {} images for {} generators",
                images.len(),
                sys.len()
            )));
        }
        for (g, img) in sys.generators().iter().zip(&images) {
            if img.source != g.source || img.target != g.target {
                return Err(GroupoidError::ImageEndpoints {
                    gen: g.name.clone(),
                    src: g.source,
                    tgt: g.target,
                    found_src: img.source,
                    found_tgt: img.target,
                });
            }
        }
        Ok(AutomorphismTable {
            images,
            vertices: (0..sys.vertex_count()).map(VertexId).collect(),
        })
    }

    pub fn image(&self, id: GenId) -> &GroupoidWord {
        &self.images[id.0]
    }

    pub fn images(&self) -> &[GroupoidWord] {
        &self.images
    }

    /// Substitutes the table into `w`.
    pub fn apply(&self, w: &GroupoidWord) -> GroupoidWord {
        let mut letters: Vec<Letter> = Vec::new();
        for &l in &w.letters {
            let img = &self.images[l.gen.0];
            let push = |letters: &mut Vec<Letter>, x: Letter| {
                if letters.last() == Some(&x.inv()) {
                    letters.pop();
                } else {
                    letters.push(x);
                }
            };
            if l.inverse {
                for &x in img.letters.iter().rev() {
                    push(&mut letters, x.inv());
                }
            } else {
                for &x in &img.letters {
                    push(&mut letters, x);
                }
            }
        }
        GroupoidWord {
            letters,
            source: self.vertices[w.source.0],
            target: self.vertices[w.target.0],
        }
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn compose(&self, inner: &AutomorphismTable) -> AutomorphismTable {
        AutomorphismTable {
            images: inner.images.iter().map(|w| self.apply(w)).collect(),
            vertices: inner.vertices.iter().map(|v| self.vertices[v.0]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.fixes_vertices()
            && self.images
            .iter()
            .enumerate()
            .all(|(i, w)| w.letters.len() == 1 && w.letters[0] == Letter::new(GenId(i), false))
    }

    /// First generator on which the two tables disagree.
    pub fn first_difference(&self, other: &AutomorphismTable) -> Option<GenId> {
        self.images
            .iter()
            .zip(&other.images)
            .position(|(a, b)| a != b)
            .map(GenId)
    }
}
