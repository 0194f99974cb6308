//! Words over named symbols with integer exponents.
//!
//! The same type carries twist words on a surface model (`x1 a2^-1 x2`),
//! abstract words containing the diffeomorphism symbols `phi`/`psi`, and the
//! explicit identity symbol `1`. Letters are not merged eagerly: derivations
//! need to split `t^3` into `t t^2` and keep identity letters around until a
//! reduction step removes them. [`Word::reduced`] gives the canonical form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The explicit identity symbol.
pub const IDENTITY: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Power {
    pub symbol: String,
    pub exp: i64,
}

impl Power {
    pub fn new(symbol: impl Into<String>, exp: i64) -> Self {
        Power {
            symbol: symbol.into(),
            exp,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.symbol == IDENTITY
    }

    pub fn inverse(&self) -> Self {
        if self.is_identity() {
            return self.clone();
        }
        Power::new(self.symbol.clone(), -self.exp)
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 || self.is_identity() {
            write!(f, "{}", self.symbol)
        } else {
            write!(f, "{}^{}", self.symbol, self.exp)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("malformed token `{0}`")]
    Token(String),
    #[error("zero exponent on `{0}`")]
    ZeroExponent(String),
    #[error("unbalanced brackets in `{0}`")]
    Brackets(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word {
    letters: Vec<Power>,
}

/// Mapping classes are words over the twist symbols of a surface model.
pub type MappingClass = Word;

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn identity() -> Self {
        Word {
            letters: vec![Power::new(IDENTITY, 1)],
        }
    }

    pub fn from_letters(letters: Vec<Power>) -> Self {
        Word { letters }
    }

    pub fn letter(symbol: &str, exp: i64) -> Self {
        if exp == 0 {
            Word::empty()
        } else {
            Word {
                letters: vec![Power::new(symbol, exp)],
            }
        }
    }

    pub fn letters(&self) -> &[Power] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Power> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Sum of absolute exponents, ignoring identity letters.
    pub fn syllable_length(&self) -> u64 {
        self.letters
            .iter()
            .filter(|p| !p.is_identity())
            .map(|p| p.exp.unsigned_abs())
            .sum()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(|p| p.symbol.as_str())
    }

    /// Free reduction: drops identity letters and zero exponents, merges
    /// adjacent powers of one symbol.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Power> = Vec::with_capacity(self.letters.len());
        for p in &self.letters {
            if p.is_identity() || p.exp == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.symbol == p.symbol => {
                    last.exp += p.exp;
                    if last.exp == 0 {
                        out.pop();
                    }
                }
                _ => out.push(p.clone()),
            }
        }
        Word { letters: out }
    }

    pub fn is_trivial(&self) -> bool {
        self.reduced().is_empty()
    }

    /// Equality in the free group on the symbols.
    pub fn freely_equal(&self, other: &Word) -> bool {
        self.reduced() == other.reduced()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(Power::inverse).collect(),
        }
    }

    /// Letter-level concatenation, no reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word { letters }
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            letters.extend(base.letters.iter().cloned());
        }
        Word { letters }
    }

    /// `β^γ = γ β γ⁻¹`.
    pub fn conjugated_by(&self, by: &Word) -> Word {
        by.concat(self).concat(&by.inverse())
    }

    /// `[u, v] = u v u⁻¹ v⁻¹`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.concat(v).concat(&u.inverse()).concat(&v.inverse())
    }

    pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
        let mut letters = Vec::new();
        for w in words {
            letters.extend(w.letters.iter().cloned());
        }
        Word { letters }
    }

    /// Replaces every letter `s^e` by `image(s)^e`; the first error aborts.
    pub fn substitute<E>(&self, mut image: impl FnMut(&str) -> Result<Word, E>) -> Result<Word, E> {
        let mut letters = Vec::new();
        for p in &self.letters {
            if p.is_identity() {
                letters.push(p.clone());
                continue;
            }
            letters.extend(image(&p.symbol)?.pow(p.exp).letters);
        }
        Ok(Word { letters })
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word {
            letters: self.letters[start..end].to_vec(),
        }
    }

    /// Replaces `letters[start..end]` by `with`.
    pub fn splice(&self, start: usize, end: usize, with: &Word) -> Word {
        let mut letters = self.letters[..start].to_vec();
        letters.extend(with.letters.iter().cloned());
        letters.extend(self.letters[end..].iter().cloned());
        Word { letters }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "{IDENTITY}");
        }
        for (i, p) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = WordError;
    fn try_from(s: String) -> Result<Word, WordError> {
        s.parse()
    }
}

fn parse_power(token: &str) -> Result<Power, WordError> {
    let (name, exp) = match token.split_once('^') {
        Some((n, e)) => (
            n,
            e.parse::<i64>().map_err(|_| WordError::Token(token.to_string()))?,
        ),
        None => (token, 1),
    };
    let valid = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '\'');
    if !valid {
        return Err(WordError::Token(token.to_string()));
    }
    if exp == 0 {
        return Err(WordError::ZeroExponent(name.to_string()));
    }
    Ok(Power::new(name, exp))
}

/// Splits on top-level whitespace, keeping bracketed groups intact.
fn tokens(s: &str) -> Result<Vec<String>, WordError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' | '{' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(WordError::Brackets(s.to_string()));
                }
                cur.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if depth != 0 {
        return Err(WordError::Brackets(s.to_string()));
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

/// Splits `a, b` at the top-level comma.
fn split_pair(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Index of the bracket closing the one at position 0.
fn matching_close(token: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in token.char_indices() {
        match c {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Parses an optional trailing `^n` or `^{w}` after a closing bracket.
fn group_suffix(token: &str, close: usize) -> Result<Suffix, WordError> {
    let rest = &token[close + 1..];
    if rest.is_empty() {
        return Ok(Suffix::None);
    }
    let Some(rest) = rest.strip_prefix('^') else {
        return Err(WordError::Token(token.to_string()));
    };
    if let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        return Ok(Suffix::Conjugate(inner.parse()?));
    }
    rest.parse::<i64>()
        .map(Suffix::Power)
        .map_err(|_| WordError::Token(token.to_string()))
}

enum Suffix {
    None,
    Power(i64),
    Conjugate(Word),
}

impl Suffix {
    fn apply(self, w: Word) -> Word {
        match self {
            Suffix::None => w,
            Suffix::Power(n) => w.pow(n),
            Suffix::Conjugate(by) => w.conjugated_by(&by),
        }
    }
}

/// Grammar: whitespace-separated items, each one of
/// `sym`, `sym^n`, `(word)`, `(word)^n`, `[u, v]`, `[u, v]^n`, or any group
/// followed by `^{w}` for the conjugate `w · group · w⁻¹`.
impl FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for token in tokens(s)? {
            let w = if let Some(body) = token.strip_prefix('[') {
                let close = matching_close(&token).ok_or_else(|| WordError::Brackets(token.clone()))?;
                let inner = &body[..close - 1];
                let (u, v) = split_pair(inner).ok_or_else(|| WordError::Token(token.clone()))?;
                let c = Word::commutator(&u.parse()?, &v.parse()?);
                group_suffix(&token, close)?.apply(c)
            } else if let Some(body) = token.strip_prefix('(') {
                let close = matching_close(&token).ok_or_else(|| WordError::Brackets(token.clone()))?;
                let inner: Word = body[..close - 1].parse()?;
                group_suffix(&token, close)?.apply(inner)
            } else if token.contains("^{") {
                let (head, _) = token.split_once("^{").unwrap();
                let base: Word = head.parse()?;
                let inner = token[head.len() + 2..]
                    .strip_suffix('}')
                    .ok_or_else(|| WordError::Brackets(token.clone()))?;
                base.conjugated_by(&inner.parse()?)
            } else {
                Word::from_letters(vec![parse_power(&token)?])
            };
            letters.extend(w.letters);
        }
        Ok(Word { letters })
    }
}

/// Builds a word from a string literal in code paths where the text is fixed.
pub fn w(s: &str) -> Word {
    s.parse().unwrap_or_else(|e| panic!("bad word literal `{s}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_merges_and_drops() {
        assert_eq!(w("a a^2 b 1 b^-1 a^-3").reduced(), Word::empty());
        assert_eq!(w("a b 1 c").reduced(), w("a b c"));
        assert_eq!(w("x^2 x^-1").reduced().to_string(), "x");
    }

    #[test]
    fn bracket_and_conjugate_syntax() {
        let c = w("[x1 a2^-1, phi]");
        assert_eq!(c, w("x1 a2^-1 phi a2 x1^-1 phi^-1"));
        let conj = w("(x1 x2)^{x3^2}");
        assert_eq!(conj, w("x3^2 x1 x2 x3^-2"));
        assert_eq!(w("(a b)^2"), w("a b a b"));
        assert_eq!(w("[a, 1]^2"), w("a 1 a^-1 1 a 1 a^-1 1"));
        assert!(w("[a, 1]").is_trivial());
        assert_eq!(w("1"), Word::identity());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("a^0".parse::<Word>(), Err(WordError::ZeroExponent(_))));
        assert!(matches!("[a, b".parse::<Word>(), Err(WordError::Brackets(_))));
        assert!("a^x".parse::<Word>().is_err());
        assert!("[a b]".parse::<Word>().is_err());
    }

    #[test]
    fn display_round_trip() {
        let x = w("delta^2 a1 a2^-1 phi 1");
        assert_eq!(x.to_string().parse::<Word>().unwrap(), x);
        assert_eq!(Word::empty().to_string(), "1");
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..4, -3i64..=3), 0..12).prop_map(|v| {
            Word::from_letters(
                v.into_iter()
                    .filter(|(_, e)| *e != 0)
                    .map(|(s, e)| Power::new(["a", "b", "c", "1"][s], e))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn inverse_cancels(x in arb_word()) {
            prop_assert!(x.concat(&x.inverse()).is_trivial());
        }

        #[test]
        fn reduction_idempotent(x in arb_word()) {
            prop_assert_eq!(x.reduced().reduced(), x.reduced());
        }

        #[test]
        fn text_round_trip(x in arb_word()) {
            let back: Word = x.to_string().parse().unwrap();
            prop_assert!(back.freely_equal(&x));
        }
    }
}
