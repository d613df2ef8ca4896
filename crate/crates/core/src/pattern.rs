//! The pattern language: conjunctions of clauses, where a clause is a single
//! token or an exclusive group of interchangeable tokens.
//!
//! Canonical form: members of a clause ascend by token id, clauses ascend by
//! their smallest member, and no token appears in two clauses. The ASCII
//! syntax is `AND(t1, XOR(t2, t3), t4)`; single-clause patterns drop the
//! `AND` wrapper and singleton clauses are written as the bare token.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::bitmap::InstanceBitmap;
use crate::corpus::{Label, LabeledTransactionSet, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// A non-empty, strictly ascending set of token ids. Size one is a plain
/// token; larger sizes are an exclusive group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    members: Vec<TokenId>,
}

impl Clause {
    pub fn new(mut members: Vec<TokenId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyPattern);
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NonDisjoint);
        }
        Ok(Self { members })
    }

    pub fn singleton(token: TokenId) -> Self {
        Self { members: vec![token] }
    }

    pub fn members(&self) -> &[TokenId] {
        &self.members
    }

    /// Group size `s`.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_group(&self) -> bool {
        self.members.len() > 1
    }

    fn first(&self) -> TokenId {
        self.members[0]
    }

    /// Satisfied when at least one member is present.
    pub fn satisfied_by(&self, instance: &[TokenId]) -> bool {
        self.members.iter().any(|t| instance.contains(t))
    }

    /// Instances where at least one member is present.
    pub fn support_bitmap(&self, db: &LabeledTransactionSet) -> Result<InstanceBitmap> {
        let mut acc = InstanceBitmap::empty(db.n());
        for &t in &self.members {
            acc.or_assign(db.column_bitmap(t)?);
        }
        Ok(acc)
    }

    /// Returns this clause widened by `token`.
    pub fn with_member(&self, token: TokenId) -> Result<Self> {
        let mut members = self.members.clone();
        members.push(token);
        Self::new(members)
    }
}

/// Conjunction of token-disjoint clauses in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    clauses: Vec<Clause>,
}

impl Pattern {
    /// Canonicalizes `clauses`. Fails on empty input or shared tokens.
    pub fn new(mut clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::EmptyPattern);
        }
        let mut seen = BTreeSet::new();
        for c in &clauses {
            for &t in c.members() {
                if !seen.insert(t) {
                    return Err(Error::NonDisjoint);
                }
            }
        }
        clauses.sort_unstable_by_key(Clause::first);
        Ok(Self { clauses })
    }

    pub fn from_members(clauses: Vec<Vec<TokenId>>) -> Result<Self> {
        Self::new(clauses.into_iter().map(Clause::new).collect::<Result<_>>()?)
    }

    /// Plain conjunction of single tokens.
    pub fn conjunction(tokens: &[TokenId]) -> Result<Self> {
        Self::new(tokens.iter().map(|&t| Clause::singleton(t)).collect())
    }

    pub fn singleton(token: TokenId) -> Self {
        Self { clauses: vec![Clause::singleton(token)] }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause count `k`.
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Total token count over all clauses.
    pub fn token_count(&self) -> usize {
        self.clauses.iter().map(Clause::size).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.clauses.iter().flat_map(|c| c.members().iter().copied())
    }

    pub fn contains_token(&self, token: TokenId) -> bool {
        self.tokens().any(|t| t == token)
    }

    pub fn max_token(&self) -> TokenId {
        self.tokens().max().expect("patterns are non-empty")
    }

    pub fn token_set(&self) -> BTreeSet<TokenId> {
        self.tokens().collect()
    }

    /// Conjunction of both patterns. Fails if they share a token.
    pub fn and(&self, other: &Pattern) -> Result<Self> {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        Self::new(clauses)
    }

    /// Replaces clause `idx` with `clause`.
    pub fn with_clause(&self, idx: usize, clause: Clause) -> Result<Self> {
        let mut clauses = self.clauses.clone();
        clauses[idx] = clause;
        Self::new(clauses)
    }

    /// True when every clause has at least one member in `instance`.
    pub fn matches(&self, instance: &[TokenId]) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(instance))
    }

    /// Intersection over clauses of the union of member columns.
    pub fn support_bitmap(&self, db: &LabeledTransactionSet) -> Result<InstanceBitmap> {
        let mut clauses = self.clauses.iter();
        let first = clauses.next().expect("patterns are non-empty");
        let mut acc = first.support_bitmap(db)?;
        for c in clauses {
            if c.is_group() {
                acc.and_assign(&c.support_bitmap(db)?);
            } else {
                acc.and_assign(db.column_bitmap(c.first())?);
            }
        }
        Ok(acc)
    }

    /// ASCII canonical rendering, e.g. `AND(what, XOR(color, colour))`.
    pub fn render(&self, vocab: &Vocabulary) -> Result<String> {
        self.render_with(vocab, Style::Ascii)
    }

    /// Display rendering with the logical symbols, e.g. `∧(how, many)`.
    pub fn render_unicode(&self, vocab: &Vocabulary) -> Result<String> {
        self.render_with(vocab, Style::Unicode)
    }

    fn render_with(&self, vocab: &Vocabulary, style: Style) -> Result<String> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.members().iter().map(|&t| vocab.token(t).map(str::to_owned)).collect())
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(render_clauses(&clauses, style))
    }

    /// Rendering with members and clauses ordered by token text instead of
    /// id. Independent of vocabulary id assignment, so it serves as the
    /// deterministic tie-breaker during search and for result ordering.
    pub fn order_key(&self, vocab: &Vocabulary) -> String {
        let mut clauses: Vec<Vec<String>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut m: Vec<String> = c.members().iter().map(|&t| vocab.tokens()[t].clone()).collect();
                m.sort();
                m
            })
            .collect();
        clauses.sort();
        render_clauses(&clauses, Style::Ascii)
    }
}

/// A pattern with its target label and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternEntry {
    pub pattern: Pattern,
    pub target: Label,
    pub u_plus: usize,
    pub u_minus: usize,
    pub gain_bits: f64,
}

impl PatternEntry {
    /// Entry with supports computed from `db`; the target is the group in
    /// which the pattern is relatively more frequent (ties go to G+).
    pub fn new(pattern: Pattern, db: &LabeledTransactionSet) -> Result<Self> {
        let support = pattern.support_bitmap(db)?;
        let u_plus = support.and_count(db.group_plus());
        let u_minus = support.count() - u_plus;
        let target = biased_group(u_plus, u_minus, db.n_plus(), db.n_minus()).unwrap_or(Label::Plus);
        Ok(Self { pattern, target, u_plus, u_minus, gain_bits: 0.0 })
    }

    pub fn with_target(mut self, target: Label) -> Self {
        self.target = target;
        self
    }
}

/// The group where `u/n` is higher, or `None` on an exact tie.
pub fn biased_group(u_plus: usize, u_minus: usize, n_plus: usize, n_minus: usize) -> Option<Label> {
    // u+/n+ vs u-/n-, compared exactly.
    let lhs = u_plus as u128 * n_minus as u128;
    let rhs = u_minus as u128 * n_plus as u128;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => Some(Label::Plus),
        std::cmp::Ordering::Less => Some(Label::Minus),
        std::cmp::Ordering::Equal => None,
    }
}

#[derive(Clone, Copy)]
enum Style {
    Ascii,
    Unicode,
}

fn escape_token(token: &str, out: &mut String) {
    for ch in token.chars() {
        if matches!(ch, '\\' | ',' | '(' | ')') || ch.is_whitespace() {
            out.push('\\');
        }
        out.push(ch);
    }
}

fn render_clauses(clauses: &[Vec<String>], style: Style) -> String {
    let (and, xor) = match style {
        Style::Ascii => ("AND", "XOR"),
        Style::Unicode => ("\u{2227}", "\u{2295}"),
    };
    let render_clause = |members: &[String], out: &mut String| {
        if members.len() == 1 {
            escape_token(&members[0], out);
        } else {
            let _ = write!(out, "{xor}(");
            for (i, t) in members.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                escape_token(t, out);
            }
            out.push(')');
        }
    };
    let mut out = String::new();
    if clauses.len() == 1 {
        render_clause(&clauses[0], &mut out);
    } else {
        let _ = write!(out, "{and}(");
        for (i, c) in clauses.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            render_clause(c, &mut out);
        }
        out.push(')');
    }
    out
}

/// A pattern in textual form, not yet bound to a vocabulary. Clauses and
/// members are normalized to text order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternText {
    clauses: Vec<Vec<String>>,
}

impl PatternText {
    pub fn new(clauses: Vec<Vec<String>>) -> Result<Self> {
        if clauses.is_empty() || clauses.iter().any(Vec::is_empty) {
            return Err(Error::EmptyPattern);
        }
        let mut seen = BTreeSet::new();
        for c in &clauses {
            for t in c {
                if !seen.insert(t.as_str()) {
                    return Err(Error::NonDisjoint);
                }
            }
        }
        let mut clauses: Vec<Vec<String>> = clauses
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        clauses.sort();
        Ok(Self { clauses })
    }

    pub fn from_pattern(pattern: &Pattern, vocab: &Vocabulary) -> Result<Self> {
        let clauses = pattern
            .clauses()
            .iter()
            .map(|c| c.members().iter().map(|&t| vocab.token(t).map(str::to_owned)).collect())
            .collect::<Result<_>>()?;
        Self::new(clauses)
    }

    /// Parses the ASCII syntax without resolving tokens.
    pub fn parse(text: &str) -> Result<Self> {
        Parser { src: text, pos: 0 }.pattern()
    }

    pub fn clauses(&self) -> &[Vec<String>] {
        &self.clauses
    }

    pub fn token_set(&self) -> BTreeSet<String> {
        self.clauses.iter().flatten().cloned().collect()
    }

    pub fn render(&self) -> String {
        render_clauses(&self.clauses, Style::Ascii)
    }

    /// Binds the tokens to ids of `vocab`.
    pub fn resolve(&self, vocab: &Vocabulary) -> Result<Pattern> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|t| vocab.lookup(t).ok_or_else(|| Error::UnknownToken(t.clone())))
                    .collect::<Result<Vec<_>>>()
                    .and_then(Clause::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::new(clauses)
    }
}

/// Parses `text` in the ASCII syntax and canonicalizes it against `vocab`.
pub fn parse_pattern(text: &str, vocab: &Vocabulary) -> Result<Pattern> {
    PatternText::parse(text)?.resolve(vocab)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.pos, msg: msg.into() })
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.err(format!("expected '{ch}'"))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(kw) && self.rest()[kw.len()..].trim_start().starts_with('(') {
            self.pos += kw.len();
            self.skip_ws();
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_ws();
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        let start = self.pos;
        let mut end = self.src.len() - start;
        while let Some((i, ch)) = chars.next() {
            match ch {
                '\\' => match chars.next() {
                    Some((_, esc)) => out.push(esc),
                    None => {
                        self.pos = start + i;
                        return self.err("dangling escape");
                    }
                },
                ',' | '(' | ')' => {
                    end = i;
                    break;
                }
                c if c.is_whitespace() => {
                    end = i;
                    break;
                }
                c => out.push(c),
            }
        }
        if out.is_empty() {
            return self.err("expected token");
        }
        self.pos = start + end;
        Ok(out)
    }

    fn group(&mut self) -> Result<Vec<String>> {
        let mut members = vec![self.token()?];
        while self.eat(',') {
            members.push(self.token()?);
        }
        self.expect(')')?;
        if members.len() < 2 {
            return self.err("XOR groups need at least two members");
        }
        Ok(members)
    }

    fn item(&mut self) -> Result<Vec<String>> {
        if self.keyword("XOR") {
            self.group()
        } else {
            Ok(vec![self.token()?])
        }
    }

    fn pattern(mut self) -> Result<PatternText> {
        let clauses = if self.keyword("AND") {
            let mut clauses = vec![self.item()?];
            while self.eat(',') {
                clauses.push(self.item()?);
            }
            self.expect(')')?;
            clauses
        } else {
            vec![self.item()?]
        };
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.err("trailing input");
        }
        PatternText::new(clauses)
    }
}
