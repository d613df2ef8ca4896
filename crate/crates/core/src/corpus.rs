//! Binary transaction database built from tokenized, labeled instances.
//!
//! Instances are sets of tokens (duplicates collapse to one bit). Label `1`
//! puts an instance in the positive group G+ (by convention: misclassified),
//! label `0` in G-.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::bitmap::InstanceBitmap;
use crate::error::{Error, Result};

/// Dense token identifier, `0..m`.
pub type TokenId = usize;

/// Token strings with dense ids assigned in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `token`, registering it if unseen.
    pub fn intern(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    pub fn lookup(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Result<&str> {
        self.tokens.get(id).map(String::as_str).ok_or(Error::UnknownTokenId(id))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Instance label. `Plus` is group G+ (label 1), `Minus` is G- (label 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Plus,
    Minus,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            1 => Some(Label::Plus),
            0 => Some(Label::Minus),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Label::Plus => 1,
            Label::Minus => 0,
        }
    }

    /// Report symbol: `+` or `-`.
    pub fn symbol(self) -> &'static str {
        match self {
            Label::Plus => "+",
            Label::Minus => "-",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Label::Plus),
            "-" | "\u{2212}" => Some(Label::Minus),
            _ => None,
        }
    }
}

/// Immutable binarized corpus: one presence bitmap per token plus labels.
#[derive(Debug, Clone)]
pub struct LabeledTransactionSet {
    vocab: Vocabulary,
    columns: Vec<InstanceBitmap>,
    rows: Vec<Vec<TokenId>>,
    labels: Vec<Label>,
    group_plus: InstanceBitmap,
    group_minus: InstanceBitmap,
}

impl LabeledTransactionSet {
    /// Builds the database from `(tokens, label)` pairs. Line numbers in
    /// errors are 1-based positions in the stream.
    pub fn from_instances<I, T, S>(instances: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, u8)>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (idx, (tokens, label)) in instances.into_iter().enumerate() {
            let label = Label::from_bit(label).ok_or_else(|| Error::BadLabel {
                line: idx + 1,
                value: label.to_string(),
            })?;
            let mut row: Vec<TokenId> =
                tokens.into_iter().map(|t| vocab.intern(t.as_ref())).collect();
            row.sort_unstable();
            row.dedup();
            rows.push(row);
            labels.push(label);
        }
        Self::from_rows(vocab, rows, labels)
    }

    /// Builds the database from pre-interned rows. Rows must reference ids
    /// of `vocab`; duplicate ids collapse.
    pub fn from_rows(vocab: Vocabulary, mut rows: Vec<Vec<TokenId>>, labels: Vec<Label>) -> Result<Self> {
        assert_eq!(rows.len(), labels.len(), "rows and labels differ in length");
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n = rows.len();
        let m = vocab.len();
        let mut columns = vec![InstanceBitmap::empty(n); m];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &t in row.iter() {
                columns.get_mut(t).ok_or(Error::UnknownTokenId(t))?.insert(i);
            }
        }
        let group_plus =
            InstanceBitmap::from_indices(n, labels.iter().enumerate().filter(|(_, &l)| l == Label::Plus).map(|(i, _)| i));
        let group_minus = InstanceBitmap::full(n).and_not(&group_plus);
        Ok(Self { vocab, columns, rows, labels, group_plus, group_minus })
    }

    /// Instance count.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Vocabulary size.
    pub fn m(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_plus(&self) -> usize {
        self.group_plus.count()
    }

    pub fn n_minus(&self) -> usize {
        self.group_minus.count()
    }

    pub fn group_size(&self, label: Label) -> usize {
        match label {
            Label::Plus => self.n_plus(),
            Label::Minus => self.n_minus(),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn group_plus(&self) -> &InstanceBitmap {
        &self.group_plus
    }

    pub fn group_minus(&self) -> &InstanceBitmap {
        &self.group_minus
    }

    pub fn group(&self, label: Label) -> &InstanceBitmap {
        match label {
            Label::Plus => &self.group_plus,
            Label::Minus => &self.group_minus,
        }
    }

    /// Presence bitmap of `token`.
    pub fn column_bitmap(&self, token: TokenId) -> Result<&InstanceBitmap> {
        self.columns.get(token).ok_or(Error::UnknownTokenId(token))
    }

    pub(crate) fn column(&self, token: TokenId) -> &InstanceBitmap {
        &self.columns[token]
    }

    pub fn columns(&self) -> &[InstanceBitmap] {
        &self.columns
    }

    /// Sorted distinct token ids of instance `i`.
    pub fn row(&self, i: usize) -> &[TokenId] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<TokenId>] {
        &self.rows
    }

    /// Token frequency (number of instances containing it).
    pub fn frequency(&self, token: TokenId) -> usize {
        self.columns[token].count()
    }
}

/// Splits a UTF-8 text into LF-separated lines, dropping a trailing empty
/// line and any carriage return before the LF.
fn text_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for line in reader.split(b'\n') {
        let mut line = line?;
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        let line = String::from_utf8(line).map_err(|e| Error::Malformed {
            line: lines.len() + 1,
            msg: format!("invalid UTF-8: {e}"),
        })?;
        lines.push(line);
    }
    Ok(lines)
}

fn parse_label(text: &str, line: usize) -> Result<u8> {
    match text.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::BadLabel { line, value: other.to_owned() }),
    }
}

/// Reads the paired-file format: one space-separated instance per line in
/// `corpus`, one `0`/`1` label per line in `labels`.
pub fn read_paired<C: BufRead, L: BufRead>(corpus: C, labels: L) -> Result<LabeledTransactionSet> {
    let corpus = text_lines(corpus)?;
    let labels = text_lines(labels)?;
    // `split` never yields a trailing empty segment for a final LF, but an
    // explicit trailing blank line in the labels file is tolerated.
    let labels: &[String] = match labels.split_last() {
        Some((last, rest)) if last.trim().is_empty() && rest.len() == corpus.len() => rest,
        _ => &labels,
    };
    if corpus.len() != labels.len() {
        return Err(Error::Malformed {
            line: corpus.len().min(labels.len()) + 1,
            msg: format!("corpus has {} lines but labels has {}", corpus.len(), labels.len()),
        });
    }
    let mut records = Vec::with_capacity(corpus.len());
    for (i, (text, label)) in corpus.iter().zip(labels).enumerate() {
        let label = parse_label(label, i + 1)?;
        let tokens: Vec<&str> = text.split(' ').filter(|t| !t.is_empty()).collect();
        records.push((tokens, label));
    }
    LabeledTransactionSet::from_instances(records)
}

#[derive(Deserialize)]
struct JsonRecord {
    tokens: Vec<String>,
    label: serde_json::Value,
}

/// Reads the single-file format: one `{"tokens": [...], "label": 0|1}`
/// object per line.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<LabeledTransactionSet> {
    let lines = text_lines(reader)?;
    let mut records = Vec::with_capacity(lines.len());
    for (i, text) in lines.iter().enumerate() {
        let line = i + 1;
        if text.trim().is_empty() {
            if i + 1 == lines.len() {
                break;
            }
            return Err(Error::Malformed { line, msg: "blank line".into() });
        }
        let rec: JsonRecord =
            serde_json::from_str(text).map_err(|e| Error::Malformed { line, msg: e.to_string() })?;
        let label = match rec.label.as_u64() {
            Some(0) => 0,
            Some(1) => 1,
            _ => return Err(Error::BadLabel { line, value: rec.label.to_string() }),
        };
        records.push((rec.tokens, label));
    }
    LabeledTransactionSet::from_instances(records)
}

/// Writes instances in the paired-file format.
pub fn write_paired<W1: std::io::Write, W2: std::io::Write>(
    db: &LabeledTransactionSet,
    mut corpus: W1,
    mut labels: W2,
) -> Result<()> {
    for i in 0..db.n() {
        let tokens: Vec<&str> = db.row(i).iter().map(|&t| db.vocab().tokens()[t].as_str()).collect();
        writeln!(corpus, "{}", tokens.join(" "))?;
        writeln!(labels, "{}", db.labels()[i].bit())?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    /// The five toy instances of the "how many" example, lowercased and
    /// stripped of punctuation. Label 1 = misclassified.
    pub const TOY: [(&str, u8); 5] = [
        ("how many ducks are in the picture", 1),
        ("what are the ducks eating", 1),
        ("how many roosters are in the puddle", 1),
        ("do you see ducks in the puddle", 0),
        ("are there many ducks playing", 0),
    ];

    pub fn toy_records(replicas: usize) -> Vec<(Vec<&'static str>, u8)> {
        (0..replicas)
            .flat_map(|_| TOY.iter().map(|(s, l)| (s.split(' ').collect(), *l)))
            .collect()
    }
}
