//! Mining reports, file-level entry points and pattern-list readers.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_jsonl, read_paired, LabeledTransactionSet};
use crate::embeddings::{load_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::mdl::CoverState;
use crate::pattern::{PatternEntry, PatternText};
use crate::search::{mine, MiningResult, SearchConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPattern {
    pub pattern: String,
    /// `+` or `-`.
    pub target: String,
    pub support_plus: usize,
    pub support_minus: usize,
    /// Saving when the pattern was accepted.
    pub gain_bits: f64,
    /// Bits the final model would grow by without this pattern.
    pub contribution_bits: f64,
    /// `(u+/n+) / (u-/n-)`; null when infinite or undefined.
    pub lift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    pub m: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub total_bits_start: f64,
    pub total_bits_end: f64,
    pub rounds: usize,
    pub config: SearchConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub metadata: ReportMetadata,
    pub patterns: Vec<ReportPattern>,
}

fn lift(entry: &PatternEntry, db: &LabeledTransactionSet) -> Option<f64> {
    let plus = entry.u_plus as f64 / db.n_plus() as f64;
    let minus = entry.u_minus as f64 / db.n_minus() as f64;
    let v = plus / minus;
    v.is_finite().then_some(v)
}

impl Report {
    pub fn new(db: &LabeledTransactionSet, result: &MiningResult, config: &SearchConfig) -> Result<Self> {
        let mut state = CoverState::new(db);
        for e in &result.entries {
            state.add(e.clone())?;
        }
        let patterns = result
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Ok(ReportPattern {
                    pattern: e.pattern.render(db.vocab())?,
                    target: e.target.symbol().to_owned(),
                    support_plus: e.u_plus,
                    support_minus: e.u_minus,
                    gain_bits: e.gain_bits,
                    contribution_bits: -state.removal_gain(i),
                    lift: lift(e, db),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            schema: SCHEMA_VERSION,
            metadata: ReportMetadata {
                n: db.n(),
                m: db.m(),
                n_plus: db.n_plus(),
                n_minus: db.n_minus(),
                total_bits_start: result.total_bits_start,
                total_bits_end: result.total_bits_end,
                rounds: result.rounds,
                config: config.clone(),
                warning: result.warning.clone(),
                timestamp: None,
            },
            patterns,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        if self.patterns.is_empty() {
            return "no label-descriptive patterns found\n".to_owned();
        }
        let mut out = String::new();
        for p in &self.patterns {
            let lift = p.lift.map_or_else(|| "-".to_owned(), |l| format!("{l:.2}"));
            out.push_str(&format!(
                "{} {}  support+={} support-={} gain={:.3} lift={}\n",
                p.target, p.pattern, p.support_plus, p.support_minus, p.gain_bits, lift
            ));
        }
        out
    }

    /// The reported patterns in vocabulary-free form.
    pub fn pattern_texts(&self) -> Result<Vec<PatternText>> {
        self.patterns.iter().map(|p| PatternText::parse(&p.pattern)).collect()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Loads a corpus: a JSONL file when `labels` is `None`, otherwise the
/// paired-file format.
pub fn load_corpus(input: &Path, labels: Option<&Path>) -> Result<LabeledTransactionSet> {
    match labels {
        Some(labels) => read_paired(open(input)?, open(labels)?),
        None => read_jsonl(open(input)?),
    }
}

pub fn load_embedding_file(path: &Path) -> Result<EmbeddingTable> {
    load_embeddings(open(path)?)
}

/// Mines a database and wraps the result in a report.
pub fn mine_report(
    db: &LabeledTransactionSet,
    config: &SearchConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<Report> {
    let result = mine(db, config, embeddings)?;
    Report::new(db, &result, config)
}

/// In-memory entry point: instances as token lists, labels as 0/1, and an
/// optional embeddings file.
pub fn mine_tokens<S: AsRef<str>>(
    instances: &[Vec<S>],
    labels: &[u8],
    config: &SearchConfig,
    embeddings: Option<&Path>,
) -> Result<Report> {
    if instances.len() != labels.len() {
        return Err(Error::Malformed {
            line: instances.len().min(labels.len()) + 1,
            msg: format!("{} instances but {} labels", instances.len(), labels.len()),
        });
    }
    for (i, &l) in labels.iter().enumerate() {
        if l > 1 {
            return Err(Error::BadLabel { line: i + 1, value: l.to_string() });
        }
    }
    let db = LabeledTransactionSet::from_instances(
        instances.iter().zip(labels).map(|(row, &l)| (row.iter().map(AsRef::as_ref).collect::<Vec<&str>>(), l)),
    )?;
    let table = embeddings.map(load_embedding_file).transpose()?;
    mine_report(&db, config, table.as_ref())
}

fn patterns_from_json(value: &serde_json::Value) -> Result<Vec<PatternText>> {
    let bad = |msg: &str| Error::Malformed { line: 1, msg: msg.to_owned() };
    let list = match value {
        serde_json::Value::Array(items) => items,
        serde_json::Value::Object(map) => match map.get("patterns") {
            Some(serde_json::Value::Array(items)) => items,
            _ => return Err(bad("expected a \"patterns\" array")),
        },
        _ => return Err(bad("expected an object or array")),
    };
    list.iter()
        .map(|item| {
            let text = match item {
                serde_json::Value::String(s) => s.as_str(),
                serde_json::Value::Object(map) => {
                    map.get("pattern").and_then(|p| p.as_str()).ok_or_else(|| bad("record without \"pattern\""))?
                }
                _ => return Err(bad("expected a pattern string or record")),
            };
            PatternText::parse(text)
        })
        .collect()
}

/// Parses a pattern list: a report or planted-truth JSON document, a JSON
/// array, or one pattern per line (blank lines and `#` comments skipped).
pub fn parse_pattern_list(text: &str) -> Result<Vec<PatternText>> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Malformed { line: e.line(), msg: e.to_string() })?;
        return patterns_from_json(&value);
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(PatternText::parse)
        .collect()
}

pub fn read_pattern_list(path: &Path) -> Result<Vec<PatternText>> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Malformed { line: 1, msg: format!("invalid UTF-8: {e}") })?;
    parse_pattern_list(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::toy_records;

    fn toy_report() -> Report {
        let records = toy_records(20);
        let instances: Vec<Vec<&str>> = records.iter().map(|(t, _)| t.clone()).collect();
        let labels: Vec<u8> = records.iter().map(|(_, l)| *l).collect();
        mine_tokens(&instances, &labels, &SearchConfig::default(), None).unwrap()
    }

    #[test]
    fn json_shape() {
        let report = toy_report();
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["schema"], 1);
        assert_eq!(value["metadata"]["n"], 100);
        assert_eq!(value["metadata"]["n_plus"], 60);
        assert!(value["metadata"]["config"]["beam"].is_u64());
        assert!(value["metadata"].get("timestamp").is_none());
        let patterns = value["patterns"].as_array().unwrap();
        assert!(!patterns.is_empty());
        for p in patterns {
            assert!(p["target"] == "+" || p["target"] == "-");
            assert!(p["gain_bits"].as_f64().unwrap() > 0.0);
        }
        let back: Report = serde_json::from_value(value).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn reports_are_reproducible() {
        assert_eq!(toy_report().to_json(), toy_report().to_json());
    }

    #[test]
    fn text_format() {
        let report = toy_report();
        let text = report.to_text();
        assert_eq!(text.lines().count(), report.patterns.len());
        assert!(text.contains("support+="));
        let empty = Report { patterns: Vec::new(), ..report };
        assert_eq!(empty.to_text(), "no label-descriptive patterns found\n");
    }

    #[test]
    fn lift_values() {
        let db = LabeledTransactionSet::from_instances(toy_records(1)).unwrap();
        let entry = |text: &str| PatternEntry::new(crate::pattern::parse_pattern(text, db.vocab()).unwrap(), &db).unwrap();
        // ducks: 2 of 3 in G+, 2 of 2 in G-
        assert!((lift(&entry("ducks"), &db).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        // how never occurs in G-
        assert_eq!(lift(&entry("how"), &db), None);
        let empty = PatternEntry { u_plus: 0, u_minus: 0, ..entry("how") };
        assert_eq!(lift(&empty, &db), None);
    }

    #[test]
    fn contributions_match_removal() {
        let report = toy_report();
        let records = toy_records(20);
        let db = LabeledTransactionSet::from_instances(records).unwrap();
        let patterns: Vec<PatternEntry> = report
            .patterns
            .iter()
            .map(|p| PatternEntry::new(crate::pattern::parse_pattern(&p.pattern, db.vocab()).unwrap(), &db).unwrap())
            .collect();
        let full = crate::mdl::total_length(&db, &patterns).unwrap();
        assert!(crate::mdl::lengths_agree(full, report.metadata.total_bits_end));
        for (i, p) in report.patterns.iter().enumerate() {
            let mut rest = patterns.clone();
            rest.remove(i);
            let without = crate::mdl::total_length(&db, &rest).unwrap();
            assert!(crate::mdl::lengths_agree(without - full, p.contribution_bits));
        }
    }

    #[test]
    fn input_validation() {
        let cfg = SearchConfig::default();
        let err = mine_tokens(&[vec!["a"]], &[1, 0], &cfg, None).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        assert!(err.is_malformed_input());
        let err = mine_tokens(&[vec!["a"], vec!["b"]], &[1, 2], &cfg, None).unwrap_err();
        assert!(matches!(err, Error::BadLabel { line: 2, .. }));
        let err = mine_tokens::<&str>(&[], &[], &cfg, None).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus));
    }

    #[test]
    fn pattern_lists() {
        assert!(parse_pattern_list("").unwrap().is_empty());
        assert!(parse_pattern_list("  \n").unwrap().is_empty());
        let lines = parse_pattern_list("# found\nAND(b, a)\n\nc\n").unwrap();
        assert_eq!(lines.iter().map(PatternText::render).collect::<Vec<_>>(), ["AND(a, b)", "c"]);
        let doc = r#"{"patterns": [{"pattern": "AND(x, XOR(y, z))", "target": "+"}]}"#;
        assert_eq!(parse_pattern_list(doc).unwrap()[0].render(), "AND(x, XOR(y, z))");
        assert_eq!(parse_pattern_list(r#"["a", "b"]"#).unwrap().len(), 2);
        assert!(parse_pattern_list("{\"nope\": 1}").is_err());
        assert!(parse_pattern_list("AND(a").is_err());
    }

    #[test]
    fn report_round_trips_through_pattern_list() {
        let report = toy_report();
        let parsed = parse_pattern_list(&report.to_json()).unwrap();
        assert_eq!(parsed, report.pattern_texts().unwrap());
    }
}
