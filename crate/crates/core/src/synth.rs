//! Synthetic corpora with planted ground-truth patterns, plus recovery
//! scoring.
//!
//! Background tokens follow a Zipf law and are drawn independently per
//! instance. Each planted pattern is stamped onto a fixed fraction of G+
//! and a (smaller) fraction of G-; destructive noise then drops stamped
//! tokens independently. The generator also emits word vectors in which the
//! members of every planted group are near-duplicates and all other tokens
//! are quasi-orthogonal.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_paired, Label, LabeledTransactionSet};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternText};

/// Dimensionality of generated word vectors.
pub const EMBEDDING_DIM: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    /// Vocabulary size.
    pub m: usize,
    /// Fraction of instances in G+.
    pub imbalance: f64,
    pub num_patterns: usize,
    /// Clauses per planted pattern.
    pub pattern_len: usize,
    /// Members of the last clause of each planted pattern; 1 plants a pure
    /// conjunction.
    pub group_size: usize,
    /// Fraction of G+ carrying each planted pattern.
    pub target_rate: f64,
    /// Fraction of G- carrying each planted pattern.
    pub leak_rate: f64,
    pub zipf_exponent: f64,
    /// Expected background tokens per instance.
    pub density: f64,
    /// Probability of dropping each stamped token.
    pub destructive_noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 10_000,
            m: 1_000,
            imbalance: 0.1,
            num_patterns: 5,
            pattern_len: 3,
            group_size: 1,
            target_rate: 0.05,
            leak_rate: 0.002,
            zipf_exponent: 1.1,
            density: 8.0,
            destructive_noise: 0.05,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Distinct tokens used by the planted patterns.
    pub fn planted_tokens(&self) -> usize {
        let per = if self.group_size > 1 { self.pattern_len - 1 + self.group_size } else { self.pattern_len };
        self.num_patterns * per
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_owned()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.imbalance > 0.0 && self.imbalance < 1.0) {
            return bad("imbalance must lie in (0, 1)");
        }
        if self.pattern_len == 0 || self.group_size == 0 {
            return bad("pattern_len and group_size must be positive");
        }
        if !(0.0..=1.0).contains(&self.target_rate) || !(0.0..=1.0).contains(&self.leak_rate) {
            return bad("rates must lie in [0, 1]");
        }
        if self.num_patterns > 0 && self.leak_rate >= self.target_rate {
            return bad("leak_rate must be below target_rate");
        }
        if !(0.0..=1.0).contains(&self.destructive_noise) {
            return bad("destructive_noise must lie in [0, 1]");
        }
        if !(self.density > 0.0) || !(self.zipf_exponent > 0.0) {
            return bad("density and zipf_exponent must be positive");
        }
        let need = self.num_patterns * self.pattern_len * self.group_size + 10;
        if self.m < need {
            return Err(Error::VocabularyTooSmall { need, have: self.m });
        }
        Ok(())
    }
}

/// One planted pattern and how often it was realized.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPattern {
    pub pattern: PatternText,
    pub target: Label,
    /// Instances stamped in G+ / G-.
    pub stamped_plus: usize,
    pub stamped_minus: usize,
    /// Stamped instances that still match after destructive noise.
    pub realized_plus: usize,
    pub realized_minus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    pub patterns: Vec<PlantedPattern>,
}

impl PlantedTruth {
    pub fn token_sets(&self) -> Vec<BTreeSet<String>> {
        self.patterns.iter().map(|p| p.pattern.token_set()).collect()
    }

    /// JSON document `{"patterns": [{"pattern": ..., "target": ...}, ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<serde_json::Value> = self
            .patterns
            .iter()
            .map(|p| {
                serde_json::json!({
                    "pattern": p.pattern.render(),
                    "target": p.target.symbol(),
                    "stamped_plus": p.stamped_plus,
                    "stamped_minus": p.stamped_minus,
                    "realized_plus": p.realized_plus,
                    "realized_minus": p.realized_minus,
                })
            })
            .collect();
        serde_json::json!({ "schema": 1, "patterns": records })
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub db: LabeledTransactionSet,
    pub truth: PlantedTruth,
    pub embeddings: EmbeddingTable,
}

impl SyntheticData {
    /// Writes `corpus.txt`, `labels.txt`, `embeddings.txt` and
    /// `planted.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        use std::fs::File;
        use std::io::BufWriter;
        std::fs::create_dir_all(dir)?;
        let corpus = BufWriter::new(File::create(dir.join("corpus.txt"))?);
        let labels = BufWriter::new(File::create(dir.join("labels.txt"))?);
        write_paired(&self.db, corpus, labels)?;
        self.embeddings.write_text(BufWriter::new(File::create(dir.join("embeddings.txt"))?))?;
        let planted = serde_json::to_string_pretty(&self.truth.to_json()).expect("json values serialize");
        std::fs::write(dir.join("planted.json"), planted + "\n")?;
        Ok(())
    }
}

fn token_name(rank: usize) -> String {
    format!("w{rank}")
}

/// Per-token inclusion probabilities `min(1, c * z_r)` with `c` chosen so
/// that the expected row length is `density`.
fn background_probabilities(m: usize, exponent: f64, density: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=m).map(|r| (r as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let z: Vec<f64> = weights.iter().map(|w| w / total).collect();
    if density >= m as f64 {
        return vec![1.0; m];
    }
    let expected = |c: f64| z.iter().map(|&p| (c * p).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, density);
    while expected(hi) < density {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < density {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    z.iter().map(|&p| (hi * p).min(1.0)).collect()
}

/// Bernoulli(p) positions in `0..n`, by geometric skipping.
fn bernoulli_positions(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<usize> {
    if p >= 1.0 {
        return (0..n).collect();
    }
    if p <= 0.0 {
        return Vec::new();
    }
    let log_q = (1.0 - p).ln();
    let mut out = Vec::new();
    let mut i: usize = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n - i) as f64 {
            break;
        }
        i += skip as usize;
        out.push(i);
        i += 1;
        if i >= n {
            break;
        }
    }
    out
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // Box-Muller
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Generates a labeled corpus, its planted truth and matching embeddings.
pub fn generate(spec: &SynthSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let m = spec.m;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_plus = (spec.imbalance * n as f64).floor() as usize;
    let mut labels = vec![Label::Minus; n];
    for &i in &order[..n_plus] {
        labels[i] = Label::Plus;
    }
    let plus: Vec<usize> = (0..n).filter(|&i| labels[i] == Label::Plus).collect();
    let minus: Vec<usize> = (0..n).filter(|&i| labels[i] == Label::Minus).collect();

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (rank, p) in background_probabilities(m, spec.zipf_exponent, spec.density).into_iter().enumerate() {
        for i in bernoulli_positions(&mut rng, n, p) {
            rows[i].push(rank);
        }
    }

    // planted tokens come from the rare end of the vocabulary
    let needed = spec.planted_tokens();
    let lo = (m / 2).min(m - needed);
    let mut rare: Vec<usize> = (lo..m).collect();
    rare.shuffle(&mut rng);
    let mut rare = rare.into_iter();
    let mut planted_clauses: Vec<Vec<Vec<usize>>> = Vec::new();
    for _ in 0..spec.num_patterns {
        let mut clauses: Vec<Vec<usize>> = Vec::new();
        for c in 0..spec.pattern_len {
            let size = if c + 1 == spec.pattern_len { spec.group_size } else { 1 };
            clauses.push(rare.by_ref().take(size).collect());
        }
        planted_clauses.push(clauses);
    }

    let mut stamped: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for clauses in &planted_clauses {
        let k_plus = (spec.target_rate * plus.len() as f64).floor() as usize;
        let k_minus = (spec.leak_rate * minus.len() as f64).floor() as usize;
        let on_plus: Vec<usize> = plus.choose_multiple(&mut rng, k_plus).copied().collect();
        let on_minus: Vec<usize> = minus.choose_multiple(&mut rng, k_minus).copied().collect();
        for &i in on_plus.iter().chain(&on_minus) {
            for clause in clauses {
                let token = clause[rng.random_range(0..clause.len())];
                if rng.random::<f64>() >= spec.destructive_noise {
                    rows[i].push(token);
                }
            }
        }
        stamped.push((on_plus, on_minus));
    }

    let names: Vec<String> = (0..m).map(token_name).collect();
    let records = rows.iter_mut().zip(&labels).map(|(row, label)| {
        row.sort_unstable();
        row.dedup();
        (row.iter().map(|&r| names[r].as_str()).collect::<Vec<_>>(), label.bit())
    });
    let db = LabeledTransactionSet::from_instances(records)?;

    let mut patterns = Vec::new();
    for (clauses, (on_plus, on_minus)) in planted_clauses.iter().zip(&stamped) {
        let text = PatternText::new(clauses.iter().map(|c| c.iter().map(|&r| names[r].clone()).collect()).collect())?;
        let (realized_plus, realized_minus) = match text.resolve(db.vocab()) {
            Ok(p) => {
                let support = p.support_bitmap(&db)?;
                (
                    on_plus.iter().filter(|&&i| support.contains(i)).count(),
                    on_minus.iter().filter(|&&i| support.contains(i)).count(),
                )
            }
            Err(_) => (0, 0),
        };
        patterns.push(PlantedPattern {
            pattern: text,
            target: Label::Plus,
            stamped_plus: on_plus.len(),
            stamped_minus: on_minus.len(),
            realized_plus,
            realized_minus,
        });
    }

    let mut vectors: Vec<Vec<f64>> = (0..m).map(|_| unit_gaussian(&mut rng, EMBEDDING_DIM)).collect();
    for clauses in &planted_clauses {
        for group in clauses.iter().filter(|c| c.len() > 1) {
            let center = vectors[group[0]].clone();
            for &t in group {
                let noise = unit_gaussian(&mut rng, EMBEDDING_DIM);
                let along: f64 = noise.iter().zip(&center).map(|(a, b)| a * b).sum();
                let mut ortho: Vec<f64> = noise.iter().zip(&center).map(|(a, b)| a - along * b).collect();
                let norm = ortho.iter().map(|x| x * x).sum::<f64>().sqrt();
                ortho.iter_mut().for_each(|x| *x *= 0.2 / norm);
                vectors[t] = center.iter().zip(&ortho).map(|(c, o)| c + o).collect();
            }
        }
    }
    let mut embeddings = EmbeddingTable::new(EMBEDDING_DIM);
    for (rank, v) in vectors.into_iter().enumerate() {
        embeddings.insert(&names[rank], v.into_iter().map(|x| x as f32).collect())?;
    }

    Ok(SyntheticData { db, truth: PlantedTruth { patterns }, embeddings })
}

/// Copy of `db` with labels permuted uniformly at random.
pub fn shuffle_labels(db: &LabeledTransactionSet, seed: u64) -> LabeledTransactionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = db.labels().to_vec();
    labels.shuffle(&mut rng);
    LabeledTransactionSet::from_rows(db.vocab().clone(), db.rows().to_vec(), labels)
        .expect("a valid database stays valid under label permutation")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn mean_best<T: Ord>(from: &[BTreeSet<T>], to: &[BTreeSet<T>]) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    from.iter().map(|a| to.iter().map(|b| jaccard(a, b)).fold(0.0, f64::max)).sum::<f64>() / from.len() as f64
}

/// Soft precision, recall and F1 of `found` against `planted`, matching
/// patterns by the Jaccard similarity of their token sets.
pub fn soft_f1<T: Ord>(found: &[BTreeSet<T>], planted: &[BTreeSet<T>]) -> SoftF1 {
    match (found.is_empty(), planted.is_empty()) {
        (true, true) => return SoftF1 { precision: 1.0, recall: 1.0, f1: 1.0 },
        (true, false) | (false, true) => return SoftF1 { precision: 0.0, recall: 0.0, f1: 0.0 },
        _ => {}
    }
    let precision = mean_best(found, planted);
    let recall = mean_best(planted, found);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    SoftF1 { precision, recall, f1 }
}

/// Soft F1 for patterns over the same vocabulary.
pub fn soft_f1_patterns(found: &[Pattern], planted: &[Pattern]) -> SoftF1 {
    let f: Vec<_> = found.iter().map(Pattern::token_set).collect();
    let p: Vec<_> = planted.iter().map(Pattern::token_set).collect();
    soft_f1(&f, &p)
}

/// Reference baseline: the `k` tokens with the largest gap between their
/// relative frequencies in G+ and G-, as singleton patterns.
pub fn baseline_topk(db: &LabeledTransactionSet, k: usize) -> Vec<Pattern> {
    let rate = |count: usize, size: usize| if size == 0 { 0.0 } else { count as f64 / size as f64 };
    let mut scored: Vec<(f64, &str, usize)> = (0..db.m())
        .map(|t| {
            let col = db.column(t);
            let fp = col.and_count(db.group_plus());
            let fm = col.count() - fp;
            ((rate(fp, db.n_plus()) - rate(fm, db.n_minus())).abs(), db.vocab().tokens()[t].as_str(), t)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, _, t)| Pattern::singleton(t)).collect()
}
