//! Greedy MDL search for label-descriptive patterns.
//!
//! Each round scores three candidate families against the frozen model:
//! frequent singletons, pairwise conjunctions, and clause widenings proposed
//! by embedding neighbours. The single best candidate is accepted when it
//! saves more than `epsilon_gain` bits, after which redundant entries are
//! pruned. Candidates derived from a model entry are also scored as a
//! replacement of that entry, so a pattern can grow one token at a time.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmap::InstanceBitmap;
use crate::corpus::{Label, LabeledTransactionSet, TokenId};
use crate::embeddings::{EmbeddingTable, NeighborIndex};
use crate::error::{Error, Result};
use crate::mdl::{CoverState, DEFAULT_EPSILON_GAIN};
use crate::pattern::{biased_group, Pattern, PatternEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Minimum joint support of a conjunction candidate.
    pub min_support: usize,
    /// Tokens rarer than this never enter a candidate.
    pub min_token_freq: usize,
    /// Maximum candidates kept per family and round.
    pub beam: usize,
    /// Embedding neighbours considered per clause member.
    pub neighbors_k: usize,
    pub min_cosine: f64,
    pub epsilon_gain: f64,
    pub max_rounds: usize,
    /// Mine patterns for G- as well as G+.
    pub mine_both_labels: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            min_support: 5,
            min_token_freq: 3,
            beam: 500,
            neighbors_k: 10,
            min_cosine: 0.5,
            epsilon_gain: DEFAULT_EPSILON_GAIN,
            max_rounds: 1000,
            mine_both_labels: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("min_support", self.min_support),
            ("min_token_freq", self.min_token_freq),
            ("beam", self.beam),
            ("neighbors_k", self.neighbors_k),
            ("max_rounds", self.max_rounds),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Domain(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.min_cosine) {
            return Err(Error::Domain("min_cosine must lie in [0, 1]".into()));
        }
        if !(self.epsilon_gain > 0.0) {
            return Err(Error::Domain("epsilon_gain must be positive".into()));
        }
        Ok(())
    }
}

/// A scored candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pattern: Pattern,
    pub target: Label,
    pub u_plus: usize,
    pub u_minus: usize,
    /// Best saving in bits, either by adding or by replacing `replaces`.
    pub gain: f64,
    /// Model entry this candidate replaces, when replacing saves more than
    /// adding.
    pub replaces: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningResult {
    /// Final entries, by gain descending then text order.
    pub entries: Vec<PatternEntry>,
    pub total_bits_start: f64,
    pub total_bits_end: f64,
    /// Accepted rounds.
    pub rounds: usize,
    /// Set when the data cannot support mining (e.g. an empty label group).
    pub warning: Option<String>,
}

/// Patterns to score, with the model entries each may replace.
struct Proposal {
    pattern: Pattern,
    support: Option<InstanceBitmap>,
    parents: Vec<usize>,
}

fn score_proposals(state: &CoverState<'_>, proposals: Vec<Proposal>, config: &SearchConfig) -> Vec<Candidate> {
    let db = state.db();
    let scored: Vec<Option<(Pattern, usize, usize, f64, Option<usize>)>> = proposals
        .into_par_iter()
        .map(|p| {
            let layout = state.layout(&p.pattern, p.support).ok()?;
            let mut best = (-state.edit_delta(None, Some(&layout)), None);
            for &parent in &p.parents {
                let g = -state.edit_delta(Some(parent), Some(&layout));
                if g > best.0 {
                    best = (g, Some(parent));
                }
            }
            Some((p.pattern, layout.u_plus, layout.u_minus, best.0, best.1))
        })
        .collect();
    let mut out = Vec::with_capacity(scored.len());
    for (pattern, u_plus, u_minus, gain, replaces) in scored.into_iter().flatten() {
        let targets: &[Label] = match biased_group(u_plus, u_minus, db.n_plus(), db.n_minus()) {
            Some(Label::Plus) => &[Label::Plus],
            Some(Label::Minus) => &[Label::Minus],
            None if config.mine_both_labels => &[Label::Plus, Label::Minus],
            None => &[Label::Plus],
        };
        for &target in targets {
            if target == Label::Minus && !config.mine_both_labels {
                continue;
            }
            out.push(Candidate { pattern: pattern.clone(), target, u_plus, u_minus, gain, replaces });
        }
    }
    out
}

/// Sorts best first: gain descending, fewer tokens, text order, G+ first.
fn rank(candidates: &mut Vec<Candidate>, db: &LabeledTransactionSet) {
    let mut keyed: Vec<(String, Candidate)> =
        candidates.drain(..).map(|c| (c.pattern.order_key(db.vocab()), c)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        b.gain
            .total_cmp(&a.gain)
            .then_with(|| a.pattern.token_count().cmp(&b.pattern.token_count()))
            .then_with(|| ka.cmp(kb))
            .then_with(|| a.target.cmp(&b.target))
    });
    candidates.extend(keyed.into_iter().map(|(_, c)| c));
}

/// All frequent singletons not yet in the model, ranked by gain.
fn ranked_singletons(state: &CoverState<'_>, config: &SearchConfig) -> Vec<Candidate> {
    let db = state.db();
    let proposals = (0..db.m())
        .filter(|&t| db.frequency(t) >= config.min_token_freq)
        .map(Pattern::singleton)
        .filter(|p| state.position(p).is_none())
        .map(|pattern| Proposal { pattern, support: None, parents: Vec::new() })
        .collect();
    let mut out = score_proposals(state, proposals, config);
    rank(&mut out, db);
    out
}

fn positive(ranked: &[Candidate], config: &SearchConfig) -> Vec<Candidate> {
    ranked.iter().filter(|c| c.gain > config.epsilon_gain).take(config.beam).cloned().collect()
}

fn extension_pool(ranked: &[Candidate], config: &SearchConfig) -> Vec<TokenId> {
    let mut seen = HashSet::new();
    ranked
        .iter()
        .map(|c| c.pattern.clauses()[0].members()[0])
        .filter(|t| seen.insert(*t))
        .take(config.beam)
        .collect()
}

/// Singleton candidates with positive gain, best `beam` first.
pub fn generate_singletons(state: &CoverState<'_>, config: &SearchConfig) -> Vec<Candidate> {
    positive(&ranked_singletons(state, config), config)
}

/// Pairwise conjunctions `A AND b`, where `A` is a model pattern or a
/// positive singleton and `b` a top-ranked frequent token.
pub fn generate_conjunctions(state: &CoverState<'_>, config: &SearchConfig) -> Vec<Candidate> {
    let ranked = ranked_singletons(state, config);
    conjunctions(state, &positive(&ranked, config), &extension_pool(&ranked, config), config)
}

fn conjunctions(
    state: &CoverState<'_>,
    seeds: &[Candidate],
    pool: &[TokenId],
    config: &SearchConfig,
) -> Vec<Candidate> {
    let db = state.db();
    let mut sources: Vec<(Pattern, InstanceBitmap, Option<usize>)> = (0..state.len())
        .map(|i| (state.entry(i).pattern.clone(), state.support(i).clone(), Some(i)))
        .collect();
    let mut seen_seed = HashSet::new();
    for s in seeds {
        if seen_seed.insert(s.pattern.clone()) {
            let t = s.pattern.clauses()[0].members()[0];
            sources.push((s.pattern.clone(), db.column(t).clone(), None));
        }
    }

    let pairs: Vec<(usize, TokenId)> =
        (0..sources.len()).flat_map(|a| pool.iter().map(move |&b| (a, b))).collect();
    let joined: Vec<Option<(Pattern, InstanceBitmap, Option<usize>)>> = pairs
        .into_par_iter()
        .map(|(a, b)| {
            let (pattern, support, parent) = &sources[a];
            if pattern.contains_token(b) || support.and_count(db.column(b)) < config.min_support {
                return None;
            }
            let merged = pattern.and(&Pattern::singleton(b)).ok()?;
            if state.position(&merged).is_some() {
                return None;
            }
            Some((merged, support.and(db.column(b)), *parent))
        })
        .collect();

    let mut proposals: Vec<Proposal> = Vec::new();
    let mut index: HashMap<Pattern, usize> = HashMap::new();
    for (pattern, support, parent) in joined.into_iter().flatten() {
        let slot = *index.entry(pattern.clone()).or_insert_with(|| {
            proposals.push(Proposal { pattern, support: Some(support), parents: Vec::new() });
            proposals.len() - 1
        });
        if let Some(p) = parent {
            if !proposals[slot].parents.contains(&p) {
                proposals[slot].parents.push(p);
            }
        }
    }
    for p in &mut proposals {
        p.parents.sort_unstable();
    }
    let mut out = score_proposals(state, proposals, config);
    rank(&mut out, db);
    out.truncate(config.beam);
    out
}

/// Clause widenings `c -> c ∪ {w}` where `w` is an embedding neighbour of a
/// member of `c`, for every clause of every model pattern and of `scored`.
pub fn generate_group_merges(
    state: &CoverState<'_>,
    scored: &[Candidate],
    neighbors: &mut NeighborIndex,
    config: &SearchConfig,
) -> Vec<Candidate> {
    let db = state.db();
    let mut sources: Vec<(Pattern, Option<usize>)> =
        (0..state.len()).map(|i| (state.entry(i).pattern.clone(), Some(i))).collect();
    sources.extend(scored.iter().map(|c| (c.pattern.clone(), None)));

    let mut proposals: Vec<Proposal> = Vec::new();
    let mut index: HashMap<Pattern, usize> = HashMap::new();
    for (pattern, parent) in sources {
        for (ci, clause) in pattern.clauses().iter().enumerate() {
            for &member in clause.members() {
                let near: Vec<TokenId> = neighbors.neighbors(member).iter().map(|&(w, _)| w).collect();
                for w in near {
                    if pattern.contains_token(w) || db.frequency(w) < config.min_token_freq {
                        continue;
                    }
                    let Ok(widened) = clause.with_member(w).and_then(|c| pattern.with_clause(ci, c)) else {
                        continue;
                    };
                    if state.position(&widened).is_some() {
                        continue;
                    }
                    let slot = *index.entry(widened.clone()).or_insert_with(|| {
                        proposals.push(Proposal { pattern: widened, support: None, parents: Vec::new() });
                        proposals.len() - 1
                    });
                    if let Some(p) = parent {
                        if !proposals[slot].parents.contains(&p) {
                            proposals[slot].parents.push(p);
                        }
                    }
                }
            }
        }
    }
    for p in &mut proposals {
        p.parents.sort_unstable();
    }
    let mut out = score_proposals(state, proposals, config);
    rank(&mut out, db);
    out.truncate(config.beam);
    out
}

/// Removes entries while some removal shortens the total by more than
/// `epsilon`, always taking the largest saving first.
pub fn prune(state: &mut CoverState<'_>, epsilon: f64) -> Vec<PatternEntry> {
    let mut removed = Vec::new();
    loop {
        let vocab = state.db().vocab();
        let best = (0..state.len())
            .map(|i| (state.removal_gain(i), state.entry(i).pattern.order_key(vocab), i))
            .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
        match best {
            Some((g, _, i)) if g > epsilon => removed.push(state.remove(i)),
            _ => return removed,
        }
    }
}

/// Runs the greedy search.
pub fn mine(
    db: &LabeledTransactionSet,
    config: &SearchConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<MiningResult> {
    config.validate()?;
    let mut state = CoverState::new(db);
    let start = state.total_bits();
    let degenerate = if db.n() < 2 {
        Some("fewer than two instances")
    } else if db.n_plus() == 0 {
        Some("no instances with label 1")
    } else if db.n_minus() == 0 {
        Some("no instances with label 0")
    } else {
        None
    };
    if let Some(w) = degenerate {
        return Ok(MiningResult {
            entries: Vec::new(),
            total_bits_start: start,
            total_bits_end: start,
            rounds: 0,
            warning: Some(w.to_owned()),
        });
    }

    let mut neighbors = embeddings.map(|t| NeighborIndex::new(t, db.vocab(), config.neighbors_k, config.min_cosine));
    let mut rounds = 0;
    while rounds < config.max_rounds {
        let ranked = ranked_singletons(&state, config);
        let singles = positive(&ranked, config);
        let pool = extension_pool(&ranked, config);
        let conj = conjunctions(&state, &singles, &pool, config);

        let mut all = singles;
        all.extend(conj);
        if let Some(index) = neighbors.as_mut() {
            let groups = generate_group_merges(&state, &all, index, config);
            all.extend(groups);
        }
        rank(&mut all, db);
        let Some(best) = all.into_iter().next() else { break };
        if best.gain <= config.epsilon_gain {
            break;
        }

        if let Some(parent) = best.replaces {
            state.remove(parent);
        }
        let entry = PatternEntry {
            pattern: best.pattern,
            target: best.target,
            u_plus: best.u_plus,
            u_minus: best.u_minus,
            gain_bits: best.gain,
        };
        state.add(entry)?;
        prune(&mut state, config.epsilon_gain);
        rounds += 1;
    }

    let mut entries: Vec<(String, PatternEntry)> =
        state.entries().map(|e| (e.pattern.order_key(db.vocab()), e.clone())).collect();
    entries.sort_by(|(ka, a), (kb, b)| b.gain_bits.total_cmp(&a.gain_bits).then_with(|| ka.cmp(kb)));
    Ok(MiningResult {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
        total_bits_start: start,
        total_bits_end: state.total_bits(),
        rounds,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::toy_records;
    use crate::corpus::Vocabulary;
    use crate::pattern::parse_pattern;

    fn toy(replicas: usize) -> LabeledTransactionSet {
        LabeledTransactionSet::from_instances(toy_records(replicas)).unwrap()
    }

    fn render(db: &LabeledTransactionSet, p: &Pattern) -> String {
        p.render(db.vocab()).unwrap()
    }

    #[test]
    fn toy_singletons() {
        let db = toy(20);
        let state = CoverState::new(&db);
        let singles = generate_singletons(&state, &SearchConfig::default());
        let how = singles.iter().find(|c| render(&db, &c.pattern) == "how").expect("how is a candidate");
        assert_eq!(how.target, Label::Plus);
        assert!(singles.iter().all(|c| c.gain > 0.0));
        assert!(!singles.iter().any(|c| render(&db, &c.pattern) == "ducks"));
    }

    #[test]
    fn ubiquitous_and_rare_tokens_are_excluded() {
        let mut records = Vec::new();
        for i in 0..60 {
            let mut toks = vec!["all"];
            if i < 20 {
                toks.push("err");
            }
            if i == 0 || i == 1 {
                toks.push("rare");
            }
            records.push((toks, u8::from(i < 20)));
        }
        let db = LabeledTransactionSet::from_instances(records).unwrap();
        let state = CoverState::new(&db);
        let names: Vec<String> =
            generate_singletons(&state, &SearchConfig::default()).iter().map(|c| render(&db, &c.pattern)).collect();
        assert_eq!(names, ["err"]);
    }

    #[test]
    fn toy_conjunctions() {
        let db = toy(20);
        let state = CoverState::new(&db);
        let conj = generate_conjunctions(&state, &SearchConfig::default());
        let names: Vec<String> = conj.iter().map(|c| render(&db, &c.pattern)).collect();
        assert!(names.contains(&"AND(how, many)".to_string()), "{names:?}");
        for c in &conj {
            assert_eq!(c.pattern.len(), 2);
            assert!(c.u_plus + c.u_minus >= 5);
        }
    }

    #[test]
    fn conjunctions_respect_min_support() {
        let db = toy(20);
        let state = CoverState::new(&db);
        let config = SearchConfig { min_support: 41, ..Default::default() };
        // no pair of distinct tokens co-occurs in more than 40 rows except
        // those drawn from the three error rows
        for c in generate_conjunctions(&state, &config) {
            assert!(c.u_plus + c.u_minus >= 41);
        }
    }

    #[test]
    fn group_merges_follow_neighbours() {
        let mut records = Vec::new();
        for i in 0..200 {
            let toks: Vec<&str> = match i % 10 {
                0 => vec!["what", "color", "is", "it"],
                1 => vec!["what", "colour", "is", "it"],
                2 => vec!["what", "colors", "are", "they"],
                _ => vec!["where", "is", "it"],
            };
            records.push((toks, u8::from(i % 10 < 3)));
        }
        let db = LabeledTransactionSet::from_instances(records).unwrap();
        let mut table = EmbeddingTable::new(3);
        table.insert("color", vec![1.0, 0.0, 0.0]).unwrap();
        table.insert("colour", vec![0.99, 0.1, 0.0]).unwrap();
        table.insert("colors", vec![0.95, 0.0, 0.2]).unwrap();
        table.insert("what", vec![0.0, 1.0, 0.0]).unwrap();
        table.insert("where", vec![0.0, 0.0, 1.0]).unwrap();
        let config = SearchConfig::default();
        let mut index = NeighborIndex::new(&table, db.vocab(), config.neighbors_k, config.min_cosine);

        let mut state = CoverState::new(&db);
        state.add(PatternEntry::new(parse_pattern("AND(what, color)", db.vocab()).unwrap(), &db).unwrap()).unwrap();
        let merges = generate_group_merges(&state, &[], &mut index, &config);
        let names: Vec<String> = merges.iter().map(|c| render(&db, &c.pattern)).collect();
        assert!(names.contains(&"AND(what, XOR(color, colour))".to_string()), "{names:?}");
        assert!(merges.iter().all(|c| c.pattern.len() == 2));
        // the widened pattern replaces its parent
        let best = merges.iter().find(|c| render(&db, &c.pattern) == "AND(what, XOR(color, colour))").unwrap();
        assert_eq!(best.replaces, Some(0));

        // a neighbour already used elsewhere in the pattern is skipped
        let mut state = CoverState::new(&db);
        state
            .add(PatternEntry::new(parse_pattern("AND(color, colour)", db.vocab()).unwrap(), &db).unwrap())
            .unwrap();
        let merges = generate_group_merges(&state, &[], &mut index, &config);
        assert!(merges.iter().all(|c| !render(&db, &c.pattern).contains("XOR(color, colour")));
    }

    #[test]
    fn group_merges_skip_out_of_vocabulary() {
        let db = toy(5);
        let table = EmbeddingTable::new(2);
        let config = SearchConfig::default();
        let mut index = NeighborIndex::new(&table, db.vocab(), 10, 0.5);
        let state = CoverState::new(&db);
        let scored = generate_singletons(&state, &config);
        assert!(generate_group_merges(&state, &scored, &mut index, &config).is_empty());
    }

    #[test]
    fn prune_removes_duplicate_cover() {
        // "a" and "b" always co-occur, so AND(a, b), a and b share a support
        let mut records = Vec::new();
        for i in 0..100 {
            let toks = if i % 4 == 0 { vec!["a", "b", "x"] } else { vec!["x"] };
            records.push((toks, u8::from(i % 4 == 0)));
        }
        let db = LabeledTransactionSet::from_instances(records).unwrap();
        let mut state = CoverState::new(&db);
        for text in ["AND(a, b)", "a"] {
            state.add(PatternEntry::new(parse_pattern(text, db.vocab()).unwrap(), &db).unwrap()).unwrap();
        }
        let before = state.total_bits();
        let removed = prune(&mut state, 1e-6);
        assert_eq!(removed.len(), 1);
        assert_eq!(render(&db, &removed[0].pattern), "a");
        assert!(state.total_bits() < before);

        // nothing left to remove
        assert!(prune(&mut state, 1e-6).is_empty());
        let mut empty = CoverState::new(&db);
        assert!(prune(&mut empty, 1e-6).is_empty());
    }

    #[test]
    fn toy_mining() {
        let db = toy(20);
        let result = mine(&db, &SearchConfig::default(), None).unwrap();
        let names: Vec<String> = result.entries.iter().map(|e| render(&db, &e.pattern)).collect();
        let how = db.vocab().lookup("how").unwrap();
        let many = db.vocab().lookup("many").unwrap();
        // "in" shares the support of how+many, so covering it too is cheaper
        assert!(
            result.entries.iter().any(|e| e.target == Label::Plus && e.pattern.contains_token(how) && e.pattern.contains_token(many)),
            "{names:?}"
        );
        let ducks = db.vocab().lookup("ducks").unwrap();
        assert!(result.entries.iter().all(|e| !e.pattern.contains_token(ducks)), "{names:?}");
        assert!(result.total_bits_end < result.total_bits_start);
        assert!(result.entries.iter().all(|e| e.gain_bits > 1e-6));
    }

    #[test]
    fn degenerate_groups() {
        let db = LabeledTransactionSet::from_instances(vec![(vec!["a"], 0), (vec!["b"], 0)]).unwrap();
        let r = mine(&db, &SearchConfig::default(), None).unwrap();
        assert!(r.entries.is_empty());
        assert!(r.warning.is_some());
        assert_eq!(r.total_bits_start, r.total_bits_end);

        let one = LabeledTransactionSet::from_instances(vec![(vec!["a"], 1)]).unwrap();
        assert!(mine(&one, &SearchConfig::default(), None).unwrap().warning.is_some());
    }

    #[test]
    fn config_validation() {
        let bad = SearchConfig { beam: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SearchConfig { min_cosine: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(SearchConfig::default().validate().is_ok());
    }

    #[test]
    fn positive_only_mode() {
        let db = toy(20);
        let config = SearchConfig { mine_both_labels: false, ..Default::default() };
        let r = mine(&db, &config, None).unwrap();
        assert!(!r.entries.is_empty());
        assert!(r.entries.iter().all(|e| e.target == Label::Plus));
    }

    #[test]
    fn empty_vocabulary() {
        let mut v = Vocabulary::new();
        v.intern("unused");
        let db = LabeledTransactionSet::from_rows(v, vec![vec![], vec![]], vec![Label::Plus, Label::Minus]).unwrap();
        let r = mine(&db, &SearchConfig::default(), None).unwrap();
        assert!(r.entries.is_empty());
        assert!(r.warning.is_none());
    }
}
