//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use labeldesc::{LabeledTransactionSet, MiningResult, Pattern, PatternText};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TOY: [(&str, u8); 5] = [
    ("how many ducks are in the picture", 1),
    ("what are the ducks eating", 1),
    ("how many roosters are in the puddle", 1),
    ("do you see ducks in the puddle", 0),
    ("are there many ducks playing", 0),
];

pub fn toy_records(replicas: usize) -> Vec<(Vec<&'static str>, u8)> {
    (0..replicas).flat_map(|_| TOY.iter().map(|(s, l)| (s.split(' ').collect(), *l))).collect()
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    // product form, no gamma function
    (1..=k).map(|i| (((n - k + i) as f64) / i as f64).ln()).sum::<f64>() / std::f64::consts::LN_2
}

fn bc(n: usize, k: usize) -> f64 {
    log2_binomial(n, k) + ((n + 1) as f64).log2()
}

fn universal(v: usize) -> f64 {
    let mut bits = 2.865064f64.log2();
    let mut x = (v as f64).log2();
    while x > 0.0 {
        bits += x;
        x = x.log2();
    }
    bits
}

/// Total description length by direct enumeration of matrix cells.
pub fn oracle_total(db: &LabeledTransactionSet, patterns: &[Pattern]) -> f64 {
    let n = db.n();
    let m = db.m();
    let mut bits = universal(patterns.len() + 1);
    for p in patterns {
        bits += 1.0 + universal(p.len());
        for c in p.clauses() {
            bits += universal(c.size()) + log2_binomial(m, c.size());
        }
    }
    let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in patterns {
        let rows: Vec<usize> = (0..n)
            .filter(|&i| p.clauses().iter().all(|c| c.members().iter().any(|t| db.row(i).contains(t))))
            .collect();
        let up = rows.iter().filter(|&&i| db.labels()[i] == labeldesc::Label::Plus).count();
        bits += bc(db.n_plus(), up) + bc(db.n_minus(), rows.len() - up);
        for c in p.clauses() {
            if c.size() > 1 {
                bits += rows.len() as f64 * (c.size() as f64).log2();
            }
            for &i in &rows {
                let designated = c.members().iter().copied().filter(|t| db.row(i).contains(t)).min().unwrap();
                covered.insert((i, designated));
            }
        }
    }
    for j in 0..m {
        let k = (0..n).filter(|&i| db.row(i).contains(&j) && !covered.contains(&(i, j))).count();
        bits += bc(n, k);
    }
    bits
}

fn rebuild(db: &LabeledTransactionSet, order: &[usize], rename: impl Fn(&str) -> String) -> LabeledTransactionSet {
    let tokens = db.vocab().tokens();
    let records: Vec<(Vec<String>, u8)> = order
        .iter()
        .map(|&i| (db.row(i).iter().map(|&t| rename(&tokens[t])).collect(), db.labels()[i].bit()))
        .collect();
    LabeledTransactionSet::from_instances(records).unwrap()
}

/// Same instances in a random order.
pub fn permuted(db: &LabeledTransactionSet, seed: u64) -> LabeledTransactionSet {
    let mut order: Vec<usize> = (0..db.n()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    rebuild(db, &order, str::to_owned)
}

/// Same instances with every token renamed.
pub fn renamed(db: &LabeledTransactionSet, rename: impl Fn(&str) -> String) -> LabeledTransactionSet {
    let order: Vec<usize> = (0..db.n()).collect();
    rebuild(db, &order, rename)
}

/// Vocabulary-free view of a mining result, with token names mapped through
/// `name`. Bit lengths are compared exactly.
pub fn summary(
    db: &LabeledTransactionSet,
    result: &MiningResult,
    name: impl Fn(&str) -> String,
) -> Vec<(String, &'static str, usize, usize, u64)> {
    let mut out: Vec<_> = result
        .entries
        .iter()
        .map(|e| {
            let text = PatternText::from_pattern(&e.pattern, db.vocab()).unwrap();
            let mapped = PatternText::new(
                text.clauses().iter().map(|c| c.iter().map(|t| name(t)).collect()).collect(),
            )
            .unwrap();
            (mapped.render(), e.target.symbol(), e.u_plus, e.u_minus, e.gain_bits.to_bits())
        })
        .collect();
    out.push(("<total>".into(), "", result.rounds, 0, result.total_bits_end.to_bits()));
    out.push(("<start>".into(), "", 0, 0, result.total_bits_start.to_bits()));
    out
}
