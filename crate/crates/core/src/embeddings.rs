//! Word vectors and exact cosine nearest-neighbour queries.

use std::collections::HashMap;
use std::io::BufRead;

use crate::corpus::{TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Token to dense vector map with a fixed dimensionality.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<Vec<f32>>,
    index: HashMap<String, usize>,
    duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Default::default() }
    }

    /// Inserts or replaces the vector for `token`.
    pub fn insert(&mut self, token: &str, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch(vector.len(), self.dim));
        }
        match self.index.get(token) {
            Some(&i) => {
                self.vectors[i] = vector;
                self.duplicates += 1;
            }
            None => {
                self.index.insert(token.to_owned(), self.tokens.len());
                self.tokens.push(token.to_owned());
                self.vectors.push(vector);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of rows that replaced an earlier row for the same token.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.tokens.iter().map(String::as_str).zip(self.vectors.iter().map(Vec::as_slice))
    }

    /// Up to `k` other tokens with cosine similarity at least `min_cosine`,
    /// most similar first, ties by token text. Unknown tokens yield nothing.
    pub fn neighbors(&self, token: &str, k: usize, min_cosine: f64) -> Vec<(String, f64)> {
        let Some(query) = self.get(token) else {
            return Vec::new();
        };
        let qnorm = norm(query);
        let mut hits: Vec<(&str, f64)> = self
            .iter()
            .filter(|(t, _)| *t != token)
            .map(|(t, v)| (t, cosine_with_norms(query, qnorm, v, norm(v))))
            .filter(|&(_, s)| s >= min_cosine)
            .collect();
        rank(&mut hits, k);
        hits.into_iter().map(|(t, s)| (t.to_owned(), s)).collect()
    }

    /// Writes the table in the text vector format, without a header.
    pub fn write_text<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        for (t, v) in self.iter() {
            write!(out, "{t}")?;
            for x in v {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn rank<T: AsRef<str>>(hits: &mut Vec<(T, f64)>, k: usize) {
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.as_ref().cmp(b.0.as_ref())));
    hits.truncate(k);
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

fn cosine_with_norms(a: &[f32], na: f64, b: &[f32], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity; zero vectors have similarity 0 with everything.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(cosine_with_norms(a, norm(a), b, norm(b)))
}

/// Reads the text vector format: `token f1 f2 ... fd` per line, with an
/// optional leading `count dim` header.
pub fn load_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().expect("non-blank line has a field");
        let rest: Vec<&str> = fields.collect();
        if idx == 0 && rest.len() == 1 && token.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
            continue;
        }
        let vector = rest
            .iter()
            .map(|f| {
                f.parse::<f32>()
                    .map_err(|_| Error::Embedding { line: line_no, msg: format!("non-numeric field {f:?}") })
            })
            .collect::<Result<Vec<f32>>>()?;
        let table = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
        if vector.len() != table.dim {
            return Err(Error::Embedding {
                line: line_no,
                msg: format!("expected {} values, found {}", table.dim, vector.len()),
            });
        }
        table.insert(token, vector)?;
    }
    Ok(table.unwrap_or_default())
}

/// Neighbour lookups restricted to the tokens of a corpus vocabulary, with
/// a per-token cache.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    unit: Vec<Option<Vec<f32>>>,
    names: Vec<String>,
    k: usize,
    min_cosine: f64,
    cache: HashMap<TokenId, Vec<(TokenId, f64)>>,
}

impl NeighborIndex {
    pub fn new(table: &EmbeddingTable, vocab: &Vocabulary, k: usize, min_cosine: f64) -> Self {
        let unit = vocab
            .tokens()
            .iter()
            .map(|t| {
                table.get(t).and_then(|v| {
                    let nv = norm(v);
                    (nv > 0.0).then(|| v.iter().map(|&x| (f64::from(x) / nv) as f32).collect())
                })
            })
            .collect();
        Self { unit, names: vocab.tokens().to_vec(), k, min_cosine, cache: HashMap::new() }
    }

    /// Ranked neighbours of `token` among corpus tokens.
    pub fn neighbors(&mut self, token: TokenId) -> &[(TokenId, f64)] {
        if !self.cache.contains_key(&token) {
            let list = self.compute(token);
            self.cache.insert(token, list);
        }
        &self.cache[&token]
    }

    fn compute(&self, token: TokenId) -> Vec<(TokenId, f64)> {
        let Some(Some(query)) = self.unit.get(token) else {
            return Vec::new();
        };
        let mut hits: Vec<(TokenId, f64)> = self
            .unit
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != token)
            .filter_map(|(j, v)| {
                let v = v.as_ref()?;
                let dot: f64 = query.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
                let s = dot.clamp(-1.0, 1.0);
                (s >= self.min_cosine).then_some((j, s))
            })
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.names[a.0].cmp(&self.names[b.0])));
        hits.truncate(self.k);
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_minimal() {
        let t = load_embeddings("a 1 0\nb 0 1\n".as_bytes()).unwrap();
        assert_eq!((t.dim(), t.len()), (2, 2));
        let h = load_embeddings("2 2\na 1 0\nb 0 1\n".as_bytes()).unwrap();
        assert_eq!((h.dim(), h.len()), (2, 2));
        assert_eq!(h.get("b"), Some(&[0.0f32, 1.0][..]));
    }

    #[test]
    fn load_errors() {
        match load_embeddings("a 1 0\nb 0 1 2\n".as_bytes()) {
            Err(Error::Embedding { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load_embeddings("a 1 x\n".as_bytes()), Err(Error::Embedding { line: 1, .. })));
    }

    #[test]
    fn duplicates_last_wins() {
        let t = load_embeddings("a 1 0\na 0 1\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.duplicates(), 1);
        assert_eq!(t.get("a"), Some(&[0.0f32, 1.0][..]));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::LengthMismatch(1, 2))));
    }

    fn colour_table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(3);
        t.insert("color", vec![1.0, 0.1, 0.0]).unwrap();
        t.insert("colour", vec![0.98, 0.12, 0.01]).unwrap();
        t.insert("colors", vec![0.9, 0.3, 0.0]).unwrap();
        t.insert("bench", vec![0.0, 0.0, 1.0]).unwrap();
        t.insert("seat", vec![0.1, 0.0, 0.95]).unwrap();
        t
    }

    #[test]
    fn neighbors_examples() {
        let t = colour_table();
        assert!(t.neighbors("missing", 5, 0.0).is_empty());
        let hits = t.neighbors("color", 2, 0.5);
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), ["colour", "colors"]);
        let all = t.neighbors("color", 100, -1.0);
        assert_eq!(all.len(), 4);
        for (tok, s) in &all {
            let direct = cosine(t.get("color").unwrap(), t.get(tok).unwrap()).unwrap();
            assert!((direct - s).abs() < 1e-6);
        }
    }

    #[test]
    fn ties_break_by_token() {
        let mut t = EmbeddingTable::new(2);
        t.insert("q", vec![1.0, 0.0]).unwrap();
        t.insert("zz", vec![2.0, 0.0]).unwrap();
        t.insert("aa", vec![3.0, 0.0]).unwrap();
        let hits = t.neighbors("q", 5, 0.0);
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), ["aa", "zz"]);
    }

    #[test]
    fn index_restricts_to_vocabulary() {
        let t = colour_table();
        let mut vocab = Vocabulary::new();
        for w in ["bench", "color", "colors", "unseen"] {
            vocab.intern(w);
        }
        let mut idx = NeighborIndex::new(&t, &vocab, 10, 0.5);
        let color = vocab.lookup("color").unwrap();
        let hits: Vec<TokenId> = idx.neighbors(color).iter().map(|h| h.0).collect();
        assert_eq!(hits, vec![vocab.lookup("colors").unwrap()]);
        assert!(idx.neighbors(vocab.lookup("unseen").unwrap()).is_empty());
    }

    proptest! {
        #[test]
        fn self_similarity_is_one(v in proptest::collection::vec(-10.0f32..10.0, 1..20)) {
            prop_assume!(v.iter().any(|&x| x.abs() > 1e-3));
            prop_assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cosine_is_bounded(
            a in proptest::collection::vec(-10.0f32..10.0, 8),
            b in proptest::collection::vec(-10.0f32..10.0, 8),
        ) {
            let s = cosine(&a, &b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
