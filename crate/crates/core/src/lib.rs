//! Label-descriptive token pattern mining.
//!
//! Given tokenized instances split into two groups (label `1` = G+, label
//! `0` = G-), the miner searches for a small set of token patterns whose
//! occurrences explain the split, scoring models by total description
//! length. Patterns are conjunctions of clauses, where a clause is one token
//! or a group of interchangeable tokens (e.g. synonyms found through word
//! embeddings).
//!
//! ```
//! use labeldesc::{mine, LabeledTransactionSet, SearchConfig};
//!
//! let mut records = Vec::new();
//! for i in 0..40 {
//!     let label = u8::from(i % 4 == 0);
//!     let mut tokens = vec!["the", "cat"];
//!     if label == 1 {
//!         tokens.extend(["how", "many"]);
//!     }
//!     records.push((tokens, label));
//! }
//! let db = LabeledTransactionSet::from_instances(records).unwrap();
//! let result = mine(&db, &SearchConfig::default(), None).unwrap();
//! assert_eq!(result.entries[0].pattern.render(db.vocab()).unwrap(), "AND(how, many)");
//! ```

pub mod bitmap;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod mdl;
pub mod pattern;
pub mod report;
pub mod search;
pub mod synth;

pub use corpus::{read_jsonl, read_paired, write_paired, Label, LabeledTransactionSet, TokenId, Vocabulary};
pub use embeddings::{cosine, load_embeddings, EmbeddingTable, NeighborIndex};
pub use error::{Error, Result};
pub use mdl::{data_length, model_length, total_length, CoverState};
pub use pattern::{parse_pattern, Clause, Pattern, PatternEntry, PatternText};
pub use report::{load_corpus, mine_report, mine_tokens, read_pattern_list, Report};
pub use search::{mine, MiningResult, SearchConfig};
pub use synth::{generate, soft_f1, SynthSpec, SyntheticData};
