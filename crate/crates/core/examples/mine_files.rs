//! File-based mining: reads a paired corpus/labels file (or a JSONL file) and
//! prints the report. With no arguments, writes a small synthetic corpus to a
//! temporary directory first.
//!
//! Usage: mine_files [CORPUS [LABELS [EMBEDDINGS]]]

use std::path::PathBuf;

use labeldesc::report::{load_corpus, load_embedding_file, mine_report};
use labeldesc::synth::{generate, SynthSpec};
use labeldesc::SearchConfig;

fn main() -> labeldesc::Result<()> {
    let mut args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if args.is_empty() {
        let dir = std::env::temp_dir().join("labeldesc-demo");
        generate(&SynthSpec { n: 3000, m: 300, num_patterns: 2, target_rate: 0.1, seed: 5, ..SynthSpec::default() })?.write_to(&dir)?;
        println!("wrote demo corpus to {}", dir.display());
        args = ["corpus.txt", "labels.txt", "embeddings.txt"].iter().map(|f| dir.join(f)).collect();
    }
    let db = load_corpus(&args[0], args.get(1).map(PathBuf::as_path))?;
    let embeddings = args.get(2).map(|p| load_embedding_file(p)).transpose()?;
    let report = mine_report(&db, &SearchConfig::default(), embeddings.as_ref())?;
    print!("{}", report.to_text());
    println!("---");
    print!("{}", report.to_json());
    Ok(())
}
