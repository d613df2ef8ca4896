//! Recovers a pattern whose second clause is a group of interchangeable
//! tokens, using the word vectors emitted by the generator. Without vectors
//! only a fragment of the plant is found.

use labeldesc::synth::{generate, SynthSpec};
use labeldesc::{mine, SearchConfig};

fn main() -> labeldesc::Result<()> {
    let spec = SynthSpec { num_patterns: 1, pattern_len: 2, group_size: 3, destructive_noise: 0.02, seed: 1, ..SynthSpec::default() };
    let data = generate(&spec)?;
    let planted = &data.truth.patterns[0].pattern;
    println!("planted: {}", planted.render());

    let group = planted.clauses().iter().find(|c| c.len() > 1).expect("one group clause");
    for (w, s) in data.embeddings.neighbors(&group[0], 3, 0.5) {
        println!("  neighbour of {}: {w} ({s:.3})", group[0]);
    }

    let config = SearchConfig::default();
    for (label, emb) in [("with vectors", Some(&data.embeddings)), ("without vectors", None)] {
        let result = mine(&data.db, &config, emb)?;
        println!("{label}:");
        for e in &result.entries {
            println!("  {} {}  +{} -{}", e.target.symbol(), e.pattern.render_unicode(data.db.vocab())?, e.u_plus, e.u_minus);
        }
    }
    Ok(())
}
