//! Plants five conjunctions in an imbalanced, noisy corpus and measures how
//! well they are recovered, next to a frequency-difference baseline.
//!
//! Usage: synthetic_recovery [SEED] [N] [VOCAB]

use std::time::Instant;

use labeldesc::synth::{baseline_topk, generate, soft_f1_patterns, SynthSpec};
use labeldesc::{mine, Pattern, SearchConfig};

fn main() -> labeldesc::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let spec = SynthSpec {
        seed: args.first().copied().unwrap_or(0),
        n: args.get(1).map_or(10_000, |&v| v as usize),
        m: args.get(2).map_or(1_000, |&v| v as usize),
        ..SynthSpec::default()
    };
    let data = generate(&spec)?;
    println!("{} instances ({} in G+), {} tokens", data.db.n(), data.db.n_plus(), data.db.m());
    for p in &data.truth.patterns {
        println!("  planted {:<24} realized on {}/{} G+ and {}/{} G-", p.pattern.render(), p.realized_plus, p.stamped_plus, p.realized_minus, p.stamped_minus);
    }

    let start = Instant::now();
    let result = mine(&data.db, &SearchConfig::default(), Some(&data.embeddings))?;
    println!("mined {} patterns in {:.2?}", result.entries.len(), start.elapsed());
    for e in &result.entries {
        println!("  {} {:<24} +{} -{} gain {:.1}", e.target.symbol(), e.pattern.render(data.db.vocab())?, e.u_plus, e.u_minus, e.gain_bits);
    }

    let planted: Vec<Pattern> = data.truth.patterns.iter().map(|p| p.pattern.resolve(data.db.vocab())).collect::<Result<_, _>>()?;
    let found: Vec<Pattern> = result.entries.iter().map(|e| e.pattern.clone()).collect();
    let ours = soft_f1_patterns(&found, &planted);
    let base = soft_f1_patterns(&baseline_topk(&data.db, 50), &planted);
    println!("soft F1 {:.3} (precision {:.3}, recall {:.3})", ours.f1, ours.precision, ours.recall);
    println!("top-50 token baseline: precision {:.3}, recall {:.3}", base.precision, base.recall);
    Ok(())
}
