//! The five-question toy corpus from the "how many" example, replicated 20
//! times. Questions starting with "how many" are the misclassified ones; the
//! frequent word "ducks" carries no label information.

use labeldesc::{mine, CoverState, LabeledTransactionSet, SearchConfig};

const TOY: [(&str, u8); 5] = [
    ("how many ducks are in the picture", 1),
    ("what are the ducks eating", 1),
    ("how many roosters are in the puddle", 1),
    ("do you see ducks in the puddle", 0),
    ("are there many ducks playing", 0),
];

fn main() -> labeldesc::Result<()> {
    let records = (0..20).flat_map(|_| TOY.iter().map(|(q, label)| (q.split(' ').collect::<Vec<_>>(), *label)));
    let db = LabeledTransactionSet::from_instances(records)?;
    println!("{} instances, {} in G+, {} distinct tokens", db.n(), db.n_plus(), db.m());

    let state = CoverState::new(&db);
    for word in ["how", "many", "ducks"] {
        let p = labeldesc::parse_pattern(word, db.vocab())?;
        println!("gain of {word:>5} alone: {:8.2} bits", state.gain(&p)?);
    }

    let result = mine(&db, &SearchConfig::default(), None)?;
    println!("\n{:.1} -> {:.1} bits in {} rounds", result.total_bits_start, result.total_bits_end, result.rounds);
    for e in &result.entries {
        println!(
            "  {} {:<32} +{:<3} -{:<3} gain {:.2}",
            e.target.symbol(),
            e.pattern.render(db.vocab())?,
            e.u_plus,
            e.u_minus,
            e.gain_bits
        );
    }
    Ok(())
}
