//! Breaks the description length of a small corpus into its parts and
//! checks an incremental gain against two from-scratch evaluations.

use labeldesc::mdl::{binomial_code, lengths_agree, universal_int};
use labeldesc::{model_length, parse_pattern, total_length, CoverState, LabeledTransactionSet, PatternEntry};

fn main() -> labeldesc::Result<()> {
    println!("L_N(1) = {:.6}  L_N(2) = {:.6}  L_N(16) = {:.6}", universal_int(1)?, universal_int(2)?, universal_int(16)?);
    println!("bc(4, 2) = {:.6}", binomial_code(4, 2)?);

    let mut records = Vec::new();
    for i in 0..60 {
        let label = u8::from(i % 3 == 0);
        let mut row = vec!["the", "a"];
        if label == 1 && i % 2 == 0 {
            row.extend(["not", "sure"]);
        }
        if i % 5 == 0 {
            row.push("maybe");
        }
        records.push((row, label));
    }
    let db = LabeledTransactionSet::from_instances(records)?;
    let pattern = parse_pattern("AND(not, sure)", db.vocab())?;
    let entry = PatternEntry::new(pattern.clone(), &db)?;

    let mut state = CoverState::new(&db);
    println!("\nempty model: model {:.3} + data {:.3} = {:.3}", state.model_bits(), state.data_bits(), state.total_bits());
    let gain = state.gain(&pattern)?;
    state.add(entry.clone())?;
    println!("with {}: model {:.3} + data {:.3} = {:.3}", pattern.render(db.vocab())?, state.model_bits(), state.data_bits(), state.total_bits());
    println!("model part from scratch: {:.3}", model_length(std::slice::from_ref(&entry), db.m())?);

    let scratch = total_length(&db, &[])? - total_length(&db, &[entry])?;
    println!("gain incremental {gain:.6}, from scratch {scratch:.6}, agree: {}", lengths_agree(gain, scratch));
    for t in 0..db.m() {
        println!("  {:>6}: {} covered, {} residual", db.vocab().token(t)?, state.covered(t).count(), state.residual(t));
    }
    Ok(())
}
