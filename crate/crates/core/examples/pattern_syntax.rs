//! Parsing, rendering and matching patterns.

use labeldesc::{parse_pattern, LabeledTransactionSet, PatternText};

fn main() -> labeldesc::Result<()> {
    let db = LabeledTransactionSet::from_instances([
        (vec!["what", "color", "is", "the", "bench"], 1),
        (vec!["what", "colour", "is", "the", "car"], 1),
        (vec!["what", "is", "on", "the", "bench"], 0),
    ])?;

    let p = parse_pattern("AND(XOR(colour, color), what)", db.vocab())?;
    println!("canonical: {}", p.render(db.vocab())?);
    println!("unicode:   {}", p.render_unicode(db.vocab())?);
    println!("support:   {:?}", p.support_bitmap(&db)?);
    for i in 0..db.n() {
        println!("  row {i} matches: {}", p.matches(db.row(i)));
    }

    // vocabulary-free form, e.g. for comparing results across corpora
    let text = PatternText::parse("AND(b\\,c, XOR(z, a))")?;
    println!("text form: {} over {:?}", text.render(), text.token_set());

    for bad in ["AND(what color)", "XOR(what)", "AND(what, what)", "AND(what, nosuch)"] {
        match parse_pattern(bad, db.vocab()) {
            Ok(p) => println!("{bad:22} -> {}", p.render(db.vocab())?),
            Err(e) => println!("{bad:22} -> error: {e}"),
        }
    }
    Ok(())
}
