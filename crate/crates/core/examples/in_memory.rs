//! Mining straight from token lists, without files.

use labeldesc::report::mine_tokens;
use labeldesc::SearchConfig;

fn main() -> labeldesc::Result<()> {
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let wrong = i % 4 == 0;
        let mut tokens = vec!["who", "is", "in", "the", "photo"];
        if wrong && i % 8 == 0 {
            tokens.extend(["wearing", "glasses"]);
        }
        if i % 7 == 0 {
            tokens.push("today");
        }
        instances.push(tokens);
        labels.push(u8::from(wrong));
    }
    let report = mine_tokens(&instances, &labels, &SearchConfig::default(), None)?;
    print!("{}", report.to_text());

    match mine_tokens(&instances[..2], &[0, 2], &SearchConfig::default(), None) {
        Ok(_) => unreachable!(),
        Err(e) => println!("bad input: {e}"),
    }
    Ok(())
}
