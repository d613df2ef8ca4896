//! The in-process entry point and the command line produce identical reports.

mod common;

use std::process::Command;

use labeldesc::report::mine_tokens;
use labeldesc::synth::{generate, SynthSpec};
use labeldesc::{Error, SearchConfig};

fn fixtures() -> Vec<(Vec<Vec<String>>, Vec<u8>, Option<String>)> {
    let mut out = Vec::new();
    let toy = common::toy_records(20);
    out.push((
        toy.iter().map(|(t, _)| t.iter().map(|s| s.to_string()).collect()).collect(),
        toy.iter().map(|(_, l)| *l).collect(),
        None,
    ));
    for seed in 0..9 {
        let spec = SynthSpec {
            n: 600 + 100 * seed as usize,
            m: 120,
            imbalance: 0.2,
            num_patterns: 2,
            pattern_len: 2,
            group_size: 1 + (seed as usize % 3),
            target_rate: 0.2,
            leak_rate: 0.01,
            seed,
            ..SynthSpec::default()
        };
        let data = generate(&spec).unwrap();
        let vocab = data.db.vocab().tokens();
        let rows = (0..data.db.n()).map(|i| data.db.row(i).iter().map(|&t| vocab[t].clone()).collect()).collect();
        let labels = data.db.labels().iter().map(|l| l.bit()).collect();
        let emb = (seed % 2 == 0).then(|| {
            let mut text = Vec::new();
            data.embeddings.write_text(&mut text).unwrap();
            String::from_utf8(text).unwrap()
        });
        out.push((rows, labels, emb));
    }
    out
}

#[test]
fn in_process_matches_cli() {
    let config = SearchConfig::default();
    for (k, (rows, labels, emb)) in fixtures().into_iter().enumerate() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.txt");
        let label_file = dir.path().join("labels.txt");
        let emb_file = dir.path().join("emb.txt");
        let lines: Vec<String> = rows.iter().map(|r| r.join(" ")).collect();
        std::fs::write(&corpus, lines.join("\n") + "\n").unwrap();
        let label_lines: Vec<String> = labels.iter().map(u8::to_string).collect();
        std::fs::write(&label_file, label_lines.join("\n") + "\n").unwrap();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_labeldesc"));
        cmd.args(["mine", "--input", corpus.to_str().unwrap(), "--labels", label_file.to_str().unwrap()]);
        if let Some(text) = &emb {
            std::fs::write(&emb_file, text).unwrap();
            cmd.args(["--embeddings", emb_file.to_str().unwrap()]);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "fixture {k}");
        let report = mine_tokens(&rows, &labels, &config, emb.as_ref().map(|_| emb_file.as_path())).unwrap();
        assert_eq!(report.to_json().into_bytes(), out.stdout, "fixture {k}");
    }
}

#[test]
fn errors_carry_cli_messages() {
    let config = SearchConfig::default();
    let err = mine_tokens::<&str>(&[], &[], &config, None).unwrap_err();
    assert_eq!(err.to_string(), "empty corpus");
    let err = mine_tokens(&[vec!["a"], vec!["b"]], &[0, 2], &config, None).unwrap_err();
    assert!(err.to_string().starts_with("bad label"), "{err}");
    assert!(err.is_malformed_input());
    let err = mine_tokens(&[vec!["a"]], &[0, 1], &config, None).unwrap_err();
    assert!(matches!(err, Error::Malformed { .. }));
}
