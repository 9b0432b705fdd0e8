//! End-to-end shard runs: partition layout, conservation of record counts,
//! part rotation, and byte-identical reruns regardless of worker count.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use langsieve::blocklist::Blocklists;
use langsieve::corpus::LabeledSentence;
use langsieve::filters::FilterConfig;
use langsieve::label::LabelId;
use langsieve::lid::{train, LidModel, TrainConfig};
use langsieve::pipeline::{run, OutputRecord, PipelineError, RunOptions};
use langsieve::samples::gen_sentences;
use langsieve::script::ScriptRegistry;
use langsieve::synth::{gen_und, gen_zxx, NoiseKind};

fn label(s: &str) -> LabelId {
    s.parse().unwrap()
}

fn model() -> &'static LidModel {
    static MODEL: OnceLock<LidModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let mut corpus: Vec<LabeledSentence> = Vec::new();
        for lang in ["eng_Latn", "rus_Cyrl"] {
            corpus.extend(gen_sentences(label(lang), 400, 41).unwrap());
        }
        corpus.extend(gen_und(label("und_Geor").script(), 400, (1, 12), 42).unwrap());
        let carriers: Vec<String> = gen_sentences(label("eng_Latn"), 100, 43)
            .unwrap()
            .into_iter()
            .map(|s| s.text)
            .collect();
        corpus.extend(gen_zxx(NoiseKind::Antspeak, 400, 44, Some(&carriers)).unwrap());
        let cfg = TrainConfig {
            bucket: 1 << 18,
            dim: 32,
            epoch: 4,
            min_count: 1,
            ..TrainConfig::default()
        };
        train(&corpus, &cfg, 99).unwrap()
    })
}

/// Lines of distinct words so only deliberate warnings fire.
fn clean_lines(lang: &str, n_lines: usize, seed: u64) -> Vec<String> {
    let mut pool = gen_sentences(label(lang), n_lines * 12, seed)
        .unwrap()
        .into_iter()
        .flat_map(|s| {
            s.text
                .split(' ')
                .map(str::to_string)
                .collect::<Vec<String>>()
        });
    (0..n_lines)
        .map(|_| {
            let mut seen = BTreeSet::new();
            let mut chars = 0;
            while chars < 105 {
                let word = pool.next().expect("pool large enough");
                if seen.insert(word.clone()) {
                    chars += word.chars().count() + 1;
                }
            }
            seen.into_iter().collect::<Vec<String>>().join(" ")
        })
        .collect()
}

fn wet_record(url: &str, stamp: &str, lines: &[String]) -> String {
    format!(
        "WARC/1.0\nWARC-Type: conversion\nWARC-Target-URI: {url}\nWARC-Date: {stamp}\n\n{}\n\n",
        lines.join("\n")
    )
}

/// Twelve records: eight keepable (five English, three Russian), one
/// Georgian, one two-line document, one empty, one malformed.
fn fixture_shard(dir: &Path) -> PathBuf {
    let mut body = String::new();
    for i in 0..4 {
        body.push_str(&wet_record(
            &format!("https://en.example.org/{i}"),
            &format!("2024-07-0{}T08:00:00Z", i + 1),
            &clean_lines("eng_Latn", 5, 100 + i),
        ));
    }
    let mut pii = clean_lines("eng_Latn", 5, 200);
    pii[1].push_str(" write to person@corp.example now");
    pii[3].push_str(" host 8.8.8.8 is up");
    body.push_str(&wet_record(
        "https://en.wikipedia.org/wiki/Example",
        "2024-07-05T08:00:00Z",
        &pii,
    ));
    for i in 0..3 {
        body.push_str(&wet_record(
            &format!("https://ru.example.org/{i}"),
            &format!("2024-07-0{}T09:00:00Z", i + 1),
            &clean_lines("rus_Cyrl", 5, 300 + i),
        ));
    }
    let georgian: Vec<String> = gen_und(label("und_Geor").script(), 5, (4, 10), 55)
        .unwrap()
        .into_iter()
        .map(|s| s.text)
        .collect();
    body.push_str(&wet_record(
        "https://ka.example.org/0",
        "2024-07-06T10:00:00Z",
        &georgian,
    ));
    body.push_str(&wet_record(
        "https://en.example.org/tiny",
        "2024-07-07T11:00:00Z",
        &clean_lines("eng_Latn", 2, 400),
    ));
    body.push_str(&wet_record(
        "https://en.example.org/empty",
        "2024-07-08T12:00:00Z",
        &[],
    ));
    body.push_str("WARC/1.0\nWARC-Date: 2024-07-09T13:00:00Z\n\norphan payload\n\n");
    let path = dir.join("fixture.wet");
    std::fs::write(&path, body).unwrap();
    path
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn run_partitions_counts_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let shard = fixture_shard(dir.path());
    let out_a = dir.path().join("out_a");
    let options = RunOptions {
        seed: 5,
        ..RunOptions::default()
    };
    let report = run(
        &[shard.clone()],
        &out_a,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &options,
    )
    .unwrap();

    assert_eq!(report.total_records, 12);
    assert_eq!(report.kept_documents, 8);
    assert_eq!(report.rejected_documents, 3);
    assert_eq!(report.parse_skipped, 1);
    assert_eq!(
        report.kept_documents + report.rejected_documents + report.parse_skipped,
        report.total_records
    );
    assert_eq!(report.rejections.get("und"), Some(&1));
    assert_eq!(report.rejections.get("warnings:tiny"), Some(&1));
    assert_eq!(report.rejections.get("empty_document"), Some(&1));
    assert_eq!(report.emails_replaced, 1);
    assert_eq!(report.ips_replaced, 1);

    let eng = report.per_label.get(&label("eng_Latn")).unwrap();
    let rus = report.per_label.get(&label("rus_Cyrl")).unwrap();
    assert_eq!(eng.documents, 5);
    assert_eq!(eng.lines, 25);
    assert_eq!(rus.documents, 3);
    assert_eq!(rus.lines, 15);
    assert!(eng.words > 0 && rus.words > 0);

    let files = read_tree(&out_a);
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["eng_Latn/part-0.jsonl", "rus_Cyrl/part-0.jsonl"]);

    for (name, bytes) in &files {
        let partition_label = name.split('/').next().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        for line in text.lines() {
            let record: OutputRecord = serde_json::from_str(line).unwrap();
            assert_eq!(record.lid_label, label(partition_label));
            assert!(record.lid_prob >= options.threshold);
            assert_eq!(record.n_sentences, record.text.split('\n').count());
            assert!(!record.text.contains("person@corp.example"));
            assert!(!record.text.contains("8.8.8.8"));
        }
    }
    let eng_text = String::from_utf8(files[0].1.clone()).unwrap();
    assert!(eng_text.contains("email@example.com") || eng_text.contains("firstname.lastname"));
    let wiki: Vec<OutputRecord> = eng_text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|r: &OutputRecord| r.url.contains("wikipedia"))
        .collect();
    assert_eq!(wiki.len(), 1);
    assert_eq!(wiki[0].category, vec!["wikipedia".to_string()]);

    // Rerun into a fresh directory, then again with a different worker
    // count: all partition bytes must match.
    let out_b = dir.path().join("out_b");
    run(
        &[shard.clone()],
        &out_b,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &options,
    )
    .unwrap();
    assert_eq!(files, read_tree(&out_b));

    let out_c = dir.path().join("out_c");
    let parallel = RunOptions {
        workers: 3,
        ..options
    };
    let report_c = run(
        &[shard],
        &out_c,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &parallel,
    )
    .unwrap();
    assert_eq!(files, read_tree(&out_c));
    assert_eq!(report_c.kept_documents, report.kept_documents);
    assert_eq!(report_c.rejections, report.rejections);
    assert_eq!(report_c.per_label, report.per_label);
}

#[test]
fn tiny_part_limit_rotates_without_changing_content() {
    let dir = tempfile::tempdir().unwrap();
    let shard = fixture_shard(dir.path());
    let out_one = dir.path().join("one");
    let out_many = dir.path().join("many");
    let base = RunOptions {
        seed: 5,
        ..RunOptions::default()
    };
    let tiny = RunOptions {
        part_max_bytes: 64,
        ..base.clone()
    };
    let common = |out: &Path, opts: &RunOptions| {
        run(
            &[shard.clone()],
            out,
            model(),
            &FilterConfig::default(),
            ScriptRegistry::builtin(),
            &Blocklists::builtin(),
            opts,
        )
        .unwrap()
    };
    common(&out_one, &base);
    common(&out_many, &tiny);

    for lang in ["eng_Latn", "rus_Cyrl"] {
        let single = std::fs::read(out_one.join(lang).join("part-0.jsonl")).unwrap();
        let mut parts = Vec::new();
        let mut k = 0;
        loop {
            let path = out_many.join(lang).join(format!("part-{k}.jsonl"));
            if !path.exists() {
                break;
            }
            parts.push(std::fs::read(&path).unwrap());
            k += 1;
        }
        // 64 bytes forces one record per part.
        let expected = if lang == "eng_Latn" { 5 } else { 3 };
        assert_eq!(parts.len(), expected, "{lang}");
        assert!(parts.iter().all(|p| p.iter().filter(|b| **b == b'\n').count() == 1));
        assert_eq!(parts.concat(), single, "{lang}");
    }
}

#[test]
fn jsonl_shards_and_mixed_formats_are_supported() {
    let dir = tempfile::tempdir().unwrap();
    let wet = fixture_shard(dir.path());
    let jsonl = dir.path().join("extra.jsonl");
    let mut f = std::fs::File::create(&jsonl).unwrap();
    for (i, seed) in [500u64, 501].iter().enumerate() {
        let text = clean_lines("rus_Cyrl", 4, *seed).join("\n");
        let row = serde_json::json!({
            "url": format!("https://ru.example.net/{i}"),
            "timestamp": "2024-07-10T00:00:00Z",
            "text": text,
        });
        writeln!(f, "{row}").unwrap();
    }
    writeln!(f, "broken line").unwrap();
    drop(f);

    let out = dir.path().join("out");
    let report = run(
        &[wet, jsonl],
        &out,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(report.total_records, 15);
    assert_eq!(report.parse_skipped, 2);
    assert_eq!(report.kept_documents, 10);
    assert_eq!(
        report.per_label.get(&label("rus_Cyrl")).unwrap().documents,
        5
    );
}

#[test]
fn format_override_beats_extensions() {
    let dir = tempfile::tempdir().unwrap();
    let odd = dir.path().join("shard.txt");
    let text = clean_lines("eng_Latn", 4, 600).join("\n");
    let row = serde_json::json!({
        "url": "https://en.example.org/odd",
        "timestamp": "2024-07-11T00:00:00Z",
        "text": text,
    });
    std::fs::write(&odd, format!("{row}\n")).unwrap();

    let out = dir.path().join("out");
    let no_format = run(
        &[odd.clone()],
        &out,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions::default(),
    );
    assert!(matches!(
        no_format,
        Err(PipelineError::UnknownFormat { .. })
    ));

    let report = run(
        &[odd],
        &out,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions {
            format: Some("jsonl".to_string()),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(report.kept_documents, 1);

    let bad_name = run(
        &[],
        &out,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions {
            format: Some("csv".to_string()),
            ..RunOptions::default()
        },
    );
    assert!(matches!(
        bad_name,
        Err(PipelineError::UnknownFormatName(_))
    ));
}

#[test]
fn empty_shard_list_yields_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let report = run(
        &[],
        &out,
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(report.total_records, 0);
    assert_eq!(report.kept_documents, 0);
    assert!(report.per_label.is_empty());
    assert!(report.rejections.is_empty());
    assert_eq!(report.sentences_per_second, 0.0);
    assert!(read_tree(&out).is_empty());
}

#[test]
fn invalid_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [-0.1, 1.5, f64::NAN] {
        let result = run(
            &[],
            &dir.path().join("out"),
            model(),
            &FilterConfig::default(),
            ScriptRegistry::builtin(),
            &Blocklists::builtin(),
            &RunOptions {
                threshold: bad,
                ..RunOptions::default()
            },
        );
        assert!(matches!(result, Err(PipelineError::Threshold(_))), "{bad}");
    }
}

#[test]
fn report_serializes_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let shard = fixture_shard(dir.path());
    let report = run(
        &[shard],
        &dir.path().join("out"),
        model(),
        &FilterConfig::default(),
        ScriptRegistry::builtin(),
        &Blocklists::builtin(),
        &RunOptions::default(),
    )
    .unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["kept_documents"], 8);
    assert_eq!(json["threshold"], 0.5);
    assert!(json["per_label"]["eng_Latn"]["documents"].is_u64());
    let table = report.render_table();
    assert!(table.contains("eng_Latn"));
    assert!(table.contains("rus_Cyrl"));
    assert!(table.contains("warnings:tiny"));
    assert!(report.sentences_per_second > 0.0);
    assert!(report.documents_per_second > 0.0);
}
