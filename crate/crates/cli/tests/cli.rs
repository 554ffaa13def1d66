use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chanorder::document::{AnyChannel, Document};
use chanorder::ordering::Witness;
use serde_json::Value;
use tempfile::TempDir;

fn chanorder(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chanorder")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn bsc(dir: &Path, name: &str, e: f64) -> PathBuf {
    let doc = format!(
        r#"{{"kind":"classical","d_in":2,"d_out":2,"matrix":[[{},{e}],[{e},{}]],"label":"{name}"}}"#,
        1.0 - e,
        1.0 - e
    );
    write(dir, name, &doc)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Reloads the report's inputs and witness, re-validates, and returns
/// (stated gap, recomputed gap).
fn revalidate_report(report: &Value) -> (f64, f64) {
    let docs: Vec<Document> = report["inputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| serde_json::from_value(i["document"].clone()).unwrap())
        .collect();
    let channels: Vec<AnyChannel> = docs.iter().map(|d| d.to_channel().unwrap()).collect();
    let witness: Witness = serde_json::from_value(report["outcome"]["witness"].clone()).unwrap();
    let recomputed = match (&witness, &channels[0], &channels[1]) {
        (Witness::Classical(w), AnyChannel::Classical(a), AnyChannel::Classical(b)) => w.validate(a, b).unwrap(),
        (Witness::Quantum(w), a, b) => w.validate(&a.to_quantum(), &b.to_quantum()).unwrap(),
        _ => panic!("witness kind does not match inputs"),
    };
    (witness.margin(), recomputed)
}

#[test]
fn bsc_pair_is_degradable_with_delta_map() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    bsc(dir.path(), "b.json", 0.2);
    let out = chanorder(&["check-degradable", "a.json", "b.json", "--json"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let m = &report["outcome"]["degrading_map"]["channel"]["matrix"];
    let expected = [[0.875, 0.125], [0.125, 0.875]];
    for (z, row) in expected.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            assert!((m[z][y].as_f64().unwrap() - v).abs() < 1e-6);
        }
    }
    let text = chanorder(&["check-degradable", "a.json", "b.json"], dir.path());
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("0.875000000") && text.contains("0.125000000"), "{text}");
}

#[test]
fn reversed_bsc_pair_ships_a_revalidating_witness() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    bsc(dir.path(), "b.json", 0.2);
    let out = chanorder(&["check-degradable", "b.json", "a.json", "--json", "--out", "r.json"], dir.path());
    assert_eq!(code(&out), 1);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(saved, json(&out));
    let (stated, recomputed) = revalidate_report(&saved);
    assert!(stated >= 1e-7);
    assert!((stated - recomputed).abs() < 1e-8, "{stated} vs {recomputed}");
}

#[test]
fn quantum_witness_reports_revalidate() {
    let dir = TempDir::new().unwrap();
    let mut checked = 0;
    for seed in 0..40 {
        let out_dir = format!("p{seed}");
        let gen = chanorder(&["random-pair", "--free", "--seed", &seed.to_string(), "--out", &out_dir], dir.path());
        assert_eq!(code(&gen), 0);
        let first = format!("{out_dir}/first.json");
        let second = format!("{out_dir}/second.json");
        let out = chanorder(&["check-degradable", &first, &second, "--json"], dir.path());
        if code(&out) == 1 {
            let (stated, recomputed) = revalidate_report(&json(&out));
            assert!((stated - recomputed).abs() < 1e-8, "seed {seed}: {stated} vs {recomputed}");
            checked += 1;
        }
        if checked == 3 {
            break;
        }
    }
    assert_eq!(checked, 3);
}

#[test]
fn malformed_inputs_exit_three() {
    let dir = TempDir::new().unwrap();
    let good = bsc(dir.path(), "a.json", 0.1);
    let text = std::fs::read_to_string(&good).unwrap();
    write(dir.path(), "trunc.json", &text[..text.len() / 2]);
    write(dir.path(), "bad.json", r#"{"kind":"classical","d_in":2,"d_out":2,"matrix":[[0.5,0.1],[0.5,0.8]]}"#);
    write(dir.path(), "joint.json", r#"{"kind":"joint","matrix":[[0.5,0.5]]}"#);
    for other in ["trunc.json", "bad.json", "joint.json", "missing.json"] {
        let out = chanorder(&["check-degradable", "a.json", other], dir.path());
        assert_eq!(code(&out), 3, "{other}");
    }
    assert_eq!(code(&chanorder(&["measure", "hmin", "trunc.json"], dir.path())), 3);
    assert_eq!(code(&chanorder(&["sample", "ambiguity", "a.json", "trunc.json", "--seed", "1"], dir.path())), 3);
    // Seeds are mandatory for sampling.
    assert_eq!(code(&chanorder(&["sample", "ambiguity", "a.json", "a.json"], dir.path())), 3);
}

#[test]
fn exit_codes_do_not_depend_on_output_options() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    bsc(dir.path(), "b.json", 0.2);
    for (x, y, expected) in [("a.json", "b.json", 0), ("b.json", "a.json", 1)] {
        for extra in [&[][..], &["--json"][..], &["--out", "o.json"][..]] {
            let mut args = vec!["check-degradable", x, y];
            args.extend_from_slice(extra);
            assert_eq!(code(&chanorder(&args, dir.path())), expected);
        }
    }
}

#[test]
fn mixed_kinds_are_embedded_with_a_notice() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    let gen = chanorder(&["random-pair", "--free", "--seed", "2", "--out", "q"], dir.path());
    assert_eq!(code(&gen), 0);
    let out = chanorder(&["check-degradable", "q/first.json", "a.json", "--json"], dir.path());
    assert!([0, 1, 2].contains(&code(&out)));
    let report = json(&out);
    assert!(report["notices"][0].as_str().unwrap().contains("embedded"));
}

#[test]
fn measures_match_known_values() {
    let dir = TempDir::new().unwrap();
    let phi = r#"{"kind":"state","d_a":2,"d_b":2,"matrix":[
        [[0.5,0],[0,0],[0,0],[0.5,0]],[[0,0],[0,0],[0,0],[0,0]],
        [[0,0],[0,0],[0,0],[0,0]],[[0.5,0],[0,0],[0,0],[0.5,0]]]}"#;
    write(dir.path(), "phi.json", phi);
    write(dir.path(), "bsc_joint.json", r#"{"kind":"joint","matrix":[[0.45,0.05],[0.05,0.45]]}"#);
    write(dir.path(), "indep.json", r#"{"kind":"joint","matrix":[[0.1,0.1],[0.4,0.4]]}"#);
    let value = |args: &[&str]| {
        let out = chanorder(args, dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        json(&out)["outcome"]["value"].as_f64().unwrap()
    };
    assert!((value(&["measure", "hmin", "phi.json", "--json"]) + 1.0).abs() < 1e-6);
    assert!((value(&["measure", "qcorr", "phi.json", "--json"]) - 2.0).abs() < 1e-6);
    assert!((value(&["measure", "pguess", "bsc_joint.json", "--json"]) - 0.9).abs() < 1e-12);
    let h_u = -(0.2f64 * 0.2f64.log2() + 0.8 * 0.8f64.log2());
    assert!((value(&["measure", "centropy", "indep.json", "--json"]) - h_u).abs() < 1e-12);
}

#[test]
fn sampling_reports() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    bsc(dir.path(), "b.json", 0.2);
    let violations = |args: &[&str]| {
        let out = chanorder(args, dir.path());
        json(&out)["outcome"]["violations"].as_u64().unwrap()
    };
    for ordering in ["ambiguity", "coherence", "noisiness"] {
        assert_eq!(violations(&["sample", ordering, "a.json", "b.json", "--trials", "20", "--seed", "4", "--json"]), 0);
        assert_eq!(violations(&["sample", ordering, "b.json", "b.json", "--trials", "20", "--seed", "4", "--json"]), 0);
    }
    // The reversed pair has a witness (uniform prior, identity encoding), which
    // random encodings hit often enough.
    let out =
        chanorder(&["sample", "noisiness", "b.json", "a.json", "--trials", "50", "--seed", "4", "--json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(json(&out)["outcome"]["violations"].as_u64().unwrap() >= 1);
}

#[test]
fn seeded_commands_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    bsc(dir.path(), "a.json", 0.1);
    bsc(dir.path(), "b.json", 0.3);
    let runs: Vec<Vec<&str>> = vec![
        vec!["random-pair", "--degradable", "--seed", "9", "--d-out", "3"],
        vec!["random-pair", "--free", "--kind", "classical", "--d-in", "5", "--seed", "9"],
        vec!["sample", "ambiguity", "a.json", "b.json", "--trials", "12", "--seed", "9", "--json"],
        vec!["sample", "coherence", "a.json", "b.json", "--trials", "6", "--seed", "9", "--json"],
        vec!["sample", "noisiness", "b.json", "a.json", "--trials", "30", "--seed", "9"],
        vec!["km-search", "--pairs", "20", "--trials", "30", "--seed", "9", "--json"],
    ];
    for args in runs {
        let (x, y) = (chanorder(&args, dir.path()), chanorder(&args, dir.path()));
        assert!(!x.stdout.is_empty());
        assert_eq!(x.stdout, y.stdout, "{args:?}");
    }
    let other = chanorder(&["random-pair", "--free", "--seed", "10"], dir.path());
    assert_ne!(other.stdout, chanorder(&["random-pair", "--free", "--seed", "9"], dir.path()).stdout);
}

#[test]
fn random_degradable_pairs_check_as_degradable() {
    let dir = TempDir::new().unwrap();
    for (seed, kind) in [(1, "quantum"), (2, "quantum"), (3, "classical")] {
        let out_dir = format!("d{seed}");
        let args = [
            "random-pair",
            "--degradable",
            "--kind",
            kind,
            "--d-in",
            "3",
            "--seed",
            &seed.to_string(),
            "--out",
            &out_dir,
        ];
        assert_eq!(code(&chanorder(&args, dir.path())), 0);
        let first = format!("{out_dir}/first.json");
        let second = format!("{out_dir}/second.json");
        assert_eq!(code(&chanorder(&["check-degradable", &first, &second], dir.path())), 0, "seed {seed}");
    }
}

#[test]
fn free_qubit_pairs_show_both_verdicts() {
    let dir = TempDir::new().unwrap();
    let mut seen = [false; 3];
    for seed in 0..100 {
        let out_dir = format!("f{seed}");
        let gen = chanorder(&["random-pair", "--free", "--seed", &seed.to_string(), "--out", &out_dir], dir.path());
        assert_eq!(code(&gen), 0);
        let first = format!("{out_dir}/first.json");
        let second = format!("{out_dir}/second.json");
        seen[code(&chanorder(&["check-degradable", &first, &second], dir.path())) as usize] = true;
        if seen[0] && seen[1] {
            break;
        }
    }
    assert!(seen[0] && seen[1], "{seen:?}");
}

#[test]
fn oversized_random_pair_is_rejected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&chanorder(&["random-pair", "--free", "--d-in", "5", "--seed", "1"], dir.path())), 3);
}

#[test]
fn selftest_quick_passes_and_fault_injection_fails() {
    let dir = TempDir::new().unwrap();
    let ok = chanorder(&["selftest", "--quick"], dir.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let lines = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(lines.lines().filter(|l| l.starts_with("[PASS]")).count(), 9);
    let broken = chanorder(&["selftest", "--quick", "--corrupt-solver-tol"], dir.path());
    assert_ne!(code(&broken), 0);
}
