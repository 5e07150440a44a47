use std::path::PathBuf;
use std::process::{Command, Output};

fn cyclo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclo"))
        .args(args)
        .output()
        .expect("cyclo runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpora() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpora")
}

#[test]
fn documented_examples() {
    let o = cyclo(&[
        "homs",
        "--from",
        "2",
        "--to",
        "2",
        "--max-degree",
        "1",
        "--count",
    ]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "6"));

    let o = cyclo(&[
        "q",
        "common-gen",
        "--heights",
        "2:inf,3:1",
        "--x",
        "3/4",
        "--y",
        "5/6",
    ]);
    assert_eq!(
        (o.status.code(), stdout(&o).trim()),
        (Some(0), "z=1/12 n=9 m=10")
    );

    let o = cyclo(&[
        "check",
        "--theory",
        "TC",
        "--n-max",
        "3",
        "--arrow-bound",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let failing_lines = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("X_") && !l.ends_with("Holds") && !l.ends_with("HoldsUpToBound"))
        .count();
    assert_eq!(failing_lines, 0);
}

#[test]
fn corrupted_corpus_exits_2() {
    let text = std::fs::read_to_string(corpora().join("TC.geo")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, broken) in [
        ("syntax.geo", text.replacen("|-", "|=", 1)),
        (
            "signature.geo",
            text.replace("%signature groupoid_c", "%signature groupoid"),
        ),
        ("header.geo", text.replace("%signature groupoid_c", "")),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, broken).unwrap();
        let o = cyclo(&["check", "--file", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!o.stderr.is_empty());
    }
    let o = cyclo(&[
        "check",
        "--file",
        dir.path().join("missing.geo").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mutated_axioms_exit_1_with_a_counterexample() {
    let dir = corpora().join("mutations");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = cyclo(&[
            "--json",
            "check",
            "--file",
            path.to_str().unwrap(),
            "--n-max",
            "2",
        ]);
        assert_eq!(o.status.code(), Some(1), "{}", path.display());
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let failing: Vec<&serde_json::Value> = v["reports"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["verdict"] == "Fails")
            .collect();
        assert!(!failing.is_empty());
        assert!(failing.iter().all(|r| r["counterexample"].is_object()));
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn unknown_at_bound_exits_3() {
    // in X_1 the arrow 5@0 needs five windings of the cycle
    let o = cyclo(&[
        "check",
        "--theory",
        "TC",
        "--n",
        "1",
        "--arrow-bound",
        "5",
        "--index-bound",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("UnknownAtBound [f = 5@0]"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["frobnicate"][..],
        &["homs", "--from", "2"],
        &["homs", "--from", "2", "--to", "2", "--bogus"],
        &["factorize", "--n", "3", "--arrow", "seven@1"],
        &["factorize", "--n", "3", "--arrow", "1@5"],
        &["pmin", "--n", "0", "--from", "0", "--to", "0"],
        &["check", "--theory", "NOPE"],
        &["--scheme-cap", "9", "check", "--theory", "TE"],
        &["q", "common-gen", "--x", "1/2", "--y", "1"],
        &["compose", "--first", "2>2@0:1,1", "--second", "3>3@0:1,1,1"],
        &["mingen", "--n", "3", "--x", "1@0,1@1", "--y", "3@0"],
    ] {
        let o = cyclo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn every_subcommand_speaks_json() {
    let dir = corpora();
    let tn = dir.join("TN.geo");
    let cases: Vec<Vec<&str>> = vec![
        vec!["model", "new", "--n", "3"],
        vec!["model", "from-perm", "--perm", "1,0,3,4,2"],
        vec!["factorize", "--n", "3", "--arrow", "-7@1"],
        vec!["pmin", "--n", "5", "--from", "3", "--to", "1"],
        vec![
            "mingen",
            "--n",
            "5",
            "--x",
            "1@0,3@1,1@4",
            "--y",
            "1@2,1@3,1@4,2@0",
            "--mode",
            "cyclic",
        ],
        vec!["insert", "--n", "4", "--loop", "2@0,2@2", "--object", "3"],
        vec!["homs", "--from", "2", "--to", "3", "--max-degree", "2"],
        vec!["compose", "--first", "2>3@0:1,2", "--second", "3>3@1:1,1,1"],
        vec!["modfun", "--morphism", "2>2@0:3,1"],
        vec!["check", "--theory", "GTbar", "--n-max", "2"],
        vec![
            "check",
            "--file",
            tn.to_str().unwrap(),
            "--heights",
            "2:inf",
        ],
        vec!["parse", "f:A |- P(f) \\/ P(inv(f))"],
        vec!["parse", "--expand", "Gen", "--sizes", "2,2"],
        vec!["q", "colimit", "--diagram", "chain:2,3"],
        vec!["q", "contains", "--heights", "scale=3", "--q", "6"],
        vec!["q", "archimedean", "--x", "5", "--y", "2"],
        vec!["export", "json", "--n", "3", "--loop", "x=1@0,2@1"],
        vec!["export", "dot", "--n", "3"],
        vec!["export", "json", "--morphism", "2>2@0:1,1"],
    ];
    for args in cases {
        let mut full = vec!["--json"];
        full.extend(&args);
        let o = cyclo(&full);
        assert!(
            matches!(o.status.code(), Some(0) | Some(3)),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        serde_json::from_str::<serde_json::Value>(&stdout(&o))
            .unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn worked_values() {
    let out = |args: &[&str]| stdout(&cyclo(args)).trim().to_string();
    assert_eq!(
        out(&["q", "contains", "--heights", "2:inf", "--q", "3/8"]),
        "true"
    );
    assert_eq!(
        out(&["q", "contains", "--heights", "2:inf", "--q", "1/3"]),
        "false"
    );
    assert_eq!(
        out(&[
            "q",
            "archimedean",
            "--heights",
            "2:inf",
            "--x",
            "7/2",
            "--y",
            "1/4"
        ]),
        "N=14"
    );
    assert_eq!(
        out(&["q", "colimit", "--diagram", "chain:2,3"]),
        "lambda_0=1\nlambda_1=1/2\nlambda_2=1/6"
    );
    assert_eq!(
        out(&["pmin", "--n", "4", "--from", "3", "--to", "1"]),
        "2@3"
    );
    assert_eq!(out(&["modfun", "--morphism", "2>2@0:3,1"]), "2");
    assert_eq!(
        out(&["compose", "--first", "2>2@0:1,1", "--second", "2>2@1:0,2"]),
        "2>2@1:0,2"
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&cyclo(&[
        "--json",
        "export",
        "json",
        "--morphism",
        "2>2@0:1,1",
    ])))
    .unwrap();
    assert_eq!(v["degree"], 1);
}

#[test]
fn five_object_figure() {
    let o = cyclo(&[
        "export",
        "dot",
        "--n",
        "5",
        "--loop",
        "x=1@0,3@1,1@4",
        "--loop",
        "y=1@2,1@3,1@4,2@0",
    ]);
    let dot = stdout(&o);
    assert_eq!(dot.matches("label=\"xi_").count(), 5);
    assert!(dot.contains("a1 -> a4 [label=\"x_2 = 3@1\""));
    assert!(dot.contains("a0 -> a2 [label=\"y_4 = 2@0\""));
}

#[test]
fn sampling_follows_the_seed() {
    let run = |seed: &str| {
        stdout(&cyclo(&[
            "--seed",
            seed,
            "homs",
            "--from",
            "3",
            "--to",
            "3",
            "--max-degree",
            "2",
            "--sample",
            "4",
        ]))
    };
    assert_eq!(run("11"), run("11"));
    assert_eq!(run("11").lines().count(), 4);
    let seeds: std::collections::BTreeSet<String> =
        ["0", "1", "2", "3"].iter().map(|s| run(s)).collect();
    assert!(seeds.len() > 1);
}
