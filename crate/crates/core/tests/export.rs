use std::collections::BTreeSet;

use cyclo_core::export::model_dot;
use cyclo_core::groupoid::{parse_arrow, CycGroupoid};
use cyclo_core::logic::{
    check, corpus, mutations, Bounds, CheckOptions, GroupoidStructure, SequentReport,
};
use cyclo_core::loops::Loop;
use serde_json::Value;

fn loop_of(model: CycGroupoid, text: &str) -> Loop<i64> {
    Loop::new(
        text.split(',')
            .map(|a| parse_arrow(model, a).unwrap())
            .collect(),
    )
    .unwrap()
}

/// `(from, to)` pairs of the edges whose label starts with `name_`.
fn edges(dot: &str, name: &str) -> BTreeSet<(String, String)> {
    dot.lines()
        .filter(|l| l.contains(&format!("label=\"{name}_")))
        .map(|l| {
            let (from, rest) = l.trim().split_once(" -> ").unwrap();
            let to = rest.split_whitespace().next().unwrap();
            (from.to_string(), to.to_string())
        })
        .collect()
}

fn pairs(list: &[(u32, u32)]) -> BTreeSet<(String, String)> {
    list.iter()
        .map(|(a, b)| (format!("a{a}"), format!("a{b}")))
        .collect()
}

#[test]
fn five_object_example_figure() {
    let x5 = CycGroupoid::new(5).unwrap();
    let x = loop_of(x5, "1@0,3@1,1@4");
    let y = loop_of(x5, "1@2,1@3,1@4,2@0");
    assert!(x.is_psi() && y.is_psi());
    let dot = model_dot(x5, &[("x", &x), ("y", &y)]);
    assert_eq!(
        edges(&dot, "xi"),
        pairs(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    );
    assert_eq!(edges(&dot, "x"), pairs(&[(0, 1), (1, 4), (4, 0)]));
    assert_eq!(edges(&dot, "y"), pairs(&[(2, 3), (3, 4), (4, 0), (0, 2)]));
    assert_eq!(
        dot,
        model_dot(x5, &[("x", &x), ("y", &y)]),
        "output is byte-stable"
    );
}

#[test]
fn reports_hold_without_counterexample() {
    let tc = corpus("TC", 4).unwrap();
    let s = GroupoidStructure::new(CycGroupoid::new(2).unwrap());
    for ns in &tc.sequents {
        let out = check(
            &s,
            &ns.sequent,
            &Bounds::new(4, 4),
            &CheckOptions::default(),
        )
        .unwrap();
        let v: Value = serde_json::to_value(SequentReport::new(&ns.sequent, &out.verdict)).unwrap();
        assert_eq!(v["sequent"], Value::String(ns.sequent.to_string()));
        assert!(
            v["verdict"] == "HoldsUpToBound" || v["verdict"] == "Holds",
            "{}: {v}",
            ns.name
        );
        assert!(v.get("counterexample").is_none());
    }
}

#[test]
fn failing_report_carries_the_valuation() {
    let m = mutations()
        .into_iter()
        .find(|m| m.name == "positive-is-nontrivial")
        .unwrap();
    let s = GroupoidStructure::new(CycGroupoid::new(2).unwrap());
    let out = check(&s, &m.sequent, &Bounds::new(4, 4), &CheckOptions::default()).unwrap();
    let v = serde_json::to_value(SequentReport::new(&m.sequent, &out.verdict)).unwrap();
    assert_eq!(v["verdict"], "Fails");
    let f = v["counterexample"]["f"].as_str().unwrap();
    let arrow = parse_arrow(CycGroupoid::new(2).unwrap(), f).unwrap();
    assert!(arrow.is_positive() && !arrow.is_nontrivial());
}
