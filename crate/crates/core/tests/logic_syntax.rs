use cyclo_core::logic::corpus::THEORIES;
use cyclo_core::logic::{
    corpus, expand_macro, macro_context, mutations, parse, parse_formula, parse_geo, parse_sequent,
    to_geo, CorpusError, Parsed,
};

#[test]
fn every_corpus_sequent_round_trips() {
    for theory in THEORIES {
        let c = corpus(theory, 4).unwrap();
        for s in &c.sequents {
            let printed = s.sequent.to_string();
            let back = parse_sequent(&printed)
                .unwrap_or_else(|e| panic!("{theory}/{}: {e}\n{printed}", s.name));
            assert_eq!(back, s.sequent, "{theory}/{}", s.name);
            assert_eq!(back.to_string(), printed);
        }
    }
    for m in mutations() {
        assert_eq!(parse_sequent(&m.sequent.to_string()).unwrap(), m.sequent);
    }
}

#[test]
fn geo_files_round_trip_at_default_cap() {
    for theory in THEORIES {
        let c = corpus(theory, 4).unwrap();
        let back = parse_geo(&to_geo(&c)).unwrap();
        assert_eq!(back.sequents, c.sequents, "{theory}");
        assert_eq!(back.signature, c.signature);
    }
}

#[test]
fn macro_expansions_reparse_in_their_context() {
    let cases: &[(&str, &[usize])] = &[
        ("L", &[1]),
        ("L", &[4]),
        ("Pos", &[3]),
        ("Phi", &[2]),
        ("Phi", &[5]),
        ("Psi", &[3]),
        ("PMin", &[]),
        ("Gen", &[2, 3]),
        ("Gen3", &[2, 2, 3]),
        ("Domeq", &[4, 2]),
    ];
    for (name, sizes) in cases {
        let (call, f) = expand_macro(name, sizes).unwrap();
        let ctx = macro_context(&call);
        let printed = f.to_string();
        let back = parse_formula(&printed, &ctx)
            .unwrap_or_else(|e| panic!("{name}{sizes:?}: {e}\n{printed}"));
        assert_eq!(back, f, "{name}{sizes:?}");
    }
}

#[test]
fn documented_parse_examples() {
    for text in [
        "f:A |- P(f) \\/ P(inv(f))",
        "x:G |- x = x",
        "f:A | T(f) |- OR k in 1..B . T(pow(f,k))",
    ] {
        assert!(matches!(parse(text), Ok(Parsed::Sequent(_))), "{text}");
    }
}

#[test]
fn corpus_sizes() {
    assert_eq!(corpus("GTbar", 4).unwrap().len(), 11);
    let tc = corpus("TC", 4).unwrap().len();
    let gcbar = corpus("GCbar", 4).unwrap().len();
    assert_eq!(tc, gcbar + 3);
    let tn = corpus("TN", 4).unwrap().len();
    let onebar = corpus("Onebar", 4).unwrap().len();
    assert_eq!(tn, onebar + 2);
    assert!(matches!(
        corpus("nope", 4),
        Err(CorpusError::UnknownTheory(_))
    ));
}

#[test]
fn scheme_cap_controls_instances() {
    let small = corpus("TE", 2).unwrap();
    let big = corpus("TE", 3).unwrap();
    assert!(small.len() < big.len());
    assert!(small.get("common-generator-2-2").is_some());
    assert!(small.get("common-generator-3-1").is_none());
    assert!(big.get("common-generator-3-1").is_some());
}
