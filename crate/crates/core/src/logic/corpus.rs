//! Built-in theories and the `.geo` corpus file format.
//!
//! A `.geo` file starts with a `%signature <name>` line, optionally followed by
//! `%theory <name>`. Sequents come in stanzas separated by blank lines; the
//! first `#` line of a stanza names the sequent.

use std::fmt::Write as _;

use thiserror::Error;

use super::parser::{parse_sequent, ParseError};
use super::syntax::{Sequent, Signature};

/// Default instantiation cap for axiom schemes.
pub const DEFAULT_SCHEME_CAP: usize = 4;

pub const THEORIES: [&str; 14] = [
    "G", "Gbar", "GT", "GTbar", "GC", "GCbar", "TE", "TE-alt", "TC", "O", "Obar", "One", "Onebar",
    "TN",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("scheme cap {0} outside 1..=8")]
    CapOutOfRange(usize),
    #[error("missing `%signature` header")]
    MissingSignature,
    #[error("unknown signature `{0}`")]
    UnknownSignature(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("stanza `{name}` (line {line}): {error}")]
    Parse {
        name: String,
        line: usize,
        error: ParseError,
    },
    #[error("stanza `{name}` (line {line}) uses symbols outside `{signature}`: {message}")]
    Signature {
        name: String,
        line: usize,
        signature: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSequent {
    pub name: String,
    pub sequent: Sequent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub theory: Option<String>,
    pub signature: Signature,
    pub sequents: Vec<NamedSequent>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sequents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequents.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Sequent> {
        self.sequents
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.sequent)
    }
}

struct Builder {
    sig: Signature,
    out: Vec<NamedSequent>,
}

impl Builder {
    fn new(sig: Signature) -> Self {
        Builder {
            sig,
            out: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, text: &str) {
        let sequent =
            parse_sequent(text).unwrap_or_else(|e| panic!("built-in sequent `{text}`: {e}"));
        self.out.push(NamedSequent {
            name: name.into(),
            sequent,
        });
    }

    fn finish(self, theory: &str) -> Corpus {
        Corpus {
            theory: Some(theory.to_string()),
            signature: self.sig,
            sequents: self.out,
        }
    }
}

fn groupoid_base(b: &mut Builder, total: bool) {
    b.add("inverse-right", "f:A |- f o inv(f) = id(cod(f))");
    b.add("inverse-left", "f:A |- inv(f) o f = id(dom(f))");
    b.add("identity-positive", "a:O |- P(id(a))");
    b.add(
        "positive-composition",
        "f:A, f':A, f'':A | P(f) /\\ P(f') /\\ f'' = f' o f |- P(f'')",
    );
    b.add("antisymmetry", "f:A | P(f) /\\ P(inv(f)) |- f = id(dom(f))");
    if total {
        b.add("totality", "f:A |- P(f) \\/ P(inv(f))");
    }
}

fn nontriviality(b: &mut Builder, total: bool) {
    b.add("nontrivial-endomorphism", "f:A | T(f) |- dom(f) = cod(f)");
    b.add("identity-trivial", "x:O | T(id(x)) |- false");
    b.add(
        "nontrivial-powers",
        "f:A | T(f) |- AND n in 1..B . T(pow(f, n)) /\\ T(pow(f, -n))",
    );
    b.add("nontrivial-conjugate", "f:A, f':A | T(f' o f) |- T(f o f')");
    if total {
        b.add(
            "endomorphism-dichotomy",
            "f:A | dom(f) = cod(f) |- f = id(dom(f)) \\/ T(f)",
        );
    }
}

fn cycles(b: &mut Builder) {
    b.add("cycle-endpoints", "a:O |- dom(C(a)) = a /\\ cod(C(a)) = a");
    b.add("cycle-positive", "a:O |- P(C(a))");
    b.add("cycle-nontrivial", "a:O | C(a) = id(a) |- false");
    b.add(
        "cycle-conjugate",
        "f:A, g:A | g o f = C(dom(f)) |- f o g = C(dom(g))",
    );
}

fn vars(stem: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{stem}{i}")).collect()
}

fn decl(names: &[String]) -> String {
    names
        .iter()
        .map(|v| format!("{v}:A"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn epicyclic_common(b: &mut Builder) {
    b.add("inhabited", "|- exists a:O . a = a");
    b.add(
        "positive-to-loop",
        "f:A | P(f) |- exists g:A . P(g) /\\ T(g o f)",
    );
}

fn epicyclic(cap: usize) -> Corpus {
    let mut b = Builder::new(Signature::groupoid_t());
    groupoid_base(&mut b, true);
    nontriviality(&mut b, true);
    epicyclic_common(&mut b);
    for n in 1..=cap {
        for m in 1..=cap {
            let (x, y) = (vars("x", n), vars("y", m));
            let alternatives: Vec<String> = (1..=n + m)
                .map(|k| {
                    let z = vars("z", k);
                    format!(
                        "(exists {} . Gen3({}; {}; {}))",
                        decl(&z),
                        x.join(", "),
                        y.join(", "),
                        z.join(", ")
                    )
                })
                .collect();
            b.add(
                format!("common-generator-{n}-{m}"),
                &format!(
                    "{}, {} | Phi({}) /\\ Phi({}) |- {}",
                    decl(&x),
                    decl(&y),
                    x.join(", "),
                    y.join(", "),
                    alternatives.join(" \\/ ")
                ),
            );
        }
    }
    for k in 2..=cap {
        let z = vars("z", k);
        let w = vars("w", k - 1);
        for i in 1..=k {
            for j in i + 1..=k {
                b.add(
                    format!("generator-reduction-{k}-{i}-{j}"),
                    &format!(
                        "{} | Phi({}) /\\ dom(z{i}) = dom(z{j}) |- exists {} . Phi({}) /\\ Gen({}; {})",
                        decl(&z),
                        z.join(", "),
                        decl(&w),
                        w.join(", "),
                        z.join(", "),
                        w.join(", ")
                    ),
                );
            }
        }
    }
    b.finish("TE")
}

fn epicyclic_alt(cap: usize) -> Corpus {
    let mut b = Builder::new(Signature::groupoid_t());
    groupoid_base(&mut b, true);
    nontriviality(&mut b, true);
    epicyclic_common(&mut b);
    for n in 1..=cap {
        for m in 1..=cap {
            let (x, y) = (vars("x", n), vars("y", m));
            for kp in 1..=n + m {
                let len = n + m - kp;
                let consequent = if len == 0 {
                    "false".to_string()
                } else {
                    let z = vars("z", len);
                    format!(
                        "exists {} . Gen3({}; {}; {})",
                        decl(&z),
                        x.join(", "),
                        y.join(", "),
                        z.join(", ")
                    )
                };
                let mut all = x.clone();
                all.extend(y.iter().cloned());
                b.add(
                    format!("domeq-generator-{n}-{m}-{kp}"),
                    &format!(
                        "{}, {} | Phi({}) /\\ Phi({}) /\\ Domeq[{kp}]({}) |- {consequent}",
                        decl(&x),
                        decl(&y),
                        x.join(", "),
                        y.join(", "),
                        all.join(", ")
                    ),
                );
            }
        }
    }
    b.finish("TE-alt")
}

fn cyclic() -> Corpus {
    let mut b = Builder::new(Signature::groupoid_c());
    groupoid_base(&mut b, true);
    cycles(&mut b);
    b.add("inhabited", "|- exists a:O . a = a");
    b.add(
        "positive-arrow-between",
        "a:O, b:O |- exists f:A . dom(f) = a /\\ cod(f) = b /\\ P(f)",
    );
    b.add(
        "cycle-factorization",
        "f:A | P(f) |- OR n in 0..B . exists alpha:A . dom(alpha) = dom(f) /\\ cod(alpha) = cod(f) /\\ PMin(alpha) /\\ f = alpha o pow(C(dom(f)), n)",
    );
    b.finish("TC")
}

fn ordered(theory: &str) -> Corpus {
    let mut b = Builder::new(Signature::ordered_group());
    b.add("unit-positive", "|- P(1)");
    b.add("positive-product", "a:G, b:G | P(a) /\\ P(b) |- P(a o b)");
    b.add("positive-conjugate", "a:G, c:G | P(a) |- P(inv(c) o a o c)");
    b.add("antisymmetry", "a:G | P(a) /\\ P(inv(a)) |- a = 1");
    let total = matches!(theory, "Obar" | "Onebar" | "TN");
    let apart = matches!(theory, "One" | "Onebar" | "TN");
    if total {
        b.add("totality", "a:G |- P(a) \\/ P(inv(a))");
    }
    if apart {
        b.add("apartness-irreflexive", "x:G | x != x |- false");
    }
    if apart && total {
        b.add("apartness-decidable", "x:G, y:G |- x != y \\/ x = y");
    }
    if theory == "TN" {
        b.add("nontrivial", "|- exists x:G . x != 1");
        b.add(
            "common-power",
            "x:G, y:G | P(x) /\\ P(y) |- OR n in 0..B . OR m in 0..B . exists z:G . P(z) /\\ x = pow(z, n) /\\ y = pow(z, m)",
        );
    }
    b.finish(theory)
}

/// The sequents of a built-in theory, schemes instantiated up to `cap`.
pub fn corpus(theory: &str, cap: usize) -> Result<Corpus, CorpusError> {
    if !(1..=8).contains(&cap) {
        return Err(CorpusError::CapOutOfRange(cap));
    }
    let plain = |sig: Signature, total: bool, t: bool, c: bool| {
        let mut b = Builder::new(sig);
        groupoid_base(&mut b, total);
        if t {
            nontriviality(&mut b, total);
        }
        if c {
            cycles(&mut b);
        }
        b.finish(theory)
    };
    Ok(match theory {
        "G" => plain(Signature::groupoid(), false, false, false),
        "Gbar" => plain(Signature::groupoid(), true, false, false),
        "GT" => plain(Signature::groupoid_t(), false, true, false),
        "GTbar" => plain(Signature::groupoid_t(), true, true, false),
        "GC" => plain(Signature::groupoid_c(), false, false, true),
        "GCbar" => plain(Signature::groupoid_c(), true, false, true),
        "TE" => epicyclic(cap),
        "TE-alt" => epicyclic_alt(cap),
        "TC" => cyclic(),
        "O" | "Obar" | "One" | "Onebar" | "TN" => ordered(theory),
        other => return Err(CorpusError::UnknownTheory(other.to_string())),
    })
}

/// Deliberately broken axioms; each fails in every `X_n`.
pub fn mutations() -> Vec<NamedSequent> {
    [
        ("positive-is-nontrivial", "f:A | P(f) |- T(f)"),
        ("everything-positive", "f:A |- P(f)"),
        ("cycle-is-identity", "a:O |- C(a) = id(a)"),
        ("nontrivial-is-positive", "f:A | T(f) |- P(f)"),
        (
            "positive-difference",
            "f:A, g:A | P(f) /\\ P(g) /\\ dom(f) = dom(g) |- P(g o inv(f))",
        ),
        ("endomorphism-nontrivial", "f:A | dom(f) = cod(f) |- T(f)"),
    ]
    .into_iter()
    .map(|(name, text)| NamedSequent {
        name: name.to_string(),
        sequent: parse_sequent(text).expect("mutation parses"),
    })
    .collect()
}

/// Renders a corpus in `.geo` form.
pub fn to_geo(c: &Corpus) -> String {
    let mut out = String::new();
    writeln!(out, "%signature {}", c.signature.name).unwrap();
    if let Some(t) = &c.theory {
        writeln!(out, "%theory {t}").unwrap();
    }
    for s in &c.sequents {
        out.push('\n');
        writeln!(out, "# {}", s.name).unwrap();
        writeln!(out, "{}", s.sequent).unwrap();
    }
    out
}

/// Parses a `.geo` file, checking every sequent against the declared signature.
pub fn parse_geo(text: &str) -> Result<Corpus, CorpusError> {
    let mut signature = None;
    let mut theory = None;
    let mut sequents = Vec::new();
    let mut stanza: Vec<(usize, &str)> = Vec::new();

    let mut flush =
        |stanza: &mut Vec<(usize, &str)>, sig: &Option<Signature>| -> Result<(), CorpusError> {
            if stanza.is_empty() {
                return Ok(());
            }
            let line = stanza[0].0;
            let name = stanza
                .iter()
                .find_map(|(_, l)| l.trim().strip_prefix('#'))
                .map(|n| n.trim().to_string())
                .unwrap_or_else(|| format!("line-{line}"));
            let body: Vec<(usize, &str)> = stanza
                .iter()
                .copied()
                .filter(|(_, l)| !l.trim_start().starts_with('#'))
                .collect();
            stanza.clear();
            let Some(&(first, _)) = body.first() else {
                return Ok(());
            };
            let text: Vec<&str> = body.iter().map(|(_, l)| *l).collect();
            let sig = sig.as_ref().ok_or(CorpusError::MissingSignature)?;
            let sequent = parse_sequent(&text.join("\n")).map_err(|mut error| {
                if error.line > 0 {
                    error.line += first - 1;
                }
                CorpusError::Parse {
                    name: name.clone(),
                    line,
                    error,
                }
            })?;
            super::engine::check_signature(&sequent, sig).map_err(|e| CorpusError::Signature {
                name: name.clone(),
                line,
                signature: sig.name.to_string(),
                message: e.to_string(),
            })?;
            sequents.push(NamedSequent { name, sequent });
            Ok(())
        };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(directive) = line.strip_prefix('%') {
            flush(&mut stanza, &signature)?;
            let mut parts = directive.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("signature"), Some(name)) => {
                    signature = Some(
                        Signature::by_name(name)
                            .ok_or_else(|| CorpusError::UnknownSignature(name.to_string()))?,
                    );
                }
                (Some("theory"), Some(name)) => theory = Some(name.to_string()),
                _ => return Err(CorpusError::UnknownDirective(line.to_string())),
            }
            continue;
        }
        if line.is_empty() {
            flush(&mut stanza, &signature)?;
        } else {
            stanza.push((i + 1, raw));
        }
    }
    flush(&mut stanza, &signature)?;
    Ok(Corpus {
        theory,
        signature: signature.ok_or(CorpusError::MissingSignature)?,
        sequents,
    })
}
