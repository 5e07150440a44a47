//! Geometric sequents: syntax, parsing, macro expansion and bounded checking
//! in finite-window structures.

pub mod corpus;
pub mod engine;
pub mod macros;
pub mod parser;
pub mod structure;
pub mod syntax;

pub use corpus::{
    corpus, mutations, parse_geo, to_geo, Corpus, CorpusError, NamedSequent, DEFAULT_SCHEME_CAP,
    THEORIES,
};
pub use engine::{
    check, evaluate, Bounds, CheckError, CheckOptions, CheckOutcome, Counterexample, SequentReport,
    Tri, Valuation, Verdict,
};
pub use macros::{expand_macro, macro_context};
pub use parser::{parse, parse_formula, parse_sequent, ParseError, Parsed};
pub use structure::{GroupoidStructure, RationalStructure, Structure, Value};
pub use syntax::{Formula, Sequent, Signature, Sort};
