//! JSON encodings of the model types and DOT pictures of `X_n`.
//!
//! Scalars are written as JSON numbers when they fit in an `i64` and as
//! decimal strings otherwise.

use std::fmt::Write;

use serde::ser::{SerializeMap, SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::groupoid::{CycGroupoid, GArrow};
use crate::loops::{Block, Factorization, GenWitness, Loop, LoopClass, SuccessiveTerm};
use crate::scalar::Scalar;

struct Num<'a, I>(&'a I);

impl<I: Scalar> Serialize for Num<'_, I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl Serialize for CycGroupoid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycGroupoid", 1)?;
        st.serialize_field("n", &self.n())?;
        st.end()
    }
}

impl<I: Scalar> Serialize for GArrow<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GArrow", 2)?;
        st.serialize_field("src", &self.src())?;
        st.serialize_field("disp", &Num(self.disp()))?;
        st.end()
    }
}

impl<I: Scalar> Serialize for Loop<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for f in self.arrows() {
            seq.serialize_element(f)?;
        }
        seq.end()
    }
}

impl<I: Scalar> Serialize for Block<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Block", 3)?;
        st.serialize_field("start", &self.start)?;
        st.serialize_field("len", &self.len)?;
        st.serialize_field("winding", &Num(&self.winding))?;
        st.end()
    }
}

impl<I: Scalar> Serialize for GenWitness<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GenWitness", 2)?;
        st.serialize_field("blocks", &self.blocks)?;
        st.serialize_field("rotation", &self.rotation)?;
        st.end()
    }
}

impl<I: Scalar> Serialize for SuccessiveTerm<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SuccessiveTerm", 3)?;
        st.serialize_field("start", &self.start)?;
        st.serialize_field("len", &self.len)?;
        st.serialize_field("winding", &Num(&self.winding))?;
        st.end()
    }
}

impl<I: Scalar> Serialize for Factorization<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("base_path_length", &self.base_path_length)?;
        map.serialize_entry("winding", &Num(&self.winding))?;
        map.end()
    }
}

impl<I: Scalar> Serialize for LoopClass<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("is_loop", &self.is_loop)?;
        map.serialize_entry("is_positive", &self.is_positive)?;
        map.serialize_entry("is_phi", &self.is_phi)?;
        map.serialize_entry("is_psi", &self.is_psi)?;
        map.serialize_entry("length", &self.length)?;
        map.serialize_entry("total_disp", &Num(&self.total_disp))?;
        map.end()
    }
}

const PALETTE: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];

/// `X_n` as a DOT digraph: one node per object, one edge per generator
/// `ξ_i : a_{i-1} → a_i`, and the arrows of each named loop drawn in their
/// own colour.
pub fn model_dot<I: Scalar>(model: CycGroupoid, loops: &[(&str, &Loop<I>)]) -> String {
    let n = model.n();
    let mut out = String::new();
    writeln!(out, "digraph X_{n} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for a in 0..n {
        writeln!(out, "  a{a};").unwrap();
    }
    for i in 0..n {
        writeln!(out, "  a{i} -> a{} [label=\"xi_{}\"];", (i + 1) % n, i + 1).unwrap();
    }
    for (c, (name, l)) in loops.iter().enumerate() {
        let colour = PALETTE[c % PALETTE.len()];
        for (t, f) in l.arrows().iter().enumerate() {
            writeln!(
                out,
                "  a{} -> a{} [label=\"{name}_{} = {f}\", color={colour}, fontcolor={colour}];",
                f.dom(),
                f.cod(),
                t + 1
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::CycMorphism;

    #[test]
    fn arrow_json_shape() {
        let x = CycGroupoid::new(3).unwrap();
        let f = x.arrow(2, -4i64).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"src":2,"disp":-4}"#);
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"n":3}"#);
    }

    #[test]
    fn big_displacements_become_strings() {
        use num_bigint::BigInt;
        let x = CycGroupoid::new(2).unwrap();
        let huge: BigInt = BigInt::from(i64::MAX) * 4;
        let f = x.arrow(0, huge.clone()).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["disp"], serde_json::Value::String(huge.to_string()));
    }

    #[test]
    fn witness_json_shape() {
        let w = GenWitness {
            blocks: vec![Block {
                start: 1,
                len: 2,
                winding: 0i64,
            }],
            rotation: 1,
        };
        assert_eq!(
            serde_json::to_string(&w).unwrap(),
            r#"{"blocks":[{"start":1,"len":2,"winding":0}],"rotation":1}"#
        );
    }

    #[test]
    fn x3_dot_has_three_nodes_and_generators() {
        let dot = model_dot::<i64>(CycGroupoid::new(3).unwrap(), &[]);
        let nodes = dot
            .lines()
            .filter(|l| l.starts_with("  a") && l.ends_with(';') && !l.contains("->"));
        assert_eq!(nodes.count(), 3);
        assert_eq!(dot.matches("label=\"xi_").count(), 3);
        assert!(dot.contains("a2 -> a0 [label=\"xi_3\"]"));
    }

    #[test]
    fn identity_morphism_json() {
        let id = CycMorphism::identity(2).unwrap();
        let v = serde_json::to_value(&id).unwrap();
        assert_eq!(v["degree"], 1);
        assert_eq!(v["src"], 2);
        assert_eq!(v["dst"], 2);
    }
}
