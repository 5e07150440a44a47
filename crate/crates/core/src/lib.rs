//! Finite models of the cyclic and epicyclic categories.
//!
//! * [`groupoid`]: the oriented groupoids `X_n` and their arrows.
//! * [`loops`]: loops, canonical factorization, generating loops.
//! * [`category`]: homomorphisms `X_n → X_m`, hom counts, the degree.
//! * [`logic`]: a sequent language with a bounded model checker and the
//!   axiom corpora.
//! * [`qgroups`]: ordered subgroups of `Q` and the algorithms behind them.
//!
//! Integer-valued data is generic over [`scalar::Scalar`]; the aliases below
//! fix the two usual choices.

pub mod category;
pub mod export;
pub mod groupoid;
pub mod logic;
pub mod loops;
pub mod qgroups;
pub mod scalar;

use num_bigint::BigInt;
use num_rational::Ratio;

pub use scalar::Scalar;

pub type Arrow = groupoid::GArrow<i64>;
pub type BigArrow = groupoid::GArrow<BigInt>;
pub type LoopI64 = loops::Loop<i64>;
pub type BigLoop = loops::Loop<BigInt>;
pub type Rational = Ratio<i64>;
pub type BigRational = Ratio<BigInt>;
pub type Subgroup = qgroups::RationalSubgroup<i64>;
pub type BigSubgroup = qgroups::RationalSubgroup<BigInt>;
