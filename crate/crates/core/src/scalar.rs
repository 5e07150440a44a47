//! Integer scalars used for displacements, windings and rational coordinates.
//!
//! Everything that carries an unbounded integer (an arrow's displacement, a
//! loop winding, the numerator of a rational) is generic over [`Scalar`].
//! `i64` is the everyday choice; `BigInt` removes overflow from the picture at
//! the price of allocation.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// A signed, exact integer type.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + Hash
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Converts a small non-negative count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    /// Residue in `0..n` (floor modulus, never negative).
    fn residue(&self, n: usize) -> usize {
        self.mod_floor(&Self::from_count(n))
            .to_usize()
            .expect("residue below modulus")
    }

    /// Floor quotient by a positive count.
    fn floor_div(&self, n: usize) -> Self {
        self.div_floor(&Self::from_count(n))
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + Hash
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn residue_is_never_negative() {
        assert_eq!((-7i64).residue(5), 3);
        assert_eq!(7i64.residue(5), 2);
        assert_eq!(0i64.residue(1), 0);
        assert_eq!(BigInt::from(-1).residue(4), 3);
    }

    #[test]
    fn floor_div_rounds_down() {
        assert_eq!((-7i64).floor_div(5), -2);
        assert_eq!(7i64.floor_div(5), 1);
        assert_eq!(BigInt::from(-5).floor_div(5), BigInt::from(-1));
    }
}
