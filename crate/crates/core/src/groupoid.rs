//! The oriented groupoids `X_n = Z ⋊ {0, …, n−1}`.
//!
//! Objects are the indices `0..n`; the integer `1` acts by the cyclic shift
//! `i ↦ i + 1 (mod n)`. An arrow is written `m.x_i` and stored as a source
//! object plus an integer displacement, so its codomain is always derived:
//! `cod = (src + disp) mod n`.
//!
//! Composition follows the usual categorical order: `g.compose(&f)` is
//! `g ∘ f`, i.e. `f` is applied first.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    #[error("a model needs at least one object")]
    EmptyModel,
    #[error("object {object} is not in X_{n}")]
    ObjectOutOfRange { object: usize, n: usize },
    #[error("arrows live in different models (X_{left} vs X_{right})")]
    ModelMismatch { left: usize, right: usize },
    #[error(
        "cannot compose: codomain {cod} of the first arrow is not the domain {dom} of the second"
    )]
    NonComposable { cod: usize, dom: usize },
    #[error("the map is not a bijection on 0..{size}")]
    NotABijection { size: usize },
    #[error("the permutation has {orbits} orbits; a transitive action is required")]
    NotTransitive { orbits: usize },
}

/// The model `X_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycGroupoid {
    n: usize,
}

/// An arrow `disp.x_src` of `X_model_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GArrow<I> {
    model_n: usize,
    src: usize,
    disp: I,
}

/// Flags describing how an arrow sits in its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ArrowClass {
    pub is_identity: bool,
    /// `P`
    pub is_positive: bool,
    pub is_endo: bool,
    /// `T`: a non-identical endomorphism.
    pub is_nontrivial: bool,
    /// Equal to the elementary cycle `C_dom`.
    pub is_cycle: bool,
}

/// One orbit of a permutation, presented as a model `X_len`.
///
/// `labels[t]` is the original element sitting at object `t`; following the
/// permutation from `labels[t]` lands on `labels[t + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub model: CycGroupoid,
    pub labels: Vec<usize>,
}

impl CycGroupoid {
    pub fn new(n: usize) -> Result<Self, GroupoidError> {
        if n == 0 {
            return Err(GroupoidError::EmptyModel);
        }
        Ok(Self { n })
    }

    /// Number of objects.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn objects(&self) -> Range<usize> {
        0..self.n
    }

    fn check_object(&self, object: usize) -> Result<(), GroupoidError> {
        if object < self.n {
            Ok(())
        } else {
            Err(GroupoidError::ObjectOutOfRange { object, n: self.n })
        }
    }

    pub fn arrow<I: Scalar>(&self, src: usize, disp: I) -> Result<GArrow<I>, GroupoidError> {
        self.check_object(src)?;
        Ok(GArrow {
            model_n: self.n,
            src,
            disp,
        })
    }

    pub fn identity<I: Scalar>(&self, object: usize) -> Result<GArrow<I>, GroupoidError> {
        self.arrow(object, I::zero())
    }

    /// The generator `1.x_i : x_i → x_{i+1}`.
    pub fn generator<I: Scalar>(&self, object: usize) -> Result<GArrow<I>, GroupoidError> {
        self.arrow(object, I::one())
    }

    /// The elementary cycle `C_a = n.x_a`.
    pub fn cycle_of<I: Scalar>(&self, object: usize) -> Result<GArrow<I>, GroupoidError> {
        self.arrow(object, I::from_count(self.n))
    }

    /// The generating loop `(1.x_0, …, 1.x_{n−1})`.
    pub fn generating_loop<I: Scalar>(&self) -> Vec<GArrow<I>> {
        self.objects()
            .map(|i| GArrow {
                model_n: self.n,
                src: i,
                disp: I::one(),
            })
            .collect()
    }

    /// All arrows with `|disp| ≤ bound`, ordered by source then displacement.
    pub fn enumerate_arrows<I: Scalar>(&self, bound: usize) -> Vec<GArrow<I>> {
        let mut out = Vec::with_capacity(self.n * (2 * bound + 1));
        for src in self.objects() {
            out.extend(self.arrows_from::<I>(src, bound));
        }
        out
    }

    /// Arrows out of `src` with `|disp| ≤ bound`, by ascending displacement.
    pub fn arrows_from<I: Scalar>(
        &self,
        src: usize,
        bound: usize,
    ) -> impl Iterator<Item = GArrow<I>> + '_ {
        let b = bound as i128;
        (-b..=b).map(move |d| GArrow {
            model_n: self.n,
            src,
            disp: I::from_i128(d).expect("bound fits in scalar"),
        })
    }

    /// Builds models from a permutation of `0..perm.len()`.
    ///
    /// Orbits are listed by their smallest element and each is walked from
    /// that element. With `require_transitive` a permutation with more than one
    /// orbit is rejected.
    pub fn from_permutation(
        perm: &[usize],
        require_transitive: bool,
    ) -> Result<Vec<Orbit>, GroupoidError> {
        let size = perm.len();
        if size == 0 {
            return Err(GroupoidError::EmptyModel);
        }
        let mut hit = vec![false; size];
        for &image in perm {
            if image >= size || hit[image] {
                return Err(GroupoidError::NotABijection { size });
            }
            hit[image] = true;
        }

        let mut seen = vec![false; size];
        let mut orbits = Vec::new();
        for start in 0..size {
            if seen[start] {
                continue;
            }
            let mut labels = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                labels.push(cur);
                cur = perm[cur];
            }
            orbits.push(Orbit {
                model: CycGroupoid { n: labels.len() },
                labels,
            });
        }
        if require_transitive && orbits.len() > 1 {
            return Err(GroupoidError::NotTransitive {
                orbits: orbits.len(),
            });
        }
        Ok(orbits)
    }
}

impl fmt::Display for CycGroupoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X_{}", self.n)
    }
}

impl<I: Scalar> GArrow<I> {
    pub fn model(&self) -> CycGroupoid {
        CycGroupoid { n: self.model_n }
    }

    pub fn model_n(&self) -> usize {
        self.model_n
    }

    pub fn src(&self) -> usize {
        self.src
    }

    pub fn disp(&self) -> &I {
        &self.disp
    }

    pub fn dom(&self) -> usize {
        self.src
    }

    pub fn cod(&self) -> usize {
        (I::from_count(self.src) + self.disp.clone()).residue(self.model_n)
    }

    fn same_model(&self, other: &Self) -> Result<(), GroupoidError> {
        if self.model_n == other.model_n {
            Ok(())
        } else {
            Err(GroupoidError::ModelMismatch {
                left: self.model_n,
                right: other.model_n,
            })
        }
    }

    /// `self ∘ f`: apply `f`, then `self`.
    pub fn compose(&self, f: &GArrow<I>) -> Result<GArrow<I>, GroupoidError> {
        self.same_model(f)?;
        let cod = f.cod();
        if cod != self.src {
            return Err(GroupoidError::NonComposable { cod, dom: self.src });
        }
        Ok(GArrow {
            model_n: self.model_n,
            src: f.src,
            disp: f.disp.clone() + self.disp.clone(),
        })
    }

    pub fn inverse(&self) -> GArrow<I> {
        GArrow {
            model_n: self.model_n,
            src: self.cod(),
            disp: -self.disp.clone(),
        }
    }

    /// `f^k`. Defined for every `k` on endomorphisms; otherwise only for
    /// `k ∈ {−1, 0, 1}`.
    pub fn pow(&self, k: &I) -> Option<GArrow<I>> {
        if k.is_zero() {
            return Some(GArrow {
                model_n: self.model_n,
                src: self.src,
                disp: I::zero(),
            });
        }
        if k.is_one() {
            return Some(self.clone());
        }
        if *k == -I::one() {
            return Some(self.inverse());
        }
        if !self.is_endo() {
            return None;
        }
        Some(GArrow {
            model_n: self.model_n,
            src: self.src,
            disp: self.disp.clone() * k.clone(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.disp.is_zero()
    }

    /// `P`
    pub fn is_positive(&self) -> bool {
        !self.disp.is_negative()
    }

    pub fn is_endo(&self) -> bool {
        self.disp.residue(self.model_n) == 0
    }

    /// `T`
    pub fn is_nontrivial(&self) -> bool {
        !self.disp.is_zero() && self.is_endo()
    }

    pub fn is_cycle(&self) -> bool {
        self.disp == I::from_count(self.model_n)
    }

    pub fn classify(&self) -> ArrowClass {
        ArrowClass {
            is_identity: self.is_identity(),
            is_positive: self.is_positive(),
            is_endo: self.is_endo(),
            is_nontrivial: self.is_nontrivial(),
            is_cycle: self.is_cycle(),
        }
    }

    /// Re-expresses the arrow with another scalar type.
    pub fn cast<J: Scalar>(&self) -> Option<GArrow<J>> {
        Some(GArrow {
            model_n: self.model_n,
            src: self.src,
            disp: J::from_i128(self.disp.to_i128()?)?,
        })
    }
}

impl<I: Scalar> fmt::Display for GArrow<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.disp, self.src)
    }
}

/// Parses the `disp@src` literal used on the command line.
pub fn parse_arrow(model: CycGroupoid, text: &str) -> Result<GArrow<i64>, String> {
    let (disp, src) = text
        .trim()
        .split_once('@')
        .ok_or_else(|| format!("expected disp@src, got {text:?}"))?;
    let disp: i64 = disp
        .trim()
        .parse()
        .map_err(|e| format!("bad displacement in {text:?}: {e}"))?;
    let src: usize = src
        .trim()
        .parse()
        .map_err(|e| format!("bad source in {text:?}: {e}"))?;
    model.arrow(src, disp).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize) -> CycGroupoid {
        CycGroupoid::new(n).unwrap()
    }

    fn a(n: usize, disp: i64, src: usize) -> GArrow<i64> {
        x(n).arrow(src, disp).unwrap()
    }

    #[test]
    fn empty_model_rejected() {
        assert_eq!(CycGroupoid::new(0), Err(GroupoidError::EmptyModel));
        assert!(x(3).arrow(3, 1i64).is_err());
    }

    #[test]
    fn permutation_single_cycle() {
        let orbits = CycGroupoid::from_permutation(&[1, 2, 0], true).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].model.n(), 3);
        assert_eq!(orbits[0].labels, vec![0, 1, 2]);
    }

    #[test]
    fn permutation_relabels_orbit_walk() {
        // 0 -> 2 -> 1 -> 0
        let orbits = CycGroupoid::from_permutation(&[2, 0, 1], true).unwrap();
        assert_eq!(orbits[0].labels, vec![0, 2, 1]);
    }

    #[test]
    fn permutation_not_transitive() {
        assert_eq!(
            CycGroupoid::from_permutation(&[1, 0, 2], true),
            Err(GroupoidError::NotTransitive { orbits: 2 })
        );
        let orbits = CycGroupoid::from_permutation(&[1, 0, 2], false).unwrap();
        let sizes: Vec<usize> = orbits.iter().map(|o| o.model.n()).collect();
        assert_eq!(sizes, vec![2, 1]);
        assert_eq!(orbits[1].labels, vec![2]);
    }

    #[test]
    fn permutation_not_bijective() {
        assert!(matches!(
            CycGroupoid::from_permutation(&[0, 0, 1], false),
            Err(GroupoidError::NotABijection { .. })
        ));
        assert!(matches!(
            CycGroupoid::from_permutation(&[0, 5], false),
            Err(GroupoidError::NotABijection { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let g = a(3, 4, 2);
        let f = a(3, 2, 0);
        assert_eq!(g.compose(&f).unwrap(), a(3, 6, 0));

        let f = a(5, 7, 1);
        let id = x(5).identity::<i64>(f.cod()).unwrap();
        assert_eq!(id.compose(&f).unwrap(), f);
        assert_eq!(f.inverse().compose(&f).unwrap(), a(5, 0, 1));
    }

    #[test]
    fn compose_rejects_mismatch() {
        assert_eq!(
            a(3, 1, 0).compose(&a(3, 1, 0)),
            Err(GroupoidError::NonComposable { cod: 1, dom: 0 })
        );
        assert!(matches!(
            a(3, 0, 0).compose(&a(4, 0, 0)),
            Err(GroupoidError::ModelMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(a(5, 7, 1).inverse(), a(5, -7, 3));
        assert_eq!(a(5, 0, 2).inverse(), a(5, 0, 2));
        assert_eq!(a(5, 3, 0).inverse().inverse(), a(5, 3, 0));
    }

    #[test]
    fn classify_examples() {
        let c = a(4, 4, 1).classify();
        assert!(c.is_endo && c.is_positive && c.is_nontrivial && c.is_cycle);
        assert!(!c.is_identity);

        let c = a(4, 0, 0).classify();
        assert!(c.is_identity && c.is_positive && c.is_endo);
        assert!(!c.is_nontrivial && !c.is_cycle);

        let c = a(4, 2, 1).classify();
        assert_eq!(
            c,
            ArrowClass {
                is_positive: true,
                ..ArrowClass::default()
            }
        );
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(x(2).enumerate_arrows::<i64>(1).len(), 6);
        let ids = x(3).enumerate_arrows::<i64>(0);
        assert_eq!(ids.len(), 3);
        assert!(ids.iter().all(|f| f.is_identity()));
        let all = x(1).enumerate_arrows::<i64>(5);
        assert_eq!(all.len(), 11);
        assert_eq!(
            all.iter()
                .filter(|f| f.is_positive() && f.is_nontrivial())
                .count(),
            5
        );
        // deterministic order: src, then disp
        let arrows = x(2).enumerate_arrows::<i64>(1);
        let keys: Vec<(usize, i64)> = arrows.iter().map(|f| (f.src(), *f.disp())).collect();
        assert_eq!(keys, vec![(0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)]);
    }

    #[test]
    fn pow_on_endo_and_non_endo() {
        let c = a(3, 3, 1);
        assert_eq!(c.pow(&-2), Some(a(3, -6, 1)));
        let f = a(3, 1, 0);
        assert_eq!(f.pow(&2), None);
        assert_eq!(f.pow(&-1), Some(f.inverse()));
        assert_eq!(f.pow(&0), Some(a(3, 0, 0)));
    }

    #[test]
    fn arrow_literal_round_trip() {
        let f = parse_arrow(x(4), "-3@2").unwrap();
        assert_eq!(f, a(4, -3, 2));
        assert_eq!(f.to_string(), "-3@2");
        assert!(parse_arrow(x(4), "3@4").is_err());
        assert!(parse_arrow(x(4), "3").is_err());
    }

    fn window(n: usize, bound: usize) -> Vec<GArrow<i64>> {
        x(n).enumerate_arrows(bound)
    }

    #[test]
    fn associativity_on_window() {
        for n in 1..=6 {
            let arrows = window(n, 3 * n);
            for f in &arrows {
                for g in arrows.iter().filter(|g| g.src() == f.cod()) {
                    let gf = g.compose(f).unwrap();
                    for h in arrows.iter().filter(|h| h.src() == g.cod()) {
                        let left = h.compose(&gf).unwrap();
                        let right = h.compose(g).unwrap().compose(f).unwrap();
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn oriented_groupoid_axioms_on_window() {
        for n in 1..=6 {
            let arrows = window(n, 3 * n);
            for f in &arrows {
                let inv = f.inverse();
                // (i), (ii)
                assert!(f.compose(&inv).unwrap().is_identity());
                assert_eq!(f.compose(&inv).unwrap().src(), f.cod());
                assert!(inv.compose(f).unwrap().is_identity());
                assert_eq!(inv.compose(f).unwrap().src(), f.dom());
                // (v), (vi)
                if f.is_positive() && inv.is_positive() {
                    assert!(f.is_identity());
                }
                assert!(f.is_positive() || inv.is_positive());
                // (vii), (viii), (xi)
                if f.is_nontrivial() {
                    assert_eq!(f.dom(), f.cod());
                    for k in 1..=4i64 {
                        assert!(f.pow(&k).unwrap().is_nontrivial());
                        assert!(f.pow(&-k).unwrap().is_nontrivial());
                    }
                }
                if f.dom() == f.cod() {
                    assert!(f.is_identity() || f.is_nontrivial());
                }
                for g in arrows.iter().filter(|g| g.src() == f.cod()) {
                    let gf = g.compose(f).unwrap();
                    // (iv)
                    if f.is_positive() && g.is_positive() {
                        assert!(gf.is_positive());
                    }
                    // (x)
                    if let Ok(fg) = f.compose(g) {
                        if gf.is_nontrivial() {
                            assert!(fg.is_nontrivial());
                        }
                    }
                }
            }
            for obj in x(n).objects() {
                assert!(!x(n).identity::<i64>(obj).unwrap().is_nontrivial());
            }
        }
    }

    #[test]
    fn cycle_axioms_on_window() {
        for n in 1..=6 {
            let model = x(n);
            let arrows = window(n, 3 * n);
            for obj in model.objects() {
                let c = model.cycle_of::<i64>(obj).unwrap();
                assert_eq!((c.dom(), c.cod()), (obj, obj));
                assert!(c.is_positive());
                assert_ne!(c, model.identity(obj).unwrap());
            }
            for f in &arrows {
                for g in arrows.iter().filter(|g| g.src() == f.cod()) {
                    let gf = g.compose(f).unwrap();
                    if gf == model.cycle_of(f.dom()).unwrap() {
                        let fg = f.compose(g).unwrap();
                        assert_eq!(fg, model.cycle_of(g.dom()).unwrap());
                    }
                }
            }
        }
    }
}
