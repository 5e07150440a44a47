//! Morphisms `X_n → X_m` of the (epi)cyclic category.
//!
//! A morphism is determined by where it sends the generating loop of `X_n`:
//! the image of object 0 (`base`) and the displacement of each generator
//! image (`blocks`). The generator images form a positive loop in `X_m`
//! whose total displacement is `k·m`; `k` is the degree. Degree 1 morphisms
//! are exactly those that send elementary cycles to elementary cycles.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::{CycGroupoid, GArrow, GroupoidError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("blocks sum to {sum}, expected degree {degree} times {m}")]
    SumMismatch { sum: usize, degree: usize, m: usize },
    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("degree must be positive")]
    NonPositiveDegree,
    #[error("morphism {left} cannot be followed by {right}")]
    Mismatch { left: String, right: String },
    #[error("hom count overflows")]
    Overflow,
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycMorphism {
    #[serde(rename = "src")]
    src_n: usize,
    #[serde(rename = "dst")]
    dst_m: usize,
    degree: usize,
    base: usize,
    blocks: Vec<usize>,
}

impl CycMorphism {
    pub fn new(
        n: usize,
        m: usize,
        degree: usize,
        base: usize,
        blocks: Vec<usize>,
    ) -> Result<Self, CategoryError> {
        CycGroupoid::new(n)?;
        let target = CycGroupoid::new(m)?;
        target.arrow(base, 0i64)?;
        if degree == 0 {
            return Err(CategoryError::NonPositiveDegree);
        }
        if blocks.len() != n {
            return Err(CategoryError::BlockCount {
                expected: n,
                got: blocks.len(),
            });
        }
        let sum: usize = blocks.iter().sum();
        if sum != degree * m {
            return Err(CategoryError::SumMismatch { sum, degree, m });
        }
        Ok(Self {
            src_n: n,
            dst_m: m,
            degree,
            base,
            blocks,
        })
    }

    /// Checks the invariants of a deserialized value.
    pub fn validate(self) -> Result<Self, CategoryError> {
        Self::new(self.src_n, self.dst_m, self.degree, self.base, self.blocks)
    }

    pub fn identity(n: usize) -> Result<Self, CategoryError> {
        Self::new(n, n, 1, 0, vec![1; n])
    }

    pub fn src_n(&self) -> usize {
        self.src_n
    }

    pub fn dst_m(&self) -> usize {
        self.dst_m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn is_lambda(&self) -> bool {
        self.degree == 1
    }

    pub fn source(&self) -> CycGroupoid {
        CycGroupoid::new(self.src_n).expect("validated")
    }

    pub fn target(&self) -> CycGroupoid {
        CycGroupoid::new(self.dst_m).expect("validated")
    }

    fn prefix(&self, i: usize) -> usize {
        self.blocks[..i].iter().sum()
    }

    /// Position of the lift `t` (object `t mod n`, turn `⌊t/n⌋`) in the
    /// universal cover of the target, measured from `base`.
    fn lift<I: Scalar>(&self, t: &I) -> I {
        let turns = t.floor_div(self.src_n);
        let r = t.residue(self.src_n);
        turns * I::from_count(self.degree * self.dst_m) + I::from_count(self.prefix(r))
    }

    pub fn apply_object(&self, object: usize) -> usize {
        (self.base + self.prefix(object % self.src_n)) % self.dst_m
    }

    pub fn apply<I: Scalar>(&self, f: &GArrow<I>) -> Result<GArrow<I>, CategoryError> {
        if f.model_n() != self.src_n {
            return Err(GroupoidError::ModelMismatch {
                left: self.src_n,
                right: f.model_n(),
            }
            .into());
        }
        let s = I::from_count(f.src());
        let end = s.clone() + f.disp().clone();
        let disp = self.lift(&end) - self.lift(&s);
        Ok(self.target().arrow(self.apply_object(f.src()), disp)?)
    }

    /// Image of the `i`-th generator `1@i`.
    pub fn generator_image(&self, i: usize) -> GArrow<i64> {
        self.target()
            .arrow(self.apply_object(i), self.blocks[i] as i64)
            .expect("object in range")
    }

    /// The morphism `self ∘ first`.
    pub fn after(&self, first: &CycMorphism) -> Result<CycMorphism, CategoryError> {
        compose_morphisms(self, first)
    }

    /// Degree recovered from the image of the elementary cycle at 0.
    pub fn mod_of(&self) -> usize {
        let cycle = self.source().cycle_of::<i64>(0).expect("object 0");
        let image = self.apply(&cycle).expect("same model");
        let k = image.disp() / self.dst_m as i64;
        debug_assert_eq!(
            image,
            self.target()
                .cycle_of::<i64>(image.dom())
                .unwrap()
                .pow(&k)
                .unwrap()
        );
        k as usize
    }
}

impl std::fmt::Display for CycMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "X_{} -> X_{} deg {} base {} blocks {:?}",
            self.src_n, self.dst_m, self.degree, self.base, self.blocks
        )
    }
}

pub fn make_morphism(
    n: usize,
    m: usize,
    degree: usize,
    base: usize,
    blocks: Vec<usize>,
) -> Result<CycMorphism, CategoryError> {
    CycMorphism::new(n, m, degree, base, blocks)
}

pub fn apply_morphism<I: Scalar>(
    h: &CycMorphism,
    f: &GArrow<I>,
) -> Result<GArrow<I>, CategoryError> {
    h.apply(f)
}

/// `h2 ∘ h1`, obtained by pushing the generator images of `h1` through `h2`.
pub fn compose_morphisms(h2: &CycMorphism, h1: &CycMorphism) -> Result<CycMorphism, CategoryError> {
    if h1.dst_m != h2.src_n {
        return Err(CategoryError::Mismatch {
            left: h1.to_string(),
            right: h2.to_string(),
        });
    }
    let blocks = (0..h1.src_n)
        .map(|i| {
            let image = h2.apply(&h1.generator_image(i))?;
            Ok(*image.disp() as usize)
        })
        .collect::<Result<Vec<_>, CategoryError>>()?;
    let base = h2.apply_object(h1.base);
    CycMorphism::new(h1.src_n, h2.dst_m, h1.degree * h2.degree, base, blocks)
}

pub fn mod_of(h: &CycMorphism) -> usize {
    h.mod_of()
}

fn colex(a: &[usize], b: &[usize]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// All ways to write `total` as an ordered sum of `parts` non-negative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn go(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            go(left - v, parts, cur, out);
            cur.pop();
        }
    }
    if parts > 0 {
        go(total, parts, &mut cur, &mut out);
    }
    out
}

/// Every morphism `X_n → X_m` of degree at most `max_degree`, ordered by
/// base, then blocks colexicographically (which also orders by degree).
pub fn enumerate_homs(n: usize, m: usize, max_degree: usize) -> Vec<CycMorphism> {
    let mut out = Vec::new();
    for base in 0..m {
        let mut here: Vec<CycMorphism> = (1..=max_degree)
            .flat_map(|k| {
                compositions(k * m, n)
                    .into_iter()
                    .map(move |blocks| CycMorphism {
                        src_n: n,
                        dst_m: m,
                        degree: k,
                        base,
                        blocks,
                    })
            })
            .collect();
        here.sort_by(|a, b| colex(&a.blocks, &b.blocks));
        out.extend(here);
    }
    out
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of morphisms `X_n → X_m` of exactly degree `k`: `m·C(km+n−1, n−1)`.
pub fn hom_count(n: usize, m: usize, k: usize) -> Result<u128, CategoryError> {
    let top = (k as u128)
        .checked_mul(m as u128)
        .and_then(|km| km.checked_add(n as u128 - 1))
        .ok_or(CategoryError::Overflow)?;
    binomial(top, n as u128 - 1)
        .and_then(|c| c.checked_mul(m as u128))
        .ok_or(CategoryError::Overflow)
}

/// `(n+m−1)! / ((n−1)!·(m−1)!)`, the number of degree-1 morphisms.
pub fn hom_count_lambda(n: usize, m: usize) -> Result<u128, CategoryError> {
    if n == 0 || m == 0 {
        return Err(GroupoidError::EmptyModel.into());
    }
    let mut acc: u128 = 1;
    // (n+m-1)!/(n-1)! = n·(n+1)⋯(n+m-1), then divide by (m-1)! step by step
    for (i, f) in (n..n + m).enumerate() {
        acc = acc.checked_mul(f as u128).ok_or(CategoryError::Overflow)?;
        if i > 0 {
            acc /= i as u128;
        }
    }
    Ok(acc)
}

/// Outcome of comparing degree-1 morphisms with brute-forced cycle-preserving
/// functors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub n: usize,
    pub m: usize,
    pub enumerated: usize,
    pub brute_force: usize,
    pub pass: bool,
    /// A morphism found on one side only.
    pub counterexample: Option<CycMorphism>,
}

pub fn check_inclusion_full(n: usize, m: usize) -> InclusionReport {
    let mut enumerated = enumerate_homs(n, m, 1);
    let mut brute_force = brute::cycle_preserving_functors(n, m);
    enumerated.sort_by(|a, b| (a.base, &a.blocks).cmp(&(b.base, &b.blocks)));
    brute_force.sort_by(|a, b| (a.base, &a.blocks).cmp(&(b.base, &b.blocks)));
    let counterexample = enumerated
        .iter()
        .find(|h| {
            brute_force
                .binary_search_by(|g| (g.base, &g.blocks).cmp(&(h.base, &h.blocks)))
                .is_err()
        })
        .or_else(|| {
            brute_force.iter().find(|g| {
                enumerated
                    .binary_search_by(|h| (h.base, &h.blocks).cmp(&(g.base, &g.blocks)))
                    .is_err()
            })
        })
        .cloned();
    InclusionReport {
        n,
        m,
        enumerated: enumerated.len(),
        brute_force: brute_force.len(),
        pass: counterexample.is_none() && enumerated.len() == brute_force.len(),
        counterexample,
    }
}

/// Functor search that does not use the block normal form.
///
/// A candidate assigns a base object and an arbitrary integer displacement to
/// each generator (bounded by `window`). Arrows are mapped by composing
/// generator images step by step, and the candidate is kept when the map
/// preserves positivity and non-triviality (and elementary cycles, when asked)
/// on every arrow of a test window.
pub mod brute {
    use super::CycMorphism;

    fn image_disp(images: &[i64], n: usize, src: usize, disp: i64) -> i64 {
        let mut acc = 0;
        let mut pos = src;
        if disp >= 0 {
            for _ in 0..disp {
                acc += images[pos];
                pos = (pos + 1) % n;
            }
        } else {
            for _ in 0..(-disp) {
                pos = (pos + n - 1) % n;
                acc -= images[pos];
            }
        }
        acc
    }

    fn accepts(images: &[i64], n: usize, m: usize, keep_cycles: bool) -> bool {
        let m = m as i64;
        for src in 0..n {
            for d in -(2 * n as i64)..=(2 * n as i64) {
                let img = image_disp(images, n, src, d);
                if d >= 0 && img < 0 {
                    return false;
                }
                if d != 0 && d % n as i64 == 0 && (img == 0 || img % m != 0) {
                    return false;
                }
                if keep_cycles && d == n as i64 && img != m {
                    return false;
                }
            }
        }
        true
    }

    fn search(n: usize, m: usize, window: i64, keep_cycles: bool) -> Vec<CycMorphism> {
        let mut out = Vec::new();
        let mut images = vec![-window; n];
        loop {
            if accepts(&images, n, m, keep_cycles) {
                let total: i64 = images.iter().sum();
                let degree = (total / m as i64) as usize;
                let blocks = images.iter().map(|&d| d as usize).collect();
                for base in 0..m {
                    out.push(CycMorphism {
                        src_n: n,
                        dst_m: m,
                        degree,
                        base,
                        blocks: Vec::clone(&blocks),
                    });
                }
            }
            // odometer over [-window, window]^n
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                if images[i] < window {
                    images[i] += 1;
                    break;
                }
                images[i] = -window;
                i += 1;
            }
        }
    }

    /// Functors that preserve positivity, non-triviality and elementary cycles.
    pub fn cycle_preserving_functors(n: usize, m: usize) -> Vec<CycMorphism> {
        search(n, m, m as i64, true)
    }

    /// Functors preserving positivity and non-triviality whose generator
    /// images have displacement at most `max_degree·m`.
    pub fn positive_functors(n: usize, m: usize, max_degree: usize) -> Vec<CycMorphism> {
        search(n, m, (max_degree * m) as i64, false)
            .into_iter()
            .filter(|h| h.degree <= max_degree)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow(n: usize, disp: i64, src: usize) -> GArrow<i64> {
        CycGroupoid::new(n).unwrap().arrow(src, disp).unwrap()
    }

    #[test]
    fn make_morphism_examples() {
        assert!(make_morphism(3, 3, 1, 0, vec![1, 1, 1]).is_ok());
        assert!(make_morphism(2, 3, 1, 2, vec![0, 3]).is_ok());
        assert!(make_morphism(2, 1, 3, 0, vec![2, 1]).is_ok());
        assert!(matches!(
            make_morphism(2, 3, 1, 0, vec![1, 1]),
            Err(CategoryError::SumMismatch { .. })
        ));
        assert_eq!(
            make_morphism(2, 3, 0, 0, vec![0, 0]),
            Err(CategoryError::NonPositiveDegree)
        );
    }

    #[test]
    fn apply_examples() {
        let h = make_morphism(2, 1, 3, 0, vec![2, 1]).unwrap();
        assert_eq!(h.apply(&arrow(2, 2, 0)).unwrap(), arrow(1, 3, 0));
        assert_eq!(h.mod_of(), 3);
        let h = make_morphism(2, 3, 1, 2, vec![0, 3]).unwrap();
        assert_eq!(h.apply(&arrow(2, 1, 0)).unwrap(), arrow(3, 0, 2));
        assert_eq!(h.apply(&arrow(2, -1, 0)).unwrap(), arrow(3, -3, 2));
        let id = CycMorphism::identity(4).unwrap();
        for f in CycGroupoid::new(4).unwrap().enumerate_arrows::<i64>(9) {
            assert_eq!(id.apply(&f).unwrap(), f);
        }
        assert!(id.apply(&arrow(3, 1, 0)).is_err());
    }

    #[test]
    fn compose_examples() {
        let d2 = make_morphism(1, 1, 2, 0, vec![2]).unwrap();
        let d3 = make_morphism(1, 1, 3, 0, vec![3]).unwrap();
        assert_eq!(
            d2.after(&d3).unwrap(),
            make_morphism(1, 1, 6, 0, vec![6]).unwrap()
        );
        let h = make_morphism(2, 3, 2, 1, vec![4, 2]).unwrap();
        let id2 = CycMorphism::identity(2).unwrap();
        let id3 = CycMorphism::identity(3).unwrap();
        assert_eq!(h.after(&id2).unwrap(), h);
        assert_eq!(id3.after(&h).unwrap(), h);
        assert!(h.after(&id3).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_homs(2, 2, 1).len(), 6);
        assert_eq!(enumerate_homs(1, 3, 1).len(), 3);
        let homs = enumerate_homs(1, 1, 3);
        let degrees: Vec<usize> = homs.iter().map(|h| h.degree).collect();
        assert_eq!(degrees, vec![1, 2, 3]);
    }

    #[test]
    fn enumeration_order_is_base_then_colex() {
        let homs = enumerate_homs(2, 2, 2);
        for w in homs.windows(2) {
            let ord = w[0]
                .base
                .cmp(&w[1].base)
                .then_with(|| colex(&w[0].blocks, &w[1].blocks));
            assert_eq!(ord, Ordering::Less);
        }
        assert_eq!(homs[0].blocks, vec![2, 0]);
        assert_eq!(homs[1].blocks, vec![4, 0]);
        assert_eq!(homs[2].blocks, vec![1, 1]);
    }

    #[test]
    fn counts_match_closed_forms() {
        assert_eq!(hom_count_lambda(2, 2).unwrap(), 6);
        assert_eq!(hom_count_lambda(1, 1).unwrap(), 1);
        assert_eq!(hom_count_lambda(3, 1).unwrap(), 3);
        for n in 1..=5 {
            for m in 1..=5 {
                for k in 1..=3 {
                    let exact = enumerate_homs(n, m, k).len() - enumerate_homs(n, m, k - 1).len();
                    assert_eq!(hom_count(n, m, k).unwrap(), exact as u128);
                }
            }
        }
        assert_eq!(hom_count_lambda(200, 200), Err(CategoryError::Overflow));
    }

    #[test]
    fn inclusion_examples() {
        for (n, m) in [(2, 2), (1, 4), (3, 2)] {
            let report = check_inclusion_full(n, m);
            assert!(report.pass, "{report:?}");
            assert_eq!(report.enumerated, report.brute_force);
        }
        assert_eq!(check_inclusion_full(2, 2).enumerated, 6);
    }

    #[test]
    fn positive_functors_match_enumeration() {
        for (n, m) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let mut brute = brute::positive_functors(n, m, 2);
            let mut listed = enumerate_homs(n, m, 2);
            brute.sort_by(|a, b| (a.base, &a.blocks).cmp(&(b.base, &b.blocks)));
            listed.sort_by(|a, b| (a.base, &a.blocks).cmp(&(b.base, &b.blocks)));
            assert_eq!(brute, listed);
        }
    }

    #[test]
    fn functor_laws_on_window() {
        for h in enumerate_homs(3, 2, 2) {
            let src = h.source();
            let arrows = src.enumerate_arrows::<i64>(6);
            for f in &arrows {
                let hf = h.apply(f).unwrap();
                assert_eq!(hf.dom(), h.apply_object(f.dom()));
                assert_eq!(hf.cod(), h.apply_object(f.cod()));
                assert_eq!(h.apply(&f.inverse()).unwrap(), hf.inverse());
                if f.is_positive() {
                    assert!(hf.is_positive());
                }
                if f.is_nontrivial() {
                    assert!(hf.is_nontrivial());
                }
                if f.is_cycle() {
                    assert_eq!(hf.is_cycle(), h.is_lambda());
                }
                for g in arrows.iter().filter(|g| g.dom() == f.cod()) {
                    let gf = g.compose(f).unwrap();
                    let hg = h.apply(g).unwrap();
                    assert_eq!(h.apply(&gf).unwrap(), hg.compose(&hf).unwrap());
                }
            }
        }
    }

    #[test]
    fn injective_on_hom_sets() {
        for h in enumerate_homs(3, 2, 2) {
            let arrows = h.source().enumerate_arrows::<i64>(9);
            for f in &arrows {
                for g in &arrows {
                    if f.dom() == g.dom() && f.cod() == g.cod() && f != g {
                        assert_ne!(h.apply(f).unwrap(), h.apply(g).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let h = make_morphism(2, 3, 1, 2, vec![0, 3]).unwrap();
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"src": 2, "dst": 3, "degree": 1, "base": 2, "blocks": [0, 3]})
        );
        let back: CycMorphism = serde_json::from_value(v).unwrap();
        assert_eq!(back.validate().unwrap(), h);
        let bad: CycMorphism = serde_json::from_value(
            serde_json::json!({"src": 2, "dst": 3, "degree": 1, "base": 2, "blocks": [0, 2]}),
        )
        .unwrap();
        assert!(bad.validate().is_err());
    }
}
