//! Loops in `X_n`, canonical factorization, and generating loops.
//!
//! Indices handed across the public API are 1-based, matching how loops are
//! usually written down (`x_1, …, x_n`); internally everything is 0-based.
//!
//! A [`GenWitness`] certifies that a loop `z` generates a target loop: each
//! target arrow is a block of consecutive arrows of `z` followed by a
//! non-negative power of the loop composite based at the block start,
//!
//! ```text
//! x_i = z_{s+len-1} ∘ … ∘ z_s ∘ l_s(z)^p
//! ```
//!
//! and consecutive target arrows use consecutive blocks (all index arithmetic
//! modulo `k = |z|`, wrapping around from the last target arrow to the first).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::groupoid::{CycGroupoid, GArrow, GroupoidError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("a loop needs at least one arrow")]
    Empty,
    #[error("arrows come from different models")]
    MixedModels,
    #[error("arrows {at} and {next} are not composable in sequence")]
    NotALoop { at: usize, next: usize },
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("arrow {0} is not positive")]
    NotPositive(String),
    #[error("first target starts at object {target} but the generator starts at {generator}")]
    BaseMismatch { target: usize, generator: usize },
    #[error("the generator does not generate target {target}")]
    NoWitness { target: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A non-empty sequence of arrows with `cod(x_t) = dom(x_{t+1})` and
/// `cod(x_last) = dom(x_1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Loop<I> {
    arrows: Vec<GArrow<I>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopClass<I> {
    pub is_loop: bool,
    /// Every arrow is positive.
    pub is_positive: bool,
    /// Positive non-trivial loop (`Φ̃`).
    pub is_phi: bool,
    /// Elementary cycle (`Ψ̃`).
    pub is_psi: bool,
    pub length: usize,
    pub total_disp: I,
}

/// `disp = base_path_length + winding · n`, with `0 ≤ base_path_length < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization<I> {
    pub base_path_length: usize,
    pub winding: I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenMode {
    /// Generators and targets are positive non-trivial loops.
    Epicyclic,
    /// Generators and targets are elementary cycles.
    Cyclic,
}

/// One target arrow as a block of the generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block<I> {
    /// 1-based position in the generator.
    pub start: usize,
    pub len: usize,
    pub winding: I,
}

/// How a generator reproduces one target loop.
///
/// The blocks describe the target rotated by `rotation`, i.e. the loop
/// `(y_{r+1}, …, y_m, y_1, …, y_r)` for `r = rotation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenWitness<I> {
    pub blocks: Vec<Block<I>>,
    pub rotation: usize,
}

/// An arrow written as `z_{s+len-1} ∘ … ∘ z_s ∘ l_s(z)^winding` with
/// `len < k` and an arbitrary integer winding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuccessiveTerm<I> {
    pub start: usize,
    pub len: usize,
    pub winding: I,
}

fn total<I: Scalar>(arrows: &[GArrow<I>]) -> I {
    arrows
        .iter()
        .fold(I::zero(), |acc, f| acc + f.disp().clone())
}

fn check_single_model<I: Scalar>(arrows: &[GArrow<I>]) -> Result<usize, LoopError> {
    let first = arrows.first().ok_or(LoopError::Empty)?;
    let n = first.model_n();
    if arrows.iter().any(|f| f.model_n() != n) {
        return Err(LoopError::MixedModels);
    }
    Ok(n)
}

fn first_break<I: Scalar>(arrows: &[GArrow<I>]) -> Option<usize> {
    let len = arrows.len();
    (0..len).find(|&t| arrows[t].cod() != arrows[(t + 1) % len].dom())
}

/// Flags for an arbitrary arrow sequence; only mixing models is an error.
pub fn classify_loop<I: Scalar>(arrows: &[GArrow<I>]) -> Result<LoopClass<I>, LoopError> {
    let n = check_single_model(arrows)?;
    let is_loop = first_break(arrows).is_none();
    let total_disp = total(arrows);
    let is_positive = is_loop && arrows.iter().all(|f| f.is_positive());
    let is_phi = is_positive && !total_disp.is_zero() && total_disp.residue(n) == 0;
    let is_psi = is_positive && total_disp == I::from_count(n);
    Ok(LoopClass {
        is_loop,
        is_positive,
        is_phi,
        is_psi,
        length: arrows.len(),
        total_disp,
    })
}

impl<I: Scalar> Loop<I> {
    pub fn new(arrows: Vec<GArrow<I>>) -> Result<Self, LoopError> {
        check_single_model(&arrows)?;
        if let Some(at) = first_break(&arrows) {
            return Err(LoopError::NotALoop {
                at: at + 1,
                next: (at + 1) % arrows.len() + 1,
            });
        }
        Ok(Self { arrows })
    }

    pub fn arrows(&self) -> &[GArrow<I>] {
        &self.arrows
    }

    pub fn into_arrows(self) -> Vec<GArrow<I>> {
        self.arrows
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn model(&self) -> CycGroupoid {
        self.arrows[0].model()
    }

    pub fn total_disp(&self) -> I {
        total(&self.arrows)
    }

    pub fn classify(&self) -> LoopClass<I> {
        classify_loop(&self.arrows).expect("validated loop")
    }

    pub fn is_phi(&self) -> bool {
        self.classify().is_phi
    }

    pub fn is_psi(&self) -> bool {
        self.classify().is_psi
    }

    pub fn domains(&self) -> impl Iterator<Item = usize> + '_ {
        self.arrows.iter().map(|f| f.dom())
    }

    pub fn has_distinct_domains(&self) -> bool {
        let set: BTreeSet<usize> = self.domains().collect();
        set.len() == self.len()
    }

    /// The loop starting at its `r`-th arrow (0-based shift).
    pub fn rotated(&self, r: usize) -> Loop<I> {
        let len = self.len();
        Loop {
            arrows: (0..len)
                .map(|i| self.arrows[(i + r) % len].clone())
                .collect(),
        }
    }

    /// `l_i`: the composite based at `dom(x_i)` (1-based `i`).
    pub fn composite(&self, i: usize) -> Result<GArrow<I>, LoopError> {
        loop_composite(self, i)
    }

    /// Composite of `len` consecutive arrows starting at 1-based `start`,
    /// with indices taken modulo the length.
    pub fn block(&self, start: usize, len: usize) -> GArrow<I> {
        let k = self.len();
        let s = (start - 1) % k;
        let disp = (0..len).fold(I::zero(), |acc, t| {
            acc + self.arrows[(s + t) % k].disp().clone()
        });
        self.model()
            .arrow(self.arrows[s].dom(), disp)
            .expect("object in range")
    }
}

/// `l_i(x) = x_{i-1} ∘ … ∘ x_{i+1} ∘ x_i` for 1-based `i`; `i = 1` gives `l(x)`.
pub fn loop_composite<I: Scalar>(x: &Loop<I>, i: usize) -> Result<GArrow<I>, LoopError> {
    if i == 0 || i > x.len() {
        return Err(LoopError::IndexOutOfRange {
            index: i,
            len: x.len(),
        });
    }
    Ok(x.model().arrow(x.arrows[i - 1].dom(), x.total_disp())?)
}

/// Splits `disp` as `c + b·n` with `0 ≤ c < n`.
pub fn factorize_arrow<I: Scalar>(f: &GArrow<I>) -> Factorization<I> {
    let n = f.model_n();
    Factorization {
        base_path_length: f.disp().residue(n),
        winding: f.disp().floor_div(n),
    }
}

impl<I: Scalar> Factorization<I> {
    pub fn recompose(&self, n: usize) -> I {
        I::from_count(self.base_path_length) + self.winding.clone() * I::from_count(n)
    }
}

/// The minimal positive arrow `a → b`; the identity when `a = b`.
pub fn pmin<I: Scalar>(model: CycGroupoid, a: usize, b: usize) -> Result<GArrow<I>, LoopError> {
    model.arrow(b, I::zero())?;
    let n = model.n();
    let steps = (b + n - a % n) % n;
    Ok(model.arrow(a, I::from_count(steps))?)
}

/// Writes a positive `f : a → b` as `α ∘ C_a^w` with `α` minimal positive.
pub fn factor_through_cycle<I: Scalar>(f: &GArrow<I>) -> Result<(GArrow<I>, I), LoopError> {
    if !f.is_positive() {
        return Err(LoopError::NotPositive(f.to_string()));
    }
    let alpha = pmin(f.model(), f.dom(), f.cod())?;
    let winding = factorize_arrow(f).winding;
    Ok((alpha, winding))
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<(), LoopError> {
    if cond {
        Ok(())
    } else {
        Err(LoopError::PreconditionViolated(what()))
    }
}

fn check_mode<I: Scalar>(z: &Loop<I>, mode: GenMode, role: &str) -> Result<(), LoopError> {
    let class = z.classify();
    match mode {
        GenMode::Epicyclic => require(class.is_phi, || {
            format!("{role} is not a positive non-trivial loop")
        }),
        GenMode::Cyclic => require(class.is_psi, || {
            format!("{role} is not an elementary cycle")
        }),
    }
}

/// Winding `p ≥ 0` with `block + p·total = disp`, if there is one.
fn nonneg_winding<I: Scalar>(disp: &I, block: &I, loop_total: &I) -> Option<I> {
    let diff = disp.clone() - block.clone();
    if diff.is_negative() {
        return None;
    }
    if loop_total.is_zero() {
        return diff.is_zero().then(I::zero);
    }
    let (q, r) = diff.div_rem(loop_total);
    r.is_zero().then_some(q)
}

struct WitnessSearch<'a, I> {
    z: &'a Loop<I>,
    target: &'a [GArrow<I>],
    loop_total: I,
}

impl<I: Scalar> WitnessSearch<'_, I> {
    fn run(&self, first_start: usize) -> Option<Vec<Block<I>>> {
        let mut blocks = Vec::with_capacity(self.target.len());
        self.dfs(0, first_start, first_start, &mut blocks)
            .then_some(blocks)
    }

    fn dfs(&self, i: usize, pos: usize, first: usize, blocks: &mut Vec<Block<I>>) -> bool {
        let k = self.z.len();
        if i == self.target.len() {
            return pos == first;
        }
        let x = &self.target[i];
        if self.z.arrows[pos - 1].dom() != x.dom() {
            return false;
        }
        for len in 0..=k {
            let block = self.z.block(pos, len);
            let winding = if len == 0 {
                // a bare block only stands for the identity
                if !x.disp().is_zero() {
                    continue;
                }
                I::zero()
            } else {
                match nonneg_winding(x.disp(), block.disp(), &self.loop_total) {
                    Some(p) => p,
                    None => continue,
                }
            };
            blocks.push(Block {
                start: pos,
                len,
                winding,
            });
            let next = (pos - 1 + len) % k + 1;
            if self.dfs(i + 1, next, first, blocks) {
                return true;
            }
            blocks.pop();
        }
        false
    }
}

/// Finds witnesses showing that `z` generates each target.
///
/// The first target must start where `z` starts. A second target may be
/// rotated; rotations aligned with `dom(z_1)` are tried first (in rotation
/// order), then any start position.
pub fn decompose_against<I: Scalar>(
    z: &Loop<I>,
    targets: &[Loop<I>],
    mode: GenMode,
) -> Result<Vec<GenWitness<I>>, LoopError> {
    check_mode(z, mode, "generator")?;
    require(!targets.is_empty() && targets.len() <= 2, || {
        "expected one or two target loops".to_string()
    })?;
    for (t, target) in targets.iter().enumerate() {
        if target.model() != z.model() {
            return Err(LoopError::MixedModels);
        }
        require(target.arrows.iter().all(|f| f.is_positive()), || {
            format!("target {} is not positive", t + 1)
        })?;
    }
    let first = &targets[0];
    if first.arrows[0].dom() != z.arrows[0].dom() {
        return Err(LoopError::BaseMismatch {
            target: first.arrows[0].dom(),
            generator: z.arrows[0].dom(),
        });
    }

    let loop_total = z.total_disp();
    let mut out = Vec::with_capacity(targets.len());
    let search = WitnessSearch {
        z,
        target: &first.arrows,
        loop_total: loop_total.clone(),
    };
    let blocks = search.run(1).ok_or(LoopError::NoWitness { target: 1 })?;
    out.push(GenWitness {
        blocks,
        rotation: 0,
    });

    if let Some(second) = targets.get(1) {
        let w = align_second(z, second, &loop_total).ok_or(LoopError::NoWitness { target: 2 })?;
        out.push(w);
    }
    Ok(out)
}

fn align_second<I: Scalar>(z: &Loop<I>, y: &Loop<I>, loop_total: &I) -> Option<GenWitness<I>> {
    let m = y.len();
    let k = z.len();
    let attempt = |rotation: usize, start: usize| {
        let rotated = y.rotated(rotation);
        let search = WitnessSearch {
            z,
            target: &rotated.arrows,
            loop_total: loop_total.clone(),
        };
        search
            .run(start)
            .map(|blocks| GenWitness { blocks, rotation })
    };
    (0..m)
        .find_map(|r| attempt(r, 1))
        .or_else(|| (0..m).find_map(|r| (2..=k).find_map(|s| attempt(r, s))))
}

/// Reapplies a witness to `z`, returning the target in its original order.
pub fn apply_witness<I: Scalar>(
    z: &Loop<I>,
    w: &GenWitness<I>,
) -> Result<Vec<GArrow<I>>, LoopError> {
    let k = z.len();
    let loop_total = z.total_disp();
    let mut rotated = Vec::with_capacity(w.blocks.len());
    for (i, b) in w.blocks.iter().enumerate() {
        if b.start == 0 || b.start > k {
            return Err(LoopError::IndexOutOfRange {
                index: b.start,
                len: k,
            });
        }
        if b.winding.is_negative() {
            return Err(LoopError::PreconditionViolated(format!(
                "block {} has a negative winding",
                i + 1
            )));
        }
        let block = z.block(b.start, b.len);
        let disp = block.disp().clone() + b.winding.clone() * loop_total.clone();
        rotated.push(z.model().arrow(block.dom(), disp)?);
    }
    let m = rotated.len();
    if m == 0 {
        return Err(LoopError::Empty);
    }
    let r = w.rotation % m;
    let mut original = rotated.clone();
    for (i, f) in rotated.into_iter().enumerate() {
        original[(i + r) % m] = f;
    }
    Ok(original)
}

/// Minimal positive arrows through `objects` in cyclic order starting at
/// `base` (which must be one of them); a single object gets its cycle.
pub fn cyclic_walk<I: Scalar>(
    model: CycGroupoid,
    base: usize,
    objects: &BTreeSet<usize>,
) -> Vec<GArrow<I>> {
    let n = model.n();
    let mut order: Vec<usize> = objects.iter().copied().collect();
    order.sort_by_key(|&o| (o + n - base) % n);
    let k = order.len();
    if k == 1 {
        return vec![model.cycle_of(order[0]).expect("object in range")];
    }
    (0..k)
        .map(|t| pmin(model, order[t], order[(t + 1) % k]).expect("object in range"))
        .collect()
}

/// A generator for both loops in which every domain occurs once.
///
/// In epicyclic mode the generator is the walk through the distinct domains
/// in cyclic order from `dom(x_1)`. In cyclic mode it is grown from `x` by
/// inserting each `dom(y_j)` with [`insert_object`], after which identities
/// are dropped.
pub fn minimal_generator<I: Scalar>(
    x: &Loop<I>,
    y: &Loop<I>,
    mode: GenMode,
) -> Result<(Loop<I>, Vec<GenWitness<I>>), LoopError> {
    if x.model() != y.model() {
        return Err(LoopError::MixedModels);
    }
    check_mode(x, mode, "first loop")?;
    check_mode(y, mode, "second loop")?;
    let z = match mode {
        GenMode::Epicyclic => {
            let objects: BTreeSet<usize> = x.domains().chain(y.domains()).collect();
            Loop::new(cyclic_walk(x.model(), x.arrows[0].dom(), &objects))?
        }
        GenMode::Cyclic => merge_by_insertion(x, y)?,
    };
    let witnesses = decompose_against(&z, &[x.clone(), y.clone()], mode)?;
    Ok((z, witnesses))
}

fn merge_by_insertion<I: Scalar>(x: &Loop<I>, y: &Loop<I>) -> Result<Loop<I>, LoopError> {
    let mut z = x.clone();
    for c in y.domains() {
        let (i, alpha, beta) = insert_object(&z, c)?;
        z.arrows.splice(i - 1..i, [alpha, beta]);
    }
    let base = z.arrows[0].dom();
    let kept: Vec<GArrow<I>> = z.arrows.into_iter().filter(|f| !f.is_identity()).collect();
    let z = Loop::new(kept)?;
    debug_assert_eq!(z.arrows[0].dom(), base);
    Ok(z)
}

/// Splits an arrow of an elementary cycle so that the cycle passes through `c`.
///
/// Returns `(i, α, β)` with `x_i = β ∘ α`, `dom(β) = c`, both positive. When
/// `c` already is a domain, `α` is the identity at `c` and `β = x_i`.
pub fn insert_object<I: Scalar>(
    x: &Loop<I>,
    c: usize,
) -> Result<(usize, GArrow<I>, GArrow<I>), LoopError> {
    check_mode(x, GenMode::Cyclic, "loop")?;
    let model = x.model();
    model.arrow(c, I::zero())?;
    if let Some(i) = x.domains().position(|d| d == c) {
        return Ok((i + 1, model.identity(c)?, x.arrows[i].clone()));
    }
    let n = model.n();
    let base = x.arrows[0].dom();
    let target = I::from_count((c + n - base) % n);
    let mut offset = I::zero();
    for (i, f) in x.arrows.iter().enumerate() {
        let next = offset.clone() + f.disp().clone();
        if offset < target && target < next {
            let alpha = model.arrow(f.dom(), target.clone() - offset)?;
            let beta = model.arrow(c, next - target)?;
            return Ok((i + 1, alpha, beta));
        }
        offset = next;
    }
    unreachable!("an elementary cycle passes every object")
}

/// One reduction step for a generator with a repeated domain: the walk over
/// its distinct domains, padded with identities at the base to length `k − 1`.
///
/// Returns `None` when all domains are already distinct.
pub fn reduce_generator<I: Scalar>(z: &Loop<I>) -> Result<Option<Loop<I>>, LoopError> {
    check_mode(z, GenMode::Epicyclic, "generator")?;
    if z.has_distinct_domains() {
        return Ok(None);
    }
    let base = z.arrows[0].dom();
    let objects: BTreeSet<usize> = z.domains().collect();
    let mut walk = cyclic_walk(z.model(), base, &objects);
    while walk.len() < z.len() - 1 {
        walk.push(z.model().identity(base)?);
    }
    Ok(Some(Loop::new(walk)?))
}

/// Writes `f` as a successive term in `z` (block length below `k`, any
/// integer winding). Picks the first matching start position.
pub fn represent_arrow<I: Scalar>(z: &Loop<I>, f: &GArrow<I>) -> Option<SuccessiveTerm<I>> {
    let k = z.len();
    let loop_total = z.total_disp();
    if loop_total.is_zero() || f.model_n() != z.model().n() {
        return None;
    }
    for start in 1..=k {
        if z.arrows[start - 1].dom() != f.dom() {
            continue;
        }
        for len in 0..k {
            let block = z.block(start, len);
            let diff = f.disp().clone() - block.disp().clone();
            let (q, r) = diff.div_rem(&loop_total);
            if r.is_zero() {
                return Some(SuccessiveTerm {
                    start,
                    len,
                    winding: q,
                });
            }
        }
    }
    None
}

impl<I: Scalar> SuccessiveTerm<I> {
    pub fn evaluate(&self, z: &Loop<I>) -> GArrow<I> {
        let block = z.block(self.start, self.len);
        let disp = block.disp().clone() + self.winding.clone() * z.total_disp();
        z.model().arrow(block.dom(), disp).expect("object in range")
    }
}
