//! Oracles and generators shared by the integration tests. Nothing here
//! calls the algorithm it is meant to check.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cyclo_core::groupoid::{CycGroupoid, GArrow};
use cyclo_core::loops::{Block, GenWitness, Loop};
use cyclo_core::qgroups::{DiagramArrow, Height, NStarDiagram, RationalSubgroup};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn model(n: usize) -> CycGroupoid {
    CycGroupoid::new(n).unwrap()
}

fn steps(n: usize, a: usize, b: usize) -> i64 {
    ((b + n - a) % n) as i64
}

/// A positive loop with non-zero total through random objects.
pub fn random_phi_loop<R: Rng>(rng: &mut R, n: usize) -> Loop<i64> {
    let x = model(n);
    let len = rng.gen_range(1..=4);
    let objects: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
    let mut arrows: Vec<GArrow<i64>> = (0..len)
        .map(|t| {
            let (a, b) = (objects[t], objects[(t + 1) % len]);
            let winding = if rng.gen_bool(0.7) {
                0
            } else {
                rng.gen_range(1..=2)
            };
            x.arrow(a, steps(n, a, b) + winding * n as i64).unwrap()
        })
        .collect();
    if arrows.iter().all(|f| f.is_identity()) {
        let t = rng.gen_range(0..len);
        arrows[t] = x.arrow(arrows[t].dom(), n as i64).unwrap();
    }
    Loop::new(arrows).unwrap()
}

/// A loop going once around `X_n`, possibly with identities in between.
pub fn random_psi_loop<R: Rng>(rng: &mut R, n: usize) -> Loop<i64> {
    let x = model(n);
    let base = rng.gen_range(0..n);
    let mut stops: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.5)).collect();
    stops.sort_unstable();
    let mut offsets = vec![0usize];
    offsets.extend(stops);
    offsets.push(n);
    let mut arrows = Vec::new();
    for w in offsets.windows(2) {
        let src = (base + w[0]) % n;
        if rng.gen_bool(0.15) {
            arrows.push(x.identity(src).unwrap());
        }
        arrows.push(x.arrow(src, (w[1] - w[0]) as i64).unwrap());
    }
    Loop::new(arrows).unwrap()
}

/// Every elementary cycle of `X_n` with at most `max_len` arrows: positive
/// displacements summing to `n`, identities allowed.
pub fn elementary_cycles(n: usize, max_len: usize) -> Vec<Loop<i64>> {
    fn parts(total: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if len == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=total {
            cur.push(v);
            parts(total - v, len - 1, cur, out);
            cur.pop();
        }
    }
    let x = model(n);
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut all = Vec::new();
        parts(n, len, &mut Vec::new(), &mut all);
        for base in 0..n {
            for disps in &all {
                let mut src = base;
                let arrows = disps
                    .iter()
                    .map(|&d| {
                        let f = x.arrow(src, d as i64).unwrap();
                        src = f.cod();
                        f
                    })
                    .collect();
                out.push(Loop::new(arrows).unwrap());
            }
        }
    }
    out
}

/// A functor `X_n → X_m` found by filtering: the base object and the
/// generator images `F(ξ_i) = disp_i @ b_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FilteredFunctor {
    pub base: usize,
    pub images: Vec<i64>,
}

impl FilteredFunctor {
    /// Image of `disp@src` by composing generator images one step at a time.
    pub fn apply(&self, n: usize, m: usize, f: &GArrow<i64>) -> GArrow<i64> {
        let y = model(m);
        let mut objects = vec![self.base];
        for i in 0..n {
            objects.push((objects[i] as i64 + self.images[i]).rem_euclid(m as i64) as usize);
        }
        let mut acc = y.identity(objects[f.src()]).unwrap();
        let mut pos = f.src();
        if *f.disp() >= 0 {
            for _ in 0..*f.disp() {
                let g = y.arrow(objects[pos], self.images[pos]).unwrap();
                acc = g.compose(&acc).unwrap();
                pos = (pos + 1) % n;
            }
        } else {
            for _ in 0..-*f.disp() {
                pos = (pos + n - 1) % n;
                let g = y.arrow(objects[pos], self.images[pos]).unwrap();
                acc = g.inverse().compose(&acc).unwrap();
            }
        }
        acc
    }
}

/// Functors `X_n → X_m` with generator images in `[-window, window]` that
/// preserve `P` and `T` on every arrow of `|disp| ≤ 2n` (and send `C_a` to
/// `C_{F a}` when `keep_cycles`).
pub fn filtered_functors(
    n: usize,
    m: usize,
    window: i64,
    keep_cycles: bool,
) -> Vec<FilteredFunctor> {
    let x = model(n);
    let test_arrows: Vec<GArrow<i64>> = x.enumerate_arrows(2 * n);
    let mut out = Vec::new();
    let mut images = vec![-window; n];
    loop {
        // the object map closes up only if the images wind a multiple of m
        if images.iter().sum::<i64>().rem_euclid(m as i64) == 0 {
            for base in 0..m {
                let h = FilteredFunctor {
                    base,
                    images: images.clone(),
                };
                let ok = test_arrows.iter().all(|f| {
                    let g = h.apply(n, m, f);
                    (!f.is_positive() || g.is_positive())
                        && (!f.is_nontrivial() || g.is_nontrivial())
                        && (!keep_cycles || !f.is_cycle() || g.is_cycle())
                });
                if ok {
                    out.push(h);
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
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

/// `(n+m−1)! / ((n−1)!·(m−1)!)` from factorials.
pub fn lambda_count(n: usize, m: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    fact(n + m - 1) / (fact(n - 1) * fact(m - 1))
}

/// Every normal-form witness for `target` against `z`: any rotation, any
/// start, blocks of length `1..=k` with a non-negative winding, or length 0
/// standing for an identity.
pub fn all_witnesses(z: &Loop<i64>, target: &Loop<i64>) -> Vec<GenWitness<i64>> {
    let k = z.len();
    let za = z.arrows();
    let total: i64 = za.iter().map(|f| *f.disp()).sum();
    let block_disp = |start: usize, len: usize| -> i64 {
        (0..len).map(|t| *za[(start - 1 + t) % k].disp()).sum()
    };
    let m = target.len();
    let mut out = Vec::new();
    for rotation in 0..m {
        let t: Vec<GArrow<i64>> = (0..m)
            .map(|i| target.arrows()[(i + rotation) % m].clone())
            .collect();
        for first in 1..=k {
            let mut stack: Vec<(usize, usize, Vec<Block<i64>>)> = vec![(0, first, Vec::new())];
            while let Some((i, pos, blocks)) = stack.pop() {
                if i == m {
                    if pos == first {
                        out.push(GenWitness { blocks, rotation });
                    }
                    continue;
                }
                if za[pos - 1].dom() != t[i].dom() {
                    continue;
                }
                for len in 0..=k {
                    let diff = t[i].disp() - block_disp(pos, len);
                    let winding = if len == 0 {
                        if *t[i].disp() != 0 {
                            continue;
                        }
                        0
                    } else if diff >= 0 && diff % total == 0 {
                        diff / total
                    } else {
                        continue;
                    };
                    let mut next = blocks.clone();
                    next.push(Block {
                        start: pos,
                        len,
                        winding,
                    });
                    stack.push((i + 1, (pos - 1 + len) % k + 1, next));
                }
            }
        }
    }
    out
}

/// The block used for each target arrow, in the target's own order.
pub fn blocks_by_arrow(w: &GenWitness<i64>) -> Vec<Block<i64>> {
    let m = w.blocks.len();
    let mut out = w.blocks.clone();
    for (i, b) in w.blocks.iter().enumerate() {
        out[(i + w.rotation) % m] = b.clone();
    }
    out
}

/// Height profiles used by the randomized Q-group tests.
pub fn height_profiles() -> Vec<RationalSubgroup<i64>> {
    let inf = Height::Infinite;
    let fin = Height::Finite;
    vec![
        RationalSubgroup::integers(),
        RationalSubgroup::with_heights(&[(2, inf)]).unwrap(),
        RationalSubgroup::with_heights(&[(2, inf), (3, fin(1))]).unwrap(),
        RationalSubgroup::with_heights(&[(2, fin(2)), (5, fin(1))]).unwrap(),
        RationalSubgroup::with_heights(&[(3, inf), (7, fin(2))]).unwrap(),
        RationalSubgroup::new(
            Ratio::new(3, 2),
            [(2, fin(1))].into_iter().collect::<BTreeMap<_, _>>(),
        )
        .unwrap(),
    ]
}

/// A positive element of `h`: the scale times `a / ∏ ℓ^e` with exponents
/// inside the heights.
pub fn random_positive_member<R: Rng>(rng: &mut R, h: &RationalSubgroup<i64>) -> Ratio<i64> {
    let mut den: i64 = 1;
    for (&p, &height) in h.heights() {
        let cap = match height {
            Height::Finite(e) => e.min(3),
            Height::Infinite => 3,
        };
        for _ in 0..rng.gen_range(0..=cap) {
            den *= p as i64;
        }
    }
    *h.scale() * Ratio::new(rng.gen_range(1..=40), den)
}

/// A diagram whose objects carry weights `w_i`, with arrows `i → j` labelled
/// `w_j / w_i` and a top object divisible by every weight. The cocone is
/// then `λ_j = w_0 / w_j`.
pub fn random_diagram<R: Rng>(rng: &mut R) -> (NStarDiagram, Vec<u64>) {
    let objects = rng.gen_range(1..=6);
    let primes = [2u64, 3, 5];
    let mut weights: Vec<u64> = (0..objects - 1)
        .map(|_| {
            primes
                .iter()
                .map(|&p| p.pow(rng.gen_range(0..=2)))
                .product()
        })
        .collect();
    let top = weights
        .iter()
        .fold(1u64, |acc, &w| num_integer::lcm(acc, w))
        * rng.gen_range(1..=2);
    weights.push(top);
    let mut order: Vec<usize> = (0..objects).collect();
    order.shuffle(rng);
    let weights: Vec<u64> = order.iter().map(|&i| weights[i]).collect();
    let mut arrows = Vec::new();
    for i in 0..objects {
        for j in 0..objects {
            if i != j
                && weights[j].is_multiple_of(weights[i])
                && (weights[j] == top || rng.gen_bool(0.4))
            {
                arrows.push(DiagramArrow {
                    from: i,
                    to: j,
                    label: weights[j] / weights[i],
                });
            }
        }
    }
    (NStarDiagram::new(objects, arrows).unwrap(), weights)
}
