//! Expansion of the loop and generator macros into plain formulas.

use std::collections::BTreeSet;

use thiserror::Error;

use super::parser::MAX_MACRO_ARITY;
use super::syntax::{Formula, Func, IntExpr, MacroCall, MacroKind, Pred, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("unknown macro `{0}`")]
    Unknown(String),
    #[error("{name}: parameter {value} outside 1..={max}")]
    OutOfRange {
        name: &'static str,
        value: usize,
        max: usize,
    },
    #[error("{name} expects {expected} size parameters, got {got}")]
    Arity {
        name: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Supplies bound-variable names that avoid every name in `taken`.
pub struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        Fresh {
            taken: names.into_iter().map(str::to_string).collect(),
            next: 0,
        }
    }

    pub fn name(&mut self, stem: &str) -> String {
        loop {
            self.next += 1;
            let candidate = format!("_{stem}{}", self.next);
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

/// `x_{i+n-1} o … o x_i`, 0-based `i`, indices modulo `n`.
pub fn loop_term(x: &[Term], i: usize) -> Term {
    block_term(x, i, x.len())
}

/// `x_{i+len-1} o … o x_i` for `len ≥ 1`, 0-based `i`, indices modulo `n`.
fn block_term(x: &[Term], i: usize, len: usize) -> Term {
    let n = x.len();
    let mut t = x[(i + len - 1) % n].clone();
    for step in (0..len - 1).rev() {
        t = Term::comp(t, x[(i + step) % n].clone());
    }
    t
}

fn loop_atoms(x: &[Term]) -> Vec<Formula> {
    let n = x.len();
    (0..n)
        .map(|i| Formula::eq(Term::cod(x[i].clone()), Term::dom(x[(i + 1) % n].clone())))
        .collect()
}

fn pos_atoms(x: &[Term]) -> Vec<Formula> {
    x.iter()
        .map(|t| Formula::pred(Pred::P, t.clone()))
        .collect()
}

/// Sequences in `[0, k)^n` summing to a multiple of `k`, in lexicographic order.
fn closed_lengths(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        if cur.iter().sum::<usize>() % k == 0 {
            out.push(cur.clone());
        }
        let mut t = n;
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            cur[t] += 1;
            if cur[t] < k {
                break;
            }
            cur[t] = 0;
        }
    }
}

/// The disjunction over successive decompositions of `x` in `z`, with the
/// first block starting at 0-based position `start`.
fn successive(x: &[Term], z: &[Term], start: usize, fresh: &mut Fresh) -> Formula {
    let k = z.len();
    let mut alternatives = Vec::new();
    for lens in closed_lengths(x.len(), k) {
        let mut s = start;
        let mut conj = Vec::with_capacity(x.len());
        for (i, &len) in lens.iter().enumerate() {
            let p = fresh.name("p");
            let power = Term::Pow(Box::new(loop_term(z, s)), IntExpr::Var(p.clone()));
            let rhs = if len == 0 {
                power
            } else {
                Term::comp(block_term(z, s, len), power)
            };
            conj.push(Formula::Indexed {
                conj: false,
                var: p,
                lo: IntExpr::Lit(0),
                hi: IntExpr::Bound,
                body: Box::new(Formula::eq(x[i].clone(), rhs)),
            });
            s = (s + len) % k;
        }
        alternatives.push(Formula::and(conj));
    }
    Formula::or(alternatives)
}

fn rotated_successive(y: &[Term], z: &[Term], fresh: &mut Fresh) -> Formula {
    let m = y.len();
    let mut alternatives = Vec::new();
    for r in 0..m {
        let rotated: Vec<Term> = (0..m).map(|j| y[(j + r) % m].clone()).collect();
        for s in 0..z.len() {
            alternatives.push(successive(&rotated, z, s, fresh));
        }
    }
    Formula::or(alternatives)
}

fn phi_call(z: &[Term]) -> Formula {
    Formula::Macro(MacroCall {
        kind: MacroKind::Phi,
        param: None,
        groups: vec![z.to_vec()],
    })
}

/// One level of expansion: nested macros (e.g. `Phi` inside `Gen`) stay as
/// macro nodes.
pub fn expand(call: &MacroCall, fresh: &mut Fresh) -> Formula {
    let g = &call.groups;
    match call.kind {
        MacroKind::Loop => Formula::and(loop_atoms(&g[0])),
        MacroKind::Pos => Formula::and(pos_atoms(&g[0])),
        MacroKind::Phi => {
            let x = &g[0];
            let mut atoms = loop_atoms(x);
            atoms.extend(pos_atoms(x));
            atoms.push(Formula::pred(Pred::T, loop_term(x, 0)));
            Formula::And(atoms)
        }
        MacroKind::Psi => {
            let x = &g[0];
            let mut atoms = loop_atoms(x);
            atoms.extend(pos_atoms(x));
            atoms.push(Formula::eq(
                loop_term(x, 0),
                Term::app1(Func::Cyc, Term::dom(x[0].clone())),
            ));
            Formula::And(atoms)
        }
        MacroKind::PMin => {
            let f = g[0][0].clone();
            let w = fresh.name("g");
            let gv = Term::Var(w.clone());
            let body = Formula::And(vec![
                Formula::eq(Term::dom(gv.clone()), Term::cod(f.clone())),
                Formula::eq(Term::cod(gv.clone()), Term::dom(f.clone())),
                Formula::pred(Pred::P, gv.clone()),
                Formula::eq(
                    Term::comp(gv, f.clone()),
                    Term::app1(Func::Cyc, Term::dom(f.clone())),
                ),
            ]);
            Formula::And(vec![
                Formula::pred(Pred::P, f),
                Formula::Exists(vec![(w, Sort::Arrow)], Box::new(body)),
            ])
        }
        MacroKind::Gen => {
            let (x, z) = (&g[0], &g[1]);
            Formula::And(vec![phi_call(z), successive(x, z, 0, fresh)])
        }
        MacroKind::Gen3 => {
            let (x, y, z) = (&g[0], &g[1], &g[2]);
            Formula::And(vec![
                phi_call(z),
                successive(x, z, 0, fresh),
                rotated_successive(y, z, fresh),
            ])
        }
        MacroKind::GenRotated => rotated_successive(&g[0], &g[1], fresh),
        MacroKind::Domeq => {
            let z = &g[0];
            let k = call.param.unwrap_or(0);
            let n = z.len();
            let mut alternatives = Vec::new();
            for subset in subsets(n, k) {
                let conj = subset
                    .iter()
                    .map(|&i| {
                        Formula::or(
                            (0..n)
                                .filter(|&j| j != i)
                                .map(|j| {
                                    Formula::eq(Term::dom(z[i].clone()), Term::dom(z[j].clone()))
                                })
                                .collect(),
                        )
                    })
                    .collect();
                alternatives.push(Formula::and(conj));
            }
            Formula::or(alternatives)
        }
    }
}

/// Full expansion: macros nested in the result are expanded as well.
pub fn expand_deep(call: &MacroCall, fresh: &mut Fresh) -> Formula {
    fn walk(f: Formula, fresh: &mut Fresh) -> Formula {
        match f {
            Formula::Macro(c) => walk(expand(&c, fresh), fresh),
            Formula::And(items) => {
                Formula::And(items.into_iter().map(|i| walk(i, fresh)).collect())
            }
            Formula::Or(items) => Formula::Or(items.into_iter().map(|i| walk(i, fresh)).collect()),
            Formula::Exists(v, body) => Formula::Exists(v, Box::new(walk(*body, fresh))),
            Formula::Indexed {
                conj,
                var,
                lo,
                hi,
                body,
            } => Formula::Indexed {
                conj,
                var,
                lo,
                hi,
                body: Box::new(walk(*body, fresh)),
            },
            other => other,
        }
    }
    walk(expand(call, fresh), fresh)
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn numbered(stem: &str, n: usize) -> Vec<Term> {
    (1..=n).map(|i| Term::Var(format!("{stem}{i}"))).collect()
}

/// The macro applied to variables `x1..`, `y1..`, `z1..` (or `f` for `PMin`),
/// fully expanded. `sizes` lists the argument-group lengths; `Domeq` takes
/// its parameter as a final extra entry.
pub fn expand_macro(name: &str, sizes: &[usize]) -> Result<(MacroCall, Formula), MacroError> {
    let kind = MacroKind::from_name(name).ok_or_else(|| MacroError::Unknown(name.to_string()))?;
    let name = kind.name();
    let groups = kind.groups();
    let expected = if kind == MacroKind::PMin {
        0
    } else {
        groups + usize::from(kind.needs_param())
    };
    if sizes.len() != expected {
        return Err(MacroError::Arity {
            name,
            expected,
            got: sizes.len(),
        });
    }
    for &s in &sizes[..groups.min(sizes.len())] {
        if s == 0 || s > MAX_MACRO_ARITY {
            return Err(MacroError::OutOfRange {
                name,
                value: s,
                max: MAX_MACRO_ARITY,
            });
        }
    }
    let stems = ["x", "y", "z"];
    let groups_terms: Vec<Vec<Term>> = if kind == MacroKind::PMin {
        vec![vec![Term::var("f")]]
    } else if kind == MacroKind::Gen {
        vec![numbered("x", sizes[0]), numbered("z", sizes[1])]
    } else {
        (0..groups).map(|g| numbered(stems[g], sizes[g])).collect()
    };
    let param = if kind.needs_param() {
        let k = sizes[groups];
        if k > sizes[0] {
            return Err(MacroError::OutOfRange {
                name,
                value: k,
                max: sizes[0],
            });
        }
        Some(k)
    } else {
        None
    };
    let call = MacroCall {
        kind,
        param,
        groups: groups_terms,
    };
    let mut fresh = Fresh::avoiding(call.groups.iter().flatten().filter_map(|t| match t {
        Term::Var(v) => Some(v.as_str()),
        _ => None,
    }));
    let f = expand_deep(&call, &mut fresh);
    Ok((call, f))
}

/// Context declaring the variables used by [`expand_macro`].
pub fn macro_context(call: &MacroCall) -> Vec<(String, Sort)> {
    let mut vars = Vec::new();
    for t in call.groups.iter().flatten() {
        t.vars(&mut vars);
    }
    let mut seen = BTreeSet::new();
    vars.into_iter()
        .filter(|v| seen.insert(v.clone()))
        .map(|v| (v, Sort::Arrow))
        .collect()
}
