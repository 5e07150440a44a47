//! Bounded satisfaction checking of sequents in a [`Structure`].
//!
//! Formulas are compiled to a slot-indexed form. Each block of variables
//! (the context, or the variables of one `exists`) gets an enumeration plan:
//! conjuncts are attached to the last variable they mention and act as
//! filters there, and each variable draws candidates from the cheapest
//! source available (an equation it can be solved from, a `dom`/`cod`
//! constraint, generator proposals, or the bounded domain).
//!
//! Truth values are four-valued: `Unknown` means a search was cut off by a
//! bound without finding a witness, `Bounded` means something universally
//! quantified held on the part of the range that was inspected.

use std::cell::{Cell, OnceCell};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use std::time::Instant;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::macros::{expand, Fresh};
use super::structure::{Structure, Value};
use super::syntax::{
    Formula, Func, IntExpr, MacroCall, MacroKind, Pred, Sequent, Signature, Sort, Term,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Context arrows range over `|disp| ≤ arrow_bound`.
    pub arrow_bound: i64,
    /// Value of `B` in indexed connectives.
    pub index_bound: i64,
    /// Existential witnesses range over `|disp| ≤ witness_depth` unless an
    /// equation pins them down.
    pub witness_depth: i64,
}

impl Bounds {
    pub fn new(arrow_bound: i64, index_bound: i64) -> Self {
        Bounds {
            arrow_bound,
            index_bound,
            witness_depth: arrow_bound,
        }
    }

    pub fn with_witness_depth(mut self, depth: i64) -> Self {
        self.witness_depth = depth;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tri {
    False,
    Unknown,
    Bounded,
    True,
}

impl Tri {
    fn of(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

impl From<bool> for Tri {
    fn from(b: bool) -> Tri {
        Tri::of(b)
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Decide macros with the structure's own procedures where available.
    pub native_macros: bool,
    /// Use the structure's automorphisms to fix the first context variable.
    pub symmetry: bool,
    /// Settle pairs of independent context components in bulk when the
    /// consequent allows it. Verdicts are the same either way.
    pub join: bool,
    pub deadline: Option<Instant>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            native_macros: true,
            symmetry: true,
            join: true,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    pub bindings: Vec<(String, Value)>,
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name} = {v}")?;
        }
        Ok(())
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.bindings.len()))?;
        for (name, v) in &self.bindings {
            map.serialize_entry(name, &v.to_string())?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub valuation: Valuation,
    /// The valuation was re-evaluated with every macro expanded and no
    /// search shortcuts, and still violates the sequent.
    pub reverified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every quantifier range was exhausted.
    Holds,
    HoldsUpToBound,
    /// Some instance needed a witness that was not found within bounds.
    UnknownAtBound(Valuation),
    Fails(Counterexample),
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::HoldsUpToBound => "HoldsUpToBound",
            Verdict::UnknownAtBound(_) => "UnknownAtBound",
            Verdict::Fails(_) => "Fails",
        }
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    /// Holds or HoldsUpToBound.
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsUpToBound)
    }

    fn rank(&self) -> u8 {
        match self {
            Verdict::Fails(_) => 3,
            Verdict::UnknownAtBound(_) => 2,
            Verdict::HoldsUpToBound => 1,
            Verdict::Holds => 0,
        }
    }

    /// The dominant of two verdicts: Fails, then UnknownAtBound, then
    /// HoldsUpToBound, then Holds. Ties keep `self`.
    pub fn merge(self, other: Verdict) -> Verdict {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Fails(c) => write!(f, "Fails [{}]", c.valuation),
            Verdict::UnknownAtBound(v) => write!(f, "UnknownAtBound [{v}]"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("deadline exceeded")]
    DeadlineExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    /// Context valuations that passed the antecedent filters.
    pub instances: u64,
}

/// Report line for one sequent, serialised as
/// `{"sequent", "verdict", "counterexample"}`.
#[derive(Debug, Clone, Serialize)]
pub struct SequentReport {
    pub sequent: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Valuation>,
}

impl SequentReport {
    pub fn new(sequent: &Sequent, verdict: &Verdict) -> Self {
        let counterexample = match verdict {
            Verdict::Fails(c) => Some(c.valuation.clone()),
            Verdict::UnknownAtBound(v) => Some(v.clone()),
            _ => None,
        };
        SequentReport {
            sequent: sequent.to_string(),
            verdict: verdict.tag(),
            counterexample,
        }
    }
}

// ---------------------------------------------------------------------------
// compiled form

#[derive(Debug, Clone)]
enum CInt {
    Lit(i64),
    Var(usize),
    Bound,
    Neg(Box<CInt>),
}

#[derive(Debug, Clone)]
enum CTerm {
    Var(usize),
    Un(Func, Box<CTerm>),
    Comp(Box<CTerm>, Box<CTerm>),
    Unit,
    Pow(Box<CTerm>, CInt),
}

enum CF {
    Const(bool),
    Eq(CTerm, CTerm),
    Pred(Pred, Vec<CTerm>),
    And(Vec<CF>),
    Or(Vec<CF>),
    Exists(Box<Plan>),
    Indexed(Box<CIndexed>),
    Macro(Box<CMacro>),
}

struct CIndexed {
    conj: bool,
    slot: usize,
    lo: CInt,
    hi: CInt,
    truncating: bool,
    body: CF,
}

struct CMacro {
    call: MacroCall,
    groups: Vec<Vec<CTerm>>,
    scope: Scope,
    slots: Rc<Slots>,
    expansion: OnceCell<CF>,
}

#[derive(Default)]
struct Slots {
    terms: Cell<usize>,
    ints: Cell<usize>,
}

impl Slots {
    fn term(&self) -> usize {
        let s = self.terms.get();
        self.terms.set(s + 1);
        s
    }

    fn int(&self) -> usize {
        let s = self.ints.get();
        self.ints.set(s + 1);
        s
    }
}

#[derive(Clone, Copy, Debug)]
enum Binding {
    Term(usize),
    Int(usize),
}

#[derive(Clone, Default)]
struct Scope(Vec<(String, Binding)>);

impl Scope {
    fn get(&self, name: &str) -> Option<Binding> {
        self.0
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, b)| *b)
    }

    fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| n.as_str())
    }
}

enum Step {
    /// Solve `x o b = known` as `x = known o inv(b)`.
    Right(CTerm),
    /// Solve `a o x = known` as `x = inv(a) o known`.
    Left(CTerm),
    Inv,
    Root(CInt),
}

struct Solve {
    known: CTerm,
    steps: Vec<Step>,
}

enum Source {
    Solve(Box<Solve>),
    From {
        dom: Option<CTerm>,
        cod: Option<CTerm>,
    },
    Domain,
}

struct PVar {
    slot: usize,
    sort: Sort,
    source: Source,
    filters: Vec<CF>,
}

struct Proposal {
    targets: Vec<Vec<CTerm>>,
}

/// Enumeration plan for a block of variables and their conjuncts.
struct Plan {
    vars: Vec<PVar>,
    closed: Vec<CF>,
    proposal: Option<Proposal>,
    /// Every variable is solved from an equation or ranges over objects.
    complete: bool,
}

// ---------------------------------------------------------------------------
// compilation

struct Compiler {
    slots: Rc<Slots>,
}

fn term_slots(t: &CTerm, out: &mut HashSet<usize>) {
    match t {
        CTerm::Var(s) => {
            out.insert(*s);
        }
        CTerm::Un(_, a) | CTerm::Pow(a, _) => term_slots(a, out),
        CTerm::Comp(a, b) => {
            term_slots(a, out);
            term_slots(b, out);
        }
        CTerm::Unit => {}
    }
}

fn cf_slots(f: &CF, out: &mut HashSet<usize>) {
    match f {
        CF::Const(_) => {}
        CF::Eq(a, b) => {
            term_slots(a, out);
            term_slots(b, out);
        }
        CF::Pred(_, args) => args.iter().for_each(|a| term_slots(a, out)),
        CF::And(items) | CF::Or(items) => items.iter().for_each(|i| cf_slots(i, out)),
        CF::Exists(plan) => {
            for v in &plan.vars {
                v.filters.iter().for_each(|c| cf_slots(c, out));
                match &v.source {
                    Source::Solve(s) => {
                        term_slots(&s.known, out);
                        for step in &s.steps {
                            if let Step::Right(t) | Step::Left(t) = step {
                                term_slots(t, out);
                            }
                        }
                    }
                    Source::From { dom, cod } => dom
                        .iter()
                        .chain(cod.iter())
                        .for_each(|t| term_slots(t, out)),
                    Source::Domain => {}
                }
            }
            plan.closed.iter().for_each(|c| cf_slots(c, out));
            if let Some(p) = &plan.proposal {
                p.targets.iter().flatten().for_each(|t| term_slots(t, out));
            }
        }
        CF::Indexed(ix) => cf_slots(&ix.body, out),
        CF::Macro(m) => m.groups.iter().flatten().for_each(|t| term_slots(t, out)),
    }
}

fn occurrences(t: &CTerm, slot: usize) -> usize {
    match t {
        CTerm::Var(s) => usize::from(*s == slot),
        CTerm::Un(_, a) | CTerm::Pow(a, _) => occurrences(a, slot),
        CTerm::Comp(a, b) => occurrences(a, slot) + occurrences(b, slot),
        CTerm::Unit => 0,
    }
}

fn isolate(t: &CTerm, slot: usize, steps: &mut Vec<Step>) -> bool {
    match t {
        CTerm::Var(s) => *s == slot,
        CTerm::Comp(a, b) => {
            if occurrences(a, slot) > 0 {
                steps.push(Step::Right((**b).clone()));
                isolate(a, slot, steps)
            } else {
                steps.push(Step::Left((**a).clone()));
                isolate(b, slot, steps)
            }
        }
        CTerm::Un(Func::Inv, a) => {
            steps.push(Step::Inv);
            isolate(a, slot, steps)
        }
        CTerm::Pow(a, k) => {
            steps.push(Step::Root(k.clone()));
            isolate(a, slot, steps)
        }
        _ => false,
    }
}

fn solve_from(f: &CF, slot: usize) -> Option<Solve> {
    let CF::Eq(l, r) = f else { return None };
    let (side, known) = match (occurrences(l, slot), occurrences(r, slot)) {
        (1, 0) => (l, r),
        (0, 1) => (r, l),
        _ => return None,
    };
    let mut steps = Vec::new();
    isolate(side, slot, &mut steps).then(|| Solve {
        known: known.clone(),
        steps,
    })
}

/// `dom(v) = t` or `cod(v) = t` with `t` free of `v`.
fn endpoint_from(f: &CF, slot: usize) -> Option<(Func, CTerm)> {
    let CF::Eq(l, r) = f else { return None };
    for (a, b) in [(l, r), (r, l)] {
        if let CTerm::Un(func @ (Func::Dom | Func::Cod), inner) = a {
            if matches!(**inner, CTerm::Var(s) if s == slot) && occurrences(b, slot) == 0 {
                return Some((*func, b.clone()));
            }
        }
    }
    None
}

fn is_index_bounded(e: &IntExpr) -> bool {
    match e {
        IntExpr::Bound => true,
        IntExpr::Neg(inner) => is_index_bounded(inner),
        _ => false,
    }
}

impl Compiler {
    fn int(&self, e: &IntExpr, scope: &Scope) -> CInt {
        match e {
            IntExpr::Lit(v) => CInt::Lit(*v),
            IntExpr::Bound => CInt::Bound,
            IntExpr::Neg(inner) => CInt::Neg(Box::new(self.int(inner, scope))),
            IntExpr::Var(v) => match scope.get(v) {
                Some(Binding::Int(s)) => CInt::Var(s),
                other => panic!(
                    "index `{v}` not in scope ({other:?}); sort checking should have caught this"
                ),
            },
        }
    }

    fn term(&self, t: &Term, scope: &Scope) -> CTerm {
        match t {
            Term::Var(v) => match scope.get(v) {
                Some(Binding::Term(s)) => CTerm::Var(s),
                other => panic!("variable `{v}` not in scope ({other:?})"),
            },
            Term::App(Func::Unit, _) => CTerm::Unit,
            Term::App(Func::Comp, args) => CTerm::Comp(
                Box::new(self.term(&args[0], scope)),
                Box::new(self.term(&args[1], scope)),
            ),
            Term::App(f, args) => CTerm::Un(*f, Box::new(self.term(&args[0], scope))),
            Term::Pow(inner, k) => {
                CTerm::Pow(Box::new(self.term(inner, scope)), self.int(k, scope))
            }
        }
    }

    fn formula(&self, f: &Formula, scope: &Scope) -> CF {
        match f {
            Formula::True => CF::Const(true),
            Formula::False => CF::Const(false),
            Formula::Eq(a, b) => CF::Eq(self.term(a, scope), self.term(b, scope)),
            Formula::Pred(p, args) => {
                CF::Pred(*p, args.iter().map(|a| self.term(a, scope)).collect())
            }
            Formula::And(items) => CF::And(items.iter().map(|i| self.formula(i, scope)).collect()),
            Formula::Or(items) => CF::Or(items.iter().map(|i| self.formula(i, scope)).collect()),
            Formula::Exists(vars, body) => {
                let mut inner = scope.clone();
                let mut block = Vec::new();
                for (v, s) in vars {
                    let slot = self.slots.term();
                    inner.0.push((v.clone(), Binding::Term(slot)));
                    block.push((slot, *s));
                }
                let conjuncts: Vec<CF> = flatten(body)
                    .iter()
                    .map(|c| self.formula(c, &inner))
                    .collect();
                CF::Exists(Box::new(build_plan(&block, conjuncts, true)))
            }
            Formula::Indexed {
                conj,
                var,
                lo,
                hi,
                body,
            } => {
                let slot = self.slots.int();
                let mut inner = scope.clone();
                inner.0.push((var.clone(), Binding::Int(slot)));
                CF::Indexed(Box::new(CIndexed {
                    conj: *conj,
                    slot,
                    lo: self.int(lo, scope),
                    hi: self.int(hi, scope),
                    truncating: is_index_bounded(lo) || is_index_bounded(hi),
                    body: self.formula(body, &inner),
                }))
            }
            Formula::Macro(call) => CF::Macro(Box::new(CMacro {
                call: call.clone(),
                groups: call
                    .groups
                    .iter()
                    .map(|g| g.iter().map(|t| self.term(t, scope)).collect())
                    .collect(),
                scope: scope.clone(),
                slots: self.slots.clone(),
                expansion: OnceCell::new(),
            })),
        }
    }
}

/// Splits conjunctions and unfolds the loop macros into their atoms.
fn flatten(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    fn go(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::True => {}
            Formula::And(items) => items.iter().for_each(|i| go(i, out)),
            Formula::Macro(call)
                if matches!(
                    call.kind,
                    MacroKind::Loop | MacroKind::Pos | MacroKind::Phi | MacroKind::Psi
                ) =>
            {
                // these expand to atoms only, no fresh names needed
                let mut fresh = Fresh::avoiding(std::iter::empty());
                go(&expand(call, &mut fresh), out)
            }
            other => out.push(other.clone()),
        }
    }
    go(f, &mut out);
    out
}

/// `Gen3(x; y; z)` as `Gen(x; z) /\ GenRotated(y; z)`, so that the two
/// halves can be filtered on separately.
fn split_gen3(m: &CMacro) -> [CF; 2] {
    let half = |kind: MacroKind, i: usize| {
        CF::Macro(Box::new(CMacro {
            call: MacroCall {
                kind,
                param: None,
                groups: vec![m.call.groups[i].clone(), m.call.groups[2].clone()],
            },
            groups: vec![m.groups[i].clone(), m.groups[2].clone()],
            scope: m.scope.clone(),
            slots: m.slots.clone(),
            expansion: OnceCell::new(),
        }))
    };
    [half(MacroKind::Gen, 0), half(MacroKind::GenRotated, 1)]
}

fn build_plan(block: &[(usize, Sort)], conjuncts: Vec<CF>, existential: bool) -> Plan {
    let position: HashMap<usize, usize> = block
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (*s, i))
        .collect();
    let mut vars: Vec<PVar> = block
        .iter()
        .map(|&(slot, sort)| PVar {
            slot,
            sort,
            source: Source::Domain,
            filters: Vec::new(),
        })
        .collect();
    let mut closed = Vec::new();
    let mut proposal = None;
    if existential {
        for c in &conjuncts {
            if let CF::Macro(m) = c {
                if matches!(m.call.kind, MacroKind::Gen | MacroKind::Gen3) && proposal.is_none() {
                    let last = m.groups.last().unwrap();
                    let exact = last.len() == block.len()
                        && last
                            .iter()
                            .zip(block)
                            .all(|(t, (s, _))| matches!(t, CTerm::Var(v) if v == s));
                    let mut used = HashSet::new();
                    m.groups[..m.groups.len() - 1]
                        .iter()
                        .flatten()
                        .for_each(|t| term_slots(t, &mut used));
                    if exact && block.iter().all(|(s, _)| !used.contains(s)) {
                        proposal = Some(Proposal {
                            targets: m.groups[..m.groups.len() - 1].to_vec(),
                        });
                    }
                }
            }
        }
    }
    let conjuncts: Vec<CF> = if existential {
        conjuncts
            .into_iter()
            .flat_map(|c| match c {
                CF::Macro(m) if m.call.kind == MacroKind::Gen3 => {
                    split_gen3(&m).into_iter().collect()
                }
                other => vec![other],
            })
            .collect()
    } else {
        conjuncts
    };
    for c in conjuncts {
        let mut used = HashSet::new();
        cf_slots(&c, &mut used);
        match used.iter().filter_map(|s| position.get(s)).max() {
            None => closed.push(c),
            Some(&level) => vars[level].filters.push(c),
        }
    }
    for v in vars.iter_mut() {
        let slot = v.slot;
        if let Some(s) = v.filters.iter().find_map(|c| solve_from(c, slot)) {
            v.source = Source::Solve(Box::new(s));
            continue;
        }
        let (mut dom, mut cod) = (None, None);
        for c in &v.filters {
            match endpoint_from(c, slot) {
                Some((Func::Dom, t)) if dom.is_none() => dom = Some(t),
                Some((Func::Cod, t)) if cod.is_none() => cod = Some(t),
                _ => {}
            }
        }
        if dom.is_some() || cod.is_some() {
            v.source = Source::From { dom, cod };
        }
    }
    let complete = vars
        .iter()
        .all(|v| matches!(v.source, Source::Solve(_)) || v.sort == Sort::Obj);
    Plan {
        vars,
        closed,
        proposal,
        complete,
    }
}

fn contains_proposal(f: &CF) -> bool {
    match f {
        CF::Exists(p) => {
            p.proposal.is_some()
                || p.vars
                    .iter()
                    .flat_map(|v| v.filters.iter())
                    .any(contains_proposal)
                || p.closed.iter().any(contains_proposal)
        }
        CF::And(items) | CF::Or(items) => items.iter().any(contains_proposal),
        CF::Indexed(ix) => contains_proposal(&ix.body),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// evaluation

struct Ctx<'s> {
    s: &'s dyn Structure,
    env: Vec<Value>,
    ints: Vec<i64>,
    bounds: Bounds,
    native: bool,
    hints_only: bool,
    domains: HashMap<(Sort, i64), Rc<Vec<Value>>>,
    deadline: Option<Instant>,
    ticks: u32,
    expired: bool,
}

impl<'s> Ctx<'s> {
    fn new(s: &'s dyn Structure, bounds: Bounds, native: bool, deadline: Option<Instant>) -> Self {
        Ctx {
            s,
            env: Vec::new(),
            ints: Vec::new(),
            bounds,
            native,
            hints_only: false,
            domains: HashMap::new(),
            deadline,
            ticks: 0,
            expired: false,
        }
    }

    fn ensure(&mut self, slots: &Slots) {
        let (t, i) = (slots.terms.get(), slots.ints.get());
        if self.env.len() < t {
            self.env.resize(t, Value::Obj(0));
        }
        if self.ints.len() < i {
            self.ints.resize(i, 0);
        }
    }

    fn domain(&mut self, sort: Sort, bound: i64) -> Rc<Vec<Value>> {
        let s = self.s;
        self.domains
            .entry((sort, bound))
            .or_insert_with(|| Rc::new(s.domain(sort, bound)))
            .clone()
    }

    fn tick(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.expired = true;
                }
            }
        }
        self.expired
    }

    fn int(&self, e: &CInt) -> i64 {
        match e {
            CInt::Lit(v) => *v,
            CInt::Var(s) => self.ints[*s],
            CInt::Bound => self.bounds.index_bound,
            CInt::Neg(inner) => -self.int(inner),
        }
    }

    fn term(&self, t: &CTerm) -> Option<Value> {
        match t {
            CTerm::Var(s) => Some(self.env[*s]),
            CTerm::Un(f, a) => {
                let v = self.term(a)?;
                match f {
                    Func::Dom => self.s.dom(v),
                    Func::Cod => self.s.cod(v),
                    Func::Id => self.s.id(v),
                    Func::Inv => self.s.inv(v),
                    Func::Cyc => self.s.cyc(v),
                    _ => None,
                }
            }
            CTerm::Comp(g, f) => {
                let g = self.term(g)?;
                let f = self.term(f)?;
                self.s.comp(g, f)
            }
            CTerm::Unit => self.s.unit(),
            CTerm::Pow(a, k) => {
                let v = self.term(a)?;
                self.s.pow(v, self.int(k))
            }
        }
    }

    fn eval(&mut self, f: &CF) -> Tri {
        match f {
            CF::Const(b) => Tri::of(*b),
            CF::Eq(a, b) => match (self.term(a), self.term(b)) {
                (Some(x), Some(y)) => Tri::of(x == y),
                _ => Tri::False,
            },
            CF::Pred(p, args) => {
                let mut vals = [Value::Obj(0); 2];
                for (slot, a) in vals.iter_mut().zip(args) {
                    match self.term(a) {
                        Some(v) => *slot = v,
                        None => return Tri::False,
                    }
                }
                Tri::of(self.s.pred(*p, &vals[..args.len()]))
            }
            CF::And(items) => {
                let mut acc = Tri::True;
                for i in items {
                    acc = acc.min(self.eval(i));
                    if acc == Tri::False {
                        break;
                    }
                }
                acc
            }
            CF::Or(items) => {
                let mut acc = Tri::False;
                for i in items {
                    acc = acc.max(self.eval(i));
                    if acc == Tri::True || self.expired {
                        break;
                    }
                }
                acc
            }
            CF::Exists(plan) => self.exists(plan),
            CF::Indexed(ix) => self.indexed(ix),
            CF::Macro(m) => self.macro_call(m),
        }
    }

    fn indexed(&mut self, ix: &CIndexed) -> Tri {
        let (lo, hi) = (self.int(&ix.lo), self.int(&ix.hi));
        let mut acc = if ix.conj { Tri::True } else { Tri::False };
        for k in lo..=hi {
            self.ints[ix.slot] = k;
            let v = self.eval(&ix.body);
            if ix.conj {
                acc = acc.min(v);
                if acc == Tri::False {
                    return acc;
                }
            } else {
                acc = acc.max(v);
                if acc == Tri::True {
                    return acc;
                }
            }
            if self.expired {
                break;
            }
        }
        match (ix.truncating, ix.conj, acc) {
            (true, true, Tri::True) => Tri::Bounded,
            (true, false, Tri::False) => Tri::Unknown,
            _ => acc,
        }
    }

    fn macro_call(&mut self, m: &CMacro) -> Tri {
        if self.native {
            let mut vals: Vec<Vec<Value>> = Vec::with_capacity(m.groups.len());
            let mut defined = true;
            for g in &m.groups {
                let mut row = Vec::with_capacity(g.len());
                for t in g {
                    match self.term(t) {
                        Some(v) => row.push(v),
                        None => defined = false,
                    }
                }
                vals.push(row);
            }
            if defined {
                let refs: Vec<&[Value]> = vals.iter().map(Vec::as_slice).collect();
                if let Some(b) = self.s.native_macro(m.call.kind, m.call.param, &refs) {
                    return Tri::of(b);
                }
            }
        }
        let body = m.expansion.get_or_init(|| {
            let mut fresh = Fresh::avoiding(m.scope.names());
            let expanded = expand(&m.call, &mut fresh);
            Compiler {
                slots: m.slots.clone(),
            }
            .formula(&expanded, &m.scope)
        });
        self.ensure(&m.slots);
        self.eval(body)
    }

    fn solve(&self, s: &Solve) -> Option<Vec<Value>> {
        let mut vals = match self.term(&s.known) {
            Some(v) => vec![v],
            None => return Some(Vec::new()),
        };
        for step in &s.steps {
            let mut next = Vec::with_capacity(vals.len());
            for v in vals {
                match step {
                    Step::Right(b) => {
                        if let Some(r) = self
                            .term(b)
                            .and_then(|b| self.s.inv(b))
                            .and_then(|ib| self.s.comp(v, ib))
                        {
                            next.push(r);
                        }
                    }
                    Step::Left(a) => {
                        if let Some(r) = self
                            .term(a)
                            .and_then(|a| self.s.inv(a))
                            .and_then(|ia| self.s.comp(ia, v))
                        {
                            next.push(r);
                        }
                    }
                    Step::Inv => next.extend(self.s.inv(v)),
                    Step::Root(k) => next.extend(self.s.roots(v, self.int(k))?),
                }
            }
            vals = next;
        }
        Some(vals)
    }

    /// Candidate values for one variable and whether they are all of them.
    fn candidates(&mut self, v: &PVar, bound: i64, anchor: bool) -> Option<(Rc<Vec<Value>>, bool)> {
        if let Source::Solve(s) = &v.source {
            if let Some(vals) = self.solve(s) {
                return Some((Rc::new(vals), true));
            }
        }
        let exhaustive = v.sort == Sort::Obj && self.s.domain_exhaustive(Sort::Obj);
        if self.hints_only && !exhaustive {
            return None;
        }
        if anchor {
            if let Some(a) = self.s.anchors(v.sort, bound) {
                return Some((Rc::new(a), exhaustive));
            }
        }
        if let Source::From { dom, cod } = &v.source {
            let d = dom.as_ref().map(|t| self.term(t));
            let c = cod.as_ref().map(|t| self.term(t));
            let list = match (d, c) {
                (Some(None), _) | (_, Some(None)) => Vec::new(),
                (Some(Some(obj)), c) => {
                    let all = self.s.arrows_from(obj, bound);
                    match c {
                        Some(Some(target)) => all
                            .into_iter()
                            .filter(|f| self.s.cod(*f) == Some(target))
                            .collect(),
                        _ => all,
                    }
                }
                (None, Some(Some(target))) => self
                    .domain(v.sort, bound)
                    .iter()
                    .copied()
                    .filter(|f| self.s.cod(*f) == Some(target))
                    .collect(),
                (None, None) => unreachable!(),
            };
            return Some((Rc::new(list), false));
        }
        Some((self.domain(v.sort, bound), exhaustive))
    }

    fn exists(&mut self, plan: &Plan) -> Tri {
        let mut base = Tri::True;
        for c in &plan.closed {
            base = base.min(self.eval(c));
            if base == Tri::False {
                return Tri::False;
            }
        }
        let mut best = Tri::False;
        if let Some(p) = &plan.proposal {
            let mut targets = Vec::with_capacity(p.targets.len());
            for g in &p.targets {
                let row: Option<Vec<Value>> = g.iter().map(|t| self.term(t)).collect();
                match row {
                    Some(r) => targets.push(r),
                    None => {
                        return Tri::False.max(if plan.complete {
                            Tri::False
                        } else {
                            Tri::Unknown
                        })
                    }
                }
            }
            let refs: Vec<&[Value]> = targets.iter().map(Vec::as_slice).collect();
            for cand in self.s.propose_generators(&refs, plan.vars.len()) {
                for (v, val) in plan.vars.iter().zip(&cand) {
                    self.env[v.slot] = *val;
                }
                let mut acc = base;
                for v in &plan.vars {
                    for c in &v.filters {
                        acc = acc.min(self.eval(c));
                        if acc == Tri::False {
                            break;
                        }
                    }
                    if acc == Tri::False {
                        break;
                    }
                }
                best = best.max(acc);
                if best == Tri::True {
                    return best;
                }
            }
        }
        let bound = self.bounds.witness_depth;
        let mut complete = plan.complete && !self.hints_only;
        let mut visit = |_: &mut Ctx, acc: Tri| {
            best = best.max(acc);
            best != Tri::True
        };
        let (_, exhausted) = self.dfs(plan, 0, bound, base, false, &mut visit);
        complete &= exhausted;
        if best == Tri::False && !complete {
            Tri::Unknown
        } else {
            best
        }
    }

    /// Depth-first enumeration of `plan` from `level`. `visit` sees each
    /// full assignment with the meet of its filters and returns whether to
    /// continue. Returns (continue, every candidate list was complete).
    fn dfs(
        &mut self,
        plan: &Plan,
        level: usize,
        bound: i64,
        acc: Tri,
        anchor: bool,
        visit: &mut dyn FnMut(&mut Ctx, Tri) -> bool,
    ) -> (bool, bool) {
        if level == plan.vars.len() {
            return (visit(self, acc), true);
        }
        let v = &plan.vars[level];
        let Some((cands, mut complete)) = self.candidates(v, bound, anchor && level == 0) else {
            return (true, false);
        };
        for &val in cands.iter() {
            if self.tick() {
                return (false, false);
            }
            self.env[v.slot] = val;
            let mut here = acc;
            for c in &v.filters {
                here = here.min(self.eval(c));
                if here == Tri::False {
                    break;
                }
            }
            if here == Tri::False {
                continue;
            }
            let (go, sub) = self.dfs(plan, level + 1, bound, here, anchor, visit);
            complete &= sub;
            if !go {
                return (false, complete);
            }
        }
        (true, complete)
    }
}

// ---------------------------------------------------------------------------
// sequents

struct CompiledSequent {
    names: Vec<(String, usize)>,
    components: Vec<Plan>,
    closed: Vec<CF>,
    antecedent: CF,
    consequent: CF,
    hints: bool,
    join: Option<JoinSpec>,
    slots: Rc<Slots>,
}

/// When the context splits into two components and the consequent is a
/// disjunction of proposal-driven `exists` whose conjuncts each see only one
/// component, the hint pass of a pair is decided by which proposals each
/// side accepts on its own. `sides` gives, per disjunct, per variable, per
/// filter, the component it reads (filters reading neither count as 0);
/// `target_sides` does the same for proposal target groups.
struct JoinSpec {
    sides: Vec<Vec<Vec<usize>>>,
    target_sides: Vec<Vec<usize>>,
}

fn join_items(f: &CF) -> Option<Vec<&Plan>> {
    match f {
        CF::Exists(p) => Some(vec![&**p]),
        CF::Or(items) => items
            .iter()
            .map(|i| match i {
                CF::Exists(p) => Some(&**p),
                _ => None,
            })
            .collect(),
        _ => None,
    }
}

fn join_spec(components: &[Plan], consequent: &CF) -> Option<JoinSpec> {
    if components.len() != 2 {
        return None;
    }
    let members: Vec<HashSet<usize>> = components
        .iter()
        .map(|p| p.vars.iter().map(|v| v.slot).collect())
        .collect();
    let side_of = |used: &HashSet<usize>| -> Option<usize> {
        let hits: Vec<bool> = members.iter().map(|m| !m.is_disjoint(used)).collect();
        match (hits[0], hits[1]) {
            (true, true) => None,
            (_, true) => Some(1),
            _ => Some(0),
        }
    };
    let mut sides = Vec::new();
    let mut target_sides = Vec::new();
    for plan in join_items(consequent)? {
        let proposal = plan.proposal.as_ref()?;
        let first = plan.vars.first()?;
        if !plan.closed.is_empty()
            || first.sort == Sort::Obj
            || matches!(first.source, Source::Solve(_))
        {
            return None;
        }
        let mut per_var = Vec::new();
        for v in &plan.vars {
            let mut per_filter = Vec::new();
            for c in &v.filters {
                let mut used = HashSet::new();
                cf_slots(c, &mut used);
                per_filter.push(side_of(&used)?);
            }
            per_var.push(per_filter);
        }
        sides.push(per_var);
        let mut per_group = Vec::new();
        for g in &proposal.targets {
            let mut used = HashSet::new();
            g.iter().for_each(|t| term_slots(t, &mut used));
            per_group.push(side_of(&used)?);
        }
        target_sides.push(per_group);
    }
    Some(JoinSpec {
        sides,
        target_sides,
    })
}

fn compile_sequent(seq: &Sequent) -> CompiledSequent {
    let slots = Rc::new(Slots::default());
    let compiler = Compiler {
        slots: slots.clone(),
    };
    let mut scope = Scope::default();
    let mut block = Vec::new();
    for (v, s) in &seq.context {
        let slot = slots.term();
        scope.0.push((v.clone(), Binding::Term(slot)));
        block.push((slot, *s));
    }
    let conjuncts: Vec<CF> = flatten(&seq.antecedent)
        .iter()
        .map(|c| compiler.formula(c, &scope))
        .collect();
    // union-find over context positions
    let position: HashMap<usize, usize> = block
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (*s, i))
        .collect();
    let mut parent: Vec<usize> = (0..block.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    let mut owners = Vec::with_capacity(conjuncts.len());
    for c in &conjuncts {
        let mut used = HashSet::new();
        cf_slots(c, &mut used);
        let mut pos: Vec<usize> = used
            .iter()
            .filter_map(|s| position.get(s).copied())
            .collect();
        pos.sort_unstable();
        for w in pos.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
        owners.push(pos.first().copied());
    }
    let roots: Vec<usize> = (0..block.len()).map(|i| find(&mut parent, i)).collect();
    let mut order: Vec<usize> = roots.clone();
    order.sort_unstable();
    order.dedup();
    let mut per_component: Vec<Vec<CF>> = order.iter().map(|_| Vec::new()).collect();
    let mut closed = Vec::new();
    for (c, owner) in conjuncts.into_iter().zip(owners) {
        match owner {
            None => closed.push(c),
            Some(p) => {
                let idx = order.iter().position(|&r| r == roots[p]).unwrap();
                per_component[idx].push(c);
            }
        }
    }
    let components: Vec<Plan> = order
        .iter()
        .zip(per_component)
        .map(|(&root, conj)| {
            let members: Vec<(usize, Sort)> = (0..block.len())
                .filter(|&i| roots[i] == root)
                .map(|i| block[i])
                .collect();
            build_plan(&members, conj, false)
        })
        .collect();
    let consequent = compiler.formula(&seq.consequent, &scope);
    let antecedent = compiler.formula(&seq.antecedent, &scope);
    let hints = contains_proposal(&consequent);
    let join = if hints {
        join_spec(&components, &consequent)
    } else {
        None
    };
    CompiledSequent {
        names: seq
            .context
            .iter()
            .zip(&block)
            .map(|((n, _), (s, _))| (n.clone(), *s))
            .collect(),
        components,
        closed,
        antecedent,
        consequent,
        hints,
        join,
        slots,
    }
}

/// Symbols a sequent needs from a structure.
pub fn required_signature(seq: &Sequent) -> (Vec<Sort>, Vec<Func>, Vec<Pred>) {
    let (mut sorts, mut funcs, mut preds) = (Vec::new(), Vec::new(), Vec::new());
    fn push<T: PartialEq>(v: &mut Vec<T>, x: T) {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    fn term(t: &Term, funcs: &mut Vec<Func>) {
        match t {
            Term::Var(_) => {}
            Term::App(f, args) => {
                push(funcs, *f);
                args.iter().for_each(|a| term(a, funcs));
            }
            Term::Pow(a, _) => {
                push(funcs, Func::Pow);
                term(a, funcs);
            }
        }
    }
    fn formula(f: &Formula, sorts: &mut Vec<Sort>, funcs: &mut Vec<Func>, preds: &mut Vec<Pred>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                term(a, funcs);
                term(b, funcs);
            }
            Formula::Pred(p, args) => {
                push(preds, *p);
                args.iter().for_each(|a| term(a, funcs));
            }
            Formula::And(items) | Formula::Or(items) => {
                items.iter().for_each(|i| formula(i, sorts, funcs, preds))
            }
            Formula::Exists(vars, body) => {
                vars.iter().for_each(|(_, s)| push(sorts, *s));
                formula(body, sorts, funcs, preds);
            }
            Formula::Indexed { body, .. } => formula(body, sorts, funcs, preds),
            Formula::Macro(call) => {
                push(sorts, Sort::Arrow);
                push(sorts, Sort::Obj);
                push(funcs, Func::Dom);
                push(funcs, Func::Cod);
                push(funcs, Func::Comp);
                call.kind
                    .required_preds()
                    .iter()
                    .for_each(|p| push(preds, *p));
                call.kind
                    .required_funcs()
                    .iter()
                    .for_each(|f| push(funcs, *f));
                call.groups.iter().flatten().for_each(|t| term(t, funcs));
            }
        }
    }
    seq.context.iter().for_each(|(_, s)| push(&mut sorts, *s));
    formula(&seq.antecedent, &mut sorts, &mut funcs, &mut preds);
    formula(&seq.consequent, &mut sorts, &mut funcs, &mut preds);
    (sorts, funcs, preds)
}

/// Errors when `seq` uses a symbol outside `sig`.
pub fn check_signature(seq: &Sequent, sig: &Signature) -> Result<(), CheckError> {
    let (sorts, funcs, preds) = required_signature(seq);
    if let Some(s) = sorts.iter().find(|s| !sig.has_sort(**s)) {
        return Err(CheckError::SignatureMismatch(format!(
            "sort {s} not in `{}`",
            sig.name
        )));
    }
    if let Some(f) = funcs.iter().find(|f| !sig.has_func(**f)) {
        return Err(CheckError::SignatureMismatch(format!(
            "function `{}` not in `{}`",
            f.name(),
            sig.name
        )));
    }
    if let Some(p) = preds.iter().find(|p| !sig.has_pred(**p)) {
        return Err(CheckError::SignatureMismatch(format!(
            "predicate `{}` not in `{}`",
            p.name(),
            sig.name
        )));
    }
    Ok(())
}

fn instance_value(ante: Tri, cons: Tri) -> Tri {
    if ante == Tri::False || cons == Tri::True {
        Tri::True
    } else if ante == Tri::True {
        cons
    } else if cons == Tri::False {
        Tri::Unknown
    } else {
        cons
    }
}

struct Search<'a> {
    cs: &'a CompiledSequent,
    lists: Vec<Vec<(Vec<Value>, Tri)>>,
    join: Option<Joined<'a>>,
    instances: u64,
    saw_bounded: bool,
    unknown: Option<Vec<Value>>,
    failure: Option<Vec<Value>>,
}

/// Rows of the second component grouped by the proposal keys of their
/// target groups (`None` when a target is undefined).
struct Joined<'a> {
    spec: &'a JoinSpec,
    items: Vec<&'a Plan>,
    groups: Vec<(Option<Vec<u128>>, Vec<usize>)>,
    partitions: HashMap<(Vec<u128>, usize), Rc<Partition>>,
}

/// For one first-component key and one row group: the proposals the pair
/// would see, and the group's rows split by which of them their own side
/// accepts.
struct Partition {
    universe: Vec<(usize, Vec<Value>)>,
    classes: Vec<(u64, Vec<usize>)>,
}

const JOIN_UNIVERSE: usize = 64;

impl<'a> Joined<'a> {
    fn keys(&self, ctx: &Ctx, side: usize) -> Option<Vec<u128>> {
        let mut out = Vec::new();
        for (plan, sides) in self.items.iter().zip(&self.spec.target_sides) {
            let targets = &plan.proposal.as_ref().unwrap().targets;
            for (g, &s) in targets.iter().zip(sides) {
                if s == side {
                    let vals: Vec<Value> = g.iter().map(|t| ctx.term(t)).collect::<Option<_>>()?;
                    out.push(ctx.s.proposal_key(&vals)?);
                }
            }
        }
        Some(out)
    }

    /// Whether every filter of `item` on `side` is true at `cand`.
    fn accepts(&self, ctx: &mut Ctx, item: usize, cand: &[Value], side: usize) -> bool {
        let plan = self.items[item];
        for (v, val) in plan.vars.iter().zip(cand) {
            ctx.env[v.slot] = *val;
        }
        for (v, sides) in plan.vars.iter().zip(&self.spec.sides[item]) {
            for (c, &s) in v.filters.iter().zip(sides) {
                if s == side && ctx.eval(c) != Tri::True {
                    return false;
                }
            }
        }
        true
    }

    fn partition(
        &mut self,
        ctx: &mut Ctx,
        second: &Plan,
        rows: &[(Vec<Value>, Tri)],
        group: usize,
    ) -> Partition {
        let members = &self.groups[group].1;
        let set_row = |ctx: &mut Ctx, r: usize| {
            for (v, val) in second.vars.iter().zip(&rows[r].0) {
                ctx.env[v.slot] = *val;
            }
        };
        set_row(ctx, members[0]);
        let mut universe = Vec::new();
        for (item, plan) in self.items.iter().enumerate() {
            let targets = &plan.proposal.as_ref().unwrap().targets;
            let vals: Option<Vec<Vec<Value>>> = targets
                .iter()
                .map(|g| g.iter().map(|t| ctx.term(t)).collect())
                .collect();
            let Some(vals) = vals else { continue };
            let refs: Vec<&[Value]> = vals.iter().map(Vec::as_slice).collect();
            for cand in ctx.s.propose_generators(&refs, plan.vars.len()) {
                universe.push((item, cand));
            }
        }
        if universe.len() > JOIN_UNIVERSE {
            return Partition {
                universe: Vec::new(),
                classes: vec![(0, members.clone())],
            };
        }
        let mut classes: Vec<(u64, Vec<usize>)> = Vec::new();
        for &r in members {
            set_row(ctx, r);
            let mut sig = 0u64;
            for (u, (item, cand)) in universe.iter().enumerate() {
                if self.accepts(ctx, *item, cand, 1) {
                    sig |= 1 << u;
                }
            }
            match classes.iter_mut().find(|(s, _)| *s == sig) {
                Some((_, rs)) => rs.push(r),
                None => classes.push((sig, vec![r])),
            }
        }
        Partition { universe, classes }
    }
}

impl Search<'_> {
    fn snapshot(&self, ctx: &Ctx) -> Vec<Value> {
        self.cs.names.iter().map(|(_, s)| ctx.env[*s]).collect()
    }

    fn consequent(&self, ctx: &mut Ctx) -> Tri {
        if self.cs.hints {
            ctx.hints_only = true;
            let v = ctx.eval(&self.cs.consequent);
            ctx.hints_only = false;
            if v == Tri::True {
                return v;
            }
        }
        ctx.eval(&self.cs.consequent)
    }

    /// Evaluates the current full valuation.
    fn leaf(&mut self, ctx: &mut Ctx, ante: Tri) -> bool {
        if ctx.tick() {
            return false;
        }
        self.instances += 1;
        let cons = self.consequent(ctx);
        match instance_value(ante, cons) {
            Tri::False => {
                self.failure = Some(self.snapshot(ctx));
                return false;
            }
            Tri::Unknown => {
                if self.unknown.is_none() {
                    self.unknown = Some(self.snapshot(ctx));
                }
            }
            Tri::Bounded => self.saw_bounded = true,
            Tri::True => {}
        }
        !ctx.expired
    }

    /// Iterates the product of the materialised components, then evaluates.
    fn product(&mut self, ctx: &mut Ctx, idx: usize, ante: Tri) -> bool {
        if idx == self.lists.len() + 1 {
            return self.leaf(ctx, ante);
        }
        if self.join.is_some() {
            return self.joined(ctx, ante);
        }
        let plan = &self.cs.components[idx];
        let list = std::mem::take(&mut self.lists[idx - 1]);
        let mut go = true;
        for (vals, a) in &list {
            for (v, val) in plan.vars.iter().zip(vals) {
                ctx.env[v.slot] = *val;
            }
            if !self.product(ctx, idx + 1, ante.min(*a)) {
                go = false;
                break;
            }
        }
        self.lists[idx - 1] = list;
        go
    }

    /// Pairs the current first-component valuation with every row of the
    /// second. Rows whose hint pass is settled by the partitions count as
    /// true instances; the rest are evaluated one by one, in row order.
    fn joined(&mut self, ctx: &mut Ctx, ante: Tri) -> bool {
        let second = &self.cs.components[1];
        let rows = std::mem::take(&mut self.lists[0]);
        let mut join = self.join.take().unwrap();
        let mut pending: Vec<usize> = Vec::new();
        let mut go = true;
        match join.keys(ctx, 0) {
            None => pending.extend(0..rows.len()),
            Some(kx) => {
                ctx.hints_only = true;
                let mut accepted: HashMap<(usize, Vec<Value>), bool> = HashMap::new();
                for g in 0..join.groups.len() {
                    if ctx.tick() {
                        go = false;
                        break;
                    }
                    if join.groups[g].0.is_none() {
                        pending.extend(&join.groups[g].1);
                        continue;
                    }
                    let key = (kx.clone(), g);
                    let part = match join.partitions.get(&key) {
                        Some(p) => p.clone(),
                        None => {
                            let p = Rc::new(join.partition(ctx, second, &rows, g));
                            join.partitions.insert(key, p.clone());
                            p
                        }
                    };
                    let mut sig = 0u64;
                    for (u, (item, cand)) in part.universe.iter().enumerate() {
                        let ok = match accepted.get(&(*item, cand.clone())) {
                            Some(&b) => b,
                            None => {
                                let b = join.accepts(ctx, *item, cand, 0);
                                accepted.insert((*item, cand.clone()), b);
                                b
                            }
                        };
                        if ok {
                            sig |= 1 << u;
                        }
                    }
                    for (s, members) in &part.classes {
                        if s & sig == 0 {
                            pending.extend(members);
                        }
                    }
                }
                ctx.hints_only = false;
            }
        }
        if go {
            self.instances += (rows.len() - pending.len()) as u64;
            pending.sort_unstable();
            for r in pending {
                for (v, val) in second.vars.iter().zip(&rows[r].0) {
                    ctx.env[v.slot] = *val;
                }
                if !self.leaf(ctx, ante.min(rows[r].1)) {
                    go = false;
                    break;
                }
            }
        }
        self.join = Some(join);
        self.lists[0] = rows;
        go && !ctx.expired
    }
}

/// Checks `seq` in `structure` within `bounds`.
pub fn check(
    structure: &dyn Structure,
    seq: &Sequent,
    bounds: &Bounds,
    opts: &CheckOptions,
) -> Result<CheckOutcome, CheckError> {
    check_signature(seq, &structure.signature())?;
    let cs = compile_sequent(seq);
    let mut ctx = Ctx::new(structure, *bounds, opts.native_macros, opts.deadline);
    ctx.ensure(&cs.slots);

    let mut closed = Tri::True;
    for c in &cs.closed {
        closed = closed.min(ctx.eval(c));
    }
    let exhaustive = seq
        .context
        .iter()
        .all(|(_, s)| structure.domain_exhaustive(*s));

    let mut search = Search {
        cs: &cs,
        lists: Vec::new(),
        join: None,
        instances: 0,
        saw_bounded: false,
        unknown: None,
        failure: None,
    };
    if closed != Tri::False {
        for plan in cs.components.iter().skip(1) {
            let mut rows = Vec::new();
            let mut collect = |c: &mut Ctx, acc: Tri| {
                rows.push((
                    plan.vars.iter().map(|v| c.env[v.slot]).collect::<Vec<_>>(),
                    acc,
                ));
                true
            };
            ctx.dfs(plan, 0, bounds.arrow_bound, Tri::True, false, &mut collect);
            search.lists.push(rows);
        }
        if let Some(spec) = cs.join.as_ref().filter(|_| opts.join) {
            let items = join_items(&cs.consequent).unwrap();
            let mut joined = Joined {
                spec,
                items,
                groups: Vec::new(),
                partitions: HashMap::new(),
            };
            let mut index: HashMap<Option<Vec<u128>>, usize> = HashMap::new();
            for (r, (vals, _)) in search.lists[0].iter().enumerate() {
                for (v, val) in cs.components[1].vars.iter().zip(vals) {
                    ctx.env[v.slot] = *val;
                }
                let key = joined.keys(&ctx, 1);
                let g = *index.entry(key.clone()).or_insert_with(|| {
                    joined.groups.push((key, Vec::new()));
                    joined.groups.len() - 1
                });
                joined.groups[g].1.push(r);
            }
            search.join = Some(joined);
        }
        match cs.components.first() {
            Some(first) => {
                let mut visit = |c: &mut Ctx, acc: Tri| search.product(c, 1, acc);
                ctx.dfs(
                    first,
                    0,
                    bounds.arrow_bound,
                    closed,
                    opts.symmetry,
                    &mut visit,
                );
            }
            None => {
                search.product(&mut ctx, 1, closed);
            }
        }
    }
    if ctx.expired {
        return Err(CheckError::DeadlineExceeded);
    }
    let name = |vals: &[Value]| Valuation {
        bindings: cs
            .names
            .iter()
            .map(|(n, _)| n.clone())
            .zip(vals.iter().copied())
            .collect(),
    };
    let verdict = if let Some(vals) = &search.failure {
        let reverified = reverify(structure, &cs, vals, bounds);
        Verdict::Fails(Counterexample {
            valuation: name(vals),
            reverified,
        })
    } else if let Some(vals) = &search.unknown {
        Verdict::UnknownAtBound(name(vals))
    } else if search.saw_bounded || !exhaustive {
        Verdict::HoldsUpToBound
    } else {
        Verdict::Holds
    };
    Ok(CheckOutcome {
        verdict,
        instances: search.instances,
    })
}

/// Re-evaluates a counterexample with macros expanded and no hint pass.
fn reverify(
    structure: &dyn Structure,
    cs: &CompiledSequent,
    vals: &[Value],
    bounds: &Bounds,
) -> bool {
    let mut ctx = Ctx::new(structure, *bounds, false, None);
    ctx.ensure(&cs.slots);
    for ((_, slot), v) in cs.names.iter().zip(vals) {
        ctx.env[*slot] = *v;
    }
    let ante = ctx.eval(&cs.antecedent);
    let cons = ctx.eval(&cs.consequent);
    ante == Tri::True && cons <= Tri::Unknown
}

/// Evaluates a formula under a valuation of its free variables.
pub fn evaluate(
    structure: &dyn Structure,
    formula: &Formula,
    valuation: &[(String, Sort, Value)],
    bounds: &Bounds,
    native_macros: bool,
) -> Tri {
    let slots = Rc::new(Slots::default());
    let compiler = Compiler {
        slots: slots.clone(),
    };
    let mut scope = Scope::default();
    let mut assigned = Vec::new();
    for (name, _, v) in valuation {
        let slot = slots.term();
        scope.0.push((name.clone(), Binding::Term(slot)));
        assigned.push((slot, *v));
    }
    let cf = compiler.formula(formula, &scope);
    let mut ctx = Ctx::new(structure, *bounds, native_macros, None);
    ctx.ensure(&slots);
    for (slot, v) in assigned {
        ctx.env[slot] = v;
    }
    ctx.eval(&cf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::CycGroupoid;
    use crate::logic::parser::parse_sequent;
    use crate::logic::structure::GroupoidStructure;

    fn xn(n: usize) -> GroupoidStructure {
        GroupoidStructure::new(CycGroupoid::new(n).unwrap())
    }

    fn run(s: &dyn Structure, text: &str, b: Bounds) -> Verdict {
        check(
            s,
            &parse_sequent(text).unwrap(),
            &b,
            &CheckOptions::default(),
        )
        .unwrap()
        .verdict
    }

    #[test]
    fn antisymmetry_holds_up_to_bound() {
        let v = run(
            &xn(3),
            "f:A | P(f) /\\ P(inv(f)) |- f = id(dom(f))",
            Bounds::new(9, 9),
        );
        assert_eq!(v, Verdict::HoldsUpToBound);
    }

    #[test]
    fn positive_is_not_nontrivial() {
        let v = run(&xn(2), "f:A | P(f) |- T(f)", Bounds::new(4, 4));
        let Verdict::Fails(c) = v else {
            panic!("{v:?}")
        };
        assert!(c.reverified);
        assert_eq!(c.valuation.to_string(), "f = 0@0");
    }

    #[test]
    fn object_sequents_hold_outright() {
        let v = run(&xn(3), "a:O |- P(C(a))", Bounds::new(3, 3));
        assert_eq!(v, Verdict::Holds);
        let v = run(&xn(3), "x:O | T(id(x)) |- false", Bounds::new(3, 3));
        assert_eq!(v, Verdict::Holds);
    }

    #[test]
    fn witness_search() {
        let v = run(
            &xn(3),
            "f:A | P(f) |- exists g:A . P(g) /\\ T(g o f)",
            Bounds::new(9, 9),
        );
        assert_eq!(v, Verdict::HoldsUpToBound);
        let v = run(
            &xn(3),
            "f:A | P(f) |- exists g:A . P(g) /\\ T(g o f)",
            Bounds::new(9, 9).with_witness_depth(0),
        );
        assert!(matches!(v, Verdict::UnknownAtBound(_)), "{v:?}");
    }

    #[test]
    fn truncated_conjunction_is_bounded() {
        let v = run(
            &xn(2),
            "f:A | T(f) |- AND n in 1..B . T(pow(f, n))",
            Bounds::new(4, 4),
        );
        assert_eq!(v, Verdict::HoldsUpToBound);
        let v = run(
            &xn(2),
            "a:O |- AND n in 1..B . P(pow(C(a), n))",
            Bounds::new(4, 4),
        );
        assert_eq!(v, Verdict::HoldsUpToBound);
        let v = run(
            &xn(2),
            "a:O |- AND n in 1..3 . P(pow(C(a), n))",
            Bounds::new(4, 4),
        );
        assert_eq!(v, Verdict::Holds);
    }

    #[test]
    fn undefined_composition_is_false() {
        let v = run(&xn(3), "f:A, g:A |- g o f = g o f", Bounds::new(1, 1));
        assert!(v.is_fails());
    }

    #[test]
    fn signature_mismatch() {
        let q = crate::logic::structure::RationalStructure::new(
            crate::qgroups::RationalSubgroup::integers(),
        );
        let seq = parse_sequent("f:A |- P(f)").unwrap();
        assert!(matches!(
            check(&q, &seq, &Bounds::new(1, 1), &CheckOptions::default()),
            Err(CheckError::SignatureMismatch(_))
        ));
    }

    fn with_and_without_join(
        s: &dyn Structure,
        text: &str,
        b: Bounds,
    ) -> (CheckOutcome, CheckOutcome) {
        let seq = parse_sequent(text).unwrap();
        let joined = check(s, &seq, &b, &CheckOptions::default()).unwrap();
        let plain = CheckOptions {
            join: false,
            ..CheckOptions::default()
        };
        (joined, check(s, &seq, &b, &plain).unwrap())
    }

    #[test]
    fn join_agrees_with_pairwise_search() {
        let text = "x1:A, x2:A, y1:A | Phi(x1, x2) /\\ Phi(y1) |- \
                    (exists z1:A . Gen3(x1, x2; y1; z1)) \\/ (exists z1:A, z2:A . Gen3(x1, x2; y1; z1, z2)) \\/ \
                    (exists z1:A, z2:A, z3:A . Gen3(x1, x2; y1; z1, z2, z3))";
        for n in 1..=3 {
            let (a, b) =
                with_and_without_join(&xn(n), text, Bounds::new(2 * n as i64, 2 * n as i64));
            assert_eq!(a, b, "X_{n}");
            assert!(a.verdict.holds(), "X_{n}: {}", a.verdict);
        }
    }

    #[test]
    fn join_reports_the_same_missing_witness() {
        // one generator cannot cover two domains
        let text =
            "x1:A, x2:A, y1:A | Phi(x1, x2) /\\ Phi(y1) |- exists z1:A . Gen3(x1, x2; y1; z1)";
        let (a, b) = with_and_without_join(&xn(2), text, Bounds::new(4, 4));
        assert!(
            matches!(a.verdict, Verdict::UnknownAtBound(_)),
            "{}",
            a.verdict
        );
        assert_eq!(a.verdict, b.verdict);
        // and a real failure: the antecedent forces an impossible equation
        let text =
            "x1:A, y1:A | Phi(x1) /\\ Phi(y1) |- (exists z1:A . Gen3(x1; y1; z1)) /\\ x1 = y1";
        let (a, b) = with_and_without_join(&xn(2), text, Bounds::new(4, 4));
        assert!(a.verdict.is_fails(), "{}", a.verdict);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn merge_order() {
        let fails = Verdict::Fails(Counterexample {
            valuation: Valuation { bindings: vec![] },
            reverified: true,
        });
        let unknown = Verdict::UnknownAtBound(Valuation { bindings: vec![] });
        assert!(Verdict::Holds
            .merge(unknown.clone())
            .merge(fails.clone())
            .is_fails());
        assert_eq!(
            Verdict::HoldsUpToBound.merge(Verdict::Holds),
            Verdict::HoldsUpToBound
        );
        assert_eq!(unknown.clone().merge(Verdict::HoldsUpToBound), unknown);
    }
}
