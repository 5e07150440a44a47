//! Abstract syntax for sorted geometric sequents and its concrete printer.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    /// Objects of a groupoid.
    Obj,
    /// Arrows of a groupoid.
    Arrow,
    /// Elements of a group.
    Group,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Obj => "O",
            Sort::Arrow => "A",
            Sort::Group => "G",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        match s {
            "O" => Some(Sort::Obj),
            "A" => Some(Sort::Arrow),
            "G" => Some(Sort::Group),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Dom,
    Cod,
    Id,
    Inv,
    /// The elementary cycle at an object.
    Cyc,
    /// Composition `g o f` (`f` first) or the group product.
    Comp,
    /// The group unit.
    Unit,
    /// Integer powers; the exponent is an [`IntExpr`].
    Pow,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Dom => "dom",
            Func::Cod => "cod",
            Func::Id => "id",
            Func::Inv => "inv",
            Func::Cyc => "C",
            Func::Comp => "o",
            Func::Unit => "1",
            Func::Pow => "pow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pred {
    /// Positivity.
    P,
    /// Non-identical endomorphism.
    T,
    /// Apartness `!=` of group elements.
    Ne,
}

impl Pred {
    pub fn name(self) -> &'static str {
        match self {
            Pred::P => "P",
            Pred::T => "T",
            Pred::Ne => "!=",
        }
    }
}

/// A named signature: which sorts and symbols a sequent may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: &'static str,
    pub sorts: Vec<Sort>,
    pub funcs: Vec<Func>,
    pub preds: Vec<Pred>,
}

impl Signature {
    /// Oriented groupoids: `dom cod id inv o pow` and `P`.
    pub fn groupoid() -> Self {
        Self {
            name: "groupoid",
            sorts: vec![Sort::Obj, Sort::Arrow],
            funcs: vec![
                Func::Dom,
                Func::Cod,
                Func::Id,
                Func::Inv,
                Func::Comp,
                Func::Pow,
            ],
            preds: vec![Pred::P],
        }
    }

    /// Oriented groupoids with the non-triviality predicate `T`.
    pub fn groupoid_t() -> Self {
        let mut s = Self::groupoid();
        s.name = "groupoid_t";
        s.preds.push(Pred::T);
        s
    }

    /// Oriented groupoids with elementary cycles `C`.
    pub fn groupoid_c() -> Self {
        let mut s = Self::groupoid();
        s.name = "groupoid_c";
        s.funcs.push(Func::Cyc);
        s
    }

    /// Ordered groups with apartness: `1 inv o pow`, `P` and `!=`.
    pub fn ordered_group() -> Self {
        Self {
            name: "ordered_group",
            sorts: vec![Sort::Group],
            funcs: vec![Func::Unit, Func::Inv, Func::Comp, Func::Pow],
            preds: vec![Pred::P, Pred::Ne],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "groupoid" => Some(Self::groupoid()),
            "groupoid_t" => Some(Self::groupoid_t()),
            "groupoid_c" => Some(Self::groupoid_c()),
            "ordered_group" => Some(Self::ordered_group()),
            _ => None,
        }
    }

    pub fn names() -> [&'static str; 4] {
        ["groupoid", "groupoid_t", "groupoid_c", "ordered_group"]
    }

    pub fn has_sort(&self, s: Sort) -> bool {
        self.sorts.contains(&s)
    }

    pub fn has_func(&self, f: Func) -> bool {
        self.funcs.contains(&f)
    }

    pub fn has_pred(&self, p: Pred) -> bool {
        self.preds.contains(&p)
    }

    /// The sort that `inv`, `o` and `pow` act on.
    pub fn element_sort(&self) -> Sort {
        if self.has_sort(Sort::Group) {
            Sort::Group
        } else {
            Sort::Arrow
        }
    }
}

/// Integer expressions used as exponents and range endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(i64),
    Var(String),
    /// The index bound supplied at check time.
    Bound,
    Neg(Box<IntExpr>),
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Lit(v) => write!(f, "{v}"),
            IntExpr::Var(v) => f.write_str(v),
            IntExpr::Bound => f.write_str("B"),
            IntExpr::Neg(e) => write!(f, "-{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(Func, Vec<Term>),
    Pow(Box<Term>, IntExpr),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app1(f: Func, t: Term) -> Term {
        Term::App(f, vec![t])
    }

    pub fn dom(t: Term) -> Term {
        Term::app1(Func::Dom, t)
    }

    pub fn cod(t: Term) -> Term {
        Term::app1(Func::Cod, t)
    }

    /// `g o f`.
    pub fn comp(g: Term, f: Term) -> Term {
        Term::App(Func::Comp, vec![g, f])
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::App(_, args) => args.iter().for_each(|a| a.vars(out)),
            Term::Pow(t, _) => t.vars(out),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(Func::Unit, _) => f.write_str("1"),
            Term::App(Func::Comp, args) => {
                write!(f, "{} o ", args[0])?;
                match &args[1] {
                    r @ Term::App(Func::Comp, _) => write!(f, "({r})"),
                    r => write!(f, "{r}"),
                }
            }
            Term::App(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Pow(t, k) => write!(f, "pow({t}, {k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MacroKind {
    /// `L(x1..xn)`: the arrows form a loop.
    Loop,
    /// `Pos(x1..xn)`: every arrow is positive.
    Pos,
    /// `Phi(x1..xn)`: positive non-trivial loop.
    Phi,
    /// `Psi(x1..xn)`: elementary cycle.
    Psi,
    /// `PMin(f)`: minimal positive arrow.
    PMin,
    /// `Gen(x..; z..)`: `z` generates `x` successively.
    Gen,
    /// `Gen3(x..; y..; z..)`: `z` generates `x` and a rotation of `y`.
    Gen3,
    /// `Domeq[k](x..)`: `k` entries share their domain with another entry.
    Domeq,
    /// Second half of `Gen3`: `z` generates some rotation of `y`, from some
    /// starting position. Only produced internally when a `Gen3` is split.
    GenRotated,
}

impl MacroKind {
    pub fn name(self) -> &'static str {
        match self {
            MacroKind::Loop => "L",
            MacroKind::Pos => "Pos",
            MacroKind::Phi => "Phi",
            MacroKind::Psi => "Psi",
            MacroKind::PMin => "PMin",
            MacroKind::Gen => "Gen",
            MacroKind::Gen3 => "Gen3",
            MacroKind::Domeq => "Domeq",
            MacroKind::GenRotated => "GenRotated",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "L" => MacroKind::Loop,
            "Pos" => MacroKind::Pos,
            "Phi" => MacroKind::Phi,
            "Psi" => MacroKind::Psi,
            "PMin" => MacroKind::PMin,
            "Gen" => MacroKind::Gen,
            "Gen3" => MacroKind::Gen3,
            "Domeq" => MacroKind::Domeq,
            _ => return None,
        })
    }

    /// Number of `;`-separated argument groups.
    pub fn groups(self) -> usize {
        match self {
            MacroKind::Gen | MacroKind::GenRotated => 2,
            MacroKind::Gen3 => 3,
            _ => 1,
        }
    }

    pub fn needs_param(self) -> bool {
        self == MacroKind::Domeq
    }

    pub fn required_preds(self) -> &'static [Pred] {
        match self {
            MacroKind::Phi | MacroKind::Gen | MacroKind::Gen3 => &[Pred::P, Pred::T],
            MacroKind::Pos | MacroKind::Psi | MacroKind::PMin => &[Pred::P],
            MacroKind::Loop | MacroKind::Domeq | MacroKind::GenRotated => &[],
        }
    }

    pub fn required_funcs(self) -> &'static [Func] {
        match self {
            MacroKind::Psi | MacroKind::PMin => &[Func::Cyc],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroCall {
    pub kind: MacroKind,
    /// Only `Domeq` carries a parameter.
    pub param: Option<usize>,
    pub groups: Vec<Vec<Term>>,
}

impl fmt::Display for MacroCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if let Some(k) = self.param {
            write!(f, "[{k}]")?;
        }
        f.write_str("(")?;
        for (g, group) in self.groups.iter().enumerate() {
            if g > 0 {
                f.write_str("; ")?;
            }
            for (i, t) in group.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Pred(Pred, Vec<Term>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Vec<(String, Sort)>, Box<Formula>),
    /// `OR k in lo..hi . body` (or `AND` when `conj`), inclusive bounds.
    Indexed {
        conj: bool,
        var: String,
        lo: IntExpr,
        hi: IntExpr,
        body: Box<Formula>,
    },
    Macro(MacroCall),
}

impl Formula {
    pub fn and(mut items: Vec<Formula>) -> Formula {
        match items.len() {
            0 => Formula::True,
            1 => items.pop().unwrap(),
            _ => Formula::And(items),
        }
    }

    pub fn or(mut items: Vec<Formula>) -> Formula {
        match items.len() {
            0 => Formula::False,
            1 => items.pop().unwrap(),
            _ => Formula::Or(items),
        }
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn pred(p: Pred, t: Term) -> Formula {
        Formula::Pred(p, vec![t])
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>,
                    needed: bool,
                    inner: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
            if needed {
                f.write_str("(")?;
                inner(f)?;
                f.write_str(")")
            } else {
                inner(f)
            }
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Pred(Pred::Ne, args) => write!(f, "{} != {}", args[0], args[1]),
            Formula::Pred(p, args) => {
                write!(f, "{}(", p.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Or(items) => wrap(f, prec >= 1, &|f| {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" \\/ ")?;
                    }
                    it.fmt_prec(f, 1)?;
                }
                Ok(())
            }),
            Formula::And(items) => wrap(f, prec >= 2, &|f| {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" /\\ ")?;
                    }
                    it.fmt_prec(f, 2)?;
                }
                Ok(())
            }),
            Formula::Exists(vars, body) => wrap(f, prec >= 1, &|f| {
                f.write_str("exists ")?;
                for (i, (v, s)) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}:{s}")?;
                }
                f.write_str(" . ")?;
                body.fmt_prec(f, 0)
            }),
            Formula::Indexed {
                conj,
                var,
                lo,
                hi,
                body,
            } => wrap(f, prec >= 1, &|f| {
                let kw = if *conj { "AND" } else { "OR" };
                write!(f, "{kw} {var} in {lo}..{hi} . ")?;
                body.fmt_prec(f, 0)
            }),
            Formula::Macro(call) => write!(f, "{call}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub context: Vec<(String, Sort)>,
    pub antecedent: Formula,
    pub consequent: Formula,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, s)) in self.context.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}:{s}")?;
        }
        if !self.context.is_empty() {
            f.write_str(" ")?;
        }
        if self.antecedent != Formula::True {
            write!(f, "| {} ", self.antecedent)?;
        }
        write!(f, "|- {}", self.consequent)
    }
}
