//! Recursive-descent parser for the sequent language, plus sort checking.

use std::collections::HashMap;
use std::fmt;

use super::syntax::{Formula, Func, IntExpr, MacroCall, MacroKind, Pred, Sequent, Sort, Term};

/// Largest argument list accepted by a macro.
pub const MAX_MACRO_ARITY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSymbol,
    SortMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownSymbol => "unknown symbol",
            ParseErrorKind::SortMismatch => "sort mismatch",
        };
        write!(f, "{kind} at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Colon,
    Comma,
    Semi,
    Bar,
    Turnstile,
    Wedge,
    Vee,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Dot,
    DotDot,
    Eq,
    Neq,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Turnstile => f.write_str("`|-`"),
            Tok::Wedge => f.write_str("`/\\`"),
            Tok::Vee => f.write_str("`\\/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Neq => f.write_str("`!=`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError {
        kind: ParseErrorKind::Syntax,
        line,
        col,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok2 = match two.as_str() {
            "|-" => Some(Tok::Turnstile),
            "/\\" => Some(Tok::Wedge),
            "\\/" => Some(Tok::Vee),
            ".." => Some(Tok::DotDot),
            "!=" => Some(Tok::Neq),
            _ => None,
        };
        if let Some(t) = tok2 {
            out.push(Spanned {
                tok: t,
                line: l0,
                col: c0,
            });
            i += 2;
            col += 2;
            continue;
        }
        let tok1 = match c {
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '|' => Some(Tok::Bar),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            '-' => Some(Tok::Minus),
            _ => None,
        };
        if let Some(t) = tok1 {
            out.push(Spanned {
                tok: t,
                line: l0,
                col: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v = s
                .parse::<i64>()
                .map_err(|_| err(l0, c0, format!("integer literal `{s}` out of range")))?;
            out.push(Spanned {
                tok: Tok::Int(v),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const RESERVED: &[&str] = &[
    "exists", "true", "false", "OR", "AND", "in", "B", "o", "pow",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind, message: String) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            kind,
            line: s.line,
            col: s.col,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(
                ParseErrorKind::Syntax,
                format!("expected {want}, found {}", self.peek()),
            ))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.error(
                ParseErrorKind::Syntax,
                format!("expected identifier, found {t}"),
            )),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        match self.peek().clone() {
            Tok::Ident(s) => match Sort::from_keyword(&s) {
                Some(sort) => {
                    self.bump();
                    Ok(sort)
                }
                None => {
                    Err(self.error(ParseErrorKind::UnknownSymbol, format!("unknown sort `{s}`")))
                }
            },
            t => Err(self.error(ParseErrorKind::Syntax, format!("expected sort, found {t}"))),
        }
    }

    fn decls(&mut self) -> PResult<Vec<(String, Sort)>> {
        let mut out = vec![self.decl()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.decl()?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> PResult<(String, Sort)> {
        let v = self.ident()?;
        self.expect(Tok::Colon)?;
        Ok((v, self.sort()?))
    }

    fn sequent(&mut self) -> PResult<Sequent> {
        let context = if matches!(self.peek(), Tok::Ident(_)) {
            self.decls()?
        } else {
            Vec::new()
        };
        let antecedent = if *self.peek() == Tok::Bar {
            self.bump();
            self.formula()?
        } else {
            Formula::True
        };
        self.expect(Tok::Turnstile)?;
        let consequent = self.formula()?;
        Ok(Sequent {
            context,
            antecedent,
            consequent,
        })
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut items = vec![self.conj()?];
        while *self.peek() == Tok::Vee {
            self.bump();
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::Wedge {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.is_ident("exists") {
            self.bump();
            let vars = self.decls()?;
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Ok(Formula::Exists(vars, Box::new(body)));
        }
        if self.is_ident("OR") || self.is_ident("AND") {
            let conj = self.is_ident("AND");
            self.bump();
            let var = self.ident()?;
            if !self.is_ident("in") {
                return Err(self.error(ParseErrorKind::Syntax, "expected `in`".into()));
            }
            self.bump();
            let lo = self.int_expr()?;
            self.expect(Tok::DotDot)?;
            let hi = self.int_expr()?;
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Ok(Formula::Indexed {
                conj,
                var,
                lo,
                hi,
                body: Box::new(body),
            });
        }
        if self.is_ident("true") {
            self.bump();
            return Ok(Formula::True);
        }
        if self.is_ident("false") {
            self.bump();
            return Ok(Formula::False);
        }
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            let attempt = self.formula().and_then(|f| {
                self.expect(Tok::RParen)?;
                Ok(f)
            });
            match attempt {
                Ok(f) if !matches!(self.peek(), Tok::Eq | Tok::Neq | Tok::Ident(_)) => {
                    return Ok(f)
                }
                Ok(_) | Err(_) => self.pos = save,
            }
        }
        if let Tok::Ident(name) = self.peek().clone() {
            let call_like = matches!(self.peek_at(1), Tok::LParen | Tok::LBrack);
            if call_like {
                if let Some(kind) = MacroKind::from_name(&name) {
                    self.bump();
                    return self.macro_call(kind);
                }
                let pred = match name.as_str() {
                    "P" => Some(Pred::P),
                    "T" => Some(Pred::T),
                    _ => None,
                };
                if let Some(p) = pred {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Formula::Pred(p, vec![t]));
                }
            }
        }
        let lhs = self.term()?;
        match self.peek() {
            Tok::Eq => {
                self.bump();
                Ok(Formula::Eq(lhs, self.term()?))
            }
            Tok::Neq => {
                self.bump();
                Ok(Formula::Pred(Pred::Ne, vec![lhs, self.term()?]))
            }
            t => Err(self.error(
                ParseErrorKind::Syntax,
                format!("expected `=` or `!=`, found {t}"),
            )),
        }
    }

    fn macro_call(&mut self, kind: MacroKind) -> PResult<Formula> {
        let mut param = None;
        if *self.peek() == Tok::LBrack {
            self.bump();
            match self.bump() {
                Tok::Int(v) if v >= 0 => param = Some(v as usize),
                t => {
                    return Err(self.error(
                        ParseErrorKind::Syntax,
                        format!("expected macro parameter, found {t}"),
                    ))
                }
            }
            self.expect(Tok::RBrack)?;
        }
        self.expect(Tok::LParen)?;
        let mut groups = vec![vec![self.term()?]];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    groups.last_mut().unwrap().push(self.term()?);
                }
                Tok::Semi => {
                    self.bump();
                    groups.push(vec![self.term()?]);
                }
                _ => break,
            }
        }
        self.expect(Tok::RParen)?;
        let name = kind.name();
        if groups.len() != kind.groups() {
            return Err(self.error(
                ParseErrorKind::Syntax,
                format!(
                    "{name} takes {} argument groups, got {}",
                    kind.groups(),
                    groups.len()
                ),
            ));
        }
        for g in &groups {
            if g.len() > MAX_MACRO_ARITY {
                return Err(self.error(
                    ParseErrorKind::Syntax,
                    format!("{name} argument list longer than {MAX_MACRO_ARITY}"),
                ));
            }
        }
        if kind == MacroKind::PMin && groups[0].len() != 1 {
            return Err(self.error(ParseErrorKind::Syntax, "PMin takes one argument".into()));
        }
        let param = if kind.needs_param() {
            match param {
                Some(k) if k <= groups[0].len() => Some(k),
                Some(k) => {
                    return Err(self.error(
                        ParseErrorKind::Syntax,
                        format!("{name}[{k}] exceeds its {} arguments", groups[0].len()),
                    ))
                }
                None => {
                    return Err(self.error(ParseErrorKind::Syntax, format!("{name} needs `[k]`")))
                }
            }
        } else {
            if let Some(n) = param {
                let arity: usize = groups.iter().map(Vec::len).sum();
                if n != arity {
                    return Err(self.error(
                        ParseErrorKind::Syntax,
                        format!("{name}[{n}] applied to {arity} arguments"),
                    ));
                }
            }
            None
        };
        Ok(Formula::Macro(MacroCall {
            kind,
            param,
            groups,
        }))
    }

    fn int_expr(&mut self) -> PResult<IntExpr> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                if let Tok::Int(v) = self.peek().clone() {
                    self.bump();
                    return Ok(IntExpr::Lit(-v));
                }
                Ok(IntExpr::Neg(Box::new(self.int_expr()?)))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(IntExpr::Lit(v))
            }
            Tok::Ident(s) if s == "B" => {
                self.bump();
                Ok(IntExpr::Bound)
            }
            Tok::Ident(_) => Ok(IntExpr::Var(self.ident()?)),
            t => Err(self.error(
                ParseErrorKind::Syntax,
                format!("expected integer expression, found {t}"),
            )),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.primary()?;
        while self.is_ident("o") {
            self.bump();
            let rhs = self.primary()?;
            t = Term::comp(t, rhs);
        }
        Ok(t)
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Int(1) => {
                self.bump();
                Ok(Term::App(Func::Unit, vec![]))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                let func = match name.as_str() {
                    "dom" => Func::Dom,
                    "cod" => Func::Cod,
                    "id" => Func::Id,
                    "inv" => Func::Inv,
                    "C" => Func::Cyc,
                    "pow" => Func::Pow,
                    _ => {
                        return Err(self.error(
                            ParseErrorKind::UnknownSymbol,
                            format!("unknown function `{name}`"),
                        ))
                    }
                };
                self.bump();
                self.bump();
                let arg = self.term()?;
                if func == Func::Pow {
                    self.expect(Tok::Comma)?;
                    let k = self.int_expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Term::Pow(Box::new(arg), k));
                }
                self.expect(Tok::RParen)?;
                Ok(Term::App(func, vec![arg]))
            }
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            t => Err(self.error(ParseErrorKind::Syntax, format!("expected term, found {t}"))),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(
                ParseErrorKind::Syntax,
                format!("unexpected {} after end of input", self.peek()),
            ))
        }
    }
}

fn parser_for(text: &str) -> PResult<Parser> {
    Ok(Parser {
        toks: lex(text)?,
        pos: 0,
    })
}

/// Parses and sort-checks a sequent.
pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut p = parser_for(text)?;
    let s = p.sequent()?;
    p.finish()?;
    check_sequent(&s)?;
    Ok(s)
}

/// Parses and sort-checks a formula whose free variables are `context`.
pub fn parse_formula(text: &str, context: &[(String, Sort)]) -> Result<Formula, ParseError> {
    let mut p = parser_for(text)?;
    let f = p.formula()?;
    p.finish()?;
    let mut scope = Scope::default();
    for (v, s) in context {
        scope.push_term(v, *s);
    }
    scope.formula(&f)?;
    Ok(f)
}

/// Either result of [`parse`].
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Sequent(Sequent),
    Formula(Formula),
}

/// Parses a sequent when the text contains `|-`, otherwise a closed formula.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    let toks = lex(text)?;
    if toks.iter().any(|t| t.tok == Tok::Turnstile) {
        parse_sequent(text).map(Parsed::Sequent)
    } else {
        parse_formula(text, &[]).map(Parsed::Formula)
    }
}

fn sort_error(message: String) -> ParseError {
    ParseError {
        kind: ParseErrorKind::SortMismatch,
        line: 0,
        col: 0,
        message,
    }
}

fn unknown(message: String) -> ParseError {
    ParseError {
        kind: ParseErrorKind::UnknownSymbol,
        line: 0,
        col: 0,
        message,
    }
}

#[derive(Default)]
struct Scope {
    terms: Vec<(String, Sort)>,
    ints: Vec<String>,
}

impl Scope {
    fn push_term(&mut self, v: &str, s: Sort) {
        self.terms.push((v.to_string(), s));
    }

    fn lookup(&self, v: &str) -> Result<Sort, ParseError> {
        if let Some((_, s)) = self.terms.iter().rev().find(|(n, _)| n == v) {
            return Ok(*s);
        }
        if self.ints.iter().any(|n| n == v) {
            return Err(sort_error(format!("index variable `{v}` used as a term")));
        }
        Err(unknown(format!("undeclared variable `{v}`")))
    }

    fn int(&self, e: &IntExpr) -> Result<(), ParseError> {
        match e {
            IntExpr::Lit(_) | IntExpr::Bound => Ok(()),
            IntExpr::Neg(inner) => self.int(inner),
            IntExpr::Var(v) => {
                if self.ints.iter().any(|n| n == v) {
                    Ok(())
                } else if self.terms.iter().any(|(n, _)| n == v) {
                    Err(sort_error(format!("term variable `{v}` used as an index")))
                } else {
                    Err(unknown(format!("undeclared index `{v}`")))
                }
            }
        }
    }

    fn term(&self, t: &Term) -> Result<Sort, ParseError> {
        let element = |s: Sort, what: &str| -> Result<Sort, ParseError> {
            if s == Sort::Obj {
                Err(sort_error(format!("{what} applied to an object")))
            } else {
                Ok(s)
            }
        };
        match t {
            Term::Var(v) => self.lookup(v),
            Term::Pow(inner, k) => {
                self.int(k)?;
                element(self.term(inner)?, "pow")
            }
            Term::App(Func::Unit, _) => Ok(Sort::Group),
            Term::App(f, args) => {
                let sorts = args
                    .iter()
                    .map(|a| self.term(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let want = |i: usize, s: Sort| -> Result<(), ParseError> {
                    if sorts[i] == s {
                        Ok(())
                    } else {
                        Err(sort_error(format!(
                            "`{}` expects {s}, got {} in `{t}`",
                            f.name(),
                            sorts[i]
                        )))
                    }
                };
                match f {
                    Func::Dom | Func::Cod => {
                        want(0, Sort::Arrow)?;
                        Ok(Sort::Obj)
                    }
                    Func::Id | Func::Cyc => {
                        want(0, Sort::Obj)?;
                        Ok(Sort::Arrow)
                    }
                    Func::Inv => element(sorts[0], "inv"),
                    Func::Comp => {
                        element(sorts[0], "o")?;
                        if sorts[0] != sorts[1] {
                            return Err(sort_error(format!("mixed sorts in `{t}`")));
                        }
                        Ok(sorts[0])
                    }
                    Func::Unit | Func::Pow => unreachable!(),
                }
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<(), ParseError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                let (sa, sb) = (self.term(a)?, self.term(b)?);
                if sa != sb {
                    return Err(sort_error(format!(
                        "`{a}` : {sa} compared with `{b}` : {sb}"
                    )));
                }
                Ok(())
            }
            Formula::Pred(Pred::Ne, args) => {
                let (sa, sb) = (self.term(&args[0])?, self.term(&args[1])?);
                if sa != sb {
                    return Err(sort_error(format!("`!=` between {sa} and {sb}")));
                }
                Ok(())
            }
            Formula::Pred(p, args) => {
                if self.term(&args[0])? == Sort::Obj {
                    return Err(sort_error(format!("`{}` applied to an object", p.name())));
                }
                Ok(())
            }
            Formula::And(items) | Formula::Or(items) => {
                items.iter().try_for_each(|i| self.formula(i))
            }
            Formula::Exists(vars, body) => {
                let mark = self.terms.len();
                for (v, s) in vars {
                    self.push_term(v, *s);
                }
                let r = self.formula(body);
                self.terms.truncate(mark);
                r
            }
            Formula::Indexed {
                var, lo, hi, body, ..
            } => {
                self.int(lo)?;
                self.int(hi)?;
                self.ints.push(var.clone());
                let r = self.formula(body);
                self.ints.pop();
                r
            }
            Formula::Macro(call) => {
                for t in call.groups.iter().flatten() {
                    let s = self.term(t)?;
                    if s != Sort::Arrow {
                        return Err(sort_error(format!(
                            "{} expects arrows, got `{t}` : {s}",
                            call.kind.name()
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Sort-checks a sequent; parse functions call this already.
pub fn check_sequent(s: &Sequent) -> Result<(), ParseError> {
    let mut seen = HashMap::new();
    for (v, sort) in &s.context {
        if seen.insert(v.clone(), *sort).is_some() {
            return Err(sort_error(format!("variable `{v}` declared twice")));
        }
    }
    let mut scope = Scope::default();
    for (v, sort) in &s.context {
        scope.push_term(v, *sort);
    }
    scope.formula(&s.antecedent)?;
    scope.formula(&s.consequent)
}
