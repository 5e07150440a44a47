//! Set-based structures the checker evaluates sequents in.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, Signed, Zero};

use super::syntax::{Func, MacroKind, Pred, Signature, Sort};
use crate::groupoid::CycGroupoid;
use crate::loops::cyclic_walk;
use crate::qgroups::RationalSubgroup;

/// An element of some sort of a structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Obj(u32),
    Arrow { src: u32, disp: i64 },
    Num(Ratio<i64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Obj(a) => write!(f, "a{a}"),
            Value::Arrow { src, disp } => write!(f, "{disp}@{src}"),
            Value::Num(q) => write!(f, "{q}"),
        }
    }
}

/// Interpretation of the symbols of a [`Signature`].
///
/// Functions return `None` where they are undefined (composition of
/// non-composable arrows, powers of non-endomorphisms).
pub trait Structure {
    fn describe(&self) -> String;

    /// The richest signature this structure interprets.
    fn signature(&self) -> Signature;

    /// Elements of `sort` inside the window `bound`, in a fixed order.
    fn domain(&self, sort: Sort, bound: i64) -> Vec<Value>;

    /// Whether [`Structure::domain`] lists the whole carrier of `sort`.
    fn domain_exhaustive(&self, sort: Sort) -> bool;

    /// Orbit representatives of `domain(sort, bound)` under automorphisms,
    /// when the structure has a symmetry worth exploiting.
    fn anchors(&self, _sort: Sort, _bound: i64) -> Option<Vec<Value>> {
        None
    }

    fn arrows_from(&self, _obj: Value, _bound: i64) -> Vec<Value> {
        Vec::new()
    }

    fn dom(&self, v: Value) -> Option<Value>;
    fn cod(&self, v: Value) -> Option<Value>;
    fn id(&self, v: Value) -> Option<Value>;
    fn inv(&self, v: Value) -> Option<Value>;
    fn cyc(&self, v: Value) -> Option<Value>;
    /// `g o f`.
    fn comp(&self, g: Value, f: Value) -> Option<Value>;
    fn unit(&self) -> Option<Value>;
    fn pow(&self, v: Value, k: i64) -> Option<Value>;

    /// All `z` with `pow(z, k) = v`, or `None` when the solution set cannot
    /// be listed.
    fn roots(&self, v: Value, k: i64) -> Option<Vec<Value>>;

    fn pred(&self, p: Pred, args: &[Value]) -> bool;

    /// A direct decision procedure for a macro, if the structure has one.
    fn native_macro(
        &self,
        _kind: MacroKind,
        _param: Option<usize>,
        _groups: &[&[Value]],
    ) -> Option<bool> {
        None
    }

    /// Candidate generators of length `k` for the target loops.
    fn propose_generators(&self, _targets: &[&[Value]], _k: usize) -> Vec<Vec<Value>> {
        Vec::new()
    }

    /// A key for one target group such that `propose_generators` sees each
    /// group only through its key. `None` if there is no such key.
    fn proposal_key(&self, _group: &[Value]) -> Option<u128> {
        None
    }

    fn apply(&self, func: Func, args: &[Value]) -> Option<Value> {
        match func {
            Func::Dom => self.dom(args[0]),
            Func::Cod => self.cod(args[0]),
            Func::Id => self.id(args[0]),
            Func::Inv => self.inv(args[0]),
            Func::Cyc => self.cyc(args[0]),
            Func::Comp => self.comp(args[0], args[1]),
            Func::Unit => self.unit(),
            Func::Pow => None,
        }
    }
}

/// Candidate witness tuples, keyed by (object mask, arrow mask, arity).
type ProposalCache = RefCell<HashMap<(u32, u64, usize), Rc<Vec<Vec<Value>>>>>;

/// `X_n` as a structure for the groupoid signatures.
pub struct GroupoidStructure {
    model: CycGroupoid,
    n: i64,
    proposals: ProposalCache,
}

impl GroupoidStructure {
    pub fn new(model: CycGroupoid) -> Self {
        assert!(model.n() <= 64, "object sets are tracked in a 64-bit mask");
        GroupoidStructure {
            model,
            n: model.n() as i64,
            proposals: RefCell::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> CycGroupoid {
        self.model
    }

    fn arrow(v: Value) -> Option<(u32, i64)> {
        match v {
            Value::Arrow { src, disp } => Some((src, disp)),
            _ => None,
        }
    }

    fn target(&self, src: u32, disp: i64) -> u32 {
        (src as i64 + disp).rem_euclid(self.n) as u32
    }

    fn arrows(groups: &[Value], out: &mut [(u32, i64); 16]) -> Option<usize> {
        if groups.len() > out.len() {
            return None;
        }
        for (slot, v) in out.iter_mut().zip(groups) {
            *slot = Self::arrow(*v)?;
        }
        Some(groups.len())
    }

    fn is_loop(&self, x: &[(u32, i64)]) -> bool {
        let n = x.len();
        (0..n).all(|i| self.target(x[i].0, x[i].1) == x[(i + 1) % n].0)
    }

    fn is_phi(&self, x: &[(u32, i64)]) -> bool {
        self.is_loop(x) && x.iter().all(|a| a.1 >= 0) && {
            let total: i64 = x.iter().map(|a| a.1).sum();
            total != 0
        }
    }

    fn is_psi(&self, x: &[(u32, i64)]) -> bool {
        self.is_loop(x)
            && x.iter().all(|a| a.1 >= 0)
            && x.iter().map(|a| a.1).sum::<i64>() == self.n
    }

    /// Whether `x` is successively generated by the loop `z` with the first
    /// block starting at 0-based `start`. Windings are unbounded.
    fn successive(x: &[(u32, i64)], z: &[(u32, i64)], start: usize) -> bool {
        let k = z.len();
        let total: i64 = z.iter().map(|a| a.1).sum();
        fn go(
            x: &[(u32, i64)],
            z: &[(u32, i64)],
            total: i64,
            i: usize,
            pos: usize,
            first: usize,
        ) -> bool {
            let k = z.len();
            if i == x.len() {
                return pos == first;
            }
            let (src, disp) = x[i];
            if z[pos].0 != src {
                return false;
            }
            let mut partial = 0i64;
            for len in 0..k {
                if len > 0 {
                    partial += z[(pos + len - 1) % k].1;
                }
                let diff = disp - partial;
                if diff < 0 {
                    // partial sums only grow for positive generators
                    break;
                }
                let ok = if total == 0 {
                    diff == 0
                } else {
                    diff % total == 0
                };
                if ok && go(x, z, total, i + 1, (pos + len) % k, first) {
                    return true;
                }
            }
            false
        }
        if k == 0 || z.iter().any(|a| a.1 < 0) {
            return false;
        }
        go(x, z, total, 0, start, start)
    }

    /// Whether some rotation of `y` is successively generated by `z` from
    /// some starting position.
    fn rotated_successive(y: &[(u32, i64)], z: &[(u32, i64)]) -> bool {
        let m = y.len();
        let mut rotated = [(0u32, 0i64); 16];
        (0..m).any(|r| {
            for j in 0..m {
                rotated[j] = y[(j + r) % m];
            }
            (0..z.len()).any(|s| Self::successive(&rotated[..m], z, s))
        })
    }

    fn domain_mask(groups: &[&[Value]]) -> Option<(u32, u64)> {
        let mut mask = 0u64;
        let mut base = None;
        for g in groups {
            for v in g.iter() {
                let (src, _) = Self::arrow(*v)?;
                base.get_or_insert(src);
                mask |= 1u64 << src;
            }
        }
        Some((base?, mask))
    }
}

impl Structure for GroupoidStructure {
    fn describe(&self) -> String {
        format!("X_{}", self.n)
    }

    fn signature(&self) -> Signature {
        let mut s = Signature::groupoid_t();
        s.funcs.push(Func::Cyc);
        s
    }

    fn domain(&self, sort: Sort, bound: i64) -> Vec<Value> {
        match sort {
            Sort::Obj => (0..self.n as u32).map(Value::Obj).collect(),
            Sort::Arrow => {
                let mut out = Vec::with_capacity(self.n as usize * (2 * bound.max(0) as usize + 1));
                for src in 0..self.n as u32 {
                    for disp in -bound..=bound {
                        out.push(Value::Arrow { src, disp });
                    }
                }
                out
            }
            Sort::Group => Vec::new(),
        }
    }

    fn domain_exhaustive(&self, sort: Sort) -> bool {
        sort == Sort::Obj
    }

    fn anchors(&self, sort: Sort, bound: i64) -> Option<Vec<Value>> {
        match sort {
            Sort::Obj => Some(vec![Value::Obj(0)]),
            Sort::Arrow => Some(
                (-bound..=bound)
                    .map(|disp| Value::Arrow { src: 0, disp })
                    .collect(),
            ),
            Sort::Group => None,
        }
    }

    fn arrows_from(&self, obj: Value, bound: i64) -> Vec<Value> {
        match obj {
            Value::Obj(src) => (-bound..=bound)
                .map(|disp| Value::Arrow { src, disp })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn dom(&self, v: Value) -> Option<Value> {
        Self::arrow(v).map(|(s, _)| Value::Obj(s))
    }

    fn cod(&self, v: Value) -> Option<Value> {
        Self::arrow(v).map(|(s, d)| Value::Obj(self.target(s, d)))
    }

    fn id(&self, v: Value) -> Option<Value> {
        match v {
            Value::Obj(src) => Some(Value::Arrow { src, disp: 0 }),
            _ => None,
        }
    }

    fn inv(&self, v: Value) -> Option<Value> {
        let (s, d) = Self::arrow(v)?;
        Some(Value::Arrow {
            src: self.target(s, d),
            disp: -d,
        })
    }

    fn cyc(&self, v: Value) -> Option<Value> {
        match v {
            Value::Obj(src) => Some(Value::Arrow { src, disp: self.n }),
            _ => None,
        }
    }

    fn comp(&self, g: Value, f: Value) -> Option<Value> {
        let (gs, gd) = Self::arrow(g)?;
        let (fs, fd) = Self::arrow(f)?;
        if self.target(fs, fd) != gs {
            return None;
        }
        Some(Value::Arrow {
            src: fs,
            disp: fd.checked_add(gd)?,
        })
    }

    fn unit(&self) -> Option<Value> {
        None
    }

    fn pow(&self, v: Value, k: i64) -> Option<Value> {
        let (s, d) = Self::arrow(v)?;
        if d.rem_euclid(self.n) == 0 {
            return Some(Value::Arrow {
                src: s,
                disp: d.checked_mul(k)?,
            });
        }
        match k {
            0 => Some(Value::Arrow { src: s, disp: 0 }),
            1 => Some(v),
            -1 => self.inv(v),
            _ => None,
        }
    }

    fn roots(&self, v: Value, k: i64) -> Option<Vec<Value>> {
        let (s, d) = Self::arrow(v)?;
        match k {
            0 => None,
            1 => Some(vec![v]),
            -1 => Some(self.inv(v).into_iter().collect()),
            _ => {
                // only endomorphisms have other powers, and they stay at `s`
                let mut out = Vec::new();
                if d % k == 0 && (d / k).rem_euclid(self.n) == 0 {
                    out.push(Value::Arrow {
                        src: s,
                        disp: d / k,
                    });
                }
                Some(out)
            }
        }
    }

    fn pred(&self, p: Pred, args: &[Value]) -> bool {
        let Some((_, d)) = Self::arrow(args[0]) else {
            return false;
        };
        match p {
            Pred::P => d >= 0,
            Pred::T => d != 0 && d.rem_euclid(self.n) == 0,
            Pred::Ne => args[0] != args[1],
        }
    }

    fn native_macro(
        &self,
        kind: MacroKind,
        param: Option<usize>,
        groups: &[&[Value]],
    ) -> Option<bool> {
        let mut a = [(0u32, 0i64); 16];
        let mut b = [(0u32, 0i64); 16];
        let mut c = [(0u32, 0i64); 16];
        let nx = Self::arrows(groups[0], &mut a)?;
        let x = &a[..nx];
        Some(match kind {
            MacroKind::Loop => self.is_loop(x),
            MacroKind::Pos => x.iter().all(|f| f.1 >= 0),
            MacroKind::Phi => self.is_phi(x),
            MacroKind::Psi => self.is_psi(x),
            MacroKind::PMin => x[0].1 >= 0 && x[0].1 <= self.n,
            MacroKind::Domeq => {
                let dup = (0..x.len())
                    .filter(|&i| (0..x.len()).any(|j| j != i && x[j].0 == x[i].0))
                    .count();
                dup >= param.unwrap_or(0)
            }
            MacroKind::Gen => {
                let nz = Self::arrows(groups[1], &mut b)?;
                let z = &b[..nz];
                self.is_phi(z) && Self::successive(x, z, 0)
            }
            MacroKind::Gen3 => {
                let ny = Self::arrows(groups[1], &mut b)?;
                let nz = Self::arrows(groups[2], &mut c)?;
                let (y, z) = (&b[..ny], &c[..nz]);
                self.is_phi(z) && Self::successive(x, z, 0) && Self::rotated_successive(y, z)
            }
            MacroKind::GenRotated => {
                let nz = Self::arrows(groups[1], &mut b)?;
                Self::rotated_successive(x, &b[..nz])
            }
        })
    }

    fn proposal_key(&self, group: &[Value]) -> Option<u128> {
        let (base, mask) = Self::domain_mask(&[group])?;
        Some((base as u128) << 64 | mask as u128)
    }

    fn propose_generators(&self, targets: &[&[Value]], k: usize) -> Vec<Vec<Value>> {
        let Some((base, mask)) = Self::domain_mask(targets) else {
            return Vec::new();
        };
        if (mask.count_ones() as usize) > k || k == 0 {
            return Vec::new();
        }
        let key = (base, mask, k);
        if let Some(hit) = self.proposals.borrow().get(&key) {
            return hit.as_ref().clone();
        }
        let objects: BTreeSet<usize> = (0..64).filter(|b| mask >> b & 1 == 1).collect();
        let mut walk: Vec<Value> = cyclic_walk::<i64>(self.model, base as usize, &objects)
            .into_iter()
            .map(|f| Value::Arrow {
                src: f.src() as u32,
                disp: *f.disp(),
            })
            .collect();
        while walk.len() < k {
            walk.push(Value::Arrow { src: base, disp: 0 });
        }
        let out = vec![walk];
        self.proposals
            .borrow_mut()
            .insert(key, Rc::new(out.clone()));
        out
    }
}

/// An ordered subgroup of `Q`, written additively: `o` is `+`, `1` is `0`,
/// `pow(x, k)` is `k·x`.
pub struct RationalStructure {
    group: RationalSubgroup<i64>,
}

impl RationalStructure {
    pub fn new(group: RationalSubgroup<i64>) -> Self {
        RationalStructure { group }
    }

    pub fn group(&self) -> &RationalSubgroup<i64> {
        &self.group
    }

    fn num(v: Value) -> Option<Ratio<i64>> {
        match v {
            Value::Num(q) => Some(q),
            _ => None,
        }
    }
}

impl Structure for RationalStructure {
    fn describe(&self) -> String {
        format!("subgroup {} of Q", self.group)
    }

    fn signature(&self) -> Signature {
        Signature::ordered_group()
    }

    fn domain(&self, sort: Sort, bound: i64) -> Vec<Value> {
        match sort {
            Sort::Group => self
                .group
                .sample_elements(bound.max(0) as usize)
                .into_iter()
                .map(Value::Num)
                .collect(),
            _ => Vec::new(),
        }
    }

    fn domain_exhaustive(&self, _sort: Sort) -> bool {
        false
    }

    fn dom(&self, _v: Value) -> Option<Value> {
        None
    }

    fn cod(&self, _v: Value) -> Option<Value> {
        None
    }

    fn id(&self, _v: Value) -> Option<Value> {
        None
    }

    fn inv(&self, v: Value) -> Option<Value> {
        Self::num(v).map(|q| Value::Num(-q))
    }

    fn cyc(&self, _v: Value) -> Option<Value> {
        None
    }

    fn comp(&self, g: Value, f: Value) -> Option<Value> {
        let (a, b) = (Self::num(g)?, Self::num(f)?);
        a.checked_add(&b).map(Value::Num)
    }

    fn unit(&self) -> Option<Value> {
        Some(Value::Num(Ratio::zero()))
    }

    fn pow(&self, v: Value, k: i64) -> Option<Value> {
        Self::num(v)?
            .checked_mul(&Ratio::from_integer(k))
            .map(Value::Num)
    }

    fn roots(&self, v: Value, k: i64) -> Option<Vec<Value>> {
        let q = Self::num(v)?;
        if k == 0 {
            return if q.is_zero() { None } else { Some(Vec::new()) };
        }
        let r = q.checked_div(&Ratio::from_integer(k))?;
        Some(if self.group.contains(&r) {
            vec![Value::Num(r)]
        } else {
            Vec::new()
        })
    }

    fn pred(&self, p: Pred, args: &[Value]) -> bool {
        match p {
            Pred::P => Self::num(args[0]).is_some_and(|q| !q.is_negative()),
            Pred::Ne => args[0] != args[1],
            Pred::T => false,
        }
    }
}
