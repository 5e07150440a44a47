//! Ordered subgroups of the rationals and finite diagrams of embeddings
//! between copies of `Z`.
//!
//! A subgroup is stored as `r·H₀`, where `H₀` contains `1` and admits a
//! denominator `ℓ^e` exactly when `e` is at most the height of `ℓ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QError {
    #[error("{0} is not a member of the subgroup")]
    NotAMember(String),
    #[error("{0} is not strictly positive")]
    NotPositive(String),
    #[error("ratio {0} is not strictly positive")]
    NonPositiveRatio(String),
    #[error("image of {element} is {image}, which is outside the target")]
    ImageEscapes { element: String, image: String },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("the scale must be a positive rational, got {0}")]
    BadScale(String),
    #[error("cannot parse {what}: {text}")]
    Parse { what: &'static str, text: String },
    #[error("diagram has no objects")]
    EmptyDiagram,
    #[error("arrow {from} -> {to} mentions an object outside 0..{objects}")]
    BadArrow {
        from: usize,
        to: usize,
        objects: usize,
    },
    #[error("arrow labels must be positive integers")]
    ZeroLabel,
    #[error("inconsistent diagram: {0}")]
    Inconsistent(String),
    #[error("objects {0} and {1} have no joint upper bound")]
    NoJointBound(usize, usize),
}

/// Largest exponent of a prime allowed in denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    fn allows(self, e: u32) -> bool {
        match self {
            Height::Finite(h) => e <= h,
            Height::Infinite => true,
        }
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Height {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self, QError> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(Height::Infinite),
            t => t.parse().map(Height::Finite).map_err(|_| QError::Parse {
                what: "height",
                text: s.to_string(),
            }),
        }
    }
}

impl Serialize for Height {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Height::Finite(h) => s.serialize_u32(*h),
            Height::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Height {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(Height::Finite(h)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn parse_ratio<I: Scalar>(text: &str) -> Result<Ratio<I>, QError> {
    let err = || QError::Parse {
        what: "rational",
        text: text.to_string(),
    };
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: i64 = num.parse().map_err(|_| err())?;
    let den: i64 = den.parse().map_err(|_| err())?;
    if den == 0 {
        return Err(err());
    }
    let conv = |v: i64| I::from_i64(v).ok_or_else(err);
    Ok(Ratio::new(conv(num)?, conv(den)?))
}

/// `r·H₀` for a positive scale `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSubgroup<I: Scalar> {
    scale: Ratio<I>,
    heights: BTreeMap<u64, Height>,
}

impl<I: Scalar> RationalSubgroup<I> {
    pub fn new(scale: Ratio<I>, heights: BTreeMap<u64, Height>) -> Result<Self, QError> {
        if !scale.is_positive() {
            return Err(QError::BadScale(scale.to_string()));
        }
        if let Some(&p) = heights.keys().find(|&&p| !is_prime(p)) {
            return Err(QError::NotPrime(p));
        }
        let heights = heights
            .into_iter()
            .filter(|&(_, h)| h != Height::Finite(0))
            .collect();
        Ok(Self { scale, heights })
    }

    /// The integers.
    pub fn integers() -> Self {
        Self {
            scale: Ratio::one(),
            heights: BTreeMap::new(),
        }
    }

    pub fn with_heights(heights: &[(u64, Height)]) -> Result<Self, QError> {
        Self::new(Ratio::one(), heights.iter().copied().collect())
    }

    pub fn scale(&self) -> &Ratio<I> {
        &self.scale
    }

    pub fn heights(&self) -> &BTreeMap<u64, Height> {
        &self.heights
    }

    pub fn height(&self, p: u64) -> Height {
        self.heights.get(&p).copied().unwrap_or(Height::Finite(0))
    }

    fn prime(p: u64) -> I {
        I::from_u64(p).expect("prime fits in scalar")
    }

    /// Whether `t ∈ H₀`.
    fn normalized_contains(&self, t: &Ratio<I>) -> bool {
        let mut den = t.denom().abs();
        for (&p, &h) in &self.heights {
            let l = Self::prime(p);
            let mut e = 0u32;
            while den.is_multiple_of(&l) {
                den = den / l.clone();
                e += 1;
            }
            if !h.allows(e) {
                return false;
            }
        }
        den.is_one()
    }

    pub fn contains(&self, q: &Ratio<I>) -> bool {
        self.normalized_contains(&(q.clone() / self.scale.clone()))
    }

    fn require_positive_member(&self, q: &Ratio<I>) -> Result<(), QError> {
        if !self.contains(q) {
            return Err(QError::NotAMember(q.to_string()));
        }
        if !q.is_positive() {
            return Err(QError::NotPositive(q.to_string()));
        }
        Ok(())
    }

    /// A finite sample closed under negation: `r·a/d` for divisors `d` of
    /// `∏ ℓ^min(h, bound)` and `|a| ≤ bound`.
    pub fn sample_elements(&self, bound: usize) -> Vec<Ratio<I>> {
        let mut dens = vec![I::one()];
        for (&p, &h) in &self.heights {
            let cap = match h {
                Height::Finite(h) => (h as usize).min(bound),
                Height::Infinite => bound,
            };
            let l = Self::prime(p);
            let mut next = Vec::with_capacity(dens.len() * (cap + 1));
            for d in &dens {
                let mut power = I::one();
                for _ in 0..=cap {
                    next.push(d.clone() * power.clone());
                    power = power * l.clone();
                }
            }
            dens = next;
        }
        let b = bound as i64;
        let set: BTreeSet<Ratio<I>> = dens
            .iter()
            .flat_map(|d| {
                (-b..=b).map(move |a| {
                    self.scale.clone() * Ratio::new(I::from_i64(a).expect("small"), d.clone())
                })
            })
            .collect();
        set.into_iter().collect()
    }
}

impl<I: Scalar> fmt::Display for RationalSubgroup<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, h) in &self.heights {
            write!(f, "{p}:{h},")?;
        }
        write!(f, "scale={}", self.scale)
    }
}

impl<I: Scalar> FromStr for RationalSubgroup<I> {
    type Err = QError;

    /// `"2:inf,3:1"`, optionally with a `scale=p/q` item; empty means `Z`.
    fn from_str(s: &str) -> Result<Self, QError> {
        let mut scale = Ratio::one();
        let mut heights = BTreeMap::new();
        for item in s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            if let Some(v) = item.strip_prefix("scale=") {
                scale = parse_ratio(v)?;
                continue;
            }
            let (p, h) = item.split_once(':').ok_or_else(|| QError::Parse {
                what: "height item",
                text: item.to_string(),
            })?;
            let p: u64 = p.trim().parse().map_err(|_| QError::Parse {
                what: "prime",
                text: p.to_string(),
            })?;
            heights.insert(p, h.parse()?);
        }
        Self::new(scale, heights)
    }
}

#[derive(Serialize, Deserialize)]
struct SubgroupJson {
    scale: String,
    heights: BTreeMap<u64, Height>,
}

impl<I: Scalar> Serialize for RationalSubgroup<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SubgroupJson {
            scale: self.scale.to_string(),
            heights: self.heights.clone(),
        }
        .serialize(s)
    }
}

impl<'de, I: Scalar> Deserialize<'de> for RationalSubgroup<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = SubgroupJson::deserialize(d)?;
        let scale = parse_ratio(&raw.scale).map_err(serde::de::Error::custom)?;
        Self::new(scale, raw.heights).map_err(serde::de::Error::custom)
    }
}

pub fn contains<I: Scalar>(h: &RationalSubgroup<I>, q: &Ratio<I>) -> bool {
    h.contains(q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonGenerator<I: Scalar> {
    pub z: Ratio<I>,
    pub n: I,
    pub m: I,
    /// `(s, t)` with `s·a + t·b = gcd(a, b)` for the reduced denominators
    /// `a`, `b` of `x/r` and `y/r`.
    pub bezout: (I, I),
}

/// `z > 0` in `H` with `x = n·z` and `y = m·z`.
pub fn common_generator<I: Scalar>(
    h: &RationalSubgroup<I>,
    x: &Ratio<I>,
    y: &Ratio<I>,
) -> Result<CommonGenerator<I>, QError> {
    h.require_positive_member(x)?;
    h.require_positive_member(y)?;
    let u = x.clone() / h.scale.clone();
    let v = y.clone() / h.scale.clone();
    let (xn, a) = (u.numer().clone(), u.denom().clone());
    let (yn, b) = (v.numer().clone(), v.denom().clone());
    let egcd = a.extended_gcd(&b);
    let g = egcd.gcd.clone();
    let z0 = Ratio::new(g.clone(), a.clone() * b.clone());
    let n = xn * (b / g.clone());
    let m = yn * (a / g);
    let z = z0 * h.scale.clone();
    debug_assert!(h.contains(&z));
    Ok(CommonGenerator {
        z,
        n,
        m,
        bezout: (egcd.x, egcd.y),
    })
}

/// Multiplication by a positive rational between two subgroups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QHom<I: Scalar> {
    ratio: Ratio<I>,
}

impl<I: Scalar> QHom<I> {
    pub fn ratio(&self) -> &Ratio<I> {
        &self.ratio
    }

    pub fn apply(&self, x: &Ratio<I>) -> Ratio<I> {
        self.ratio.clone() * x.clone()
    }
}

/// Checks `ratio·src ⊆ dst` exactly, using the generators `r/ℓ^e` of `src`.
pub fn validate_hom<I: Scalar>(
    src: &RationalSubgroup<I>,
    dst: &RationalSubgroup<I>,
    ratio: &Ratio<I>,
) -> Result<QHom<I>, QError> {
    if !ratio.is_positive() {
        return Err(QError::NonPositiveRatio(ratio.to_string()));
    }
    let hom = QHom {
        ratio: ratio.clone(),
    };
    let escapes = |element: Ratio<I>| {
        let image = hom.apply(&element);
        (!dst.contains(&image)).then(|| QError::ImageEscapes {
            element: element.to_string(),
            image: image.to_string(),
        })
    };
    if let Some(e) = escapes(src.scale.clone()) {
        return Err(e);
    }
    for (&p, &h) in &src.heights {
        let l = RationalSubgroup::<I>::prime(p);
        let last = match h {
            Height::Finite(h) => h,
            Height::Infinite if dst.height(p) == Height::Infinite => continue,
            // r/ℓ^e leaves dst once e passes the ℓ-height of dst plus the
            // ℓ-valuation of the image of r
            Height::Infinite => {
                let Height::Finite(hd) = dst.height(p) else {
                    unreachable!()
                };
                let mut num = (ratio.clone() * src.scale.clone() / dst.scale.clone())
                    .numer()
                    .abs();
                let mut v = 0u32;
                while !num.is_zero() && num.is_multiple_of(&l) {
                    num = num / l.clone();
                    v += 1;
                }
                hd + v + 1
            }
        };
        let mut power = I::one();
        for _ in 0..last {
            power = power * l.clone();
        }
        if let Some(e) = escapes(src.scale.clone() / Ratio::from_integer(power)) {
            return Err(e);
        }
    }
    Ok(hom)
}

/// Least `N ≥ 1` with `x ≤ N·y`.
pub fn archimedean_witness<I: Scalar>(
    h: &RationalSubgroup<I>,
    x: &Ratio<I>,
    y: &Ratio<I>,
) -> Result<I, QError> {
    h.require_positive_member(x)?;
    h.require_positive_member(y)?;
    let n = (x.clone() / y.clone()).ceil().to_integer();
    Ok(if n < I::one() { I::one() } else { n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramArrow {
    pub from: usize,
    pub to: usize,
    pub label: u64,
}

/// A finite diagram of embeddings `Z → Z`, each given by multiplication by
/// its label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NStarDiagram {
    pub objects: usize,
    pub arrows: Vec<DiagramArrow>,
}

impl NStarDiagram {
    pub fn new(objects: usize, arrows: Vec<DiagramArrow>) -> Result<Self, QError> {
        let d = Self { objects, arrows };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), QError> {
        if self.objects == 0 {
            return Err(QError::EmptyDiagram);
        }
        for a in &self.arrows {
            if a.from >= self.objects || a.to >= self.objects {
                return Err(QError::BadArrow {
                    from: a.from,
                    to: a.to,
                    objects: self.objects,
                });
            }
            if a.label == 0 {
                return Err(QError::ZeroLabel);
            }
        }
        Ok(())
    }

    /// `0 → 1 → … → k` with the given labels.
    pub fn chain(labels: &[u64]) -> Result<Self, QError> {
        let arrows = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| DiagramArrow {
                from: i,
                to: i + 1,
                label,
            })
            .collect();
        Self::new(labels.len() + 1, arrows)
    }

    /// Label of every arrow in the category generated by the diagram,
    /// identities included.
    pub fn closure(&self) -> Result<BTreeMap<(usize, usize), u64>, QError> {
        self.validate()?;
        let mut labels: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let insert = |labels: &mut BTreeMap<(usize, usize), u64>, key, label| match labels.get(&key)
        {
            Some(&old) if old != label => Err(QError::Inconsistent(format!(
                "parallel arrows {} -> {} with labels {old} and {label}",
                key.0, key.1
            ))),
            Some(_) => Ok(false),
            None => {
                labels.insert(key, label);
                Ok(true)
            }
        };
        for i in 0..self.objects {
            insert(&mut labels, (i, i), 1)?;
        }
        for a in &self.arrows {
            insert(&mut labels, (a.from, a.to), a.label)?;
        }
        loop {
            let snapshot: Vec<((usize, usize), u64)> =
                labels.iter().map(|(&k, &v)| (k, v)).collect();
            let mut grew = false;
            for &((i, j), f) in &snapshot {
                for &((j2, k), g) in &snapshot {
                    if j2 == j {
                        let label = f.checked_mul(g).ok_or_else(|| {
                            QError::Inconsistent("composite label overflows".to_string())
                        })?;
                        grew |= insert(&mut labels, (i, k), label)?;
                    }
                }
            }
            if !grew {
                return Ok(labels);
            }
        }
    }
}

impl FromStr for NStarDiagram {
    type Err = QError;

    /// `chain:2,3` or the JSON form.
    fn from_str(s: &str) -> Result<Self, QError> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("chain:") {
            let labels = rest
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<u64>().map_err(|_| QError::Parse {
                        what: "label",
                        text: x.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Self::chain(&labels);
        }
        let d: NStarDiagram = serde_json::from_str(t).map_err(|e| QError::Parse {
            what: "diagram",
            text: e.to_string(),
        })?;
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocone<I: Scalar> {
    pub root: usize,
    pub lambdas: Vec<Ratio<I>>,
}

/// Maps into `Q` with `λ_root = 1` and `λ_i = label(e)·λ_j` for every arrow
/// `e : i → j`. Each `λ_j` is computed through every joint upper bound of the
/// root and `j`; disagreement means the diagram admits no cocone.
pub fn colimit_cocone<I: Scalar>(d: &NStarDiagram) -> Result<Cocone<I>, QError> {
    let closure = d.closure()?;
    for i in 0..d.objects {
        for j in i + 1..d.objects {
            if !(0..d.objects)
                .any(|k| closure.contains_key(&(i, k)) && closure.contains_key(&(j, k)))
            {
                return Err(QError::NoJointBound(i, j));
            }
        }
    }
    let root = 0;
    let conv = |v: u64| I::from_u64(v).expect("label fits in scalar");
    let mut lambdas = Vec::with_capacity(d.objects);
    for j in 0..d.objects {
        let mut value: Option<Ratio<I>> = None;
        for k in 0..d.objects {
            let (Some(&f), Some(&g)) = (closure.get(&(root, k)), closure.get(&(j, k))) else {
                continue;
            };
            let candidate = Ratio::new(conv(g), conv(f));
            match &value {
                Some(v) if *v != candidate => {
                    return Err(QError::Inconsistent(format!(
                        "object {j} gets {v} and {candidate} through different bounds"
                    )))
                }
                Some(_) => {}
                None => value = Some(candidate),
            }
        }
        lambdas.push(value.expect("joint bound exists"));
    }
    for (&(i, j), &label) in &closure {
        if lambdas[i] != Ratio::from_integer(conv(label)) * lambdas[j].clone() {
            return Err(QError::Inconsistent(format!(
                "arrow {i} -> {j} labelled {label} does not commute"
            )));
        }
    }
    Ok(Cocone { root, lambdas })
}

/// Rational to `f64`, for display only.
pub fn approx<I: Scalar>(q: &Ratio<I>) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}
