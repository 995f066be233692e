//! Candidate negative definite functions `d: G -> [0, inf)` with `d(e) = 0`,
//! finite-sample certification of negative definiteness, Poincaré exponent
//! estimates and empirical dominance fits.

mod dominance;
mod nd;
mod poincare;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Ball, Family, Group, GroupElement};

pub use dominance::{dominance_check, dominance_fit, DominanceReport};
pub use nd::{gram_nd_check, schoenberg_psd_check, NdReport, SchoenbergRecord, SchoenbergReport};
pub use poincare::{l2_threshold, poincare_estimate, L2Threshold, PoincareFlag, PoincareReport};

fn one() -> f64 {
    1.0
}

/// Which length function to use. Config files name kinds by the snake-case
/// tag (`{"kind":"power_law","exponent":2.5}`); the CLI also accepts the
/// short forms understood by [`LengthSpec::from_str`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LengthSpec {
    /// Word length for the canonical generators.
    #[serde(alias = "word_length")]
    Word,
    /// `|m|_1` on `Z^n`.
    L1,
    /// Euclidean norm on `Z^n`.
    L2,
    /// Squared Euclidean norm on `Z^n`.
    #[serde(alias = "l2sq")]
    L2Squared,
    /// Sum of factor lengths over the syllables of a free-product normal
    /// form (each syllable counts 1 unless `factor_lengths` is given). On a
    /// free group the syllables are maximal powers of one generator.
    #[serde(alias = "block_length")]
    Block {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor_lengths: Option<Vec<Vec<f64>>>,
    },
    /// `log(1 + |g|)`.
    #[serde(alias = "log_length")]
    Log,
    /// `inner(pi(g))` for the homomorphism `pi: G -> Z` picking coordinate
    /// (or generator exponent sum) `projection`; `inner` is a length on `Z`.
    Pullback { inner: Box<LengthSpec>, projection: usize },
    /// `|g|^exponent`.
    #[serde(alias = "power")]
    PowerLaw { exponent: f64 },
    /// Pointwise square root of `inner`.
    Sqrt { inner: Box<LengthSpec> },
    /// `value` off the identity.
    Bounded {
        #[serde(default = "one")]
        value: f64,
    },
}

impl LengthSpec {
    /// Accepts either a tagged object or a short string such as `"word"`.
    pub fn from_json(v: &serde_json::Value) -> Result<LengthSpec> {
        match v {
            serde_json::Value::String(s) => s.parse(),
            other => serde_json::from_value(other.clone()).map_err(|e| Error::InvalidLength(e.to_string())),
        }
    }

    pub fn sqrt(self) -> LengthSpec {
        LengthSpec::Sqrt { inner: Box::new(self) }
    }
}

/// Short forms: `word`, `l1`, `l2`, `l2sq`, `block`, `log`, `power:2.5`,
/// `bounded`, `bounded:2`, `sqrt:<length>`, `pullback:<index>:<length>`.
impl FromStr for LengthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<LengthSpec> {
        let s = s.trim();
        let bad = || Error::InvalidLength(format!("cannot parse length '{s}'"));
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |r: Option<&str>| -> Result<f64> { r.ok_or_else(bad)?.trim().parse().map_err(|_| bad()) };
        Ok(match (head.to_ascii_lowercase().as_str(), rest) {
            ("word" | "word_length", None) => LengthSpec::Word,
            ("l1", None) => LengthSpec::L1,
            ("l2", None) => LengthSpec::L2,
            ("l2sq" | "l2_squared", None) => LengthSpec::L2Squared,
            ("block" | "block_length", None) => LengthSpec::Block { factor_lengths: None },
            ("log" | "log_length", None) => LengthSpec::Log,
            ("power" | "power_law", r) => LengthSpec::PowerLaw { exponent: num(r)? },
            ("bounded", None) => LengthSpec::Bounded { value: 1.0 },
            ("bounded", r) => LengthSpec::Bounded { value: num(r)? },
            ("sqrt", Some(r)) => r.parse::<LengthSpec>()?.sqrt(),
            ("pullback", Some(r)) => {
                let (idx, inner) = r.split_once(':').ok_or_else(bad)?;
                LengthSpec::Pullback {
                    inner: Box::new(inner.parse()?),
                    projection: idx.trim().parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for LengthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthSpec::Word => write!(f, "word"),
            LengthSpec::L1 => write!(f, "l1"),
            LengthSpec::L2 => write!(f, "l2"),
            LengthSpec::L2Squared => write!(f, "l2sq"),
            LengthSpec::Block { factor_lengths: None } => write!(f, "block"),
            LengthSpec::Block { factor_lengths: Some(_) } => write!(f, "block(weighted)"),
            LengthSpec::Log => write!(f, "log"),
            LengthSpec::Pullback { inner, projection } => write!(f, "pullback:{projection}:{inner}"),
            LengthSpec::PowerLaw { exponent } => write!(f, "power:{exponent}"),
            LengthSpec::Sqrt { inner } => write!(f, "sqrt:{inner}"),
            LengthSpec::Bounded { value } => write!(f, "bounded:{value}"),
        }
    }
}

/// A [`LengthSpec`] bound to a group and validated on a small ball.
#[derive(Clone, Debug)]
pub struct Length {
    spec: LengthSpec,
    group: Group,
    inner: Option<Box<Length>>,
    // BFS ball used to look up Heisenberg word lengths, grown on demand
    levels: Arc<Mutex<Option<Arc<Ball>>>>,
}

const VALIDATION_RADIUS: usize = 2;

impl Length {
    pub fn new(spec: LengthSpec, group: &Group) -> Result<Length> {
        let len = Length::unvalidated(spec, group)?;
        let ball = group.ball(VALIDATION_RADIUS)?;
        let vals = len.values(&ball);
        if vals[0] != 0.0 {
            return Err(Error::InvalidLength(format!("{} has d(e) = {}", len.spec, vals[0])));
        }
        for (i, g) in ball.elements().iter().enumerate() {
            let v = vals[i];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidLength(format!("{} takes the value {v} at {g}", len.spec)));
            }
            let w = vals[ball.index_of(&group.inv(g)).expect("balls are symmetric")];
            if w != v {
                return Err(Error::AsymmetricLength { element: g.to_string(), forward: v, backward: w });
            }
        }
        Ok(len)
    }

    fn unvalidated(spec: LengthSpec, group: &Group) -> Result<Length> {
        let family = group.family();
        let invalid = |m: String| Err(Error::InvalidLength(m));
        let mut inner = None;
        match &spec {
            LengthSpec::Word | LengthSpec::Log => {}
            LengthSpec::L1 | LengthSpec::L2 | LengthSpec::L2Squared => {
                if !matches!(family, Family::FreeAbelian { .. }) {
                    return invalid(format!("{spec} is only defined on Z^n, not on {}", group.name()));
                }
            }
            LengthSpec::Block { factor_lengths } => match (family, factor_lengths) {
                (Family::Free { .. } | Family::FreeProduct { .. }, None) => {}
                (Family::FreeProduct { factors }, Some(fl)) => {
                    if fl.len() != factors.len() {
                        return invalid(format!("{} factor lengths for {} factors", fl.len(), factors.len()));
                    }
                    for (i, (f, l)) in factors.iter().zip(fl).enumerate() {
                        if l.len() != f.order() {
                            return invalid(format!("factor {i}: {} lengths for order {}", l.len(), f.order()));
                        }
                        for (a, &v) in l.iter().enumerate() {
                            let ok = if a == f.identity() { v == 0.0 } else { v.is_finite() && v > 0.0 };
                            if !ok || l[f.inv(a)] != v {
                                return invalid(format!("factor {i}: length {v} at element {a} is not a length"));
                            }
                        }
                    }
                }
                _ => return invalid(format!("block length needs a free product or free group, not {}", group.name())),
            },
            LengthSpec::PowerLaw { exponent } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return invalid(format!("power-law exponent must be positive, got {exponent}"));
                }
            }
            LengthSpec::Bounded { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return invalid(format!("bounded length value must be positive, got {value}"));
                }
            }
            LengthSpec::Sqrt { inner: i } => {
                inner = Some(Box::new(Length::unvalidated((**i).clone(), group)?));
            }
            LengthSpec::Pullback { inner: i, projection } => {
                let limit = match family {
                    Family::FreeAbelian { rank } | Family::Free { rank } => *rank,
                    Family::Heisenberg => 2,
                    Family::FreeProduct { .. } => {
                        return invalid("pullback has no projection to Z on a free product of finite groups".into())
                    }
                };
                if *projection >= limit {
                    return invalid(format!("projection {projection} out of range for {}", group.name()));
                }
                inner = Some(Box::new(Length::new((**i).clone(), &Group::free_abelian(1)?)?));
            }
        }
        Ok(Length { spec, group: group.clone(), inner, levels: Arc::new(Mutex::new(None)) })
    }

    pub fn spec(&self) -> &LengthSpec {
        &self.spec
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `sqrt(d)` as a length on the same group.
    pub fn sqrt(&self) -> Length {
        Length {
            spec: self.spec.clone().sqrt(),
            group: self.group.clone(),
            inner: Some(Box::new(self.clone())),
            levels: Arc::new(Mutex::new(None)),
        }
    }

    /// `d(g)`; rejects elements of other groups.
    pub fn eval(&self, g: &GroupElement) -> Result<f64> {
        self.group.check(g)?;
        self.eval_at(g, None)
    }

    /// Values on every element of `ball`, in ball order.
    pub fn values(&self, ball: &Ball) -> Vec<f64> {
        assert_eq!(ball.group(), &self.group, "ball belongs to another group");
        (0..ball.len())
            .map(|i| {
                let level = ball.level(i);
                match self.radial(level) {
                    Some(v) => v,
                    None => self.eval_at(ball.get(i), Some(level)).expect("ball elements are in range"),
                }
            })
            .collect()
    }

    /// `d` as a function of word length, when it is one.
    pub fn radial(&self, r: usize) -> Option<f64> {
        let r_f = r as f64;
        match (&self.spec, self.group.family()) {
            (LengthSpec::Word, _) | (LengthSpec::L1, _) => Some(r_f),
            (LengthSpec::Log, _) => Some(r_f.ln_1p()),
            (LengthSpec::PowerLaw { exponent }, _) => Some(r_f.powf(*exponent)),
            (LengthSpec::Bounded { value }, _) => Some(if r == 0 { 0.0 } else { *value }),
            (LengthSpec::Block { factor_lengths: None }, Family::FreeProduct { .. }) => Some(r_f),
            (LengthSpec::Sqrt { .. }, _) => self.inner.as_ref()?.radial(r).map(f64::sqrt),
            (LengthSpec::L2 | LengthSpec::L2Squared, Family::FreeAbelian { rank: 1 }) => match self.spec {
                LengthSpec::L2 => Some(r_f),
                _ => Some(r_f * r_f),
            },
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        self.radial(0).is_some()
    }

    pub(crate) fn eval_at(&self, g: &GroupElement, level: Option<usize>) -> Result<f64> {
        let word = |len: &Length| -> Result<f64> {
            match level {
                Some(l) => Ok(l as f64),
                None => len.word_length(g).map(|l| l as f64),
            }
        };
        Ok(match &self.spec {
            LengthSpec::Word => word(self)?,
            LengthSpec::Log => word(self)?.ln_1p(),
            LengthSpec::PowerLaw { exponent } => word(self)?.powf(*exponent),
            LengthSpec::Bounded { value } => {
                if self.group.is_identity(g) {
                    0.0
                } else {
                    *value
                }
            }
            LengthSpec::L1 | LengthSpec::L2 | LengthSpec::L2Squared => {
                let GroupElement::Abelian(v) = g else { unreachable!("checked at construction") };
                match self.spec {
                    LengthSpec::L1 => v.iter().map(|x| x.unsigned_abs() as f64).sum(),
                    LengthSpec::L2 => v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt(),
                    _ => v.iter().map(|&x| (x as f64) * (x as f64)).sum(),
                }
            }
            LengthSpec::Block { factor_lengths } => match g {
                GroupElement::FreeProduct(w) => match factor_lengths {
                    None => w.len() as f64,
                    Some(fl) => w.iter().map(|s| fl[s.factor as usize][s.element as usize]).sum(),
                },
                GroupElement::Free(w) => {
                    let mut n = 0usize;
                    for (i, l) in w.iter().enumerate() {
                        if i == 0 || w[i - 1].generator() != l.generator() {
                            n += 1;
                        }
                    }
                    n as f64
                }
                _ => unreachable!("checked at construction"),
            },
            LengthSpec::Sqrt { .. } => self.inner.as_ref().expect("sqrt has an inner length").eval_at(g, level)?.sqrt(),
            LengthSpec::Pullback { projection, .. } => {
                let p = *projection;
                let m = match g {
                    GroupElement::Abelian(v) => v[p],
                    GroupElement::Free(w) => w
                        .iter()
                        .filter(|l| l.generator() == p)
                        .map(|l| if l.is_inverse() { -1 } else { 1 })
                        .sum(),
                    GroupElement::Heisenberg(t) => t[p],
                    GroupElement::FreeProduct(_) => unreachable!("checked at construction"),
                };
                self.inner.as_ref().expect("pullback has an inner length").eval(&GroupElement::abelian(&[m]))?
            }
        })
    }

    fn word_length(&self, g: &GroupElement) -> Result<usize> {
        if !matches!(g, GroupElement::Heisenberg(_)) {
            return self.group.word_length(g);
        }
        let GroupElement::Heisenberg([a, b, _]) = g else { unreachable!() };
        let mut slot = self.levels.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(ball) = slot.as_ref() {
                if let Some(l) = ball.word_length(g) {
                    return Ok(l);
                }
            }
            let current = slot.as_ref().map_or(0, |b| b.radius());
            let lower = (a.unsigned_abs() + b.unsigned_abs()) as usize;
            let next = (current + 4).max(lower);
            *slot = Some(Arc::new(self.group.ball(next)?));
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}
