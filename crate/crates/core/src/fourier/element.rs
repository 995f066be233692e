use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::Cocycle;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finitely supported element `x = sum_g x(g) Lambda_sigma(g)` of the
/// twisted group algebra.
///
/// Coefficients are kept in normal-form order, and only exact zeros are
/// pruned.
#[derive(Clone, Debug)]
pub struct FourierElement {
    group: Arc<Group>,
    cocycle: Arc<Cocycle>,
    coeffs: BTreeMap<GroupElement, Complex64>,
}

impl FourierElement {
    pub fn zero(group: Arc<Group>, cocycle: Arc<Cocycle>) -> Result<FourierElement> {
        let validated = (*cocycle).clone().validate(&group)?;
        let cocycle = if validated == *cocycle { cocycle } else { Arc::new(validated) };
        Ok(FourierElement { group, cocycle, coeffs: BTreeMap::new() })
    }

    /// `sum_i c_i Lambda(g_i)`, summing repeated elements.
    pub fn from_terms(
        group: Arc<Group>,
        cocycle: Arc<Cocycle>,
        terms: impl IntoIterator<Item = (GroupElement, Complex64)>,
    ) -> Result<FourierElement> {
        let mut x = FourierElement::zero(group, cocycle)?;
        for (g, c) in terms {
            x.group.check(&g)?;
            x.add_term(g, c);
        }
        Ok(x)
    }

    /// `c Lambda(g)` sharing group and cocycle with `self`.
    pub fn term(&self, g: GroupElement, c: Complex64) -> Result<FourierElement> {
        FourierElement::from_terms(self.group.clone(), self.cocycle.clone(), [(g, c)])
    }

    /// An element with the same group and cocycle and the given terms.
    pub fn like(&self, terms: impl IntoIterator<Item = (GroupElement, Complex64)>) -> Result<FourierElement> {
        FourierElement::from_terms(self.group.clone(), self.cocycle.clone(), terms)
    }

    pub(crate) fn add_term(&mut self, g: GroupElement, c: Complex64) {
        match self.coeffs.entry(g) {
            Entry::Vacant(v) => {
                if c != ZERO {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn cocycle(&self) -> &Arc<Cocycle> {
        &self.cocycle
    }

    pub fn coeff(&self, g: &GroupElement) -> Complex64 {
        self.coeffs.get(g).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.coeffs.keys()
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same_algebra(&self, other: &FourierElement) -> Result<()> {
        if self.group != other.group || self.cocycle != other.cocycle {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    /// Coefficientwise `f(g, x(g))`; zeros produced by `f` are pruned.
    pub fn map(&self, mut f: impl FnMut(&GroupElement, Complex64) -> Complex64) -> FourierElement {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(g, &c)| (g.clone(), f(g, c)))
            .filter(|(_, c)| *c != ZERO)
            .collect();
        FourierElement { group: self.group.clone(), cocycle: self.cocycle.clone(), coeffs }
    }

    /// The terms whose group element satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&GroupElement) -> bool) -> FourierElement {
        let coeffs = self.coeffs.iter().filter(|(g, _)| keep(g)).map(|(g, c)| (g.clone(), *c)).collect();
        FourierElement { group: self.group.clone(), cocycle: self.cocycle.clone(), coeffs }
    }

    pub fn scale(&self, s: Complex64) -> FourierElement {
        self.map(|_, c| c * s)
    }

    pub fn add(&self, other: &FourierElement) -> Result<FourierElement> {
        self.same_algebra(other)?;
        let mut out = self.clone();
        for (g, c) in &other.coeffs {
            out.add_term(g.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FourierElement) -> Result<FourierElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Twisted convolution: `(xy)(hk) += x(h) y(k) sigma(h, k)`.
    pub fn multiply(&self, other: &FourierElement) -> Result<FourierElement> {
        self.same_algebra(other)?;
        let mut acc: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (h, a) in &self.coeffs {
            for (k, b) in &other.coeffs {
                let v = a * b * self.cocycle.eval(h, k);
                *acc.entry(self.group.mul(h, k)).or_insert(ZERO) += v;
            }
        }
        acc.retain(|_, v| *v != ZERO);
        Ok(FourierElement { group: self.group.clone(), cocycle: self.cocycle.clone(), coeffs: acc })
    }

    /// `x*(g) = conj(x(g^-1)) conj(sigma(g^-1, g))`.
    pub fn adjoint(&self) -> FourierElement {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(h, c)| {
                let g = self.group.inv(h);
                let v = c.conj() * self.cocycle.eval(h, &g).conj();
                (g, v)
            })
            .collect();
        FourierElement { group: self.group.clone(), cocycle: self.cocycle.clone(), coeffs }
    }

    /// The canonical trace `tau(x) = x(e)`.
    pub fn trace(&self) -> Complex64 {
        self.coeff(&self.group.identity())
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().fold(0.0, |a, c| a + c.norm())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().fold(0.0, |a, c| a + c.norm_sqr()).sqrt()
    }

    /// Largest coefficient difference `max_g |x(g) - y(g)|`.
    pub fn max_deviation(&self, other: &FourierElement) -> f64 {
        let a = self.coeffs.iter().map(|(g, c)| (c - other.coeff(g)).norm());
        let b = other.coeffs.iter().filter(|(g, _)| !self.coeffs.contains_key(*g)).map(|(_, c)| c.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Largest word length in the support (0 for the zero element).
    pub fn max_word_length(&self) -> Result<usize> {
        self.coeffs.keys().map(|g| self.group.word_length(g)).try_fold(0, |m, l| Ok(m.max(l?)))
    }

    /// JSON array of `{normal_form, re, im}` in normal-form order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|(g, c)| json!({ "normal_form": g.to_json(), "re": c.re, "im": c.im }))
                .collect(),
        )
    }

    pub fn from_json(group: Arc<Group>, cocycle: Arc<Cocycle>, v: &Value) -> Result<FourierElement> {
        let bad = |m: &str| Error::MalformedNormalForm(format!("{m} in {v}"));
        let arr = v.as_array().ok_or_else(|| bad("expected an array of terms"))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let nf = t.get("normal_form").ok_or_else(|| bad("term without normal_form"))?;
            let re = t.get("re").and_then(Value::as_f64).ok_or_else(|| bad("term without re"))?;
            let im = t.get("im").map_or(Some(0.0), Value::as_f64).ok_or_else(|| bad("bad im"))?;
            terms.push((group.element_from_json(nf)?, Complex64::new(re, im)));
        }
        FourierElement::from_terms(group, cocycle, terms)
    }
}
