//! Ball truncations of the left-regular representation
//! `Lambda_sigma(h) delta_g = sigma(h, g) delta_{hg}`.

use std::collections::HashMap;

use num_complex::Complex64;

use super::FourierElement;
use crate::error::{Error, Result};
use crate::group::{Ball, GroupElement};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const OUTSIDE: u32 = u32::MAX;

fn check_ball(x: &FourierElement, ball: &Ball) -> Result<()> {
    if **x.group() != *ball.group() {
        return Err(Error::Mismatch);
    }
    if ball.len() >= OUTSIDE as usize {
        return Err(Error::param("ball too large for 32-bit indices"));
    }
    Ok(())
}

/// `Lambda_sigma(x)` restricted to `span(B_R)`, mapping into the span of the
/// image set `{hg : h in supp x, g in B_R}` (a subset of `B_{R + r0}`).
///
/// Codomain indices below `|B_R|` coincide with ball indices.
pub struct TruncatedOperator {
    terms: usize,
    domain_len: usize,
    codomain: Vec<GroupElement>,
    // domain_len x terms: codomain index of h_t g_j
    table: Vec<u32>,
    // domain_len x terms: x(h_t) sigma(h_t, g_j)
    coeffs: Vec<Complex64>,
}

impl TruncatedOperator {
    pub fn new(x: &FourierElement, ball: &Ball) -> Result<TruncatedOperator> {
        check_ball(x, ball)?;
        let group = x.group();
        let cocycle = x.cocycle();
        let terms: Vec<(&GroupElement, &Complex64)> = x.iter().collect();
        let n = ball.len();
        let mut extra: HashMap<GroupElement, u32> = HashMap::new();
        let mut codomain = Vec::new();
        let mut table = Vec::with_capacity(n * terms.len());
        let mut coeffs = Vec::with_capacity(n * terms.len());
        for g in ball.elements() {
            for (h, c) in &terms {
                let p = group.mul(h, g);
                let idx = match ball.index_of(&p) {
                    Some(i) => i as u32,
                    None => {
                        let next = (n + codomain.len()) as u32;
                        *extra.entry(p.clone()).or_insert_with(|| {
                            codomain.push(p);
                            next
                        })
                    }
                };
                table.push(idx);
                coeffs.push(**c * cocycle.eval(h, g));
            }
        }
        let mut full = ball.elements().to_vec();
        full.extend(codomain);
        Ok(TruncatedOperator { terms: terms.len(), domain_len: n, codomain: full, table, coeffs })
    }

    pub fn domain_len(&self) -> usize {
        self.domain_len
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain.len()
    }

    pub fn codomain(&self) -> &[GroupElement] {
        &self.codomain
    }

    /// `out = A v` where `v` covers the first `v.len()` domain elements;
    /// `out` spans the whole codomain.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert!(v.len() <= self.domain_len && out.len() == self.codomain.len());
        out.fill(ZERO);
        let t = self.terms;
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for k in j * t..(j + 1) * t {
                out[self.table[k] as usize] += self.coeffs[k] * vj;
            }
        }
    }

    /// `out = P A* w` onto the first `out.len()` domain elements.
    pub fn apply_adjoint(&self, w: &[Complex64], out: &mut [Complex64]) {
        assert!(out.len() <= self.domain_len && w.len() == self.codomain.len());
        let t = self.terms;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in j * t..(j + 1) * t {
                acc += self.coeffs[k].conj() * w[self.table[k] as usize];
            }
            *o = acc;
        }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// [`apply`](Self::apply) with term `t` of `x` rescaled by `w[t]`, terms
    /// in normal-form order.
    pub fn apply_weighted(&self, w: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
        assert!(w.len() == self.terms && v.len() <= self.domain_len && out.len() == self.codomain.len());
        out.fill(ZERO);
        let t = self.terms;
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for (k, wk) in (j * t..(j + 1) * t).zip(w) {
                out[self.table[k] as usize] += self.coeffs[k] * wk * vj;
            }
        }
    }

    /// [`apply_adjoint`](Self::apply_adjoint) with reweighted terms.
    pub fn apply_adjoint_weighted(&self, w: &[Complex64], u: &[Complex64], out: &mut [Complex64]) {
        assert!(w.len() == self.terms && out.len() <= self.domain_len && u.len() == self.codomain.len());
        let t = self.terms;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (k, wk) in (j * t..(j + 1) * t).zip(w) {
                acc += (self.coeffs[k] * wk).conj() * u[self.table[k] as usize];
            }
            *o = acc;
        }
    }

    /// `a_t = <Lambda(h_t) xi, eta>` restricted to the truncation, for each
    /// term `h_t`.
    pub fn term_pairings(&self, eta: &[Complex64], xi: &[Complex64]) -> Vec<Complex64> {
        assert!(xi.len() <= self.domain_len && eta.len() == self.codomain.len());
        let t = self.terms;
        let mut a = vec![ZERO; t];
        for (j, &xj) in xi.iter().enumerate() {
            for (k, ak) in (j * t..(j + 1) * t).zip(a.iter_mut()) {
                *ak += eta[self.table[k] as usize].conj() * self.coeffs[k] * xj;
            }
        }
        a
    }

    /// Dense `codomain x domain` matrix, row-major.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let (m, n) = (self.codomain.len(), self.domain_len);
        let mut a = vec![ZERO; m * n];
        for j in 0..n {
            for k in j * self.terms..(j + 1) * self.terms {
                a[self.table[k] as usize * n + j] += self.coeffs[k];
            }
        }
        a
    }
}

/// `P_R Lambda_sigma(y) P_R` on `span(B_R)` in gather form; used with
/// `y = x* x`, where it equals `(Lambda(x) P_R)* (Lambda(x) P_R)`.
pub struct GramCompression {
    terms: usize,
    len: usize,
    // len x terms: ball index of h_t^-1 g_i, or OUTSIDE
    table: Vec<u32>,
    // per entry y(h_t) sigma(h_t, h_t^-1 g_i), or one per term when sigma is trivial
    coeffs: Vec<Complex64>,
    per_entry: bool,
}

impl GramCompression {
    pub fn new(y: &FourierElement, ball: &Ball) -> Result<GramCompression> {
        check_ball(y, ball)?;
        let group = y.group();
        let cocycle = y.cocycle();
        let terms: Vec<(GroupElement, Complex64)> = y.iter().map(|(h, c)| (group.inv(h), *c)).collect();
        let hs: Vec<&GroupElement> = y.support().collect();
        let per_entry = !cocycle.is_trivial();
        let n = ball.len();
        let mut table = Vec::with_capacity(n * terms.len());
        let mut coeffs = Vec::new();
        if !per_entry {
            coeffs = terms.iter().map(|(_, c)| *c).collect();
        }
        for g in ball.elements() {
            for (t, (h_inv, c)) in terms.iter().enumerate() {
                let src = group.mul(h_inv, g);
                let idx = ball.index_of(&src).map_or(OUTSIDE, |i| i as u32);
                if per_entry {
                    coeffs.push(if idx == OUTSIDE { ZERO } else { c * cocycle.eval(hs[t], &src) });
                }
                table.push(idx);
            }
        }
        Ok(GramCompression { terms: terms.len(), len: n, table, coeffs, per_entry })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `out = P_n M P_n v` on the first `n = v.len()` ball elements.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = v.len();
        assert!(n <= self.len && out.len() == n);
        let t = self.terms;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            let row = &self.table[i * t..(i + 1) * t];
            for (k, &idx) in row.iter().enumerate() {
                if (idx as usize) < n {
                    let c = if self.per_entry { self.coeffs[i * t + k] } else { self.coeffs[k] };
                    acc += c * v[idx as usize];
                }
            }
            *o = acc;
        }
    }
}

/// Dense `P_R Lambda_sigma(x) P_R` with entries
/// `M_ij = x(g_i g_j^-1) sigma(g_i g_j^-1, g_j)`, row-major.
pub fn compression_matrix(x: &FourierElement, ball: &Ball) -> Result<Vec<Complex64>> {
    check_ball(x, ball)?;
    let group = x.group();
    let n = ball.len();
    let inv: Vec<GroupElement> = ball.elements().iter().map(|g| group.inv(g)).collect();
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let h = group.mul(ball.get(i), &inv[j]);
            let c = x.coeff(&h);
            if c != ZERO {
                m[i * n + j] = c * x.cocycle().eval(&h, ball.get(j));
            }
        }
    }
    Ok(m)
}
