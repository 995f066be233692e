//! Lower bounds for `||Lambda_sigma(x)||` by power iteration on ball
//! compressions of `x* x`.
//!
//! For radii `R_1 < R_2 < ...` the iteration is continued: the final vector at
//! `R_k` is zero-padded, plus a small seeded random component on `B_{R_{k+1}}`
//! so that directions suppressed at the smaller radius can reappear. Each
//! radius reports the best Rayleigh quotient seen so far, which is a lower
//! bound at that radius too, so the values are nondecreasing in `R`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::operator::{GramCompression, TruncatedOperator};
use super::FourierElement;
use crate::error::{Error, Result};
use crate::group::{Ball, GroupElement};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const RESEED: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerOptions {
    /// Relative change of the Rayleigh quotient that counts as converged.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { tol: 1e-10, max_iters: 10_000, seed: 0 }
    }
}

impl PowerOptions {
    pub fn with_seed(seed: u64) -> Self {
        PowerOptions { seed, ..PowerOptions::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::param("power iteration needs tol > 0 and max_iters > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusNorm {
    #[serde(rename = "R")]
    pub radius: usize,
    pub nu: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    /// Lower bound `nu_R` for the operator norm.
    #[serde(rename = "nu_R")]
    pub nu: f64,
    /// `||x||_1`, an upper bound.
    pub l1_upper: f64,
    /// `||x||_2 = ||Lambda(x) delta_e||`, a lower bound.
    pub l2_lower: f64,
    #[serde(rename = "R")]
    pub radius: usize,
    /// Iterations spent at the final radius.
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// `nu` at the last (up to) three radii, ascending.
    pub last: Vec<f64>,
    pub profile: Vec<RadiusNorm>,
}

enum Route {
    Gram(GramCompression),
    Rect(TruncatedOperator, Vec<Complex64>),
}

impl Route {
    fn build(x: &FourierElement, ball: &Ball) -> Result<Route> {
        // x* x is cheaper to apply unless its support blows up; forming it
        // costs |supp x|^2, so skip that for large supports
        if x.support_size() <= 64 {
            let y = x.adjoint().multiply(x)?;
            if y.support_size() <= 2 * x.support_size() + 16 {
                return Ok(Route::Gram(GramCompression::new(&y, ball)?));
            }
        }
        let op = TruncatedOperator::new(x, ball)?;
        let scratch = vec![ZERO; op.codomain_len()];
        Ok(Route::Rect(op, scratch))
    }

    fn apply(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        match self {
            Route::Gram(g) => g.apply(v, out),
            Route::Rect(op, scratch) => {
                op.apply(v, scratch);
                op.apply_adjoint(scratch, out);
            }
        }
    }
}

fn dot_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.re * q.re + p.im * q.im).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Power iteration over the ascending `radii` (each at most `ball.radius()`).
/// The random start vector lives on `B_{radii[0]}`.
pub fn norm_profile(x: &FourierElement, ball: &Ball, radii: &[usize], opts: PowerOptions) -> Result<NormReport> {
    opts.validate()?;
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) || *radii.last().unwrap() > ball.radius() {
        return Err(Error::param("radii must be strictly ascending and within the ball"));
    }
    let l1_upper = x.l1_norm();
    let l2_lower = x.l2_norm();
    let seed = opts.seed;
    let final_r = *radii.last().unwrap();
    if x.is_zero() {
        let profile = radii.iter().map(|&r| RadiusNorm { radius: r, nu: 0.0, iterations: 0, converged: true }).collect();
        return Ok(NormReport {
            nu: 0.0,
            l1_upper,
            l2_lower,
            radius: final_r,
            iterations: 0,
            converged: true,
            seed,
            last: vec![0.0; radii.len().min(3)],
            profile,
        });
    }
    let top = ball.truncate(final_r);
    let mut route = Route::build(x, &top)?;

    let n_max = top.len();
    let mut v = vec![ZERO; n_max];
    let mut w = vec![ZERO; n_max];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));

    let mut best = 0.0f64;
    let mut profile = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let n = top.prefix_len(r);
        let noise: Vec<Complex64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let weight = if k == 0 { 1.0 } else { RESEED / norm(&noise) };
        for (a, b) in v[..n].iter_mut().zip(&noise) {
            *a += weight * b;
        }
        let s = norm(&v[..n]);
        v[..n].iter_mut().for_each(|z| *z /= s);
        let mut prev: Option<f64> = None;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iters {
            route.apply(&v[..n], &mut w[..n]);
            iterations += 1;
            let rho = dot_re(&v[..n], &w[..n]);
            best = best.max(rho);
            if let Some(p) = prev {
                if (rho - p).abs() <= opts.tol * rho.abs() {
                    converged = true;
                    break;
                }
            }
            prev = Some(rho);
            let nw = norm(&w[..n]);
            if nw == 0.0 {
                converged = true;
                break;
            }
            for (a, b) in v[..n].iter_mut().zip(&w[..n]) {
                *a = b / nw;
            }
        }
        let nu = best.max(0.0).sqrt().max(l2_lower);
        profile.push(RadiusNorm { radius: r, nu, iterations, converged });
    }
    let lastp = profile.last().expect("nonempty radii");
    Ok(NormReport {
        nu: lastp.nu,
        l1_upper,
        l2_lower,
        radius: final_r,
        iterations: lastp.iterations,
        converged: lastp.converged,
        seed,
        last: profile[profile.len().saturating_sub(3)..].iter().map(|p| p.nu).collect(),
        profile,
    })
}

/// `nu_R` on a given ball (radius `R`), iterating over `R-2, R-1, R`.
pub fn norm_estimate_on(x: &FourierElement, ball: &Ball, opts: PowerOptions) -> Result<NormReport> {
    let r = ball.radius();
    let radii: Vec<usize> = (r.saturating_sub(2)..=r).collect();
    norm_profile(x, ball, &radii, opts)
}

pub fn norm_estimate(x: &FourierElement, radius: usize, opts: PowerOptions) -> Result<NormReport> {
    let ball = x.group().ball(radius)?;
    norm_estimate_on(x, &ball, opts)
}

/// `nu_R` of the partial sum over the support elements satisfying `keep`.
pub fn partial_sum_norm(
    x: &FourierElement,
    keep: impl FnMut(&GroupElement) -> bool,
    ball: &Ball,
    opts: PowerOptions,
) -> Result<NormReport> {
    norm_estimate_on(&x.restrict(keep), ball, opts)
}
