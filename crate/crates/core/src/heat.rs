//! The heat semigroup `M_t^d` acting on Fourier coefficients, its generator,
//! and finite diagnostics for the heat problem.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{compression_matrix, norm_profile, FourierElement, PowerOptions};
use crate::group::{Family, Group};
use crate::lengths::{l2_threshold, L2Threshold, Length};
use crate::linalg::hermitian_eigenvalues;

fn same_group(x: &FourierElement, d: &Length) -> Result<()> {
    if **x.group() != *d.group() {
        return Err(Error::Mismatch);
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param(format!("heat time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `x(t) = sum_g e^{-t d(g)} x0(g) Lambda(g)`. Coefficients that underflow to
/// zero leave the support.
pub fn heat_evolve(x0: &FourierElement, d: &Length, t: f64) -> Result<FourierElement> {
    same_group(x0, d)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let weights = x0.support().map(|g| d.eval(g).map(|v| (-t * v).exp())).collect::<Result<Vec<f64>>>()?;
    let mut w = weights.into_iter();
    Ok(x0.map(|_, c| c * w.next().expect("one weight per term")))
}

/// `H_d(x) = -sum_g d(g) x(g) Lambda(g)`.
pub fn generator_apply(x: &FourierElement, d: &Length) -> Result<FourierElement> {
    same_group(x, d)?;
    let vals = x.support().map(|g| d.eval(g)).collect::<Result<Vec<f64>>>()?;
    let mut v = vals.into_iter();
    Ok(x.map(|_, c| -c * v.next().expect("one value per term")))
}

/// `max_g |M_t M_s x0 - M_{s+t} x0|` over coefficients.
pub fn semigroup_check(x0: &FourierElement, d: &Length, s: f64, t: f64) -> Result<f64> {
    let two_step = heat_evolve(&heat_evolve(x0, d, s)?, d, t)?;
    let one_step = heat_evolve(x0, d, s + t)?;
    Ok(two_step.max_deviation(&one_step))
}

/// A heat problem on a finitely supported initial datum.
#[derive(Clone, Debug)]
pub struct HeatInstance {
    pub x0: FourierElement,
    pub length: Length,
    pub times: Vec<f64>,
}

impl HeatInstance {
    pub fn new(x0: FourierElement, length: Length, times: Vec<f64>) -> Result<HeatInstance> {
        same_group(&x0, &length)?;
        times.iter().try_for_each(|&t| check_time(t))?;
        Ok(HeatInstance { x0, length, times })
    }

    pub fn evolve(&self) -> Result<Vec<(f64, FourierElement)>> {
        self.times.iter().map(|&t| Ok((t, heat_evolve(&self.x0, &self.length, t)?))).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub h: f64,
    pub residual: f64,
    /// `r(h_prev) / r(h)` against the preceding step size.
    pub ratio: Option<f64>,
}

/// Central-difference residuals `||(u(t+h) - u(t-h)) / 2h - H_d u(t)||_tau`
/// for `u(s) = M_s x0`, one row per `h`.
pub fn heat_residual_check(x0: &FourierElement, d: &Length, t: f64, hs: &[f64]) -> Result<Vec<ResidualRow>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param(format!("residual check needs t > 0, got {t}")));
    }
    if hs.is_empty() {
        return Err(Error::param("no step sizes given"));
    }
    let ut = heat_evolve(x0, d, t)?;
    let hu = generator_apply(&ut, d)?;
    let mut rows: Vec<ResidualRow> = Vec::with_capacity(hs.len());
    for &h in hs {
        if !(h.is_finite() && h > 0.0 && t - h > 0.0) {
            return Err(Error::param(format!("step {h} must satisfy 0 < h < t = {t}")));
        }
        let fwd = heat_evolve(x0, d, t + h)?;
        let bwd = heat_evolve(x0, d, t - h)?;
        let slope = fwd.sub(&bwd)?.scale(Complex64::new(1.0 / (2.0 * h), 0.0));
        let residual = slope.sub(&hu)?.l2_norm();
        let ratio = rows.last().map(|p| p.residual / residual);
        rows.push(ResidualRow { h, residual, ratio });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeReport {
    pub h: f64,
    /// Per time: the largest deviation of the central difference of
    /// `w_g(t) = e^{-t d(g)} x0(g)` from `-d(g) w_g(t)`, relative to the
    /// latter (absolute where it vanishes).
    pub rows: Vec<(f64, f64)>,
    pub max_deviation: f64,
}

pub fn uniqueness_ode_check(x0: &FourierElement, d: &Length, t_grid: &[f64], h: f64) -> Result<OdeReport> {
    same_group(x0, d)?;
    if t_grid.is_empty() {
        return Err(Error::param("empty time grid"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param(format!("step must be positive, got {h}")));
    }
    let terms = x0.iter().map(|(g, c)| Ok((d.eval(g)?, *c))).collect::<Result<Vec<(f64, Complex64)>>>()?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        check_time(t)?;
        let mut worst: f64 = 0.0;
        for &(dv, c) in &terms {
            let w = |s: f64| c * (-s * dv).exp();
            let fd = (w(t + h) - w(t - h)) / (2.0 * h);
            let exact = -dv * w(t);
            let scale = exact.norm();
            let dev = (fd - exact).norm();
            worst = worst.max(if scale > 0.0 { dev / scale } else { dev });
        }
        rows.push((t, worst));
    }
    let max_deviation = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(OdeReport { h, rows, max_deviation })
}

/// Truncation controls for per-sphere norm estimates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailOptions {
    pub power: PowerOptions,
    /// Budget for `|B_n| * |supp|`, which fixes the truncation radius `n`.
    pub work: usize,
    pub max_norm_radius: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { power: PowerOptions::default(), work: 50_000, max_norm_radius: 24 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereTail {
    pub r: usize,
    pub support: usize,
    /// `||x0 chi_{S_r}||_2`.
    pub l2: f64,
    pub min_d: f64,
    pub c_bound: f64,
    /// Estimated norm of the damped sphere restriction (a lower bound).
    pub sphere_norm: f64,
    /// `c_bound e^{-t min d} ||x0 chi_{S_r}||_2`.
    pub bound: f64,
    pub pass: bool,
    pub norm_radius: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailProfile {
    pub t: f64,
    pub seed: u64,
    pub spheres: Vec<SphereTail>,
}

impl TailProfile {
    pub fn all_pass(&self) -> bool {
        self.spheres.iter().all(|s| s.pass)
    }

    /// `T(r+1) / T(r)` for `r = 0..R-1` (`None` where `T(r) = 0`).
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.spheres
            .windows(2)
            .map(|w| (w[0].sphere_norm > 0.0).then(|| w[1].sphere_norm / w[0].sphere_norm))
            .collect()
    }
}

const BOUND_SLACK: f64 = 1e-6;

fn c_bound(group: &Group, r: usize, sphere_size: usize) -> f64 {
    match group.family() {
        Family::Free { .. } => (r + 1) as f64,
        _ => (sphere_size as f64).sqrt(),
    }
}

/// Norms `T(r)` of the sphere restrictions of `M_t x0`, with the growth
/// bound `B(r)` and the check `T(r) <= B(r) (1 + 1e-6)`.
///
/// Spheres are word-length spheres; `R` is the largest word length in the
/// support of `x0`. Each norm is estimated on the largest ball allowed by
/// `opts.work`.
pub fn tail_profile(x0: &FourierElement, d: &Length, t: f64, opts: &TailOptions) -> Result<TailProfile> {
    let x = heat_evolve(x0, d, t)?;
    let group = x0.group().clone();
    let radius = x0.max_word_length()?;
    let ball = group.ball(radius)?;
    let dv = d.values(&ball);

    let parts: Vec<(FourierElement, FourierElement, usize)> = (0..=radius)
        .map(|r| {
            let on_sphere = |g: &_| ball.word_length(g) == Some(r);
            let y = x.restrict(on_sphere);
            let n = group.largest_ball_radius(opts.work / y.support_size().max(1), opts.max_norm_radius);
            Ok((x0.restrict(on_sphere), y, n))
        })
        .collect::<Result<_>>()?;
    let top = parts.iter().map(|p| p.2).max().unwrap_or(0);
    let norm_ball = group.ball(top)?;

    let spheres = parts
        .par_iter()
        .enumerate()
        .map(|(r, (x0r, y, n))| {
            let range = ball.sphere_range(r);
            let min_d = dv[range.clone()].iter().copied().fold(f64::INFINITY, f64::min);
            let c = c_bound(&group, r, range.len());
            let l2 = x0r.l2_norm();
            let bound = c * (-t * min_d).exp() * l2;
            let radii: Vec<usize> = (n.saturating_sub(2)..=*n).collect();
            let rep = norm_profile(y, &norm_ball, &radii, opts.power)?;
            Ok(SphereTail {
                r,
                support: y.support_size(),
                l2,
                min_d,
                c_bound: c,
                sphere_norm: rep.nu,
                bound,
                pass: rep.nu <= bound * (1.0 + BOUND_SLACK),
                norm_radius: *n,
                converged: rep.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailProfile { t, seed: opts.power.seed, spheres })
}

/// Ratio margin and number of trailing ratios for the summability flag.
const TAIL_MARGIN: f64 = 1e-3;
const TAIL_RATIOS: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonRow {
    pub t: f64,
    /// `t` lies below the l2 threshold estimate.
    pub below_threshold: bool,
    /// The last sphere-norm ratios are all at most `1 - 1e-3` and do not
    /// increase across the window.
    pub summable_looking: bool,
    pub max_tail_ratio: f64,
    pub bounds_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonReport {
    pub threshold: L2Threshold,
    pub tail_radius: usize,
    pub rows: Vec<EpsilonRow>,
}

/// The l2 threshold `delta(d)/2` (an upper bound for `epsilon(d, sigma)`)
/// next to tail summability flags of `M_t` on sphere-normalized indicator
/// data over `B_{tail_radius}`. No value of `epsilon` is claimed.
pub fn epsilon_diagnostics(
    d: &Length,
    cocycle: &std::sync::Arc<crate::fourier::Cocycle>,
    r_max: usize,
    tail_radius: usize,
    t_grid: &[f64],
    opts: &TailOptions,
) -> Result<EpsilonReport> {
    let group = std::sync::Arc::new(d.group().clone());
    let threshold = l2_threshold(d, &group, r_max)?;
    let ball = group.ball(tail_radius)?;
    let terms = (0..=tail_radius).flat_map(|r| {
        let s = ball.sphere(r);
        let c = Complex64::new(1.0 / (s.len() as f64).sqrt(), 0.0);
        s.iter().map(move |g| (g.clone(), c))
    });
    let x0 = FourierElement::from_terms(group.clone(), cocycle.clone(), terms)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let prof = tail_profile(&x0, d, t, opts)?;
        let ratios: Vec<f64> = prof.ratios().into_iter().map(|r| r.unwrap_or(f64::INFINITY)).collect();
        let tail = &ratios[ratios.len().saturating_sub(TAIL_RATIOS)..];
        let max_tail_ratio = tail.iter().copied().fold(0.0, f64::max);
        rows.push(EpsilonRow {
            t,
            below_threshold: t < threshold.estimate,
            // polynomial decay shows ratios creeping up towards 1
            summable_looking: !tail.is_empty()
                && max_tail_ratio <= 1.0 - TAIL_MARGIN
                && tail[tail.len() - 1] <= tail[0] + TAIL_MARGIN,
            max_tail_ratio,
            bounds_pass: prof.all_pass(),
        });
    }
    Ok(EpsilonReport { threshold, tail_radius, rows })
}

/// Smallest eigenvalue of `P_R Lambda_sigma(x) P_R` for each radius.
pub fn truncated_min_eigenvalues(x: &FourierElement, radii: &[usize]) -> Result<Vec<(usize, f64)>> {
    let top = radii.iter().copied().max().unwrap_or(0);
    let ball = x.group().ball(top)?;
    radii
        .iter()
        .map(|&r| {
            let b = ball.truncate(r);
            let m = compression_matrix(x, &b)?;
            Ok((r, hermitian_eigenvalues(&m, b.len())[0]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::Cocycle;
    use crate::group::GroupElement;
    use crate::sample::{random_sphere_unit, random_unit};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn z() -> Arc<Group> {
        Arc::new(Group::free_abelian(1).unwrap())
    }

    fn length(spec: &str, g: &Group) -> Length {
        Length::new(spec.parse().unwrap(), g).unwrap()
    }

    fn trivial() -> Arc<Cocycle> {
        Arc::new(Cocycle::Trivial)
    }

    fn zm(m: i64) -> GroupElement {
        GroupElement::abelian(&[m])
    }

    fn f2_random(radius: usize, seed: u64) -> FourierElement {
        let g = Arc::new(Group::free(2).unwrap());
        let ball = g.ball(radius).unwrap();
        random_unit(&g, &trivial(), ball.elements(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn evolution_basics() {
        let z2 = Arc::new(Group::free_abelian(2).unwrap());
        let theta = Arc::new(Cocycle::parse_theta("0,pi/3", 2).unwrap());
        let d = length("l2sq", &z2);
        let x0 = FourierElement::from_terms(z2.clone(), theta, [(GroupElement::abelian(&[1, 0]), one())]).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let u = heat_evolve(&x0, &d, t).unwrap();
            assert_eq!(u.coeff(&GroupElement::abelian(&[1, 0])).re, (-t).exp());
        }
        assert_eq!(heat_evolve(&x0, &d, 0.0).unwrap().max_deviation(&x0), 0.0);
        assert!(heat_evolve(&x0, &d, -1.0).is_err());
        assert!(heat_evolve(&x0, &length("word", &Group::free(2).unwrap()), 1.0).is_err());
    }

    #[test]
    fn generator_examples() {
        let d = length("l2sq", &z());
        let x = FourierElement::from_terms(z(), trivial(), [(zm(3), one())]).unwrap();
        assert_eq!(generator_apply(&x, &d).unwrap().coeff(&zm(3)), Complex64::new(-9.0, 0.0));
        let e = FourierElement::from_terms(z(), trivial(), [(zm(0), one())]).unwrap();
        assert!(generator_apply(&e, &d).unwrap().is_zero());
    }

    #[test]
    fn semigroup_on_f2() {
        let g = Group::free(2).unwrap();
        let d = length("word", &g);
        let x0 = f2_random(4, 1);
        assert!(semigroup_check(&x0, &d, 0.3, 0.7).unwrap() <= 1e-12);
        assert_eq!(semigroup_check(&x0, &d, 0.0, 0.7).unwrap(), 0.0);
        assert_eq!(semigroup_check(&x0, &d, 0.3, 0.0).unwrap(), 0.0);
        let late = heat_evolve(&x0, &d, 50.0).unwrap();
        let e = g.identity();
        assert!(late.iter().all(|(h, c)| *h == e || c.norm() < 1e-16));
    }

    // r(h) for x0 = Lambda(1) + Lambda(-1), d = m^2 at t = 1 is
    // sqrt(2) e^{-1} (sinh(h)/h - 1)
    #[test]
    fn residuals_on_z() {
        let d = length("l2sq", &z());
        let x0 = FourierElement::from_terms(z(), trivial(), [(zm(1), one()), (zm(-1), one())]).unwrap();
        let rows = heat_residual_check(&x0, &d, 1.0, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        for row in &rows {
            let exact = 2f64.sqrt() * (-1f64).exp() * (row.h.sinh() / row.h - 1.0);
            assert!((row.residual - exact).abs() <= 1e-8 * exact + 1e-12, "{row:?} vs {exact}");
        }
        for row in &rows[1..] {
            let q = row.ratio.unwrap();
            assert!((3.6..=4.4).contains(&q), "{q}");
        }
        assert!(heat_residual_check(&x0, &d, 1.0, &[1.0]).is_err());
        let e = FourierElement::from_terms(z(), trivial(), [(zm(0), Complex64::new(2.0, 1.0))]).unwrap();
        assert!(heat_residual_check(&e, &d, 1.0, &[1e-2]).unwrap().iter().all(|r| r.residual == 0.0));
    }

    #[test]
    fn residuals_on_f2() {
        let d = length("word", &Group::free(2).unwrap());
        let rows = heat_residual_check(&f2_random(3, 9), &d, 1.0, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        for row in &rows[1..] {
            assert!((3.6..=4.4).contains(&row.ratio.unwrap()), "{row:?}");
        }
    }

    #[test]
    fn ode_slopes() {
        let d = length("l2sq", &z());
        let x0 = FourierElement::from_terms(z(), trivial(), [(zm(2), one()), (zm(0), one())]).unwrap();
        let rep = uniqueness_ode_check(&x0, &d, &[0.5], 1e-3).unwrap();
        // slope at g = 2 is -4 e^{-2}; deviation is relative to that
        assert!(rep.max_deviation * 4.0 * (-2f64).exp() < 1e-4);
        let dw = length("word", &Group::free(2).unwrap());
        let x = f2_random(3, 4);
        let a = uniqueness_ode_check(&x, &dw, &[0.2, 1.0], 1e-2).unwrap().max_deviation;
        let b = uniqueness_ode_check(&x, &dw, &[0.2, 1.0], 5e-3).unwrap().max_deviation;
        assert!((3.9..=4.1).contains(&(a / b)), "{}", a / b);
    }

    #[test]
    fn tail_on_z_sphere_pairs() {
        let d = length("word", &z());
        let x0 = FourierElement::from_terms(z(), trivial(), [(zm(3), one()), (zm(-3), one())]).unwrap();
        let prof = tail_profile(&x0, &d, 0.0, &TailOptions::default()).unwrap();
        let s3 = &prof.spheres[3];
        // lambda(3) + lambda(-3) has norm 2; on B_24 it splits into three
        // path chains of 15 to 17 points, which stay visibly below that
        assert!(s3.sphere_norm <= 2.0 + 1e-12 && s3.sphere_norm > 1.96, "{s3:?}");
        assert!(prof.all_pass());
        assert_eq!(prof.spheres[1].sphere_norm, 0.0);
    }

    #[test]
    fn bounded_length_only_rescales() {
        let d = length("bounded", &z());
        let ball = z().ball(6).unwrap();
        let x0 = random_sphere_unit(&trivial(), &ball, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let opts = TailOptions { max_norm_radius: 12, ..TailOptions::default() };
        let base = tail_profile(&x0, &d, 0.0, &opts).unwrap();
        let damped = tail_profile(&x0, &d, 1.5, &opts).unwrap();
        for (a, b) in base.spheres.iter().zip(&damped.spheres).skip(1) {
            assert!((b.sphere_norm - (-1.5f64).exp() * a.sphere_norm).abs() <= 1e-10 * a.sphere_norm);
        }
    }

    #[test]
    fn f2_sphere_bounds() {
        let d = length("word", &Group::free(2).unwrap());
        let ball = Group::free(2).unwrap().ball(5).unwrap();
        let x0 = random_sphere_unit(&trivial(), &ball, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let prof = tail_profile(&x0, &d, 0.2, &TailOptions::default()).unwrap();
        assert!(prof.all_pass(), "{prof:?}");
        assert!(prof.spheres.iter().all(|s| s.sphere_norm >= s.l2 * (-0.2 * s.r as f64).exp() * (1.0 - 1e-12)));
    }

    #[test]
    fn epsilon_reports() {
        let f2 = Group::free(2).unwrap();
        let opts = TailOptions { work: 20_000, ..TailOptions::default() };
        let rep = epsilon_diagnostics(&length("word", &f2), &trivial(), 14, 6, &[0.2, 0.4], &opts).unwrap();
        assert!((rep.threshold.exact.unwrap() - 3f64.ln() / 2.0).abs() < 1e-15);
        assert!((rep.threshold.estimate - 0.549).abs() < 0.01, "{}", rep.threshold.estimate);
        assert!(rep.rows.iter().all(|r| r.summable_looking && r.below_threshold && r.bounds_pass), "{:?}", rep.rows);

        let z1 = Group::free_abelian(1).unwrap();
        let rep = epsilon_diagnostics(&length("log", &z1), &trivial(), 100_000, 12, &[0.4], &opts).unwrap();
        assert!(!rep.rows[0].summable_looking && rep.rows[0].below_threshold);
    }

    #[test]
    fn positivity_on_torus() {
        let z2 = Arc::new(Group::free_abelian(2).unwrap());
        let theta = Arc::new(Cocycle::rotation(std::f64::consts::PI / 3.0).unwrap());
        let ball = z2.ball(3).unwrap();
        let y = random_unit(&z2, &theta, ball.elements(), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let x0 = y.adjoint().multiply(&y).unwrap();
        let u = heat_evolve(&x0, &length("l2sq", &z2), 0.3).unwrap();
        for (_, lmin) in truncated_min_eigenvalues(&u, &[0, 2, 4]).unwrap() {
            assert!(lmin >= -1e-10, "{lmin}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn heat_laws(seed in 0u64..1000, t in 0.01f64..3.0, s in 0.01f64..3.0) {
            let g = Group::free(2).unwrap();
            let d = length("word", &g);
            let x0 = f2_random(3, seed);
            let u = heat_evolve(&x0, &d, t).unwrap();
            let v = heat_evolve(&x0, &d, t + s).unwrap();
            prop_assert_eq!(u.trace(), x0.trace());
            prop_assert!(u.l2_norm() < x0.l2_norm());
            prop_assert!(v.l2_norm() < u.l2_norm());
            for (h, c) in x0.iter() {
                prop_assert!(v.coeff(h).norm() <= u.coeff(h).norm() && u.coeff(h).norm() <= c.norm());
            }
            let lhs = heat_evolve(&x0.adjoint(), &d, t).unwrap();
            prop_assert!(lhs.max_deviation(&u.adjoint()) == 0.0);
            let y = f2_random(2, seed + 1);
            let lin = generator_apply(&x0.add(&y).unwrap(), &d).unwrap();
            let sum = generator_apply(&x0, &d).unwrap().add(&generator_apply(&y, &d).unwrap()).unwrap();
            prop_assert!(lin.max_deviation(&sum) <= 1e-15);
        }
    }
}
