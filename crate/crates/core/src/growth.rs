//! Haagerup content estimates, kappa-decay ratios and H-growth profiles.
//!
//! Everything here is a lower bound obtained from ball truncations; the
//! matching upper bounds (`sqrt|E|`, sphere decay) are reported alongside.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{norm_profile, Cocycle, FourierElement, PowerOptions, TruncatedOperator};
use crate::group::{Family, Group, GroupElement};
use crate::heat::{tail_profile, SphereTail, TailOptions};
use crate::lengths::{Length, LengthSpec};
use crate::sample::{gaussian, random_unit};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContentOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Truncation radius is `max |g| + pad` over `E` unless `radius` is set.
    pub pad: usize,
    pub radius: Option<usize>,
    /// Cap on `|B_R| * |E|`; the radius is lowered to respect it.
    pub work: usize,
    pub max_ascent: usize,
    pub power: PowerOptions,
}

impl Default for ContentOptions {
    fn default() -> Self {
        ContentOptions {
            restarts: 16,
            seed: 0,
            pad: 8,
            radius: None,
            work: 400_000,
            max_ascent: 1000,
            power: PowerOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContentEstimate {
    pub size: usize,
    /// Lower bound for `c(E)` up to truncation and iteration error.
    pub c_est: f64,
    /// `sqrt|E|`.
    pub upper: f64,
    pub radius: usize,
    pub requested_radius: usize,
    pub restarts: usize,
    pub per_restart: Vec<f64>,
    pub best_restart: usize,
    pub ascent_steps: usize,
    pub converged: bool,
    /// `c_est` minus the witness norm on `B_{R-2}`.
    pub radius_sensitivity: f64,
    /// The unit vector `f` on `E` attaining `c_est`.
    #[serde(skip)]
    pub witness: FourierElement,
}

impl ContentEstimate {
    pub fn lower(&self) -> f64 {
        self.c_est
    }
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|z| *z /= s);
    }
    s
}

struct Pair {
    nu: f64,
    xi: Vec<Complex64>,
    eta: Vec<Complex64>,
    converged: bool,
}

// Top singular pair of the reweighted operator on the first xi.len() domain
// elements, warm-started from xi.
fn top_pair(op: &TruncatedOperator, f: &[Complex64], mut xi: Vec<Complex64>, opts: &PowerOptions) -> Pair {
    let mut u = vec![ZERO; op.codomain_len()];
    let mut back = vec![ZERO; xi.len()];
    normalize(&mut xi);
    let mut prev: Option<f64> = None;
    let mut best = 0.0f64;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        op.apply_weighted(f, &xi, &mut u);
        let rho = u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        best = best.max(rho);
        if prev.is_some_and(|p| (rho - p).abs() <= opts.tol * rho) || rho == 0.0 {
            converged = true;
            break;
        }
        prev = Some(rho);
        op.apply_adjoint_weighted(f, &u, &mut back);
        xi.copy_from_slice(&back);
        normalize(&mut xi);
    }
    op.apply_weighted(f, &xi, &mut u);
    normalize(&mut u);
    Pair { nu: best.sqrt(), xi, eta: u, converged }
}

struct Ascent {
    value: f64,
    f: Vec<Complex64>,
    steps: usize,
    converged: bool,
}

fn ascend(op: &TruncatedOperator, mut f: Vec<Complex64>, xi: Vec<Complex64>, opts: &ContentOptions) -> Ascent {
    normalize(&mut f);
    let mut pair = top_pair(op, &f, xi, &opts.power);
    let mut best = Ascent { value: pair.nu, f: f.clone(), steps: 0, converged: false };
    for step in 1..=opts.max_ascent {
        // f <- argmax over unit f of Re sum_t f_t <Lambda(h_t) xi, eta>
        let a = op.term_pairings(&pair.eta, &pair.xi);
        f = a.iter().map(|z| z.conj()).collect();
        if normalize(&mut f) == 0.0 {
            best.converged = true;
            break;
        }
        pair = top_pair(op, &f, pair.xi, &opts.power);
        let gain = pair.nu - best.value;
        if pair.nu > best.value {
            best = Ascent { value: pair.nu, f: f.clone(), steps: step, converged: false };
        }
        if gain <= 1e-9 * best.value {
            best.converged = pair.converged;
            break;
        }
    }
    best
}

/// Multi-start alternating ascent for the Haagerup content
/// `c(E) = sup { ||Lambda_sigma(f)|| : supp f in E, ||f||_2 <= 1 }`.
///
/// Restart 0 starts from the normalized indicator of `E`, the others from
/// seeded Gaussian vectors; restarts run in parallel and are combined by
/// max, so the result does not depend on the thread count.
pub fn haagerup_content_estimate(
    group: &Arc<Group>,
    cocycle: &Arc<Cocycle>,
    elements: &[GroupElement],
    opts: &ContentOptions,
) -> Result<ContentEstimate> {
    if opts.restarts == 0 {
        return Err(Error::param("content estimate needs at least one restart"));
    }
    let ones = FourierElement::from_terms(group.clone(), cocycle.clone(), elements.iter().map(|g| (g.clone(), Complex64::new(1.0, 0.0))))?;
    let support: Vec<GroupElement> = ones.support().cloned().collect();
    let size = support.len();
    if size == 0 {
        return Err(Error::InvalidSample("empty subset".into()));
    }
    let requested_radius = match opts.radius {
        Some(r) => r,
        None => ones.max_word_length()? + opts.pad,
    };
    if size == 1 {
        return Ok(ContentEstimate {
            size,
            c_est: 1.0,
            upper: 1.0,
            radius: requested_radius,
            requested_radius,
            restarts: 0,
            per_restart: vec![],
            best_restart: 0,
            ascent_steps: 0,
            converged: true,
            radius_sensitivity: 0.0,
            witness: ones,
        });
    }
    let radius = group.largest_ball_radius(opts.work / size, requested_radius);
    let ball = group.ball(radius)?;
    let op = TruncatedOperator::new(&ones, &ball)?;

    let runs: Vec<Ascent> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let f = if k == 0 { vec![Complex64::new(1.0, 0.0); size] } else { (0..size).map(|_| gaussian(&mut rng)).collect() };
            let xi = (0..ball.len()).map(|_| gaussian(&mut rng)).collect();
            ascend(&op, f, xi, opts)
        })
        .collect();
    let per_restart: Vec<f64> = runs.iter().map(|a| a.value.max(1.0)).collect();
    let best_restart = (0..runs.len()).fold(0, |b, k| if per_restart[k] > per_restart[b] { k } else { b });
    let best = &runs[best_restart];

    let inner = ball.prefix_len(radius.saturating_sub(2));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(u64::MAX);
    let xi = (0..inner).map(|_| gaussian(&mut rng)).collect();
    let smaller = top_pair(&op, &best.f, xi, &opts.power).nu.max(1.0);

    let c_est = per_restart[best_restart];
    let witness = ones.like(support.iter().cloned().zip(best.f.iter().copied()))?;
    Ok(ContentEstimate {
        size,
        c_est,
        upper: (size as f64).sqrt(),
        radius,
        requested_radius,
        restarts: opts.restarts,
        per_restart,
        best_restart,
        ascent_steps: best.steps,
        converged: best.converged,
        radius_sensitivity: c_est - smaller,
        witness,
    })
}

/// The weight `kappa = (1 + L)^exponent` for a length `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSpec {
    pub length: LengthSpec,
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KappaOptions {
    pub samples: usize,
    /// Samples are supported in `B_radius`.
    pub radius: usize,
    pub seed: u64,
    /// Cap on `|B_n| * |supp x|` for each norm estimate.
    pub work: usize,
    pub max_norm_radius: usize,
    pub power: PowerOptions,
}

impl Default for KappaOptions {
    fn default() -> Self {
        KappaOptions { samples: 1000, radius: 6, seed: 0, work: 20_000, max_norm_radius: 8, power: PowerOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Ball,
    Sphere,
    Sparse,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaSample {
    pub kind: SampleKind,
    pub support: usize,
    pub norm: f64,
    /// `||x kappa||_2`.
    pub weighted_l2: f64,
    pub ratio: f64,
    pub running_max: f64,
    pub norm_radius: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaReport {
    /// Certified (up to iteration error) lower bound for the best `C` in
    /// `||x|| <= C ||x kappa||_2`.
    pub max_ratio: f64,
    pub samples: Vec<KappaSample>,
}

/// Probes `||x|| / ||x kappa||_2` on random ball-, sphere- and
/// sparsely-supported `x`, cycling through the three kinds.
pub fn kappa_decay_ratio(
    group: &Arc<Group>,
    cocycle: &Arc<Cocycle>,
    kappa: &KappaSpec,
    opts: &KappaOptions,
) -> Result<KappaReport> {
    if !(kappa.exponent.is_finite() && kappa.exponent >= 0.0) {
        return Err(Error::param(format!("kappa exponent must be finite and >= 0, got {}", kappa.exponent)));
    }
    let length = Length::new(kappa.length.clone(), group)?;
    let ball = group.ball(opts.radius)?;
    let weights: Vec<f64> = length.values(&ball).into_iter().map(|v| (1.0 + v).powf(kappa.exponent)).collect();
    let top = group.largest_ball_radius(opts.work, opts.max_norm_radius);
    let norm_ball = group.ball(top)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut samples = Vec::with_capacity(opts.samples);
    let mut running = 0.0f64;
    for i in 0..opts.samples {
        let kind = [SampleKind::Ball, SampleKind::Sphere, SampleKind::Sparse][i % 3];
        let x = match kind {
            SampleKind::Ball => random_unit(group, cocycle, ball.elements(), &mut rng)?,
            SampleKind::Sphere => {
                let r = rng.random_range(0..=opts.radius);
                random_unit(group, cocycle, ball.sphere(r), &mut rng)?
            }
            SampleKind::Sparse => {
                let k = rng.random_range(1..=4usize);
                let picks: Vec<GroupElement> = (0..k).map(|_| ball.get(rng.random_range(0..ball.len())).clone()).collect();
                let x = FourierElement::from_terms(group.clone(), cocycle.clone(), picks.into_iter().map(|g| (g, gaussian(&mut rng))))?;
                x.scale(Complex64::new(1.0 / x.l2_norm(), 0.0))
            }
        };
        let weighted_l2 = x
            .iter()
            .map(|(g, c)| (c * weights[ball.index_of(g).expect("sample lies in the ball")]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let n = group.largest_ball_radius(opts.work / x.support_size(), top);
        let radii: Vec<usize> = (n.saturating_sub(2)..=n).collect();
        let norm = norm_profile(&x, &norm_ball, &radii, opts.power)?.nu;
        let ratio = norm / weighted_l2;
        running = running.max(ratio);
        samples.push(KappaSample { kind, support: x.support_size(), norm, weighted_l2, ratio, running_max: running, norm_radius: n });
    }
    Ok(KappaReport { max_ratio: running, samples })
}

/// Least squares line `y = slope x + intercept` with its RMS residual.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Fit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Fit { slope, intercept, residual }
}

/// Residual below which a fit counts as consistent with the data.
pub const FIT_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthLabel {
    PolynomialConsistent,
    ExponentialConsistent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub r: usize,
    pub ball_size: usize,
    pub c_lower: f64,
    pub c_upper: f64,
    pub truncation: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthProfile {
    pub rows: Vec<GrowthRow>,
    /// `ln c_lower` against `ln(1 + r)`; the slope is the exponent.
    pub polynomial: Fit,
    /// `ln c_lower` against `r`; the slope is the rate.
    pub exponential: Fit,
    pub label: GrowthLabel,
}

/// `c(E_r)` for the sublevel sets `E_r = {g : d(g) <= r}`, `r = 0..=r_max`.
///
/// Sublevel sets are taken inside the word ball `B_{r_max}`, which contains
/// them whenever `d` dominates word length.
pub fn h_growth_profile(d: &Length, cocycle: &Arc<Cocycle>, r_max: usize, opts: &ContentOptions) -> Result<GrowthProfile> {
    let group = Arc::new(d.group().clone());
    let ball = group.ball(r_max)?;
    let vals = d.values(&ball);
    let mut rows = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let e: Vec<GroupElement> =
            ball.elements().iter().zip(&vals).filter(|(_, v)| **v <= r as f64).map(|(g, _)| g.clone()).collect();
        let est = haagerup_content_estimate(&group, cocycle, &e, opts)?;
        rows.push(GrowthRow { r, ball_size: e.len(), c_lower: est.c_est, c_upper: est.upper, truncation: est.radius });
    }
    let ys: Vec<f64> = rows.iter().map(|row| row.c_lower.ln()).collect();
    let polynomial = ols(&rows.iter().map(|row| (row.r as f64).ln_1p()).collect::<Vec<_>>(), &ys);
    let exponential = ols(&rows.iter().map(|row| row.r as f64).collect::<Vec<_>>(), &ys);
    let label = if polynomial.residual <= FIT_THRESHOLD {
        GrowthLabel::PolynomialConsistent
    } else if exponential.residual <= FIT_THRESHOLD {
        GrowthLabel::ExponentialConsistent
    } else {
        GrowthLabel::Inconclusive
    };
    Ok(GrowthProfile { rows, polynomial, exponential, label })
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereBoundReport {
    pub t: f64,
    pub rows: Vec<SphereTail>,
}

impl SphereBoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// On `F_k` with word length: `||sum_{S_r} e^{-t r} x(g) Lambda(g)|| <=
/// (r+1) e^{-t r} ||x chi_{S_r}||_2 (1 + 1e-6)` for `r <= r_max`.
pub fn sphere_multiplier_bound_check(x0: &FourierElement, t: f64, r_max: usize, opts: &TailOptions) -> Result<SphereBoundReport> {
    let group = x0.group();
    if !matches!(group.family(), Family::Free { .. }) {
        return Err(Error::param(format!("the sphere bound check needs a free group, not {}", group.name())));
    }
    let d = Length::new(LengthSpec::Word, group)?;
    let x = x0.restrict(|g| group.word_length(g).is_ok_and(|l| l <= r_max));
    let prof = tail_profile(&x, &d, t, opts)?;
    Ok(SphereBoundReport { t, rows: prof.spheres })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::random_sphere_unit;
    use proptest::prelude::*;

    fn trivial() -> Arc<Cocycle> {
        Arc::new(Cocycle::Trivial)
    }

    fn z_interval(a: i64, b: i64) -> Vec<GroupElement> {
        (a..=b).map(|m| GroupElement::abelian(&[m])).collect()
    }

    #[test]
    fn singletons_have_content_one() {
        let f2 = Arc::new(Group::free(2).unwrap());
        let g = GroupElement::free_word(&[1, 2]).unwrap();
        let est = haagerup_content_estimate(&f2, &trivial(), &[g.clone(), g], &ContentOptions::default()).unwrap();
        assert_eq!(est.c_est, 1.0);
        assert_eq!(est.size, 1);
        assert!(haagerup_content_estimate(&f2, &trivial(), &[], &ContentOptions::default()).is_err());
    }

    #[test]
    fn interval_in_z_is_nearly_full() {
        let z = Arc::new(Group::free_abelian(1).unwrap());
        let opts = ContentOptions { restarts: 4, seed: 1, ..ContentOptions::default() };
        let est = haagerup_content_estimate(&z, &trivial(), &z_interval(0, 7), &opts).unwrap();
        assert!(est.c_est >= 0.95 * 8f64.sqrt() && est.c_est <= 8f64.sqrt() + 1e-9, "{est:?}");
        assert!((est.witness.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f2_generators_bracket() {
        let f2 = Arc::new(Group::free(2).unwrap());
        let opts = ContentOptions { restarts: 3, seed: 2, ..ContentOptions::default() };
        let est = haagerup_content_estimate(&f2, &trivial(), f2.generators(), &opts).unwrap();
        // sqrt 3 is the untruncated value of the normalized indicator; the
        // truncation at R = 9 stays below it
        assert!(est.c_est > 1.6 && est.c_est <= 2.0 + 1e-9, "{est:?}");
        assert_eq!(est.radius, 9);
        assert!(est.radius_sensitivity >= 0.0);
    }

    #[test]
    fn kappa_unitaries_and_running_max() {
        let f2 = Arc::new(Group::free(2).unwrap());
        let kappa = KappaSpec { length: LengthSpec::Word, exponent: 2.0 };
        let opts = KappaOptions { samples: 30, radius: 4, seed: 5, ..KappaOptions::default() };
        let rep = kappa_decay_ratio(&f2, &trivial(), &kappa, &opts).unwrap();
        assert!(rep.samples.windows(2).all(|w| w[0].running_max <= w[1].running_max));
        assert_eq!(rep.max_ratio, rep.samples.last().unwrap().running_max);
        assert!(rep.max_ratio <= 2.0, "{}", rep.max_ratio);
        for s in rep.samples.iter().filter(|s| s.support == 1) {
            // a single unitary: ratio = 1 / kappa(g)
            assert!((s.norm - 1.0).abs() < 1e-14 && (s.ratio - 1.0 / s.weighted_l2).abs() < 1e-14);
        }
    }

    #[test]
    fn growth_on_z_is_square_root() {
        let z = Group::free_abelian(1).unwrap();
        let d = Length::new(LengthSpec::Word, &z).unwrap();
        let opts = ContentOptions { restarts: 2, seed: 3, pad: 24, ..ContentOptions::default() };
        let prof = h_growth_profile(&d, &trivial(), 5, &opts).unwrap();
        assert_eq!(prof.rows[0].c_lower, 1.0);
        assert_eq!(prof.label, GrowthLabel::PolynomialConsistent);
        // the exponent tends to 1/2; at r <= 5 the fit to sqrt(2r + 1) itself gives about 0.66
        let xs: Vec<f64> = (0..=5).map(|r| (r as f64).ln_1p()).collect();
        let ys: Vec<f64> = (0..=5).map(|r| (2.0 * r as f64 + 1.0).sqrt().ln()).collect();
        assert!((prof.polynomial.slope - ols(&xs, &ys).slope).abs() < 0.02, "{prof:?}");
        for row in &prof.rows {
            assert_eq!(row.ball_size, 2 * row.r + 1);
            assert!(row.c_lower >= 0.9 * row.c_upper);
        }
    }

    #[test]
    fn sphere_bound_on_f2() {
        let f2 = Group::free(2).unwrap();
        let ball = f2.ball(5).unwrap();
        let x0 = random_sphere_unit(&trivial(), &ball, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let rep = sphere_multiplier_bound_check(&x0, 0.2, 5, &TailOptions::default()).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.rows.len(), 6);
        let z = FourierElement::zero(Arc::new(Group::free_abelian(1).unwrap()), trivial()).unwrap();
        assert!(sphere_multiplier_bound_check(&z, 0.2, 5, &TailOptions::default()).is_err());
    }

    #[test]
    fn least_squares() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let fit = ols(&xs, &[1.0, 3.0, 5.0, 7.0]);
        assert!((fit.slope - 2.0).abs() < 1e-14 && (fit.intercept - 1.0).abs() < 1e-14 && fit.residual < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn content_bracket_and_inclusion(lo in -6i64..0, len in 1i64..6, extra in 1i64..4, seed in 0u64..100) {
            let z2 = Arc::new(Group::free_abelian(2).unwrap());
            let theta = Arc::new(Cocycle::rotation(1.3).unwrap());
            let e: Vec<GroupElement> = (lo..lo + len).map(|m| GroupElement::abelian(&[m, 1])).collect();
            let mut bigger = e.clone();
            bigger.extend((0..extra).map(|k| GroupElement::abelian(&[k, -2])));
            let opts = ContentOptions { restarts: 2, seed, radius: Some(8), ..ContentOptions::default() };
            let a = haagerup_content_estimate(&z2, &theta, &e, &opts).unwrap();
            let b = haagerup_content_estimate(&z2, &theta, &bigger, &opts).unwrap();
            let tol = 1e-6;
            prop_assert!(a.c_est >= 1.0 - tol && a.c_est <= a.upper + tol);
            prop_assert!(b.c_est >= 1.0 - tol && b.c_est <= b.upper + tol);
            prop_assert!(a.c_est <= b.c_est + 2.0 * tol, "{} > {}", a.c_est, b.c_est);
        }
    }
}
