//! Poincaré exponent `delta(d) = inf { s : sum_g exp(-s d(g)) < inf }` from
//! finite data.
//!
//! The sum is grouped into level-set shells `{g : d(g) in [k w, (k+1) w)}`.
//! A shell is only used if it lies entirely inside the enumerated region,
//! i.e. below the smallest value `T` of `d` on the outer sphere. The series
//! looks convergent at `s` when the last five shell-to-shell ratios are all at
//! most `1 - 1e-3`. Shell ratios are nonincreasing in `s` (outer shells carry
//! larger values of `d`), so the threshold is located by bisection.

use serde::Serialize;

use super::{Length, LengthSpec};
use crate::error::{Error, Result};
use crate::group::{Family, Group};

pub const RATIO_MARGIN: f64 = 1e-3;
pub const TAIL_SHELLS: usize = 5;
const S_MAX: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareFlag {
    /// `d` vanishes on the whole ball.
    Degenerate,
    /// `d` does not grow from the first sphere to the outer sphere, so the
    /// series diverges for every `s`.
    NotProper,
    /// Too few complete, nonempty shells to run the tail test.
    InsufficientRadius,
    /// Still divergent-looking at the largest tried `s`.
    Unbounded,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub kind: String,
    pub r_max: usize,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub flag: Option<PoincareFlag>,
    pub explanation: String,
    pub shell_width: f64,
    pub shells: usize,
    /// Smallest value of `d` on the outer sphere.
    pub cutoff: f64,
    /// Whether values were taken from sphere counts instead of an enumerated
    /// ball.
    pub counted: bool,
}

impl PoincareReport {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.delta_lo + self.delta_hi)
    }

    pub fn contains(&self, s: f64, slack: f64) -> bool {
        self.delta_lo - slack <= s && s <= self.delta_hi + slack
    }
}

/// Values of `d` with multiplicities on `B_{r_max}`, plus the outer-sphere
/// minimum and the per-sphere minima.
struct Profile {
    values: Vec<(f64, f64)>, // (d, ln multiplicity)
    sphere_min: Vec<f64>,
    counted: bool,
}

fn profile(d: &Length, group: &Group, r_max: usize) -> Result<Profile> {
    if d.is_radial() {
        if let Some(counts) = group.sphere_counts(r_max) {
            let counts = counts?;
            let mut values = Vec::with_capacity(r_max + 1);
            let mut sphere_min = Vec::with_capacity(r_max + 1);
            for (r, c) in counts.into_iter().enumerate() {
                let v = d.radial(r).expect("radial length");
                values.push((v, (c as f64).ln()));
                sphere_min.push(v);
            }
            return Ok(Profile { values, sphere_min, counted: true });
        }
    }
    let ball = group.ball(r_max)?;
    let vals = d.values(&ball);
    let sphere_min = (0..=r_max)
        .map(|r| vals[ball.sphere_range(r)].iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    Ok(Profile { values: vals.into_iter().map(|v| (v, 0.0)).collect(), sphere_min, counted: false })
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct Shells {
    // per shell: (d, ln multiplicity) pairs
    members: Vec<Vec<(f64, f64)>>,
}

impl Shells {
    fn log_sums(&self, s: f64) -> Vec<f64> {
        self.members
            .iter()
            .map(|m| log_sum_exp(m.iter().map(|(v, lc)| lc - s * v)))
            .collect()
    }

    fn convergent_looking(&self, s: f64) -> bool {
        let l = self.log_sums(s);
        let k = l.len();
        (k - TAIL_SHELLS - 1..k - 1).all(|i| (l[i + 1] - l[i]).exp() <= 1.0 - RATIO_MARGIN)
    }
}

/// Brackets the Poincaré exponent of `d` to width `s_tol` from `B_{r_max}`.
///
/// Radial lengths on groups with a sphere-counting formula never enumerate
/// the ball, so radii such as `10^5` on `Z` are cheap.
pub fn poincare_estimate(d: &Length, group: &Group, r_max: usize, s_tol: f64) -> Result<PoincareReport> {
    if d.group() != group {
        return Err(Error::Mismatch);
    }
    if !(s_tol > 0.0) {
        return Err(Error::param(format!("s tolerance must be positive, got {s_tol}")));
    }
    let p = profile(d, group, r_max)?;
    let cutoff = *p.sphere_min.last().expect("at least the identity sphere");
    let mut report = PoincareReport {
        kind: d.spec().to_string(),
        r_max,
        delta_lo: 0.0,
        delta_hi: f64::INFINITY,
        flag: None,
        explanation: String::new(),
        shell_width: 0.0,
        shells: 0,
        cutoff,
        counted: p.counted,
    };
    let flagged = |mut r: PoincareReport, flag, why: String| {
        r.flag = Some(flag);
        r.explanation = why;
        Ok(r)
    };

    if p.values.iter().all(|(v, _)| *v == 0.0) {
        return flagged(report, PoincareFlag::Degenerate, "d vanishes on the ball; the series diverges for every s".into());
    }
    if r_max >= 2 && p.sphere_min[r_max] <= p.sphere_min[1] {
        return flagged(
            report,
            PoincareFlag::NotProper,
            format!("min of d on S_{r_max} is {cutoff}, no larger than on S_1; d does not look proper"),
        );
    }

    let width = if cutoff >= 10.0 { 1.0 } else { cutoff / 10.0 };
    let count = (cutoff / width + 1e-9).floor() as usize;
    let mut members = vec![Vec::new(); count];
    for &(v, lc) in &p.values {
        let k = (v / width).floor() as usize;
        if k < count {
            members[k].push((v, lc));
        }
    }
    report.shell_width = width;
    report.shells = count;
    if count < TAIL_SHELLS + 1 || members[count - TAIL_SHELLS - 1..].iter().any(Vec::is_empty) {
        return flagged(
            report,
            PoincareFlag::InsufficientRadius,
            format!("only {count} complete shells of width {width} below the cutoff {cutoff}, or empty shells in the tail"),
        );
    }
    let shells = Shells { members };

    if shells.convergent_looking(0.0) {
        report.delta_hi = 0.0;
        report.explanation = "convergent-looking already at s = 0".into();
        return Ok(report);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !shells.convergent_looking(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > S_MAX {
            report.delta_lo = lo;
            return flagged(report, PoincareFlag::Unbounded, format!("still divergent-looking at s = {lo}"));
        }
    }
    while hi - lo > s_tol {
        let mid = 0.5 * (lo + hi);
        if shells.convergent_looking(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.delta_lo = lo;
    report.delta_hi = hi;
    report.explanation = format!("tail test over the last {TAIL_SHELLS} of {count} shells of width {width}");
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Threshold {
    /// Half the estimated Poincaré exponent; an upper bound for the l2
    /// threshold of the heat semigroup.
    pub estimate: f64,
    /// `ln(2k - 1) / 2` for word length on `F_k`.
    pub exact: Option<f64>,
    pub poincare: PoincareReport,
}

pub fn l2_threshold(d: &Length, group: &Group, r_max: usize) -> Result<L2Threshold> {
    let poincare = poincare_estimate(d, group, r_max, 1e-3)?;
    let estimate = if poincare.delta_hi.is_finite() { poincare.midpoint() / 2.0 } else { f64::INFINITY };
    let exact = match (d.spec(), group.family()) {
        (LengthSpec::Word, Family::Free { rank }) => Some(((2 * rank - 1) as f64).ln() / 2.0),
        _ => None,
    };
    Ok(L2Threshold { estimate, exact, poincare })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(group: &Group, spec: &str, r_max: usize) -> PoincareReport {
        let d = Length::new(spec.parse().unwrap(), group).unwrap();
        poincare_estimate(&d, group, r_max, 1e-3).unwrap()
    }

    #[test]
    fn free_group_threshold_is_ln3() {
        let r = est(&Group::free(2).unwrap(), "word", 14);
        assert!(r.flag.is_none());
        // the detector fires once 3 e^{-s} <= 1 - 1e-3
        let s_star = 3f64.ln() - (1.0 - RATIO_MARGIN).ln();
        assert!(r.contains(s_star, 0.0), "{r:?}");
        assert!(r.delta_hi - r.delta_lo <= 1e-3);
    }

    #[test]
    fn log_length_on_z() {
        let r = est(&Group::free_abelian(1).unwrap(), "log", 100_000);
        assert!(r.counted);
        assert!(r.contains(1.0, 0.05), "{r:?}");
    }

    #[test]
    fn l1_on_z2_is_near_zero() {
        let r = est(&Group::free_abelian(2).unwrap(), "l1", 30);
        assert!(r.delta_hi <= 0.05, "{r:?}");
    }

    #[test]
    fn ball_route_agrees_with_counting() {
        // L2 on Z^2 is not radial, so this enumerates the ball
        let g = Group::free_abelian(2).unwrap();
        let r = est(&g, "l2", 40);
        assert!(!r.counted);
        assert!(r.delta_hi <= 0.2, "{r:?}");
        // syllable count on F_2 has infinite sublevel sets (all powers of a)
        let w = est(&Group::free(2).unwrap(), "block", 9);
        assert_eq!(w.flag, Some(PoincareFlag::NotProper));
    }

    #[test]
    fn flags() {
        let z = Group::free_abelian(1).unwrap();
        assert_eq!(est(&z, "bounded", 50).flag, Some(PoincareFlag::NotProper));
        assert_eq!(est(&z, "word", 3).flag, Some(PoincareFlag::InsufficientRadius));
        let r = est(&z, "power:0.001", 50);
        assert!(r.flag.is_some(), "{r:?}");
    }

    #[test]
    fn intervals_shrink_with_radius() {
        let cases: [(Group, &str, [usize; 3]); 3] = [
            (Group::free(2).unwrap(), "word", [8, 11, 14]),
            (Group::free_abelian(1).unwrap(), "log", [1_000, 10_000, 100_000]),
            (Group::free_abelian(2).unwrap(), "l1", [10, 20, 30]),
        ];
        for (g, spec, radii) in cases {
            let reports: Vec<_> = radii.iter().map(|&r| est(&g, spec, r)).collect();
            for w in reports.windows(2) {
                assert!(w[1].delta_hi <= w[0].delta_hi + 1e-3, "{spec}: {:?}", reports);
            }
        }
    }

    #[test]
    fn l2_threshold_examples() {
        let f2 = Group::free(2).unwrap();
        let t = l2_threshold(&Length::new(LengthSpec::Word, &f2).unwrap(), &f2, 14).unwrap();
        assert!((t.estimate - 3f64.ln() / 2.0).abs() < 0.01);
        assert_eq!(t.exact, Some(3f64.ln() / 2.0));
        let z = Group::free_abelian(1).unwrap();
        let t = l2_threshold(&Length::new(LengthSpec::Log, &z).unwrap(), &z, 100_000).unwrap();
        assert!((t.estimate - 0.5).abs() < 0.01);
        assert!(t.exact.is_none());
    }
}
