use serde::Serialize;

use super::Length;
use crate::error::{Error, Result};
use crate::group::Ball;

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub a: f64,
    pub b: f64,
    /// Largest violation of `c <= a c' + b` on the part of the ball not used
    /// for fitting (on the whole ball for [`dominance_check`]).
    pub residual: f64,
    pub holds: bool,
    pub fit_radius: usize,
    pub radius: usize,
}

fn max_violation(c: &[f64], cp: &[f64], a: f64, b: f64) -> f64 {
    c.iter().zip(cp).map(|(x, y)| x - a * y - b).fold(0.0, f64::max)
}

fn tolerance(c: &[f64]) -> f64 {
    1e-9 * c.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn checked_values(c: &Length, cp: &Length, ball: &Ball) -> Result<(Vec<f64>, Vec<f64>)> {
    if c.group() != ball.group() || cp.group() != ball.group() {
        return Err(Error::Mismatch);
    }
    Ok((c.values(ball), cp.values(ball)))
}

/// Empirical test of `c <~ c'`: least squares for `c ~ a c' + b` on the inner
/// half `B_{ceil(R/2)}`, with `b` raised until the envelope holds there, then
/// the envelope is tested on the outer half.
pub fn dominance_fit(c: &Length, cp: &Length, ball: &Ball) -> Result<DominanceReport> {
    let (cv, cpv) = checked_values(c, cp, ball)?;
    let fit_radius = ball.radius().div_ceil(2);
    let n = ball.prefix_len(fit_radius);
    let (xs, ys) = (&cpv[..n], &cv[..n]);
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let b0 = my - a * mx;
    let b = b0 + max_violation(ys, xs, a, b0);
    let residual = max_violation(&cv[n..], &cpv[n..], a, b);
    Ok(DominanceReport {
        a,
        b,
        residual,
        holds: residual <= tolerance(&cv),
        fit_radius,
        radius: ball.radius(),
    })
}

/// Checks `c <= a c' + b` on the whole ball for given constants.
pub fn dominance_check(c: &Length, cp: &Length, ball: &Ball, a: f64, b: f64) -> Result<DominanceReport> {
    let (cv, cpv) = checked_values(c, cp, ball)?;
    let residual = max_violation(&cv, &cpv, a, b);
    Ok(DominanceReport { a, b, residual, holds: residual <= tolerance(&cv), fit_radius: ball.radius(), radius: ball.radius() })
}
