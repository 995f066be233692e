//! Seeded random coefficient data for the diagnostics.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::fourier::{Cocycle, FourierElement};
use crate::group::{Ball, Group, GroupElement};

/// A standard complex Gaussian.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Gaussian coefficients on `elements`, scaled to unit l2 norm.
pub fn random_unit<R: Rng + ?Sized>(
    group: &Arc<Group>,
    cocycle: &Arc<Cocycle>,
    elements: &[GroupElement],
    rng: &mut R,
) -> Result<FourierElement> {
    let coeffs: Vec<Complex64> = elements.iter().map(|_| gaussian(rng)).collect();
    let s = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    FourierElement::from_terms(group.clone(), cocycle.clone(), elements.iter().cloned().zip(coeffs.into_iter().map(|c| c / s)))
}

/// Gaussian coefficients on the ball with unit l2 norm on every sphere.
pub fn random_sphere_unit<R: Rng + ?Sized>(cocycle: &Arc<Cocycle>, ball: &Ball, rng: &mut R) -> Result<FourierElement> {
    let group = Arc::new(ball.group().clone());
    let mut x = FourierElement::zero(group.clone(), cocycle.clone())?;
    for r in 0..=ball.radius() {
        x = x.add(&random_unit(&group, cocycle, ball.sphere(r), rng)?)?;
    }
    Ok(x)
}
