use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Family, Group, GroupElement};

/// A normalized T-valued 2-cocycle.
///
/// `Theta` is `sigma(m, m') = exp(i m^T Theta m')` on `Z^n`; the matrix is
/// skew-symmetric modulo `2 pi` and stored with entries reduced to
/// `[0, 2 pi)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Cocycle {
    #[default]
    Trivial,
    Theta { matrix: Vec<Vec<f64>> },
}

fn reduce(v: f64) -> f64 {
    let r = v.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn near_multiple_of_tau(v: f64) -> bool {
    let r = v.rem_euclid(TAU);
    r.min(TAU - r) <= 1e-12 * (1.0 + v.abs())
}

impl Cocycle {
    pub fn theta(matrix: Vec<Vec<f64>>) -> Result<Cocycle> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCocycle("theta must be a nonempty square matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = matrix[i][j];
                if !v.is_finite() {
                    return Err(Error::InvalidCocycle(format!("entry ({i},{j}) is {v}")));
                }
                if !near_multiple_of_tau(v + matrix[j][i]) {
                    return Err(Error::InvalidCocycle(format!(
                        "theta is not skew-symmetric mod 2pi at ({i},{j}): {v} and {}",
                        matrix[j][i]
                    )));
                }
            }
        }
        let matrix = matrix.into_iter().map(|r| r.into_iter().map(reduce).collect()).collect();
        Ok(Cocycle::Theta { matrix })
    }

    /// The Theta cocycle on `Z^2` with `Theta_12 = theta`.
    pub fn rotation(theta: f64) -> Result<Cocycle> {
        Cocycle::theta(vec![vec![0.0, theta], vec![-theta, 0.0]])
    }

    /// Re-validates (e.g. after deserialization) and checks that the cocycle
    /// lives on `group`.
    pub fn validate(self, group: &Group) -> Result<Cocycle> {
        match self {
            Cocycle::Trivial => Ok(Cocycle::Trivial),
            Cocycle::Theta { matrix } => {
                let c = Cocycle::theta(matrix)?;
                let n = c.dimension().expect("theta has a dimension");
                match group.family() {
                    Family::FreeAbelian { rank } if *rank == n => Ok(c),
                    _ => Err(Error::InvalidCocycle(format!("a {n}x{n} theta cocycle needs Z^{n}, not {}", group.name()))),
                }
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Cocycle::Trivial)
    }

    fn dimension(&self) -> Option<usize> {
        match self {
            Cocycle::Trivial => None,
            Cocycle::Theta { matrix } => Some(matrix.len()),
        }
    }

    /// `m^T Theta m'`, or `0` for the trivial cocycle.
    pub fn phase(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        match (self, g, h) {
            (Cocycle::Trivial, _, _) => 0.0,
            (Cocycle::Theta { matrix }, GroupElement::Abelian(m), GroupElement::Abelian(k)) => {
                let mut s = 0.0;
                for (i, &mi) in m.iter().enumerate() {
                    if mi == 0 {
                        continue;
                    }
                    let row = &matrix[i];
                    let inner: f64 = k.iter().zip(row).map(|(&kj, t)| kj as f64 * t).sum();
                    s += mi as f64 * inner;
                }
                s
            }
            _ => panic!("theta cocycle evaluated off Z^n"),
        }
    }

    pub fn eval(&self, g: &GroupElement, h: &GroupElement) -> Complex64 {
        match self {
            Cocycle::Trivial => Complex64::new(1.0, 0.0),
            _ => Complex64::cis(self.phase(g, h)),
        }
    }

    /// Parses `--theta` text: `n^2` entries (row-major), `n(n-1)/2` strictly
    /// upper-triangular entries, or for `n = 2` the first row `0,theta`.
    /// Entries may be numbers or multiples of `pi` such as `pi/3`, `-2pi/5`.
    pub fn parse_theta(text: &str, n: usize) -> Result<Cocycle> {
        let vals = text.split(',').map(parse_angle).collect::<Result<Vec<f64>>>()?;
        let mut m = vec![vec![0.0; n]; n];
        if vals.len() == n * n {
            for i in 0..n {
                m[i].copy_from_slice(&vals[i * n..(i + 1) * n]);
            }
        } else if vals.len() == n * (n - 1) / 2 {
            let mut it = vals.iter();
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = *it.next().expect("counted");
                    m[i][j] = v;
                    m[j][i] = -v;
                }
            }
        } else if n == 2 && vals.len() == 2 {
            if !near_multiple_of_tau(vals[0]) {
                return Err(Error::InvalidCocycle(format!("diagonal entry {} must vanish", vals[0])));
            }
            m[0][1] = vals[1];
            m[1][0] = -vals[1];
        } else {
            return Err(Error::InvalidCocycle(format!("{} theta entries do not fit Z^{n}", vals.len())));
        }
        Cocycle::theta(m)
    }
}

fn parse_angle(s: &str) -> Result<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let bad = || Error::InvalidCocycle(format!("cannot parse angle '{s}'"));
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = match num.strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coef * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("-2pi/5").unwrap(), -2.0 * PI / 5.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn theta_forms_agree() {
        let a = Cocycle::parse_theta("0,pi/3", 2).unwrap();
        let b = Cocycle::parse_theta("pi/3", 2).unwrap();
        let c = Cocycle::parse_theta("0,pi/3,-pi/3,0", 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a, Cocycle::rotation(PI / 3.0).unwrap());
        assert!(Cocycle::parse_theta("1,pi/3", 2).is_err());
        assert!(Cocycle::parse_theta("0,1,1,0", 2).is_err());
        assert!(Cocycle::rotation(1.0).unwrap().validate(&Group::free_abelian(3).unwrap()).is_err());
    }

    #[test]
    fn cocycle_identity_and_normalization() {
        let z3 = Group::free_abelian(3).unwrap();
        let c = Cocycle::parse_theta("0.7,pi/5,2.1", 3).unwrap().validate(&z3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rand_el = |rng: &mut ChaCha8Rng| {
            GroupElement::abelian(&[rng.random_range(-6..=6), rng.random_range(-6..=6), rng.random_range(-6..=6)])
        };
        let e = z3.identity();
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let (g, h, k) = (rand_el(&mut rng), rand_el(&mut rng), rand_el(&mut rng));
            let lhs = c.eval(&g, &h) * c.eval(&z3.mul(&g, &h), &k);
            let rhs = c.eval(&g, &z3.mul(&h, &k)) * c.eval(&h, &k);
            worst = worst.max((lhs - rhs).norm());
            assert_eq!(c.eval(&e, &g), Complex64::new(1.0, 0.0));
            assert_eq!(c.eval(&g, &e), Complex64::new(1.0, 0.0));
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
