//! The fixed set of experiments and their parameter schemas.

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    CheckNd,
    Schoenberg,
    Poincare,
    Dominance,
    Norm,
    Tail,
    HeatEvolve,
    HeatResidual,
    Content,
    Kappa,
    Hgrowth,
    SphereBound,
}

/// Whether an operation needs a seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedUse {
    Always,
    /// Only with `random_ball` initial data; for `heat-evolve` the seed also
    /// switches on the sphere-norm table.
    RandomData,
    Never,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub ty: &'static str,
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub struct OpSpec {
    pub summary: &'static str,
    pub length: bool,
    pub cocycle: bool,
    /// Takes initial data from `x0` or `random_ball`.
    pub x0: bool,
    pub seed: SeedUse,
    pub params: Vec<ParamSpec>,
    pub outputs: &'static [&'static str],
}

const fn p(name: &'static str, ty: &'static str, default: Option<&'static str>, help: &'static str) -> ParamSpec {
    ParamSpec { name, ty, required: false, default, help }
}

const fn req(name: &'static str, ty: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { name, ty, required: true, default: None, help }
}

const X0: ParamSpec = p("x0", "path | array", None, "coefficient file: JSON array of {normal_form, re, im}");
const RANDOM_BALL: ParamSpec = p("random_ball", "usize", None, "random unit data on this ball instead of x0 (needs seed)");
const WORK: ParamSpec = p("work", "usize", Some("50000"), "cap on |B_n| * |supp| for each sphere-norm estimate");
const POWER_TOL: ParamSpec = p("power_tol", "f64", Some("1e-10"), "relative Rayleigh-quotient change treated as converged");
const MAX_ITERS: ParamSpec = p("max_iters", "usize", Some("10000"), "power iterations per radius");
const RESTARTS: ParamSpec = p("restarts", "usize", Some("16"), "random restarts of the content ascent");
const PAD: ParamSpec = p("pad", "usize", Some("8"), "truncation radius is max |g| + pad");
const CONTENT_WORK: ParamSpec = p("work", "usize", Some("400000"), "cap on |B_R| * |E|");
const MAX_ASCENT: ParamSpec = p("max_ascent", "usize", Some("1000"), "ascent steps per restart");

impl Op {
    pub const ALL: [Op; 12] = [
        Op::CheckNd,
        Op::Schoenberg,
        Op::Poincare,
        Op::Dominance,
        Op::Norm,
        Op::Tail,
        Op::HeatEvolve,
        Op::HeatResidual,
        Op::Content,
        Op::Kappa,
        Op::Hgrowth,
        Op::SphereBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::CheckNd => "check-nd",
            Op::Schoenberg => "schoenberg",
            Op::Poincare => "poincare",
            Op::Dominance => "dominance",
            Op::Norm => "norm",
            Op::Tail => "tail",
            Op::HeatEvolve => "heat-evolve",
            Op::HeatResidual => "heat-residual",
            Op::Content => "content",
            Op::Kappa => "kappa",
            Op::Hgrowth => "hgrowth",
            Op::SphereBound => "sphere-bound",
        }
    }

    pub fn from_name(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.name() == s)
    }

    pub fn spec(self) -> OpSpec {
        match self {
            Op::CheckNd => OpSpec {
                summary: "Gram test of negative definiteness of a length on a ball",
                length: true,
                cocycle: false,
                x0: false,
                seed: SeedUse::Never,
                params: vec![
                    p("ball", "usize", Some("2"), "sample is the word ball of this radius"),
                    p("tol", "f64", Some("1e-9"), "pass iff lambda_max <= tol"),
                ],
                outputs: &["check_nd.json"],
            },
            Op::Schoenberg => OpSpec {
                summary: "positive definiteness of exp(-t d) on a ball",
                length: true,
                cocycle: false,
                x0: false,
                seed: SeedUse::Never,
                params: vec![
                    p("ball", "usize", Some("2"), "sample is the word ball of this radius"),
                    p("t_grid", "[f64]", Some("0.1,1,10"), "values of t"),
                    p("tol", "f64", Some("1e-9"), "pass iff lambda_min >= -tol"),
                ],
                outputs: &["schoenberg.json"],
            },
            Op::Poincare => OpSpec {
                summary: "bracket for the critical exponent of sum exp(-s d(g)), and the l2 threshold",
                length: true,
                cocycle: false,
                x0: false,
                seed: SeedUse::Never,
                params: vec![
                    req("rmax", "usize", "largest word radius summed"),
                    p("s_tol", "f64", Some("1e-3"), "bisection width"),
                ],
                outputs: &["poincare.json"],
            },
            Op::Dominance => OpSpec {
                summary: "fit or check c <= a c' + b for two lengths on a ball",
                length: true,
                cocycle: false,
                x0: false,
                seed: SeedUse::Never,
                params: vec![
                    req("other_length", "length", "the dominating length c'"),
                    p("ball", "usize", Some("6"), "radius of the test ball"),
                    p("a", "f64", None, "check this slope instead of fitting (needs b)"),
                    p("b", "f64", None, "check this intercept instead of fitting (needs a)"),
                ],
                outputs: &["dominance.json"],
            },
            Op::Norm => OpSpec {
                summary: "truncated operator norm lower bound nu_R with l1 upper bound",
                length: false,
                cocycle: true,
                x0: true,
                seed: SeedUse::Always,
                params: vec![X0, RANDOM_BALL, req("radius", "usize", "truncation radius R"), POWER_TOL, MAX_ITERS],
                outputs: &["norm.json"],
            },
            Op::Tail => OpSpec {
                summary: "l2 threshold next to sphere-tail summability flags of the heat semigroup",
                length: true,
                cocycle: true,
                x0: false,
                seed: SeedUse::Always,
                params: vec![
                    req("rmax", "usize", "radius for the Poincare estimate"),
                    p("tail_radius", "usize", Some("8"), "radius of the indicator data"),
                    req("t_grid", "[f64]", "values of t"),
                    WORK,
                ],
                outputs: &["tail.json"],
            },
            Op::HeatEvolve => OpSpec {
                summary: "heat semigroup applied to initial data, with per-sphere norms when seeded",
                length: true,
                cocycle: true,
                x0: true,
                seed: SeedUse::RandomData,
                params: vec![
                    X0,
                    RANDOM_BALL,
                    p("t", "f64", None, "a single time (or use t_grid)"),
                    p("t_grid", "[f64]", None, "several times"),
                    WORK,
                ],
                outputs: &["heat_evolve.json", "heat_evolve.csv"],
            },
            Op::HeatResidual => OpSpec {
                summary: "central-difference residual of the heat equation and its convergence ratios",
                length: true,
                cocycle: true,
                x0: true,
                seed: SeedUse::RandomData,
                params: vec![
                    X0,
                    RANDOM_BALL,
                    p("t", "f64", Some("1"), "time at which the residual is taken"),
                    p("hs", "[f64]", Some("0.01,0.005,0.0025"), "step sizes, each in (0, t)"),
                ],
                outputs: &["heat_residual.json", "heat_residual.csv"],
            },
            Op::Content => OpSpec {
                summary: "lower bound for the Haagerup content of a finite set",
                length: false,
                cocycle: true,
                x0: false,
                seed: SeedUse::Always,
                params: vec![
                    req("set", "string", "generators | ball:R | sphere:R | interval:a:b | file:PATH"),
                    RESTARTS,
                    PAD,
                    p("radius", "usize", None, "fixed truncation radius"),
                    CONTENT_WORK,
                    MAX_ASCENT,
                ],
                outputs: &["content.json"],
            },
            Op::Kappa => OpSpec {
                summary: "largest observed ||x|| / ||x kappa||_2 for kappa = (1 + length)^exponent",
                length: true,
                cocycle: true,
                x0: false,
                seed: SeedUse::Always,
                params: vec![
                    req("exponent", "f64", "power of 1 + length"),
                    p("samples", "usize", Some("1000"), "number of random x"),
                    p("radius", "usize", Some("6"), "samples live in this ball"),
                    p("work", "usize", Some("20000"), "cap on |B_n| * |supp x|"),
                ],
                outputs: &["kappa.json"],
            },
            Op::Hgrowth => OpSpec {
                summary: "content of sublevel sets {d <= r} with polynomial and exponential fits",
                length: true,
                cocycle: true,
                x0: false,
                seed: SeedUse::Always,
                params: vec![req("rmax", "usize", "largest level r"), RESTARTS, PAD, CONTENT_WORK, MAX_ASCENT],
                outputs: &["hgrowth.json", "hgrowth.csv"],
            },
            Op::SphereBound => OpSpec {
                summary: "per-sphere multiplier bound (r+1) e^{-tr} ||x chi_S_r||_2 on a free group",
                length: false,
                cocycle: false,
                x0: true,
                seed: SeedUse::Always,
                params: vec![
                    X0,
                    p("random_ball", "usize", None, "random data, unit on every sphere of this ball"),
                    req("t", "f64", "time"),
                    req("rmax", "usize", "largest sphere checked"),
                    WORK,
                ],
                outputs: &["sphere_bound.json"],
            },
        }
    }
}

/// The catalog printed by `ncheat list`.
pub fn listing() -> Value {
    let experiments: Vec<Value> = Op::ALL
        .iter()
        .map(|op| {
            let s = op.spec();
            json!({
                "name": op.name(),
                "summary": s.summary,
                "group": "required",
                "length": if s.length { "required" } else { "not used" },
                "cocycle": if s.cocycle { "optional" } else { "not used" },
                "seed": s.seed,
                "params": s.params,
                "outputs": s.outputs,
            })
        })
        .collect();
    json!({ "schema_version": SCHEMA_VERSION, "experiments": experiments })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for op in Op::ALL {
            assert_eq!(Op::from_name(op.name()), Some(op));
        }
        assert_eq!(Op::from_name("list"), None);
    }

    #[test]
    fn params_are_known_config_fields() {
        let known = crate::config::Params::field_names();
        for op in Op::ALL {
            for p in &op.spec().params {
                assert!(known.contains(&p.name), "{} lists unknown parameter {}", op.name(), p.name);
            }
        }
    }
}
