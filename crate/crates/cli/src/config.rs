//! Experiment configuration: a JSON file, overridden field by field by flags,
//! then validated into an [`Experiment`] before anything is computed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use ncheat::{Cocycle, FourierElement, Group, GroupElement, GroupSpec, Length, LengthSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::catalog::{Op, SeedUse};
use crate::output::sha256_hex;

pub const DEFAULT_OUT: &str = "ncheat-out";

/// A group given as shorthand (`free:2`) or as a spec object.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupArg(pub GroupSpec);

impl FromStr for GroupArg {
    type Err = ncheat::Error;
    fn from_str(s: &str) -> ncheat::Result<Self> {
        s.parse().map(GroupArg)
    }
}

impl Serialize for GroupArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            v => serde_json::from_value(v).map(GroupArg).map_err(serde::de::Error::custom),
        }
    }
}

/// A length given as shorthand (`power:2.5`) or as a spec object.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthArg(pub LengthSpec);

impl FromStr for LengthArg {
    type Err = ncheat::Error;
    fn from_str(s: &str) -> ncheat::Result<Self> {
        s.parse().map(LengthArg)
    }
}

impl Serialize for LengthArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LengthArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        LengthSpec::from_json(&Value::deserialize(d)?).map(LengthArg).map_err(serde::de::Error::custom)
    }
}

/// `--theta` text (parsed once the rank is known) or a cocycle object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CocycleArg {
    Theta(String),
    Spec(Cocycle),
}

/// Initial data: a path on the command line, a path or inline array in a
/// config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Arg {
    Path(PathBuf),
    Inline(Vec<Value>),
}

impl FromStr for X0Arg {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(X0Arg::Path(s.into()))
    }
}

/// Operation parameters. Which ones apply is listed per operation in the
/// catalog; the rest are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Radius of the sample ball
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball: Option<usize>,
    /// Truncation radius
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Largest radius or level
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmax: Option<usize>,
    /// Radius of the tail data
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_radius: Option<usize>,
    /// Time
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    /// Comma-separated step sizes
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hs: Option<Vec<f64>>,
    /// Eigenvalue tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Bisection width for the Poincare exponent
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_tol: Option<f64>,
    /// Second length for dominance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_length: Option<LengthArg>,
    /// Dominance slope to check
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Dominance intercept to check
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Coefficient file of the initial data
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<X0Arg>,
    /// Random initial data on this ball
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_ball: Option<usize>,
    /// Finite set for content
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Content restarts
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Content truncation padding
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
    /// Work budget
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work: Option<usize>,
    /// Content ascent steps
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ascent: Option<usize>,
    /// Kappa samples
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Kappa exponent
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Power-iteration tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_tol: Option<f64>,
    /// Power-iteration cap
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Params {
    #[cfg(test)]
    pub fn field_names() -> Vec<&'static str> {
        vec![
            "ball", "radius", "rmax", "tail_radius", "t", "t_grid", "hs", "tol", "s_tol", "other_length", "a", "b",
            "x0", "random_ball", "set", "restarts", "pad", "work", "max_ascent", "samples", "exponent", "power_tol",
            "max_iters",
        ]
    }

    fn overlay(&mut self, o: &Params) {
        overlay!(
            self, o, ball, radius, rmax, tail_radius, t, t_grid, hs, tol, s_tol, other_length, a, b, x0, random_ball,
            set, restarts, pad, work, max_ascent, samples, exponent, power_tol, max_iters
        );
    }

    fn present(&self) -> Vec<String> {
        match serde_json::to_value(self).expect("params serialize") {
            Value::Object(m) => m.keys().cloned().collect(),
            _ => unreachable!(),
        }
    }
}

/// The whole configuration of one run, as read from `--config` and flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

/// Flags shared by every experiment subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct RunArgs {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Group, e.g. free:2, z:1, zn:2, freeprod:2,3, heisenberg
    #[arg(long)]
    pub group: Option<GroupArg>,
    /// Twist matrix on Z^n, e.g. "0,pi/3"
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Length, e.g. word, l1, l2sq, block, log, power:2.5, bounded
    #[arg(long)]
    pub length: Option<LengthArg>,
    /// Seed for every random choice
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cap on worker threads
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub params: Params,
}

impl RunArgs {
    /// Output directory known before the config is parsed.
    pub fn fallback_out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| DEFAULT_OUT.into())
    }
}

/// Reads the config file (if any) and applies flag overrides. `op` is the
/// subcommand, or `None` for `run`/`validate`, which take it from the file.
pub fn merge(op: Option<Op>, args: &RunArgs) -> Result<(Op, ExperimentConfig)> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let mut cfg = serde_json::from_str::<ExperimentConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            // input paths in a config file are relative to the file
            let base = path.parent().unwrap_or(Path::new(""));
            if let Some(X0Arg::Path(p)) = &mut cfg.params.x0 {
                *p = base.join(&*p);
            }
            if let Some(rest) = cfg.params.set.as_deref().and_then(|s| s.strip_prefix("file:")) {
                cfg.params.set = Some(format!("file:{}", base.join(rest).display()));
            }
            cfg
        }
        None => ExperimentConfig::default(),
    };
    let op = match (op, cfg.operation.as_deref()) {
        (Some(op), None) => op,
        (Some(op), Some(name)) if name == op.name() => op,
        (Some(op), Some(name)) => bail!("config is for operation '{name}' but the subcommand is '{}'", op.name()),
        (None, Some(name)) => Op::from_name(name).ok_or_else(|| anyhow!("unknown operation '{name}' in config"))?,
        (None, None) => bail!("config has no operation; name one or use its subcommand"),
    };
    cfg.operation = Some(op.name().to_string());
    if args.group.is_some() {
        cfg.group = args.group.clone();
    }
    if let Some(t) = &args.theta {
        cfg.cocycle = Some(CocycleArg::Theta(t.clone()));
    }
    if args.length.is_some() {
        cfg.length = args.length.clone();
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.params.overlay(&args.params);
    Ok((op, cfg))
}

/// A validated run: every spec is built and every input read.
pub struct Experiment {
    pub op: Op,
    pub config: ExperimentConfig,
    pub spec: GroupSpec,
    pub group: Arc<Group>,
    pub cocycle: Arc<Cocycle>,
    pub length: Option<Length>,
    pub seed: Option<u64>,
    pub x0: Option<FourierElement>,
    pub set: Option<Vec<GroupElement>>,
    /// sha256 of input files by path.
    pub inputs: BTreeMap<String, String>,
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        bail!("{name} must be finite and >= 0, got {t}");
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("{name} must be finite and > 0, got {v}");
    }
    Ok(())
}

fn read_json(path: &Path, inputs: &mut BTreeMap<String, String>) -> Result<Value> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    inputs.insert(path.display().to_string(), sha256_hex(&bytes));
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn parse_set(text: &str, group: &Arc<Group>, spec: &GroupSpec, inputs: &mut BTreeMap<String, String>) -> Result<Vec<GroupElement>> {
    let bad = || anyhow!("cannot parse set '{text}'; expected generators, ball:R, sphere:R, interval:a:b or file:PATH");
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    let radius = || rest.trim().parse::<usize>().map_err(|_| bad());
    Ok(match head.trim() {
        "generators" if rest.is_empty() => group.generators().to_vec(),
        "ball" => crate::cache::ball(spec, group, radius()?)?.elements().to_vec(),
        "sphere" => {
            let r = radius()?;
            crate::cache::ball(spec, group, r)?.sphere(r).to_vec()
        }
        "interval" => {
            if *spec != (GroupSpec::FreeAbelian { rank: 1 }) {
                bail!("interval sets need the group z:1");
            }
            let (a, b) = rest.split_once(':').ok_or_else(bad)?;
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                bail!("empty interval {a}..{b}");
            }
            (a..=b).map(|m| GroupElement::abelian(&[m])).collect()
        }
        "file" => {
            let v = read_json(Path::new(rest), inputs)?;
            let arr = v.as_array().ok_or_else(|| anyhow!("set file must hold an array of normal forms"))?;
            arr.iter().map(|nf| group.element_from_json(nf).map_err(Into::into)).collect::<Result<_>>()?
        }
        _ => return Err(bad()),
    })
}

impl Experiment {
    pub fn validate(op: Op, config: ExperimentConfig) -> Result<Experiment> {
        let spec_of = op.spec();
        let p = &config.params;
        let allowed: Vec<&str> = spec_of.params.iter().map(|s| s.name).collect();
        for name in p.present() {
            if !allowed.contains(&name.as_str()) {
                bail!("parameter '{name}' does not apply to {}; it takes {}", op.name(), allowed.join(", "));
            }
        }
        for s in spec_of.params.iter().filter(|s| s.required) {
            if !p.present().iter().any(|n| n == s.name) {
                bail!("{} needs parameter '{}' ({})", op.name(), s.name, s.help);
            }
        }

        let spec = config.group.clone().ok_or_else(|| anyhow!("{} needs a group", op.name()))?.0;
        let group = Arc::new(spec.build()?);

        let cocycle = match &config.cocycle {
            None => Cocycle::Trivial,
            Some(_) if !spec_of.cocycle => bail!("{} does not take a cocycle", op.name()),
            Some(CocycleArg::Spec(c)) => c.clone(),
            Some(CocycleArg::Theta(text)) => match spec {
                GroupSpec::FreeAbelian { rank } => Cocycle::parse_theta(text, rank)?,
                _ => bail!("--theta needs a free abelian group, not {}", group.name()),
            },
        };
        let cocycle = Arc::new(cocycle.validate(&group)?);

        let length = match (&config.length, spec_of.length) {
            (Some(l), true) => Some(Length::new(l.0.clone(), &group)?),
            (None, true) => bail!("{} needs a length", op.name()),
            (Some(_), false) => bail!("{} does not take a length", op.name()),
            (None, false) => None,
        };
        if let Some(o) = &p.other_length {
            Length::new(o.0.clone(), &group)?;
        }
        if p.a.is_some() != p.b.is_some() {
            bail!("dominance check needs both a and b");
        }

        let mut inputs = BTreeMap::new();
        let x0 = match (&p.x0, p.random_ball) {
            (Some(_), Some(_)) => bail!("give either x0 or random_ball, not both"),
            (Some(X0Arg::Path(path)), None) => {
                let v = read_json(path, &mut inputs)?;
                Some(FourierElement::from_json(group.clone(), cocycle.clone(), &v)?)
            }
            (Some(X0Arg::Inline(terms)), None) => {
                Some(FourierElement::from_json(group.clone(), cocycle.clone(), &Value::Array(terms.clone()))?)
            }
            (None, Some(_)) => None,
            (None, None) if spec_of.x0 => bail!("{} needs initial data: x0 or random_ball", op.name()),
            (None, None) => None,
        };

        let needs_seed = match spec_of.seed {
            SeedUse::Always => true,
            SeedUse::RandomData => p.random_ball.is_some(),
            SeedUse::Never => false,
        };
        if needs_seed && config.seed.is_none() {
            bail!("{} is stochastic here and needs a seed", op.name());
        }
        if spec_of.seed == SeedUse::Never && config.seed.is_some() {
            bail!("{} is deterministic and takes no seed", op.name());
        }

        if let Some(t) = p.t {
            check_time("t", t)?;
        }
        if let Some(ts) = &p.t_grid {
            if ts.is_empty() {
                bail!("t_grid is empty");
            }
            ts.iter().try_for_each(|t| check_time("t_grid entry", *t))?;
        }
        if op == Op::HeatEvolve && p.t.is_some() == p.t_grid.is_some() {
            bail!("heat-evolve needs exactly one of t and t_grid");
        }
        if op == Op::HeatResidual {
            let t = p.t.unwrap_or(1.0);
            for h in p.hs.iter().flatten() {
                if !(*h > 0.0 && *h < t) {
                    bail!("step sizes must lie in (0, t) = (0, {t}), got {h}");
                }
            }
        }
        for (name, v) in [("tol", p.tol), ("s_tol", p.s_tol), ("power_tol", p.power_tol)] {
            if let Some(v) = v {
                check_positive(name, v)?;
            }
        }
        if let Some(e) = p.exponent {
            check_time("exponent", e)?;
        }
        for (name, v) in [("restarts", p.restarts), ("samples", p.samples), ("max_ascent", p.max_ascent), ("max_iters", p.max_iters), ("work", p.work)] {
            if v == Some(0) {
                bail!("{name} must be at least 1");
            }
        }
        if op == Op::SphereBound && !matches!(spec, GroupSpec::Free { .. }) {
            bail!("sphere-bound needs a free group");
        }

        let set = match &p.set {
            Some(text) => {
                let e = parse_set(text, &group, &spec, &mut inputs)?;
                if e.is_empty() {
                    bail!("the set is empty");
                }
                Some(e)
            }
            None => None,
        };

        Ok(Experiment { op, seed: config.seed, config, spec, group, cocycle, length, x0, set, inputs })
    }
}
