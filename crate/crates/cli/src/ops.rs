//! One function per experiment. Each returns its files in memory plus any
//! flags raised by the estimates (which turn a run into exit status 3).

use anyhow::Result;
use ncheat::fourier::{norm_estimate_on, PowerOptions};
use ncheat::growth::{h_growth_profile, haagerup_content_estimate, kappa_decay_ratio, sphere_multiplier_bound_check, ContentOptions, GrowthLabel, KappaOptions, KappaSpec};
use ncheat::heat::{epsilon_diagnostics, heat_evolve, heat_residual_check, tail_profile, TailOptions};
use ncheat::lengths::{dominance_check, dominance_fit, gram_nd_check, l2_threshold, schoenberg_psd_check};
use ncheat::sample::{random_sphere_unit, random_unit};
use ncheat::{FourierElement, Length};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cache;
use crate::catalog::Op;
use crate::config::Experiment;
use crate::output::{json_bytes, num, Table};

#[derive(Default)]
pub struct Produced {
    pub files: Vec<(String, Vec<u8>)>,
    pub flags: Vec<String>,
}

impl Produced {
    fn json<T: serde::Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        self.files.push((name.to_string(), json_bytes(v)?));
        Ok(())
    }

    fn flag(&mut self, cond: bool, msg: impl Into<String>) {
        if cond {
            self.flags.push(msg.into());
        }
    }
}

fn length(e: &Experiment) -> &Length {
    e.length.as_ref().expect("validated")
}

fn seed(e: &Experiment) -> u64 {
    e.seed.expect("validated")
}

fn power(e: &Experiment) -> PowerOptions {
    let p = &e.config.params;
    let d = PowerOptions::default();
    PowerOptions { tol: p.power_tol.unwrap_or(d.tol), max_iters: p.max_iters.unwrap_or(d.max_iters), seed: e.seed.unwrap_or(0) }
}

fn tail_options(e: &Experiment) -> TailOptions {
    let d = TailOptions::default();
    TailOptions { power: power(e), work: e.config.params.work.unwrap_or(d.work), ..d }
}

fn content_options(e: &Experiment) -> ContentOptions {
    let p = &e.config.params;
    let d = ContentOptions::default();
    ContentOptions {
        restarts: p.restarts.unwrap_or(d.restarts),
        seed: seed(e),
        pad: p.pad.unwrap_or(d.pad),
        radius: p.radius,
        work: p.work.unwrap_or(d.work),
        max_ascent: p.max_ascent.unwrap_or(d.max_ascent),
        power: PowerOptions { seed: seed(e), ..d.power },
    }
}

/// Initial data from the file, or random data drawn from the seed.
fn initial(e: &Experiment, sphere_normalized: bool) -> Result<FourierElement> {
    if let Some(x) = &e.x0 {
        return Ok(x.clone());
    }
    let r = e.config.params.random_ball.expect("validated");
    let ball = cache::ball(&e.spec, &e.group, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed(e));
    Ok(if sphere_normalized {
        random_sphere_unit(&e.cocycle, &ball, &mut rng)?
    } else {
        random_unit(&e.group, &e.cocycle, ball.elements(), &mut rng)?
    })
}

pub fn execute(e: &Experiment) -> Result<Produced> {
    let p = &e.config.params;
    let mut out = Produced::default();
    match e.op {
        Op::CheckNd => {
            let ball = cache::ball(&e.spec, &e.group, p.ball.unwrap_or(2))?;
            let rep = gram_nd_check(length(e), ball.elements(), p.tol.unwrap_or(1e-9))?;
            out.json("check_nd.json", &rep)?;
        }
        Op::Schoenberg => {
            let ball = cache::ball(&e.spec, &e.group, p.ball.unwrap_or(2))?;
            let grid = p.t_grid.clone().unwrap_or_else(|| vec![0.1, 1.0, 10.0]);
            let rep = schoenberg_psd_check(length(e), ball.elements(), &grid, p.tol.unwrap_or(1e-9))?;
            out.json("schoenberg.json", &json!({ "pass": rep.pass(), "report": rep }))?;
        }
        Op::Poincare => {
            let rep = l2_threshold(length(e), &e.group, p.rmax.expect("validated"))?;
            let poincare = &rep.poincare;
            if let Some(f) = poincare.flag {
                out.flags.push(format!("poincare estimate flagged {f:?}: {}", poincare.explanation));
            }
            out.json("poincare.json", &rep)?;
        }
        Op::Dominance => {
            let ball = cache::ball(&e.spec, &e.group, p.ball.unwrap_or(6))?;
            let other = Length::new(p.other_length.clone().expect("validated").0, &e.group)?;
            let rep = match (p.a, p.b) {
                (Some(a), Some(b)) => dominance_check(length(e), &other, &ball, a, b)?,
                _ => dominance_fit(length(e), &other, &ball)?,
            };
            out.json("dominance.json", &rep)?;
        }
        Op::Norm => {
            let x = initial(e, false)?;
            let ball = cache::ball(&e.spec, &e.group, p.radius.expect("validated"))?;
            let rep = norm_estimate_on(&x, &ball, power(e))?;
            out.flag(!rep.converged, format!("power iteration did not converge at R = {}", rep.radius));
            out.json("norm.json", &rep)?;
        }
        Op::Tail => {
            let grid = p.t_grid.clone().expect("validated");
            let rep = epsilon_diagnostics(length(e), &e.cocycle, p.rmax.expect("validated"), p.tail_radius.unwrap_or(8), &grid, &tail_options(e))?;
            if let Some(f) = rep.threshold.poincare.flag {
                out.flags.push(format!("poincare estimate flagged {f:?}"));
            }
            for row in &rep.rows {
                out.flag(!row.bounds_pass, format!("sphere bound violated at t = {}", row.t));
            }
            out.json("tail.json", &rep)?;
        }
        Op::HeatEvolve => {
            let x0 = initial(e, false)?;
            let grid = p.t_grid.clone().unwrap_or_else(|| vec![p.t.expect("validated")]);
            let mut evolved = Vec::with_capacity(grid.len());
            for &t in &grid {
                evolved.push(json!({ "t": t, "coefficients": heat_evolve(&x0, length(e), t)?.to_json() }));
            }
            out.json("heat_evolve.json", &json!({ "length": length(e).spec(), "x0": x0.to_json(), "evolved": evolved }))?;
            if let Some(s) = e.seed {
                let mut table = Table::new(&["r", "sphere_norm", "hgrowth_bound", "t", "seed"])?;
                for &t in &grid {
                    let prof = tail_profile(&x0, length(e), t, &tail_options(e))?;
                    for sp in &prof.spheres {
                        out.flag(!sp.pass, format!("sphere {} exceeds its bound at t = {t}", sp.r));
                        table.row(&[sp.r.to_string(), num(sp.sphere_norm), num(sp.bound), num(t), s.to_string()])?;
                    }
                }
                out.files.push(("heat_evolve.csv".into(), table.finish()?));
            }
        }
        Op::HeatResidual => {
            let x0 = initial(e, false)?;
            let t = p.t.unwrap_or(1.0);
            let hs = p.hs.clone().unwrap_or_else(|| vec![1e-2, 5e-3, 2.5e-3]);
            let rows = heat_residual_check(&x0, length(e), t, &hs)?;
            let mut table = Table::new(&["h", "residual", "ratio"])?;
            for r in &rows {
                table.row(&[num(r.h), num(r.residual), r.ratio.map(num).unwrap_or_default()])?;
            }
            out.json("heat_residual.json", &json!({ "t": t, "rows": rows }))?;
            out.files.push(("heat_residual.csv".into(), table.finish()?));
        }
        Op::Content => {
            let set = e.set.as_ref().expect("validated");
            let est = haagerup_content_estimate(&e.group, &e.cocycle, set, &content_options(e))?;
            out.flag(!est.converged, "content ascent hit its step cap");
            out.json("content.json", &json!({ "estimate": est, "witness": est.witness.to_json() }))?;
        }
        Op::Kappa => {
            let spec = KappaSpec { length: length(e).spec().clone(), exponent: p.exponent.expect("validated") };
            let d = KappaOptions::default();
            let opts = KappaOptions {
                samples: p.samples.unwrap_or(d.samples),
                radius: p.radius.unwrap_or(d.radius),
                seed: seed(e),
                work: p.work.unwrap_or(d.work),
                power: PowerOptions { seed: seed(e), ..d.power },
                ..d
            };
            out.json("kappa.json", &kappa_decay_ratio(&e.group, &e.cocycle, &spec, &opts)?)?;
        }
        Op::Hgrowth => {
            let prof = h_growth_profile(length(e), &e.cocycle, p.rmax.expect("validated"), &content_options(e))?;
            out.flag(prof.label == GrowthLabel::Inconclusive, "neither growth fit is consistent");
            let mut table = Table::new(&["r", "ball_size", "c_lower", "c_upper", "poly_fit_exponent", "exp_fit_rate"])?;
            for row in &prof.rows {
                table.row(&[
                    row.r.to_string(),
                    row.ball_size.to_string(),
                    num(row.c_lower),
                    num(row.c_upper),
                    num(prof.polynomial.slope),
                    num(prof.exponential.slope),
                ])?;
            }
            out.json("hgrowth.json", &prof)?;
            out.files.push(("hgrowth.csv".into(), table.finish()?));
        }
        Op::SphereBound => {
            let x0 = initial(e, true)?;
            let rep = sphere_multiplier_bound_check(&x0, p.t.expect("validated"), p.rmax.expect("validated"), &tail_options(e))?;
            out.flag(!rep.all_pass(), "a sphere exceeds its multiplier bound");
            out.json("sphere_bound.json", &json!({ "all_pass": rep.all_pass(), "report": rep }))?;
        }
    }
    Ok(out)
}
