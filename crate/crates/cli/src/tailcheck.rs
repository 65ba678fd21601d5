//! Monte-Carlo check of the concentration bound
//! `P[|X - E[X]| > eps * E[X]] <= exp(-eps^2 E[X] / 3)` for binomial and
//! hypergeometric distributions, valid for `0 < eps <= 3/2`.
//!
//! The deviation is read relatively (threshold `eps * E[X]`); under the
//! absolute reading the inequality is simply false, so that reading is
//! rejected at the interface.

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use serde::Serialize;

use crate::commands::{DistKind, TailcheckArgs, SCHEMA_VERSION};

type Sampler = Box<dyn FnMut(&mut ChaCha8Rng) -> f64>;

#[derive(Serialize)]
pub struct TailReport {
    pub schema_version: u32,
    pub dist: String,
    pub mean: f64,
    pub eps: f64,
    pub threshold: f64,
    pub samples: u64,
    pub tail_count: u64,
    pub estimate: f64,
    pub bound: f64,
    pub std_error: f64,
    pub violation: bool,
    pub seed: u64,
}

pub fn check(args: &TailcheckArgs) -> Result<TailReport> {
    if !(args.eps > 0.0 && args.eps <= 1.5) {
        bail!("eps must lie in (0, 3/2], got {}", args.eps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (label, mean, mut sample): (String, f64, Sampler) =
        match args.dist {
            DistKind::Binomial => {
                let p = args.p.context("binomial needs --p")?;
                if !(0.0..=1.0).contains(&p) {
                    bail!("p must lie in [0, 1], got {p}");
                }
                let dist = Binomial::new(args.n, p)?;
                (
                    format!("binomial(n={}, p={})", args.n, p),
                    args.n as f64 * p,
                    Box::new(move |rng| dist.sample(rng) as f64),
                )
            }
            DistKind::Hypergeometric => {
                let m = args.m.context("hypergeometric needs --m")?;
                let l = args.l.context("hypergeometric needs --l")?;
                if m > args.n || l > args.n {
                    bail!("need m <= n and l <= n");
                }
                let dist = Hypergeometric::new(args.n, m, l)?;
                (
                    format!("hypergeometric(n={}, m={m}, l={l})", args.n),
                    (m * l) as f64 / args.n as f64,
                    Box::new(move |rng| dist.sample(rng) as f64),
                )
            }
        };

    let threshold = args.eps * mean;
    let mut tail_count = 0u64;
    for _ in 0..args.samples {
        let x = sample(&mut rng);
        if (x - mean).abs() > threshold {
            tail_count += 1;
        }
    }
    let estimate = tail_count as f64 / args.samples as f64;
    let bound = (-args.eps * args.eps * mean / 3.0).exp();
    let std_error = (estimate * (1.0 - estimate) / args.samples as f64)
        .sqrt()
        .max(1.0 / args.samples as f64);
    let violation = estimate > bound + 5.0 * std_error;
    Ok(TailReport {
        schema_version: SCHEMA_VERSION,
        dist: label,
        mean,
        eps: args.eps,
        threshold,
        samples: args.samples,
        tail_count,
        estimate,
        bound,
        std_error,
        violation,
        seed: args.seed,
    })
}

pub fn run(args: TailcheckArgs) -> Result<u8> {
    let report = check(&args)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(if report.violation { 1 } else { 0 })
}
