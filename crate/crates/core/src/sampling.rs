//! Seeded uniform sampling of `(x, y)` in a box, with domain rejection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20240601;
/// Attempts allowed per requested sample before giving up.
pub const ATTEMPT_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            x: (-1.0, 1.0),
            y: (0.1, 2.0),
        }
    }
}

impl SampleBox {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("x", self.x), ("y", self.y)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Validation(format!(
                    "{name} box [{lo}, {hi}] is not a finite interval"
                )));
            }
        }
        Ok(())
    }
}

/// A drawn point the evaluator refused, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub attempt: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accepted<T> {
    /// Position among accepted samples.
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampled<T> {
    pub requested: usize,
    pub attempts: usize,
    pub accepted: Vec<Accepted<T>>,
    pub rejected: Vec<Rejection>,
}

impl<T> Sampled<T> {
    pub fn exhausted(&self) -> bool {
        self.accepted.len() < self.requested
    }
}

fn draw(rng: &mut ChaCha8Rng, n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect()
}

/// Draws points until `requested` are accepted or `ATTEMPT_FACTOR * requested`
/// attempts are used. Numerical failures (domain, singularity) reject the
/// point; any other error aborts.
pub fn sample<T>(
    n: usize,
    requested: usize,
    seed: u64,
    bounds: &SampleBox,
    mut eval: impl FnMut(&[f64], &[f64]) -> Result<T>,
) -> Result<Sampled<T>> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Sampled {
        requested,
        attempts: 0,
        accepted: Vec::with_capacity(requested),
        rejected: Vec::new(),
    };
    let max_attempts = requested.saturating_mul(ATTEMPT_FACTOR);
    while out.accepted.len() < requested && out.attempts < max_attempts {
        let x = draw(&mut rng, n, bounds.x);
        let y = draw(&mut rng, n, bounds.y);
        let attempt = out.attempts;
        out.attempts += 1;
        match eval(&x, &y) {
            Ok(value) => out.accepted.push(Accepted {
                index: out.accepted.len(),
                x,
                y,
                value,
            }),
            Err(e) if e.is_numerical() => out.rejected.push(Rejection {
                attempt,
                x,
                y,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
