use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::body::ConvexBody;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    /// Coordinate hit-and-run.
    Char,
    /// Hit-and-run along uniform directions.
    Har,
}

impl std::str::FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" => Ok(ChainKind::Char),
            "har" => Ok(ChainKind::Har),
            other => Err(Error::Parse(format!("unknown chain {other:?}"))),
        }
    }
}

/// Current point, step counter and the chain's own random stream.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub step: u64,
    /// Steps whose chord had zero length and left the point unchanged.
    pub degenerate_steps: u64,
    rng: ChaCha8Rng,
}

/// What a single step did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    /// Resampled coordinate, for coordinate steps.
    pub axis: Option<usize>,
    pub degenerate: bool,
}

impl ChainState {
    pub fn new(body: &ConvexBody, start: Vec<f64>, seed: u64) -> Result<Self> {
        if start.len() != body.dim() {
            return Err(Error::DimensionMismatch {
                left: body.dim(),
                right: start.len(),
            });
        }
        if !body.contains(&start) {
            return Err(Error::State("start point lies outside the body".into()));
        }
        Ok(ChainState {
            x: start,
            step: 0,
            degenerate_steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Starts at the body's stored interior point.
    pub fn at_interior(body: &ConvexBody, seed: u64) -> Result<Self> {
        Self::new(body, body.interior_point(), seed)
    }

    /// Separate stream for chain `index` under the same seed.
    pub fn stream(body: &ConvexBody, start: Vec<f64>, seed: u64, index: u64) -> Result<Self> {
        let mut s = Self::new(body, start, seed)?;
        s.rng.set_stream(index);
        Ok(s)
    }

    pub fn step(&mut self, body: &ConvexBody, kind: ChainKind) -> Result<StepInfo> {
        match kind {
            ChainKind::Char => char_step(self, body),
            ChainKind::Har => hit_and_run_step(self, body),
        }
    }
}

fn is_degenerate(l: f64, u: f64, body: &ConvexBody) -> bool {
    u - l <= 1e-15 * body.diameter()
}

/// Resamples one uniformly chosen coordinate uniformly on its chord.
pub fn char_step(state: &mut ChainState, body: &ConvexBody) -> Result<StepInfo> {
    let axis = state.rng.random_range(0..body.dim());
    let (l, u) = body.chord(&state.x, axis)?;
    state.step += 1;
    if is_degenerate(l, u, body) {
        state.degenerate_steps += 1;
        return Ok(StepInfo {
            axis: Some(axis),
            degenerate: true,
        });
    }
    state.x[axis] = l + (u - l) * state.rng.random::<f64>();
    debug_assert!(body.contains(&state.x));
    Ok(StepInfo {
        axis: Some(axis),
        degenerate: false,
    })
}

/// Unit vector with uniform direction (normalized Gaussian).
pub fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return d.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Moves to a uniform point on the chord through the current point along a
/// uniformly random direction.
pub fn hit_and_run_step(state: &mut ChainState, body: &ConvexBody) -> Result<StepInfo> {
    let d = random_direction(body.dim(), &mut state.rng);
    let (l, u) = body.chord_along(&state.x, &d)?;
    state.step += 1;
    if is_degenerate(l, u, body) {
        state.degenerate_steps += 1;
        return Ok(StepInfo {
            axis: None,
            degenerate: true,
        });
    }
    let t = l + (u - l) * state.rng.random::<f64>();
    let next: Vec<f64> = state.x.iter().zip(&d).map(|(x, v)| x + t * v).collect();
    // bisection and rounding can land a hair outside; stay put then
    if body.contains(&next) {
        state.x = next;
    } else {
        state.degenerate_steps += 1;
        return Ok(StepInfo {
            axis: None,
            degenerate: true,
        });
    }
    Ok(StepInfo {
        axis: None,
        degenerate: false,
    })
}
