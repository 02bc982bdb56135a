use serde::Serialize;

use super::body::ConvexBody;
use super::chain::{ChainKind, ChainState};
use crate::error::{Error, Result};

/// Stationarity is accepted when every coordinate's KS p-value exceeds this.
pub const P_VALUE_THRESHOLD: f64 = 0.01;
/// Sokal window constant: the window `M` is the first with `M ≥ c·τ(M)`.
pub const SOKAL_C: f64 = 5.0;
/// Length multiplier of the reference chain used for non-box bodies.
pub const REFERENCE_FACTOR: u64 = 4;

/// Post-burn-in samples of one chain.
#[derive(Clone, Debug)]
pub struct ChainRun {
    pub kind: ChainKind,
    pub burn_in: u64,
    pub samples: Vec<Vec<f64>>,
    pub degenerate_steps: u64,
}

/// Runs `steps` steps from the body's interior point and keeps the states
/// after the first `burn_in` steps.
pub fn run_chain(body: &ConvexBody, kind: ChainKind, steps: u64, burn_in: u64, seed: u64) -> Result<ChainRun> {
    run_stream(body, kind, steps, burn_in, seed, 0)
}

fn run_stream(body: &ConvexBody, kind: ChainKind, steps: u64, burn_in: u64, seed: u64, stream: u64) -> Result<ChainRun> {
    if steps <= burn_in {
        return Err(Error::Parameter(format!(
            "steps ({steps}) must exceed burn-in ({burn_in})"
        )));
    }
    let mut st = ChainState::stream(body, body.interior_point(), seed, stream)?;
    let mut samples = Vec::with_capacity((steps - burn_in) as usize);
    for i in 1..=steps {
        st.step(body, kind)?;
        if i > burn_in {
            samples.push(st.x.clone());
        }
    }
    Ok(ChainRun {
        kind,
        burn_in,
        samples,
        degenerate_steps: st.degenerate_steps,
    })
}

/// Integrated autocorrelation time with Sokal's adaptive window.
pub fn integrated_autocorr_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for m in 1..n / 2 {
        let ck = centered[..n - m]
            .iter()
            .zip(&centered[m..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * ck / c0;
        if m as f64 >= SOKAL_C * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// One-sample KS statistic against the uniform law on `[lo, hi]`.
pub fn ks_uniform(sample: &[f64], lo: f64, hi: f64) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value `P[D > d]` for sample size `n`, with
/// Stephens' small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsReference {
    UniformMarginal,
    ReferenceChain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoordinateDiagnostics {
    pub axis: usize,
    pub mean: f64,
    pub tau: f64,
    pub n_eff: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub chain: ChainKind,
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub samples: usize,
    pub degenerate_steps: u64,
    pub reference: KsReference,
    pub coordinates: Vec<CoordinateDiagnostics>,
    pub min_p_value: f64,
    pub stationary: bool,
}

/// KS and autocorrelation diagnostics of a finished run. Boxes are tested
/// against their exact uniform marginals; other bodies against a longer
/// independent chain of the same kind. Sample sizes are deflated by the
/// integrated autocorrelation time.
pub fn diagnose(body: &ConvexBody, run: &ChainRun, seed: u64) -> Result<DiagnosticsReport> {
    let n = body.dim();
    let len = run.samples.len();
    if len == 0 {
        return Err(Error::Parameter("no post-burn-in samples".into()));
    }
    let reference = match body {
        ConvexBody::Box { .. } => None,
        _ => {
            let ref_steps = run.burn_in + REFERENCE_FACTOR * len as u64;
            Some(run_stream(body, run.kind, ref_steps, run.burn_in, seed, 1)?)
        }
    };
    let mut coords = Vec::with_capacity(n);
    for axis in 0..n {
        let series: Vec<f64> = run.samples.iter().map(|x| x[axis]).collect();
        let tau = integrated_autocorr_time(&series);
        let n_eff = len as f64 / tau;
        let (d, n_test) = match &reference {
            None => (ks_uniform(&series, body.lo()[axis], body.hi()[axis]), n_eff),
            Some(r) => {
                let other: Vec<f64> = r.samples.iter().map(|x| x[axis]).collect();
                let m_eff = other.len() as f64 / integrated_autocorr_time(&other);
                (ks_two_sample(&series, &other), n_eff * m_eff / (n_eff + m_eff))
            }
        };
        coords.push(CoordinateDiagnostics {
            axis: axis + 1,
            mean: series.iter().sum::<f64>() / len as f64,
            tau,
            n_eff,
            ks_statistic: d,
            p_value: kolmogorov_p_value(d, n_test),
        });
    }
    let min_p = coords.iter().map(|c| c.p_value).fold(1.0, f64::min);
    Ok(DiagnosticsReport {
        chain: run.kind,
        steps: run.burn_in + len as u64,
        burn_in: run.burn_in,
        seed,
        samples: len,
        degenerate_steps: run.degenerate_steps,
        reference: if reference.is_some() {
            KsReference::ReferenceChain
        } else {
            KsReference::UniformMarginal
        },
        coordinates: coords,
        min_p_value: min_p,
        stationary: min_p > P_VALUE_THRESHOLD,
    })
}

pub fn run_diagnostics(body: &ConvexBody, kind: ChainKind, steps: u64, burn_in: u64, seed: u64) -> Result<DiagnosticsReport> {
    let run = run_chain(body, kind, steps, burn_in, seed)?;
    diagnose(body, &run, seed)
}

/// Empirical symmetry of the cell-to-cell transition matrix of the
/// coordinate chain on `[0,1]²` cut into `m × m` cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetailedBalanceReport {
    pub cells_per_axis: usize,
    pub steps: u64,
    pub pairs_tested: usize,
    /// Largest `|P̂_ab − P̂_ba| / σ_ab`.
    pub max_z: f64,
    pub passed: bool,
}

pub fn detailed_balance_check(m: usize, steps: u64, seed: u64) -> Result<DetailedBalanceReport> {
    if m < 2 {
        return Err(Error::Parameter("need at least 2 cells per axis".into()));
    }
    let body = ConvexBody::cube(2)?;
    let cell = |x: &[f64]| -> usize {
        let i = ((x[0] * m as f64) as usize).min(m - 1);
        let j = ((x[1] * m as f64) as usize).min(m - 1);
        i * m + j
    };
    let mut st = ChainState::at_interior(&body, seed)?;
    // short burn-in away from the start cell
    for _ in 0..1000 {
        st.step(&body, ChainKind::Char)?;
    }
    let cells = m * m;
    let mut counts = vec![0u64; cells * cells];
    let mut prev = cell(&st.x);
    for _ in 0..steps {
        st.step(&body, ChainKind::Char)?;
        let c = cell(&st.x);
        counts[prev * cells + c] += 1;
        prev = c;
    }
    let out: Vec<f64> = (0..cells)
        .map(|a| counts[a * cells..(a + 1) * cells].iter().sum::<u64>() as f64)
        .collect();
    let mut max_z: f64 = 0.0;
    let mut pairs = 0;
    let mut passed = true;
    for a in 0..cells {
        for b in a + 1..cells {
            let (nab, nba) = (counts[a * cells + b] as f64, counts[b * cells + a] as f64);
            if nab + nba == 0.0 || out[a] == 0.0 || out[b] == 0.0 {
                continue;
            }
            pairs += 1;
            let (pab, pba) = (nab / out[a], nba / out[b]);
            let var = pab * (1.0 - pab) / out[a] + pba * (1.0 - pba) / out[b];
            let diff = (pab - pba).abs();
            let z = if var > 0.0 {
                diff / var.sqrt()
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_z = max_z.max(z);
            passed &= z <= 3.0;
        }
    }
    Ok(DetailedBalanceReport {
        cells_per_axis: m,
        steps,
        pairs_tested: pairs,
        max_z,
        passed,
    })
}
