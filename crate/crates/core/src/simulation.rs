//! Seeded Monte Carlo runs of measurement followed by retrodiction.
//!
//! Trials are processed in fixed-size chunks; chunk `i` draws from the
//! ChaCha8 stream `i` of the run seed, so reports do not depend on thread
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::measurement::{apply_outcome, outcome_probabilities, Measurement, QuantumState};
use crate::perfect::ProjectiveRetrodictor;
use crate::unambiguous::UnambiguousRetrodictor;

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Retrodictor {
    Projective(ProjectiveRetrodictor),
    Unambiguous(UnambiguousRetrodictor),
}

impl From<ProjectiveRetrodictor> for Retrodictor {
    fn from(r: ProjectiveRetrodictor) -> Self {
        Self::Projective(r)
    }
}

impl From<UnambiguousRetrodictor> for Retrodictor {
    fn from(r: UnambiguousRetrodictor) -> Self {
        Self::Unambiguous(r)
    }
}

impl Retrodictor {
    pub fn dim(&self) -> usize {
        match self {
            Self::Projective(r) => r.d_out(),
            Self::Unambiguous(r) => r.d(),
        }
    }

    pub fn n_outcomes(&self) -> usize {
        match self {
            Self::Projective(r) => r.projectors().len(),
            Self::Unambiguous(r) => r.n_outcomes(),
        }
    }

    /// Elements ordered as outcomes `0..N` followed by the inconclusive element.
    pub fn ordered_elements(&self) -> Vec<ComplexMatrix> {
        match self {
            Self::Projective(r) => {
                let mut v = r.projectors().to_vec();
                v.push(r.complement());
                v
            }
            Self::Unambiguous(r) => {
                let mut v = r.elements()[1..].to_vec();
                v.push(r.inconclusive().clone());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub n_trials: u64,
    pub seed: u64,
    /// `confusion[j][k]`: trials with actual outcome `k` retrodicted as `j`;
    /// row `N` counts inconclusive results.
    pub confusion: Vec<Vec<u64>>,
    pub outcome_counts: Vec<u64>,
    pub correct: u64,
    pub mismatches: u64,
    pub inconclusive: u64,
    pub agreement_rate: Option<f64>,
    pub inconclusive_rate: f64,
}

/// Clamps entries at or below `floor` to zero and rescales to unit sum.
fn clean_distribution(p: &[f64], floor: f64) -> Vec<f64> {
    let clamped: Vec<f64> = p.iter().map(|&x| if x <= floor { 0.0 } else { x }).collect();
    let total: f64 = clamped.iter().sum();
    clamped.iter().map(|x| x / total).collect()
}

/// Inverse-CDF draw; `u ∈ [0, 1)`.
fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > 0.0 {
            acc += x;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

pub fn run_trials(
    m: &Measurement,
    r: &Retrodictor,
    s: &QuantumState,
    n_trials: u64,
    seed: u64,
    tol: &Tolerance,
) -> Result<TrialReport> {
    let n = m.n_outcomes();
    let probs = clean_distribution(&outcome_probabilities(m, s, tol)?, tol.rank_rel);
    let d_a = s.dim() / m.d_in();
    if r.dim() != m.d_out() * d_a {
        return Err(Error::DimensionMismatch(format!(
            "retrodictor acts on dimension {}, post-measurement states have dimension {}",
            r.dim(),
            m.d_out() * d_a
        )));
    }
    if r.n_outcomes() != n {
        return Err(Error::DimensionMismatch(format!(
            "retrodictor has {} outcomes, measurement has {n}",
            r.n_outcomes()
        )));
    }
    let elements = r.ordered_elements();
    let conditional: Vec<Vec<f64>> = probs
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if p == 0.0 {
                return Ok(vec![0.0; n + 1]);
            }
            let post = apply_outcome(m, s, k, tol)?;
            let raw: Vec<f64> = elements.iter().map(|e| post.expectation(e)).collect();
            Ok(clean_distribution(&raw, tol.rank_rel))
        })
        .collect::<Result<_>>()?;

    let n_chunks = n_trials.div_ceil(CHUNK);
    let confusion = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(n_trials - c * CHUNK);
            let mut counts = vec![vec![0u64; n]; n + 1];
            for _ in 0..len {
                let k = sample_index(&probs, rng.random::<f64>());
                let j = sample_index(&conditional[k], rng.random::<f64>());
                counts[j][k] += 1;
            }
            counts
        })
        .reduce(
            || vec![vec![0u64; n]; n + 1],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(&b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );

    let outcome_counts: Vec<u64> = (0..n).map(|k| confusion.iter().map(|row| row[k]).sum()).collect();
    let correct: u64 = (0..n).map(|k| confusion[k][k]).sum();
    let inconclusive: u64 = confusion[n].iter().sum();
    let conclusive = n_trials - inconclusive;
    let mismatches = conclusive - correct;
    Ok(TrialReport {
        n_trials,
        seed,
        confusion,
        outcome_counts,
        correct,
        mismatches,
        inconclusive,
        agreement_rate: (conclusive > 0).then(|| correct as f64 / conclusive as f64),
        inconclusive_rate: if n_trials > 0 {
            inconclusive as f64 / n_trials as f64
        } else {
            0.0
        },
    })
}
