//! Linear, local linear dependence and local linear independence of operator sets.
//!
//! For `M(ψ) = [A₁ψ | … | A_Nψ]`, a set is locally linearly dependent (LLD)
//! when `M(ψ)` is rank deficient for every `ψ`, and locally linearly
//! independent (LLI) when `M(ψ)` has full column rank for every nonzero `ψ`.
//! Exact criteria are used where they exist; otherwise verdicts come from
//! seeded sampling and are labelled as probabilistic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::ser;
use crate::linalg::{
    basis_vector, condition_number, eigenvalues, fix_phase, least_singular_pair, norm, numeric_rank, support_projector,
    ComplexMatrix, Tolerance, C64, ONE, ZERO,
};
use crate::random::random_state;

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_STARTS: usize = 32;
pub const LLI_THRESHOLD: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e8;
const SEARCH_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LldVerdict {
    Yes,
    No,
    YesProbabilistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LliVerdict {
    YesProbabilistic,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum N2Reason {
    LinearlyDependent,
    SharedRankOneRange,
    NotLld,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LldResult {
    pub verdict: LldVerdict,
    /// A vector whose images are linearly independent, when `verdict = no`.
    #[serde(serialize_with = "ser::opt_vector")]
    pub witness: Option<Vec<C64>>,
    pub samples: usize,
}

/// `(Σ α_k A_k) ψ ≈ 0` with unit `α` and `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LliWitness {
    #[serde(serialize_with = "ser::vector")]
    pub psi: Vec<C64>,
    #[serde(serialize_with = "ser::vector")]
    pub alpha: Vec<C64>,
    /// Eigenvalue of `A₁⁻¹A₂` when the witness comes from the eigenvector construction.
    #[serde(serialize_with = "ser::opt_complex", skip_serializing_if = "Option::is_none")]
    pub lambda: Option<C64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LliResult {
    pub verdict: LliVerdict,
    pub min_sigma: f64,
    pub witness: Option<LliWitness>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Certificates {
    #[serde(serialize_with = "ser::opt_vector")]
    pub beta: Option<Vec<C64>>,
    #[serde(serialize_with = "ser::opt_vector")]
    pub not_lld: Option<Vec<C64>>,
    pub not_lli: Option<LliWitness>,
    pub n2_reason: Option<N2Reason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceVerdict {
    #[serde(rename = "li")]
    pub linearly_independent: bool,
    pub lld: LldVerdict,
    pub lli: LliVerdict,
    pub min_sigma: f64,
    pub certificates: Certificates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub n_samples: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            n_starts: DEFAULT_STARTS,
            seed: 0,
        }
    }
}

fn check_shapes(ops: &[ComplexMatrix]) -> Result<(usize, usize)> {
    let Some(first) = ops.first() else {
        return Err(Error::ShapeMismatch("no operators supplied".into()));
    };
    let shape = first.shape();
    if let Some((i, a)) = ops.iter().enumerate().find(|(_, a)| a.shape() != shape) {
        return Err(Error::ShapeMismatch(format!(
            "operator {i} is {}x{}, expected {}x{}",
            a.rows(),
            a.cols(),
            shape.0,
            shape.1
        )));
    }
    Ok(shape)
}

/// `[A₁ψ | … | A_Nψ]`.
pub fn image_matrix(ops: &[ComplexMatrix], psi: &[C64]) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> = ops.iter().map(|a| a.mul_vec(psi)).collect();
    ComplexMatrix::from_columns(&cols).expect("at least one operator")
}

/// `Σ α_k A_k`.
pub fn combination(ops: &[ComplexMatrix], alpha: &[C64]) -> ComplexMatrix {
    let (r, c) = ops[0].shape();
    ops.iter()
        .zip(alpha)
        .fold(ComplexMatrix::zeros(r, c), |acc, (a, &w)| &acc + &a.scale(w))
}

/// The `N`-th singular value of `M(ψ)` (zero when `N > d_out`) and its right vector.
fn sigma_n(ops: &[ComplexMatrix], psi: &[C64]) -> (f64, Vec<C64>) {
    least_singular_pair(&image_matrix(ops, psi))
}

fn make_witness(ops: &[ComplexMatrix], psi: Vec<C64>, alpha: Vec<C64>, lambda: Option<C64>) -> LliWitness {
    let residual = norm(&combination(ops, &alpha).mul_vec(&psi));
    LliWitness {
        psi,
        alpha,
        lambda,
        residual,
    }
}

/// Independent iff the stacked vectorised operators have full column rank;
/// otherwise returns unit coefficients `β` with `Σ β_k A_k ≈ 0`.
pub fn check_linear_independence(ops: &[ComplexMatrix], tol: &Tolerance) -> Result<(bool, Option<Vec<C64>>)> {
    check_shapes(ops)?;
    let cols: Vec<Vec<C64>> = ops.iter().map(ComplexMatrix::vectorize).collect();
    let stack = ComplexMatrix::from_columns(&cols)?;
    if numeric_rank(&stack, tol) == ops.len() {
        return Ok((true, None));
    }
    let (_, mut beta) = least_singular_pair(&stack);
    fix_phase(&mut beta, 1e-8);
    Ok((false, Some(beta)))
}

/// Sampling test of local linear dependence, with the pigeonhole shortcut `N > d_out`.
pub fn check_lld(ops: &[ComplexMatrix], tol: &Tolerance, n_samples: usize, seed: u64) -> Result<LldResult> {
    let (d_out, d_in) = check_shapes(ops)?;
    let n = ops.len();
    if n > d_out {
        return Ok(LldResult {
            verdict: LldVerdict::Yes,
            witness: None,
            samples: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_samples {
        let psi = random_state(d_in, &mut rng);
        if numeric_rank(&image_matrix(ops, &psi), tol) == n {
            return Ok(LldResult {
                verdict: LldVerdict::No,
                witness: Some(psi),
                samples: i + 1,
            });
        }
    }
    Ok(LldResult {
        verdict: LldVerdict::YesProbabilistic,
        witness: None,
        samples: n_samples,
    })
}

/// Exact criterion for two operators: LLD iff linearly dependent, or both
/// rank one with the same range.
pub fn check_lld_n2_exact(a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &Tolerance) -> Result<(bool, N2Reason)> {
    let pair = [a1.clone(), a2.clone()];
    if !check_linear_independence(&pair, tol)?.0 {
        return Ok((true, N2Reason::LinearlyDependent));
    }
    if numeric_rank(a1, tol) == 1 && numeric_rank(a2, tol) == 1 {
        let p1 = support_projector(&(a1 * &a1.adjoint()), tol)?;
        let p2 = support_projector(&(a2 * &a2.adjoint()), tol)?;
        if p1.distance(&p2) <= tol.eq_residual {
            return Ok((true, N2Reason::SharedRankOneRange));
        }
    }
    Ok((false, N2Reason::NotLld))
}

/// Alternating minimisation of `‖(Σ α_k A_k) ψ‖` over unit `α`, `ψ` from one start.
fn local_search(ops: &[ComplexMatrix], start: Vec<C64>) -> (f64, Vec<C64>, Vec<C64>) {
    let mut psi = start;
    let (mut best, mut alpha) = sigma_n(ops, &psi);
    for _ in 0..SEARCH_ITERATIONS {
        let (_, next_psi) = least_singular_pair(&combination(ops, &alpha));
        let (s, next_alpha) = sigma_n(ops, &next_psi);
        let improved = s < best - 1e-15 * best.max(1e-300);
        if s <= best {
            best = s;
            psi = next_psi;
            alpha = next_alpha;
        }
        if !improved {
            break;
        }
    }
    (best, psi, alpha)
}

/// Local linear independence test.
///
/// Singular operators, `N > d_out` and square non-singular families with
/// `N ≥ 2` are decided exactly; the last case uses an eigenvector `ψ` of
/// `A₁⁻¹A₂` with eigenvalue `λ`, so `(A₂ − λA₁)ψ = 0`. Remaining cases
/// minimise the smallest singular value of `M(ψ)` from `n_starts` random starts.
pub fn check_lli(ops: &[ComplexMatrix], tol: &Tolerance, n_starts: usize, seed: u64) -> Result<LliResult> {
    let (d_out, d_in) = check_shapes(ops)?;
    let n = ops.len();

    if let Some(k) = ops.iter().position(|a| numeric_rank(a, tol) < d_in) {
        let (_, psi) = least_singular_pair(&ops[k]);
        let alpha = basis_vector(n, k);
        return Ok(exact_no(ops, psi, alpha, None));
    }
    if n > d_out {
        let psi = basis_vector(d_in, 0);
        let (_, alpha) = sigma_n(ops, &psi);
        return Ok(exact_no(ops, psi, alpha, None));
    }
    if n >= 2 && d_out == d_in && condition_number(&ops[0]) < MAX_CONDITION {
        if let Some(w) = eigenvector_witness(&ops[0], &ops[1]) {
            let mut alpha = vec![ZERO; n];
            alpha[0] = -w.0;
            alpha[1] = ONE;
            let scale = norm(&alpha);
            alpha.iter_mut().for_each(|z| *z /= scale);
            return Ok(exact_no(ops, w.1, alpha, Some(w.0)));
        }
    }

    let runs: Vec<(f64, Vec<C64>, Vec<C64>)> = (0..n_starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            local_search(ops, random_state(d_in, &mut rng))
        })
        .collect();
    let (min_sigma, psi, alpha) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one start");
    if min_sigma > LLI_THRESHOLD {
        Ok(LliResult {
            verdict: LliVerdict::YesProbabilistic,
            min_sigma,
            witness: None,
        })
    } else {
        Ok(LliResult {
            verdict: LliVerdict::No,
            min_sigma,
            witness: Some(make_witness(ops, psi, alpha, None)),
        })
    }
}

fn exact_no(ops: &[ComplexMatrix], psi: Vec<C64>, alpha: Vec<C64>, lambda: Option<C64>) -> LliResult {
    let (min_sigma, _) = sigma_n(ops, &psi);
    LliResult {
        verdict: LliVerdict::No,
        min_sigma,
        witness: Some(make_witness(ops, psi, alpha, lambda)),
    }
}

/// `(λ, ψ)` with `A₁⁻¹A₂ψ = λψ`, `ψ` the null vector of `A₂ − λA₁`.
pub fn eigenvector_witness(a1: &ComplexMatrix, a2: &ComplexMatrix) -> Option<(C64, Vec<C64>)> {
    let inv = a1.inverse()?;
    let lambda = *eigenvalues(&(&inv * a2))?.first()?;
    let (_, psi) = least_singular_pair(&(a2 - &a1.scale(lambda)));
    Some((lambda, psi))
}

/// Full classification with exact verdicts taking precedence over sampling.
pub fn classify(ops: &[ComplexMatrix], tol: &Tolerance, params: &SearchParams) -> Result<DependenceVerdict> {
    let (d_out, d_in) = check_shapes(ops)?;
    let n = ops.len();
    let (li, beta) = check_linear_independence(ops, tol)?;
    let mut certificates = Certificates {
        beta,
        ..Default::default()
    };

    let lld = if !li || n > d_out {
        LldVerdict::Yes
    } else if n == 2 {
        let (yes, reason) = check_lld_n2_exact(&ops[0], &ops[1], tol)?;
        certificates.n2_reason = Some(reason);
        if yes {
            LldVerdict::Yes
        } else {
            certificates.not_lld = check_lld(ops, tol, params.n_samples, params.seed)?.witness;
            LldVerdict::No
        }
    } else {
        let r = check_lld(ops, tol, params.n_samples, params.seed)?;
        certificates.not_lld = r.witness;
        r.verdict
    };

    let lli_result = if lld == LldVerdict::No {
        check_lli(ops, tol, params.n_starts, params.seed)?
    } else {
        // every M(ψ) is rank deficient, so any ψ yields a witness
        let psi = basis_vector(d_in, 0);
        let alpha = match &certificates.beta {
            Some(b) => b.clone(),
            None => sigma_n(ops, &psi).1,
        };
        exact_no(ops, psi, alpha, None)
    };
    certificates.not_lli = lli_result.witness;

    Ok(DependenceVerdict {
        linearly_independent: li,
        lld,
        lli: lli_result.verdict,
        min_sigma: lli_result.min_sigma,
        certificates,
    })
}

/// Truncated bosonic pair `A₁ = μ Σ_{n<d-1} |n+1⟩⟨n|`, `A₂ = √(1−|μ|²) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockShift {
    pub d: usize,
    pub mu: C64,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    /// Dimension of the span of `|0⟩..|d−2⟩` on which the pair is faithful.
    pub validity_dim: usize,
}

pub fn fock_shift_example(d: usize, mu: C64) -> Result<FockShift> {
    if d < 2 {
        return Err(Error::DimensionMismatch(format!("truncation dimension {d} is below 2")));
    }
    let m = mu.norm();
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::BadMu(m));
    }
    let a1 = ComplexMatrix::from_fn(d, d, |i, j| if i == j + 1 { mu } else { ZERO });
    let a2 = ComplexMatrix::identity(d).scale_real((1.0 - m * m).sqrt());
    Ok(FockShift {
        d,
        mu,
        a1,
        a2,
        validity_dim: d - 1,
    })
}

impl FockShift {
    pub fn operators(&self) -> Vec<ComplexMatrix> {
        vec![self.a1.clone(), self.a2.clone()]
    }

    /// The pair restricted to inputs on `|0⟩..|d−2⟩` (`d × (d−1)` operators),
    /// which resolves the identity there.
    pub fn restricted(&self) -> Vec<ComplexMatrix> {
        let v = ComplexMatrix::from_fn(self.d, self.validity_dim, |i, j| if i == j { ONE } else { ZERO });
        vec![&self.a1 * &v, &self.a2 * &v]
    }

    /// `|⟨n₀|(α₁A₁+α₂A₂)|ψ⟩ − α₂√(1−|μ|²) c_{n₀}|` at the lowest occupied level `n₀` of `ψ`.
    pub fn identity_residual(&self, psi: &[C64], alpha: [C64; 2], floor: f64) -> Option<f64> {
        let n0 = psi.iter().position(|c| c.norm() > floor)?;
        let image = combination(&[self.a1.clone(), self.a2.clone()], &alpha).mul_vec(psi);
        let expected = alpha[1] * (1.0 - self.mu.norm_sqr()).sqrt() * psi[n0];
        Some((image[n0] - expected).norm())
    }
}
