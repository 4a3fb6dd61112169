//! Generalised measurements, POVMs and quantum states.
//!
//! A [`Measurement`] is an ordered list of outcomes, each carrying one or more
//! Kraus operators `A_kr : C^{d_in} → C^{d_out}`. Construction validates the
//! resolution of the identity, so every `Measurement` value is physical.
//!
//! States may be bipartite (`system ⊗ ancilla`); measurements always act on
//! the first factor.

use crate::error::{Error, Result};
use crate::linalg::{self, check_psd, kron, ComplexMatrix, Tolerance, C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    d_in: usize,
    d_out: usize,
    outcomes: Vec<Vec<ComplexMatrix>>,
}

impl Measurement {
    pub fn new(outcomes: Vec<Vec<ComplexMatrix>>, tol: &Tolerance) -> Result<Self> {
        let Some(first) = outcomes.first().and_then(|g| g.first()) else {
            return Err(Error::InvalidMeasurement("no Kraus operators supplied".into()));
        };
        let (d_out, d_in) = first.shape();
        for (k, group) in outcomes.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidMeasurement(format!("outcome {k} has no Kraus operators")));
            }
            if let Some(a) = group.iter().find(|a| a.shape() != (d_out, d_in)) {
                return Err(Error::ShapeMismatch(format!(
                    "outcome {k} has a {}x{} operator, expected {d_out}x{d_in}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        let m = Self {
            d_in,
            d_out,
            outcomes,
        };
        let elements = m.povm_elements();
        for (k, pi) in elements.iter().enumerate() {
            if pi.frobenius_norm() <= tol.rank_rel {
                return Err(Error::InvalidMeasurement(format!("outcome {k} has a zero POVM element")));
            }
        }
        let total = ComplexMatrix::sum(&elements, d_in, d_in);
        let resid = total.distance(&ComplexMatrix::identity(d_in));
        if resid > tol.eq_residual * (d_in as f64).sqrt() {
            return Err(Error::InvalidMeasurement(format!(
                "Kraus operators do not resolve the identity (residual {resid:.3e})"
            )));
        }
        Ok(m)
    }

    /// Fine-grained measurement with one Kraus operator per outcome.
    pub fn fine(ops: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        Self::new(ops.into_iter().map(|a| vec![a]).collect(), tol)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[Vec<ComplexMatrix>] {
        &self.outcomes
    }

    pub fn kraus(&self, k: usize) -> &[ComplexMatrix] {
        &self.outcomes[k]
    }

    pub fn is_fine_grained(&self) -> bool {
        self.outcomes.iter().all(|g| g.len() == 1)
    }

    /// The single Kraus operator of each outcome, if fine-grained.
    pub fn fine_operators(&self) -> Option<Vec<&ComplexMatrix>> {
        self.is_fine_grained()
            .then(|| self.outcomes.iter().map(|g| &g[0]).collect())
    }

    fn povm_elements(&self) -> Vec<ComplexMatrix> {
        self.outcomes
            .iter()
            .map(|g| {
                ComplexMatrix::sum(
                    &g.iter().map(|a| &a.adjoint() * a).collect::<Vec<_>>(),
                    self.d_in,
                    self.d_in,
                )
                .hermitian_part()
            })
            .collect()
    }
}

/// Positive operators on `C^d` summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let d = first.rows();
        for (k, e) in elements.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(Error::InvalidPovm(format!("element {k} is not {d}x{d}")));
            }
            check_psd(e, tol).map_err(|err| Error::InvalidPovm(format!("element {k}: {err}")))?;
        }
        let resid = ComplexMatrix::sum(&elements, d, d).distance(&ComplexMatrix::identity(d));
        if resid > tol.eq_residual * (d as f64).sqrt() {
            return Err(Error::InvalidPovm(format!(
                "elements do not sum to the identity (residual {resid:.3e})"
            )));
        }
        Ok(Self { d, elements })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Largest elementwise Frobenius distance to another POVM of the same size.
    pub fn max_distance(&self, other: &Povm) -> f64 {
        assert_eq!(self.len(), other.len());
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

/// Pure or mixed state, optionally tagged with bipartite factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    data: StateData,
    factor_dims: Option<(usize, usize)>,
}

impl QuantumState {
    pub fn pure(v: Vec<C64>, tol: &Tolerance) -> Result<Self> {
        if v.is_empty() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("vector must be nonempty and finite".into()));
        }
        let n = linalg::norm(&v);
        if (n - 1.0).abs() > tol.eq_residual {
            return Err(Error::InvalidState(format!("vector norm is {n}, expected 1")));
        }
        Ok(Self {
            data: StateData::Pure(v),
            factor_dims: None,
        })
    }

    pub fn mixed(rho: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        check_psd(&rho, tol).map_err(|e| Error::InvalidState(e.to_string()))?;
        let t = rho.trace();
        if (t - C64::new(1.0, 0.0)).norm() > tol.eq_residual {
            return Err(Error::InvalidState(format!("trace is {t}, expected 1")));
        }
        Ok(Self {
            data: StateData::Mixed(rho.hermitian_part()),
            factor_dims: None,
        })
    }

    /// Tags the state as living on `C^{d_q} ⊗ C^{d_a}`.
    pub fn with_factors(mut self, d_q: usize, d_a: usize) -> Result<Self> {
        if d_q * d_a != self.dim() || d_q == 0 || d_a == 0 {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} cannot be split as {d_q} x {d_a}",
                self.dim()
            )));
        }
        self.factor_dims = Some((d_q, d_a));
        Ok(self)
    }

    /// `Σ_j |j⟩⊗|j⟩ / √d`, maximal Schmidt rank on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![ZERO; d * d];
        let c = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            v[j * d + j] = C64::new(c, 0.0);
        }
        Self {
            data: StateData::Pure(v),
            factor_dims: Some((d, d)),
        }
    }

    pub fn product(a: &[C64], b: &[C64], tol: &Tolerance) -> Result<Self> {
        Self::pure(linalg::kron_vec(a, b), tol)?.with_factors(a.len(), b.len())
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn factor_dims(&self) -> Option<(usize, usize)> {
        self.factor_dims
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            StateData::Pure(v) => v.len(),
            StateData::Mixed(m) => m.rows(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&[C64]> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.data {
            StateData::Pure(v) => ComplexMatrix::projector(v),
            StateData::Mixed(m) => m.clone(),
        }
    }

    /// `Tr(E ρ)` for an operator on the full space of the state.
    pub fn expectation(&self, e: &ComplexMatrix) -> f64 {
        match &self.data {
            StateData::Pure(v) => e.expectation(v).re,
            StateData::Mixed(m) => (e * m).trace().re,
        }
    }
}

/// `Π_k = Σ_r A_kr† A_kr`.
pub fn povm_of(m: &Measurement) -> Povm {
    Povm {
        d: m.d_in,
        elements: m.povm_elements(),
    }
}

/// Ancilla dimension when `m` acts on the first factor of `s`.
fn ancilla_dim(m: &Measurement, s: &QuantumState) -> Result<usize> {
    match s.factor_dims {
        Some((dq, da)) if dq == m.d_in => Ok(da),
        _ if s.dim() == m.d_in => Ok(1),
        _ => Err(Error::DimensionMismatch(format!(
            "state of dimension {} (factors {:?}) does not match measurement input dimension {}",
            s.dim(),
            s.factor_dims,
            m.d_in
        ))),
    }
}

/// `(A ⊗ 1_A)|ψ⟩` computed as `A Ψ` on the reshaped coefficient matrix.
fn apply_to_vector(a: &ComplexMatrix, psi: &[C64], d_a: usize) -> Vec<C64> {
    let big_psi = ComplexMatrix::new(a.cols(), d_a, psi.to_vec()).expect("dimensions checked");
    (a * &big_psi).vectorize()
}

fn lift(a: &ComplexMatrix, d_a: usize) -> ComplexMatrix {
    if d_a == 1 {
        a.clone()
    } else {
        kron(a, &ComplexMatrix::identity(d_a))
    }
}

/// Raw Born probabilities `Tr((Π_k ⊗ 1) ρ)` without clamping.
fn raw_probabilities(m: &Measurement, s: &QuantumState, d_a: usize) -> Vec<f64> {
    m.outcomes
        .iter()
        .map(|group| match &s.data {
            StateData::Pure(psi) => group
                .iter()
                .map(|a| linalg::norm(&apply_to_vector(a, psi, d_a)).powi(2))
                .sum(),
            StateData::Mixed(rho) => group
                .iter()
                .map(|a| {
                    let big = lift(a, d_a);
                    (&(&big * rho) * &big.adjoint()).trace().re
                })
                .sum(),
        })
        .collect()
}

/// Outcome probabilities; values at or below `rank_rel` are reported as 0.
pub fn outcome_probabilities(m: &Measurement, s: &QuantumState, tol: &Tolerance) -> Result<Vec<f64>> {
    let d_a = ancilla_dim(m, s)?;
    Ok(raw_probabilities(m, s, d_a)
        .into_iter()
        .map(|p| if p <= tol.rank_rel { 0.0 } else { p.min(1.0) })
        .collect())
}

/// Normalised post-measurement state for outcome `k`.
pub fn apply_outcome(m: &Measurement, s: &QuantumState, k: usize, tol: &Tolerance) -> Result<QuantumState> {
    let d_a = ancilla_dim(m, s)?;
    if k >= m.n_outcomes() {
        return Err(Error::DimensionMismatch(format!(
            "outcome index {k} out of range for {} outcomes",
            m.n_outcomes()
        )));
    }
    let p = outcome_probabilities(m, s, tol)?[k];
    if p == 0.0 {
        return Err(Error::ZeroProbabilityOutcome { outcome: k });
    }
    let factor_dims = (d_a > 1 || s.factor_dims.is_some()).then_some((m.d_out, d_a));
    let group = &m.outcomes[k];
    let data = match &s.data {
        StateData::Pure(psi) if group.len() == 1 => {
            let phi = apply_to_vector(&group[0], psi, d_a);
            let n = linalg::norm(&phi);
            StateData::Pure(phi.iter().map(|z| z / n).collect())
        }
        _ => {
            let rho = s.density_matrix();
            let dim = m.d_out * d_a;
            let mut out = ComplexMatrix::zeros(dim, dim);
            for a in group {
                let big = lift(a, d_a);
                out = &out + &(&(&big * &rho) * &big.adjoint());
            }
            let t = out.trace().re;
            StateData::Mixed(out.scale_real(1.0 / t).hermitian_part())
        }
    };
    Ok(QuantumState { data, factor_dims })
}

/// Unnormalised final density operators `Σ_r A_kr |ψ⟩⟨ψ| A_kr†` for a pure
/// input on the system alone.
pub fn unnormalised_final_states(m: &Measurement, psi: &[C64]) -> Vec<ComplexMatrix> {
    m.outcomes
        .iter()
        .map(|group| {
            let mut acc = ComplexMatrix::zeros(m.d_out, m.d_out);
            for a in group {
                acc = &acc + &ComplexMatrix::projector(&a.mul_vec(psi));
            }
            acc
        })
        .collect()
}
