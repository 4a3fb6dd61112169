//! Zero-error retrodiction with an inconclusive outcome.
//!
//! Linearly independent post-measurement states admit reciprocal vectors
//! `ψ̃_k` with `⟨ψ̃_k|ψ_j⟩ = δ_kj`. The retrodictor uses
//! `Ξ_k = c |ê_k⟩⟨ê_k|` for normalised `ê_k ∝ ψ̃_k`, with `Ξ_0 = 1 − Σ Ξ_k` as
//! the inconclusive element and the single scale `c` as large as positivity
//! of `Ξ_0` allows.

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, normalized, numeric_rank, ComplexMatrix, Tolerance, C64};
use crate::measurement::{apply_outcome, outcome_probabilities, Measurement, QuantumState};

const BISECTION_STEPS: usize = 50;

/// `N + 1` element POVM; element 0 is the inconclusive result and element
/// `k ≥ 1` identifies outcome `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnambiguousRetrodictor {
    d: usize,
    elements: Vec<ComplexMatrix>,
    scale: Option<f64>,
}

impl UnambiguousRetrodictor {
    pub const INCONCLUSIVE_INDEX: usize = 0;

    /// Wraps externally supplied elements after checking positivity and completeness.
    pub fn from_elements(elements: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        if elements.len() < 2 {
            return Err(Error::InvalidPovm("need an inconclusive element and at least one outcome".into()));
        }
        let d = elements[0].rows();
        for (k, e) in elements.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("element {k} is not {d}x{d}")));
            }
            crate::linalg::check_psd(e, tol)?;
        }
        let resid = ComplexMatrix::sum(&elements, d, d).distance(&ComplexMatrix::identity(d));
        if resid > tol.eq_residual * (d as f64).sqrt() {
            return Err(Error::InvalidPovm(format!("elements do not sum to the identity (residual {resid:.3e})")));
        }
        Ok(Self {
            d,
            elements,
            scale: None,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Number of conclusive outcomes.
    pub fn n_outcomes(&self) -> usize {
        self.elements.len() - 1
    }

    pub fn inconclusive(&self) -> &ComplexMatrix {
        &self.elements[Self::INCONCLUSIVE_INDEX]
    }

    /// Common weight `c` of the conclusive elements, when built from states.
    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    /// `Σ_k w_k ⟨ψ_k|Ξ_0|ψ_k⟩`.
    pub fn p_inconclusive(&self, states: &[Vec<C64>], weights: &[f64]) -> f64 {
        let p: f64 = states
            .iter()
            .zip(weights)
            .map(|(s, w)| w * self.inconclusive().expectation(s).re)
            .sum();
        p.clamp(0.0, 1.0)
    }

    /// Largest `⟨ψ_k|Ξ_{k'+1}|ψ_k⟩` for `k ≠ k'`.
    pub fn error_residual(&self, states: &[Vec<C64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, s) in states.iter().enumerate() {
            for (j, e) in self.elements[1..].iter().enumerate() {
                if j != k {
                    worst = worst.max(e.expectation(s).re.abs());
                }
            }
        }
        worst
    }
}

/// Unambiguous discriminator for linearly independent pure states.
pub fn build_ud_povm(states: &[Vec<C64>], tol: &Tolerance) -> Result<UnambiguousRetrodictor> {
    let Some(first) = states.first() else {
        return Err(Error::InvalidState("no states supplied".into()));
    };
    let d = first.len();
    if states.iter().any(|s| s.len() != d) {
        return Err(Error::DimensionMismatch("states have different dimensions".into()));
    }
    let n = states.len();
    let psi = ComplexMatrix::from_columns(states)?;
    if n > d || numeric_rank(&psi, tol) < n {
        return Err(Error::LinearlyDependentStates);
    }
    let gram = &psi.adjoint() * &psi;
    let gram_inv = gram.inverse().ok_or(Error::LinearlyDependentStates)?;
    let reciprocal = &psi * &gram_inv;
    let duals: Vec<Vec<C64>> = (0..n)
        .map(|k| normalized(&reciprocal.column(k)).ok_or(Error::LinearlyDependentStates))
        .collect::<Result<_>>()?;
    let projectors: Vec<ComplexMatrix> = duals.iter().map(|e| ComplexMatrix::projector(e)).collect();
    let total = ComplexMatrix::sum(&projectors, d, d);
    let id = ComplexMatrix::identity(d);
    let feasible = |c: f64| -> Result<bool> {
        Ok(min_eigenvalue(&(&id - &total.scale_real(c)), tol)? >= -tol.psd_floor)
    };
    let scale = if feasible(1.0)? {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut elements = Vec::with_capacity(n + 1);
    elements.push((&id - &total.scale_real(scale)).hermitian_part());
    elements.extend(projectors.iter().map(|p| p.scale_real(scale)));
    Ok(UnambiguousRetrodictor {
        d,
        elements,
        scale: Some(scale),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Yes,
    No,
    Undecided,
}

impl Feasibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Yes => "yes",
            Self::No => "no",
            Self::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrodictionAssessment {
    pub feasible: Feasibility,
    pub linearly_independent: bool,
    /// Outcomes whose Kraus operator is singular.
    pub singular_outcomes: Vec<usize>,
    pub recommended_state: Option<QuantumState>,
    pub p_inconclusive: Option<f64>,
}

fn fine_ops(m: &Measurement) -> Result<Vec<ComplexMatrix>> {
    Ok(m.fine_operators()
        .ok_or(Error::NotFineGrained)?
        .into_iter()
        .cloned()
        .collect())
}

/// Decides whether some entangled input makes the outcome unambiguously retrodictable.
pub fn assess_measurement(m: &Measurement, tol: &Tolerance) -> Result<RetrodictionAssessment> {
    let ops = fine_ops(m)?;
    let (li, _) = crate::dependence::check_linear_independence(&ops, tol)?;
    let singular_outcomes: Vec<usize> = ops
        .iter()
        .enumerate()
        .filter(|(_, a)| numeric_rank(a, tol) < m.d_in())
        .map(|(k, _)| k)
        .collect();
    if li {
        let state = QuantumState::maximally_entangled(m.d_in());
        let r = retrodict_unambiguously(m, &state, tol)?;
        return Ok(RetrodictionAssessment {
            feasible: Feasibility::Yes,
            linearly_independent: true,
            singular_outcomes,
            recommended_state: Some(state),
            p_inconclusive: Some(r.p_inconclusive),
        });
    }
    let feasible = if singular_outcomes.is_empty() {
        Feasibility::No
    } else {
        Feasibility::Undecided
    };
    Ok(RetrodictionAssessment {
        feasible,
        linearly_independent: false,
        singular_outcomes,
        recommended_state: None,
        p_inconclusive: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnambiguousRetrodiction {
    pub retrodictor: UnambiguousRetrodictor,
    /// Normalised joint final states, one per outcome.
    pub final_states: Vec<Vec<C64>>,
    pub probabilities: Vec<f64>,
    pub p_inconclusive: f64,
    /// Largest detection probability of a wrong outcome on the final states.
    pub error_residual: f64,
}

/// Builds the unambiguous retrodictor for a fine-grained measurement acting
/// on the first factor of a known pure input.
pub fn retrodict_unambiguously(m: &Measurement, s: &QuantumState, tol: &Tolerance) -> Result<UnambiguousRetrodiction> {
    if !m.is_fine_grained() {
        return Err(Error::NotFineGrained);
    }
    if !s.is_pure() {
        return Err(Error::InvalidState("a pure input state is required".into()));
    }
    let probabilities = outcome_probabilities(m, s, tol)?;
    if let Some(k) = probabilities.iter().position(|&p| p == 0.0) {
        return Err(Error::ZeroProbabilityOutcome { outcome: k });
    }
    let final_states: Vec<Vec<C64>> = (0..m.n_outcomes())
        .map(|k| {
            let post = apply_outcome(m, s, k, tol)?;
            Ok(post.vector().expect("fine-grained action keeps pure states pure").to_vec())
        })
        .collect::<Result<_>>()?;
    let n = final_states.len();
    let rank = numeric_rank(&ComplexMatrix::from_columns(&final_states)?, tol);
    if rank < n {
        return Err(Error::DependentFinalStates { rank, outcomes: n });
    }
    let retrodictor = build_ud_povm(&final_states, tol).map_err(|e| match e {
        Error::LinearlyDependentStates => Error::DependentFinalStates { rank, outcomes: n },
        other => other,
    })?;
    let p_inconclusive = retrodictor.p_inconclusive(&final_states, &probabilities);
    let error_residual = retrodictor.error_residual(&final_states);
    Ok(UnambiguousRetrodiction {
        retrodictor,
        final_states,
        probabilities,
        p_inconclusive,
        error_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDiscrimination {
    pub measurement: Measurement,
    pub retrodiction: UnambiguousRetrodiction,
    pub success_probability: f64,
}

/// Unambiguous discrimination of unitaries applied with prior probabilities,
/// treated as the measurement with Kraus operators `√p_k U_k`.
pub fn discriminate_unitaries(
    unitaries: &[ComplexMatrix],
    priors: &[f64],
    s: &QuantumState,
    tol: &Tolerance,
) -> Result<UnitaryDiscrimination> {
    let n = unitaries.len();
    if n == 0 || priors.len() != n {
        return Err(Error::InvalidPriors(format!("{} priors for {n} unitaries", priors.len())));
    }
    if let Some(p) = priors.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidPriors(format!("prior {p} is not positive")));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > tol.eq_residual * n as f64 {
        return Err(Error::InvalidPriors(format!("priors sum to {total}")));
    }
    let (li, _) = crate::dependence::check_linear_independence(unitaries, tol)?;
    if !li {
        let cols: Vec<Vec<C64>> = unitaries.iter().map(ComplexMatrix::vectorize).collect();
        let rank = numeric_rank(&ComplexMatrix::from_columns(&cols)?, tol);
        return Err(Error::DependentFinalStates { rank, outcomes: n });
    }
    for (index, u) in unitaries.iter().enumerate() {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let d = u.rows();
        let residual = (&u.adjoint() * u).distance(&ComplexMatrix::identity(d));
        if residual > tol.eq_residual * (d as f64).sqrt() {
            return Err(Error::NonUnitaryInput { index, residual });
        }
    }
    let ops = unitaries
        .iter()
        .zip(priors)
        .map(|(u, p)| u.scale_real(p.sqrt()))
        .collect();
    let measurement = Measurement::fine(ops, tol)?;
    let retrodiction = retrodict_unambiguously(&measurement, s, tol)?;
    let success_probability = 1.0 - retrodiction.p_inconclusive;
    Ok(UnitaryDiscrimination {
        measurement,
        retrodiction,
        success_probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::{basis_vector, inner, pauli, C64, ZERO};
    use crate::random::{normalize_kraus, random_matrix, random_state, random_unitary};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn sum_residual(r: &UnambiguousRetrodictor) -> f64 {
        ComplexMatrix::sum(r.elements(), r.d(), r.d()).distance(&ComplexMatrix::identity(r.d()))
    }

    #[test]
    fn orthonormal_states() {
        let states = vec![basis_vector(3, 0), basis_vector(3, 2)];
        let r = build_ud_povm(&states, &tol()).unwrap();
        assert_eq!(r.scale(), Some(1.0));
        for (k, s) in states.iter().enumerate() {
            assert!(r.elements()[k + 1].distance(&ComplexMatrix::projector(s)) < 1e-14);
        }
        assert!(r.inconclusive().distance(&ComplexMatrix::projector(&basis_vector(3, 1))) < 1e-14);
        assert!(r.p_inconclusive(&states, &[0.5, 0.5]) < 1e-14);
    }

    /// Largest `t` on a fine grid with `1 − t·S ⪰ 0` for the closed-form 2×2
    /// eigenvalues of `S = |e₁⟩⟨e₁| + |e₂⟩⟨e₂|` in the plane of the states.
    fn grid_failure(s: f64) -> f64 {
        let u = (1.0 - s * s).sqrt();
        // reciprocal vectors of (1,0) and (s,u), normalised
        let e1 = [u, -s];
        let e2 = [0.0, 1.0];
        let m = [
            [e1[0] * e1[0] + e2[0] * e2[0], e1[0] * e1[1] + e2[0] * e2[1]],
            [e1[1] * e1[0] + e2[1] * e2[0], e1[1] * e1[1] + e2[1] * e2[1]],
        ];
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let lmax = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        let steps = 2_000_000;
        let mut best = 0.0;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            if 1.0 - t * lmax >= 0.0 {
                best = t;
            }
        }
        // failure = 1 − t |⟨e_k|ψ_k⟩|², equal for both states
        1.0 - best * u * u
    }

    #[test]
    fn two_state_failure_matches_grid() {
        for theta in [0.2f64, 0.7, 1.1, 1.4] {
            let s = theta.cos();
            let states = vec![
                vec![C64::new(1.0, 0.0), ZERO],
                vec![C64::new(s, 0.0), C64::new(theta.sin(), 0.0)],
            ];
            let r = build_ud_povm(&states, &tol()).unwrap();
            let p = r.p_inconclusive(&states, &[0.5, 0.5]);
            assert!((p - grid_failure(s)).abs() < 1e-6, "theta {theta}: {p}");
            assert!((p - s.abs()).abs() < 1e-6);
            assert!(r.error_residual(&states) < 1e-9);
        }
    }

    #[test]
    fn dependent_states_rejected() {
        let states = vec![basis_vector(2, 0), basis_vector(2, 1), normalized(&[C64::new(1.0, 0.0); 2]).unwrap()];
        assert_eq!(build_ud_povm(&states, &tol()).unwrap_err(), Error::LinearlyDependentStates);
    }

    #[test]
    fn pauli_measurement_assessment() {
        let m = catalog::pauli_quarter();
        let a = assess_measurement(&m, &tol()).unwrap();
        assert_eq!(a.feasible, Feasibility::Yes);
        assert!(a.p_inconclusive.unwrap() < 1e-12);
        let state = a.recommended_state.unwrap();
        assert_eq!(state.factor_dims(), Some((2, 2)));

        let r = retrodict_unambiguously(&m, &state, &tol()).unwrap();
        let g = ComplexMatrix::from_fn(4, 4, |i, j| inner(&r.final_states[i], &r.final_states[j]));
        assert!(g.distance(&ComplexMatrix::identity(4)) < 1e-12);
        assert!(r.error_residual < 1e-12);
    }

    #[test]
    fn pauli_with_product_input_fails() {
        let m = catalog::pauli_quarter();
        let s = QuantumState::product(&basis_vector(2, 0), &basis_vector(2, 0), &tol()).unwrap();
        assert!(matches!(
            retrodict_unambiguously(&m, &s, &tol()),
            Err(Error::DependentFinalStates { outcomes: 4, .. })
        ));
    }

    #[test]
    fn projective_measurement_product_input() {
        let m = Measurement::fine(
            vec![
                ComplexMatrix::diag_real(&[1.0, 0.0]),
                ComplexMatrix::diag_real(&[0.0, 1.0]),
            ],
            &tol(),
        )
        .unwrap();
        let plus = normalized(&[C64::new(1.0, 0.0); 2]).unwrap();
        let s = QuantumState::product(&plus, &basis_vector(3, 1), &tol()).unwrap();
        let r = retrodict_unambiguously(&m, &s, &tol()).unwrap();
        assert!(r.p_inconclusive < 1e-14);
        assert_eq!(r.retrodictor.d(), 6);
    }

    #[test]
    fn counterexample_is_undecided() {
        let m = catalog::counterexample_3d();
        let a = assess_measurement(&m, &tol()).unwrap();
        assert_eq!(a.feasible, Feasibility::Undecided);
        assert!(!a.linearly_independent);
    }

    #[test]
    fn nonsingular_dependent_is_infeasible() {
        let [id, sx, _, _] = pauli();
        let third = &id + &sx.scale_real(0.5);
        let m = normalize_kraus(vec![vec![id], vec![sx], vec![third]]).unwrap();
        assert_eq!(assess_measurement(&m, &tol()).unwrap().feasible, Feasibility::No);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s = QuantumState::pure(random_state(4, &mut rng), &tol()).unwrap().with_factors(2, 2).unwrap();
            assert!(matches!(
                retrodict_unambiguously(&m, &s, &tol()),
                Err(Error::DependentFinalStates { .. })
            ));
        }
    }

    #[test]
    fn coarse_measurement_rejected() {
        let m = Measurement::new(
            vec![vec![
                ComplexMatrix::diag_real(&[1.0, 0.0]),
                ComplexMatrix::diag_real(&[0.0, 1.0]),
            ]],
            &tol(),
        )
        .unwrap();
        assert_eq!(assess_measurement(&m, &tol()).unwrap_err(), Error::NotFineGrained);
    }

    #[test]
    fn pauli_unitaries() {
        let us = pauli().to_vec();
        let s = QuantumState::maximally_entangled(2);
        let r = discriminate_unitaries(&us, &[0.25; 4], &s, &tol()).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dependent_unitary_sets() {
        let [id, sx, _, sz] = pauli();
        let s = QuantumState::maximally_entangled(2);
        let mixed = (&id + &sx).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!(matches!(
            discriminate_unitaries(&[id.clone(), sx.clone(), mixed], &[1.0 / 3.0; 3], &s, &tol()),
            Err(Error::DependentFinalStates { rank: 2, outcomes: 3 })
        ));
        let hadamard = (&sx + &sz).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!(matches!(
            discriminate_unitaries(&[sx, sz, hadamard], &[1.0 / 3.0; 3], &s, &tol()),
            Err(Error::DependentFinalStates { rank: 2, outcomes: 3 })
        ));
    }

    #[test]
    fn identity_and_flip() {
        let [id, sx, _, _] = pauli();
        let us = [id, sx];
        let plus = normalized(&[C64::new(1.0, 0.0); 2]).unwrap();
        let s = QuantumState::product(&plus, &basis_vector(2, 0), &tol()).unwrap();
        assert!(matches!(
            discriminate_unitaries(&us, &[0.5, 0.5], &s, &tol()),
            Err(Error::DependentFinalStates { .. })
        ));
        let s = QuantumState::product(&basis_vector(2, 0), &basis_vector(2, 1), &tol()).unwrap();
        let r = discriminate_unitaries(&us, &[0.5, 0.5], &s, &tol()).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_unitary_inputs() {
        let [id, sx, _, _] = pauli();
        let s = QuantumState::maximally_entangled(2);
        let squashed = ComplexMatrix::diag_real(&[1.0, 0.5]);
        assert!(matches!(
            discriminate_unitaries(&[sx.clone(), squashed], &[0.5, 0.5], &s, &tol()),
            Err(Error::NonUnitaryInput { index: 1, .. })
        ));
        assert!(matches!(
            discriminate_unitaries(&[id.clone(), sx.clone()], &[0.7, 0.7], &s, &tol()),
            Err(Error::InvalidPriors(_))
        ));
        assert!(matches!(
            discriminate_unitaries(&[id, sx], &[1.0, 0.0], &s, &tol()),
            Err(Error::InvalidPriors(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn ud_povm_is_complete_and_error_free(seed in any::<u64>(), d in 1usize..5, n in 1usize..5) {
            prop_assume!(n <= d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let states: Vec<Vec<C64>> = (0..n).map(|_| random_state(d, &mut rng)).collect();
            let r = build_ud_povm(&states, &tol()).unwrap();
            prop_assert!(sum_residual(&r) <= 1e-9);
            prop_assert!(r.error_residual(&states) < 1e-9);
            prop_assert!(min_eigenvalue(r.inconclusive(), &tol()).unwrap() >= -1e-9);
            let p = r.p_inconclusive(&states, &vec![1.0 / n as f64; n]);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn independent_kraus_with_entangled_input(seed in any::<u64>(), d in 2usize..4, n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let groups = (0..n).map(|_| vec![random_matrix(d, d, &mut rng)]).collect();
            let m = normalize_kraus(groups).unwrap();
            let s = QuantumState::maximally_entangled(d);
            let r = retrodict_unambiguously(&m, &s, &tol()).unwrap();
            prop_assert!(r.error_residual < 1e-9);
            prop_assert!(r.p_inconclusive < 1.0);
            let a = assess_measurement(&m, &tol()).unwrap();
            prop_assert_eq!(a.feasible, Feasibility::Yes);
        }

        #[test]
        fn local_unitary_on_ancilla_keeps_feasibility(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = catalog::pauli_quarter();
            let v = random_unitary(2, &mut rng);
            let phi = QuantumState::maximally_entangled(2);
            let rotated = crate::linalg::kron(&ComplexMatrix::identity(2), &v).mul_vec(phi.vector().unwrap());
            let s = QuantumState::pure(rotated, &tol()).unwrap().with_factors(2, 2).unwrap();
            let r = retrodict_unambiguously(&m, &s, &tol()).unwrap();
            prop_assert!(r.p_inconclusive < 1e-9);
        }
    }
}
