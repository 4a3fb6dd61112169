//! Named worked examples used by the tests and the `examples` subcommand.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::dependence::{fock_shift_example, FockShift};
use crate::linalg::{basis_vector, pauli, ComplexMatrix, Tolerance, C64};
use crate::measurement::{Measurement, Povm};
use crate::synthesis::synthesize;

fn tol() -> Tolerance {
    Tolerance::default()
}

/// `A_k = σ_k / 2` for `σ = (1, σx, σy, σz)`.
pub fn pauli_quarter() -> Measurement {
    Measurement::fine(pauli().iter().map(|s| s.scale_real(0.5)).collect(), &tol()).expect("complete")
}

/// Singular, linearly dependent qutrit measurement
/// `|x⟩⟨x|/√2, |y⟩⟨y|/√2, |z⟩⟨z|, (|x⟩⟨x| + |y⟩⟨y|)/√2`.
pub fn counterexample_3d() -> Measurement {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Measurement::fine(
        vec![
            ComplexMatrix::diag_real(&[h, 0.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, h, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 0.0, 1.0]),
            ComplexMatrix::diag_real(&[h, h, 0.0]),
        ],
        &tol(),
    )
    .expect("complete")
}

/// `|φ⟩⟨x|, |φ⟩⟨y|` with `φ = x = |0⟩`, `y = |1⟩`.
pub fn rank_one_pair() -> Vec<ComplexMatrix> {
    let phi = basis_vector(2, 0);
    vec![
        ComplexMatrix::outer(&phi, &basis_vector(2, 0)),
        ComplexMatrix::outer(&phi, &basis_vector(2, 1)),
    ]
}

/// Qubit-to-ququart pair whose images always span orthogonal planes.
pub fn two_to_four() -> Measurement {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a1 = ComplexMatrix::from_real_rows(&[&[h, 0.0], &[0.0, h], &[0.0, 0.0], &[0.0, 0.0]]).expect("shape");
    let a2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 0.0], &[h, 0.0], &[0.0, h]]).expect("shape");
    Measurement::fine(vec![a1, a2], &tol()).expect("complete")
}

/// Truncated bosonic shift pair with `d = 8`, `μ = 1/2`.
pub fn fock_shift() -> FockShift {
    fock_shift_example(8, C64::new(0.5, 0.0)).expect("valid parameters")
}

/// `Π_k = (2/3)|t_k⟩⟨t_k|` for three real qubit states at 120°.
pub fn trine_povm() -> Povm {
    let elements = (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let t = vec![C64::new(a.cos(), 0.0), C64::new(a.sin(), 0.0)];
            ComplexMatrix::projector(&t).scale_real(2.0 / 3.0)
        })
        .collect();
    Povm::new(elements, &tol()).expect("trine resolves the identity")
}

/// The trine realised as a perfectly retrodictable measurement into `C^3`.
pub fn trine_measurement() -> Measurement {
    synthesize(&trine_povm(), 3, None, &tol()).expect("three outcomes fit").measurement
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExampleData {
    Measurement(Measurement),
    Operators(Vec<ComplexMatrix>),
    Povm(Povm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedExample {
    pub name: &'static str,
    pub description: &'static str,
    pub data: ExampleData,
    pub expected: BTreeMap<String, Value>,
}

fn expected(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn catalog() -> Vec<NamedExample> {
    vec![
        NamedExample {
            name: "pauli_quarter",
            description: "Four Pauli operators scaled by 1/2: linearly independent yet locally linearly dependent",
            data: ExampleData::Measurement(pauli_quarter()),
            expected: expected(&[
                ("li", json!(true)),
                ("lld", json!("yes")),
                ("lli", json!("no")),
                ("perfect", json!(false)),
                ("assess", json!("yes")),
            ]),
        },
        NamedExample {
            name: "counterexample_3d",
            description: "Singular, linearly dependent qutrit measurement whose outcome is certain for input |z>",
            data: ExampleData::Measurement(counterexample_3d()),
            expected: expected(&[
                ("li", json!(false)),
                ("lld", json!("yes")),
                ("perfect", json!(false)),
                ("assess", json!("undecided")),
                ("p_outcome_3_given_z", json!(1.0)),
            ]),
        },
        NamedExample {
            name: "rank_one_pair",
            description: "Operators |phi><x| and |phi><y| sharing a one-dimensional range",
            data: ExampleData::Measurement(Measurement::fine(rank_one_pair(), &tol()).expect("complete")),
            expected: expected(&[
                ("li", json!(true)),
                ("lld", json!("yes")),
                ("n2_reason", json!("shared_rank_one_range")),
                ("lli", json!("no")),
                ("perfect", json!(false)),
            ]),
        },
        NamedExample {
            name: "two_to_four",
            description: "Two-outcome qubit measurement into a four-dimensional output space with locally linearly independent Kraus operators",
            data: ExampleData::Measurement(two_to_four()),
            expected: expected(&[
                ("li", json!(true)),
                ("lld", json!("no")),
                ("lli", json!("yes_probabilistic")),
                ("min_sigma", json!(std::f64::consts::FRAC_1_SQRT_2)),
                ("perfect", json!(true)),
                ("assess", json!("yes")),
            ]),
        },
        NamedExample {
            name: "fock_shift",
            description: "Bosonic shift and attenuation pair truncated to 8 levels with mu = 1/2",
            data: ExampleData::Operators(fock_shift().operators()),
            expected: expected(&[
                ("li", json!(true)),
                ("lli", json!("no")),
                ("restricted_lli", json!("yes_probabilistic")),
                ("identity_residual_below", json!(1e-12)),
            ]),
        },
        NamedExample {
            name: "trine_povm",
            description: "Symmetric three-outcome qubit POVM",
            data: ExampleData::Povm(trine_povm()),
            expected: expected(&[
                ("synthesize_d_out_2", json!("too_many_outcomes")),
                ("synthesize_d_out_3", json!("ok")),
            ]),
        },
    ]
}

pub fn find(name: &str) -> Option<NamedExample> {
    catalog().into_iter().find(|e| e.name == name)
}
