//! Perfect outcome retrodiction for arbitrary initial states.
//!
//! A measurement's outcome can be recovered with certainty from the
//! post-measurement state, for every input, exactly when
//! `A_{k'r'}† A_{kr} = 0` for all `k ≠ k'`. When that holds, the supports of
//! `G_k = Σ_r A_kr A_kr†` are mutually orthogonal and their projectors form a
//! state-independent retrodicting measurement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{support_projector, ComplexMatrix, Tolerance};
use crate::measurement::{povm_of, Measurement, Povm};

/// Outcome pair achieving the largest cross-outcome residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub k: usize,
    pub k_prime: usize,
    pub r: usize,
    pub r_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfectCheckReport {
    pub retrodictable: bool,
    /// Largest scale-normalised residual `‖A_{k'r'}† A_kr‖_F / (‖A_{k'r'}‖_F ‖A_kr‖_F)` over `k ≠ k'`.
    pub max_residual: f64,
    /// Unnormalised `‖A_{k'r'}† A_kr‖_F` at the witness.
    pub max_raw_residual: f64,
    pub witness: Option<Witness>,
}

pub fn check_perfect(m: &Measurement, tol: &Tolerance) -> PerfectCheckReport {
    let mut max_residual = 0.0;
    let mut max_raw_residual = 0.0;
    let mut witness = None;
    let outcomes = m.outcomes();
    for (k, gk) in outcomes.iter().enumerate() {
        for (kp, gkp) in outcomes.iter().enumerate() {
            if k == kp {
                continue;
            }
            for (r, a) in gk.iter().enumerate() {
                for (rp, b) in gkp.iter().enumerate() {
                    let raw = (&b.adjoint() * a).frobenius_norm();
                    let scaled = raw / (a.frobenius_norm() * b.frobenius_norm() + f64::MIN_POSITIVE);
                    if witness.is_none() || scaled > max_residual {
                        max_residual = scaled;
                        max_raw_residual = raw;
                        witness = Some(Witness {
                            k,
                            k_prime: kp,
                            r,
                            r_prime: rp,
                        });
                    }
                }
            }
        }
    }
    PerfectCheckReport {
        retrodictable: max_residual <= tol.eq_residual,
        max_residual,
        max_raw_residual,
        witness,
    }
}

/// Orthogonal projectors `P_k` onto the supports of `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveRetrodictor {
    d_out: usize,
    projectors: Vec<ComplexMatrix>,
}

impl ProjectiveRetrodictor {
    /// Validates idempotence, Hermiticity and mutual orthogonality.
    pub fn new(projectors: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidPovm("no projectors".into()));
        };
        let d = first.rows();
        let scale = (d as f64).sqrt();
        for (k, p) in projectors.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("projector {k} is not {d}x{d}")));
            }
            if p.anti_hermitian_norm() > tol.eq_residual * scale || (p * p).distance(p) > tol.eq_residual * scale {
                return Err(Error::InvalidPovm(format!("element {k} is not an orthogonal projector")));
            }
        }
        for (k, a) in projectors.iter().enumerate() {
            for b in &projectors[k + 1..] {
                if (a * b).frobenius_norm() > tol.eq_residual * scale {
                    return Err(Error::InvalidPovm("projectors are not mutually orthogonal".into()));
                }
            }
        }
        Ok(Self { d_out: d, projectors })
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// `1 - Σ_k P_k`, the part of the output space outside the retrodictor's support.
    pub fn complement(&self) -> ComplexMatrix {
        &ComplexMatrix::identity(self.d_out) - &ComplexMatrix::sum(&self.projectors, self.d_out, self.d_out)
    }
}

/// `G_k = Σ_r A_kr A_kr†`
pub fn g_operators(m: &Measurement) -> Vec<ComplexMatrix> {
    m.outcomes()
        .iter()
        .map(|g| {
            ComplexMatrix::sum(
                &g.iter().map(|a| a * &a.adjoint()).collect::<Vec<_>>(),
                m.d_out(),
                m.d_out(),
            )
            .hermitian_part()
        })
        .collect()
}

pub fn build_retrodictor(m: &Measurement, tol: &Tolerance) -> Result<ProjectiveRetrodictor> {
    let report = check_perfect(m, tol);
    if !report.retrodictable {
        return Err(Error::NotPerfectlyRetrodictable {
            residual: report.max_residual,
        });
    }
    let projectors = g_operators(m)
        .iter()
        .map(|g| support_projector(g, tol).map(|p| p.hermitian_part()))
        .collect::<Result<Vec<_>>>()?;
    ProjectiveRetrodictor::new(projectors, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryKind {
    Unitary,
    Isometry,
}

#[derive(Debug, Clone)]
pub struct ProjectiveEquivalence {
    pub is_projective_equivalent: bool,
    /// `S = Σ_k A_k`; an isometry when the measurement passes the perfect check.
    pub u: ComplexMatrix,
    pub kind: IsometryKind,
    pub povm: Povm,
    /// `‖S†S - 1‖_F`
    pub isometry_residual: f64,
    /// `max_k ‖A_k - S Π_k‖_F`
    pub factorisation_residual: f64,
    /// `max_{k,k'} ‖Π_k' Π_k - δ_kk' Π_k‖_F`
    pub projector_residual: f64,
}

/// Tests whether a fine-grained measurement is a projective measurement
/// followed by an isometry, and extracts that isometry as `Σ_k A_k`.
pub fn projective_equivalence(m: &Measurement, tol: &Tolerance) -> Result<ProjectiveEquivalence> {
    let ops = m.fine_operators().ok_or(Error::NotFineGrained)?;
    if m.d_out() < m.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "output dimension {} is smaller than input dimension {}",
            m.d_out(),
            m.d_in()
        )));
    }
    let d = m.d_in();
    let s = ComplexMatrix::sum(ops.iter().copied(), m.d_out(), d);
    let povm = povm_of(m);
    let isometry_residual = (&s.adjoint() * &s).distance(&ComplexMatrix::identity(d));
    let factorisation_residual = ops
        .iter()
        .zip(povm.elements())
        .map(|(a, pi)| a.distance(&(&s * pi)))
        .fold(0.0, f64::max);
    let mut projector_residual: f64 = 0.0;
    for (k, a) in povm.elements().iter().enumerate() {
        for (kp, b) in povm.elements().iter().enumerate() {
            let prod = b * a;
            let r = if k == kp { prod.distance(a) } else { prod.frobenius_norm() };
            projector_residual = projector_residual.max(r);
        }
    }
    let perfect = check_perfect(m, tol).retrodictable;
    let scale = (d as f64).sqrt();
    let is_projective_equivalent = perfect
        && isometry_residual <= tol.eq_residual * scale
        && factorisation_residual <= tol.eq_residual * scale;
    Ok(ProjectiveEquivalence {
        is_projective_equivalent,
        u: s,
        kind: if m.d_out() == d {
            IsometryKind::Unitary
        } else {
            IsometryKind::Isometry
        },
        povm,
        isometry_residual,
        factorisation_residual,
        projector_residual,
    })
}
