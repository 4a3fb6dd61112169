//! Construction of perfectly retrodictable measurements realising a POVM.
//!
//! Given `Π_k = Σ_r π_kr |π_kr⟩⟨π_kr|` and orthonormal `|x_k⟩` in the output
//! space, the Kraus operators `A_kr = √π_kr |x_k⟩⟨π_kr|` reproduce the POVM and
//! send every input for outcome `k` onto `|x_k⟩`. This needs `N ≤ d_out`
//! orthonormal labels, which is also necessary.

use crate::error::{Error, Result};
use crate::linalg::{basis_vector, herm_eig, inner, ComplexMatrix, Tolerance, C64};
use crate::measurement::{Measurement, Povm};

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub measurement: Measurement,
    /// Output label `|x_k⟩` for each outcome.
    pub x_basis: Vec<Vec<C64>>,
    /// Retained eigenpairs `(π_kr, |π_kr⟩)` of each POVM element.
    pub spectral_data: Vec<Vec<(f64, Vec<C64>)>>,
}

fn check_basis(basis: &[Vec<C64>], count: usize, dim: usize, tol: &Tolerance) -> Result<()> {
    if basis.len() < count {
        return Err(Error::BadBasis(format!(
            "{} vectors supplied, {count} required",
            basis.len()
        )));
    }
    for (i, a) in basis.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::BadBasis(format!("vector {i} has dimension {}, expected {dim}", a.len())));
        }
        for (j, b) in basis.iter().enumerate().take(i + 1) {
            let target = if i == j { 1.0 } else { 0.0 };
            if (inner(b, a) - C64::new(target, 0.0)).norm() > tol.eq_residual {
                return Err(Error::BadBasis(format!("vectors {j} and {i} are not orthonormal")));
            }
        }
    }
    Ok(())
}

fn resolve_basis(basis: Option<&[Vec<C64>]>, count: usize, dim: usize, tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    match basis {
        Some(b) => {
            check_basis(b, count, dim, tol)?;
            Ok(b.to_vec())
        }
        None => Ok((0..count).map(|i| basis_vector(dim, i)).collect()),
    }
}

/// Eigenpairs of `Π` whose eigenvalue exceeds `rank_rel` times the largest.
fn retained_spectrum(pi: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<(f64, Vec<C64>)>> {
    let eig = herm_eig(pi, tol)?;
    let lmax = eig.values[0];
    Ok(eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0 && l > tol.rank_rel * lmax)
        .map(|(i, &l)| (l, eig.vector(i)))
        .collect())
}

/// Builds a perfectly retrodictable measurement in the equivalence class of `p`.
///
/// `x_basis` defaults to the first `N` standard basis vectors of `C^{d_out}`.
pub fn synthesize(
    p: &Povm,
    d_out: usize,
    x_basis: Option<&[Vec<C64>]>,
    tol: &Tolerance,
) -> Result<SynthesisResult> {
    let n = p.len();
    if n > d_out {
        return Err(Error::TooManyOutcomes { outcomes: n, d_out });
    }
    let mut x_basis = resolve_basis(x_basis, n, d_out, tol)?;
    x_basis.truncate(n);
    let spectral_data = p
        .elements()
        .iter()
        .map(|pi| retained_spectrum(pi, tol))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = spectral_data
        .iter()
        .zip(&x_basis)
        .map(|(kept, x)| {
            kept.iter()
                .map(|(l, v)| ComplexMatrix::outer(x, v).scale_real(l.sqrt()))
                .collect()
        })
        .collect();
    let measurement = Measurement::new(outcomes, tol)?;
    Ok(SynthesisResult {
        measurement,
        x_basis,
        spectral_data,
    })
}

/// Factorisation `Π_k = B_k† B_k` with `B_k = Σ_r √π_kr |x_r⟩⟨π_kr|`.
///
/// The basis must supply `max(N, d_in)` orthonormal vectors of `C^{d_out}`;
/// the first `d_in` label the eigenvector index `r`.
pub fn b_factor(
    p: &Povm,
    d_out: usize,
    x_basis: Option<&[Vec<C64>]>,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    let n = p.len();
    let d = p.d();
    if n > d_out {
        return Err(Error::TooManyOutcomes { outcomes: n, d_out });
    }
    if d > d_out {
        return Err(Error::DimensionMismatch(format!(
            "output dimension {d_out} is smaller than input dimension {d}"
        )));
    }
    let basis = resolve_basis(x_basis, n.max(d), d_out, tol)?;
    p.elements()
        .iter()
        .map(|pi| {
            let kept = retained_spectrum(pi, tol)?;
            let mut b = ComplexMatrix::zeros(d_out, d);
            for (r, (l, v)) in kept.iter().enumerate() {
                b = &b + &ComplexMatrix::outer(&basis[r], v).scale_real(l.sqrt());
            }
            Ok(b)
        })
        .collect()
}

/// Kraus operators `A_kr = |x_k⟩⟨x_r| B_k` induced by the copy-and-swap
/// dilation of the measurement `{B_k}`; vanishing terms are dropped.
pub fn dilated_kraus(bs: &[ComplexMatrix], x_basis: &[Vec<C64>], tol: &Tolerance) -> Result<Measurement> {
    let Some(first) = bs.first() else {
        return Err(Error::InvalidMeasurement("no operators supplied".into()));
    };
    let d_out = first.rows();
    check_basis(x_basis, bs.len(), d_out, tol)?;
    let scale = bs.iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    let outcomes = bs
        .iter()
        .zip(x_basis)
        .map(|(b, xk)| {
            x_basis
                .iter()
                .map(|xr| &ComplexMatrix::outer(xk, xr) * b)
                .filter(|a| a.frobenius_norm() > tol.rank_rel * scale)
                .collect()
        })
        .collect();
    Measurement::new(outcomes, tol)
}
