//! Random generators for matrices, states, POVMs and measurements.
//!
//! All generators take an explicit RNG so callers control reproducibility.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{psd_inv_sqrt, ComplexMatrix, Tolerance, C64};
use crate::measurement::{Measurement, Povm};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unit vector.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        if let Some(u) = crate::linalg::normalized(&v) {
            return u;
        }
    }
}

/// Haar-distributed unitary (QR of a Gaussian matrix with the phases of `R`
/// absorbed into `Q`).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng).to_na();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let q = ComplexMatrix::from_na(&q);
    ComplexMatrix::from_fn(d, d, |i, j| {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

/// Hermitian matrix `W diag(spectrum) W†` with Haar-random `W`; returns `(H, W)`.
pub fn random_hermitian_spectrum<R: Rng + ?Sized>(
    spectrum: &[f64],
    rng: &mut R,
) -> (ComplexMatrix, ComplexMatrix) {
    let w = random_unitary(spectrum.len(), rng);
    let h = &(&w * &ComplexMatrix::diag_real(spectrum)) * &w.adjoint();
    (h.hermitian_part(), w)
}

/// Random PSD matrix `G G†` with `G` of shape `d × rank`.
pub fn random_psd<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, rank, rng);
    (&g * &g.adjoint()).hermitian_part()
}

/// Random `n`-element POVM on `C^d`: draw PSD `Q_k`, set `S = Σ Q_k` and
/// `Π_k = S^{-1/2} Q_k S^{-1/2}`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Povm {
    let tol = Tolerance::default();
    loop {
        let qs: Vec<ComplexMatrix> = (0..n).map(|_| random_psd(d, d, rng)).collect();
        let s = ComplexMatrix::sum(&qs, d, d);
        let Ok(w) = psd_inv_sqrt(&s, &tol) else { continue };
        let elements = qs.iter().map(|q| (&(&w * q) * &w).hermitian_part()).collect();
        if let Ok(p) = Povm::new(elements, &tol) {
            return p;
        }
    }
}

/// Random projective POVM with `n ≤ d` nonzero orthogonal projectors: the
/// columns of a random unitary are split into `n` nonempty consecutive groups.
pub fn random_projective_povm<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Povm {
    assert!(n >= 1 && n <= d, "need 1 <= n <= d");
    let u = random_unitary(d, rng);
    // choose group sizes: each at least one, remainder spread at random
    let mut sizes = vec![1usize; n];
    for _ in n..d {
        let k = rng.random_range(0..n);
        sizes[k] += 1;
    }
    let mut start = 0;
    let elements = sizes
        .iter()
        .map(|&s| {
            let mut p = ComplexMatrix::zeros(d, d);
            for j in start..start + s {
                p = &p + &ComplexMatrix::projector(&u.column(j));
            }
            start += s;
            p.hermitian_part()
        })
        .collect();
    Povm::new(elements, &Tolerance::default()).expect("projectors resolve the identity")
}

/// Random fine-grained measurement `A_k = G_k S^{-1/2}` with `S = Σ G_k† G_k`.
pub fn random_measurement<R: Rng + ?Sized>(d_in: usize, d_out: usize, n: usize, rng: &mut R) -> Measurement {
    random_coarse_measurement(d_in, d_out, &vec![1; n], rng)
}

/// Random measurement whose outcome `k` has `sizes[k]` Kraus operators.
pub fn random_coarse_measurement<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    sizes: &[usize],
    rng: &mut R,
) -> Measurement {
    let groups: Vec<Vec<ComplexMatrix>> = sizes
        .iter()
        .map(|&s| (0..s).map(|_| random_matrix(d_out, d_in, rng)).collect())
        .collect();
    normalize_kraus(groups).expect("random Kraus operators are generically complete after normalisation")
}

/// Rescales arbitrary operators `G_kr` into a valid measurement
/// `A_kr = G_kr S^{-1/2}`, `S = Σ G_kr† G_kr`. Right multiplication by an
/// invertible matrix preserves linear (in)dependence and (non)singularity.
pub fn normalize_kraus(groups: Vec<Vec<ComplexMatrix>>) -> crate::Result<Measurement> {
    let tol = Tolerance::default();
    let d_in = groups[0][0].cols();
    let s = ComplexMatrix::sum(
        &groups
            .iter()
            .flatten()
            .map(|g| &g.adjoint() * g)
            .collect::<Vec<_>>(),
        d_in,
        d_in,
    )
    .hermitian_part();
    let w = psd_inv_sqrt(&s, &tol)?;
    let groups = groups
        .into_iter()
        .map(|g| g.iter().map(|a| a * &w).collect())
        .collect();
    Measurement::new(groups, &tol)
}
