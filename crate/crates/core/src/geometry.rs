//! Haar-distributed random subspace embeddings.
//!
//! A [`SubspaceBasis`] holds a `d x q` matrix `U` with orthonormal columns. The
//! embedding used by the optimizer is `Q = sqrt(d/q) * U`, which makes
//! `E ||Q^T v||^2 = ||v||^2` for any fixed `v`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative norm below which a projected complement sample is redrawn.
const COMPLEMENT_REJECT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    u: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps a frame whose columns are assumed orthonormal.
    pub fn from_orthonormal(u: DMatrix<f64>) -> Result<Self> {
        let (d, q) = u.shape();
        if q == 0 || q > d {
            return Err(Error::Dimension(format!("need 1 <= q <= d, got q = {q}, d = {d}")));
        }
        Ok(Self { u })
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// `sqrt(d/q)`.
    pub fn scale(&self) -> f64 {
        (self.ambient_dim() as f64 / self.dim() as f64).sqrt()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// The scaled embedding `Q = sqrt(d/q) U`.
    pub fn embedding(&self) -> DMatrix<f64> {
        &self.u * self.scale()
    }

    /// Maps a subspace step to the ambient displacement `Q s`.
    pub fn lift(&self, s: &DVector<f64>) -> DVector<f64> {
        assert_eq!(s.len(), self.dim(), "step dimension must match the subspace");
        (&self.u * s) * self.scale()
    }

    /// Largest entrywise deviation of `U^T U` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.u.transpose() * &self.u;
        let q = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..q {
            for j in 0..q {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Draws the first `q` columns of a Haar-distributed `d x d` orthogonal matrix.
///
/// A Gaussian `d x q` matrix is QR-factorized and each column of the
/// orthogonal factor is multiplied by the sign of the matching diagonal entry
/// of `R`, which makes the result exactly Haar on the Stiefel manifold.
pub fn sample_haar_basis<R: Rng + ?Sized>(d: usize, q: usize, rng: &mut R) -> Result<SubspaceBasis> {
    if q == 0 || q > d {
        return Err(Error::Dimension(format!("need 1 <= q <= d, got q = {q}, d = {d}")));
    }
    let gaussian = DMatrix::<f64>::from_fn(d, q, |_, _| rng.sample(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..q {
        if r[(j, j)] < 0.0 {
            u.column_mut(j).neg_mut();
        }
    }
    Ok(SubspaceBasis { u })
}

/// Appends one column drawn uniformly from the unit sphere of the orthogonal
/// complement of `span(U)`. The existing columns are copied unchanged.
pub fn extend_basis<R: Rng + ?Sized>(basis: &SubspaceBasis, rng: &mut R) -> Result<SubspaceBasis> {
    let d = basis.ambient_dim();
    let q = basis.dim();
    if q >= d {
        return Err(Error::CannotExtend { d });
    }
    let u = &basis.u;
    let mu = loop {
        let g = DVector::<f64>::from_fn(d, |_, _| rng.sample(StandardNormal));
        // two Gram-Schmidt passes keep |U^T mu| at round-off level
        let mut w = &g - u * (u.transpose() * &g);
        w -= u * (u.transpose() * &w);
        let norm = w.norm();
        if norm >= COMPLEMENT_REJECT * g.norm() && norm > 0.0 {
            break w / norm;
        }
    };
    let mut extended = u.clone().insert_column(q, 0.0);
    extended.column_mut(q).copy_from(&mu);
    Ok(SubspaceBasis { u: extended })
}

/// `||Q^T v|| / ||v||` for the scaled embedding of `basis`.
pub fn alignment_ratio(basis: &SubspaceBasis, v: &DVector<f64>) -> Result<f64> {
    if v.len() != basis.ambient_dim() {
        return Err(Error::Dimension(format!(
            "vector has length {}, basis is {}-dimensional",
            v.len(),
            basis.ambient_dim()
        )));
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((basis.u.transpose() * v).norm() * basis.scale() / norm)
}
