//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; tensor-product spaces use
//! row-major multi-index ordering, so the last factor varies fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance for flagging a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest entry of `|U†U − I|`.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &ComplexMatrix::identity(u.nrows(), u.ncols()))
}

pub fn is_unitary(u: &ComplexMatrix) -> bool {
    unitarity_error(u) <= UNITARY_TOL
}

/// Largest entry of `|B†B − I|` for the columns of `b`.
pub fn orthonormality_error(b: &ComplexMatrix) -> f64 {
    let gram = b.adjoint() * b;
    max_abs_diff(&gram, &ComplexMatrix::identity(b.ncols(), b.ncols()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Kronecker product with the first operand as the slow index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c64<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar-distributed unitary of size `dim`, drawn with the given RNG.
///
/// QR of a complex Ginibre matrix, with each column of Q multiplied by the
/// phase of the matching diagonal entry of R so the result is Haar rather
/// than biased by the QR sign convention.
pub fn haar_unitary_with<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "unitary dimension must be positive");
    let z = ginibre(dim, dim, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Seeded Haar-random unitary. Same `(dim, seed)` gives bit-identical output.
pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    haar_unitary_with(dim, &mut rng)
}

/// Random Hermitian matrix with entries bounded by 1 in modulus.
pub fn random_hermitian<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let h = (&g + g.adjoint()).scale(0.5);
    let m = max_abs(&h);
    if m > 0.0 {
        h.unscale(m)
    } else {
        h
    }
}

/// `exp(−i·H·t)` for Hermitian `h`, through its eigendecomposition.
pub fn hermitian_evolution(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases = ComplexVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    );
    let v = &eig.eigenvectors;
    v * ComplexMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Completes the orthonormal columns of `partial` to a full `dim × dim`
/// unitary, filling the remainder from random Gaussian vectors projected
/// onto the orthogonal complement.
pub fn complete_basis<R: rand::Rng + ?Sized>(partial: &ComplexMatrix, rng: &mut R) -> ComplexMatrix {
    let dim = partial.nrows();
    let mut cols: Vec<ComplexVector> = partial.column_iter().map(|c| c.into_owned()).collect();
    while cols.len() < dim {
        let mut v = ComplexVector::from_fn(dim, |_, _| gaussian_c64(rng));
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v.unscale(n));
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// Applies `op` to the tensor factors listed in `sites` of a row-major
/// amplitude vector with factor dimensions `dims`.
///
/// `op` acts on the ordered product space of `sites` (first listed site is
/// the slow index).
pub fn apply_on_sites(
    amplitudes: &ComplexVector,
    dims: &[usize],
    sites: &[usize],
    op: &ComplexMatrix,
) -> Result<ComplexVector> {
    let total: usize = dims.iter().product();
    if amplitudes.len() != total {
        return Err(Error::DimensionMismatch { expected: total, found: amplitudes.len() });
    }
    for (k, &s) in sites.iter().enumerate() {
        if s >= dims.len() || sites[..k].contains(&s) {
            return Err(Error::InvalidParameter(format!("bad site list {sites:?}")));
        }
    }
    let local: usize = sites.iter().map(|&s| dims[s]).product();
    if op.nrows() != local || op.ncols() != local {
        return Err(Error::DimensionMismatch { expected: local, found: op.nrows() });
    }

    let strides = row_major_strides(dims);
    // offsets of every local multi-index relative to the base offset
    let mut local_offsets = Vec::with_capacity(local);
    for flat in 0..local {
        let mut rem = flat;
        let mut off = 0;
        for &s in sites.iter().rev() {
            off += (rem % dims[s]) * strides[s];
            rem /= dims[s];
        }
        local_offsets.push(off);
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !sites.contains(k)).collect();
    let rest_count: usize = rest.iter().map(|&k| dims[k]).product();

    let mut out = amplitudes.clone();
    let mut buf = ComplexVector::zeros(local);
    for flat in 0..rest_count {
        let mut rem = flat;
        let mut base = 0;
        for &k in rest.iter().rev() {
            base += (rem % dims[k]) * strides[k];
            rem /= dims[k];
        }
        for (i, &off) in local_offsets.iter().enumerate() {
            buf[i] = amplitudes[base + off];
        }
        let res = op * &buf;
        for (i, &off) in local_offsets.iter().enumerate() {
            out[base + off] = res[i];
        }
    }
    Ok(out)
}

pub fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}
