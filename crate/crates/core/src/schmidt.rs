//! Schmidt (normal-form) decomposition of bipartite pure states.

use std::ops::Range;

use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::state::StateVector;

/// Squared singular values below this are dropped from the form.
pub const WEIGHT_CUTOFF: f64 = 1e-12;
/// Weights closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `Φ = Σ_l √w_l φ_l ⊗ η_l` with descending weights.
///
/// `left_basis` is `d1 × r` and `right_basis` is `d2 × r`, where `r` is the
/// Schmidt rank; column `l` of each holds `φ_l` and `η_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    pub weights: Vec<f64>,
    pub left_basis: ComplexMatrix,
    pub right_basis: ComplexMatrix,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left_basis.nrows(), self.right_basis.nrows())
    }

    /// Rebuilds the amplitude vector `Σ √w_l φ_l ⊗ η_l`.
    pub fn reconstruct(&self) -> ComplexVector {
        let (d1, d2) = self.dims();
        let mut amps = ComplexVector::zeros(d1 * d2);
        for (l, &w) in self.weights.iter().enumerate() {
            let term = linalg::kron_vec(
                &self.left_basis.column(l).into_owned(),
                &self.right_basis.column(l).into_owned(),
            );
            amps += term.scale(w.sqrt());
        }
        amps
    }

    /// Max-norm distance between the reconstruction and `state`.
    pub fn reconstruction_error(&self, state: &StateVector) -> f64 {
        (self.reconstruct() - state.amplitudes()).camax()
    }

    /// `−Σ w_l ln w_l` in nats.
    pub fn entropy(&self) -> f64 {
        crate::schemes::shannon_entropy(&self.weights)
    }

    /// Maximal runs of equal weights (within [`DEGENERACY_TOL`]).
    pub fn degenerate_blocks(&self) -> Vec<Range<usize>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=self.weights.len() {
            if i == self.weights.len() || (self.weights[i] - self.weights[start]).abs() > DEGENERACY_TOL {
                blocks.push(start..i);
                start = i;
            }
        }
        blocks
    }

    /// Checks the structural invariants of a normal form.
    pub fn validate(&self) -> Result<()> {
        let r = self.rank();
        let (d1, d2) = self.dims();
        if self.left_basis.ncols() != r || self.right_basis.ncols() != r {
            return Err(Error::InvalidState("basis column count differs from the weight count".into()));
        }
        if r > d1.min(d2) {
            return Err(Error::RankExceedsDim { rank: r, dim: d1.min(d2) });
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| !(0.0..=1.0 + 1e-12).contains(&w)) {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        if linalg::orthonormality_error(&self.left_basis) > 1e-10
            || linalg::orthonormality_error(&self.right_basis) > 1e-10
        {
            return Err(Error::InvalidState("normal-form bases are not orthonormal".into()));
        }
        Ok(())
    }
}

/// Normal form of a bipartite state, from the SVD of its coefficient matrix.
///
/// With `C = U Σ V†`, `c_ik = Σ_l σ_l U_il conj(V_kl)`, so `φ_l` is column
/// `l` of `U` and `η_l` is the conjugate of column `l` of `V`.
pub fn schmidt(state: &StateVector) -> Result<SchmidtForm> {
    let coeffs = state.coefficient_matrix()?;
    let svd = coeffs.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i].powi(2) > WEIGHT_CUTOFF)
        .collect();

    let raw: Vec<f64> = kept.iter().map(|&i| svd.singular_values[i].powi(2)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let left_cols: Vec<ComplexVector> = kept.iter().map(|&i| u.column(i).into_owned()).collect();
    // row i of V† is conj(V[:, i])ᵀ, which is exactly η_i
    let right_cols: Vec<ComplexVector> = kept
        .iter()
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();

    Ok(SchmidtForm {
        weights,
        left_basis: ComplexMatrix::from_columns(&left_cols),
        right_basis: ComplexMatrix::from_columns(&right_cols),
    })
}

impl Serialize for SchmidtForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            weights: &'a [f64],
            rank: usize,
            left_basis: Vec<[f64; 2]>,
            right_basis: Vec<[f64; 2]>,
        }
        let flat = |m: &ComplexMatrix| m.iter().map(|c: &C64| [c.re, c.im]).collect();
        Repr {
            weights: &self.weights,
            rank: self.rank(),
            left_basis: flat(&self.left_basis),
            right_basis: flat(&self.right_basis),
        }
        .serialize(s)
    }
}
