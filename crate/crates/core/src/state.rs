use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};

/// Tolerance on `| ‖Φ‖ − 1 |` accepted when constructing a state.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized pure state on a tensor product of finite-dimensional factors.
///
/// Amplitudes are stored in row-major multi-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    factor_dims: Vec<usize>,
    amplitudes: ComplexVector,
}

impl StateVector {
    /// Builds a state, rejecting it unless the norm is 1 within [`NORM_TOL`].
    pub fn new(factor_dims: Vec<usize>, amplitudes: ComplexVector) -> Result<Self> {
        let total = checked_total(&factor_dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { factor_dims, amplitudes })
    }

    /// Builds a state after rescaling `amplitudes` to unit norm.
    pub fn normalized(factor_dims: Vec<usize>, amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite amplitude vector".into()));
        }
        Self::new(factor_dims, amplitudes.unscale(norm))
    }

    /// `e_index` in a single factor of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= dim {dim}")));
        }
        let mut amps = ComplexVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self::new(vec![dim], amps)
    }

    /// Product basis state `e_{i1} ⊗ … ⊗ e_{in}`.
    pub fn product_basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        if dims.len() != indices.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: indices.len() });
        }
        let mut state = Self::basis(dims[0], indices[0])?;
        for (&d, &i) in dims.iter().zip(indices).skip(1) {
            state = state.tensor(&Self::basis(d, i)?);
        }
        Ok(state)
    }

    /// Haar-random pure state on the joint space.
    pub fn random<R: rand::Rng + ?Sized>(factor_dims: &[usize], rng: &mut R) -> Result<Self> {
        let total = checked_total(factor_dims)?;
        let amps = ComplexVector::from_fn(total, |_, _| linalg::gaussian_c64(rng));
        Self::normalized(factor_dims.to_vec(), amps)
    }

    /// Product of independent Haar-random single-factor states.
    pub fn random_product<R: rand::Rng + ?Sized>(factor_dims: &[usize], rng: &mut R) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidState("no factors".into()));
        }
        let mut state = Self::random(&factor_dims[..1], rng)?;
        for &d in &factor_dims[1..] {
            state = state.tensor(&Self::random(&[d], rng)?);
        }
        Ok(state)
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Tensor product `self ⊗ other`; `self` supplies the leading factors.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        StateVector {
            factor_dims: dims,
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// `U Φ` for a unitary on the full joint space.
    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<StateVector> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(StateVector { factor_dims: self.factor_dims.clone(), amplitudes: u * &self.amplitudes })
    }

    /// Applies `op` to the listed factors; see [`linalg::apply_on_sites`].
    pub fn apply_local(&self, sites: &[usize], op: &ComplexMatrix) -> Result<StateVector> {
        let amplitudes = linalg::apply_on_sites(&self.amplitudes, &self.factor_dims, sites, op)?;
        Ok(StateVector { factor_dims: self.factor_dims.clone(), amplitudes })
    }

    /// Coefficient matrix `c_ik` of a bipartite state (`d1 × d2`).
    pub fn coefficient_matrix(&self) -> Result<ComplexMatrix> {
        if self.n_factors() != 2 {
            return Err(Error::NotBipartite(self.n_factors()));
        }
        let (d1, d2) = (self.factor_dims[0], self.factor_dims[1]);
        Ok(ComplexMatrix::from_fn(d1, d2, |i, k| self.amplitudes[i * d2 + k]))
    }

    /// Regroups the factors into a bipartition `sites | rest` and returns the
    /// equivalent two-factor state.
    pub fn bipartition(&self, sites: &[usize]) -> Result<StateVector> {
        let n = self.n_factors();
        if sites.is_empty() || sites.len() >= n || sites.iter().any(|&s| s >= n) {
            return Err(Error::InvalidParameter(format!("bad bipartition {sites:?} of {n} factors")));
        }
        let rest: Vec<usize> = (0..n).filter(|k| !sites.contains(k)).collect();
        let order: Vec<usize> = sites.iter().chain(rest.iter()).copied().collect();
        let strides = linalg::row_major_strides(&self.factor_dims);
        let new_dims: Vec<usize> = order.iter().map(|&k| self.factor_dims[k]).collect();
        let mut amps = ComplexVector::zeros(self.dim());
        for (flat, amp) in amps.iter_mut().enumerate() {
            let mut rem = flat;
            let mut old = 0;
            for (pos, &k) in order.iter().enumerate().rev() {
                old += (rem % new_dims[pos]) * strides[k];
                rem /= new_dims[pos];
            }
            *amp = self.amplitudes[old];
        }
        let left: usize = sites.iter().map(|&k| self.factor_dims[k]).product();
        let right = self.dim() / left;
        Ok(StateVector { factor_dims: vec![left, right], amplitudes: amps })
    }
}

/// Pure single-particle and joint states are capped at this many amplitudes.
pub const MAX_AMPLITUDES: usize = 1 << 20;

fn checked_total(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState(format!("factor dims {dims:?} must be positive")));
    }
    let total = dims.iter().try_fold(1u128, |acc, &d| {
        let next = acc * d as u128;
        (next <= MAX_AMPLITUDES as u128).then_some(next)
    });
    match total {
        Some(t) => Ok(t as usize),
        None => Err(Error::StateTooLarge {
            amplitudes: dims.iter().map(|&d| d as u128).fold(1u128, |a, d| a.saturating_mul(d)),
            cap: MAX_AMPLITUDES,
        }),
    }
}

/// On-disk form: `{"factor_dims": [...], "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub factor_dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&StateVector> for StateFile {
    fn from(s: &StateVector) -> Self {
        StateFile {
            factor_dims: s.factor_dims.clone(),
            amplitudes: s.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<StateFile> for StateVector {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        let amps = ComplexVector::from_iterator(
            f.amplitudes.len(),
            f.amplitudes.iter().map(|&[re, im]| C64::new(re, im)),
        );
        StateVector::new(f.factor_dims, amps)
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = StateFile::deserialize(d)?;
        StateVector::try_from(file).map_err(serde::de::Error::custom)
    }
}
