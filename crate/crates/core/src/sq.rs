//! The minimum measurement entropy `S_q` over simple product observables.
//!
//! For two factors the minimum is attained by an observable pair adapted
//! to a Schmidt form of the state and equals the Schmidt entropy. For more
//! factors there is no closed form and [`sq_search`] returns an upper bound.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::observables::{self, PointObservable, ProductObservable};
use crate::schmidt::{self, SchmidtForm, DEGENERACY_TOL};
use crate::state::StateVector;

pub use crate::search::{sq_search, SearchOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqResult {
    /// Entropy in nats.
    pub value: f64,
    pub argmin: ProductObservable,
    pub method: Method,
    pub restarts_used: usize,
    pub converged: bool,
    /// Schmidt weights (closed form) or the nonzero outcome probabilities at
    /// the argmin (search), descending.
    pub weights: Vec<f64>,
}

impl Serialize for SqResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            value: f64,
            method: Method,
            weights: &'a [f64],
            restarts_used: usize,
            converged: bool,
        }
        Repr {
            value: self.value,
            method: self.method,
            weights: &self.weights,
            restarts_used: self.restarts_used,
            converged: self.converged,
        }
        .serialize(s)
    }
}

/// A simple product observable `A ⊗ B` whose eigenbases contain the
/// normal-form vectors `φ_l` and `η_l`.
///
/// The remaining eigenvectors complete each basis from a seeded random
/// draw; eigenvalues are `1, 2, …` in column order.
pub fn adapted_pair(form: &SchmidtForm, seed: u64) -> Result<ProductObservable> {
    let (d1, d2) = form.dims();
    let r = form.rank();
    if r > d1.min(d2) {
        return Err(Error::RankExceedsDim { rank: r, dim: d1.min(d2) });
    }
    if form.left_basis.ncols() != r || form.right_basis.ncols() != r {
        return Err(Error::InvalidState("normal-form bases do not match the weights".into()));
    }
    let mut rng = linalg::seeded_rng(seed);
    let left = linalg::complete_basis(&form.left_basis, &mut rng);
    let right = linalg::complete_basis(&form.right_basis, &mut rng);
    Ok(ProductObservable::new(vec![
        PointObservable::from_basis(left)?,
        PointObservable::from_basis(right)?,
    ]))
}

/// Closed-form `S_q` of a bipartite state: the entropy of its Schmidt weights.
pub fn sq_bipartite(state: &StateVector) -> Result<SqResult> {
    let form = schmidt::schmidt(state)?;
    let argmin = adapted_pair(&form, 0)?;
    Ok(SqResult {
        value: form.entropy(),
        argmin,
        method: Method::ClosedForm,
        restarts_used: 0,
        converged: true,
        weights: form.weights,
    })
}

/// Rotates the normal form inside the equal-weight block starting at
/// `block_start`: `φ ← φ·u`, `η ← η·ū`.
///
/// The block spans `u.nrows()` weights, which must agree within the
/// degeneracy tolerance. The represented state is unchanged.
pub fn degenerate_orbit(form: &SchmidtForm, u: &ComplexMatrix, block_start: usize) -> Result<SchmidtForm> {
    let k = u.nrows();
    let end = block_start + k;
    if !u.is_square() || k == 0 {
        return Err(Error::InvalidParameter("block unitary must be square and nonempty".into()));
    }
    if end > form.rank() {
        return Err(Error::NotDegenerate { start: block_start, end });
    }
    let block = &form.weights[block_start..end];
    if block.iter().any(|w| (w - block[0]).abs() > DEGENERACY_TOL) {
        return Err(Error::NotDegenerate { start: block_start, end });
    }
    if !linalg::is_unitary(u) {
        return Err(Error::InvalidParameter("block matrix is not unitary".into()));
    }
    let mut out = form.clone();
    let left = form.left_basis.columns(block_start, k) * u;
    let right = form.right_basis.columns(block_start, k) * u.map(|z| z.conj());
    out.left_basis.columns_mut(block_start, k).copy_from(&left);
    out.right_basis.columns_mut(block_start, k).copy_from(&right);
    Ok(out)
}

/// `S̃(Φ, C ⊗ 1) − (−Σ w_l ln w_l)` for a simple observable `C` on the
/// first factor. Never negative beyond rounding.
pub fn convexity_gap(state: &StateVector, c: &PointObservable) -> Result<f64> {
    if state.n_factors() != 2 {
        return Err(Error::NotBipartite(state.n_factors()));
    }
    let d1 = state.factor_dims()[0];
    if c.dim() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, found: c.dim() });
    }
    if !c.is_simple() {
        return Err(Error::InvalidObservable("convexity gap needs a simple observable".into()));
    }
    let form = schmidt::schmidt(state)?;
    let obs = ProductObservable::new(vec![c.clone(), PointObservable::identity(state.factor_dims()[1])]);
    Ok(observables::s_tilde(state, &obs)? - form.entropy())
}

/// `S̃(Φ, C ⊗ 1)` through the unitary substitution `φ_l = Σ_s u_sl φ̂_s`:
/// outcome `s` has probability `Σ_l w_l |u_sl|²`.
pub fn substitution_entropy(form: &SchmidtForm, c: &PointObservable) -> f64 {
    let u: ComplexMatrix = c.eigenbasis().adjoint() * &form.left_basis;
    let probs: Vec<f64> = (0..u.nrows())
        .map(|s| {
            form.weights
                .iter()
                .enumerate()
                .map(|(l, w)| w * u[(s, l)].norm_sqr())
                .sum()
        })
        .collect();
    crate::schemes::shannon_entropy(&probs)
}

/// `(P_k ⊗ 1)Φ`, `(P_k ⊗ Q_k)Φ`, `(1 ⊗ Q_k)Φ` and `√w_k φ_k ⊗ η_k` for
/// the rank-1 projectors onto column `k` of an adapted pair.
pub fn adapted_projections(
    state: &StateVector,
    form: &SchmidtForm,
    pair: &ProductObservable,
    k: usize,
) -> [linalg::ComplexVector; 4] {
    let (a, b) = (&pair.factors[0], &pair.factors[1]);
    let p = a.projector(&[k]);
    let q = b.projector(&[k]);
    let (d1, d2) = form.dims();
    let id1 = ComplexMatrix::identity(d1, d1);
    let id2 = ComplexMatrix::identity(d2, d2);
    let phi = state.amplitudes();
    let expected = linalg::kron_vec(
        &form.left_basis.column(k).into_owned(),
        &form.right_basis.column(k).into_owned(),
    )
    .scale(form.weights[k].sqrt());
    [
        linalg::kron(&p, &id2) * phi,
        linalg::kron(&p, &q) * phi,
        linalg::kron(&id1, &q) * phi,
        expected,
    ]
}

/// Unit-modulus 1x1 "unitary", handy for rank-1 blocks.
pub fn phase(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, C64::from_polar(1.0, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, seeded_rng, ComplexVector};
    use crate::observables::s_tilde;

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = ComplexVector::from_vec(vec![C64::new(h, 0.0), C64::default(), C64::default(), C64::new(h, 0.0)]);
        StateVector::new(vec![2, 2], amps).unwrap()
    }

    fn diag_07_03() -> StateVector {
        let amps = ComplexVector::from_vec(vec![
            C64::new(0.7f64.sqrt(), 0.0),
            C64::default(),
            C64::default(),
            C64::new(0.3f64.sqrt(), 0.0),
        ]);
        StateVector::new(vec![2, 2], amps).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let mut rng = seeded_rng(1);
        let prod = StateVector::random_product(&[3, 4], &mut rng).unwrap();
        assert!(sq_bipartite(&prod).unwrap().value.abs() < 1e-12);
        let b = sq_bipartite(&bell()).unwrap();
        assert!((b.value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(b.method, Method::ClosedForm);
        assert!((sq_bipartite(&diag_07_03()).unwrap().value - 0.6108643020548935).abs() < 1e-13);
        let three = StateVector::product_basis(&[2, 2, 2], &[0, 0, 0]).unwrap();
        assert_eq!(sq_bipartite(&three).unwrap_err(), Error::NotBipartite(3));
    }

    #[test]
    fn adapted_pairs_attain_the_closed_form() {
        let form = schmidt::schmidt(&bell()).unwrap();
        let pair = adapted_pair(&form, 3).unwrap();
        assert!(pair.is_simple());
        assert!((s_tilde(&bell(), &pair).unwrap() - 2f64.ln()).abs() < 1e-12);

        let mut rng = seeded_rng(2);
        let prod = StateVector::random_product(&[3, 2], &mut rng).unwrap();
        let pair = adapted_pair(&schmidt::schmidt(&prod).unwrap(), 4).unwrap();
        assert!(s_tilde(&prod, &pair).unwrap().abs() < 1e-12);

        let pair = adapted_pair(&schmidt::schmidt(&diag_07_03()).unwrap(), 5).unwrap();
        assert!((s_tilde(&diag_07_03(), &pair).unwrap() - 0.6108643020548935).abs() < 1e-12);
    }

    #[test]
    fn adapted_pair_rejects_corrupted_form() {
        let mut form = schmidt::schmidt(&bell()).unwrap();
        form.weights = vec![0.25; 4];
        form.left_basis = ComplexMatrix::identity(2, 4);
        form.right_basis = ComplexMatrix::identity(2, 4);
        assert_eq!(adapted_pair(&form, 0).unwrap_err(), Error::RankExceedsDim { rank: 4, dim: 2 });
    }

    #[test]
    fn bell_orbit_under_hadamard() {
        let form = schmidt::schmidt(&bell()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = ComplexMatrix::from_row_slice(2, 2, &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)]);
        let rotated = degenerate_orbit(&form, &had, 0).unwrap();
        assert!(rotated.reconstruction_error(&bell()) <= 1e-10);
        assert!(linalg::max_abs_diff(&rotated.left_basis, &form.left_basis) > 0.1);
        let same = degenerate_orbit(&form, &ComplexMatrix::identity(2, 2), 0).unwrap();
        assert_eq!(same, form);
    }

    #[test]
    fn orbit_requires_equal_weights() {
        let form = schmidt::schmidt(&diag_07_03()).unwrap();
        let u = haar_unitary(2, 1);
        assert_eq!(degenerate_orbit(&form, &u, 0).unwrap_err(), Error::NotDegenerate { start: 0, end: 2 });
        assert!(degenerate_orbit(&form, &phase(0.3), 1).is_ok());
        assert!(degenerate_orbit(&form, &phase(0.3), 2).is_err());
    }

    #[test]
    fn bell_orbit_random_unitaries() {
        let form = schmidt::schmidt(&bell()).unwrap();
        for seed in 0..100 {
            let u = haar_unitary(2, seed);
            let rotated = degenerate_orbit(&form, &u, 0).unwrap();
            assert!(rotated.reconstruction_error(&bell()) <= 1e-10);
            let pair = adapted_pair(&rotated, seed).unwrap();
            assert!((s_tilde(&bell(), &pair).unwrap() - 2f64.ln()).abs() <= 1e-12);
        }
    }

    #[test]
    fn convexity_gap_zero_for_adapted_and_permuted() {
        let mut rng = seeded_rng(5);
        let phi = StateVector::random(&[3, 3], &mut rng).unwrap();
        let form = schmidt::schmidt(&phi).unwrap();
        let pair = adapted_pair(&form, 0).unwrap();
        assert!(convexity_gap(&phi, &pair.factors[0]).unwrap().abs() <= 1e-12);
        // permuting eigenvectors leaves the outcome distribution a permutation
        let b = pair.factors[0].eigenbasis();
        let perm = ComplexMatrix::from_columns(&[b.column(2), b.column(0), b.column(1)]);
        let c = PointObservable::from_basis(perm).unwrap();
        assert!(convexity_gap(&phi, &c).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn convexity_gap_matches_substitution_formula() {
        let mut rng = seeded_rng(6);
        for seed in 0..100 {
            let phi = StateVector::random(&[4, 3], &mut rng).unwrap();
            let c = PointObservable::from_basis(haar_unitary(4, seed)).unwrap();
            let form = schmidt::schmidt(&phi).unwrap();
            let gap = convexity_gap(&phi, &c).unwrap();
            let via_u = substitution_entropy(&form, &c) - form.entropy();
            assert!((gap - via_u).abs() < 1e-12);
            assert!(gap >= -1e-10);
        }
    }

    #[test]
    fn convexity_gap_errors() {
        let three = StateVector::product_basis(&[2, 2, 2], &[0, 0, 0]).unwrap();
        let c = PointObservable::computational(2);
        assert_eq!(convexity_gap(&three, &c).unwrap_err(), Error::NotBipartite(3));
        let c3 = PointObservable::computational(3);
        assert!(matches!(convexity_gap(&bell(), &c3), Err(Error::DimensionMismatch { .. })));
        assert!(convexity_gap(&bell(), &PointObservable::identity(2)).is_err());
    }

    #[test]
    fn projector_identity() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let phi = StateVector::random(&[3, 4], &mut rng).unwrap();
            let form = schmidt::schmidt(&phi).unwrap();
            let pair = adapted_pair(&form, 1).unwrap();
            for k in 0..form.rank() {
                let [pk1, pkqk, qk1, expect] = adapted_projections(&phi, &form, &pair, k);
                assert!((&pk1 - &pkqk).norm() <= 1e-10);
                assert!((&qk1 - &pkqk).norm() <= 1e-10);
                assert!((&pk1 - &expect).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn result_json_shape() {
        let r = sq_bipartite(&bell()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 5);
        assert_eq!(v["method"], "closed_form");
        assert_eq!(v["restarts_used"], 0);
        assert_eq!(v["converged"], true);
    }
}
