//! Point-spectrum observables, tensor-product observables, and the
//! schemes and mixtures produced by measuring them.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::schemes::Scheme;
use crate::state::StateVector;

/// Eigenvalues closer than this share an eigenspace.
pub const EIGENVALUE_TOL: f64 = 1e-9;
/// Tolerance for commutators and subspace containment in the fineness order.
pub const FINENESS_TOL: f64 = 1e-9;
/// Mixture components with smaller probability are dropped.
pub const MIXTURE_CUTOFF: f64 = 1e-12;

/// Self-adjoint operator `Σ a_i |φ_i⟩⟨φ_i|` with orthonormal eigenbasis
/// columns `φ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointObservable {
    eigenvalues: Vec<f64>,
    eigenbasis: ComplexMatrix,
}

impl PointObservable {
    pub fn new(eigenvalues: Vec<f64>, eigenbasis: ComplexMatrix) -> Result<Self> {
        let d = eigenvalues.len();
        if d == 0 {
            return Err(Error::InvalidObservable("empty spectrum".into()));
        }
        if eigenbasis.nrows() != d || eigenbasis.ncols() != d {
            return Err(Error::InvalidObservable(format!(
                "{d} eigenvalues but a {}x{} eigenbasis",
                eigenbasis.nrows(),
                eigenbasis.ncols()
            )));
        }
        if eigenvalues.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidObservable("non-finite eigenvalue".into()));
        }
        let err = linalg::orthonormality_error(&eigenbasis);
        if err > linalg::UNITARY_TOL {
            return Err(Error::InvalidObservable(format!("eigenbasis off orthonormal by {err:e}")));
        }
        Ok(Self { eigenvalues, eigenbasis })
    }

    /// Simple observable with eigenvalues `1, 2, …` on the given basis.
    pub fn from_basis(basis: ComplexMatrix) -> Result<Self> {
        let eigenvalues = (1..=basis.ncols()).map(|k| k as f64).collect();
        Self::new(eigenvalues, basis)
    }

    /// Simple observable diagonal in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self::from_basis(ComplexMatrix::identity(dim, dim)).expect("identity basis is orthonormal")
    }

    /// The unit operator: one eigenvalue, fully degenerate.
    pub fn identity(dim: usize) -> Self {
        Self::new(vec![1.0; dim], ComplexMatrix::identity(dim, dim)).expect("identity basis is orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    /// Every eigenvalue has a one-dimensional eigenspace.
    pub fn is_simple(&self) -> bool {
        self.eigenspaces().len() == self.dim()
    }

    /// Column indices of each eigenspace, ordered by their first column.
    pub fn eigenspaces(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &a) in self.eigenvalues.iter().enumerate() {
            match groups
                .iter_mut()
                .find(|g| (self.eigenvalues[g[0]] - a).abs() <= EIGENVALUE_TOL)
            {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        groups
    }

    /// Dense operator `V diag(a) V†`.
    pub fn matrix(&self) -> ComplexMatrix {
        let diag = ComplexVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&a| C64::new(a, 0.0)));
        &self.eigenbasis * ComplexMatrix::from_diagonal(&diag) * self.eigenbasis.adjoint()
    }

    /// Orthogonal projector onto the span of the listed eigenbasis columns.
    pub fn projector(&self, columns: &[usize]) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim(), self.dim());
        for &c in columns {
            let v = self.eigenbasis.column(c);
            p += v * v.adjoint();
        }
        p
    }

    /// Same eigenbasis with new eigenvalues.
    pub fn relabel(&self, eigenvalues: Vec<f64>) -> Result<Self> {
        Self::new(eigenvalues, self.eigenbasis.clone())
    }
}

/// `A⁽¹⁾ ⊗ … ⊗ A⁽ⁿ⁾`, one factor per tensor factor of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductObservable {
    pub factors: Vec<PointObservable>,
}

impl ProductObservable {
    pub fn new(factors: Vec<PointObservable>) -> Self {
        Self { factors }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(PointObservable::dim).collect()
    }

    /// Member of the simple actual observables: every factor simple.
    pub fn is_simple(&self) -> bool {
        self.factors.iter().all(PointObservable::is_simple)
    }

    fn check_dims(&self, state: &StateVector) -> Result<()> {
        let dims = self.dims();
        if dims.len() != state.n_factors() {
            return Err(Error::DimensionMismatch { expected: state.n_factors(), found: dims.len() });
        }
        for (&d, &s) in dims.iter().zip(state.factor_dims()) {
            if d != s {
                return Err(Error::DimensionMismatch { expected: s, found: d });
            }
        }
        Ok(())
    }

    /// Amplitudes of `state` in the joint eigenbasis `φ_{j1} ⊗ … ⊗ φ_{jn}`.
    pub fn joint_coefficients(&self, state: &StateVector) -> Result<ComplexVector> {
        self.check_dims(state)?;
        let mut amps = state.amplitudes().clone();
        for (k, f) in self.factors.iter().enumerate() {
            amps = linalg::apply_on_sites(&amps, state.factor_dims(), &[k], &f.eigenbasis.adjoint())?;
        }
        Ok(amps)
    }

    /// Joint eigenspaces as lists of flat indices into the joint
    /// eigenbasis, together with their eigenvalue tuples.
    fn joint_eigenspaces(&self) -> Vec<(Vec<f64>, Vec<usize>)> {
        let dims = self.dims();
        let strides = linalg::row_major_strides(&dims);
        let mut out: Vec<(Vec<f64>, Vec<usize>)> = vec![(Vec::new(), vec![0])];
        for (k, f) in self.factors.iter().enumerate() {
            let spaces = f.eigenspaces();
            let stride = strides[k];
            let mut next = Vec::with_capacity(out.len() * spaces.len());
            for (vals, idx) in &out {
                for g in &spaces {
                    let mut v = vals.clone();
                    v.push(f.eigenvalues[g[0]]);
                    let flat = idx
                        .iter()
                        .flat_map(|&base| g.iter().map(move |&c| base + c * stride))
                        .collect();
                    next.push((v, flat));
                }
            }
            out = next;
        }
        out
    }
}

fn label(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Outcome distribution of measuring `obs` on `state`.
///
/// One event per joint eigenspace, labelled by its eigenvalue tuple, with
/// weight `‖(P_1 ⊗ … ⊗ P_n) Φ‖²`. For simple factors this is one event per
/// joint eigenvector with weight `|⟨φ_{j1} ⊗ … ⊗ φ_{jn}, Φ⟩|²`.
pub fn measurement_scheme(state: &StateVector, obs: &ProductObservable) -> Result<Scheme> {
    let probs = joint_probabilities(state, obs)?;
    // divide out ‖Φ‖² so rounding never leaves a certain outcome below 1
    let total: f64 = probs.iter().sum();
    let spaces = obs.joint_eigenspaces();
    let mut events = Vec::with_capacity(spaces.len());
    let mut weights = Vec::with_capacity(spaces.len());
    for (vals, idx) in spaces {
        events.push(label(&vals));
        weights.push((idx.iter().map(|&i| probs[i]).sum::<f64>() / total).min(1.0));
    }
    Scheme::new(events, weights)
}

/// `|c_{j1…jn}|²` in row-major order of the joint eigenbasis.
pub fn joint_probabilities(state: &StateVector, obs: &ProductObservable) -> Result<Vec<f64>> {
    Ok(obs.joint_coefficients(state)?.iter().map(|c| c.norm_sqr()).collect())
}

/// Entropy of the measurement scheme, `S̃(Φ, A)`.
pub fn s_tilde(state: &StateVector, obs: &ProductObservable) -> Result<f64> {
    Ok(measurement_scheme(state, obs)?.entropy())
}

/// The mixture a measurement of `obs` turns `state` into.
///
/// Components with probability below [`MIXTURE_CUTOFF`] are dropped. For
/// simple factors each component is the joint eigenvector itself; for
/// degenerate factors it is the normalized projection of `state`.
pub fn induced_mixture(state: &StateVector, obs: &ProductObservable) -> Result<Vec<(f64, StateVector)>> {
    let coeffs = obs.joint_coefficients(state)?;
    let dims = state.factor_dims();
    let mut out = Vec::new();
    for (_, idx) in obs.joint_eigenspaces() {
        let p: f64 = idx.iter().map(|&i| coeffs[i].norm_sqr()).sum();
        if p < MIXTURE_CUTOFF {
            continue;
        }
        let mut masked = ComplexVector::zeros(coeffs.len());
        if let [single] = idx.as_slice() {
            masked[*single] = C64::new(1.0, 0.0);
        } else {
            for &i in &idx {
                masked[i] = coeffs[i];
            }
        }
        for (k, f) in obs.factors.iter().enumerate() {
            masked = linalg::apply_on_sites(&masked, dims, &[k], &f.eigenbasis)?;
        }
        out.push((p, StateVector::normalized(dims.to_vec(), masked)?));
    }
    Ok(out)
}

/// True iff `a` is finer than `b`: they commute and every eigenspace of
/// `b` is a union of eigenspaces of `a`.
pub fn is_finer_op(a: &PointObservable, b: &PointObservable) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (ma, mb) = (a.matrix(), b.matrix());
    let comm = &ma * &mb - &mb * &ma;
    if linalg::max_abs(&comm) > FINENESS_TOL {
        return Ok(false);
    }
    let b_projectors: Vec<ComplexMatrix> = b.eigenspaces().iter().map(|g| b.projector(g)).collect();
    // each eigenspace of a must sit inside a single eigenspace of b
    Ok(a.eigenspaces().iter().all(|g| {
        let pa = a.projector(g);
        b_projectors
            .iter()
            .any(|pb| linalg::max_abs_diff(&(pb * &pa), &pa) <= FINENESS_TOL)
    }))
}

/// A simple observable finer than `a`.
///
/// Inside each degenerate eigenspace the basis is rotated by a seeded Haar
/// unitary; eigenvalues become `1, 2, …`. Simple input is returned as is.
pub fn refine_to_simple(a: &PointObservable, seed: u64) -> PointObservable {
    if a.is_simple() {
        return a.clone();
    }
    let mut rng = linalg::seeded_rng(seed);
    let mut basis = a.eigenbasis.clone();
    for g in a.eigenspaces().iter().filter(|g| g.len() > 1) {
        let u = linalg::haar_unitary_with(g.len(), &mut rng);
        let block = ComplexMatrix::from_columns(&g.iter().map(|&c| a.eigenbasis.column(c)).collect::<Vec<_>>());
        let rotated = block * u;
        for (j, &c) in g.iter().enumerate() {
            basis.set_column(c, &rotated.column(j));
        }
    }
    PointObservable::from_basis(basis).expect("rotation inside eigenspaces keeps the basis orthonormal")
}

/// JSON form: `{"eigenvalues": [...], "eigenbasis": [[re, im], ...]}` with
/// the eigenbasis flattened column-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableFile {
    pub eigenvalues: Vec<f64>,
    pub eigenbasis: Vec<[f64; 2]>,
}

impl From<&PointObservable> for ObservableFile {
    fn from(o: &PointObservable) -> Self {
        // nalgebra storage is column-major already
        ObservableFile {
            eigenvalues: o.eigenvalues.clone(),
            eigenbasis: o.eigenbasis.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<ObservableFile> for PointObservable {
    type Error = Error;

    fn try_from(f: ObservableFile) -> Result<Self> {
        let d = f.eigenvalues.len();
        if f.eigenbasis.len() != d * d {
            return Err(Error::InvalidObservable(format!(
                "eigenbasis has {} entries, expected {}",
                f.eigenbasis.len(),
                d * d
            )));
        }
        let basis = ComplexMatrix::from_iterator(d, d, f.eigenbasis.iter().map(|&[re, im]| C64::new(re, im)));
        PointObservable::new(f.eigenvalues, basis)
    }
}

impl Serialize for PointObservable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ObservableFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointObservable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PointObservable::try_from(ObservableFile::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ProductObservable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.factors.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductObservable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(ProductObservable::new(Vec::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, seeded_rng};
    use crate::schemes::shannon_entropy;

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = ComplexVector::from_vec(vec![C64::new(h, 0.0), C64::default(), C64::default(), C64::new(h, 0.0)]);
        StateVector::new(vec![2, 2], amps).unwrap()
    }

    fn comp2() -> ProductObservable {
        ProductObservable::new(vec![PointObservable::computational(2), PointObservable::computational(2)])
    }

    fn random_simple(dim: usize, seed: u64) -> PointObservable {
        PointObservable::from_basis(haar_unitary(dim, seed)).unwrap()
    }

    #[test]
    fn eigenstate_is_certain() {
        let phi = StateVector::product_basis(&[2, 3], &[1, 2]).unwrap();
        let obs = ProductObservable::new(vec![PointObservable::computational(2), PointObservable::computational(3)]);
        let s = measurement_scheme(&phi, &obs).unwrap();
        assert_eq!(s.weights(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.events()[5], "(2, 3)");
        assert_eq!(s_tilde(&phi, &obs).unwrap(), 0.0);
    }

    #[test]
    fn bell_in_computational_bases() {
        let s = measurement_scheme(&bell(), &comp2()).unwrap();
        let expect = [0.5, 0.0, 0.0, 0.5];
        for (w, e) in s.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!((s_tilde(&bell(), &comp2()).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weights_match_explicit_inner_products() {
        let mut rng = seeded_rng(31);
        for seed in 0..20 {
            let phi = StateVector::random(&[2, 3, 2], &mut rng).unwrap();
            let fs: Vec<PointObservable> = [2, 3, 2]
                .iter()
                .enumerate()
                .map(|(k, &d)| random_simple(d, seed * 10 + k as u64))
                .collect();
            let obs = ProductObservable::new(fs.clone());
            let s = measurement_scheme(&phi, &obs).unwrap();
            let mut idx = 0;
            for a in 0..2 {
                for b in 0..3 {
                    for c in 0..2 {
                        let v = fs[0]
                            .eigenbasis()
                            .column(a)
                            .kronecker(&fs[1].eigenbasis().column(b))
                            .kronecker(&fs[2].eigenbasis().column(c));
                        let w = v.dotc(phi.amplitudes()).norm_sqr();
                        assert!((s.weights()[idx] - w).abs() < 1e-13);
                        idx += 1;
                    }
                }
            }
            assert!((s.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn weights_07_03_entropy() {
        let amps = ComplexVector::from_vec(vec![
            C64::new(0.7f64.sqrt(), 0.0),
            C64::default(),
            C64::default(),
            C64::new(0.3f64.sqrt(), 0.0),
        ]);
        let phi = StateVector::new(vec![2, 2], amps).unwrap();
        assert!((s_tilde(&phi, &comp2()).unwrap() - 0.6108643020548935).abs() < 1e-14);
    }

    #[test]
    fn degenerate_factor_groups_outcomes() {
        let obs = ProductObservable::new(vec![PointObservable::computational(2), PointObservable::identity(2)]);
        let s = measurement_scheme(&bell(), &obs).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.weights()[0] - 0.5).abs() < 1e-15);
        let unit = ProductObservable::new(vec![PointObservable::identity(2), PointObservable::identity(2)]);
        assert_eq!(measurement_scheme(&bell(), &unit).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn unit_observable_has_zero_entropy() {
        let mut rng = seeded_rng(2);
        for _ in 0..50 {
            let phi = StateVector::random(&[3, 2, 2], &mut rng).unwrap();
            let unit = ProductObservable::new(vec![
                PointObservable::identity(3),
                PointObservable::identity(2),
                PointObservable::identity(2),
            ]);
            assert_eq!(s_tilde(&phi, &unit).unwrap(), 0.0);
        }
    }

    #[test]
    fn entropy_ignores_eigenvalue_labels() {
        let mut rng = seeded_rng(4);
        let phi = StateVector::random(&[3, 3], &mut rng).unwrap();
        let a = random_simple(3, 1);
        let b = random_simple(3, 2);
        let base = s_tilde(&phi, &ProductObservable::new(vec![a.clone(), b.clone()])).unwrap();
        let a2 = a.relabel(vec![-7.5, 0.25, 1e3]).unwrap();
        let b2 = b.relabel(vec![3.0, 2.0, 1.0]).unwrap();
        let relabeled = s_tilde(&phi, &ProductObservable::new(vec![a2, b2])).unwrap();
        assert!((base - relabeled).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let phi = StateVector::product_basis(&[2, 3], &[0, 0]).unwrap();
        assert!(matches!(measurement_scheme(&phi, &comp2()), Err(Error::DimensionMismatch { .. })));
        let three = ProductObservable::new(vec![PointObservable::computational(2); 3]);
        assert!(matches!(s_tilde(&bell(), &three), Err(Error::DimensionMismatch { .. })));
        assert!(is_finer_op(&PointObservable::identity(2), &PointObservable::identity(3)).is_err());
    }

    #[test]
    fn mixture_of_bell_state() {
        let mix = induced_mixture(&bell(), &comp2()).unwrap();
        assert_eq!(mix.len(), 2);
        let e00 = StateVector::product_basis(&[2, 2], &[0, 0]).unwrap();
        let e11 = StateVector::product_basis(&[2, 2], &[1, 1]).unwrap();
        assert!((mix[0].0 - 0.5).abs() < 1e-15 && mix[0].1 == e00);
        assert!((mix[1].0 - 0.5).abs() < 1e-15 && mix[1].1 == e11);

        let single = induced_mixture(&e00, &comp2()).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].0, 1.0);
    }

    #[test]
    fn mixture_reproduces_diagonal_of_density_matrix() {
        let mut rng = seeded_rng(8);
        let phi = StateVector::random(&[3, 2], &mut rng).unwrap();
        let obs = ProductObservable::new(vec![random_simple(3, 5), random_simple(2, 6)]);
        let mix = induced_mixture(&phi, &obs).unwrap();
        let mut rho = ComplexMatrix::zeros(6, 6);
        for (p, s) in &mix {
            rho += (s.amplitudes() * s.amplitudes().adjoint()).scale(*p);
        }
        let v = linalg::kron(obs.factors[0].eigenbasis(), obs.factors[1].eigenbasis());
        let rho_eig = v.adjoint() * rho * &v;
        let c = v.adjoint() * phi.amplitudes();
        for i in 0..6 {
            assert!((rho_eig[(i, i)].re - c[i].norm_sqr()).abs() < 1e-12);
        }
        for (_, s) in &mix {
            assert!((s.norm() - 1.0).abs() < 1e-12);
            assert_eq!(crate::schmidt::schmidt(s).unwrap().rank(), 1);
        }
        let probs: Vec<f64> = mix.iter().map(|m| m.0).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let scheme = measurement_scheme(&phi, &obs).unwrap();
        assert!((shannon_entropy(&probs) - scheme.entropy()).abs() <= 1e-10);
    }

    #[test]
    fn degenerate_mixture_components_are_projections() {
        let mut rng = seeded_rng(9);
        let phi = StateVector::random(&[2, 3], &mut rng).unwrap();
        let obs = ProductObservable::new(vec![PointObservable::computational(2), PointObservable::identity(3)]);
        let mix = induced_mixture(&phi, &obs).unwrap();
        assert_eq!(mix.len(), 2);
        for (k, (p, s)) in mix.iter().enumerate() {
            let proj = linalg::kron(&PointObservable::computational(2).projector(&[k]), &ComplexMatrix::identity(3, 3));
            let expect = &proj * phi.amplitudes();
            assert!((expect.norm_squared() - p).abs() < 1e-13);
            assert!((expect.unscale(p.sqrt()) - s.amplitudes()).camax() < 1e-12);
        }
    }

    #[test]
    fn fineness_order() {
        let a = random_simple(4, 3);
        assert!(is_finer_op(&a, &PointObservable::identity(4)).unwrap());
        assert!(!is_finer_op(&PointObservable::identity(4), &a).unwrap());
        assert!(is_finer_op(&a, &a).unwrap());
        let b = random_simple(4, 4);
        let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
        assert!(linalg::max_abs(&comm) > 1e-3);
        assert!(!is_finer_op(&a, &b).unwrap());
        // coarsen a by merging its first two eigenvalues
        let mut vals = a.eigenvalues().to_vec();
        vals[1] = vals[0];
        let coarse = a.relabel(vals).unwrap();
        assert!(is_finer_op(&a, &coarse).unwrap());
        assert!(!is_finer_op(&coarse, &a).unwrap());
    }

    #[test]
    fn refinement_to_simple() {
        let a = random_simple(3, 1);
        assert_eq!(refine_to_simple(&a, 0), a);

        let id = PointObservable::identity(4);
        let r = refine_to_simple(&id, 7);
        assert!(r.is_simple());
        assert!(is_finer_op(&r, &id).unwrap());

        let base = haar_unitary(4, 8);
        let deg = PointObservable::new(vec![2.0, 2.0, 5.0, -1.0], base).unwrap();
        assert!(!deg.is_simple());
        let r = refine_to_simple(&deg, 9);
        assert!(r.is_simple());
        assert!(is_finer_op(&r, &deg).unwrap());
        assert_eq!(r.eigenbasis().column(2), deg.eigenbasis().column(2));
    }

    #[test]
    fn refinement_raises_entropy() {
        let mut rng = seeded_rng(12);
        for seed in 0..200 {
            let phi = StateVector::random(&[4], &mut rng).unwrap();
            let base = haar_unitary(4, seed);
            let coarse = PointObservable::new(vec![1.0, 1.0, 2.0, 2.0], base).unwrap();
            let fine = refine_to_simple(&coarse, seed);
            let sc = s_tilde(&phi, &ProductObservable::new(vec![coarse])).unwrap();
            let sf = s_tilde(&phi, &ProductObservable::new(vec![fine])).unwrap();
            assert!(sc <= sf + 1e-12);
        }
    }

    #[test]
    fn observable_json_is_column_major() {
        let o = random_simple(3, 2);
        let v = serde_json::to_value(&o).unwrap();
        let first_col_second_row = &v["eigenbasis"][1];
        let expect = o.eigenbasis()[(1, 0)];
        assert_eq!(first_col_second_row[0].as_f64().unwrap(), expect.re);
        assert_eq!(first_col_second_row[1].as_f64().unwrap(), expect.im);
        let back: PointObservable = serde_json::from_value(v).unwrap();
        assert_eq!(back, o);
        let bad = serde_json::json!({"eigenvalues": [1.0, 2.0], "eigenbasis": [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]});
        assert!(serde_json::from_value::<PointObservable>(bad).is_err());
    }

    #[test]
    fn invalid_observables() {
        assert!(PointObservable::new(vec![], ComplexMatrix::zeros(0, 0)).is_err());
        assert!(PointObservable::new(vec![1.0, 2.0], ComplexMatrix::identity(3, 3)).is_err());
        assert!(PointObservable::new(vec![1.0, f64::NAN], ComplexMatrix::identity(2, 2)).is_err());
    }
}
