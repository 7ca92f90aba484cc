//! Coordinate descent over per-factor eigenbases for `S_q` of states with
//! any number of factors.
//!
//! One factor is optimized at a time with the others held fixed. Each
//! factor update does a sweep of two-vector rotations (a grid scan followed
//! by golden-section refinement over angle and phase), then tries one small
//! random unitary perturbation whose size shrinks on failure. Independent
//! restarts start from Haar-random bases.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{self, ComplexMatrix};
use crate::observables::{self, PointObservable, ProductObservable};
use crate::schmidt::WEIGHT_CUTOFF;
use crate::sq::{Method, SqResult};
use crate::state::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Maximum number of sweeps over all factors per restart.
    pub max_iters: usize,
    /// A sweep improving the value by less than this ends the restart.
    pub tol: f64,
    pub seed: u64,
    /// Initial perturbation size in radians.
    pub initial_step: f64,
    pub step_decay: f64,
    pub min_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 200,
            tol: 1e-10,
            seed: 0,
            initial_step: 0.3,
            step_decay: 0.7,
            min_step: 1e-4,
        }
    }
}

impl SearchOptions {
    pub fn new(restarts: usize, max_iters: usize, tol: f64, seed: u64) -> Self {
        Self { restarts, max_iters, tol, seed, ..Self::default() }
    }
}

struct Outcome {
    value: f64,
    bases: Vec<ComplexMatrix>,
    converged: bool,
}

/// Best-found `S̃` over simple product observables; an upper bound on `S_q`.
///
/// Restarts run in parallel on the current rayon pool. Restart `r` draws
/// from ChaCha stream `r` of `seed`, so the result does not depend on
/// scheduling. Ties go to the lowest restart index.
pub fn sq_search(state: &StateVector, opts: &SearchOptions) -> SqResult {
    let restarts = opts.restarts.max(1);
    let outcomes: Vec<Outcome> = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(state, opts, r as u64))
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .expect("at least one restart");

    let argmin = ProductObservable::new(
        best.bases
            .into_iter()
            .map(|b| PointObservable::from_basis(b).expect("search keeps bases orthonormal"))
            .collect(),
    );
    let probs = observables::joint_probabilities(state, &argmin).expect("argmin matches state dims");
    let mut weights: Vec<f64> = probs.into_iter().filter(|&p| p > WEIGHT_CUTOFF).collect();
    weights.sort_by(|a, b| b.total_cmp(a));
    SqResult {
        value: observables::s_tilde(state, &argmin).expect("argmin matches state dims"),
        argmin,
        method: Method::Search,
        restarts_used: restarts,
        converged: best.converged,
        weights,
    }
}

fn h(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Coefficient tensor in the current product basis with slice helpers.
struct Tensor {
    dims: Vec<usize>,
    strides: Vec<usize>,
    coeffs: Vec<C64>,
}

impl Tensor {
    fn new(state: &StateVector, bases: &[ComplexMatrix]) -> Self {
        let dims = state.factor_dims().to_vec();
        let mut amps = state.amplitudes().clone();
        for (k, b) in bases.iter().enumerate() {
            amps = linalg::apply_on_sites(&amps, &dims, &[k], &b.adjoint()).expect("dims checked");
        }
        Tensor { strides: linalg::row_major_strides(&dims), dims, coeffs: amps.iter().copied().collect() }
    }

    fn entropy(&self) -> f64 {
        self.coeffs.iter().map(|c| h(c.norm_sqr())).sum()
    }

    /// Flat indices of slice `i` along mode `k`.
    fn slice(&self, k: usize, i: usize) -> Vec<usize> {
        let inner = self.strides[k];
        let block = inner * self.dims[k];
        let outer = self.coeffs.len() / block;
        let mut idx = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * block + i * inner;
            idx.extend(base..base + inner);
        }
        idx
    }
}

fn givens(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, phi)],
        [C64::from_polar(s, -phi), C64::new(c, 0.0)],
    ]
}

/// Entropy of slices `p`, `q` after rotating basis columns by `G`; the new
/// coefficients are `G†` applied to the pair of slices.
fn pair_entropy(tp: &[C64], tq: &[C64], g: &[[C64; 2]; 2]) -> f64 {
    let mut total = 0.0;
    for (a, b) in tp.iter().zip(tq) {
        let np = g[0][0].conj() * a + g[1][0].conj() * b;
        let nq = g[0][1].conj() * a + g[1][1].conj() * b;
        total += h(np.norm_sqr()) + h(nq.norm_sqr());
    }
    total
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

const THETA_GRID: usize = 9;
const PHI_GRID: usize = 4;
const GOLDEN_ITERS: usize = 40;
const LOCAL_GOLDEN_ITERS: usize = 36;
const EXTRAPOLATION_RANGE: f64 = 8.0;
/// Sweeps improving by less than this switch rotations to local mode.
const LOCAL_THRESHOLD: f64 = 1e-5;

/// Minimizes `f(θ, φ)` over `θ ∈ [−π/4, π/4]`, `φ ∈ [0, π)`: grid scan,
/// then alternating golden-section refinement. Returns `(θ, φ, f)`.
///
/// In local mode the grid scan is skipped and a single refinement pass is
/// made around the identity.
fn minimize_rotation<F: Fn(f64, f64) -> f64>(f: F, local: bool) -> (f64, f64, f64) {
    let dt = 2.0 * FRAC_PI_4 / (THETA_GRID - 1) as f64;
    let dp = PI / PHI_GRID as f64;
    let mut best = (0.0, 0.0, f(0.0, 0.0));
    if local {
        for p0 in [0.0, FRAC_PI_2] {
            let (t, v) = golden(|x| f(x, p0), -dt, dt, LOCAL_GOLDEN_ITERS);
            if v < best.2 {
                best = (t, p0, v);
            }
        }
        let (t, p0, _) = best;
        let (p, vp) = golden(|y| f(t, y), p0 - dp, p0 + dp, LOCAL_GOLDEN_ITERS);
        if vp < best.2 {
            best = (t, p, vp);
        }
        return best;
    }
    for i in 0..THETA_GRID {
        let t = -FRAC_PI_4 + i as f64 * dt;
        for j in 0..PHI_GRID {
            let p = j as f64 * dp;
            let v = f(t, p);
            if v < best.2 {
                best = (t, p, v);
            }
        }
    }
    let (mut t, mut p, mut v) = best;
    for _ in 0..3 {
        let (nt, vt) = golden(|x| f(x, p), t - dt, t + dt, GOLDEN_ITERS);
        if vt < v {
            t = nt;
            v = vt;
        }
        let (np, vp) = golden(|y| f(t, y), p - dp, p + dp, GOLDEN_ITERS);
        if vp < v {
            p = np;
            v = vp;
        }
    }
    (t, p, v)
}

fn rotate_factor(tensor: &mut Tensor, basis: &mut ComplexMatrix, k: usize, (p, q): (usize, usize), local: bool) -> f64 {
    let ip = tensor.slice(k, p);
    let iq = tensor.slice(k, q);
    let tp: Vec<C64> = ip.iter().map(|&i| tensor.coeffs[i]).collect();
    let tq: Vec<C64> = iq.iter().map(|&i| tensor.coeffs[i]).collect();
    let before = pair_entropy(&tp, &tq, &givens(0.0, 0.0));
    let (t, ph, after) = minimize_rotation(|t, p| pair_entropy(&tp, &tq, &givens(t, p)), local);
    if after >= before {
        return 0.0;
    }
    let g = givens(t, ph);
    rotate_slices(&mut tensor.coeffs, &ip, &iq, &g);
    rotate_columns(basis, p, q, &g);
    before - after
}

/// Rotates columns `(p, q)` of factor `a` by `G` and the matched columns
/// `(p2, q2)` of factor `b` by `conj(G)`, the move that walks along a
/// degenerate normal-form orbit. Returns the entropy decrease.
#[allow(clippy::too_many_arguments)]
fn rotate_paired(
    tensor: &mut Tensor,
    bases: &mut [ComplexMatrix],
    a: usize,
    b: usize,
    (p, q): (usize, usize),
    (p2, q2): (usize, usize),
    current: f64,
    local: bool,
) -> f64 {
    let slices = [tensor.slice(a, p), tensor.slice(a, q), tensor.slice(b, p2), tensor.slice(b, q2)];
    let moved = |t: f64, ph: f64| {
        let g = givens(t, ph);
        let gc = [[g[0][0].conj(), g[0][1].conj()], [g[1][0].conj(), g[1][1].conj()]];
        let mut c = tensor.coeffs.clone();
        rotate_slices(&mut c, &slices[0], &slices[1], &g);
        rotate_slices(&mut c, &slices[2], &slices[3], &gc);
        c
    };
    let (t, ph, after) = minimize_rotation(|t, ph| moved(t, ph).iter().map(|z| h(z.norm_sqr())).sum(), local);
    if after >= current {
        return 0.0;
    }
    tensor.coeffs = moved(t, ph);
    let g = givens(t, ph);
    let gc = [[g[0][0].conj(), g[0][1].conj()], [g[1][0].conj(), g[1][1].conj()]];
    rotate_columns(&mut bases[a], p, q, &g);
    rotate_columns(&mut bases[b], p2, q2, &gc);
    current - after
}

fn rotate_slices(c: &mut [C64], ip: &[usize], iq: &[usize], g: &[[C64; 2]; 2]) {
    for (&i, &j) in ip.iter().zip(iq) {
        let (a, b) = (c[i], c[j]);
        c[i] = g[0][0].conj() * a + g[1][0].conj() * b;
        c[j] = g[0][1].conj() * a + g[1][1].conj() * b;
    }
}

fn rotate_columns(basis: &mut ComplexMatrix, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    let (bp, bq) = (basis.column(p).into_owned(), basis.column(q).into_owned());
    basis.set_column(p, &(&bp * g[0][0] + &bq * g[1][0]));
    basis.set_column(q, &(&bp * g[0][1] + &bq * g[1][1]));
}

/// For each column of factor `a`, the column of factor `b` it shares the
/// most probability with.
fn column_matching(tensor: &Tensor, a: usize, b: usize) -> Vec<usize> {
    let (da, db) = (tensor.dims[a], tensor.dims[b]);
    let mut mass = vec![0.0; da * db];
    for (flat, c) in tensor.coeffs.iter().enumerate() {
        let ia = (flat / tensor.strides[a]) % da;
        let ib = (flat / tensor.strides[b]) % db;
        mass[ia * db + ib] += c.norm_sqr();
    }
    (0..da)
        .map(|p| {
            (0..db)
                .max_by(|&x, &y| mass[p * db + x].total_cmp(&mass[p * db + y]))
                .expect("factor dims are positive")
        })
        .collect()
}

/// Continues every factor along the rotation it made during the last sweep.
///
/// Coordinate descent converges linearly here, so successive sweeps turn
/// each basis in nearly the same direction. With `W = B_prev† B` and
/// generator `H = (W − W†)/2i`, the bases `B·exp(iαH)` are scanned over
/// `α ∈ [0, EXTRAPOLATION_RANGE]` and the best is kept if it lowers the value.
fn extrapolate(
    state: &StateVector,
    tensor: &mut Tensor,
    bases: &mut [ComplexMatrix],
    previous: &[ComplexMatrix],
    current: f64,
) {
    let i = C64::new(0.0, 1.0);
    let eigs: Vec<_> = bases
        .iter()
        .zip(previous)
        .map(|(b, p)| {
            let w = p.adjoint() * b;
            let gen = (&w - w.adjoint()) / (i * 2.0);
            let gen = (&gen + gen.adjoint()).scale(0.5);
            gen.symmetric_eigen()
        })
        .collect();
    let moved = |alpha: f64| -> Vec<ComplexMatrix> {
        bases
            .iter()
            .zip(&eigs)
            .map(|(b, e)| {
                let phases = nalgebra::DVector::from_iterator(
                    e.eigenvalues.len(),
                    e.eigenvalues.iter().map(|&l| C64::from_polar(1.0, alpha * l)),
                );
                b * (&e.eigenvectors * ComplexMatrix::from_diagonal(&phases) * e.eigenvectors.adjoint())
            })
            .collect()
    };
    let (alpha, value) = golden(|a| Tensor::new(state, &moved(a)).entropy(), 0.0, EXTRAPOLATION_RANGE, 30);
    if value < current {
        bases.clone_from_slice(&moved(alpha));
        *tensor = Tensor::new(state, bases);
    }
}

fn reorthonormalize(b: &mut ComplexMatrix) {
    for j in 0..b.ncols() {
        for i in 0..j {
            let prev = b.column(i).into_owned();
            let overlap = prev.dotc(&b.column(j));
            let new = b.column(j) - prev * overlap;
            b.set_column(j, &new);
        }
        let n = b.column(j).norm();
        b.column_mut(j).unscale_mut(n);
    }
}

fn run_restart(state: &StateVector, opts: &SearchOptions, restart: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart);
    let dims = state.factor_dims().to_vec();
    let mut bases: Vec<ComplexMatrix> = dims.iter().map(|&d| linalg::haar_unitary_with(d, &mut rng)).collect();
    let mut tensor = Tensor::new(state, &bases);
    let mut value = tensor.entropy();
    let mut step = opts.initial_step;
    let mut converged = false;
    let mut local = false;

    for _ in 0..opts.max_iters {
        let start = value;
        let previous = bases.clone();
        let mut perturbed = false;
        for k in 0..dims.len() {
            for p in 0..dims[k] {
                for q in p + 1..dims[k] {
                    value -= rotate_factor(&mut tensor, &mut bases[k], k, (p, q), local);
                }
            }
            if dims[k] > 1 {
                let gen = linalg::random_hermitian(dims[k], &mut rng);
                // exp(i·step·H)
                let w = linalg::hermitian_evolution(&gen, -step);
                let trial_basis = &bases[k] * &w;
                let amps = nalgebra::DVector::from_vec(tensor.coeffs.clone());
                let moved = linalg::apply_on_sites(&amps, &dims, &[k], &w.adjoint()).expect("dims checked");
                let trial: f64 = moved.iter().map(|c| h(c.norm_sqr())).sum();
                if trial < value {
                    bases[k] = trial_basis;
                    tensor.coeffs = moved.iter().copied().collect();
                    value = trial;
                    perturbed = true;
                }
            }
        }
        for a in 0..dims.len() {
            for b in a + 1..dims.len() {
                let matching = column_matching(&tensor, a, b);
                for p in 0..dims[a] {
                    for q in p + 1..dims[a] {
                        if matching[p] != matching[q] {
                            let pair = (matching[p], matching[q]);
                            value -= rotate_paired(&mut tensor, &mut bases, a, b, (p, q), pair, value, local);
                        }
                    }
                }
            }
        }
        if local {
            extrapolate(state, &mut tensor, &mut bases, &previous, value);
        }
        if !perturbed {
            step = (step * opts.step_decay).max(opts.min_step);
        }
        for b in bases.iter_mut() {
            reorthonormalize(b);
        }
        tensor = Tensor::new(state, &bases);
        value = tensor.entropy();
        if start - value < opts.tol {
            converged = true;
            break;
        }
        local = start - value < LOCAL_THRESHOLD;
    }
    Outcome { value, bases, converged }
}
