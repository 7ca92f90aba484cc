//! Toy point-spectrum collision models.
//!
//! Two particles in a box evolve under `H = H₀ + λV`, where `H₀` is the sum
//! of diagonal single-particle energies and `V` is a seeded random Hermitian
//! coupling with entries bounded by 1. A dilute gas is modelled by applying
//! the same two-body evolution to randomly chosen pairs of an n-particle
//! product state.

use std::io::Write;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::schmidt;
use crate::search::{sq_search, SearchOptions};
use crate::sq::sq_bipartite;
use crate::state::{StateVector, MAX_AMPLITUDES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionModel {
    pub d1: usize,
    pub d2: usize,
    pub free_energies_1: Vec<f64>,
    pub free_energies_2: Vec<f64>,
    pub coupling: f64,
    pub interaction_seed: u64,
    pub duration: f64,
}

impl CollisionModel {
    /// Equally spaced levels `0, 1, …, d−1` for both particles, `λ = 0.5`,
    /// `t = 1`.
    pub fn reference(d: usize, interaction_seed: u64) -> Self {
        let levels: Vec<f64> = (0..d).map(|k| k as f64).collect();
        Self {
            d1: d,
            d2: d,
            free_energies_1: levels.clone(),
            free_energies_2: levels,
            coupling: 0.5,
            interaction_seed,
            duration: 1.0,
        }
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(Error::InvalidParameter("factor dims must be positive".into()));
        }
        if self.free_energies_1.len() != self.d1 || self.free_energies_2.len() != self.d2 {
            return Err(Error::InvalidParameter("one free energy per level is required".into()));
        }
        let finite = self
            .free_energies_1
            .iter()
            .chain(&self.free_energies_2)
            .chain([&self.coupling, &self.duration])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.duration < 0.0 {
            return Err(Error::InvalidParameter("duration must be non-negative".into()));
        }
        Ok(())
    }

    /// `diag(E₁) ⊗ 1 + 1 ⊗ diag(E₂)`.
    pub fn free_hamiltonian(&self) -> ComplexMatrix {
        let diag = |e: &[f64]| {
            ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(e.len(), e.iter().map(|&x| C64::new(x, 0.0))))
        };
        linalg::kron(&diag(&self.free_energies_1), &ComplexMatrix::identity(self.d2, self.d2))
            + linalg::kron(&ComplexMatrix::identity(self.d1, self.d1), &diag(&self.free_energies_2))
    }

    /// Seeded random Hermitian coupling on the joint space, `‖V‖_max = 1`.
    pub fn interaction(&self) -> ComplexMatrix {
        let mut rng = linalg::seeded_rng(self.interaction_seed);
        linalg::random_hermitian(self.d1 * self.d2, &mut rng)
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        self.free_hamiltonian() + self.interaction().scale(self.coupling)
    }

    /// `exp(−iHt)`.
    pub fn evolution(&self, t: f64) -> ComplexMatrix {
        if self.coupling == 0.0 {
            // exact product of local phases
            let local = |e: &[f64]| {
                ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
                    e.len(),
                    e.iter().map(|&x| C64::from_polar(1.0, -x * t)),
                ))
            };
            return linalg::kron(&local(&self.free_energies_1), &local(&self.free_energies_2));
        }
        linalg::hermitian_evolution(&self.hamiltonian(), t)
    }
}

/// Sampled entropy estimates along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasTrajectory {
    pub times: Vec<f64>,
    pub sq_estimates: Vec<f64>,
    /// Colliding pair behind each entry; `None` for the initial state.
    pub pair_schedule: Vec<Option<(usize, usize)>>,
    /// Schmidt entropy of the first particle of the pair against the rest.
    pub pair_diagnostics: Vec<f64>,
}

impl GasTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> f64 {
        self.sq_estimates.first().copied().unwrap_or(0.0)
    }

    pub fn last(&self) -> f64 {
        self.sq_estimates.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.sq_estimates.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with header `t,sq_estimate,pair_i,pair_j`; empty pair fields for
    /// the initial state.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "sq_estimate", "pair_i", "pair_j"])?;
        for ((t, s), pair) in self.times.iter().zip(&self.sq_estimates).zip(&self.pair_schedule) {
            let (i, j) = match pair {
                Some((i, j)) => (i.to_string(), j.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([format_sig12(*t), format_sig12(*s), i, j])?;
        }
        w.flush()
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// [`round_sig12`] as text, in exponent notation outside `[1e-4, 1e15)`.
pub fn format_sig12(x: f64) -> String {
    let r = round_sig12(x);
    if r == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn check_in_states(model: &CollisionModel, in1: &StateVector, in2: &StateVector) -> Result<()> {
    model.validate()?;
    for (s, d) in [(in1, model.d1), (in2, model.d2)] {
        if s.n_factors() != 1 || s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
        }
    }
    Ok(())
}

/// `U(in1 ⊗ in2)` with `U = exp(−iH·duration)`.
pub fn collide(model: &CollisionModel, in1: &StateVector, in2: &StateVector) -> Result<StateVector> {
    check_in_states(model, in1, in2)?;
    in1.tensor(in2).apply_unitary(&model.evolution(model.duration))
}

/// Closed-form `S_q` at `samples` evenly spaced times in `[0, duration]`.
pub fn entropy_trajectory(
    model: &CollisionModel,
    in1: &StateVector,
    in2: &StateVector,
    samples: usize,
) -> Result<GasTrajectory> {
    check_in_states(model, in1, in2)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("a trajectory needs at least 2 samples".into()));
    }
    let phi_in = in1.tensor(in2);
    let mut traj = GasTrajectory {
        times: Vec::with_capacity(samples),
        sq_estimates: Vec::with_capacity(samples),
        pair_schedule: Vec::with_capacity(samples),
        pair_diagnostics: Vec::with_capacity(samples),
    };
    let h = model.hamiltonian();
    for k in 0..samples {
        let t = model.duration * k as f64 / (samples - 1) as f64;
        let u = if model.coupling == 0.0 { model.evolution(t) } else { linalg::hermitian_evolution(&h, t) };
        let value = sq_bipartite(&phi_in.apply_unitary(&u)?)?.value;
        traj.times.push(t);
        traj.sq_estimates.push(value);
        traj.pair_schedule.push(Some((0, 1)));
        traj.pair_diagnostics.push(value);
    }
    Ok(traj)
}

/// Search settings for the per-collision `S_q` estimates of a gas run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for GasOptions {
    fn default() -> Self {
        Self { restarts: 4, max_iters: 100, tol: 1e-12 }
    }
}

/// Sequential pairwise collisions in an `n`-particle gas of `d`-level
/// particles, starting from a seeded random product state.
///
/// Entry 0 is the initial state; entry `k` follows collision `k`. Each
/// entry records the search estimate of `S_q` for the whole gas.
pub fn gas_run(
    n: usize,
    d: usize,
    collisions: usize,
    model: &CollisionModel,
    seed: u64,
    opts: &GasOptions,
) -> Result<GasTrajectory> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("a gas needs n >= 3 particles, got {n}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("particle dimension must be positive".into()));
    }
    let amplitudes = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if amplitudes > MAX_AMPLITUDES as u128 {
        return Err(Error::StateTooLarge { amplitudes, cap: MAX_AMPLITUDES });
    }
    model.validate()?;
    if model.d1 != d || model.d2 != d {
        return Err(Error::DimensionMismatch { expected: d, found: model.d1.max(model.d2) });
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }

    let mut rng = linalg::seeded_rng(seed);
    let mut state = StateVector::random_product(&vec![d; n], &mut rng)?;
    let u = model.evolution(model.duration);
    let estimate = |s: &StateVector, row: usize| {
        sq_search(
            s,
            &SearchOptions::new(opts.restarts, opts.max_iters, opts.tol, seed.wrapping_add(row as u64)),
        )
        .value
    };

    let mut traj = GasTrajectory {
        times: vec![0.0],
        sq_estimates: vec![estimate(&state, 0)],
        pair_schedule: vec![None],
        pair_diagnostics: vec![0.0],
    };
    for c in 1..=collisions {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        state = state.apply_local(&[i, j], &u)?;
        traj.times.push(c as f64 * model.duration);
        traj.sq_estimates.push(estimate(&state, c));
        traj.pair_schedule.push(Some((i, j)));
        traj.pair_diagnostics.push(schmidt::schmidt(&state.bipartition(&[i])?)?.entropy());
    }
    Ok(traj)
}
