//! Randomized property battery behind the `verify` subcommand.
//!
//! Each check samples random instances and records the worst margin of an
//! inequality `lhs ≥ rhs − tol` (margin `lhs − rhs`) or of an equality
//! (margin `−|lhs − rhs|`). A check passes iff its worst margin is at
//! least `−tol`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, haar_unitary_with};
use crate::observables::{s_tilde, PointObservable, ProductObservable};
use crate::schemes::{coarsen, Partition, Scheme};
use crate::schmidt::schmidt;
use crate::sq::{adapted_pair, convexity_gap, degenerate_orbit, sq_bipartite};
use crate::state::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// When set, overrides every per-check sample count below.
    pub samples: Option<usize>,
    /// Largest factor dimension for random bipartite states.
    pub max_dim: usize,
    pub scheme_pairs: usize,
    pub proof_chain_instances: usize,
    pub convexity_instances: usize,
    pub orbit_unitaries: usize,
    pub oracle_states: usize,
    pub oracle_observables: usize,
    pub inequality_tol: f64,
    pub equality_tol: f64,
    pub scheme_tol: f64,
    pub reconstruction_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: None,
            max_dim: 6,
            scheme_pairs: 1000,
            proof_chain_instances: 1000,
            convexity_instances: 1000,
            orbit_unitaries: 100,
            oracle_states: 50,
            oracle_observables: 200,
            inequality_tol: 1e-10,
            equality_tol: 1e-12,
            scheme_tol: 1e-12,
            reconstruction_tol: 1e-10,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.inequality_tol, self.equality_tol, self.scheme_tol, self.reconstruction_tol];
        if tols.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter("tolerances must be finite and non-negative".into()));
        }
        if self.max_dim < 2 {
            return Err(Error::InvalidParameter("max_dim must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub samples: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub all_pass: bool,
    pub checks: Vec<CheckReport>,
}

struct Check {
    name: &'static str,
    tolerance: f64,
    samples: usize,
    worst: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, samples: 0, worst: f64::INFINITY }
    }

    fn at_least(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        self.worst = self.worst.min(lhs - rhs);
    }

    fn equal(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        self.worst = self.worst.min(-(lhs - rhs).abs());
    }

    fn at_most(&mut self, value: f64, bound: f64) {
        self.samples += 1;
        self.worst = self.worst.min(bound - value);
    }

    fn report(self) -> CheckReport {
        let worst = if self.samples == 0 { 0.0 } else { self.worst };
        CheckReport {
            name: self.name.to_string(),
            pass: worst >= -self.tolerance,
            samples: self.samples,
            worst_margin: worst,
            tolerance: self.tolerance,
        }
    }
}

/// Random scheme of 1–12 events and a random grouping of its indices.
pub fn random_scheme_and_partition<R: Rng + ?Sized>(rng: &mut R) -> (Scheme, Partition) {
    let n = rng.random_range(1..=12);
    // exponential draws normalized give a uniform point on the simplex;
    // occasionally zero some weights to exercise 0 ln 0
    let mut raw: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.1) { 0.0 } else { -(1.0 - rng.random::<f64>()).ln() })
        .collect();
    if raw.iter().all(|&x| x == 0.0) {
        raw[0] = 1.0;
    }
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|x| x / total).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut groups = vec![Vec::new(); n];
    for (i, &g) in labels.iter().enumerate() {
        groups[g].push(i);
    }
    groups.retain(|g: &Vec<usize>| !g.is_empty());
    (Scheme::from_weights(weights).expect("normalized weights"), Partition::new(groups))
}

/// Haar-random simple observable.
pub fn random_simple<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PointObservable {
    PointObservable::from_basis(haar_unitary_with(dim, rng)).expect("unitary basis")
}

pub fn random_bipartite<R: Rng + ?Sized>(max_dim: usize, rng: &mut R) -> StateVector {
    let d1 = rng.random_range(2..=max_dim);
    let d2 = rng.random_range(2..=max_dim);
    StateVector::random(&[d1, d2], rng).expect("small dims")
}

fn bell() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::normalized(
        vec![2, 2],
        linalg::ComplexVector::from_vec(vec![h.into(), 0.0.into(), 0.0.into(), h.into()]),
    )
    .expect("Bell state")
}

impl VerifyConfig {
    /// Sample counts with the `samples` override applied.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if let Some(n) = self.samples {
            c.scheme_pairs = n;
            c.proof_chain_instances = n;
            c.convexity_instances = n;
            c.orbit_unitaries = n;
            c.oracle_states = n;
            c.oracle_observables = n;
        }
        c
    }
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    config.validate()?;
    let config = &config.resolved();
    let mut rng: ChaCha8Rng = linalg::seeded_rng(config.seed);
    let mut checks = Vec::new();

    let mut mono = Check::new("scheme_monotonicity", config.scheme_tol);
    for _ in 0..config.scheme_pairs {
        let (s, p) = random_scheme_and_partition(&mut rng);
        mono.at_least(s.entropy(), coarsen(&s, &p)?.entropy());
    }
    checks.push(mono.report());

    let mut refine = Check::new("proof_chain_refinement", config.inequality_tol);
    let mut convex = Check::new("proof_chain_convexity", config.inequality_tol);
    let mut adapt = Check::new("proof_chain_adaptation", config.equality_tol);
    for i in 0..config.proof_chain_instances {
        let phi = random_bipartite(config.max_dim, &mut rng);
        let (d1, d2) = (phi.factor_dims()[0], phi.factor_dims()[1]);
        let c = random_simple(d1, &mut rng);
        let d = random_simple(d2, &mut rng);
        let pair = adapted_pair(&schmidt(&phi)?, i as u64)?;
        let one = PointObservable::identity(d2);
        let s_cd = s_tilde(&phi, &ProductObservable::new(vec![c.clone(), d]))?;
        let s_c1 = s_tilde(&phi, &ProductObservable::new(vec![c, one.clone()]))?;
        let s_a1 = s_tilde(&phi, &ProductObservable::new(vec![pair.factors[0].clone(), one]))?;
        let s_ab = s_tilde(&phi, &pair)?;
        refine.at_least(s_cd, s_c1);
        convex.at_least(s_c1, s_a1);
        adapt.equal(s_a1, s_ab);
    }
    checks.extend([refine.report(), convex.report(), adapt.report()]);

    let mut gap = Check::new("convexity_gap", config.inequality_tol);
    for _ in 0..config.convexity_instances {
        let phi = random_bipartite(config.max_dim, &mut rng);
        let c = random_simple(phi.factor_dims()[0], &mut rng);
        gap.at_least(convexity_gap(&phi, &c)?, 0.0);
    }
    checks.push(gap.report());

    let mut orbit_entropy = Check::new("degenerate_orbit_entropy", config.equality_tol);
    let mut orbit_recon = Check::new("degenerate_orbit_reconstruction", config.reconstruction_tol);
    let bell = bell();
    let form = schmidt(&bell)?;
    for i in 0..config.orbit_unitaries {
        let u = haar_unitary_with(2, &mut rng);
        let rotated = degenerate_orbit(&form, &u, 0)?;
        orbit_recon.at_most(rotated.reconstruction_error(&bell), 0.0);
        orbit_entropy.equal(s_tilde(&bell, &adapted_pair(&rotated, i as u64)?)?, 2f64.ln());
    }
    checks.extend([orbit_entropy.report(), orbit_recon.report()]);

    let mut lower = Check::new("oracle_lower_bound", config.inequality_tol);
    let mut attain = Check::new("oracle_attainment", config.equality_tol);
    for _ in 0..config.oracle_states {
        let phi = random_bipartite(config.max_dim, &mut rng);
        let sq = sq_bipartite(&phi)?;
        attain.equal(s_tilde(&phi, &sq.argmin)?, sq.value);
        for _ in 0..config.oracle_observables {
            let c = random_simple(phi.factor_dims()[0], &mut rng);
            let d = random_simple(phi.factor_dims()[1], &mut rng);
            lower.at_least(s_tilde(&phi, &ProductObservable::new(vec![c, d]))?, sq.value);
        }
    }
    checks.extend([lower.report(), attain.report()]);

    Ok(VerifyReport { seed: config.seed, all_pass: checks.iter().all(|c| c.pass), checks })
}
