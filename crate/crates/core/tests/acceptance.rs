//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! with the measured worst case and wall time, then asserts. The line goes
//! straight to the stderr handle so it shows even when output is captured.
//!
//! The criteria run one at a time (shared lock) so the timings are not
//! inflated by each other.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use sq_toolkit::linalg::{haar_unitary_with, seeded_rng};
use sq_toolkit::observables::{s_tilde, PointObservable, ProductObservable};
use sq_toolkit::scattering::{collide, gas_run, CollisionModel, GasOptions};
use sq_toolkit::schemes::coarsen;
use sq_toolkit::sq::{adapted_pair, convexity_gap, degenerate_orbit};
use sq_toolkit::verify::{random_scheme_and_partition, random_simple};
use sq_toolkit::{schmidt, sq_bipartite, sq_search, SearchOptions, StateVector};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(n: u32, name: &str, budget_secs: u64, body: impl FnOnce() -> (bool, String)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(budget_secs);
    let pass = ok && in_time;
    let _ = writeln!(
        std::io::stderr(),
        "criterion {n}: {} {name}: {detail}; {:.2}s of {budget_secs}s",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
    assert!(in_time, "criterion {n} ({name}) exceeded {budget_secs}s: {:.2}s", elapsed.as_secs_f64());
}

fn random_dims<R: Rng>(rng: &mut R) -> [usize; 2] {
    [rng.random_range(2..=6), rng.random_range(2..=6)]
}

fn bell() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::normalized(
        vec![2, 2],
        sq_toolkit::linalg::ComplexVector::from_vec(vec![h.into(), 0.0.into(), 0.0.into(), h.into()]),
    )
    .unwrap()
}

#[test]
fn c1_oracle_lower_bound_and_attainment() {
    criterion(1, "oracle lower bound and attainment", 60, || {
        let mut rng = seeded_rng(101);
        let mut worst_bound = f64::INFINITY;
        let mut worst_attain = 0.0f64;
        for _ in 0..50 {
            let dims = random_dims(&mut rng);
            let phi = StateVector::random(&dims, &mut rng).unwrap();
            let sq = sq_bipartite(&phi).unwrap();
            worst_attain = worst_attain.max((s_tilde(&phi, &sq.argmin).unwrap() - sq.value).abs());
            for _ in 0..200 {
                let obs = ProductObservable::new(vec![
                    random_simple(dims[0], &mut rng),
                    random_simple(dims[1], &mut rng),
                ]);
                worst_bound = worst_bound.min(s_tilde(&phi, &obs).unwrap() - sq.value);
            }
        }
        (
            worst_bound >= -1e-10 && worst_attain <= 1e-12,
            format!("min S~ - S_q = {worst_bound:.3e}, max attainment error = {worst_attain:.3e}"),
        )
    });
}

#[test]
fn c2_proof_chain() {
    criterion(2, "proof chain", 30, || {
        let mut rng = seeded_rng(102);
        let (mut refine, mut convex, mut adapt) = (f64::INFINITY, f64::INFINITY, 0.0f64);
        for i in 0..1000 {
            let dims = random_dims(&mut rng);
            let phi = StateVector::random(&dims, &mut rng).unwrap();
            let c = random_simple(dims[0], &mut rng);
            let d = random_simple(dims[1], &mut rng);
            let ab = adapted_pair(&schmidt(&phi).unwrap(), i).unwrap();
            let one = PointObservable::identity(dims[1]);
            let s = |a: &PointObservable, b: &PointObservable| {
                s_tilde(&phi, &ProductObservable::new(vec![a.clone(), b.clone()])).unwrap()
            };
            let s_cd = s(&c, &d);
            let s_c1 = s(&c, &one);
            let s_a1 = s(&ab.factors[0], &one);
            let s_ab = s_tilde(&phi, &ab).unwrap();
            refine = refine.min(s_cd - s_c1);
            convex = convex.min(s_c1 - s_a1);
            adapt = adapt.max((s_a1 - s_ab).abs());
        }
        (
            refine >= -1e-10 && convex >= -1e-10 && adapt <= 1e-12,
            format!("margins {refine:.3e}, {convex:.3e}; equality error {adapt:.3e}"),
        )
    });
}

#[test]
fn c3_convexity_gap() {
    criterion(3, "convexity gap", 10, || {
        let mut rng = seeded_rng(103);
        let mut worst = f64::INFINITY;
        for _ in 0..1000 {
            let dims = random_dims(&mut rng);
            let phi = StateVector::random(&dims, &mut rng).unwrap();
            let c = random_simple(dims[0], &mut rng);
            worst = worst.min(convexity_gap(&phi, &c).unwrap());
        }
        (worst >= -1e-10, format!("min gap = {worst:.3e}"))
    });
}

#[test]
fn c4_scheme_monotonicity() {
    criterion(4, "scheme monotonicity", 1, || {
        let mut rng = seeded_rng(104);
        let mut worst = f64::INFINITY;
        for _ in 0..1000 {
            let (s, p) = random_scheme_and_partition(&mut rng);
            worst = worst.min(s.entropy() - coarsen(&s, &p).unwrap().entropy());
        }
        (worst >= -1e-12, format!("min H(fine) - H(coarse) = {worst:.3e}"))
    });
}

#[test]
fn c5_factorized_in_state() {
    criterion(5, "factorized in-state", 30, || {
        let mut rng = seeded_rng(105);
        let (mut closed, mut search) = (0.0f64, 0.0f64);
        for k in 0..100 {
            let dims = random_dims(&mut rng);
            let phi = StateVector::random_product(&dims, &mut rng).unwrap();
            closed = closed.max(sq_bipartite(&phi).unwrap().value);
            let opts = SearchOptions { seed: k, ..SearchOptions::default() };
            assert_eq!(opts.restarts, 10);
            search = search.max(sq_search(&phi, &opts).value);
        }
        (
            closed <= 1e-12 && search <= 1e-6,
            format!("max closed form = {closed:.3e}, max search = {search:.3e}"),
        )
    });
}

#[test]
fn c6_degenerate_orbit() {
    criterion(6, "degenerate orbit", 5, || {
        let mut rng = seeded_rng(106);
        let phi = bell();
        let form = schmidt(&phi).unwrap();
        let (mut entropy_err, mut recon) = (0.0f64, 0.0f64);
        for i in 0..100 {
            let u = haar_unitary_with(2, &mut rng);
            let rotated = degenerate_orbit(&form, &u, 0).unwrap();
            recon = recon.max(rotated.reconstruction_error(&phi));
            let s = s_tilde(&phi, &adapted_pair(&rotated, i).unwrap()).unwrap();
            entropy_err = entropy_err.max((s - 2f64.ln()).abs());
        }
        (
            entropy_err <= 1e-12 && recon <= 1e-10,
            format!("max |S~ - ln 2| = {entropy_err:.3e}, max reconstruction error = {recon:.3e}"),
        )
    });
}

#[test]
fn c7_search_matches_closed_form() {
    criterion(7, "search vs closed form", 60, || {
        let mut rng = seeded_rng(107);
        let mut worst = 0.0f64;
        for k in 0..20 {
            let phi = StateVector::random(&[4, 4], &mut rng).unwrap();
            let exact = sq_bipartite(&phi).unwrap().value;
            let found = sq_search(&phi, &SearchOptions::new(10, 200, 1e-10, k)).value;
            worst = worst.max((found - exact).abs());
        }
        (worst <= 1e-6, format!("max |search - closed form| = {worst:.3e}"))
    });
}

#[test]
fn c8_entanglement_production() {
    criterion(8, "entanglement production", 30, || {
        let model = CollisionModel::reference(4, 8);
        let free = model.clone().with_coupling(0.0);
        let (mut produced, mut free_max) = (0, 0.0f64);
        for k in 0..100 {
            let mut rng = seeded_rng(1000 + k);
            let in1 = StateVector::random(&[4], &mut rng).unwrap();
            let in2 = StateVector::random(&[4], &mut rng).unwrap();
            if sq_bipartite(&collide(&model, &in1, &in2).unwrap()).unwrap().value > 0.01 {
                produced += 1;
            }
            free_max = free_max.max(sq_bipartite(&collide(&free, &in1, &in2).unwrap()).unwrap().value);
        }
        (
            produced >= 95 && free_max <= 1e-9,
            format!("{produced}/100 above 0.01; uncoupled max = {free_max:.3e}"),
        )
    });
}

#[test]
fn c9_gas_steady_production() {
    criterion(9, "gas production", 60, || {
        let opts = GasOptions::default();
        let model = CollisionModel::reference(2, 9);
        let coupled = gas_run(3, 2, 20, &model, 9, &opts).unwrap();
        let control = gas_run(3, 2, 20, &model.with_coupling(0.0), 9, &opts).unwrap();
        let control_max = control.sq_estimates.iter().copied().fold(0.0, f64::max);
        (
            coupled.len() == 21 && coupled.last() > 0.0 && control_max <= 1e-6,
            format!("final estimate = {:.6}, control max = {control_max:.3e}", coupled.last()),
        )
    });
}
