use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tnqaoa::instance::random_instance;
use tnqaoa::lattice::{build_device, build_square, Lattice};
use tnqaoa::linalg::{herm_eig, qr, Mat};
use tnqaoa::schedule::Schedule;
use tnqaoa::statevector::{energy, qaoa_state};
use tnqaoa::tn::*;

fn random_schedule(p: usize, rng: &mut ChaCha20Rng) -> Schedule {
    let g = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = (0..p).map(|_| rng.gen_range(-PI..PI)).collect();
    Schedule::new(g, b).unwrap()
}

fn random_unitary(d: usize, rng: &mut ChaCha20Rng) -> Mat {
    let data = (0..d * d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    qr(&Mat::new(d, d, data)).0
}

/// `G = U diag(s) V` with `s ∈ [1, 10]`, and its inverse.
fn random_gauge(d: usize, rng: &mut ChaCha20Rng) -> (Mat, Mat) {
    let u = random_unitary(d, rng);
    let v = random_unitary(d, rng);
    let mut s: Vec<f64> = (0..d).map(|_| rng.gen_range(1.0..10.0)).collect();
    s[0] = 1.0;
    if d > 1 {
        s[1] = 10.0;
    }
    let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
    let g = u.matmul(&Mat::from_diag(&s)).matmul(&v);
    let g_inv = v.adjoint().matmul(&Mat::from_diag(&inv)).matmul(&u.adjoint());
    (g, g_inv)
}

fn path(n: usize) -> Lattice {
    Lattice::from_graph(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
}

fn star(n: usize) -> Lattice {
    Lattice::from_graph(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>()).unwrap()
}

fn evolved(l: &Lattice, seed: u64, p: usize, chi: Option<usize>) -> (tnqaoa::instance::SpinGlassInstance, Schedule, EvolveResult) {
    let inst = random_instance(l, seed);
    let sched = random_schedule(p, &mut ChaCha20Rng::seed_from_u64(seed));
    let r = evolve(TnState::init_plus(l, chi).unwrap(), &inst, &sched, &EvolveConfig::new(chi)).unwrap();
    (inst, sched, r)
}

#[test]
fn bp_messages_stay_psd_over_many_updates() {
    let l = build_square(3, 3).unwrap();
    let one_sweep = BpConfig { max_iters: 1, ..BpConfig::default() };
    let mut steps = 0;
    for seed in 0..10 {
        let (_, _, r) = evolved(&l, seed, 2, Some(3));
        let mut bp = BpCache::identity(&r.state);
        for _ in 0..100 {
            bp = run_bp(&r.state, &one_sweep, Some(&bp)).unwrap();
            steps += 1;
            for m in bp.messages() {
                let (w, _) = herm_eig(m);
                assert!(w[0] >= -1e-12, "min eigenvalue {}", w[0]);
            }
        }
    }
    assert_eq!(steps, 1000);
}

#[test]
fn truncation_weight_is_zero_only_without_cap() {
    let l = build_device("guadalupe").unwrap();
    let (_, _, exact) = evolved(&l, 4, 3, None);
    assert_eq!(exact.total_truncation, 0.0);
    assert!(exact.records.iter().all(|r| r.truncation_weight == 0.0));
    let (_, _, capped) = evolved(&l, 4, 3, Some(2));
    assert!(capped.records.iter().all(|r| r.truncation_weight >= 0.0));
    assert!(capped.total_truncation > 0.0);
}

#[test]
fn entropy_is_invariant_under_unitary_regauging() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for l in [build_square(3, 3).unwrap(), path(6)] {
        let (_, _, r) = evolved(&l, 2, 2, None);
        let before: Vec<EdgeSpectrum> = l.edges().iter().map(|&(a, b)| edge_entropy(&r.state, &r.bp, a, b).unwrap()).collect();
        let mut s = r.state.clone();
        for &(a, b) in l.edges() {
            let u = random_unitary(s.bond_dim(a, b), &mut rng);
            s.gauge_bond(a, b, &u, &u.adjoint()).unwrap();
        }
        let bp = run_bp(&s, &BpConfig { tolerance: 1e-14, max_iters: 400, ..BpConfig::default() }, None).unwrap();
        for (e, old) in l.edges().iter().zip(&before) {
            let new = edge_entropy(&s, &bp, e.0, e.1).unwrap();
            assert!((new.entropy - old.entropy).abs() < 1e-10, "{e:?}: {} vs {}", new.entropy, old.entropy);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn untruncated_contraction_equals_statevector(seed in any::<u64>(), p in 1usize..3, k in 0u8..3) {
        let l = match k {
            0 => build_square(3, 3).unwrap(),
            1 => build_device("guadalupe").unwrap(),
            _ => star(7),
        };
        let (inst, sched, r) = evolved(&l, seed, p, None);
        prop_assert_eq!(r.total_truncation, 0.0);
        let tn = to_dense(&r.state).unwrap();
        let sv = qaoa_state(&inst, &sched).unwrap();
        for (a, b) in tn.iter().zip(sv.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn bp_energy_is_gauge_invariant_on_trees(seed in any::<u64>(), n in 3usize..10, is_star in any::<bool>()) {
        let l = if is_star { star(n) } else { path(n) };
        let (inst, sched, r) = evolved(&l, seed, 2, None);
        let e0 = bp_energy(&r.state, &r.bp, &inst).unwrap();
        let exact = energy(&qaoa_state(&inst, &sched).unwrap(), &inst).unwrap();
        prop_assert!((e0 - exact).abs() < 1e-10);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
        let mut s = r.state.clone();
        let &(a, b) = &l.edges()[rng.gen_range(0..l.edges().len())];
        let (g, g_inv) = random_gauge(s.bond_dim(a, b), &mut rng);
        s.gauge_bond(a, b, &g, &g_inv).unwrap();
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        let e1 = bp_energy(&s, &bp, &inst).unwrap();
        prop_assert!((e1 - e0).abs() < 1e-8, "{} vs {}", e1, e0);
    }
}
