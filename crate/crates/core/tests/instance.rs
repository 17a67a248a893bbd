use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tnqaoa::instance::*;
use tnqaoa::lattice::{build_device, build_square, Lattice};

fn spins(x: u64, n: usize) -> Vec<i8> {
    (0..n).map(|q| if (x >> q) & 1 == 1 { -1 } else { 1 }).collect()
}

fn term_cost(terms: &[Term], z: &[i8]) -> i64 {
    terms.iter().map(|t| t.coeff as i64 * t.sites.iter().map(|&s| z[s] as i64).product::<i64>()).sum()
}

/// Square 2×5 carrying linear, quadratic and corner three-body terms.
fn mixed_instance(signs: &[bool]) -> SpinGlassInstance {
    let l = build_square(2, 5).unwrap();
    let sign = |k: usize| if signs[k % signs.len()] { 1 } else { -1 };
    let linear: Vec<(usize, i8)> = (0..l.n()).map(|v| (v, sign(v))).collect();
    let quadratic: Vec<(usize, usize, i8)> = l.edges().iter().enumerate().map(|(k, &(i, j))| (i, j, sign(k + 3))).collect();
    let mut cubic = Vec::new();
    for v in 0..l.n() {
        let nb = l.neighbors(v);
        if nb.len() == 3 {
            cubic.push((v, nb[0], nb[1], sign(v + 7)));
        }
    }
    SpinGlassInstance::new(l, 0, linear, quadratic, cubic).unwrap()
}

fn lattice_for(k: u8) -> Lattice {
    match k {
        0 => build_device("guadalupe").unwrap(),
        1 => build_square(4, 4).unwrap(),
        _ => build_device("geneva").unwrap(),
    }
}

#[test]
fn seeded_instances_are_reproducible() {
    let l = build_device("guadalupe").unwrap();
    let a = random_instance(&l, 42);
    assert_eq!(a, random_instance(&l, 42));
    assert_ne!(a, random_instance(&l, 43));
    assert_eq!(a.cost_operator_terms().len(), l.n() + l.edges().len() + a.cubic.len());
}

#[test]
fn ground_truth_minimizers_attain_the_minimum() {
    let inst = random_instance(&build_square(3, 4).unwrap(), 2);
    let gt = brute_force(&inst).unwrap();
    assert!(gt.count >= 2, "spin-flip symmetry pairs minimizers");
    for z in gt.spins(inst.n()) {
        assert_eq!(inst.cost(&z).unwrap(), gt.energy);
    }
    let direct = (0..1u64 << inst.n()).map(|x| inst.cost_of_index(x)).min().unwrap();
    assert_eq!(gt.energy, direct);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cost_from_terms_matches_direct_cost(signs in proptest::collection::vec(any::<bool>(), 1..40)) {
        let inst = mixed_instance(&signs);
        let terms = inst.cost_operator_terms();
        for x in 0..1u64 << inst.n() {
            let z = spins(x, inst.n());
            let c = inst.cost(&z).unwrap();
            prop_assert_eq!(c, term_cost(&terms, &z));
            prop_assert_eq!(c, inst.cost_of_index(x));
        }
    }

    #[test]
    fn brute_force_is_sound(seed in any::<u64>(), k in 0u8..2) {
        let inst = random_instance(&lattice_for(k), seed);
        let gt = brute_force(&inst).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let z = spins(rng.gen(), inst.n());
            prop_assert!(gt.energy <= inst.cost(&z).unwrap());
        }
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>(), k in 0u8..3) {
        let inst = random_instance(&lattice_for(k), seed);
        let back = SpinGlassInstance::from_json(&inst.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }
}
