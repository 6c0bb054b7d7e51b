mod common;

use common::*;
use haargp::brauer::{
    self, brauer_compose, enumerate_brauer, trace_cycle_product, trace_obs_power,
    trace_state_product_brauer, PairPartition,
};
use haargp::overlap::InnerProductMatrix;
use haargp::perm::{self, Permutation};
use haargp::Error;
use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pp(k: usize, pairs: &[(usize, usize)]) -> PairPartition {
    PairPartition::from_pairs(k, pairs).unwrap()
}

fn to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().unwrap()
}

/// The order-7 example diagram and its transpose (0-based points).
fn b7() -> (PairPartition, PairPartition) {
    let s = pp(7, &[(0, 1), (7, 8), (2, 4), (3, 9), (10, 11), (5, 13), (6, 12)]);
    let st = pp(7, &[(0, 1), (7, 8), (2, 10), (3, 4), (9, 11), (5, 13), (6, 12)]);
    (s, st)
}

#[test]
fn enumeration_sizes() {
    let expected = [1usize, 1, 3, 15, 105, 945, 10395];
    for (k, &n) in expected.iter().enumerate().skip(1) {
        let all = enumerate_brauer(k).unwrap();
        assert_eq!(all.len(), n);
        let embedded = all.iter().filter(|s| s.is_permutation()).count();
        assert_eq!(embedded, (1..=k).product::<usize>());
    }
    assert!(matches!(enumerate_brauer(7), Err(Error::Capacity { limit: 6, .. })));
    let k2 = enumerate_brauer(2).unwrap();
    for s in [PairPartition::identity(2), PairPartition::swap(), PairPartition::pi()] {
        assert!(k2.contains(&s));
    }
}

#[test]
fn transpose_examples() {
    let e = PairPartition::identity(3);
    assert_eq!(e.transpose(), e);
    assert_eq!(PairPartition::pi().transpose(), PairPartition::pi());
    let (s, st) = b7();
    assert_eq!(brauer::transpose(&s), st);
    for p in perm::enumerate_group(4).unwrap() {
        let s = PairPartition::from_permutation(&p);
        assert_eq!(s.transpose().as_permutation().unwrap(), p.inverse());
    }
}

#[test]
fn compose_examples() {
    let (r, loops) = brauer_compose(&PairPartition::pi(), &PairPartition::pi()).unwrap();
    assert_eq!((r, loops), (PairPartition::pi(), 1));
    let (r, loops) = brauer_compose(&PairPartition::swap(), &PairPartition::swap()).unwrap();
    assert_eq!((r, loops), (PairPartition::identity(2), 0));
}

#[test]
fn b7_composition_matches_dense() {
    let (s, st) = b7();
    let (r, loops) = brauer_compose(&s, &st).unwrap();
    let lhs = brauer_matrix(&s, 2) * brauer_matrix(&st, 2);
    let rhs = brauer_matrix(&r, 2) * c(2f64.powi(loops as i32));
    assert_eq!(lhs, rhs);
    // Frozen from the dense oracle above.
    assert_eq!(loops, 2);
    assert_eq!(loops + r.num_cycles(), 7);
    // The cycle grouping of the diagram.
    assert_eq!(s.cycle_type().nu, vec![0, 2, 1, 0, 0, 0, 0]);
}

#[test]
fn composition_matches_dense_small_k() {
    for d in [2usize, 3] {
        for k in 1..=3 {
            let all = enumerate_brauer(k).unwrap();
            let dense: Vec<CMat> = all.iter().map(|s| brauer_matrix(s, d)).collect();
            for (i, a) in all.iter().enumerate() {
                for (j, b) in all.iter().enumerate() {
                    let (r, loops) = brauer_compose(a, b).unwrap();
                    let want = &dense[i] * &dense[j];
                    let got = brauer_matrix(&r, d) * c((d as f64).powi(loops as i32));
                    assert_eq!(want, got, "k={k} d={d} a={a:?} b={b:?}");
                }
            }
        }
    }
}

#[test]
fn trace_pairing_is_maximal_only_for_transpose() {
    for d in [2u64, 3] {
        for k in 1..=3 {
            let all = enumerate_brauer(k).unwrap();
            for a in &all {
                for b in &all {
                    let (r, loops) = brauer_compose(a, b).unwrap();
                    let exponent = loops + r.num_cycles();
                    if *b == a.transpose() {
                        assert_eq!(exponent, k);
                    } else {
                        assert!(exponent < k);
                    }
                    let _ = d;
                }
            }
        }
    }
}

#[test]
fn embedded_permutations_compose_like_perm() {
    let group = perm::enumerate_group(4).unwrap();
    for a in &group {
        for b in &group {
            let (r, loops) = brauer_compose(
                &PairPartition::from_permutation(a),
                &PairPartition::from_permutation(b),
            )
            .unwrap();
            assert_eq!(loops, 0);
            assert_eq!(r.as_permutation().unwrap(), perm::compose(a, b).unwrap());
        }
    }
}

#[test]
fn cycles_and_characters() {
    let e = PairPartition::identity(3);
    let (cycles, ct) = brauer::brauer_cycles(&e);
    assert_eq!(cycles.len(), 3);
    assert_eq!(ct.nu, vec![3, 0, 0]);
    assert_eq!(e.character(5), BigUint::from(125u32));
    let pi = PairPartition::pi();
    assert_eq!(pi.num_cycles(), 1);
    assert_eq!(pi.character(7), BigUint::from(7u32));
    for d in [2usize, 3] {
        for k in 1..=3 {
            for s in enumerate_brauer(k).unwrap() {
                assert_eq!(to_f64(&s.character(d as u64)), trace(&brauer_matrix(&s, d)).re);
                let ct = s.cycle_type();
                assert_eq!(ct.order(), k);
                let covered: usize = s.cycles().iter().map(Vec::len).sum();
                assert_eq!(covered, 2 * k);
            }
        }
    }
}

#[test]
fn obs_power_kernel() {
    for s in enumerate_brauer(3).unwrap() {
        assert_eq!(trace_obs_power(&s, 4), BigUint::ZERO);
    }
    assert_eq!(PairPartition::swap().trace_obs_power(9), BigUint::from(9u32));
    let two_cycles = pp(4, &[(0, 1), (4, 5), (2, 3), (6, 7)]);
    assert_eq!(two_cycles.cycle_type().nu, vec![0, 2, 0, 0]);
    let z4 = kron_power(&pauli_z(), 4);
    assert_eq!(trace_product(&brauer_matrix(&two_cycles, 2), &z4).re, 4.0);
    assert_eq!(trace_obs_power(&two_cycles, 2), BigUint::from(4u32));

    for k in 1..=4 {
        let zk = kron_power(&pauli_z(), k);
        for s in enumerate_brauer(k).unwrap() {
            let want = trace_product(&brauer_matrix(&s, 2), &zk).re;
            assert_eq!(to_f64(&trace_obs_power(&s, 2)), want, "{s:?}");
        }
    }
}

#[test]
fn general_cycle_kernel_matches_dense_at_odd_d() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let o = random_symmetric(3, &mut rng);
    let powers: Vec<Complex64> = (0..=3)
        .map(|l| trace(&(0..l).fold(CMat::identity(3, 3), |acc, _| acc * &o)))
        .collect();
    for k in 1..=3 {
        let ok = kron_power(&o, k);
        for s in enumerate_brauer(k).unwrap() {
            let want = trace_product(&brauer_matrix(&s, 3), &ok);
            let got = trace_cycle_product(&s, |l| powers[l]);
            assert!(close(got, want, 1e-10), "{s:?}: {got} vs {want}");
        }
    }
}

fn real_gram(states: &[Vec<Complex64>]) -> InnerProductMatrix {
    let refs: Vec<&[Complex64]> = states.iter().map(Vec::as_slice).collect();
    InnerProductMatrix::from_vectors(&refs).unwrap()
}

#[test]
fn state_traces_brauer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let states: Vec<_> = (0..3).map(|_| random_state(4, true, &mut rng)).collect();
    let g = real_gram(&states);
    assert!(g.is_real());
    let one = trace_state_product_brauer(&PairPartition::identity(2), &g, &[0, 1]).unwrap();
    assert!(close(one, c(1.0), 1e-12));

    let lambda = density(&states[0]).kronecker(&density(&states[1]));
    let want = trace_product(&lambda, &brauer_matrix(&PairPartition::pi(), 4));
    let got = trace_state_product_brauer(&PairPartition::pi(), &g, &[0, 1]).unwrap();
    let swap = trace_state_product_brauer(&PairPartition::swap(), &g, &[0, 1]).unwrap();
    assert!(close(got, want, 1e-12) && close(got, swap, 1e-12));

    for d in [2usize, 3] {
        let states: Vec<_> = (0..3).map(|_| random_state(d, true, &mut rng)).collect();
        let g = real_gram(&states);
        for k in 1..=3 {
            let assignment: Vec<usize> = (0..k).map(|t| (2 * t + 1) % 3).collect();
            let rhos: Vec<CMat> = assignment.iter().map(|&a| density(&states[a])).collect();
            let lambda = kron_all(&rhos);
            for s in enumerate_brauer(k).unwrap() {
                let want = trace_product(&lambda, &brauer_matrix(&s, d));
                let got = trace_state_product_brauer(&s, &g, &assignment).unwrap();
                assert!(close(got, want, 1e-10), "{s:?}");
            }
        }
    }

    let complex: Vec<_> = (0..2).map(|_| random_state(3, false, &mut rng)).collect();
    let gc = real_gram(&complex);
    assert_eq!(
        trace_state_product_brauer(&PairPartition::pi(), &gc, &[0, 1]),
        Err(Error::RealStatesRequired)
    );
}

#[test]
fn serde_round_trip() {
    let (s, _) = b7();
    let json = serde_json::to_string(&s).unwrap();
    let back: PairPartition = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
    let p = Permutation::new(vec![2, 0, 1]).unwrap();
    let back: Permutation = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
}

fn diagram(k: usize) -> impl Strategy<Value = PairPartition> {
    let all = enumerate_brauer(k).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #[test]
    fn transpose_is_an_antihomomorphism(
        (a, b) in (1usize..6).prop_flat_map(|k| (diagram(k), diagram(k)))
    ) {
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        let (ab, l1) = brauer_compose(&a, &b).unwrap();
        let (btat, l2) = brauer_compose(&b.transpose(), &a.transpose()).unwrap();
        prop_assert_eq!(ab.transpose(), btat);
        prop_assert_eq!(l1, l2);
    }

    #[test]
    fn composition_is_associative_with_loops(
        (a, b, c) in (1usize..5).prop_flat_map(|k| (diagram(k), diagram(k), diagram(k)))
    ) {
        let (ab, l1) = brauer_compose(&a, &b).unwrap();
        let (ab_c, l2) = brauer_compose(&ab, &c).unwrap();
        let (bc, l3) = brauer_compose(&b, &c).unwrap();
        let (a_bc, l4) = brauer_compose(&a, &bc).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(l1 + l2, l3 + l4);
    }
}
