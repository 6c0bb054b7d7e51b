mod common;

use common::{mean_and_se, pauli_string};
use haargp::empirics::{chi_squared_test, ks_test_two_sample};
use haargp::haar::*;
use haargp::{Error, Group};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn haar_unitary_is_unitary() {
    let mut r = rng(1);
    for d in [1usize, 2, 5, 16] {
        let u = haar_unitary(d, &mut r);
        let err = (u.adjoint() * &u - nalgebra::DMatrix::<Complex64>::identity(d, d)).norm();
        assert!(err < 1e-10, "d={d}: {err}");
    }
    let u = haar_unitary(1, &mut r);
    assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn haar_orthogonal_is_orthogonal_with_balanced_determinant() {
    let mut r = rng(2);
    for d in [1usize, 3, 8] {
        let o = haar_orthogonal(d, &mut r);
        let err = (o.transpose() * &o - nalgebra::DMatrix::<f64>::identity(d, d)).norm();
        assert!(err < 1e-10);
    }
    let n = 20_000;
    for d in [1usize, 4] {
        let dets: Vec<f64> = (0..n)
            .map(|_| {
                let det = haar_orthogonal(d, &mut r).determinant();
                assert!((det.abs() - 1.0).abs() < 1e-10);
                if det > 0.0 { 1.0 } else { 0.0 }
            })
            .collect();
        let (m, se) = mean_and_se(&dets);
        assert!((m - 0.5).abs() <= 4.0 * se, "d={d}: {m} ± {se}");
    }
}

#[test]
fn first_moment_of_entries() {
    let mut r = rng(3);
    let n = 100_000;
    let u: Vec<f64> = (0..n).map(|_| haar_unitary(4, &mut r)[(0, 0)].norm_sqr()).collect();
    let (m, se) = mean_and_se(&u);
    assert!((m - 0.25).abs() <= 4.0 * se, "{m} ± {se}");
    let o: Vec<f64> = (0..n).map(|_| haar_orthogonal(4, &mut r)[(0, 0)].powi(2)).collect();
    let (m, se) = mean_and_se(&o);
    assert!((m - 0.25).abs() <= 4.0 * se, "{m} ± {se}");
}

#[test]
fn entry_distribution_does_not_depend_on_position() {
    // |U_ij|² ~ Beta(1, d−1); count exceedances of its median for every entry.
    let d = 8usize;
    let n = 10_000;
    let t = 1.0 - 0.5f64.powf(1.0 / (d as f64 - 1.0));
    let mut above = vec![0f64; d * d];
    let mut r = rng(4);
    for _ in 0..n {
        let u = haar_unitary(d, &mut r);
        for i in 0..d {
            for j in 0..d {
                if u[(i, j)].norm_sqr() > t {
                    above[i * d + j] += 1.0;
                }
            }
        }
    }
    let mut observed = Vec::new();
    for a in &above {
        observed.push(*a);
        observed.push(n as f64 - a);
    }
    let expected = vec![n as f64 / 2.0; 2 * d * d];
    let res = chi_squared_test(&observed, &expected, (d * d) as f64).unwrap();
    assert!(res.p_value > 0.001, "{res:?}");
}

#[test]
fn isometry_has_orthonormal_columns() {
    let mut r = rng(5);
    for group in Group::ALL {
        for (d, k) in [(2usize, 1usize), (16, 5), (300, 7), (8, 8)] {
            let v = haar_isometry(d, k, &mut r, group).unwrap();
            let err = (v.adjoint() * &v - nalgebra::DMatrix::<Complex64>::identity(k, k)).norm();
            assert!(err < 1e-10);
            if group == Group::Orthogonal {
                assert!(v.iter().all(|z| z.im == 0.0));
            }
        }
    }
    assert!(matches!(
        haar_isometry(2, 3, &mut r, Group::Unitary),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn single_qubit_output_is_uniform() {
    // Bloch-sphere oracle: ⟨Z⟩ of a Haar qubit state is uniform on [−1, 1].
    let psi = PureState::basis(2, 0).unwrap();
    let z = PauliObservable::new("Z").unwrap();
    let batch = sample_outputs(&[psi], &labels(1), &z, Group::Unitary, 100_000, 6).unwrap();
    let v = batch.column(0);
    let bins = 20;
    let mut counts = vec![0f64; bins];
    for x in &v {
        counts[(((x + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let expected = vec![v.len() as f64 / bins as f64; bins];
    let res = chi_squared_test(&counts, &expected, (bins - 1) as f64).unwrap();
    assert!(res.p_value > 0.001, "{res:?}");

    let (m, se) = mean_and_se(&v);
    assert!(m.abs() <= 4.0 * se);
    let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    assert!((var / (1.0 / 3.0) - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn isometry_path_matches_full_matrix_sampling() {
    let n = 4;
    let ds = make_dataset(
        DatasetKind::GhzPair,
        &DatasetParams {
            qubits: n,
            ..Default::default()
        },
    )
    .unwrap();
    let obs = PauliObservable::z1(n).unwrap();
    let draws = 10_000;
    for group in Group::ALL {
        let fast = sample_outputs(&ds.states, &ds.labels, &obs, group, draws, 7).unwrap();
        let full = sample_outputs_full_matrix(&ds.states, &obs, group, draws, 8).unwrap();
        let fast_prod: Vec<f64> = (0..draws).map(|i| fast.row(i)[0] * fast.row(i)[1]).collect();
        let full_prod: Vec<f64> = full.iter().map(|r| r[0] * r[1]).collect();
        let (a, sa) = mean_and_se(&fast_prod);
        let (b, sb) = mean_and_se(&full_prod);
        assert!((a - b).abs() <= 4.0 * (sa * sa + sb * sb).sqrt(), "{group}: {a} vs {b}");

        let ks = ks_test_two_sample(&fast.column(0), &full.iter().map(|r| r[0]).collect::<Vec<_>>()).unwrap();
        assert!(ks.p_value > 0.001, "{group}: {ks:?}");
    }
}

#[test]
fn large_dimension_pair_covariance_matches_exact_value() {
    let n = 10;
    let d = 1u64 << n;
    let ds = make_dataset(
        DatasetKind::GhzPair,
        &DatasetParams {
            qubits: n,
            ..Default::default()
        },
    )
    .unwrap();
    let obs = PauliObservable::z1(n).unwrap();
    let batch = sample_outputs(&ds.states, &ds.labels, &obs, Group::Unitary, 10_000, 9).unwrap();
    let prod: Vec<f64> = (0..batch.n_samples).map(|i| batch.row(i)[0] * batch.row(i)[1]).collect();
    let (m, se) = mean_and_se(&prod);
    let exact = haargp::exact::exact_covariance_f64(0.5, d, Group::Unitary).unwrap();
    assert!((m - exact).abs() <= 4.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn sampling_is_reproducible_across_thread_counts() {
    let ds = make_dataset(
        DatasetKind::HaarRandom,
        &DatasetParams {
            qubits: 5,
            size: 3,
            seed: 11,
            real: false,
            ..Default::default()
        },
    )
    .unwrap();
    let obs = PauliObservable::new("ZXIYZ").unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_outputs(&ds.states, &ds.labels, &obs, Group::Unitary, 1000, 42).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert!(a.values.iter().all(|x| x.abs() <= 1.0 + 1e-12));
    let c = sample_outputs(&ds.states, &ds.labels, &obs, Group::Unitary, 1000, 43).unwrap();
    assert_ne!(a.values, c.values);
}

#[test]
fn pauli_parsing() {
    let p = PauliObservable::parse("Z1", 4).unwrap();
    assert_eq!(p.spec(), "ZIII");
    assert!(p.is_diagonal());
    let q = PauliObservable::parse("x1z3", 3).unwrap();
    assert_eq!(q.spec(), "XIZ");
    assert!(!q.is_diagonal());
    assert_eq!(PauliObservable::parse("iziy", 4).unwrap().spec(), "IZIY");
    assert!(PauliObservable::new("III").is_err());
    assert!(PauliObservable::new("ZQ").is_err());
    assert!(PauliObservable::parse("Z5", 4).is_err());
    assert!(PauliObservable::parse("ZZ", 3).is_err());
    let y = PauliObservable::new("YZ").unwrap();
    assert!(y.check_group(Group::Orthogonal).is_err());
    assert!(y.check_group(Group::Unitary).is_ok());
    let json = serde_json::to_string(&q).unwrap();
    assert_eq!(json, "\"XIZ\"");
    assert_eq!(serde_json::from_str::<PauliObservable>(&json).unwrap(), q);
}

proptest! {
    #[test]
    fn pauli_action_matches_dense_matrix(spec in "[IXYZ]{3}", seed in 0u64..1000) {
        prop_assume!(spec != "III");
        let p = PauliObservable::new(&spec).unwrap();
        let psi = common::random_state(8, false, &mut rng(seed));
        let dense = pauli_string(&spec);
        let v = DVector::from_column_slice(&psi);
        let applied = &dense * &v;
        let fast = p.apply(&psi);
        for (a, b) in fast.iter().zip(applied.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let e = (v.adjoint() * applied)[(0, 0)].re;
        prop_assert!((p.expectation(&psi) - e).abs() < 1e-12);
    }
}

#[test]
fn dataset_examples() {
    for n in [1usize, 3, 6] {
        let d = 1usize << n;
        let p = DatasetParams {
            qubits: n,
            ..Default::default()
        };
        let ghz = make_dataset(DatasetKind::GhzPair, &p).unwrap();
        assert!((ghz.overlaps.fidelity(0, 1).re - 0.5).abs() < 1e-15);
        let eps = make_dataset(DatasetKind::EpsilonPair, &p).unwrap();
        assert!((eps.overlaps.fidelity(0, 1).re - 1.0 / d as f64).abs() < 1e-15);
    }
    let basis = make_dataset(
        DatasetKind::OrthonormalBasis,
        &DatasetParams {
            qubits: 3,
            size: 8,
            ..Default::default()
        },
    )
    .unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_eq!(basis.overlaps.fidelity(i, j).re, want);
        }
    }
    let too_big = DatasetParams {
        qubits: 2,
        size: 5,
        ..Default::default()
    };
    assert!(make_dataset(DatasetKind::OrthonormalBasis, &too_big).is_err());

    let clustered = make_dataset(
        DatasetKind::Clustered,
        &DatasetParams {
            qubits: 6,
            size: 3,
            classes: 2,
            spread: 0.1,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(clustered.states.len(), 6);
    let f = |i, j| clustered.overlaps.fidelity(i, j).re;
    assert!(f(0, 1) > 0.9 && f(3, 4) > 0.9);
    assert!(f(0, 3) < 0.1);
    assert!(clustered.states.iter().all(PureState::is_real));

    let haar = make_dataset(
        DatasetKind::HaarRandom,
        &DatasetParams {
            qubits: 4,
            size: 3,
            real: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!haar.states[0].is_real());
    let comp = parse_dataset_spec("computational:0,5", 3, 0, true).unwrap();
    assert_eq!(comp.labels, vec!["basis_0", "basis_5"]);
    assert!(parse_dataset_spec("computational:9", 3, 0, true).is_err());
    assert!(parse_dataset_spec("nonsense", 3, 0, true).is_err());
    assert_eq!(parse_dataset_spec("clustered:2x3", 4, 0, true).unwrap().states.len(), 6);
}

#[test]
fn pure_state_validation() {
    assert!(PureState::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
    let s = PureState::normalized(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
    assert!(!s.is_real());
    assert!((s.inner(&s).re - 1.0).abs() < 1e-15);
    assert!(PureState::normalized(vec![Complex64::new(0.0, 0.0)]).is_err());
    assert!(PureState::basis(4, 4).is_err());
}

#[test]
fn span_reconstructs_states() {
    let ds = parse_dataset_spec("haar:3", 4, 5, false).unwrap();
    let mut states = ds.states.clone();
    states.push(ds.states[0].clone());
    let span = dataset_span(&states).unwrap();
    assert_eq!(span.r, 3);
    for (s, coords) in states.iter().zip(&span.coords) {
        for x in 0..span.d {
            let v: Complex64 = (0..span.r).map(|j| span.basis[j * span.d + x] * coords[j]).sum();
            assert!((v - s.amplitudes()[x]).norm() < 1e-12);
        }
    }
}

#[test]
fn group_and_dimension_checks() {
    let complex = parse_dataset_spec("haar:1", 3, 0, false).unwrap();
    let z = PauliObservable::z1(3).unwrap();
    assert!(matches!(
        sample_outputs(&complex.states, &complex.labels, &z, Group::Orthogonal, 10, 0),
        Err(Error::RealStatesRequired)
    ));
    let y = PauliObservable::new("YII").unwrap();
    let real = parse_dataset_spec("zero", 3, 0, true).unwrap();
    assert!(sample_outputs(&real.states, &real.labels, &y, Group::Orthogonal, 10, 0).is_err());
    let wrong = PauliObservable::z1(4).unwrap();
    assert!(sample_outputs(&real.states, &real.labels, &wrong, Group::Unitary, 10, 0).is_err());
    let opts = SamplerOptions {
        max_elements: 4,
        ..Default::default()
    };
    assert!(matches!(
        sample_outputs_with(&real.states, &real.labels, &z, Group::Unitary, 10, 0, opts),
        Err(Error::MemoryGuard { .. })
    ));
}

#[test]
fn orthogonal_outputs_have_twice_the_variance() {
    let n = 8;
    let d = (1usize << n) as f64;
    let ds = parse_dataset_spec("zero", n, 0, true).unwrap();
    let z = PauliObservable::z1(n).unwrap();
    let b = sample_outputs(&ds.states, &ds.labels, &z, Group::Orthogonal, 20_000, 12).unwrap();
    let sq: Vec<f64> = b.column(0).iter().map(|x| x * x).collect();
    let (m, se) = mean_and_se(&sq);
    let exact = 2.0 / (d + 2.0);
    assert!((m - exact).abs() <= 4.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn gradient_samples() {
    let n = 6;
    let d = 64.0;
    let psi = PureState::basis(64, 0).unwrap();
    let z = PauliObservable::z1(n).unwrap();
    let b = parameter_shift_gradient_samples(&psi, &z, Group::Unitary, 100_000, 13).unwrap();
    assert_eq!(b.columns, vec!["grad", "c_plus", "c_minus"]);
    let g = b.column(0);
    let (m, se) = mean_and_se(&g);
    assert!(m.abs() <= 4.0 * se);
    let sq: Vec<f64> = g.iter().map(|x| x * x).collect();
    let (v, vse) = mean_and_se(&sq);
    assert!(v <= 4.0 / d + 5.0 * vse, "{v} ± {vse}");
    for i in 0..b.n_samples {
        let r = b.row(i);
        assert!((r[0] - (r[1] - r[2])).abs() < 1e-15);
    }
    let c = 4.0 / d.sqrt();
    let n_s = b.n_samples as f64;
    let grad_tail = g.iter().filter(|x| x.abs() >= c).count() as f64 / n_s;
    let plus = b.column(1).iter().filter(|x| x.abs() >= c / 2.0).count() as f64 / n_s;
    let minus = b.column(2).iter().filter(|x| x.abs() >= c / 2.0).count() as f64 / n_s;
    assert!(grad_tail <= plus + minus);

    assert!(matches!(
        parameter_shift_gradient_samples(&psi, &z, Group::Orthogonal, 10, 0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn batch_exports_round_trip() {
    let ds = parse_dataset_spec("ghz-pair", 3, 0, true).unwrap();
    let z = PauliObservable::z1(3).unwrap();
    let b = sample_outputs(&ds.states, &ds.labels, &z, Group::Unitary, 50, 14).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    b.write_csv(&path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), vec!["zero", "ghz"]);
    let back: Vec<f64> = rd
        .records()
        .flat_map(|r| r.unwrap().iter().map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert_eq!(back, b.values);
    let side = dir.path().join("s.json");
    b.write_sidecar(&side).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(meta["group"], "unitary");
    assert_eq!(meta["d"], 8);
    assert_eq!(meta["seed"], 14);
    assert_eq!(meta["observable"], "ZII");
    assert_eq!(meta["state_labels"][1], "ghz");
}
