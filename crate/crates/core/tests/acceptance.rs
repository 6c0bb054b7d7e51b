//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run alone with `cargo test -p haargp --test acceptance`. The process fails
//! when a criterion fails unless it is listed in `KNOWN_UNATTAINABLE`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use clap::Parser;
use common::*;
use haargp::brauer::{trace_cycle_product, trace_obs_power, trace_state_product_brauer};
use haargp::cli::{run_config, Cli, ExperimentConfig, Report, Table};
use haargp::empirics::{batch_means, tail_frequency, DEFAULT_BATCHES};
use haargp::exact::{exact_covariance, exact_moment, gram_matrix, weingarten_matrix, CommutantBasis, MomentSpec};
use haargp::gp_inference::{triviality_report, GPModel, KernelMode};
use haargp::gp_moments::asymptotic_moment_pairings_with;
use haargp::haar::{parameter_shift_gradient_samples, parse_dataset_spec, sample_outputs, PauliObservable, PureState};
use haargp::overlap::{ExactComplex, InnerProductMatrix};
use haargp::perm::{enumerate_group, trace_state_product};
use haargp::tails::{
    gaussian_tail, gradient_bound, loss_bound, output_bounds, output_sigma,
};
use haargp::Group;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated; see the decisions ledger.
const KNOWN_UNATTAINABLE: &[usize] = &[8];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rel_close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-10 * want.abs().max(1.0)
}

fn run(args: &[&str], out: &std::path::Path) -> Result<Report, String> {
    let mut full = vec!["haargp"];
    full.extend_from_slice(args);
    let out = out.to_str().unwrap().to_owned();
    full.extend(["--out", &out]);
    let cli = Cli::try_parse_from(full).map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::resolve(cli.command, cli.options).map_err(|e| e.to_string())?;
    run_config(&cfg).map_err(|e| e.to_string())
}

fn cell(t: &Table, k: &str, column: &str) -> f64 {
    t.lookup("k", k, column).and_then(|c| c.as_f64()).unwrap()
}

fn c1_figure3() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let r = run(&["figure3", "--qubits", "10", "--samples", "10000", "--order", "6", "--observable", "Z1"], dir.path())?;
    let secs = start.elapsed().as_secs_f64();
    let mut lines = Vec::new();
    for group in Group::ALL {
        let t = r.table(&format!("figure3_{}_moments", group.as_str())).unwrap();
        let var = cell(t, "2", "moment");
        let model = group.variance_factor() as f64 / 1024.0;
        let rel = (var / model - 1.0).abs();
        let (r4, s4) = (cell(t, "4", "ratio"), cell(t, "4", "ratio_se"));
        let (r6, s6) = (cell(t, "6", "ratio"), cell(t, "6", "ratio_se"));
        ensure(rel <= 0.05, format!("{group} variance off by {rel:.4}"))?;
        ensure((r4 - 3.0).abs() <= 0.3, format!("{group} k=4 ratio {r4}"))?;
        ensure((r6 - 15.0).abs() <= 4.0, format!("{group} k=6 ratio {r6}"))?;
        lines.push(format!("{group}: var rel err {rel:.4}, r4 {r4:.3}±{s4:.3}, r6 {r6:.2}±{s6:.2}"));
    }
    ensure(secs < 60.0, format!("runtime {secs:.1}s"))?;
    Ok(format!("{}; {secs:.1}s", lines.join("; ")))
}

fn correlation(r: &Report, spec: &str) -> f64 {
    let t = r.table(&format!("figure2_unitary_{spec}_covariance")).unwrap();
    let col = t.column("correlation").unwrap();
    t.rows[1][col].as_f64().unwrap()
}

fn c2_figure2() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["figure2", "--qubits", "12", "--samples", "10000"], dir.path())?;
    let ghz = correlation(&r, "ghz-pair");
    let psi = correlation(&r, "epsilon-pair");
    ensure((ghz - 0.5).abs() <= 0.05, format!("GHZ correlation {ghz}"))?;
    ensure(psi.abs() <= 0.05, format!("Ψ correlation {psi}"))?;
    let start = Instant::now();
    let big = run(&["figure2", "--qubits", "18", "--samples", "10000", "--states", "ghz-pair"], dir.path())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 600.0, format!("n=18 took {secs:.0}s"))?;
    let ghz18 = correlation(&big, "ghz-pair");
    Ok(format!("n=12 GHZ {ghz:.4}, Ψ {psi:.4}; n=18 GHZ {ghz18:.4} in {secs:.1}s"))
}

fn c3_golden() -> Outcome {
    for d in [2i64, 3, 5, 10] {
        let du = d as u64;
        let n = |x: i64| BigUint::from(x as u64);
        for group in Group::ALL {
            ensure(gram_matrix(1, du, group).unwrap() == vec![vec![n(d)]], "k=1 gram")?;
            ensure(weingarten_matrix(1, du, group).unwrap() == vec![vec![q(1, d)]], "k=1 wg")?;
        }
        let gu = gram_matrix(2, du, Group::Unitary).unwrap();
        ensure(gu == vec![vec![n(d * d), n(d)], vec![n(d), n(d * d)]], format!("unitary gram d={d}"))?;
        let s = q(1, d * d - 1);
        let off = -(&s * q(1, d));
        let wu = weingarten_matrix(2, du, Group::Unitary).unwrap();
        ensure(wu == vec![vec![s.clone(), off.clone()], vec![off, s]], format!("unitary wg d={d}"))?;
        let go = gram_matrix(2, du, Group::Orthogonal).unwrap();
        let wo = weingarten_matrix(2, du, Group::Orthogonal).unwrap();
        let p = q(1, d * (d + 2) * (d - 1));
        for i in 0..3 {
            for j in 0..3 {
                let (g, w) = if i == j { (n(d * d), &p * q(d + 1, 1)) } else { (n(d), -p.clone()) };
                ensure(go[i][j] == g && wo[i][j] == w, format!("orthogonal gram/wg d={d} ({i},{j})"))?;
            }
        }
        let g = InnerProductMatrix::<ExactComplex>::identity(2);
        let m = |group, a: &[usize]| {
            exact_moment(&MomentSpec { group, d: du, assignment: a, overlaps: &g }).unwrap()
        };
        let want = [
            (Group::Unitary, vec![0, 0], q(1, d + 1)),
            (Group::Unitary, vec![0, 1], q(-1, d * d - 1)),
            (Group::Orthogonal, vec![0, 0], q(2, d + 2)),
            (Group::Orthogonal, vec![0, 1], q(-2, (d + 2) * (d - 1))),
        ];
        for (group, a, w) in want {
            let got = m(group, &a);
            ensure(got.im.is_zero() && got.re == w, format!("{group} d={d} {a:?}: {}", got.re))?;
        }
    }
    Ok("d ∈ {2,3,5,10}: gram, wg and k=2 moments equal".into())
}

fn c4_dense() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0usize;
    for d in [2usize, 3] {
        for (group, kmax) in [(Group::Unitary, 4), (Group::Orthogonal, 3)] {
            let real = group == Group::Orthogonal;
            let o = if d == 2 { pauli_z() } else { random_symmetric(d, &mut rng) };
            let mut o_pow = vec![CMat::identity(d, d)];
            for l in 1..=4 {
                o_pow.push(&o_pow[l - 1] * &o);
            }
            for k in 1..=kmax {
                let basis = CommutantBasis::build(k, group).unwrap();
                let dense: Vec<CMat> = (0..basis.len()).map(|i| brauer_matrix(&basis.diagram(i), d)).collect();
                let gram = gram_matrix(k, d as u64, group).unwrap();
                let ok = kron_power(&o, k);
                let states: Vec<Vec<Complex64>> = (0..k).map(|_| random_state(d, real, &mut rng)).collect();
                let refs: Vec<&[Complex64]> = states.iter().map(Vec::as_slice).collect();
                let g = InnerProductMatrix::from_vectors(&refs).unwrap();
                let assignment: Vec<usize> = (0..k).collect();
                let lambda = kron_all(&states.iter().map(|s| density(s)).collect::<Vec<_>>());
                let perms = enumerate_group(k).unwrap();
                for (i, m) in dense.iter().enumerate() {
                    let s = basis.diagram(i);
                    // character
                    let got = s.character(d as u64).to_f64().unwrap();
                    ensure(rel_close(got, trace(m).re), format!("character {group} k={k} d={d} #{i}"))?;
                    // observable kernel
                    let want = trace_product(m, &ok);
                    let got = if d == 2 {
                        trace_obs_power(&s, 2).to_f64().unwrap()
                    } else {
                        trace_cycle_product(&s, |l| trace(&o_pow[l]).re)
                    };
                    ensure(rel_close(got, want.re) && want.im.abs() < 1e-10, format!("O kernel {group} k={k} d={d} #{i}"))?;
                    // pairwise traces
                    for (j, n) in dense.iter().enumerate() {
                        let want = trace_product(m, n).re;
                        ensure(rel_close(gram[i][j].to_f64().unwrap(), want), format!("gram {group} k={k} d={d}"))?;
                    }
                    // state traces
                    let want = trace_product(&lambda, m);
                    let got = match group {
                        Group::Unitary => {
                            let p = s.as_permutation().unwrap();
                            debug_assert!(perms.contains(&p));
                            trace_state_product(&p, &g, &assignment).unwrap()
                        }
                        Group::Orthogonal => trace_state_product_brauer(&s, &g, &assignment).unwrap(),
                    };
                    ensure(close(got, want, 1e-10), format!("Tr[Λ·] {group} k={k} d={d} #{i}: {got} vs {want}"))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} basis elements agree with dense matrices"))
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    batch_means(v, DEFAULT_BATCHES, |x| Ok(x.iter().sum::<f64>() / x.len() as f64)).unwrap()
}

fn c5_monte_carlo() -> Outcome {
    let z = PauliObservable::z1(1).unwrap();
    let s = PureState::basis(2, 0).unwrap();
    let b = sample_outputs(&[s], &["zero".into()], &z, Group::Unitary, 100_000, 5).unwrap();
    let c = b.column(0);
    let mut out = Vec::new();
    for (k, want) in [(2, 1.0 / 3.0), (4, 1.0 / 5.0)] {
        let (m, se) = mean_se(&c.iter().map(|x| x.powi(k)).collect::<Vec<_>>());
        ensure((m - want).abs() <= 4.0 * se, format!("d=2 k={k}: {m} ± {se}"))?;
        out.push(format!("k={k} {m:.5}±{se:.5}"));
    }
    let z3 = PauliObservable::z1(3).unwrap();
    let states = vec![PureState::basis(8, 0).unwrap(), PureState::basis(8, 1).unwrap()];
    let b = sample_outputs(&states, &["a".into(), "b".into()], &z3, Group::Unitary, 100_000, 6).unwrap();
    let prod: Vec<f64> = (0..b.n_samples).map(|i| b.row(i)[0] * b.row(i)[1]).collect();
    let (m, se) = mean_se(&prod);
    ensure((m + 1.0 / 63.0).abs() <= 4.0 * se, format!("d=8 orthogonal states: {m} ± {se}"))?;
    out.push(format!("d=8 pair {m:.5}±{se:.5} vs {:.5}", -1.0 / 63.0));
    Ok(out.join("; "))
}

fn c6_zero_variance() -> Outcome {
    for d in [2u64, 4, 8, 16, 64] {
        for group in Group::ALL {
            let n = BigRational::from_integer(BigInt::from(d));
            let diag = exact_covariance(&BigRational::one(), d, group).unwrap();
            let off = exact_covariance(&BigRational::zero(), d, group).unwrap();
            let total = &n * diag + &n * (&n - BigRational::one()) * off;
            ensure(total.is_zero(), format!("{group} d={d}: {total}"))?;
        }
    }
    Ok("exact zero for d ∈ {2,4,8,16,64}, both groups".into())
}

fn c7_convergence() -> Outcome {
    let g = InnerProductMatrix::<Complex64>::identity(1);
    let mut out = Vec::new();
    for group in Group::ALL {
        let pts: Vec<(f64, f64)> = [16u64, 32, 64, 128]
            .iter()
            .map(|&d| {
                let exact = exact_moment(&MomentSpec { group, d, assignment: &[0, 0], overlaps: &g }).unwrap().re;
                let fid = vec![vec![1.0]];
                let asym = asymptotic_moment_pairings_with(&fid, &[0, 0], d, group).unwrap();
                ((d as f64).ln(), (exact / asym - 1.0).abs().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        ensure((slope + 1.0).abs() <= 0.3, format!("{group} slope {slope}"))?;
        out.push(format!("{group} slope {slope:.3}"));
    }
    Ok(out.join(", "))
}

fn c8_triviality() -> Outcome {
    let d = 1u64 << 18;
    let m = 4;
    let h = 0.5f64.sqrt();
    let rows: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { h }).collect()).collect();
    let g = InnerProductMatrix::<Complex64>::from_real(rows).unwrap();
    let gp = GPModel::from_overlaps(&g, d, Group::Unitary, KernelMode::Asymptotic, Some(100)).unwrap();
    let (cross, prior) = gp.extend(&vec![0.5; m], 1.0).unwrap();
    let r = triviality_report(&gp, &vec![1.0; m], &cross, prior).unwrap();
    let mean = r.predictive.mean.abs();
    let red = r.relative_variance_reduction;
    let detail = format!(
        "|mean| {mean:.3e} (≤ 1e-3), relative variance reduction {red:.3e} (≤ 1e-6), absolute variance shift {:.3e}",
        r.variance_shift
    );
    ensure(mean <= 1e-3 && red <= 1e-6, detail.clone())?;
    Ok(detail)
}

fn c9_tails() -> Outcome {
    let n = 1_000_000;
    let mut worst_margin = f64::INFINITY;
    let mut matches = Vec::new();
    let mut count = 0usize;
    for qubits in [8usize, 10] {
        let d = 1u64 << qubits;
        let obs = PauliObservable::z1(qubits).unwrap();
        for group in Group::ALL {
            let ds = parse_dataset_spec("zero", qubits, 0, true).unwrap();
            let seed = 90 + qubits as u64 + group.variance_factor() as u64;
            let values = sample_outputs(&ds.states, &ds.labels, &obs, group, n, seed).unwrap().column(0);
            let sigma = output_sigma(d, group).unwrap();
            for mult in [1.0, 2.0, 3.0, 4.0] {
                let c = mult * sigma;
                let emp = tail_frequency(&values, c).unwrap();
                for b in output_bounds(c, d, group).unwrap() {
                    let floor = emp.frequency - 4.0 * emp.se;
                    ensure(b.value >= floor, format!("{group} d={d} {}σ {:?}: {} < {floor}", mult, b.kind, b.value))?;
                    worst_margin = worst_margin.min(b.value - floor);
                    count += 1;
                }
                if qubits == 10 && (mult == 2.0 || mult == 3.0) {
                    let g = gaussian_tail(c, sigma).unwrap();
                    let z = (g - emp.frequency) / emp.se;
                    ensure(z.abs() <= 4.0, format!("{group} d={d} {mult}σ match off by {z:.2} SE"))?;
                    matches.push(format!("{group} {mult}σ {z:+.2}SE"));
                }
            }
            let y = 0.5;
            let mean_loss = y * y + sigma * sigma;
            let dev: Vec<f64> = values.iter().map(|c| (c - y) * (c - y) - mean_loss).collect();
            for mult in [2.0, 5.0, 10.0, 20.0] {
                let c = mult / d as f64;
                let emp = tail_frequency(&dev, c).unwrap();
                let b = loss_bound(c, y, d, group).unwrap();
                ensure(b.value >= emp.frequency - 4.0 * emp.se, format!("{group} d={d} loss c={mult}/d"))?;
                count += 1;
            }
            if group == Group::Unitary {
                let gr = parameter_shift_gradient_samples(&ds.states[0], &obs, group, n, seed ^ 0x5a).unwrap().column(0);
                for mult in [1.0, 2.0, 4.0, 6.0] {
                    let c = mult * sigma;
                    let emp = tail_frequency(&gr, c).unwrap();
                    let b = gradient_bound(c, d).unwrap();
                    ensure(b.value >= emp.frequency - 4.0 * emp.se, format!("gradient d={d} {mult}σ"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} bounds sound at 1e6 samples; gaussian match at d=1024: {}", matches.join(", ")))
}

fn c10_factor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    use rand::Rng;
    let mut count = 0;
    for _ in 0..20 {
        let m = 3;
        let mut fid = vec![vec![BigRational::one(); m]; m];
        for i in 0..m {
            for j in 0..i {
                let den = rng.random_range(1i64..50);
                let x = q(rng.random_range(0..=den), den);
                fid[i][j] = x.clone();
                fid[j][i] = x;
            }
        }
        for k in [2usize, 4, 6] {
            let assignment: Vec<usize> = (0..k).map(|_| rng.random_range(0..m)).collect();
            let d = rng.random_range(2u64..100_000);
            let u = asymptotic_moment_pairings_with(&fid, &assignment, d, Group::Unitary).unwrap();
            let o = asymptotic_moment_pairings_with(&fid, &assignment, d, Group::Orthogonal).unwrap();
            let factor = BigRational::from_integer(BigInt::from(1u64 << (k / 2)));
            ensure(o == u * factor, format!("k={k} d={d} {assignment:?}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} rational cases equal exactly"))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "figure 3 reproduction", c1_figure3),
        (2, "figure 2 reproduction", c2_figure2),
        (3, "exact golden values", c3_golden),
        (4, "exact vs dense oracle", c4_dense),
        (5, "exact vs Monte Carlo", c5_monte_carlo),
        (6, "zero-variance identity", c6_zero_variance),
        (7, "asymptotic convergence", c7_convergence),
        (8, "posterior triviality", c8_triviality),
        (9, "tail soundness", c9_tails),
        (10, "orthogonal/unitary factor", c10_factor),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                let known = KNOWN_UNATTAINABLE.contains(&id);
                let tag = if known { " [known unattainable]" } else { "" };
                println!("criterion {id:>2} {name}: FAIL{tag} ({secs:.1}s) {detail}");
                if !known {
                    unexpected.push(id);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
