//! Dense-matrix reference implementations used as test oracles.
#![allow(dead_code)]

use haargp::brauer::PairPartition;
use haargp::perm::Permutation;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Big-endian digits of a tensor-product basis index.
pub fn digits(mut idx: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

pub fn index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// `P_d(σ)|i_0 … i_{k-1}⟩ = |j⟩` with `j_{σ(l)} = i_l`.
pub fn perm_matrix(p: &Permutation, d: usize) -> CMat {
    let k = p.k();
    let n = d.pow(k as u32);
    let mut m = CMat::zeros(n, n);
    for col in 0..n {
        let i = digits(col, d, k);
        let mut j = vec![0; k];
        for l in 0..k {
            j[p.apply(l)] = i[l];
        }
        m[(index(&j, d), col)] = c(1.0);
    }
    m
}

/// `F_d(s)`: rows are top-row indices, columns bottom-row indices.
pub fn brauer_matrix(s: &PairPartition, d: usize) -> CMat {
    let k = s.k();
    let n = d.pow(k as u32);
    let pairs = s.pairs();
    let mut m = CMat::zeros(n, n);
    for row in 0..n {
        let top = digits(row, d, k);
        for col in 0..n {
            let bottom = digits(col, d, k);
            let label = |p: usize| if p < k { bottom[p] } else { top[p - k] };
            if pairs.iter().all(|&(a, b)| label(a) == label(b)) {
                m[(row, col)] = c(1.0);
            }
        }
    }
    m
}

pub fn kron_all(mats: &[CMat]) -> CMat {
    let mut out = CMat::from_element(1, 1, c(1.0));
    for m in mats {
        out = out.kronecker(m);
    }
    out
}

pub fn kron_power(m: &CMat, k: usize) -> CMat {
    kron_all(&vec![m.clone(); k])
}

pub fn density(psi: &[Complex64]) -> CMat {
    let v = nalgebra::DVector::from_column_slice(psi);
    &v * v.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

/// `Tr[AB]` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

pub fn random_state(d: usize, real: bool, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random real symmetric matrix.
pub fn random_symmetric(d: usize, rng: &mut impl Rng) -> CMat {
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let s = &a + a.transpose();
    s.map(c)
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + b.norm())
}

pub fn pauli(ch: char) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let z = c(0.0);
    match ch {
        'I' => CMat::identity(2, 2),
        'X' => CMat::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => pauli_z(),
        _ => panic!("bad Pauli {ch}"),
    }
}

/// Dense Pauli string; the first character acts on the leftmost tensor factor.
pub fn pauli_string(spec: &str) -> CMat {
    kron_all(&spec.chars().map(pauli).collect::<Vec<_>>())
}

pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
