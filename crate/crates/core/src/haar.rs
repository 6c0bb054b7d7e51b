//! Haar-random unitaries, orthogonals and isometries; dataset states; Pauli
//! observables; batched Monte Carlo of `C(ρ_i) = ⟨ψ_i|U† O U|ψ_i⟩`.
//!
//! Randomness comes from ChaCha8 (counter based). A batch is cut into fixed
//! blocks of samples and block `b` draws from stream `b` of the seeded
//! generator, so results do not depend on the number of worker threads.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::overlap::InnerProductMatrix;
use crate::{Error, Group, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Seeded generator for sample block `block`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn gaussian(rng: &mut impl Rng, real: bool) -> Complex64 {
    if real {
        Complex64::new(rng.sample(StandardNormal), 0.0)
    } else {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
}

/// Haar unitary: Ginibre matrix, QR, then columns rephased by `r_jj/|r_jj|`.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng, false));
    let (mut q, r) = g.qr().unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar orthogonal: real Ginibre, QR, columns multiplied by `sign(r_jj)`.
pub fn haar_orthogonal(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (mut q, r) = g.qr().unpack();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormalizes the columns of a column-major `d × r` buffer in place
/// (modified Gram-Schmidt, two passes). Returns false on a vanishing column.
fn orthonormalize_columns(v: &mut [Complex64], d: usize, r: usize) -> bool {
    for j in 0..r {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = v.split_at_mut(j * d);
                let vi = &head[i * d..(i + 1) * d];
                let vj = &mut tail[..d];
                let proj: Complex64 = vi.iter().zip(vj.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in vj.iter_mut().zip(vi) {
                    *x -= proj * y;
                }
            }
        }
        let col = &mut v[j * d..(j + 1) * d];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        let inv = 1.0 / norm;
        for z in col.iter_mut() {
            *z *= inv;
        }
    }
    true
}

fn fill_isometry(buf: &mut [Complex64], d: usize, r: usize, real: bool, rng: &mut impl Rng) {
    loop {
        for z in buf.iter_mut() {
            *z = gaussian(rng, real);
        }
        if orthonormalize_columns(buf, d, r) {
            return;
        }
    }
}

/// First `r` columns of a Haar element of `U(d)` (complex) or `O(d)` (real).
/// Gram-Schmidt on Gaussian columns is QR with a positive diagonal, so no
/// phase correction is needed.
pub fn haar_isometry(d: usize, r: usize, rng: &mut impl Rng, group: Group) -> Result<DMatrix<Complex64>> {
    if r > d {
        return Err(Error::InvalidArgument(format!("isometry with {r} columns in dimension {d}")));
    }
    let mut buf = vec![ZERO; d * r];
    fill_isometry(&mut buf, d, r, group == Group::Orthogonal, rng);
    Ok(DMatrix::from_column_slice(d, r, &buf))
}

/// Haar-random pure state.
pub fn haar_state(d: usize, real: bool, rng: &mut impl Rng) -> PureState {
    let mut buf = vec![ZERO; d];
    fill_isometry(&mut buf, d, 1, real, rng);
    PureState {
        amplitudes: buf,
        real,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    real: bool,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("state norm² is {norm}, not 1")));
        }
        let real = amplitudes.iter().all(|z| z.im == 0.0);
        Ok(PureState { amplitudes, real })
    }

    /// Rescales to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes)
    }

    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::IndexOutOfRange { index, len: d });
        }
        let mut a = vec![ZERO; d];
        a[index] = ONE;
        Ok(PureState {
            amplitudes: a,
            real: true,
        })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let d = qubit_dim(n)?;
        let mut a = vec![ZERO; d];
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        a[0] = h;
        a[d - 1] = h;
        Ok(PureState {
            amplitudes: a,
            real: true,
        })
    }

    /// `(1/√d)|0…0⟩ + √(1 − 1/d)|1…1⟩`, overlap `1/d` with `|0…0⟩`.
    pub fn epsilon(n: usize) -> Result<Self> {
        let d = qubit_dim(n)?;
        let mut a = vec![ZERO; d];
        let p = 1.0 / d as f64;
        a[0] = Complex64::new(p.sqrt(), 0.0);
        a[d - 1] = Complex64::new((1.0 - p).sqrt(), 0.0);
        Ok(PureState {
            amplitudes: a,
            real: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn qubit_dim(n: usize) -> Result<usize> {
    if n == 0 || n > 40 {
        return Err(Error::InvalidArgument(format!("unsupported qubit count {n}")));
    }
    Ok(1usize << n)
}

/// Inner-product matrix of explicit states.
pub fn overlaps_of(states: &[PureState]) -> Result<InnerProductMatrix> {
    let refs: Vec<&[Complex64]> = states.iter().map(|s| s.amplitudes()).collect();
    InnerProductMatrix::from_vectors(&refs)
}

/// A Pauli string on `n` qubits. Qubit 0 is the leftmost character and the
/// most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliObservable {
    spec: String,
    x_mask: usize,
    z_mask: usize,
    y_count: u32,
}

impl TryFrom<String> for PauliObservable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        PauliObservable::new(&s)
    }
}

impl From<PauliObservable> for String {
    fn from(p: PauliObservable) -> Self {
        p.spec
    }
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

impl PauliObservable {
    /// Full string over `{I, X, Y, Z}`, e.g. `"ZIII"`.
    pub fn new(spec: &str) -> Result<Self> {
        let n = spec.chars().count();
        if n == 0 || n > 40 {
            return Err(Error::InvalidArgument(format!("bad Pauli string '{spec}'")));
        }
        let (mut x_mask, mut z_mask, mut y_count) = (0usize, 0usize, 0u32);
        for (q, ch) in spec.chars().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x_mask |= bit,
                'Z' => z_mask |= bit,
                'Y' => {
                    x_mask |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
                _ => return Err(Error::InvalidArgument(format!("bad Pauli string '{spec}'"))),
            }
        }
        if x_mask == 0 && z_mask == 0 {
            return Err(Error::InvalidArgument("the all-identity string is not traceless".into()));
        }
        Ok(PauliObservable {
            spec: spec.to_ascii_uppercase(),
            x_mask,
            z_mask,
            y_count,
        })
    }

    /// Accepts a full string or a sparse form such as `Z1` or `X1Z3` (1-based qubits).
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let t = text.trim();
        if t.chars().all(|c| "IXYZixyz".contains(c)) {
            let p = Self::new(t)?;
            if p.num_qubits() != n {
                return Err(Error::InvalidArgument(format!(
                    "observable '{t}' acts on {} qubits, expected {n}",
                    p.num_qubits()
                )));
            }
            return Ok(p);
        }
        let mut ops = vec!['I'; n];
        let chars: Vec<char> = t.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let op = chars[i].to_ascii_uppercase();
            if !"XYZ".contains(op) {
                return Err(Error::InvalidArgument(format!("bad observable '{t}'")));
            }
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let q: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad observable '{t}'")))?;
            if q == 0 || q > n {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range 1..={n}")));
            }
            ops[q - 1] = op;
        }
        Self::new(&ops.into_iter().collect::<String>())
    }

    /// `Z` on the first qubit.
    pub fn z1(n: usize) -> Result<Self> {
        Self::parse("Z1", n)
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn num_qubits(&self) -> usize {
        self.spec.len()
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    pub fn has_y(&self) -> bool {
        self.y_count > 0
    }

    fn phase(&self, x: usize) -> Complex64 {
        let sign = if (x & self.z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let base = match self.y_count % 4 {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => -ONE,
            _ => Complex64::new(0.0, -1.0),
        };
        base * sign
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        if self.is_diagonal() {
            let z = self.z_mask;
            return psi
                .iter()
                .enumerate()
                .map(|(x, a)| {
                    let p = a.norm_sqr();
                    if (x & z).count_ones() % 2 == 0 {
                        p
                    } else {
                        -p
                    }
                })
                .sum();
        }
        let mut acc = ZERO;
        for (x, a) in psi.iter().enumerate() {
            acc += psi[x ^ self.x_mask].conj() * self.phase(x) * a;
        }
        acc.re
    }

    /// `P|ψ⟩`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; psi.len()];
        for (x, a) in psi.iter().enumerate() {
            out[x ^ self.x_mask] = self.phase(x) * a;
        }
        out
    }

    pub fn check_group(&self, group: Group) -> Result<()> {
        if group == Group::Orthogonal && self.has_y() {
            return Err(Error::InvalidArgument(
                "observables containing Y are not real; the orthogonal group needs real observables".into(),
            ));
        }
        Ok(())
    }
}

/// Orthonormal basis of the span of a state set and each state's coordinates.
#[derive(Debug, Clone)]
pub struct Span {
    pub d: usize,
    /// Column-major `d × r`.
    pub basis: Vec<Complex64>,
    pub r: usize,
    /// `coords[i][j] = ⟨q_j|ψ_i⟩`.
    pub coords: Vec<Vec<Complex64>>,
}

pub fn dataset_span(states: &[PureState]) -> Result<Span> {
    let d = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty state list".into()))?
        .dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::InvalidArgument("states have different dimensions".into()));
    }
    let mut basis: Vec<Complex64> = Vec::new();
    let mut r = 0;
    for s in states {
        let mut v = s.amplitudes().to_vec();
        for _pass in 0..2 {
            for j in 0..r {
                let q = &basis[j * d..(j + 1) * d];
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.extend(v.iter().map(|z| z / norm));
            r += 1;
        }
    }
    let coords = states
        .iter()
        .map(|s| {
            (0..r)
                .map(|j| {
                    basis[j * d..(j + 1) * d]
                        .iter()
                        .zip(s.amplitudes())
                        .map(|(a, b)| a.conj() * b)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(Span { d, basis, r, coords })
}

/// Monte Carlo outputs: `n_samples` rows, one column per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// Row-major `n_samples × columns.len()`.
    pub values: Vec<f64>,
    pub n_samples: usize,
    pub columns: Vec<String>,
    pub group: Group,
    pub d: usize,
    pub seed: u64,
    pub observable: String,
}

impl SampleBatch {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_columns();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let m = self.n_columns();
        self.values.iter().skip(j).step_by(m).copied().collect()
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "group": self.group,
            "d": self.d,
            "seed": self.seed,
            "observable": self.observable,
            "state_labels": self.columns,
            "n_samples": self.n_samples,
        })
    }

    /// One row per sample, one column per state; full precision.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(&self.columns).map_err(|e| Error::io(path, e))?;
        for i in 0..self.n_samples {
            w.write_record(self.row(i).iter().map(|x| format_float(*x)))
                .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.metadata()).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sampling knobs that do not change the distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    /// Samples per RNG stream; part of the reproducibility contract.
    pub block_size: usize,
    /// Upper bound on `d · r` per worker buffer and on stored values.
    pub max_elements: u128,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            block_size: 64,
            max_elements: 1 << 30,
        }
    }
}

fn guard(requested: u128, limit: u128) -> Result<()> {
    if requested > limit {
        Err(Error::MemoryGuard { requested, limit })
    } else {
        Ok(())
    }
}

fn validate(states: &[PureState], obs: &PauliObservable, group: Group) -> Result<usize> {
    let d = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("no states given".into()))?
        .dim();
    if obs.dim() != d {
        return Err(Error::InvalidArgument(format!(
            "observable acts on dimension {}, states live in {d}",
            obs.dim()
        )));
    }
    obs.check_group(group)?;
    if group == Group::Orthogonal && states.iter().any(|s| !s.is_real()) {
        return Err(Error::RealStatesRequired);
    }
    Ok(d)
}

/// Runs `per_sample` over `n_samples` with block-wise RNG streams; rows are
/// written in sample order.
fn run_blocks<S: Send>(
    n_samples: usize,
    width: usize,
    seed: u64,
    block_size: usize,
    init: impl Fn() -> S + Sync + Send,
    per_sample: impl Fn(&mut S, &mut ChaCha8Rng, &mut [f64]) + Sync + Send,
) -> Vec<f64> {
    let block_size = block_size.max(1);
    let mut values = vec![0.0; n_samples * width];
    values
        .par_chunks_mut(block_size * width)
        .enumerate()
        .for_each_init(&init, |state, (b, chunk)| {
            let mut rng = block_rng(seed, b as u64);
            for row in chunk.chunks_mut(width) {
                per_sample(state, &mut rng, row);
            }
        });
    values
}

/// Joint samples of `C(ρ_i)` for all states under one Haar draw per sample.
pub fn sample_outputs(
    states: &[PureState],
    labels: &[String],
    obs: &PauliObservable,
    group: Group,
    n_samples: usize,
    seed: u64,
) -> Result<SampleBatch> {
    sample_outputs_with(states, labels, obs, group, n_samples, seed, SamplerOptions::default())
}

pub fn sample_outputs_with(
    states: &[PureState],
    labels: &[String],
    obs: &PauliObservable,
    group: Group,
    n_samples: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<SampleBatch> {
    let d = validate(states, obs, group)?;
    if labels.len() != states.len() {
        return Err(Error::InvalidArgument("one label per state required".into()));
    }
    let span = dataset_span(states)?;
    let (r, m) = (span.r, states.len());
    guard((d * r) as u128, opts.max_elements)?;
    guard((n_samples * m) as u128, opts.max_elements)?;
    let real = group == Group::Orthogonal;

    let values = run_blocks(
        n_samples,
        m,
        seed,
        opts.block_size,
        || (vec![ZERO; d * r], vec![ZERO; d]),
        |(v, phi), rng, row| {
            fill_isometry(v, d, r, real, rng);
            for (i, out) in row.iter_mut().enumerate() {
                let coords = &span.coords[i];
                if r == 1 {
                    *out = obs.expectation(&v[..d]);
                    continue;
                }
                for (x, p) in phi.iter_mut().enumerate() {
                    *p = (0..r).map(|j| v[j * d + x] * coords[j]).sum();
                }
                *out = obs.expectation(phi);
            }
        },
    );
    Ok(SampleBatch {
        values,
        n_samples,
        columns: labels.to_vec(),
        group,
        d,
        seed,
        observable: obs.spec().to_string(),
    })
}

/// Reference sampler drawing the full `d × d` Haar matrix each time.
pub fn sample_outputs_full_matrix(
    states: &[PureState],
    obs: &PauliObservable,
    group: Group,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let d = validate(states, obs, group)?;
    let mut rng = block_rng(seed, u64::MAX);
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = match group {
            Group::Unitary => haar_unitary(d, &mut rng),
            Group::Orthogonal => haar_orthogonal(d, &mut rng).map(|x| Complex64::new(x, 0.0)),
        };
        out.push(
            states
                .iter()
                .map(|s| {
                    let phi = &u * nalgebra::DVector::from_column_slice(s.amplitudes());
                    obs.expectation(phi.as_slice())
                })
                .collect(),
        );
    }
    Ok(out)
}

/// Parameter-shift samples `∂C = C⁺ − C⁻` with `C^± = ⟨φ|R_±† O R_±|φ⟩`,
/// `R_± = exp(∓ i π/4 H)` and `φ = U|ψ⟩`. Columns: `grad`, `c_plus`, `c_minus`.
/// The generator is `X` on the first qubit.
pub fn parameter_shift_gradient_samples(
    state: &PureState,
    obs: &PauliObservable,
    group: Group,
    n_samples: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let generator = PauliObservable::parse("X1", obs.num_qubits())?;
    parameter_shift_gradient_samples_with_generator(state, obs, &generator, group, n_samples, seed)
}

pub fn parameter_shift_gradient_samples_with_generator(
    state: &PureState,
    obs: &PauliObservable,
    generator: &PauliObservable,
    group: Group,
    n_samples: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if group != Group::Unitary {
        return Err(Error::Unsupported(
            "parameter-shift gradients are defined for the unitary group only".into(),
        ));
    }
    let d = validate(std::slice::from_ref(state), obs, group)?;
    if generator.dim() != d {
        return Err(Error::InvalidArgument("generator dimension mismatch".into()));
    }
    let opts = SamplerOptions::default();
    guard(d as u128, opts.max_elements)?;
    guard((n_samples * 3) as u128, opts.max_elements)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let values = run_blocks(
        n_samples,
        3,
        seed,
        opts.block_size,
        || (vec![ZERO; d], vec![ZERO; d]),
        |(phi, shifted), rng, row| {
            fill_isometry(phi, d, 1, false, rng);
            let hphi = generator.apply(phi);
            let mut eval = |sign: f64| {
                for ((s, p), g) in shifted.iter_mut().zip(phi.iter()).zip(&hphi) {
                    *s = *p * h - Complex64::new(0.0, sign * h) * g;
                }
                obs.expectation(shifted)
            };
            let plus = eval(1.0);
            let minus = eval(-1.0);
            row[0] = plus - minus;
            row[1] = plus;
            row[2] = minus;
        },
    );
    Ok(SampleBatch {
        values,
        n_samples,
        columns: vec!["grad".into(), "c_plus".into(), "c_minus".into()],
        group,
        d,
        seed,
        observable: obs.spec().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Computational,
    GhzPair,
    EpsilonPair,
    OrthonormalBasis,
    HaarRandom,
    Clustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub qubits: usize,
    /// Number of states (basis, Haar) or states per class (clustered).
    pub size: usize,
    /// Basis indices for `Computational`.
    pub indices: Vec<usize>,
    pub classes: usize,
    /// Perturbation strength around cluster centers.
    pub spread: f64,
    pub real: bool,
    pub seed: u64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        DatasetParams {
            qubits: 4,
            size: 2,
            indices: vec![0],
            classes: 2,
            spread: 0.1,
            real: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub states: Vec<PureState>,
    pub labels: Vec<String>,
    pub overlaps: InnerProductMatrix,
}

impl Dataset {
    pub fn d(&self) -> usize {
        self.states[0].dim()
    }
}

pub fn make_dataset(kind: DatasetKind, params: &DatasetParams) -> Result<Dataset> {
    let n = params.qubits;
    let d = qubit_dim(n)?;
    let (states, labels): (Vec<PureState>, Vec<String>) = match kind {
        DatasetKind::Computational => {
            if params.indices.is_empty() {
                return Err(Error::InvalidArgument("no basis indices given".into()));
            }
            params
                .indices
                .iter()
                .map(|&i| Ok((PureState::basis(d, i)?, format!("basis_{i}"))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        DatasetKind::GhzPair => (
            vec![PureState::basis(d, 0)?, PureState::ghz(n)?],
            vec!["zero".into(), "ghz".into()],
        ),
        DatasetKind::EpsilonPair => (
            vec![PureState::basis(d, 0)?, PureState::epsilon(n)?],
            vec!["zero".into(), "psi".into()],
        ),
        DatasetKind::OrthonormalBasis => {
            if params.size == 0 || params.size > d {
                return Err(Error::InvalidArgument(format!("basis size {} not in 1..={d}", params.size)));
            }
            (0..params.size)
                .map(|i| Ok((PureState::basis(d, i)?, format!("basis_{i}"))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        DatasetKind::HaarRandom => {
            if params.size == 0 {
                return Err(Error::InvalidArgument("empty dataset".into()));
            }
            let mut rng = block_rng(params.seed, 0);
            (0..params.size)
                .map(|i| (haar_state(d, params.real, &mut rng), format!("haar_{i}")))
                .unzip()
        }
        DatasetKind::Clustered => {
            if params.classes == 0 || params.classes > d || params.size == 0 {
                return Err(Error::InvalidArgument("need 1..=d classes and a positive class size".into()));
            }
            if !(params.spread >= 0.0 && params.spread.is_finite()) {
                return Err(Error::InvalidArgument("spread must be finite and non-negative".into()));
            }
            let mut rng = block_rng(params.seed, 0);
            let mut out = Vec::new();
            for c in 0..params.classes {
                for i in 0..params.size {
                    let g = haar_state(d, params.real, &mut rng);
                    let mut a: Vec<Complex64> = g.amplitudes().iter().map(|z| z * params.spread).collect();
                    a[c] += ONE;
                    out.push((PureState::normalized(a)?, format!("class{c}_{i}")));
                }
            }
            out.into_iter().unzip()
        }
    };
    let overlaps = overlaps_of(&states)?;
    Ok(Dataset {
        states,
        labels,
        overlaps,
    })
}

/// Parses `zero`, `ghz-pair`, `epsilon-pair`, `basis:M`, `haar:M`,
/// `clustered:CxM` or `computational:i,j,…`.
pub fn parse_dataset_spec(spec: &str, qubits: usize, seed: u64, real: bool) -> Result<Dataset> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = || Error::InvalidArgument(format!("bad state spec '{spec}'"));
    let mut p = DatasetParams {
        qubits,
        seed,
        real,
        ..DatasetParams::default()
    };
    let kind = match name {
        "zero" => {
            p.indices = vec![0];
            DatasetKind::Computational
        }
        "computational" => {
            p.indices = arg
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            DatasetKind::Computational
        }
        "ghz-pair" | "ghz" => DatasetKind::GhzPair,
        "epsilon-pair" | "psi" => DatasetKind::EpsilonPair,
        "basis" => {
            p.size = arg.parse().map_err(|_| bad())?;
            DatasetKind::OrthonormalBasis
        }
        "haar" => {
            p.size = arg.parse().map_err(|_| bad())?;
            DatasetKind::HaarRandom
        }
        "clustered" => {
            let (c, m) = arg.split_once('x').ok_or_else(bad)?;
            p.classes = c.parse().map_err(|_| bad())?;
            p.size = m.parse().map_err(|_| bad())?;
            DatasetKind::Clustered
        }
        _ => return Err(bad()),
    };
    make_dataset(kind, &p)
}
