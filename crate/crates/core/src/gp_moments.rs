//! Asymptotic Gaussian-process moments: pairing sums, Isserlis evaluation and
//! the covariance matrices of the three dataset regimes.

use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::exact::exact_covariance_f64;
use crate::overlap::{InnerProductMatrix, Scalar};
use crate::pairings::for_each_pairing;
use crate::{Error, Group, Result};

/// Numeric field for the pairing sums: `f64` or `BigRational`.
pub trait Field: Num + Clone + FromPrimitive {}
impl<F: Num + Clone + FromPrimitive> Field for F {}

/// How a covariance matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMode {
    /// Exact finite-`d` covariance for every pair of states.
    Exact,
    /// `Tr[ρρ']/d` (×2 orthogonal); states with non-vanishing overlaps.
    Fidelity,
    /// Diagonal `1/d` (×2 orthogonal); overlaps of order `1/d`.
    Diagonal,
    /// Mutually orthogonal states, finite-`d` diagonal and negative off-diagonal.
    OrthogonalStates,
}

impl std::str::FromStr for CovarianceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "fidelity" => Ok(Self::Fidelity),
            "diagonal" => Ok(Self::Diagonal),
            "orthogonal-states" => Ok(Self::OrthogonalStates),
            other => Err(Error::InvalidArgument(format!("unknown covariance mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub entries: Vec<Vec<f64>>,
    pub provenance: CovarianceMode,
    pub min_eigenvalue: f64,
    /// `min_eigenvalue ≥ -1e-10`.
    pub psd: bool,
    pub warnings: Vec<String>,
}

pub const PSD_TOLERANCE: f64 = 1e-10;

impl CovarianceMatrix {
    pub fn from_entries(entries: Vec<Vec<f64>>, provenance: CovarianceMode) -> Result<Self> {
        let m = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument("covariance matrix is not square".into()));
            }
            for j in 0..m {
                if (row[j] - entries[j][i]).abs() > 1e-14 * (1.0 + row[j].abs()) {
                    return Err(Error::InvalidArgument(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        let min_eigenvalue = if m == 0 {
            0.0
        } else {
            DMatrix::from_fn(m, m, |i, j| entries[i][j])
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        };
        let psd = min_eigenvalue >= -PSD_TOLERANCE;
        let mut warnings = Vec::new();
        if !psd {
            warnings.push(format!("not positive semidefinite: min eigenvalue {min_eigenvalue:e}"));
        }
        Ok(CovarianceMatrix {
            entries,
            provenance,
            min_eigenvalue,
            psd,
            warnings,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }
}

/// `Σ_{pairings of 0..k} Π kernel(s, t)`; zero for odd `k`.
pub fn pairing_sum<F: Field>(k: usize, kernel: impl Fn(usize, usize) -> F) -> F {
    if k % 2 == 1 {
        return F::zero();
    }
    let mut total = F::zero();
    for_each_pairing(k, |pairs| {
        let term = pairs
            .iter()
            .fold(F::one(), |acc, &(s, t)| acc * kernel(s, t));
        total = total.clone() + term;
    });
    total
}

fn power<F: Field>(base: F, e: usize) -> F {
    (0..e).fold(F::one(), |acc, _| acc * base.clone())
}

fn int<F: Field>(x: u64) -> F {
    F::from_u64(x).expect("integer fits the field")
}

/// `(1/d^{k/2}) Σ_{σ ∈ T_k} Π Tr[ρ_t ρ_t']`, times `2^{k/2}` for the orthogonal group.
/// `fidelity[i][j] = Tr[ρ_i ρ_j]`.
pub fn asymptotic_moment_pairings_with<F: Field>(
    fidelity: &[Vec<F>],
    assignment: &[usize],
    d: u64,
    group: Group,
) -> Result<F> {
    check_assignment(fidelity.len(), assignment)?;
    let k = assignment.len();
    if k % 2 == 1 {
        return Ok(F::zero());
    }
    let sum = pairing_sum(k, |s, t| fidelity[assignment[s]][assignment[t]].clone());
    let scale = power(int::<F>(group.variance_factor() as u64), k / 2) / power(int::<F>(d), k / 2);
    Ok(sum * scale)
}

pub fn asymptotic_moment_pairings<T: Scalar>(
    g: &InnerProductMatrix<T>,
    assignment: &[usize],
    d: u64,
    group: Group,
) -> Result<f64> {
    asymptotic_moment_pairings_with(&g.fidelity_matrix_f64(), assignment, d, group)
}

/// Isserlis/Wick: `Σ_{pairings} Π cov[a(s)][a(t)]`.
pub fn isserlis_moment_with<F: Field>(cov: &[Vec<F>], assignment: &[usize]) -> Result<F> {
    check_assignment(cov.len(), assignment)?;
    Ok(pairing_sum(assignment.len(), |s, t| {
        cov[assignment[s]][assignment[t]].clone()
    }))
}

pub fn isserlis_moment(cov: &CovarianceMatrix, assignment: &[usize]) -> Result<f64> {
    isserlis_moment_with(&cov.entries, assignment)
}

fn check_assignment(m: usize, assignment: &[usize]) -> Result<()> {
    match assignment.iter().find(|&&a| a >= m) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: m }),
        None => Ok(()),
    }
}

/// Smallest overlap treated as "non-vanishing" in `d` dimensions: `1/log₂(d)²`.
pub fn polylog_threshold(d: u64) -> f64 {
    let l = (d as f64).log2().max(1.0);
    1.0 / (l * l)
}

/// Covariance matrix of the outputs `C(ρ_i)` under the selected description.
/// Regime mismatches produce warnings, not errors.
pub fn covariance_matrix<T: Scalar>(
    g: &InnerProductMatrix<T>,
    d: u64,
    group: Group,
    mode: CovarianceMode,
) -> Result<CovarianceMatrix> {
    if d < 2 {
        return Err(Error::Domain("covariance needs d ≥ 2".into()));
    }
    let m = g.size();
    let fid = g.fidelity_matrix_f64();
    let df = d as f64;
    let factor = group.variance_factor() as f64;
    let mut warnings = Vec::new();
    let off_diagonal = || (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)));

    let entries: Vec<Vec<f64>> = match mode {
        CovarianceMode::Exact => {
            if group == Group::Orthogonal && !g.is_real() {
                return Err(Error::RealStatesRequired);
            }
            let mut e = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..m {
                    e[i][j] = exact_covariance_f64(fid[i][j].clamp(0.0, 1.0), d, group)?;
                }
            }
            e
        }
        CovarianceMode::Fidelity => {
            let threshold = polylog_threshold(d);
            if let Some((i, j)) = off_diagonal().find(|&(i, j)| fid[i][j] < threshold) {
                warnings.push(format!(
                    "overlap Tr[ρ{i}ρ{j}] = {:e} is below 1/log2(d)^2 = {threshold:e}",
                    fid[i][j]
                ));
            }
            fid.iter()
                .map(|r| r.iter().map(|t| factor * t / df).collect())
                .collect()
        }
        CovarianceMode::Diagonal => {
            if let Some((i, j)) = off_diagonal().find(|&(i, j)| fid[i][j] * df > 10.0) {
                warnings.push(format!(
                    "overlap Tr[ρ{i}ρ{j}] = {:e} is not of order 1/d",
                    fid[i][j]
                ));
            }
            (0..m)
                .map(|i| (0..m).map(|j| if i == j { factor / df } else { 0.0 }).collect())
                .collect()
        }
        CovarianceMode::OrthogonalStates => {
            if let Some((i, j)) = off_diagonal().find(|&(i, j)| fid[i][j] > 1e-12) {
                warnings.push(format!("states {i} and {j} are not orthogonal"));
            }
            let (diag, off) = match group {
                Group::Unitary => (1.0 / (df + 1.0), -1.0 / (df * df - 1.0)),
                Group::Orthogonal => (2.0 / (df + 1.0), -1.0 / ((df + 2.0) * (df - 1.0))),
            };
            (0..m)
                .map(|i| (0..m).map(|j| if i == j { diag } else { off }).collect())
                .collect()
        }
    };
    let mut cov = CovarianceMatrix::from_entries(entries, mode)?;
    cov.warnings.extend(warnings);
    Ok(cov)
}

/// How to evaluate moments of mutually orthogonal states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    /// Isserlis over the exact negative covariance of orthogonal states.
    #[default]
    Isserlis,
    /// The positive leading-order expression `|T_k|/d^k` (×2^{k/2} orthogonal).
    PaperLiteral,
}

/// `E[C(ρ_1)⋯C(ρ_k)]` for `k` mutually orthogonal states.
pub fn orthogonal_states_moment_with<F: Field>(k: usize, d: u64, group: Group, mode: SignMode) -> Result<F> {
    if k % 2 == 1 {
        return Ok(F::zero());
    }
    if d < 2 {
        return Err(Error::Domain("needs d ≥ 2".into()));
    }
    let pairings = int::<F>(crate::pairings::double_factorial_odd(k) as u64);
    let dd = int::<F>(d);
    let one = F::one();
    match mode {
        SignMode::PaperLiteral => {
            let factor = power(int::<F>(group.variance_factor() as u64), k / 2);
            Ok(pairings * factor / power(dd, k))
        }
        SignMode::Isserlis => {
            let off = match group {
                Group::Unitary => F::zero() - one.clone() / (dd.clone() * dd.clone() - one),
                Group::Orthogonal => {
                    let two = int::<F>(2);
                    F::zero() - two.clone() / ((dd.clone() + two) * (dd - one))
                }
            };
            Ok(pairings * power(off, k / 2))
        }
    }
}

pub fn orthogonal_states_moment(k: usize, d: u64, group: Group, mode: SignMode) -> Result<f64> {
    orthogonal_states_moment_with(k, d, group, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedStatesReport {
    /// Isserlis over the exact covariances of the multiset (ground truth at leading order).
    pub isserlis: f64,
    /// Leading-order expression with a sum over multiplicity classes.
    pub literal_sum: f64,
    /// Same expression with the product over classes used in its derivation.
    pub literal_product: f64,
}

/// Moments of `k_1` copies of `ρ_1`, `k_2` copies of `ρ_2`, … for mutually orthogonal states.
pub fn repeated_states_moment(multiplicities: &[usize], d: u64, group: Group) -> Result<RepeatedStatesReport> {
    if multiplicities.contains(&0) {
        return Err(Error::InvalidArgument("multiplicities must be positive".into()));
    }
    let q = multiplicities.len();
    let cov: Vec<Vec<f64>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|j| exact_covariance_f64(if i == j { 1.0 } else { 0.0 }, d, group))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let assignment: Vec<usize> = multiplicities
        .iter()
        .enumerate()
        .flat_map(|(b, &kb)| std::iter::repeat_n(b, kb))
        .collect();
    let k = assignment.len();
    let isserlis = isserlis_moment_with(&cov, &assignment)?;

    let half_sum: usize = multiplicities.iter().filter(|&&kb| kb >= 2).map(|kb| kb / 2).sum();
    let class_count = |kb: usize| -> f64 {
        let h = kb / 2;
        let within = crate::pairings::double_factorial_odd(2 * h) as f64;
        if kb % 2 == 1 {
            kb as f64 * within
        } else {
            within
        }
    };
    let scale = (group.variance_factor() as f64).powi(half_sum as i32) * (d as f64).powi(half_sum as i32)
        / (d as f64).powi(k as i32);
    let statement = scale * multiplicities.iter().map(|&kb| class_count(kb)).sum::<f64>();
    let proof = scale * multiplicities.iter().map(|&kb| class_count(kb)).product::<f64>();
    Ok(RepeatedStatesReport {
        isserlis,
        literal_sum: statement,
        literal_product: proof,
    })
}

/// Mean off-diagonal overlap `Tr[ρ_i ρ_j]` over the dataset.
pub fn dataset_average_overlap<T: Scalar>(g: &InnerProductMatrix<T>) -> Result<f64> {
    let m = g.size();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two states".into()));
    }
    let fid = g.fidelity_matrix_f64();
    let mut total = 0.0;
    for (i, row) in fid.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            if i != j {
                total += t;
            }
        }
    }
    Ok(total / (m * (m - 1)) as f64)
}

/// Which asymptotic covariance description fits a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// All overlaps above `1/log₂(d)²`.
    LargeOverlaps,
    /// All overlaps at most `10/d`.
    SmallOverlaps,
    /// All overlaps zero.
    Orthogonal,
    Mixed,
}

impl Regime {
    pub fn covariance_mode(self) -> Option<CovarianceMode> {
        match self {
            Regime::LargeOverlaps => Some(CovarianceMode::Fidelity),
            Regime::SmallOverlaps => Some(CovarianceMode::Diagonal),
            Regime::Orthogonal => Some(CovarianceMode::OrthogonalStates),
            Regime::Mixed => None,
        }
    }
}

/// Advisory classification of the off-diagonal overlaps.
pub fn classify_regime<T: Scalar>(g: &InnerProductMatrix<T>, d: u64) -> Regime {
    let fid = g.fidelity_matrix_f64();
    let m = fid.len();
    let offs: Vec<f64> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| fid[i][j])
        .collect();
    if offs.iter().all(|&t| t <= 1e-12) {
        Regime::Orthogonal
    } else if offs.iter().all(|&t| t >= polylog_threshold(d)) {
        Regime::LargeOverlaps
    } else if offs.iter().all(|&t| t * d as f64 <= 10.0) {
        Regime::SmallOverlaps
    } else {
        Regime::Mixed
    }
}

/// `k!/(2^{k/2}(k/2)!)` for even `k`, the Gaussian ratio `E[X^k]/E[X²]^{k/2}`; 0 for odd `k`.
pub fn gaussian_reference(k: usize) -> u128 {
    if k % 2 == 1 {
        0
    } else {
        crate::pairings::double_factorial_odd(k)
    }
}
