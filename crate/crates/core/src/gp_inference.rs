//! GP prior and predictive distribution for QNN outputs, the triviality
//! check for Bayesian prediction at large `d`, and MSE loss moments.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::exact::{exact_covariance, exact_covariance_f64};
use crate::gp_moments::{covariance_matrix, CovarianceMatrix, CovarianceMode, Field};
use crate::overlap::{InnerProductMatrix, Scalar};
use crate::{Error, Group, Result};

pub const CHOLESKY_JITTER: f64 = 1e-12;
/// Shot counts up to `log₂(d)^POLYLOG_DEGREE` count as polylogarithmic.
pub const POLYLOG_DEGREE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    /// `Tr[ρρ']/d`, doubled for the orthogonal group.
    #[default]
    Asymptotic,
    /// Exact finite-`d` covariance.
    Exact,
}

/// Covariance between the outputs of two states with overlap `Tr[ρρ']`.
pub fn fidelity_kernel(overlap: f64, d: u64, group: Group, mode: KernelMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Domain(format!("overlap {overlap} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::Domain("kernel needs d ≥ 2".into()));
    }
    match mode {
        KernelMode::Asymptotic => Ok(group.variance_factor() as f64 * overlap / d as f64),
        KernelMode::Exact => exact_covariance_f64(overlap, d, group),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GPModel {
    pub covariance: CovarianceMatrix,
    /// `σ_N² = 1/N` for `N` shots; zero is the noiseless model.
    pub noise_variance: f64,
    pub d: u64,
    pub group: Group,
    pub kernel: KernelMode,
    /// Use a pseudo-inverse when the noiseless kernel is singular.
    pub allow_pseudo_inverse: bool,
}

impl GPModel {
    pub fn new(covariance: CovarianceMatrix, noise_variance: f64, d: u64, group: Group, kernel: KernelMode) -> Result<Self> {
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::Domain(format!("noise variance {noise_variance} must be finite and ≥ 0")));
        }
        Ok(GPModel {
            covariance,
            noise_variance,
            d,
            group,
            kernel,
            allow_pseudo_inverse: false,
        })
    }

    /// Model over training states with overlaps `g`; `shots = None` is noiseless.
    pub fn from_overlaps<T: Scalar>(
        g: &InnerProductMatrix<T>,
        d: u64,
        group: Group,
        kernel: KernelMode,
        shots: Option<u64>,
    ) -> Result<Self> {
        let mode = match kernel {
            KernelMode::Asymptotic => CovarianceMode::Fidelity,
            KernelMode::Exact => CovarianceMode::Exact,
        };
        let noise = match shots {
            Some(0) => return Err(Error::Domain("shot count must be positive".into())),
            Some(n) => 1.0 / n as f64,
            None => 0.0,
        };
        Self::new(covariance_matrix(g, d, group, mode)?, noise, d, group, kernel)
    }

    pub fn with_pseudo_inverse(mut self, allow: bool) -> Self {
        self.allow_pseudo_inverse = allow;
        self
    }

    pub fn shots(&self) -> Option<f64> {
        (self.noise_variance > 0.0).then(|| 1.0 / self.noise_variance)
    }

    /// Cross-covariance vector and prior variance of a new state.
    pub fn extend(&self, overlaps_with_training: &[f64], self_overlap: f64) -> Result<(Vec<f64>, f64)> {
        let cross = overlaps_with_training
            .iter()
            .map(|&t| fidelity_kernel(t, self.d, self.group, self.kernel))
            .collect::<Result<_>>()?;
        Ok((cross, fidelity_kernel(self_overlap, self.d, self.group, self.kernel)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveResult {
    pub mean: f64,
    pub variance: f64,
    pub prior_variance: f64,
}

impl PredictiveResult {
    /// `(prior − posterior) / prior`.
    pub fn relative_variance_reduction(&self) -> f64 {
        (self.prior_variance - self.variance) / self.prior_variance
    }
}

/// Solves `(Σ + σ_N² 1) x = b` for several right-hand sides.
fn solve(gp: &GPModel, rhs: &[&[f64]]) -> Result<Vec<DVector<f64>>> {
    let m = gp.covariance.size();
    let mut a = DMatrix::from_fn(m, m, |i, j| gp.covariance.get(i, j));
    for i in 0..m {
        a[(i, i)] += gp.noise_variance;
    }
    let bs: Vec<DVector<f64>> = rhs.iter().map(|b| DVector::from_column_slice(b)).collect();
    let scale = (0..m).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // nalgebra accepts zero pivots; reject numerically singular factors
    let factor = |mat: DMatrix<f64>| {
        mat.cholesky()
            .filter(|ch| ch.l_dirty().diagonal().iter().all(|&x| x * x > 1e-14 * scale))
    };
    if let Some(ch) = factor(a.clone()) {
        return Ok(bs.iter().map(|b| ch.solve(b)).collect());
    }
    if gp.noise_variance > 0.0 {
        let mut jittered = a.clone();
        for i in 0..m {
            jittered[(i, i)] += CHOLESKY_JITTER * scale;
        }
        if let Some(ch) = factor(jittered) {
            return Ok(bs.iter().map(|b| ch.solve(b)).collect());
        }
    }
    if !gp.allow_pseudo_inverse {
        return Err(Error::SingularKernel);
    }
    let pinv = a
        .pseudo_inverse(1e-12 * scale)
        .map_err(|e| Error::Domain(e.to_string()))?;
    Ok(bs.iter().map(|b| &pinv * b).collect())
}

/// Posterior at a new point: mean `mᵀA⁻¹y`, variance `σ² − mᵀA⁻¹m` with
/// `A = Σ + σ_N² 1`.
pub fn predictive(gp: &GPModel, observations: &[f64], cross_cov: &[f64], prior_var: f64) -> Result<PredictiveResult> {
    let m = gp.covariance.size();
    if observations.len() != m || cross_cov.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{m} training states, {} observations, {} cross-covariances",
            observations.len(),
            cross_cov.len()
        )));
    }
    if m == 0 {
        return Ok(PredictiveResult {
            mean: 0.0,
            variance: prior_var,
            prior_variance: prior_var,
        });
    }
    let x = solve(gp, &[observations, cross_cov])?;
    let mv = DVector::from_column_slice(cross_cov);
    let mean = mv.dot(&x[0]);
    let variance = prior_var - mv.dot(&x[1]);
    Ok(PredictiveResult {
        mean,
        variance: variance.max(0.0),
        prior_variance: prior_var,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityReport {
    pub predictive: PredictiveResult,
    pub mean_shift: f64,
    pub variance_shift: f64,
    pub relative_variance_reduction: f64,
    /// `N · m · max|m_i| · max|y_i|`, of order `N/d`.
    pub mean_shift_bound: f64,
    /// `N · m · max|m_i|²`, of order `N/d²`.
    pub variance_shift_bound: f64,
    pub shots: Option<f64>,
    pub d: u64,
    /// `N ≤ log₂(d)^3`.
    pub polylog_regime: bool,
    pub warnings: Vec<String>,
}

/// Posterior against prior, with the `O(N/d)` and `O(N/d²)` bounds.
pub fn triviality_report(
    gp: &GPModel,
    observations: &[f64],
    cross_cov: &[f64],
    prior_var: f64,
) -> Result<TrivialityReport> {
    let predictive = predictive(gp, observations, cross_cov, prior_var)?;
    let m = cross_cov.len() as f64;
    let max_m = cross_cov.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let max_y = observations.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut warnings = Vec::new();
    let shots = gp.shots();
    let (mean_shift_bound, variance_shift_bound, polylog_regime) = match shots {
        Some(n) => {
            let limit = (gp.d as f64).log2().powi(POLYLOG_DEGREE);
            let ok = n <= limit;
            if !ok {
                warnings.push(format!(
                    "N = {n} exceeds log2(d)^{POLYLOG_DEGREE} = {limit}; the bounds no longer imply triviality"
                ));
            }
            (n * m * max_m * max_y, n * m * max_m * max_m, ok)
        }
        None => {
            warnings.push("noiseless model: the shift bounds need finite shots".into());
            (f64::INFINITY, f64::INFINITY, false)
        }
    };
    Ok(TrivialityReport {
        mean_shift: predictive.mean.abs(),
        variance_shift: predictive.prior_variance - predictive.variance,
        relative_variance_reduction: predictive.relative_variance_reduction(),
        predictive,
        mean_shift_bound,
        variance_shift_bound,
        shots,
        d: gp.d,
        polylog_regime,
        warnings,
    })
}

/// Gaussian output moment `E[C^r] = r!/(2^{r/2}(r/2)!) (f/d)^{r/2}`, zero
/// for odd `r`; `f` is 1 (unitary) or 2 (orthogonal).
pub fn gaussian_output_moment<F: Field>(r: usize, d: u64, group: Group) -> F {
    if r % 2 == 1 {
        return F::zero();
    }
    let h = r / 2;
    let var = F::from_u32(group.variance_factor()).unwrap() / F::from_u64(d).unwrap();
    let mut out = F::one();
    for i in 0..h {
        out = out * F::from_usize(2 * i + 1).unwrap() * var.clone();
    }
    out
}

fn binomial<F: Field>(n: usize, r: usize) -> F {
    let mut out = F::one();
    for i in 0..r {
        out = out * F::from_usize(n - i).unwrap() / F::from_usize(i + 1).unwrap();
    }
    out
}

/// `E[ℒ^k]` for `ℒ = (C − y)²` with Gaussian `C`.
pub fn loss_moments_with<F: Field>(y: F, k: usize, d: u64, group: Group) -> Result<F> {
    if k == 0 {
        return Err(Error::InvalidOrder {
            k,
            reason: "loss moments start at k = 1",
        });
    }
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    let neg_y = F::zero() - y;
    let mut total = F::zero();
    for r in 0..=2 * k {
        if r % 2 == 1 {
            continue;
        }
        let mut p = F::one();
        for _ in 0..(2 * k - r) {
            p = p * neg_y.clone();
        }
        total = total + binomial::<F>(2 * k, r) * gaussian_output_moment::<F>(r, d, group) * p;
    }
    Ok(total)
}

pub fn loss_moments(y: f64, k: usize, d: u64, group: Group) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("label {y} outside [-1, 1]")));
    }
    loss_moments_with(y, k, d, group)
}

/// `E[ℒ] = y² + Var` with the exact finite-`d` variance, in rationals.
pub fn exact_mean_loss(y: &BigRational, d: u64, group: Group) -> Result<BigRational> {
    Ok(y * y + exact_covariance(&BigRational::one(), d, group)?)
}

/// `C²` for Gaussian `C` is Gamma with shape `1/2` and scale `2σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    /// `P(C² ≥ x)`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        let g = Gamma::new(self.shape, 1.0 / self.scale).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(g.sf(x))
    }
}

pub fn squared_output_distribution(d: u64, group: Group) -> Result<GammaParams> {
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    let sigma2 = group.variance_factor() as f64 / d as f64;
    Ok(GammaParams {
        shape: 0.5,
        scale: 2.0 * sigma2,
    })
}

/// Exact rational `E[C^r]` of the Gaussian model.
pub fn gaussian_output_moment_exact(r: usize, d: u64, group: Group) -> BigRational {
    gaussian_output_moment::<BigRational>(r, d, group)
}
