//! Tail bounds for QNN outputs, gradients and MSE losses.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use libm::erfc;

use crate::{Error, Group, Result};

/// Above this argument `erfc` is evaluated by its asymptotic series in log space.
pub const ERFC_DIRECT_MAX: f64 = 26.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    GaussianExact,
    Chebyshev,
    Tdesign,
    GradientUnion,
    Loss,
}

impl TailKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TailKind::GaussianExact => "gaussian-exact",
            TailKind::Chebyshev => "chebyshev",
            TailKind::Tdesign => "tdesign",
            TailKind::GradientUnion => "gradient-union",
            TailKind::Loss => "loss",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub kind: TailKind,
    /// Probability in `[0, 1]`.
    pub value: f64,
    /// `ln(value)`; finite even when `value` underflows.
    pub ln_value: f64,
    pub params: BTreeMap<String, f64>,
}

impl TailBound {
    fn new(kind: TailKind, ln_value: f64, params: &[(&str, f64)]) -> Self {
        let ln_value = ln_value.min(0.0);
        TailBound {
            kind,
            value: ln_value.exp(),
            ln_value,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// `ln erfc(x)` for `x ≥ 0`.
pub fn ln_erfc(x: f64) -> f64 {
    if x <= ERFC_DIRECT_MAX {
        return erfc(x).ln();
    }
    // erfc(x) = e^{-x²}/(x√π) · Σ (-1)^n (2n-1)!!/(2x²)^n
    let y = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut series = 1.0;
    for n in 1..8 {
        term *= -((2 * n - 1) as f64) * y;
        series += term;
    }
    -x * x - (x * PI.sqrt()).ln() + series.ln()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("σ = {sigma} must be positive")));
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 0.0) || c.is_infinite() {
        return Err(Error::Domain(format!("threshold c = {c} must be finite and ≥ 0")));
    }
    Ok(())
}

fn check_d(d: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    Ok(())
}

/// `ln P(|X| ≥ c)` for `X ~ N(0, σ²)`.
pub fn ln_gaussian_tail(c: f64, sigma: f64) -> Result<f64> {
    check_c(c)?;
    check_sigma(sigma)?;
    Ok(ln_erfc(c / (sigma * SQRT_2)).min(0.0))
}

/// `P(|X| ≥ c) = erfc(c/(σ√2))` for `X ~ N(0, σ²)`.
pub fn gaussian_tail(c: f64, sigma: f64) -> Result<f64> {
    Ok(ln_gaussian_tail(c, sigma)?.exp())
}

/// The variance-inconsistent expression `erfc(c√d)/√2`, kept for reports.
pub fn paper_literal_tail(c: f64, d: u64) -> Result<f64> {
    check_c(c)?;
    check_d(d)?;
    Ok(erfc(c * (d as f64).sqrt()) / SQRT_2)
}

/// Output standard deviation `√(f/d)`.
pub fn output_sigma(d: u64, group: Group) -> Result<f64> {
    check_d(d)?;
    Ok((group.variance_factor() as f64 / d as f64).sqrt())
}

/// `min(1, Var/c²)`.
pub fn chebyshev_bound(c: f64, variance: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("Chebyshev needs c > 0, got {c}")));
    }
    if !(variance >= 0.0) {
        return Err(Error::Domain(format!("variance {variance} must be ≥ 0")));
    }
    Ok((variance / (c * c)).min(1.0))
}

/// `(2h)!/(2^h h! (dc²)^h)` with `h = ⌊t/2⌋`, clamped to 1.
pub fn tdesign_bound(c: f64, d: u64, t: usize) -> Result<f64> {
    tdesign_bound_for(c, d, t, Group::Unitary)
}

/// As [`tdesign_bound`], with the `2^h` moment factor of the orthogonal group.
pub fn tdesign_bound_for(c: f64, d: u64, t: usize, group: Group) -> Result<f64> {
    Ok(ln_tdesign_bound(c, d, t, group)?.exp())
}

fn ln_tdesign_bound(c: f64, d: u64, t: usize, group: Group) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("t-design order {t} < 2")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("t-design bound needs c > 0, got {c}")));
    }
    check_d(d)?;
    let h = t / 2;
    let f = group.variance_factor() as f64;
    // (2h)!/(2^h h!) = (2h-1)!!
    let ln_dfact: f64 = (1..h).map(|i| ((2 * i + 1) as f64).ln()).sum();
    Ok((ln_dfact + h as f64 * (f.ln() - (d as f64 * c * c).ln())).min(0.0))
}

/// Union bound `P(|C⁺| ≥ c/2) + P(|C⁻| ≥ c/2)` under the Gaussian marginals.
pub fn gradient_tail_bound(c: f64, d: u64) -> Result<f64> {
    Ok(ln_gradient_tail_bound(c, d)?.exp())
}

fn ln_gradient_tail_bound(c: f64, d: u64) -> Result<f64> {
    check_c(c)?;
    let sigma = output_sigma(d, Group::Unitary)?;
    Ok((2f64.ln() + ln_gaussian_tail(c / 2.0, sigma)?).min(0.0))
}

/// `2 erfc(c√d/√2)`, the constant as displayed for the gradient union bound.
pub fn paper_literal_gradient_tail(c: f64, d: u64) -> Result<f64> {
    check_c(c)?;
    check_d(d)?;
    Ok(2.0 * erfc(c * (d as f64).sqrt() / SQRT_2))
}

/// Thresholds on `|C − y|` equivalent to `|ℒ − E ℒ| ≥ c` for `ℒ = (C − y)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossThresholds {
    pub mean_loss: f64,
    /// `ℒ ≥ E ℒ + c  ⇔  |C − y| ≥ upper`.
    pub upper: f64,
    /// `ℒ ≤ E ℒ − c  ⇔  |C − y| ≤ lower`; `None` when impossible.
    pub lower: Option<f64>,
}

pub fn loss_thresholds(c: f64, y: f64, d: u64, group: Group) -> Result<LossThresholds> {
    let sigma = output_sigma(d, group)?;
    let mean_loss = y * y + sigma * sigma;
    let lower_sq = mean_loss - c;
    Ok(LossThresholds {
        mean_loss,
        upper: (mean_loss + c).sqrt(),
        lower: (lower_sq >= 0.0).then(|| lower_sq.sqrt()),
    })
}

/// CDF of `C = ⟨φ|O|φ⟩` for a Haar state and a traceless `±1` observable:
/// `C = 2B − 1` with `B ~ Beta(a, a)`, `a = d/2` (unitary) or `d/4` (orthogonal).
pub fn exact_output_cdf(x: f64, d: u64, group: Group) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain("exact output law needs d ≥ 2".into()));
    }
    if x <= -1.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let a = d as f64 / (2.0 * group.variance_factor() as f64);
    let beta = Beta::new(a, a).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(beta.cdf((x + 1.0) / 2.0))
}

/// `P(|ℒ − E ℒ| ≥ c)` for `ℒ = (C − y)²`, `E ℒ = y² + f/d`, through
/// [`loss_thresholds`]. The event `|C − y| ≥ upper` takes the Gaussian tails
/// of `N(0, f/d)`; the central event `|C − y| ≤ lower` takes the exact law
/// of [`exact_output_cdf`].
pub fn loss_concentration_bound(c: f64, y: f64, d: u64, group: Group) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("loss bound needs c > 0, got {c}")));
    }
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("label {y} outside [-1, 1]")));
    }
    let sigma = output_sigma(d, group)?;
    let th = loss_thresholds(c, y, d, group)?;
    let upper_tail = |t: f64| 0.5 * erfc(t / (sigma * SQRT_2));
    // P(C ≥ y + u) + P(C ≤ y − u)
    let high = upper_tail(y + th.upper) + upper_tail(th.upper - y);
    let low = match th.lower {
        Some(l) => (exact_output_cdf(y + l, d, group)? - exact_output_cdf(y - l, d, group)?).max(0.0),
        None => 0.0,
    };
    Ok((high + low).min(1.0))
}

/// Output-tail bounds at `(c, d)`: exact Gaussian, Chebyshev with the
/// asymptotic variance, and t-design bounds for `t ∈ {2, 4, 6}`.
pub fn output_bounds(c: f64, d: u64, group: Group) -> Result<Vec<TailBound>> {
    let sigma = output_sigma(d, group)?;
    let var = sigma * sigma;
    let mut out = vec![TailBound::new(
        TailKind::GaussianExact,
        ln_gaussian_tail(c, sigma)?,
        &[("c", c), ("d", d as f64), ("sigma", sigma)],
    )];
    if c > 0.0 {
        out.push(TailBound::new(
            TailKind::Chebyshev,
            chebyshev_bound(c, var)?.ln(),
            &[("c", c), ("d", d as f64), ("variance", var)],
        ));
        for t in [2, 4, 6] {
            out.push(TailBound::new(
                TailKind::Tdesign,
                ln_tdesign_bound(c, d, t, group)?,
                &[("c", c), ("d", d as f64), ("t", t as f64)],
            ));
        }
    } else {
        out.push(TailBound::new(TailKind::Chebyshev, 0.0, &[("c", c), ("d", d as f64)]));
        for t in [2, 4, 6] {
            out.push(TailBound::new(
                TailKind::Tdesign,
                0.0,
                &[("c", c), ("d", d as f64), ("t", t as f64)],
            ));
        }
    }
    Ok(out)
}

pub fn gradient_bound(c: f64, d: u64) -> Result<TailBound> {
    Ok(TailBound::new(
        TailKind::GradientUnion,
        ln_gradient_tail_bound(c, d)?,
        &[
            ("c", c),
            ("d", d as f64),
            ("paper_literal", paper_literal_gradient_tail(c, d)?),
        ],
    ))
}

pub fn loss_bound(c: f64, y: f64, d: u64, group: Group) -> Result<TailBound> {
    let v = loss_concentration_bound(c, y, d, group)?;
    Ok(TailBound::new(TailKind::Loss, v.ln(), &[("c", c), ("y", y), ("d", d as f64)]))
}
