//! Streaming statistics over Monte Carlo samples: power-sum moments,
//! Gaussianity ratios, covariances with batch-means errors, tail
//! frequencies, histograms and a few goodness-of-fit tests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF, Normal};

use crate::gp_moments::gaussian_reference;
use crate::haar::{format_float, SampleBatch};
use crate::{Error, Result};

pub const DEFAULT_MAX_POWER: usize = 8;
pub const DEFAULT_BATCHES: usize = 100;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Power sums `S_p = Σ x^p` for `p = 1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    count: u64,
    sums: Vec<CompensatedSum>,
    out_of_range: u64,
}

impl Default for MomentAccumulator {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_POWER)
    }
}

impl MomentAccumulator {
    pub fn new(max_power: usize) -> Self {
        MomentAccumulator {
            count: 0,
            sums: vec![CompensatedSum::default(); max_power.max(1)],
            out_of_range: 0,
        }
    }

    pub fn from_values(max_power: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = Self::new(max_power);
        for x in values {
            acc.update(x);
        }
        acc
    }

    pub fn max_power(&self) -> usize {
        self.sums.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Values with `|x| > 1` seen so far; QNN outputs never produce these.
    pub fn out_of_range(&self) -> u64 {
        self.out_of_range
    }

    pub fn update(&mut self, x: f64) {
        self.count += 1;
        if x.abs() > 1.0 + 1e-12 {
            self.out_of_range += 1;
        }
        let mut p = 1.0;
        for s in &mut self.sums {
            p *= x;
            s.add(p);
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.max_power() != self.max_power() {
            return Err(Error::InvalidArgument(format!(
                "cannot merge accumulators of order {} and {}",
                self.max_power(),
                other.max_power()
            )));
        }
        self.count += other.count;
        self.out_of_range += other.out_of_range;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.add(b.sum);
            a.add(b.carry);
        }
        Ok(())
    }

    pub fn power_sum(&self, p: usize) -> f64 {
        self.sums[p - 1].value()
    }

    /// `E[x^p]` estimate; `p = 0` gives 1.
    pub fn raw_moment(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Ok(1.0);
        }
        if p > self.max_power() {
            return Err(Error::Capacity {
                what: "moment order",
                requested: p,
                limit: self.max_power(),
            });
        }
        if self.count == 0 {
            return Err(Error::DegenerateMoment);
        }
        Ok(self.power_sum(p) / self.count as f64)
    }

    pub fn mean(&self) -> Result<f64> {
        self.raw_moment(1)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::DegenerateMoment);
        }
        let n = self.count as f64;
        let m = self.mean()?;
        Ok((self.raw_moment(2)? - m * m) * n / (n - 1.0))
    }

    /// `m_k / m_2^{k/2}` over raw moments, with the Gaussian reference.
    pub fn moment_ratio(&self, k: usize) -> Result<MomentRatio> {
        if k == 0 || k % 2 == 1 {
            return Err(Error::InvalidOrder {
                k,
                reason: "moment ratios need a positive even order",
            });
        }
        let m2 = self.raw_moment(2)?;
        if m2 <= 0.0 || !m2.is_finite() {
            return Err(Error::DegenerateMoment);
        }
        Ok(MomentRatio {
            k,
            value: self.raw_moment(k)? / m2.powi(k as i32 / 2),
            reference: gaussian_reference(k) as f64,
            se: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRatio {
    pub k: usize,
    pub value: f64,
    pub reference: f64,
    /// Batch-means standard error, when computed.
    pub se: Option<f64>,
}

impl MomentRatio {
    /// `|value − reference| ≤ n_se · se`; false without an SE.
    pub fn within(&self, n_se: f64) -> bool {
        self.se.is_some_and(|se| (self.value - self.reference).abs() <= n_se * se)
    }
}

/// `(estimate over all values, batch-means SE)` of a statistic.
pub fn batch_means<F>(values: &[f64], n_batches: usize, stat: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let b = n_batches.max(2);
    if values.len() < 2 * b {
        return Err(Error::InvalidArgument(format!(
            "{} samples are too few for {b} batches",
            values.len()
        )));
    }
    let size = values.len() / b;
    let per: Vec<f64> = (0..b)
        .map(|i| stat(&values[i * size..(i + 1) * size]))
        .collect::<Result<_>>()?;
    let mean = per.iter().sum::<f64>() / b as f64;
    let var = per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok((stat(values)?, (var / b as f64).sqrt()))
}

pub fn moment_ratio_with_se(values: &[f64], k: usize, n_batches: usize) -> Result<MomentRatio> {
    let ratio = |v: &[f64]| MomentAccumulator::from_values(k, v.iter().copied()).moment_ratio(k).map(|r| r.value);
    let (value, se) = batch_means(values, n_batches, ratio)?;
    Ok(MomentRatio {
        k,
        value,
        reference: gaussian_reference(k) as f64,
        se: Some(se),
    })
}

/// Raw moment `E[x^k]` with a batch-means SE.
pub fn raw_moment_with_se(values: &[f64], k: usize, n_batches: usize) -> Result<(f64, f64)> {
    batch_means(values, n_batches, |v| {
        Ok(v.iter().map(|x| x.powi(k as i32)).sum::<f64>() / v.len() as f64)
    })
}

/// Even ratios `k ∈ {4, 6}` within 5 batch SEs of the Gaussian values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianityVerdict {
    pub ratios: Vec<MomentRatio>,
    pub gaussian: bool,
}

pub fn gaussianity(values: &[f64], n_batches: usize) -> Result<GaussianityVerdict> {
    let ratios = [4, 6]
        .iter()
        .map(|&k| moment_ratio_with_se(values, k, n_batches))
        .collect::<Result<Vec<_>>>()?;
    let gaussian = ratios.iter().all(|r| r.within(5.0));
    Ok(GaussianityVerdict { ratios, gaussian })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub labels: Vec<String>,
    pub means: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub standard_errors: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
}

fn covariance_of_rows(rows: &[&[f64]], m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len() as f64;
    let mut means = vec![0.0; m];
    for r in rows {
        for (a, x) in means.iter_mut().zip(r.iter()) {
            *a += x;
        }
    }
    for a in &mut means {
        *a /= n;
    }
    let mut cov = vec![vec![0.0; m]; m];
    for r in rows {
        for i in 0..m {
            let di = r[i] - means[i];
            for j in i..m {
                cov[i][j] += di * (r[j] - means[j]);
            }
        }
    }
    for i in 0..m {
        for j in i..m {
            cov[i][j] /= n - 1.0;
            cov[j][i] = cov[i][j];
        }
    }
    (means, cov)
}

/// Unbiased covariance of the batch columns with batch-means SEs.
pub fn empirical_covariance(batch: &SampleBatch, n_batches: usize) -> Result<CovarianceEstimate> {
    let m = batch.n_columns();
    let n = batch.n_samples;
    if n < 2 {
        return Err(Error::InvalidArgument("covariance needs at least two samples".into()));
    }
    let rows: Vec<&[f64]> = (0..n).map(|i| batch.row(i)).collect();
    let (means, covariance) = covariance_of_rows(&rows, m);
    let b = n_batches.max(2).min(n / 2);
    let mut standard_errors = vec![vec![f64::NAN; m]; m];
    if b >= 2 {
        let size = n / b;
        let per: Vec<Vec<Vec<f64>>> = (0..b)
            .map(|k| covariance_of_rows(&rows[k * size..(k + 1) * size], m).1)
            .collect();
        for i in 0..m {
            for j in 0..m {
                let mean = per.iter().map(|c| c[i][j]).sum::<f64>() / b as f64;
                let var = per.iter().map(|c| (c[i][j] - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
                standard_errors[i][j] = (var / b as f64).sqrt();
            }
        }
    }
    let correlation = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| covariance[i][j] / (covariance[i][i] * covariance[j][j]).sqrt())
                .collect()
        })
        .collect();
    Ok(CovarianceEstimate {
        labels: batch.columns.clone(),
        means,
        covariance,
        standard_errors,
        correlation,
    })
}

impl CovarianceEstimate {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["row", "column", "covariance", "standard_error", "correlation"])
            .map_err(|e| Error::io(path, e))?;
        for i in 0..self.labels.len() {
            for j in 0..self.labels.len() {
                w.write_record([
                    self.labels[i].clone(),
                    self.labels[j].clone(),
                    format_float(self.covariance[i][j]),
                    format_float(self.standard_errors[i][j]),
                    format_float(self.correlation[i][j]),
                ])
                .map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub c: f64,
    pub hits: u64,
    pub n: u64,
    pub frequency: f64,
    /// Binomial SE `√(p(1−p)/n)`.
    pub se: f64,
    /// Clopper-Pearson interval at the requested confidence.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of `|x| ≥ c`, with a 95% Clopper-Pearson interval.
pub fn tail_frequency(values: &[f64], c: f64) -> Result<TailFrequency> {
    tail_frequency_with_confidence(values, c, 0.95)
}

pub fn tail_frequency_with_confidence(values: &[f64], c: f64, confidence: f64) -> Result<TailFrequency> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("tail threshold {c} must be non-negative")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence {confidence} outside (0, 1)")));
    }
    let n = values.len() as u64;
    if n == 0 {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let hits = values.iter().filter(|x| x.abs() >= c).count() as u64;
    let p = hits as f64 / n as f64;
    let alpha = 1.0 - confidence;
    let (ci_low, ci_high) = clopper_pearson(hits, n, alpha)?;
    Ok(TailFrequency {
        c,
        hits,
        n,
        frequency: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
        ci_low,
        ci_high,
    })
}

fn clopper_pearson(hits: u64, n: u64, alpha: f64) -> Result<(f64, f64)> {
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::Domain(e.to_string()));
    let (h, n) = (hits as f64, n as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        beta(h, n - h + 1.0)?.inverse_cdf(alpha / 2.0)
    };
    let hi = if hits as f64 == n {
        1.0
    } else {
        beta(h + 1.0, n - h)?.inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Sample size, including values outside the range.
    pub n: u64,
    pub densities: Vec<f64>,
    /// `N(0, σ²)` density at the bin centers.
    pub model: Option<Vec<f64>>,
    pub model_sigma: Option<f64>,
}

fn bin_index(x: f64, lo: f64, hi: f64, width: f64, bins: usize) -> Option<usize> {
    if !x.is_finite() || x < lo || x > hi {
        return None;
    }
    Some((((x - lo) / width) as usize).min(bins - 1))
}

fn auto_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Density histogram over the sample range.
pub fn histogram(values: &[f64], bins: usize, model_sigma: Option<f64>) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let (lo, hi) = auto_range(values);
    histogram_range(values, bins, lo, hi, model_sigma)
}

/// Density histogram over `[lo, hi]`; values outside are dropped from the
/// counts but still count toward the normalization.
pub fn histogram_range(values: &[f64], bins: usize, lo: f64, hi: f64, model_sigma: Option<f64>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in values {
        if let Some(i) = bin_index(x, lo, hi, width, bins) {
            counts[i] += 1;
        }
    }
    let n = values.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let model = match model_sigma {
        Some(s) if s > 0.0 => {
            let normal = Normal::new(0.0, s).map_err(|e| Error::Domain(e.to_string()))?;
            use statrs::distribution::Continuous;
            Some(edges.windows(2).map(|e| normal.pdf(0.5 * (e[0] + e[1]))).collect())
        }
        Some(s) => return Err(Error::Domain(format!("model σ = {s} must be positive"))),
        None => None,
    };
    Ok(Histogram {
        edges,
        counts,
        n: values.len() as u64,
        densities,
        model,
        model_sigma,
    })
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(p, e)| p * (e[1] - e[0]))
            .sum()
    }

    /// Total variation distance between the binned sample and the model
    /// Gaussian's probability mass per bin (mass outside the range counts).
    pub fn tv_distance_to_model(&self) -> Result<f64> {
        let sigma = self
            .model_sigma
            .ok_or_else(|| Error::InvalidArgument("histogram has no model overlay".into()))?;
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
        let n = self.n as f64;
        let mut tv = 0.0;
        let mut model_in = 0.0;
        for (c, e) in self.counts.iter().zip(self.edges.windows(2)) {
            let q = normal.cdf(e[1]) - normal.cdf(e[0]);
            model_in += q;
            tv += (*c as f64 / n - q).abs();
        }
        tv += (1.0 - model_in).abs();
        Ok(0.5 * tv)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["bin_lo", "bin_hi", "center", "count", "density", "model"])
            .map_err(|e| Error::io(path, e))?;
        for i in 0..self.bins() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            let model = self.model.as_ref().map_or(String::new(), |m| format_float(m[i]));
            w.write_record([
                format_float(a),
                format_float(b),
                format_float(0.5 * (a + b)),
                self.counts[i].to_string(),
                format_float(self.densities[i]),
                model,
            ])
            .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    /// `density[i][j]` for x bin `i` and y bin `j`.
    pub density: Vec<Vec<f64>>,
}

pub fn histogram2d(x: &[f64], y: &[f64], bins: usize) -> Result<Histogram2d> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("columns of different length".into()));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let (xl, xh) = auto_range(x);
    let (yl, yh) = auto_range(y);
    let (wx, wy) = ((xh - xl) / bins as f64, (yh - yl) / bins as f64);
    let mut counts = vec![vec![0u64; bins]; bins];
    for (a, b) in x.iter().zip(y) {
        if let (Some(i), Some(j)) = (bin_index(*a, xl, xh, wx, bins), bin_index(*b, yl, yh, wy, bins)) {
            counts[i][j] += 1;
        }
    }
    let n = x.len() as f64;
    let density = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / (n * wx * wy)).collect())
        .collect();
    Ok(Histogram2d {
        x_edges: (0..=bins).map(|i| xl + wx * i as f64).collect(),
        y_edges: (0..=bins).map(|i| yl + wy * i as f64).collect(),
        counts,
        density,
    })
}

pub fn histogram2d_batch(batch: &SampleBatch, i: usize, j: usize, bins: usize) -> Result<Histogram2d> {
    if i >= batch.n_columns() || j >= batch.n_columns() {
        return Err(Error::IndexOutOfRange {
            index: i.max(j),
            len: batch.n_columns(),
        });
    }
    histogram2d(&batch.column(i), &batch.column(j), bins)
}

impl Histogram2d {
    fn cell_probabilities(&self) -> Vec<Vec<f64>> {
        let total: u64 = self.counts.iter().flatten().sum();
        let t = total.max(1) as f64;
        self.counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / t).collect())
            .collect()
    }

    /// Total variation distance between the joint cell masses and the
    /// product of their marginals; small for independent columns.
    pub fn factorization_gap(&self) -> f64 {
        let p = self.cell_probabilities();
        let px: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
        let py: Vec<f64> = (0..p[0].len()).map(|j| p.iter().map(|r| r[j]).sum()).collect();
        let mut tv = 0.0;
        for (i, r) in p.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                tv += (v - px[i] * py[j]).abs();
            }
        }
        0.5 * tv
    }

    pub fn integral(&self) -> f64 {
        let wx = self.x_edges[1] - self.x_edges[0];
        let wy = self.y_edges[1] - self.y_edges[0];
        self.density.iter().flatten().sum::<f64>() * wx * wy
    }

    /// Gnuplot-style rows `x_center, y_center, density`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["x", "y", "density"]).map_err(|e| Error::io(path, e))?;
        for (i, r) in self.density.iter().enumerate() {
            let x = 0.5 * (self.x_edges[i] + self.x_edges[i + 1]);
            for (j, v) in r.iter().enumerate() {
                let y = 0.5 * (self.y_edges[j] + self.y_edges[j + 1]);
                w.write_record([format_float(x), format_float(y), format_float(*v)])
                    .map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Asymptotic Kolmogorov survival function with the Stephens correction.
fn kolmogorov_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    let lambda = (s + 0.12 + 0.11 / s) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against `N(0, σ²)`.
pub fn ks_test_normal(values: &[f64], sigma: f64) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_p(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_p(d, na * nb / (na + nb)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson test of observed counts against expected counts.
pub fn chi_squared_test(observed: &[f64], expected: &[f64], dof: f64) -> Result<ChiSquaredResult> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InvalidArgument("observed and expected lengths differ".into()));
    }
    if expected.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("expected counts must be positive".into()));
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new(dof).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquaredResult {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}
