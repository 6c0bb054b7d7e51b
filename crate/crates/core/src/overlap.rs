//! Inner-product matrices `G[i][j] = ⟨ψ_i|ψ_j⟩` of a dataset of pure states.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact complex rational.
pub type ExactComplex = Complex<BigRational>;

/// Field the overlap entries live in: floating complex or exact complex rational.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn conj(&self) -> Self;
    fn is_real(&self) -> bool;
    fn from_rational(r: &BigRational) -> Self;
    /// `|z|²`, embedded back into the field.
    fn norm_sqr_scalar(&self) -> Self;
    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;
    /// Equality up to the field's notion of tolerance (exact for rationals).
    fn near(&self, other: &Self) -> bool;
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn is_real(&self) -> bool {
        self.im == 0.0
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn norm_sqr_scalar(&self) -> Self {
        Complex64::new(self.norm_sqr(), 0.0)
    }
    fn re_f64(&self) -> f64 {
        self.re
    }
    fn im_f64(&self) -> f64 {
        self.im
    }
    fn near(&self, other: &Self) -> bool {
        (self - other).norm() <= 1e-10
    }
}

impl Scalar for ExactComplex {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn norm_sqr_scalar(&self) -> Self {
        Complex::new(self.norm_sqr(), BigRational::zero())
    }
    fn re_f64(&self) -> f64 {
        self.re.to_f64().unwrap_or(f64::NAN)
    }
    fn im_f64(&self) -> f64 {
        self.im.to_f64().unwrap_or(f64::NAN)
    }
    fn near(&self, other: &Self) -> bool {
        self == other
    }
}

/// Hermitian, unit-diagonal matrix of state inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductMatrix<T: Scalar = Complex64> {
    m: usize,
    entries: Vec<T>,
    real: bool,
}

impl<T: Scalar> InnerProductMatrix<T> {
    /// Validates hermiticity, the unit diagonal and `|G[i][j]| ≤ 1`.
    /// Positive semidefiniteness is not checked here; see [`InnerProductMatrix::min_eigenvalue`].
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        let one = T::one();
        for i in 0..m {
            if !entries[i * m + i].near(&one) {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..m {
                let g = &entries[i * m + j];
                if !g.near(&entries[j * m + i].conj()) {
                    return Err(Error::InvalidArgument(format!("not Hermitian at ({i}, {j})")));
                }
                if g.norm_sqr_scalar().re_f64() > 1.0 + 1e-10 {
                    return Err(Error::InvalidArgument(format!("|G[{i}][{j}]| exceeds 1")));
                }
            }
        }
        let real = entries.iter().all(T::is_real);
        Ok(InnerProductMatrix { m, entries, real })
    }

    pub fn identity(m: usize) -> Self {
        let mut entries = vec![T::zero(); m * m];
        for i in 0..m {
            entries[i * m + i] = T::one();
        }
        InnerProductMatrix {
            m,
            entries,
            real: true,
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `⟨ψ_i|ψ_j⟩`.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.m + j]
    }

    /// `Tr[ρ_i ρ_j] = |⟨ψ_i|ψ_j⟩|²`.
    pub fn fidelity(&self, i: usize, j: usize) -> T {
        self.get(i, j).norm_sqr_scalar()
    }

    pub fn fidelity_matrix_f64(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.fidelity(i, j).re_f64()).collect())
            .collect()
    }

    pub fn to_complex64(&self) -> InnerProductMatrix<Complex64> {
        InnerProductMatrix {
            m: self.m,
            entries: self
                .entries
                .iter()
                .map(|z| Complex64::new(z.re_f64(), z.im_f64()))
                .collect(),
            real: self.real,
        }
    }

    /// Smallest eigenvalue (floating point), for the PSD check.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let mat = DMatrix::from_fn(self.m, self.m, |i, j| {
            let z = self.get(i, j);
            Complex64::new(z.re_f64(), z.im_f64())
        });
        mat.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.m {
            Err(Error::IndexOutOfRange { index, len: self.m })
        } else {
            Ok(())
        }
    }
}

impl InnerProductMatrix<Complex64> {
    /// Gram matrix of explicit state vectors.
    pub fn from_vectors(vectors: &[&[Complex64]]) -> Result<Self> {
        let m = vectors.len();
        let mut rows = vec![vec![Complex64::zero(); m]; m];
        for i in 0..m {
            for j in 0..m {
                if vectors[i].len() != vectors[j].len() {
                    return Err(Error::InvalidArgument("state dimensions differ".into()));
                }
                rows[i][j] = vectors[i]
                    .iter()
                    .zip(vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
            }
            rows[i][i] = Complex64::one();
        }
        Self::new(rows)
    }

    /// Real symmetric matrix of inner products.
    pub fn from_real(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }
}

impl InnerProductMatrix<ExactComplex> {
    pub fn from_rational(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|x| Complex::new(x, BigRational::zero()))
                        .collect()
                })
                .collect(),
        )
    }
}
