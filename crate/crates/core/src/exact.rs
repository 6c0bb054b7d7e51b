//! Exact Weingarten calculus at finite `d`.
//!
//! The twirl of `Λ` over `G^{⊗k}` is `Σ_μ c_μ P_μ` with `c = A⁻¹ b`,
//! `A[ν][μ] = Tr[P_ν P_μ]` and `b_ν = Tr[P_ν Λ]`. The basis `P_μ` is `S_k` for
//! the unitary group and the Brauer diagrams for the orthogonal group.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::brauer::{self, PairPartition};
use crate::overlap::{InnerProductMatrix, Scalar};
use crate::perm::{self, CycleType, Permutation};
use crate::{Error, Group, Result};

/// Largest `k` built by default. Unitary tables are cheap (class-function
/// inversion); orthogonal tables use dense elimination, cubic in `(2k-1)!!`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub unitary_k_max: usize,
    pub orthogonal_k_max: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            unitary_k_max: 6,
            orthogonal_k_max: 4,
        }
    }
}

impl Limits {
    pub fn k_max(&self, group: Group) -> usize {
        match group {
            Group::Unitary => self.unitary_k_max,
            Group::Orthogonal => self.orthogonal_k_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommutantBasis {
    Permutations(Vec<Permutation>),
    Brauer(Vec<PairPartition>),
}

impl CommutantBasis {
    pub fn build(k: usize, group: Group) -> Result<Self> {
        Ok(match group {
            Group::Unitary => CommutantBasis::Permutations(perm::enumerate_group(k)?),
            Group::Orthogonal => CommutantBasis::Brauer(brauer::enumerate_brauer(k)?),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            CommutantBasis::Permutations(v) => v.len(),
            CommutantBasis::Brauer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element `i` as a Brauer diagram (permutations embed).
    pub fn diagram(&self, i: usize) -> PairPartition {
        match self {
            CommutantBasis::Permutations(v) => PairPartition::from_permutation(&v[i]),
            CommutantBasis::Brauer(v) => v[i].clone(),
        }
    }

    /// `Tr[P_i P_j]`.
    fn pair_trace(&self, i: usize, j: usize, d: u64) -> Result<BigUint> {
        match self {
            CommutantBasis::Permutations(v) => Ok(v[i].compose(&v[j])?.character(d)),
            CommutantBasis::Brauer(v) => {
                let (s, loops) = v[i].compose(&v[j])?;
                Ok(BigUint::from(d).pow((loops + s.num_cycles()) as u32))
            }
        }
    }

    fn obs_trace(&self, i: usize, d: u64) -> BigUint {
        brauer::trace_obs_power(&self.diagram(i), d)
    }

    fn state_trace<T: Scalar>(
        &self,
        i: usize,
        g: &InnerProductMatrix<T>,
        assignment: &[usize],
    ) -> Result<T> {
        match self {
            CommutantBasis::Permutations(v) => perm::trace_state_product(&v[i], g, assignment),
            CommutantBasis::Brauer(v) => brauer::trace_state_product_brauer(&v[i], g, assignment),
        }
    }
}

/// Gram matrix over the commutant basis and its exact inverse.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    pub group: Group,
    pub k: usize,
    pub d: u64,
    pub basis: CommutantBasis,
    pub gram: Vec<Vec<BigUint>>,
    pub wg: Vec<Vec<BigRational>>,
    /// `wg` is only a generalized inverse (`A·wg·A = A`); the Gram matrix is
    /// singular because the basis operators are linearly dependent at this `d`.
    pub generalized: bool,
    /// `Σ_μ Tr[P_μ O^{⊗k}] wg[μ][ν]`: the moment is `Σ_ν weights[ν] Tr[Λ P_ν]`.
    weights: Vec<BigRational>,
}

/// One moment `E[∏_t C(ρ_{a(t)})]`.
#[derive(Debug, Clone)]
pub struct MomentSpec<'a, T: Scalar> {
    pub group: Group,
    pub d: u64,
    pub assignment: &'a [usize],
    pub overlaps: &'a InnerProductMatrix<T>,
}

fn check_capacity(k: usize, group: Group, limits: Limits) -> Result<()> {
    let limit = limits.k_max(group);
    if k > limit {
        return Err(Error::Capacity {
            what: "moment order k",
            requested: k,
            limit,
        });
    }
    Ok(())
}

/// `A[ν][μ] = Tr[P_ν P_μ]`.
pub fn gram_matrix(k: usize, d: u64, group: Group) -> Result<Vec<Vec<BigUint>>> {
    check_capacity(k, group, Limits::default())?;
    let basis = CommutantBasis::build(k, group)?;
    gram_for_basis(&basis, d)
}

fn gram_for_basis(basis: &CommutantBasis, d: u64) -> Result<Vec<Vec<BigUint>>> {
    let n = basis.len();
    let mut a = vec![vec![BigUint::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let t = basis.pair_trace(i, j, d)?;
            a[j][i] = t.clone();
            a[i][j] = t;
        }
    }
    Ok(a)
}

/// The exact inverse of the Gram matrix.
pub fn weingarten_matrix(k: usize, d: u64, group: Group) -> Result<Vec<Vec<BigRational>>> {
    Ok(WeingartenTable::build(group, k, d)?.wg)
}

impl WeingartenTable {
    pub fn build(group: Group, k: usize, d: u64) -> Result<Self> {
        Self::build_with_limits(group, k, d, Limits::default())
    }

    pub fn build_with_limits(group: Group, k: usize, d: u64, limits: Limits) -> Result<Self> {
        check_capacity(k, group, limits)?;
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let basis = match group {
            Group::Unitary => CommutantBasis::Permutations(perm::enumerate_group_with_limit(
                k,
                limits.unitary_k_max.max(perm::DEFAULT_K_MAX),
            )?),
            Group::Orthogonal => CommutantBasis::Brauer(brauer::enumerate_brauer_with_limit(
                k,
                limits.orthogonal_k_max.max(brauer::DEFAULT_K_MAX),
            )?),
        };
        let gram = gram_for_basis(&basis, d)?;
        let singular = || Error::SingularGram { group, k, d };
        let wg = match &basis {
            CommutantBasis::Permutations(elems) => {
                invert_class_function(k, d, elems).ok_or_else(singular)?
            }
            CommutantBasis::Brauer(_) => {
                let a: Vec<Vec<BigRational>> = gram
                    .iter()
                    .map(|row| row.iter().map(to_rational).collect())
                    .collect();
                invert(a).ok_or_else(singular)?
            }
        };
        Ok(Self::assemble(group, k, d, basis, gram, wg, false))
    }

    /// Like [`WeingartenTable::build_with_limits`], but a singular Gram matrix
    /// yields a generalized inverse supported on a maximal independent subset of
    /// the basis. Moments computed from it are exact.
    pub fn build_generalized_with_limits(
        group: Group,
        k: usize,
        d: u64,
        limits: Limits,
    ) -> Result<Self> {
        match Self::build_with_limits(group, k, d, limits) {
            Err(Error::SingularGram { .. }) => {}
            other => return other,
        }
        let limit = match group {
            Group::Unitary => GENERALIZED_UNITARY_K_MAX,
            Group::Orthogonal => limits.orthogonal_k_max,
        };
        if k > limit {
            return Err(Error::SingularGram { group, k, d });
        }
        let basis = CommutantBasis::build(k, group)?;
        let gram = gram_for_basis(&basis, d)?;
        let a: Vec<Vec<BigRational>> = gram
            .iter()
            .map(|row| row.iter().map(to_rational).collect())
            .collect();
        let wg = generalized_inverse(&a).ok_or(Error::SingularGram { group, k, d })?;
        Ok(Self::assemble(group, k, d, basis, gram, wg, true))
    }

    fn assemble(
        group: Group,
        k: usize,
        d: u64,
        basis: CommutantBasis,
        gram: Vec<Vec<BigUint>>,
        wg: Vec<Vec<BigRational>>,
        generalized: bool,
    ) -> Self {
        let n = basis.len();
        let obs: Vec<BigRational> = (0..n).map(|i| to_rational(&basis.obs_trace(i, d))).collect();
        let mut weights = vec![BigRational::zero(); n];
        for (mu, o) in obs.iter().enumerate() {
            if o.is_zero() {
                continue;
            }
            for (nu, w) in weights.iter_mut().enumerate() {
                *w += o * &wg[mu][nu];
            }
        }
        WeingartenTable {
            group,
            k,
            d,
            basis,
            gram,
            wg,
            generalized,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `E[∏_t C(ρ_{a(t)})]` for one Pauli-type observable.
    pub fn moment<T: Scalar>(&self, g: &InnerProductMatrix<T>, assignment: &[usize]) -> Result<T> {
        if assignment.len() != self.k {
            return Err(Error::OrderMismatch {
                left: self.k,
                right: assignment.len(),
            });
        }
        if self.group == Group::Orthogonal && !g.is_real() {
            return Err(Error::RealStatesRequired);
        }
        for &a in assignment {
            g.check_index(a)?;
        }
        if self.k % 2 == 1 {
            return Ok(T::zero());
        }
        let mut acc = T::zero();
        for (nu, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let t = self.basis.state_trace(nu, g, assignment)?;
            acc = acc + T::from_rational(w) * t;
        }
        Ok(acc)
    }

    /// Checks `A·wg = 1` exactly (or `A·wg·A = A` for a generalized inverse).
    pub fn verify_inverse(&self) -> bool {
        let n = self.dim();
        let a: Vec<Vec<BigRational>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(to_rational).collect())
            .collect();
        let aw = mat_mul(&a, &self.wg);
        if self.generalized {
            return mat_mul(&aw, &a) == a;
        }
        (0..n).all(|i| {
            (0..n).all(|j| {
                if i == j {
                    aw[i][j].is_one()
                } else {
                    aw[i][j].is_zero()
                }
            })
        })
    }
}

/// Evaluates one moment, reusing tables from the process-wide cache. A
/// singular Gram matrix (small `d`) falls back to a generalized inverse.
pub fn exact_moment<T: Scalar>(spec: &MomentSpec<'_, T>) -> Result<T> {
    let k = spec.assignment.len();
    if spec.group == Group::Orthogonal && !spec.overlaps.is_real() {
        return Err(Error::RealStatesRequired);
    }
    if k % 2 == 1 {
        for &a in spec.assignment {
            spec.overlaps.check_index(a)?;
        }
        return Ok(T::zero());
    }
    let table = TableCache::global().get(spec.group, k, spec.d)?;
    table.moment(spec.overlaps, spec.assignment)
}

/// Exact covariance `E[C(ρ)C(ρ')]` as a function of `Tr[ρρ'] ∈ [0, 1]`.
///
/// Unitary: `d/(d²−1)·(t − 1/d)`. Orthogonal (real states): `2(dt − 1)/((d+2)(d−1))`.
pub fn exact_covariance(overlap: &BigRational, d: u64, group: Group) -> Result<BigRational> {
    if overlap < &BigRational::zero() || overlap > &BigRational::one() {
        return Err(Error::Domain(format!("overlap {overlap} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::Domain("covariance needs d ≥ 2".into()));
    }
    let dd = BigRational::from_integer(BigInt::from(d));
    let one = BigRational::one();
    Ok(match group {
        Group::Unitary => &dd / (&dd * &dd - &one) * (overlap - &one / &dd),
        Group::Orthogonal => {
            let two = BigRational::from_integer(BigInt::from(2));
            &two * (&dd * overlap - &one) / ((&dd + &two) * (&dd - &one))
        }
    })
}

pub fn exact_covariance_f64(overlap: f64, d: u64, group: Group) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Domain(format!("overlap {overlap} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::Domain("covariance needs d ≥ 2".into()));
    }
    let d = d as f64;
    Ok(match group {
        Group::Unitary => d / (d * d - 1.0) * (overlap - 1.0 / d),
        Group::Orthogonal => 2.0 * (d * overlap - 1.0) / ((d + 2.0) * (d - 1.0)),
    })
}

/// Covariance between outputs of two distinct (trace-orthogonal) observables.
pub fn cross_observable_covariance() -> BigRational {
    BigRational::zero()
}

/// Largest unitary order for the generalized-inverse fallback (dense elimination on `k!` rows).
pub const GENERALIZED_UNITARY_K_MAX: usize = 5;

fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![BigRational::zero(); m]; n];
    for i in 0..n {
        for (l, x) in a[i].iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] += x * &b[l][j];
                }
            }
        }
    }
    out
}

/// Generalized inverse of a symmetric Gram matrix: the inverse of the block on
/// a maximal set of independent columns, zero elsewhere.
pub fn generalized_inverse(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let cols = independent_columns(a);
    let sub: Vec<Vec<BigRational>> = cols
        .iter()
        .map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect())
        .collect();
    let sub_inv = invert(sub)?;
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for (x, &i) in cols.iter().enumerate() {
        for (y, &j) in cols.iter().enumerate() {
            out[i][j] = sub_inv[x][y].clone();
        }
    }
    Some(out)
}

/// Pivot columns of the row echelon form.
fn independent_columns(a: &[Vec<BigRational>]) -> Vec<usize> {
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot_row = m[r].clone();
        for i in r + 1..rows {
            if m[i][col].is_zero() {
                continue;
            }
            let f = &m[i][col] / &pivot_row[col];
            for (x, y) in m[i].iter_mut().zip(&pivot_row).skip(col) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub(crate) fn to_rational(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Gauss-Jordan inversion over the rationals; `None` if singular.
pub fn invert(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        if !p.is_one() {
            for x in a[col].iter_mut().skip(col) {
                *x /= &p;
            }
            for x in inv[col].iter_mut() {
                *x /= &p;
            }
        }
        let (pivot_a, pivot_inv) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot_a).skip(col) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            for (x, y) in inv[r].iter_mut().zip(&pivot_inv) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(inv)
}

/// Inverse of `A[σ][τ] = d^{#cycles(στ)}` on `S_k`.
///
/// `A` is convolution by the class function `f = d^{#cycles}`, so its inverse
/// is convolution by a class function `W` with `f * W = δ_e`, and
/// `wg[σ][τ] = W(στ)`. Solving for `W` needs one unknown per cycle type.
fn invert_class_function(k: usize, d: u64, elems: &[Permutation]) -> Option<Vec<Vec<BigRational>>> {
    let mut class_of: HashMap<CycleType, usize> = HashMap::new();
    let mut reps: Vec<&Permutation> = Vec::new();
    let classes: Vec<usize> = elems
        .iter()
        .map(|p| {
            let ct = p.cycle_type();
            let next = class_of.len();
            *class_of.entry(ct).or_insert_with(|| {
                reps.push(p);
                next
            })
        })
        .collect();
    let nc = reps.len();
    let f: Vec<BigRational> = elems.iter().map(|p| to_rational(&p.character(d))).collect();

    // Row c: (f * W)(y_c) = Σ_x f(x) W(x⁻¹ y_c) = δ(y_c = e).
    let mut m = vec![vec![BigRational::zero(); nc]; nc];
    for (c, y) in reps.iter().enumerate() {
        for (x, fx) in elems.iter().zip(&f) {
            let z = x.inverse().compose(y).ok()?;
            m[c][class_of[&z.cycle_type()]] += fx;
        }
    }
    let minv = invert(m)?;
    let e_class = class_of[&Permutation::identity(k).cycle_type()];
    let w: Vec<BigRational> = (0..nc).map(|c| minv[c][e_class].clone()).collect();

    let index: HashMap<&Permutation, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let n = elems.len();
    let mut wg = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = elems[i].compose(&elems[j]).ok()?;
            wg[i][j] = w[classes[index[&prod]]].clone();
        }
    }
    Some(wg)
}

/// Process-wide table cache, optionally backed by a directory of JSON files.
pub struct TableCache {
    dir: Mutex<Option<PathBuf>>,
    tables: Mutex<HashMap<(Group, usize, u64), Arc<WeingartenTable>>>,
}

impl TableCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        TableCache {
            dir: Mutex::new(dir),
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn global() -> &'static TableCache {
        static CACHE: OnceLock<TableCache> = OnceLock::new();
        CACHE.get_or_init(|| TableCache::new(None))
    }

    pub fn set_dir(&self, dir: Option<PathBuf>) {
        *self.dir.lock().expect("cache lock") = dir;
    }

    pub fn get(&self, group: Group, k: usize, d: u64) -> Result<Arc<WeingartenTable>> {
        let key = (group, k, d);
        if let Some(t) = self.tables.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let dir = self.dir.lock().expect("cache lock").clone();
        let table = match dir.as_deref().map(|d| table_path(d, group, k, key.2)) {
            Some(path) if path.exists() => load_table(&path)?,
            Some(path) => {
                let t = WeingartenTable::build_generalized_with_limits(group, k, d, Limits::default())?;
                save_table(&t, &path)?;
                t
            }
            None => WeingartenTable::build_generalized_with_limits(group, k, d, Limits::default())?,
        };
        let table = Arc::new(table);
        self.tables
            .lock()
            .expect("cache lock")
            .insert(key, table.clone());
        Ok(table)
    }
}

fn table_path(dir: &Path, group: Group, k: usize, d: u64) -> PathBuf {
    dir.join(format!("wg_{group}_k{k}_d{d}.json"))
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    group: Group,
    k: usize,
    d: u64,
    generalized: bool,
    gram: Vec<Vec<String>>,
    /// `[numerator, denominator]` decimal strings.
    wg: Vec<Vec<[String; 2]>>,
}

pub fn save_table(table: &WeingartenTable, path: &Path) -> Result<()> {
    let file = TableFile {
        group: table.group,
        k: table.k,
        d: table.d,
        generalized: table.generalized,
        gram: table
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect(),
        wg: table
            .wg
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| [x.numer().to_string(), x.denom().to_string()])
                    .collect()
            })
            .collect(),
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let text = serde_json::to_string(&file).map_err(|e| Error::io(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_table(path: &Path) -> Result<WeingartenTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: TableFile = serde_json::from_str(&text).map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::io(path, format!("malformed {what}"));
    let basis = CommutantBasis::build(file.k, file.group)?;
    let n = basis.len();
    if file.gram.len() != n || file.wg.len() != n {
        return Err(bad("table size"));
    }
    let gram = file
        .gram
        .iter()
        .map(|r| r.iter().map(|s| s.parse::<BigUint>().map_err(|_| bad("gram entry"))).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    let wg = file
        .wg
        .iter()
        .map(|r| {
            r.iter()
                .map(|[a, b]| {
                    let num = a.parse::<BigInt>().map_err(|_| bad("numerator"))?;
                    let den = b.parse::<BigInt>().map_err(|_| bad("denominator"))?;
                    if den.is_zero() {
                        return Err(bad("denominator"));
                    }
                    Ok(BigRational::new(num, den))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    if gram != gram_for_basis(&basis, file.d)? {
        return Err(bad("gram matrix"));
    }
    let table = WeingartenTable::assemble(file.group, file.k, file.d, basis, gram, wg, file.generalized);
    // Full verification is cubic; large tables are trusted after the Gram check.
    if table.dim() <= 120 && !table.verify_inverse() {
        return Err(bad("Weingarten matrix"));
    }
    Ok(table)
}
