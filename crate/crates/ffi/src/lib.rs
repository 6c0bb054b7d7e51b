//! C ABI for `haargp`.
//!
//! Every fallible function returns an [`HgpStatus`]. On failure the message
//! is kept per thread and can be copied out with [`hgp_last_error_message`].
//! Objects are opaque handles released by their `*_free` function; passing
//! NULL to a `*_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use haargp::exact::{exact_covariance_f64, exact_moment, MomentSpec, WeingartenTable};
use haargp::gp_moments::asymptotic_moment_pairings;
use haargp::haar::{parse_dataset_spec, sample_outputs, PauliObservable, SampleBatch};
use haargp::overlap::InnerProductMatrix;
use haargp::tails;
use haargp::{Error, Group};
use num_complex::Complex64;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    SingularGram = 4,
    RealStatesRequired = 5,
    Domain = 6,
    MemoryGuard = 7,
    Unsupported = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgpGroup {
    Unitary = 0,
    Orthogonal = 1,
}

impl From<HgpGroup> for Group {
    fn from(g: HgpGroup) -> Group {
        match g {
            HgpGroup::Unitary => Group::Unitary,
            HgpGroup::Orthogonal => Group::Orthogonal,
        }
    }
}

/// Weingarten matrix for one `(group, k, d)`.
pub struct HgpWeingarten(WeingartenTable);

/// Hermitian matrix of state inner products `⟨ψ_i|ψ_j⟩`.
pub struct HgpOverlaps(InnerProductMatrix<Complex64>);

/// Row-major Monte Carlo samples of `C(ρ_j)`.
pub struct HgpSamples(SampleBatch);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> HgpStatus {
    match err {
        Error::Capacity { .. } => HgpStatus::Capacity,
        Error::SingularGram { .. } | Error::SingularKernel | Error::DegenerateMoment => HgpStatus::SingularGram,
        Error::RealStatesRequired => HgpStatus::RealStatesRequired,
        Error::Domain(_) => HgpStatus::Domain,
        Error::MemoryGuard { .. } => HgpStatus::MemoryGuard,
        Error::Unsupported(_) => HgpStatus::Unsupported,
        Error::Io { .. } => HgpStatus::Io,
        _ => HgpStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> HgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HgpStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HgpStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HgpStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn items<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hgp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds the exact Weingarten matrix. Singular Gram matrices are an error.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_weingarten_new(group: HgpGroup, k: usize, d: u64, out_table: *mut *mut HgpWeingarten) -> HgpStatus {
    guarded(|| {
        let slot = out(out_table, "out_table")?;
        let t = WeingartenTable::build(group.into(), k, d)?;
        *slot = Box::into_raw(Box::new(HgpWeingarten(t)));
        Ok(())
    })
}

/// Number of basis elements (`k!` or `(2k-1)!!`).
///
/// # Safety
/// `table` must come from [`hgp_weingarten_new`].
#[no_mangle]
pub unsafe extern "C" fn hgp_weingarten_dim(table: *const HgpWeingarten, out_dim: *mut usize) -> HgpStatus {
    guarded(|| {
        *out(out_dim, "out_dim")? = input(table, "table")?.0.dim();
        Ok(())
    })
}

/// Entry `(i, j)` rounded to `double`.
///
/// # Safety
/// `table` must come from [`hgp_weingarten_new`].
#[no_mangle]
pub unsafe extern "C" fn hgp_weingarten_entry(
    table: *const HgpWeingarten,
    i: usize,
    j: usize,
    out_value: *mut f64,
) -> HgpStatus {
    guarded(|| {
        let t = &input(table, "table")?.0;
        let n = t.dim();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: n }.into());
        }
        *out(out_value, "out_value")? = t.wg[i][j].to_f64().unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or come from [`hgp_weingarten_new`], and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hgp_weingarten_free(table: *mut HgpWeingarten) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Overlap matrix from `m` state vectors of dimension `d`, stored as
/// interleaved `(re, im)` pairs, state after state (`2·m·d` doubles).
///
/// # Safety
/// `amplitudes` must point to `2·m·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn hgp_overlaps_from_states(
    amplitudes: *const f64,
    m: usize,
    d: usize,
    out_overlaps: *mut *mut HgpOverlaps,
) -> HgpStatus {
    guarded(|| {
        let slot = out(out_overlaps, "out_overlaps")?;
        let raw = items(amplitudes, 2 * m * d, "amplitudes")?;
        let states: Vec<Vec<Complex64>> = raw
            .chunks(2 * d.max(1))
            .map(|s| s.chunks(2).map(|z| Complex64::new(z[0], z[1])).collect())
            .collect();
        let refs: Vec<&[Complex64]> = states.iter().map(Vec::as_slice).collect();
        *slot = Box::into_raw(Box::new(HgpOverlaps(InnerProductMatrix::from_vectors(&refs)?)));
        Ok(())
    })
}

/// Overlap matrix from a real symmetric `m×m` row-major array.
///
/// # Safety
/// `entries` must point to `m·m` doubles.
#[no_mangle]
pub unsafe extern "C" fn hgp_overlaps_from_real(entries: *const f64, m: usize, out_overlaps: *mut *mut HgpOverlaps) -> HgpStatus {
    guarded(|| {
        let slot = out(out_overlaps, "out_overlaps")?;
        let raw = items(entries, m * m, "entries")?;
        let rows = raw.chunks(m.max(1)).map(<[f64]>::to_vec).collect();
        *slot = Box::into_raw(Box::new(HgpOverlaps(InnerProductMatrix::from_real(rows)?)));
        Ok(())
    })
}

/// # Safety
/// `overlaps` must be NULL or a live handle, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hgp_overlaps_free(overlaps: *mut HgpOverlaps) {
    if !overlaps.is_null() {
        drop(Box::from_raw(overlaps));
    }
}

/// Exact `E[C(ρ_{a_0}) ⋯ C(ρ_{a_{k-1}})]` for a traceless Pauli observable.
///
/// # Safety
/// `assignment` must point to `k` indices into `overlaps`.
#[no_mangle]
pub unsafe extern "C" fn hgp_exact_moment(
    group: HgpGroup,
    d: u64,
    overlaps: *const HgpOverlaps,
    assignment: *const usize,
    k: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HgpStatus {
    guarded(|| {
        let g = &input(overlaps, "overlaps")?.0;
        let a = items(assignment, k, "assignment")?;
        let (re, im) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let v = exact_moment(&MomentSpec {
            group: group.into(),
            d,
            assignment: a,
            overlaps: g,
        })?;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Large-`d` pairing sum for the same moment.
///
/// # Safety
/// `assignment` must point to `k` indices into `overlaps`.
#[no_mangle]
pub unsafe extern "C" fn hgp_asymptotic_moment(
    group: HgpGroup,
    d: u64,
    overlaps: *const HgpOverlaps,
    assignment: *const usize,
    k: usize,
    out_value: *mut f64,
) -> HgpStatus {
    guarded(|| {
        let g = &input(overlaps, "overlaps")?.0;
        let a = items(assignment, k, "assignment")?;
        *out(out_value, "out_value")? = asymptotic_moment_pairings(g, a, d, group.into())?;
        Ok(())
    })
}

/// Exact `Cov[C(ρ), C(ρ')]` as a function of the fidelity `Tr[ρρ']`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_exact_covariance(fidelity: f64, d: u64, group: HgpGroup, out_value: *mut f64) -> HgpStatus {
    guarded(|| {
        *out(out_value, "out_value")? = exact_covariance_f64(fidelity, d, group.into())?;
        Ok(())
    })
}

/// Samples `n` Haar draws of `C(ρ_j)` for a named dataset (`zero`, `ghz-pair`,
/// `basis:4`, …) on `qubits` qubits and a Pauli observable (`Z1`, `XZII`, …).
///
/// # Safety
/// `dataset` and `observable` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hgp_sample_outputs(
    qubits: usize,
    dataset: *const c_char,
    observable: *const c_char,
    group: HgpGroup,
    n: usize,
    seed: u64,
    out_samples: *mut *mut HgpSamples,
) -> HgpStatus {
    guarded(|| {
        let slot = out(out_samples, "out_samples")?;
        let group: Group = group.into();
        let ds = parse_dataset_spec(text(dataset, "dataset")?, qubits, seed, group == Group::Orthogonal)?;
        let obs = PauliObservable::parse(text(observable, "observable")?, qubits)?;
        let b = sample_outputs(&ds.states, &ds.labels, &obs, group, n, seed)?;
        *slot = Box::into_raw(Box::new(HgpSamples(b)));
        Ok(())
    })
}

/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hgp_samples_shape(samples: *const HgpSamples, out_rows: *mut usize, out_cols: *mut usize) -> HgpStatus {
    guarded(|| {
        let b = &input(samples, "samples")?.0;
        *out(out_rows, "out_rows")? = b.n_samples;
        *out(out_cols, "out_cols")? = b.n_columns();
        Ok(())
    })
}

/// Copies the row-major values into `buf`, which must hold `rows·cols` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hgp_samples_copy(samples: *const HgpSamples, buf: *mut f64, len: usize) -> HgpStatus {
    guarded(|| {
        let b = &input(samples, "samples")?.0;
        if len < b.values.len() {
            return Err(Error::InvalidArgument(format!("buffer holds {len}, need {}", b.values.len())).into());
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        std::ptr::copy_nonoverlapping(b.values.as_ptr(), buf, b.values.len());
        Ok(())
    })
}

/// # Safety
/// `samples` must be NULL or a live handle, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hgp_samples_free(samples: *mut HgpSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// `σ = √(f/d)`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_output_sigma(d: u64, group: HgpGroup, out_value: *mut f64) -> HgpStatus {
    guarded(|| {
        *out(out_value, "out_value")? = tails::output_sigma(d, group.into())?;
        Ok(())
    })
}

/// `P(|X| ≥ c)` for `X ~ N(0, σ²)`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_gaussian_tail(c: f64, sigma: f64, out_value: *mut f64) -> HgpStatus {
    guarded(|| {
        *out(out_value, "out_value")? = tails::gaussian_tail(c, sigma)?;
        Ok(())
    })
}

/// Union bound on `P(|∂C| ≥ c)` for the unitary group.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_gradient_tail_bound(c: f64, d: u64, out_value: *mut f64) -> HgpStatus {
    guarded(|| {
        *out(out_value, "out_value")? = tails::gradient_tail_bound(c, d)?;
        Ok(())
    })
}

/// Bound on `P(|ℒ − Eℒ| ≥ c)` for the squared loss with label `y`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgp_loss_tail_bound(c: f64, y: f64, d: u64, group: HgpGroup, out_value: *mut f64) -> HgpStatus {
    guarded(|| {
        *out(out_value, "out_value")? = tails::loss_concentration_bound(c, y, d, group.into())?;
        Ok(())
    })
}
