//! C ABI for the coding and protection pipeline.
//!
//! All domain objects cross the boundary as opaque handles created and
//! released here; every function returns a `ZcStatus` and reports data
//! through out-pointers.  On any non-OK status a human-readable message is
//! stored thread-locally and can be fetched with `zc_last_error_message`.
//! Complex arrays are interleaved doubles (re, im), row-major for matrices.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use zenocode::code_search::{complete_coding_matrix, find_code, hamming_bound, CodeSpace, CodingMatrix};
use zenocode::error_model::{FieldProfile, GeneratorSet};
use zenocode::zeno::{coordinate_subspace, run_protection, ProjectionMode, ZenoConfig};
use zenocode::{C64, Operator};

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    NumericalError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: ZcStatus, msg: impl Into<String>) -> ZcStatus {
    set_error(msg);
    status
}

fn status_of(err: &zenocode::Error) -> ZcStatus {
    use zenocode::Error as E;
    match err {
        E::InvalidArgument(_)
        | E::DimensionMismatch { .. }
        | E::Parse { .. }
        | E::NotHermitian { .. }
        | E::NotUnitary { .. }
        | E::NotOrthonormal { .. }
        | E::NotNormalized { .. }
        | E::DependentGenerators { .. } => ZcStatus::InvalidArgument,
        E::CompletionFailed { .. } | E::DegenerateConfiguration(_) | E::RestartRequired { .. } => {
            ZcStatus::NotConverged
        }
        _ => ZcStatus::NumericalError,
    }
}

/// Run a closure, converting panics into `NumericalError` instead of
/// unwinding across the C boundary.
fn guarded(f: impl FnOnce() -> ZcStatus) -> ZcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ZcStatus::NumericalError, "internal panic"),
    }
}

/// A set of Hermitian error generators (opaque).
pub struct ZcGeneratorSet {
    inner: GeneratorSet,
}

/// A converged (or best-effort) code space (opaque).
pub struct ZcCodeSpace {
    inner: CodeSpace,
}

/// A unitary coding matrix (opaque).
pub struct ZcCodingMatrix {
    inner: CodingMatrix,
}

unsafe fn opt_ref<'a, T>(p: *const T) -> Option<&'a T> {
    p.as_ref()
}

/// ABI version of this header; bumped on any breaking change.
#[no_mangle]
pub extern "C" fn zc_abi_version() -> u32 {
    1
}

/// Copy the last error message (UTF-8, NUL-terminated) into `buf`.
/// Returns the full length including the terminator; if `cap` is smaller,
/// the copy is truncated. `buf` may be null to query the length.
#[no_mangle]
pub unsafe extern "C" fn zc_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        let needed = bytes.len() + 1;
        if !buf.is_null() && cap > 0 {
            let n = (cap - 1).min(bytes.len());
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        needed
    })
}

/// Packing feasibility: sets `*out_satisfied` to 1 when A - 1 >= M.
#[no_mangle]
pub unsafe extern "C" fn zc_hamming_bound(
    ancilla_dim: usize,
    generator_count: usize,
    out_satisfied: *mut i32,
) -> ZcStatus {
    guarded(|| {
        let Some(out) = out_satisfied.as_mut() else {
            return fail(ZcStatus::NullPointer, "out_satisfied is null");
        };
        match hamming_bound(ancilla_dim, generator_count) {
            Ok(ok) => {
                *out = i32::from(ok);
                ZcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Seeded random Hermitian generator set with unit spectral norms.
#[no_mangle]
pub unsafe extern "C" fn zc_generator_set_random(
    dim: usize,
    count: usize,
    seed: u64,
    out: *mut *mut ZcGeneratorSet,
) -> ZcStatus {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return fail(ZcStatus::NullPointer, "out is null");
        };
        match GeneratorSet::random_hermitian(dim, count, seed) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ZcGeneratorSet { inner }));
                ZcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Generator set from caller-provided matrices: `entries` holds `count`
/// matrices back to back, each `dim * dim` row-major interleaved complex
/// entries (so `count * dim * dim * 2` doubles in total).  Each matrix must
/// be Hermitian; the set must be linearly independent.
#[no_mangle]
pub unsafe extern "C" fn zc_generator_set_from_entries(
    dim: usize,
    count: usize,
    entries: *const f64,
    out: *mut *mut ZcGeneratorSet,
) -> ZcStatus {
    guarded(|| {
        let Some(out) = out.as_mut() else {
            return fail(ZcStatus::NullPointer, "out is null");
        };
        if entries.is_null() {
            return fail(ZcStatus::NullPointer, "entries is null");
        }
        if dim == 0 || count == 0 {
            return fail(ZcStatus::InvalidArgument, "dim and count must be at least 1");
        }
        let per = dim * dim * 2;
        let all = std::slice::from_raw_parts(entries, count * per);
        let mut ops = Vec::with_capacity(count);
        for g in 0..count {
            let chunk = &all[g * per..(g + 1) * per];
            let m = nalgebra::DMatrix::<C64>::from_fn(dim, dim, |r, c| {
                let base = 2 * (r * dim + c);
                C64::new(chunk[base], chunk[base + 1])
            });
            match Operator::hermitian(m) {
                Ok(op) => ops.push(op),
                Err(e) => return fail(status_of(&e), format!("generator {g}: {e}")),
            }
        }
        match GeneratorSet::new(dim, ops, Vec::new()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ZcGeneratorSet { inner }));
                ZcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn zc_generator_set_dim(gens: *const ZcGeneratorSet) -> usize {
    opt_ref(gens).map(|g| g.inner.dim()).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn zc_generator_set_len(gens: *const ZcGeneratorSet) -> usize {
    opt_ref(gens).map(|g| g.inner.len()).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn zc_generator_set_free(gens: *mut ZcGeneratorSet) {
    if !gens.is_null() {
        drop(Box::from_raw(gens));
    }
}

/// Iterative code search.  `*out_iterations` and `*out_residual` are always
/// filled; `*out_code` is set only on convergence (status `Ok`), otherwise
/// the status is `NotConverged` and no handle is produced.
#[no_mangle]
pub unsafe extern "C" fn zc_find_code(
    gens: *const ZcGeneratorSet,
    code_dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    out_code: *mut *mut ZcCodeSpace,
    out_iterations: *mut usize,
    out_residual: *mut f64,
) -> ZcStatus {
    guarded(|| {
        let Some(gens) = opt_ref(gens) else {
            return fail(ZcStatus::NullPointer, "gens is null");
        };
        let Some(out_code) = out_code.as_mut() else {
            return fail(ZcStatus::NullPointer, "out_code is null");
        };
        match find_code(&gens.inner, code_dim, tol, max_iter, seed) {
            Ok(res) => {
                if let Some(p) = out_iterations.as_mut() {
                    *p = res.iterations;
                }
                if let Some(p) = out_residual.as_mut() {
                    *p = res.code.residual();
                }
                if res.converged {
                    *out_code = Box::into_raw(Box::new(ZcCodeSpace { inner: res.code }));
                    ZcStatus::Ok
                } else {
                    fail(
                        ZcStatus::NotConverged,
                        format!(
                            "code search stalled at residual {:.3e} after {} iterations",
                            res.code.residual(),
                            res.iterations
                        ),
                    )
                }
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn zc_code_space_dim(code: *const ZcCodeSpace) -> usize {
    opt_ref(code).map(|c| c.inner.dim()).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn zc_code_space_code_dim(code: *const ZcCodeSpace) -> usize {
    opt_ref(code).map(|c| c.inner.code_dim()).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn zc_code_space_residual(code: *const ZcCodeSpace) -> f64 {
    opt_ref(code).map(|c| c.inner.residual()).unwrap_or(f64::NAN)
}

/// Copy codeword `index` as `dim` interleaved complex doubles into `buf`
/// (capacity `cap` doubles; needs `2 * dim`).
#[no_mangle]
pub unsafe extern "C" fn zc_code_space_codeword(
    code: *const ZcCodeSpace,
    index: usize,
    buf: *mut f64,
    cap: usize,
) -> ZcStatus {
    guarded(|| {
        let Some(code) = opt_ref(code) else {
            return fail(ZcStatus::NullPointer, "code is null");
        };
        if buf.is_null() {
            return fail(ZcStatus::NullPointer, "buf is null");
        }
        if index >= code.inner.code_dim() {
            return fail(
                ZcStatus::InvalidArgument,
                format!("codeword index {index} out of range 0..{}", code.inner.code_dim()),
            );
        }
        let dim = code.inner.dim();
        if cap < 2 * dim {
            return fail(ZcStatus::InvalidArgument, format!("buffer needs {} doubles", 2 * dim));
        }
        let w = code.inner.codeword(index);
        let out = std::slice::from_raw_parts_mut(buf, 2 * dim);
        for (i, z) in w.amplitudes().iter().enumerate() {
            out[2 * i] = z.re;
            out[2 * i + 1] = z.im;
        }
        ZcStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn zc_code_space_free(code: *mut ZcCodeSpace) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Extend a converged code space to a full unitary coding matrix.
#[no_mangle]
pub unsafe extern "C" fn zc_complete_coding_matrix(
    code: *const ZcCodeSpace,
    seed: u64,
    out: *mut *mut ZcCodingMatrix,
) -> ZcStatus {
    guarded(|| {
        let Some(code) = opt_ref(code) else {
            return fail(ZcStatus::NullPointer, "code is null");
        };
        let Some(out) = out.as_mut() else {
            return fail(ZcStatus::NullPointer, "out is null");
        };
        match complete_coding_matrix(&code.inner, seed) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ZcCodingMatrix { inner }));
                ZcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn zc_coding_matrix_dim(cm: *const ZcCodingMatrix) -> usize {
    opt_ref(cm).map(|c| c.inner.dim()).unwrap_or(0)
}

/// Copy the full coding matrix, row-major interleaved, into `buf`
/// (capacity `cap` doubles; needs `2 * dim * dim`).
#[no_mangle]
pub unsafe extern "C" fn zc_coding_matrix_entries(
    cm: *const ZcCodingMatrix,
    buf: *mut f64,
    cap: usize,
) -> ZcStatus {
    guarded(|| {
        let Some(cm) = opt_ref(cm) else {
            return fail(ZcStatus::NullPointer, "cm is null");
        };
        if buf.is_null() {
            return fail(ZcStatus::NullPointer, "buf is null");
        }
        let dim = cm.inner.dim();
        if cap < 2 * dim * dim {
            return fail(ZcStatus::InvalidArgument, format!("buffer needs {} doubles", 2 * dim * dim));
        }
        let m = cm.inner.operator().matrix();
        let out = std::slice::from_raw_parts_mut(buf, 2 * dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let z = m[(r, c)];
                let base = 2 * (r * dim + c);
                out[base] = z.re;
                out[base + 1] = z.im;
            }
        }
        ZcStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn zc_coding_matrix_free(cm: *mut ZcCodingMatrix) {
    if !cm.is_null() {
        drop(Box::from_raw(cm));
    }
}

/// Deterministic protection run under constant fields.
///
/// `field_amplitudes` holds one amplitude per generator.  The initial state
/// is the first information basis vector.  On success `*out_cumulative_survival`
/// is the product of per-cycle survival probabilities and
/// `*out_final_fidelity` the fidelity to the initial state after the last
/// cycle.
#[no_mangle]
pub unsafe extern "C" fn zc_run_protection(
    coding: *const ZcCodingMatrix,
    gens: *const ZcGeneratorSet,
    field_amplitudes: *const f64,
    tau_z: f64,
    n_cycles: usize,
    dt: f64,
    seed: u64,
    out_cumulative_survival: *mut f64,
    out_final_fidelity: *mut f64,
) -> ZcStatus {
    guarded(|| {
        let Some(coding) = opt_ref(coding) else {
            return fail(ZcStatus::NullPointer, "coding is null");
        };
        let Some(gens) = opt_ref(gens) else {
            return fail(ZcStatus::NullPointer, "gens is null");
        };
        if field_amplitudes.is_null() {
            return fail(ZcStatus::NullPointer, "field_amplitudes is null");
        }
        let amps = std::slice::from_raw_parts(field_amplitudes, gens.inner.len());
        let fields: Vec<FieldProfile> =
            amps.iter().map(|&a| FieldProfile::Constant { amplitude: a }).collect();
        let run = (|| -> zenocode::Result<(f64, f64)> {
            let subspace = coordinate_subspace(coding.inner.dim(), coding.inner.code_dim())?;
            let psi0 = subspace[0].clone();
            let cfg = ZenoConfig {
                tau_z,
                n_cycles,
                dt,
                mode: ProjectionMode::Deterministic,
                seed,
            };
            let rec = run_protection(&psi0, &coding.inner, &gens.inner, &fields, &cfg, &subspace)?;
            let fid = rec.cycles.last().map(|r| r.fidelity_to_initial).unwrap_or(1.0);
            Ok((rec.cumulative_survival, fid))
        })();
        match run {
            Ok((surv, fid)) => {
                if let Some(p) = out_cumulative_survival.as_mut() {
                    *p = surv;
                }
                if let Some(p) = out_final_fidelity.as_mut() {
                    *p = fid;
                }
                ZcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}
