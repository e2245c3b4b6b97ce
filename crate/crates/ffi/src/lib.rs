//! C ABI over the `vcdc` library.
//!
//! Codes and trained models are opaque heap handles created by the
//! `*_load` / `*_from_*` functions and released with the matching `*_free`.
//! Every fallible function returns a [`VcdcStatus`]; on failure a message is
//! available from [`vcdc_last_error`] on the same thread until the next call.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vcdc::{
    BpConfig, BpVariant, Decoder, Error, LlrWord, NeuralBlockWeights, ParityCheckMatrix,
    VcdcDecoder,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Dimension = 4,
    Io = 5,
    Internal = 6,
}

/// A parsed parity-check matrix.
pub struct VcdcCode {
    h: ParityCheckMatrix,
}

/// Trained neural-block weights bound to one code shape.
pub struct VcdcModel {
    weights: NeuralBlockWeights,
}

/// Per-decode summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VcdcDecodeInfo {
    /// BP iterations or reverse steps actually run.
    pub steps_used: usize,
    /// Unsatisfied parity checks of the returned word.
    pub parity_errors: usize,
    /// 1 when the returned word is a codeword, else 0.
    pub syndrome_zero: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VcdcStatus {
    match e {
        Error::Alist(_) | Error::Checkpoint(_) | Error::Config(_) => VcdcStatus::Parse,
        Error::Dimension { .. } => VcdcStatus::Dimension,
        Error::Io(_) => VcdcStatus::Io,
        Error::Tape(_) | Error::Diverged { .. } => VcdcStatus::Internal,
        _ => VcdcStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), VcdcStatus>) -> VcdcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VcdcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            VcdcStatus::Internal
        }
    }
}

fn fail(e: Error) -> VcdcStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> VcdcStatus {
    set_error(format!("{what} is null"));
    VcdcStatus::NullPointer
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, VcdcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        VcdcStatus::InvalidArgument
    })
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], VcdcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, VcdcStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn vcdc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Noise standard deviation for a rate-`k/n` code at `csnr_db`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn vcdc_noise_scale(csnr_db: f64, k: usize, n: usize, out: *mut f64) -> VcdcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = vcdc::noise_scale(csnr_db, k, n).map_err(fail)?;
        Ok(())
    })
}

/// Parses alist text into a new code handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcdc_code_from_alist(text: *const c_char, out: *mut *mut VcdcCode) -> VcdcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let h = ParityCheckMatrix::parse_alist(c_str(text, "text")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(VcdcCode { h }));
        Ok(())
    })
}

/// Reads an alist file into a new code handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcdc_code_load(path: *const c_char, out: *mut *mut VcdcCode) -> VcdcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = c_str(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.into()))?;
        let h = ParityCheckMatrix::parse_alist(&text).map_err(fail)?;
        *out = Box::into_raw(Box::new(VcdcCode { h }));
        Ok(())
    })
}

/// Releases a code handle; null is ignored.
///
/// # Safety
/// `code` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vcdc_code_free(code: *mut VcdcCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Code length, or 0 for null.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vcdc_code_n(code: *const VcdcCode) -> usize {
    code.as_ref().map_or(0, |c| c.h.n())
}

/// Code dimension, or 0 for null.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vcdc_code_k(code: *const VcdcCode) -> usize {
    code.as_ref().map_or(0, |c| c.h.k())
}

/// Parses checkpoint text for `code` into a new model handle.
///
/// # Safety
/// `code` must be a live handle, `text` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vcdc_model_from_checkpoint(
    code: *const VcdcCode,
    text: *const c_char,
    out: *mut *mut VcdcModel,
) -> VcdcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let code = code.as_ref().ok_or_else(|| null("code"))?;
        let weights = NeuralBlockWeights::from_checkpoint(c_str(text, "text")?).map_err(fail)?;
        weights.matches(&code.h).map_err(fail)?;
        *out = Box::into_raw(Box::new(VcdcModel { weights }));
        Ok(())
    })
}

/// Reads a checkpoint file for `code` into a new model handle.
///
/// # Safety
/// `code` must be a live handle, `path` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vcdc_model_load(
    code: *const VcdcCode,
    path: *const c_char,
    out: *mut *mut VcdcModel,
) -> VcdcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let code = code.as_ref().ok_or_else(|| null("code"))?;
        let text = std::fs::read_to_string(c_str(path, "path")?).map_err(|e| fail(e.into()))?;
        let weights = NeuralBlockWeights::from_checkpoint(&text).map_err(fail)?;
        weights.matches(&code.h).map_err(fail)?;
        *out = Box::into_raw(Box::new(VcdcModel { weights }));
        Ok(())
    })
}

/// Releases a model handle; null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vcdc_model_free(model: *mut VcdcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn finish(
    result: vcdc::DecodeResult,
    bits_out: *mut u8,
    info: *mut VcdcDecodeInfo,
) -> Result<(), VcdcStatus> {
    if bits_out.is_null() {
        return Err(null("bits_out"));
    }
    ptr::copy_nonoverlapping(result.bits.as_ptr(), bits_out, result.bits.len());
    if let Some(info) = info.as_mut() {
        *info = VcdcDecodeInfo {
            steps_used: result.steps_used,
            parity_errors: result.parity_errors,
            syndrome_zero: u8::from(result.syndrome_zero),
        };
    }
    Ok(())
}

/// Flooding BP on `len` channel LLRs. `min_sum` selects the min-sum check
/// rule instead of sum-product. Writes `n` bits to `bits_out`; `info` may
/// be null.
///
/// # Safety
/// `llr` must hold `len` doubles, `bits_out` room for `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn vcdc_decode_bp(
    code: *const VcdcCode,
    llr: *const f64,
    len: usize,
    max_iters: usize,
    min_sum: u8,
    bits_out: *mut u8,
    info: *mut VcdcDecodeInfo,
) -> VcdcStatus {
    guard(|| {
        let code = code.as_ref().ok_or_else(|| null("code"))?;
        let llr = slice(llr, len, "llr")?;
        let cfg = BpConfig {
            max_iters,
            variant: if min_sum != 0 {
                BpVariant::MinSum
            } else {
                BpVariant::SumProduct
            },
            ..BpConfig::default()
        };
        let result = vcdc::decode_bp(&code.h, &LlrWord::new(llr.to_vec(), 0.0), &cfg).map_err(fail)?;
        finish(result, bits_out, info)
    })
}

/// Reverse-diffusion decode of LLRs observed at `csnr_db`, with `steps`
/// levels spaced `step_db` apart. Writes `n` bits to `bits_out`; `info` may
/// be null.
///
/// # Safety
/// `llr` must hold `len` doubles, `bits_out` room for `n` bytes; handles
/// must be live.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn vcdc_decode_vcdc(
    code: *const VcdcCode,
    model: *const VcdcModel,
    llr: *const f64,
    len: usize,
    csnr_db: f64,
    steps: usize,
    step_db: f64,
    bits_out: *mut u8,
    info: *mut VcdcDecodeInfo,
) -> VcdcStatus {
    guard(|| {
        let code = code.as_ref().ok_or_else(|| null("code"))?;
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let llr = slice(llr, len, "llr")?;
        let dec = VcdcDecoder::new(code.h.clone(), model.weights.clone(), steps, step_db).map_err(fail)?;
        let result = dec.decode(&LlrWord::new(llr.to_vec(), csnr_db)).map_err(fail)?;
        finish(result, bits_out, info)
    })
}
