//! C ABI over the `urk` protocol, message and turnstile sketch types.
//!
//! Every function returns a [`UrkStatus`]. On failure a description is
//! kept per thread and can be copied out with [`urk_last_error`]. Handles
//! are opaque heap objects released with their matching `_free` function;
//! passing NULL to a `_free` function is a no-op. Handles are immutable
//! except sketches, which must not be updated from two threads at once.

use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;
use urk::protocol::{BobOutput, ProtocolParams, UrMessage, UrProtocol};
use urk::stream::TurnstileSketch;
use urk::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrkStatus {
    Ok = 0,
    /// An argument violated a documented precondition.
    Param = 1,
    /// Input bytes could not be parsed.
    Format = 2,
    /// Decoding would exceed the search work limit.
    Refused = 3,
    /// A required pointer was NULL.
    Null = 4,
    /// An output buffer was too small; the required size was written.
    Buffer = 5,
    /// An internal panic was caught at the boundary.
    Internal = 6,
}

/// Sketch-based universal-relation protocol.
pub struct UrkProtocol(Arc<UrProtocol>);

/// Alice's message.
pub struct UrkMessage(UrMessage);

/// Strict-turnstile sketch.
pub struct UrkSketch(TurnstileSketch);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: UrkStatus, msg: impl Into<String>) -> UrkStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> UrkStatus {
    let status = match e {
        Error::Parameter(_) => UrkStatus::Param,
        Error::Format(_) => UrkStatus::Format,
        Error::Refused { .. } => UrkStatus::Refused,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), UrkStatus>) -> UrkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UrkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(UrkStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, UrkStatus>;
}

impl<T> OrStatus<T> for urk::Result<T> {
    fn or_status(self) -> Result<T, UrkStatus> {
        self.map_err(from_error)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, UrkStatus> {
    unsafe { p.as_ref() }.ok_or_else(|| fail(UrkStatus::Null, format!("{what} is NULL")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, UrkStatus> {
    unsafe { p.as_mut() }.ok_or_else(|| fail(UrkStatus::Null, format!("{what} is NULL")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], UrkStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(UrkStatus::Null, format!("{what} is NULL")));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), UrkStatus> {
    if out.is_null() {
        return Err(fail(UrkStatus::Null, "output handle pointer is NULL"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Reads a 0/1 byte vector.
unsafe fn bits(p: *const u8, len: usize, what: &str) -> Result<Vec<bool>, UrkStatus> {
    let raw = unsafe { slice(p, len, what)? };
    raw.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(fail(UrkStatus::Param, format!("{what} holds byte {other}, expected 0 or 1"))),
        })
        .collect()
}

/// Copies `data` into `(buf, cap)` and stores its length in `len`. With
/// too small a buffer only the length is written.
unsafe fn copy_out<T: Copy>(data: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), UrkStatus> {
    let len = unsafe { deref_mut(len, "length output")? };
    *len = data.len();
    if data.len() > cap {
        return Err(fail(UrkStatus::Buffer, format!("buffer holds {cap}, need {}", data.len())));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(fail(UrkStatus::Null, "output buffer is NULL"));
        }
        unsafe { ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len()) };
    }
    Ok(())
}

unsafe fn write_output(
    out: BobOutput,
    indices: *mut usize,
    cap: usize,
    count: *mut usize,
    failed: *mut bool,
) -> Result<(), UrkStatus> {
    let failed = unsafe { deref_mut(failed, "failure flag")? };
    *failed = out.is_fail();
    unsafe { copy_out(out.indices().unwrap_or(&[]), indices, cap, count) }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `cap` bytes, and returns the full message length.
///
/// # Safety
/// `buf` must be NULL or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn urk_last_error(buf: *mut u8, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            unsafe {
                ptr::copy_nonoverlapping(e.as_ptr(), buf, n);
                *buf.add(n) = 0;
            }
        }
        e.len()
    })
}

/// Builds the protocol with the given shared seed.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_protocol_new(
    n: usize,
    k: usize,
    q: u32,
    oversample: usize,
    slack: usize,
    seed: u64,
    out: *mut *mut UrkProtocol,
) -> UrkStatus {
    guard(|| {
        let params =
            ProtocolParams::new(n, k).with_q(q).with_oversample(oversample).with_slack(slack).with_seed(seed);
        put(out, UrkProtocol(Arc::new(UrProtocol::new(params).or_status()?)))
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`urk_protocol_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn urk_protocol_free(p: *mut UrkProtocol) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Alice's message for the 0/1 vector `x` of length `n`.
///
/// # Safety
/// `p` must be a live handle, `x` valid for `n` bytes, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_alice(
    p: *const UrkProtocol,
    x: *const u8,
    n: usize,
    out: *mut *mut UrkMessage,
) -> UrkStatus {
    guard(|| {
        let p = unsafe { deref(p, "protocol")? };
        let x = unsafe { bits(x, n, "x")? };
        put(out, UrkMessage(p.0.alice(&x).or_status()?))
    })
}

/// Bob's answer for the 0/1 vector `y`. On success `*failed` tells whether
/// Bob gave up; otherwise up to `cap` indices are written and their
/// number stored in `*count`.
///
/// # Safety
/// Handles must be live, `y` valid for `n` bytes, `indices` for `cap`
/// entries, `count` and `failed` for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_bob(
    p: *const UrkProtocol,
    m: *const UrkMessage,
    y: *const u8,
    n: usize,
    indices: *mut usize,
    cap: usize,
    count: *mut usize,
    failed: *mut bool,
) -> UrkStatus {
    guard(|| {
        let p = unsafe { deref(p, "protocol")? };
        let m = unsafe { deref(m, "message")? };
        let y = unsafe { bits(y, n, "y")? };
        let out = p.0.bob(&m.0, &y).or_status()?;
        unsafe { write_output(out, indices, cap, count, failed) }
    })
}

/// Serializes a message. With `cap` too small, only `*len` is written and
/// [`UrkStatus::Buffer`] returned.
///
/// # Safety
/// `m` must be live, `buf` valid for `cap` bytes, `len` for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_message_serialize(
    m: *const UrkMessage,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> UrkStatus {
    guard(|| {
        let m = unsafe { deref(m, "message")? };
        unsafe { copy_out(&m.0.serialize(), buf, cap, len) }
    })
}

/// # Safety
/// `bytes` must be valid for `len` bytes and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_message_deserialize(
    bytes: *const u8,
    len: usize,
    out: *mut *mut UrkMessage,
) -> UrkStatus {
    guard(|| {
        let bytes = unsafe { slice(bytes, len, "bytes")? };
        put(out, UrkMessage(UrMessage::deserialize(bytes).or_status()?))
    })
}

/// Payload size in bits, excluding the header.
///
/// # Safety
/// `m` must be live and `bits` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_message_payload_bits(m: *const UrkMessage, bits: *mut u64) -> UrkStatus {
    guard(|| {
        let m = unsafe { deref(m, "message")? };
        *unsafe { deref_mut(bits, "bits output")? } = m.0.payload_bits();
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live message handle.
#[no_mangle]
pub unsafe extern "C" fn urk_message_free(m: *mut UrkMessage) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// An empty sketch sharing the protocol's randomness.
///
/// # Safety
/// `p` must be live and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_new(p: *const UrkProtocol, out: *mut *mut UrkSketch) -> UrkStatus {
    guard(|| {
        let p = unsafe { deref(p, "protocol")? };
        put(out, UrkSketch(TurnstileSketch::with_protocol(p.0.clone())))
    })
}

/// `z_i += delta`.
///
/// # Safety
/// `s` must be live and not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_update(s: *mut UrkSketch, i: usize, delta: i64) -> UrkStatus {
    guard(|| {
        let s = unsafe { deref_mut(s, "sketch")? };
        s.0.update(i, delta).or_status()
    })
}

/// A new sketch of the combined streams of `a` and `b`.
///
/// # Safety
/// `a` and `b` must be live and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_merge(
    a: *const UrkSketch,
    b: *const UrkSketch,
    out: *mut *mut UrkSketch,
) -> UrkStatus {
    guard(|| {
        let a = unsafe { deref(a, "first sketch")? };
        let b = unsafe { deref(b, "second sketch")? };
        put(out, UrkSketch(a.0.merge(&b.0).or_status()?))
    })
}

/// Up to `k` support indices; output convention as in [`urk_bob`].
///
/// # Safety
/// As for [`urk_bob`].
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_support_find(
    s: *const UrkSketch,
    indices: *mut usize,
    cap: usize,
    count: *mut usize,
    failed: *mut bool,
) -> UrkStatus {
    guard(|| {
        let s = unsafe { deref(s, "sketch")? };
        let out = s.0.support_find_k().or_status()?;
        unsafe { write_output(out, indices, cap, count, failed) }
    })
}

/// Up to `k` support indices drawn without replacement using `sample_seed`.
///
/// # Safety
/// As for [`urk_bob`].
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_sample(
    s: *const UrkSketch,
    sample_seed: u64,
    indices: *mut usize,
    cap: usize,
    count: *mut usize,
    failed: *mut bool,
) -> UrkStatus {
    guard(|| {
        let s = unsafe { deref(s, "sketch")? };
        let out = s.0.l0_sample_k(sample_seed).or_status()?;
        unsafe { write_output(out, indices, cap, count, failed) }
    })
}

/// The sketch state in the message wire format.
///
/// # Safety
/// As for [`urk_message_serialize`].
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_serialize(
    s: *const UrkSketch,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> UrkStatus {
    guard(|| {
        let s = unsafe { deref(s, "sketch")? };
        unsafe { copy_out(&s.0.to_bytes(), buf, cap, len) }
    })
}

/// # Safety
/// `s` must be NULL or a live sketch handle.
#[no_mangle]
pub unsafe extern "C" fn urk_sketch_free(s: *mut UrkSketch) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}
