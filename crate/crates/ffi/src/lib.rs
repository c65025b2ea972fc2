//! C ABI for streamloop.
//!
//! Every fallible function returns an [`SlStatus`]; on failure a message is
//! kept per thread and can be copied out with [`sl_last_error_message`].
//! Objects are opaque handles created by `*_new`/`*_parse` functions and
//! released with the matching `*_free`. Panics never cross the boundary;
//! they are reported as [`SlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use streamloop::io::PipelineConfig;
use streamloop::sync::{trace, Mode, Schedule, Slot, StreamSpec};
use streamloop::timecodec::{decode_time, encode_time, EncodedTime};
use streamloop::transform::BoxedTransform;
use streamloop::{Error, Params, Shape, State, Tensor, TimestampNs};

/// Status codes. `Ok` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    Parameter = 1,
    Shape = 2,
    EmptyInput = 3,
    Ordering = 4,
    Consistency = 5,
    Numeric = 6,
    Range = 7,
    Parse = 8,
    Resource = 9,
    Io = 10,
    /// A required pointer was null.
    NullPointer = 11,
    /// A string argument was not valid UTF-8, or a length did not match.
    InvalidArgument = 12,
    Panic = 13,
}

impl From<&Error> for SlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parameter(_) => SlStatus::Parameter,
            Error::Shape { .. } => SlStatus::Shape,
            Error::EmptyInput => SlStatus::EmptyInput,
            Error::Ordering(_) => SlStatus::Ordering,
            Error::Consistency(_) => SlStatus::Consistency,
            Error::Numeric(_) => SlStatus::Numeric,
            Error::Range(_) => SlStatus::Range,
            Error::Parse { .. } => SlStatus::Parse,
            Error::Resource(_) => SlStatus::Resource,
            Error::Io(_) => SlStatus::Io,
        }
    }
}

/// Tensor shape: `rank` 0 is a scalar, 1 a vector of `rows` values, 2 a
/// `rows x cols` matrix (row-major).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlShape {
    pub rank: u32,
    pub rows: usize,
    pub cols: usize,
}

/// Timestamp split into two 32-bit words; compares like the original
/// value under (hi, lo) lexicographic order.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlEncodedTime {
    pub hi: i32,
    pub lo: u32,
}

/// One secondary stream for [`sl_sync_trace`]. `window == 0` selects
/// forward fill, otherwise a window of that many rows.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlStreamSpec {
    pub name: *const c_char,
    pub timestamps: *const i64,
    pub len: usize,
    pub latency_ns: i64,
    pub window: usize,
}

/// What one stream contributes at one step. Rows `start..end` of the
/// stream are read after `pad` NaN rows; `overflow` events were dropped.
/// A forward-fill slot with no visible event has `start == end` and
/// `pad == 1`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlSlot {
    pub is_window: bool,
    pub start: usize,
    pub end: usize,
    pub pad: usize,
    pub overflow: usize,
}

/// Opaque transform handle.
pub struct SlTransform {
    inner: Arc<BoxedTransform>,
}

/// Opaque streaming driver: a transform plus its params and current state.
pub struct SlUnroller {
    transform: Arc<BoxedTransform>,
    params: Params,
    state: Option<State>,
    input: Shape,
    output: Shape,
}

/// Opaque synchronization schedule.
pub struct SlSchedule {
    inner: Schedule,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(SlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SlStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SlStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> FfiResult<()> {
    if p.is_null() {
        Err(Failure(SlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SlStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn to_shape(s: SlShape) -> FfiResult<Shape> {
    match s.rank {
        0 => Ok(Shape::Scalar),
        1 => Ok(Shape::Vector(s.rows)),
        2 => Ok(Shape::Matrix(s.rows, s.cols)),
        r => Err(Failure(
            SlStatus::InvalidArgument,
            format!("rank {r} is not 0, 1 or 2"),
        )),
    }
}

fn from_shape(s: Shape) -> SlShape {
    match s {
        Shape::Scalar => SlShape {
            rank: 0,
            rows: 1,
            cols: 1,
        },
        Shape::Vector(n) => SlShape {
            rank: 1,
            rows: n,
            cols: 1,
        },
        Shape::Matrix(r, c) => SlShape {
            rank: 2,
            rows: r,
            cols: c,
        },
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns the full message
/// length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a transform from pipeline configuration text (`op = ...` blocks;
/// `timestamp`, `columns` and `seed` settings are ignored here). An empty
/// pipeline is the identity.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_parse(config: *const c_char, out: *mut *mut SlTransform) -> SlStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = str_arg(config, "config")?;
        let transform = PipelineConfig::parse(text)?.build()?;
        *out = Box::into_raw(Box::new(SlTransform {
            inner: Arc::new(transform),
        }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`sl_transform_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_free(t: *mut SlTransform) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Output shape of `t` for the given input shape.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_transform_output_shape(
    t: *const SlTransform,
    input: SlShape,
    out: *mut SlShape,
) -> SlStatus {
    guard(|| {
        non_null(t, "transform")?;
        non_null(out, "out")?;
        *out = from_shape((*t).inner.output_shape(to_shape(input)?)?);
        Ok(())
    })
}

/// Starts a streaming run of `t` from `init(seed, input)`. The unroller
/// keeps its own reference to the transform, which may be freed afterwards.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_unroller_new(
    t: *const SlTransform,
    seed: u64,
    input: SlShape,
    out: *mut *mut SlUnroller,
) -> SlStatus {
    guard(|| {
        non_null(t, "transform")?;
        non_null(out, "out")?;
        let transform = Arc::clone(&(*t).inner);
        let input = to_shape(input)?;
        let output = transform.output_shape(input)?;
        let (params, state) = transform.init(seed, input)?;
        *out = Box::into_raw(Box::new(SlUnroller {
            transform,
            params,
            state: Some(state),
            input,
            output,
        }));
        Ok(())
    })
}

/// Independent copy of `u` at its current state; stepping either one
/// leaves the other untouched.
///
/// # Safety
/// `u` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_unroller_clone(u: *const SlUnroller, out: *mut *mut SlUnroller) -> SlStatus {
    guard(|| {
        non_null(u, "unroller")?;
        non_null(out, "out")?;
        let u = &*u;
        *out = Box::into_raw(Box::new(SlUnroller {
            transform: Arc::clone(&u.transform),
            params: u.params.clone(),
            state: u.state.clone(),
            input: u.input,
            output: u.output,
        }));
        Ok(())
    })
}

/// # Safety
/// `u` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_unroller_free(u: *mut SlUnroller) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// # Safety
/// `u` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_unroller_output_shape(u: *const SlUnroller, out: *mut SlShape) -> SlStatus {
    guard(|| {
        non_null(u, "unroller")?;
        non_null(out, "out")?;
        *out = from_shape((*u).output);
        Ok(())
    })
}

/// Feeds `steps` consecutive input rows (`steps * input_len` values,
/// row-major) and writes `steps * output_len` values to `output`. On error
/// the rows before the failing one have been applied and written, and the
/// unroller cannot be stepped again.
///
/// # Safety
/// `input` and `output` must point to arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sl_unroller_step(
    u: *mut SlUnroller,
    input: *const f64,
    input_len: usize,
    output: *mut f64,
    output_len: usize,
    steps: usize,
) -> SlStatus {
    guard(|| {
        non_null(u, "unroller")?;
        let u = &mut *u;
        let (n_in, n_out) = (u.input.len(), u.output.len());
        if input_len != steps * n_in || output_len != steps * n_out {
            return Err(Failure(
                SlStatus::InvalidArgument,
                format!(
                    "{steps} steps need {} inputs and {} outputs, got {input_len} and {output_len}",
                    steps * n_in,
                    steps * n_out
                ),
            ));
        }
        let input = slice_arg(input, input_len, "input")?;
        if output_len > 0 {
            non_null(output, "output")?;
        }
        for s in 0..steps {
            let row = Tensor::new(u.input, input[s * n_in..(s + 1) * n_in].to_vec())?;
            let state = u
                .state
                .take()
                .ok_or_else(|| Error::Consistency("unroller poisoned by an earlier error".into()))?;
            let (y, next) = u.transform.apply(&u.params, state, &row)?;
            u.state = Some(next);
            if y.len() != n_out {
                let (expected, actual) = (u.output.to_string(), y.shape().to_string());
                return Err(Error::Shape { expected, actual }.into());
            }
            ptr::copy_nonoverlapping(y.data().as_ptr(), output.add(s * n_out), n_out);
        }
        Ok(())
    })
}

/// Traces the synchronization schedule of `n_streams` secondary streams
/// onto `local` timestamps (nanoseconds).
///
/// # Safety
/// `local` must hold `n_local` values, `streams` `n_streams` specs whose
/// pointers are valid for their lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_sync_trace(
    local: *const i64,
    n_local: usize,
    streams: *const SlStreamSpec,
    n_streams: usize,
    out: *mut *mut SlSchedule,
) -> SlStatus {
    guard(|| {
        non_null(out, "out")?;
        let local: Vec<TimestampNs> = slice_arg(local, n_local, "local")?
            .iter()
            .copied()
            .map(TimestampNs)
            .collect();
        let specs = slice_arg(streams, n_streams, "streams")?
            .iter()
            .map(|s| {
                Ok(StreamSpec {
                    name: str_arg(s.name, "stream name")?.to_string(),
                    timestamps: slice_arg(s.timestamps, s.len, "stream timestamps")?
                        .iter()
                        .copied()
                        .map(TimestampNs)
                        .collect(),
                    latency_ns: s.latency_ns,
                    mode: if s.window == 0 {
                        Mode::ForwardFill
                    } else {
                        Mode::Window(s.window)
                    },
                })
            })
            .collect::<FfiResult<Vec<_>>>()?;
        let schedule = trace(&local, &specs)?;
        *out = Box::into_raw(Box::new(SlSchedule { inner: schedule }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_schedule_free(s: *mut SlSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of local steps; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_schedule_steps(s: *const SlSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.inner.steps)
}

/// Slot of stream `stream` (in the order passed to [`sl_sync_trace`]) at
/// local step `step`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_schedule_slot(
    s: *const SlSchedule,
    stream: usize,
    step: usize,
    out: *mut SlSlot,
) -> SlStatus {
    guard(|| {
        non_null(s, "schedule")?;
        non_null(out, "out")?;
        let sched = &(*s).inner;
        let slot = sched
            .streams
            .get(stream)
            .and_then(|st| st.slots.get(step))
            .ok_or_else(|| Error::Range(format!("no slot for stream {stream} at step {step}")))?;
        *out = match *slot {
            Slot::Ffill(Some(i)) => SlSlot {
                is_window: false,
                start: i,
                end: i + 1,
                pad: 0,
                overflow: 0,
            },
            Slot::Ffill(None) => SlSlot {
                is_window: false,
                pad: 1,
                ..Default::default()
            },
            Slot::Window {
                start,
                end,
                pad,
                overflow,
            } => SlSlot {
                is_window: true,
                start,
                end,
                pad,
                overflow,
            },
        };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn sl_encode_time(ns: i64) -> SlEncodedTime {
    let e = encode_time(TimestampNs(ns));
    SlEncodedTime { hi: e.hi, lo: e.lo }
}

#[no_mangle]
pub extern "C" fn sl_decode_time(e: SlEncodedTime) -> i64 {
    decode_time(EncodedTime { hi: e.hi, lo: e.lo }).0
}
