use std::ffi::{c_char, CStr, CString};
use std::ptr;

use streamloop_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { sl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_string();
    assert_eq!(s.len(), n.min(255));
    s
}

fn transform(config: &str) -> Result<*mut SlTransform, SlStatus> {
    let text = CString::new(config).unwrap();
    let mut t = ptr::null_mut();
    match unsafe { sl_transform_parse(text.as_ptr(), &mut t) } {
        SlStatus::Ok => Ok(t),
        s => Err(s),
    }
}

const SCALAR: SlShape = SlShape {
    rank: 0,
    rows: 1,
    cols: 1,
};

#[test]
fn ewma_through_handles() {
    let t = transform("op = ewma\nalpha = 0.5\n").unwrap();
    let mut u = ptr::null_mut();
    assert_eq!(unsafe { sl_unroller_new(t, 0, SCALAR, &mut u) }, SlStatus::Ok);
    unsafe { sl_transform_free(t) };

    let mut shape = SlShape {
        rank: 9,
        rows: 0,
        cols: 0,
    };
    assert_eq!(unsafe { sl_unroller_output_shape(u, &mut shape) }, SlStatus::Ok);
    assert_eq!(shape, SCALAR);

    let mut out = [0.0; 2];
    let st = unsafe { sl_unroller_step(u, [1.0, 2.0].as_ptr(), 2, out.as_mut_ptr(), 2, 2) };
    assert_eq!(st, SlStatus::Ok);
    assert_eq!(out[0], 1.0);
    assert!((out[1] - 5.0 / 3.0).abs() < 1e-15);
    unsafe { sl_unroller_free(u) };
}

#[test]
fn clone_resumes_from_the_same_state() {
    let t = transform("op = rolling_mean\nwindow = 3\nmin_periods = 1\nop = diff\n").unwrap();
    let xs = [1.0, 4.0, f64::NAN, 2.0, 8.0, -3.0, 0.5];
    let mut whole = [0.0; 7];
    let mut u = ptr::null_mut();
    unsafe {
        assert_eq!(sl_unroller_new(t, 3, SCALAR, &mut u), SlStatus::Ok);
        assert_eq!(
            sl_unroller_step(u, xs.as_ptr(), 7, whole.as_mut_ptr(), 7, 7),
            SlStatus::Ok
        );
        sl_unroller_free(u);
    }
    let mut split = [0.0; 7];
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(sl_unroller_new(t, 3, SCALAR, &mut a), SlStatus::Ok);
        assert_eq!(
            sl_unroller_step(a, xs.as_ptr(), 3, split.as_mut_ptr(), 3, 3),
            SlStatus::Ok
        );
        assert_eq!(sl_unroller_clone(a, &mut b), SlStatus::Ok);
        let mut junk = [0.0; 2];
        assert_eq!(
            sl_unroller_step(a, [9.0, 9.0].as_ptr(), 2, junk.as_mut_ptr(), 2, 2),
            SlStatus::Ok
        );
        assert_eq!(
            sl_unroller_step(b, xs[3..].as_ptr(), 4, split[3..].as_mut_ptr(), 4, 4),
            SlStatus::Ok
        );
        sl_unroller_free(a);
        sl_unroller_free(b);
        sl_transform_free(t);
    }
    for (x, y) in whole.iter().zip(&split) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn errors_have_codes_and_messages() {
    assert_eq!(transform("op = ewma\n").unwrap_err(), SlStatus::Parse);
    assert!(last_error().contains("alpha"), "{}", last_error());
    assert_eq!(transform("op = ewma\nalpha = 2\n").unwrap_err(), SlStatus::Parse);

    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { sl_transform_parse(ptr::null(), &mut t) },
        SlStatus::NullPointer
    );
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { sl_transform_parse(bad.as_ptr().cast(), &mut t) },
        SlStatus::InvalidArgument
    );

    let t = transform("op = lag\n").unwrap();
    let mut u = ptr::null_mut();
    let bad_rank = SlShape {
        rank: 3,
        rows: 1,
        cols: 1,
    };
    assert_eq!(
        unsafe { sl_unroller_new(t, 0, bad_rank, &mut u) },
        SlStatus::InvalidArgument
    );
    let matrix = SlShape {
        rank: 2,
        rows: 2,
        cols: 2,
    };
    assert_eq!(unsafe { sl_unroller_new(t, 0, matrix, &mut u) }, SlStatus::Shape);
    assert_eq!(unsafe { sl_unroller_new(t, 0, SCALAR, &mut u) }, SlStatus::Ok);
    let mut out = [0.0; 1];
    assert_eq!(
        unsafe { sl_unroller_step(u, [1.0, 2.0].as_ptr(), 2, out.as_mut_ptr(), 1, 2) },
        SlStatus::InvalidArgument
    );
    unsafe {
        sl_unroller_free(u);
        sl_transform_free(t);
        sl_transform_free(ptr::null_mut());
        sl_unroller_free(ptr::null_mut());
        sl_schedule_free(ptr::null_mut());
    }
}

#[test]
fn sync_trace_slots() {
    let local = [1i64, 3, 5];
    let ground = [0i64, 2, 4];
    let air = [1i64, 2, 3, 4];
    let (g, a) = (CString::new("ground").unwrap(), CString::new("air").unwrap());
    let specs = [
        SlStreamSpec {
            name: g.as_ptr(),
            timestamps: ground.as_ptr(),
            len: 3,
            latency_ns: 1,
            window: 0,
        },
        SlStreamSpec {
            name: a.as_ptr(),
            timestamps: air.as_ptr(),
            len: 4,
            latency_ns: 0,
            window: 1,
        },
    ];
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { sl_sync_trace(local.as_ptr(), 3, specs.as_ptr(), 2, &mut s) },
        SlStatus::Ok
    );
    assert_eq!(unsafe { sl_schedule_steps(s) }, 3);
    let slot = |stream, step| {
        let mut out = SlSlot {
            is_window: false,
            start: 0,
            end: 0,
            pad: 0,
            overflow: 0,
        };
        assert_eq!(
            unsafe { sl_schedule_slot(s, stream, step, &mut out) },
            SlStatus::Ok
        );
        out
    };
    // ground events become visible at 1, 3, 5
    assert_eq!((slot(0, 0).start, slot(0, 0).end), (0, 1));
    assert_eq!((slot(0, 2).start, slot(0, 2).end), (2, 3));
    // air events 2 and 3 arrive in (1, 3]; the window keeps the newest
    let w = slot(1, 1);
    assert!(w.is_window);
    assert_eq!((w.start, w.end, w.pad, w.overflow), (2, 3, 0, 1));
    let mut out = slot(0, 0);
    assert_eq!(unsafe { sl_schedule_slot(s, 2, 0, &mut out) }, SlStatus::Range);
    unsafe { sl_schedule_free(s) };

    let unsorted = [3i64, 1];
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { sl_sync_trace(unsorted.as_ptr(), 2, specs.as_ptr(), 2, &mut s) },
        SlStatus::Ordering
    );
}

#[test]
fn time_words() {
    for v in [i64::MIN, -1, 0, 1, i64::MAX, 1_704_067_200_000_000_000] {
        assert_eq!(sl_decode_time(sl_encode_time(v)), v);
    }
    let (a, b) = (sl_encode_time(-1), sl_encode_time(0));
    assert!((a.hi, a.lo) < (b.hi, b.lo));
    let v = unsafe { CStr::from_ptr(sl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
