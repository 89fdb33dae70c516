//! C ABI for kinsync.
//!
//! Every fallible function returns a [`KsStatus`]; on failure a message is
//! available from [`ks_last_error_message`] on the same thread. Objects are
//! opaque handles created by `ks_*_new`/`ks_*` constructors and released with
//! the matching `ks_*_free`. Indices are 0-based. Panics never cross the
//! boundary; they are reported as [`KsStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use kinsync::{
    ChannelSelection, DbaParams, DilationMap, DtwOptions, Error, FrameSchedule, MultivariateTimeSeries, NltsResult,
    TrialRecord, WarpingPath,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    DimensionMismatch = 5,
    RankDeficient = 6,
    OutOfRange = 7,
    Internal = 99,
}

impl From<&Error> for KsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => KsStatus::Io,
            Error::Parse { .. } | Error::EmptyFile { .. } => KsStatus::Parse,
            Error::DimensionMismatch { .. } => KsStatus::DimensionMismatch,
            Error::RankDeficient { .. } => KsStatus::RankDeficient,
            _ => KsStatus::InvalidArgument,
        }
    }
}

/// A multivariate time series: `len` samples of `dim` channels.
pub struct KsSeries(MultivariateTimeSeries);

/// An optimal warping path with its cost.
pub struct KsPath(WarpingPath);

/// DBA average of a set plus one dilation map per member.
pub struct KsNlts(NltsResult);

/// A frame schedule for one trial.
pub struct KsSchedule(FrameSchedule);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).ok());
}

struct Failure(KsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(KsStatus::from(&e), e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> KsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            KsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            KsStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KsStatus::NullPointer, format!("{what} is null"))
}

fn out_of_range(what: &str, index: usize, len: usize) -> Failure {
    Failure(KsStatus::OutOfRange, format!("{what} {index} out of range (length {len})"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    let s = deref(p, what)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(KsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn series_set(items: *const *const KsSeries, count: usize) -> Result<Vec<MultivariateTimeSeries>, Failure> {
    input_slice(items, count, "series array")?
        .iter()
        .map(|&p| deref(p, "series").map(|s| s.0.clone()))
        .collect()
}

fn dtw_options(window: i64) -> DtwOptions {
    if window < 0 {
        DtwOptions::unconstrained()
    } else {
        DtwOptions::with_window(window as usize)
    }
}

fn dba_params(max_iterations: usize, rel_tolerance: f64) -> DbaParams {
    DbaParams {
        max_iterations,
        rel_tolerance,
        ..Default::default()
    }
}

fn into_handle<T>(value: T, dst: *mut *mut T) -> FfiResult {
    unsafe { *out(dst, "output handle")? = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message describing the last failed call on this thread, or null if the
/// last call succeeded. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ks_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a series from `len * dim` row-major values.
///
/// # Safety
/// `data` must point to `len * dim` readable doubles; `out_series` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_series_new(
    data: *const f64,
    len: usize,
    dim: usize,
    sample_rate_hz: f64,
    out_series: *mut *mut KsSeries,
) -> KsStatus {
    guard(|| {
        let count = len
            .checked_mul(dim)
            .ok_or_else(|| Failure(KsStatus::InvalidArgument, "len * dim overflows".into()))?;
        let values = input_slice(data, count, "data")?.to_vec();
        let s = MultivariateTimeSeries::from_flat(values, dim, sample_rate_hz)?;
        into_handle(KsSeries(s), out_series)
    })
}

/// Load the given 0-based columns of a whitespace-separated kinematics file.
/// With `columns` null and `column_count` 0, the default slave-arm Cartesian
/// columns are used.
///
/// # Safety
/// `path` must be a NUL-terminated string; `columns` must hold `column_count` values.
#[no_mangle]
pub unsafe extern "C" fn ks_series_load_kinematics(
    path: *const c_char,
    columns: *const usize,
    column_count: usize,
    sample_rate_hz: f64,
    out_series: *mut *mut KsSeries,
) -> KsStatus {
    guard(|| {
        let path = PathBuf::from(c_str(path, "path")?);
        let selection = if column_count == 0 {
            ChannelSelection::default()
        } else {
            ChannelSelection::new(input_slice(columns, column_count, "columns")?.to_vec())?
        };
        let s = kinsync::load_kinematics(&path, &selection, sample_rate_hz)?;
        into_handle(KsSeries(s), out_series)
    })
}

/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_series_free(series: *mut KsSeries) {
    free_handle(series)
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_series_len(series: *const KsSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Number of channels, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_series_dim(series: *const KsSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.dim())
}

/// Copy the row-major values into `dst`, which must hold `len * dim` doubles.
///
/// # Safety
/// `series` must be a live handle; `dst` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ks_series_copy(series: *const KsSeries, dst: *mut f64, capacity: usize) -> KsStatus {
    guard(|| {
        let s = &deref(series, "series")?.0;
        let values = s.as_flat();
        if capacity < values.len() {
            return Err(out_of_range("capacity", capacity, values.len()));
        }
        if !values.is_empty() {
            ptr::copy_nonoverlapping(values.as_ptr(), out(dst, "dst")?, values.len());
        }
        Ok(())
    })
}

/// Cumulative DTW cost between two series. A negative `window` means no band.
///
/// # Safety
/// `a` and `b` must be live handles; `out_cost` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_dtw_cost(
    a: *const KsSeries,
    b: *const KsSeries,
    window: i64,
    out_cost: *mut f64,
) -> KsStatus {
    guard(|| {
        let cost = kinsync::dtw_cost_with(&deref(a, "a")?.0, &deref(b, "b")?.0, &dtw_options(window))?;
        *out(out_cost, "out_cost")? = cost;
        Ok(())
    })
}

/// Optimal warping path between two series. A negative `window` means no band.
///
/// # Safety
/// `a` and `b` must be live handles; `out_path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_dtw(
    a: *const KsSeries,
    b: *const KsSeries,
    window: i64,
    out_path: *mut *mut KsPath,
) -> KsStatus {
    guard(|| {
        let path = kinsync::dtw_with(&deref(a, "a")?.0, &deref(b, "b")?.0, &dtw_options(window))?;
        into_handle(KsPath(path), out_path)
    })
}

/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_path_free(path: *mut KsPath) {
    free_handle(path)
}

/// Number of steps, or 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_path_len(path: *const KsPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// Path cost, or NaN for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_path_cost(path: *const KsPath) -> f64 {
    path.as_ref().map_or(f64::NAN, |p| p.0.cost())
}

/// Index pair of step `k`.
///
/// # Safety
/// `path` must be a live handle; `out_i` and `out_j` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_path_step(path: *const KsPath, k: usize, out_i: *mut usize, out_j: *mut usize) -> KsStatus {
    guard(|| {
        let steps = deref(path, "path")?.0.steps();
        let &(i, j) = steps.get(k).ok_or_else(|| out_of_range("step", k, steps.len()))?;
        *out(out_i, "out_i")? = i;
        *out(out_j, "out_j")? = j;
        Ok(())
    })
}

/// Average `count` series with DBA and dilate each to the average's length.
///
/// # Safety
/// `set` must hold `count` live series handles; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts(
    set: *const *const KsSeries,
    count: usize,
    max_iterations: usize,
    rel_tolerance: f64,
    out_result: *mut *mut KsNlts,
) -> KsStatus {
    guard(|| {
        let set = series_set(set, count)?;
        let result = kinsync::nlts(&set, &dba_params(max_iterations, rel_tolerance))?;
        into_handle(KsNlts(result), out_result)
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts_free(result: *mut KsNlts) {
    free_handle(result)
}

/// Length of the average and of every dilation map, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts_len(result: *const KsNlts) -> usize {
    result.as_ref().map_or(0, |r| r.0.average.series.len())
}

/// Sum of DTW costs from every member to the final average, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts_total_cost(result: *const KsNlts) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.average.total_cost)
}

/// New series handle holding a copy of the average.
///
/// # Safety
/// `result` must be a live handle; `out_series` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts_average(result: *const KsNlts, out_series: *mut *mut KsSeries) -> KsStatus {
    guard(|| {
        let avg = deref(result, "result")?.0.average.series.clone();
        into_handle(KsSeries(avg), out_series)
    })
}

/// Copy member `member`'s dilation map: source indices into `out_source` and
/// duplicate flags (0 or 1) into `out_duplicate`. Either output may be null.
/// Both must hold at least `ks_nlts_len` entries.
///
/// # Safety
/// `result` must be a live handle; non-null outputs must have room for `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn ks_nlts_map(
    result: *const KsNlts,
    member: usize,
    out_source: *mut usize,
    out_duplicate: *mut u8,
    capacity: usize,
) -> KsStatus {
    guard(|| {
        let maps = &deref(result, "result")?.0.maps;
        let map: &DilationMap = maps.get(member).ok_or_else(|| out_of_range("member", member, maps.len()))?;
        if capacity < map.len() {
            return Err(out_of_range("capacity", capacity, map.len()));
        }
        if !out_source.is_null() {
            slice::from_raw_parts_mut(out_source, map.len()).copy_from_slice(map.source_index());
        }
        if !out_duplicate.is_null() {
            for (d, &flag) in slice::from_raw_parts_mut(out_duplicate, map.len()).iter_mut().zip(map.is_duplicate()) {
                *d = flag as u8;
            }
        }
        Ok(())
    })
}

/// Schedule from a monotone list of source frames starting at 0.
///
/// # Safety
/// `trial_id` must be a NUL-terminated string; `sources` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_from_sources(
    trial_id: *const c_char,
    fps: f64,
    sources: *const usize,
    len: usize,
    out_schedule: *mut *mut KsSchedule,
) -> KsStatus {
    guard(|| {
        let id = c_str(trial_id, "trial_id")?;
        let s = FrameSchedule::from_sources(id, fps, input_slice(sources, len, "sources")?)?;
        into_handle(KsSchedule(s), out_schedule)
    })
}

/// Align two trials with DTW and produce one schedule per trial.
///
/// # Safety
/// Ids must be NUL-terminated strings; series must be live handles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_pairwise_schedules(
    id_a: *const c_char,
    a: *const KsSeries,
    id_b: *const c_char,
    b: *const KsSeries,
    window: i64,
    out_a: *mut *mut KsSchedule,
    out_b: *mut *mut KsSchedule,
) -> KsStatus {
    guard(|| {
        let ta = TrialRecord::new(c_str(id_a, "id_a")?, deref(a, "a")?.0.clone())?;
        let tb = TrialRecord::new(c_str(id_b, "id_b")?, deref(b, "b")?.0.clone())?;
        out(out_a, "out_a")?;
        out(out_b, "out_b")?;
        let (sa, sb) = kinsync::sync::pairwise_schedules_with(&ta, &tb, &dtw_options(window))?;
        into_handle(KsSchedule(sa), out_a)?;
        into_handle(KsSchedule(sb), out_b)
    })
}

/// Align `count` trials to their DBA average. `out_schedules` receives
/// `count` handles, in input order, each to be freed by the caller.
///
/// # Safety
/// `ids` and `set` must each hold `count` valid entries; `out_schedules` must have room for `count` handles.
#[no_mangle]
pub unsafe extern "C" fn ks_multi_schedules(
    ids: *const *const c_char,
    set: *const *const KsSeries,
    count: usize,
    max_iterations: usize,
    rel_tolerance: f64,
    out_schedules: *mut *mut KsSchedule,
) -> KsStatus {
    guard(|| {
        let ids = input_slice(ids, count, "ids")?;
        let series = series_set(set, count)?;
        let trials = ids
            .iter()
            .zip(series)
            .map(|(&id, s)| Ok(TrialRecord::new(c_str(id, "id")?, s)?))
            .collect::<Result<Vec<_>, Failure>>()?;
        if count > 0 && out_schedules.is_null() {
            return Err(null("out_schedules"));
        }
        let (schedules, _) = kinsync::multi_schedules(&trials, &dba_params(max_iterations, rel_tolerance))?;
        for (k, s) in schedules.into_iter().enumerate() {
            *out_schedules.add(k) = Box::into_raw(Box::new(KsSchedule(s)));
        }
        Ok(())
    })
}

/// Read a schedule file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_schedule` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_read(path: *const c_char, out_schedule: *mut *mut KsSchedule) -> KsStatus {
    guard(|| {
        let s = kinsync::read_schedule(c_str(path, "path")?)?;
        into_handle(KsSchedule(s), out_schedule)
    })
}

/// Write a schedule file.
///
/// # Safety
/// `schedule` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_write(schedule: *const KsSchedule, path: *const c_char) -> KsStatus {
    guard(|| {
        kinsync::write_schedule(&deref(schedule, "schedule")?.0, c_str(path, "path")?)?;
        Ok(())
    })
}

/// Schedule in its file format. Free the result with [`ks_string_free`].
///
/// # Safety
/// `schedule` must be a live handle; `out_text` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_to_text(schedule: *const KsSchedule, out_text: *mut *mut c_char) -> KsStatus {
    guard(|| {
        let text = deref(schedule, "schedule")?.0.to_text();
        let text = CString::new(text).map_err(|e| Failure(KsStatus::Internal, e.to_string()))?;
        *out(out_text, "out_text")? = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_free(schedule: *mut KsSchedule) {
    free_handle(schedule)
}

/// Number of output frames, or 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_len(schedule: *const KsSchedule) -> usize {
    schedule.as_ref().map_or(0, |s| s.0.len())
}

/// Output frame rate, or NaN for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_fps(schedule: *const KsSchedule) -> f64 {
    schedule.as_ref().map_or(f64::NAN, |s| s.0.fps())
}

/// Source frame of output frame `k` and whether it repeats the previous one.
///
/// # Safety
/// `schedule` must be a live handle; `out_source` and `out_duplicate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_schedule_entry(
    schedule: *const KsSchedule,
    k: usize,
    out_source: *mut usize,
    out_duplicate: *mut u8,
) -> KsStatus {
    guard(|| {
        let entries = deref(schedule, "schedule")?.0.entries();
        let e = entries.get(k).ok_or_else(|| out_of_range("frame", k, entries.len()))?;
        *out(out_source, "out_source")? = e.source_frame;
        *out(out_duplicate, "out_duplicate")? = e.duplicated as u8;
        Ok(())
    })
}

/// Least-squares cubic through `n` points. `out_coefficients` receives
/// c0..c3 of `c0 + c1 x + c2 x^2 + c3 x^3`; `out_rss` may be null.
///
/// # Safety
/// `xs` and `ys` must hold `n` values; `out_coefficients` must have room for 4.
#[no_mangle]
pub unsafe extern "C" fn ks_polyfit3(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out_coefficients: *mut f64,
    out_rss: *mut f64,
) -> KsStatus {
    guard(|| {
        let xs = input_slice(xs, n, "xs")?;
        let ys = input_slice(ys, n, "ys")?;
        let coefficients = out(out_coefficients, "out_coefficients")?;
        let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let fit = kinsync::polyfit3(&points)?;
        slice::from_raw_parts_mut(coefficients, 4).copy_from_slice(&fit.coefficients);
        if let Some(rss) = out_rss.as_mut() {
            *rss = fit.residual_sum_squares;
        }
        Ok(())
    })
}
