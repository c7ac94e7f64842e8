//! C ABI for `hyperlattice`.
//!
//! Every fallible function returns an [`HlStatus`] and writes results through
//! out-pointers. On failure a message is available from [`hl_last_error`]
//! until the next call on the same thread. Handles are opaque and must be
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperlattice::arith::{kloosterman, weil_bound};
use hyperlattice::group::{collect_angles, count_ball, count_sector, Ball, GroupError};
use hyperlattice::stats::{AngleCollection, Ecdf};
use hyperlattice::theory::{c_n, density_rho, index_gamma_n, xi};
use hyperlattice::{BallSpec, NormalizedTarget, Point, SectorSpec, TheoryContext, Workers};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EntryBoundExceeded = 3,
    NoData = 4,
    Panic = 5,
}

/// Matrix `(a, b; c, d)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HlElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HlAngleSample {
    pub gamma: HlElement,
    pub theta: f64,
    pub dist: f64,
}

/// Opaque ball handle.
pub struct HlBall {
    spec: BallSpec,
}

/// Opaque angle collection, sorted by `(c, a, d)`.
pub struct HlAngles {
    collection: AngleCollection,
    target: NormalizedTarget,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(HlStatus, String);

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        let status = match e {
            GroupError::EntryBoundExceeded(_) => HlStatus::EntryBoundExceeded,
            _ => HlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl ToString) -> Failure {
    Failure(HlStatus::InvalidArgument, msg.to_string())
}

/// Run `body`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> HlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HlStatus::Panic
        }
    }
}

fn point(x: f64, y: f64) -> Result<Point, Failure> {
    Point::new(x, y).map_err(invalid)
}

fn workers(count: u32) -> Result<Workers, Failure> {
    if count == 0 {
        Ok(Workers::available())
    } else {
        Workers::new(count as usize).map_err(Failure::from)
    }
}

/// Write through `out`, or fail with `NullPointer`.
///
/// # Safety
/// `out` must be null or valid for writes of `T`.
unsafe fn store<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(HlStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next `hl_` call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a ball of `Γ(level)` around `x0 + i y0` with norm bound
/// `Q² = norm_sq`. Entry bounds are checked here, not at enumeration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_ball_new(level: u32, x0: f64, y0: f64, norm_sq: f64, out: *mut *mut HlBall) -> HlStatus {
    guard(|| {
        let spec = BallSpec::new(level, point(x0, y0)?, norm_sq)?;
        Ball::new(spec)?;
        let handle = Box::into_raw(Box::new(HlBall { spec }));
        store(out, handle).inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// As [`hl_ball_new`] with `Q² = 2 cosh(radius)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_ball_from_radius(
    level: u32,
    x0: f64,
    y0: f64,
    radius: f64,
    out: *mut *mut HlBall,
) -> HlStatus {
    guard(|| {
        let spec = BallSpec::from_radius(level, point(x0, y0)?, radius)?;
        Ball::new(spec)?;
        let handle = Box::into_raw(Box::new(HlBall { spec }));
        store(out, handle).inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `ball` must be null or a handle from `hl_ball_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_ball_free(ball: *mut HlBall) {
    if !ball.is_null() {
        drop(Box::from_raw(ball));
    }
}

/// Number of group elements in the ball. `workers_count = 0` uses every core.
///
/// # Safety
/// `ball` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_ball_count(ball: *const HlBall, workers_count: u32, out: *mut u64) -> HlStatus {
    guard(|| {
        let ball = ball.as_ref().ok_or(Failure(HlStatus::NullPointer, "null ball".into()))?;
        let n = count_ball(&ball.spec, workers(workers_count)?)?;
        store(out, n)
    })
}

/// Angles seen from `x1 + i y1` for every element of the ball.
///
/// # Safety
/// `ball` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_ball_angles(
    ball: *const HlBall,
    x1: f64,
    y1: f64,
    workers_count: u32,
    out: *mut *mut HlAngles,
) -> HlStatus {
    guard(|| {
        let ball = ball.as_ref().ok_or(Failure(HlStatus::NullPointer, "null ball".into()))?;
        let z1 = point(x1, y1)?;
        let mut collection = collect_angles(&ball.spec, z1, workers(workers_count)?)?;
        collection.samples.sort_by_key(|s| (s.gamma.c(), s.gamma.a(), s.gamma.d()));
        let target = NormalizedTarget::from_points(ball.spec.z0(), z1);
        let handle = Box::into_raw(Box::new(HlAngles { collection, target }));
        store(out, handle).inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `angles` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_angles_free(angles: *mut HlAngles) {
    if !angles.is_null() {
        drop(Box::from_raw(angles));
    }
}

/// Number of samples with a defined angle; 0 for a null handle.
///
/// # Safety
/// `angles` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_angles_len(angles: *const HlAngles) -> usize {
    angles.as_ref().map_or(0, |a| a.collection.samples.len())
}

/// Elements whose angle is undefined; 0 for a null handle.
///
/// # Safety
/// `angles` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_angles_undefined(angles: *const HlAngles) -> u64 {
    angles.as_ref().map_or(0, |a| a.collection.undefined)
}

/// # Safety
/// `angles` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_angles_get(angles: *const HlAngles, index: usize, out: *mut HlAngleSample) -> HlStatus {
    guard(|| {
        let angles = angles.as_ref().ok_or(Failure(HlStatus::NullPointer, "null angles".into()))?;
        let s = angles.collection.samples.get(index).ok_or_else(|| invalid(format!("index {index} out of range")))?;
        let (a, b, c, d) = s.gamma.entries();
        store(out, HlAngleSample { gamma: HlElement { a, b, c, d }, theta: s.theta, dist: s.dist })
    })
}

/// Kolmogorov–Smirnov distance between the samples and the limiting CDF.
///
/// # Safety
/// `angles` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_angles_ks(angles: *const HlAngles, out: *mut f64) -> HlStatus {
    guard(|| {
        let angles = angles.as_ref().ok_or(Failure(HlStatus::NullPointer, "null angles".into()))?;
        let ecdf =
            Ecdf::from_samples(&angles.collection.samples).map_err(|e| Failure(HlStatus::NoData, e.to_string()))?;
        let target = angles.target;
        store(out, ecdf.ks_distance(|w| xi(&target, w)))
    })
}

/// Limiting angle CDF at `omega` for normalized target `(x_star, y_star)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_xi(x_star: f64, y_star: f64, omega: f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let target = NormalizedTarget::new(x_star, y_star).map_err(invalid)?;
        if omega.is_nan() {
            return Err(invalid("omega is NaN"));
        }
        store(out, xi(&target, omega))
    })
}

/// Angle density `ρ(t)` for base point `z0` and observation point `z1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_density(x0: f64, y0: f64, x1: f64, y1: f64, t: f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let ctx = TheoryContext::new(1, point(x0, y0)?, point(x1, y1)?);
        if !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&t) {
            return Err(invalid("t outside [-pi/2, pi/2]"));
        }
        store(out, density_rho(&ctx, t))
    })
}

/// Complete Kloosterman sum `S(m, n; q)`.
///
/// # Safety
/// `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_kloosterman(m: i64, n: i64, q: u64, re: *mut f64, im: *mut f64) -> HlStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(Failure(HlStatus::NullPointer, "null output pointer".into()));
        }
        let s = kloosterman(m, n, q).map_err(invalid)?;
        store(re, s.re)?;
        store(im, s.im)
    })
}

/// `τ(q) gcd(m, n, q)^{1/2} q^{1/2}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_weil_bound(m: i64, n: i64, q: u64, out: *mut f64) -> HlStatus {
    guard(|| {
        if q == 0 {
            return Err(invalid("q must be at least 1"));
        }
        store(out, weil_bound(m, n, q))
    })
}

/// Index of `Γ(level)` in `SL₂(ℤ)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_index(level: u32, out: *mut u64) -> HlStatus {
    guard(|| {
        if level == 0 {
            return Err(invalid("level must be at least 1"));
        }
        store(out, index_gamma_n(level))
    })
}

/// `C_N` as a double.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_c_n(level: u32, out: *mut f64) -> HlStatus {
    guard(|| {
        if level == 0 {
            return Err(invalid("level must be at least 1"));
        }
        store(out, c_n(level).value)
    })
}

/// Sector count with slope bound `beta` (±INFINITY allowed).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_count_sector(
    level: u32,
    x0: f64,
    y0: f64,
    norm_sq: f64,
    beta: f64,
    workers_count: u32,
    out: *mut u64,
) -> HlStatus {
    guard(|| {
        let ball = BallSpec::new(level, point(x0, y0)?, norm_sq)?;
        let spec = SectorSpec::new(ball, beta)?;
        store(out, count_sector(&spec, workers(workers_count)?)?)
    })
}
