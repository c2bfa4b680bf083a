//! C ABI over the `molcav` crate.
//!
//! Every fallible function returns a [`MolcavStatus`]; on failure a message
//! is available from [`molcav_last_error_message`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Strings returned as `char *` are owned by the caller and released with
//! [`molcav_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use molcav::entanglement::ModePair;
use molcav::error::{PointError, SweepError};
use molcav::model::SystemSpec;
use molcav::pipeline::{self, Mode, PointResult};
use molcav::sweep::{self, Format, SweepSpec, SweepTable};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolcavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Physical parameters failed validation.
    InvalidParameter = 3,
    /// The requested quantity is undefined at an unstable point.
    Unstable = 4,
    /// Steady state, Lyapunov solve or entanglement evaluation failed.
    Numerical = 5,
    Config = 6,
    Io = 7,
    OutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolcavMode {
    Effective = 0,
    Laser = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolcavPair {
    CavityB1 = 0,
    CavityB2 = 1,
    B1B2 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolcavFormat {
    Csv = 0,
    Json = 1,
}

/// Physical parameters. Frequencies in THz except `g_v` (GHz); `omega` and
/// `delta` in units of `nu_v`. NaN in `m_fraction`, `temperature`, `n1` or
/// `n2` means "not set".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MolcavParams {
    pub nu_p: f64,
    pub nu_v: f64,
    pub nu_l: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub g_v: f64,
    pub omega: f64,
    pub drive_phase: f64,
    pub delta: f64,
    pub n_molecules: u32,
    pub m_split: u32,
    pub m_fraction: f64,
    pub temperature: f64,
    pub n1: f64,
    pub n2: f64,
}

fn opt(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

impl From<&MolcavParams> for SystemSpec {
    fn from(p: &MolcavParams) -> Self {
        SystemSpec {
            nu_p: p.nu_p,
            nu_v: p.nu_v,
            nu_l: p.nu_l,
            kappa: p.kappa,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            g_v: p.g_v,
            omega: p.omega,
            drive_phase: p.drive_phase,
            delta: p.delta,
            n_molecules: p.n_molecules,
            m_split: p.m_split,
            m_fraction: opt(p.m_fraction),
            temperature: opt(p.temperature),
            n1: opt(p.n1),
            n2: opt(p.n2),
        }
    }
}

impl From<&SystemSpec> for MolcavParams {
    fn from(s: &SystemSpec) -> Self {
        MolcavParams {
            nu_p: s.nu_p,
            nu_v: s.nu_v,
            nu_l: s.nu_l,
            kappa: s.kappa,
            gamma1: s.gamma1,
            gamma2: s.gamma2,
            g_v: s.g_v,
            omega: s.omega,
            drive_phase: s.drive_phase,
            delta: s.delta,
            n_molecules: s.n_molecules,
            m_split: s.m_split,
            m_fraction: s.m_fraction.unwrap_or(f64::NAN),
            temperature: s.temperature.unwrap_or(f64::NAN),
            n1: s.n1.unwrap_or(f64::NAN),
            n2: s.n2.unwrap_or(f64::NAN),
        }
    }
}

impl From<MolcavPair> for ModePair {
    fn from(p: MolcavPair) -> Self {
        match p {
            MolcavPair::CavityB1 => ModePair::CavityB1,
            MolcavPair::CavityB2 => ModePair::CavityB2,
            MolcavPair::B1B2 => ModePair::B1B2,
        }
    }
}

/// Result of one point evaluation; holds one entry per steady-state branch.
pub struct MolcavPoint {
    branches: Vec<PointResult>,
}

pub struct MolcavSweep {
    spec: SweepSpec,
}

pub struct MolcavTable {
    table: SweepTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(MolcavStatus, String);

type FfiResult = Result<(), Failure>;

impl From<PointError> for Failure {
    fn from(e: PointError) -> Self {
        let status = match e {
            PointError::Model(_) => MolcavStatus::InvalidParameter,
            _ => MolcavStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        let status = match e {
            SweepError::Config { .. } | SweepError::UnknownPreset(_) | SweepError::Parse(_) => MolcavStatus::Config,
            SweepError::Io { .. } | SweepError::Csv { .. } | SweepError::Json(_) => MolcavStatus::Io,
            SweepError::Pool(_) => MolcavStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: MolcavStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> FfiResult) -> MolcavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MolcavStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MolcavStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(MolcavStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(MolcavStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    let s = deref(p, name).map(|_| CStr::from_ptr(p))?;
    s.to_str().map_err(|_| fail(MolcavStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

fn branch(point: &MolcavPoint, index: usize) -> Result<&PointResult, Failure> {
    point.branches.get(index).ok_or_else(|| {
        fail(MolcavStatus::OutOfRange, format!("branch {index} out of range (have {})", point.branches.len()))
    })
}

fn stable(r: &PointResult) -> FfiResult {
    if let Some(e) = &r.error {
        return Err(e.clone().into());
    }
    if r.covariance.is_none() {
        return Err(fail(
            MolcavStatus::Unstable,
            format!("point is unstable (spectral abscissa {:e})", r.stability.abscissa),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn molcav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread, or an empty string.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn molcav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn molcav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Mean thermal occupation of a mode at `nu_thz` THz and `temperature` K.
#[no_mangle]
pub extern "C" fn molcav_thermal_occupation(nu_thz: f64, temperature: f64) -> f64 {
    molcav::model::thermal_occupation(nu_thz, temperature)
}

/// Fills `out` with the default cavity-dominated parameter set.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn molcav_params_default(out: *mut MolcavParams) -> MolcavStatus {
    guard(|| {
        *deref_mut(out, "out")? = MolcavParams::from(&sweep::cavity_base());
        Ok(())
    })
}

/// Solves the steady state(s) and fluctuations at one parameter point.
///
/// # Safety
/// `params` must point to a valid struct; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn molcav_evaluate(
    params: *const MolcavParams,
    mode: MolcavMode,
    out: *mut *mut MolcavPoint,
) -> MolcavStatus {
    guard(|| {
        let spec = SystemSpec::from(deref(params, "params")?);
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let mode = match mode {
            MolcavMode::Effective => Mode::Effective,
            MolcavMode::Laser => Mode::Laser,
        };
        let branches = pipeline::evaluate(&spec, mode, &ModePair::ALL)?;
        *out = Box::into_raw(Box::new(MolcavPoint { branches }));
        Ok(())
    })
}

/// # Safety
/// `point` must be null or a handle from [`molcav_evaluate`].
#[no_mangle]
pub unsafe extern "C" fn molcav_point_free(point: *mut MolcavPoint) {
    if !point.is_null() {
        drop(Box::from_raw(point));
    }
}

/// Number of steady-state branches (1 except in the bistable laser regime).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_point_branch_count(point: *const MolcavPoint, out: *mut usize) -> MolcavStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(point, "point")?.branches.len();
        Ok(())
    })
}

/// Stability flag and spectral abscissa of the drift matrix.
///
/// # Safety
/// Pointers must be valid; `abscissa` may be null.
#[no_mangle]
pub unsafe extern "C" fn molcav_point_stability(
    point: *const MolcavPoint,
    branch_index: usize,
    stable: *mut bool,
    abscissa: *mut f64,
) -> MolcavStatus {
    guard(|| {
        let r = branch(deref(point, "point")?, branch_index)?;
        *deref_mut(stable, "stable")? = r.stability.stable;
        if let Some(a) = abscissa.as_mut() {
            *a = r.stability.abscissa;
        }
        Ok(())
    })
}

/// Logarithmic negativity of `pair`. `eta_minus` may be null.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_point_log_negativity(
    point: *const MolcavPoint,
    branch_index: usize,
    pair: MolcavPair,
    value: *mut f64,
    eta_minus: *mut f64,
) -> MolcavStatus {
    guard(|| {
        let r = branch(deref(point, "point")?, branch_index)?;
        let value = deref_mut(value, "value")?;
        stable(r)?;
        let pair = ModePair::from(pair);
        let report = r
            .entanglement
            .iter()
            .find(|e| e.pair == pair)
            .ok_or_else(|| fail(MolcavStatus::Numerical, "pair not evaluated"))?;
        *value = report.log_negativity;
        if let Some(eta) = eta_minus.as_mut() {
            *eta = report.eta_minus;
        }
        Ok(())
    })
}

/// Copies the 6x6 steady-state covariance, row-major, into `out[36]`.
/// Quadrature order: X_B1, Y_B1, X_B2, Y_B2, X_a, Y_a.
///
/// # Safety
/// `out` must be valid for 36 writes.
#[no_mangle]
pub unsafe extern "C" fn molcav_point_covariance(
    point: *const MolcavPoint,
    branch_index: usize,
    out: *mut f64,
) -> MolcavStatus {
    guard(|| {
        let r = branch(deref(point, "point")?, branch_index)?;
        deref_mut(out, "out")?;
        stable(r)?;
        let v = &r.covariance.as_ref().expect("checked by stable").0;
        let dst = std::slice::from_raw_parts_mut(out, 36);
        for i in 0..6 {
            for j in 0..6 {
                dst[6 * i + j] = v[(i, j)];
            }
        }
        Ok(())
    })
}

fn new_sweep(out: &mut *mut MolcavSweep, spec: SweepSpec) {
    *out = Box::into_raw(Box::new(MolcavSweep { spec }));
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_from_preset(name: *const c_char, out: *mut *mut MolcavSweep) -> MolcavStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        new_sweep(out, sweep::preset(string(name, "name")?)?);
        Ok(())
    })
}

/// Parses a TOML sweep configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_from_toml(toml: *const c_char, out: *mut *mut MolcavSweep) -> MolcavStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        new_sweep(out, SweepSpec::from_toml_str(string(toml, "toml")?)?);
        Ok(())
    })
}

/// Applies a `path=value` override such as `base.kappa=20` or
/// `axes.0.count=11`. The sweep is unchanged on failure.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_set(sweep: *mut MolcavSweep, assignment: *const c_char) -> MolcavStatus {
    guard(|| {
        let sweep = deref_mut(sweep, "sweep")?;
        sweep.spec = sweep.spec.with_overrides(&[string(assignment, "assignment")?])?;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_grid_size(sweep: *const MolcavSweep, out: *mut u64) -> MolcavStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(sweep, "sweep")?.spec.grid_size();
        Ok(())
    })
}

/// Serializes the sweep as TOML. Release with [`molcav_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_to_toml(sweep: *const MolcavSweep, out: *mut *mut c_char) -> MolcavStatus {
    guard(|| {
        let text = deref(sweep, "sweep")?.spec.to_toml_string();
        let out = deref_mut(out, "out")?;
        *out = CString::new(text).map_err(|e| fail(MolcavStatus::Config, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Runs the sweep on `jobs` threads (0 picks a default).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_run(
    sweep: *const MolcavSweep,
    jobs: usize,
    out: *mut *mut MolcavTable,
) -> MolcavStatus {
    guard(|| {
        let spec = &deref(sweep, "sweep")?.spec;
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let table = sweep::run_sweep(spec, jobs)?;
        *out = Box::into_raw(Box::new(MolcavTable { table }));
        Ok(())
    })
}

/// # Safety
/// `sweep` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn molcav_sweep_free(sweep: *mut MolcavSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_row_count(table: *const MolcavTable, out: *mut usize) -> MolcavStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(table, "table")?.table.rows.len();
        Ok(())
    })
}

/// Value of axis `axis` at row `row`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_axis_value(
    table: *const MolcavTable,
    row: usize,
    axis: usize,
    out: *mut f64,
) -> MolcavStatus {
    guard(|| {
        let t = &deref(table, "table")?.table;
        let out = deref_mut(out, "out")?;
        let r = t.rows.get(row).ok_or_else(|| fail(MolcavStatus::OutOfRange, format!("row {row} out of range")))?;
        *out = *r.axes.get(axis).ok_or_else(|| fail(MolcavStatus::OutOfRange, format!("axis {axis} out of range")))?;
        Ok(())
    })
}

/// Logarithmic negativity of `pair` at `row`. Returns `Unstable` when the
/// row has no value (unstable or failed point).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_log_negativity(
    table: *const MolcavTable,
    row: usize,
    pair: MolcavPair,
    out: *mut f64,
) -> MolcavStatus {
    guard(|| {
        let t = &deref(table, "table")?.table;
        let out = deref_mut(out, "out")?;
        let r = t.rows.get(row).ok_or_else(|| fail(MolcavStatus::OutOfRange, format!("row {row} out of range")))?;
        let k = t
            .pair_index(pair.into())
            .ok_or_else(|| fail(MolcavStatus::InvalidArgument, "pair was not part of the sweep"))?;
        match (&r.pairs[k], &r.error) {
            (Some(v), _) => {
                *out = v.log_negativity;
                Ok(())
            }
            (None, Some(e)) => Err(fail(MolcavStatus::Numerical, e.clone())),
            (None, None) => Err(fail(MolcavStatus::Unstable, format!("row {row} is unstable"))),
        }
    })
}

/// Largest negativity of `pair` over stable rows within the coupling cap.
/// `row` may be null. Returns `Unstable` if no row qualifies.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_max(
    table: *const MolcavTable,
    pair: MolcavPair,
    value: *mut f64,
    row: *mut u64,
) -> MolcavStatus {
    guard(|| {
        let t = &deref(table, "table")?.table;
        let value = deref_mut(value, "value")?;
        let m = t
            .max_for(pair.into())
            .ok_or_else(|| fail(MolcavStatus::Unstable, "no stable row for this pair"))?;
        *value = m.log_negativity;
        if let Some(r) = row.as_mut() {
            *r = m.index;
        }
        Ok(())
    })
}

/// Writes the table to `path` as CSV or JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_write(
    table: *const MolcavTable,
    path: *const c_char,
    format: MolcavFormat,
) -> MolcavStatus {
    guard(|| {
        let t = &deref(table, "table")?.table;
        let format = match format {
            MolcavFormat::Csv => Format::Csv,
            MolcavFormat::Json => Format::Json,
        };
        sweep::write_results(t, format, Path::new(string(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn molcav_table_free(table: *mut MolcavTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
