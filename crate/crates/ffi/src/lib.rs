//! C ABI over the `embedgeo` core.
//!
//! Objects cross the boundary as opaque handles created by `egeo_*_read` /
//! `egeo_*_decode` / `egeo_*_from_*` and released with the matching `*_free`.
//! Every function returns an [`EgeoStatus`]; on failure the module error name and
//! message are available from [`egeo_last_error_name`] and
//! [`egeo_last_error_message`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use embedgeo::bound::{evaluate_bound, BoundInputs};
use embedgeo::dataio::{self, Dtype, EmbeddingFormat, EmbeddingSet, Matrix, WeightStack};
use embedgeo::geometry::{l1_diameter, DiameterMode, Metric};
use embedgeo::intrinsic_dim::{estimate_id, Estimator};
use embedgeo::lipschitz::{spectral_norm, suffix_lipschitz, PowerIteration};
use embedgeo::transport::{exact_w1, sinkhorn_w1, SinkhornConfig};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Data = 4,
    Geometry = 5,
    IntrinsicDim = 6,
    Transport = 7,
    Lipschitz = 8,
    Bound = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgeoFormat {
    /// Pick by file extension (`.csv`/`.txt` are CSV, anything else EMB1).
    Auto = 0,
    Emb1 = 1,
    Csv = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgeoEstimator {
    Mle = 0,
    Mom = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgeoMetric {
    Euclidean = 0,
    L1 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgeoSinkhornConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub metric: EgeoMetric,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EgeoTransportResult {
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub marginal_violation: f64,
}

/// Opaque embedding set.
pub struct EgeoEmbeddings {
    inner: EmbeddingSet,
}

/// Opaque weight stack.
pub struct EgeoWeights {
    inner: WeightStack,
}

struct Failure {
    status: EgeoStatus,
    name: String,
    message: String,
}

impl Failure {
    fn new(status: EgeoStatus, name: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            name: name.to_string(),
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Self::new(EgeoStatus::NullPointer, "NullPointer", format!("{what} is null"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(EgeoStatus::InvalidArgument, "InvalidArgument", message)
    }
}

macro_rules! failure_from {
    ($($ty:ty => $status:ident),* $(,)?) => {
        $(impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure::new(EgeoStatus::$status, e.name(), e.to_string())
            }
        })*
    };
}

failure_from! {
    embedgeo::dataio::DataError => Data,
    embedgeo::geometry::GeometryError => Geometry,
    embedgeo::intrinsic_dim::IdError => IntrinsicDim,
    embedgeo::transport::TransportError => Transport,
    embedgeo::lipschitz::LipschitzError => Lipschitz,
    embedgeo::bound::BoundError => Bound,
}

struct LastError {
    name: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<LastError> = RefCell::new(LastError {
        name: CString::default(),
        message: CString::default(),
    });
}

fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior nul removed")
}

fn record(name: String, message: String) {
    LAST_ERROR.with(|cell| {
        *cell.borrow_mut() = LastError {
            name: c_string(name),
            message: c_string(message),
        }
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EgeoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            record(String::new(), String::new());
            EgeoStatus::Ok
        }
        Ok(Err(fail)) => {
            record(fail.name, fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            record("Panic".into(), msg);
            EgeoStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure::null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Failure::invalid("path is not valid UTF-8"))
}

unsafe fn bytes_arg<'a>(p: *const u8, len: usize) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null("bytes"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(EgeoStatus::Io, "Io", format!("{}: {e}", path.display())))
}

fn format_for(format: EgeoFormat, path: Option<&Path>) -> EmbeddingFormat {
    match (format, path) {
        (EgeoFormat::Csv, _) => EmbeddingFormat::Csv,
        (EgeoFormat::Auto, Some(p)) => EmbeddingFormat::from_path(p),
        _ => EmbeddingFormat::Emb1(Dtype::F64),
    }
}

fn metric(m: EgeoMetric) -> Metric {
    match m {
        EgeoMetric::Euclidean => Metric::Euclidean,
        EgeoMetric::L1 => Metric::L1,
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn egeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Module error name of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next `egeo_*` call on the same thread.
#[no_mangle]
pub extern "C" fn egeo_last_error_name() -> *const c_char {
    LAST_ERROR.with(|cell| cell.borrow().name.as_ptr())
}

/// Human-readable message of the last failed call on this thread.
#[no_mangle]
pub extern "C" fn egeo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|cell| cell.borrow().message.as_ptr())
}

/// Reads an embedding file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_read(
    path: *const c_char,
    format: EgeoFormat,
    out: *mut *mut EgeoEmbeddings,
) -> EgeoStatus {
    guard(|| {
        let path = path_arg(path)?;
        let bytes = read_file(path)?;
        let inner = dataio::decode_embeddings(&bytes, format_for(format, Some(path)))?;
        put(out, boxed(EgeoEmbeddings { inner }), "out")
    })
}

/// Decodes EMB1 or CSV bytes held in memory. `Auto` means EMB1.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_decode(
    bytes: *const u8,
    len: usize,
    format: EgeoFormat,
    out: *mut *mut EgeoEmbeddings,
) -> EgeoStatus {
    guard(|| {
        let bytes = bytes_arg(bytes, len)?;
        let inner = dataio::decode_embeddings(bytes, format_for(format, None))?;
        put(out, boxed(EgeoEmbeddings { inner }), "out")
    })
}

/// Copies a row-major `n x dim` array into a new embedding set.
///
/// # Safety
/// `data` must point to `n * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_from_rows(
    data: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut EgeoEmbeddings,
) -> EgeoStatus {
    guard(|| {
        let count = n
            .checked_mul(dim)
            .ok_or_else(|| Failure::invalid("n * dim overflows"))?;
        if count == 0 {
            return Err(Failure::invalid("n and dim must be positive"));
        }
        if data.is_null() {
            return Err(Failure::null("data"));
        }
        let values = std::slice::from_raw_parts(data, count).to_vec();
        let inner = EmbeddingSet::new(Matrix::from_vec(n, dim, values))?;
        put(out, boxed(EgeoEmbeddings { inner }), "out")
    })
}

/// Writes an embedding set as EMB1 (`f32` or `f64` payload) or CSV.
///
/// # Safety
/// `set` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_write(
    set: *const EgeoEmbeddings,
    path: *const c_char,
    format: EgeoFormat,
    single_precision: bool,
) -> EgeoStatus {
    guard(|| {
        let set = get(set, "set")?;
        let path = path_arg(path)?;
        let fmt = match format_for(format, Some(path)) {
            EmbeddingFormat::Emb1(_) if single_precision => EmbeddingFormat::Emb1(Dtype::F32),
            other => other,
        };
        Ok(dataio::write_embeddings_file(path, &set.inner, fmt)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_free(set: *mut EgeoEmbeddings) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be a live handle; the outputs must be writable (either may be null).
#[no_mangle]
pub unsafe extern "C" fn egeo_embeddings_shape(
    set: *const EgeoEmbeddings,
    n: *mut usize,
    dim: *mut usize,
) -> EgeoStatus {
    guard(|| {
        let set = get(set, "set")?;
        if !n.is_null() {
            n.write(set.inner.n());
        }
        if !dim.is_null() {
            dim.write(set.inner.dim());
        }
        Ok(())
    })
}

/// Intrinsic-dimension estimate from `k` nearest neighbors.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_intrinsic_dim(
    set: *const EgeoEmbeddings,
    k: usize,
    estimator: EgeoEstimator,
    out: *mut f64,
) -> EgeoStatus {
    guard(|| {
        let set = get(set, "set")?;
        let est = match estimator {
            EgeoEstimator::Mle => Estimator::Mle,
            EgeoEstimator::Mom => Estimator::Mom,
        };
        let value = estimate_id(&set.inner, k, est)?.value;
        put(out, value, "out")
    })
}

/// ℓ1 diameter. `sampled_pairs == 0` computes the exact maximum over all pairs.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_l1_diameter(
    set: *const EgeoEmbeddings,
    sampled_pairs: usize,
    seed: u64,
    out: *mut f64,
) -> EgeoStatus {
    guard(|| {
        let set = get(set, "set")?;
        let mode = match sampled_pairs {
            0 => DiameterMode::Exact,
            pairs => DiameterMode::Sampled { pairs, seed },
        };
        put(out, l1_diameter(&set.inner, mode), "out")
    })
}

/// Solver defaults (ε = 0.01, 200 sweeps, tolerance 1e-6, Euclidean cost).
#[no_mangle]
pub extern "C" fn egeo_sinkhorn_default_config() -> EgeoSinkhornConfig {
    let d = SinkhornConfig::default();
    EgeoSinkhornConfig {
        epsilon: d.epsilon,
        max_iter: d.max_iter,
        tol: d.tol,
        metric: EgeoMetric::Euclidean,
    }
}

/// Entropic W1 between two sets with uniform weights. A null `config` uses the defaults.
///
/// # Safety
/// `a` and `b` must be live handles; `config` may be null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_sinkhorn_w1(
    a: *const EgeoEmbeddings,
    b: *const EgeoEmbeddings,
    config: *const EgeoSinkhornConfig,
    out: *mut EgeoTransportResult,
) -> EgeoStatus {
    guard(|| {
        let (a, b) = (get(a, "a")?, get(b, "b")?);
        let c = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| egeo_sinkhorn_default_config());
        let cfg = SinkhornConfig {
            epsilon: c.epsilon,
            max_iter: c.max_iter,
            tol: c.tol,
            metric: metric(c.metric),
        };
        let r = sinkhorn_w1(&a.inner, &b.inner, &cfg)?;
        put(
            out,
            EgeoTransportResult {
                cost: r.cost,
                iterations: r.iterations,
                converged: r.converged,
                marginal_violation: r.marginal_violation,
            },
            "out",
        )
    })
}

/// Exact W1 for equal-size sets via optimal assignment.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_exact_w1(
    a: *const EgeoEmbeddings,
    b: *const EgeoEmbeddings,
    ground: EgeoMetric,
    out: *mut f64,
) -> EgeoStatus {
    guard(|| {
        let (a, b) = (get(a, "a")?, get(b, "b")?);
        put(out, exact_w1(&a.inner, &b.inner, metric(ground))?, "out")
    })
}

/// Largest singular value of a row-major `rows x cols` matrix by power iteration.
/// Non-positive `tol` or zero `max_iter` select the defaults.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_spectral_norm(
    data: *const f64,
    rows: usize,
    cols: usize,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
) -> EgeoStatus {
    guard(|| {
        let count = rows
            .checked_mul(cols)
            .filter(|&c| c > 0)
            .ok_or_else(|| Failure::invalid("rows and cols must be positive"))?;
        if data.is_null() {
            return Err(Failure::null("data"));
        }
        let values = std::slice::from_raw_parts(data, count);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Failure::invalid("matrix has non-finite entries"));
        }
        let mut cfg = PowerIteration::default();
        if tol > 0.0 {
            cfg.tol = tol;
        }
        if max_iter > 0 {
            cfg.max_iter = max_iter;
        }
        put(
            out,
            spectral_norm(&Matrix::from_vec(rows, cols, values.to_vec()), &cfg),
            "out",
        )
    })
}

/// Reads a WTS1 weight stack.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_weights_read(path: *const c_char, out: *mut *mut EgeoWeights) -> EgeoStatus {
    guard(|| {
        let inner = dataio::decode_weight_stack(&read_file(path_arg(path)?)?)?;
        put(out, boxed(EgeoWeights { inner }), "out")
    })
}

/// Decodes WTS1 bytes held in memory.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_weights_decode(bytes: *const u8, len: usize, out: *mut *mut EgeoWeights) -> EgeoStatus {
    guard(|| {
        let inner = dataio::decode_weight_stack(bytes_arg(bytes, len)?)?;
        put(out, boxed(EgeoWeights { inner }), "out")
    })
}

/// # Safety
/// `weights` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn egeo_weights_free(weights: *mut EgeoWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Number of linear layers in the stack.
///
/// # Safety
/// `weights` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_weights_len(weights: *const EgeoWeights, out: *mut usize) -> EgeoStatus {
    guard(|| put(out, get(weights, "weights")?.inner.len(), "out"))
}

/// Product of the spectral norms of layers `i..len`; `i == len` gives 1.
///
/// # Safety
/// `weights` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egeo_suffix_lipschitz(weights: *const EgeoWeights, i: usize, out: *mut f64) -> EgeoStatus {
    guard(|| {
        let w = get(weights, "weights")?;
        put(out, suffix_lipschitz(&w.inner, i, &PowerIteration::default())?, "out")
    })
}

/// Evaluates the bound from a JSON configuration. Writes the minimum gap and its
/// layer; when `report_json` is non-null it receives the full per-layer report,
/// to be released with [`egeo_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; outputs must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn egeo_evaluate_bound(
    config_json: *const c_char,
    min_gap: *mut f64,
    argmin_k: *mut usize,
    report_json: *mut *mut c_char,
) -> EgeoStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(Failure::null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|_| Failure::invalid("config is not valid UTF-8"))?;
        let inputs: BoundInputs =
            serde_json::from_str(text).map_err(|e| Failure::new(EgeoStatus::Bound, "BadConfig", e.to_string()))?;
        let report = evaluate_bound(&inputs)?;
        if !min_gap.is_null() {
            min_gap.write(report.min_gap_bound);
        }
        if !argmin_k.is_null() {
            argmin_k.write(report.argmin_k);
        }
        if !report_json.is_null() {
            let json = serde_json::to_string(&report).expect("report serializes");
            report_json.write(c_string(json).into_raw());
        }
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn egeo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
