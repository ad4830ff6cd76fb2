//! C interface to `gnnstab`.
//!
//! Shift operators and models are opaque heap handles created by `*_new` /
//! `*_load` and released with the matching `*_free`. Every fallible function
//! returns a [`GnnstabStatus`]; on failure [`gnnstab_last_error`] describes the
//! problem. Matrices and graph signals are passed row-major, `N × N` and
//! `N × F` respectively.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;

use gnnstab::filters::{filter_distance, graph_convolution, DistanceMode, FilterTaps};
use gnnstab::gnn::{predict, Checkpoint, GnnModel};
use gnnstab::graph::{GraphSignal, Gso, GsoKind};
use gnnstab::perturbation::{edge_dilation, relative_distance};
use gnnstab::spectral::{eigendecompose, integral_lipschitz_check};
use gnnstab::stability::{filter_stability_bound, gnn_stability_bound};
use gnnstab::Error;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnnstabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NotSymmetric = 4,
    Singular = 5,
    TooLarge = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnnstabGsoKind {
    Adjacency = 0,
    Laplacian = 1,
    Markov = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnnstabDistanceMode {
    /// No relabeling.
    Identity = 0,
    /// Minimum over all relabelings; `N ≤ 8`.
    BruteForce = 1,
}

/// Opaque shift operator.
pub struct GnnstabGso {
    inner: Gso,
}

/// Opaque trained model.
pub struct GnnstabModel {
    inner: GnnModel,
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(f: &Failure) -> GnnstabStatus {
    match f {
        Failure::Null(_) => GnnstabStatus::NullPointer,
        Failure::Invalid(_) => GnnstabStatus::InvalidArgument,
        Failure::Core(e) => match e {
            Error::Shape(_) => GnnstabStatus::Shape,
            Error::NotSymmetric { .. } => GnnstabStatus::NotSymmetric,
            Error::SingularEquation { .. } | Error::NoValidErrorMatrix => GnnstabStatus::Singular,
            Error::TooLarge { .. } => GnnstabStatus::TooLarge,
            Error::Io { .. } => GnnstabStatus::Io,
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => GnnstabStatus::Parse,
            _ => GnnstabStatus::InvalidArgument,
        },
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GnnstabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GnnstabStatus::Ok,
        Ok(Err(failure)) => {
            let status = status_of(&failure);
            set_last_error(match failure {
                Failure::Null(name) => format!("null pointer: {name}"),
                Failure::Invalid(m) => m,
                Failure::Core(e) => e.to_string(),
            });
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            GnnstabStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(
    p: *mut f64,
    len: usize,
    name: &'static str,
) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn taps(p: *const f64, k: usize) -> Result<FilterTaps, Failure> {
    Ok(FilterTaps::new(input(p, k, "taps")?.to_vec())?)
}

unsafe fn signal(p: *const f64, n: usize, features: usize) -> Result<GraphSignal, Failure> {
    let len = n
        .checked_mul(features)
        .ok_or(Failure::Invalid("signal too large".into()))?;
    Ok(GraphSignal::new(DMatrix::from_row_slice(
        n,
        features,
        input(p, len, "x")?,
    )))
}

/// Library version, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gnnstab_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(gnnstab::experiments::VERSION).unwrap_or_default())
        .as_ptr()
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gnnstab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a shift operator from a row-major `n × n` matrix. The matrix is
/// symmetrized by averaging with its transpose.
///
/// # Safety
/// `data` must point to `n * n` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_gso_new(
    data: *const f64,
    n: usize,
    kind: GnnstabGsoKind,
    out: *mut *mut GnnstabGso,
) -> GnnstabStatus {
    guard(|| {
        if n == 0 {
            return Err(Failure::Invalid("n must be positive".into()));
        }
        let len = n
            .checked_mul(n)
            .ok_or(Failure::Invalid("n too large".into()))?;
        let m = DMatrix::from_row_slice(n, n, input(data, len, "data")?);
        let kind = match kind {
            GnnstabGsoKind::Adjacency => GsoKind::Adjacency,
            GnnstabGsoKind::Laplacian => GsoKind::Laplacian,
            GnnstabGsoKind::Markov => GsoKind::Markov,
        };
        let gso = Gso::from_matrix(m, kind)?;
        put(
            out,
            Box::into_raw(Box::new(GnnstabGso { inner: gso })),
            "out",
        )
    })
}

/// Releases a shift operator; null is ignored.
///
/// # Safety
/// `gso` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_gso_free(gso: *mut GnnstabGso) {
    if !gso.is_null() {
        drop(Box::from_raw(gso));
    }
}

/// # Safety
/// `gso` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_gso_node_count(
    gso: *const GnnstabGso,
    out: *mut usize,
) -> GnnstabStatus {
    guard(|| put(out, handle(gso, "gso")?.inner.node_count(), "out"))
}

/// New handle holding `(1 + epsilon)·S`.
///
/// # Safety
/// `gso` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_gso_dilate(
    gso: *const GnnstabGso,
    epsilon: f64,
    out: *mut *mut GnnstabGso,
) -> GnnstabStatus {
    guard(|| {
        let spec = edge_dilation(&handle(gso, "gso")?.inner, epsilon)?;
        put(
            out,
            Box::into_raw(Box::new(GnnstabGso {
                inner: spec.perturbed,
            })),
            "out",
        )
    })
}

/// Eigenvalues in ascending order; `len` must equal the node count.
///
/// # Safety
/// `gso` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_gso_eigenvalues(
    gso: *const GnnstabGso,
    out: *mut f64,
    len: usize,
) -> GnnstabStatus {
    guard(|| {
        let s = &handle(gso, "gso")?.inner;
        if len != s.node_count() {
            return Err(Failure::Core(Error::Shape(format!(
                "buffer holds {len} values, N = {}",
                s.node_count()
            ))));
        }
        let eig = eigendecompose(s)?;
        output(out, len, "out")?.copy_from_slice(eig.eigenvalues.as_slice());
        Ok(())
    })
}

/// `y = Σ_k h_k S^k x` for a row-major `N × features` signal.
///
/// # Safety
/// `taps` must hold `k` doubles; `x` and `out` must hold `N * features`.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_graph_convolution(
    gso: *const GnnstabGso,
    taps_ptr: *const f64,
    k: usize,
    x: *const f64,
    features: usize,
    out: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let s = &handle(gso, "gso")?.inner;
        let n = s.node_count();
        let y = graph_convolution(s, &taps(taps_ptr, k)?, &signal(x, n, features)?)?;
        let out = output(out, n * features, "out")?;
        for i in 0..n {
            for f in 0..features {
                out[i * features + f] = y.values()[(i, f)];
            }
        }
        Ok(())
    })
}

/// `h(λ)` at each of `len` points.
///
/// # Safety
/// `taps` must hold `k` doubles; `lambdas` and `out` must hold `len`.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_frequency_response(
    taps_ptr: *const f64,
    k: usize,
    lambdas: *const f64,
    len: usize,
    out: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let h = taps(taps_ptr, k)?;
        let l = input(lambdas, len, "lambdas")?;
        for (o, &v) in output(out, len, "out")?.iter_mut().zip(l) {
            *o = h.response(v);
        }
        Ok(())
    })
}

/// Grid estimate of `max |λh′(λ)|` and `max |h(λ)|` over `[a, b]`.
///
/// # Safety
/// `taps` must hold `k` doubles; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_integral_lipschitz(
    taps_ptr: *const f64,
    k: usize,
    a: f64,
    b: f64,
    grid_size: usize,
    constant: *mut f64,
    max_gain: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let il = integral_lipschitz_check(&taps(taps_ptr, k)?, (a, b), grid_size)?;
        put(constant, il.constant, "constant")?;
        put(max_gain, il.max_gain, "max_gain")
    })
}

fn mode(m: GnnstabDistanceMode) -> DistanceMode {
    match m {
        GnnstabDistanceMode::Identity => DistanceMode::Identity,
        GnnstabDistanceMode::BruteForce => DistanceMode::BruteForce,
    }
}

/// Size `‖E‖` of the relative error relating `s` and `s_hat`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_relative_distance(
    s: *const GnnstabGso,
    s_hat: *const GnnstabGso,
    distance_mode: GnnstabDistanceMode,
    out: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let d = relative_distance(
            &handle(s, "s")?.inner,
            &handle(s_hat, "s_hat")?.inner,
            mode(distance_mode),
        )?;
        put(out, d, "out")
    })
}

/// `‖H(S) − H(Ŝ)‖` in the spectral norm.
///
/// # Safety
/// Both handles must be live, `taps` must hold `k` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_filter_distance(
    s: *const GnnstabGso,
    s_hat: *const GnnstabGso,
    taps_ptr: *const f64,
    k: usize,
    distance_mode: GnnstabDistanceMode,
    out: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let d = filter_distance(
            &handle(s, "s")?.inner,
            &handle(s_hat, "s_hat")?.inner,
            &taps(taps_ptr, k)?,
            mode(distance_mode),
        )?;
        put(out, d, "out")
    })
}

/// `2C(1 + δ√N)ε`.
#[no_mangle]
pub extern "C" fn gnnstab_filter_stability_bound(
    c: f64,
    delta: f64,
    n: usize,
    epsilon: f64,
) -> f64 {
    filter_stability_bound(c, delta, n, epsilon)
}

/// `2C(1 + δ√N)Lε`.
#[no_mangle]
pub extern "C" fn gnnstab_gnn_stability_bound(
    c: f64,
    delta: f64,
    n: usize,
    epsilon: f64,
    layers: usize,
) -> f64 {
    gnn_stability_bound(c, delta, n, epsilon, layers)
}

/// Loads a JSON checkpoint written by `gnnstab train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_model_load(
    path: *const c_char,
    out: *mut *mut GnnstabModel,
) -> GnnstabStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Failure::Invalid(format!("path is not UTF-8: {e}")))?;
        let ck = Checkpoint::load(Path::new(path))?;
        put(
            out,
            Box::into_raw(Box::new(GnnstabModel { inner: ck.model })),
            "out",
        )
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_model_free(model: *mut GnnstabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_model_input_features(
    model: *const GnnstabModel,
    out: *mut usize,
) -> GnnstabStatus {
    guard(|| put(out, handle(model, "model")?.inner.input_features(), "out"))
}

/// Prediction at the model's readout node for a row-major `N × F` signal.
///
/// # Safety
/// Handles must be live, `x` must hold `N * F` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnstab_model_predict(
    model: *const GnnstabModel,
    gso: *const GnnstabGso,
    x: *const f64,
    out: *mut f64,
) -> GnnstabStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let s = &handle(gso, "gso")?.inner;
        let y = predict(m, s, &signal(x, s.node_count(), m.input_features())?)?;
        put(out, y, "out")
    })
}
