//! C ABI over the `linkpred` library.
//!
//! Objects cross the boundary as opaque handles created by `lp_*` functions
//! and released by the matching `lp_*_free`. Every fallible call returns an
//! [`LpStatus`]; on failure [`lp_last_error`] describes what went wrong on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use linkpred::config::PipelineConfig;
use linkpred::graph::{bfs_distance, DiGraph, RawEdgeList};
use linkpred::heuristics::{featurize_edges, HeuristicConfig, HeuristicContext, HEURISTIC_DIM};
use linkpred::pipeline::{load_dataset_graph, Pipeline};
use linkpred::sampling::{assemble_dataset, LabeledEdge, SplitDataset};
use linkpred::Error;

/// Width of one heuristic feature row.
pub const LP_HEURISTIC_DIM: usize = 56;
const _: () = assert!(LP_HEURISTIC_DIM == HEURISTIC_DIM);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    EmptyGraph = 5,
    InvalidNode = 6,
    Diverged = 7,
    DimensionMismatch = 8,
    Model = 9,
    Config = 10,
    Artifact = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Which side of a split.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpPart {
    Train = 0,
    Test = 1,
}

/// Evaluation metrics at the 0.5 threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

/// Graph handle.
pub struct LpGraph {
    inner: DiGraph,
}

/// Train/test split handle.
pub struct LpDataset {
    inner: SplitDataset,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LpStatus {
    match e {
        Error::Parse { .. } => LpStatus::Parse,
        Error::EmptyGraph => LpStatus::EmptyGraph,
        Error::InvalidNode(_) => LpStatus::InvalidNode,
        Error::InvalidArgument(_) => LpStatus::InvalidArgument,
        Error::KatzDiverged { .. } => LpStatus::Diverged,
        Error::DimensionMismatch { .. } => LpStatus::DimensionMismatch,
        Error::Spec(_) | Error::MissingInput(_) | Error::NanLoss { .. } | Error::EmptyDataset => LpStatus::Model,
        Error::Config(_) => LpStatus::Config,
        Error::Artifact { .. } => LpStatus::Artifact,
        Error::Io { .. } => LpStatus::Io,
        Error::Stage { source, .. } => status_of(source),
    }
}

/// Run `f`, turning errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), (LpStatus, String)>) -> LpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LpStatus::Panic
        }
    }
}

fn lib<T>(r: linkpred::Result<T>) -> Result<T, (LpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (LpStatus, String) {
    (LpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, (LpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LpStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (LpStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Text of the last error on this thread, or null after a successful call.
/// The pointer stays valid until the next `lp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a graph from parallel arrays of raw node ids. Raw ids are
/// relabelled densely in order of first appearance.
///
/// # Safety
/// `src` and `dst` must point to `len` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_from_edges(
    src: *const u64,
    dst: *const u64,
    len: usize,
    directed: bool,
    out: *mut *mut LpGraph,
) -> LpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = slice(src, len, "src")?;
        let d = slice(dst, len, "dst")?;
        let raw = RawEdgeList {
            edges: s.iter().copied().zip(d.iter().copied()).collect(),
            directed,
        };
        let g = lib(DiGraph::build(&raw))?;
        *out = Box::into_raw(Box::new(LpGraph { inner: g }));
        Ok(())
    })
}

/// Load a whitespace- or comma-separated edge list.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_load(path: *const c_char, directed: bool, skip_header: bool, out: *mut *mut LpGraph) -> LpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = path_arg(path, "path")?;
        let g = lib(load_dataset_graph(&p, directed, skip_header))?;
        *out = Box::into_raw(Box::new(LpGraph { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_free(g: *mut LpGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_node_count(g: *const LpGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.node_count())
}

/// Edge count (undirected edges counted once), or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_edge_count(g: *const LpGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Raw id of dense node `u`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_raw_id(g: *const LpGraph, u: usize, out: *mut u64) -> LpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        lib(g.inner.check_node(u))?;
        *out = g.inner.raw_id(u);
        Ok(())
    })
}

/// Hop distance from `u` to `v` (dense ids), or -1 when unreachable.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_distance(g: *const LpGraph, u: usize, v: usize, ignore_direction: bool, out: *mut i64) -> LpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = lib(bfs_distance(&g.inner, u, v, usize::MAX, false, ignore_direction))?;
        *out = d.map_or(-1, |d| d as i64);
        Ok(())
    })
}

/// Heuristic rows for `len` candidate edges (dense ids) with default
/// settings and the given Katz decay. Writes `len * LP_HEURISTIC_DIM`
/// values row by row into `out`, which holds `out_len` doubles.
///
/// # Safety
/// Arrays must hold the stated number of elements; `g` must be live.
#[no_mangle]
pub unsafe extern "C" fn lp_graph_heuristics(
    g: *const LpGraph,
    src: *const usize,
    dst: *const usize,
    len: usize,
    katz_alpha: f64,
    out: *mut f64,
    out_len: usize,
) -> LpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let s = slice(src, len, "src")?;
        let d = slice(dst, len, "dst")?;
        let need = len * HEURISTIC_DIM;
        if out_len < need {
            return Err((LpStatus::BufferTooSmall, format!("need {need} doubles, got {out_len}")));
        }
        if need > 0 && out.is_null() {
            return Err(null("out"));
        }
        let cfg = HeuristicConfig {
            katz_alpha,
            ..HeuristicConfig::default()
        };
        let ctx = lib(HeuristicContext::new(&g.inner, &cfg))?;
        let edges: Vec<LabeledEdge> = s.iter().zip(d).map(|(&u, &v)| LabeledEdge::positive(u, v)).collect();
        let table = lib(featurize_edges(&ctx, &edges))?;
        let dest = std::slice::from_raw_parts_mut(out, need);
        for (slot, v) in dest.iter_mut().zip(table.data.iter()) {
            *slot = *v;
        }
        Ok(())
    })
}

/// Node-preserving train/test split with distance-3 negatives.
///
/// # Safety
/// `g` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_split(g: *const LpGraph, test_fraction: f64, seed: u64, out: *mut *mut LpDataset) -> LpStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = lib(assemble_dataset(&g.inner, test_fraction, seed))?;
        *out = Box::into_raw(Box::new(LpDataset { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_free(d: *mut LpDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

fn part_of(d: &LpDataset, part: LpPart) -> &[LabeledEdge] {
    match part {
        LpPart::Train => &d.inner.train,
        LpPart::Test => &d.inner.test,
    }
}

/// Number of labelled edges on one side, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_len(d: *const LpDataset, part: LpPart) -> usize {
    d.as_ref().map_or(0, |d| part_of(d, part).len())
}

/// Copy one side's edges into caller arrays of capacity `cap`.
///
/// # Safety
/// `src`, `dst` and `labels` must each hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_edges(
    d: *const LpDataset,
    part: LpPart,
    src: *mut usize,
    dst: *mut usize,
    labels: *mut u8,
    cap: usize,
) -> LpStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        let edges = part_of(d, part);
        if cap < edges.len() {
            return Err((LpStatus::BufferTooSmall, format!("need {} slots, got {cap}", edges.len())));
        }
        if edges.is_empty() {
            return Ok(());
        }
        if src.is_null() || dst.is_null() || labels.is_null() {
            return Err(null("output array"));
        }
        for (i, e) in edges.iter().enumerate() {
            *src.add(i) = e.src;
            *dst.add(i) = e.dst;
            *labels.add(i) = e.label;
        }
        Ok(())
    })
}

/// New graph handle holding only the training positives over the full
/// node set.
///
/// # Safety
/// `d` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_train_graph(d: *const LpDataset, out: *mut *mut LpGraph) -> LpStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(LpGraph {
            inner: d.inner.train_graph.clone(),
        }));
        Ok(())
    })
}

/// Run every pipeline stage for a config file, writing artifacts under
/// `out_dir`. `threads` of 0 keeps the default worker count.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_pipeline_run(config_path: *const c_char, out_dir: *const c_char, threads: usize, overwrite: bool, out: *mut LpMetrics) -> LpStatus {
    guard(|| {
        let cfg_path = path_arg(config_path, "config_path")?;
        let dir = path_arg(out_dir, "out_dir")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let cfg = lib(PipelineConfig::load(&cfg_path))?;
        let mut p = Pipeline::new(cfg, dir);
        p.overwrite = overwrite;
        p.threads = (threads > 0).then_some(threads);
        let run = || lib(p.run());
        let report = if threads > 0 {
            let pool = rayon_pool(threads)?;
            pool.install(run)?
        } else {
            run()?
        };
        let m = report.metrics;
        *out = LpMetrics {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            accuracy: m.accuracy,
            tp: m.tp as u64,
            fp: m.fp as u64,
            tn: m.tn as u64,
            fn_: m.fn_ as u64,
        };
        Ok(())
    })
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool, (LpStatus, String)> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| (LpStatus::InvalidArgument, format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(status_of(&Error::EmptyGraph), LpStatus::EmptyGraph);
        let staged = Error::Config("x".into()).in_stage("ingest");
        assert_eq!(status_of(&staged), LpStatus::Config);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, LpStatus::Panic);
        assert!(!lp_last_error().is_null());
        assert_eq!(guard(|| Ok(())), LpStatus::Ok);
        assert!(lp_last_error().is_null());
    }
}
