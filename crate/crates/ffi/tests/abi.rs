use std::ffi::{CStr, CString};
use std::ptr;

use linkpred_ffi::*;

fn last_error() -> String {
    let p = lp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn graph(src: &[u64], dst: &[u64], directed: bool) -> *mut LpGraph {
    let mut g = ptr::null_mut();
    let s = unsafe { lp_graph_from_edges(src.as_ptr(), dst.as_ptr(), src.len(), directed, &mut g) };
    assert_eq!(s, LpStatus::Ok);
    g
}

#[test]
fn graph_handle_lifecycle() {
    let g = graph(&[5, 6, 7, 5], &[6, 7, 5, 5], true);
    unsafe {
        assert_eq!(lp_graph_node_count(g), 3);
        assert_eq!(lp_graph_edge_count(g), 3);
        let mut raw = 0;
        assert_eq!(lp_graph_raw_id(g, 2, &mut raw), LpStatus::Ok);
        assert_eq!(raw, 7);
        assert_eq!(lp_graph_raw_id(g, 3, &mut raw), LpStatus::InvalidNode);
        assert!(last_error().contains('3'));
        let mut d = 0;
        assert_eq!(lp_graph_distance(g, 0, 2, false, &mut d), LpStatus::Ok);
        assert_eq!(d, 2);
        lp_graph_free(g);
        assert_eq!(lp_graph_node_count(ptr::null()), 0);
    }
}

#[test]
fn null_and_empty_inputs_are_reported() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(lp_graph_from_edges(ptr::null(), ptr::null(), 0, true, &mut g), LpStatus::EmptyGraph);
        assert_eq!(lp_graph_from_edges(ptr::null(), ptr::null(), 2, true, &mut g), LpStatus::NullPointer);
        assert!(g.is_null());
        let missing = CString::new("/nonexistent/edges.txt").unwrap();
        assert_eq!(lp_graph_load(missing.as_ptr(), true, false, &mut g), LpStatus::Io);
        assert!(last_error().contains("nonexistent"));
    }
}

#[test]
fn heuristics_match_the_library() {
    let src: Vec<u64> = (0..12).collect();
    let dst: Vec<u64> = (0..12).map(|i| (i + 1) % 12).collect();
    let g = graph(&src, &dst, false);
    let (u, v) = ([0usize, 3], [1usize, 7]);
    let mut out = vec![0.0; 2 * LP_HEURISTIC_DIM];
    unsafe {
        assert_eq!(lp_graph_heuristics(g, u.as_ptr(), v.as_ptr(), 2, 0.05, out.as_mut_ptr(), out.len()), LpStatus::Ok);
    }
    let raw = linkpred::graph::RawEdgeList {
        edges: src.iter().copied().zip(dst.iter().copied()).collect(),
        directed: false,
    };
    let lg = linkpred::graph::DiGraph::build(&raw).unwrap();
    let cfg = linkpred::heuristics::HeuristicConfig {
        katz_alpha: 0.05,
        ..Default::default()
    };
    let ctx = linkpred::heuristics::HeuristicContext::new(&lg, &cfg).unwrap();
    let h = linkpred::heuristics::featurize_edge(&ctx, 3, 7).unwrap();
    assert_eq!(&out[LP_HEURISTIC_DIM..], h.as_slice());
    unsafe {
        let s = lp_graph_heuristics(g, u.as_ptr(), v.as_ptr(), 2, 0.05, out.as_mut_ptr(), 10);
        assert_eq!(s, LpStatus::BufferTooSmall);
        // alpha past 1 / spectral radius (= 1 / 2 on a cycle) diverges
        let s = lp_graph_heuristics(g, u.as_ptr(), v.as_ptr(), 2, 0.9, out.as_mut_ptr(), out.len());
        assert_eq!(s, LpStatus::Diverged);
        lp_graph_free(g);
    }
}

#[test]
fn dataset_round_trip() {
    let src: Vec<u64> = (0..30).collect();
    let dst: Vec<u64> = (0..30).map(|i| (i + 1) % 30).collect();
    let g = graph(&src, &dst, false);
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(lp_dataset_split(g, 0.1, 3, &mut ds), LpStatus::Ok);
        let n_test = lp_dataset_len(ds, LpPart::Test);
        let n_train = lp_dataset_len(ds, LpPart::Train);
        assert_eq!(n_train + n_test, 60);
        let (mut a, mut b, mut y) = (vec![0; n_test], vec![0; n_test], vec![9u8; n_test]);
        assert_eq!(
            lp_dataset_edges(ds, LpPart::Test, a.as_mut_ptr(), b.as_mut_ptr(), y.as_mut_ptr(), n_test),
            LpStatus::Ok
        );
        assert_eq!(y.iter().filter(|&&l| l == 1).count(), 3);
        assert_eq!(
            lp_dataset_edges(ds, LpPart::Train, a.as_mut_ptr(), b.as_mut_ptr(), y.as_mut_ptr(), n_test),
            LpStatus::BufferTooSmall
        );
        let mut tg = ptr::null_mut();
        assert_eq!(lp_dataset_train_graph(ds, &mut tg), LpStatus::Ok);
        assert_eq!(lp_graph_node_count(tg), 30);
        assert_eq!(lp_graph_edge_count(tg), 27);
        lp_graph_free(tg);
        assert_eq!(lp_dataset_split(g, 1.5, 3, &mut ds), LpStatus::InvalidArgument);
        lp_dataset_free(ds);
        lp_graph_free(g);
    }
}

#[test]
fn pipeline_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g.txt");
    let mut text = String::new();
    for i in 0..40u32 {
        for k in [1, 2, 5] {
            text.push_str(&format!("{i} {}\n", (i + k) % 40));
        }
    }
    std::fs::write(&data, text).unwrap();
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, format!("dataset.path={}\nheuristics.katz_alpha=0.01\ntrain.epochs=3\n", data.display())).unwrap();
    let c = CString::new(cfg.to_str().unwrap()).unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    let mut m = LpMetrics::default();
    unsafe {
        assert_eq!(lp_pipeline_run(c.as_ptr(), out.as_ptr(), 1, false, &mut m), LpStatus::Ok);
    }
    assert_eq!(m.tp + m.fp + m.tn + m.fn_, 24);
    assert!((0.0..=1.0).contains(&m.f1));
    let bad = CString::new("/nonexistent.cfg").unwrap();
    unsafe {
        assert_eq!(lp_pipeline_run(bad.as_ptr(), out.as_ptr(), 0, false, &mut m), LpStatus::Io);
        assert_eq!(lp_pipeline_run(c.as_ptr(), ptr::null(), 0, false, &mut m), LpStatus::NullPointer);
    }
}
