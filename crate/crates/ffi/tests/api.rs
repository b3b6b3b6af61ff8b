use std::ffi::{CStr, CString};
use std::ptr;

use adawass_ffi::*;

const A: &str = r#"{"depth":2,"value_dims":[1,1],"nodes":[
 {"id":0,"parent":null,"time":0,"value":null,"prob":1.0},
 {"id":1,"parent":0,"time":1,"value":[1.0],"prob":1.0},
 {"id":2,"parent":1,"time":2,"value":[2.0],"prob":1.0}]}"#;
const B: &str = r#"{"depth":2,"value_dims":[1,1],"nodes":[
 {"id":0,"parent":null,"time":0,"value":null,"prob":1.0},
 {"id":1,"parent":0,"time":1,"value":[3.0],"prob":1.0},
 {"id":2,"parent":1,"time":2,"value":[5.0],"prob":1.0}]}"#;

fn tree(json: &str) -> *mut AwTree {
    let s = CString::new(json).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { aw_tree_from_json(s.as_ptr(), &mut t) }, AwStatus::Ok);
    t
}

fn last_error() -> String {
    let p = aw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn distance_between_diracs() {
    let (a, b) = (tree(A), tree(B));
    let mut d = 0.0;
    assert_eq!(unsafe { aw_distance(a, b, 2.0, &mut d) }, AwStatus::Ok);
    assert!((d - 13f64.sqrt()).abs() < 1e-12);
    assert!(aw_last_error_message().is_null());
    unsafe {
        aw_tree_free(a);
        aw_tree_free(b);
    }
}

#[test]
fn json_round_trip_and_canonical() {
    let a = tree(A);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { aw_tree_to_json(a, &mut s) }, AwStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { aw_string_free(s) };
    let again = tree(&text);

    let mut eq = false;
    assert_eq!(unsafe { aw_equivalent(a, again, 0.0, &mut eq) }, AwStatus::Ok);
    assert!(eq);

    let mut c = ptr::null_mut();
    assert_eq!(unsafe { aw_canonicalize(a, 0.0, &mut c) }, AwStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { aw_tree_num_nodes(c, &mut n) }, AwStatus::Ok);
    assert_eq!(n, 3);
    unsafe {
        aw_tree_free(a);
        aw_tree_free(again);
        aw_tree_free(c);
    }
}

#[test]
fn geodesic_flow_energy() {
    let (a, b) = (tree(A), tree(B));
    let grid = [0.0, 0.25, 0.5, 1.0];
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { aw_geodesic(a, b, 2.0, grid.as_ptr(), grid.len(), 0, &mut f) },
        AwStatus::Ok
    );
    let mut e = 0.0;
    assert_eq!(unsafe { aw_flow_energy(f, 2.0, &mut e) }, AwStatus::Ok);
    assert!((e - 13.0).abs() < 1e-9);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { aw_flow_to_json(f, &mut s) }, AwStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { aw_flow_from_json(s, &mut g) }, AwStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { aw_flow_grid_len(g, &mut len) }, AwStatus::Ok);
    assert_eq!(len, 4);

    let mut mid = ptr::null_mut();
    assert_eq!(unsafe { aw_flow_process_at(g, 2, &mut mid) }, AwStatus::Ok);
    let mut d = 0.0;
    assert_eq!(unsafe { aw_distance(a, mid, 2.0, &mut d) }, AwStatus::Ok);
    assert!((d - 13f64.sqrt() / 2.0).abs() < 1e-12);
    assert_eq!(unsafe { aw_flow_process_at(g, 4, &mut mid) }, AwStatus::InvalidInput);
    unsafe {
        aw_string_free(s);
        aw_flow_free(f);
        aw_flow_free(g);
        aw_tree_free(a);
        aw_tree_free(b);
        aw_tree_free(mid);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new("{\"depth\": 1}").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { aw_tree_from_json(bad.as_ptr(), &mut t) }, AwStatus::InvalidInput);
    assert!(last_error().contains("value_dims"));
    assert!(t.is_null());

    assert_eq!(unsafe { aw_tree_from_json(ptr::null(), &mut t) }, AwStatus::NullPointer);

    let a = tree(A);
    let short = tree(
        r#"{"depth":1,"value_dims":[1],"nodes":[
        {"id":0,"parent":null,"time":0,"value":null,"prob":1.0},
        {"id":1,"parent":0,"time":1,"value":[0.0],"prob":1.0}]}"#,
    );
    let mut d = 0.0;
    assert_eq!(unsafe { aw_distance(a, short, 2.0, &mut d) }, AwStatus::ShapeMismatch);
    assert_eq!(unsafe { aw_distance(a, a, 0.5, &mut d) }, AwStatus::InvalidInput);
    assert_eq!(unsafe { aw_distance(a, a, 2.0, ptr::null_mut()) }, AwStatus::NullPointer);

    let grid = [0.0, 1.0];
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { aw_geodesic(a, a, 2.0, grid.as_ptr(), 2, 1, &mut f) },
        AwStatus::Ok,
        "a chain never exceeds one node per level"
    );
    unsafe {
        aw_flow_free(f);
        aw_tree_free(a);
        aw_tree_free(short);
    }
}
