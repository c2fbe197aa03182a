use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const Z2: &str = "d 2 N 2\ngen a = (0 1) ; q = (0 1)\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symthompson"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn json(dir: &Path, args: &[&str]) -> Value {
    serde_json::from_str(&ok(dir, args)).unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, body: &str| std::fs::write(dir.path().join(name), body).unwrap();
    w("z2.grp", Z2);
    // x = the single caret with label a on the left leaf
    w("x.el", "group z2.grp\nmap 0 -> 0 : a\nmap 1 -> 1 : id\n");
    // the same element, expanded once at leaf 1
    w("x2.el", "group z2.grp\nmap 0 -> 0 : a\nmap 10 -> 10 : id\nmap 11 -> 11 : id\n");
    w("swap.el", "group z2.grp\nmap 0 -> 1 : id\nmap 1 -> 0 : id\n");
    w("idx.el", "group z2.grp\nmap 00 -> 00 : id\nmap 01 -> 01 : id\nmap 1 -> 1 : id\n");
    w("iota.el", "group z2.grp\nmap e -> e : a\n");
    dir
}

#[test]
fn reduce_collapses_an_expanded_identity() {
    let d = workspace();
    assert_eq!(ok(d.path(), &["reduce", "idx.el"]), "group z2.grp\nmap e -> e : id\n");
}

#[test]
fn compose_with_inverse_is_identity() {
    let d = workspace();
    let inv = ok(d.path(), &["invert", "swap.el"]);
    std::fs::write(d.path().join("inv.el"), inv).unwrap();
    let prod = ok(d.path(), &["compose", "swap.el", "inv.el"]);
    std::fs::write(d.path().join("prod.el"), prod).unwrap();
    assert_eq!(ok(d.path(), &["reduce", "prod.el"]), "group z2.grp\nmap e -> e : id\n");
    assert_eq!(ok(d.path(), &["equals", "prod.el", "idx.el"]), "equal\n");
}

#[test]
fn equal_representatives() {
    let d = workspace();
    assert_eq!(ok(d.path(), &["equals", "x.el", "x2.el"]), "equal\n");
    assert_eq!(ok(d.path(), &["equals", "x.el", "swap.el"]), "not equal\n");
}

#[test]
fn act_on_periodic_points() {
    let d = workspace();
    assert_eq!(ok(d.path(), &["act", "x.el", "0(10)"]), "0(01)\n");
    assert_eq!(ok(d.path(), &["act", "x.el", "1(10)"]), "1(10)\n");
    assert_eq!(ok(d.path(), &["act", "swap.el", "(0)"]), "1(0)\n");
}

#[test]
fn retract_and_pi_section_round_trip() {
    let d = workspace();
    assert_eq!(ok(d.path(), &["retract", "iota.el"]), "a\n");
    let image = ok(d.path(), &["pi", "x.el"]);
    assert!(image.starts_with("image z2.grp\n"));
    std::fs::write(d.path().join("img.el"), &image).unwrap();
    let lifted = ok(d.path(), &["section", "img.el"]);
    std::fs::write(d.path().join("lifted.el"), &lifted).unwrap();
    assert!(lifted.starts_with("group z2.grp\n"));
    // q is faithful here, so the section inverts pi
    assert_eq!(ok(d.path(), &["equals", "lifted.el", "x.el"]), "equal\n");
}

#[test]
fn group_paths_resolve_beside_the_element_file() {
    let d = workspace();
    let sub = d.path().join("sub");
    std::fs::create_dir(&sub).unwrap();
    std::fs::write(sub.join("y.el"), "group ../z2.grp\nmap 0 -> 1 : a\nmap 1 -> 0 : a\n").unwrap();
    let out = ok(d.path(), &["invert", "sub/y.el"]);
    assert!(out.starts_with("group ../z2.grp\n"), "{out}");
}

#[test]
fn input_errors_exit_two_with_a_position() {
    let d = workspace();
    std::fs::write(d.path().join("bad.el"), "group z2.grp\nmap 0 -> 1 : b\nmap 1 -> 0 : id\n").unwrap();
    let o = run(d.path(), &["reduce", "bad.el"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");

    std::fs::write(
        d.path().join("conflict.grp"),
        "d 2 N 2\ngen a = (0 1) ; q = (0 1)\ngen b = (0 1) ; q = ()\n",
    )
    .unwrap();
    let o = run(d.path(), &["--group", "conflict.grp", "axioms"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q is not well defined"));

    let o = run(d.path(), &["act", "x.el", "0(12)"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["reduce", "missing.el"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_exit_three() {
    let d = workspace();
    assert_eq!(run(d.path(), &["dlk", "--leaves", "12"]).status.code(), Some(3));
    assert_eq!(
        run(d.path(), &["--preset", "d2-z2", "stabilizer", "--leaves", "4", "--ball-limit", "10"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(d.path(), &["--preset", "d2-z2", "generate-check", "--radius", "3", "--ball-limit", "50"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(d.path(), &["--depth-limit", "2", "interval", "--tree", "0 10 11", "--expand", "10"]).status.code(),
        Some(3)
    );
}

#[test]
fn interval_of_three_carets_has_eight_vertices() {
    let d = workspace();
    let r = json(d.path(), &["interval", "--tree", "0 10 11", "--expand", "0,10,11"]);
    assert_eq!(r["vertex_count"], 8);
    assert_eq!(r["boolean"], true);
}

#[test]
fn incomparable_interval_is_an_input_error() {
    let d = workspace();
    let o = run(d.path(), &["interval", "--tree", "0 1", "--expand", "00"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stabilizer_of_one_caret_over_z2() {
    let d = workspace();
    let r = json(d.path(), &["--group", "z2.grp", "stabilizer", "--tree", "0 1"]);
    assert_eq!(r["count"], 8);
    assert_eq!(r["predicted"], 8);
}

#[test]
fn descending_links() {
    let d = workspace();
    let r = json(d.path(), &["dlk", "--leaves", "4"]);
    assert_eq!(r["target_betti"][0], 2);
    assert_eq!(r["complete_join"]["holds"], true);

    let r = json(d.path(), &["dlk", "--leaves", "6"]);
    assert_eq!(r["complete_join"]["holds"], true);
    assert_eq!(r["betti"][0], 0);
    assert_eq!(r["target_betti"][0], 0);

    let r = json(d.path(), &["--group", "z2.grp", "dlk", "--leaves", "5"]);
    assert_eq!(r["complete_join"]["holds"], true);
    assert_eq!(r["fiber_sizes"], serde_json::json!([4]));
}

#[test]
fn orbits_are_single() {
    let d = workspace();
    let r = json(d.path(), &["--preset", "d2-z2", "orbits", "--max-height", "2"]);
    assert_eq!(r["one_orbit_per_height"], true);
}

#[test]
fn homology_of_a_circle() {
    let d = workspace();
    std::fs::write(d.path().join("c.txt"), "# hollow triangle\n0 1\n1 2\n0 2\n").unwrap();
    let r = json(d.path(), &["homology", "c.txt"]);
    assert_eq!(r["betti"], serde_json::json!([0, 1]));
    std::fs::write(d.path().join("bad.txt"), "0 1\n1 x\n").unwrap();
    assert_eq!(run(d.path(), &["homology", "bad.txt"]).status.code(), Some(2));
}

fn without_time(s: &str) -> Value {
    let mut v: Value = serde_json::from_str(s).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn reports_are_reproducible() {
    let d = workspace();
    let args = ["--preset", "d3-sym3", "--seed", "7", "axioms", "--triples", "100", "--samples", "50"];
    let a = ok(d.path(), &args);
    let b = ok(d.path(), &args);
    assert_eq!(without_time(&a), without_time(&b));
    assert_eq!(without_time(&a)["all_passed"], true);

    let out = d.path().join("r.json");
    let o = run(d.path(), &["--group", "z2.grp", "--out", out.to_str().unwrap(), "generate-check", "--radius", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["all_reached"], true);
}
