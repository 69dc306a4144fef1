use contextua_demo::{homology, noise_curve, reduce};

#[test]
fn noise_curve_ends_at_the_pr_box() {
    let v = noise_curve(4).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert_eq!(points[0]["exact"]["cf"], "0");
    assert_eq!(points[2]["exact"]["cf"], "0");
    assert_eq!(points[4]["exact"]["cf"], "1");
    assert_eq!(points[4]["exact"]["negativity"], "1");
}

#[test]
fn four_cycle_does_not_reduce() {
    let v = reduce(r#"[["a", "b"], ["b", "c"], ["c", "d"], ["d", "a"]]"#).unwrap();
    assert_eq!(v["acyclic"], false);
    let v = reduce(r#"[["a", "b"], ["b", "c"]]"#).unwrap();
    assert_eq!(v["acyclic"], true);
}

#[test]
fn hollow_triangle_has_one_loop() {
    let v = homology("[[0, 1], [1, 2], [0, 2]]").unwrap();
    assert_eq!(v["groups"][1]["betti"], 1);
    assert_eq!(v["euler_characteristic"], 0);
}

#[test]
fn bad_input_is_an_error() {
    assert!(homology("[[0, 1").is_err());
    assert!(reduce("{}").is_err());
}
