use metalift_demo::{decide_json, info_json, lift_json};

#[test]
fn info_of_example_group() {
    let v = info_json(5, 2, 4, 7).unwrap();
    assert_eq!(v["a0"], 1);
    assert_eq!(v["zeta_m"], "2");
    assert!(info_json(6, 1, 1, 1).is_err());
}

#[test]
fn decide_verdicts() {
    assert_eq!(decide_json(5, 2, 4, 7, "1:2,3:2", false).unwrap()["liftable"], true);
    let no = decide_json(5, 2, 4, 7, "1:2,1:2", false).unwrap();
    assert_eq!(no["liftable"], false);
    assert!(no["reason"].is_string());
    assert!(decide_json(5, 2, 4, 7, "1:99", false).is_err());
}

#[test]
fn lift_worked_example() {
    let v = lift_json(5, 2, 4, 7, "1:2,3:2", 8, 2).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["Gamma_reduced"][0][0], "2");
    assert_eq!(v["T_reduced"][1][0], "1");
    // subdiagonal (1, t, 1): the middle entry has valuation 1
    assert_eq!(v["T_valuation"][2][1], 1);
    assert_eq!(v["T_valuation"][1][0], 0);
    assert!(v["T_valuation"][0][1].is_null());
}
