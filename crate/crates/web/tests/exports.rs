use hslab_web::{block_spectrum_json, sweep_json, weak_sample_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn s3_single_copy_spectrum() {
    let v = parse(&block_spectrum_json("S3", 1).unwrap());
    assert_eq!(v["group"], "S3");
    // averaged single copy: trivial block has eigenvalue 2, the others are identities
    let total: u64 = v["spectrum"].as_array().unwrap().iter().map(|c| c["multiplicity"].as_u64().unwrap()).sum();
    assert_eq!(total, 12);
    let zeros: u64 = v["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["value"] == "0.00000000000000e0")
        .map(|c| c["multiplicity"].as_u64().unwrap())
        .sum();
    assert_eq!(v["rank"].as_u64().unwrap(), total - zeros);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 3);
    let trivial = &v["blocks"][0]["eigenvalues"];
    assert_eq!(trivial[0]["value"], "2.00000000000000e0");
}

#[test]
fn rank_matches_closed_form_when_known() {
    for (g, k) in [("Z4", 2), ("S3", 2), ("Z2xZ2", 3)] {
        let v = parse(&block_spectrum_json(g, k).unwrap());
        if let Some(c) = v["closed_form_rank"].as_u64() {
            assert_eq!(v["rank"].as_u64().unwrap(), c, "{g} k={k}");
        }
    }
}

#[test]
fn weak_sampling_is_plancherel() {
    let v = parse(&weak_sample_json("S4", 5).unwrap());
    let dims = [1.0, 3.0, 2.0, 3.0, 1.0];
    let plan: Vec<f64> = v["plancherel"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let mut sorted_expected: Vec<f64> = dims.iter().map(|d| d * d / 24.0).collect();
    let mut sorted_plan = plan.clone();
    sorted_expected.sort_by(f64::total_cmp);
    sorted_plan.sort_by(f64::total_cmp);
    for (a, b) in sorted_plan.iter().zip(&sorted_expected) {
        assert!((a - b).abs() < 1e-15);
    }
    for key in ["mixed", "fixed"] {
        for (p, q) in v[key].as_array().unwrap().iter().zip(&plan) {
            assert!((p.as_f64().unwrap() - q).abs() < 1e-12, "{key}");
        }
    }
    assert!(v["tv_fixed"].as_f64().unwrap() < 1e-12);
}

#[test]
fn sweep_is_seeded() {
    let a = sweep_json("S3", 40, 7).unwrap();
    let b = sweep_json("S3", 40, 7).unwrap();
    assert_eq!(a, b);
    let v = parse(&a);
    let tv = v["tv"].as_array().unwrap();
    assert_eq!(tv.len(), 40);
    assert!(tv.iter().all(|t| (0.0..=1.0).contains(&t.as_f64().unwrap())));
}

#[test]
fn bad_input_is_an_error_string() {
    assert!(block_spectrum_json("Q8", 1).is_err());
    assert!(block_spectrum_json("S3", 0).is_err());
    assert!(block_spectrum_json("S6", 1).unwrap_err().contains("demo limit"));
    assert!(block_spectrum_json("S5", 3).is_err());
    assert!(weak_sample_json("S3", 6).is_err());
    assert!(sweep_json("Z4", 10, 0).is_err());
    assert!(sweep_json("S3", 0, 0).is_err());
}
