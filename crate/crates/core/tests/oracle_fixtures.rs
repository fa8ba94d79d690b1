use std::path::PathBuf;

use quasirelax::integrand::{Integrand, IntegrandSpec};
use quasirelax::matspace::{Mat, RankOneDir};
use quasirelax::oracle::{brute_envelope_segment, fixtures, fixtures_json, load_fixtures};

fn committed() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.json")
}

#[test]
fn regeneration_is_byte_identical() {
    let text = std::fs::read_to_string(committed()).unwrap();
    assert_eq!(fixtures_json(&fixtures().unwrap()).unwrap(), text);
}

#[test]
fn committed_records_load() {
    let records = load_fixtures(&committed()).unwrap();
    let names: Vec<&str> = records.iter().map(|r| r.name.as_str()).collect();
    for want in ["ks-segment", "ks-segment-fine", "dw-well-line", "dw-one-node", "ks-one-node", "quad-one-node"] {
        assert!(names.contains(&want), "missing {want}");
    }
    for r in &records {
        assert!(r.value.is_finite(), "{} is infinite", r.name);
    }
}

#[test]
fn segment_depth_is_idempotent_and_below_w() {
    let cases = [
        (IntegrandSpec::kohn_strang(2, 2).unwrap(), Mat::diag(&[0.5, 0.0])),
        (IntegrandSpec::symmetric_double_well(2, 2, 2.0).unwrap(), Mat::diag(&[0.3, -0.4])),
        (IntegrandSpec::wdc_capped(2, 2.0, 0.3).unwrap(), Mat::diag(&[0.5, -0.5])),
    ];
    let dir = RankOneDir::from_lattice(vec![1, 1], vec![1, 0]).unwrap();
    for (w, f) in &cases {
        let one = brute_envelope_segment(w, f, &dir, 2.0, 41, 1).unwrap();
        let three = brute_envelope_segment(w, f, &dir, 2.0, 41, 3).unwrap();
        assert!((one.value() - three.value()).abs() <= 1e-12, "{one} vs {three}");
        assert!(one <= w.eval(f).unwrap());
    }
}
