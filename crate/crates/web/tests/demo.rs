use serde_json::Value;

use flowsep::systems::CATALOG_NAMES;
use flowsep_web::{catalog_json, classify_json, closeness_json, orbits_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn psi_orbit_closes_faster_on_the_outer_ring() {
    let v = parse(&orbits_json(2.0, 0.0, std::f64::consts::PI, 4).unwrap());
    let psi = v["annulus-psi"].as_array().unwrap();
    let end = psi.last().unwrap();
    assert!((end[0].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert_eq!(v["annulus-phi"].as_array().unwrap().len(), 5);
    assert!(orbits_json(0.5, 0.0, 1.0, 4).is_err());
}

#[test]
fn closeness_of_radial_neighbours() {
    let v = parse(
        &closeness_json(
            "annulus-psi",
            "annulus(1.0,0.0)",
            "annulus(1.2,0.0)",
            5.0,
            50,
        )
        .unwrap(),
    );
    assert_eq!(v["t"].as_array().unwrap().len(), 51);
    assert!(v["sup"].as_f64().unwrap() > 0.2);
    assert!(closeness_json("shift-map", "annulus(1.0,0.0)", "annulus(1.0,0.0)", 1.0, 2).is_err());
}

#[test]
fn classify_reports_a_witness() {
    let out = classify_json(
        "annulus-psi",
        "separating",
        r#"{"delta": 0.3, "horizon": 200, "dt": 0.02, "grid": 6}"#,
    )
    .unwrap();
    let v = parse(&out);
    assert_eq!(v["kind"], "violated");
    assert!(v["witness"]
        .as_str()
        .unwrap()
        .starts_with("flowsep-witness v1"));
    assert!(classify_json("annulus-psi", "separating", r#"{"bogus": 1}"#).is_err());
}

#[test]
fn catalog_lists_every_system() {
    assert_eq!(
        parse(&catalog_json()).as_array().unwrap().len(),
        CATALOG_NAMES.len()
    );
}
