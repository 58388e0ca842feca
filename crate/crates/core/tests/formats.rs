//! Chart and catalogue files.

use hetsol_core::chartfield::{packets, ChartGeometry};
use hetsol_core::homgeo::{lie_geometry, Catalogue};
use hetsol_core::sample;
use hetsol_core::{Error, Rational, Scalar};

#[test]
fn random_charts_survive_a_json_round_trip() {
    let mut rng = sample::rng(41);
    for _ in 0..10 {
        let chart = sample::rational_function_chart(&mut rng);
        let text = chart.to_json().to_string();
        let back = ChartGeometry::from_json_str(&text).unwrap();
        assert_eq!(back, chart);
        let p = sample::ball_point(&mut rng);
        let (a, _) = packets::<Rational>(&chart, &p).unwrap();
        let (b, _) = packets::<Rational>(&back, &p).unwrap();
        assert_eq!(a.ric, b.ric);
        assert_eq!(a.s, b.s);
    }
}

#[test]
fn custom_catalogue_with_a_scaled_metric() {
    let text = r#"{"schema": 1, "families": [{
        "name": "hyperbolic-wide",
        "brackets": [[1, 2, 2, "1"], [1, 3, 3, "1"]],
        "metric": ["4", "4", "4"],
        "bounds": {"a": [0.1, 4.0], "e2phi": [0.1, 100.0]}
    }]}"#;
    let cat = Catalogue::from_json_str(text).unwrap();
    assert_eq!(cat.names(), vec!["hyperbolic-wide"]);
    // Curvature -a^2/4 on the metric 4 I, so s = -6 at a = 2.
    let (geo, _) = lie_geometry(cat.get("hyperbolic-wide").unwrap(), &Rational::from_i64(2), None).unwrap();
    assert_eq!(geo.s, Rational::from_i64(-6));
}

#[test]
fn catalogue_errors_are_specific() {
    let jacobi = r#"{"schema": 1, "families": [{
        "name": "broken", "brackets": [[1, 2, 3, "1"], [2, 3, 2, "1"]],
        "metric": ["1", "1", "1"], "bounds": {"a": [0.1, 4.0], "e2phi": [0.1, 100.0]}
    }]}"#;
    let err = Catalogue::from_json_str(jacobi).unwrap_err();
    assert!(matches!(err, Error::JacobiViolated(_)) || err.to_string().contains("Jacobi"), "{err}");
    let degenerate = r#"{"schema": 1, "families": [{
        "name": "flat", "brackets": [], "metric": ["1", "0", "1"],
        "bounds": {"a": [0.1, 4.0], "e2phi": [0.1, 100.0]}
    }]}"#;
    assert!(Catalogue::from_json_str(degenerate).is_err());
    assert!(Catalogue::from_json_str(r#"{"schema": 2, "families": []}"#).is_err());
}
