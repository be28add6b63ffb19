#![cfg(feature = "server")]

use std::collections::BTreeSet;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use sdc_core::api::{router, ApiConfig};
use sdc_core::scenario::{preset_scenario, run, Analysis, Scenario};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(ApiConfig::default()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).expect("JSON body"))
}

fn field(body: &Value) -> &str {
    body["errors"][0]["field"].as_str().unwrap()
}

fn ring(sun: [f64; 3], horizon_periods: f64) -> Value {
    let period = sdc_core::astro::orbital_period(550.0).unwrap();
    json!({
        "constellation": { "planes": 1, "sats_per_plane": 10 },
        "sun": { "model": "fixed", "direction": sun },
        "time": { "horizon_s": horizon_periods * period, "step_s": 10.0 },
    })
}

#[tokio::test]
async fn forecast_reproduces_first_design() {
    let (status, body) = call("POST", "/api/forecast", Some(json!({ "design": { "year": 2032, "total_power_w": 500.0 } }))).await;
    assert_eq!(status, StatusCode::OK);
    let f = &body["forecast"];
    for (key, want) in [
        ("available_compute_tflops", 1.14),
        ("satellite_mass_kg", 16.0),
        ("compute_efficiency_w_per_tflops", 0.44),
        ("cost_of_power_eur_per_w", 99.0),
        ("cost_of_compute_eur_per_tflops", 43504.0),
    ] {
        let got = f[key].as_f64().unwrap();
        assert!((got / want - 1.0).abs() <= 0.05, "{key}: {got} vs {want}");
    }
    assert_eq!(body["errors"], json!([]));
    assert!(body["workload"].is_null());
}

#[tokio::test]
async fn forecast_with_workload_reports_requirement() {
    let req = json!({ "design": { "year": 2032, "total_power_w": 500.0 }, "workload": { "preset": "uc1" } });
    let (status, body) = call("POST", "/api/forecast", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    let required = body["forecast"]["required_compute_tflops"].as_f64().unwrap();
    assert!((required - 0.2283).abs() < 1e-3);
    assert_eq!(body["forecast"]["shortfall"], json!(false));
    assert_eq!(body["workload"]["streams"][0]["stream"], "imaging");
}

#[tokio::test]
async fn invalid_inputs_name_the_field() {
    let (status, body) = call("POST", "/api/forecast", Some(json!({ "design": { "year": 2032, "total_power_w": 0.0 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "design.total_power_w");

    let (status, body) = call("POST", "/api/forecast", Some(json!({ "design": { "year": "soon", "total_power_w": 5.0 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "design.year");

    let (status, body) = call("POST", "/api/forecast", Some(json!({ "design": { "year": 2032, "total_power_w": 5.0 }, "extra": 1 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["errors"][0]["message"].as_str().unwrap().contains("extra"));

    let req = Request::builder().method("POST").uri("/api/forecast").body(Body::from("{not json")).unwrap();
    let resp = router(ApiConfig::default()).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn year_outside_roadmap_is_unprocessable() {
    let (status, body) = call("POST", "/api/forecast", Some(json!({ "design": { "year": 2100, "total_power_w": 500.0 } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(field(&body), "design.year");
}

#[tokio::test]
async fn identical_requests_give_identical_bodies() {
    let req = json!({ "design": { "year": 2040, "total_power_w": 300.0, "destination": "lunar_surface" }, "workload": { "preset": "uc3" } });
    let a = call("POST", "/api/forecast", Some(req.clone())).await;
    let b = call("POST", "/api/forecast", Some(req)).await;
    assert_eq!(a, b);
    let a = call("POST", "/api/network/summary", Some(ring([1.0, 0.0, 0.0], 1.0))).await;
    let b = call("POST", "/api/network/summary", Some(ring([1.0, 0.0, 0.0], 1.0))).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn sun_in_plane_gives_one_sixth_outage() {
    let (status, body) = call("POST", "/api/network/summary", Some(ring([1.0, 0.0, 0.0], 1.0))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let rows = body["outage"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let f = r["outage_fraction"].as_f64().unwrap();
        assert!((f - 1.0 / 6.0).abs() < 0.01, "{}: {f}", r["link_id"]);
    }
    assert_eq!(body["snapshots"]["nodes"], 10);
    assert_eq!(body["snapshots"]["count"], 573);
    assert_eq!(body["content_hash"].as_str().unwrap().len(), 64);
}

#[tokio::test]
async fn sun_normal_to_plane_gives_no_outage() {
    let (si, ci) = 53f64.to_radians().sin_cos();
    let (status, body) = call("POST", "/api/network/summary", Some(ring([0.0, -si, ci], 1.0))).await;
    assert_eq!(status, StatusCode::OK);
    for r in body["outage"]["rows"].as_array().unwrap() {
        assert_eq!(r["outage_fraction"], 0.0, "{}", r["link_id"]);
        assert_eq!(r["max_outage_s"], 0.0);
    }
    assert_eq!(body["routing"]["pairs"][0]["unreachable_fraction"], 0.0);
    assert_eq!(body["snapshots"]["connected_fraction"], 1.0);
}

#[tokio::test]
async fn single_satellite_has_empty_tables() {
    let req = json!({ "constellation": { "planes": 1, "sats_per_plane": 1 } });
    let (status, body) = call("POST", "/api/network/summary", Some(req)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["outage"]["rows"], json!([]));
    assert_eq!(body["routing"]["pairs"], json!([]));
    assert_eq!(body["snapshots"]["nodes"], 1);
}

#[tokio::test]
async fn horizon_cap_is_enforced() {
    let (status, body) = call("POST", "/api/network/summary", Some(ring([1.0, 0.0, 0.0], 3.0))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(field(&body), "time.horizon_s");

    let (status, body) = call("POST", "/api/network/summary", Some(json!({ "time": { "step_s": -1.0 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "time.step_s");
}

#[tokio::test]
async fn presets_and_roadmaps() {
    let (status, body) = call("GET", "/api/presets", None).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = body["presets"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    for n in ["uc1", "uc2", "uc3"] {
        assert!(names.contains(&n), "{names:?}");
    }
    assert_eq!(body["presets"][0]["scenario"]["design"]["year"], 2032);

    let (status, body) = call("GET", "/api/roadmaps", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["valid_years"], json!([2024, 2060]));
    let eff = body["roadmaps"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["metric"] == "compute_efficiency_w_per_tflops")
        .expect("efficiency curve");
    assert_eq!(eff["curve"]["ref_year"], 2032);
    assert!((eff["curve"]["ref_value"].as_f64().unwrap() - 0.44).abs() < 0.01);
}

#[tokio::test]
async fn unknown_routes_are_json_404() {
    for (method, path) in [("GET", "/api/nope"), ("POST", "/api/forecast/extra"), ("GET", "/elsewhere")] {
        let (status, body) = call(method, path, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{path}");
        assert!(body["errors"][0]["message"].as_str().unwrap().contains(path));
    }
}

#[tokio::test]
async fn api_numbers_match_the_library_run() {
    let design = preset_scenario("uc1").unwrap().design.unwrap();
    let (_, body) = call("POST", "/api/forecast", Some(json!({ "design": design, "workload": { "preset": "uc1" } }))).await;
    let mut s = preset_scenario("uc1").unwrap();
    s.analyses = BTreeSet::from([Analysis::Workload, Analysis::Forecast]);
    let report = run(&s).unwrap();
    assert_eq!(body["forecast"], serde_json::to_value(&report.forecast).unwrap());
    assert_eq!(body["workload"], serde_json::to_value(&report.workload).unwrap());

    let req = ring([1.0, 0.0, 0.0], 1.0);
    let (_, body) = call("POST", "/api/network/summary", Some(req.clone())).await;
    let mut frag = req;
    frag["analyses"] = json!(["topology", "outage", "routing"]);
    let s: Scenario = sdc_core::scenario::parse_scenario(&frag.to_string()).unwrap();
    let report = run(&s).unwrap();
    assert_eq!(body["content_hash"], report.content_hash);
    assert_eq!(body["outage"], serde_json::to_value(&report.outage).unwrap());
}
