use efimov_lab::cli::run;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("efimov-lab").chain(args.iter().copied()).map(String::from).collect()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out, err) = run(&argv(&a));
    assert!(err.is_empty() || code != 0, "stderr: {err}");
    (code, serde_json::from_str(&out).unwrap_or(serde_json::Value::Null))
}

fn check_value(doc: &serde_json::Value, name: &str) -> f64 {
    doc["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()["values"][0].as_f64().unwrap()
}

#[test]
fn efimov_triple_is_excluded() {
    let (code, doc) = json(&["check-hypothesis", "--k1", "-1", "--k2", "0", "--k3", "0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["details"]["excluded"], true);
    assert_eq!(check_value(&doc, "margin"), 16.0);
}

#[test]
fn g_lambda_verify_has_six_passing_entries() {
    let (code, doc) = json(&["example", "verify", "g_lambda", "--param", "lambda=1"]);
    assert_eq!(code, 0);
    let fields = doc["details"]["fields"].as_array().unwrap();
    assert_eq!(fields.len(), 6);
    assert!(fields.iter().all(|f| f["pass"] == true));
}

#[test]
fn edo_header_matches_closed_form() {
    let (code, doc) = json(&["edo", "--u", "0", "--eps", "1", "--step", "1e-4"]);
    assert_eq!(code, 0);
    let s0 = doc["details"]["s0"].as_f64().unwrap();
    let s1 = doc["details"]["s1"].as_f64().unwrap();
    assert!((s0 - 2.651635).abs() < 1e-6, "{s0}");
    assert!((s1 - 2.896614).abs() < 1e-6, "{s1}");
    assert!(doc["details"]["M0"].as_f64().unwrap() >= 1.0);
}

#[test]
fn edo_accepts_expressions_in_s() {
    let (code, _) = json(&["edo", "--u", "0.3*sin(2*s) - 0.1", "--eps", "0.5"]);
    assert_eq!(code, 0);
}

#[test]
fn usage_errors_exit_two() {
    let (code, out, err) = run(&argv(&["check-hypothesis", "--k1", "-1", "--k2", "0", "--k3", "0", "--bogus"]));
    assert_eq!(code, 2);
    assert!(out.is_empty() && !err.is_empty());
    assert_eq!(run(&argv(&["no-such-command"])).0, 2);
    assert_eq!(run(&argv(&["check-hypothesis", "--k1", "1", "--k2", "0", "--k3", "0"])).0, 2);
    assert_eq!(run(&argv(&["example", "verify", "g_lambda", "--param", "mu=1"])).0, 2);
}

#[test]
fn help_lists_every_subcommand() {
    let (code, out, _) = run(&argv(&["--help"]));
    assert_eq!(code, 0);
    for sub in ["check-hypothesis", "curvature-report", "geodesic", "transport", "jacobi", "gauss-bonnet", "asymptotic", "net-check", "edo", "edo7", "example"] {
        assert!(out.contains(sub), "missing {sub}");
    }
}

#[test]
fn reports_are_deterministic() {
    let a = ["geodesic", "--example", "hyperbolic2", "--start", "0,0", "--direction", "1,1", "--length", "0.8", "--json"];
    let (c1, o1, _) = run(&argv(&a));
    let (c2, o2, _) = run(&argv(&a));
    assert_eq!(c1, 0);
    assert_eq!((c1, o1.clone()), (c2, o2));
    let doc: serde_json::Value = serde_json::from_str(&o1).unwrap();
    assert_eq!(doc["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn digest_tracks_the_inputs() {
    let d = |k3: &str| json(&["check-hypothesis", "--k1", "-1", "--k2", "0", "--k3", k3]).1["digest"].clone();
    assert_ne!(d("0"), d("0.5"));
    assert_eq!(d("0.5"), d("0.5"));
}

#[test]
fn metric_file_with_division_by_zero_reports_the_point() {
    let dir = std::env::temp_dir().join(format!("efimov-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.metric");
    std::fs::write(&path, "g11 = 1 / u\ng22 = 1\ng33 = 1\nrange u = -1, 1\nrange v = -1, 1\nrange w = -1, 1\n").unwrap();
    let (code, _, err) = run(&argv(&["curvature-report", "--metric", path.to_str().unwrap(), "--grid", "-0.5:0.5:3,0:0:1,0:0:1"]));
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("division by zero"), "{err}");
    assert!(err.contains('0'), "{err}");

    let good = dir.join("half_space.metric");
    std::fs::write(&good, "g11 = 1 / w^2\ng22 = 1 / w^2\ng33 = 1 / w^2\nrange w = 0.5, 2\n").unwrap();
    let (code, doc) = json(&["curvature-report", "--metric", good.to_str().unwrap(), "--grid", "-0.5:0.5:3,-0.5:0.5:3,0.8:1.5:3"]);
    assert_eq!(code, 0);
    assert!((check_value(&doc, "K_m (min over grid)") + 1.0).abs() < 1e-6);
    assert!((check_value(&doc, "K_M (max over grid)") + 1.0).abs() < 1e-6);
}

#[test]
fn csv_traces_round_trip() {
    let dir = std::env::temp_dir().join(format!("efimov-lab-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.csv");
    let (code, _, err) = run(&argv(&["edo", "--u", "0", "--eps", "1", "--csv", path.to_str().unwrap()]));
    assert_eq!(code, 0, "{err}");
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["s", "y", "z"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert!(rows.len() > 100);
    for row in rows.iter().take(50) {
        for field in row.iter() {
            let v: f64 = field.parse().unwrap();
            assert_eq!(efimov_lab::report::fmt_f64(v), field);
        }
    }
}

#[test]
fn gauss_bonnet_region_file() {
    let dir = std::env::temp_dir().join(format!("efimov-lab-gb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cap.json");
    std::fs::write(&path, r#"{"boundary": [{"kind": "arc", "center": [0, 0], "radius": 0.5, "start": 0, "end": 6.283185307179586}], "center": [0, 0]}"#).unwrap();
    let (code, doc) = json(&["gauss-bonnet", "--example", "sphere2", "--region", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(check_value(&doc, "gauss-bonnet residual") < 1e-8);

    let open = dir.join("open.json");
    std::fs::write(&open, r#"{"boundary": [{"kind": "line", "from": [0, 0], "to": [0.3, 0]}], "center": [0.1, 0.05]}"#).unwrap();
    let (code, _, err) = run(&argv(&["gauss-bonnet", "--example", "sphere2", "--region", open.to_str().unwrap()]));
    assert_eq!(code, 1);
    assert!(err.contains("does not close"), "{err}");

    let (code, _, _) = run(&argv(&["gauss-bonnet", "--example", "sphere2", "--region", "/nonexistent/region.json"]));
    assert_eq!(code, 2);
}

#[test]
fn failed_check_exits_one() {
    // the geodesic leaves the stereographic chart before the requested length
    let (code, doc) = json(&["geodesic", "--example", "sphere2", "--start", "0,0", "--direction", "1,0", "--length", "6.3"]);
    assert_eq!(code, 1);
    assert_eq!(doc["pass"], false);
}

#[test]
fn trace_commands_run() {
    let cases: [&[&str]; 6] = [
        &["transport", "--example", "saddle", "--start", "0,0", "--direction", "1,1", "--length", "0.5", "--vector", "0,1"],
        &["jacobi", "--example", "hyperbolic_polar", "--start", "1,0", "--direction", "0,1", "--length", "1"],
        &["asymptotic", "--example", "saddle", "--which", "V", "--start", "0,0.1", "--length", "0.5"],
        &["net-check", "--example", "saddle", "--start", "0,0", "--lu", "0.3", "--lv", "0.3"],
        &["edo7", "--u", "0.5", "--eps", "0.5", "--n1", "1"],
        &["example", "verify", "clifford_torus"],
    ];
    for a in cases {
        let (code, doc) = json(a);
        assert_eq!(code, 0, "{a:?}: {doc}");
    }
}

#[test]
fn example_list_names_the_gallery() {
    let (code, out, _) = run(&argv(&["example", "list"]));
    assert_eq!(code, 0);
    for name in ["g_lambda", "hyperbolic_deformed", "clifford_torus", "pseudosphere"] {
        assert!(out.contains(name), "{name} missing from:\n{out}");
    }
}
