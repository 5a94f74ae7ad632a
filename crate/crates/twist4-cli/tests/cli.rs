//! End-to-end tests of the binary: exit codes, report shape, determinism,
//! and the catalogue override.

use num::complex::Complex64;
use serde_json::Value;
use std::process::{Command, Output};

const MANIFOLD_ENV: &str = "TWIST4_MANIFOLDS";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twist4"));
    // Isolate tests from any ambient catalogue override.
    cmd.env_remove(MANIFOLD_ENV);
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_report(output: &Output) -> Value {
    let doc: Value =
        serde_json::from_slice(&output.stdout).expect("stdout is a JSON document");
    assert!(doc.get("command").is_some(), "envelope carries the command");
    assert!(
        doc.get("conventions")
            .and_then(|c| c.get("epsilon_degree"))
            .is_some(),
        "envelope carries the conventions block"
    );
    doc
}

#[test]
fn fact_hom_reports_the_round_sphere_shift() {
    let out = run(&["fact-hom", "--manifold", "S4", "--algebra", "sl2"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    let line = &doc["report"]["det_line"];
    assert_eq!(line["degree_shift"], -6);
    assert_eq!(line["degree_shift_from_table"], -6);
    assert_eq!(line["implementations_agree"], true);
    assert_eq!(line["parity_matches_chi"], true);
}

#[test]
fn anomaly_report_is_all_zero_for_sl2() {
    let out = run(&[
        "anomaly",
        "--algebra",
        "sl2",
        "--delta-degree",
        "1",
        "--vmax",
        "5",
        "--samples",
        "3",
    ]);
    assert!(out.status.success(), "exit 0 on a vanishing report");
    let doc = json_report(&out);
    assert_eq!(doc["report"]["anomaly"]["all_pass"], true);
    let rows = doc["report"]["anomaly"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r["weight"] == "0" && r["pass"] == true));
}

#[test]
fn cohomology_of_sl2_is_one_zero_zero_one() {
    let out = run(&["cohomology", "--algebra", "sl2"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    let dims = &doc["report"]["dims_by_degree"];
    assert_eq!(dims["0"], 1);
    assert_eq!(dims["1"], 0);
    assert_eq!(dims["2"], 0);
    assert_eq!(dims["3"], 1);
}

#[test]
fn unknown_names_exit_one_and_list_the_catalogue() {
    let out = run(&["cohomology", "--algebra", "nosuch"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("available"));
    assert!(stderr.contains("sl2"));

    let out = run(&["fact-hom", "--manifold", "nosuch", "--algebra", "sl2"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("available"));
    assert!(stderr.contains("S4"));
    assert!(stderr.contains("K3"));
}

#[test]
fn same_config_and_seed_give_byte_identical_json() {
    let args = [
        "anomaly", "--algebra", "sl2", "--vmax", "3", "--samples", "2", "--seed", "5",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let args = ["spectral", "--count", "3", "--seed", "9"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn catalogue_lists_the_shipped_names() {
    let out = run(&["catalogue"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    let report = &doc["report"];
    let algebras: Vec<&str> = report["algebras"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(algebras.contains(&"sl2"));
    let manifold_names: Vec<&str> = report["manifolds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert!(manifold_names.contains(&"T4"));
    assert_eq!(report["manifold_source"], "builtin");
}

#[test]
fn environment_variable_replaces_the_manifold_catalogue() {
    let path = std::env::temp_dir().join(format!("twist4-manifolds-{}.json", std::process::id()));
    let custom = serde_json::json!([{
        "name": "X4",
        "dim": 4,
        "flavor": "de-rham",
        "betti": [1, 0, 0, 0, 1],
        "chi": 2,
        "oriented": true,
        "closed": true
    }]);
    std::fs::write(&path, serde_json::to_string(&custom).unwrap()).unwrap();

    let out = bin()
        .env(MANIFOLD_ENV, &path)
        .args(["catalogue"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = doc["report"]["manifolds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["X4"]);
    assert_eq!(
        doc["report"]["manifold_source"],
        path.to_string_lossy().as_ref()
    );

    // The builtin names are gone under the override.
    let out = bin()
        .env(MANIFOLD_ENV, &path)
        .args(["fact-hom", "--manifold", "S4", "--algebra", "sl2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("X4"));

    // The replacement works end to end.
    let out = bin()
        .env(MANIFOLD_ENV, &path)
        .args(["fact-hom", "--manifold", "X4", "--algebra", "sl2"])
        .output()
        .unwrap();
    assert!(out.status.success());

    let _ = std::fs::remove_file(&path);
}

#[test]
fn quadrature_that_cannot_converge_exits_two() {
    let out = run(&[
        "propagator",
        "--z",
        "1.0,0.0",
        "--w",
        "0.0,0.0",
        "--tol",
        "1e-30",
        "--max-refinements",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("internal check failure"));
}

#[test]
fn propagator_matches_the_cauchy_kernel_in_one_dimension() {
    let z = Complex64::new(0.7, 0.3);
    let w = Complex64::new(-0.2, 0.1);
    let r_squared = (z - w).norm_sqr();
    let lambda = format!("{}", 1.0e6 * r_squared);
    let out = run(&[
        "propagator",
        "--dim",
        "1",
        "--z",
        "0.7,0.3",
        "--w",
        "-0.2,0.1",
        "--lambda",
        &lambda,
    ]);
    assert!(out.status.success());
    let doc = json_report(&out);
    let component = &doc["report"]["components"][0]["value"];
    let got = Complex64::new(
        component["re"].as_f64().unwrap(),
        component["im"].as_f64().unwrap(),
    );
    let exact = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (z - w)).inv();
    assert!(
        (got - exact).norm() < 1e-6,
        "difference {:e}",
        (got - exact).norm()
    );
}

#[test]
fn table_format_renders_text() {
    let out = run(&["cohomology", "--algebra", "sl2", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("dims_by_degree"));
    assert!(text.contains("epsilon_degree: -1"));
    assert!(serde_json::from_str::<Value>(&text).is_err(), "table is not JSON");
}

#[test]
fn axiom_suite_passes_for_a_preset() {
    let out = run(&["check-axioms", "--algebra", "sl2"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    assert_eq!(doc["report"]["all_pass"], true);
    let targets = doc["report"]["targets"].as_array().unwrap();
    // Base algebra, odd extension, and the one-parameter family member.
    assert_eq!(targets.len(), 3);
}

#[test]
fn compactification_check_passes_for_the_three_sphere() {
    let out = run(&[
        "compactify",
        "--manifold",
        "S3",
        "--algebra",
        "abelian:1",
        "--cap",
        "3",
    ]);
    assert!(out.status.success());
    let doc = json_report(&out);
    assert_eq!(doc["report"]["check"]["all_pass"], true);
    assert_eq!(doc["report"]["source"], "abelian-weyl");
}

#[test]
fn shipped_schemas_parse_and_match_the_emitted_envelope() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let mut schemas = std::collections::BTreeMap::new();
    for name in [
        "manifold-catalogue.schema.json",
        "interaction-graph.schema.json",
        "report-envelope.schema.json",
    ] {
        let text = std::fs::read_to_string(dir.join(name)).expect("schema file ships");
        let schema: Value = serde_json::from_str(&text).expect("schema is valid JSON");
        assert!(schema["$schema"].is_string());
        schemas.insert(name, schema);
    }
    // A real envelope satisfies the envelope schema's required keys and
    // command enumeration.
    let out = run(&["catalogue"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let envelope = &schemas["report-envelope.schema.json"];
    for key in envelope["required"].as_array().unwrap() {
        assert!(
            doc.get(key.as_str().unwrap()).is_some(),
            "envelope is missing required key {key}"
        );
    }
    let commands = envelope["properties"]["command"]["enum"].as_array().unwrap();
    assert!(commands.contains(&doc["command"]));
    // The embedded catalogue file satisfies the manifold schema's required
    // keys and declares no properties the schema does not know.
    let catalogue_schema = &schemas["manifold-catalogue.schema.json"];
    let spec = &catalogue_schema["$defs"]["manifold"];
    let required = spec["required"].as_array().unwrap();
    let known = spec["properties"].as_object().unwrap();
    let data_path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../twist4/data/manifolds.json");
    let catalogue: Value =
        serde_json::from_str(&std::fs::read_to_string(data_path).unwrap()).unwrap();
    for manifold in catalogue.as_array().unwrap() {
        for key in required {
            assert!(
                manifold.get(key.as_str().unwrap()).is_some(),
                "{} is missing required key {key}",
                manifold["name"]
            );
        }
        for key in manifold.as_object().unwrap().keys() {
            assert!(known.contains_key(key), "schema does not describe {key}");
        }
    }
}

#[test]
fn graph_file_is_read_and_classified() {
    let path = std::env::temp_dir().join(format!("twist4-graph-{}.json", std::process::id()));
    let wheel = serde_json::json!({
        "vertices": 6,
        "external": [3, 4, 5],
        "edges": [[0, 1], [1, 2], [2, 0], [0, 3], [1, 4], [2, 5]]
    });
    std::fs::write(&path, serde_json::to_string(&wheel).unwrap()).unwrap();
    let out = run(&[
        "anomaly",
        "--algebra",
        "sl2",
        "--vmax",
        "2",
        "--samples",
        "1",
        "--graph-file",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc = json_report(&out);
    assert_eq!(doc["report"]["graph"]["class"]["class"], "wheel-with-trees");
    assert_eq!(doc["report"]["graph"]["class"]["loop_length"], 3);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn vacuum_flows_report_breaking_and_comparison() {
    let out = run(&["vacua", "--algebra", "gl2"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    assert!(doc["report"]["catalogue"].as_array().unwrap().len() >= 2);

    let out = run(&["vacua", "--algebra", "gl2", "--vacuum", "1,0,0,2"]);
    assert!(out.status.success());
    let doc = json_report(&out);
    assert_eq!(doc["report"]["breaking"]["dims_add"], true);
    assert_eq!(doc["report"]["breaking"]["perp_identity"], true);
    assert!(doc["report"]["broken_theory"]["dims_match"] != false);
}

#[test]
fn twist_grid_without_an_algebra_uses_a_catalogued_default() {
    // The grid needs a vacuum catalogue; without --algebra it must fall
    // back to an algebra that has one rather than the first preset name.
    let out = run(&["check-axioms", "--twist-grid"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_report(&out);
    let targets = doc["report"]["targets"].as_array().unwrap();
    assert!(targets.iter().all(|t| t["passed"] == true));
}

#[test]
fn closing_the_output_pipe_early_exits_quietly() {
    use std::io::Read;
    use std::process::Stdio;

    // A report larger than the pipe buffer, so the writer genuinely hits
    // a closed pipe when the reader stops after one byte.
    let mut child = bin()
        .args(["anomaly", "--algebra", "gl3", "--vmax", "6", "--samples", "100"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    let mut stdout = child.stdout.take().unwrap();
    let mut byte = [0u8; 1];
    stdout.read_exact(&mut byte).expect("first byte arrives");
    drop(stdout);
    let status = child.wait().expect("binary exits");
    let mut stderr = String::new();
    child
        .stderr
        .take()
        .unwrap()
        .read_to_string(&mut stderr)
        .unwrap();
    assert!(status.success(), "stderr: {stderr}");
    assert!(
        !stderr.contains("panicked"),
        "broken pipe must not panic: {stderr}"
    );
}
