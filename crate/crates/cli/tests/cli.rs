use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use iqhall::scalars::{rat, QSqrt};

fn quiver(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../quivers")
        .join(name)
}

/// Runs `iq` with a private cache directory; returns exit code, parsed stdout and raw stdout.
fn iq(args: &[&str], cache: &Path) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_iq"))
        .args(args)
        .env("IQHALL_CACHE_DIR", cache)
        .output()
        .expect("binary runs");
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, text)
}

fn q(path: &str) -> String {
    quiver(path).to_str().unwrap().to_string()
}

fn coeff_str(result: &Value, x: &Value, alpha: &Value) -> Option<String> {
    result["terms"]
        .as_array()?
        .iter()
        .find(|t| &t["X"] == x && &t["alpha"] == alpha)
        .map(|t| t["coeff_str"].as_str().unwrap().to_string())
}

#[test]
fn validate_echoes_normalized_quiver() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = iq(&["validate", &q("a3tau.json")], dir.path());
    assert_eq!(code, 0);
    assert_eq!(v["tool"], "iq");
    assert_eq!(v["result"]["tau"]["1"], "3");
    assert_eq!(v["result"]["itau_reps"], serde_json::json!(["1", "2"]));
    assert_eq!(v["result"]["dynkin_type"], "A_3");
    assert_eq!(v["result"]["split"], false);
}

#[test]
fn algebra_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    for (file, dim) in [
        ("a2split.json", 6),
        ("a3tau.json", 10),
        ("swap.json", 4),
        ("d4split.json", 14),
    ] {
        let (code, v, _) = iq(&["algebra", &q(file)], dir.path());
        assert_eq!(code, 0);
        assert_eq!(v["result"]["dim"], dim, "{file}");
        assert_eq!(
            v["result"]["dim"],
            2 * v["result"]["paths_of_q"].as_u64().unwrap()
        );
    }
}

#[test]
fn rank2_report_has_five_passing_entries() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = iq(&["verify", "rank2", "--q", "2"], dir.path());
    assert_eq!(code, 0);
    let rels = v["result"]["relations"].as_array().unwrap();
    assert_eq!(rels.len(), 5);
    assert!(rels.iter().all(|r| r["pass"] == true));
}

#[test]
fn generic_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let s2 = serde_json::json!([0, 1, 0]);
    let (code, v, _) = iq(
        &[
            "hall",
            "generic",
            "--quiver",
            &q("a2split.json"),
            "--primes",
            "2,3,5",
            "--check",
            "7",
            "--serre",
            "1,2",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(
        coeff_str(&v["result"], &s2, &serde_json::json!([1, 0])).as_deref(),
        Some("-v^3+2v-v^-1")
    );
    // [S2]*[S1]*[S1] = v^-1 [S1 ⊕ S1 ⊕ S2] + (q-1)/v [S2]*E_1
    let (code, v, _) = iq(
        &[
            "hall",
            "generic",
            "--quiver",
            &q("a2split.json"),
            "--primes",
            "2,3,5",
            "--check",
            "7",
            "--word",
            "2,1,1",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(
        coeff_str(&v["result"], &s2, &serde_json::json!([1, 0])).as_deref(),
        Some("v-v^-1")
    );
    assert_eq!(
        coeff_str(
            &v["result"],
            &serde_json::json!([2, 1, 0]),
            &serde_json::json!([0, 0])
        )
        .as_deref(),
        Some("v^-1")
    );
}

#[test]
fn hall_mul_of_simples() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = iq(
        &[
            "hall",
            "mul",
            "--quiver",
            &q("a2split.json"),
            "--q",
            "5",
            "--left",
            "S:1",
            "--right",
            "S:2",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let terms = v["result"]["product"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    let roots = v["result"]["roots"].as_array().unwrap();
    let p1 = roots
        .iter()
        .position(|b| b == &serde_json::json!([1, 1]))
        .unwrap();
    for t in terms {
        let c = QSqrt::from_json(&t["coeff"]).unwrap();
        let nonsplit = t["X"][p1] == 1;
        // v^{<S1,S2>} = v^-1 on the split term, times q - 1 on the other
        let want = QSqrt::new(rat(0, 1), rat(if nonsplit { 4 } else { 1 }, 5), 5);
        assert_eq!(c, want);
    }
}

#[test]
fn suites_pass_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "verify".into(),
            "serre".into(),
            "--quiver".into(),
            q("a3tau.json"),
            "--q".into(),
            "2".into(),
        ],
        vec![
            "verify".into(),
            "bridgeland".into(),
            "--quiver".into(),
            q("a1.json"),
            "--q".into(),
            "3".into(),
        ],
        vec![
            "verify".into(),
            "euler".into(),
            "--quiver".into(),
            q("swap.json"),
            "--q".into(),
            "2".into(),
            "--samples".into(),
            "10".into(),
        ],
        vec![
            "verify".into(),
            "reduced".into(),
            "--quiver".into(),
            q("a3tau.json"),
            "--q".into(),
            "3".into(),
            "--sigma".into(),
            "1=2,2=1/3".into(),
        ],
        vec![
            "bases".into(),
            "monomial".into(),
            "--quiver".into(),
            q("a2split.json"),
            "--q".into(),
            "2".into(),
            "--cap".into(),
            "3".into(),
        ],
        vec![
            "bases".into(),
            "pbw".into(),
            "--quiver".into(),
            q("a2split.json"),
            "--q".into(),
            "2".into(),
            "--cap".into(),
            "3".into(),
            "--order".into(),
            "2,1,0".into(),
        ],
    ];
    for args in runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, v, _) = iq(&refs, dir.path());
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(v["result"]["pass"], true, "{args:?}");
    }
}

#[test]
fn output_is_byte_identical_and_cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "verify",
        "serre",
        "--quiver",
        &q("d4split.json"),
        "--q",
        "2",
    ];
    let (_, _, cold) = iq(&args, dir.path());
    let (_, _, warm) = iq(&args, dir.path());
    assert_eq!(cold, warm);
    let mut nocache = args.to_vec();
    nocache.push("--no-cache");
    let (_, a, _) = iq(&nocache, dir.path());
    let (_, b, _) = iq(&nocache, dir.path());
    assert_eq!(a, b);
    assert_eq!(
        a["result"],
        serde_json::from_str::<Value>(&warm).unwrap()["result"]
    );
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let algebra_dir = entries[0].as_ref().unwrap().path();
    assert!(algebra_dir.join("2").join("registry.json").exists());
    assert!(algebra_dir.join("2").join("memo.json").exists());
}

#[test]
fn corrupt_cache_falls_back_to_a_cold_start() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "hall",
        "mul",
        "--quiver",
        &q("a3tau.json"),
        "--q",
        "3",
        "--left",
        "E:1",
        "--right",
        "S:2",
    ];
    let (_, first, _) = iq(&args, dir.path());
    for e in std::fs::read_dir(dir.path()).unwrap() {
        std::fs::write(
            e.unwrap().path().join("3").join("registry.json"),
            b"{not json",
        )
        .unwrap();
    }
    let (code, second, _) = iq(&args, dir.path());
    assert_eq!(code, 0);
    assert_eq!(first["result"], second["result"]);
}

#[test]
fn exit_codes_and_error_objects() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = iq(&["verify", "rank2", "--q", "6"], dir.path());
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "InputError");
    let (code, _, _) = iq(&["validate", "/nonexistent/quiver.json"], dir.path());
    assert_eq!(code, 2);
    let (code, v, _) = iq(
        &[
            "modules",
            "enumerate",
            "--quiver",
            &q("a2split.json"),
            "--q",
            "2",
            "--dims",
            "3,3",
            "--budget",
            "100",
        ],
        dir.path(),
    );
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "BudgetExceeded");
    let (code, _, _) = iq(&["frobnicate"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let (code, _, stdout) = iq(
        &[
            "verify",
            "rank2",
            "--q",
            "3",
            "--out",
            target.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn enumerate_counts_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = iq(
        &[
            "modules",
            "enumerate",
            "--quiver",
            &q("a2split.json"),
            "--q",
            "3",
            "--dims",
            "1=1,2=1",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let classes = v["result"]["classes"].as_array().unwrap();
    // a : k → k is zero or one of two isomorphisms, which are all conjugate
    assert_eq!(v["result"]["representations"], 3);
    assert_eq!(classes.len(), 2);
    let sizes: Vec<u64> = classes
        .iter()
        .map(|c| c["representations"].as_u64().unwrap())
        .collect();
    assert_eq!(sizes.iter().sum::<u64>(), 3);
}

#[test]
fn submodule_budget_bounds_filtration_counts() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "bases",
        "monomial",
        "--quiver",
        &q("a2split.json"),
        "--q",
        "2",
        "--cap",
        "3",
    ];
    let mut tight = base.to_vec();
    tight.extend(["--submodule-budget", "1"]);
    let (code, v, _) = iq(&tight, dir.path());
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "BudgetExceeded");
    let (code, _, _) = iq(&base, dir.path());
    assert_eq!(code, 0);
}
