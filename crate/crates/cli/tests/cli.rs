use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn arboreal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// A level-3 catalog written once for the whole file.
fn catalog() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    let dir = DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("catalog.json");
        let dot = dir.path().join("lattice.dot");
        let o = arboreal(&[
            "enumerate",
            "--modulus",
            "8",
            "--out",
            out.to_str().unwrap(),
            "--dot",
            dot.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dir
    });
    dir.path()
}

fn catalog_arg() -> String {
    catalog()
        .join("catalog.json")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn enumerate_writes_catalog_and_lattice() {
    let dir = catalog();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("catalog.json")).unwrap()).unwrap();
    assert_eq!(json["classes"].as_array().unwrap().len(), 63);
    let dot = std::fs::read_to_string(dir.join("lattice.dot")).unwrap();
    assert_eq!(dot.matches("n1 -> ").count(), 16);

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("again.json");
    let o = arboreal(&[
        "enumerate",
        "--modulus",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout(&o).contains("63 classes, index histogram {1:1, 2:16, 4:30, 8:16}"));
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(dir.join("catalog.json")).unwrap()
    );
}

#[test]
fn density_by_id_and_by_generators() {
    let cat = catalog_arg();
    let o = arboreal(&["density", "--catalog", &cat, "--id", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("5/21 ≈ 0.2380952"));
    let o = arboreal(&["density", "--catalog", &cat, "--id", "49"]);
    assert!(stdout(&o).starts_with("89/168"));

    let tmp = tempfile::tempdir().unwrap();
    let gens = tmp.path().join("agl.json");
    // SL₂ generators, two determinants, one translation.
    std::fs::write(
        &gens,
        "[[1,1,0,0,1,0,0,0,1],[1,0,0,1,1,0,0,0,1],[3,0,0,0,1,0,0,0,1],[5,0,0,0,1,0,0,0,1],[1,0,0,0,1,0,1,0,1]]",
    )
    .unwrap();
    let o = arboreal(&["density", "--gens", gens.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("11/21"), "{}", stdout(&o));

    let o = arboreal(&["density", "--catalog", &cat, "--id", "64"]);
    assert_eq!(o.status.code(), Some(2));
    let o = arboreal(&["density"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn density_finite_level_is_seeded() {
    let cat = catalog_arg();
    let run = |seed: &str| {
        stdout(&arboreal(&[
            "density",
            "--catalog",
            &cat,
            "--id",
            "1",
            "--finite-level",
            "7",
            "--samples",
            "5000",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("3"), run("3"));
    assert!(run("3").contains("level 2^7: "));
}

#[test]
fn classify_examples() {
    let cat = catalog_arg();
    for (a, c, k, row) in [
        ("-3", "1", "3", 2),
        ("2", "-5", "1", 10),
        ("30", "-150", "1", 58),
    ] {
        let o = arboreal(&["classify", "--a", a, "--c", c, "--k", k, "--catalog", &cat]);
        assert!(o.status.success());
        assert!(
            stdout(&o).lines().any(|l| l == format!("row {row}")),
            "{}",
            stdout(&o)
        );
    }
    let o = arboreal(&[
        "classify",
        "--a",
        "30",
        "--c",
        "121",
        "--k",
        "1",
        "--catalog",
        &cat,
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["row"], 49);
    assert_eq!(v["density"], "89/168");
    assert_eq!(v["is_exemplar"], true);
}

#[test]
fn classify_exit_codes() {
    let cat = catalog_arg();
    let o = arboreal(&[
        "classify",
        "--a",
        "0",
        "--c",
        "0",
        "--k",
        "1",
        "--catalog",
        &cat,
    ]);
    assert_eq!(o.status.code(), Some(2));
    // a² − 4b = 36 is a square: full rational 2-torsion.
    let o = arboreal(&[
        "classify",
        "--a",
        "6",
        "--c",
        "-1",
        "--k",
        "0",
        "--catalog",
        &cat,
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis violated"));
    let o = arboreal(&["classify", "--a", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_and_audits() {
    let cat = catalog_arg();
    let tmp = tempfile::tempdir().unwrap();
    let audit = tmp.path().join("audit.csv");
    let o = arboreal(&[
        "verify",
        "--a",
        "3",
        "--c",
        "3",
        "--k",
        "1",
        "--xmax",
        "20000",
        "--catalog",
        &cat,
        "--audit",
        audit.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("row 1 density 5/21"));
    let csv = std::fs::read_to_string(&audit).unwrap();
    assert!(csv.starts_with("p,N,s,m,odd\n7,6,1,3,0\n"));

    let o = arboreal(&[
        "verify",
        "--a",
        "3",
        "--c",
        "3",
        "--k",
        "1",
        "--xmax",
        "20000",
        "--catalog",
        &cat,
        "--tolerance",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = arboreal(&[
        "verify",
        "--a",
        "0",
        "--c",
        "0",
        "--k",
        "1",
        "--catalog",
        &cat,
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = arboreal(&[
        "verify",
        "--a",
        "3",
        "--c",
        "3",
        "--k",
        "1",
        "--xmax",
        "500",
        "--catalog",
        &cat,
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table_at_small_scale() {
    let cat = catalog_arg();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("table.csv");
    let o = arboreal(&[
        "table",
        "--catalog",
        &cat,
        "--xmax",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "row,a,c,k,density_exact,empirical,abs_err");
    assert_eq!(lines.len(), 65);
    assert!(lines[1].starts_with("1,3,3,1,5/21,"));
    assert_eq!(
        lines[64],
        "# rows 63 distinct_densities 21 min 1/14 max 89/168"
    );
    // Exit status depends only on the 3σ checks at this scale.
    let mismatches = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("mismatch:"))
        .count();
    assert_eq!(o.status.success(), mismatches == 0);
    assert!(stdout(&o)
        .lines()
        .filter(|l| l.starts_with("mismatch:"))
        .all(|l| l.contains("abs_err")));
}
