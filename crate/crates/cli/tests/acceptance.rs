//! CLI acceptance: determinism of model files under identical flags and
//! seeds, for both linear and kernel models. Prints one pass/fail line,
//! completing the report started by the core crate's acceptance suite.

use std::path::Path;
use std::process::Command;

fn psvm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psvm"))
}

fn write_toy(path: &Path) {
    // Separable 8-sample toy with a couple of sparse entries.
    let text = "\
+1 1:1.0 2:0.5
+1 1:0.8 3:0.2
+1 1:1.2 2:-0.1
+1 1:0.9 2:0.4 3:0.1
-1 1:-1.0 2:0.3
-1 1:-0.7 3:-0.4
-1 1:-1.1 2:-0.2
-1 1:-0.9 2:0.1 3:-0.3
";
    std::fs::write(path, text).unwrap();
}

fn train_model(data: &Path, out: &Path, extra: &[&str]) {
    let status = psvm()
        .args([
            "train",
            "--data",
            data.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "42",
        ])
        .args(extra)
        .status()
        .expect("psvm binary runs");
    assert!(status.success(), "training exited with {status}");
}

#[test]
fn criterion_12_model_files_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("toy.svm");
    write_toy(&data);

    let mut all_identical = true;
    for (name, extra) in [
        ("linear csvm", vec!["--model", "csvm", "--c", "2.0"]),
        (
            "lpsvm with bias and scaling",
            vec![
                "--model", "lpsvm", "--c", "1.5", "--mu", "0.8", "--nu", "0.9", "--bias", "on",
                "--scale", "minmax",
            ],
        ),
        (
            "rbf csvm with homotopy",
            vec!["--model", "csvm", "--kernel", "rbf", "--homotopy", "5:1"],
        ),
        (
            "lssvm strict",
            vec!["--model", "lssvm", "--strict-lipschitz", "--eps", "1e-10"],
        ),
    ] {
        let first = dir.path().join("first.model");
        let second = dir.path().join("second.model");
        train_model(&data, &first, &extra);
        train_model(&data, &second, &extra);
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        assert!(!a.is_empty());
        if a != b {
            all_identical = false;
            println!("[FAIL] criterion 12: {name} model files differ");
        }
    }
    if all_identical {
        println!("[PASS] criterion 12: determinism (4 flag sets, bit-identical model files)");
    }
    assert!(all_identical);
}
