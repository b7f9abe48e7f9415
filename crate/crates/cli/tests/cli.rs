use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sfw_cli::load_csv;

fn sfw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfw"))
}

fn breast_cancer() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/breast-cancer_scale")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_summary(path: &Path) -> Vec<csv::StringRecord> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        sfw_cli::run::SUMMARY_HEADER
    );
    rd.records().map(Result::unwrap).collect()
}

#[test]
fn breast_cancer_grid_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nloss = \"logistic\"\nalgorithms = [\"fw\", \"sarah_fw\", \"saga_sarah_fw\"]\nepochs = 2.0\nout = \"out\"\n[constraint]\nkind = \"l1_ball\"\nradius = 2000.0\n",
            breast_cancer()
        ),
    )
    .unwrap();
    let out = sfw().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let out_dir = dir.path().join("out");
    let rows = read_summary(&out_dir.join("summary.csv"));
    assert_eq!(rows.len(), 3);
    for (row, alg) in rows.iter().zip(["fw", "sarah_fw", "saga_sarah_fw"]) {
        assert_eq!(&row[0], alg);
        let trace = load_csv(&out_dir.join(format!("{alg}_seed0.csv"))).unwrap();
        let last = trace.rows.last().unwrap();
        assert_eq!(row[5].parse::<u64>().unwrap(), last.sfo);
        assert_eq!(row[6].parse::<u64>().unwrap(), last.lmo);
        assert_eq!(row[3].parse::<f64>().unwrap(), last.f);
        assert_eq!(row[2].parse::<u64>().unwrap(), last.k);
        assert_eq!(row[7].parse::<f64>().unwrap(), 0.0);
    }
    // b = ⌈683/100⌉ = 7, two epochs
    assert_eq!(&rows[0][2], "2");
    assert_eq!(&rows[2][2], &(2u64 * 683).div_ceil(14).to_string());
}

#[test]
fn flags_override_config_and_reference_fills_f_min() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "dataset = \"missing\"\nK = 5\nseeds = [9]\n").unwrap();
    let out = sfw()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--dataset")
        .arg(breast_cancer())
        .args(["--alg", "fw,momentum_fw", "--K", "30", "--seed", "1,2", "--gap-every", "3", "--reference", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = read_summary(&dir.path().join("o/summary.csv"));
    assert_eq!(rows.len(), 4);
    let seeds: Vec<&str> = rows.iter().map(|r| &r[1]).collect();
    assert_eq!(seeds, ["1", "2", "1", "2"]);
    let f_min: f64 = rows[0][8].parse().unwrap();
    for r in &rows {
        assert_eq!(&r[2], "30");
        assert!(r[3].parse::<f64>().unwrap() >= f_min);
    }
    let trace = load_csv(&dir.path().join("o/fw_seed1.csv")).unwrap();
    let gaps: Vec<u64> = trace.rows.iter().filter(|r| r.gap.is_some()).map(|r| r.k).collect();
    assert_eq!(gaps, (0..=30).step_by(3).collect::<Vec<_>>());
    assert!(std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().starts_with("reference_")));
}

#[test]
fn missing_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfw()
        .args(["run", "--dataset"])
        .arg(dir.path().join("nope"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope"), "{}", stderr(&out));
}

#[test]
fn malformed_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad");
    std::fs::write(&data, "1 1:0.5\n-1 0:2\n").unwrap();
    let out = sfw().args(["run", "--dataset"]).arg(&data).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "dataset = [").unwrap();
    let out = sfw().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_spec_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [
        &["--alg", "adam"][..],
        &["--batch", "0"],
        &["--batch", "684"],
        &["--radius=-3"],
        &["--loss", "hinge"],
    ] {
        let out = sfw()
            .args(["run", "--dataset"])
            .arg(breast_cancer())
            .args(["--K", "3", "--out"])
            .arg(dir.path())
            .args(extra)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1), "{extra:?}: {}", stderr(&out));
    }
}

#[test]
fn overflowing_data_aborts_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("huge");
    std::fs::write(&data, "1 1:1e308 2:1e308\n-1 1:-1e308 2:1e308\n").unwrap();
    let out = sfw()
        .args(["run", "--dataset"])
        .arg(&data)
        .args(["--alg", "fw", "--K", "5", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("non-finite"), "{}", stderr(&out));
}

#[test]
fn reruns_are_byte_identical_regardless_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let out = sfw()
            .env("SARAH_FW_THREADS", threads)
            .args(["run", "--dataset"])
            .arg(breast_cancer())
            .args(["--alg", "sarah_fw,saga_sarah_fw,momentum_fw", "--epochs", "3", "--seed", "4,5", "--out"])
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    };
    run("a", "1");
    run("b", "4");
    for alg in ["sarah_fw", "saga_sarah_fw", "momentum_fw"] {
        for seed in [4, 5] {
            let name = format!("{alg}_seed{seed}.csv");
            let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }
    assert_eq!(
        std::fs::read(dir.path().join("a/summary.csv")).unwrap(),
        std::fs::read(dir.path().join("b/summary.csv")).unwrap()
    );
}

#[test]
fn bad_thread_cap_is_rejected() {
    let out = sfw()
        .env("SARAH_FW_THREADS", "zero")
        .args(["run", "--dataset"])
        .arg(breast_cancer())
        .args(["--K", "2", "--out"])
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_writes_a_parseable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mush");
    let out = sfw().args(["synth", "mushrooms", "--seed", "3", "--out"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let ds = sfw_core::data::load_libsvm(&path, None).unwrap();
    assert_eq!(ds, sfw_core::data::synthetic::mushrooms_like(3));
}

#[test]
fn shipped_experiment_files_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let spec = sfw_cli::ExperimentSpec::load(&path).unwrap();
            assert!(spec.dataset.exists(), "{}", spec.dataset.display());
            assert!(!spec.resolve(683).unwrap().is_empty());
            seen += 1;
        }
    }
    assert!(seen >= 2);
}
