use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vcdc::bench::parse_results_csv;

fn codes() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../codes")
}

fn vcdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcdc"))
        .args(args)
        .env_remove("VCDC_THREADS")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn quick_train(code: &str, out: &Path, seed: &str) -> Output {
    let alist = codes().join(format!("{code}.alist"));
    vcdc(&[
        "train",
        "--code",
        path(&alist),
        "--out",
        path(out),
        "--iterations",
        "5",
        "--batch-size",
        "8",
        "--seed",
        seed,
    ])
}

#[test]
fn train_writes_checkpoint_loss_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = quick_train("ldpc_49_24", dir.path(), "0");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("final smoothed loss"));
    let ckpt = std::fs::read_to_string(dir.path().join("ldpc_49_24.vcdc")).unwrap();
    assert!(ckpt.starts_with("VCDC1 49 24 25\n"));
    assert_eq!(ckpt.lines().count(), 26);
    let loss = std::fs::read_to_string(dir.path().join("loss.csv")).unwrap();
    assert_eq!(loss.lines().next(), Some("iteration,raw_loss,smoothed_loss"));
    assert_eq!(loss.lines().count(), 6);
    let config = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(config.contains("iterations = 5"));
}

#[test]
fn same_seed_gives_identical_checkpoints() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    for (d, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        assert!(quick_train("hamming_7_4", d.path(), seed).status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("hamming_7_4.vcdc")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn captured_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(quick_train("hamming_7_4", a.path(), "3").status.success());
    let config = a.path().join("config.txt");
    let out = vcdc(&["train", "--config", path(&config), "--out", path(b.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(a.path().join("hamming_7_4.vcdc")).unwrap(),
        std::fs::read(b.path().join("hamming_7_4.vcdc")).unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# small run\ncode = {}\niterations = 4\nbatch_size = 4\n",
            path(&codes().join("hamming_7_4.alist"))
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = vcdc(&["train", "--config", path(&cfg), "--iterations", "2", "--out", path(&out_dir)]);
    assert!(out.status.success());
    let loss = std::fs::read_to_string(out_dir.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 3);

    std::fs::write(&cfg, "iterations = many\n").unwrap();
    assert_eq!(vcdc(&["train", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn missing_alist_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = vcdc(&["train", "--code", "/nonexistent/code.alist", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alist"));
    let out = vcdc(&["train", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_one_row_per_decoder_and_point() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_train("ldpc_121_60", dir.path(), "0").status.success());
    let ckpt = dir.path().join("ldpc_121_60.vcdc");
    let alist = codes().join("ldpc_121_60.alist");
    let out_dir = dir.path().join("bench");
    let out = vcdc(&[
        "bench",
        "--code",
        path(&alist),
        "--decoders",
        "bp,vcdc",
        "--csnr",
        "4,5,6",
        "--checkpoint",
        path(&ckpt),
        "--stop-errors",
        "10",
        "--max-frames",
        "64",
        "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert!(csv.starts_with(
        "code,n,k,decoder,csnr_db,bits,bit_errors,ber,neg_ln_ber,frames,frame_errors,mean_steps,censored,seed\n"
    ));
    let runs = parse_results_csv(&csv).unwrap();
    assert_eq!(runs.len(), 6);
    assert_eq!(runs.iter().filter(|r| r.decoder == "bp5").count(), 3);
    assert_eq!(runs.iter().filter(|r| r.decoder == "vcdc20").count(), 3);
    assert!(out_dir.join("ldpc_121_60.plot.dat").exists());
    assert!(out_dir.join("config.txt").exists());
}

#[test]
fn bench_timestep_sweep_and_censoring() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_train("hamming_7_4", dir.path(), "0").status.success());
    let alist = codes().join("hamming_7_4.alist");
    let out = vcdc(&[
        "bench",
        "--code",
        path(&alist),
        "--decoders",
        "vcdc",
        "--timesteps",
        "1,5,10,20",
        "--csnr",
        "14",
        "--checkpoint",
        path(&dir.path().join("hamming_7_4.vcdc")),
        "--max-frames",
        "32",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = parse_results_csv(&std::fs::read_to_string(dir.path().join("results.csv")).unwrap()).unwrap();
    let ids: Vec<&str> = runs.iter().map(|r| r.decoder.as_str()).collect();
    assert_eq!(ids, ["vcdc1", "vcdc5", "vcdc10", "vcdc20"]);
    assert!(runs.iter().all(|r| r.censored && r.frames == 32));
}

#[test]
fn bench_rejects_mismatched_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_train("hamming_7_4", dir.path(), "0").status.success());
    let out = vcdc(&[
        "bench",
        "--code",
        path(&codes().join("ldpc_49_24.alist")),
        "--decoders",
        "vcdc",
        "--checkpoint",
        path(&dir.path().join("hamming_7_4.vcdc")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let alist = codes().join("hamming_7_4.alist");
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let out = Command::new(env!("CARGO_BIN_EXE_vcdc"))
            .args(["bench", "--code", path(&alist), "--decoders", "bp,hard", "--csnr", "2,3"])
            .args(["--stop-errors", "300", "--out", path(&out_dir)])
            .env("VCDC_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        csvs.push(std::fs::read_to_string(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let out = Command::new(env!("CARGO_BIN_EXE_vcdc"))
        .args(["inspect-code", "--code", path(&alist)])
        .env("VCDC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn decode_with(input: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("llr.txt");
    std::fs::write(&file, input).unwrap();
    let alist = codes().join("hamming_7_4.alist");
    let mut args = vec!["decode", "--code", path(&alist), "--input", path(&file)];
    args.extend_from_slice(extra);
    vcdc(&args)
}

#[test]
fn decode_noiseless_codeword() {
    // 1110000 is a codeword of the (7,4) code
    let out = decode_with("-5 -5 -5 5 5 5 5\n", &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().next(), Some("1110000"));
    assert!(stdout.contains("syndrome zero"));
}

#[test]
fn decode_all_zero_llr_uses_tie_rule() {
    let out = decode_with("0 0 0 0 0 0 0", &["--decoder", "hard"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("0000000"));
}

#[test]
fn decode_exit_codes() {
    assert_eq!(decode_with("1 1 1 1 1 1", &[]).status.code(), Some(1));
    assert_eq!(decode_with("1 1 x 1 1 1 1", &[]).status.code(), Some(1));
    // a single flipped bit stays uncorrected by the hard-decision decoder
    let out = decode_with("5 5 5 5 5 5 -5", &["--decoder", "hard"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("syndrome nonzero"));
    // and corrected by BP
    assert_eq!(decode_with("5 5 5 5 5 5 -1", &[]).status.code(), Some(0));
}

#[test]
fn inspect_code_reports_shape_and_costs() {
    let out = vcdc(&["inspect-code", "--code", path(&codes().join("ldpc_121_60.alist"))]);
    assert!(out.status.success());
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains("n k m       121 60 61"));
    assert!(s.contains("edges       671"));
    assert!(s.contains("vcdc20"));
}
