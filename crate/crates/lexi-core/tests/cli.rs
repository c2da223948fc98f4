//! End-to-end runs of the `lexi` binary: every subcommand, the exit-code
//! contract, and determinism of the artifacts it writes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lexi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexi"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn run_json(args: &[&str]) -> Value {
    let out = lexi(args);
    assert!(
        out.status.success(),
        "lexi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn exit_code(args: &[&str]) -> i32 {
    lexi(args).status.code().expect("no signal")
}

fn gen_geometric(dir: &Path, name: &str, count: usize, seed: u64) -> String {
    let path = dir.join(name).display().to_string();
    run_json(&[
        "gen",
        "--dist",
        "geometric",
        "--count",
        &count.to_string(),
        "--seed",
        &seed.to_string(),
        &path,
    ]);
    path
}

#[test]
fn profile_reports_field_entropy_and_full_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 4096, 7);
    let report = run_json(&["profile", &input]);
    assert_eq!(report["totalValues"], 4096);
    // The geometric tail is too thin for every one of the 32 ranks to show
    // up in 4096 draws, but the head certainly does.
    let distinct = report["distinctExponents"].as_u64().unwrap();
    assert!((8..=32).contains(&distinct), "distinct {distinct}");
    let h = report["exponentEntropyBits"].as_f64().unwrap();
    // Default geometric target is 2.56 bits; 4096 draws land close.
    assert!((h - 2.56).abs() < 0.15, "entropy {h}");
    let hist = report["exponentHistogram"].as_array().unwrap();
    assert_eq!(hist.len(), 256);
    let total: u64 = hist.iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 4096);
}

#[test]
fn compress_then_decompress_restores_the_exact_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 3000, 11);
    let packed = dir.path().join("in.lexc").display().to_string();
    let restored = dir.path().join("out.bf16").display().to_string();
    let report_path = dir.path().join("compress.json");

    let report = run_json(&[
        "compress",
        &input,
        &packed,
        "--report",
        &report_path.display().to_string(),
    ]);
    assert!(report["stats"]["crExponent"].as_f64().unwrap() > 1.0);
    assert_eq!(report["bytesIn"], 6000);
    let on_disk: Value =
        serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(on_disk, report);

    run_json(&["decompress", &packed, &restored]);
    let original = std::fs::read(&input).unwrap();
    assert_eq!(std::fs::read(&restored).unwrap(), original);
}

#[test]
fn encode_stream_reports_fixed_cycles_and_dumps_whole_flits() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 2000, 3);
    let flits = dir.path().join("layer.flits");
    let report = run_json(&[
        "encode-stream",
        "--sample",
        "512",
        "--lanes",
        "10",
        "--depth",
        "8",
        "--flits",
        &flits.display().to_string(),
        &input,
    ]);
    assert_eq!(report["cycles"]["sortCycles"], 15);
    assert_eq!(report["cycles"]["treeCycles"], 31);
    assert_eq!(report["cycles"]["lutProgramCycles"], 32);
    assert_eq!(report["cycles"]["totalPipelineCycles"], 78);
    assert_eq!(report["stats"]["valueCount"], 2000);
    assert!(report["stats"]["crExponent"].as_f64().unwrap() > 1.0);
    let dump = std::fs::read(&flits).unwrap();
    assert!(!dump.is_empty() && dump.len() % 16 == 0, "dump is whole flits");
}

#[test]
fn bench_emits_the_ratio_report_for_every_codec() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 4096, 5);
    for codec in ["lexi", "rle", "bdi"] {
        let report = run_json(&["bench", "--codec", codec, &input]);
        assert_eq!(report["codec"], codec);
        assert_eq!(report["bytesIn"], 8192);
        assert!(report["bytesOut"].as_u64().unwrap() > 0);
        assert!(report["exponentCR"].as_f64().unwrap() > 0.0);
        assert!(report["totalCR"].as_f64().unwrap() > 0.0);
    }
    let lexi_cr = run_json(&["bench", "--codec", "lexi", &input])["exponentCR"]
        .as_f64()
        .unwrap();
    assert!(lexi_cr > 2.0, "geometric stream compresses well, got {lexi_cr}");
}

#[test]
fn sweep_emits_a_deterministic_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 4096, 9);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = lexi(&[
            "sweep",
            "--lanes",
            "1,2,10",
            "--depth",
            "4,8",
            "--out",
            &out.display().to_string(),
            &input,
        ])
        .status;
        assert!(status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(std::fs::read_to_string(&b).unwrap(), text, "sweep must be reproducible");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lanes,depth,hitRate,histogramCycles"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6, "3 lane counts x 2 depths");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        let hit: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&hit));
        let cycles: u64 = fields[3].parse().unwrap();
        assert!(cycles > 0);
    }
}

#[test]
fn simulate_replays_a_trace_with_measured_and_assumed_ratios() {
    let dir = tempfile::tempdir().unwrap();
    gen_geometric(dir.path(), "acts.bf16", 4096, 13);
    let trace = dir.path().join("trace.csv");
    std::fs::write(
        &trace,
        "0,weight,8192,hbm,sram\n\
         0,activation,8192,sram,hbm\n\
         1,activation,4096,sram,hbm,acts.bf16\n",
    )
    .unwrap();
    let report = run_json(&[
        "simulate",
        "--mode",
        "lexi",
        "--trace",
        &trace.display().to_string(),
        "--cr",
        "3.14",
    ]);
    let sim = &report["simulation"];
    assert_eq!(sim["transferCount"], 3);
    assert_eq!(sim["startupCyclesPerLayer"], 78);
    // Both layers move runtime-compressed traffic, so both pay startup.
    assert_eq!(sim["startupLayerCount"], 2);
    let uncompressed = sim["totalNsUncompressed"].as_f64().unwrap();
    let weights_only = sim["totalNsWeightsOnly"].as_f64().unwrap();
    let lexi_ns = sim["totalNsLexi"].as_f64().unwrap();
    assert!(lexi_ns < weights_only && weights_only < uncompressed);
    assert_eq!(report["requestedTotalNs"].as_f64().unwrap(), lexi_ns);
    assert!(sim["reductionLexiPercent"].as_f64().unwrap() > 0.0);

    let weights_report = run_json(&[
        "simulate",
        "--mode",
        "weights",
        "--trace",
        &trace.display().to_string(),
    ]);
    assert_eq!(
        weights_report["requestedTotalNs"].as_f64().unwrap(),
        weights_report["simulation"]["totalNsWeightsOnly"].as_f64().unwrap()
    );
}

#[test]
fn usage_problems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_geometric(dir.path(), "in.bf16", 64, 1);
    let missing = dir.path().join("nope.bf16").display().to_string();

    assert_eq!(exit_code(&["profile", &missing]), 1, "missing input file");
    assert_eq!(exit_code(&["compress", &input, &input]), 1, "output equals input");
    assert_eq!(exit_code(&["frobnicate"]), 1, "unknown subcommand");
    assert_eq!(exit_code(&["profile", &input, "--bogus"]), 1, "unknown flag");
    assert_eq!(
        exit_code(&["gen", "--dist", "zipf", "--ratio", "0.5", "--count", "10",
            &dir.path().join("x.bf16").display().to_string()]),
        1,
        "ratio belongs to geometric"
    );
    assert_eq!(
        exit_code(&["sweep", "--lanes", "0", "--depth", "8", &input]),
        1,
        "zero lanes is invalid"
    );
    assert_eq!(
        exit_code(&["simulate", "--mode", "sideways", "--trace", &input]),
        1,
        "unknown traffic mode"
    );
}

#[test]
fn data_problems_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let odd = dir.path().join("odd.bin");
    std::fs::write(&odd, [1u8, 2, 3]).unwrap();
    assert_eq!(exit_code(&["profile", &odd.display().to_string()]), 2, "odd byte length");

    let junk = dir.path().join("junk.lexc");
    std::fs::write(&junk, b"not a container at all").unwrap();
    let out = dir.path().join("out.bf16").display().to_string();
    assert_eq!(
        exit_code(&["decompress", &junk.display().to_string(), &out]),
        2,
        "junk container"
    );

    let input = gen_geometric(dir.path(), "in.bf16", 256, 2);
    let packed = dir.path().join("in.lexc");
    run_json(&["compress", &input, &packed.display().to_string()]);
    let mut bytes = std::fs::read(&packed).unwrap();
    bytes.truncate(bytes.len() - 1);
    std::fs::write(&packed, &bytes).unwrap();
    assert_eq!(
        exit_code(&["decompress", &packed.display().to_string(), &out]),
        2,
        "truncated container"
    );

    let empty = dir.path().join("empty.bf16");
    std::fs::write(&empty, []).unwrap();
    assert_eq!(
        exit_code(&["bench", "--codec", "rle", &empty.display().to_string()]),
        2,
        "empty bench input"
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(&["--help"]), 0);
    assert_eq!(exit_code(&["--version"]), 0);
    assert_eq!(exit_code(&["encode-stream", "--help"]), 0);
}
