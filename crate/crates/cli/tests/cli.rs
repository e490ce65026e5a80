use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lzctx(args: &[&str], stdin: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lzctx"));
    cmd.args(args);
    if let Some(p) = stdin {
        cmd.stdin(fs::File::open(p).unwrap());
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn sample_parse(dir: &Path) -> String {
    let path = dir.join("sample.lz");
    fs::write(&path, "LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 2\n1 3\n2 2\n").unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn compress_e1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    fs::write(&input, "abaababa").unwrap();
    let out = lzctx(&["compress", "--alphabet", "ab"], Some(&input));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 2\n1 3\n-2 2\n");
}

#[test]
fn decompress_every_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let parse = sample_parse(dir.path());
    let report = dir.path().join("stats.txt");
    let out = lzctx(
        &["decompress", "--alphabet", "ab", "--strategy", "slp", "--tau", "1", "-i", &parse, "--report", report.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "abaababa");
    let stats = fs::read_to_string(&report).unwrap();
    for key in ["peak_words=", "dict_ops=", "slp_nodes_visited=", "batches="] {
        assert!(stats.contains(key), "{stats}");
    }
    for extra in [&["--strategy", "naive"][..], &["--strategy", "grammar"], &["--strategy", "packed", "--delta", "0.5"]] {
        let mut args = vec!["decompress", "--alphabet", "ab", "-i", &parse];
        args.extend_from_slice(extra);
        assert_eq!(stdout(&lzctx(&args, None)), "abaababa");
    }
}

#[test]
fn extract_and_match() {
    let dir = tempfile::tempdir().unwrap();
    let parse = sample_parse(dir.path());
    let intervals = dir.path().join("iv");
    fs::write(&intervals, "3 6\n7 3\n").unwrap();
    let out = lzctx(&["extract", "--alphabet", "ab", "--intervals", intervals.to_str().unwrap(), "-i", &parse], None);
    assert_eq!(stdout(&out), "aaba");
    let pattern = dir.path().join("p");
    fs::write(&pattern, "aba\n").unwrap();
    let out = lzctx(&["match", "--alphabet", "ab", "--pattern", pattern.to_str().unwrap(), "--kind", "-i", &parse], None);
    assert_eq!(stdout(&out), "1 p\n4 s\n6 p\n");
    let out = lzctx(&["match", "--alphabet", "ab", "--pattern", pattern.to_str().unwrap(), "--k", "1", "-i", &parse], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("1\n"));
}

#[test]
fn byte_round_trip_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bytes");
    let data: Vec<u8> = (0..20_000u32).map(|i| ((i * i % 251) ^ (i / 97)) as u8).collect();
    fs::write(&input, &data).unwrap();
    let parse = dir.path().join("bytes.lz");
    let a = lzctx(&["compress", "-i", input.to_str().unwrap(), "-o", parse.to_str().unwrap()], None);
    assert_eq!(a.status.code(), Some(0));
    let first = fs::read(&parse).unwrap();
    lzctx(&["compress", "-i", input.to_str().unwrap(), "-o", parse.to_str().unwrap()], None);
    assert_eq!(fs::read(&parse).unwrap(), first);
    for s in ["naive", "grammar", "packed", "slp"] {
        let out = lzctx(&["decompress", "--strategy", s, "-i", parse.to_str().unwrap()], None);
        assert_eq!(out.stdout, data, "{s}");
    }
}

#[test]
fn errors_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let parse = sample_parse(dir.path());
    let bad = dir.path().join("bad.lz");
    fs::write(&bad, "LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 x\n").unwrap();
    let out = lzctx(&["decompress", "-i", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("x"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let out = lzctx(&["decompress", "--strategy", "packed", "--delta", "2", "-i", &parse], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--delta 2"));
    let out = lzctx(&["decompress", "--tau", "7", "-i", &parse], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau 7"));
    let out = lzctx(&["decompress", "--frobnicate"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--frobnicate"));

    let input = dir.path().join("abc");
    fs::write(&input, "abc").unwrap();
    let out = lzctx(&["compress", "--alphabet", "ab", "-i", input.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stats_bench_selftest() {
    let dir = tempfile::tempdir().unwrap();
    let parse = sample_parse(dir.path());
    let out = lzctx(&["stats", "-i", &parse], None);
    assert!(stdout(&out).contains("n=8\nz=4\n"));
    let out = lzctx(&["bench", "--family", "tm", "--sizes", "2^8..2^9"], None);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout(&out);
    assert!(table.starts_with("n\tz\tstrategy\tpeak_words\tseconds\n"));
    assert_eq!(table.lines().count(), 11);
    let out = lzctx(&["bench", "--family", "rand", "--sigma", "4", "--sizes", "300"], None);
    assert_eq!(stdout(&out).lines().count(), 6);
    let out = lzctx(&["selftest"], None);
    assert_eq!(out.status.code(), Some(0));
}
