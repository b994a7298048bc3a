//! The `reslab` binary: subcommands, output files and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn reslab(args: &[&str], envs: &[(&str, &Path)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_reslab"));
    cmd.args(args).env_remove("RESLAB_CACHE");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let ok = write(dir.path(), "ok.toml", "potential = \"preset:harmonic\"\neps_list = [0.1]\n[grid]\nr0 = 6.0\nn = 4000\n");
    let partial = write(dir.path(), "p.toml", "potential = \"preset:harmonic\"\neps_list = [0.1, 0.01]\n[grid]\nr0 = 6.0\nn = 200\n");
    let failed = write(dir.path(), "f.toml", "potential = \"preset:harmonic\"\neps_list = [0.1]\n[grid]\nr0 = 6.0\nn = 10\n");
    let bad = write(dir.path(), "b.toml", "potential = \"preset:harmonic\"\nunknown_key = 1\n");
    assert_eq!(reslab(&["interior-spectrum", "--config", &ok, "--out", out], &[]).0, 0);
    assert_eq!(reslab(&["interior-spectrum", "--config", &partial, "--out", out], &[]).0, 3);
    assert_eq!(reslab(&["interior-spectrum", "--config", &failed, "--out", out], &[]).0, 4);
    assert_eq!(reslab(&["interior-spectrum", "--config", &bad, "--out", out], &[]).0, 2);
    assert_eq!(reslab(&["interior-spectrum", "--eps", "0.1,0.2", "--out", out], &[]).0, 2);
    assert_eq!(reslab(&["resonances", "--beta", "0.9", "--out", out], &[]).0, 2);
    let spectra = fs::read_to_string(dir.path().join("out/spectra.csv")).unwrap();
    assert!(spectra.starts_with("eps,index,lambda,residual\n"));
}

#[test]
fn wells_resonances_and_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, text) = reslab(&["wells", "--out", out], &[]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("\"depths\""));
    let (code, text) = reslab(&["resonances", "--eps", "0.14", "--beta", "0.25", "--mode", "smooth", "--out", out], &[]);
    assert_eq!(code, 0, "{text}");
    let res = fs::read_to_string(dir.path().join("resonances.csv")).unwrap();
    assert!(res.lines().nth(1).unwrap().starts_with("1.4e-1,1,"));
    let (code, text) = reslab(&["symbol-check", "--eps", "0.1", "--out", out], &[]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(fs::read_to_string(dir.path().join("symbol.csv")).unwrap().lines().count(), 2);
}

#[test]
fn sweep_cache_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "potential = \"preset:reference\"\neps_list = [0.2, 0.175, 0.15, 0.125]\n[stages]\nsymbols = false\n",
    );
    let (code, text) = reslab(&["sweep", "--config", &cfg, "--out", out_s], &[("RESLAB_CACHE", &cache)]);
    assert_eq!(code, 0, "{text}");
    assert!(!text.contains("cache hit"));
    let (code, text) = reslab(&["sweep", "--config", &cfg, "--out", out_s], &[("RESLAB_CACHE", &cache)]);
    assert_eq!(code, 0);
    assert!(text.contains("cache hit"), "{text}");
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    let (code, text) = reslab(&["sweep", "--config", &cfg, "--out", out_s, "--no-cache"], &[("RESLAB_CACHE", &cache)]);
    assert_eq!(code, 0);
    assert!(!text.contains("cache hit"));

    let record = out.join("record.json");
    let again = dir.path().join("again");
    let (code, _) = reslab(
        &["report", "--record", record.to_str().unwrap(), "--out", again.to_str().unwrap(), "--format", "csv"],
        &[],
    );
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(again.join("resonances.csv")).unwrap(),
        fs::read_to_string(out.join("resonances.csv")).unwrap()
    );
    let (code, _) = reslab(&["report", "--record", "missing.json", "--format", "csv"], &[]);
    assert_eq!(code, 2);
}
