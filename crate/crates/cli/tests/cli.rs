use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const NOW: &str = "1700000000";

struct Workspace {
    _tmp: tempfile::TempDir,
    dir: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("state");
        Workspace { _tmp: tmp, dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.parent().unwrap().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_pbag"))
            .arg("--dir")
            .arg(&self.dir)
            .args(["--now", NOW])
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        String::from_utf8(out.stdout).unwrap()
    }

    fn envelope(&self, vehicle: &str, mode: &str, name: &str) -> String {
        let path = self.path(name);
        self.ok(&[
            "auth-gen",
            vehicle,
            "--verifier",
            "rsu",
            "--message",
            "lane 3 closed",
            "--mode",
            mode,
            "-o",
            path.to_str().unwrap(),
        ]);
        path.to_str().unwrap().to_string()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn lifecycle() {
    let ws = Workspace::new();
    ws.ok(&["setup", "--n", "16"]);
    assert!(ws.dir.join("srs.bin").exists());
    let issued = ws.ok(&["issue", "alpha", "--id", "ABCDEFGHJKLMNPRSTU"]);
    assert!(issued.contains("slot 0"), "{issued}");
    for label in ["bravo", "charlie"] {
        ws.ok(&["issue", label]);
    }
    assert_eq!(code(&ws.run(&["issue", "alpha"])), 2);

    let plain = ws.envelope("alpha", "trusted", "alpha.plain");
    let blinded = ws.envelope("alpha", "untrusted", "alpha.blinded");
    assert!(ws.ok(&["auth-verify", &plain, "--verifier", "rsu"]).contains("accepted"));
    assert!(ws.ok(&["auth-verify", &blinded, "--verifier", "rsu"]).contains("accepted"));

    // flip one bit of the timestamp
    let mut bytes = fs::read(&plain).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    let tampered = ws.path("tampered");
    fs::write(&tampered, bytes).unwrap();
    let out = ws.run(&["auth-verify", tampered.to_str().unwrap(), "--verifier", "rsu"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("rejected"), "{}", stdout(&out));

    let traced = ws.ok(&["trace", &blinded]);
    assert!(traced.contains("identity ABCDEFGHJKLMNPRSTU"), "{traced}");
    assert!(traced.contains("status certified"), "{traced}");
    assert!(traced.contains(&format!("timestamp {NOW}")), "{traced}");

    let bravo = ws.envelope("bravo", "trusted", "bravo.plain");
    let charlie = ws.envelope("charlie", "trusted", "charlie.plain");
    let batch = ws.ok(&["batch-verify", &plain, &bravo, &charlie, "--verifier", "rsu"]);
    assert!(batch.contains("3 of 3 accepted"), "{batch}");
    let out = ws.run(&["batch-verify", &bravo, tampered.to_str().unwrap(), "--verifier", "rsu"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("1 of 2 accepted"), "{}", stdout(&out));
    let out = ws.run(&["batch-verify", &plain, &blinded, "--verifier", "rsu"]);
    assert_eq!(code(&out), 2);

    ws.ok(&["update", "alpha"]);
    assert_eq!(code(&ws.run(&["auth-verify", &plain, "--verifier", "rsu"])), 1);
    let fresh = ws.envelope("alpha", "trusted", "alpha.fresh");
    ws.ok(&["auth-verify", &fresh, "--verifier", "rsu"]);
    // others refresh from the log on load
    let bravo = ws.envelope("bravo", "untrusted", "bravo.blinded");
    ws.ok(&["auth-verify", &bravo, "--verifier", "rsu"]);

    ws.ok(&["revoke", "charlie"]);
    let revoked = ws.envelope("charlie", "trusted", "charlie.revoked");
    assert_eq!(code(&ws.run(&["auth-verify", &revoked, "--verifier", "rsu"])), 1);
    assert!(ws.ok(&["trace", &revoked]).contains("status revoked"));
    assert_eq!(code(&ws.run(&["revoke", "charlie"])), 2);
}

#[test]
fn stale_envelope_rejected() {
    let ws = Workspace::new();
    ws.ok(&["setup", "--n", "4"]);
    ws.ok(&["issue", "alpha"]);
    let plain = ws.envelope("alpha", "trusted", "a");
    let later = Command::new(env!("CARGO_BIN_EXE_pbag"))
        .arg("--dir")
        .arg(&ws.dir)
        .args(["--now", "1700000301", "auth-verify", &plain, "--verifier", "rsu"])
        .output()
        .unwrap();
    assert_eq!(code(&later), 1);
    assert!(stdout(&later).contains("freshness window"), "{}", stdout(&later));
    let exact = ws.run(&["auth-verify", &plain, "--verifier", "rsu", "--window", "0"]);
    assert_eq!(code(&exact), 0);
}

#[test]
fn state_export_import() {
    let ws = Workspace::new();
    ws.ok(&["setup", "--n", "8"]);
    ws.ok(&["issue", "alpha"]);
    ws.ok(&["issue", "bravo"]);
    let snapshot = ws.path("snapshot.bin");
    let snap = snapshot.to_str().unwrap();
    ws.ok(&["state", "export", snap]);
    assert_eq!(fs::read(&snapshot).unwrap(), fs::read(ws.dir.join("ledger.bin")).unwrap());

    ws.ok(&["revoke", "bravo"]);
    ws.ok(&["state", "import", snap]);
    assert_eq!(fs::read(&snapshot).unwrap(), fs::read(ws.dir.join("ledger.bin")).unwrap());

    let mut corrupt = fs::read(&snapshot).unwrap();
    let mid = corrupt.len() / 2;
    corrupt[mid] ^= 0x40;
    let bad = ws.path("corrupt.bin");
    fs::write(&bad, corrupt).unwrap();
    assert_eq!(code(&ws.run(&["state", "import", bad.to_str().unwrap()])), 2);
    assert_eq!(fs::read(&snapshot).unwrap(), fs::read(ws.dir.join("ledger.bin")).unwrap());
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn scenario_files_run() {
    let ws = Workspace::new();
    for name in ["fleet16.toml", "attacks.toml"] {
        let file = scenario(name);
        let out = ws.run(&["scenario", "run", file.to_str().unwrap(), "--json"]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("\"unmet\": 0"), "{name}: {text}");
    }

    let unmet = ws.path("unmet.toml");
    fs::write(
        &unmet,
        "n = 4\nfleet_size = 1\nseed = 1\n[[script]]\naction = \"auth_trusted\"\nvehicle = \"v0\"\nexpect = \"reject\"\n",
    )
    .unwrap();
    assert_eq!(code(&ws.run(&["scenario", "run", unmet.to_str().unwrap()])), 1);
    fs::write(&unmet, "n = 4\nbogus = 1\n").unwrap();
    assert_eq!(code(&ws.run(&["scenario", "run", unmet.to_str().unwrap()])), 2);
}

#[test]
fn bench_reports_counts() {
    let ws = Workspace::new();
    let out = ws.ok(&["bench", "--n", "16", "--batch-sizes", "1,4", "--samples", "2", "--json"]);
    assert!(out.contains("\"plain_tuple_bytes\": 532"), "{out}");
    assert!(out.contains("\"batch_verify\""), "{out}");
}

#[test]
fn errors_exit_two() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["issue", "alpha"])), 2);
    ws.ok(&["setup", "--n", "4"]);
    assert_eq!(code(&ws.run(&["setup", "--n", "4"])), 2);
    assert_eq!(code(&ws.run(&["issue", "../escape"])), 2);
    assert_eq!(code(&ws.run(&["update", "ghost"])), 2);
    let junk = ws.path("junk");
    fs::write(&junk, b"not an envelope").unwrap();
    assert_eq!(code(&ws.run(&["trace", junk.to_str().unwrap()])), 2);
}
