use super::*;
use crate::auth::Rejection;

fn parse(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml(text).unwrap()
}

#[test]
fn minimal_happy_path() {
    let cfg = parse(
        r#"
        n = 4
        seed = 1
        [[script]]
        action = "issue"
        vehicle = "A"
        [[script]]
        action = "auth_trusted"
        vehicle = "A"
        "#,
    );
    let (ledger, report) = run_scenario(&cfg).unwrap();
    assert!(report.all_met(), "{}", report.to_text());
    assert_eq!(report.steps[1].outcome, Some(Outcome::Accepted));
    assert_eq!(report.steps[1].counts.pairings, 2);
    ledger.check_invariants().unwrap();
}

#[test]
fn revocation_path() {
    let cfg = parse(
        r#"
        n = 4
        seed = 2
        [[script]]
        action = "issue"
        vehicle = "A"
        [[script]]
        action = "revoke"
        vehicle = "A"
        [[script]]
        action = "auth_trusted"
        vehicle = "A"
        expect = "reject"
        [[script]]
        action = "auth_untrusted"
        vehicle = "A"
        expect = "reject"
        reason = "pairing_check_failed"
        [[script]]
        action = "revoke"
        vehicle = "A"
        expect = "reject"
        "#,
    );
    let (_, report) = run_scenario(&cfg).unwrap();
    assert!(report.all_met(), "{}", report.to_text());
    assert!(matches!(report.steps[2].outcome, Some(Outcome::Rejected { .. })));
}

#[test]
fn security_trials_as_fixtures() {
    let mut text = String::from("n = 8\nfleet_size = 3\nseed = 3\n");
    for (flow, tamper, reason) in [
        ("auth_trusted", "message", "mask_mismatch"),
        ("auth_trusted", "timestamp", "mask_mismatch"),
        ("auth_trusted", "mask", "mask_mismatch"),
        ("auth_trusted", "proof", "pairing_check_failed"),
        ("auth_trusted", "value", "pairing_check_failed"),
        ("auth_untrusted", "message", "mask_mismatch"),
        ("auth_untrusted", "proof", "pairing_check_failed"),
        ("auth_untrusted", "value", "pairing_check_failed"),
        ("auth_untrusted", "degenerate", "identity_element"),
    ] {
        text += &format!(
            "[[script]]\naction = \"{flow}\"\nvehicle = \"v1\"\ntamper = \"{tamper}\"\nexpect = \"reject\"\nreason = \"{reason}\"\n"
        );
    }
    text += "[[script]]\naction = \"auth_trusted\"\nvehicle = \"v0\"\nage = 301\nexpect = \"reject\"\nreason = \"stale\"\n";
    text += "[[script]]\naction = \"auth_untrusted\"\nvehicle = \"v0\"\nage = 300\n";
    text += "[[script]]\naction = \"trace\"\nvehicle = \"v2\"\n";
    let (_, report) = run_scenario(&parse(&text)).unwrap();
    assert!(report.all_met(), "{}", report.to_text());
}

#[test]
fn update_and_batch() {
    let cfg = parse(
        r#"
        n = 8
        fleet_size = 6
        seed = 4
        [[script]]
        action = "update"
        vehicle = "v3"
        [[script]]
        action = "auth_trusted"
        vehicle = "v3"
        stale = true
        expect = "reject"
        [[script]]
        action = "auth_untrusted"
        vehicle = "v3"
        [[script]]
        action = "revoke"
        vehicle = "v5"
        [[script]]
        action = "batch"
        [[script]]
        action = "batch"
        poison = ["v2"]
        expect = "reject"
        offenders = ["v2"]
        "#,
    );
    let (_, report) = run_scenario(&cfg).unwrap();
    assert!(report.all_met(), "{}", report.to_text());
    assert_eq!(report.steps[4].subject, "5 members");
    assert_eq!(report.steps[4].counts.pairings, 2);
}

#[test]
fn reports_are_deterministic() {
    let cfg = parse(
        r#"
        n = 4
        fleet_size = 2
        seed = 5
        [[script]]
        action = "auth_untrusted"
        vehicle = "v0"
        [[script]]
        action = "advance"
        seconds = 30
        [[script]]
        action = "update"
        vehicle = "v1"
        "#,
    );
    let (a_ledger, a) = run_scenario(&cfg).unwrap();
    let (b_ledger, b) = run_scenario(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(a_ledger.export(), b_ledger.export());
}

#[test]
fn config_errors() {
    assert!(matches!(
        ScenarioConfig::from_toml("n = 4\nseed = 1\nbogus = 2"),
        Err(ScenarioError::Config(_))
    ));
    let cfg = parse("n = 2\nfleet_size = 3\nseed = 1");
    assert!(matches!(run_scenario(&cfg), Err(ScenarioError::Config(_))));
    let cfg = parse("n = 2\nseed = 1\n[[script]]\naction = \"revoke\"\nvehicle = \"ghost\"");
    assert!(matches!(
        run_scenario(&cfg),
        Err(ScenarioError::ScriptReference { index: 0, .. })
    ));
    let cfg = parse(
        "n = 1\nseed = 1\n[[script]]\naction = \"issue\"\nvehicle = \"a\"\n[[script]]\naction = \"issue\"\nvehicle = \"b\"",
    );
    assert!(matches!(
        run_scenario(&cfg),
        Err(ScenarioError::Action { index: 1, .. })
    ));
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = ScenarioConfig {
        n: 4,
        fleet_size: 1,
        seed: 9,
        freshness_window: 60,
        start_time: DEFAULT_START_TIME,
        script: vec![Action::AuthTrusted(AuthStep {
            vehicle: "v0".into(),
            message: Some("hi".into()),
            age: 0,
            tamper: Some(Tamper::Mask),
            stale: false,
            expect: Expect::Reject,
            reason: Some(Rejection::MaskMismatch),
        })],
    };
    assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn bench_counts() {
    let report = bench(&BenchConfig {
        n: 32,
        batch_sizes: vec![1, 20],
        samples: 4,
        seed: 2,
    })
    .unwrap();
    let gen = report.row("gen_trusted", 1).unwrap();
    assert_eq!(gen.counts.exponentiation_class(), 3);
    assert_eq!(gen.counts.hashes, 1);
    for (op, size) in [("verify_trusted", 1), ("verify_untrusted", 1), ("batch_verify", 1), ("batch_verify", 20)] {
        let row = report.row(op, size).unwrap();
        assert_eq!(row.counts.pairings, 2, "{op} {size}");
        assert_eq!(row.rejected, 0);
    }
    assert_eq!(report.plain_tuple_bytes, 532);
    assert!(report.to_text().contains("batch_verify"));
}
