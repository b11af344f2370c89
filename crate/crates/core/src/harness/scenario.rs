//! Declarative, seed-deterministic scripts over one ledger, one root
//! authority and one verifier. Every verification step carries an expected
//! outcome; the report records whether each expectation held.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use ark_bls12_381::{G1Affine, G2Affine};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fleet::{identity_for, FIXTURE_LIFETIME};
use crate::algebra::Scalar;
use crate::auth::{
    batch_verify_trusted, gen_auth_trusted, gen_auth_untrusted, trace, verify_auth_trusted,
    verify_auth_untrusted, AuthTupleBlinded, AuthTuplePlain, Credential, Rejection, Session,
    Verifier, DEFAULT_FRESHNESS_WINDOW,
};
use crate::identity::{KeyPair, MasterKeyPair};
use crate::kzg::PublicParameters;
use crate::ledger::{Holder, IssueRequest, Ledger, LedgerError, StatusRecord};
use crate::ops::{self, OpCounts};

pub const DEFAULT_START_TIME: u64 = 1_700_000_000;

fn default_window() -> u64 {
    DEFAULT_FRESHNESS_WINDOW
}

fn default_start() -> u64 {
    DEFAULT_START_TIME
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Domain size; also the fleet capacity.
    pub n: usize,
    /// Vehicles `v0 .. v{fleet_size-1}` enrolled before the script runs.
    #[serde(default)]
    pub fleet_size: usize,
    pub seed: u64,
    #[serde(default = "default_window")]
    pub freshness_window: u64,
    #[serde(default = "default_start")]
    pub start_time: u64,
    #[serde(default)]
    pub script: Vec<Action>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Accept,
    Reject,
}

/// Post-generation corruption applied to a tuple before verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tamper {
    Message,
    Timestamp,
    Proof,
    Value,
    Mask,
    /// Identity elements as produced by a blinder of one.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Issue {
        vehicle: String,
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        expect: Expect,
    },
    AuthTrusted(AuthStep),
    AuthUntrusted(AuthStep),
    Batch {
        /// Defaults to every vehicle whose certificate is active.
        #[serde(default)]
        vehicles: Option<Vec<String>>,
        /// Members whose proofs are corrupted before verification.
        #[serde(default)]
        poison: Vec<String>,
        #[serde(default)]
        expect: Expect,
        #[serde(default)]
        offenders: Option<Vec<String>>,
    },
    Update {
        vehicle: String,
        #[serde(default)]
        expect: Expect,
    },
    Revoke {
        vehicle: String,
        #[serde(default)]
        expect: Expect,
    },
    Trace {
        vehicle: String,
    },
    Advance {
        seconds: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthStep {
    pub vehicle: String,
    #[serde(default)]
    pub message: Option<String>,
    /// The tuple is stamped this many seconds before the current time.
    #[serde(default)]
    pub age: u64,
    #[serde(default)]
    pub tamper: Option<Tamper>,
    /// Authenticate with the material held before the last update.
    #[serde(default)]
    pub stale: bool,
    #[serde(default)]
    pub expect: Expect,
    #[serde(default)]
    pub reason: Option<Rejection>,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Issue { .. } => "issue",
            Action::AuthTrusted(_) => "auth_trusted",
            Action::AuthUntrusted(_) => "auth_untrusted",
            Action::Batch { .. } => "batch",
            Action::Update { .. } => "update",
            Action::Revoke { .. } => "revoke",
            Action::Trace { .. } => "trace",
            Action::Advance { .. } => "advance",
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("action {index}: unknown vehicle `{label}`")]
    ScriptReference { index: usize, label: String },
    #[error("action {index} ({action}): {source}")]
    Action {
        index: usize,
        action: &'static str,
        source: LedgerError,
    },
    #[error("final ledger fails its invariants: {0}")]
    Invariants(LedgerError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Rejected { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub index: usize,
    pub action: &'static str,
    pub subject: String,
    pub outcome: Option<Outcome>,
    pub expected: Option<Expect>,
    pub met: bool,
    pub counts: OpCounts,
    /// Encoded size of the tuple produced by this step, if any.
    pub bytes: Option<usize>,
}

/// Everything in the report is a function of the config, so two runs of one
/// config produce identical reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioReport {
    pub steps: Vec<Step>,
    pub totals: OpCounts,
    pub accepted: usize,
    pub rejected: usize,
    pub unmet: usize,
    pub height: u64,
    pub commitment: String,
}

impl ScenarioReport {
    pub fn all_met(&self) -> bool {
        self.unmet == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:>4}  {:<15} {:<12} {:<28} {:<6} {:>3} {:>4} {:>4} {:>4} {:>6}",
            "#", "action", "subject", "outcome", "met", "bp", "exp", "sm", "h", "bytes"
        )
        .unwrap();
        for s in &self.steps {
            let outcome = match &s.outcome {
                None => "done".to_string(),
                Some(Outcome::Accepted) => "accepted".to_string(),
                Some(Outcome::Rejected { reason }) => format!("rejected: {reason}"),
            };
            let bytes = s.bytes.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:>4}  {:<15} {:<12} {:<28} {:<6} {:>3} {:>4} {:>4} {:>4} {:>6}",
                s.index,
                s.action,
                truncate(&s.subject, 12),
                truncate(&outcome, 28),
                if s.met { "yes" } else { "NO" },
                s.counts.pairings,
                s.counts.exponentiations,
                s.counts.scalar_muls,
                s.counts.hashes,
                bytes
            )
            .unwrap();
        }
        writeln!(
            out,
            "accepted={} rejected={} unmet={} height={} pairings={} commitment={}",
            self.accepted, self.rejected, self.unmet, self.height, self.totals.pairings, self.commitment
        )
        .unwrap();
        out
    }
}

fn truncate(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        s.chars().take(width - 1).chain(std::iter::once('~')).collect()
    }
}

struct Vehicle {
    holder: Holder,
    previous: Option<Holder>,
}

struct Engine {
    ra: MasterKeyPair,
    ledger: Ledger,
    verifier: Verifier,
    vehicles: BTreeMap<String, Vehicle>,
    rng: ChaCha20Rng,
    now: u64,
    window: u64,
    start: u64,
}

enum Flow<'a> {
    Plain(&'a mut AuthTuplePlain),
    Blinded(&'a mut AuthTupleBlinded),
}

fn apply_tamper(flow: Flow<'_>, tamper: Tamper) {
    let g1 = G1Affine::generator();
    let bump1 = |p: &mut G1Affine| *p = (p.into_group() + g1).into_affine();
    match flow {
        Flow::Plain(t) => match tamper {
            Tamper::Message => flip(&mut t.message),
            Tamper::Timestamp => t.timestamp ^= 1,
            Tamper::Proof => bump1(&mut t.proof.0),
            Tamper::Value => {
                t.u += Scalar::one();
                bump1(&mut t.g_u);
            }
            Tamper::Mask => t.m_a[0] ^= 1,
            Tamper::Degenerate => t.proof.0 = G1Affine::zero(),
        },
        Flow::Blinded(t) => match tamper {
            Tamper::Message => flip(&mut t.message),
            Tamper::Timestamp => t.timestamp ^= 1,
            Tamper::Proof => bump1(&mut t.pi_au),
            Tamper::Value => bump1(&mut t.g_u_prime_au),
            Tamper::Mask => t.m_a[0] ^= 1,
            Tamper::Degenerate => {
                t.pi_au = G1Affine::zero();
                t.g_r_minus_1 = G2Affine::zero();
            }
        },
    }
}

fn flip(message: &mut Vec<u8>) {
    match message.first_mut() {
        Some(b) => *b ^= 1,
        None => message.push(0),
    }
}

fn verdict(result: Result<(), Rejection>) -> Outcome {
    match result {
        Ok(()) => Outcome::Accepted,
        Err(why) => Outcome::Rejected {
            reason: serde_json::to_value(why)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_else(|| why.to_string()),
        },
    }
}

impl Engine {
    fn vehicle(&self, index: usize, label: &str) -> Result<&Vehicle, ScenarioError> {
        self.vehicles.get(label).ok_or_else(|| ScenarioError::ScriptReference {
            index,
            label: label.to_string(),
        })
    }

    fn sync_all(&mut self) -> Result<(), LedgerError> {
        let n = self.ledger.pp().n();
        for v in self.vehicles.values_mut() {
            v.holder.sync(self.ledger.log(), n)?;
        }
        Ok(())
    }

    fn issue(&mut self, label: &str, id: Option<&str>) -> Result<(), LedgerError> {
        let online = KeyPair::generate(&mut self.rng);
        let id = id.map(|s| s.as_bytes().to_vec()).unwrap_or_else(|| identity_for(label));
        let req = IssueRequest::new(&self.ra, &id, online.public(), self.start + FIXTURE_LIFETIME)?;
        let enrollment = self.ledger.issue_certificate(&req, self.now)?;
        self.vehicles.insert(
            label.to_string(),
            Vehicle {
                holder: Holder::new(online, enrollment),
                previous: None,
            },
        );
        self.sync_all()
    }

    fn update(&mut self, label: &str) -> Result<(), LedgerError> {
        let next = KeyPair::generate(&mut self.rng);
        let v = self.vehicles.get_mut(label).expect("checked by caller");
        let req = v.holder.update_request(&next);
        let enrollment = self.ledger.update_certificate(&req, self.now)?;
        v.previous = Some(v.holder.clone());
        v.holder.apply_update(next, enrollment);
        self.sync_all()
    }

    fn revoke(&mut self, label: &str) -> Result<(), LedgerError> {
        let req = self.vehicles[label].holder.revoke_request();
        self.ledger.revoke_certificate(&req, self.now)?;
        self.sync_all()
    }

    fn holder(&self, label: &str, stale: bool) -> &Holder {
        let v = &self.vehicles[label];
        match (&v.previous, stale) {
            (Some(p), true) => p,
            _ => &v.holder,
        }
    }

    fn auth(&mut self, step: &AuthStep, blinded: bool) -> (Result<(), Rejection>, usize) {
        let holder = self.holder(&step.vehicle, step.stale).clone();
        let session = Session::new(&mut self.rng, holder.online());
        let message = step
            .message
            .clone()
            .unwrap_or_else(|| format!("beacon from {}", step.vehicle))
            .into_bytes();
        let t = self.now.saturating_sub(step.age);
        let cred = Credential::from(&holder);
        let fpk = self.ra.public();
        let peer = self.verifier.published();
        let pp = self.ledger.pp().clone();
        let c = self.ledger.commitment();
        let sender = session.published();
        if blinded {
            let mut tuple = gen_auth_untrusted(&cred, &session, &fpk, &peer, &message, t);
            if let Some(x) = step.tamper {
                apply_tamper(Flow::Blinded(&mut tuple), x);
            }
            let r = verify_auth_untrusted(&pp, &c, &tuple, &self.verifier, &sender, self.window, self.now);
            (r, tuple.encoded_len())
        } else {
            let mut tuple = gen_auth_trusted(&cred, &session, &fpk, &peer, &message, t);
            if let Some(x) = step.tamper {
                apply_tamper(Flow::Plain(&mut tuple), x);
            }
            let r = verify_auth_trusted(&pp, &c, &tuple, &self.verifier, &sender, self.window, self.now);
            (r, tuple.encoded_len())
        }
    }

    fn batch(
        &mut self,
        index: usize,
        labels: &[String],
        poison: &[String],
    ) -> Result<(Vec<String>, usize), ScenarioError> {
        let mut tuples = Vec::with_capacity(labels.len());
        let mut bytes = 0;
        for label in labels {
            self.vehicle(index, label)?;
            let holder = self.vehicles[label].holder.clone();
            let session = Session::new(&mut self.rng, holder.online());
            let mut tuple = gen_auth_trusted(
                &Credential::from(&holder),
                &session,
                &self.ra.public(),
                &self.verifier.published(),
                format!("beacon from {label}").as_bytes(),
                self.now,
            );
            if poison.contains(label) {
                apply_tamper(Flow::Plain(&mut tuple), Tamper::Proof);
            }
            bytes += tuple.encoded_len();
            tuples.push((tuple, session.published()));
        }
        for label in poison {
            self.vehicle(index, label)?;
        }
        let refs: Vec<_> = tuples.iter().map(|(t, s)| (t, s)).collect();
        let verdict = batch_verify_trusted(
            self.ledger.pp(),
            &self.ledger.commitment(),
            &refs,
            &self.verifier,
            self.window,
            self.now,
        )
        .map_err(|e| ScenarioError::Config(format!("action {index}: {e}")))?;
        let offenders = verdict.offenders.iter().map(|(p, _)| labels[*p].clone()).collect();
        Ok((offenders, bytes))
    }

    fn active_labels(&self) -> Vec<String> {
        self.vehicles
            .iter()
            .filter(|(_, v)| {
                matches!(
                    self.ledger.search(&v.holder.ledger_key()),
                    Some(StatusRecord::Cer { .. })
                )
            })
            .map(|(l, _)| l.clone())
            .collect()
    }
}

/// Runs `config` and returns the final ledger with the step-by-step report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(Ledger, ScenarioReport), ScenarioError> {
    if config.fleet_size > config.n {
        return Err(ScenarioError::Config(format!(
            "fleet_size {} exceeds domain size {}",
            config.fleet_size, config.n
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let pp = PublicParameters::setup(config.n, &mut rng)
        .map_err(|e| ScenarioError::Config(e.to_string()))?;
    let ra = KeyPair::generate(&mut rng);
    let verifier = Verifier::new(&mut rng);
    let mut engine = Engine {
        ledger: Ledger::new(Arc::new(pp), ra.public()),
        ra,
        verifier,
        vehicles: BTreeMap::new(),
        rng,
        now: config.start_time,
        window: config.freshness_window,
        start: config.start_time,
    };
    for k in 0..config.fleet_size {
        engine
            .issue(&format!("v{k}"), None)
            .map_err(|source| ScenarioError::Action {
                index: 0,
                action: "issue",
                source,
            })?;
    }

    let mut steps = Vec::with_capacity(config.script.len());
    for (index, action) in config.script.iter().enumerate() {
        let before = ops::snapshot();
        let mut step = Step {
            index,
            action: action.name(),
            subject: String::new(),
            outcome: None,
            expected: None,
            met: true,
            counts: OpCounts::default(),
            bytes: None,
        };
        let ledger_step = |step: &mut Step, expect: Expect, r: Result<(), LedgerError>| {
            step.expected = Some(expect);
            match (r, expect) {
                (Ok(()), _) => {
                    step.outcome = Some(Outcome::Accepted);
                    step.met = expect == Expect::Accept;
                    Ok(())
                }
                (Err(e), Expect::Reject) => {
                    step.outcome = Some(Outcome::Rejected {
                        reason: e.to_string(),
                    });
                    Ok(())
                }
                (Err(source), Expect::Accept) => Err(ScenarioError::Action {
                    index,
                    action: action.name(),
                    source,
                }),
            }
        };
        match action {
            Action::Issue {
                vehicle,
                id,
                expect,
            } => {
                step.subject = vehicle.clone();
                let r = engine.issue(vehicle, id.as_deref());
                ledger_step(&mut step, *expect, r)?;
            }
            Action::Update { vehicle, expect } => {
                engine.vehicle(index, vehicle)?;
                step.subject = vehicle.clone();
                let r = engine.update(vehicle);
                ledger_step(&mut step, *expect, r)?;
            }
            Action::Revoke { vehicle, expect } => {
                engine.vehicle(index, vehicle)?;
                step.subject = vehicle.clone();
                let r = engine.revoke(vehicle);
                ledger_step(&mut step, *expect, r)?;
            }
            Action::AuthTrusted(a) | Action::AuthUntrusted(a) => {
                engine.vehicle(index, &a.vehicle)?;
                step.subject = a.vehicle.clone();
                let blinded = matches!(action, Action::AuthUntrusted(_));
                let (r, bytes) = engine.auth(a, blinded);
                step.met = match (&r, a.expect) {
                    (Ok(()), Expect::Accept) => true,
                    (Err(why), Expect::Reject) => a.reason.is_none_or(|want| want == *why),
                    _ => false,
                };
                step.expected = Some(a.expect);
                step.outcome = Some(verdict(r));
                step.bytes = Some(bytes);
            }
            Action::Batch {
                vehicles,
                poison,
                expect,
                offenders,
            } => {
                let labels = vehicles.clone().unwrap_or_else(|| engine.active_labels());
                step.subject = format!("{} members", labels.len());
                let (got, bytes) = engine.batch(index, &labels, poison)?;
                let accepted = got.is_empty();
                step.expected = Some(*expect);
                step.met = accepted == (*expect == Expect::Accept)
                    && offenders.as_ref().is_none_or(|want| *want == got);
                step.outcome = Some(if accepted {
                    Outcome::Accepted
                } else {
                    Outcome::Rejected {
                        reason: format!("offenders {}", got.join(",")),
                    }
                });
                step.bytes = Some(bytes);
            }
            Action::Trace { vehicle } => {
                engine.vehicle(index, vehicle)?;
                step.subject = vehicle.clone();
                let holder = engine.vehicles[vehicle].holder.clone();
                let session = Session::new(&mut engine.rng, holder.online());
                let tuple = gen_auth_untrusted(
                    &Credential::from(&holder),
                    &session,
                    &engine.ra.public(),
                    &engine.verifier.published(),
                    b"trace probe",
                    engine.now,
                );
                let found = trace(&tuple.e_a, &session.published(), &engine.ra)
                    .ok()
                    .filter(|(key, t)| *key == holder.ledger_key() && *t == engine.now)
                    .and_then(|(key, _)| engine.ledger.search(&key).cloned());
                step.expected = Some(Expect::Accept);
                step.met = found.is_some();
                step.outcome = Some(match found {
                    Some(_) => Outcome::Accepted,
                    None => Outcome::Rejected {
                        reason: "trace did not resolve".into(),
                    },
                });
            }
            Action::Advance { seconds } => {
                engine.now += seconds;
                step.subject = format!("+{seconds}s");
            }
        }
        step.counts = ops::snapshot() - before;
        steps.push(step);
    }

    engine.ledger.check_invariants().map_err(ScenarioError::Invariants)?;
    let mut totals = OpCounts::default();
    for s in &steps {
        totals += s.counts;
    }
    let count = |want: fn(&Outcome) -> bool| {
        steps
            .iter()
            .filter(|s| s.expected.is_some() && s.outcome.as_ref().is_some_and(want))
            .count()
    };
    let report = ScenarioReport {
        accepted: count(|o| matches!(o, Outcome::Accepted)),
        rejected: count(|o| matches!(o, Outcome::Rejected { .. })),
        unmet: steps.iter().filter(|s| !s.met).count(),
        totals,
        height: engine.ledger.height(),
        commitment: engine
            .ledger
            .commitment()
            .to_bytes()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect(),
        steps,
    };
    Ok((engine.ledger, report))
}
