//! Single-writer certificate ledger: a key-value map from clipped encrypted
//! identities to certificate status, the global commitment over every
//! slot's value, and a hash-chained log from which the whole state can be
//! replayed.
//!
//! Slots are assigned monotonically and never reused. Free and revoked
//! slots hold the sentinel value 0.

mod holder;
mod io;
mod log;
mod requests;

pub use holder::Holder;
pub use io::{LEDGER_MAGIC, LEDGER_VERSION};
pub use log::{verify_chain, Digest32, LogEntry, LogOp, SlotChange};
pub use requests::{IssueRequest, RevokeRequest, UpdateRequest};

use std::collections::BTreeMap;
use std::sync::Arc;

use ark_ec::CurveGroup;
use ark_ff::Zero;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::Scalar;
use crate::identity::{
    check_sig, derive_u, Certificate, IdentityError, LedgerKey, OpTag, ParameterSet, PublicKey,
};
use crate::kzg::{
    g1_mul, g2_mul, update_commitment, update_proof_local, verify_single, Commitment, KzgError,
    PublicParameters,
};

/// Value held by free and revoked slots.
pub const SENTINEL: Scalar = <Scalar as ark_ff::AdditiveGroup>::ZERO;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("identity is already registered")]
    AlreadyRegistered,
    #[error("identity is not registered")]
    NotRegistered,
    #[error("identity has been revoked")]
    Revoked,
    #[error("all {0} slots are assigned")]
    CapacityExhausted(usize),
    #[error("certificate signature does not verify under the root authority key")]
    InvalidRaSignature,
    #[error("ownership check failed: {0}")]
    OwnershipCheckFailed(&'static str),
    #[error("identity is pending and needs root authority validation")]
    PendNeedsRaValidation,
    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition {
        from: &'static str,
        to: &'static str,
    },
    #[error("certificate expired at {t_expired}, now {now}")]
    Expired { t_expired: u64, now: u64 },
    #[error("request has the wrong operation tag")]
    WrongOperation,
    #[error("derived value collides with the revocation sentinel")]
    SentinelValue,
    #[error("presented proof does not verify against the current commitment")]
    StaleProof,
    #[error(transparent)]
    Kzg(#[from] KzgError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error("corrupt ledger state: {0}")]
    CorruptState(String),
    #[error("unsupported ledger file version {0}")]
    VersionMismatch(u16),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatusRecord {
    Cer {
        certificate: Certificate,
        /// The root-authority-signed certificate from registration.
        issued: Certificate,
        index: usize,
    },
    Revoked {
        index: usize,
    },
    Pend,
}

impl StatusRecord {
    pub fn name(&self) -> &'static str {
        match self {
            StatusRecord::Cer { .. } => "cer",
            StatusRecord::Revoked { .. } => "revoke",
            StatusRecord::Pend => "pend",
        }
    }
}

/// Legal status transitions; revoke is absorbing.
pub fn check_transition(
    from: Option<&StatusRecord>,
    to: &StatusRecord,
) -> Result<(), LedgerError> {
    use StatusRecord::*;
    let ok = matches!(
        (from, to),
        (None, Pend)
            | (None, Cer { .. })
            | (Some(Pend), Cer { .. })
            | (Some(Cer { .. }), Cer { .. })
            | (Some(Cer { .. }), Revoked { .. })
    );
    if ok {
        Ok(())
    } else {
        Err(LedgerError::IllegalTransition {
            from: from.map_or("null", StatusRecord::name),
            to: to.name(),
        })
    }
}

/// What a holder receives on issue or update.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enrollment {
    pub certificate: Certificate,
    pub params: ParameterSet,
    /// Ledger height the parameters are current at.
    pub height: u64,
}

#[derive(Clone, Debug)]
pub struct Ledger {
    pp: Arc<PublicParameters>,
    srs_digest: Digest32,
    fpk: PublicKey,
    records: BTreeMap<LedgerKey, StatusRecord>,
    evals: Vec<Scalar>,
    commitment: Commitment,
    next_index: usize,
    log: Vec<LogEntry>,
}

pub(crate) fn srs_digest(pp: &PublicParameters) -> Digest32 {
    Sha256::digest(pp.to_bytes()).into()
}

impl Ledger {
    pub fn new(pp: Arc<PublicParameters>, fpk: PublicKey) -> Self {
        let n = pp.n();
        Ledger {
            srs_digest: srs_digest(&pp),
            pp,
            fpk,
            records: BTreeMap::new(),
            evals: vec![SENTINEL; n],
            commitment: Commitment::identity(),
            next_index: 0,
            log: Vec::new(),
        }
    }

    pub fn pp(&self) -> &Arc<PublicParameters> {
        &self.pp
    }

    pub fn fpk(&self) -> PublicKey {
        self.fpk
    }

    pub fn commitment(&self) -> Commitment {
        self.commitment
    }

    pub fn evaluations(&self) -> &[Scalar] {
        &self.evals
    }

    pub fn next_index(&self) -> usize {
        self.next_index
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn height(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn records(&self) -> &BTreeMap<LedgerKey, StatusRecord> {
        &self.records
    }

    /// `None` when the key has never been seen.
    pub fn search(&self, key: &LedgerKey) -> Option<&StatusRecord> {
        self.records.get(key)
    }

    fn mapping(&mut self, key: LedgerKey, record: StatusRecord) -> Result<(), LedgerError> {
        check_transition(self.records.get(&key), &record)?;
        self.records.insert(key, record);
        Ok(())
    }

    fn append(&mut self, op: LogOp, payload: Vec<u8>, change: Option<SlotChange>) {
        let prev_hash = self.log.last().map_or([0u8; 32], LogEntry::hash);
        let entry = LogEntry::new(self.height() + 1, op, payload, change, prev_hash);
        self.log.push(entry);
    }

    fn append_request(&mut self, op: LogOp, now: u64, request: Vec<u8>) {
        let mut payload = now.to_be_bytes().to_vec();
        payload.extend_from_slice(&request);
        self.append(op, payload, None);
    }

    /// Moves slot `i` by `delta`, updates the commitment and publishes the
    /// change for other holders.
    fn change_slot(&mut self, i: usize, delta: Scalar) -> Result<SlotChange, LedgerError> {
        self.commitment = update_commitment(&self.pp, &self.commitment, i, delta)?;
        self.evals[i] += delta;
        let change = SlotChange {
            key: self.pp.update_key(i)?,
            delta,
            commitment: self.commitment,
        };
        self.append(LogOp::CommitmentUpdate, change.to_bytes(), Some(change));
        Ok(change)
    }

    fn parameter_set(&self, i: usize, proof: crate::kzg::EvaluationProof) -> ParameterSet {
        let omega = self.pp.domain().element(i);
        let u = self.evals[i];
        ParameterSet {
            index: i,
            omega,
            u,
            g_omega: g2_mul(&self.pp.g2(), omega).into_affine(),
            g_u: g1_mul(&self.pp.g1(), u).into_affine(),
            proof,
            update_key: self.pp.update_key(i).expect("index in domain"),
        }
    }

    /// Registration. A request whose root-authority signature fails is filed
    /// as pending and reported as `InvalidRaSignature`.
    pub fn issue_certificate(
        &mut self,
        req: &IssueRequest,
        now: u64,
    ) -> Result<Enrollment, LedgerError> {
        let cert = &req.certificate;
        let key = cert.e_id.ledger_key();
        match self.search(&key) {
            Some(StatusRecord::Cer { .. }) => return Err(LedgerError::AlreadyRegistered),
            Some(StatusRecord::Revoked { .. }) => return Err(LedgerError::Revoked),
            Some(StatusRecord::Pend) | None => {}
        }
        if cert.op != OpTag::Issue {
            return Err(LedgerError::WrongOperation);
        }
        if cert.t_expired <= now {
            return Err(LedgerError::Expired {
                t_expired: cert.t_expired,
                now,
            });
        }
        if self.next_index >= self.pp.n() {
            return Err(LedgerError::CapacityExhausted(self.pp.n()));
        }
        let signed = Certificate::signing_bytes(&cert.e_id, cert.op, &cert.npk, cert.t_expired);
        if !check_sig(&self.fpk, &cert.sigma, &signed) {
            if self.search(&key).is_none() {
                self.mapping(key, StatusRecord::Pend)?;
                self.append_request(LogOp::Issue, now, req.to_bytes());
            }
            return Err(LedgerError::InvalidRaSignature);
        }
        let u = derive_u(&cert.e_id, &cert.npk);
        if u == SENTINEL {
            return Err(LedgerError::SentinelValue);
        }

        let i = self.next_index;
        self.mapping(
            key,
            StatusRecord::Cer {
                certificate: cert.clone(),
                issued: cert.clone(),
                index: i,
            },
        )?;
        self.next_index += 1;
        self.append_request(LogOp::Issue, now, req.to_bytes());
        self.change_slot(i, u - SENTINEL)?;

        let poly = self.pp.domain().interpolate(&self.evals).map_err(KzgError::from)?;
        let (_, proof) = self.pp.prove_single(&poly, i)?;
        Ok(Enrollment {
            certificate: cert.clone(),
            params: self.parameter_set(i, proof),
            height: self.height(),
        })
    }

    /// Online-key rotation with an ownership handover.
    pub fn update_certificate(
        &mut self,
        req: &UpdateRequest,
        now: u64,
    ) -> Result<Enrollment, LedgerError> {
        let key = req.e_id.ledger_key();
        let (current, issued, i) = match self.search(&key) {
            Some(StatusRecord::Cer {
                certificate,
                issued,
                index,
            }) => (certificate.clone(), issued.clone(), *index),
            Some(StatusRecord::Pend) => return Err(LedgerError::PendNeedsRaValidation),
            Some(StatusRecord::Revoked { .. }) => return Err(LedgerError::Revoked),
            None => return Err(LedgerError::NotRegistered),
        };
        if req.npk_current != current.npk {
            return Err(LedgerError::OwnershipCheckFailed("current key does not match"));
        }
        if !check_sig(
            &req.npk_current,
            &req.sig_handover,
            &requests::handover_message(&req.e_id, &req.npk_next),
        ) {
            return Err(LedgerError::OwnershipCheckFailed("handover signature"));
        }
        let new_cert_bytes =
            Certificate::signing_bytes(&req.e_id, OpTag::Update, &req.npk_next, req.t_expired);
        if !check_sig(&req.npk_next, &req.sig_next, &new_cert_bytes) {
            return Err(LedgerError::OwnershipCheckFailed("next-key signature"));
        }
        if req.t_expired != current.t_expired {
            return Err(LedgerError::OwnershipCheckFailed("expiry does not match"));
        }
        if current.t_expired <= now {
            return Err(LedgerError::Expired {
                t_expired: current.t_expired,
                now,
            });
        }
        let omega = self.pp.domain().element(i);
        if !verify_single(&self.pp, &self.commitment, omega, self.evals[i], &req.proof) {
            return Err(LedgerError::StaleProof);
        }
        let u_next = derive_u(&req.e_id, &req.npk_next);
        if u_next == SENTINEL {
            return Err(LedgerError::SentinelValue);
        }

        let certificate = Certificate {
            e_id: req.e_id,
            op: OpTag::Update,
            npk: req.npk_next,
            t_expired: req.t_expired,
            sigma: req.sig_next,
        };
        self.mapping(
            key,
            StatusRecord::Cer {
                certificate: certificate.clone(),
                issued,
                index: i,
            },
        )?;
        self.append_request(LogOp::Update, now, req.to_bytes());
        let delta = u_next - self.evals[i];
        let change = self.change_slot(i, delta)?;
        let proof = update_proof_local(&req.proof, &change.key, delta);
        Ok(Enrollment {
            certificate,
            params: self.parameter_set(i, proof),
            height: self.height(),
        })
    }

    /// Drives the slot to the sentinel; returns the new height.
    pub fn revoke_certificate(&mut self, req: &RevokeRequest, now: u64) -> Result<u64, LedgerError> {
        let key = req.e_id.ledger_key();
        let (current, issued, i) = match self.search(&key) {
            Some(StatusRecord::Cer {
                certificate,
                issued,
                index,
            }) => (certificate.clone(), issued.clone(), *index),
            Some(StatusRecord::Revoked { .. }) => return Err(LedgerError::Revoked),
            Some(StatusRecord::Pend) | None => return Err(LedgerError::NotRegistered),
        };
        let issued_bytes =
            Certificate::signing_bytes(&issued.e_id, issued.op, &issued.npk, issued.t_expired);
        if !check_sig(&self.fpk, &issued.sigma, &issued_bytes) {
            return Err(LedgerError::InvalidRaSignature);
        }
        if req.npk_current != current.npk {
            return Err(LedgerError::OwnershipCheckFailed("current key does not match"));
        }
        if req.t_expired != current.t_expired {
            return Err(LedgerError::OwnershipCheckFailed("expiry does not match"));
        }
        if !check_sig(
            &req.npk_current,
            &req.sig_revoke,
            &requests::revoke_message(&req.e_id, req.t_expired),
        ) {
            return Err(LedgerError::OwnershipCheckFailed("revocation signature"));
        }

        self.mapping(key, StatusRecord::Revoked { index: i })?;
        self.append_request(LogOp::Revoke, now, req.to_bytes());
        let delta = SENTINEL - self.evals[i];
        self.change_slot(i, delta)?;
        Ok(self.height())
    }

    /// Checks the commitment against a from-scratch recomputation, the
    /// slot counter against capacity, and the log chain.
    pub fn check_invariants(&self) -> Result<(), LedgerError> {
        if self.next_index > self.pp.n() {
            return Err(LedgerError::CorruptState("slot counter past capacity".into()));
        }
        if self.evals[self.next_index..].iter().any(|u| !u.is_zero()) {
            return Err(LedgerError::CorruptState("unassigned slot holds a value".into()));
        }
        let fresh = self.pp.commit_evaluations(&self.evals)?;
        if fresh != self.commitment {
            return Err(LedgerError::CorruptState("commitment mismatch".into()));
        }
        verify_chain(&self.log)
    }

    /// Rebuilds a ledger by re-executing every request in `log` against an
    /// empty state; the regenerated log must match entry for entry.
    pub fn replay(
        pp: Arc<PublicParameters>,
        fpk: PublicKey,
        log: &[LogEntry],
    ) -> Result<Ledger, LedgerError> {
        verify_chain(log)?;
        let corrupt = |e: LedgerError| LedgerError::CorruptState(format!("replay: {e}"));
        let mut ledger = Ledger::new(pp, fpk);
        for entry in log {
            if entry.op == LogOp::CommitmentUpdate {
                continue;
            }
            let before = ledger.height();
            if entry.payload.len() < 8 {
                return Err(LedgerError::CorruptState("short payload".into()));
            }
            let now = u64::from_be_bytes(entry.payload[..8].try_into().unwrap());
            let body = &entry.payload[8..];
            let result = match entry.op {
                LogOp::Issue => {
                    let req = IssueRequest::from_bytes(body).map_err(corrupt)?;
                    ledger.issue_certificate(&req, now).map(|_| ())
                }
                LogOp::Update => {
                    let req = UpdateRequest::from_bytes(body).map_err(corrupt)?;
                    ledger.update_certificate(&req, now).map(|_| ())
                }
                LogOp::Revoke => {
                    let req = RevokeRequest::from_bytes(body).map_err(corrupt)?;
                    ledger.revoke_certificate(&req, now).map(|_| ())
                }
                LogOp::CommitmentUpdate => unreachable!(),
            };
            match result {
                Ok(()) => {}
                Err(LedgerError::InvalidRaSignature) if ledger.height() > before => {}
                Err(e) => return Err(corrupt(e)),
            }
            let produced = &ledger.log[before as usize..];
            let expected = log.get(before as usize..ledger.log.len());
            if expected != Some(produced) {
                return Err(LedgerError::CorruptState(format!(
                    "replay diverges at height {}",
                    before + 1
                )));
            }
        }
        if ledger.log.len() != log.len() {
            return Err(LedgerError::CorruptState("log has dangling entries".into()));
        }
        ledger.check_invariants()?;
        Ok(ledger)
    }
}
