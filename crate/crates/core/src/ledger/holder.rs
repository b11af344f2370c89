use super::{Enrollment, LedgerError, LogEntry, RevokeRequest, UpdateRequest};
use crate::identity::{
    put_field, Certificate, IdentityError, LedgerKey, OnlineKeyPair, ParameterSet, Reader,
    SECRET_KEY_BYTES,
};
use crate::kzg::{update_proof_other, KzgError};

/// Vehicle-side wallet: online key, certificate and membership material,
/// kept current by replaying published slot changes.
#[derive(Clone, Debug)]
pub struct Holder {
    online: OnlineKeyPair,
    certificate: Certificate,
    params: ParameterSet,
    synced_height: u64,
    revoked: bool,
}

const HOLDER_VERSION: u8 = 1;

impl Holder {
    pub fn new(online: OnlineKeyPair, enrollment: Enrollment) -> Self {
        Holder {
            online,
            certificate: enrollment.certificate,
            params: enrollment.params,
            synced_height: enrollment.height,
            revoked: false,
        }
    }

    pub fn online(&self) -> &OnlineKeyPair {
        &self.online
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn ledger_key(&self) -> LedgerKey {
        self.certificate.e_id.ledger_key()
    }

    pub fn synced_height(&self) -> u64 {
        self.synced_height
    }

    /// Set once a change to this holder's own slot shows up in the log
    /// without this holder having requested it.
    pub fn is_revoked(&self) -> bool {
        self.revoked
    }

    /// Applies every slot change after the last synced height. Other slots'
    /// changes refresh the proof; a change to the own slot means revocation
    /// and stops syncing. Returns the number of changes applied.
    pub fn sync(&mut self, log: &[LogEntry], n: usize) -> Result<usize, KzgError> {
        if self.revoked {
            return Ok(0);
        }
        let start = (self.synced_height as usize).min(log.len());
        let mut applied = 0;
        for entry in &log[start..] {
            if let Some(change) = &entry.change {
                if change.key.index == self.params.index {
                    self.revoked = true;
                    return Ok(applied);
                }
                self.params.proof = update_proof_other(
                    &self.params.proof,
                    &self.params.update_key,
                    &change.key,
                    change.delta,
                    n,
                )?;
                applied += 1;
            }
            self.synced_height = entry.height;
        }
        Ok(applied)
    }

    pub fn update_request(&self, next: &OnlineKeyPair) -> UpdateRequest {
        UpdateRequest::new(&self.certificate, &self.online, next, self.params.proof)
    }

    pub fn apply_update(&mut self, next: OnlineKeyPair, enrollment: Enrollment) {
        *self = Holder::new(next, enrollment);
    }

    pub fn revoke_request(&self) -> RevokeRequest {
        RevokeRequest::new(&self.certificate, &self.online)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![HOLDER_VERSION];
        out.extend_from_slice(&self.online.secret_bytes());
        put_field(&mut out, &self.certificate.to_bytes());
        put_field(&mut out, &self.params.to_bytes());
        out.extend_from_slice(&self.synced_height.to_be_bytes());
        out.push(self.revoked as u8);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LedgerError> {
        let mut r = Reader::new(bytes);
        let version = r.u8()?;
        if version != HOLDER_VERSION {
            return Err(LedgerError::VersionMismatch(version as u16));
        }
        let online = OnlineKeyPair::from_secret_bytes(r.take(SECRET_KEY_BYTES)?)?;
        let certificate = Certificate::from_bytes(r.field(Certificate::ENCODED_LEN)?)?;
        let params = ParameterSet::from_bytes(r.field(ParameterSet::ENCODED_LEN)?)?;
        let synced_height = r.u64()?;
        let revoked = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(IdentityError::Encoding("revoked flag".into()).into()),
        };
        r.finish()?;
        if certificate.npk != online.public() {
            return Err(IdentityError::Encoding("certificate key does not match".into()).into());
        }
        Ok(Holder {
            online,
            certificate,
            params,
            synced_height,
            revoked,
        })
    }
}
