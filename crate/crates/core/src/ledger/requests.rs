use super::LedgerError;
use crate::identity::{
    encrypt_id, put_field, Certificate, EncryptedId, MasterKeyPair, OnlineKeyPair, OpTag,
    PublicKey, Reader, Signature, ENCRYPTED_ID_LEN, PUBLIC_KEY_BYTES, SIGNATURE_BYTES,
};
use crate::kzg::{EvaluationProof, G1_BYTES};

/// Registration request: an RA-signed certificate for a fresh online key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssueRequest {
    pub certificate: Certificate,
}

impl IssueRequest {
    /// Root-authority side: encrypt the identity and sign the certificate.
    pub fn new(
        ra: &MasterKeyPair,
        id: &[u8],
        npk: PublicKey,
        t_expired: u64,
    ) -> Result<Self, LedgerError> {
        let e_id = encrypt_id(id, ra)?;
        Ok(Self::signed(ra, e_id, npk, t_expired))
    }

    pub fn signed(ra: &MasterKeyPair, e_id: EncryptedId, npk: PublicKey, t_expired: u64) -> Self {
        let msg = Certificate::signing_bytes(&e_id, OpTag::Issue, &npk, t_expired);
        IssueRequest {
            certificate: Certificate {
                e_id,
                op: OpTag::Issue,
                npk,
                t_expired,
                sigma: ra.sign(&msg),
            },
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.certificate.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LedgerError> {
        Ok(IssueRequest {
            certificate: Certificate::from_bytes(bytes)?,
        })
    }
}

/// Key rotation request; carries the holder's current proof so the ledger
/// can refresh it locally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateRequest {
    pub e_id: EncryptedId,
    pub npk_current: PublicKey,
    pub npk_next: PublicKey,
    pub t_expired: u64,
    /// By the current key, over `E_id || npk_next`.
    pub sig_handover: Signature,
    /// By the next key, over the new certificate's signing bytes.
    pub sig_next: Signature,
    pub proof: EvaluationProof,
}

pub(crate) fn handover_message(e_id: &EncryptedId, npk_next: &PublicKey) -> Vec<u8> {
    let mut m = e_id.0.to_vec();
    m.extend_from_slice(&npk_next.to_bytes());
    m
}

pub(crate) fn revoke_message(e_id: &EncryptedId, t_expired: u64) -> Vec<u8> {
    let mut m = e_id.0.to_vec();
    m.extend_from_slice(&t_expired.to_be_bytes());
    m
}

impl UpdateRequest {
    pub fn new(
        certificate: &Certificate,
        current: &OnlineKeyPair,
        next: &OnlineKeyPair,
        proof: EvaluationProof,
    ) -> Self {
        let e_id = certificate.e_id;
        let npk_next = next.public();
        let new_cert_bytes =
            Certificate::signing_bytes(&e_id, OpTag::Update, &npk_next, certificate.t_expired);
        UpdateRequest {
            e_id,
            npk_current: current.public(),
            npk_next,
            t_expired: certificate.t_expired,
            sig_handover: current.sign(&handover_message(&e_id, &npk_next)),
            sig_next: next.sign(&new_cert_bytes),
            proof,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(400);
        put_field(&mut out, &self.e_id.0);
        put_field(&mut out, &self.npk_current.to_bytes());
        put_field(&mut out, &self.npk_next.to_bytes());
        out.extend_from_slice(&self.t_expired.to_be_bytes());
        put_field(&mut out, &self.sig_handover.0);
        put_field(&mut out, &self.sig_next.0);
        put_field(&mut out, &self.proof.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LedgerError> {
        let mut r = Reader::new(bytes);
        let req = UpdateRequest {
            e_id: EncryptedId::from_bytes(r.field(ENCRYPTED_ID_LEN)?)?,
            npk_current: PublicKey::from_bytes(r.field(PUBLIC_KEY_BYTES)?)?,
            npk_next: PublicKey::from_bytes(r.field(PUBLIC_KEY_BYTES)?)?,
            t_expired: r.u64()?,
            sig_handover: Signature::from_bytes(r.field(SIGNATURE_BYTES)?)?,
            sig_next: Signature::from_bytes(r.field(SIGNATURE_BYTES)?)?,
            proof: EvaluationProof::from_bytes(r.field(G1_BYTES)?)?,
        };
        r.finish()?;
        Ok(req)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevokeRequest {
    pub e_id: EncryptedId,
    pub npk_current: PublicKey,
    pub t_expired: u64,
    /// By the current key, over `E_id || T_expired`.
    pub sig_revoke: Signature,
}

impl RevokeRequest {
    pub fn new(certificate: &Certificate, current: &OnlineKeyPair) -> Self {
        RevokeRequest {
            e_id: certificate.e_id,
            npk_current: current.public(),
            t_expired: certificate.t_expired,
            sig_revoke: current.sign(&revoke_message(&certificate.e_id, certificate.t_expired)),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(160);
        put_field(&mut out, &self.e_id.0);
        put_field(&mut out, &self.npk_current.to_bytes());
        out.extend_from_slice(&self.t_expired.to_be_bytes());
        put_field(&mut out, &self.sig_revoke.0);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LedgerError> {
        let mut r = Reader::new(bytes);
        let req = RevokeRequest {
            e_id: EncryptedId::from_bytes(r.field(ENCRYPTED_ID_LEN)?)?,
            npk_current: PublicKey::from_bytes(r.field(PUBLIC_KEY_BYTES)?)?,
            t_expired: r.u64()?,
            sig_revoke: Signature::from_bytes(r.field(SIGNATURE_BYTES)?)?,
        };
        r.finish()?;
        Ok(req)
    }
}
