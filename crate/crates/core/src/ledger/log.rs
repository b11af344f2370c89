use sha2::{Digest, Sha256};

use super::LedgerError;
use crate::algebra::Scalar;
use crate::identity::{put_field, Reader};
use crate::kzg::{scalar_from_bytes, scalar_to_bytes, Commitment, UpdateKey, G1_BYTES, SCALAR_BYTES};

pub type Digest32 = [u8; 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogOp {
    Issue = 1,
    Update = 2,
    Revoke = 3,
    CommitmentUpdate = 4,
}

impl LogOp {
    fn from_byte(b: u8) -> Result<Self, LedgerError> {
        match b {
            1 => Ok(LogOp::Issue),
            2 => Ok(LogOp::Update),
            3 => Ok(LogOp::Revoke),
            4 => Ok(LogOp::CommitmentUpdate),
            _ => Err(LedgerError::CorruptState(format!("unknown log op {b}"))),
        }
    }
}

/// A single-slot change published for proof holders: slot `key.index`
/// moved by `delta`, producing `commitment`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotChange {
    pub key: UpdateKey,
    pub delta: Scalar,
    pub commitment: Commitment,
}

impl SlotChange {
    pub const ENCODED_LEN: usize = UpdateKey::ENCODED_LEN + SCALAR_BYTES + G1_BYTES;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.key.to_bytes();
        out.extend_from_slice(&scalar_to_bytes(&self.delta));
        out.extend_from_slice(&self.commitment.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LedgerError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(LedgerError::CorruptState("slot change length".into()));
        }
        let k = UpdateKey::ENCODED_LEN;
        Ok(SlotChange {
            key: UpdateKey::from_bytes(&bytes[..k])?,
            delta: scalar_from_bytes(&bytes[k..k + SCALAR_BYTES])?,
            commitment: Commitment::from_bytes(&bytes[k + SCALAR_BYTES..])?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    /// Starts at 1; strictly increasing by one.
    pub height: u64,
    pub op: LogOp,
    pub payload: Vec<u8>,
    pub payload_hash: Digest32,
    pub change: Option<SlotChange>,
    /// Hash of the preceding entry; all zero for the first.
    pub prev_hash: Digest32,
}

impl LogEntry {
    pub(crate) fn new(
        height: u64,
        op: LogOp,
        payload: Vec<u8>,
        change: Option<SlotChange>,
        prev_hash: Digest32,
    ) -> Self {
        let payload_hash = Sha256::digest(&payload).into();
        LogEntry {
            height,
            op,
            payload,
            payload_hash,
            change,
            prev_hash,
        }
    }

    pub fn hash(&self) -> Digest32 {
        let mut h = Sha256::new();
        h.update(b"pbag/log-entry");
        h.update(self.height.to_be_bytes());
        h.update([self.op as u8]);
        h.update(self.payload_hash);
        match &self.change {
            Some(c) => {
                h.update([1]);
                h.update(c.to_bytes());
            }
            None => h.update([0]),
        }
        h.update(self.prev_hash);
        h.finalize().into()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.payload.len() + SlotChange::ENCODED_LEN);
        out.extend_from_slice(&self.height.to_be_bytes());
        out.push(self.op as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.payload_hash);
        match &self.change {
            Some(c) => {
                out.push(1);
                put_field(&mut out, &c.to_bytes());
            }
            None => out.push(0),
        }
        out.extend_from_slice(&self.prev_hash);
        out
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, LedgerError> {
        let height = r.u64()?;
        let op = LogOp::from_byte(r.u8()?)?;
        let len = r.u32()? as usize;
        let payload = r.take(len)?.to_vec();
        let payload_hash: Digest32 = r.take(32)?.try_into().unwrap();
        let change = match r.u8()? {
            0 => None,
            1 => Some(SlotChange::from_bytes(r.field(SlotChange::ENCODED_LEN)?)?),
            b => return Err(LedgerError::CorruptState(format!("bad change flag {b}"))),
        };
        let prev_hash: Digest32 = r.take(32)?.try_into().unwrap();
        Ok(LogEntry {
            height,
            op,
            payload,
            payload_hash,
            change,
            prev_hash,
        })
    }
}

/// Walks the chain: heights `1..`, payload hashes, and back-links.
pub fn verify_chain(log: &[LogEntry]) -> Result<(), LedgerError> {
    let mut prev = [0u8; 32];
    for (k, e) in log.iter().enumerate() {
        if e.height != k as u64 + 1 {
            return Err(LedgerError::CorruptState(format!(
                "entry {k} has height {}",
                e.height
            )));
        }
        if e.prev_hash != prev {
            return Err(LedgerError::CorruptState(format!(
                "broken link at height {}",
                e.height
            )));
        }
        let payload_hash: Digest32 = Sha256::digest(&e.payload).into();
        if payload_hash != e.payload_hash {
            return Err(LedgerError::CorruptState(format!(
                "payload hash mismatch at height {}",
                e.height
            )));
        }
        prev = e.hash();
    }
    Ok(())
}
