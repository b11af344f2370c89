//! Ledger file: header, hash-chained log, then a snapshot of the state the
//! log produces. Import replays the log and requires the re-exported bytes
//! to match the file exactly, so a file is either accepted whole or not at
//! all.

use std::path::Path;
use std::sync::Arc;

use super::{srs_digest, Ledger, LedgerError, LogEntry, StatusRecord};
use crate::identity::{put_field, PublicKey, Reader, PUBLIC_KEY_BYTES};
use crate::kzg::PublicParameters;

pub const LEDGER_MAGIC: &[u8; 8] = b"PBAGLDG\0";
pub const LEDGER_VERSION: u16 = 1;

impl Ledger {
    pub fn export(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(LEDGER_MAGIC);
        out.extend_from_slice(&LEDGER_VERSION.to_be_bytes());
        out.extend_from_slice(&self.srs_digest);
        out.extend_from_slice(&self.fpk.to_bytes());
        out.extend_from_slice(&(self.pp.n() as u32).to_be_bytes());

        out.extend_from_slice(&(self.log.len() as u32).to_be_bytes());
        for e in &self.log {
            out.extend_from_slice(&e.to_bytes());
        }

        out.extend_from_slice(&self.commitment.to_bytes());
        out.extend_from_slice(&(self.next_index as u32).to_be_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_be_bytes());
        for (key, record) in &self.records {
            out.extend_from_slice(&key.0);
            match record {
                StatusRecord::Cer {
                    certificate,
                    issued,
                    index,
                } => {
                    out.push(1);
                    out.extend_from_slice(&(*index as u32).to_be_bytes());
                    put_field(&mut out, &issued.to_bytes());
                    put_field(&mut out, &certificate.to_bytes());
                }
                StatusRecord::Revoked { index } => {
                    out.push(2);
                    out.extend_from_slice(&(*index as u32).to_be_bytes());
                }
                StatusRecord::Pend => out.push(3),
            }
        }
        out
    }

    pub fn import(pp: Arc<PublicParameters>, bytes: &[u8]) -> Result<Ledger, LedgerError> {
        let corrupt = |e: crate::identity::IdentityError| LedgerError::CorruptState(e.to_string());
        let mut r = Reader::new(bytes);
        let magic = r.take(LEDGER_MAGIC.len()).map_err(corrupt)?;
        if magic != LEDGER_MAGIC {
            return Err(LedgerError::CorruptState("bad magic".into()));
        }
        let version = r.u16().map_err(corrupt)?;
        if version != LEDGER_VERSION {
            return Err(LedgerError::VersionMismatch(version));
        }
        let digest = r.take(32).map_err(corrupt)?;
        if digest != srs_digest(&pp) {
            return Err(LedgerError::CorruptState(
                "ledger was built over different public parameters".into(),
            ));
        }
        let fpk = PublicKey::from_bytes(r.take(PUBLIC_KEY_BYTES).map_err(corrupt)?)
            .map_err(corrupt)?;
        let n = r.u32().map_err(corrupt)? as usize;
        if n != pp.n() {
            return Err(LedgerError::CorruptState("domain size mismatch".into()));
        }
        let count = r.u32().map_err(corrupt)? as usize;
        let mut log = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let entry = LogEntry::read(&mut r).map_err(|e| match e {
                LedgerError::Identity(e) => corrupt(e),
                other => LedgerError::CorruptState(other.to_string()),
            })?;
            log.push(entry);
        }
        let ledger = Ledger::replay(pp, fpk, &log)?;
        if ledger.export() != bytes {
            return Err(LedgerError::CorruptState(
                "snapshot does not match the replayed log".into(),
            ));
        }
        Ok(ledger)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.export())
    }

    pub fn read_from(
        pp: Arc<PublicParameters>,
        path: impl AsRef<Path>,
    ) -> Result<Ledger, LedgerError> {
        let bytes = std::fs::read(path)
            .map_err(|e| LedgerError::CorruptState(format!("read failed: {e}")))?;
        Ledger::import(pp, &bytes)
    }
}
