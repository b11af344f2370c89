use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::auth::{
    gen_auth_trusted, gen_auth_untrusted, AuthTupleBlinded, AuthTuplePlain, Credential, Session,
    Verifier,
};
use crate::identity::{KeyPair, MasterKeyPair, PublicKey, IDENTITY_LEN};
use crate::kzg::PublicParameters;
use crate::ledger::{Holder, IssueRequest, Ledger, LedgerError};

/// Certificates issued by fixtures stay valid this long.
pub const FIXTURE_LIFETIME: u64 = 365 * 24 * 3600;

/// An 18-character vehicle identity derived from a label.
pub fn identity_for(label: &str) -> Vec<u8> {
    let digest = Sha256::digest([b"pbag/fixture-id/".as_slice(), label.as_bytes()].concat());
    let hex: String = digest.iter().map(|b| format!("{b:02X}")).collect();
    hex.as_bytes()[..IDENTITY_LEN].to_vec()
}

/// A ledger with `count` enrolled and fully synced holders plus one
/// verifier, all drawn from one seed.
pub struct Fleet {
    pub ra: MasterKeyPair,
    pub ledger: Ledger,
    pub holders: Vec<Holder>,
    pub verifier: Verifier,
    pub rng: ChaCha20Rng,
    pub now: u64,
}

impl Fleet {
    pub fn new(n: usize, count: usize, seed: u64, now: u64) -> Result<Self, LedgerError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pp = Arc::new(PublicParameters::setup(n, &mut rng)?);
        Self::with_parameters(pp, count, rng, now)
    }

    pub fn with_parameters(
        pp: Arc<PublicParameters>,
        count: usize,
        mut rng: ChaCha20Rng,
        now: u64,
    ) -> Result<Self, LedgerError> {
        let ra = KeyPair::generate(&mut rng);
        let verifier = Verifier::new(&mut rng);
        let ledger = Ledger::new(pp, ra.public());
        let mut fleet = Fleet {
            ra,
            ledger,
            holders: Vec::with_capacity(count),
            verifier,
            rng,
            now,
        };
        for k in 0..count {
            fleet.enroll(&format!("v{k}"))?;
        }
        fleet.sync_all()?;
        Ok(fleet)
    }

    /// Issues a certificate for `label` without syncing the others.
    pub fn enroll(&mut self, label: &str) -> Result<usize, LedgerError> {
        let online = KeyPair::generate(&mut self.rng);
        let req = IssueRequest::new(
            &self.ra,
            &identity_for(label),
            online.public(),
            self.now + FIXTURE_LIFETIME,
        )?;
        let enrollment = self.ledger.issue_certificate(&req, self.now)?;
        self.holders.push(Holder::new(online, enrollment));
        Ok(self.holders.len() - 1)
    }

    pub fn sync_all(&mut self) -> Result<(), LedgerError> {
        let n = self.ledger.pp().n();
        for h in &mut self.holders {
            h.sync(self.ledger.log(), n)?;
        }
        Ok(())
    }

    pub fn session(&mut self, k: usize) -> Session {
        Session::new(&mut self.rng, self.holders[k].online())
    }

    pub fn plain(&mut self, k: usize, message: &[u8], t: u64) -> (AuthTuplePlain, PublicKey) {
        let session = self.session(k);
        let tuple = gen_auth_trusted(
            &Credential::from(&self.holders[k]),
            &session,
            &self.ra.public(),
            &self.verifier.published(),
            message,
            t,
        );
        (tuple, session.published())
    }

    pub fn blinded(&mut self, k: usize, message: &[u8], t: u64) -> (AuthTupleBlinded, PublicKey) {
        let session = self.session(k);
        let tuple = gen_auth_untrusted(
            &Credential::from(&self.holders[k]),
            &session,
            &self.ra.public(),
            &self.verifier.published(),
            message,
            t,
        );
        (tuple, session.published())
    }
}
