//! Message authentication against the global commitment.
//!
//! Trusted verifiers receive the slot material `(w^i, u_i, g^w, g^u, pi)` in
//! the clear and check it with one opening equation. Untrusted verifiers get
//! a tuple blinded by a per-session scalar `r`:
//!
//! `e(C - g^RP - g_u_prime_au, g2^(r-1)) == e(pi_au, g2^tau - g_omega_au)`
//!
//! where `RP` is recomputed from the sender's published key `r * npk`.
//!
//! In both flows the identity payload `E_A` is masked under a key only the
//! root authority can rebuild, and `M_A` binds the message and timestamp to
//! a key shared with the intended verifier.

mod batch;
mod wire;

pub use batch::{batch_verify_trusted, BatchVerdict};
pub use wire::{AuthTuple, AuthTupleBlinded, AuthTuplePlain, Envelope, BLINDED_TAG, PLAIN_TAG};

use ark_bls12_381::{G1Affine, G2Affine};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{One, Zero};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::identity::{
    mul_secrets, session_offset, Blinder, IdentityError, LedgerKey, MasterKeyPair,
    OnlineKeyPair, ParameterSet, PublicKey, BLINDER_BYTES, SECRET_KEY_BYTES,
};
use crate::kzg::{
    g1_mul, g2_mul, pairing_eq, verify_single_elements, Commitment, PublicParameters,
};
use crate::ops;

/// Default maximum tuple age, in seconds.
pub const DEFAULT_FRESHNESS_WINDOW: u64 = 300;
/// Ledger key followed by a big-endian `u64` timestamp.
pub const ID_PAYLOAD_LEN: usize = LedgerKey::LEN + 8;
pub const MESSAGE_TAG_LEN: usize = 32;

const ID_MASK_LABEL: &[u8] = b"pbag/identity-mask";
const MESSAGE_MASK_LABEL: &[u8] = b"pbag/message-mask";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuthError {
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error("could not parse: {0}")]
    ParseFailure(String),
    #[error("slot {0} appears more than once in the batch")]
    DuplicateIndexInBatch(u32),
    #[error("empty batch")]
    EmptyBatch,
}

/// Why a verifier rejected a tuple.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    #[error("timestamp outside the freshness window")]
    Stale,
    #[error("a blinded element is the group identity")]
    IdentityElement,
    #[error("message tag does not match")]
    MaskMismatch,
    #[error("claimed point is not the domain element for the claimed slot")]
    WrongDomainPoint,
    #[error("claimed value is the revocation sentinel")]
    SentinelValue,
    #[error("group elements do not match the claimed scalars")]
    ElementMismatch,
    #[error("pairing equation failed")]
    PairingCheckFailed,
}

/// A holder's per-session blinder `r` and published key `r * npk`.
#[derive(Clone, Copy, Debug)]
pub struct Session {
    blinder: Blinder,
    published: PublicKey,
}

impl Session {
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R, online: &OnlineKeyPair) -> Self {
        Self::with_blinder(Blinder::random(rng), online)
    }

    pub fn with_blinder(blinder: Blinder, online: &OnlineKeyPair) -> Self {
        Session {
            published: online.public().mul(blinder.as_curve_scalar()),
            blinder,
        }
    }

    /// Draws a fresh blinder; called once an authentication completes.
    pub fn rotate<R: RngCore + CryptoRng>(&mut self, rng: &mut R, online: &OnlineKeyPair) {
        *self = Self::new(rng, online);
    }

    pub fn blinder(&self) -> &Blinder {
        &self.blinder
    }

    pub fn published(&self) -> PublicKey {
        self.published
    }
}

/// A verifier's online key and current session.
#[derive(Clone, Debug)]
pub struct Verifier {
    pub online: OnlineKeyPair,
    pub session: Session,
}

impl Verifier {
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let online = OnlineKeyPair::generate(rng);
        let session = Session::new(rng, &online);
        Verifier { online, session }
    }

    pub fn published(&self) -> PublicKey {
        self.session.published
    }

    /// Online secret followed by the session blinder.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.online.secret_bytes().to_vec();
        out.extend_from_slice(&self.session.blinder.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthError> {
        if bytes.len() != SECRET_KEY_BYTES + BLINDER_BYTES {
            return Err(AuthError::ParseFailure("verifier key has the wrong length".into()));
        }
        let online = OnlineKeyPair::from_secret_bytes(&bytes[..SECRET_KEY_BYTES])?;
        let blinder = Blinder::from_bytes(bytes[SECRET_KEY_BYTES..].try_into().unwrap())?;
        Ok(Verifier {
            session: Session::with_blinder(blinder, &online),
            online,
        })
    }
}

/// What a holder needs to authenticate.
#[derive(Clone, Copy, Debug)]
pub struct Credential<'a> {
    pub online: &'a OnlineKeyPair,
    pub params: &'a ParameterSet,
    pub ledger_key: LedgerKey,
}

impl<'a> From<&'a crate::ledger::Holder> for Credential<'a> {
    fn from(h: &'a crate::ledger::Holder) -> Self {
        Credential {
            online: h.online(),
            params: h.params(),
            ledger_key: h.ledger_key(),
        }
    }
}

fn mask<const N: usize>(shared: &PublicKey, label: &[u8]) -> [u8; N] {
    let hk = Hkdf::<Sha256>::new(None, &shared.to_bytes());
    let mut out = [0u8; N];
    hk.expand(label, &mut out).expect("short HKDF output");
    out
}

fn xor<const N: usize>(a: &[u8; N], b: &[u8; N]) -> [u8; N] {
    std::array::from_fn(|k| a[k] ^ b[k])
}

/// `H(m || t || E_A)`, one protocol hash.
fn message_digest(message: &[u8], t: u64, e_a: &[u8]) -> [u8; MESSAGE_TAG_LEN] {
    ops::hash();
    let mut h = Sha256::new();
    h.update(message);
    h.update(t.to_be_bytes());
    h.update(e_a);
    h.finalize().into()
}

fn id_payload(key: &LedgerKey, t: u64) -> [u8; ID_PAYLOAD_LEN] {
    let mut out = [0u8; ID_PAYLOAD_LEN];
    out[..LedgerKey::LEN].copy_from_slice(&key.0);
    out[LedgerKey::LEN..].copy_from_slice(&t.to_be_bytes());
    out
}

/// `E_A` and `M_A`; two signature-curve multiplications and one hash.
fn seal(
    cred: &Credential<'_>,
    session: &Session,
    fpk: &PublicKey,
    peer_published: &PublicKey,
    message: &[u8],
    t: u64,
) -> ([u8; ID_PAYLOAD_LEN], [u8; MESSAGE_TAG_LEN]) {
    let k = mul_secrets(cred.online.secret(), session.blinder.as_curve_scalar());
    let id_key = fpk.mul(&k);
    let e_a = xor(&mask(&id_key, ID_MASK_LABEL), &id_payload(&cred.ledger_key, t));
    let msg_key = peer_published.mul(&k);
    let m_a = xor(
        &mask(&msg_key, MESSAGE_MASK_LABEL),
        &message_digest(message, t, &e_a),
    );
    (e_a, m_a)
}

/// Verifier side of `M_A`: `(r_B * nsk_B) * (r * npk_A)`.
fn message_tag_matches(
    verifier: &Verifier,
    sender_published: &PublicKey,
    e_a: &[u8],
    m_a: &[u8; MESSAGE_TAG_LEN],
    message: &[u8],
    t: u64,
) -> bool {
    let k = mul_secrets(verifier.online.secret(), verifier.session.blinder.as_curve_scalar());
    let shared = sender_published.mul(&k);
    let expected = xor(
        &mask(&shared, MESSAGE_MASK_LABEL),
        &message_digest(message, t, e_a),
    );
    expected == *m_a
}

fn is_fresh(t: u64, now: u64, window: u64) -> bool {
    t.abs_diff(now) <= window
}

pub fn gen_auth_trusted(
    cred: &Credential<'_>,
    session: &Session,
    fpk: &PublicKey,
    peer_published: &PublicKey,
    message: &[u8],
    t: u64,
) -> AuthTuplePlain {
    let (e_a, m_a) = seal(cred, session, fpk, peer_published, message, t);
    let p = cred.params;
    AuthTuplePlain {
        index: p.index as u32,
        omega: p.omega,
        u: p.u,
        g_omega: p.g_omega,
        g_u: p.g_u,
        proof: p.proof,
        e_a,
        m_a,
        message: message.to_vec(),
        timestamp: t,
    }
}

pub fn gen_auth_untrusted(
    cred: &Credential<'_>,
    session: &Session,
    fpk: &PublicKey,
    peer_published: &PublicKey,
    message: &[u8],
    t: u64,
) -> AuthTupleBlinded {
    let (e_a, m_a) = seal(cred, session, fpk, peer_published, message, t);
    let p = cred.params;
    let r = session.blinder.as_field();
    let r_minus_1 = r - crate::algebra::Scalar::one();
    let pi_au = g1_mul(&p.proof.0, r_minus_1).into_affine();
    let g_omega_au = g2_mul(&p.g_omega, r).into_affine();
    ops::hash();
    let rp = session_offset(&session.published);
    let g_u_prime_au =
        (p.g_u.into_group() - g1_mul(&G1Affine::generator(), rp) + g1_mul(&pi_au, p.omega))
            .into_affine();
    let g_r_minus_1 = g2_mul(&G2Affine::generator(), r_minus_1).into_affine();
    AuthTupleBlinded {
        pi_au,
        g_omega_au,
        g_u_prime_au,
        g_r_minus_1,
        e_a,
        m_a,
        message: message.to_vec(),
        timestamp: t,
    }
}

/// Checks freshness, the message tag and the opening equation; exactly two
/// pairings when the pairing step is reached.
pub fn verify_auth_trusted(
    pp: &PublicParameters,
    commitment: &Commitment,
    tuple: &AuthTuplePlain,
    verifier: &Verifier,
    sender_published: &PublicKey,
    window: u64,
    now: u64,
) -> Result<(), Rejection> {
    precheck_plain(pp, tuple, verifier, sender_published, window, now)?;
    if g1_mul(&pp.g1(), tuple.u).into_affine() != tuple.g_u {
        return Err(Rejection::ElementMismatch);
    }
    if verify_single_elements(pp, commitment, tuple.g_u, tuple.g_omega, &tuple.proof) {
        Ok(())
    } else {
        Err(Rejection::PairingCheckFailed)
    }
}

/// Checks that need no pairing: freshness, domain point and its G2 image,
/// sentinel, tag.
pub(crate) fn precheck_plain(
    pp: &PublicParameters,
    tuple: &AuthTuplePlain,
    verifier: &Verifier,
    sender_published: &PublicKey,
    window: u64,
    now: u64,
) -> Result<(), Rejection> {
    if !is_fresh(tuple.timestamp, now, window) {
        return Err(Rejection::Stale);
    }
    let i = tuple.index as usize;
    if i >= pp.n() || pp.domain().element(i) != tuple.omega {
        return Err(Rejection::WrongDomainPoint);
    }
    if pp.domain_point_g2(i).ok() != Some(tuple.g_omega) {
        return Err(Rejection::ElementMismatch);
    }
    if tuple.u.is_zero() {
        return Err(Rejection::SentinelValue);
    }
    if !message_tag_matches(
        verifier,
        sender_published,
        &tuple.e_a,
        &tuple.m_a,
        &tuple.message,
        tuple.timestamp,
    ) {
        return Err(Rejection::MaskMismatch);
    }
    Ok(())
}

/// Checks freshness, identity elements, the message tag and the blinded
/// opening equation; exactly two pairings when the pairing step is reached.
pub fn verify_auth_untrusted(
    pp: &PublicParameters,
    commitment: &Commitment,
    tuple: &AuthTupleBlinded,
    verifier: &Verifier,
    sender_published: &PublicKey,
    window: u64,
    now: u64,
) -> Result<(), Rejection> {
    if !is_fresh(tuple.timestamp, now, window) {
        return Err(Rejection::Stale);
    }
    if tuple.pi_au.is_zero() || tuple.g_omega_au.is_zero() || tuple.g_r_minus_1.is_zero() {
        return Err(Rejection::IdentityElement);
    }
    if !message_tag_matches(
        verifier,
        sender_published,
        &tuple.e_a,
        &tuple.m_a,
        &tuple.message,
        tuple.timestamp,
    ) {
        return Err(Rejection::MaskMismatch);
    }
    ops::hash();
    let rp = session_offset(sender_published);
    let g_au_u = g1_mul(&pp.g1(), rp) + tuple.g_u_prime_au;
    let lhs = (commitment.0.into_group() - g_au_u).into_affine();
    let rhs = (pp.tau_g2().into_group() - tuple.g_omega_au).into_affine();
    if pairing_eq(lhs, tuple.g_r_minus_1, tuple.pi_au, rhs) {
        Ok(())
    } else {
        Err(Rejection::PairingCheckFailed)
    }
}

/// Root-authority side: unmask `E_A` with `fsk * (r * npk)` and split it
/// into the sender's ledger key and the timestamp.
pub fn trace(
    e_a: &[u8],
    sender_published: &PublicKey,
    ra: &MasterKeyPair,
) -> Result<(LedgerKey, u64), AuthError> {
    let e_a: &[u8; ID_PAYLOAD_LEN] = e_a.try_into().map_err(|_| {
        AuthError::ParseFailure(format!("identity payload must be {ID_PAYLOAD_LEN} bytes"))
    })?;
    let shared = sender_published.mul(ra.secret());
    let plain = xor(&mask(&shared, ID_MASK_LABEL), e_a);
    let key = LedgerKey(plain[..LedgerKey::LEN].try_into().unwrap());
    let t = u64::from_be_bytes(plain[LedgerKey::LEN..].try_into().unwrap());
    Ok((key, t))
}
