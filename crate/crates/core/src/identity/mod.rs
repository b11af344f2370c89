//! Keys, encrypted identities, certificates and the derivation of each
//! vehicle's committed value.
//!
//! Two curves are in play: signatures and Diffie-Hellman masks use
//! secp256k1, while committed values are scalars of the pairing curve.
//! Every hashed or clipped point uses its compressed encoding.

mod cert;
mod keys;

pub use cert::{Certificate, OpTag, ParameterSet};
pub use keys::{
    check_sig, Blinder, KeyPair, MasterKeyPair, OnlineKeyPair, PublicKey, Signature, BLINDER_BITS,
    BLINDER_BYTES,
    PUBLIC_KEY_BYTES, SECRET_KEY_BYTES, SIGNATURE_BYTES,
};
pub(crate) use cert::{put_field, Reader};
pub(crate) use keys::mul_secrets;

use ark_ff::PrimeField;
use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Nonce};
use hkdf::Hkdf;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("identity must be {IDENTITY_LEN} ASCII alphanumeric characters")]
    MalformedId,
    #[error("encrypted identity did not decrypt under this key")]
    DecryptionFailed,
    #[error("clip width {0} exceeds the {MAX_CLIP_BITS}-bit maximum")]
    OversizedTruncation(usize),
    #[error("session blinder must not be 0 or 1")]
    DegenerateBlinder,
    #[error("malformed key encoding")]
    MalformedKey,
    #[error("malformed signature encoding")]
    MalformedSignature,
    #[error("malformed encoding: {0}")]
    Encoding(String),
}

/// Plate number plus VIN, as one fixed-width string.
pub const IDENTITY_LEN: usize = 18;
/// Widest clip; keeps clipped values below the scalar field modulus.
pub const MAX_CLIP_BITS: usize = 240;
/// Width of each half of a committed value.
pub const COMPONENT_BITS: usize = 120;
/// Width of the session offset subtracted from a committed value.
pub const OFFSET_BITS: usize = 240;

const NONCE_LEN: usize = 12;
const TAG_LEN: usize = 16;
/// Nonce, ciphertext and tag.
pub const ENCRYPTED_ID_LEN: usize = NONCE_LEN + IDENTITY_LEN + TAG_LEN;

/// Real identity sealed under a key derived from the master secret.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncryptedId(pub [u8; ENCRYPTED_ID_LEN]);

impl EncryptedId {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        bytes
            .try_into()
            .map(EncryptedId)
            .map_err(|_| IdentityError::Encoding("encrypted identity length".into()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// The ledger key: the first 120 bits of the hash of this ciphertext.
    pub fn ledger_key(&self) -> LedgerKey {
        let bytes = clip_bytes(&self.0, COMPONENT_BITS).expect("width within bounds");
        LedgerKey(bytes.try_into().expect("120 bits is 15 bytes"))
    }
}

/// Clipped encrypted identity, the key a vehicle is filed under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LedgerKey(pub [u8; COMPONENT_BITS / 8]);

impl LedgerKey {
    pub const LEN: usize = COMPONENT_BITS / 8;

    pub fn to_scalar(&self) -> Scalar {
        Scalar::from_be_bytes_mod_order(&self.0)
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn id_cipher(master: &MasterKeyPair) -> ChaCha20Poly1305 {
    let hk = Hkdf::<Sha256>::new(None, &master.secret_bytes());
    let mut key = [0u8; 32];
    hk.expand(b"pbag/identity-encryption", &mut key)
        .expect("32 bytes is a valid HKDF length");
    ChaCha20Poly1305::new(&key.into())
}

fn check_id_format(id: &[u8]) -> Result<(), IdentityError> {
    if id.len() == IDENTITY_LEN && id.iter().all(u8::is_ascii_alphanumeric) {
        Ok(())
    } else {
        Err(IdentityError::MalformedId)
    }
}

/// Deterministic authenticated encryption: the nonce is derived from the
/// key and the plaintext, so equal identities give equal ciphertexts.
pub fn encrypt_id(id: &[u8], master: &MasterKeyPair) -> Result<EncryptedId, IdentityError> {
    check_id_format(id)?;
    let mut nonce_src = Sha256::new();
    nonce_src.update(b"pbag/identity-nonce");
    nonce_src.update(master.secret_bytes());
    nonce_src.update(id);
    let digest = nonce_src.finalize();
    let nonce = Nonce::from_slice(&digest[..NONCE_LEN]);
    let ct = id_cipher(master)
        .encrypt(nonce, id)
        .expect("in-memory encryption cannot fail");
    let mut out = [0u8; ENCRYPTED_ID_LEN];
    out[..NONCE_LEN].copy_from_slice(nonce);
    out[NONCE_LEN..].copy_from_slice(&ct);
    Ok(EncryptedId(out))
}

pub fn decrypt_id(e_id: &EncryptedId, master: &MasterKeyPair) -> Result<Vec<u8>, IdentityError> {
    let nonce = Nonce::from_slice(&e_id.0[..NONCE_LEN]);
    let id = id_cipher(master)
        .decrypt(nonce, &e_id.0[NONCE_LEN..])
        .map_err(|_| IdentityError::DecryptionFailed)?;
    check_id_format(&id)?;
    Ok(id)
}

/// The first `bits` bits of SHA-256(input) as a big-endian integer, packed
/// right-aligned into `ceil(bits / 8)` bytes.
pub fn clip_bytes(input: &[u8], bits: usize) -> Result<Vec<u8>, IdentityError> {
    if bits > MAX_CLIP_BITS {
        return Err(IdentityError::OversizedTruncation(bits));
    }
    let digest = Sha256::digest(input);
    let len = bits.div_ceil(8);
    let mut out = digest[..len].to_vec();
    let shift = len * 8 - bits;
    if shift > 0 {
        for k in (0..len).rev() {
            let carry = if k > 0 { out[k - 1] << (8 - shift) } else { 0 };
            out[k] = (out[k] >> shift) | carry;
        }
    }
    Ok(out)
}

/// `clip_bytes` read as a scalar; always below `2^bits`, hence below the
/// field modulus.
pub fn clip(input: &[u8], bits: usize) -> Result<Scalar, IdentityError> {
    clip_bytes(input, bits).map(|b| Scalar::from_be_bytes_mod_order(&b))
}

/// `u = (e << 120) + p` for two 120-bit halves.
pub fn compose_u(e_part: u128, p_part: u128) -> Scalar {
    debug_assert!(e_part >> COMPONENT_BITS == 0 && p_part >> COMPONENT_BITS == 0);
    let shift = Scalar::from(1u128 << 64) * Scalar::from(1u128 << (COMPONENT_BITS - 64));
    Scalar::from(e_part) * shift + Scalar::from(p_part)
}

fn clip_u128(input: &[u8]) -> u128 {
    let bytes = clip_bytes(input, COMPONENT_BITS).expect("width within bounds");
    let mut wide = [0u8; 16];
    wide[16 - bytes.len()..].copy_from_slice(&bytes);
    u128::from_be_bytes(wide)
}

/// The committed value of a certificate holder: clipped ciphertext hash in
/// the high half, clipped online-key hash in the low half.
pub fn derive_u(e_id: &EncryptedId, npk: &PublicKey) -> Scalar {
    compose_u(clip_u128(&e_id.0), clip_u128(&npk.to_bytes()))
}

/// Session offset `RP = clip(r * npk, 240)`.
pub fn session_offset(published: &PublicKey) -> Scalar {
    clip(&published.to_bytes(), OFFSET_BITS).expect("width within bounds")
}

/// Returns `(u - RP, r * npk)`.
pub fn blind_u(u: Scalar, r: &Blinder, npk: &PublicKey) -> (Scalar, PublicKey) {
    let published = npk.mul(r.as_curve_scalar());
    (u - session_offset(&published), published)
}
