use k256::ecdsa::signature::{Signer, Verifier};
use k256::ecdsa::{Signature as EcdsaSignature, SigningKey, VerifyingKey};
use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::elliptic_curve::PrimeField;
use k256::{NonZeroScalar, ProjectivePoint};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::IdentityError;
use crate::algebra::Scalar;
use crate::ops;

/// Compressed SEC1 size of a signature-curve point.
pub const PUBLIC_KEY_BYTES: usize = 33;
/// Fixed-width `r || s` signature size.
pub const SIGNATURE_BYTES: usize = 64;
/// Secret scalar size.
pub const SECRET_KEY_BYTES: usize = 32;

/// A non-identity point on the signature curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublicKey(k256::PublicKey);

impl PublicKey {
    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_BYTES] {
        let encoded = self.0.to_encoded_point(true);
        let mut out = [0u8; PUBLIC_KEY_BYTES];
        out.copy_from_slice(encoded.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        if bytes.len() != PUBLIC_KEY_BYTES {
            return Err(IdentityError::MalformedKey);
        }
        k256::PublicKey::from_sec1_bytes(bytes)
            .map(PublicKey)
            .map_err(|_| IdentityError::MalformedKey)
    }

    fn from_projective(p: ProjectivePoint) -> Self {
        // Callers multiply a non-identity point by a non-zero scalar in a
        // prime-order group, so the product is never the identity.
        PublicKey(k256::PublicKey::from_affine(p.to_affine()).expect("non-identity product"))
    }

    /// `k * self`, counted as one signature-curve scalar multiplication.
    pub fn mul(&self, k: &NonZeroScalar) -> PublicKey {
        ops::scalar_mul();
        PublicKey::from_projective(self.0.to_projective() * k.as_ref())
    }
}

/// Secret scalar and its public point `sk * P`.
#[derive(Clone)]
pub struct KeyPair {
    secret: NonZeroScalar,
    public: PublicKey,
}

/// Long-lived signing key of the root authority.
pub type MasterKeyPair = KeyPair;
/// Rotating key held by a vehicle's on-board unit.
pub type OnlineKeyPair = KeyPair;

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(NonZeroScalar::random(rng))
    }

    /// Deterministic key pair for reproducible fixtures.
    pub fn from_seed(seed: u64) -> Self {
        Self::generate(&mut ChaCha20Rng::seed_from_u64(seed))
    }

    fn from_secret(secret: NonZeroScalar) -> Self {
        let public = PublicKey(k256::PublicKey::from_secret_scalar(&secret));
        KeyPair { secret, public }
    }

    pub fn public(&self) -> PublicKey {
        self.public
    }

    pub fn secret(&self) -> &NonZeroScalar {
        &self.secret
    }

    pub fn secret_bytes(&self) -> [u8; SECRET_KEY_BYTES] {
        self.secret.to_repr().into()
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        let repr: [u8; SECRET_KEY_BYTES] =
            bytes.try_into().map_err(|_| IdentityError::MalformedKey)?;
        let secret = Option::<NonZeroScalar>::from(NonZeroScalar::from_repr(repr.into()))
            .ok_or(IdentityError::MalformedKey)?;
        Ok(Self::from_secret(secret))
    }

    /// Deterministic (RFC 6979) ECDSA signature over SHA-256 of `message`.
    pub fn sign(&self, message: &[u8]) -> Signature {
        let key = SigningKey::from(self.secret);
        let sig: EcdsaSignature = key.sign(message);
        Signature(sig.to_bytes().into())
    }
}

/// Fixed-width ECDSA signature bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature(pub [u8; SIGNATURE_BYTES]);

impl Signature {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        bytes
            .try_into()
            .map(Signature)
            .map_err(|_| IdentityError::MalformedSignature)
    }
}

/// True iff `sigma` is a valid signature on `message` under `pk`.
pub fn check_sig(pk: &PublicKey, sigma: &Signature, message: &[u8]) -> bool {
    let Ok(sig) = EcdsaSignature::from_slice(&sigma.0) else {
        return false;
    };
    VerifyingKey::from(&pk.0).verify(message, &sig).is_ok()
}

/// Bit length of a session blinder; below both group orders so the same
/// integer acts as a scalar on the pairing curve and on the signature curve.
pub const BLINDER_BITS: usize = 248;
pub const BLINDER_BYTES: usize = BLINDER_BITS / 8;

/// Session blinder `r`, held simultaneously in both scalar fields.
#[derive(Clone, Copy)]
pub struct Blinder {
    bytes: [u8; BLINDER_BYTES],
    field: Scalar,
    curve: NonZeroScalar,
}

impl PartialEq for Blinder {
    fn eq(&self, other: &Self) -> bool {
        self.bytes == other.bytes
    }
}

impl Eq for Blinder {}

impl std::fmt::Debug for Blinder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Blinder(..)")
    }
}

impl Blinder {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let mut bytes = [0u8; BLINDER_BYTES];
            rng.fill_bytes(&mut bytes);
            if let Ok(b) = Self::from_bytes(bytes) {
                return b;
            }
        }
    }

    /// Rejects `r` in `{0, 1}`.
    pub fn from_bytes(bytes: [u8; BLINDER_BYTES]) -> Result<Self, IdentityError> {
        let mut wide = [0u8; 32];
        wide[32 - BLINDER_BYTES..].copy_from_slice(&bytes);
        let is_small = wide[..31].iter().all(|&b| b == 0) && wide[31] <= 1;
        if is_small {
            return Err(IdentityError::DegenerateBlinder);
        }
        let field = <Scalar as ark_ff::PrimeField>::from_be_bytes_mod_order(&wide);
        let curve = Option::<NonZeroScalar>::from(NonZeroScalar::from_repr(wide.into()))
            .expect("248-bit value is below the curve order");
        Ok(Blinder {
            bytes,
            field,
            curve,
        })
    }

    pub fn from_u64(r: u64) -> Result<Self, IdentityError> {
        let mut bytes = [0u8; BLINDER_BYTES];
        bytes[BLINDER_BYTES - 8..].copy_from_slice(&r.to_be_bytes());
        Self::from_bytes(bytes)
    }

    pub fn to_bytes(&self) -> [u8; BLINDER_BYTES] {
        self.bytes
    }

    pub fn as_field(&self) -> Scalar {
        self.field
    }

    pub fn as_curve_scalar(&self) -> &NonZeroScalar {
        &self.curve
    }
}

/// `a * b` on the signature curve's scalar field; non-zero because the
/// group order is prime.
pub(crate) fn mul_secrets(a: &NonZeroScalar, b: &NonZeroScalar) -> NonZeroScalar {
    NonZeroScalar::new(*a.as_ref() * b.as_ref()).expect("product of non-zero scalars")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn seeded_keygen_is_deterministic() {
        let a = KeyPair::from_seed(5);
        let b = KeyPair::from_seed(5);
        assert_eq!(a.public(), b.public());
        assert_eq!(a.secret_bytes(), b.secret_bytes());
        assert_ne!(KeyPair::from_seed(6).public(), a.public());
    }

    #[test]
    fn public_key_is_secret_times_generator() {
        let kp = KeyPair::from_seed(9);
        let expected = ProjectivePoint::GENERATOR * kp.secret().as_ref();
        assert_eq!(kp.public().0.to_projective(), expected);
        let round = PublicKey::from_bytes(&kp.public().to_bytes()).unwrap();
        assert_eq!(round, kp.public());
        let restored = KeyPair::from_secret_bytes(&kp.secret_bytes()).unwrap();
        assert_eq!(restored.public(), kp.public());
    }

    #[test]
    fn thousand_keys_have_distinct_secrets() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        for _ in 0..1000 {
            assert!(seen.insert(KeyPair::generate(&mut rng).secret_bytes()));
        }
    }

    #[test]
    fn signature_round_trip_and_rejections() {
        let kp = KeyPair::from_seed(2);
        let other = KeyPair::from_seed(3);
        let sig = kp.sign(b"hello");
        assert!(check_sig(&kp.public(), &sig, b"hello"));
        assert!(!check_sig(&kp.public(), &sig, b"hellp"));
        assert!(!check_sig(&other.public(), &sig, b"hello"));
        let empty = kp.sign(b"");
        assert!(check_sig(&kp.public(), &empty, b""));
    }

    #[test]
    fn signature_bit_flips_rejected() {
        let kp = KeyPair::from_seed(4);
        let sig = kp.sign(b"payload");
        for bit in 0..SIGNATURE_BYTES * 8 {
            let mut bad = sig;
            bad.0[bit / 8] ^= 1 << (bit % 8);
            assert!(!check_sig(&kp.public(), &bad, b"payload"), "bit {bit}");
        }
    }

    #[test]
    fn malformed_public_keys_rejected() {
        assert!(PublicKey::from_bytes(&[0u8; 33]).is_err());
        assert!(PublicKey::from_bytes(&[2u8; 32]).is_err());
    }

    #[test]
    fn blinder_rejects_zero_and_one() {
        assert_eq!(Blinder::from_u64(0), Err(IdentityError::DegenerateBlinder));
        assert_eq!(Blinder::from_u64(1), Err(IdentityError::DegenerateBlinder));
        let two = Blinder::from_u64(2).unwrap();
        assert_eq!(two.as_field(), Scalar::from(2u64));
        assert_eq!(*two.as_curve_scalar().as_ref(), k256::Scalar::from(2u64));
    }

    #[test]
    fn blinder_agrees_across_fields() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let r = Blinder::random(&mut rng);
        let as_field = <Scalar as ark_ff::PrimeField>::into_bigint(r.as_field());
        let mut field_be = [0u8; 32];
        for (k, limb) in as_field.0.iter().enumerate() {
            field_be[32 - 8 * (k + 1)..32 - 8 * k].copy_from_slice(&limb.to_be_bytes());
        }
        let curve_be: [u8; 32] = r.as_curve_scalar().to_repr().into();
        assert_eq!(field_be, curve_be);
        assert_eq!(field_be[0], 0);
    }
}
