//! KZG commitments over the roots-of-unity domain, with aggregation and
//! constant-time commitment/proof updates driven by per-slot update keys.
//!
//! Commitments and proofs live in G1; the SRS is mirrored into G2 so each
//! pairing equation places its verifier-side element on the G2 side.

mod fixed;
mod params;
mod proof;
mod update;

pub use params::{PublicParameters, SRS_MAGIC, SRS_VERSION};
#[cfg(feature = "insecure-trapdoor")]
pub use params::TrapdoorHandle;
pub use proof::{aggregate_proofs, verify_multi, verify_single};
pub(crate) use proof::{verify_aggregate, verify_single_elements};
pub use update::{update_commitment, update_proof_local, update_proof_other};

use ark_bls12_381::{Bls12_381, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::Pairing;
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Scalar};
use crate::ops;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KzgError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("unsupported domain size {0}")]
    UnsupportedDomainSize(usize),
    #[error("polynomial degree {degree} exceeds the maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("expected {expected} evaluations, got {got}")]
    WrongEvaluationCount { expected: usize, got: usize },
    #[error("index {index} is outside a domain of size {size}")]
    IndexOutOfDomain { index: usize, size: usize },
    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("update keys refer to the same slot {0}; use the local update")]
    SameIndex(usize),
    #[error("malformed encoding: {0}")]
    Encoding(String),
    #[error("unsupported parameter file version {0}")]
    VersionMismatch(u16),
}

/// Compressed size of a G1 element.
pub const G1_BYTES: usize = 48;
/// Compressed size of a G2 element.
pub const G2_BYTES: usize = 96;
/// Canonical size of a scalar.
pub const SCALAR_BYTES: usize = 32;

/// `C = g^Psi(tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Commitment(pub G1Affine);

/// `pi = g^q(tau)` for a quotient polynomial `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct EvaluationProof(pub G1Affine);

/// Per-slot update material `(rho_i, mu_i, w^i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateKey {
    pub index: usize,
    pub rho: G1Affine,
    pub mu: G1Affine,
    pub omega_i: Scalar,
}

impl Commitment {
    pub fn identity() -> Self {
        Commitment(G1Affine::identity())
    }

    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        g1_to_bytes(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KzgError> {
        g1_from_bytes(bytes).map(Commitment)
    }
}

impl EvaluationProof {
    pub fn identity() -> Self {
        EvaluationProof(G1Affine::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        g1_to_bytes(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KzgError> {
        g1_from_bytes(bytes).map(EvaluationProof)
    }
}

impl UpdateKey {
    pub const ENCODED_LEN: usize = 4 + 2 * G1_BYTES + SCALAR_BYTES;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        out.extend_from_slice(&(self.index as u32).to_be_bytes());
        out.extend_from_slice(&g1_to_bytes(&self.rho));
        out.extend_from_slice(&g1_to_bytes(&self.mu));
        out.extend_from_slice(&scalar_to_bytes(&self.omega_i));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KzgError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(KzgError::Encoding(format!(
                "update key must be {} bytes, got {}",
                Self::ENCODED_LEN,
                bytes.len()
            )));
        }
        let index = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let rho = g1_from_bytes(&bytes[4..4 + G1_BYTES])?;
        let mu = g1_from_bytes(&bytes[4 + G1_BYTES..4 + 2 * G1_BYTES])?;
        let omega_i = scalar_from_bytes(&bytes[4 + 2 * G1_BYTES..])?;
        Ok(UpdateKey {
            index,
            rho,
            mu,
            omega_i,
        })
    }
}

pub fn g1_to_bytes(p: &G1Affine) -> [u8; G1_BYTES] {
    let mut out = [0u8; G1_BYTES];
    p.serialize_compressed(&mut out[..])
        .expect("buffer sized for compressed G1");
    out
}

/// Decodes a compressed G1 point, enforcing curve and subgroup membership.
pub fn g1_from_bytes(bytes: &[u8]) -> Result<G1Affine, KzgError> {
    if bytes.len() != G1_BYTES {
        return Err(KzgError::Encoding(format!("G1 point must be {G1_BYTES} bytes")));
    }
    G1Affine::deserialize_compressed(bytes).map_err(|e| KzgError::Encoding(e.to_string()))
}

pub fn g2_to_bytes(p: &G2Affine) -> [u8; G2_BYTES] {
    let mut out = [0u8; G2_BYTES];
    p.serialize_compressed(&mut out[..])
        .expect("buffer sized for compressed G2");
    out
}

pub fn g2_from_bytes(bytes: &[u8]) -> Result<G2Affine, KzgError> {
    if bytes.len() != G2_BYTES {
        return Err(KzgError::Encoding(format!("G2 point must be {G2_BYTES} bytes")));
    }
    G2Affine::deserialize_compressed(bytes).map_err(|e| KzgError::Encoding(e.to_string()))
}

pub fn scalar_to_bytes(s: &Scalar) -> [u8; SCALAR_BYTES] {
    let mut out = [0u8; SCALAR_BYTES];
    s.serialize_compressed(&mut out[..])
        .expect("buffer sized for scalar");
    out
}

/// Decodes a canonical (fully reduced) scalar.
pub fn scalar_from_bytes(bytes: &[u8]) -> Result<Scalar, KzgError> {
    if bytes.len() != SCALAR_BYTES {
        return Err(KzgError::Encoding(format!("scalar must be {SCALAR_BYTES} bytes")));
    }
    Scalar::deserialize_compressed(bytes).map_err(|e| KzgError::Encoding(e.to_string()))
}

/// `g1^k`, counted as one exponentiation.
pub(crate) fn g1_mul(base: &G1Affine, k: Scalar) -> G1Projective {
    ops::exponentiation();
    *base * k
}

/// `g2^k`, counted as one exponentiation.
pub(crate) fn g2_mul(base: &G2Affine, k: Scalar) -> G2Projective {
    ops::exponentiation();
    *base * k
}

/// Checks `e(a, b) == e(c, d)` with two Miller loops and one final
/// exponentiation; counted as two pairings.
pub fn pairing_eq(a: G1Affine, b: G2Affine, c: G1Affine, d: G2Affine) -> bool {
    ops::pairings(2);
    let neg_c = (-c.into_group()).into_affine();
    Bls12_381::multi_pairing([a, neg_c], [b, d]).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ec::PrimeGroup;
    use ark_ff::UniformRand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn pairing_eq_bilinear_and_counted() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let a = Scalar::rand(&mut rng);
        let b = Scalar::rand(&mut rng);
        let g1 = G1Projective::generator();
        let g2 = G2Projective::generator();
        let (ok, counts) = ops::measure(|| {
            pairing_eq(
                (g1 * a).into_affine(),
                (g2 * b).into_affine(),
                (g1 * (a * b)).into_affine(),
                g2.into_affine(),
            )
        });
        assert!(ok);
        assert_eq!(counts.pairings, 2);
        assert!(!pairing_eq(
            (g1 * a).into_affine(),
            (g2 * b).into_affine(),
            (g1 * a).into_affine(),
            g2.into_affine(),
        ));
    }

    #[test]
    fn update_key_encoding_round_trip() {
        let g = G1Projective::generator();
        let key = UpdateKey {
            index: 9,
            rho: (g * Scalar::from(3u64)).into_affine(),
            mu: G1Affine::identity(),
            omega_i: Scalar::from(77u64),
        };
        let bytes = key.to_bytes();
        assert_eq!(bytes.len(), UpdateKey::ENCODED_LEN);
        assert_eq!(UpdateKey::from_bytes(&bytes).unwrap(), key);
    }

    #[test]
    fn rejects_non_canonical_scalar() {
        assert!(scalar_from_bytes(&[0xff; 32]).is_err());
    }
}
