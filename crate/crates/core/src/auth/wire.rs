//! Canonical tuple encodings: a one-byte tag, fixed-width group and scalar
//! fields in declared order, `u16`-prefixed mask fields, a `u32`-prefixed
//! message and a big-endian `u64` timestamp.

use ark_bls12_381::{G1Affine, G2Affine};

use super::{AuthError, ID_PAYLOAD_LEN, MESSAGE_TAG_LEN};
use crate::algebra::Scalar;
use crate::identity::{put_field, IdentityError, PublicKey, Reader, PUBLIC_KEY_BYTES};
use crate::kzg::{
    g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes, scalar_from_bytes, scalar_to_bytes,
    EvaluationProof, KzgError, G1_BYTES, G2_BYTES, SCALAR_BYTES,
};

pub const PLAIN_TAG: u8 = 0x01;
pub const BLINDED_TAG: u8 = 0x02;

/// Largest accepted message body.
pub const MAX_MESSAGE_LEN: usize = 1 << 20;

/// Tuple for trusted verifiers: the slot material travels in the clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthTuplePlain {
    pub index: u32,
    pub omega: Scalar,
    pub u: Scalar,
    pub g_omega: G2Affine,
    pub g_u: G1Affine,
    pub proof: EvaluationProof,
    pub e_a: [u8; ID_PAYLOAD_LEN],
    pub m_a: [u8; MESSAGE_TAG_LEN],
    pub message: Vec<u8>,
    pub timestamp: u64,
}

/// Tuple for untrusted verifiers: every slot-dependent element is blinded
/// by the session scalar `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthTupleBlinded {
    /// `pi * (r - 1)`.
    pub pi_au: G1Affine,
    /// `g2^w * r`.
    pub g_omega_au: G2Affine,
    /// `g^(u - RP) + pi_au * w`.
    pub g_u_prime_au: G1Affine,
    /// `g2 * (r - 1)`.
    pub g_r_minus_1: G2Affine,
    pub e_a: [u8; ID_PAYLOAD_LEN],
    pub m_a: [u8; MESSAGE_TAG_LEN],
    pub message: Vec<u8>,
    pub timestamp: u64,
}

fn put_tail(out: &mut Vec<u8>, e_a: &[u8], m_a: &[u8], message: &[u8], t: u64) {
    put_field(out, e_a);
    put_field(out, m_a);
    out.extend_from_slice(&(message.len() as u32).to_be_bytes());
    out.extend_from_slice(message);
    out.extend_from_slice(&t.to_be_bytes());
}

type Tail = ([u8; ID_PAYLOAD_LEN], [u8; MESSAGE_TAG_LEN], Vec<u8>, u64);

fn read_tail(r: &mut Reader<'_>) -> Result<Tail, IdentityError> {
    let e_a = r.field(ID_PAYLOAD_LEN)?.try_into().unwrap();
    let m_a = r.field(MESSAGE_TAG_LEN)?.try_into().unwrap();
    let len = r.u32()? as usize;
    if len > MAX_MESSAGE_LEN {
        return Err(IdentityError::Encoding("message too long".into()));
    }
    let message = r.take(len)?.to_vec();
    let t = r.u64()?;
    Ok((e_a, m_a, message, t))
}

fn parse_err(e: impl std::fmt::Display) -> AuthError {
    AuthError::ParseFailure(e.to_string())
}

fn g1(r: &mut Reader<'_>) -> Result<G1Affine, AuthError> {
    g1_from_bytes(r.take(G1_BYTES).map_err(parse_err)?).map_err(|e: KzgError| parse_err(e))
}

fn g2(r: &mut Reader<'_>) -> Result<G2Affine, AuthError> {
    g2_from_bytes(r.take(G2_BYTES).map_err(parse_err)?).map_err(|e: KzgError| parse_err(e))
}

fn scalar(r: &mut Reader<'_>) -> Result<Scalar, AuthError> {
    scalar_from_bytes(r.take(SCALAR_BYTES).map_err(parse_err)?).map_err(|e: KzgError| parse_err(e))
}

impl AuthTuplePlain {
    /// Encoded size excluding the message body.
    pub const FIXED_LEN: usize = 1
        + 4
        + 2 * SCALAR_BYTES
        + G2_BYTES
        + 2 * G1_BYTES
        + (2 + ID_PAYLOAD_LEN)
        + (2 + MESSAGE_TAG_LEN)
        + 4
        + 8;

    pub fn encoded_len(&self) -> usize {
        Self::FIXED_LEN + self.message.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.push(PLAIN_TAG);
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&scalar_to_bytes(&self.omega));
        out.extend_from_slice(&scalar_to_bytes(&self.u));
        out.extend_from_slice(&g2_to_bytes(&self.g_omega));
        out.extend_from_slice(&g1_to_bytes(&self.g_u));
        out.extend_from_slice(&self.proof.to_bytes());
        put_tail(&mut out, &self.e_a, &self.m_a, &self.message, self.timestamp);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthError> {
        let mut r = Reader::new(bytes);
        let t = Self::read(&mut r)?;
        r.finish().map_err(parse_err)?;
        Ok(t)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, AuthError> {
        if r.u8().map_err(parse_err)? != PLAIN_TAG {
            return Err(AuthError::ParseFailure("not a plain tuple".into()));
        }
        let index = r.u32().map_err(parse_err)?;
        let omega = scalar(r)?;
        let u = scalar(r)?;
        let g_omega = g2(r)?;
        let g_u = g1(r)?;
        let proof = EvaluationProof(g1(r)?);
        let (e_a, m_a, message, timestamp) = read_tail(r).map_err(parse_err)?;
        Ok(AuthTuplePlain {
            index,
            omega,
            u,
            g_omega,
            g_u,
            proof,
            e_a,
            m_a,
            message,
            timestamp,
        })
    }
}

impl AuthTupleBlinded {
    pub const FIXED_LEN: usize = 1
        + 2 * G1_BYTES
        + 2 * G2_BYTES
        + (2 + ID_PAYLOAD_LEN)
        + (2 + MESSAGE_TAG_LEN)
        + 4
        + 8;

    pub fn encoded_len(&self) -> usize {
        Self::FIXED_LEN + self.message.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.push(BLINDED_TAG);
        out.extend_from_slice(&g1_to_bytes(&self.pi_au));
        out.extend_from_slice(&g2_to_bytes(&self.g_omega_au));
        out.extend_from_slice(&g1_to_bytes(&self.g_u_prime_au));
        out.extend_from_slice(&g2_to_bytes(&self.g_r_minus_1));
        put_tail(&mut out, &self.e_a, &self.m_a, &self.message, self.timestamp);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthError> {
        let mut r = Reader::new(bytes);
        let t = Self::read(&mut r)?;
        r.finish().map_err(parse_err)?;
        Ok(t)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, AuthError> {
        if r.u8().map_err(parse_err)? != BLINDED_TAG {
            return Err(AuthError::ParseFailure("not a blinded tuple".into()));
        }
        let pi_au = g1(r)?;
        let g_omega_au = g2(r)?;
        let g_u_prime_au = g1(r)?;
        let g_r_minus_1 = g2(r)?;
        let (e_a, m_a, message, timestamp) = read_tail(r).map_err(parse_err)?;
        Ok(AuthTupleBlinded {
            pi_au,
            g_omega_au,
            g_u_prime_au,
            g_r_minus_1,
            e_a,
            m_a,
            message,
            timestamp,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuthTuple {
    Plain(AuthTuplePlain),
    Blinded(AuthTupleBlinded),
}

impl AuthTuple {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            AuthTuple::Plain(t) => t.to_bytes(),
            AuthTuple::Blinded(t) => t.to_bytes(),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthError> {
        match bytes.first() {
            Some(&PLAIN_TAG) => AuthTuplePlain::from_bytes(bytes).map(AuthTuple::Plain),
            Some(&BLINDED_TAG) => AuthTupleBlinded::from_bytes(bytes).map(AuthTuple::Blinded),
            _ => Err(AuthError::ParseFailure("unknown tuple tag".into())),
        }
    }

    pub fn e_a(&self) -> &[u8; ID_PAYLOAD_LEN] {
        match self {
            AuthTuple::Plain(t) => &t.e_a,
            AuthTuple::Blinded(t) => &t.e_a,
        }
    }

    pub fn timestamp(&self) -> u64 {
        match self {
            AuthTuple::Plain(t) => t.timestamp,
            AuthTuple::Blinded(t) => t.timestamp,
        }
    }
}

/// A tuple together with the sender's published session key, as handed to a
/// verifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub sender_published: PublicKey,
    pub tuple: AuthTuple,
}

impl Envelope {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.sender_published.to_bytes().to_vec();
        out.extend_from_slice(&self.tuple.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthError> {
        if bytes.len() < PUBLIC_KEY_BYTES {
            return Err(AuthError::ParseFailure("truncated envelope".into()));
        }
        let sender_published =
            PublicKey::from_bytes(&bytes[..PUBLIC_KEY_BYTES]).map_err(parse_err)?;
        let tuple = AuthTuple::from_bytes(&bytes[PUBLIC_KEY_BYTES..])?;
        Ok(Envelope {
            sender_published,
            tuple,
        })
    }
}
