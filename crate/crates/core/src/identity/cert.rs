use ark_bls12_381::{G1Affine, G2Affine};

use super::{EncryptedId, IdentityError, PublicKey, Signature, PUBLIC_KEY_BYTES, SIGNATURE_BYTES};
use crate::algebra::Scalar;
use crate::kzg::{
    g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes, scalar_from_bytes, scalar_to_bytes,
    EvaluationProof, UpdateKey, G1_BYTES, G2_BYTES, SCALAR_BYTES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpTag {
    Issue = 1,
    Update = 2,
    Revoke = 3,
}

impl OpTag {
    pub fn from_byte(b: u8) -> Result<Self, IdentityError> {
        match b {
            1 => Ok(OpTag::Issue),
            2 => Ok(OpTag::Update),
            3 => Ok(OpTag::Revoke),
            _ => Err(IdentityError::Encoding(format!("unknown op tag {b}"))),
        }
    }
}

/// `(E_id, op, npk, T_expired, sigma)`; `sigma` covers the canonical bytes
/// of the four preceding fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub e_id: EncryptedId,
    pub op: OpTag,
    pub npk: PublicKey,
    /// Expiry, in UTC seconds.
    pub t_expired: u64,
    pub sigma: Signature,
}

pub(crate) struct Reader<'a> {
    pub(crate) buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], IdentityError> {
        if self.buf.len() < n {
            return Err(IdentityError::Encoding("truncated input".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, IdentityError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, IdentityError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, IdentityError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, IdentityError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A `u16`-length-prefixed field whose length must equal `expected`.
    pub(crate) fn field(&mut self, expected: usize) -> Result<&'a [u8], IdentityError> {
        let len = self.u16()? as usize;
        if len != expected {
            return Err(IdentityError::Encoding(format!(
                "field length {len}, expected {expected}"
            )));
        }
        self.take(len)
    }

    pub(crate) fn finish(self) -> Result<(), IdentityError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(IdentityError::Encoding("trailing bytes".into()))
        }
    }
}

pub(crate) fn put_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
    out.extend_from_slice(bytes);
}

impl Certificate {
    /// Bytes covered by `sigma`.
    pub fn signing_bytes(e_id: &EncryptedId, op: OpTag, npk: &PublicKey, t_expired: u64) -> Vec<u8> {
        let mut out = Vec::with_capacity(128);
        put_field(&mut out, &e_id.0);
        out.push(op as u8);
        put_field(&mut out, &npk.to_bytes());
        out.extend_from_slice(&t_expired.to_be_bytes());
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Self::signing_bytes(&self.e_id, self.op, &self.npk, self.t_expired);
        put_field(&mut out, &self.sigma.0);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        let mut r = Reader::new(bytes);
        let cert = Self::read(&mut r)?;
        r.finish()?;
        Ok(cert)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, IdentityError> {
        let e_id = EncryptedId::from_bytes(r.field(super::ENCRYPTED_ID_LEN)?)?;
        let op = OpTag::from_byte(r.u8()?)?;
        let npk = PublicKey::from_bytes(r.field(PUBLIC_KEY_BYTES)?)?;
        let t_expired = r.u64()?;
        let sigma = Signature::from_bytes(r.field(SIGNATURE_BYTES)?)?;
        Ok(Certificate {
            e_id,
            op,
            npk,
            t_expired,
            sigma,
        })
    }

    pub const ENCODED_LEN: usize =
        2 + super::ENCRYPTED_ID_LEN + 1 + 2 + PUBLIC_KEY_BYTES + 8 + 2 + SIGNATURE_BYTES;
}

/// A holder's membership material for slot `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSet {
    pub index: usize,
    pub omega: Scalar,
    pub u: Scalar,
    pub g_omega: G2Affine,
    pub g_u: G1Affine,
    pub proof: EvaluationProof,
    pub update_key: UpdateKey,
}

impl ParameterSet {
    pub const ENCODED_LEN: usize =
        4 + 2 * SCALAR_BYTES + G2_BYTES + 2 * G1_BYTES + UpdateKey::ENCODED_LEN;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        out.extend_from_slice(&(self.index as u32).to_be_bytes());
        out.extend_from_slice(&scalar_to_bytes(&self.omega));
        out.extend_from_slice(&scalar_to_bytes(&self.u));
        out.extend_from_slice(&g2_to_bytes(&self.g_omega));
        out.extend_from_slice(&g1_to_bytes(&self.g_u));
        out.extend_from_slice(&self.proof.to_bytes());
        out.extend_from_slice(&self.update_key.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdentityError> {
        let enc = |e: crate::kzg::KzgError| IdentityError::Encoding(e.to_string());
        let mut r = Reader::new(bytes);
        let index = r.u32()? as usize;
        let omega = scalar_from_bytes(r.take(SCALAR_BYTES)?).map_err(enc)?;
        let u = scalar_from_bytes(r.take(SCALAR_BYTES)?).map_err(enc)?;
        let g_omega = g2_from_bytes(r.take(G2_BYTES)?).map_err(enc)?;
        let g_u = g1_from_bytes(r.take(G1_BYTES)?).map_err(enc)?;
        let proof = EvaluationProof::from_bytes(r.take(G1_BYTES)?).map_err(enc)?;
        let update_key = UpdateKey::from_bytes(r.take(UpdateKey::ENCODED_LEN)?).map_err(enc)?;
        r.finish()?;
        Ok(ParameterSet {
            index,
            omega,
            u,
            g_omega,
            g_u,
            proof,
            update_key,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::{check_sig, encrypt_id, KeyPair};

    fn sample() -> (Certificate, KeyPair) {
        let ra = KeyPair::from_seed(1);
        let e_id = encrypt_id(b"XYZ9876JH400000077", &ra).unwrap();
        let npk = KeyPair::from_seed(2).public();
        let msg = Certificate::signing_bytes(&e_id, OpTag::Issue, &npk, 1_900_000_000);
        let cert = Certificate {
            e_id,
            op: OpTag::Issue,
            npk,
            t_expired: 1_900_000_000,
            sigma: ra.sign(&msg),
        };
        (cert, ra)
    }

    #[test]
    fn certificate_round_trip_and_layout() {
        let (cert, ra) = sample();
        let bytes = cert.to_bytes();
        assert_eq!(bytes.len(), Certificate::ENCODED_LEN);
        assert_eq!(&bytes[..2], &(46u16).to_be_bytes());
        assert_eq!(bytes[48], OpTag::Issue as u8);
        assert_eq!(Certificate::from_bytes(&bytes).unwrap(), cert);
        let signed = &bytes[..bytes.len() - 2 - SIGNATURE_BYTES];
        assert!(check_sig(&ra.public(), &cert.sigma, signed));
    }

    #[test]
    fn certificate_rejects_damage() {
        let (cert, _) = sample();
        let bytes = cert.to_bytes();
        assert!(Certificate::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Certificate::from_bytes(&extra).is_err());
        let mut bad_tag = bytes.clone();
        bad_tag[48] = 9;
        assert!(Certificate::from_bytes(&bad_tag).is_err());
    }
}
