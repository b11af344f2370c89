use std::path::Path;
use std::sync::OnceLock;

use ark_bls12_381::{G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::scalar_mul::ScalarMul;
use ark_ec::{PrimeGroup, VariableBaseMSM};
use ark_ff::{batch_inversion, Field, One, UniformRand};
use rand::{CryptoRng, RngCore};

use super::fixed::FixedBaseTable;
use super::{
    g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes, Commitment, KzgError, UpdateKey,
    G1_BYTES, G2_BYTES,
};
use crate::algebra::{EvaluationDomain, Polynomial, Scalar};
use crate::ops;

pub const SRS_MAGIC: &[u8; 8] = b"PBAGSRS\0";
pub const SRS_VERSION: u16 = 1;

/// Largest supported domain (2^16 slots).
pub const MAX_DOMAIN_SIZE: usize = 1 << 16;

/// Structured reference string plus the per-slot Lagrange commitments and
/// update keys derived from it.
///
/// `powers_g2` carries one extra power (`tau^n`) so the vanishing polynomial
/// of the full domain, which has degree `n`, can be committed in G2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParameters {
    domain: EvaluationDomain,
    powers_g1: Vec<G1Affine>,
    powers_g2: Vec<G2Affine>,
    lagrange_g1: Vec<G1Affine>,
    update_rho: Vec<G1Affine>,
    update_mu: Vec<G1Affine>,
    /// `g2^(w^i)` for every slot.
    domain_g2: Derived<Vec<G2Affine>>,
    /// Window table over the leading G2 powers.
    powers_g2_table: Derived<FixedBaseTable>,
}

/// Cached data computed from the parameters on first use. Never takes part
/// in equality.
#[derive(Clone, Debug)]
struct Derived<T>(OnceLock<T>);

impl<T> Default for Derived<T> {
    fn default() -> Self {
        Derived(OnceLock::new())
    }
}

impl<T> PartialEq for Derived<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl<T> Eq for Derived<T> {}

/// G2 commitments of degree below this use the window table.
const G2_TABLE_BASES: usize = 513;

/// The setup secret. Only reachable with the `insecure-trapdoor` feature.
#[cfg(feature = "insecure-trapdoor")]
#[derive(Clone, Copy, Debug)]
pub struct TrapdoorHandle {
    tau: Scalar,
}

#[cfg(feature = "insecure-trapdoor")]
impl TrapdoorHandle {
    pub fn tau(&self) -> Scalar {
        self.tau
    }
}

impl PublicParameters {
    /// Single-party setup for a domain of size `n`; the trapdoor is dropped.
    pub fn setup<R: RngCore + CryptoRng>(n: usize, rng: &mut R) -> Result<Self, KzgError> {
        Self::setup_inner(n, rng).map(|(pp, _tau)| pp)
    }

    #[cfg(feature = "insecure-trapdoor")]
    pub fn setup_with_trapdoor<R: RngCore + CryptoRng>(
        n: usize,
        rng: &mut R,
    ) -> Result<(Self, TrapdoorHandle), KzgError> {
        Self::setup_inner(n, rng).map(|(pp, tau)| (pp, TrapdoorHandle { tau }))
    }

    fn setup_inner<R: RngCore + CryptoRng>(
        n: usize,
        rng: &mut R,
    ) -> Result<(Self, Scalar), KzgError> {
        if n > MAX_DOMAIN_SIZE {
            return Err(KzgError::UnsupportedDomainSize(n));
        }
        let domain =
            EvaluationDomain::new(n).map_err(|_| KzgError::UnsupportedDomainSize(n))?;

        // tau must avoid the domain, otherwise every quotient below is undefined.
        let (tau, tau_n) = loop {
            let t = Scalar::rand(rng);
            let tn = t.pow([n as u64]);
            if tn != Scalar::one() {
                break (t, tn);
            }
        };

        let mut powers = Vec::with_capacity(n + 1);
        let mut acc = Scalar::one();
        for _ in 0..=n {
            powers.push(acc);
            acc *= tau;
        }

        // 1 / (tau - w^i) for every slot.
        let mut inv_diff: Vec<Scalar> = domain.elements().iter().map(|w| tau - w).collect();
        batch_inversion(&mut inv_diff);

        let vanishing_at_tau = tau_n - Scalar::one();
        let n_inv = domain.size_as_scalar().inverse().expect("n < p");
        let mut lagrange = Vec::with_capacity(n);
        let mut rho = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        for (w, inv) in domain.elements().iter().zip(&inv_diff) {
            // L_i(tau) = w^i (tau^n - 1) / (n (tau - w^i))
            let l = *w * vanishing_at_tau * n_inv * inv;
            lagrange.push(l);
            rho.push(vanishing_at_tau * inv);
            mu.push((l - Scalar::one()) * inv);
        }

        let g1 = G1Projective::generator();
        let g2 = G2Projective::generator();
        let pp = PublicParameters {
            powers_g1: g1.batch_mul(&powers[..n]),
            powers_g2: g2.batch_mul(&powers),
            lagrange_g1: g1.batch_mul(&lagrange),
            update_rho: g1.batch_mul(&rho),
            update_mu: g1.batch_mul(&mu),
            domain,
            domain_g2: Derived::default(),
            powers_g2_table: Derived::default(),
        };
        Ok((pp, tau))
    }

    pub fn n(&self) -> usize {
        self.domain.size()
    }

    pub fn domain(&self) -> &EvaluationDomain {
        &self.domain
    }

    pub fn powers_g1(&self) -> &[G1Affine] {
        &self.powers_g1
    }

    pub fn powers_g2(&self) -> &[G2Affine] {
        &self.powers_g2
    }

    pub fn lagrange_g1(&self) -> &[G1Affine] {
        &self.lagrange_g1
    }

    pub fn update_rho(&self) -> &[G1Affine] {
        &self.update_rho
    }

    pub fn update_mu(&self) -> &[G1Affine] {
        &self.update_mu
    }

    pub fn g1(&self) -> G1Affine {
        self.powers_g1[0]
    }

    pub fn g2(&self) -> G2Affine {
        self.powers_g2[0]
    }

    /// `g2^tau`.
    pub fn tau_g2(&self) -> G2Affine {
        self.powers_g2[1.min(self.powers_g2.len() - 1)]
    }

    /// Builds the cached verifier tables now rather than on first use.
    pub fn precompute(&self) {
        let _ = self.domain_point_g2(0);
        let _ = self.g2_table();
    }

    fn g2_table(&self) -> &FixedBaseTable {
        self.powers_g2_table.0.get_or_init(|| {
            let k = self.powers_g2.len().min(G2_TABLE_BASES);
            FixedBaseTable::new(&self.powers_g2[..k])
        })
    }

    /// `g2^(w^i)`.
    pub fn domain_point_g2(&self, i: usize) -> Result<G2Affine, KzgError> {
        self.check_index(i)?;
        let table = self
            .domain_g2
            .0
            .get_or_init(|| G2Projective::generator().batch_mul(self.domain.elements()));
        Ok(table[i])
    }

    pub fn update_key(&self, i: usize) -> Result<UpdateKey, KzgError> {
        self.check_index(i)?;
        Ok(UpdateKey {
            index: i,
            rho: self.update_rho[i],
            mu: self.update_mu[i],
            omega_i: self.domain.element(i),
        })
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<(), KzgError> {
        if i >= self.n() {
            Err(KzgError::IndexOutOfDomain {
                index: i,
                size: self.n(),
            })
        } else {
            Ok(())
        }
    }

    /// Commits to a coefficient-form polynomial of degree `< n`.
    pub fn commit(&self, poly: &Polynomial) -> Result<Commitment, KzgError> {
        self.commit_g1(poly).map(|p| Commitment(p.into()))
    }

    pub(crate) fn commit_g1(&self, poly: &Polynomial) -> Result<G1Projective, KzgError> {
        if let Some(d) = poly.degree() {
            if d >= self.n() {
                return Err(KzgError::DegreeTooLarge {
                    degree: d,
                    max: self.n() - 1,
                });
            }
        }
        ops::msm();
        Ok(G1Projective::msm_unchecked(&self.powers_g1, poly.coeffs()))
    }

    /// Commits in G2 to a polynomial of degree `<= n`.
    pub(crate) fn commit_g2(&self, poly: &Polynomial) -> Result<G2Projective, KzgError> {
        if let Some(d) = poly.degree() {
            if d > self.n() {
                return Err(KzgError::DegreeTooLarge {
                    degree: d,
                    max: self.n(),
                });
            }
        }
        ops::msm();
        let coeffs = poly.coeffs();
        if coeffs.len() <= G2_TABLE_BASES {
            let table = self.g2_table();
            if coeffs.len() <= table.len() {
                return Ok(table.msm(coeffs));
            }
        }
        Ok(G2Projective::msm_unchecked(&self.powers_g2, coeffs))
    }

    /// Commits to the function with the given values on the domain:
    /// `C = prod l_i^{u_i}`.
    pub fn commit_evaluations(&self, evals: &[Scalar]) -> Result<Commitment, KzgError> {
        if evals.len() != self.n() {
            return Err(KzgError::WrongEvaluationCount {
                expected: self.n(),
                got: evals.len(),
            });
        }
        ops::msm();
        Ok(Commitment(
            G1Projective::msm_unchecked(&self.lagrange_g1, evals).into(),
        ))
    }

    /// Canonical binary encoding: header, then every vector in declared order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut out =
            Vec::with_capacity(14 + 4 * n * G1_BYTES + (n + 1) * G2_BYTES);
        out.extend_from_slice(SRS_MAGIC);
        out.extend_from_slice(&SRS_VERSION.to_be_bytes());
        out.extend_from_slice(&(n as u32).to_be_bytes());
        for p in &self.powers_g1 {
            out.extend_from_slice(&g1_to_bytes(p));
        }
        for p in &self.powers_g2 {
            out.extend_from_slice(&g2_to_bytes(p));
        }
        for v in [&self.lagrange_g1, &self.update_rho, &self.update_mu] {
            for p in v {
                out.extend_from_slice(&g1_to_bytes(p));
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KzgError> {
        if bytes.len() < 14 || &bytes[..8] != SRS_MAGIC {
            return Err(KzgError::Encoding("missing parameter file header".into()));
        }
        let version = u16::from_be_bytes([bytes[8], bytes[9]]);
        if version != SRS_VERSION {
            return Err(KzgError::VersionMismatch(version));
        }
        let n = u32::from_be_bytes(bytes[10..14].try_into().unwrap()) as usize;
        if n == 0 || n > MAX_DOMAIN_SIZE {
            return Err(KzgError::UnsupportedDomainSize(n));
        }
        let expected = 14 + 4 * n * G1_BYTES + (n + 1) * G2_BYTES;
        if bytes.len() != expected {
            return Err(KzgError::Encoding(format!(
                "parameter file must be {expected} bytes for n = {n}, got {}",
                bytes.len()
            )));
        }
        let domain =
            EvaluationDomain::new(n).map_err(|_| KzgError::UnsupportedDomainSize(n))?;
        let mut rest = &bytes[14..];
        let take_g1 = |count: usize, rest: &mut &[u8]| -> Result<Vec<G1Affine>, KzgError> {
            let (head, tail) = rest.split_at(count * G1_BYTES);
            *rest = tail;
            head.chunks(G1_BYTES).map(g1_from_bytes).collect()
        };
        let powers_g1 = take_g1(n, &mut rest)?;
        let (g2_bytes, tail) = rest.split_at((n + 1) * G2_BYTES);
        rest = tail;
        let powers_g2 = g2_bytes
            .chunks(G2_BYTES)
            .map(g2_from_bytes)
            .collect::<Result<Vec<_>, _>>()?;
        let lagrange_g1 = take_g1(n, &mut rest)?;
        let update_rho = take_g1(n, &mut rest)?;
        let update_mu = take_g1(n, &mut rest)?;
        Ok(PublicParameters {
            domain,
            powers_g1,
            powers_g2,
            lagrange_g1,
            update_rho,
            update_mu,
            domain_g2: Derived::default(),
            powers_g2_table: Derived::default(),
        })
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self, KzgError> {
        let bytes = std::fs::read(path).map_err(|e| KzgError::Encoding(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{lagrange_basis, poly_divide};
    use crate::kzg::pairing_eq;
    use ark_ec::{AffineRepr, CurveGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(n: usize) -> (PublicParameters, TrapdoorHandle) {
        let mut rng = ChaCha20Rng::seed_from_u64(n as u64);
        PublicParameters::setup_with_trapdoor(n, &mut rng).unwrap()
    }

    #[test]
    fn single_slot_domain() {
        let (pp, _) = setup(1);
        let g = G1Affine::generator();
        assert_eq!(pp.powers_g1(), &[g]);
        assert_eq!(pp.lagrange_g1(), &[g]);
        assert_eq!(pp.update_rho(), &[g]);
        assert!(pp.update_mu()[0].is_zero());
    }

    #[test]
    fn powers_match_trapdoor() {
        let (pp, td) = setup(4);
        let tau = td.tau();
        assert_eq!(
            pp.powers_g1()[2],
            (G1Projective::generator() * (tau * tau)).into_affine()
        );
        assert_eq!(pp.powers_g2().len(), 5);
        assert_eq!(
            pp.powers_g2()[4],
            (G2Projective::generator() * tau.pow([4u64])).into_affine()
        );
    }

    #[test]
    fn mirror_consistency() {
        let (pp, _) = setup(8);
        for i in 0..8 {
            assert!(pairing_eq(pp.powers_g1()[i], pp.g2(), pp.g1(), pp.powers_g2()[i]));
        }
    }

    #[test]
    fn lagrange_commitments_sum_to_generator() {
        let (pp, _) = setup(16);
        let sum: G1Projective = pp.lagrange_g1().iter().map(|p| p.into_group()).sum();
        assert_eq!(sum.into_affine(), pp.g1());
    }

    #[test]
    fn update_keys_match_explicit_quotients() {
        // Independent route: commit the quotient polynomials through the SRS.
        let (pp, _) = setup(8);
        let d = pp.domain().clone();
        let vanishing = d.vanishing_polynomial();
        for i in 0..8 {
            let lin = Polynomial::from_coeffs(vec![-d.element(i), Scalar::one()]);
            let (rho_q, r) = poly_divide(&vanishing, &lin).unwrap();
            assert!(r.is_zero());
            let li = lagrange_basis(&d, i).unwrap();
            let (mu_q, r) =
                poly_divide(&(&li - &Polynomial::constant(Scalar::one())), &lin).unwrap();
            assert!(r.is_zero());
            assert_eq!(pp.commit(&rho_q).unwrap().0, pp.update_rho()[i]);
            assert_eq!(pp.commit(&mu_q).unwrap().0, pp.update_mu()[i]);
            assert_eq!(pp.commit(&li).unwrap().0, pp.lagrange_g1()[i]);
        }
    }

    #[test]
    fn serialization_round_trip_is_byte_exact() {
        let (pp, _) = setup(4);
        let bytes = pp.to_bytes();
        let back = PublicParameters::from_bytes(&bytes).unwrap();
        assert_eq!(back, pp);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn deserialization_rejects_damage() {
        let (pp, _) = setup(2);
        let mut bytes = pp.to_bytes();
        bytes[8] = 9;
        assert_eq!(
            PublicParameters::from_bytes(&bytes),
            Err(KzgError::VersionMismatch(0x0901))
        );
        let mut bytes = pp.to_bytes();
        bytes.pop();
        assert!(PublicParameters::from_bytes(&bytes).is_err());
        let mut bytes = pp.to_bytes();
        bytes[14..14 + G1_BYTES].fill(0xff);
        assert!(PublicParameters::from_bytes(&bytes).is_err());
        assert!(PublicParameters::from_bytes(&[]).is_err());
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            PublicParameters::setup(12, &mut rng),
            Err(KzgError::UnsupportedDomainSize(12))
        );
    }
}
