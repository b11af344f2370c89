use std::collections::{BTreeMap, HashSet};

use ark_bls12_381::{G1Affine, G1Projective, G2Affine};
use ark_ec::{AffineRepr, CurveGroup, VariableBaseMSM};

use super::{g1_mul, g2_mul, pairing_eq, Commitment, EvaluationProof, KzgError, PublicParameters};
use crate::algebra::{
    interpolate, partial_fraction_coeffs, partial_fraction_coeffs_at, vanishing_poly, Polynomial,
    Scalar,
};
use crate::ops;

impl PublicParameters {
    fn check_degree(&self, poly: &Polynomial) -> Result<(), KzgError> {
        match poly.degree() {
            Some(d) if d >= self.n() => Err(KzgError::DegreeTooLarge {
                degree: d,
                max: self.n() - 1,
            }),
            _ => Ok(()),
        }
    }

    /// Opens `poly` at `w^i`: returns `Psi(w^i)` and the commitment to
    /// `(Psi(X) - Psi(w^i)) / (X - w^i)`.
    pub fn prove_single(
        &self,
        poly: &Polynomial,
        i: usize,
    ) -> Result<(Scalar, EvaluationProof), KzgError> {
        self.check_index(i)?;
        self.check_degree(poly)?;
        let (quotient, value) = poly.divide_by_linear(self.domain().element(i));
        let proof = self.commit_g1(&quotient)?;
        Ok((value, EvaluationProof(proof.into_affine())))
    }

    /// Proofs for every slot, by per-index division.
    pub fn prove_all(&self, poly: &Polynomial) -> Result<Vec<EvaluationProof>, KzgError> {
        self.check_degree(poly)?;
        (0..self.n())
            .map(|i| self.prove_single(poly, i).map(|(_, p)| p))
            .collect()
    }

    /// Opens `poly` at every `w^i, i in I` with one proof `g^q(tau)` where
    /// `Psi = D_I * q + r`.
    pub fn prove_multi(
        &self,
        poly: &Polynomial,
        indices: &[usize],
    ) -> Result<(BTreeMap<usize, Scalar>, EvaluationProof), KzgError> {
        if indices.is_empty() {
            return Err(KzgError::EmptyIndexSet);
        }
        for &i in indices {
            self.check_index(i)?;
        }
        self.check_degree(poly)?;
        let divisor = vanishing_poly(indices, self.domain())?;
        let (quotient, _remainder) = poly.divide(&divisor)?;
        let evals = indices
            .iter()
            .map(|&i| (i, poly.evaluate(&self.domain().element(i))))
            .collect();
        Ok((evals, EvaluationProof(self.commit_g1(&quotient)?.into_affine())))
    }
}

/// Checks `e(C / g^y, g) == e(pi, g^tau / g^x)`; two pairings. Domain
/// points take `g^x` from the precomputed table.
pub fn verify_single(
    pp: &PublicParameters,
    commitment: &Commitment,
    x: Scalar,
    y: Scalar,
    proof: &EvaluationProof,
) -> bool {
    let g1_y = g1_mul(&pp.g1(), y);
    let g2_x = match pp.domain().index_of(&x) {
        Some(i) => pp.domain_point_g2(i).expect("index from domain"),
        None => g2_mul(&pp.g2(), x).into_affine(),
    };
    verify_single_elements(pp, commitment, g1_y.into_affine(), g2_x, proof)
}

/// The single-opening pairing check with `g^y` and `g^x` supplied in the group.
pub(crate) fn verify_single_elements(
    pp: &PublicParameters,
    commitment: &Commitment,
    g1_y: G1Affine,
    g2_x: G2Affine,
    proof: &EvaluationProof,
) -> bool {
    let lhs = (commitment.0.into_group() - g1_y).into_affine();
    let rhs = (pp.tau_g2().into_group() - g2_x).into_affine();
    pairing_eq(lhs, pp.g2(), proof.0, rhs)
}

/// Combines single-point proofs into the multi-point proof for the same set:
/// `pi_I = prod pi_i^{c_i}`, `c_i = 1 / D_I'(w^i)`.
pub fn aggregate_proofs(
    pp: &PublicParameters,
    items: &[(usize, EvaluationProof)],
) -> Result<EvaluationProof, KzgError> {
    if items.is_empty() {
        return Err(KzgError::EmptyIndexSet);
    }
    let mut seen = HashSet::with_capacity(items.len());
    for (i, _) in items {
        pp.check_index(*i)?;
        if !seen.insert(*i) {
            return Err(KzgError::DuplicateIndex(*i));
        }
    }
    let indices: Vec<usize> = items.iter().map(|(i, _)| *i).collect();
    let coeffs = partial_fraction_coeffs(&indices, pp.domain())?;
    let bases: Vec<G1Affine> = items.iter().map(|(_, p)| p.0).collect();
    let scalars: Vec<Scalar> = indices.iter().map(|i| coeffs[i]).collect();
    ops::msm();
    Ok(EvaluationProof(
        G1Projective::msm_unchecked(&bases, &scalars).into_affine(),
    ))
}

/// Aggregates single-point proofs for distinct points `x_i` and checks the
/// result against the claimed values in one two-pairing equation.
pub(crate) fn verify_aggregate(
    pp: &PublicParameters,
    commitment: &Commitment,
    points: &[(Scalar, Scalar)],
    proofs: &[G1Affine],
) -> bool {
    if points.is_empty() || points.len() != proofs.len() {
        return false;
    }
    let xs: Vec<Scalar> = points.iter().map(|(x, _)| *x).collect();
    let coeffs = partial_fraction_coeffs_at(&xs);
    ops::msm();
    let aggregate = G1Projective::msm_unchecked(proofs, &coeffs).into_affine();
    verify_multi_points(pp, commitment, points, &EvaluationProof(aggregate))
}

/// Checks `e(C / g^R(tau), g) == e(pi_I, g^D_I(tau))`; two pairings for any
/// number of evaluations.
pub fn verify_multi(
    pp: &PublicParameters,
    commitment: &Commitment,
    evals: &BTreeMap<usize, Scalar>,
    proof: &EvaluationProof,
) -> bool {
    if evals.is_empty() || evals.keys().any(|&i| i >= pp.n()) {
        return false;
    }
    let points: Vec<(Scalar, Scalar)> = evals
        .iter()
        .map(|(&i, &u)| (pp.domain().element(i), u))
        .collect();
    verify_multi_points(pp, commitment, &points, proof)
}

pub(crate) fn verify_multi_points(
    pp: &PublicParameters,
    commitment: &Commitment,
    points: &[(Scalar, Scalar)],
    proof: &EvaluationProof,
) -> bool {
    let Ok(remainder) = interpolate(points) else {
        return false;
    };
    let roots: Vec<Scalar> = points.iter().map(|(x, _)| *x).collect();
    let vanishing = Polynomial::from_roots(&roots);
    let (Ok(r_tau), Ok(d_tau)) = (pp.commit_g1(&remainder), pp.commit_g2(&vanishing)) else {
        return false;
    };
    let lhs = (commitment.0.into_group() - r_tau).into_affine();
    pairing_eq(lhs, pp.g2(), proof.0, d_tau.into_affine())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kzg::TrapdoorHandle;
    use ark_ec::PrimeGroup;
    use ark_ff::{One, UniformRand, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(n: usize, seed: u64) -> (PublicParameters, TrapdoorHandle, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, td) = PublicParameters::setup_with_trapdoor(n, &mut rng).unwrap();
        (pp, td, rng)
    }

    fn g1_pow(k: Scalar) -> G1Affine {
        (G1Projective::generator() * k).into_affine()
    }

    #[test]
    fn commit_zero_and_constant() {
        let (pp, _, _) = setup(4, 1);
        assert!(pp.commit(&Polynomial::zero()).unwrap().0.is_zero());
        let c = Scalar::from(42u64);
        assert_eq!(pp.commit(&Polynomial::constant(c)).unwrap().0, g1_pow(c));
    }

    #[test]
    fn commit_paths_agree() {
        let (pp, _, mut rng) = setup(8, 2);
        let evals: Vec<Scalar> = (0..8).map(|_| Scalar::rand(&mut rng)).collect();
        let poly = pp.domain().interpolate(&evals).unwrap();
        assert_eq!(
            pp.commit_evaluations(&evals).unwrap(),
            pp.commit(&poly).unwrap()
        );
    }

    #[test]
    fn commit_errors() {
        let (pp, _, mut rng) = setup(4, 3);
        assert_eq!(
            pp.commit(&Polynomial::rand(4, &mut rng)),
            Err(KzgError::DegreeTooLarge { degree: 4, max: 3 })
        );
        assert_eq!(
            pp.commit_evaluations(&[Scalar::one(); 3]),
            Err(KzgError::WrongEvaluationCount {
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn prove_constant_and_identity_poly() {
        let (pp, _, _) = setup(4, 4);
        let c = Scalar::from(5u64);
        let (u, pi) = pp.prove_single(&Polynomial::constant(c), 2).unwrap();
        assert_eq!(u, c);
        assert!(pi.is_identity());

        let x = Polynomial::from_coeffs(vec![Scalar::zero(), Scalar::one()]);
        let (u, pi) = pp.prove_single(&x, 0).unwrap();
        assert_eq!(u, Scalar::one());
        assert_eq!(pi.0, pp.g1());
    }

    #[test]
    fn prove_single_matches_trapdoor() {
        let (pp, td, mut rng) = setup(8, 5);
        let poly = Polynomial::rand(7, &mut rng);
        let w3 = pp.domain().element(3);
        let (u, pi) = pp.prove_single(&poly, 3).unwrap();
        let tau = td.tau();
        let q_tau = (poly.evaluate(&tau) - u) * ark_ff::Field::inverse(&(tau - w3)).unwrap();
        assert_eq!(pi.0, g1_pow(q_tau));
        assert_eq!(u, poly.evaluate(&w3));
    }

    #[test]
    fn verify_single_complete_and_sound_on_tamper() {
        let (pp, _, mut rng) = setup(8, 6);
        let poly = Polynomial::rand(7, &mut rng);
        let c = pp.commit(&poly).unwrap();
        let (u, pi) = pp.prove_single(&poly, 3).unwrap();
        let x = pp.domain().element(3);
        let (ok, counts) = ops::measure(|| verify_single(&pp, &c, x, u, &pi));
        assert!(ok);
        assert_eq!(counts.pairings, 2);
        assert!(!verify_single(&pp, &c, x, u + Scalar::one(), &pi));
        for _ in 0..100 {
            let forged = EvaluationProof(g1_pow(Scalar::rand(&mut rng)));
            assert!(!verify_single(&pp, &c, x, u, &forged));
        }
    }

    #[test]
    fn prove_all_matches_single() {
        let (pp, _, mut rng) = setup(4, 7);
        let poly = Polynomial::rand(3, &mut rng);
        let all = pp.prove_all(&poly).unwrap();
        for (i, p) in all.iter().enumerate() {
            assert_eq!(*p, pp.prove_single(&poly, i).unwrap().1);
        }
        let all = pp.prove_all(&Polynomial::constant(Scalar::from(9u64))).unwrap();
        assert!(all.iter().all(|p| p.is_identity()));
    }

    #[test]
    fn prove_multi_cases() {
        let (pp, td, mut rng) = setup(8, 8);
        let poly = Polynomial::rand(7, &mut rng);

        let (_, single) = pp.prove_single(&poly, 5).unwrap();
        let (_, multi) = pp.prove_multi(&poly, &[5]).unwrap();
        assert_eq!(single, multi);

        let all: Vec<usize> = (0..8).collect();
        let (_, full) = pp.prove_multi(&poly, &all).unwrap();
        assert!(full.is_identity());

        let set = [1usize, 4, 6];
        let (evals, pi) = pp.prove_multi(&poly, &set).unwrap();
        let tau = td.tau();
        let pts: Vec<_> = set
            .iter()
            .map(|&i| (pp.domain().element(i), evals[&i]))
            .collect();
        let r = interpolate(&pts).unwrap();
        let d = vanishing_poly(&set, pp.domain()).unwrap();
        let q_tau = (poly.evaluate(&tau) - r.evaluate(&tau))
            * ark_ff::Field::inverse(&d.evaluate(&tau)).unwrap();
        assert_eq!(pi.0, g1_pow(q_tau));
        let c = pp.commit(&poly).unwrap();
        assert!(verify_multi(&pp, &c, &evals, &pi));
    }

    #[test]
    fn prove_multi_errors() {
        let (pp, _, mut rng) = setup(4, 9);
        let poly = Polynomial::rand(3, &mut rng);
        assert_eq!(pp.prove_multi(&poly, &[]), Err(KzgError::EmptyIndexSet));
        assert!(matches!(
            pp.prove_multi(&poly, &[7]),
            Err(KzgError::IndexOutOfDomain { index: 7, size: 4 })
        ));
    }

    #[test]
    fn aggregate_matches_multi() {
        let (pp, _, mut rng) = setup(2, 10);
        let poly = Polynomial::rand(1, &mut rng);
        let items: Vec<_> = (0..2)
            .map(|i| (i, pp.prove_single(&poly, i).unwrap().1))
            .collect();
        let agg = aggregate_proofs(&pp, &items).unwrap();
        assert_eq!(agg, pp.prove_multi(&poly, &[0, 1]).unwrap().1);

        let (pp, _, mut rng) = setup(16, 11);
        let poly = Polynomial::rand(15, &mut rng);
        let set = [2usize, 3, 9, 11, 14];
        let items: Vec<_> = set
            .iter()
            .map(|&i| (i, pp.prove_single(&poly, i).unwrap().1))
            .collect();
        assert_eq!(
            aggregate_proofs(&pp, &items).unwrap(),
            pp.prove_multi(&poly, &set).unwrap().1
        );
        assert_eq!(aggregate_proofs(&pp, &items[..1]).unwrap(), items[0].1);

        let dup = vec![items[0], items[0]];
        assert_eq!(aggregate_proofs(&pp, &dup), Err(KzgError::DuplicateIndex(2)));
    }

    #[test]
    fn verify_multi_budget_and_tamper() {
        let (pp, _, mut rng) = setup(64, 12);
        let poly = Polynomial::rand(63, &mut rng);
        let c = pp.commit(&poly).unwrap();
        let set: Vec<usize> = (0..50).collect();
        let (mut evals, pi) = pp.prove_multi(&poly, &set).unwrap();
        let (ok, counts) = ops::measure(|| verify_multi(&pp, &c, &evals, &pi));
        assert!(ok);
        assert_eq!(counts.pairings, 2);
        *evals.get_mut(&17).unwrap() += Scalar::one();
        assert!(!verify_multi(&pp, &c, &evals, &pi));
        assert!(!verify_multi(&pp, &c, &BTreeMap::new(), &pi));
    }

    #[test]
    fn verify_multi_full_domain_uses_top_power() {
        let (pp, _, mut rng) = setup(8, 13);
        let poly = Polynomial::rand(7, &mut rng);
        let c = pp.commit(&poly).unwrap();
        let set: Vec<usize> = (0..8).collect();
        let (evals, pi) = pp.prove_multi(&poly, &set).unwrap();
        assert!(verify_multi(&pp, &c, &evals, &pi));
    }
}
