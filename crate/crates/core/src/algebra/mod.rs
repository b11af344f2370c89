//! Scalar-field and polynomial arithmetic over power-of-two evaluation domains.
//!
//! Everything here is exact field arithmetic over the BLS12-381 scalar field,
//! whose multiplicative group has 2-adicity 32.

mod domain;
mod poly;

pub use domain::EvaluationDomain;
pub use poly::Polynomial;

use std::collections::{BTreeMap, HashSet};

use ark_ff::{batch_inversion, Field, One, Zero};
use thiserror::Error;

/// Element of the prime scalar field shared by all commitment arithmetic.
pub type Scalar = ark_bls12_381::Fr;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("domain size {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("scalar field has no root of unity of order {0}")]
    NoRootOfOrderN(usize),
    #[error("interpolation points contain a repeated abscissa")]
    DuplicateAbscissa,
    #[error("division by the zero polynomial")]
    DivisionByZeroPolynomial,
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("index {index} is outside a domain of size {size}")]
    IndexOutOfDomain { index: usize, size: usize },
    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("index {0} is not a member of the index set")]
    IndexNotInSet(usize),
    #[error("expected {expected} evaluations, got {got}")]
    WrongEvaluationCount { expected: usize, got: usize },
}

/// Builds the domain of `n`-th roots of unity.
pub fn roots_of_unity(n: usize) -> Result<EvaluationDomain, AlgebraError> {
    EvaluationDomain::new(n)
}

/// Lagrange interpolation through arbitrary distinct abscissae.
///
/// Uses the barycentric form: with `M(X) = prod (X - x_j)` and weights
/// `w_i = 1 / prod_{j != i} (x_i - x_j)`, the interpolant is
/// `sum y_i w_i M(X) / (X - x_i)`.
pub fn interpolate(points: &[(Scalar, Scalar)]) -> Result<Polynomial, AlgebraError> {
    if points.is_empty() {
        return Ok(Polynomial::zero());
    }
    let mut seen = HashSet::with_capacity(points.len());
    if !points.iter().all(|(x, _)| seen.insert(*x)) {
        return Err(AlgebraError::DuplicateAbscissa);
    }

    let xs: Vec<Scalar> = points.iter().map(|(x, _)| *x).collect();
    let master = Polynomial::from_roots(&xs);

    let mut weights: Vec<Scalar> = xs
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            xs.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Scalar::one(), |acc, (_, xj)| acc * (*xi - xj))
        })
        .collect();
    batch_inversion(&mut weights);

    let mut coeffs = vec![Scalar::zero(); points.len()];
    for ((xi, yi), wi) in points.iter().zip(&weights) {
        let scale = *yi * wi;
        if scale.is_zero() {
            continue;
        }
        let quotient = master.divide_by_linear(*xi).0;
        for (c, q) in coeffs.iter_mut().zip(quotient.coeffs()) {
            *c += scale * q;
        }
    }
    Ok(Polynomial::from_coeffs(coeffs))
}

/// Long division: returns `(quotient, remainder)` with
/// `numerator = divisor * quotient + remainder` and `deg remainder < deg divisor`.
pub fn poly_divide(
    numerator: &Polynomial,
    divisor: &Polynomial,
) -> Result<(Polynomial, Polynomial), AlgebraError> {
    numerator.divide(divisor)
}

fn check_indices(indices: &[usize], domain: &EvaluationDomain) -> Result<(), AlgebraError> {
    if indices.is_empty() {
        return Err(AlgebraError::EmptyIndexSet);
    }
    let mut seen = HashSet::with_capacity(indices.len());
    for &i in indices {
        if i >= domain.size() {
            return Err(AlgebraError::IndexOutOfDomain {
                index: i,
                size: domain.size(),
            });
        }
        if !seen.insert(i) {
            return Err(AlgebraError::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// `D_I(X) = prod_{i in I} (X - w^i)`.
///
/// The full domain short-circuits to `X^n - 1`.
pub fn vanishing_poly(
    indices: &[usize],
    domain: &EvaluationDomain,
) -> Result<Polynomial, AlgebraError> {
    check_indices(indices, domain)?;
    if indices.len() == domain.size() {
        return Ok(domain.vanishing_polynomial());
    }
    let roots: Vec<Scalar> = indices.iter().map(|&i| domain.element(i)).collect();
    Ok(Polynomial::from_roots(&roots))
}

/// `D_I'(w^i)`, evaluated in product form.
///
/// On the full domain this is `n * w^{-i}` and takes constant time.
pub fn derivative_at_root(
    indices: &[usize],
    i: usize,
    domain: &EvaluationDomain,
) -> Result<Scalar, AlgebraError> {
    check_indices(indices, domain)?;
    if !indices.contains(&i) {
        return Err(AlgebraError::IndexNotInSet(i));
    }
    if indices.len() == domain.size() {
        return Ok(domain.size_as_scalar() * domain.element_inverse(i));
    }
    let x = domain.element(i);
    Ok(indices
        .iter()
        .filter(|&&j| j != i)
        .fold(Scalar::one(), |acc, &j| acc * (x - domain.element(j))))
}

/// Partial-fraction coefficients `c_i = 1 / D_I'(w^i)`, so that
/// `1 / D_I(X) = sum c_i / (X - w^i)`.
pub fn partial_fraction_coeffs(
    indices: &[usize],
    domain: &EvaluationDomain,
) -> Result<BTreeMap<usize, Scalar>, AlgebraError> {
    check_indices(indices, domain)?;
    let mut derivs = indices
        .iter()
        .map(|&i| derivative_at_root(indices, i, domain))
        .collect::<Result<Vec<_>, _>>()?;
    batch_inversion(&mut derivs);
    Ok(indices.iter().copied().zip(derivs).collect())
}

/// Partial-fraction coefficients for arbitrary distinct points, in input order.
pub(crate) fn partial_fraction_coeffs_at(points: &[Scalar]) -> Vec<Scalar> {
    let mut derivs: Vec<Scalar> = points
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Scalar::one(), |acc, (_, xj)| acc * (*xi - xj))
        })
        .collect();
    batch_inversion(&mut derivs);
    derivs
}

/// Lagrange basis polynomial `L_i(X)` for the domain.
pub fn lagrange_basis(domain: &EvaluationDomain, i: usize) -> Result<Polynomial, AlgebraError> {
    if i >= domain.size() {
        return Err(AlgebraError::IndexOutOfDomain {
            index: i,
            size: domain.size(),
        });
    }
    let mut evals = vec![Scalar::zero(); domain.size()];
    evals[i] = Scalar::one();
    domain.interpolate(&evals)
}

/// `L_i(z)` without building the polynomial: `w^i (z^n - 1) / (n (z - w^i))`.
pub fn lagrange_basis_at(domain: &EvaluationDomain, i: usize, z: Scalar) -> Scalar {
    let wi = domain.element(i);
    if z == wi {
        return Scalar::one();
    }
    let zn = z.pow([domain.size() as u64]);
    if zn == Scalar::one() {
        return Scalar::zero();
    }
    let denom = domain.size_as_scalar() * (z - wi);
    wi * (zn - Scalar::one()) * denom.inverse().expect("z is not a domain element")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::UniformRand;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn s(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0xa19e)
    }

    #[test]
    fn interpolate_single_point_is_constant() {
        let p = interpolate(&[(s(5), s(9))]).unwrap();
        assert_eq!(p, Polynomial::constant(s(9)));
    }

    #[test]
    fn interpolate_exact_square() {
        let pts: Vec<_> = (0..4u64).map(|x| (s(x), s(x * x))).collect();
        let p = interpolate(&pts).unwrap();
        assert_eq!(p, Polynomial::from_coeffs(vec![s(0), s(0), s(1)]));
    }

    #[test]
    fn interpolate_random_points_hits_every_abscissa() {
        let mut rng = rng();
        let pts: Vec<_> = (0..8)
            .map(|_| (Scalar::rand(&mut rng), Scalar::rand(&mut rng)))
            .collect();
        let p = interpolate(&pts).unwrap();
        assert!(p.degree().map_or(true, |d| d < 8));
        for (x, y) in &pts {
            assert_eq!(p.evaluate(x), *y);
        }
    }

    #[test]
    fn interpolate_rejects_duplicates() {
        let err = interpolate(&[(s(1), s(2)), (s(1), s(3))]).unwrap_err();
        assert_eq!(err, AlgebraError::DuplicateAbscissa);
    }

    #[test]
    fn divide_factorization_and_self() {
        let num = Polynomial::from_coeffs(vec![-s(1), s(0), s(1)]);
        let den = Polynomial::from_coeffs(vec![-s(1), s(1)]);
        let (q, r) = poly_divide(&num, &den).unwrap();
        assert_eq!(q, Polynomial::from_coeffs(vec![s(1), s(1)]));
        assert!(r.is_zero());

        let (q, r) = poly_divide(&num, &num).unwrap();
        assert_eq!(q, Polynomial::constant(s(1)));
        assert!(r.is_zero());
    }

    #[test]
    fn divide_random_multiplies_back() {
        let mut rng = rng();
        let num = Polynomial::rand(7, &mut rng);
        let den = Polynomial::rand(3, &mut rng);
        let (q, r) = poly_divide(&num, &den).unwrap();
        assert!(r.degree().map_or(true, |d| d < 3));
        assert_eq!(&(&den * &q) + &r, num);
    }

    #[test]
    fn divide_by_zero_fails() {
        let num = Polynomial::constant(s(3));
        assert_eq!(
            poly_divide(&num, &Polynomial::zero()).unwrap_err(),
            AlgebraError::DivisionByZeroPolynomial
        );
    }

    #[test]
    fn divide_by_constant_allowed() {
        let num = Polynomial::from_coeffs(vec![s(2), s(4)]);
        let (q, r) = poly_divide(&num, &Polynomial::constant(s(2))).unwrap();
        assert_eq!(q, Polynomial::from_coeffs(vec![s(1), s(2)]));
        assert!(r.is_zero());
    }

    #[test]
    fn vanishing_full_domain_and_singletons() {
        let d = roots_of_unity(8).unwrap();
        let all: Vec<usize> = (0..8).collect();
        let mut expected = vec![Scalar::zero(); 9];
        expected[0] = -Scalar::one();
        expected[8] = Scalar::one();
        assert_eq!(
            vanishing_poly(&all, &d).unwrap(),
            Polynomial::from_coeffs(expected)
        );
        // The product form must agree with the closed form.
        let roots: Vec<_> = d.elements().to_vec();
        assert_eq!(Polynomial::from_roots(&roots), d.vanishing_polynomial());

        assert_eq!(
            vanishing_poly(&[0], &d).unwrap(),
            Polynomial::from_coeffs(vec![-s(1), s(1)])
        );
    }

    #[test]
    fn vanishing_subset_roots_by_evaluation() {
        let d = roots_of_unity(8).unwrap();
        let p = vanishing_poly(&[1, 3], &d).unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coeffs().last(), Some(&Scalar::one()));
        for (k, w) in d.elements().iter().enumerate() {
            let v = p.evaluate(w);
            if k == 1 || k == 3 {
                assert!(v.is_zero());
            } else {
                assert!(!v.is_zero());
            }
        }
    }

    #[test]
    fn vanishing_errors() {
        let d = roots_of_unity(4).unwrap();
        assert_eq!(vanishing_poly(&[], &d).unwrap_err(), AlgebraError::EmptyIndexSet);
        assert_eq!(
            vanishing_poly(&[4], &d).unwrap_err(),
            AlgebraError::IndexOutOfDomain { index: 4, size: 4 }
        );
    }

    #[test]
    fn derivative_full_domain_n4() {
        let d = roots_of_unity(4).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let got = derivative_at_root(&all, 1, &d).unwrap();
        assert_eq!(got, s(4) * d.omega().inverse().unwrap());
    }

    #[test]
    fn derivative_singleton_is_one() {
        let d = roots_of_unity(8).unwrap();
        assert_eq!(derivative_at_root(&[0], 0, &d).unwrap(), Scalar::one());
        assert_eq!(
            derivative_at_root(&[0], 1, &d).unwrap_err(),
            AlgebraError::IndexNotInSet(1)
        );
    }

    #[test]
    fn derivative_matches_symbolic_derivative() {
        let d = roots_of_unity(8).unwrap();
        let set = [0usize, 2, 5];
        let dpoly = vanishing_poly(&set, &d).unwrap().derivative();
        for &i in &set {
            assert_eq!(
                derivative_at_root(&set, i, &d).unwrap(),
                dpoly.evaluate(&d.element(i))
            );
        }
    }

    #[test]
    fn partial_fractions_two_roots() {
        let d = roots_of_unity(2).unwrap();
        let c = partial_fraction_coeffs(&[0, 1], &d).unwrap();
        let half = s(2).inverse().unwrap();
        assert_eq!(c[&0], half);
        assert_eq!(c[&1], -half);
    }

    #[test]
    fn partial_fractions_full_domain_closed_form() {
        let d = roots_of_unity(16).unwrap();
        let all: Vec<usize> = (0..16).collect();
        let c = partial_fraction_coeffs(&all, &d).unwrap();
        let n_inv = s(16).inverse().unwrap();
        for i in 0..16 {
            assert_eq!(c[&i], d.element(i) * n_inv);
        }
    }

    #[test]
    fn partial_fractions_random_set_clears_denominator() {
        let mut rng = rng();
        let d = roots_of_unity(32).unwrap();
        let mut set: Vec<usize> = Vec::new();
        while set.len() < 5 {
            let i = rng.gen_range(0..32);
            if !set.contains(&i) {
                set.push(i);
            }
        }
        let c = partial_fraction_coeffs(&set, &d).unwrap();
        let dpoly = vanishing_poly(&set, &d).unwrap();
        for _ in 0..10 {
            let z = Scalar::rand(&mut rng);
            let sum: Scalar = set
                .iter()
                .map(|&i| c[&i] * (z - d.element(i)).inverse().unwrap())
                .sum();
            assert_eq!(sum * dpoly.evaluate(&z), Scalar::one());
        }
    }

    #[test]
    fn lagrange_basis_property() {
        let d = roots_of_unity(8).unwrap();
        for i in 0..8 {
            let l = lagrange_basis(&d, i).unwrap();
            for j in 0..8 {
                let expect = if i == j { Scalar::one() } else { Scalar::zero() };
                assert_eq!(l.evaluate(&d.element(j)), expect);
                assert_eq!(lagrange_basis_at(&d, i, d.element(j)), expect);
            }
            let z = s(12345);
            assert_eq!(lagrange_basis_at(&d, i, z), l.evaluate(&z));
        }
    }

    #[test]
    fn partial_fraction_points_match_indexed() {
        let d = roots_of_unity(8).unwrap();
        let set = [1usize, 4, 6];
        let pts: Vec<_> = set.iter().map(|&i| d.element(i)).collect();
        let c = partial_fraction_coeffs(&set, &d).unwrap();
        let c2 = partial_fraction_coeffs_at(&pts);
        for (k, &i) in set.iter().enumerate() {
            assert_eq!(c[&i], c2[k]);
        }
    }
}
