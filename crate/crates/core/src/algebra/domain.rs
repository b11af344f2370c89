use ark_ff::{FftField, Field, One, Zero};

use super::{AlgebraError, Polynomial, Scalar};

/// The multiplicative subgroup `{w^0, ..., w^(n-1)}` of order `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationDomain {
    size: usize,
    log_size: u32,
    omega: Scalar,
    omega_inv: Scalar,
    size_inv: Scalar,
    elements: Vec<Scalar>,
}

impl EvaluationDomain {
    pub fn new(n: usize) -> Result<Self, AlgebraError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(AlgebraError::NonPowerOfTwo(n));
        }
        let log_size = n.trailing_zeros();
        if log_size > Scalar::TWO_ADICITY {
            return Err(AlgebraError::NoRootOfOrderN(n));
        }
        // The two-adic root has order 2^TWO_ADICITY; squaring down lands on order n.
        let mut omega = Scalar::TWO_ADIC_ROOT_OF_UNITY;
        for _ in log_size..Scalar::TWO_ADICITY {
            omega.square_in_place();
        }
        let mut elements = Vec::with_capacity(n);
        let mut acc = Scalar::one();
        for _ in 0..n {
            elements.push(acc);
            acc *= omega;
        }
        debug_assert!(acc.is_one());
        let size_as = Scalar::from(n as u64);
        Ok(Self {
            size: n,
            log_size,
            omega,
            omega_inv: omega.inverse().expect("root of unity is nonzero"),
            size_inv: size_as.inverse().expect("n < p"),
            elements,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn size_as_scalar(&self) -> Scalar {
        Scalar::from(self.size as u64)
    }

    pub fn omega(&self) -> Scalar {
        self.omega
    }

    pub fn elements(&self) -> &[Scalar] {
        &self.elements
    }

    /// `w^i`; panics if `i >= n`.
    pub fn element(&self, i: usize) -> Scalar {
        self.elements[i]
    }

    /// `w^{-i}`.
    pub fn element_inverse(&self, i: usize) -> Scalar {
        self.elements[(self.size - i % self.size) % self.size]
    }

    /// Position of `x` in the domain, if it is a member.
    pub fn index_of(&self, x: &Scalar) -> Option<usize> {
        self.elements.iter().position(|e| e == x)
    }

    /// `X^n - 1`.
    pub fn vanishing_polynomial(&self) -> Polynomial {
        let mut coeffs = vec![Scalar::zero(); self.size + 1];
        coeffs[0] = -Scalar::one();
        coeffs[self.size] = Scalar::one();
        Polynomial::from_coeffs(coeffs)
    }

    /// Evaluations on the domain -> coefficients, by inverse FFT.
    pub fn interpolate(&self, evals: &[Scalar]) -> Result<Polynomial, AlgebraError> {
        if evals.len() != self.size {
            return Err(AlgebraError::WrongEvaluationCount {
                expected: self.size,
                got: evals.len(),
            });
        }
        let mut a = evals.to_vec();
        self.fft_in_place(&mut a, self.omega_inv);
        for c in a.iter_mut() {
            *c *= self.size_inv;
        }
        Ok(Polynomial::from_coeffs(a))
    }

    /// Coefficients (degree < n) -> evaluations on the domain.
    pub fn evaluate_all(&self, poly: &Polynomial) -> Vec<Scalar> {
        let mut a = poly.coeffs().to_vec();
        assert!(a.len() <= self.size, "polynomial degree exceeds domain");
        a.resize(self.size, Scalar::zero());
        self.fft_in_place(&mut a, self.omega);
        a
    }

    fn fft_in_place(&self, a: &mut [Scalar], root: Scalar) {
        let n = a.len();
        if n <= 1 {
            return;
        }
        for i in 0..n {
            let j = (i.reverse_bits() >> (usize::BITS - self.log_size)) as usize;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let step = root.pow([(n / len) as u64]);
            for chunk in a.chunks_mut(len) {
                let mut w = Scalar::one();
                let half = len / 2;
                for k in 0..half {
                    let t = chunk[k + half] * w;
                    chunk[k + half] = chunk[k] - t;
                    chunk[k] += t;
                    w *= step;
                }
            }
            len <<= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::{BigInteger, PrimeField, UniformRand};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn size_one_is_trivial() {
        let d = EvaluationDomain::new(1).unwrap();
        assert_eq!(d.omega(), Scalar::one());
        assert_eq!(d.elements(), &[Scalar::one()]);
    }

    #[test]
    fn size_two_is_minus_one() {
        let d = EvaluationDomain::new(2).unwrap();
        assert_eq!(d.omega(), -Scalar::one());
    }

    #[test]
    fn size_eight_matches_generator_power() {
        // Independent route: g^((p-1)/8) for the field's multiplicative generator.
        let mut p_minus_1 = Scalar::MODULUS;
        p_minus_1.sub_with_borrow(&<Scalar as PrimeField>::BigInt::from(1u64));
        for _ in 0..3 {
            p_minus_1.div2();
        }
        let expected = Scalar::GENERATOR.pow(p_minus_1);
        let d = EvaluationDomain::new(8).unwrap();
        assert_eq!(d.omega(), expected);

        let mut x = d.omega();
        let mut order = 1;
        while !x.is_one() {
            x *= d.omega();
            order += 1;
        }
        assert_eq!(order, 8);
        assert_eq!(d.omega().pow([4u64]), -Scalar::one());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(EvaluationDomain::new(6), Err(AlgebraError::NonPowerOfTwo(6)));
        assert_eq!(EvaluationDomain::new(0), Err(AlgebraError::NonPowerOfTwo(0)));
        assert_eq!(
            EvaluationDomain::new(1 << 33),
            Err(AlgebraError::NoRootOfOrderN(1 << 33))
        );
    }

    #[test]
    fn fft_round_trip_matches_horner() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let d = EvaluationDomain::new(16).unwrap();
        let evals: Vec<Scalar> = (0..16).map(|_| Scalar::rand(&mut rng)).collect();
        let p = d.interpolate(&evals).unwrap();
        for (w, y) in d.elements().iter().zip(&evals) {
            assert_eq!(p.evaluate(w), *y);
        }
        assert_eq!(d.evaluate_all(&p), evals);
    }

    #[test]
    fn elements_distinct_and_inverse_lookup() {
        let d = EvaluationDomain::new(64).unwrap();
        let set: std::collections::HashSet<_> = d.elements().iter().collect();
        assert_eq!(set.len(), 64);
        for i in 0..64 {
            assert_eq!(d.element(i) * d.element_inverse(i), Scalar::one());
            assert_eq!(d.index_of(&d.element(i)), Some(i));
        }
    }
}
