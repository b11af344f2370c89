use std::ops::{Add, Mul, Sub};

use ark_ff::{Field, One, UniformRand, Zero};
use rand::Rng;

use super::{AlgebraError, Scalar};

/// Dense univariate polynomial, coefficients low-degree-first.
///
/// Trailing zero coefficients are always stripped, so the zero polynomial has
/// an empty coefficient vector and `degree() == None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Monic polynomial `prod (X - r)`.
    pub fn from_roots(roots: &[Scalar]) -> Self {
        let mut coeffs = vec![Scalar::one()];
        for r in roots {
            coeffs.push(Scalar::zero());
            for k in (1..coeffs.len()).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] = prev - *r * coeffs[k];
            }
            coeffs[0] = -*r * coeffs[0];
        }
        Self::from_coeffs(coeffs)
    }

    /// Uniformly random polynomial of exactly the given degree.
    pub fn rand<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> Self {
        let mut coeffs: Vec<Scalar> = (0..=degree).map(|_| Scalar::rand(rng)).collect();
        while coeffs[degree].is_zero() {
            coeffs[degree] = Scalar::rand(rng);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn evaluate(&self, x: &Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: Scalar) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| *c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| *c * Scalar::from(k as u64))
                .collect(),
        )
    }

    /// Synthetic division by `(X - a)`; returns the quotient and `self(a)`.
    pub fn divide_by_linear(&self, a: Scalar) -> (Self, Scalar) {
        if self.coeffs.is_empty() {
            return (Self::zero(), Scalar::zero());
        }
        let n = self.coeffs.len();
        let mut quotient = vec![Scalar::zero(); n - 1];
        let mut carry = Scalar::zero();
        for k in (0..n).rev() {
            let v = self.coeffs[k] + carry * a;
            if k == 0 {
                carry = v;
            } else {
                quotient[k - 1] = v;
                carry = v;
            }
        }
        (Self::from_coeffs(quotient), carry)
    }

    pub fn divide(&self, divisor: &Self) -> Result<(Self, Self), AlgebraError> {
        let dd = divisor.degree().ok_or(AlgebraError::DivisionByZeroPolynomial)?;
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let lead_inv = divisor.coeffs[dd]
            .inverse()
            .expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Scalar::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd] * lead_inv;
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= c * d;
            }
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: Self) -> Polynomial {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        Polynomial::from_coeffs(coeffs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: Self) -> Polynomial {
        self + &rhs.scale(-Scalar::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: Self) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += *a * b;
            }
        }
        Polynomial::from_coeffs(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn normalization_strips_trailing_zeros() {
        let p = Polynomial::from_coeffs(vec![Scalar::one(), Scalar::zero(), Scalar::zero()]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Polynomial::from_coeffs(vec![Scalar::zero()]).degree(), None);
    }

    #[test]
    fn synthetic_division_remainder_is_value() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = Polynomial::rand(9, &mut rng);
        let a = Scalar::rand(&mut rng);
        let (q, r) = p.divide_by_linear(a);
        assert_eq!(r, p.evaluate(&a));
        let lin = Polynomial::from_coeffs(vec![-a, Scalar::one()]);
        assert_eq!(&(&q * &lin) + &Polynomial::constant(r), p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn division_identity(seed in any::<u64>(), nd in 0usize..12, dd in 0usize..6) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let num = Polynomial::rand(nd, &mut rng);
            let den = Polynomial::rand(dd, &mut rng);
            let (q, r) = num.divide(&den).unwrap();
            prop_assert!(r.degree().map_or(true, |d| d < dd || dd == 0 && r.is_zero()));
            prop_assert_eq!(&(&den * &q) + &r, num);
        }

        #[test]
        fn from_roots_vanishes(seed in any::<u64>(), k in 1usize..8) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let roots: Vec<Scalar> = (0..k).map(|_| Scalar::rand(&mut rng)).collect();
            let p = Polynomial::from_roots(&roots);
            prop_assert_eq!(p.degree(), Some(k));
            for r in &roots {
                prop_assert!(p.evaluate(r).is_zero());
            }
        }
    }
}
