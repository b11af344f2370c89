//! Fixed-base MSM in G2 over precomputed window multiples.
//!
//! Row `j` holds `2^(8w) * base_j` for every window `w`. Scalars are recoded
//! into signed 8-bit digits, so one bucket pass with 128 buckets replaces the
//! per-window doublings of a variable-base MSM.

use ark_bls12_381::{G2Affine, G2Projective};
use ark_ec::{AdditiveGroup, CurveGroup};
use ark_ff::{BigInteger, PrimeField, Zero};

use crate::algebra::Scalar;

const WINDOW_BITS: usize = 8;
const HALF: i32 = 1 << (WINDOW_BITS - 1);
// 255-bit scalars plus the recoding carry
const WINDOWS: usize = 33;

#[derive(Clone, Debug)]
pub(crate) struct FixedBaseTable {
    rows: Vec<G2Affine>,
}

impl FixedBaseTable {
    pub(crate) fn new(bases: &[G2Affine]) -> Self {
        let mut rows = Vec::with_capacity(bases.len() * WINDOWS);
        for base in bases {
            let mut acc: G2Projective = (*base).into();
            for _ in 0..WINDOWS {
                rows.push(acc);
                for _ in 0..WINDOW_BITS {
                    acc.double_in_place();
                }
            }
        }
        FixedBaseTable {
            rows: G2Projective::normalize_batch(&rows),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len() / WINDOWS
    }

    /// `sum scalars[j] * base_j`; `scalars.len()` must not exceed `len()`.
    pub(crate) fn msm(&self, scalars: &[Scalar]) -> G2Projective {
        debug_assert!(scalars.len() <= self.len());
        let mut buckets = vec![G2Projective::zero(); HALF as usize];
        for (j, s) in scalars.iter().enumerate() {
            let row = &self.rows[j * WINDOWS..(j + 1) * WINDOWS];
            for (w, d) in signed_digits(s).into_iter().enumerate() {
                match d {
                    0 => {}
                    d if d > 0 => buckets[(d - 1) as usize] += &row[w],
                    d => buckets[(-d - 1) as usize] -= &row[w],
                }
            }
        }
        let mut running = G2Projective::zero();
        let mut total = G2Projective::zero();
        for b in buckets.into_iter().rev() {
            running += b;
            total += running;
        }
        total
    }
}

/// Digits in `[-127, 128]` with `s = sum d_w * 2^(8w)`.
fn signed_digits(s: &Scalar) -> [i32; WINDOWS] {
    let bytes = s.into_bigint().to_bytes_le();
    let mut out = [0i32; WINDOWS];
    let mut carry = 0;
    for (w, d) in out.iter_mut().enumerate() {
        let v = bytes.get(w).copied().unwrap_or(0) as i32 + carry;
        (*d, carry) = if v > HALF { (v - 2 * HALF, 1) } else { (v, 0) };
    }
    debug_assert_eq!(carry, 0);
    out
}
