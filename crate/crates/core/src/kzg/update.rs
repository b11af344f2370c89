//! Constant-time refreshes after a single slot's value changes by `delta`.
//!
//! With `Psi' = Psi + delta * L_j`:
//! - the commitment moves by `l_j^delta`;
//! - the owner's proof (`i == j`) moves by `mu_i^delta`;
//! - any other proof moves by `p_{i,j}^delta`, where `p_{i,j}` commits to
//!   `L_j(X) / (X - w^i)` and is assembled from `rho_i`, `rho_j` by partial
//!   fractions.

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{Field, Zero};

use super::{g1_mul, Commitment, EvaluationProof, KzgError, PublicParameters, UpdateKey};
use crate::algebra::Scalar;

/// `C' = C * l_i^delta`.
pub fn update_commitment(
    pp: &PublicParameters,
    commitment: &Commitment,
    i: usize,
    delta: Scalar,
) -> Result<Commitment, KzgError> {
    pp.check_index(i)?;
    if delta.is_zero() {
        return Ok(*commitment);
    }
    let shift = g1_mul(&pp.lagrange_g1()[i], delta);
    Ok(Commitment((commitment.0.into_group() + shift).into_affine()))
}

/// Owner-side refresh: `pi' = pi * mu_i^delta`.
pub fn update_proof_local(
    proof: &EvaluationProof,
    key: &UpdateKey,
    delta: Scalar,
) -> EvaluationProof {
    if delta.is_zero() {
        return *proof;
    }
    let shift = g1_mul(&key.mu, delta);
    EvaluationProof((proof.0.into_group() + shift).into_affine())
}

/// Refresh of slot `i`'s proof after slot `j` changed by `delta`.
///
/// `zeta = rho_j^{d1} * rho_i^{d2}` commits to `D(X) / ((X - w^i)(X - w^j))`
/// with `d1 = 1 / (w^j - w^i)`, `d2 = -d1`; then
/// `p = zeta^{1 / D'(w^j)}` with `D'(w^j) = n w^{-j}`, and `pi' = pi * p^delta`.
pub fn update_proof_other(
    proof_i: &EvaluationProof,
    key_i: &UpdateKey,
    key_j: &UpdateKey,
    delta: Scalar,
    n: usize,
) -> Result<EvaluationProof, KzgError> {
    if key_i.index == key_j.index || key_i.omega_i == key_j.omega_i {
        return Err(KzgError::SameIndex(key_j.index));
    }
    if delta.is_zero() {
        return Ok(*proof_i);
    }
    let d1 = (key_j.omega_i - key_i.omega_i)
        .inverse()
        .expect("distinct roots of unity");
    let d2 = -d1;
    let zeta = g1_mul(&key_j.rho, d1) + g1_mul(&key_i.rho, d2);
    // 1 / D'(w^j) = w^j / n
    let n_inv = Scalar::from(n as u64).inverse().expect("n < p");
    let p = g1_mul(&zeta.into_affine(), key_j.omega_i * n_inv);
    let shift = g1_mul(&p.into_affine(), delta);
    Ok(EvaluationProof((proof_i.0.into_group() + shift).into_affine()))
}
