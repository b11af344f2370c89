//! Batch verification of plain tuples through one aggregated opening check.

use std::collections::HashSet;

use ark_bls12_381::{G1Affine, G1Projective};
use ark_ec::{CurveGroup, VariableBaseMSM};
use ark_ff::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{precheck_plain, AuthError, AuthTuplePlain, Rejection, Verifier};
use crate::algebra::Scalar;
use crate::identity::PublicKey;
use crate::kzg::{g1_mul, verify_aggregate, Commitment, PublicParameters};
use crate::ops;

/// Outcome of a batch: empty `offenders` means every member verified.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchVerdict {
    /// Positions in the input batch, ascending, with the first failed check.
    pub offenders: Vec<(usize, Rejection)>,
}

impl BatchVerdict {
    pub fn accepted(&self) -> bool {
        self.offenders.is_empty()
    }
}

/// Verifies every `(tuple, sender_published)` pair against one commitment
/// snapshot. Cheap per-member checks run first; the survivors' `g^u`
/// elements are then tied to their scalars by a random linear combination,
/// and their proofs are aggregated into a single two-pairing check. A failed
/// combined check is narrowed down by bisection.
pub fn batch_verify_trusted(
    pp: &PublicParameters,
    commitment: &Commitment,
    items: &[(&AuthTuplePlain, &PublicKey)],
    verifier: &Verifier,
    window: u64,
    now: u64,
) -> Result<BatchVerdict, AuthError> {
    if items.is_empty() {
        return Err(AuthError::EmptyBatch);
    }
    let mut seen = HashSet::with_capacity(items.len());
    for (t, _) in items {
        if !seen.insert(t.index) {
            return Err(AuthError::DuplicateIndexInBatch(t.index));
        }
    }

    let mut offenders = Vec::new();
    let mut live = Vec::with_capacity(items.len());
    for (pos, (t, sender)) in items.iter().enumerate() {
        match precheck_plain(pp, t, verifier, sender, window, now) {
            Ok(()) => live.push(pos),
            Err(why) => offenders.push((pos, why)),
        }
    }

    if !live.is_empty() {
        let weights = combination_weights(commitment, items);
        let consistent = |set: &[usize]| elements_consistent(pp, items, &weights, set);
        let bad = isolate(&live, &consistent);
        offenders.extend(bad.iter().map(|&p| (p, Rejection::ElementMismatch)));
        live.retain(|p| !bad.contains(p));
    }

    if !live.is_empty() {
        let opens = |set: &[usize]| aggregate_opens(pp, commitment, items, set);
        let bad = isolate(&live, &opens);
        offenders.extend(bad.iter().map(|&p| (p, Rejection::PairingCheckFailed)));
    }

    offenders.sort_by_key(|(p, _)| *p);
    Ok(BatchVerdict { offenders })
}

/// Members of `set` for which `check` fails, found by halving failed sets.
/// If halving stalls (halves pass while their union fails) every member of
/// the stalled set is checked on its own.
fn isolate(set: &[usize], check: &dyn Fn(&[usize]) -> bool) -> Vec<usize> {
    if check(set) {
        return Vec::new();
    }
    if set.len() == 1 {
        return set.to_vec();
    }
    let (left, right) = set.split_at(set.len() / 2);
    let mut bad = isolate(left, check);
    bad.extend(isolate(right, check));
    if bad.is_empty() {
        bad = set.iter().copied().filter(|&p| !check(&[p])).collect();
    }
    bad
}

/// 128-bit weights derived from the whole batch, so a sender cannot choose
/// them; a mismatched member survives with probability at most `2^-128`.
fn combination_weights(commitment: &Commitment, items: &[(&AuthTuplePlain, &PublicKey)]) -> Vec<Scalar> {
    let mut h = Sha256::new();
    h.update(b"pbag/batch-weights");
    h.update(commitment.to_bytes());
    for (t, sender) in items {
        h.update(sender.to_bytes());
        h.update(t.to_bytes());
    }
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
    (0..items.len()).map(|_| Scalar::from(rng.gen::<u128>())).collect()
}

/// `sum a_k g^u_k == g^(sum a_k u_k)`.
fn elements_consistent(
    pp: &PublicParameters,
    items: &[(&AuthTuplePlain, &PublicKey)],
    weights: &[Scalar],
    set: &[usize],
) -> bool {
    let a: Vec<Scalar> = set.iter().map(|&p| weights[p]).collect();
    let g_u: Vec<G1Affine> = set.iter().map(|&p| items[p].0.g_u).collect();
    let sum = set
        .iter()
        .zip(&a)
        .fold(Scalar::zero(), |acc, (&p, a)| acc + *a * items[p].0.u);
    ops::msm();
    let lhs = G1Projective::msm_unchecked(&g_u, &a);
    lhs.into_affine() == g1_mul(&pp.g1(), sum).into_affine()
}

fn aggregate_opens(
    pp: &PublicParameters,
    commitment: &Commitment,
    items: &[(&AuthTuplePlain, &PublicKey)],
    set: &[usize],
) -> bool {
    let points: Vec<(Scalar, Scalar)> = set.iter().map(|&p| (items[p].0.omega, items[p].0.u)).collect();
    let proofs: Vec<G1Affine> = set.iter().map(|&p| items[p].0.proof.0).collect();
    verify_aggregate(pp, commitment, &points, &proofs)
}
