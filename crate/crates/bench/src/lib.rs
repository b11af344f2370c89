//! Fixtures shared by the criterion benches.

use pbag::auth::AuthTuplePlain;
use pbag::harness::{Fleet, DEFAULT_START_TIME, REFERENCE_MESSAGE_LEN};
use pbag::identity::PublicKey;

pub const NOW: u64 = DEFAULT_START_TIME;

/// A synced fleet of `count` vehicles on a domain of size `n`, with verifier
/// tables already built.
pub fn fleet(n: usize, count: usize) -> Fleet {
    let fleet = Fleet::new(n, count, 7, NOW).expect("fixture fleet");
    fleet.ledger.pp().precompute();
    fleet
}

pub fn message() -> Vec<u8> {
    vec![0x5a; REFERENCE_MESSAGE_LEN]
}

/// One plain tuple per vehicle, for vehicles `0..size`.
pub fn plain_batch(fleet: &mut Fleet, size: usize) -> Vec<(AuthTuplePlain, PublicKey)> {
    let m = message();
    (0..size).map(|k| fleet.plain(k, &m, NOW)).collect()
}
