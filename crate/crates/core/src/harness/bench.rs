//! Operation-count and wall-time report over one fleet. Counters are exact
//! and repeatable; wall times depend on the machine and are only reported.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use super::fleet::Fleet;
use super::scenario::DEFAULT_START_TIME;
use crate::auth::{
    batch_verify_trusted, verify_auth_trusted, verify_auth_untrusted, AuthTuplePlain,
    DEFAULT_FRESHNESS_WINDOW,
};
use crate::identity::PublicKey;
use crate::ledger::LedgerError;
use crate::ops::{self, OpCounts};

/// Message length used for the reported tuple sizes.
pub const REFERENCE_MESSAGE_LEN: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub op: String,
    /// Messages covered by one event (batch size, or one).
    pub size: usize,
    pub samples: usize,
    pub mean_us: f64,
    pub per_message_us: f64,
    /// Counts for one event.
    pub counts: OpCounts,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub rows: Vec<BenchRow>,
    pub plain_tuple_bytes: usize,
    pub blinded_tuple_bytes: usize,
}

impl BenchReport {
    pub fn row(&self, op: &str, size: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.op == op && r.size == size)
    }

    /// Per-message batch time over single-verification time.
    pub fn batch_ratio(&self, size: usize) -> Option<f64> {
        let single = self.row("verify_trusted", 1)?;
        let batch = self.row("batch_verify", size)?;
        Some(batch.per_message_us / single.mean_us)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<18} {:>5} {:>7} {:>12} {:>12} {:>3} {:>4} {:>4} {:>4} {:>3} {:>5}",
            "op", "size", "samples", "mean_us", "per_msg_us", "bp", "exp", "sm", "msm", "h", "pass"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<18} {:>5} {:>7} {:>12.1} {:>12.1} {:>3} {:>4} {:>4} {:>4} {:>3} {:>2}/{:<2}",
                r.op,
                r.size,
                r.samples,
                r.mean_us,
                r.per_message_us,
                r.counts.pairings,
                r.counts.exponentiations,
                r.counts.scalar_muls,
                r.counts.msms,
                r.counts.hashes,
                r.accepted,
                r.accepted + r.rejected
            )
            .unwrap();
        }
        writeln!(
            out,
            "n={} plain_tuple_bytes={} blinded_tuple_bytes={} (message {} bytes)",
            self.n, self.plain_tuple_bytes, self.blinded_tuple_bytes, REFERENCE_MESSAGE_LEN
        )
        .unwrap();
        out
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub n: usize,
    pub batch_sizes: Vec<usize>,
    /// Samples per single-message row.
    pub samples: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n: 128,
            batch_sizes: vec![1, 10, 20, 50, 64, 100],
            samples: 16,
            seed: 1,
        }
    }
}

struct Timer {
    total_us: f64,
    samples: usize,
    counts: Option<OpCounts>,
    accepted: usize,
    rejected: usize,
}

impl Timer {
    fn new() -> Self {
        Timer {
            total_us: 0.0,
            samples: 0,
            counts: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn run(&mut self, f: impl FnOnce() -> bool) {
        let start = Instant::now();
        let (ok, counts) = ops::measure(f);
        self.total_us += start.elapsed().as_secs_f64() * 1e6;
        self.samples += 1;
        self.counts.get_or_insert(counts);
        if ok {
            self.accepted += 1;
        } else {
            self.rejected += 1;
        }
    }

    fn row(self, op: &str, size: usize) -> BenchRow {
        let mean = self.total_us / self.samples.max(1) as f64;
        BenchRow {
            op: op.to_string(),
            size,
            samples: self.samples,
            mean_us: mean,
            per_message_us: mean / size as f64,
            counts: self.counts.unwrap_or_default(),
            accepted: self.accepted,
            rejected: self.rejected,
        }
    }
}

pub fn bench(config: &BenchConfig) -> Result<BenchReport, LedgerError> {
    let largest = config.batch_sizes.iter().copied().max().unwrap_or(1);
    let count = largest.max(config.samples.min(config.n)).min(config.n).max(1);
    let now = DEFAULT_START_TIME;
    let w = DEFAULT_FRESHNESS_WINDOW;
    let mut fleet = Fleet::new(config.n, count, config.seed, now)?;
    let message = vec![0x5a; REFERENCE_MESSAGE_LEN];
    let mut rows = Vec::new();

    let mut gen = Timer::new();
    let mut plain: Vec<(AuthTuplePlain, PublicKey)> = Vec::with_capacity(count);
    for k in 0..count {
        let mut out = None;
        gen.run(|| {
            out = Some(fleet.plain(k, &message, now));
            true
        });
        plain.push(out.unwrap());
    }
    let plain_tuple_bytes = plain[0].0.encoded_len();
    rows.push(gen.row("gen_trusted", 1));

    let mut gen = Timer::new();
    let mut blinded = Vec::with_capacity(config.samples);
    for k in 0..config.samples {
        let mut out = None;
        gen.run(|| {
            out = Some(fleet.blinded(k % count, &message, now));
            true
        });
        blinded.push(out.unwrap());
    }
    let blinded_tuple_bytes = blinded.first().map(|b| b.0.encoded_len()).unwrap_or(0);
    rows.push(gen.row("gen_untrusted", 1));

    let pp = fleet.ledger.pp().clone();
    let c = fleet.ledger.commitment();
    pp.precompute();
    let mut single = Timer::new();
    for k in 0..config.samples {
        let (t, s) = &plain[k % count];
        single.run(|| verify_auth_trusted(&pp, &c, t, &fleet.verifier, s, w, now).is_ok());
    }
    rows.push(single.row("verify_trusted", 1));

    let mut single = Timer::new();
    for (t, s) in &blinded {
        single.run(|| verify_auth_untrusted(&pp, &c, t, &fleet.verifier, s, w, now).is_ok());
    }
    rows.push(single.row("verify_untrusted", 1));

    for &size in &config.batch_sizes {
        let size = size.min(count);
        let refs: Vec<_> = plain[..size].iter().map(|(t, s)| (t, s)).collect();
        let mut timer = Timer::new();
        let reps = (config.samples / size).clamp(1, 4);
        for _ in 0..reps {
            timer.run(|| {
                batch_verify_trusted(&pp, &c, &refs, &fleet.verifier, w, now)
                    .is_ok_and(|v| v.accepted())
            });
        }
        rows.push(timer.row("batch_verify", size));
    }

    Ok(BenchReport {
        n: config.n,
        rows,
        plain_tuple_bytes,
        blinded_tuple_bytes,
    })
}
