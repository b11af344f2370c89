mod store;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pbag::auth::{
    batch_verify_trusted, gen_auth_trusted, gen_auth_untrusted, trace, verify_auth_trusted,
    verify_auth_untrusted, AuthTuple, Credential, Envelope, Session, DEFAULT_FRESHNESS_WINDOW,
};
use pbag::harness::{bench, run_scenario, BenchConfig, ScenarioConfig, FIXTURE_LIFETIME};
use pbag::identity::KeyPair;
use pbag::kzg::PublicParameters;
use pbag::ledger::{Holder, IssueRequest, Ledger, StatusRecord};
use rand::rngs::OsRng;

use store::Store;

#[derive(Parser)]
#[command(name = "pbag", version, about = "Anonymous vehicle authentication against one global KZG commitment")]
struct Cli {
    /// Workspace directory holding parameters, keys, ledger and wallets.
    #[arg(long, global = true, default_value = "pbag-state")]
    dir: PathBuf,
    /// Current time as Unix seconds; defaults to the system clock.
    #[arg(long, global = true)]
    now: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Plain tuple for a trusted verifier.
    Trusted,
    /// Blinded tuple for an untrusted verifier.
    Untrusted,
}

#[derive(Subcommand)]
enum Command {
    /// Generate public parameters and a root-authority key; start an empty ledger.
    Setup {
        /// Domain size (fleet capacity); a power of two.
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Enroll a vehicle under `label`.
    Issue {
        label: String,
        /// 18-character alphanumeric identity; derived from the label if absent.
        #[arg(long)]
        id: Option<String>,
    },
    /// Rotate a vehicle's online key.
    Update { label: String },
    /// Revoke a vehicle's certificate.
    Revoke { label: String },
    /// Produce an authentication envelope for a message.
    AuthGen {
        label: String,
        #[arg(long)]
        verifier: String,
        #[arg(long)]
        message: String,
        #[arg(long, value_enum, default_value_t = Mode::Trusted)]
        mode: Mode,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Verify one envelope.
    AuthVerify {
        envelope: PathBuf,
        #[arg(long)]
        verifier: String,
        #[arg(long, default_value_t = DEFAULT_FRESHNESS_WINDOW)]
        window: u64,
    },
    /// Verify many plain envelopes in one aggregated check.
    BatchVerify {
        envelopes: Vec<PathBuf>,
        #[arg(long)]
        verifier: String,
        #[arg(long, default_value_t = DEFAULT_FRESHNESS_WINDOW)]
        window: u64,
    },
    /// Reveal the sender of an envelope (root authority only).
    Trace { envelope: PathBuf },
    /// Scripted scenarios.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Operation counts and wall times per protocol step.
    Bench {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,10,20,50,64,100")]
        batch_sizes: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Ledger file export and import.
    State {
        #[command(subcommand)]
        command: StateCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Run a TOML scenario file.
    Run {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum StateCommand {
    /// Write the ledger to `path` after re-validating it.
    Export { path: PathBuf },
    /// Replace the ledger with the one at `path`; rejected unless it replays exactly.
    Import { path: PathBuf },
}

fn clock(now: Option<u64>) -> u64 {
    now.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn read_envelope(path: &PathBuf) -> Result<Envelope> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Envelope::from_bytes(&bytes)?)
}

fn status_name(record: Option<&StatusRecord>) -> &'static str {
    match record {
        Some(StatusRecord::Cer { .. }) => "certified",
        Some(StatusRecord::Revoked { .. }) => "revoked",
        Some(StatusRecord::Pend) => "pending",
        None => "unknown",
    }
}

fn run(cli: Cli) -> Result<bool> {
    let store = Store::new(&cli.dir);
    let now = clock(cli.now);
    match cli.command {
        Command::Setup { n } => {
            let pp = PublicParameters::setup(n, &mut OsRng)?;
            let ra = KeyPair::generate(&mut OsRng);
            store.init(&pp, &ra)?;
            println!("workspace {} ready: n={n}", cli.dir.display());
        }
        Command::Issue { label, id } => {
            if store.has_vehicle(&label)? {
                bail!("vehicle `{label}` already exists");
            }
            let ra = store.ra()?;
            let mut ledger = store.ledger()?;
            let online = KeyPair::generate(&mut OsRng);
            let id = id
                .map(String::into_bytes)
                .unwrap_or_else(|| pbag::harness::identity_for(&label));
            let req = IssueRequest::new(&ra, &id, online.public(), now + FIXTURE_LIFETIME)?;
            let enrollment = ledger.issue_certificate(&req, now)?;
            let holder = Holder::new(online, enrollment);
            store.save_ledger(&ledger)?;
            store.save_vehicle(&label, &holder)?;
            println!(
                "issued `{label}` in slot {} (key {})",
                holder.params().index,
                holder.ledger_key().to_hex()
            );
        }
        Command::Update { label } => {
            let mut ledger = store.ledger()?;
            let mut holder = store.vehicle(&label, &ledger)?;
            let next = KeyPair::generate(&mut OsRng);
            let enrollment = ledger.update_certificate(&holder.update_request(&next), now)?;
            holder.apply_update(next, enrollment);
            store.save_ledger(&ledger)?;
            store.save_vehicle(&label, &holder)?;
            println!("updated `{label}` at height {}", ledger.height());
        }
        Command::Revoke { label } => {
            let mut ledger = store.ledger()?;
            let holder = store.vehicle(&label, &ledger)?;
            let height = ledger.revoke_certificate(&holder.revoke_request(), now)?;
            store.save_ledger(&ledger)?;
            println!("revoked `{label}` at height {height}");
        }
        Command::AuthGen {
            label,
            verifier,
            message,
            mode,
            out,
        } => {
            let ledger = store.ledger()?;
            let holder = store.vehicle(&label, &ledger)?;
            store.save_vehicle(&label, &holder)?;
            if holder.is_revoked() {
                eprintln!("warning: `{label}` has been revoked; the envelope will not verify");
            }
            let peer = store.verifier_or_create(&verifier)?.published();
            let session = Session::new(&mut OsRng, holder.online());
            let cred = Credential::from(&holder);
            let fpk = ledger.fpk();
            let tuple = match mode {
                Mode::Trusted => AuthTuple::Plain(gen_auth_trusted(
                    &cred,
                    &session,
                    &fpk,
                    &peer,
                    message.as_bytes(),
                    now,
                )),
                Mode::Untrusted => AuthTuple::Blinded(gen_auth_untrusted(
                    &cred,
                    &session,
                    &fpk,
                    &peer,
                    message.as_bytes(),
                    now,
                )),
            };
            let env = Envelope {
                sender_published: session.published(),
                tuple,
            };
            let bytes = env.to_bytes();
            fs::write(&out, &bytes)?;
            println!("wrote {} ({} bytes)", out.display(), bytes.len());
        }
        Command::AuthVerify {
            envelope,
            verifier,
            window,
        } => {
            let ledger = store.ledger()?;
            let v = store.verifier(&verifier)?;
            let env = read_envelope(&envelope)?;
            let (pp, c) = (ledger.pp(), ledger.commitment());
            let result = match &env.tuple {
                AuthTuple::Plain(t) => {
                    verify_auth_trusted(pp, &c, t, &v, &env.sender_published, window, now)
                }
                AuthTuple::Blinded(t) => {
                    verify_auth_untrusted(pp, &c, t, &v, &env.sender_published, window, now)
                }
            };
            return Ok(match result {
                Ok(()) => {
                    println!("accepted");
                    true
                }
                Err(why) => {
                    println!("rejected: {why}");
                    false
                }
            });
        }
        Command::BatchVerify {
            envelopes,
            verifier,
            window,
        } => {
            let ledger = store.ledger()?;
            let v = store.verifier(&verifier)?;
            let mut items = Vec::with_capacity(envelopes.len());
            for path in &envelopes {
                match read_envelope(path)? {
                    Envelope {
                        sender_published,
                        tuple: AuthTuple::Plain(t),
                    } => items.push((t, sender_published)),
                    _ => bail!("{}: batch verification takes plain tuples only", path.display()),
                }
            }
            let refs: Vec<_> = items.iter().map(|(t, s)| (t, s)).collect();
            let verdict =
                batch_verify_trusted(ledger.pp(), &ledger.commitment(), &refs, &v, window, now)?;
            for (pos, why) in &verdict.offenders {
                println!("rejected {}: {why}", envelopes[*pos].display());
            }
            println!(
                "{} of {} accepted",
                envelopes.len() - verdict.offenders.len(),
                envelopes.len()
            );
            return Ok(verdict.accepted());
        }
        Command::Trace { envelope } => {
            let ledger = store.ledger()?;
            let ra = store.ra()?;
            let env = read_envelope(&envelope)?;
            let (key, t) = trace(env.tuple.e_a(), &env.sender_published, &ra)?;
            let record = ledger.search(&key);
            println!("ledger key {}", key.to_hex());
            println!("timestamp {t}");
            println!("status {}", status_name(record));
            if let Some(StatusRecord::Cer { certificate, .. }) = record {
                let id = pbag::identity::decrypt_id(&certificate.e_id, &ra)?;
                println!("identity {}", String::from_utf8_lossy(&id));
            }
            return Ok(record.is_some());
        }
        Command::Scenario {
            command: ScenarioCommand::Run { file, json },
        } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let config = ScenarioConfig::from_toml(&text)?;
            let (_, report) = run_scenario(&config)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            return Ok(report.all_met());
        }
        Command::Bench {
            n,
            batch_sizes,
            samples,
            seed,
            json,
        } => {
            let report = bench(&BenchConfig {
                n,
                batch_sizes,
                samples,
                seed,
            })?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
        }
        Command::State { command } => match command {
            StateCommand::Export { path } => {
                let ledger = store.ledger()?;
                ledger.write_to(&path)?;
                println!("exported height {} to {}", ledger.height(), path.display());
            }
            StateCommand::Import { path } => {
                let ledger = Ledger::read_from(store.params()?, &path)?;
                store.save_ledger(&ledger)?;
                println!("imported height {} from {}", ledger.height(), path.display());
            }
        },
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
