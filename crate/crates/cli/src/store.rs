//! On-disk workspace: parameter file, root-authority key, ledger, one file
//! per vehicle wallet and per verifier key.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use pbag::auth::Verifier;
use pbag::identity::{KeyPair, MasterKeyPair};
use pbag::kzg::PublicParameters;
use pbag::ledger::{Holder, Ledger};

pub struct Store {
    root: PathBuf,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        bail!("label `{label}` must be non-empty and use only letters, digits, '-' or '_'");
    }
    Ok(())
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn srs_path(&self) -> PathBuf {
        self.path("srs.bin")
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.path("ledger.bin")
    }

    fn vehicle_path(&self, label: &str) -> Result<PathBuf> {
        check_label(label)?;
        Ok(self.root.join("vehicles").join(format!("{label}.wallet")))
    }

    fn verifier_path(&self, label: &str) -> Result<PathBuf> {
        check_label(label)?;
        Ok(self.root.join("verifiers").join(format!("{label}.key")))
    }

    pub fn init(&self, pp: &PublicParameters, ra: &MasterKeyPair) -> Result<()> {
        if self.srs_path().exists() {
            bail!("{} already holds a workspace", self.root.display());
        }
        fs::create_dir_all(self.root.join("vehicles"))?;
        fs::create_dir_all(self.root.join("verifiers"))?;
        pp.write_to(self.srs_path())?;
        fs::write(self.path("ra.key"), ra.secret_bytes())?;
        let ledger = Ledger::new(Arc::new(pp.clone()), ra.public());
        self.save_ledger(&ledger)
    }

    pub fn params(&self) -> Result<Arc<PublicParameters>> {
        let pp = PublicParameters::read_from(self.srs_path())
            .with_context(|| format!("reading {}", self.srs_path().display()))?;
        Ok(Arc::new(pp))
    }

    pub fn ra(&self) -> Result<MasterKeyPair> {
        let bytes = fs::read(self.path("ra.key")).context("reading ra.key")?;
        Ok(KeyPair::from_secret_bytes(&bytes)?)
    }

    pub fn ledger(&self) -> Result<Ledger> {
        let pp = self.params()?;
        Ok(Ledger::read_from(pp, self.ledger_path())?)
    }

    pub fn save_ledger(&self, ledger: &Ledger) -> Result<()> {
        write_atomic(&self.ledger_path(), &ledger.export())
    }

    pub fn has_vehicle(&self, label: &str) -> Result<bool> {
        Ok(self.vehicle_path(label)?.exists())
    }

    /// Loads a wallet and brings it up to date with `ledger`.
    pub fn vehicle(&self, label: &str, ledger: &Ledger) -> Result<Holder> {
        let path = self.vehicle_path(label)?;
        let bytes = fs::read(&path).with_context(|| format!("no vehicle `{label}`"))?;
        let mut holder = Holder::from_bytes(&bytes)?;
        holder.sync(ledger.log(), ledger.pp().n())?;
        Ok(holder)
    }

    pub fn save_vehicle(&self, label: &str, holder: &Holder) -> Result<()> {
        write_atomic(&self.vehicle_path(label)?, &holder.to_bytes())
    }

    pub fn verifier(&self, label: &str) -> Result<Verifier> {
        let path = self.verifier_path(label)?;
        let bytes = fs::read(&path).with_context(|| format!("no verifier `{label}`"))?;
        Ok(Verifier::from_bytes(&bytes)?)
    }

    /// Loads the verifier, creating it on first use.
    pub fn verifier_or_create(&self, label: &str) -> Result<Verifier> {
        let path = self.verifier_path(label)?;
        if path.exists() {
            return self.verifier(label);
        }
        let v = Verifier::new(&mut rand::rngs::OsRng);
        write_atomic(&path, &v.to_bytes())?;
        Ok(v)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
