//! The on-disk state directory shared by every subcommand.
//!
//! ```text
//! <state>/config.toml        configuration captured at setup
//! <state>/system.pp          public parameters
//! <state>/system.msk         master secret (TA only)
//! <state>/ta.registry        TA signing seed + certificates
//! <state>/relay.json         relay chain snapshot (rules, revocations, index, gas journal)
//! <state>/region-<R>.ledger  one hash-chained ledger per region
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rccpabe_chain::{ChainConfig, Federation, RegionalChain, RelayChain};
use rccpabe_core::scheme::{MasterSecret, PublicParams, TaRegistry};

use crate::CliError;

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes via a temporary sibling and rename so a crash never leaves a
/// half-written file.
pub fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub struct StateDir {
    pub root: PathBuf,
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        StateDir { root: root.into() }
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join("config.toml")
    }
    pub fn pp_path(&self) -> PathBuf {
        self.root.join("system.pp")
    }
    pub fn msk_path(&self) -> PathBuf {
        self.root.join("system.msk")
    }
    pub fn registry_path(&self) -> PathBuf {
        self.root.join("ta.registry")
    }
    pub fn relay_path(&self) -> PathBuf {
        self.root.join("relay.json")
    }
    pub fn ledger_path(&self, region: &str) -> PathBuf {
        self.root.join(format!("region-{region}.ledger"))
    }

    pub fn exists(&self) -> bool {
        self.pp_path().exists()
    }

    fn require(&self) -> Result<(), CliError> {
        if !self.exists() {
            return Err(CliError::Usage(format!("no system state in {} (run `setup` first)", self.root.display())));
        }
        Ok(())
    }

    pub fn pp(&self) -> Result<PublicParams, CliError> {
        self.require()?;
        Ok(PublicParams::from_bytes(&read(&self.pp_path())?)?)
    }

    pub fn msk(&self) -> Result<MasterSecret, CliError> {
        self.require()?;
        Ok(MasterSecret::from_bytes(&read(&self.msk_path())?)?)
    }

    pub fn registry(&self) -> Result<TaRegistry, CliError> {
        self.require()?;
        Ok(TaRegistry::from_bytes(&read(&self.registry_path())?)?)
    }

    pub fn save_registry(&self, ta: &TaRegistry) -> Result<(), CliError> {
        write(&self.registry_path(), ta.to_bytes())
    }

    /// The configuration captured at setup, unless `override_path` is given.
    pub fn config_text(&self, override_path: Option<&Path>) -> Result<String, CliError> {
        match override_path {
            Some(p) => read_text(p),
            None if self.config_path().exists() => read_text(&self.config_path()),
            None => Ok(rccpabe_chain::config::DEFAULT_CONFIG.to_owned()),
        }
    }

    pub fn relay(&self) -> Result<RelayChain, CliError> {
        self.require()?;
        Ok(RelayChain::from_json(&read_text(&self.relay_path())?)?)
    }

    /// Region names present in the state directory, sorted.
    pub fn regions(&self) -> Result<Vec<String>, CliError> {
        let mut out = Vec::new();
        let dir = fs::read_dir(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        for entry in dir {
            let entry = entry.map_err(|e| CliError::io(&self.root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(r) = name.strip_prefix("region-").and_then(|n| n.strip_suffix(".ledger")) {
                out.push(r.to_owned());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Reloads relay and every regional ledger (each audited on load).
    pub fn federation(&self, config: ChainConfig, seed: &[u8]) -> Result<Federation, CliError> {
        let pp = self.pp()?;
        let vk = self.registry()?.verifying_key();
        let relay = self.relay()?;
        let mut regions = Vec::new();
        for r in self.regions()? {
            let bytes = read(&self.ledger_path(&r))?;
            let chain = RegionalChain::from_ledger_bytes(&bytes, pp.clone(), vk, relay.revocations()).map_err(|e| match e {
                rccpabe_chain::ChainError::Format(m) => CliError::Integrity(format!("region {r}: {m}")),
                other => other.into(),
            })?;
            regions.push(chain);
        }
        Ok(Federation::restore(config, relay, regions, seed))
    }

    pub fn save_federation(&self, fed: &Federation) -> Result<(), CliError> {
        write(&self.relay_path(), fed.relay.to_json())?;
        for r in fed.regions() {
            write(&self.ledger_path(&r.region), r.to_ledger_bytes())?;
        }
        Ok(())
    }
}
