//! `rccpabe`: one entry point for system setup, registration, the key
//! lifecycle, encrypt/upload/search/decrypt, revocation, the workload
//! simulator, cost-model reproduction and ledger audits.

mod error;
pub mod state;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::RngCore;
use rccpabe_bench::calibrate::calibrate;
use rccpabe_bench::cost::{
    decrypt_reduction_pct, figure7_rows, figure8_rows, host_constants, measure_vs_model, time_orderings,
    write_figure_csv, CostConstants, Scheme,
};
use rccpabe_bench::workload::{efficiency_report, export_csv, render_report, run_workload, SimConfig};
use rccpabe_chain::ledger::audit_ledger;
use rccpabe_chain::{ChainConfig, Federation, ScopeFilter};
use rccpabe_core::lsss::compile_policy;
use rccpabe_core::pairing::{init_group, rng_from_seed, SecurityLevel, SeededRng};
use rccpabe_core::scheme::format::verify_key_encoded;
use rccpabe_core::scheme::{
    decrypt, encrypt, global_setup, keygen, normalize_attributes, trace, trapdoor, update_attributes, Certificate,
    CiphertextRecord, KeyId, Metadata, PublicKeyShadow, RevocationEntry, RevocationTarget, SearchResult, SecretKey,
    SystemKeys, TaRegistry, Trapdoor,
};

pub use error::{exit, CliError};
use state::{read, read_text, write, StateDir};

#[derive(Debug, Parser)]
#[command(name = "rccpabe", version, about = "Searchable, traceable CP-ABE over a relay + regional chain emulation")]
pub struct Cli {
    /// State directory holding system parameters and chain ledgers.
    #[arg(long, global = true, default_value = "rccpabe-state")]
    pub state: PathBuf,
    /// Seed for every random choice; runs with the same seed are reproducible.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Configuration file (defaults to the one captured at setup).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Region to act on.
    #[arg(long, global = true)]
    pub region: Option<String>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create system parameters, the TA registry and empty chains.
    Setup {
        #[arg(long, value_delimiter = ',', default_value = "R1,R2")]
        regions: Vec<String>,
        /// Replace an existing state directory.
        #[arg(long)]
        force: bool,
    },
    /// Register a vehicle/user with the TA and write its certificate.
    Register {
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "")]
        info: String,
    },
    /// Issue a secret key (written to --out) and its public shadow (.pk).
    Keygen {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
    },
    /// Encrypt a file under a policy (default: the template the context rules select).
    Encrypt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        keyword: String,
        #[arg(long, default_value = "accident")]
        event: String,
        /// Event time, Unix seconds.
        #[arg(long, default_value_t = 1_700_000_000)]
        time: u64,
        #[arg(long)]
        policy: Option<String>,
    },
    /// Upload a ciphertext to a regional chain.
    Upload {
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Derive a search trapdoor for a keyword.
    Trapdoor {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        keyword: String,
    },
    /// Search a region; matching bundles are written into the --out directory.
    Search {
        #[arg(long)]
        trapdoor: PathBuf,
        #[arg(long)]
        pk: PathBuf,
        /// Metadata filter such as `event=accident,flag=true`.
        #[arg(long, default_value = "")]
        scope: String,
    },
    /// Recover the payload from a search bundle.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Recover the identity a key was issued to (TA only).
    Trace {
        #[arg(long)]
        key: PathBuf,
    },
    /// Check a key file's well-formedness equations.
    VerifyKey {
        #[arg(long)]
        key: PathBuf,
    },
    /// Revoke a key (by file or id) or a user on every region.
    Revoke {
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long)]
        key_id: Option<String>,
        #[arg(long)]
        user: Option<String>,
        #[arg(long, default_value = "revoked")]
        reason: String,
    },
    /// Re-issue a key with new attributes and revoke the old one.
    UpdateAttrs {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
    },
    /// Run the concurrent-user workload (CSV to --out, summary to stdout).
    Simulate {
        /// Print calibrated coefficients for the configured targets instead.
        #[arg(long)]
        calibrate: bool,
    },
    /// Reproduce the cost comparisons (CSV files into the --out directory).
    Bench {
        /// Constants file overriding the published per-operation times.
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        a_s_min: u64,
        #[arg(long, default_value_t = 20)]
        a_s_max: u64,
        /// Attribute-universe size for the baselines that depend on it.
        #[arg(long, default_value_t = 20)]
        u_prime: u64,
        /// Also time primitives on this host.
        #[arg(long)]
        host: bool,
    },
    /// Verify regional ledgers and pinpoint the first damaged block.
    AuditChain {
        /// Audit this file instead of the state directory's ledgers.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_owned())),
    };
    Ctx::new(&cli).dispatch(&cli.command)
}

struct Ctx<'a> {
    cli: &'a Cli,
    state: StateDir,
    seed: Vec<u8>,
}

fn decode<T>(path: &Path, f: impl FnOnce(&[u8]) -> Result<T, rccpabe_core::scheme::SchemeError>) -> Result<T, CliError> {
    let bytes = read(path)?;
    f(&bytes).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn pk_path(sk_path: &Path) -> PathBuf {
    sk_path.with_extension("pk")
}

impl<'a> Ctx<'a> {
    fn new(cli: &'a Cli) -> Self {
        let seed = match &cli.seed {
            Some(s) => s.as_bytes().to_vec(),
            None => {
                let mut b = [0u8; 32];
                rand::rngs::OsRng.fill_bytes(&mut b);
                b.to_vec()
            }
        };
        Ctx { cli, state: StateDir::new(&cli.state), seed }
    }

    fn rng(&self, label: &str) -> SeededRng {
        rng_from_seed(&[label.as_bytes(), b"/", &self.seed].concat())
    }

    fn out(&self, what: &str) -> Result<&Path, CliError> {
        self.cli.out.as_deref().ok_or_else(|| CliError::Usage(format!("--out <{what}> is required")))
    }

    fn region(&self) -> Result<&str, CliError> {
        self.cli.region.as_deref().ok_or_else(|| CliError::Usage("--region is required".into()))
    }

    fn chain_config(&self) -> Result<ChainConfig, CliError> {
        Ok(ChainConfig::from_toml(&self.state.config_text(self.cli.config.as_deref())?)?)
    }

    fn federation(&self) -> Result<Federation, CliError> {
        self.state.federation(self.chain_config()?, &self.seed)
    }

    fn system_keys(&self) -> Result<SystemKeys, CliError> {
        Ok(SystemKeys { pp: self.state.pp()?, msk: self.state.msk()? })
    }

    /// Seals one block (delivering revocation markers and publishing
    /// cross-region pointers) and persists every chain.
    fn commit(&self, fed: &mut Federation) -> Result<(), CliError> {
        fed.advance_blocks(1);
        self.state.save_federation(fed)
    }

    fn dispatch(&self, cmd: &Command) -> Result<(), CliError> {
        match cmd {
            Command::Setup { regions, force } => self.setup(regions, *force),
            Command::Register { id, info } => self.register(id, info),
            Command::Keygen { cert, attrs } => self.keygen(cert, attrs),
            Command::Encrypt { input, keyword, event, time, policy } => {
                self.encrypt(input, keyword, event, *time, policy.as_deref())
            }
            Command::Upload { ct, cert } => self.upload(ct, cert),
            Command::Trapdoor { key, keyword } => self.trapdoor(key, keyword),
            Command::Search { trapdoor, pk, scope } => self.search(trapdoor, pk, scope),
            Command::Decrypt { key, bundle } => self.decrypt(key, bundle),
            Command::Trace { key } => self.trace(key),
            Command::VerifyKey { key } => self.verify_key(key),
            Command::Revoke { key, key_id, user, reason } => {
                self.revoke(key.as_deref(), key_id.as_deref(), user.as_deref(), reason)
            }
            Command::UpdateAttrs { key, attrs } => self.update_attrs(key, attrs),
            Command::Simulate { calibrate } => self.simulate(*calibrate),
            Command::Bench { constants, a_s_min, a_s_max, u_prime, host } => {
                self.bench(constants.as_deref(), *a_s_min, *a_s_max, *u_prime, *host)
            }
            Command::AuditChain { ledger } => self.audit(ledger.as_deref()),
        }
    }

    fn setup(&self, regions: &[String], force: bool) -> Result<(), CliError> {
        if self.state.exists() && !force {
            return Err(CliError::Usage(format!("{} already holds a system (use --force)", self.state.root.display())));
        }
        if regions.is_empty() || regions.iter().any(|r| r.is_empty()) {
            return Err(CliError::Usage("--regions needs at least one nonempty name".into()));
        }
        let config_text = self.state.config_text(self.cli.config.as_deref())?;
        let config = ChainConfig::from_toml(&config_text)?;
        let group = init_group(SecurityLevel::Ss512, &[b"group/".as_slice(), &self.seed].concat())
            .map_err(|e| CliError::Failed(e.to_string()))?;
        let mut rng = self.rng("setup");
        let keys = global_setup(&group, &mut rng);
        let ta = TaRegistry::new(&mut rng);
        let names: Vec<&str> = regions.iter().map(String::as_str).collect();
        let mut fed = Federation::new(config, &keys.pp, ta.verifying_key(), &names, &self.seed);

        if force && self.state.root.exists() {
            for r in self.state.regions()? {
                let p = self.state.ledger_path(&r);
                std::fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
            }
        }
        write(&self.state.config_path(), &config_text)?;
        write(&self.state.pp_path(), keys.pp.to_bytes())?;
        write(&self.state.msk_path(), keys.msk.to_bytes())?;
        self.state.save_registry(&ta)?;
        self.commit(&mut fed)?;
        println!(
            "system ready in {}: regions {}, public parameters {} element bytes",
            self.state.root.display(),
            regions.join(","),
            keys.pp.element_bytes().len()
        );
        Ok(())
    }

    fn register(&self, id: &str, info: &str) -> Result<(), CliError> {
        let out = self.out("certificate file")?;
        let mut ta = self.state.registry()?;
        let cert = ta.register(id.as_bytes(), info.as_bytes())?;
        self.state.save_registry(&ta)?;
        write(out, cert.to_bytes())?;
        println!("registered `{id}` -> {}", out.display());
        Ok(())
    }

    fn keygen(&self, cert: &Path, attrs: &[String]) -> Result<(), CliError> {
        let out = self.out("secret key file")?;
        let keys = self.system_keys()?;
        let ta = self.state.registry()?;
        let cert = decode(cert, Certificate::from_bytes)?;
        let attrs = normalize_attributes(attrs)?;
        let (sk, pk) = keygen(&keys, &ta, &cert, &attrs, &mut self.rng("keygen"))?;
        let mut relay = self.state.relay()?;
        relay.register_attributes(attrs.iter().cloned());
        write(&self.state.relay_path(), relay.to_json())?;
        write(out, sk.to_bytes())?;
        write(&pk_path(out), pk.to_bytes())?;
        println!("key {} for `{}` ({} attributes)", sk.key_id(), cert.user_id_lossy(), attrs.len());
        Ok(())
    }

    fn encrypt(&self, input: &Path, keyword: &str, event: &str, time: u64, policy: Option<&str>) -> Result<(), CliError> {
        let out = self.out("ciphertext file")?;
        let region = self.region()?;
        let config = self.chain_config()?;
        let pp = self.state.pp()?;
        let data = read(input)?;
        let md = Metadata::new(event, region, time);
        let flag = config.rule_table().evaluate(&md)?;
        let policy_text = policy.map_or_else(|| config.policies.for_flag(flag, region), str::to_owned);
        let policy = compile_policy(&policy_text).map_err(|e| CliError::Usage(e.to_string()))?;
        let ct = encrypt(&pp, &data, &policy, keyword.as_bytes(), flag, &md, &mut self.rng("encrypt"))?;
        write(out, ct.to_bytes())?;
        println!("flag={flag} policy=\"{}\" -> {}", policy.source, out.display());
        Ok(())
    }

    fn upload(&self, ct: &Path, cert: &Path) -> Result<(), CliError> {
        let ct = decode(ct, CiphertextRecord::from_bytes)?;
        let cert = decode(cert, Certificate::from_bytes)?;
        let region = self.cli.region.clone().unwrap_or_else(|| ct.metadata.region.clone());
        let mut fed = self.federation()?;
        let (id, receipt) = fed.upload(&region, &ct, &cert)?;
        self.commit(&mut fed)?;
        let hex_id = hex::encode(id);
        if let Some(out) = &self.cli.out {
            write(out, format!("{hex_id}\n"))?;
        }
        println!("record {hex_id} in {region} (gas {})", receipt.gas);
        Ok(())
    }

    fn trapdoor(&self, key: &Path, keyword: &str) -> Result<(), CliError> {
        let out = self.out("trapdoor file")?;
        let sk = decode(key, SecretKey::from_bytes)?;
        let td = trapdoor(&sk, keyword.as_bytes(), &mut self.rng("trapdoor"))?;
        write(out, td.to_bytes())?;
        println!("trapdoor for key {} -> {}", sk.key_id(), out.display());
        Ok(())
    }

    fn search(&self, td: &Path, pk: &Path, scope: &str) -> Result<(), CliError> {
        let out = self.out("bundle directory")?;
        let region = self.region()?;
        let td = decode(td, Trapdoor::from_bytes)?;
        let pk = decode(pk, PublicKeyShadow::from_bytes)?;
        let scope: ScopeFilter = scope.parse()?;
        let mut fed = self.federation()?;
        let (bundles, receipt) = fed.search(region, &td, &pk, &scope)?;
        self.commit(&mut fed)?;
        if bundles.is_empty() {
            return Err(CliError::Denied(format!("no record in {region} matched (gas {})", receipt.gas)));
        }
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        for (id, bundle) in &bundles {
            let path = out.join(format!("{}.bundle", hex::encode(id)));
            write(&path, bundle.to_bytes())?;
            println!("{}", path.display());
        }
        eprintln!("{} match(es) in {region} (gas {})", bundles.len(), receipt.gas);
        Ok(())
    }

    fn decrypt(&self, key: &Path, bundle: &Path) -> Result<(), CliError> {
        let out = self.out("plaintext file")?;
        let sk = decode(key, SecretKey::from_bytes)?;
        let bundle = decode(bundle, SearchResult::from_bytes)?;
        let data = decrypt(&bundle, &sk)?;
        write(out, &data)?;
        println!("{} bytes -> {}", data.len(), out.display());
        Ok(())
    }

    fn trace(&self, key: &Path) -> Result<(), CliError> {
        let msk = self.state.msk()?;
        let sk = decode(key, SecretKey::from_bytes)?;
        let id = trace(&msk, &sk)?;
        if let Some(out) = &self.cli.out {
            write(out, &id)?;
        }
        println!("{}", String::from_utf8_lossy(&id));
        Ok(())
    }

    fn verify_key(&self, key: &Path) -> Result<(), CliError> {
        let pp = self.state.pp()?;
        if verify_key_encoded(&pp, &read(key)?) {
            println!("valid");
            Ok(())
        } else {
            Err(CliError::Denied(format!("{} failed key verification", key.display())))
        }
    }

    fn revoke(&self, key: Option<&Path>, key_id: Option<&str>, user: Option<&str>, reason: &str) -> Result<(), CliError> {
        let target = match (key, key_id, user) {
            (Some(p), None, None) => RevocationTarget::Key(decode(p, SecretKey::from_bytes)?.key_id()),
            (None, Some(h), None) => RevocationTarget::Key(
                KeyId::from_hex(h).ok_or_else(|| CliError::Usage(format!("`{h}` is not a key id")))?,
            ),
            (None, None, Some(u)) => RevocationTarget::User(u.as_bytes().to_vec()),
            _ => return Err(CliError::Usage("give exactly one of --key, --key-id, --user".into())),
        };
        if let RevocationTarget::User(id) = &target {
            let mut ta = self.state.registry()?;
            ta.revoke(id);
            self.state.save_registry(&ta)?;
        }
        let mut fed = self.federation()?;
        let (seq, receipt) = fed.revoke(RevocationEntry { target, reason: reason.to_owned() })?;
        self.commit(&mut fed)?;
        match receipt {
            Some(r) => println!("revocation #{seq} enforced on all regions (gas {})", r.gas),
            None => println!("already revoked as #{seq}"),
        }
        Ok(())
    }

    fn update_attrs(&self, key: &Path, attrs: &[String]) -> Result<(), CliError> {
        let out = self.out("new secret key file")?;
        let keys = self.system_keys()?;
        let old = decode(key, SecretKey::from_bytes)?;
        let attrs = normalize_attributes(attrs)?;
        let (sk, pk, entry) = update_attributes(&keys, &old, &attrs, &mut self.rng("update-attrs"))?;
        let mut fed = self.federation()?;
        fed.relay.register_attributes(attrs.iter().cloned());
        let (seq, _) = fed.revoke(entry)?;
        self.commit(&mut fed)?;
        write(out, sk.to_bytes())?;
        write(&pk_path(out), pk.to_bytes())?;
        println!("key {} replaces {} (revocation #{seq})", sk.key_id(), old.key_id());
        Ok(())
    }

    fn sim_config(&self) -> Result<SimConfig, CliError> {
        let text = match &self.cli.config {
            Some(p) => read_text(p)?,
            None => rccpabe_chain::config::DEFAULT_CONFIG.to_owned(),
        };
        let mut sim = SimConfig::from_toml(&text)?;
        if let Some(s) = &self.cli.seed {
            sim.workload.seed = s.clone();
        }
        Ok(sim)
    }

    fn simulate(&self, calibrate_only: bool) -> Result<(), CliError> {
        let sim = self.sim_config()?;
        if calibrate_only {
            print!("{}", calibrate(&sim)?.to_toml());
            return Ok(());
        }
        let rows = run_workload(&sim)?;
        let report = efficiency_report(&rows);
        match &self.cli.out {
            Some(out) => {
                let mut buf = Vec::new();
                export_csv(&rows, &mut buf)?;
                write(out, buf)?;
                eprintln!("{} rows -> {}", rows.len(), out.display());
            }
            None => export_csv(&rows, std::io::stdout().lock())?,
        }
        print!("{}", render_report(&report, &sim.calibration));
        Ok(())
    }

    fn bench(&self, constants: Option<&Path>, lo: u64, hi: u64, u_prime: u64, host: bool) -> Result<(), CliError> {
        if lo == 0 || lo > hi {
            return Err(CliError::Usage("need 1 <= --a-s-min <= --a-s-max".into()));
        }
        let out = self.out("output directory")?;
        let c = match constants {
            Some(p) => CostConstants::from_toml(&read_text(p)?)?,
            None => CostConstants::default(),
        };
        let grid: Vec<u64> = (lo..=hi).collect();
        let group = init_group(SecurityLevel::Ss512, &[b"bench/".as_slice(), &self.seed].concat())
            .map_err(|e| CliError::Failed(e.to_string()))?;
        let report = measure_vs_model(&group, &grid, &grid, &c, &self.seed)?;

        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let mut buf = Vec::new();
        write_figure_csv(&figure7_rows(&grid, &c, Some(&report)), &mut buf)?;
        write(&out.join("computation.csv"), &buf)?;
        buf.clear();
        write_figure_csv(&figure8_rows(&grid, u_prime, &c, Some(&report)), &mut buf)?;
        write(&out.join("storage.csv"), &buf)?;
        let mut checks = String::from("operation,a_s,l,g_exp,gt_exp,pairings,counts_match,predicted_ms,model_ms,wall_ms\n");
        for t in &report.timings {
            checks.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.3}\n",
                t.op,
                t.a_s,
                t.l,
                t.counted.g_exp,
                t.counted.gt_exp,
                t.counted.pairings,
                t.counts_match(),
                t.predicted,
                t.model,
                t.wall_us as f64 / 1000.0
            ));
        }
        write(&out.join("model_check.csv"), checks)?;

        for v in time_orderings(&grid, &c) {
            println!(
                "ordering: proposed {} at A_s={} is {} ms, not below {} ({} ms)",
                v.op, v.a_s, v.proposed, v.baseline, v.other
            );
        }
        for b in [Scheme::Zeng, Scheme::Zhao] {
            let r: Vec<String> =
                [lo, hi].iter().map(|&a| format!("{:.1}%", decrypt_reduction_pct(b, a, &c).unwrap_or(f64::NAN))).collect();
            println!("decrypt reduction vs {b}: {} (A_s={lo}) .. {} (A_s={hi})", r[0], r[1]);
        }
        if host {
            let h = host_constants(&group, 15, &self.seed);
            println!("host constants: T={} ms T_T={} ms T_P={} ms", h.t, h.t_t, h.t_p);
        }
        let bad = report.count_mismatches().len() + report.size_mismatches().len();
        if bad > 0 {
            return Err(CliError::Failed(format!("{bad} model mismatch(es); see model_check.csv")));
        }
        println!("operation counts and sizes match the model for A_s, L in {lo}..={hi}");
        Ok(())
    }

    fn audit(&self, ledger: Option<&Path>) -> Result<(), CliError> {
        let paths: Vec<PathBuf> = match (ledger, &self.cli.region) {
            (Some(p), _) => vec![p.to_path_buf()],
            (None, Some(r)) => vec![self.state.ledger_path(r)],
            (None, None) => self.state.regions()?.iter().map(|r| self.state.ledger_path(r)).collect(),
        };
        if paths.is_empty() {
            return Err(CliError::Usage("no ledgers to audit".into()));
        }
        let mut damaged = Vec::new();
        for p in &paths {
            let (report, _) = audit_ledger(&read(p)?);
            let name = report.region.clone().unwrap_or_else(|| p.display().to_string());
            match &report.damage {
                None => println!("{name}: {} blocks verified", report.verified_blocks),
                Some(d) => {
                    println!("{name}: DAMAGED after {} good blocks: {d:?}", report.verified_blocks);
                    damaged.push(name);
                }
            }
        }
        if damaged.is_empty() {
            Ok(())
        } else {
            Err(CliError::Integrity(format!("damaged ledger(s): {}", damaged.join(", "))))
        }
    }
}
