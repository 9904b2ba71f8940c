//! Concurrent-user workload over a relay + regional federation.
//!
//! Each (function, user count, iteration) is one block slot: `n` logically
//! concurrent calls are submitted, the relay serializes them in arrival
//! order, then the clock advances one block. A call's latency is
//! `client link draw + counted crypto time + overhead + service × queue
//! position`; the last two coefficients come from calibration.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rccpabe_chain::config::LinkModel;
use rccpabe_chain::{CallKind, ChainConfig, Federation};
use rccpabe_core::lsss::compile_policy;
use rccpabe_core::pairing::{init_group, measure, rng_from_seed, SecurityLevel};
use rccpabe_core::scheme::{
    encrypt, global_setup, keygen, normalize_attributes, update_attributes, Certificate, Metadata, PublicKeyShadow,
    SecretKey,
};
use serde::{Deserialize, Serialize};

use crate::calibrate::CalibrationTargets;
use crate::cost::CostConstants;
use crate::BenchError;

/// The three contract functions a workload may exercise.
pub const WORKLOAD_FUNCTIONS: [CallKind; 3] =
    [CallKind::EvaluatePolicy, CallKind::UploadCiphertext, CallKind::RevokeAttribute];

/// Per-function latency coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyCoeffs {
    /// Fixed per-call processing time.
    pub overhead_ms: f64,
    /// Added once per call already queued ahead in the same block.
    pub service_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    pub user_counts: Vec<u64>,
    pub iterations: u64,
    pub seed: String,
    /// Region receiving uploads.
    pub region: String,
    pub payload_bytes: usize,
    /// Function names (contract spelling), run in this order.
    pub mix: Vec<String>,
    /// Client-to-chain link delay for every call.
    pub client_link: LinkModel,
    pub latency: BTreeMap<String, LatencyCoeffs>,
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.iterations == 0 {
            return Err(BenchError::Config("iterations must be at least 1".into()));
        }
        if self.user_counts.is_empty() || self.user_counts[0] == 0 {
            return Err(BenchError::Config("user_counts must be nonempty and positive".into()));
        }
        if self.user_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::Config("user_counts must be strictly increasing".into()));
        }
        if self.mix.is_empty() {
            return Err(BenchError::Config("mix is empty".into()));
        }
        for f in self.functions()? {
            let c = self.coeffs(f)?;
            if !(c.overhead_ms >= 0.0 && c.service_ms >= 0.0) {
                return Err(BenchError::Config(format!("latency coefficients for {f} must be non-negative")));
            }
        }
        Ok(())
    }

    /// The mix as call kinds; anything outside the three workload functions
    /// is a configuration error.
    pub fn functions(&self) -> Result<Vec<CallKind>, BenchError> {
        self.mix
            .iter()
            .map(|name| {
                name.parse::<CallKind>()
                    .ok()
                    .filter(|k| WORKLOAD_FUNCTIONS.contains(k))
                    .ok_or_else(|| BenchError::Config(format!("unknown workload function `{name}`")))
            })
            .collect()
    }

    pub fn coeffs(&self, f: CallKind) -> Result<LatencyCoeffs, BenchError> {
        self.latency
            .get(f.as_str())
            .copied()
            .ok_or_else(|| BenchError::Config(format!("no latency coefficients for {f}")))
    }

    pub fn link_mean_ms(&self) -> f64 {
        self.client_link.base_ms as f64 + self.client_link.jitter_ms as f64 / 2.0
    }
}

#[derive(Debug, Deserialize)]
struct SimFile {
    workload: WorkloadConfig,
    calibration: CalibrationTargets,
}

/// Everything a simulation needs, read from one TOML file.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub chain: ChainConfig,
    pub workload: WorkloadConfig,
    pub calibration: CalibrationTargets,
    pub constants: CostConstants,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let chain = ChainConfig::from_toml(text)?;
        let f: SimFile = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        f.workload.validate()?;
        f.calibration.validate()?;
        Ok(SimConfig { chain, workload: f.workload, calibration: f.calibration, constants: CostConstants::default() })
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::from_toml(rccpabe_chain::config::DEFAULT_CONFIG).expect("committed default config is valid")
    }
}

/// Aggregate for one (function, user count) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRow {
    pub function: CallKind,
    pub users: u64,
    /// Mean latency, rounded to microseconds.
    pub latency_ms: f64,
    /// Population standard deviation of the per-call latencies.
    pub latency_sd_ms: f64,
    /// Mean gas per call.
    pub gas: f64,
    /// `gas × gas price`, in Gwei.
    pub fee_gwei: f64,
    /// `latency_ms / (gas / 1000)`.
    pub efficiency_ratio: f64,
}

impl MeasurementRow {
    fn new(function: CallKind, users: u64, latencies: &[f64], gases: &[u64], gas_price: u64) -> Self {
        let n = latencies.len() as f64;
        let mean = latencies.iter().sum::<f64>() / n;
        let var = latencies.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let latency_ms = round3(mean);
        let gas = gases.iter().sum::<u64>() as f64 / gases.len() as f64;
        MeasurementRow {
            function,
            users,
            latency_ms,
            latency_sd_ms: round3(var.sqrt()),
            gas,
            fee_gwei: gas * gas_price as f64,
            efficiency_ratio: latency_ms / (gas / 1000.0),
        }
    }
}

pub(crate) fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Per-call facts a calibration needs: payload bytes, structural updates and
/// counted crypto time at queue position zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallProbe {
    pub bytes: u64,
    pub updates: u64,
    pub compute_ms: f64,
}

struct Client {
    cert: Certificate,
    sk: SecretKey,
    #[allow(dead_code)]
    pk: PublicKeyShadow,
}

/// Seeded system, federation and client population.
struct World {
    sim: SimConfig,
    keys: rccpabe_core::scheme::SystemKeys,
    fed: Federation,
    clients: Vec<Client>,
    rng: rccpabe_core::pairing::SeededRng,
    link_rng: rccpabe_core::pairing::SeededRng,
    payload: Vec<u8>,
}

impl World {
    fn new(sim: &SimConfig, users: u64) -> Result<Self, BenchError> {
        let w = &sim.workload;
        let seed = w.seed.as_bytes();
        let group = init_group(SecurityLevel::Ss512, seed)?;
        let mut rng = rng_from_seed(&[b"workload/keys/".as_slice(), seed].concat());
        let keys = global_setup(&group, &mut rng);
        let mut ta = rccpabe_core::scheme::TaRegistry::new(&mut rng);
        let attrs = normalize_attributes(["Role=TrafficPolice".to_string(), format!("Region={}", w.region)])?;
        let mut clients = Vec::new();
        for i in 0..users {
            let cert = ta.register(format!("vehicle-{i:04}").as_bytes(), b"obu")?;
            let (sk, pk) = keygen(&keys, &ta, &cert, &attrs, &mut rng)?;
            clients.push(Client { cert, sk, pk });
        }
        let mut fed = Federation::new(sim.chain.clone(), &keys.pp, ta.verifying_key(), &[w.region.as_str()], seed);
        // Seal the parameter publication so workload slots start empty.
        fed.advance_blocks(1);
        let mut payload = vec![0u8; w.payload_bytes];
        rng.fill(payload.as_mut_slice());
        Ok(World {
            sim: sim.clone(),
            keys,
            fed,
            clients,
            rng,
            link_rng: rng_from_seed(&[b"workload/client-link/".as_slice(), seed].concat()),
            payload,
        })
    }

    fn upload_metadata(&self, slot: u64) -> Metadata {
        Metadata::new("congestion", self.sim.workload.region.clone(), 1_700_000_000 + slot * 2)
    }

    /// Executes one call for client `i`; returns (gas, queue position,
    /// counted crypto time in ms).
    fn call(&mut self, f: CallKind, i: usize, slot: u64) -> Result<(u64, u64, f64), BenchError> {
        let consts = self.sim.constants;
        let region = self.sim.workload.region.clone();
        let (receipt, ops) = match f {
            CallKind::EvaluatePolicy => {
                let md = self.upload_metadata(slot);
                let (r, ops) = measure(|| self.fed.evaluate_policy(&md));
                (r?.1, ops)
            }
            CallKind::UploadCiphertext => {
                let md = self.upload_metadata(slot);
                let flag = self.sim.chain.rule_table().evaluate(&md)?;
                let policy = compile_policy(&self.sim.chain.policies.for_flag(flag, &region))?;
                let ct = encrypt(&self.keys.pp, &self.payload, &policy, b"congestion", flag, &md, &mut self.rng)?;
                let cert = self.clients[i].cert.clone();
                let (r, ops) = measure(|| self.fed.upload(&region, &ct, &cert));
                (r?.1, ops)
            }
            CallKind::RevokeAttribute => {
                let attrs = self.clients[i].sk.attrs();
                let (sk, pk, entry) = update_attributes(&self.keys, &self.clients[i].sk, &attrs, &mut self.rng)?;
                self.clients[i].sk = sk;
                self.clients[i].pk = pk;
                let (r, ops) = measure(|| self.fed.revoke(entry));
                let receipt = r?.1.ok_or_else(|| BenchError::Config("revocation was a duplicate".into()))?;
                (receipt, ops)
            }
            other => return Err(BenchError::Config(format!("{other} is not a workload function"))),
        };
        Ok((receipt.gas, receipt.queue_position, consts.time_of(&ops).as_ms()))
    }

    fn link_draw_ms(&mut self) -> f64 {
        let l = self.sim.workload.client_link;
        (l.base_ms + self.link_rng.gen_range(0..=l.jitter_ms)) as f64
    }
}

/// Runs the configured mix; one row per (function, user count), in mix then
/// user-count order. Deterministic for a fixed config.
pub fn run_workload(sim: &SimConfig) -> Result<Vec<MeasurementRow>, BenchError> {
    let w = &sim.workload;
    w.validate()?;
    let functions = w.functions()?;
    let max_users = *w.user_counts.last().expect("validated nonempty");
    let mut world = World::new(sim, max_users)?;
    let mut rows = Vec::new();
    let mut slot = 0u64;
    for &f in &functions {
        let coeffs = w.coeffs(f)?;
        for &n in &w.user_counts {
            let mut latencies = Vec::new();
            let mut gases = Vec::new();
            for _ in 0..w.iterations {
                for i in 0..n as usize {
                    let (gas, position, compute) = world.call(f, i, slot)?;
                    let link = world.link_draw_ms();
                    latencies.push(link + compute + coeffs.overhead_ms + coeffs.service_ms * position as f64);
                    gases.push(gas);
                }
                world.fed.advance_blocks(1);
                slot += 1;
            }
            rows.push(MeasurementRow::new(f, n, &latencies, &gases, sim.chain.gas.gas_price_gwei));
        }
    }
    Ok(rows)
}

/// One call of every workload function at queue position zero, each in its
/// own block.
pub fn probe_calls(sim: &SimConfig) -> Result<BTreeMap<CallKind, CallProbe>, BenchError> {
    let mut world = World::new(sim, 1)?;
    let mut out = BTreeMap::new();
    for (slot, f) in WORKLOAD_FUNCTIONS.into_iter().enumerate() {
        let (_, position, compute_ms) = world.call(f, 0, slot as u64)?;
        debug_assert_eq!(position, 0);
        let rec = world.fed.relay.meter().journal().last().expect("call was charged").clone();
        out.insert(f, CallProbe { bytes: rec.bytes, updates: rec.updates, compute_ms });
        world.fed.advance_blocks(1);
    }
    Ok(out)
}

/// Band and shape summary of one function across user counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSummary {
    pub function: CallKind,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_first: f64,
    pub ratio_last: f64,
    /// Ratio increase from the lowest to the highest user count, in percent.
    pub degradation_pct: f64,
    pub latency_monotone: bool,
    pub gas_monotone: bool,
    /// Coefficient of determination of the least-squares line gas ~ users.
    pub gas_r2: f64,
}

pub type EfficiencyReport = Vec<FunctionSummary>;

/// Summaries per function, in order of first appearance.
pub fn efficiency_report(rows: &[MeasurementRow]) -> EfficiencyReport {
    let mut order: Vec<CallKind> = Vec::new();
    for r in rows {
        if !order.contains(&r.function) {
            order.push(r.function);
        }
    }
    order
        .into_iter()
        .map(|f| {
            let mut rs: Vec<&MeasurementRow> = rows.iter().filter(|r| r.function == f).collect();
            rs.sort_by_key(|r| r.users);
            let ratios: Vec<f64> = rs.iter().map(|r| r.efficiency_ratio).collect();
            let (first, last) = (ratios[0], *ratios.last().unwrap());
            FunctionSummary {
                function: f,
                ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratio_max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ratio_first: first,
                ratio_last: last,
                degradation_pct: 100.0 * (last - first) / first,
                latency_monotone: rs.windows(2).all(|w| w[0].latency_ms <= w[1].latency_ms),
                gas_monotone: rs.windows(2).all(|w| w[0].gas <= w[1].gas),
                gas_r2: r_squared(&rs.iter().map(|r| (r.users as f64, r.gas)).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// R² of the least-squares line through `pts`; a constant series fits
/// perfectly.
pub fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    (sxy * sxy) / (sxx * syy)
}

pub const CSV_HEADER: [&str; 6] = ["function", "users", "latency_ms", "gas", "fee", "efficiency_ratio"];

/// Writes rows with a fixed column order and fixed-precision numbers.
pub fn export_csv<W: Write>(rows: &[MeasurementRow], w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.function.as_str().to_string(),
            r.users.to_string(),
            format!("{:.3}", r.latency_ms),
            format!("{:.1}", r.gas),
            format!("{:.1}", r.fee_gwei),
            format!("{:.6}", r.efficiency_ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Human-readable summary with pass/fail against the configured bands.
pub fn render_report(report: &EfficiencyReport, targets: &CalibrationTargets) -> String {
    let mut s = String::new();
    for f in report {
        let band = targets.functions.get(f.function.as_str()).and_then(|t| t.band);
        let band_txt = match band {
            Some([lo, hi]) => {
                let ok = f.ratio_min >= lo && f.ratio_max <= hi;
                format!(" band {lo:.2}-{hi:.2} {}", if ok { "PASS" } else { "FAIL" })
            }
            None => String::new(),
        };
        s.push_str(&format!(
            "{:<17} ratio {:.3}-{:.3} degradation {:+.1}% R2 {:.4} monotone latency={} gas={}{}\n",
            f.function.as_str(),
            f.ratio_min,
            f.ratio_max,
            f.degradation_pct,
            f.gas_r2,
            f.latency_monotone,
            f.gas_monotone,
            band_txt
        ));
    }
    s
}
