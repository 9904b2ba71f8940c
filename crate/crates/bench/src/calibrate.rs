//! Closed-form calibration of gas and latency coefficients.
//!
//! With calls served in arrival order, the mean queue position in an
//! `n`-user block slot is `(n − 1) / 2`, so mean gas and mean latency are
//! affine in `n`. Two target points per function (lowest and highest user
//! count) fix the slope (`per_index`, `service_ms`) and the intercept
//! (`base`, `overhead_ms`) exactly; probed payload bytes, structural updates
//! and counted crypto time are subtracted out first.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rccpabe_chain::gas::CallCost;
use rccpabe_chain::CallKind;
use serde::{Deserialize, Serialize};

use crate::workload::{probe_calls, round3, LatencyCoeffs, SimConfig, WORKLOAD_FUNCTIONS};
use crate::BenchError;

/// What one function should look like at the lowest and highest user counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionTarget {
    /// Mean gas per call.
    pub gas: [u64; 2],
    /// Efficiency ratio (ms per 1000 gas); exclusive with `latency_ms`.
    #[serde(default)]
    pub ratio: Option<[f64; 2]>,
    /// Mean latency; exclusive with `ratio`.
    #[serde(default)]
    pub latency_ms: Option<[f64; 2]>,
    /// Acceptance band every user count's ratio must fall in.
    #[serde(default)]
    pub band: Option<[f64; 2]>,
}

impl FunctionTarget {
    fn latency_targets(&self) -> [f64; 2] {
        match (self.ratio, self.latency_ms) {
            (Some(r), _) => [r[0] * self.gas[0] as f64 / 1000.0, r[1] * self.gas[1] as f64 / 1000.0],
            (None, Some(l)) => l,
            (None, None) => unreachable!("validated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTargets {
    /// Accepted ratio degradation from lowest to highest user count, percent.
    #[serde(default)]
    pub degradation_pct: Option<[f64; 2]>,
    pub functions: BTreeMap<String, FunctionTarget>,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Result<(), BenchError> {
        for (name, t) in &self.functions {
            let ok = name.parse::<CallKind>().map(|k| WORKLOAD_FUNCTIONS.contains(&k)).unwrap_or(false);
            if !ok {
                return Err(BenchError::Config(format!("calibration target for unknown function `{name}`")));
            }
            if t.ratio.is_some() == t.latency_ms.is_some() {
                return Err(BenchError::Config(format!("`{name}` needs exactly one of ratio or latency_ms")));
            }
            if t.gas[0] > t.gas[1] {
                return Err(BenchError::Config(format!("`{name}` gas targets must be non-decreasing")));
            }
        }
        Ok(())
    }
}

/// Solved coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibrated {
    pub gas: BTreeMap<CallKind, CallCost>,
    pub latency: BTreeMap<CallKind, LatencyCoeffs>,
}

impl Calibrated {
    /// Installs the coefficients into a configuration.
    pub fn apply(&self, sim: &mut SimConfig) {
        for (k, c) in &self.gas {
            sim.chain.gas.calls.insert(*k, *c);
        }
        for (k, c) in &self.latency {
            sim.workload.latency.insert(k.as_str().to_owned(), *c);
        }
    }

    /// TOML fragments to paste into the configuration file.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        for (k, c) in &self.gas {
            let _ = writeln!(
                s,
                "[gas.calls.{k}]\nbase = {}\nper_byte = {}\nper_index = {}\n",
                c.base, c.per_byte, c.per_index
            );
        }
        for (k, c) in &self.latency {
            let _ = writeln!(s, "[workload.latency.{k}]\noverhead_ms = {}\nservice_ms = {}\n", c.overhead_ms, c.service_ms);
        }
        s
    }
}

/// Solves every targeted function's gas `base`/`per_index` (keeping the
/// configured `per_byte`) and latency `overhead_ms`/`service_ms`.
pub fn calibrate(sim: &SimConfig) -> Result<Calibrated, BenchError> {
    let counts = &sim.workload.user_counts;
    let (lo, hi) = (counts[0], *counts.last().expect("validated nonempty"));
    if lo == hi {
        return Err(BenchError::Config("calibration needs at least two user counts".into()));
    }
    let q = |n: u64| (n as f64 - 1.0) / 2.0;
    let dq = q(hi) - q(lo);
    let probes = probe_calls(sim)?;
    let mut out = Calibrated { gas: BTreeMap::new(), latency: BTreeMap::new() };
    for (name, t) in &sim.calibration.functions {
        let kind: CallKind = name.parse().map_err(|_| BenchError::Config(format!("unknown function `{name}`")))?;
        let probe = probes[&kind];
        let per_byte = sim.chain.gas.calls.get(&kind).map_or(0, |c| c.per_byte);

        let per_index = ((t.gas[1] - t.gas[0]) as f64 / dq).round();
        let base = t.gas[0] as f64 - (per_byte * probe.bytes) as f64 - per_index * (probe.updates as f64 + q(lo));
        if base < 0.0 {
            return Err(BenchError::Config(format!("{name}: gas target too low for its payload")));
        }
        out.gas.insert(kind, CallCost { base: base.round() as u64, per_byte, per_index: per_index as u64 });

        let [l_lo, l_hi] = t.latency_targets();
        let service_ms = round3((l_hi - l_lo) / dq);
        let overhead_ms = round3(l_lo - sim.workload.link_mean_ms() - probe.compute_ms - service_ms * q(lo));
        if service_ms < 0.0 || overhead_ms < 0.0 {
            return Err(BenchError::Config(format!(
                "{name}: latency targets unreachable (overhead {overhead_ms} ms, service {service_ms} ms)"
            )));
        }
        out.latency.insert(kind, LatencyCoeffs { overhead_ms, service_ms });
    }
    Ok(out)
}
