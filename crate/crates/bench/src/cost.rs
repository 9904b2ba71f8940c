//! Storage/computation cost formulas, instrumented model checks and host
//! microbenchmarks.
//!
//! Times are carried as integer microseconds so every formula evaluates
//! exactly; the published constants have millisecond precision of 10⁻³.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use rccpabe_core::lsss::{compile_policy, find_reconstruction};
use rccpabe_core::pairing::{
    measure, pairing, random_nonzero, rng_from_seed, GroupParams, OpCounts, GT_BYTES, G_BYTES, ZP_BYTES,
};
use rccpabe_core::scheme::{
    decrypt, derive_shadow, encrypt, global_setup, issue_key, search, trapdoor, AttributeSet, Metadata, SystemKeys,
};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// A duration in whole microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Micros(pub u64);

impl Micros {
    pub fn as_ms(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:03}", self.0 / 1000, self.0 % 1000)
    }
}

/// Per-operation times and element sizes fed into the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostConstants {
    /// Exponentiation in `G`.
    pub t: Micros,
    /// Exponentiation in `G_T`.
    pub t_t: Micros,
    /// Pairing.
    pub t_p: Micros,
    pub size_g: u64,
    pub size_gt: u64,
    pub size_zp: u64,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants { t: Micros(8005), t_t: Micros(1910), t_p: Micros(16010), size_g: 128, size_gt: 128, size_zp: 20 }
    }
}

/// On-disk form of [`CostConstants`]: times in milliseconds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsFile {
    t_ms: f64,
    t_t_ms: f64,
    t_p_ms: f64,
    size_g: u64,
    size_gt: u64,
    size_zp: u64,
}

fn ms_to_micros(name: &str, ms: f64) -> Result<Micros, BenchError> {
    let us = ms * 1000.0;
    let rounded = us.round();
    if !(rounded >= 1.0) || (us - rounded).abs() > 1e-6 || rounded > u32::MAX as f64 {
        return Err(BenchError::Config(format!("{name} = {ms} must be positive with at most 3 decimals")));
    }
    Ok(Micros(rounded as u64))
}

impl CostConstants {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let f: ConstantsFile = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        let c = CostConstants {
            t: ms_to_micros("t_ms", f.t_ms)?,
            t_t: ms_to_micros("t_t_ms", f.t_t_ms)?,
            t_p: ms_to_micros("t_p_ms", f.t_p_ms)?,
            size_g: f.size_g,
            size_gt: f.size_gt,
            size_zp: f.size_zp,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        let f = ConstantsFile {
            t_ms: self.t.as_ms(),
            t_t_ms: self.t_t.as_ms(),
            t_p_ms: self.t_p.as_ms(),
            size_g: self.size_g,
            size_gt: self.size_gt,
            size_zp: self.size_zp,
        };
        toml::to_string(&f).expect("plain table serializes")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if [self.t.0, self.t_t.0, self.t_p.0, self.size_g, self.size_gt, self.size_zp].contains(&0) {
            return Err(BenchError::Config("cost constants must be strictly positive".into()));
        }
        Ok(())
    }

    /// Model time of a measured operation profile.
    pub fn time_of(&self, ops: &OpCounts) -> Micros {
        Micros(ops.g_exp * self.t.0 + ops.gt_exp * self.t_t.0 + ops.pairings * self.t_p.0)
    }
}

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident, $kind:literal { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = BenchError;

            fn from_str(s: &str) -> Result<Self, BenchError> {
                match s.to_ascii_lowercase().as_str() {
                    $($s => Ok($name::$var),)+
                    _ => Err(BenchError::Unknown { kind: $kind, name: s.to_owned() }),
                }
            }
        }
    };
}

named_enum!(
    /// The proposed scheme and the three comparison baselines.
    Scheme, "scheme" { Proposed => "proposed", Zeng => "zeng", Zhao => "zhao", Li => "li" }
);
named_enum!(Operation, "operation" { KeyGen => "keygen", Encrypt => "encrypt", Decrypt => "decrypt" });
named_enum!(Object, "object" { Sk => "sk", Pp => "pp", Ct => "ct" });

/// Computation-time formula for `(scheme, op)` at attribute count `a_s` and
/// policy rows `l`. Zeng's `𝒜` is taken as `a_s`, and its encryption row is
/// evaluated as printed (a bare `2𝒜 + 1` milliseconds).
pub fn eval_time(scheme: Scheme, op: Operation, a_s: u64, l: u64, c: &CostConstants) -> Result<Micros, BenchError> {
    let (t, tt, tp) = (c.t.0, c.t_t.0, c.t_p.0);
    let us = match (scheme, op) {
        (Scheme::Proposed, Operation::KeyGen) => (a_s + 1) * t,
        (Scheme::Proposed, Operation::Encrypt) => 4 * t + 3 * tt,
        (Scheme::Proposed, Operation::Decrypt) => t,
        (Scheme::Zeng, Operation::KeyGen) => (5 * l + 2) * t + 2 * tt,
        (Scheme::Zeng, Operation::Encrypt) => 2 * tp + (2 * a_s + 1) * 1000,
        (Scheme::Zeng, Operation::Decrypt) => 2 * tp + (2 * a_s + 1) * t,
        (Scheme::Zhao, Operation::KeyGen) => (a_s + 2) * tp + 2 * t + a_s * tt,
        (Scheme::Zhao, Operation::Encrypt) => 2 * l * t,
        (Scheme::Zhao, Operation::Decrypt) => tp + 2 * t,
        (Scheme::Li, _) => return Err(BenchError::NoFormula { scheme: "li", what: format!("{op} time") }),
    };
    Ok(Micros(us))
}

/// Storage formula in bytes for `(scheme, object)`; `u_prime` is the size of
/// the attribute universe.
pub fn eval_size(scheme: Scheme, obj: Object, a_s: u64, l: u64, u_prime: u64, c: &CostConstants) -> u64 {
    let (g, gt, zp) = (c.size_g, c.size_gt, c.size_zp);
    match (scheme, obj) {
        (Scheme::Proposed, Object::Sk) => (a_s + 1) * g + 5 * zp,
        (Scheme::Proposed, Object::Pp) => 4 * g + 2 * gt,
        (Scheme::Proposed, Object::Ct) => 4 * g + 2 * gt + 2 * l * zp,
        (Scheme::Zeng, Object::Sk) => (a_s + 2) * 2 * g,
        (Scheme::Zeng, Object::Pp) => 4 * g + gt,
        (Scheme::Zeng, Object::Ct) => (3 * l + 2) * g + gt,
        (Scheme::Zhao, Object::Sk) => 3 * a_s * g + 2 * zp,
        (Scheme::Zhao, Object::Pp) => (3 + u_prime) * g + gt + 2 * zp,
        (Scheme::Zhao, Object::Ct) => (2 * l + 2) * g + gt,
        (Scheme::Li, Object::Sk) => (3 + a_s) * g + 2 * zp,
        (Scheme::Li, Object::Pp) => 4 * g + gt + 2 * zp,
        (Scheme::Li, Object::Ct) => (2 * l + 3) * g + gt,
    }
}

/// String-keyed front end used by the CLI.
pub fn eval_time_named(scheme: &str, op: &str, a_s: u64, l: u64, c: &CostConstants) -> Result<Micros, BenchError> {
    eval_time(scheme.parse()?, op.parse()?, a_s, l, c)
}

pub fn eval_size_named(scheme: &str, obj: &str, a_s: u64, l: u64, u_prime: u64, c: &CostConstants) -> Result<u64, BenchError> {
    Ok(eval_size(scheme.parse()?, obj.parse()?, a_s, l, u_prime, c))
}

/// Operation counts the proposed scheme must perform.
pub fn expected_counts(op: Operation, a_s: u64) -> OpCounts {
    match op {
        Operation::KeyGen => OpCounts { g_exp: a_s + 1, gt_exp: 0, pairings: 0 },
        Operation::Encrypt => OpCounts { g_exp: 4, gt_exp: 3, pairings: 0 },
        Operation::Decrypt => OpCounts { g_exp: 0, gt_exp: 1, pairings: 0 },
    }
}

/// Attribute labels used by the instrumented runs.
pub fn attribute_labels(n: u64) -> Vec<String> {
    (0..n).map(|i| format!("Attr{i}=on")).collect()
}

/// An AND-policy over the first `l` labels (one LSSS row per leaf).
pub fn and_policy(l: u64) -> String {
    attribute_labels(l).join(" AND ")
}

/// One row of [`measure_vs_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheck {
    pub op: Operation,
    pub a_s: u64,
    pub l: u64,
    pub counted: OpCounts,
    pub expected: OpCounts,
    /// `counted` × constants.
    pub predicted: Micros,
    /// Table formula evaluated directly.
    pub model: Micros,
    pub wall_us: u64,
}

impl ModelCheck {
    pub fn counts_match(&self) -> bool {
        self.counted == self.expected
    }
}

/// Byte-size comparison of one serialized object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeCheck {
    pub object: Object,
    pub a_s: u64,
    pub l: u64,
    pub measured: u64,
    pub model: u64,
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub timings: Vec<ModelCheck>,
    pub sizes: Vec<SizeCheck>,
}

impl ModelReport {
    /// Count mismatches are hard failures; wall-time deviations are not.
    pub fn count_mismatches(&self) -> Vec<&ModelCheck> {
        self.timings.iter().filter(|c| !c.counts_match()).collect()
    }

    pub fn size_mismatches(&self) -> Vec<&SizeCheck> {
        self.sizes.iter().filter(|s| s.measured != s.model).collect()
    }

    pub fn timing(&self, op: Operation, a_s: u64, l: u64) -> Option<&ModelCheck> {
        self.timings.iter().find(|c| c.op == op && c.a_s == a_s && c.l == l)
    }
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, OpCounts, u64) {
    let start = Instant::now();
    let (r, ops) = measure(f);
    (r, ops, start.elapsed().as_micros() as u64)
}

/// Runs keygen, encrypt and decrypt of the real scheme over every
/// `(a_s, l)` pair and compares counters and serialized sizes with the
/// formulas. Keygen is swept over `a_s` alone and encrypt over `l` alone;
/// the decrypting key always holds exactly the policy's attributes.
pub fn measure_vs_model(
    group: &GroupParams,
    a_s_values: &[u64],
    l_values: &[u64],
    c: &CostConstants,
    seed: &[u8],
) -> Result<ModelReport, BenchError> {
    let mut rng = rng_from_seed(seed);
    let keys = global_setup(group, &mut rng);
    // Serialized sizes are checked against the encoding widths actually used.
    let enc = &CostConstants { size_g: G_BYTES as u64, size_gt: GT_BYTES as u64, size_zp: ZP_BYTES as u64, ..*c };
    let mut timings = Vec::new();
    let mut sizes = vec![SizeCheck {
        object: Object::Pp,
        a_s: 0,
        l: 0,
        measured: keys.pp.element_bytes().len() as u64,
        model: eval_size(Scheme::Proposed, Object::Pp, 0, 0, 0, enc),
    }];

    for &a_s in a_s_values {
        let attrs: AttributeSet = attribute_labels(a_s).into_iter().collect();
        let (sk, counted, wall_us) = timed(|| issue_key(&keys, b"bench-user", &attrs, &mut rng));
        let sk = sk?;
        timings.push(ModelCheck {
            op: Operation::KeyGen,
            a_s,
            l: 0,
            counted,
            expected: expected_counts(Operation::KeyGen, a_s),
            predicted: c.time_of(&counted),
            model: eval_time(Scheme::Proposed, Operation::KeyGen, a_s, 0, c)?,
            wall_us,
        });
        sizes.push(SizeCheck {
            object: Object::Sk,
            a_s,
            l: 0,
            measured: sk.element_bytes().len() as u64,
            model: eval_size(Scheme::Proposed, Object::Sk, a_s, 0, 0, enc),
        });
    }

    let md = Metadata::new("congestion", "Bench", 1_700_000_000);
    for &l in l_values {
        let plan = compile_policy(&and_policy(l))?;
        let (ct, counted, wall_us) = timed(|| encrypt(&keys.pp, b"bench payload", &plan, b"kw", true, &md, &mut rng));
        let ct = ct?;
        timings.push(ModelCheck {
            op: Operation::Encrypt,
            a_s: 0,
            l,
            counted,
            expected: expected_counts(Operation::Encrypt, 0),
            predicted: c.time_of(&counted),
            model: eval_time(Scheme::Proposed, Operation::Encrypt, 0, l, c)?,
            wall_us,
        });
        sizes.push(SizeCheck {
            object: Object::Ct,
            a_s: 0,
            l,
            measured: ct.element_bytes().len() as u64,
            model: eval_size(Scheme::Proposed, Object::Ct, 0, l, 0, enc),
        });

        let bundle = decrypt_bundle(&keys, l, &ct, &mut rng)?;
        let (sk, bundle) = bundle;
        let (out, counted, wall_us) = timed(|| decrypt(&bundle, &sk));
        if out? != b"bench payload" {
            return Err(BenchError::Config("decrypt returned a different payload".into()));
        }
        timings.push(ModelCheck {
            op: Operation::Decrypt,
            a_s: l,
            l,
            counted,
            expected: expected_counts(Operation::Decrypt, l),
            predicted: c.time_of(&counted),
            model: eval_time(Scheme::Proposed, Operation::Decrypt, l, l, c)?,
            wall_us,
        });
    }
    Ok(ModelReport { timings, sizes })
}

fn decrypt_bundle<R: RngCore>(
    keys: &SystemKeys,
    l: u64,
    ct: &rccpabe_core::scheme::CiphertextRecord,
    rng: &mut R,
) -> Result<(rccpabe_core::scheme::SecretKey, rccpabe_core::scheme::SearchResult), BenchError> {
    let attrs: AttributeSet = attribute_labels(l).into_iter().collect();
    let sk = issue_key(keys, b"bench-reader", &attrs, rng)?;
    let pk = derive_shadow(&keys.pp, &sk);
    let td = trapdoor(&sk, b"kw", rng)?;
    let plan = find_reconstruction(&ct.policy, &pk.attrs());
    let bundle = search(&td, &pk, ct, plan.as_ref())?
        .ok_or_else(|| BenchError::Config("satisfying key failed to match".into()))?;
    Ok((sk, bundle))
}

/// One row of the Figure 7 (time) or Figure 8 (size) CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub scheme: Scheme,
    /// Operation or object name.
    pub item: &'static str,
    pub a_s: u64,
    pub l: u64,
    /// Milliseconds (time) or bytes (size), formatted exactly.
    pub model_value: String,
    /// Filled for the proposed scheme only.
    pub measured_value: Option<String>,
}

/// Computation-time comparison over `a_s_values` with `L = A_s`.
/// `measured` supplies counted-op predictions for the proposed rows.
pub fn figure7_rows(a_s_values: &[u64], c: &CostConstants, measured: Option<&ModelReport>) -> Vec<FigureRow> {
    let mut rows = Vec::new();
    for &a_s in a_s_values {
        for &scheme in &[Scheme::Proposed, Scheme::Zeng, Scheme::Zhao] {
            for &op in Operation::ALL {
                let model = eval_time(scheme, op, a_s, a_s, c).expect("compared schemes have every time formula");
                let measured_value = match (scheme, measured) {
                    (Scheme::Proposed, Some(rep)) => measured_time(rep, op, a_s).map(|m| m.to_string()),
                    _ => None,
                };
                rows.push(FigureRow { scheme, item: op.as_str(), a_s, l: a_s, model_value: model.to_string(), measured_value });
            }
        }
    }
    rows
}

fn measured_time(rep: &ModelReport, op: Operation, a_s: u64) -> Option<Micros> {
    let check = match op {
        Operation::KeyGen => rep.timing(op, a_s, 0),
        Operation::Encrypt => rep.timing(op, 0, a_s),
        Operation::Decrypt => rep.timing(op, a_s, a_s),
    };
    check.map(|c| c.predicted)
}

/// Storage comparison over `a_s_values` with `L = A_s` and universe size
/// `u_prime`.
pub fn figure8_rows(a_s_values: &[u64], u_prime: u64, c: &CostConstants, measured: Option<&ModelReport>) -> Vec<FigureRow> {
    let mut rows = Vec::new();
    for &a_s in a_s_values {
        for &scheme in Scheme::ALL {
            for &obj in Object::ALL {
                let model = eval_size(scheme, obj, a_s, a_s, u_prime, c);
                let measured_value = match (scheme, measured) {
                    (Scheme::Proposed, Some(rep)) => rep
                        .sizes
                        .iter()
                        .find(|s| {
                            s.object == obj
                                && match obj {
                                    Object::Pp => true,
                                    Object::Sk => s.a_s == a_s,
                                    Object::Ct => s.l == a_s,
                                }
                        })
                        .map(|s| s.measured.to_string()),
                    _ => None,
                };
                rows.push(FigureRow { scheme, item: obj.as_str(), a_s, l: a_s, model_value: model.to_string(), measured_value });
            }
        }
    }
    rows
}

/// A Figure 7 cell where the proposed model is not strictly below a baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingViolation {
    pub op: Operation,
    pub a_s: u64,
    pub baseline: Scheme,
    pub proposed: Micros,
    pub other: Micros,
}

/// Checks that the proposed model is strictly below Zeng and Zhao for every
/// operation and every `a_s` (with `L = A_s`).
pub fn time_orderings(a_s_values: &[u64], c: &CostConstants) -> Vec<OrderingViolation> {
    let mut out = Vec::new();
    for &a_s in a_s_values {
        for &op in Operation::ALL {
            let proposed = eval_time(Scheme::Proposed, op, a_s, a_s, c).expect("proposed formula");
            for &baseline in &[Scheme::Zeng, Scheme::Zhao] {
                let other = eval_time(baseline, op, a_s, a_s, c).expect("baseline formula");
                if proposed >= other {
                    out.push(OrderingViolation { op, a_s, baseline, proposed, other });
                }
            }
        }
    }
    out
}

/// Decryption-time reduction of the proposed model against `baseline`, in
/// percent.
pub fn decrypt_reduction_pct(baseline: Scheme, a_s: u64, c: &CostConstants) -> Result<f64, BenchError> {
    let p = eval_time(Scheme::Proposed, Operation::Decrypt, a_s, a_s, c)?.0 as f64;
    let b = eval_time(baseline, Operation::Decrypt, a_s, a_s, c)?.0 as f64;
    Ok(100.0 * (1.0 - p / b))
}

pub fn write_figure_csv<W: Write>(rows: &[FigureRow], w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "item", "a_s", "l", "model_value", "measured_value"])?;
    for r in rows {
        out.write_record([
            r.scheme.as_str(),
            r.item,
            &r.a_s.to_string(),
            &r.l.to_string(),
            &r.model_value,
            r.measured_value.as_deref().unwrap_or(""),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn median(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Host-measured per-operation constants: median over `reps` timed single
/// operations each. Element sizes are the fixed encodings.
pub fn host_constants(group: &GroupParams, reps: usize, seed: &[u8]) -> CostConstants {
    let reps = reps.max(1);
    let mut rng = rng_from_seed(seed);
    let g = group.g.clone();
    let gt = group.egg.clone();
    let mut sample = |f: &mut dyn FnMut(&rccpabe_core::pairing::Scalar)| {
        let times = (0..reps)
            .map(|_| {
                let k = random_nonzero(&mut rng);
                let t0 = Instant::now();
                f(&k);
                t0.elapsed().as_micros() as u64
            })
            .collect();
        Micros(median(times).max(1))
    };
    let t = sample(&mut |k| {
        std::hint::black_box(g.pow(k));
    });
    let t_t = sample(&mut |k| {
        std::hint::black_box(gt.pow(k));
    });
    let h = g.pow(&random_nonzero(&mut rng_from_seed(b"host-constants")));
    let t_p = sample(&mut |_| {
        std::hint::black_box(pairing(&g, &h));
    });
    CostConstants { t, t_t, t_p, ..CostConstants::default() }
}
