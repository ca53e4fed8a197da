//! Experiment orchestration: Monte Carlo sweeps over channel parameters,
//! BER/erasure/complexity statistics, reproducible seeding, and
//! machine-readable outputs.
//!
//! Trials are embarrassingly parallel; every random draw is a pure function
//! of `(master seed, role, trial, attempt)`, and per-trial results are
//! reduced in trial order, so the emitted rows are identical regardless of
//! thread count.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcjr;
use crate::channel::{self, ChannelSpec, Trace};
use crate::code::{
    build_trellis, expand_binary, parse_code_table, BinaryParityCheck, PolyParityCheck,
    SyndromeTrellis,
};
use crate::error::{Error, Result};
use crate::lattice::{build_drift_window, default_slack};
use crate::metric::DecodeContext;
use crate::seeds::{self, Role};
use crate::stack::{decode_bistack, decode_stack, BistackParams, StackParams};

// ---------------------------------------------------------------------------
// Code configuration
// ---------------------------------------------------------------------------

/// On-disk description of a terminated convolutional code. Either the
/// compact `columns` integer form or explicit per-column coefficient lists
/// (`coeffs[j][r]` = the `m + 1` coefficients of `D^0..D^m`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_bits: usize,
    #[serde(default)]
    pub columns: Option<Vec<u64>>,
    #[serde(default)]
    pub coeffs: Option<Vec<Vec<Vec<u8>>>>,
}

#[derive(Debug, Clone, Deserialize)]
struct CodeConfigFile {
    code: CodeConfig,
}

pub const CC1_TOML: &str = include_str!("../configs/cc1.toml");
pub const CC2_TOML: &str = include_str!("../configs/cc2.toml");
pub const EXAMPLE1_TOML: &str = include_str!("../configs/example1.toml");

/// Bundled config sources by name.
pub fn builtin_code(name: &str) -> Option<&'static str> {
    match name {
        "cc1" => Some(CC1_TOML),
        "cc2" => Some(CC2_TOML),
        "example1" => Some(EXAMPLE1_TOML),
        _ => None,
    }
}

impl CodeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: CodeConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("code config: {e}")))?;
        Ok(file.code)
    }

    /// Loads a builtin name or a TOML file path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(text) = builtin_code(name_or_path) {
            return Self::from_toml(text);
        }
        let text = std::fs::read_to_string(name_or_path).map_err(|e| Error::Io {
            path: name_or_path.to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn poly(&self) -> Result<PolyParityCheck> {
        match (&self.columns, &self.coeffs) {
            (Some(cols), None) => parse_code_table(cols, self.n, self.k, self.m),
            (None, Some(lists)) => {
                PolyParityCheck::from_coeff_lists(lists, self.n, self.k, self.m)
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "give either `columns` or `coeffs`, not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "code config needs `columns` or `coeffs`".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<BuiltCode> {
        let poly = self.poly()?;
        let h = expand_binary(&poly, self.n_bits)?;
        let h_rev = h.reversed();
        let trellis = build_trellis(&h)?;
        let trellis_rev = build_trellis(&h_rev)?;
        let priors = trellis.bit_priors();
        Ok(BuiltCode {
            h,
            h_rev,
            trellis,
            trellis_rev,
            priors,
            config: self.clone(),
        })
    }
}

/// A code with everything decoders need, built once and shared.
#[derive(Debug)]
pub struct BuiltCode {
    pub h: BinaryParityCheck,
    pub h_rev: BinaryParityCheck,
    pub trellis: SyndromeTrellis,
    pub trellis_rev: SyndromeTrellis,
    /// Code-domain `P(x_l = 1)` from the trellis forward pass.
    pub priors: Vec<f64>,
    pub config: CodeConfig,
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderKind {
    Stack,
    Bistack,
    SepBcjr,
}

impl DecoderKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stack" => Ok(Self::Stack),
            "bistack" | "bi-stack" => Ok(Self::Bistack),
            "sep-bcjr" | "bcjr" => Ok(Self::SepBcjr),
            _ => Err(Error::Config(format!(
                "unknown decoder {s:?} (expected stack, bistack, or sep-bcjr)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Stack => "stack",
            Self::Bistack => "bistack",
            Self::SepBcjr => "sep-bcjr",
        }
    }
}

/// Decoder knobs shared by a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderParams {
    pub capacity: usize,
    pub max_expansions: u64,
    /// Bidirectional per-direction caps; `None` halves the total budget.
    pub forward_cap: Option<u64>,
    pub backward_cap: Option<u64>,
    /// Replace the trellis bit priors by the uniform 1/2 approximation.
    pub uniform_priors: bool,
    /// Drift window slack; `None` uses `ceil(4 sqrt(N (P_i + P_d))) + 1`.
    pub window_slack: Option<u32>,
    pub visited_limit: usize,
}

impl Default for DecoderParams {
    fn default() -> Self {
        Self {
            capacity: 300_000,
            max_expansions: 400_000,
            forward_cap: None,
            backward_cap: None,
            uniform_priors: false,
            window_slack: None,
            visited_limit: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub code: CodeConfig,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub decoders: Vec<DecoderKind>,
    pub offset: bool,
    /// Channel grid points as `(P_i, P_d, P_s)`.
    pub points: Vec<(f64, f64, f64)>,
    pub params: DecoderParams,
    pub threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct SweepFile {
    experiment: SweepExperiment,
    #[serde(default)]
    decoder: SweepDecoder,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
struct SweepExperiment {
    code: String,
    #[serde(rename = "M", default = "default_m")]
    m: usize,
    trials: u64,
    #[serde(default)]
    seed: u64,
    decoders: Vec<String>,
    #[serde(default = "default_true")]
    offset: bool,
    #[serde(default)]
    pi: Vec<f64>,
    #[serde(default)]
    pd: Vec<f64>,
    #[serde(default)]
    ps: Vec<f64>,
    #[serde(default)]
    points: Option<Vec<[f64; 3]>>,
}

fn default_m() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
struct SweepDecoder {
    capacity: Option<usize>,
    max_expansions: Option<u64>,
    forward_cap: Option<u64>,
    backward_cap: Option<u64>,
    #[serde(default)]
    uniform_priors: bool,
    window_slack: Option<u32>,
    visited_limit: Option<usize>,
}

/// `[output]` section of a sweep file.
#[derive(Debug, Default, Clone, Deserialize)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<String>,
}

impl ExperimentConfig {
    /// Parses a sweep TOML; relative code paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<(Self, OutputSection)> {
        let file: SweepFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("sweep config: {e}")))?;
        let e = file.experiment;
        if e.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if e.m == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        let code_ref = if builtin_code(&e.code).is_some() {
            e.code.clone()
        } else {
            let p = Path::new(&e.code);
            if p.is_relative() {
                base.map(|b| b.join(p).to_string_lossy().into_owned())
                    .unwrap_or_else(|| e.code.clone())
            } else {
                e.code.clone()
            }
        };
        let code = CodeConfig::load(&code_ref)?;
        let decoders = e
            .decoders
            .iter()
            .map(|s| DecoderKind::parse(s))
            .collect::<Result<Vec<_>>>()?;
        if decoders.is_empty() {
            return Err(Error::Config("select at least one decoder".into()));
        }
        let points: Vec<(f64, f64, f64)> = match e.points {
            Some(pts) => pts.iter().map(|p| (p[0], p[1], p[2])).collect(),
            None => {
                let pi = if e.pi.is_empty() { vec![0.0] } else { e.pi };
                let pd = if e.pd.is_empty() { vec![0.0] } else { e.pd };
                let ps = if e.ps.is_empty() { vec![0.0] } else { e.ps };
                let mut out = Vec::new();
                for &a in &pi {
                    for &b in &pd {
                        for &c in &ps {
                            out.push((a, b, c));
                        }
                    }
                }
                out
            }
        };
        if points.is_empty() {
            return Err(Error::Config("empty channel grid".into()));
        }
        let d = file.decoder;
        let defaults = DecoderParams::default();
        let params = DecoderParams {
            capacity: d.capacity.unwrap_or(defaults.capacity),
            max_expansions: d.max_expansions.unwrap_or(defaults.max_expansions),
            forward_cap: d.forward_cap,
            backward_cap: d.backward_cap,
            uniform_priors: d.uniform_priors,
            window_slack: d.window_slack,
            visited_limit: d.visited_limit.unwrap_or(defaults.visited_limit),
        };
        Ok((
            Self {
                code,
                m: e.m,
                trials: e.trials,
                seed: e.seed,
                decoders,
                offset: e.offset,
                points,
                params,
                threads: None,
            },
            file.output,
        ))
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// One emitted statistics row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub decoder: String,
    pub pi: f64,
    pub pd: f64,
    pub ps: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: u64,
    pub ber_info: f64,
    pub ber_code: f64,
    pub erasure_rate: f64,
    pub f_av: f64,
    pub b_tr: u64,
    pub nu: f64,
    pub rejected: u64,
    pub seconds: f64,
}

pub const CSV_HEADER: &str =
    "decoder,pi,pd,ps,M,trials,ber_info,ber_code,erasure_rate,f_av,b_tr,nu,rejected,seconds";

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.decoder,
            r.pi,
            r.pd,
            r.ps,
            r.m,
            r.trials,
            r.ber_info,
            r.ber_code,
            r.erasure_rate,
            r.f_av,
            r.b_tr,
            r.nu,
            r.rejected,
            r.seconds
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected CSV header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::Config(format!("bad CSV row: {line}")));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse()
                .map_err(|_| Error::Config(format!("bad number {:?}", f[i])))
        };
        rows.push(ResultRow {
            decoder: f[0].to_string(),
            pi: num(1)?,
            pd: num(2)?,
            ps: num(3)?,
            m: num(4)? as usize,
            trials: num(5)? as u64,
            ber_info: num(6)?,
            ber_code: num(7)?,
            erasure_rate: num(8)?,
            f_av: num(9)?,
            b_tr: num(10)? as u64,
            nu: num(11)?,
            rejected: num(12)? as u64,
            seconds: num(13)?,
        });
    }
    Ok(rows)
}

/// Writes rows as CSV or JSON.
pub fn emit_results(rows: &[ResultRow], format: &str, path: &str) -> Result<()> {
    let bytes = match format {
        "csv" => rows_to_csv(rows).into_bytes(),
        "json" => serde_json::to_vec_pretty(rows)
            .map_err(|e| Error::Config(format!("json: {e}")))?,
        other => {
            return Err(Error::Config(format!(
                "unknown output format {other:?} (csv or json)"
            )))
        }
    };
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })?;
    f.write_all(&bytes).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })
}

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct DecoderTally {
    info_errors: u64,
    code_errors: u64,
    erasures: u64,
    expansions: u128,
    decode_nanos: u128,
}

#[derive(Debug, Clone)]
struct TrialRecord {
    per_decoder: Vec<DecoderTally>,
    rejected: u64,
}

/// Shared state for one grid point.
pub struct PointRunner<'a> {
    pub built: &'a BuiltCode,
    pub spec: ChannelSpec<f64>,
    pub m: usize,
    pub decoders: &'a [DecoderKind],
    pub params: &'a DecoderParams,
    pub master: u64,
    pub offset: bool,
    pub slack: u32,
    /// Code-domain priors handed to metrics and posterior combining.
    pub priors: Vec<f64>,
}

const MAX_ATTEMPTS: u64 = 1000;

impl<'a> PointRunner<'a> {
    pub fn new(
        built: &'a BuiltCode,
        spec: ChannelSpec<f64>,
        m: usize,
        decoders: &'a [DecoderKind],
        params: &'a DecoderParams,
        master: u64,
        offset: bool,
    ) -> Self {
        let n = built.trellis.codeword_len();
        let slack = params.window_slack.unwrap_or_else(|| default_slack(n, &spec));
        let priors = if params.uniform_priors {
            vec![0.5; n]
        } else {
            built.priors.clone()
        };
        Self {
            built,
            spec,
            m,
            decoders,
            params,
            master,
            offset,
            slack,
            priors,
        }
    }

    fn run_trial(&self, trial: u64) -> Result<TrialRecord> {
        let n = self.built.trellis.codeword_len();
        let k = self.built.trellis.num_info_bits();
        let mut rejected = 0u64;
        'attempt: for attempt in 0..MAX_ATTEMPTS {
            let mut rng_info = seeds::stream(self.master, Role::InfoBits, trial, attempt);
            let u: Vec<u8> = (0..k).map(|_| rng_info.gen::<bool>() as u8).collect();
            let x = self.built.trellis.encode(&u)?.bits;
            let offset: Option<Vec<u8>> = self.offset.then(|| {
                let mut rng = seeds::stream(self.master, Role::Offset, trial, attempt);
                channel::gen_offset(n, &mut rng)
            });
            let tx = match &offset {
                Some(o) => channel::apply_offset(&x, o)?,
                None => x.clone(),
            };
            let chan_seed = seeds::sub_seed(self.master, Role::Channel, trial, attempt);
            let traces = channel::transmit_multi(&tx, &self.spec, self.m, chan_seed)?;

            match self.decode_all(&x, &traces, offset.as_deref(), trial, attempt) {
                Ok(per_decoder) => {
                    return Ok(TrialRecord {
                        per_decoder,
                        rejected,
                    })
                }
                Err(Error::UndecodableTrace(_)) => {
                    rejected += 1;
                    continue 'attempt;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::InvalidArgument(format!(
            "trial {trial}: {MAX_ATTEMPTS} consecutive undecodable draws"
        )))
    }

    fn decode_all(
        &self,
        x: &[u8],
        traces: &[Trace],
        offset: Option<&[u8]>,
        trial: u64,
        attempt: u64,
    ) -> Result<Vec<DecoderTally>> {
        let needs_fwd = self
            .decoders
            .iter()
            .any(|d| matches!(d, DecoderKind::Stack | DecoderKind::Bistack));
        let needs_bwd = self.decoders.contains(&DecoderKind::Bistack);

        let ctx_fwd: Option<DecodeContext<'_, f64>> = if needs_fwd {
            Some(DecodeContext::new(
                &self.built.trellis,
                traces,
                &self.spec,
                &self.priors,
                offset,
                self.slack,
            )?)
        } else {
            None
        };
        let rev_traces: Vec<Trace>;
        let rev_priors: Vec<f64>;
        let rev_offset: Option<Vec<u8>>;
        let ctx_bwd: Option<DecodeContext<'_, f64>> = if needs_bwd {
            rev_traces = traces
                .iter()
                .map(|t| Trace {
                    bits: t.bits.iter().rev().copied().collect(),
                })
                .collect();
            rev_priors = self.priors.iter().rev().copied().collect();
            rev_offset = offset.map(|o| o.iter().rev().copied().collect());
            Some(DecodeContext::new(
                &self.built.trellis_rev,
                &rev_traces,
                &self.spec,
                &rev_priors,
                rev_offset.as_deref(),
                self.slack,
            )?)
        } else {
            None
        };

        let mut out = Vec::with_capacity(self.decoders.len());
        for (slot, kind) in self.decoders.iter().enumerate() {
            let mut rng = seeds::stream(
                self.master,
                Role::ErasureFill,
                trial,
                attempt * 8 + slot as u64,
            );
            let res = match kind {
                DecoderKind::Stack => {
                    let params = StackParams {
                        capacity: self.params.capacity,
                        max_expansions: self.params.max_expansions,
                    };
                    decode_stack(ctx_fwd.as_ref().unwrap(), &params, &mut rng)
                }
                DecoderKind::Bistack => {
                    let params = BistackParams {
                        capacity: self.params.capacity,
                        total_expansions: self.params.max_expansions,
                        forward_cap: self.params.forward_cap,
                        backward_cap: self.params.backward_cap,
                        visited_limit: self.params.visited_limit,
                    };
                    decode_bistack(
                        ctx_fwd.as_ref().unwrap(),
                        ctx_bwd.as_ref().unwrap(),
                        &self.built.h,
                        &params,
                        &mut rng,
                    )
                }
                DecoderKind::SepBcjr => bcjr::decode_separate_bcjr(
                    &self.built.trellis,
                    traces,
                    &self.spec,
                    &self.priors,
                    offset,
                    self.slack,
                )?,
            };
            let info_levels = self.built.trellis.info_levels();
            let info_errors = info_levels
                .iter()
                .filter(|&&l| res.codeword[l] != x[l])
                .count() as u64;
            let code_errors = res
                .codeword
                .iter()
                .zip(x)
                .filter(|(a, b)| a != b)
                .count() as u64;
            out.push(DecoderTally {
                info_errors,
                code_errors,
                erasures: res.erasure as u64,
                expansions: res.expansions as u128,
                decode_nanos: res.elapsed.as_nanos(),
            });
        }
        Ok(out)
    }
}

/// Deterministic reference received length for the complexity baseline:
/// the median over 1001 simulated transmissions.
pub fn median_received_len(
    built: &BuiltCode,
    spec: &ChannelSpec<f64>,
    master: u64,
    point_index: u64,
) -> usize {
    let n = built.trellis.codeword_len();
    let x = vec![0u8; n];
    let mut lens: Vec<usize> = (0..1001u64)
        .map(|s| {
            let mut rng = seeds::stream(master, Role::Oracle, point_index, s);
            channel::transmit(&x, spec, &mut rng).len()
        })
        .collect();
    lens.sort_unstable();
    lens[lens.len() / 2]
}

/// Runs every selected decoder over `trials` codewords at one channel
/// point, on identical traces, and returns one row per decoder.
pub fn run_point(
    cfg: &ExperimentConfig,
    built: &BuiltCode,
    point_index: u64,
    point: (f64, f64, f64),
) -> Result<Vec<ResultRow>> {
    let (pi, pd, ps) = point;
    let spec = ChannelSpec::new(pi, pd, ps)?;
    let runner = PointRunner::new(
        built,
        spec,
        cfg.m,
        &cfg.decoders,
        &cfg.params,
        cfg.seed,
        cfg.offset,
    );
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| runner.run_trial(trial))
        .collect::<Result<Vec<_>>>()?;

    let r_med = median_received_len(built, &spec, cfg.seed, point_index);
    let window = build_drift_window(built.trellis.codeword_len(), r_med, runner.slack)?;
    let b_tr = bcjr::count_branches(&built.trellis, &window);

    let k = built.trellis.num_info_bits() as f64;
    let n = built.trellis.codeword_len() as f64;
    let trials = cfg.trials as f64;
    let rejected: u64 = records.iter().map(|r| r.rejected).sum();

    let mut rows = Vec::with_capacity(cfg.decoders.len());
    for (slot, kind) in cfg.decoders.iter().enumerate() {
        let mut tally = DecoderTally::default();
        for rec in &records {
            let t = &rec.per_decoder[slot];
            tally.info_errors += t.info_errors;
            tally.code_errors += t.code_errors;
            tally.erasures += t.erasures;
            tally.expansions += t.expansions;
            tally.decode_nanos += t.decode_nanos;
        }
        let f_av = match kind {
            DecoderKind::SepBcjr => cfg.m as f64 * b_tr as f64,
            _ => tally.expansions as f64 / trials,
        };
        rows.push(ResultRow {
            decoder: kind.name().to_string(),
            pi,
            pd,
            ps,
            m: cfg.m,
            trials: cfg.trials,
            ber_info: tally.info_errors as f64 / (trials * k),
            ber_code: tally.code_errors as f64 / (trials * n),
            erasure_rate: tally.erasures as f64 / trials,
            f_av,
            b_tr,
            nu: cfg.m as f64 * b_tr as f64 / f_av,
            rejected,
            seconds: tally.decode_nanos as f64 * 1e-9,
        });
    }
    Ok(rows)
}

/// Runs the whole sweep; honors `cfg.threads` through a scoped pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let built = cfg.code.build()?;
    let run = || -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for (i, &point) in cfg.points.iter().enumerate() {
            rows.extend(run_point(cfg, &built, i as u64, point)?);
        }
        Ok(rows)
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

// ---------------------------------------------------------------------------
// Trace dump format
// ---------------------------------------------------------------------------

/// `trial_id, trace_id, R, hex-packed bits`
pub fn format_trace_line(trial: u64, trace_id: usize, bits: &[u8]) -> String {
    format!(
        "{},{},{},{}",
        trial,
        trace_id,
        bits.len(),
        crate::bits::bits_to_hex(bits)
    )
}

pub fn parse_trace_line(line: &str) -> Result<(u64, usize, Vec<u8>)> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!("bad trace line: {line}")));
    }
    let trial: u64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("bad trial id {:?}", parts[0])))?;
    let trace_id: usize = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad trace id {:?}", parts[1])))?;
    let r: usize = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad length {:?}", parts[2])))?;
    let bits = crate::bits::hex_to_bits(parts[3], r)
        .ok_or_else(|| Error::Config(format!("bad hex payload {:?}", parts[3])))?;
    Ok((trial, trace_id, bits))
}

// ---------------------------------------------------------------------------
// Built-in self test
// ---------------------------------------------------------------------------

/// Quick oracle checks used by the `selftest` CLI subcommand.
pub fn selftest() -> Result<()> {
    // Golden encode on the bundled toy code.
    let built = CodeConfig::load("example1")?.build()?;
    let cw = built.trellis.encode(&[1, 0, 1, 1])?;
    if cw.bits != vec![1, 0, 1, 1, 1, 0, 0, 1, 1] {
        return Err(Error::InvalidArgument("golden encode mismatch".into()));
    }
    if built.trellis.info_levels() != [0, 1, 3, 4] {
        return Err(Error::InvalidArgument("level classes mismatch".into()));
    }

    // Lattice vs brute force on a small random problem.
    let spec = ChannelSpec::new(0.04, 0.06, 0.02)?;
    let consts = crate::lattice::BranchConsts::new(&spec);
    for seed in 0..20u64 {
        let mut rng = seeds::stream(7, Role::Oracle, seed, 0);
        let n = 6usize;
        let x: Vec<u8> = (0..n).map(|_| rng.gen::<bool>() as u8).collect();
        let y = channel::transmit(&x, &spec, &mut rng).bits;
        let w = build_drift_window(n, y.len(), (n + y.len()) as u32)?;
        let p1 = vec![0.5f64; n];
        let f = crate::lattice::prefix_lattice(&y, n, &p1, &w, &consts);
        let lattice_total = f.get(n, y.len() as i64).exp();
        let brute = crate::oracle::marginal_receive_prob(n, &y, &p1, &spec);
        if (lattice_total - brute).abs() > 1e-12 * brute.max(1e-300) {
            return Err(Error::InvalidArgument(format!(
                "lattice oracle mismatch: {lattice_total} vs {brute}"
            )));
        }
    }

    // BCJR vs codeword-weighted enumeration.
    let words = built.trellis.all_codewords();
    for seed in 0..10u64 {
        let x = &words[(seed as usize * 7) % words.len()];
        let traces = channel::transmit_multi(x, &spec, 1, seed)?;
        let y = &traces[0].bits;
        let w = match build_drift_window(9, y.len(), 7) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let run = bcjr::bcjr_posteriors(&built.trellis, y, &spec, &w, None)?;
        let oracle = crate::oracle::codeword_posteriors(&words, y, &spec, &w, None)
            .ok_or_else(|| Error::InvalidArgument("oracle returned no mass".into()))?;
        for l in 0..9 {
            let d = (run.posterior_p1[l] - oracle[l]).abs();
            if d > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "bcjr oracle mismatch at level {l}: {d}"
                )));
            }
        }
    }

    // Deterministic mini sweep.
    let (cfg, _) = ExperimentConfig::from_toml(
        r#"
        [experiment]
        code = "example1"
        M = 2
        trials = 50
        seed = 9
        decoders = ["stack", "bistack", "sep-bcjr"]
        pi = [0.01]
        pd = [0.02]
        ps = [0.0]
        "#,
        None,
    )?;
    let a = run_sweep(&cfg)?;
    let b = run_sweep(&cfg)?;
    for (x, y) in a.iter().zip(&b) {
        let (mut x, mut y) = (x.clone(), y.clone());
        x.seconds = 0.0;
        y.seconds = 0.0;
        if x != y {
            return Err(Error::InvalidArgument("sweep determinism failure".into()));
        }
    }
    Ok(())
}
