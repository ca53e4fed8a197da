//! Command-line workbench: encode codewords, simulate the channel, decode
//! trace files, run Monte Carlo sweeps, and self-test against the bundled
//! oracles.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::Rng;

use syndec::channel;
use syndec::harness::{
    self, builtin_code, format_trace_line, parse_trace_line, CodeConfig, DecoderKind,
    DecoderParams, ExperimentConfig,
};
use syndec::metric::DecodeContext;
use syndec::seeds::{self, Role};
use syndec::stack::{decode_bistack, decode_stack, BistackParams, StackParams};
use syndec::{bcjr, Error};

#[derive(Parser)]
#[command(
    name = "syndec",
    about = "Syndrome-trellis coding and joint multi-trace decoding over \
             insertion/deletion/substitution channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode information bits into a codeword.
    Encode {
        /// Code config: a bundled name (cc1, cc2, example1) or a TOML path.
        #[arg(long)]
        config: String,
        /// Information bits as a 01 string; omit to draw them from --seed.
        #[arg(long)]
        info: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Send codewords through the channel and dump received traces.
    Transmit {
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0.0)]
        pi: f64,
        #[arg(long, default_value_t = 0.0)]
        pd: f64,
        #[arg(long, default_value_t = 0.0)]
        ps: f64,
        /// Traces per codeword.
        #[arg(short = 'M', long, default_value_t = 1)]
        m: usize,
        /// Codewords to transmit (fresh random info bits per trial).
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Fixed information bits (01 string) used for every trial.
        #[arg(long)]
        info: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Decode a trace dump produced by `transmit`.
    Decode {
        #[arg(long)]
        config: String,
        #[arg(long, default_value = "stack")]
        decoder: String,
        #[arg(long, default_value_t = 0.0)]
        pi: f64,
        #[arg(long, default_value_t = 0.0)]
        pd: f64,
        #[arg(long, default_value_t = 0.0)]
        ps: f64,
        /// Trace dump file (`trial,trace,R,hex` lines).
        #[arg(long)]
        traces: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        capacity: Option<usize>,
        #[arg(long)]
        max_expansions: Option<u64>,
        /// Drift window slack; defaults to the channel-derived value.
        #[arg(long)]
        slack: Option<u32>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a Monte Carlo sweep from an experiment config.
    Sweep {
        /// Experiment TOML path.
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Override the decoder selection (repeatable).
        #[arg(long = "decoder")]
        decoders: Vec<String>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        format: Option<String>,
        /// Worker threads; results are independent of this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the built-in oracle suites.
    Selftest,
}

fn parse_bits(s: &str) -> Result<Vec<u8>, Error> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Config(format!("invalid bit character {c:?}"))),
        })
        .collect()
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn write_output(out: &Option<String>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            f.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Encode {
            config,
            info,
            seed,
            out,
        } => {
            let built = CodeConfig::load(&config)?.build()?;
            let k = built.trellis.num_info_bits();
            let u = match info {
                Some(s) => parse_bits(&s)?,
                None => {
                    let mut rng = seeds::stream(seed, Role::InfoBits, 0, 0);
                    (0..k).map(|_| rng.gen::<bool>() as u8).collect()
                }
            };
            let cw = built.trellis.encode(&u)?;
            write_output(&out, &format!("{}\n", bits_string(&cw.bits)))
        }
        Cmd::Transmit {
            config,
            pi,
            pd,
            ps,
            m,
            trials,
            info,
            seed,
            out,
        } => {
            let built = CodeConfig::load(&config)?.build()?;
            let spec = channel::ChannelSpec::new(pi, pd, ps)?;
            let k = built.trellis.num_info_bits();
            let fixed = info.map(|s| parse_bits(&s)).transpose()?;
            let mut text = String::new();
            for trial in 0..trials {
                let u = match &fixed {
                    Some(u) => u.clone(),
                    None => {
                        let mut rng = seeds::stream(seed, Role::InfoBits, trial, 0);
                        (0..k).map(|_| rng.gen::<bool>() as u8).collect()
                    }
                };
                let x = built.trellis.encode(&u)?.bits;
                let chan_seed = seeds::sub_seed(seed, Role::Channel, trial, 0);
                let traces = channel::transmit_multi(&x, &spec, m, chan_seed)?;
                for (j, tr) in traces.iter().enumerate() {
                    text.push_str(&format_trace_line(trial, j, &tr.bits));
                    text.push('\n');
                }
            }
            write_output(&out, &text)
        }
        Cmd::Decode {
            config,
            decoder,
            pi,
            pd,
            ps,
            traces,
            seed,
            capacity,
            max_expansions,
            slack,
            out,
        } => {
            let kind = DecoderKind::parse(&decoder)?;
            let built = CodeConfig::load(&config)?.build()?;
            let spec = channel::ChannelSpec::new(pi, pd, ps)?;
            let n = built.trellis.codeword_len();
            let slack =
                slack.unwrap_or_else(|| syndec::lattice::default_slack(n, &spec));
            let text = std::fs::read_to_string(&traces).map_err(|e| Error::Io {
                path: traces.clone(),
                source: e,
            })?;
            let mut groups: Vec<(u64, Vec<Vec<u8>>)> = Vec::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let (trial, _, bits) = parse_trace_line(line)?;
                match groups.last_mut() {
                    Some((t, g)) if *t == trial => g.push(bits),
                    _ => groups.push((trial, vec![bits])),
                }
            }
            if groups.is_empty() {
                return Err(Error::Config("trace file has no traces".into()));
            }
            let defaults = DecoderParams::default();
            let mut output = String::new();
            for (trial, bits_group) in &groups {
                let trs: Vec<channel::Trace> = bits_group
                    .iter()
                    .map(|b| channel::Trace { bits: b.clone() })
                    .collect();
                let mut rng = seeds::stream(seed, Role::ErasureFill, *trial, 0);
                let res = match kind {
                    DecoderKind::Stack => {
                        let ctx = DecodeContext::new(
                            &built.trellis,
                            &trs,
                            &spec,
                            &built.priors,
                            None,
                            slack,
                        )?;
                        let params = StackParams {
                            capacity: capacity.unwrap_or(defaults.capacity),
                            max_expansions: max_expansions
                                .unwrap_or(defaults.max_expansions),
                        };
                        decode_stack(&ctx, &params, &mut rng)
                    }
                    DecoderKind::Bistack => {
                        let ctx = DecodeContext::new(
                            &built.trellis,
                            &trs,
                            &spec,
                            &built.priors,
                            None,
                            slack,
                        )?;
                        let rev_traces: Vec<channel::Trace> = trs
                            .iter()
                            .map(|t| channel::Trace {
                                bits: t.bits.iter().rev().copied().collect(),
                            })
                            .collect();
                        let rev_priors: Vec<f64> =
                            built.priors.iter().rev().copied().collect();
                        let ctx_b = DecodeContext::new(
                            &built.trellis_rev,
                            &rev_traces,
                            &spec,
                            &rev_priors,
                            None,
                            slack,
                        )?;
                        let params = BistackParams {
                            capacity: capacity.unwrap_or(defaults.capacity),
                            total_expansions: max_expansions
                                .unwrap_or(defaults.max_expansions),
                            ..BistackParams::default()
                        };
                        decode_bistack(&ctx, &ctx_b, &built.h, &params, &mut rng)
                    }
                    DecoderKind::SepBcjr => bcjr::decode_separate_bcjr(
                        &built.trellis,
                        &trs,
                        &spec,
                        &built.priors,
                        None,
                        slack,
                    )?,
                };
                output.push_str(&format!(
                    "trial {trial}: info {} codeword {} erasure {} expansions {}\n",
                    bits_string(&res.info_bits),
                    bits_string(&res.codeword),
                    res.erasure,
                    res.expansions
                ));
            }
            write_output(&out, &output)
        }
        Cmd::Sweep {
            config,
            seed,
            trials,
            decoders,
            out,
            format,
            threads,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let base = Path::new(&config).parent().map(Path::to_path_buf);
            let (mut cfg, output) = ExperimentConfig::from_toml(&text, base.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                if t == 0 {
                    return Err(Error::Config("trials must be at least 1".into()));
                }
                cfg.trials = t;
            }
            if !decoders.is_empty() {
                cfg.decoders = decoders
                    .iter()
                    .map(|d| DecoderKind::parse(d))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            cfg.threads = threads;
            let rows = harness::run_sweep(&cfg)?;
            let format = format
                .or(output.format)
                .unwrap_or_else(|| "csv".to_string());
            match out.or(output.path) {
                Some(path) => harness::emit_results(&rows, &format, &path),
                None => {
                    match format.as_str() {
                        "csv" => print!("{}", harness::rows_to_csv(&rows)),
                        "json" => println!(
                            "{}",
                            serde_json::to_string_pretty(&rows)
                                .map_err(|e| Error::Config(format!("json: {e}")))?
                        ),
                        other => {
                            return Err(Error::Config(format!(
                                "unknown output format {other:?} (csv or json)"
                            )))
                        }
                    }
                    Ok(())
                }
            }
        }
        Cmd::Selftest => {
            harness::selftest()?;
            println!("selftest: all oracle suites passed");
            // Smoke-check the bundled configs resolve.
            for name in ["cc1", "cc2", "example1"] {
                assert!(builtin_code(name).is_some());
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::MalformedCode(_)
        | Error::InvalidRate { .. }
        | Error::InvalidLength(_)
        | Error::InvalidArgument(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error as well.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
