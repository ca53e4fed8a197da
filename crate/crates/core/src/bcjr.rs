//! Separate-BCJR baseline: per-trace symbol-wise MAP over the joint
//! syndrome-trellis-times-drift state space, posterior combination across
//! traces, and a hard decision per level.
//!
//! The forward/backward recursions run in the linear domain with per-level
//! normalization; the normalization constants are retained in log form so
//! totals and the alpha/beta duality invariant stay exact. This is
//! numerically equivalent to a log-domain implementation and much faster
//! inside the Monte Carlo loops.

use crate::channel::{ChannelSpec, Trace};
use crate::code::{LevelClass, SyndromeTrellis};
use crate::error::{Error, Result};
use crate::lattice::{build_drift_window, BranchConsts, DriftWindow};
use crate::real::Real;
use crate::stack::DecodeResult;

/// Number of admissible branches of the single-trace joint trellis:
/// `(state, edge, drift, drift increment)` tuples allowed by the window.
pub fn count_branches(trellis: &SyndromeTrellis, window: &DriftWindow) -> u64 {
    let n = trellis.codeword_len();
    let mut total = 0u64;
    for t in 0..n {
        let lvl = trellis.level(t);
        let edges: u64 = lvl
            .edges
            .iter()
            .map(|e| e.iter().flatten().count() as u64)
            .sum();
        let mut drift_pairs = 0u64;
        for d in window.d_min(t)..=window.d_max(t) {
            for dd in -1..=1 {
                if window.contains(t + 1, d + dd) {
                    drift_pairs += 1;
                }
            }
        }
        total += edges * drift_pairs;
    }
    total
}

/// One BCJR pass over a single trace.
#[derive(Debug, Clone)]
pub struct BcjrRun<T: Real> {
    /// Per level, `P(x_l = 1 | y)` over the code-domain edge label.
    pub posterior_p1: Vec<T>,
    /// Branches visited (admissible tuples), i.e. metric computations.
    pub branches: u64,
    /// `log P(y)` under the windowed model (up to the trellis prior).
    pub log_likelihood: T,
    /// `log sum_s alpha_t(s) beta_t(s)` per level; constant iff the
    /// recursions are consistent.
    pub duality_log_totals: Vec<T>,
}

struct Tables<T> {
    /// `values[t][state * width + (d - d_min)]`
    values: Vec<Vec<T>>,
    log_scale: Vec<T>,
}

/// Symbol-wise posteriors for one received trace.
///
/// `p1_code` are ignored here (the trellis structure encodes the prior);
/// the transition weight is 1/2 at information levels and 1 at parity
/// levels, so paths are weighted by `2^-K` exactly.
pub fn bcjr_posteriors<T: Real>(
    trellis: &SyndromeTrellis,
    y: &[u8],
    spec: &ChannelSpec<T>,
    window: &DriftWindow,
    tx_offset: Option<&[u8]>,
) -> Result<BcjrRun<T>> {
    let n = trellis.codeword_len();
    let r_len = y.len() as i64;
    let consts = BranchConsts::new(spec);
    let mut c0 = [[T::zero(); 2]; 2];
    let mut c1 = [[T::zero(); 2]; 2];
    for yb in 0..2 {
        for x in 0..2 {
            c0[yb][x] = consts.lin_c0(yb as u8, x as u8);
            c1[yb][x] = consts.lin_c1(yb as u8, x as u8);
        }
    }
    let c_del = consts.lin_del();
    let half = T::of(0.5);
    let zeros = vec![0u8; n];
    let offset = tx_offset.unwrap_or(&zeros);

    let width = |t: usize| window.width(t);
    let dmin = |t: usize| window.d_min(t) as i64;

    // Forward pass.
    let mut alpha = Tables {
        values: (0..=n)
            .map(|t| vec![T::zero(); trellis.num_states(t) * width(t)])
            .collect(),
        log_scale: vec![T::zero(); n + 1],
    };
    alpha.values[0][0 - 0] = T::one();
    debug_assert_eq!(window.d_min(0), 0);
    for t in 0..n {
        let lvl = trellis.level(t);
        let w_t = width(t);
        let w_n = width(t + 1);
        let trans = if trellis.classes()[t] == LevelClass::Information {
            half
        } else {
            T::one()
        };
        let (cur, rest) = alpha.values.split_at_mut(t + 1);
        let cur = &cur[t];
        let next = &mut rest[0];
        for (si, edges) in lvl.edges.iter().enumerate() {
            for d_idx in 0..w_t {
                let a = cur[si * w_t + d_idx];
                if a == T::zero() {
                    continue;
                }
                let d = dmin(t) + d_idx as i64;
                let r = t as i64 + d;
                for (b, edge) in edges.iter().enumerate() {
                    let Some(ni) = edge else { continue };
                    let tx = (b as u8 ^ offset[t]) as usize;
                    let base = a * trans;
                    let ni = *ni as usize;
                    for dd in -1i64..=1 {
                        let d_new = d + dd;
                        if d_new < dmin(t + 1)
                            || d_new > window.d_max(t + 1) as i64
                        {
                            continue;
                        }
                        let weight = match dd {
                            -1 => c_del,
                            0 => c0[y[r as usize] as usize][tx],
                            _ => c1[y[(r + 1) as usize] as usize][tx],
                        };
                        next[ni * w_n + (d_new - dmin(t + 1)) as usize] += base * weight;
                    }
                }
            }
        }
        let norm: T = next.iter().copied().sum();
        if norm == T::zero() {
            return Err(Error::UndecodableTrace(format!(
                "forward recursion died at level {}",
                t + 1
            )));
        }
        for v in next.iter_mut() {
            *v /= norm;
        }
        alpha.log_scale[t + 1] = alpha.log_scale[t] + norm.ln();
    }

    // Backward pass.
    let mut beta = Tables {
        values: (0..=n)
            .map(|t| vec![T::zero(); trellis.num_states(t) * width(t)])
            .collect(),
        log_scale: vec![T::zero(); n + 1],
    };
    let d_net = r_len - n as i64;
    debug_assert_eq!(window.d_min(n) as i64, d_net);
    beta.values[n][(d_net - dmin(n)) as usize] = T::one();
    for t in (0..n).rev() {
        let lvl = trellis.level(t);
        let w_t = width(t);
        let w_n = width(t + 1);
        let trans = if trellis.classes()[t] == LevelClass::Information {
            half
        } else {
            T::one()
        };
        let (cur, rest) = beta.values.split_at_mut(t + 1);
        let cur = &mut cur[t];
        let next = &rest[0];
        for (si, edges) in lvl.edges.iter().enumerate() {
            for d_idx in 0..w_t {
                let d = dmin(t) + d_idx as i64;
                let r = t as i64 + d;
                let mut acc = T::zero();
                for (b, edge) in edges.iter().enumerate() {
                    let Some(ni) = edge else { continue };
                    let tx = (b as u8 ^ offset[t]) as usize;
                    let ni = *ni as usize;
                    for dd in -1i64..=1 {
                        let d_new = d + dd;
                        if d_new < dmin(t + 1)
                            || d_new > window.d_max(t + 1) as i64
                        {
                            continue;
                        }
                        let weight = match dd {
                            -1 => c_del,
                            0 => c0[y[r as usize] as usize][tx],
                            _ => c1[y[(r + 1) as usize] as usize][tx],
                        };
                        acc += trans * weight * next[ni * w_n + (d_new - dmin(t + 1)) as usize];
                    }
                }
                cur[si * w_t + d_idx] = acc;
            }
        }
        let norm: T = cur.iter().copied().sum();
        if norm == T::zero() {
            return Err(Error::UndecodableTrace(format!(
                "backward recursion died at level {t}"
            )));
        }
        for v in cur.iter_mut() {
            *v /= norm;
        }
        beta.log_scale[t] = beta.log_scale[t + 1] + norm.ln();
    }

    // Posteriors and duality totals.
    let mut posterior_p1 = Vec::with_capacity(n);
    for t in 0..n {
        let lvl = trellis.level(t);
        let w_t = width(t);
        let w_n = width(t + 1);
        let trans = if trellis.classes()[t] == LevelClass::Information {
            half
        } else {
            T::one()
        };
        let mut acc = [T::zero(); 2];
        for (si, edges) in lvl.edges.iter().enumerate() {
            for d_idx in 0..w_t {
                let a = alpha.values[t][si * w_t + d_idx];
                if a == T::zero() {
                    continue;
                }
                let d = dmin(t) + d_idx as i64;
                let r = t as i64 + d;
                for (b, edge) in edges.iter().enumerate() {
                    let Some(ni) = edge else { continue };
                    let tx = (b as u8 ^ offset[t]) as usize;
                    let ni = *ni as usize;
                    for dd in -1i64..=1 {
                        let d_new = d + dd;
                        if d_new < dmin(t + 1)
                            || d_new > window.d_max(t + 1) as i64
                        {
                            continue;
                        }
                        let weight = match dd {
                            -1 => c_del,
                            0 => c0[y[r as usize] as usize][tx],
                            _ => c1[y[(r + 1) as usize] as usize][tx],
                        };
                        acc[b] += a
                            * trans
                            * weight
                            * beta.values[t + 1][ni * w_n + (d_new - dmin(t + 1)) as usize];
                    }
                }
            }
        }
        let total = acc[0] + acc[1];
        if total == T::zero() {
            return Err(Error::UndecodableTrace(format!(
                "no admissible branch at level {t}"
            )));
        }
        posterior_p1.push(acc[1] / total);
    }

    let duality_log_totals = (0..=n)
        .map(|t| {
            let s: T = alpha.values[t]
                .iter()
                .zip(&beta.values[t])
                .map(|(&a, &b)| a * b)
                .sum();
            s.ln() + alpha.log_scale[t] + beta.log_scale[t]
        })
        .collect();

    Ok(BcjrRun {
        posterior_p1,
        branches: count_branches(trellis, window),
        log_likelihood: alpha.log_scale[n],
        duality_log_totals,
    })
}

/// Combines per-trace posteriors: `prod_j P(x_l | y_j) / P(x_l)^(M-1)`,
/// evaluated in the log domain. Levels with a deterministic prior keep the
/// forced value; a zero prior facing opposite evidence is an error.
pub fn combine_posteriors<T: Real>(per_trace_p1: &[Vec<T>], prior_p1: &[T]) -> Result<Vec<T>> {
    let m = per_trace_p1.len();
    if m == 0 {
        return Err(Error::InvalidArgument("no posteriors to combine".into()));
    }
    let n = prior_p1.len();
    let eps = T::of(1e-9);
    let mut out = Vec::with_capacity(n);
    for l in 0..n {
        let p1 = prior_p1[l];
        let p0 = T::one() - p1;
        if p1 <= T::zero() || p1 >= T::one() {
            let forced = if p1 >= T::one() { T::one() } else { T::zero() };
            for q in per_trace_p1 {
                let evidence_against = if forced == T::one() {
                    T::one() - q[l]
                } else {
                    q[l]
                };
                if evidence_against > eps {
                    return Err(Error::Consistency(format!(
                        "level {l}: prior forces {forced} but a trace disagrees"
                    )));
                }
            }
            out.push(forced);
            continue;
        }
        let mut log1 = -(T::of((m - 1) as f64)) * p1.ln();
        let mut log0 = -(T::of((m - 1) as f64)) * p0.ln();
        for q in per_trace_p1 {
            log1 += q[l].ln();
            log0 += (T::one() - q[l]).ln();
        }
        let combined = if log1 == T::neg_infinity() {
            T::zero()
        } else if log0 == T::neg_infinity() {
            T::one()
        } else {
            // sigmoid(log1 - log0)
            T::one() / (T::one() + (log0 - log1).exp())
        };
        out.push(combined);
    }
    Ok(out)
}

/// Runs the separate-BCJR decoder: per-trace posteriors, combination, and a
/// per-level hard decision (1 iff `P(x_l = 1) > 1/2`, ties to 0). The
/// output word is not necessarily a codeword.
pub fn decode_separate_bcjr<T: Real>(
    trellis: &SyndromeTrellis,
    traces: &[Trace],
    spec: &ChannelSpec<T>,
    prior_p1: &[T],
    tx_offset: Option<&[u8]>,
    slack: u32,
) -> Result<DecodeResult> {
    let t0 = std::time::Instant::now();
    let n = trellis.codeword_len();
    let mut per_trace = Vec::with_capacity(traces.len());
    let mut branches = 0u64;
    for tr in traces {
        let window = build_drift_window(n, tr.len(), slack)?;
        let run = bcjr_posteriors(trellis, &tr.bits, spec, &window, tx_offset)?;
        branches += run.branches;
        per_trace.push(run.posterior_p1);
    }
    let combined = combine_posteriors(&per_trace, prior_p1)?;
    let half = T::of(0.5);
    let codeword: Vec<u8> = combined.iter().map(|&p| (p > half) as u8).collect();
    Ok(DecodeResult {
        info_bits: trellis.extract_info_bits(&codeword),
        codeword,
        erasure: false,
        expansions: branches,
        inserted: 0,
        evicted: 0,
        merge_level: None,
        elapsed: t0.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit_multi, ChannelSpec, Trace};
    use crate::code::{build_trellis, expand_binary, parse_code_table, SyndromeTrellis};
    use approx::assert_relative_eq;

    fn example1_trellis() -> SyndromeTrellis {
        let p = parse_code_table(&[6, 5, 7], 3, 2, 2).unwrap();
        build_trellis(&expand_binary(&p, 9).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_posteriors_are_certain() {
        let t = example1_trellis();
        let spec = ChannelSpec::new(0.0, 0.0, 0.0).unwrap();
        let x = t.encode(&[1, 0, 1, 1]).unwrap().bits;
        let w = build_drift_window(9, 9, 0).unwrap();
        let run = bcjr_posteriors(&t, &x, &spec, &w, None).unwrap();
        for (l, &p) in run.posterior_p1.iter().enumerate() {
            let expect = x[l] as f64;
            assert_relative_eq!(p, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn posteriors_match_exhaustive_codeword_weighting() {
        let t = example1_trellis();
        let words = t.all_codewords();
        let spec = ChannelSpec::new(0.05, 0.07, 0.03).unwrap();
        let mut checked = 0;
        for seed in 0..25u64 {
            let u: Vec<u8> = (0..4).map(|i| ((seed >> i) & 1) as u8).collect();
            let x = t.encode(&u).unwrap().bits;
            let traces = transmit_multi(&x, &spec, 1, seed).unwrap();
            let y = &traces[0].bits;
            let w = match build_drift_window(9, y.len(), 7) {
                Ok(w) => w,
                Err(_) => continue,
            };
            let run = match bcjr_posteriors(&t, y, &spec, &w, None) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let oracle =
                crate::oracle::codeword_posteriors(&words, y, &spec, &w, None).unwrap();
            for l in 0..9 {
                assert_relative_eq!(
                    run.posterior_p1[l],
                    oracle[l],
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
            }
            checked += 1;
        }
        assert!(checked >= 20);
    }

    #[test]
    fn duality_totals_constant() {
        let t = example1_trellis();
        let spec = ChannelSpec::new(0.06, 0.04, 0.02).unwrap();
        for seed in 0..10u64 {
            let x = t.encode(&[1, 1, 0, 1]).unwrap().bits;
            let traces = transmit_multi(&x, &spec, 1, seed).unwrap();
            let y = &traces[0].bits;
            let w = match build_drift_window(9, y.len(), 6) {
                Ok(w) => w,
                Err(_) => continue,
            };
            let run = match bcjr_posteriors(&t, y, &spec, &w, None) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let first = run.duality_log_totals[0];
            for (l, &v) in run.duality_log_totals.iter().enumerate() {
                assert_relative_eq!(v, first, max_relative = 1e-9, epsilon = 1e-9);
                let _ = l;
            }
            assert_relative_eq!(first, run.log_likelihood, max_relative = 1e-9);
        }
    }

    #[test]
    fn branch_count_matches_enumeration() {
        let t = example1_trellis();
        let w = build_drift_window(9, 8, 2).unwrap();
        let fast = count_branches(&t, &w);
        let mut slow = 0u64;
        for lvl in 0..9usize {
            for si in 0..t.num_states(lvl) {
                for b in 0..2 {
                    if t.level(lvl).edges[si][b].is_none() {
                        continue;
                    }
                    for d in w.d_min(lvl)..=w.d_max(lvl) {
                        for dd in -1..=1 {
                            if w.contains(lvl + 1, d + dd) {
                                slow += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(fast, slow);
        // Deterministic.
        assert_eq!(fast, count_branches(&t, &w));
    }

    #[test]
    fn combine_identity_and_hand_value() {
        // M = 1 is the identity.
        let p = vec![vec![0.3, 0.9, 0.5]];
        let prior = vec![0.5, 0.5, 0.5];
        let out = combine_posteriors(&p, &prior).unwrap();
        for (a, b) in out.iter().zip(&p[0]) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        // Two posteriors of 0.9 with prior 1/2: 81 / 82.
        let p = vec![vec![0.9], vec![0.9]];
        let out = combine_posteriors(&p, &[0.5]).unwrap();
        assert_relative_eq!(out[0], 81.0 / 82.0, max_relative = 1e-12);
    }

    #[test]
    fn combine_forced_prior_and_consistency_error() {
        let p = vec![vec![1.0], vec![1.0]];
        let out = combine_posteriors(&p, &[1.0]).unwrap();
        assert_eq!(out[0], 1.0);
        let bad = vec![vec![0.4]];
        assert!(combine_posteriors(&bad, &[1.0]).is_err());
    }

    #[test]
    fn combine_is_symmetric_under_trace_permutation() {
        let a = vec![0.2, 0.7, 0.95];
        let b = vec![0.6, 0.1, 0.85];
        let prior = vec![0.5, 0.4, 0.7];
        let ab = combine_posteriors(&[a.clone(), b.clone()], &prior).unwrap();
        let ba = combine_posteriors(&[b, a], &prior).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn tie_breaks_to_zero() {
        // Identical symmetric posteriors at a uniform prior stay at 1/2 and
        // must decide 0.
        let t = example1_trellis();
        let spec = ChannelSpec::new(0.0, 0.0, 0.0).unwrap();
        let prior: Vec<f64> = t.bit_priors();
        // Construct an artificial 0.5 posterior directly through combine +
        // hard decision.
        let combined = combine_posteriors(&[vec![0.5; 9]], &prior).unwrap();
        let decided: Vec<u8> = combined.iter().map(|&p| (p > 0.5) as u8).collect();
        assert_eq!(decided, vec![0; 9]);
        let _ = spec;
    }

    #[test]
    fn single_deletion_two_traces_recovers() {
        let t = example1_trellis();
        let spec = ChannelSpec::new(0.0, 0.05, 0.0).unwrap();
        let x = t.encode(&[1, 0, 1, 1]).unwrap().bits;
        let mut y0 = x.clone();
        y0.remove(3);
        let traces = vec![Trace { bits: y0 }, Trace { bits: x.clone() }];
        let prior: Vec<f64> = t.bit_priors();
        let res = decode_separate_bcjr(&t, &traces, &spec, &prior, None, 3).unwrap();
        assert_eq!(res.codeword, x);
        assert!(!res.erasure);
    }

    #[test]
    fn noiseless_multi_trace_exact() {
        let t = example1_trellis();
        let spec = ChannelSpec::new(0.0, 0.0, 0.0).unwrap();
        let x = t.encode(&[0, 1, 1, 1]).unwrap().bits;
        let traces = transmit_multi(&x, &spec, 3, 1).unwrap();
        let prior: Vec<f64> = t.bit_priors();
        let res = decode_separate_bcjr(&t, &traces, &spec, &prior, None, 2).unwrap();
        assert_eq!(res.codeword, x);
    }
}
