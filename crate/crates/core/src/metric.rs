//! Node metric over the joint channel-and-code tree.
//!
//! A search node fixes a trellis path prefix and one drift value per trace.
//! Its score decomposes into `g`, the exact accumulated log-probability of
//! the prefix (state transition terms plus per-trace branch terms), and
//! `h`, the per-trace tail term minus the constant normalizer `log P(y_j)`.
//! The tail marginalizes the remaining levels over unconstrained bits with
//! the per-level priors, which is what the suffix lattice stores, so the
//! root's priority is exactly zero and a complete path's priority
//! approximates its log-posterior.

use smallvec::SmallVec;

use crate::bits::BitString;
use crate::channel::{ChannelSpec, Trace};
use crate::code::SyndromeTrellis;
use crate::error::{Error, Result};
use crate::lattice::{build_drift_window, BranchConsts, TraceLattices};
use crate::real::Real;

/// Largest drift magnitude representable in the stack tie-break encoding.
const MAX_DRIFT_MAG: i32 = 126;

pub type DriftVec = SmallVec<[i16; 4]>;

/// A node of the joint channel-and-code tree.
#[derive(Debug, Clone)]
pub struct SearchNode<T: Real> {
    pub level: u16,
    /// State index within the trellis level.
    pub state_idx: u32,
    /// Per-trace drift at `level`.
    pub drifts: DriftVec,
    /// Accumulated transition and branch log-probability of the prefix.
    pub g: T,
    /// Tail terms minus normalizers.
    pub h: T,
    /// Edge labels along the path from the root.
    pub bits: BitString,
}

impl<T: Real> SearchNode<T> {
    pub fn priority(&self) -> T {
        self.g + self.h
    }

    pub fn last_bit(&self) -> u8 {
        if self.bits.is_empty() {
            0
        } else {
            self.bits.get(self.bits.len() - 1)
        }
    }
}

/// Everything a decoder needs for one direction of one trial: the trellis,
/// the traces, their lattices, and the channel constants. For backward
/// decoding the caller passes the reversed trellis, reversed traces,
/// reversed priors, and reversed offset; the arithmetic is identical.
#[derive(Debug)]
pub struct DecodeContext<'a, T: Real> {
    pub trellis: &'a SyndromeTrellis,
    pub traces: Vec<Vec<u8>>,
    pub lattices: Vec<TraceLattices<T>>,
    pub consts: BranchConsts<T>,
    /// Per-level XOR offset between edge labels and transmitted bits.
    pub tx_offset: Vec<u8>,
    /// Per-level `log P(s_{l+1} | s_l)`: `-ln 2` at information levels.
    pub trans_log: Vec<T>,
    /// Sum over traces of `log P(y_j)`.
    pub sum_norm: T,
}

impl<'a, T: Real> DecodeContext<'a, T> {
    pub fn new(
        trellis: &'a SyndromeTrellis,
        traces: &[Trace],
        spec: &ChannelSpec<T>,
        p1_code: &[T],
        offset: Option<&[u8]>,
        slack: u32,
    ) -> Result<Self> {
        let n = trellis.codeword_len();
        if p1_code.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: p1_code.len(),
            });
        }
        let tx_offset = match offset {
            Some(o) => {
                if o.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: o.len(),
                    });
                }
                o.to_vec()
            }
            None => vec![0u8; n],
        };
        // Priors of the transmitted (offset-domain) bits.
        let p1_tx: Vec<T> = p1_code
            .iter()
            .zip(&tx_offset)
            .map(|(&p, &o)| if o == 1 { T::one() - p } else { p })
            .collect();
        let consts = BranchConsts::new(spec);
        let mut lattices = Vec::with_capacity(traces.len());
        for tr in traces {
            let window = build_drift_window(n, tr.len(), slack)?;
            let dmax = (0..=n)
                .map(|t| window.d_min(t).abs().max(window.d_max(t).abs()))
                .max()
                .unwrap_or(0);
            if dmax > MAX_DRIFT_MAG {
                return Err(Error::UndecodableTrace(format!(
                    "drift window reaches |d| = {dmax}, beyond the supported {MAX_DRIFT_MAG}"
                )));
            }
            lattices.push(TraceLattices::build(
                &tr.bits, n, &p1_tx, window, &consts,
            )?);
        }
        let sum_norm = lattices
            .iter()
            .map(|l| l.log_norm)
            .fold(T::zero(), |a, b| a + b);
        let ln2 = T::of(2.0).ln();
        let trans_log = (0..n)
            .map(|l| if trellis.is_info_level(l) { -ln2 } else { T::zero() })
            .collect();
        Ok(Self {
            trellis,
            traces: traces.iter().map(|t| t.bits.clone()).collect(),
            lattices,
            consts,
            tx_offset,
            trans_log,
            sum_norm,
        })
    }

    pub fn num_traces(&self) -> usize {
        self.traces.len()
    }

    pub fn codeword_len(&self) -> usize {
        self.trellis.codeword_len()
    }

    /// Net drift each trace must reach at the terminal level.
    pub fn net_drift(&self, j: usize) -> i16 {
        (self.traces[j].len() as i64 - self.codeword_len() as i64) as i16
    }

    pub fn root(&self) -> SearchNode<T> {
        let m = self.num_traces();
        let h = (0..m)
            .map(|j| self.lattices[j].tail(0, 0))
            .fold(T::zero(), |a, b| a + b)
            - self.sum_norm;
        SearchNode {
            level: 0,
            state_idx: 0,
            drifts: smallvec::smallvec![0; m],
            g: T::zero(),
            h,
            bits: BitString::new(),
        }
    }

    /// True iff the node is a complete path with consistent drifts.
    pub fn is_terminal(&self, node: &SearchNode<T>) -> bool {
        node.level as usize == self.codeword_len()
            && (0..self.num_traces()).all(|j| node.drifts[j] == self.net_drift(j))
    }

    /// The three per-trace branch options at `(level, drift)` for a given
    /// transmitted bit: `(new drift, branch log-prob, tail at level + 1)`.
    /// Options that leave the window or have zero probability are dropped.
    fn trace_options(
        &self,
        j: usize,
        level: usize,
        drift: i16,
        tx: u8,
    ) -> SmallVec<[(i16, T, T); 3]> {
        let lat = &self.lattices[j];
        let y = &self.traces[j];
        let r = level as i64 + drift as i64;
        let mut opts = SmallVec::new();
        for dd in [-1i16, 0, 1] {
            let d_new = drift + dd;
            if !lat.window.contains(level + 1, d_new as i32) {
                continue;
            }
            let g_add = match dd {
                -1 => self.consts.log_del,
                0 => {
                    debug_assert!((r as usize) < y.len());
                    self.consts.log_c0[y[r as usize] as usize][tx as usize]
                }
                _ => {
                    debug_assert!((r as usize + 1) < y.len());
                    self.consts.log_c1[y[r as usize + 1] as usize][tx as usize]
                }
            };
            if g_add == T::neg_infinity() {
                continue;
            }
            let tail = lat.tail(level + 1, d_new as i32);
            if tail == T::neg_infinity() {
                continue;
            }
            opts.push((d_new, g_add, tail));
        }
        opts
    }

    /// Extends `node` along edge `bit` with the given per-trace drift
    /// increments. Returns `None` when the edge does not exist, a drift
    /// leaves its window, or the extension has zero probability.
    pub fn extend(&self, node: &SearchNode<T>, bit: u8, dds: &[i8]) -> Option<SearchNode<T>> {
        let t = node.level as usize;
        let next = self.trellis.level(t).edges[node.state_idx as usize][bit as usize]?;
        let tx = bit ^ self.tx_offset[t];
        let mut g = node.g + self.trans_log[t];
        let mut h = -self.sum_norm;
        let mut drifts = DriftVec::with_capacity(self.num_traces());
        for j in 0..self.num_traces() {
            let opts = self.trace_options(j, t, node.drifts[j], tx);
            let (d_new, g_add, tail) =
                opts.iter().find(|(d, _, _)| *d == node.drifts[j] + dds[j] as i16)?;
            g += *g_add;
            h += *tail;
            drifts.push(*d_new);
        }
        Some(SearchNode {
            level: node.level + 1,
            state_idx: next,
            drifts,
            g,
            h,
            bits: node.bits.appended(bit != 0),
        })
    }

    /// Enumerates every child of `node`: available edges crossed with all
    /// valid per-trace drift combinations, in deterministic order (bit 0
    /// before bit 1, drift increments ascending per trace, earlier traces
    /// varying slowest).
    pub fn for_each_child<F: FnMut(SearchNode<T>)>(&self, node: &SearchNode<T>, mut f: F) {
        let t = node.level as usize;
        if t >= self.codeword_len() {
            return;
        }
        let m = self.num_traces();
        let edges = &self.trellis.level(t).edges[node.state_idx as usize];
        let trans = self.trans_log[t];
        let mut options: SmallVec<[SmallVec<[(i16, T, T); 3]>; 4]> = SmallVec::new();
        for bit in 0..2u8 {
            let Some(next) = edges[bit as usize] else { continue };
            let tx = bit ^ self.tx_offset[t];
            options.clear();
            let mut feasible = true;
            for j in 0..m {
                let opts = self.trace_options(j, t, node.drifts[j], tx);
                if opts.is_empty() {
                    feasible = false;
                    break;
                }
                options.push(opts);
            }
            if !feasible {
                continue;
            }
            let base_g = node.g + trans;
            let base_h = -self.sum_norm;
            let mut drifts = DriftVec::with_capacity(m);
            emit_combos(
                &options,
                0,
                base_g,
                base_h,
                &mut drifts,
                &mut |g, h, drifts: &DriftVec| {
                    f(SearchNode {
                        level: node.level + 1,
                        state_idx: next,
                        drifts: drifts.clone(),
                        g,
                        h,
                        bits: node.bits.appended(bit != 0),
                    });
                },
            );
        }
    }

    /// Complete-path score `g + h`; the tail term is zero at completion so
    /// this equals `sum_j [log P(path, y_j) - log P(y_j)]` under the
    /// truncated windowed model.
    pub fn full_posterior_score(&self, node: &SearchNode<T>) -> Result<T> {
        if !self.is_terminal(node) {
            return Err(Error::InvalidArgument(
                "full_posterior_score requires a complete path with consistent drifts".into(),
            ));
        }
        Ok(node.priority())
    }
}

fn emit_combos<T: Real>(
    options: &[SmallVec<[(i16, T, T); 3]>],
    j: usize,
    g: T,
    h: T,
    drifts: &mut DriftVec,
    f: &mut impl FnMut(T, T, &DriftVec),
) {
    if j == options.len() {
        f(g, h, drifts);
        return;
    }
    for &(d_new, g_add, tail) in &options[j] {
        drifts.push(d_new);
        emit_combos(options, j + 1, g + g_add, h + tail, drifts, f);
        drifts.pop();
    }
}
