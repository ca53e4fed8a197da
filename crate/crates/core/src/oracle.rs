//! Independent reference implementations used to validate the decoders.
//!
//! Everything here is deliberately written against the event semantics of
//! the channel rather than reusing the production lattices: probabilities
//! are accumulated per explicit event sequence (delete; insert+delete;
//! transmit; insert+transmit; insert+insert+delete) in a plain
//! dynamic program, in linear or log domain, without the banded tables.
//! Only small instances are intended.

use crate::channel::ChannelSpec;
use crate::lattice::DriftWindow;

/// Rank of a binary matrix over GF(2).
pub fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut mat: Vec<u128> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold(0u128, |acc, (i, &b)| acc | ((b as u128) << i))
        })
        .collect();
    let mut rank = 0;
    let width = rows.first().map_or(0, |r| r.len());
    assert!(width <= 128);
    for col in 0..width {
        let mask = 1u128 << col;
        if let Some(pivot) = (rank..mat.len()).find(|&i| mat[i] & mask != 0) {
            mat.swap(rank, pivot);
            let pv = mat[rank];
            for (i, row) in mat.iter_mut().enumerate() {
                if i != rank && *row & mask != 0 {
                    *row ^= pv;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// How path probabilities over drift trajectories are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Log of the sum over all trajectories (receive likelihood).
    Sum,
    /// Best single trajectory (the score a tree search maximizes).
    Max,
}

/// Log-probability that transmitting `x` produces exactly `y` under the
/// truncated per-bit event model, restricted to `window` when given.
///
/// `f(i, r)` is the probability that bits `x[i..]` produce `y[r..]`; each
/// step branches over the five truncated event sequences of one input bit.
pub fn path_log_prob(
    x: &[u8],
    y: &[u8],
    spec: &ChannelSpec<f64>,
    window: Option<&DriftWindow>,
    mode: PathMode,
) -> f64 {
    let n = x.len();
    let rl = y.len();
    let pi2 = spec.p_ins() / 2.0;
    let pd = spec.p_del();
    let pt = spec.p_trans();
    let ps = spec.p_sub();
    let q = |yb: u8, xb: u8| if yb == xb { 1.0 - ps } else { ps };
    let inside = |i: usize, r: usize| {
        window.is_none_or(|w| w.contains(i, r as i32 - i as i32))
    };
    let neg = f64::NEG_INFINITY;
    let mut next = vec![neg; rl + 1];
    let mut cur = vec![neg; rl + 1];
    next[rl] = 0.0;
    let comb = |a: f64, b: f64| match mode {
        PathMode::Sum => crate::real::log_add(a, b),
        PathMode::Max => a.max(b),
    };
    for i in (0..n).rev() {
        for r in 0..=rl {
            cur[r] = neg;
            if !inside(i, r) {
                continue;
            }
            let mut acc = neg;
            // delete
            acc = comb(acc, pd.ln() + next[r]);
            if r < rl {
                // insert then delete (emits one uniform bit)
                acc = comb(acc, (pi2 * pd).ln() + next[r + 1]);
                // transmit
                acc = comb(acc, (pt * q(y[r], x[i])).ln() + next[r + 1]);
            }
            if r + 1 < rl {
                // insert, insert, delete
                acc = comb(acc, (pi2 * pi2 * pd).ln() + next[r + 2]);
                // insert then transmit
                acc = comb(acc, (pi2 * pt * q(y[r + 1], x[i])).ln() + next[r + 2]);
            }
            cur[r] = acc;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    if inside(0, 0) {
        next[0]
    } else {
        neg
    }
}

/// Receive probability marginalized over all `2^n` inputs with independent
/// per-position priors `p1`: the brute-force counterpart of the prefix
/// lattice total.
pub fn marginal_receive_prob(
    n: usize,
    y: &[u8],
    p1: &[f64],
    spec: &ChannelSpec<f64>,
) -> f64 {
    assert!(n <= 16);
    let mut total = 0.0f64;
    for v in 0..(1u32 << n) {
        let x: Vec<u8> = (0..n).map(|i| ((v >> i) & 1) as u8).collect();
        let weight: f64 = x
            .iter()
            .zip(p1)
            .map(|(&b, &p)| if b == 1 { p } else { 1.0 - p })
            .product();
        if weight == 0.0 {
            continue;
        }
        let lp = path_log_prob(&x, y, spec, None, PathMode::Sum);
        total += weight * lp.exp();
    }
    total
}

/// Symbol-wise posteriors `P(x_l = 1 | y)` over an explicit codeword list
/// with equiprobable codewords, inside the given drift window.
pub fn codeword_posteriors(
    words: &[Vec<u8>],
    y: &[u8],
    spec: &ChannelSpec<f64>,
    window: &DriftWindow,
    tx_offset: Option<&[u8]>,
) -> Option<Vec<f64>> {
    let n = words[0].len();
    let mut weights = Vec::with_capacity(words.len());
    for w in words {
        let tx: Vec<u8> = match tx_offset {
            Some(off) => crate::bits::xor_bits(w, off),
            None => w.clone(),
        };
        weights.push(path_log_prob(&tx, y, spec, Some(window), PathMode::Sum));
    }
    let hi = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return None;
    }
    let lin: Vec<f64> = weights.iter().map(|&w| (w - hi).exp()).collect();
    let total: f64 = lin.iter().sum();
    let mut post = vec![0.0f64; n];
    for (w, lw) in words.iter().zip(&lin) {
        for (l, &b) in w.iter().enumerate() {
            if b == 1 {
                post[l] += lw;
            }
        }
    }
    for p in &mut post {
        *p /= total;
    }
    Some(post)
}

/// 95%-style Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
