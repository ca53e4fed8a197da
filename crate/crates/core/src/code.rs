//! Convolutional codes via their parity-check matrices and the syndrome
//! trellis of the terminated code.
//!
//! An `[n, k]` convolutional code is given by an `(n-k) x n` polynomial
//! parity-check matrix. Terminating after `N` code bits yields a binary
//! parity-check matrix in block-Toeplitz form; the syndrome trellis tracks
//! the partial syndrome of the prefix through `N + 1` levels. Levels whose
//! states have two surviving outgoing edges carry information bits, levels
//! with one forced edge carry parity bits. Termination is not special-cased:
//! it emerges from pruning states that cannot reach the all-zero final
//! syndrome.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::real::Real;

/// Polynomial parity-check matrix of an `[n, k]` convolutional code.
///
/// `coeff[r][j][d]` is the coefficient of `D^d` in row `r`, column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyParityCheck {
    n: usize,
    k: usize,
    memory: usize,
    coeff: Vec<Vec<Vec<u8>>>,
}

impl PolyParityCheck {
    /// Builds the matrix from explicit per-column coefficient lists,
    /// `cols[j][r]` being the `m + 1` coefficients of `D^0 .. D^m`.
    pub fn from_coeff_lists(cols: &[Vec<Vec<u8>>], n: usize, k: usize, m: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidRate { n, k });
        }
        if cols.len() != n {
            return Err(Error::MalformedCode(format!(
                "expected {} columns, got {}",
                n,
                cols.len()
            )));
        }
        let rows = n - k;
        let mut coeff = vec![vec![vec![0u8; m + 1]; n]; rows];
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::MalformedCode(format!(
                    "column {} has {} rows, expected {}",
                    j,
                    col.len(),
                    rows
                )));
            }
            let mut nonzero = false;
            for (r, poly) in col.iter().enumerate() {
                if poly.len() != m + 1 {
                    return Err(Error::MalformedCode(format!(
                        "column {j} row {r} has {} coefficients, expected {}",
                        poly.len(),
                        m + 1
                    )));
                }
                for (d, &c) in poly.iter().enumerate() {
                    if c > 1 {
                        return Err(Error::MalformedCode(format!(
                            "column {j} row {r} degree {d}: coefficient {c} is not a bit"
                        )));
                    }
                    coeff[r][j][d] = c;
                    nonzero |= c == 1;
                }
            }
            if !nonzero {
                return Err(Error::MalformedCode(format!("column {j} is all zero")));
            }
        }
        Ok(Self { n, k, memory: m, coeff })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Coefficient of `D^d` in row `r`, column `j`.
    pub fn coeff(&self, r: usize, j: usize, d: usize) -> u8 {
        self.coeff[r][j][d]
    }
}

/// Parses the compact integer-per-column table form.
///
/// Each integer packs the `(n - k)(m + 1)` coefficient bits of one column:
/// the most significant group of `m + 1` bits is row 1, and within a group
/// the most significant bit is the `D^0` coefficient. For the `[3, 2]` code
/// with columns `(6, 5, 7)` and `m = 2` this yields `[1+D, 1+D^2, 1+D+D^2]`.
pub fn parse_code_table(integers: &[u64], n: usize, k: usize, m: usize) -> Result<PolyParityCheck> {
    if k >= n {
        return Err(Error::InvalidRate { n, k });
    }
    if integers.len() != n {
        return Err(Error::MalformedCode(format!(
            "expected {} column integers, got {}",
            n,
            integers.len()
        )));
    }
    let rows = n - k;
    let width = rows * (m + 1);
    if width > 63 {
        return Err(Error::MalformedCode(format!(
            "(n-k)(m+1) = {width} exceeds the 63-bit integer column format"
        )));
    }
    let limit = 1u64 << width;
    let mut cols = Vec::with_capacity(n);
    for (j, &v) in integers.iter().enumerate() {
        if v >= limit {
            return Err(Error::MalformedCode(format!(
                "column {j}: integer {v} needs more than {width} bits"
            )));
        }
        let mut col = vec![vec![0u8; m + 1]; rows];
        for r in 0..rows {
            for d in 0..=m {
                // bit position from the most significant end
                let pos = width - 1 - (r * (m + 1) + d);
                col[r][d] = ((v >> pos) & 1) as u8;
            }
        }
        cols.push(col);
    }
    PolyParityCheck::from_coeff_lists(&cols, n, k, m)
}

/// One row of the terminated binary parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRow {
    /// Dense 0/1 coefficients over all `N` columns.
    pub bits: Vec<u8>,
    /// First column (0-based) with a nonzero coefficient.
    pub first: usize,
    /// Last column (0-based) with a nonzero coefficient.
    pub last: usize,
}

/// Binary parity-check matrix of the terminated code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryParityCheck {
    n_bits: usize,
    rows: Vec<BinaryRow>,
}

/// Expands the polynomial matrix into the terminated binary matrix of
/// length `N`: row block `j` places `H_m .. H_0` at column blocks
/// `j - m .. j`, clipped to the `N` available columns. Rows whose clipped
/// support is empty are dropped, so the result has no all-zero rows.
///
/// `N` does not have to be a multiple of `n`; the final column block may be
/// truncated, which matches codeword lengths like 139 for an `[11, 9]` code.
pub fn expand_binary(ppcm: &PolyParityCheck, n_bits: usize) -> Result<BinaryParityCheck> {
    let n = ppcm.n();
    let m = ppcm.memory();
    let sub_rows = ppcm.n - ppcm.k;
    if n_bits < n * (m + 1) {
        return Err(Error::InvalidLength(format!(
            "N = {} is shorter than one full constraint span n(m+1) = {}",
            n_bits,
            n * (m + 1)
        )));
    }
    let mut rows = Vec::new();
    // Row block j (1-based) starts influencing columns at n*(j-1-m).
    let mut j = 1usize;
    loop {
        let first_possible = n * (j as i64 - 1 - m as i64).max(0) as usize;
        if n * (j - 1) >= n_bits + n * m {
            break;
        }
        if first_possible >= n_bits {
            break;
        }
        for r in 0..sub_rows {
            let mut bits = vec![0u8; n_bits];
            for c in 0..n_bits {
                let block = c / n + 1; // 1-based column block
                let within = c % n;
                let d = j as i64 - block as i64;
                if (0..=m as i64).contains(&d) {
                    bits[c] = ppcm.coeff(r, within, d as usize);
                }
            }
            if let Some(first) = bits.iter().position(|&b| b == 1) {
                let last = bits.iter().rposition(|&b| b == 1).unwrap();
                rows.push(BinaryRow { bits, first, last });
            }
        }
        j += 1;
    }
    if rows.is_empty() {
        return Err(Error::InconsistentCode("no parity rows survive".into()));
    }
    Ok(BinaryParityCheck { n_bits, rows })
}

impl BinaryParityCheck {
    pub fn codeword_len(&self) -> usize {
        self.n_bits
    }

    pub fn rows(&self) -> &[BinaryRow] {
        &self.rows
    }

    /// H with columns in reverse order; row identities are preserved so a
    /// backward decoder state can be compared against a forward one.
    pub fn reversed(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut bits = row.bits.clone();
                bits.reverse();
                BinaryRow {
                    first: self.n_bits - 1 - row.last,
                    last: self.n_bits - 1 - row.first,
                    bits,
                }
            })
            .collect();
        Self { n_bits: self.n_bits, rows }
    }

    /// True iff `H x^T = 0` over GF(2).
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        bits.len() == self.n_bits
            && self.rows.iter().all(|row| {
                row.bits
                    .iter()
                    .zip(bits)
                    .fold(0u8, |acc, (&h, &x)| acc ^ (h & x))
                    == 0
            })
    }

    /// Dense matrix view, for golden tests.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(|r| r.bits.clone()).collect()
    }
}

/// Classification of a trellis level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelClass {
    Information,
    Parity,
}

/// States and edges of one trellis level. A state is the partial syndrome
/// over the rows active at that level, packed into a `u32` in ascending
/// row-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrellisLevel {
    pub active_rows: Vec<u16>,
    /// State bit patterns, ascending (deterministic across rebuilds).
    pub states: Vec<u32>,
    /// `edges[state][bit]` is the successor state index at the next level.
    pub edges: Vec<[Option<u32>; 2]>,
}

/// Syndrome trellis of a terminated code: `N + 1` levels, the all-zero
/// state at both ends, and per-level information/parity classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeTrellis {
    n_bits: usize,
    levels: Vec<TrellisLevel>,
    classes: Vec<LevelClass>,
    info_levels: Vec<usize>,
}

/// A codeword together with the information bits that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub bits: Vec<u8>,
    pub info_bits: Vec<u8>,
}

pub fn build_trellis(h: &BinaryParityCheck) -> Result<SyndromeTrellis> {
    let n = h.codeword_len();
    let rows = h.rows();

    // active_rows[l]: rows whose support straddles level l.
    let mut active_rows: Vec<Vec<u16>> = vec![Vec::new(); n + 1];
    for (r, row) in rows.iter().enumerate() {
        for level in (row.first + 1)..=row.last {
            active_rows[level].push(r as u16);
        }
    }
    for act in &active_rows {
        if act.len() > 32 {
            return Err(Error::InconsistentCode(format!(
                "{} simultaneously active parity rows exceed the 32-bit state limit",
                act.len()
            )));
        }
    }

    // Forward expansion.
    let mut states: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    let mut edges: Vec<Vec<[Option<u32>; 2]>> = vec![Vec::new(); n + 1];
    states[0].push(0);
    for l in 0..n {
        let cur_active = &active_rows[l];
        let next_active = &active_rows[l + 1];
        let mut index: HashMap<u32, u32> = HashMap::new();
        let mut next_states = Vec::new();
        let mut level_edges = vec![[None, None]; states[l].len()];
        // Rows whose support ends exactly at column l must close at zero.
        let ending: Vec<usize> = (0..rows.len()).filter(|&r| rows[r].last == l).collect();
        for (si, &s) in states[l].iter().enumerate() {
            'bits: for b in 0..2u8 {
                for &r in &ending {
                    let prev = cur_active
                        .iter()
                        .position(|&a| a as usize == r)
                        .map_or(0, |pos| (s >> pos) & 1);
                    if prev ^ (b & rows[r].bits[l]) as u32 != 0 {
                        continue 'bits;
                    }
                }
                let mut pattern = 0u32;
                for (pos, &r) in next_active.iter().enumerate() {
                    let r = r as usize;
                    let prev = cur_active
                        .iter()
                        .position(|&a| a as usize == r)
                        .map_or(0, |p| (s >> p) & 1);
                    let bit = prev ^ (b & rows[r].bits[l]) as u32;
                    pattern |= bit << pos;
                }
                let ni = *index.entry(pattern).or_insert_with(|| {
                    next_states.push(pattern);
                    (next_states.len() - 1) as u32
                });
                level_edges[si][b as usize] = Some(ni);
            }
        }
        states[l + 1] = next_states;
        edges[l] = level_edges;
    }

    if states[n].is_empty() {
        return Err(Error::InconsistentCode(
            "no state reaches the terminal level".into(),
        ));
    }
    debug_assert!(states[n] == vec![0]);

    // Backward pruning: keep states co-reachable to the terminal zero state.
    let mut alive: Vec<Vec<bool>> = states.iter().map(|s| vec![false; s.len()]).collect();
    alive[n][0] = true;
    for l in (0..n).rev() {
        for (si, e) in edges[l].iter().enumerate() {
            if e.iter().flatten().any(|&ni| alive[l + 1][ni as usize]) {
                alive[l][si] = true;
            }
        }
        if !alive[l].iter().any(|&a| a) {
            return Err(Error::InconsistentCode(format!(
                "pruning emptied level {l}"
            )));
        }
    }
    if !alive[0][0] {
        return Err(Error::InconsistentCode(
            "root state cannot reach the terminal state".into(),
        ));
    }

    // Re-index surviving states, sorted by pattern.
    let mut levels = Vec::with_capacity(n + 1);
    let mut remap: Vec<HashMap<u32, u32>> = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut surv: Vec<u32> = states[l]
            .iter()
            .zip(&alive[l])
            .filter(|(_, &a)| a)
            .map(|(&s, _)| s)
            .collect();
        surv.sort_unstable();
        let map: HashMap<u32, u32> = surv
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i as u32))
            .collect();
        remap.push(map);
        levels.push(TrellisLevel {
            active_rows: active_rows[l].clone(),
            states: surv,
            edges: Vec::new(),
        });
    }
    let mut classes = Vec::with_capacity(n);
    for l in 0..n {
        let mut new_edges = vec![[None, None]; levels[l].states.len()];
        let mut degrees = [false, false]; // seen degree-1 / degree-2 states
        for (old_si, &s) in states[l].iter().enumerate() {
            if !alive[l][old_si] {
                continue;
            }
            let si = remap[l][&s] as usize;
            let mut deg = 0;
            for b in 0..2 {
                if let Some(ni) = edges[l][old_si][b] {
                    let pattern = states[l + 1][ni as usize];
                    if alive[l + 1][ni as usize] {
                        new_edges[si][b] = Some(remap[l + 1][&pattern]);
                        deg += 1;
                    }
                }
            }
            match deg {
                1 => degrees[0] = true,
                2 => degrees[1] = true,
                _ => {
                    return Err(Error::InconsistentCode(format!(
                        "state with out-degree {deg} at level {l}"
                    )))
                }
            }
        }
        if degrees[0] && degrees[1] {
            return Err(Error::InconsistentCode(format!(
                "level {l} mixes one- and two-edge states"
            )));
        }
        classes.push(if degrees[1] {
            LevelClass::Information
        } else {
            LevelClass::Parity
        });
        levels[l].edges = new_edges;
    }

    let info_levels = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == LevelClass::Information)
        .map(|(l, _)| l)
        .collect();
    Ok(SyndromeTrellis {
        n_bits: n,
        levels,
        classes,
        info_levels,
    })
}

impl SyndromeTrellis {
    pub fn codeword_len(&self) -> usize {
        self.n_bits
    }

    /// Number of information bits.
    pub fn num_info_bits(&self) -> usize {
        self.info_levels.len()
    }

    pub fn info_levels(&self) -> &[usize] {
        &self.info_levels
    }

    pub fn classes(&self) -> &[LevelClass] {
        &self.classes
    }

    pub fn is_info_level(&self, l: usize) -> bool {
        self.classes[l] == LevelClass::Information
    }

    pub fn level(&self, l: usize) -> &TrellisLevel {
        &self.levels[l]
    }

    pub fn num_states(&self, l: usize) -> usize {
        self.levels[l].states.len()
    }

    /// Encodes `u` by walking the trellis from the zero state: information
    /// levels consume the next bit of `u`, parity levels follow the forced
    /// edge.
    pub fn encode(&self, u: &[u8]) -> Result<Codeword> {
        if u.len() != self.num_info_bits() {
            return Err(Error::LengthMismatch {
                expected: self.num_info_bits(),
                got: u.len(),
            });
        }
        let mut next_info = u.iter().copied();
        let bits = self.continue_path(0, 0, &mut |_| {
            next_info.next().expect("info bits exhausted") != 0
        });
        Ok(Codeword {
            bits,
            info_bits: u.to_vec(),
        })
    }

    /// Walks from `(level, state)` to the end, calling `choose` at each
    /// information level and following forced edges elsewhere. Returns the
    /// edge labels of the walk. Used by encoding and by erasure fill-in.
    pub fn continue_path(
        &self,
        level: usize,
        state: u32,
        choose: &mut dyn FnMut(usize) -> bool,
    ) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.n_bits - level);
        let mut si = state as usize;
        for l in level..self.n_bits {
            let edges = &self.levels[l].edges[si];
            let b = match (edges[0], edges[1]) {
                (Some(_), Some(_)) => choose(l) as usize,
                (Some(_), None) => 0,
                (None, Some(_)) => 1,
                (None, None) => unreachable!("pruned trellis has no dead ends"),
            };
            out.push(b as u8);
            si = edges[b].unwrap() as usize;
        }
        out
    }

    /// Extracts the bits at information levels from a codeword.
    pub fn extract_info_bits(&self, bits: &[u8]) -> Vec<u8> {
        self.info_levels.iter().map(|&l| bits[l]).collect()
    }

    /// Per-level marginal probability that the code bit is 1, from a
    /// forward probability pass with equiprobable information bits
    /// (edge probability 1/2 at information levels, 1 at parity levels).
    pub fn bit_priors<T: Real>(&self) -> Vec<T> {
        let half = T::of(0.5);
        let mut p = vec![T::one()];
        let mut out = Vec::with_capacity(self.n_bits);
        for l in 0..self.n_bits {
            let lvl = &self.levels[l];
            let w = if self.classes[l] == LevelClass::Information {
                half
            } else {
                T::one()
            };
            let mut next = vec![T::zero(); self.levels[l + 1].states.len()];
            let mut p_one = T::zero();
            for (si, e) in lvl.edges.iter().enumerate() {
                for b in 0..2 {
                    if let Some(ni) = e[b] {
                        let mass = p[si] * w;
                        next[ni as usize] += mass;
                        if b == 1 {
                            p_one += mass;
                        }
                    }
                }
            }
            out.push(p_one);
            p = next;
        }
        out
    }

    /// Enumerates all codewords; intended for small codes in tests and
    /// oracles (`2^K` paths).
    pub fn all_codewords(&self) -> Vec<Vec<u8>> {
        let k = self.num_info_bits();
        assert!(k <= 20, "all_codewords is for small codes only");
        (0..(1u64 << k))
            .map(|v| {
                let u: Vec<u8> = (0..k).map(|i| ((v >> i) & 1) as u8).collect();
                self.encode(&u).unwrap().bits
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example1() -> PolyParityCheck {
        parse_code_table(&[6, 5, 7], 3, 2, 2).unwrap()
    }

    #[test]
    fn example1_polynomials_from_integers() {
        let p = example1();
        // H(D) = [1 + D, 1 + D^2, 1 + D + D^2]
        assert_eq!(
            (p.coeff(0, 0, 0), p.coeff(0, 0, 1), p.coeff(0, 0, 2)),
            (1, 1, 0)
        );
        assert_eq!(
            (p.coeff(0, 1, 0), p.coeff(0, 1, 1), p.coeff(0, 1, 2)),
            (1, 0, 1)
        );
        assert_eq!(
            (p.coeff(0, 2, 0), p.coeff(0, 2, 1), p.coeff(0, 2, 2)),
            (1, 1, 1)
        );
    }

    #[test]
    fn parse_rejects_bad_rate_and_range() {
        assert!(matches!(
            parse_code_table(&[3], 1, 1, 0),
            Err(Error::InvalidRate { .. })
        ));
        // 3 coefficient bits per column: 8 is out of range.
        assert!(matches!(
            parse_code_table(&[8, 5, 7], 3, 2, 2),
            Err(Error::MalformedCode(_))
        ));
    }

    #[test]
    fn parse_rejects_zero_column() {
        assert!(matches!(
            parse_code_table(&[6, 0, 7], 3, 2, 2),
            Err(Error::MalformedCode(_))
        ));
    }

    fn golden_example1_h() -> Vec<Vec<u8>> {
        vec![
            vec![1, 1, 1, 0, 0, 0, 0, 0, 0],
            vec![1, 0, 1, 1, 1, 1, 0, 0, 0],
            vec![0, 1, 1, 1, 0, 1, 1, 1, 1],
            vec![0, 0, 0, 0, 1, 1, 1, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 1, 1],
        ]
    }

    #[test]
    fn example1_binary_matrix_matches_golden() {
        let h = expand_binary(&example1(), 9).unwrap();
        assert_eq!(h.dense(), golden_example1_h());
    }

    #[test]
    fn memoryless_single_parity_blocks() {
        let p = PolyParityCheck::from_coeff_lists(&[vec![vec![1]], vec![vec![1]]], 2, 1, 0)
            .unwrap();
        let h = expand_binary(&p, 4).unwrap();
        assert_eq!(h.dense(), vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
    }

    #[test]
    fn example1_n12_extends_block_toeplitz() {
        let h9 = expand_binary(&example1(), 9).unwrap();
        let h12 = expand_binary(&example1(), 12).unwrap();
        assert_eq!(h12.rows().len(), 6);
        // The N = 9 matrix is the 9-column clip of the first five rows.
        for (r9, r12) in h9.rows().iter().zip(h12.rows()) {
            assert_eq!(r9.bits[..], r12.bits[..9]);
        }
        // One more repetition of the dashed-box block appears.
        let t9 = build_trellis(&h9).unwrap();
        let t12 = build_trellis(&h12).unwrap();
        assert_eq!(t9.info_levels(), &[0, 1, 3, 4]);
        assert_eq!(t12.info_levels(), &[0, 1, 3, 4, 6, 7]);
        assert_eq!(t12.all_codewords().len(), 64);
    }

    #[test]
    fn expand_rejects_short_lengths() {
        assert!(matches!(
            expand_binary(&example1(), 6),
            Err(Error::InvalidLength(_))
        ));
    }

    #[test]
    fn example1_trellis_matches_figure() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        assert_eq!(t.info_levels(), &[0, 1, 3, 4]);
        assert_eq!(t.num_info_bits(), 4);
        for l in [2usize, 5, 6, 7, 8] {
            assert_eq!(t.classes()[l], LevelClass::Parity, "level {l}");
        }
        // Eight states before the terminal funnel begins.
        assert_eq!(t.num_states(5), 8);
        assert_eq!(t.num_states(0), 1);
        assert_eq!(t.num_states(9), 1);
    }

    #[test]
    fn repetition_parity_code_info_levels() {
        let p = PolyParityCheck::from_coeff_lists(&[vec![vec![1]], vec![vec![1]]], 2, 1, 0)
            .unwrap();
        let t = build_trellis(&expand_binary(&p, 4).unwrap()).unwrap();
        assert_eq!(t.info_levels(), &[0, 2]);
        // Brute-force: codewords are (a, a, b, b).
        let mut words = t.all_codewords();
        words.sort();
        assert_eq!(
            words,
            vec![
                vec![0, 0, 0, 0],
                vec![0, 0, 1, 1],
                vec![1, 1, 0, 0],
                vec![1, 1, 1, 1]
            ]
        );
    }

    #[test]
    fn encode_example2_golden() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        let cw = t.encode(&[1, 0, 1, 1]).unwrap();
        assert_eq!(cw.bits, vec![1, 0, 1, 1, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn encode_zero_is_zero() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        assert_eq!(t.encode(&[0; 4]).unwrap().bits, vec![0; 9]);
    }

    #[test]
    fn encode_wrong_length_errors() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        assert!(matches!(
            t.encode(&[1, 0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn every_codeword_satisfies_parity() {
        let h = expand_binary(&example1(), 9).unwrap();
        let t = build_trellis(&h).unwrap();
        let words = t.all_codewords();
        assert_eq!(words.len(), 16);
        for w in &words {
            assert!(h.syndrome_ok(w));
        }
        // Spot check the spec example u = (1, 1, 0, 0).
        let cw = t.encode(&[1, 1, 0, 0]).unwrap();
        assert!(h.syndrome_ok(&cw.bits));
    }

    #[test]
    fn k_equals_length_minus_rank() {
        let h = expand_binary(&example1(), 9).unwrap();
        let t = build_trellis(&h).unwrap();
        let rank = crate::oracle::gf2_rank(&h.dense());
        assert_eq!(t.num_info_bits(), h.codeword_len() - rank);
    }

    #[test]
    fn rebuild_is_identical() {
        let h = expand_binary(&example1(), 9).unwrap();
        let a = build_trellis(&h).unwrap();
        let b = build_trellis(&h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn priors_are_half_at_information_levels_and_normalized() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        let p: Vec<f64> = t.bit_priors();
        for &l in t.info_levels() {
            assert!((p[l] - 0.5).abs() < 1e-12, "level {l}: {}", p[l]);
        }
        for (l, &v) in p.iter().enumerate() {
            assert!((0.0..=1.0).contains(&v), "level {l}");
        }
        // Level 2 (parity): enumerate all 16 codewords and count x_3 = 1.
        let words = t.all_codewords();
        let count = words.iter().filter(|w| w[2] == 1).count();
        assert_eq!(count, 8);
        assert!((p[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn priors_match_enumeration_on_every_level() {
        let t = build_trellis(&expand_binary(&example1(), 9).unwrap()).unwrap();
        let p: Vec<f64> = t.bit_priors();
        let words = t.all_codewords();
        for l in 0..9 {
            let frac =
                words.iter().filter(|w| w[l] == 1).count() as f64 / words.len() as f64;
            assert!((p[l] - frac).abs() < 1e-12, "level {l}: {} vs {}", p[l], frac);
        }
    }

    #[test]
    fn reversed_matrix_defines_same_size_code() {
        let h = expand_binary(&example1(), 9).unwrap();
        let hrev = h.reversed();
        let t = build_trellis(&hrev).unwrap();
        assert_eq!(t.num_info_bits(), 4);
        // Reversed codewords of the original code are codewords of H reversed.
        let orig = build_trellis(&h).unwrap();
        for w in orig.all_codewords() {
            let mut r = w.clone();
            r.reverse();
            assert!(hrev.syndrome_ok(&r));
        }
    }
}
