//! Bounded-stack sequential decoding, unidirectional and bidirectional.
//!
//! The stack is a capacity-bounded double-ended priority structure
//! (an interval heap over compact order keys plus a node slab): `pop_best`
//! removes the highest-metric node, and inserting into a full stack evicts
//! the current minimum. Ties in priority are broken by deeper level first,
//! then lexicographically smaller drift vector, then bit 0 before bit 1,
//! then creation order, so runs are bit-reproducible.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;

use crate::bits::BitString;
use crate::code::BinaryParityCheck;
use crate::metric::{DecodeContext, DriftVec, SearchNode};
use crate::real::Real;

/// Unidirectional decoder parameters.
#[derive(Debug, Clone)]
pub struct StackParams {
    pub capacity: usize,
    /// Pop budget (Step 2 executions) before declaring an erasure.
    pub max_expansions: u64,
}

impl Default for StackParams {
    fn default() -> Self {
        Self {
            capacity: 300_000,
            max_expansions: 400_000,
        }
    }
}

/// Bidirectional decoder parameters. The two decoders share
/// `total_expansions`; per-direction caps default to half each.
#[derive(Debug, Clone)]
pub struct BistackParams {
    pub capacity: usize,
    pub total_expansions: u64,
    pub forward_cap: Option<u64>,
    pub backward_cap: Option<u64>,
    /// Memory guard on the two visited maps combined; exceeding it aborts
    /// the trial as an erasure.
    pub visited_limit: usize,
}

impl Default for BistackParams {
    fn default() -> Self {
        Self {
            capacity: 300_000,
            total_expansions: 400_000,
            forward_cap: None,
            backward_cap: None,
            visited_limit: 10_000_000,
        }
    }
}

/// Outcome of one decoding attempt.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub codeword: Vec<u8>,
    pub info_bits: Vec<u8>,
    pub erasure: bool,
    /// Pops that computed successor metrics.
    pub expansions: u64,
    pub inserted: u64,
    pub evicted: u64,
    /// Level at which forward and backward searches met, if they did.
    pub merge_level: Option<usize>,
    pub elapsed: std::time::Duration,
}

/// Meet key of a node in forward coordinates: level, syndrome state
/// pattern over the active rows, and the per-trace drift vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VisitedKey {
    pub level: u16,
    pub state: u32,
    pub drifts: DriftVec,
}

/// Key of a forward-direction node.
pub fn visited_key<T: Real>(ctx: &DecodeContext<'_, T>, node: &SearchNode<T>) -> VisitedKey {
    VisitedKey {
        level: node.level,
        state: ctx.trellis.level(node.level as usize).states[node.state_idx as usize],
        drifts: node.drifts.clone(),
    }
}

/// Key of a backward-direction node, translated to forward coordinates:
/// the backward trellis preserves parity-row identities, so its state
/// pattern is directly comparable, and a backward drift `d` at backward
/// level `l` corresponds to forward drift `(R - N) - d` at level `N - l`.
pub fn visited_key_backward<T: Real>(
    ctx_bwd: &DecodeContext<'_, T>,
    node: &SearchNode<T>,
) -> VisitedKey {
    let n = ctx_bwd.codeword_len();
    let drifts = (0..ctx_bwd.num_traces())
        .map(|j| ctx_bwd.net_drift(j) - node.drifts[j])
        .collect();
    VisitedKey {
        level: (n - node.level as usize) as u16,
        state: ctx_bwd.trellis.level(node.level as usize).states[node.state_idx as usize],
        drifts,
    }
}

// ---------------------------------------------------------------------------
// Bounded double-ended stack
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct OrderKey<T> {
    prio: T,
    tie: u128,
}

fn tie_key(level: u16, drifts: &[i16], last_bit: u8, seq: u64) -> u128 {
    let mut dbits: u32 = 0;
    for j in 0..4 {
        let d = drifts.get(j).copied().unwrap_or(0);
        debug_assert!((-127..=127).contains(&d));
        let biased = (d as i32 + 128) as u32 & 0xff;
        dbits = (dbits << 8) | (0xff - biased);
    }
    ((level as u128) << 104)
        | ((dbits as u128) << 72)
        | (((1 - (last_bit & 1)) as u128) << 64)
        | (!seq as u128)
}

fn key_less<T: Real>(a: &OrderKey<T>, b: &OrderKey<T>) -> bool {
    match a.prio.partial_cmp(&b.prio).expect("metric is never NaN") {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.tie < b.tie,
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    key: OrderKey<T>,
    idx: u32,
}

/// Capacity-bounded container with `pop_best` (maximum) and eviction of the
/// minimum on overflow, realized as an interval heap of order keys plus a
/// slab of nodes.
#[derive(Debug)]
pub struct BoundedStack<T: Real> {
    heap: Vec<Entry<T>>,
    slab: Vec<Option<SearchNode<T>>>,
    free: Vec<u32>,
    capacity: usize,
    pub inserted: u64,
    pub evicted: u64,
}

impl<T: Real> BoundedStack<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            heap: Vec::new(),
            slab: Vec::new(),
            free: Vec::new(),
            capacity,
            inserted: 0,
            evicted: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn order_key(node: &SearchNode<T>, seq: u64) -> OrderKey<T> {
        OrderKey {
            prio: node.priority(),
            tie: tie_key(node.level, &node.drifts, node.last_bit(), seq),
        }
    }

    /// Inserts a node; when full, the minimum (possibly the new node
    /// itself) is evicted.
    pub fn push(&mut self, node: SearchNode<T>, seq: u64) {
        let key = Self::order_key(&node, seq);
        self.inserted += 1;
        if self.heap.len() >= self.capacity {
            // Equivalent to insert-then-remove-bottom without touching the
            // heap when the new node is the bottom.
            let min = &self.heap[0].key;
            if key_less(&key, min) {
                self.evicted += 1;
                return;
            }
        }
        let idx = match self.free.pop() {
            Some(i) => {
                self.slab[i as usize] = Some(node);
                i
            }
            None => {
                self.slab.push(Some(node));
                (self.slab.len() - 1) as u32
            }
        };
        ih_push(&mut self.heap, Entry { key, idx });
        if self.heap.len() > self.capacity {
            let e = ih_pop_min(&mut self.heap).unwrap();
            self.slab[e.idx as usize] = None;
            self.free.push(e.idx);
            self.evicted += 1;
        }
    }

    pub fn pop_best(&mut self) -> Option<SearchNode<T>> {
        let e = ih_pop_max(&mut self.heap)?;
        let node = self.slab[e.idx as usize].take().expect("live entry");
        self.free.push(e.idx);
        Some(node)
    }

    pub fn peek_best_priority(&self) -> Option<T> {
        if self.heap.is_empty() {
            None
        } else if self.heap.len() >= 2 {
            Some(self.heap[1].key.prio)
        } else {
            Some(self.heap[0].key.prio)
        }
    }
}

fn ih_less<T: Real>(v: &[Entry<T>], a: usize, b: usize) -> bool {
    key_less(&v[a].key, &v[b].key)
}

fn ih_push<T: Real>(v: &mut Vec<Entry<T>>, e: Entry<T>) {
    v.push(e);
    let i = v.len() - 1;
    if i == 0 {
        return;
    }
    if i % 2 == 1 {
        if ih_less(v, i, i - 1) {
            v.swap(i - 1, i);
            ih_sift_up_min(v, i - 1);
        } else {
            ih_sift_up_max(v, i);
        }
    } else {
        let pk = (i / 2 - 1) / 2;
        let (pl, ph) = (2 * pk, 2 * pk + 1);
        if ih_less(v, ph, i) {
            v.swap(i, ph);
            ih_sift_up_max(v, ph);
        } else if ih_less(v, i, pl) {
            v.swap(i, pl);
            ih_sift_up_min(v, pl);
        }
    }
}

fn ih_sift_up_min<T: Real>(v: &mut [Entry<T>], mut i: usize) {
    while i >= 2 {
        let pl = 2 * ((i / 2 - 1) / 2);
        if ih_less(v, i, pl) {
            v.swap(i, pl);
            i = pl;
        } else {
            break;
        }
    }
}

fn ih_sift_up_max<T: Real>(v: &mut [Entry<T>], mut i: usize) {
    while i >= 2 {
        let ph = 2 * ((i / 2 - 1) / 2) + 1;
        if ih_less(v, ph, i) {
            v.swap(i, ph);
            i = ph;
        } else {
            break;
        }
    }
}

fn ih_pop_min<T: Real>(v: &mut Vec<Entry<T>>) -> Option<Entry<T>> {
    match v.len() {
        0 => None,
        1 => v.pop(),
        _ => {
            let res = v[0];
            let last = v.pop().unwrap();
            if !v.is_empty() {
                v[0] = last;
                if v.len() >= 2 && ih_less(v, 1, 0) {
                    v.swap(0, 1);
                }
                ih_sift_down_min(v, 0);
            }
            Some(res)
        }
    }
}

fn ih_pop_max<T: Real>(v: &mut Vec<Entry<T>>) -> Option<Entry<T>> {
    match v.len() {
        0 => None,
        1 => v.pop(),
        2 => v.pop(),
        _ => {
            let res = v[1];
            let last = v.pop().unwrap();
            v[1] = last;
            if ih_less(v, 1, 0) {
                v.swap(0, 1);
            }
            ih_sift_down_max(v, 1);
            Some(res)
        }
    }
}

fn ih_sift_down_min<T: Real>(v: &mut [Entry<T>], mut i: usize) {
    loop {
        let k = i / 2;
        let (l1, l2) = (2 * (2 * k + 1), 2 * (2 * k + 2));
        let mut j = usize::MAX;
        if l1 < v.len() {
            j = l1;
        }
        if l2 < v.len() && ih_less(v, l2, l1) {
            j = l2;
        }
        if j == usize::MAX || !ih_less(v, j, i) {
            break;
        }
        v.swap(i, j);
        if j + 1 < v.len() && ih_less(v, j + 1, j) {
            v.swap(j, j + 1);
        }
        i = j;
    }
}

fn ih_sift_down_max<T: Real>(v: &mut [Entry<T>], mut i: usize) {
    loop {
        let k = i / 2;
        let high = |c: usize| -> Option<usize> {
            if 2 * c + 1 < v.len() {
                Some(2 * c + 1)
            } else if 2 * c < v.len() {
                Some(2 * c)
            } else {
                None
            }
        };
        let h1 = high(2 * k + 1);
        let h2 = high(2 * k + 2);
        let j = match (h1, h2) {
            (Some(a), Some(b)) => {
                if ih_less(v, a, b) {
                    b
                } else {
                    a
                }
            }
            (Some(a), None) => a,
            _ => break,
        };
        if !ih_less(v, i, j) {
            break;
        }
        v.swap(i, j);
        if j % 2 == 1 && ih_less(v, j, j - 1) {
            v.swap(j - 1, j);
        }
        i = j;
    }
}

// ---------------------------------------------------------------------------
// Unidirectional decoding
// ---------------------------------------------------------------------------

fn success<T: Real>(
    ctx: &DecodeContext<'_, T>,
    node: &SearchNode<T>,
    expansions: u64,
    inserted: u64,
    evicted: u64,
    merge_level: Option<usize>,
    t0: Instant,
) -> DecodeResult {
    let codeword = node.bits.to_vec();
    DecodeResult {
        info_bits: ctx.trellis.extract_info_bits(&codeword),
        codeword,
        erasure: false,
        expansions,
        inserted,
        evicted,
        merge_level,
        elapsed: t0.elapsed(),
    }
}

fn erasure_fill<T: Real, R: Rng>(
    ctx: &DecodeContext<'_, T>,
    node: &SearchNode<T>,
    rng: &mut R,
) -> Vec<u8> {
    let mut bits = node.bits.to_vec();
    let rest = ctx.trellis.continue_path(node.level as usize, node.state_idx, &mut |_| {
        rng.gen::<bool>()
    });
    bits.extend(rest);
    bits
}

/// Best-first search over the joint channel-and-code tree. On budget
/// exhaustion the current best node's partial codeword is completed by
/// encoding random information bits through the remaining trellis.
pub fn decode_stack<T: Real, R: Rng>(
    ctx: &DecodeContext<'_, T>,
    params: &StackParams,
    rng: &mut R,
) -> DecodeResult {
    let t0 = Instant::now();
    let mut stack = BoundedStack::new(params.capacity);
    let mut seq: u64 = 0;
    let root = ctx.root();
    let mut last = root.clone();
    stack.push(root, seq);
    let mut expansions = 0u64;
    loop {
        let Some(top) = stack.pop_best() else {
            // Every surviving branch was pruned: fall back to the deepest
            // committed node.
            let codeword = erasure_fill(ctx, &last, rng);
            return DecodeResult {
                info_bits: ctx.trellis.extract_info_bits(&codeword),
                codeword,
                erasure: true,
                expansions,
                inserted: stack.inserted,
                evicted: stack.evicted,
                merge_level: None,
                elapsed: t0.elapsed(),
            };
        };
        if ctx.is_terminal(&top) {
            return success(ctx, &top, expansions, stack.inserted, stack.evicted, None, t0);
        }
        if expansions >= params.max_expansions {
            let codeword = erasure_fill(ctx, &top, rng);
            return DecodeResult {
                info_bits: ctx.trellis.extract_info_bits(&codeword),
                codeword,
                erasure: true,
                expansions,
                inserted: stack.inserted,
                evicted: stack.evicted,
                merge_level: None,
                elapsed: t0.elapsed(),
            };
        }
        expansions += 1;
        ctx.for_each_child(&top, |child| {
            seq += 1;
            stack.push(child, seq);
        });
        last = top;
    }
}

// ---------------------------------------------------------------------------
// Bidirectional decoding
// ---------------------------------------------------------------------------

struct Side<'c, 'a, T: Real> {
    ctx: &'c DecodeContext<'a, T>,
    backward: bool,
    stack: BoundedStack<T>,
    visited: HashMap<VisitedKey, (T, BitString)>,
    seq: u64,
    pops: u64,
    cap: u64,
    last: SearchNode<T>,
}

impl<'c, 'a, T: Real> Side<'c, 'a, T> {
    fn new(ctx: &'c DecodeContext<'a, T>, backward: bool, capacity: usize, cap: u64) -> Self {
        let root = ctx.root();
        let mut stack = BoundedStack::new(capacity);
        let mut visited = HashMap::new();
        visited.insert(Self::key_of(ctx, backward, &root), (root.g, root.bits.clone()));
        stack.push(root.clone(), 0);
        Side {
            ctx,
            backward,
            stack,
            visited,
            seq: 0,
            pops: 0,
            cap,
            last: root,
        }
    }

    fn key_of(ctx: &DecodeContext<'_, T>, backward: bool, node: &SearchNode<T>) -> VisitedKey {
        if backward {
            visited_key_backward(ctx, node)
        } else {
            visited_key(ctx, node)
        }
    }

    fn available(&self) -> bool {
        !self.stack.is_empty() && self.pops < self.cap
    }

    /// Partial codeword of a node in forward level coordinates:
    /// `(first level covered, bits)`.
    fn cover(&self, bits: &BitString, level: usize) -> (usize, Vec<u8>) {
        let n = self.ctx.codeword_len();
        let mut v = bits.to_vec();
        if self.backward {
            v.reverse();
            (n - level, v)
        } else {
            (0, v)
        }
    }
}

/// One candidate produced by a meet.
struct Candidate<T> {
    score: T,
    merged: Vec<u8>,
    level: usize,
}

/// Bidirectional stack decoding: a forward decoder and a backward decoder
/// (on the column-reversed parity-check matrix, reversed traces, reversed
/// priors and offset) expand in strict alternation, forward first. Each new
/// child is looked up in the opposite side's visited map; the first hit
/// terminates the search, the merged word is checked against `h`, and its
/// score is `g_fwd + g_bwd`. On budget exhaustion the two best partial
/// paths are concatenated, preferring forward bits on overlap, with the gap
/// filled by random bits.
pub fn decode_bistack<T: Real, R: Rng>(
    ctx_fwd: &DecodeContext<'_, T>,
    ctx_bwd: &DecodeContext<'_, T>,
    h: &BinaryParityCheck,
    params: &BistackParams,
    rng: &mut R,
) -> DecodeResult {
    let t0 = Instant::now();
    let n = ctx_fwd.codeword_len();
    debug_assert_eq!(ctx_bwd.codeword_len(), n);
    let half = params.total_expansions / 2;
    let mut fwd = Side::new(
        ctx_fwd,
        false,
        params.capacity,
        params.forward_cap.unwrap_or(half),
    );
    let mut bwd = Side::new(
        ctx_bwd,
        true,
        params.capacity,
        params.backward_cap.unwrap_or(params.total_expansions - half),
    );
    let mut total_pops = 0u64;
    let mut turn = 0usize; // 0 = forward
    loop {
        if total_pops >= params.total_expansions {
            break;
        }
        if fwd.visited.len() + bwd.visited.len() >= params.visited_limit {
            break;
        }
        let use_fwd = match (fwd.available(), bwd.available()) {
            (true, true) => turn == 0,
            (true, false) => true,
            (false, true) => false,
            (false, false) => break,
        };
        let outcome = if use_fwd {
            step_side(&mut fwd, &mut bwd, &mut total_pops)
        } else {
            step_side(&mut bwd, &mut fwd, &mut total_pops)
        };
        if use_fwd {
            turn = 1;
        } else {
            turn = 0;
        }
        match outcome {
            StepOutcome::Complete(node, side_backward) => {
                let (codeword, _) = if side_backward {
                    let (_, v) = bwd.cover(&node.bits, node.level as usize);
                    (v, 0)
                } else {
                    (node.bits.to_vec(), 0)
                };
                assert!(h.syndrome_ok(&codeword), "complete path violates parity");
                return DecodeResult {
                    info_bits: ctx_fwd.trellis.extract_info_bits(&codeword),
                    codeword,
                    erasure: false,
                    expansions: total_pops,
                    inserted: fwd.stack.inserted + bwd.stack.inserted,
                    evicted: fwd.stack.evicted + bwd.stack.evicted,
                    merge_level: None,
                    elapsed: t0.elapsed(),
                };
            }
            StepOutcome::Meet(c) => {
                assert!(h.syndrome_ok(&c.merged), "merged word violates parity");
                return DecodeResult {
                    info_bits: ctx_fwd.trellis.extract_info_bits(&c.merged),
                    codeword: c.merged,
                    erasure: false,
                    expansions: total_pops,
                    inserted: fwd.stack.inserted + bwd.stack.inserted,
                    evicted: fwd.stack.evicted + bwd.stack.evicted,
                    merge_level: Some(c.level),
                    elapsed: t0.elapsed(),
                };
            }
            StepOutcome::Continue => {}
        }
    }

    // Erasure: forward prefix, backward suffix, random gap, forward wins
    // overlaps.
    let f_top = fwd.stack.pop_best().unwrap_or_else(|| fwd.last.clone());
    let b_top = bwd.stack.pop_best().unwrap_or_else(|| bwd.last.clone());
    let (_, f_bits) = fwd.cover(&f_top.bits, f_top.level as usize);
    let (b_start, b_bits) = bwd.cover(&b_top.bits, b_top.level as usize);
    let mut out: Vec<Option<u8>> = vec![None; n];
    for (i, &b) in b_bits.iter().enumerate() {
        out[b_start + i] = Some(b);
    }
    for (i, &b) in f_bits.iter().enumerate() {
        out[i] = Some(b);
    }
    let codeword: Vec<u8> = out
        .into_iter()
        .map(|b| b.unwrap_or_else(|| rng.gen::<bool>() as u8))
        .collect();
    DecodeResult {
        info_bits: ctx_fwd.trellis.extract_info_bits(&codeword),
        codeword,
        erasure: true,
        expansions: total_pops,
        inserted: fwd.stack.inserted + bwd.stack.inserted,
        evicted: fwd.stack.evicted + bwd.stack.evicted,
        merge_level: None,
        elapsed: t0.elapsed(),
    }
}

enum StepOutcome<T: Real> {
    Continue,
    Complete(SearchNode<T>, bool),
    Meet(Candidate<T>),
}

fn step_side<T: Real>(
    side: &mut Side<'_, '_, T>,
    other: &mut Side<'_, '_, T>,
    total_pops: &mut u64,
) -> StepOutcome<T> {
    let Some(top) = side.stack.pop_best() else {
        return StepOutcome::Continue;
    };
    if side.ctx.is_terminal(&top) {
        return StepOutcome::Complete(top, side.backward);
    }
    // Record the visited node, keeping the best g per key.
    let key = Side::key_of(side.ctx, side.backward, &top);
    match side.visited.entry(key) {
        std::collections::hash_map::Entry::Occupied(mut e) => {
            if top.g > e.get().0 {
                e.insert((top.g, top.bits.clone()));
            }
        }
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert((top.g, top.bits.clone()));
        }
    }
    side.pops += 1;
    *total_pops += 1;

    let mut best: Option<Candidate<T>> = None;
    let n = side.ctx.codeword_len();
    let side_backward = side.backward;
    let ctx = side.ctx;
    let mut seq = side.seq;
    let stack = &mut side.stack;
    ctx.for_each_child(&top, |child| {
        let key = Side::key_of(ctx, side_backward, &child);
        if let Some((g_other, bits_other)) = other.visited.get(&key) {
            let score = child.g + *g_other;
            let replace = best.as_ref().is_none_or(|b| score > b.score);
            if replace {
                let child_level = child.level as usize;
                let (merged, level) = if side_backward {
                    // child covers levels [n - child_level, n); the
                    // forward node covers [0, n - child_level).
                    let mut m = bits_other.to_vec();
                    let mut suffix = child.bits.to_vec();
                    suffix.reverse();
                    m.extend(suffix);
                    (m, n - child_level)
                } else {
                    let mut m = child.bits.to_vec();
                    let mut suffix = bits_other.to_vec();
                    suffix.reverse();
                    m.extend(suffix);
                    (m, child_level)
                };
                debug_assert_eq!(merged.len(), n);
                best = Some(Candidate { score, merged, level });
            }
        }
        seq += 1;
        stack.push(child, seq);
    });
    side.seq = seq;
    side.last = top;
    match best {
        Some(c) => StepOutcome::Meet(c),
        None => StepOutcome::Continue,
    }
}
