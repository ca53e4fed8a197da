//! Compact bit strings.
//!
//! Search nodes carry their whole partial codeword instead of parent
//! pointers, so the packed representation matters: it keeps a node at a few
//! dozen bytes and avoids an arena that would outlive evicted nodes.

use smallvec::SmallVec;

/// Packed bit string, LSB-first within each word. Inline up to 256 bits,
/// which covers the bundled codes; longer strings spill to the heap.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: SmallVec<[u64; 4]>,
    len: u32,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = Self::new();
        for &b in bits {
            s.push(b != 0);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let idx = (self.len / 64) as usize;
        if idx == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[idx] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    /// Returns a copy with `bit` appended.
    pub fn appended(&self, bit: bool) -> Self {
        let mut c = self.clone();
        c.push(bit);
        c
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

/// XOR of two equal-length bit vectors.
pub fn xor_bits(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Hex packing used by the trace dump format: bits are packed MSB-first
/// into bytes, the final byte zero-padded.
pub fn bits_to_hex(bits: &[u8]) -> String {
    let mut out = String::with_capacity(bits.len().div_ceil(4));
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            byte |= (b & 1) << (7 - i);
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Inverse of [`bits_to_hex`]; `len` trims the zero padding.
pub fn hex_to_bits(hex: &str, len: usize) -> Option<Vec<u8>> {
    if hex.len() % 2 != 0 || len > hex.len() * 4 {
        return None;
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for i in (0..hex.len()).step_by(2) {
        let byte = u8::from_str_radix(&hex[i..i + 2], 16).ok()?;
        for j in 0..8 {
            bits.push((byte >> (7 - j)) & 1);
        }
    }
    bits.truncate(len);
    Some(bits)
}
