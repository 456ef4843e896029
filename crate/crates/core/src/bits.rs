//! Fixed-width bit packing for per-vertex table blobs.

use serde::{Deserialize, Serialize};

/// Bits needed to write any value in `0..=max`.
pub fn width_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

/// `ceil(log2(x))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Append-only MSB-first bit string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the low `width` bits of `value`.
    pub fn push(&mut self, value: u64, width: u32) {
        assert!(
            width == 64 || value >> width == 0,
            "{value} does not fit in {width} bits"
        );
        for k in (0..width).rev() {
            if self.len % 8 == 0 {
                self.bytes.push(0);
            }
            if (value >> k) & 1 == 1 {
                *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
            }
            self.len += 1;
        }
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Per-vertex table sizes in bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBits {
    pub per_vertex: Vec<usize>,
    pub max: usize,
}

impl TableBits {
    pub fn new(per_vertex: Vec<usize>) -> Self {
        let max = per_vertex.iter().copied().max().unwrap_or(0);
        TableBits { per_vertex, max }
    }
}

/// Reads back what a [`BitWriter`] produced.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> u64 {
        let mut v = 0u64;
        for _ in 0..width {
            let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        v
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(width_for(0), 0);
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(2), 2);
        assert_eq!(width_for(255), 8);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn round_trip() {
        let mut w = BitWriter::new();
        w.push(5, 3);
        w.push(0, 0);
        w.push(1, 1);
        w.push(300, 9);
        assert_eq!(w.bit_len(), 13);
        let mut r = BitReader::new(w.as_bytes());
        assert_eq!((r.read(3), r.read(0), r.read(1), r.read(9)), (5, 0, 1, 300));
    }
}
