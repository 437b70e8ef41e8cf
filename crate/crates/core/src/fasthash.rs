//! Multiply-mix hashing for dense integer keys (lattice cells, box ids).
//! SipHash dominates profiles on million-box decompositions; these maps are
//! on hot paths only with pre-packed u64 keys.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

#[derive(Default, Clone)]
pub struct U64Hasher {
    h: u64,
}

impl Hasher for U64Hasher {
    #[inline]
    fn finish(&self) -> u64 {
        self.h
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.h = (self.h ^ b as u64).wrapping_mul(0x100_0000_01b3);
        }
    }

    #[inline]
    fn write_u64(&mut self, n: u64) {
        let mut z = n.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        self.h = z ^ (z >> 31);
    }
}

pub type U64Map<V> = HashMap<u64, V, BuildHasherDefault<U64Hasher>>;

/// Pack a (level, ix, iy) lattice cell into one u64 key.
/// Levels fit 8 bits biased; indices fit 28 bits biased.
#[inline]
pub fn pack_cell(level: i32, i: i64, j: i64) -> u64 {
    debug_assert!((-120..=120).contains(&level));
    debug_assert!(i.abs() < (1 << 27) && j.abs() < (1 << 27));
    let l = (level + 128) as u64 & 0xff;
    let a = (i + (1 << 27)) as u64 & 0x0fff_ffff;
    let b = (j + (1 << 27)) as u64 & 0x0fff_ffff;
    (l << 56) | (a << 28) | b
}
