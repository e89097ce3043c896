//! Bit-packed vectors over GF(2) and rank by Gaussian elimination.

/// Number of `u64` words needed to hold `bits` bits.
#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i & 63);
    if value {
        words[i >> 6] |= mask;
    } else {
        words[i >> 6] &= !mask;
    }
}

#[inline]
pub(crate) fn flip_bit(words: &mut [u64], i: usize) {
    words[i >> 6] ^= 1u64 << (i & 63);
}

/// A dense matrix over GF(2) with rows packed into machine words.
///
/// Rows are stored contiguously with a fixed stride, so elimination touches
/// one cache line per row for the small widths used by the simulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    /// Build a matrix whose rows are the given packed vectors of `cols` bits.
    pub fn from_packed_rows<'a, I>(cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [u64]>,
    {
        let stride = words_for(cols);
        let mut data = Vec::new();
        let mut count = 0;
        for row in rows {
            debug_assert!(row.len() >= stride);
            data.extend_from_slice(&row[..stride]);
            count += 1;
        }
        Self { rows: count, cols, stride, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        get_bit(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let s = self.stride;
        set_bit(&mut self.data[r * s..(r + 1) * s], c, value);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// Rank over GF(2). Consumes the matrix since elimination is in place.
    pub fn rank(mut self) -> usize {
        let s = self.stride;
        let mut rank = 0;
        for w in 0..s {
            let mut word_bits = 64;
            if w == s - 1 && !self.cols.is_multiple_of(64) {
                word_bits = self.cols % 64;
            }
            for b in 0..word_bits {
                if rank == self.rows {
                    return rank;
                }
                let mask = 1u64 << b;
                let Some(pivot) = (rank..self.rows).find(|&r| self.data[r * s + w] & mask != 0) else {
                    continue;
                };
                if pivot != rank {
                    for k in w..s {
                        self.data.swap(pivot * s + k, rank * s + k);
                    }
                }
                let (head, tail) = self.data.split_at_mut((rank + 1) * s);
                let prow = &head[rank * s..];
                for row in tail.chunks_exact_mut(s) {
                    if row[w] & mask != 0 {
                        for k in w..s {
                            row[k] ^= prow[k];
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

/// Rank of a collection of packed GF(2) vectors of `bits` bits each.
pub fn rank_of_vectors<'a, I>(bits: usize, vectors: I) -> usize
where
    I: IntoIterator<Item = &'a [u64]>,
{
    match words_for(bits) {
        0 => 0,
        1 => basis_rank::<1, _>(vectors),
        2 => basis_rank::<2, _>(vectors),
        3 => basis_rank::<3, _>(vectors),
        4 => basis_rank::<4, _>(vectors),
        5 => basis_rank::<5, _>(vectors),
        6 => basis_rank::<6, _>(vectors),
        7 => basis_rank::<7, _>(vectors),
        8 => basis_rank::<8, _>(vectors),
        _ => BitMatrix::from_packed_rows(bits, vectors).rank(),
    }
}

// Insert each vector into a basis keyed by lowest set bit. A basis vector
// has no bits below its key, so reducing in ascending bit order terminates.
fn basis_rank<'a, const W: usize, I>(vectors: I) -> usize
where
    I: IntoIterator<Item = &'a [u64]>,
{
    let mut basis: Vec<[u64; W]> = Vec::new();
    let mut slot = vec![u32::MAX; W * 64];
    for v in vectors {
        let mut row = [0u64; W];
        row.copy_from_slice(&v[..W]);
        for w in 0..W {
            while row[w] != 0 {
                let bit = w * 64 + row[w].trailing_zeros() as usize;
                match slot[bit] {
                    u32::MAX => {
                        slot[bit] = basis.len() as u32;
                        basis.push(row);
                        row = [0; W];
                    }
                    k => {
                        let b = &basis[k as usize];
                        for i in w..W {
                            row[i] ^= b[i];
                        }
                    }
                }
            }
        }
    }
    basis.len()
}
