//! Word-packed binary vectors and matrices with AND+popcount integration.
//!
//! Bit `i` of a vector lives in word `i / W::BITS` at position `i % W::BITS`.
//! Bits past the logical length are always zero, so whole-word operations
//! never see padding.

use std::hint::black_box;
use std::ops::BitAnd;
use std::time::Instant;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rng::Stream;

pub trait Word: Copy + Default + Eq + BitAnd<Output = Self> + std::fmt::Debug + Send + Sync + 'static {
    const BITS: usize;
    const ZERO: Self;
    fn set_bit(self, pos: usize) -> Self;
    fn bit(self, pos: usize) -> bool;
    fn count_ones(self) -> u32;
    fn trailing_zeros(self) -> u32;
    fn clear_lowest(self) -> Self;
}

macro_rules! impl_word {
    ($t:ty) => {
        impl Word for $t {
            const BITS: usize = <$t>::BITS as usize;
            const ZERO: Self = 0;
            #[inline(always)]
            fn set_bit(self, pos: usize) -> Self {
                self | (1 << pos)
            }
            #[inline(always)]
            fn bit(self, pos: usize) -> bool {
                (self >> pos) & 1 == 1
            }
            #[inline(always)]
            fn count_ones(self) -> u32 {
                <$t>::count_ones(self)
            }
            #[inline(always)]
            fn trailing_zeros(self) -> u32 {
                <$t>::trailing_zeros(self)
            }
            #[inline(always)]
            fn clear_lowest(self) -> Self {
                self & self.wrapping_sub(1)
            }
        }
    };
}

impl_word!(u32);
impl_word!(u64);

#[inline]
pub fn words_for<W: Word>(len: usize) -> usize {
    len.div_ceil(W::BITS)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBitVector<W: Word = u64> {
    words: Vec<W>,
    len: usize,
}

impl<W: Word> PackedBitVector<W> {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![W::ZERO; words_for::<W>(len)],
            len,
        }
    }

    /// Nonzero entries of `bits` become set bits.
    pub fn pack(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        v.repack(bits);
        v
    }

    /// Overwrites the contents in place; `bits.len()` must equal `self.len()`.
    pub fn repack(&mut self, bits: &[u8]) {
        debug_assert_eq!(bits.len(), self.len);
        pack_into(bits, &mut self.words);
    }

    pub fn unpack(&self) -> Vec<u8> {
        (0..self.len).map(|i| u8::from(self.get(i))).collect()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / W::BITS].bit(i % W::BITS)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[W] {
        &self.words
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Set bit positions in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        iter_ones(&self.words)
    }
}

fn pack_into<W: Word>(bits: &[u8], words: &mut [W]) {
    for (word, chunk) in words.iter_mut().zip(bits.chunks(W::BITS)) {
        let mut w = W::ZERO;
        for (pos, &b) in chunk.iter().enumerate() {
            if b != 0 {
                w = w.set_bit(pos);
            }
        }
        *word = w;
    }
}

pub(crate) fn iter_ones<W: Word>(words: &[W]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(b, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == W::ZERO {
                None
            } else {
                let pos = rest.trailing_zeros() as usize;
                rest = rest.clear_lowest();
                Some(b * W::BITS + pos)
            }
        })
    })
}

#[inline(always)]
fn and_popcount<W: Word>(a: &[W], b: &[W]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| (x & y).count_ones()).sum()
}

/// Row-major packed matrix: one packed row per postsynaptic neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBitMatrix<W: Word = u64> {
    rows: usize,
    len: usize,
    row_words: usize,
    data: Vec<W>,
}

impl<W: Word> PackedBitMatrix<W> {
    /// `bits` holds `rows * len` entries, row-major.
    pub fn from_rows(bits: &[u8], rows: usize, len: usize) -> Result<Self> {
        if bits.len() != rows * len {
            return Err(Error::DimensionMismatch {
                expected: rows * len,
                actual: bits.len(),
            });
        }
        Ok(Self::from_fn(rows, len, |r, c| bits[r * len + c] != 0))
    }

    pub fn from_fn(rows: usize, len: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let row_words = words_for::<W>(len);
        let mut data = vec![W::ZERO; rows * row_words];
        for r in 0..rows {
            for c in 0..len {
                if f(r, c) {
                    let w = &mut data[r * row_words + c / W::BITS];
                    *w = w.set_bit(c % W::BITS);
                }
            }
        }
        Self {
            rows,
            len,
            row_words,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.len == 0
    }

    pub fn row_words(&self, r: usize) -> &[W] {
        &self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    pub fn row(&self, r: usize) -> PackedBitVector<W> {
        PackedBitVector {
            words: self.row_words(r).to_vec(),
            len: self.len,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.row_words + c / W::BITS].bit(c % W::BITS)
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// `out[j] = popcount(row_j AND spikes)` for every row.
    pub fn popcount_matvec_into(&self, spikes: &PackedBitVector<W>, out: &mut [i32]) -> Result<()> {
        check_len(self.len, spikes.len)?;
        let s = spikes.words();
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.row_words.max(1))) {
            *o = and_popcount(row, s) as i32;
        }
        Ok(())
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

/// `m^T s` as `sum_b popcount(M_b AND S_b)`.
pub fn masked_popcount_dot<W: Word>(mask_row: &PackedBitVector<W>, spikes: &PackedBitVector<W>) -> Result<u32> {
    check_len(mask_row.len, spikes.len)?;
    Ok(and_popcount(&mask_row.words, &spikes.words))
}

/// Signed integration with Dale's-law masks: excitatory minus inhibitory
/// masked spike counts, row by row.
pub fn signed_integrate<W: Word>(
    exc: &PackedBitMatrix<W>,
    inh: &PackedBitMatrix<W>,
    spikes: &PackedBitVector<W>,
) -> Result<Vec<i32>> {
    let mut out = vec![0; exc.rows];
    signed_integrate_into(exc, inh, spikes, &mut out)?;
    Ok(out)
}

pub fn signed_integrate_into<W: Word>(
    exc: &PackedBitMatrix<W>,
    inh: &PackedBitMatrix<W>,
    spikes: &PackedBitVector<W>,
    out: &mut [i32],
) -> Result<()> {
    check_len(exc.len, spikes.len)?;
    check_len(inh.len, spikes.len)?;
    if exc.rows != inh.rows || out.len() != exc.rows {
        return Err(Error::DimensionMismatch {
            expected: exc.rows,
            actual: inh.rows.min(out.len()),
        });
    }
    let s = spikes.words();
    let rw = exc.row_words.max(1);
    for ((o, e), i) in out
        .iter_mut()
        .zip(exc.data.chunks_exact(rw))
        .zip(inh.data.chunks_exact(rw))
    {
        *o = and_popcount(e, s) as i32 - and_popcount(i, s) as i32;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchResult {
    pub d_in: usize,
    pub rows: usize,
    pub bitset_ns: f64,
    pub dense_ns: f64,
    pub ratio: f64,
}

impl BenchResult {
    pub const CSV_HEADER: &'static str = "d,rows,bitset_ns,dense_ns,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.1},{:.1},{:.3}",
            self.d_in, self.rows, self.bitset_ns, self.dense_ns, self.ratio
        )
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn time_per_call(inner: usize, mut f: impl FnMut()) -> f64 {
    let start = Instant::now();
    for _ in 0..inner {
        f();
    }
    start.elapsed().as_nanos() as f64 / inner as f64
}

/// Times one signed synaptic integration (half excitatory, half inhibitory
/// presynaptic neurons, ~50% connectivity, ~10% spike density) through the
/// packed kernel and through a dense `f32` matvec on the same logical
/// input. Median nanoseconds per matvec over `reps` batches.
pub fn bench_kernel(d_in: usize, rows: usize, reps: usize) -> Result<BenchResult> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let stream = Stream::new(0xbe9c).derive(d_in as u64).derive(rows as u64);
    let n_exc = d_in / 2;
    let conn: Vec<u8> = (0..rows * d_in)
        .map(|k| u8::from(stream.uniform_at(k as u64) < 0.5))
        .collect();
    let spikes: Vec<u8> = (0..d_in)
        .map(|k| u8::from(stream.derive(1).uniform_at(k as u64) < 0.1))
        .collect();

    let exc = PackedBitMatrix::<u64>::from_fn(rows, d_in, |r, c| c < n_exc && conn[r * d_in + c] != 0);
    let inh = PackedBitMatrix::<u64>::from_fn(rows, d_in, |r, c| c >= n_exc && conn[r * d_in + c] != 0);
    let dense = DenseMatrix::from_fn(rows, d_in, |r, c| {
        let w = f32::from(conn[r * d_in + c]);
        if c < n_exc {
            w
        } else {
            -w
        }
    });
    let spikes_f: Vec<f32> = spikes.iter().map(|&b| f32::from(b)).collect();

    let mut packed = PackedBitVector::<u64>::zeros(d_in);
    let mut out_bits = vec![0i32; rows];
    let mut out_dense = vec![0f32; rows];

    packed.repack(&spikes);
    signed_integrate_into(&exc, &inh, &packed, &mut out_bits)?;
    dense.matvec_into(&spikes_f, &mut out_dense)?;
    for (r, (&a, &b)) in out_bits.iter().zip(&out_dense).enumerate() {
        if a as f32 != b {
            return Err(Error::InvalidParameter(format!(
                "bench kernels disagree at row {r}: bitset {a}, dense {b}"
            )));
        }
    }

    // aim for ~100us per timed batch
    let work = (rows * d_in).max(1);
    let inner = (2_000_000 / work).clamp(1, 10_000);
    let mut bit_ns = Vec::with_capacity(reps);
    let mut dense_ns = Vec::with_capacity(reps);
    for _ in 0..reps {
        // packing the spike vector is part of every bitset integration
        bit_ns.push(time_per_call(inner, || {
            packed.repack(black_box(&spikes));
            signed_integrate_into(&exc, &inh, black_box(&packed), &mut out_bits).unwrap();
            black_box(&out_bits);
        }));
        dense_ns.push(time_per_call(inner, || {
            dense.matvec_into(black_box(&spikes_f), &mut out_dense).unwrap();
            black_box(&out_dense);
        }));
    }
    let bitset_ns = median(&mut bit_ns);
    let dense_ns = median(&mut dense_ns);
    Ok(BenchResult {
        d_in,
        rows,
        bitset_ns,
        dense_ns,
        ratio: dense_ns / bitset_ns,
    })
}
