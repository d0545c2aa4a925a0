use proptest::prelude::*;

use satr::bitset::{
    bench_kernel, masked_popcount_dot, signed_integrate, words_for, PackedBitMatrix, PackedBitVector,
};
use satr::dense::dense_dot;
use satr::rng::Stream;

fn bits_of(value: u32, d: usize) -> Vec<u8> {
    (0..d).map(|i| ((value >> i) & 1) as u8).collect()
}

fn random_bits(s: &Stream, offset: u64, d: usize, p: f64) -> Vec<u8> {
    (0..d).map(|i| u8::from(s.uniform_at(offset + i as u64) < p)).collect()
}

/// Signed integer matvec over unpacked masks.
fn dense_signed(exc: &[u8], inh: &[u8], spikes: &[u8], rows: usize) -> Vec<i32> {
    let d = spikes.len();
    (0..rows)
        .map(|r| {
            let mut acc = 0i32;
            for c in 0..d {
                let s = i32::from(spikes[c]);
                acc += i32::from(exc[r * d + c]) * s - i32::from(inh[r * d + c]) * s;
            }
            acc
        })
        .collect()
}

proptest! {
    #[test]
    fn pack_round_trip(bits in prop::collection::vec(0u8..=1, 0..4097)) {
        let p = PackedBitVector::<u64>::pack(&bits);
        prop_assert_eq!(p.unpack(), bits.clone());
        prop_assert_eq!(p.words().len(), words_for::<u64>(bits.len()));
        prop_assert_eq!(p.count_ones() as usize, bits.iter().filter(|&&b| b == 1).count());
        let q = PackedBitVector::<u32>::pack(&bits);
        prop_assert_eq!(q.unpack(), bits);
    }

    #[test]
    fn padding_stays_zero(bits in prop::collection::vec(0u8..=1, 1..300)) {
        let ones = vec![1u8; bits.len()];
        let p = PackedBitVector::<u64>::pack(&ones);
        let tail = bits.len() % 64;
        if tail != 0 {
            let last = *p.words().last().unwrap();
            prop_assert_eq!(last >> tail, 0);
        }
        let mut r = PackedBitVector::<u64>::pack(&ones);
        r.repack(&bits);
        prop_assert_eq!(r, PackedBitVector::<u64>::pack(&bits));
    }
}

#[test]
fn all_zero_130_uses_three_words() {
    let p = PackedBitVector::<u64>::pack(&[0u8; 130]);
    assert_eq!(p.words(), &[0, 0, 0]);
    assert_eq!(p.len(), 130);
}

#[test]
fn exhaustive_small_dimensions() {
    for d in 1..=10usize {
        let vecs: Vec<(Vec<u8>, PackedBitVector)> = (0..1u32 << d)
            .map(|v| {
                let b = bits_of(v, d);
                let p = PackedBitVector::pack(&b);
                (b, p)
            })
            .collect();
        for (mb, mp) in &vecs {
            for (sb, sp) in &vecs {
                assert_eq!(masked_popcount_dot(mp, sp).unwrap(), dense_dot(mb, sb));
            }
        }
    }
}

#[test]
fn spike_patterns_exhaustive_up_to_16() {
    let s = Stream::new(77);
    for d in 11..=16usize {
        let masks: Vec<Vec<u8>> = (0..16u64)
            .map(|k| random_bits(&s, k * 64, d, 0.5))
            .chain([vec![1u8; d]])
            .collect();
        let packed: Vec<PackedBitVector> = masks.iter().map(|m| PackedBitVector::pack(m)).collect();
        for v in 0..1u32 << d {
            let sb = bits_of(v, d);
            let sp = PackedBitVector::pack(&sb);
            for (m, mp) in masks.iter().zip(&packed) {
                assert_eq!(masked_popcount_dot(mp, &sp).unwrap(), dense_dot(m, &sb));
            }
        }
    }
}

#[test]
fn word_boundaries_match_oracle() {
    let s = Stream::new(5);
    for d in [63usize, 64, 65, 100, 127, 128, 129, 256, 4096] {
        for trial in 0..50u64 {
            let p = 0.05 + 0.9 * s.uniform_at(trial);
            let m = random_bits(&s.derive(d as u64), trial * 2 * d as u64, d, p);
            let x = random_bits(&s.derive(d as u64), (trial * 2 + 1) * d as u64, d, 0.3);
            let want = dense_dot(&m, &x);
            assert_eq!(
                masked_popcount_dot(&PackedBitVector::<u64>::pack(&m), &PackedBitVector::pack(&x)).unwrap(),
                want
            );
            assert_eq!(
                masked_popcount_dot(&PackedBitVector::<u32>::pack(&m), &PackedBitVector::pack(&x)).unwrap(),
                want
            );
        }
    }
}

#[test]
fn trivial_dot_examples() {
    let all = PackedBitVector::<u64>::pack(&[1u8; 128]);
    let mut five = vec![0u8; 128];
    for i in [0, 13, 64, 90, 127] {
        five[i] = 1;
    }
    assert_eq!(masked_popcount_dot(&all, &PackedBitVector::pack(&five)).unwrap(), 5);
    let evens: Vec<u8> = (0..128).map(|i| u8::from(i % 2 == 0)).collect();
    let odds: Vec<u8> = (0..128).map(|i| u8::from(i % 2 == 1)).collect();
    assert_eq!(
        masked_popcount_dot(&PackedBitVector::<u64>::pack(&evens), &PackedBitVector::pack(&odds)).unwrap(),
        0
    );
    assert!(masked_popcount_dot(&all, &PackedBitVector::pack(&[1u8; 127])).is_err());
}

#[test]
fn signed_integrate_matches_dense() {
    let s = Stream::new(9);
    for trial in 0..1000u64 {
        let t = s.derive(trial);
        let d = 1 + t.range_at(0, 0.0, 300.0) as usize;
        let rows = 1 + t.range_at(1, 0.0, 40.0) as usize;
        let n_exc = (t.range_at(2, 0.0, d as f64 + 1.0) as usize).min(d);
        let conn = random_bits(&t.derive(1), 0, rows * d, 0.5);
        let exc: Vec<u8> = (0..rows * d).map(|k| u8::from(k % d < n_exc) & conn[k]).collect();
        let inh: Vec<u8> = (0..rows * d).map(|k| u8::from(k % d >= n_exc) & conn[k]).collect();
        let spikes = random_bits(&t.derive(2), 0, d, 0.2);
        let got = signed_integrate(
            &PackedBitMatrix::<u64>::from_rows(&exc, rows, d).unwrap(),
            &PackedBitMatrix::<u64>::from_rows(&inh, rows, d).unwrap(),
            &PackedBitVector::pack(&spikes),
        )
        .unwrap();
        assert_eq!(got, dense_signed(&exc, &inh, &spikes, rows), "trial {trial}");
    }
}

#[test]
fn signed_integrate_examples() {
    let d = 8;
    let rows = 3;
    let mut exc = vec![0u8; rows * d];
    let mut inh = vec![0u8; rows * d];
    exc[d + 2] = 1; // row 1 listens to excitatory neuron 2
    inh[2 * d + 6] = 1;
    let e = PackedBitMatrix::<u64>::from_rows(&exc, rows, d).unwrap();
    let i = PackedBitMatrix::<u64>::from_rows(&inh, rows, d).unwrap();
    assert_eq!(signed_integrate(&e, &i, &PackedBitVector::zeros(d)).unwrap(), vec![0, 0, 0]);
    let mut s = vec![0u8; d];
    s[2] = 1;
    assert_eq!(signed_integrate(&e, &i, &PackedBitVector::pack(&s)).unwrap(), vec![0, 1, 0]);
    s[6] = 1;
    assert_eq!(signed_integrate(&e, &i, &PackedBitVector::pack(&s)).unwrap(), vec![0, 1, -1]);
    assert!(signed_integrate(&e, &i, &PackedBitVector::zeros(d + 1)).is_err());
}

#[test]
fn matrix_rows_keep_canonical_padding() {
    let m = PackedBitMatrix::<u64>::from_fn(5, 70, |_, _| true);
    for r in 0..5 {
        let w = m.row_words(r);
        assert_eq!(w.len(), 2);
        assert_eq!(w[1] >> 6, 0);
        assert_eq!(m.row(r).count_ones(), 70);
    }
    assert!(PackedBitMatrix::<u64>::from_rows(&[1u8; 10], 3, 4).is_err());
}

#[test]
fn bench_reports_consistent_numbers() {
    for d in [64usize, 100] {
        let r = bench_kernel(d, 16, 3).unwrap();
        assert_eq!((r.d_in, r.rows), (d, 16));
        assert!(r.bitset_ns > 0.0 && r.dense_ns > 0.0);
        assert!((r.ratio - r.dense_ns / r.bitset_ns).abs() < 1e-9 * r.ratio);
        assert_eq!(r.csv_row().split(',').count(), 5);
    }
    assert!(bench_kernel(64, 4, 0).is_err());
}
