//! AND+popcount matvec against a dense f32 matvec, and how the packed
//! kernel scales with input width.

use satr::bitset::bench_kernel;

fn main() -> satr::Result<()> {
    let rows = 256;
    println!("d,rows,bitset_ns,dense_ns,ratio");
    let mut per_word = Vec::new();
    for d in [64usize, 256, 512, 4096] {
        let r = bench_kernel(d, rows, 51)?;
        println!("{}", r.csv_row());
        per_word.push((d, r.bitset_ns / d.div_ceil(64) as f64));
    }
    // linear in words: ns per packed word should stay roughly flat
    for (d, ns) in per_word {
        println!("d={d:<5} {ns:8.2} ns per 64-bit word");
    }
    Ok(())
}
