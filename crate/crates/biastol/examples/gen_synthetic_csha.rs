//! Regenerates the bundled pilot data set (data/synthetic_csha.csv):
//! 821 length-biased draws from an Exp(0.2) target with ~21% informative
//! right-censoring, written as `time,status` rows.

use std::io::Write;

fn main() {
    let sample = biastol::pilot::synthetic_csha(821, 20260826);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_csha.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).expect("create csv"));
    writeln!(out, "time,status").unwrap();
    for r in &sample.records {
        writeln!(out, "{:.6},{}", r.value, r.event as u8).unwrap();
    }
    let censored = sample.records.iter().filter(|r| !r.event).count();
    eprintln!("wrote {path}: n = {}, censored = {censored}", sample.records.len());
}
