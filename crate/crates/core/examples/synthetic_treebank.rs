//! Writes a seeded toy treebank in CoNLL-X format to stdout.
//!
//! Usage: synthetic_treebank <sentences> <seed> [--projective]

use std::io;

use twoplanar::conll::write_conll;
use twoplanar::synthetic::{synthetic_treebank, SyntheticConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let parse = |i: usize, default: u64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    let count = parse(0, 100) as usize;
    let seed = parse(1, 1);
    let config = if args.iter().any(|a| a == "--projective") {
        SyntheticConfig::projective()
    } else {
        SyntheticConfig::default()
    };
    let sentences = synthetic_treebank(count, &config, seed);
    write_conll(io::stdout().lock(), &sentences).expect("writing to stdout");
}
