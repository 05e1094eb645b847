use std::fs;
use std::path::PathBuf;

use graphnls_cli::config::{parse_evolve, parse_scan, parse_stability};
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<String> {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fuzz", "corpus", target].iter().collect();
    let mut files: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
}

#[test]
fn corpus_seeds_parse() {
    for s in seeds("evolve_config") {
        parse_evolve(&s).unwrap();
    }
    for s in seeds("stability_config") {
        parse_stability(&s).unwrap();
    }
    for s in seeds("scan_config") {
        parse_scan(&s).unwrap();
    }
}

fn mutate(seed: &str, edits: &[(usize, char)]) -> String {
    let mut v: Vec<char> = seed.chars().collect();
    for &(i, c) in edits {
        let i = i % v.len();
        v[i] = c;
    }
    v.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]
    #[test]
    fn mutated_configs_never_panic(which in 0usize..7, edits in prop::collection::vec((any::<usize>(), prop::sample::select(&['0', '9', '-', '.', 'e', '"', ',', '[', ']', '{', '}', ' '][..])), 1..6)) {
        let all: Vec<(usize, String)> = ["evolve_config", "stability_config", "scan_config"]
            .iter()
            .enumerate()
            .flat_map(|(k, t)| seeds(t).into_iter().map(move |s| (k, s)))
            .collect();
        let (kind, seed) = &all[which % all.len()];
        let text = mutate(seed, &edits);
        let _ = match kind {
            0 => parse_evolve(&text).map(|_| ()),
            1 => parse_stability(&text).map(|_| ()),
            _ => parse_scan(&text).map(|_| ()),
        };
    }

    #[test]
    fn arbitrary_text(text in ".{0,200}") {
        let _ = parse_evolve(&text);
        let _ = parse_stability(&text);
        let _ = parse_scan(&text);
    }
}
