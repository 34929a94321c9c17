//! Replays the fuzz corpus seeds, and random mutations of them, through the
//! same invariants the fuzz targets check.

use std::fs;
use std::path::PathBuf;

use commonrec::bridge::parse_reply;
use commonrec::config::RunConfig;
use commonrec::datasets::{parse_tu, to_tu, TuFiles};
use commonrec::graphspace::{canonical_key, collection_to_text, parse_collection, parse_graph, to_text};
use commonrec::walk::parse_checkpoint;
use proptest::prelude::*;

const TARGETS: [&str; 5] = ["graph_text", "tu_parse", "bridge_reply", "checkpoint", "config"];

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

fn graph_text(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_graph(text) {
        assert_eq!(parse_graph(&to_text(&g)).unwrap(), g);
        if g.node_count() <= 12 {
            let _ = canonical_key(&g);
        }
    }
    if let Ok(gs) = parse_collection(text) {
        assert_eq!(parse_collection(&collection_to_text(&gs)).unwrap(), gs);
    }
}

fn tu_parse(data: &[u8]) {
    let parts: Vec<&[u8]> = data.split(|&b| b == 0xff).collect();
    if parts.len() < 3 {
        return;
    }
    let text = |b: &[u8]| String::from_utf8_lossy(b).into_owned();
    let files = TuFiles {
        a: text(parts[0]),
        graph_indicator: text(parts[1]),
        graph_labels: text(parts[2]),
        node_labels: parts.get(3).map(|b| text(b)),
    };
    if let Ok(ds) = parse_tu("fuzz", &files) {
        assert_eq!(parse_tu("fuzz", &to_tu(&ds)).unwrap().graphs, ds.graphs);
    }
}

fn bridge_reply(data: &[u8]) {
    if let Ok(line) = std::str::from_utf8(data) {
        let _ = parse_reply(line);
    }
}

fn checkpoint(data: &[u8]) {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_checkpoint(text);
    }
}

fn config(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_toml(text, &[]) {
        assert_eq!(RunConfig::from_toml(&cfg.to_toml(), &[]).unwrap(), cfg);
    }
}

fn run(target: &str, data: &[u8]) {
    match target {
        "graph_text" => graph_text(data),
        "tu_parse" => tu_parse(data),
        "bridge_reply" => bridge_reply(data),
        "checkpoint" => checkpoint(data),
        "config" => config(data),
        other => unreachable!("{other}"),
    }
}

#[test]
fn every_target_has_seeds_that_parse() {
    for target in TARGETS {
        let seeds = seeds(target);
        assert!(seeds.len() >= 2, "{target} has {} seeds", seeds.len());
        for s in &seeds {
            run(target, s);
        }
    }
    // the well-formed seeds must actually be accepted
    assert!(parse_checkpoint(std::str::from_utf8(&seeds("checkpoint")[1]).unwrap()).is_ok());
    assert!(RunConfig::from_toml(std::str::from_utf8(&seeds("config")[0]).unwrap(), &[]).is_ok());
}

#[derive(Clone, Debug)]
enum Mutation {
    Flip(usize, u8),
    Insert(usize, u8),
    Delete(usize),
    Truncate(usize),
}

fn mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        (any::<usize>(), any::<u8>()).prop_map(|(i, b)| Mutation::Flip(i, b)),
        (any::<usize>(), prop::sample::select(b"0123456789 \n-.{}[]\",:=e".to_vec())).prop_map(|(i, b)| Mutation::Insert(i, b)),
        any::<usize>().prop_map(Mutation::Delete),
        any::<usize>().prop_map(Mutation::Truncate),
    ]
}

fn mutate(mut data: Vec<u8>, ms: &[Mutation]) -> Vec<u8> {
    for m in ms {
        let n = data.len();
        match *m {
            Mutation::Flip(i, b) if n > 0 => data[i % n] ^= b,
            Mutation::Insert(i, b) => data.insert(i % (n + 1), b),
            Mutation::Delete(i) if n > 0 => {
                data.remove(i % n);
            }
            Mutation::Truncate(i) => data.truncate(i % (n + 1)),
            _ => {}
        }
    }
    data
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mutated_seeds_never_panic(
        target in prop::sample::select(TARGETS.to_vec()),
        pick in any::<usize>(),
        ms in prop::collection::vec(mutation(), 1..6),
    ) {
        let seeds = seeds(target);
        let data = mutate(seeds[pick % seeds.len()].clone(), &ms);
        run(target, &data);
    }
}
