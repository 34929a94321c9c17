#![no_main]

use commonrec::datasets::{parse_tu, to_tu, TuFiles};
use libfuzzer_sys::fuzz_target;

// Sections are separated by 0xff: A, graph indicator, graph labels, node labels (optional).
fuzz_target!(|data: &[u8]| {
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
        let again = parse_tu("fuzz", &to_tu(&ds)).unwrap();
        assert_eq!(again.graphs, ds.graphs);
    }
});
