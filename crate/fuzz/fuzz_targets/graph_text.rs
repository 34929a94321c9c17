#![no_main]

use commonrec::graphspace::{canonical_key, collection_to_text, parse_collection, parse_graph, to_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_graph(text) {
        // anything accepted must print back to the same graph
        assert_eq!(parse_graph(&to_text(&g)).unwrap(), g);
        if g.node_count() <= 12 {
            let _ = canonical_key(&g);
        }
    }
    if let Ok(gs) = parse_collection(text) {
        assert_eq!(parse_collection(&collection_to_text(&gs)).unwrap(), gs);
    }
});
