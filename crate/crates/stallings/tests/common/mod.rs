//! Shared helpers for integration tests: oracle corpus loading, membership
//! bitmaps, and digest comparison against frozen Python-generated vectors.
// Each integration-test binary compiles this module independently and uses a
// different subset of it.
#![allow(dead_code)]

use serde_json::Value;
use sha2::{Digest, Sha256};
use stallings::subgroups::SubgroupHandle;
use stallings::words::{enumerate_reduced, Alphabet, Word};

pub fn f2() -> Alphabet {
    Alphabet::new(2).unwrap()
}

pub fn load_json(name: &str) -> Value {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("bad JSON in {path}: {e}"))
}

pub fn handle_of(alphabet: Alphabet, gens: &[&str]) -> SubgroupHandle {
    let words: Vec<Word> = gens
        .iter()
        .map(|s| Word::parse(alphabet, s).unwrap())
        .collect();
    SubgroupHandle::from_generators(alphabet, &words).unwrap()
}

pub fn gens_from(value: &Value) -> Vec<&str> {
    value
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect()
}

/// Membership bitmap over a fixed word list, packed LSB-first — must match
/// the oracle's packing exactly.
pub fn membership_bitmap(h: &SubgroupHandle, words: &[Word]) -> Vec<u8> {
    let mut out = vec![0u8; words.len().div_ceil(8)];
    for (i, w) in words.iter().enumerate() {
        if h.contains(w) {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn sha_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// The canonical word list both sides enumerate, with a digest handshake so
/// an ordering regression fails loudly before any bitmap comparison.
pub fn oracle_words(corpus: &Value) -> Vec<Word> {
    let max_len = corpus["max_word_len"].as_u64().unwrap() as usize;
    let words = enumerate_reduced(f2(), max_len);
    assert_eq!(words.len() as u64, corpus["word_count"].as_u64().unwrap());
    let joined = words
        .iter()
        .map(|w| w.to_string())
        .collect::<Vec<_>>()
        .join("\n");
    assert_eq!(
        sha_hex(joined.as_bytes()),
        corpus["words_sha"].as_str().unwrap(),
        "canonical enumeration no longer matches the frozen oracle order"
    );
    words
}

/// Check one oracle pair end to end: membership digests for H, K, the meet
/// (fiber product vs. bitwise AND of memberships), and the conjugate
/// (generator rewriting vs. traced g⁻¹wg); plus rank/index agreement and the
/// Nielsen–Schreier identity on every finite-index handle encountered.
pub fn check_pair(pair: &Value, words: &[Word]) {
    let alphabet = f2();
    let h = handle_of(alphabet, &gens_from(&pair["h"]));
    let k = handle_of(alphabet, &gens_from(&pair["k"]));
    let g = Word::parse(alphabet, pair["g"].as_str().unwrap()).unwrap();
    let meet = h.intersect(&k).unwrap();
    let conj = h.conjugate(&g).unwrap();

    let h_bits = membership_bitmap(&h, words);
    assert_eq!(
        sha_hex(&h_bits),
        pair["h_sha"].as_str().unwrap(),
        "H bitmap"
    );
    let k_bits = membership_bitmap(&k, words);
    assert_eq!(
        sha_hex(&k_bits),
        pair["k_sha"].as_str().unwrap(),
        "K bitmap"
    );
    let meet_bits = membership_bitmap(&meet, words);
    assert_eq!(
        sha_hex(&meet_bits),
        pair["meet_sha"].as_str().unwrap(),
        "intersection bitmap"
    );
    let conj_bits = membership_bitmap(&conj, words);
    assert_eq!(
        sha_hex(&conj_bits),
        pair["conj_sha"].as_str().unwrap(),
        "conjugate bitmap"
    );

    assert_eq!(h.rank() as u64, pair["h_rank"].as_u64().unwrap());
    assert_eq!(k.rank() as u64, pair["k_rank"].as_u64().unwrap());
    assert_eq!(
        h.index().map(|i| i as u64),
        pair["h_index"].as_u64(),
        "H index"
    );
    assert_eq!(
        k.index().map(|i| i as u64),
        pair["k_index"].as_u64(),
        "K index"
    );
    for handle in [&h, &k, &meet, &conj] {
        if let Some(index) = handle.index() {
            assert_eq!(
                handle.rank(),
                1 + index * (alphabet.rank() - 1),
                "finite-index handle violates the rank identity"
            );
        }
    }
}
