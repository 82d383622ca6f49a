#!/usr/bin/env python3
"""Independent membership oracle for subgroup-graph operations.

Builds 200 random subgroup pairs plus a few crafted ones, computes exact
membership bitmaps over every reduced word of length <= 8 with a deliberately
naive folding implementation (edge-set merging, quadratic scans), and freezes
SHA-256 digests of the bitmaps. The Rust side recomputes the same bitmaps
from its own structures and compares digests:

  * H and K membership checks `contains` against an independent fold.
  * The meet bitmap is the bitwise AND of the H and K bitmaps — membership
    semantics, no intersection construction — so it cross-validates the
    fiber-product core.
  * The conjugate bitmap tests w in gHg^-1 by tracing g^-1 w g on H's graph,
    cross-validating the generator-rewriting construction.

Output: crates/stallings/tests/data/fold_oracle.json
"""

import hashlib
import json
import random
from pathlib import Path

RANK = 2
MAX_GEN_LEN = 6
MAX_WORD_LEN = 8
ORDER = ["a", "A", "b", "B"]


def inv(ch: str) -> str:
    return ch.upper() if ch.islower() else ch.lower()


def inv_word(w: str) -> str:
    return "".join(inv(c) for c in reversed(w))


def reduce_scan(word: str) -> str:
    """Repeated full-scan cancellation, quadratic and obviously correct.
    Tracing on a pruned core is only sound for reduced words (an unreduced
    walk may step off the core and bounce back), so every traced word goes
    through here first."""
    w = list(word)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] == inv(w[i + 1]):
                del w[i : i + 2]
                changed = True
                break
    return "".join(w)


def enumerate_reduced(max_len: int):
    """All reduced words of length <= max_len in (length, letter-index) order,
    identity first — must match the Rust enumeration exactly."""
    words = [""]
    layer = [""]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            forbid = inv(w[-1]) if w else None
            for ch in ORDER:
                if ch == forbid:
                    continue
                nxt.append(w + ch)
        words.extend(nxt)
        layer = nxt
    return words


def random_reduced(rng, lo, hi):
    n = rng.randrange(lo, hi + 1)
    w = []
    for _ in range(n):
        choices = [c for c in ORDER if not w or c != inv(w[-1])]
        w.append(rng.choice(choices))
    return "".join(w)


class NaiveGraph:
    """Edge-set Stallings graph: directed edges (u, gen, v) with lowercase
    labels, folded by repeated merge scans."""

    def __init__(self, gens):
        self.edges = set()
        fresh = 1  # vertex 0 is the base
        for g in gens:
            if not g:
                continue
            cur = 0
            for i, ch in enumerate(g):
                nxt = 0 if i == len(g) - 1 else fresh
                if i != len(g) - 1:
                    fresh += 1
                if ch.islower():
                    self.edges.add((cur, ch, nxt))
                else:
                    self.edges.add((nxt, ch.lower(), cur))
                cur = nxt
        self._fold()
        self._prune()
        self._index_maps()

    def _merge(self, keep, drop):
        self.edges = {
            (keep if u == drop else u, ch, keep if v == drop else v)
            for (u, ch, v) in self.edges
        }

    def _fold(self):
        while True:
            out, inc = {}, {}
            conflict = None
            for (u, ch, v) in sorted(self.edges):
                if (u, ch) in out and out[(u, ch)] != v:
                    conflict = (out[(u, ch)], v)
                    break
                out[(u, ch)] = v
                if (ch, v) in inc and inc[(ch, v)] != u:
                    conflict = (inc[(ch, v)], u)
                    break
                inc[(ch, v)] = u
            if conflict is None:
                return
            x, y = conflict
            keep, drop = (x, y) if (x == 0 or (y != 0 and x < y)) else (y, x)
            self._merge(keep, drop)

    def _prune(self):
        while True:
            deg = {}
            for (u, _, v) in self.edges:
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            leaf = next(
                (x for x, d in sorted(deg.items()) if x != 0 and d <= 1), None
            )
            if leaf is None:
                return
            self.edges = {
                e for e in self.edges if e[0] != leaf and e[2] != leaf
            }

    def _index_maps(self):
        self.fwd = {(u, ch): v for (u, ch, v) in self.edges}
        self.bwd = {(v, ch): u for (u, ch, v) in self.edges}
        verts = {0}
        for (u, _, v) in self.edges:
            verts.add(u)
            verts.add(v)
        self.vertices = verts

    def member(self, w: str) -> bool:
        cur = 0
        for ch in reduce_scan(w):
            if ch.islower():
                cur = self.fwd.get((cur, ch))
            else:
                cur = self.bwd.get((cur, ch.lower()))
            if cur is None:
                return False
        return cur == 0

    def rank(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def index(self):
        gens = [chr(ord("a") + i) for i in range(RANK)]
        for v in self.vertices:
            for ch in gens:
                if (v, ch) not in self.fwd or (v, ch) not in self.bwd:
                    return None
        return len(self.vertices)


def bitmap(words, pred) -> bytes:
    out = bytearray((len(words) + 7) // 8)
    for i, w in enumerate(words):
        if pred(w):
            out[i // 8] |= 1 << (i % 8)
    return bytes(out)


def sha(b: bytes) -> str:
    return hashlib.sha256(b).hexdigest()


def popcount(b: bytes) -> int:
    return sum(bin(x).count("1") for x in b)


def pair_record(words, h_gens, k_gens, g):
    h, k = NaiveGraph(h_gens), NaiveGraph(k_gens)
    h_bits = bitmap(words, h.member)
    k_bits = bitmap(words, k.member)
    meet_bits = bytes(a & b for a, b in zip(h_bits, k_bits))
    conj_bits = bitmap(words, lambda w: h.member(inv_word(g) + w + g))
    for graph in (h, k):
        idx = graph.index()
        if idx is not None:
            assert graph.rank() - 1 == idx * (RANK - 1), (h_gens, k_gens)
    return {
        "h": h_gens,
        "k": k_gens,
        "g": g,
        "h_sha": sha(h_bits),
        "k_sha": sha(k_bits),
        "meet_sha": sha(meet_bits),
        "conj_sha": sha(conj_bits),
        "h_members": popcount(h_bits),
        "meet_members": popcount(meet_bits),
        "conj_members": popcount(conj_bits),
        "h_rank": h.rank(),
        "h_index": h.index(),
        "k_rank": k.rank(),
        "k_index": k.index(),
    }


def main():
    rng = random.Random(47020817)
    words = enumerate_reduced(MAX_WORD_LEN)
    assert len(words) == 1 + 4 * (3**MAX_WORD_LEN - 1) // 2

    pairs = []
    for _ in range(200):
        h_gens = [
            random_reduced(rng, 1, MAX_GEN_LEN)
            for _ in range(rng.randrange(1, 4))
        ]
        k_gens = [
            random_reduced(rng, 1, MAX_GEN_LEN)
            for _ in range(rng.randrange(1, 4))
        ]
        g = random_reduced(rng, 0, 4)
        pairs.append(pair_record(words, h_gens, k_gens, g))

    extra = [
        pair_record(words, ["a", "b"], ["aa", "ab", "aB"], "ba"),
        pair_record(words, [], ["a", "baB"], "b"),
        pair_record(words, ["a", "baB"], ["b", "aba"], "ab"),
        pair_record(words, ["aa", "bb", "abAB"], ["ab"], "A"),
    ]

    finite = sum(1 for p in pairs if p["h_index"] or p["k_index"])
    data = {
        "seed": 47020817,
        "rank": RANK,
        "max_gen_len": MAX_GEN_LEN,
        "max_word_len": MAX_WORD_LEN,
        "word_count": len(words),
        "words_sha": sha("\n".join(words).encode()),
        "pairs": pairs,
        "extra_pairs": extra,
    }
    out = (
        Path(__file__).resolve().parents[2]
        / "crates/stallings/tests/data/fold_oracle.json"
    )
    out.write_text(json.dumps(data, indent=1))
    print(f"wrote {out}")
    print("words:", len(words), "finite-index sightings:", finite)
    print("sample:", json.dumps(pairs[0], indent=1)[:400])


if __name__ == "__main__":
    main()
