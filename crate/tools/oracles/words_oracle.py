#!/usr/bin/env python3
"""Independent oracle for free-word arithmetic.

Generates frozen test vectors for the `words` module using deliberately naive
algorithms (repeated-scan cancellation, brute-force filters) so the Rust
implementation is checked against an independently written computation.

Output: crates/stallings/tests/data/words_oracle.json
"""

import json
import random
from pathlib import Path


def letter_ok(rank: int, ch: str) -> bool:
    if ch.islower():
        return ord(ch) - ord("a") < rank
    if ch.isupper():
        return ord(ch) - ord("A") < rank
    return False


def inv(ch: str) -> str:
    return ch.upper() if ch.islower() else ch.lower()


def reduce_scan(word: str) -> str:
    """Repeated full-scan cancellation: remove one adjacent inverse pair per
    pass until a pass finds nothing. Quadratic and obviously correct."""
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


def cyclically_reduce(word: str):
    """Strip conjugating layers from a reduced word."""
    w = reduce_scan(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == inv(w[j]):
        i += 1
        j -= 1
    return w[:i], w[i : j + 1]


def all_reduced(rank: int, max_len: int):
    letters = [chr(ord("a") + g) for g in range(rank)] + [
        chr(ord("A") + g) for g in range(rank)
    ]
    # Interleave to match the implementation's letter order: a, A, b, B, ...
    order = []
    for g in range(rank):
        order.append(chr(ord("a") + g))
        order.append(chr(ord("A") + g))
    out = [""]
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for ch in order:
                if w and w[-1] == inv(ch):
                    continue
                nxt.append(w + ch)
        out.extend(nxt)
        frontier = nxt
    return out


def is_cyc_reduced(w: str) -> bool:
    return w != "" and w[0] != inv(w[-1])


def main():
    rng = random.Random(20260817)
    rank = 2
    order = ["a", "A", "b", "B"]

    reductions = []
    for _ in range(64):
        n = rng.randrange(0, 30)
        raw = "".join(rng.choice(order) for _ in range(n))
        reductions.append({"raw": raw, "reduced": reduce_scan(raw)})

    cyclic = []
    for _ in range(48):
        n = rng.randrange(0, 18)
        raw = "".join(rng.choice(order) for _ in range(n))
        conj, core = cyclically_reduce(raw)
        cyclic.append({"raw": raw, "conjugator": conj, "core": core})

    reduced_counts = {}
    cyc_counts = {}
    cyc_n2 = None
    for r in (2, 3):
        words = all_reduced(r, 6)
        reduced_counts[str(r)] = [
            sum(1 for w in words if len(w) == n) for n in range(7)
        ]
        cyc_counts[str(r)] = [
            sum(1 for w in words if len(w) == n and is_cyc_reduced(w))
            for n in range(7)
        ]
        if r == 2:
            cyc_n2 = sorted(
                (w for w in words if len(w) <= 2 and is_cyc_reduced(w)),
                key=lambda w: (len(w), [order.index(c) for c in w]),
            )

    data = {
        "seed": 20260817,
        "rank": rank,
        "reductions": reductions,
        "cyclic": cyclic,
        "reduced_counts_by_len": reduced_counts,
        "cyclically_reduced_counts_by_len": cyc_counts,
        "c2_rank2": cyc_n2,
    }
    out = Path(__file__).resolve().parents[2] / "crates/stallings/tests/data/words_oracle.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(data, indent=1))
    print(f"wrote {out}")
    print("reduced counts rank2:", reduced_counts["2"])
    print("cyc counts rank2:", cyc_counts["2"])
    print("C_2 size:", len(cyc_n2))


if __name__ == "__main__":
    main()
