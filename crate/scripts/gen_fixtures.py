#!/usr/bin/env python3
"""Regenerates the test fixtures under crates/core/tests/data.

Usage: python3 scripts/gen_fixtures.py

Polymers are assembled from a fixed fragment library, so every generated
line has a known fragmentation (atom indices follow textual order, `*`
excluded). The spatial golden file is computed independently of the Rust
code from the counter-mix-v1 weight stream.
"""

import json
import math
import random
import re
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"

# (template, class); `{0}`, `{1}` are ring-closure placeholders.
FRAGMENTS = [
    ("C", "methylene"),
    ("CC", "ethylene"),
    ("C(C)", "methyl-methine"),
    ("C(C)(C)", "gem-dimethyl"),
    ("O", "ether"),
    ("N", "amine"),
    ("C(=O)", "carbonyl"),
    ("C(=O)O", "ester"),
    ("C(=O)N", "amide"),
    ("c{0}ccc(cc{0})", "p-phenylene"),
    ("c{0}cccc(c{0})", "m-phenylene"),
    ("C{0}CCC(CC{0})", "cyclohexylene"),
    ("S(=O)(=O)", "sulfonyl"),
    ("[Si](C)(C)O", "siloxane"),
    ("C(F)(F)", "difluoromethylene"),
    ("C(Cl)", "chloromethine"),
    ("C=C", "vinylene"),
    ("C/C=C/C", "trans-butenylene"),
    ("c{0}ccc{1}cc(ccc{1}c{0})", "naphthylene"),
    ("C{0}CC{1}CC{0}C{1}", "norbornylene"),
    ("c{0}ccc(o{0})", "furandiyl"),
    ("c{0}ccc(s{0})", "thiophenediyl"),
    ("C(c{0}ccccc{0})", "benzyl"),
    ("C(C(=O)OC)", "methyl-ester-pendant"),
    ("[N+](C)(C)", "ammonium"),
    ("C(O)", "hydroxymethine"),
    ("C(C#N)", "cyanomethine"),
    ("c{0}ccc(cc{0})C(C)(C)c{1}ccc(cc{1})", "bisphenol-core"),
]

ATOM = re.compile(r"\[[^\]]*\]|Cl|Br|[BCNOPSFI]|[bcnops]")


def atom_count(smiles):
    return len(ATOM.findall(re.sub(r"%\d\d|\d", "", smiles)))


def ring_label(n):
    return str(n) if n < 10 else f"%{n}"


def polymer(rng, max_fragments=5):
    """Returns (psmiles, [(class, [atom indices])])."""
    count = rng.randint(1, max_fragments)
    parts = []
    frags = []
    next_ring = 1
    next_atom = 0
    for _ in range(count):
        template, cls = rng.choice(FRAGMENTS)
        labels = []
        for k in range(2):
            if "{%d}" % k in template:
                labels.append(ring_label(next_ring))
                next_ring += 1
            else:
                labels.append("")
        text = template.format(*labels)
        n = atom_count(text)
        frags.append((cls, list(range(next_atom, next_atom + n))))
        next_atom += n
        parts.append(text)
    star = "[*]" if rng.random() < 0.05 else "*"
    return star + "".join(parts) + star, frags


def corpus(rng, n):
    return [polymer(rng)[0] for _ in range(n)]


def label(psmiles, rng):
    """Synthetic property: heteroatom and ring content plus noise."""
    body = re.sub(r"\[\*\]|\*", "", psmiles)
    hetero = len(re.findall(r"[NOSFn os]|Cl|Si", body))
    aromatic = len(re.findall(r"[cnos]", body))
    rings = len(re.findall(r"%\d\d|\d", body)) / 2
    return round(0.4 * hetero + 0.15 * aromatic + 0.8 * rings + rng.gauss(0.0, 0.3), 4)


# Hand-counted ring numbers (cyclomatic number of the monomer graph).
RING_FIXTURE = [
    ("*CC*", 0),
    ("*CC(C)*", 0),
    ("*c1ccc(cc1)O*", 1),
    ("*C1CCC(CC1)C(=O)O*", 1),
    ("*c1ccc2cc(ccc2c1)*", 2),
    ("*c1ccc(cc1)C(c1ccccc1)c1ccc(cc1)*", 3),
    ("*C1CC2CC1C2*", 2),
    ("*c1ccc(cc1)c1ccc(cc1)c1ccc(cc1)*", 3),
    ("*C1(CC1)O*", 1),
    ("*C12CCC(CC1)CC2*", 2),
]

# counter-mix-v1 weight stream
MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def counter(key, c):
    return mix64((key + ((c + 1) * GOLDEN & MASK)) & MASK)


def unit_interval(r):
    return ((r >> 11) + 0.5) * (1.0 / (1 << 53))


def standard_normals(seed, name, count):
    key = mix64(seed ^ fnv1a64(name.encode()))
    out = []
    p = 0
    while len(out) < count:
        u1 = unit_interval(counter(key, 2 * p))
        u2 = unit_interval(counter(key, 2 * p + 1))
        r = math.sqrt(-2.0 * math.log(u1))
        t = 2.0 * math.pi * u2
        out += [r * math.cos(t), r * math.sin(t)]
        p += 1
    return out[:count]


def spatial_golden():
    seed, dim = 17, 8
    groups = [("charge", [0.25, -1.5]), ("shape", [1.0, -0.5, 2.0]), ("volume", [3.75])]
    columns = []
    for name, x in groups:
        cols = len(x)
        z = standard_normals(seed, f"spatial.{name}.W", dim * cols)
        w = [v / math.sqrt(cols) for v in z]
        columns.append([sum(w[i * cols + j] * x[j] for j in range(cols)) for i in range(dim)])
    expected = [[float("%.12g" % columns[c][i]) for c in range(len(groups))] for i in range(dim)]
    return {
        "seed": seed,
        "dim": dim,
        "groups": [{"name": n, "values": x} for n, x in groups],
        "expected": expected,
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240611)

    (OUT / "corpus_1000.txt").write_text("\n".join(corpus(rng, 1000)) + "\n")

    lines = ["psmiles,value"]
    for _ in range(200):
        s, _ = polymer(rng, 4)
        lines.append(f"{s},{label(s, rng)}")
    (OUT / "rsit_200.csv").write_text("\n".join(lines) + "\n")

    entries = []
    for _ in range(50):
        s, frags = polymer(rng, 5)
        entries.append({"psmiles": s, "fragments": [{"class": c, "atoms": a} for c, a in frags]})
    (OUT / "fragments_50.json").write_text(json.dumps(entries, indent=1) + "\n")

    ring_lines = ["# psmiles<TAB>rings (hand-counted)"] + [f"{s}\t{n}" for s, n in RING_FIXTURE]
    (OUT / "rings_10.tsv").write_text("\n".join(ring_lines) + "\n")

    (OUT / "spatial_golden.json").write_text(json.dumps(spatial_golden(), indent=1) + "\n")


if __name__ == "__main__":
    main()
