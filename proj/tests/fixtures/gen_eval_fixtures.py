#!/usr/bin/env python3
"""Regenerates eval_fixtures.json.

Independent reference implementation of CoNLL-2000-style chunk scoring,
used as the oracle the C++ evaluator must match exactly. Chunks follow the
reference scorer's reading of IOB2 output: a chunk starts at B-X, or at an
I-X that does not continue a same-type chunk (orphan I), and runs through
consecutive same-type I-X tags. Metrics are percentages; expected values are
stored as hex floats so the comparison in the tests is bit-exact.
"""

import json
import random

TAGS = ["B-P", "I-P", "B-N", "I-N", "O"]


def chunks(tags, merge=False):
    if merge:
        tags = [t if t == "O" else t[0:2] + "D" for t in tags]
    out = []
    start = None
    ctype = None
    for i, t in enumerate(tags):
        if start is not None:
            if t.startswith("I-") and t[2] == ctype:
                continue
            out.append((start, i, ctype))
            start = None
        if t != "O":
            start = i + 1
            ctype = t[2]
    if start is not None:
        out.append((start, len(tags), ctype))
    return out


def prf(n_gold, n_pred, n_correct):
    p = 0.0 if n_pred == 0 else 100.0 * n_correct / n_pred
    r = 0.0 if n_gold == 0 else 100.0 * n_correct / n_gold
    f = 2.0 * p * r / (p + r) if (p + r) > 0.0 else 0.0
    return {
        "gold": n_gold,
        "pred": n_pred,
        "correct": n_correct,
        "precision": p.hex(),
        "recall": r.hex(),
        "f1": f.hex(),
    }


def score(gold_sents, pred_sents, type_filter=None, merge=False):
    n_gold = n_pred = n_correct = 0
    for g, p in zip(gold_sents, pred_sents):
        gc = chunks(g, merge)
        pc = chunks(p, merge)
        if type_filter is not None:
            gc = [c for c in gc if c[2] == type_filter]
            pc = [c for c in pc if c[2] == type_filter]
        n_gold += len(gc)
        n_pred += len(pc)
        n_correct += len(set(gc) & set(pc))
    return prf(n_gold, n_pred, n_correct)


def expected(gold, pred):
    return {
        "p_tag": score(gold, pred, "P"),
        "n_tag": score(gold, pred, "N"),
        "overall": score(gold, pred),
        "merged": score(gold, pred, merge=True),
    }


def fixture(name, gold, pred):
    return {"name": name, "gold": gold, "pred": pred,
            "expected": expected(gold, pred)}


def main():
    fixtures = []
    crafted = [
        ("exact-match", [["O", "B-P", "I-P", "B-P", "O"]],
         [["O", "B-P", "I-P", "B-P", "O"]]),
        ("orphan-i-gold", [["O", "I-P", "I-P"]], [["O", "B-P", "I-P"]]),
        ("orphan-i-both", [["I-N", "I-N", "O"]], [["I-N", "I-N", "O"]]),
        ("cross-type-i", [["B-P", "I-N"]], [["B-P", "I-N"]]),
        ("modality-flip", [["B-P", "I-P", "O"]], [["B-N", "I-N", "O"]]),
        ("boundary-error", [["B-P", "I-P", "O"]], [["B-P", "O", "O"]]),
        ("pred-empty", [["B-P", "O", "B-N"]], [["O", "O", "O"]]),
        ("gold-empty", [["O", "O", "O"]], [["B-P", "O", "B-N"]]),
        ("all-o", [["O", "O"]], [["O", "O"]]),
        ("adjacent-chunks", [["B-P", "B-P", "B-N", "I-N", "B-P"]],
         [["B-P", "I-P", "B-N", "I-N", "B-P"]]),
        ("i-after-o", [["O", "I-P", "O", "I-N"]], [["O", "B-P", "O", "B-N"]]),
        ("multi-sentence",
         [["B-P", "I-P", "O"], ["O", "B-N", "I-N"], ["I-P", "O", "O"]],
         [["B-P", "I-P", "O"], ["O", "B-N", "O"], ["B-P", "O", "O"]]),
    ]
    for name, gold, pred in crafted:
        fixtures.append(fixture(name, gold, pred))

    rng = random.Random(20260822)
    while len(fixtures) < 50:
        n_sent = rng.randint(1, 5)
        gold, pred = [], []
        for _ in range(n_sent):
            n = rng.randint(1, 12)
            g = [rng.choice(TAGS) for _ in range(n)]
            if rng.random() < 0.5:
                # correlated predictions: perturb gold a little
                p = [t if rng.random() < 0.7 else rng.choice(TAGS) for t in g]
            else:
                p = [rng.choice(TAGS) for _ in range(n)]
            gold.append(g)
            pred.append(p)
        fixtures.append(fixture("random-%02d" % len(fixtures), gold, pred))

    with open("eval_fixtures.json", "w") as f:
        json.dump(fixtures, f, indent=1)
        f.write("\n")
    print("wrote", len(fixtures), "fixtures")


if __name__ == "__main__":
    main()
