#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The BayesLSH Authors
"""Cross-checks the tool's evaluation report against a pure-Python recount.

Generates small corpora with `bayeslsh gen`, runs `bayeslsh search --eval`,
then recomputes ground truth, recall and estimate errors from the corpus file
and the results TSV, and compares them with the JSON report.
"""

import argparse
import itertools
import json
import math
import pathlib
import subprocess
import sys


def load_corpus(path, binary):
    vectors = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            ident, _, rest = line.partition("\t")
            entries = {}
            for tok in rest.split():
                if binary:
                    entries[int(tok)] = 1.0
                else:
                    f, _, w = tok.partition(":")
                    entries[int(f)] = float(w)
            vectors.append((ident, entries))
    return vectors


def cosine(x, y):
    nx = math.sqrt(sum(w * w for w in x.values()))
    ny = math.sqrt(sum(w * w for w in y.values()))
    if nx == 0 or ny == 0:
        return 0.0
    if len(x) > len(y):
        x, y = y, x
    dot = sum(w * y.get(f, 0.0) for f, w in x.items())
    return min(1.0, max(0.0, dot / (nx * ny)))


def jaccard(x, y):
    a, b = set(x), set(y)
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def read_results(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            i, j, est, exact, low = line.rstrip("\n").split("\t")
            rows.append((i, j, float(est), exact == "1", low == "1"))
    return rows


def check(tool, workdir, measure, verifier, threshold, failures):
    corpus = workdir / f"corpus_{measure}.txt"
    subprocess.run(
        [tool, "gen", "-n", "300", "--dim", "1500", "--planted", "0.6:15,0.8:15,0.95:15",
         "--measure", measure, "--seed", "4", "-o", str(corpus)],
        check=True, capture_output=True)
    results = workdir / f"results_{measure}_{verifier}.tsv"
    report = workdir / f"report_{measure}_{verifier}.jsonl"
    subprocess.run(
        [tool, "search", "-i", str(corpus), "--measure", measure, "--verifier", verifier,
         "--threshold", str(threshold), "--seed", "12", "--threads", "2", "--eval",
         "--eval-json", str(report), "--eval-tsv", str(workdir / "report.tsv"),
         "-o", str(results)],
        check=True, capture_output=True)

    vectors = load_corpus(corpus, binary=(measure == "jaccard"))
    sim = jaccard if measure == "jaccard" else cosine
    index = {ident: k for k, (ident, _) in enumerate(vectors)}
    truth = set()
    for a, b in itertools.combinations(range(len(vectors)), 2):
        if vectors[a][1] and vectors[b][1] and sim(vectors[a][1], vectors[b][1]) > threshold:
            truth.add((a, b))

    rows = read_results(results)
    emitted = set()
    errors = []
    for i, j, est, _, _ in rows:
        a, b = sorted((index[i], index[j]))
        emitted.add((a, b))
        errors.append(abs(est - sim(vectors[a][1], vectors[b][1])))

    with open(report, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) != 1:
        failures.append(f"{measure}/{verifier}: expected one JSON line, got {len(lines)}")
        return
    rep = json.loads(lines[0])

    tp = len(truth & emitted)
    recall = tp / len(truth) if truth else 1.0
    above = sum(e > 0.05 for e in errors) / len(errors) if errors else 0.0
    mean = sum(errors) / len(errors) if errors else 0.0
    # Estimates are printed with six decimals.
    slack = 1e-5
    checks = [
        ("truth", rep["truth"], len(truth), 0),
        ("emitted", rep["emitted"], len(rows), 0),
        ("true_positives", rep["true_positives"], tp, 0),
        ("recall", rep["recall"], recall, 1e-12),
        ("mean_error", rep["mean_error"], mean, slack),
        ("error_above_0.05", rep["error_above_0.05"], above,
         1.0 / max(1, len(errors)) + 1e-12),
        ("histogram total", sum(rep["error_histogram"]), len(rows), 0),
    ]
    for name, got, want, tol in checks:
        ok = got == want if tol == 0 else abs(got - want) <= tol
        status = "ok" if ok else "MISMATCH"
        print(f"{measure}/{verifier} t={threshold} {name}: report={got} recount={want} {status}")
        if not ok:
            failures.append(f"{measure}/{verifier}: {name}")
    if recall < 0.9:
        failures.append(f"{measure}/{verifier}: recall {recall:.3f} below 0.9")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tool", required=True)
    ap.add_argument("--workdir", required=True)
    args = ap.parse_args()
    workdir = pathlib.Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    failures = []
    for measure, verifier, t in [("cosine", "bayeslsh", 0.7), ("cosine", "bayeslsh-lite", 0.7),
                                 ("cosine", "lsh-approx", 0.5), ("jaccard", "bayeslsh", 0.5),
                                 ("jaccard", "exact", 0.5)]:
        check(args.tool, workdir, measure, verifier, t, failures)
    if failures:
        print("FAILED: " + "; ".join(failures))
        return 1
    print("all report fields agree with the recount")
    return 0


if __name__ == "__main__":
    sys.exit(main())
