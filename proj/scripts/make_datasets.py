#!/usr/bin/env python3
"""Build the benchmark dataset CSVs under data/.

Two sources are supported:

  * scikit-learn bundles wine and wdbc; those are always written.
  * The remaining UCI datasets are converted from their raw distribution
    files when they are present under data/raw/ (see RAW_FILES below for
    the expected file names). Download them from the UCI repository, drop
    them in data/raw/, and re-run this script.

Every output CSV is comma-separated with a header row; features are
named f1..fd and the class column is named "label" (raw class values,
binarization happens later via the spec files in specs/).
"""

import csv
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")
RAW = os.path.join(DATA, "raw")

RAW_FILES = {
    "sonar": "sonar.all-data",
    "glass": "glass.data",
    "newthyroid": "new-thyroid.data",
    "heart": "heart.dat",
    "bupa": "bupa.data",
    "iono": "ionosphere.data",
    "balance": "balance-scale.data",
    "australian": "australian.dat",
    "pima": "pima-indians-diabetes.data",
    "german": "german.data-numeric",
    "splice": "splice",  # libsvm format; optional companion file "splice.t"
    "spambase": "spambase.data",
}


def write_csv(name, rows, label_last=True):
    """rows: list of ([features...], label) tuples."""
    d = len(rows[0][0])
    path = os.path.join(DATA, name + ".csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"f{i+1}" for i in range(d)] + ["label"])
        for feats, label in rows:
            w.writerow(list(feats) + [label])
    print(f"wrote {path} ({len(rows)} rows, {d} features)")


def from_sklearn():
    from sklearn.datasets import load_breast_cancer, load_wine

    wine = load_wine()
    # original UCI class labels are 1..3
    write_csv("wine", [(x, t + 1) for x, t in zip(wine.data.tolist(), wine.target)])

    wdbc = load_breast_cancer()
    # sklearn target: 0 = malignant, 1 = benign
    write_csv(
        "wdbc",
        [(x, "M" if t == 0 else "B") for x, t in zip(wdbc.data.tolist(), wdbc.target)],
    )


def split_fields(line, sep=None):
    line = line.strip()
    if not line:
        return []
    return line.split(",") if sep == "," else line.split()


def convert_delimited(name, path, sep, label_index, drop_indices=()):
    rows = []
    with open(path) as f:
        for line in f:
            fields = split_fields(line, sep)
            if not fields:
                continue
            label = fields[label_index].strip()
            feats = [
                v.strip()
                for i, v in enumerate(fields)
                if i != label_index % len(fields) and i not in drop_indices
            ]
            rows.append((feats, label))
    write_csv(name, rows)


def convert_libsvm(name, paths):
    rows = []
    dim = 0
    parsed = []
    for path in paths:
        with open(path) as f:
            for line in f:
                fields = line.split()
                if not fields:
                    continue
                label = fields[0]
                feats = {}
                for tok in fields[1:]:
                    idx, val = tok.split(":")
                    feats[int(idx)] = val
                    dim = max(dim, int(idx))
                parsed.append((feats, label))
    for feats, label in parsed:
        rows.append(([feats.get(i + 1, "0") for i in range(dim)], label))
    write_csv(name, rows)


def from_raw():
    converters = {
        "sonar": lambda p: convert_delimited("sonar", p, ",", -1),
        # first column of glass.data is a row id
        "glass": lambda p: convert_delimited("glass", p, ",", -1, drop_indices=(0,)),
        "newthyroid": lambda p: convert_delimited("newthyroid", p, ",", 0),
        "heart": lambda p: convert_delimited("heart", p, None, -1),
        "bupa": lambda p: convert_delimited("bupa", p, ",", -1),
        "iono": lambda p: convert_delimited("iono", p, ",", -1),
        "balance": lambda p: convert_delimited("balance", p, ",", 0),
        "australian": lambda p: convert_delimited("australian", p, None, -1),
        "pima": lambda p: convert_delimited("pima", p, ",", -1),
        "german": lambda p: convert_delimited("german", p, None, -1),
        "spambase": lambda p: convert_delimited("spambase", p, ",", -1),
    }
    missing = []
    for name, raw_name in RAW_FILES.items():
        path = os.path.join(RAW, raw_name)
        if name == "splice":
            paths = [p for p in (path, path + ".t") if os.path.exists(p)]
            if paths:
                convert_libsvm("splice", paths)
            else:
                missing.append(raw_name)
            continue
        if os.path.exists(path):
            converters[name](path)
        else:
            missing.append(raw_name)
    if missing:
        print("raw files not found (place them under data/raw/ to convert):")
        for m in missing:
            print("  " + m)


def main():
    os.makedirs(DATA, exist_ok=True)
    try:
        from_sklearn()
    except ImportError:
        print("scikit-learn not available; skipping wine and wdbc", file=sys.stderr)
    from_raw()


if __name__ == "__main__":
    main()
