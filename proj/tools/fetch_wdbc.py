#!/usr/bin/env python3
"""Write the Wisconsin Diagnostic Breast Cancer data as data/wdbc.csv.

Reads the copy bundled with scikit-learn (no network access needed) and
writes the UCI layout: id, diagnosis (M/B), then the 30 features.
"""

import argparse
import csv
from pathlib import Path


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "wdbc.csv")
    args = parser.parse_args()

    from sklearn.datasets import load_breast_cancer

    bunch = load_breast_cancer()
    names = [n.replace(" ", "_") for n in bunch.feature_names]
    malignant = list(bunch.target_names).index("malignant")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "diagnosis", *names])
        for i, (row, target) in enumerate(zip(bunch.data, bunch.target)):
            writer.writerow([i + 1, "M" if target == malignant else "B", *(repr(float(v)) for v in row)])
    print(f"wrote {len(bunch.target)} rows to {args.out}")


if __name__ == "__main__":
    main()
