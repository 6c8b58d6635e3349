#!/usr/bin/env python3
"""Rebuild the benchmark CSVs under data/.

diabetes, vehicle and vowel are taken from the KEEL copies bundled in the
`keel-ds` wheel on PyPI (the original UCI hosts are not always reachable).
balance-scale is fully enumerative, so it is regenerated from its definition.

    pip download --no-deps -d /tmp/keel keel-ds==0.2.5
    python3 scripts/fetch_benchmarks.py /tmp/keel/keel_ds-0.2.5-py3-none-any.whl
"""
import csv
import itertools
import pathlib
import sys
import zipfile

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"

KEEL = {
    # name: (keel file, header, columns to keep (None = all features), label position)
    "diabetes": (
        "pima",
        ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"],
        None,
    ),
    "vehicle": (
        "vehicle",
        [
            "compactness", "circularity", "distance_circularity", "radius_ratio",
            "pr_axis_aspect_ratio", "max_length_aspect_ratio", "scatter_ratio",
            "elongatedness", "pr_axis_rectangularity", "max_length_rectangularity",
            "scaled_variance_major", "scaled_variance_minor", "scaled_radius_of_gyration",
            "skewness_about_major", "skewness_about_minor", "kurtosis_about_major",
            "kurtosis_about_minor", "hollows_ratio", "class",
        ],
        None,
    ),
    # drop the train/test flag and speaker id, keep sex + ten formant features
    "vowel": (
        "vowel",
        ["sex"] + [f"f{i}" for i in range(10)] + ["class"],
        slice(2, None),
    ),
}


def convert(wheel: str) -> None:
    z = zipfile.ZipFile(wheel)
    for name, (keel, header, keep) in KEEL.items():
        raw = z.read(f"keel_ds/data/balanced/raw/{keel}.dat").decode()
        rows = []
        for line in raw.splitlines():
            if not line.strip() or line.startswith("@"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if keep is not None:
                cells = cells[keep]
            rows.append(cells)
        with open(OUT / f"{name}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        print(name, len(rows))


def balance_scale() -> None:
    with open(OUT / "balance-scale.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["left_weight", "left_distance", "right_weight", "right_distance", "class"])
        for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
            left, right = lw * ld, rw * rd
            cls = "L" if left > right else "R" if right > left else "B"
            w.writerow([lw, ld, rw, rd, cls])
    print("balance-scale", 625)


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    convert(sys.argv[1])
    balance_scale()
