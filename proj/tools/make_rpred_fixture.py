"""Writes tests/data/rpred_20.json: hand-assigned class distances for 20
records plus bucket means and accuracies computed directly."""

import json
from fractions import Fraction
from pathlib import Path

DIST = [
    [0.50, 0.90, 0.80], [0.70, 0.60, 0.95], [0.85, 0.84, 0.40], [0.30, 0.90, 0.90],
    [0.92, 0.88, 0.91], [0.60, 0.61, 0.62], [0.95, 0.20, 0.85], [0.75, 0.70, 0.65],
    [0.40, 0.40, 0.90], [0.00, 0.00, 0.00], [0.55, 0.95, 0.75], [0.81, 0.79, 0.83],
    [0.90, 0.30, 0.60], [0.66, 0.99, 0.33], [0.72, 0.72, 0.72], [0.10, 0.80, 0.90],
    [0.88, 0.52, 0.96], [0.64, 0.71, 0.58], [0.97, 0.93, 0.95], [0.45, 0.85, 0.65],
]
LABELS = [0, 0, 2, 0, 1, 0, 1, 2, 1, 0, 0, 2, 1, 2, 1, 0, 2, 2, 1, 0]


def ratio(row):
    # Exact decimal arithmetic; the argmin takes the first of equal minima.
    fr = [Fraction(str(d)) for d in row]
    best = min(range(len(fr)), key=lambda i: (fr[i], i))
    mean = sum(fr) / len(fr)
    return best, (Fraction(1) if mean == 0 else fr[best] / mean)


def buckets(points, groups):
    order = sorted(range(len(points)), key=lambda i: points[i][0])  # stable
    n = len(points)
    out = []
    for g in range(groups):
        idx = order[g * n // groups:(g + 1) * n // groups]
        out.append({
            "mean_ratio": float(sum(points[i][0] for i in idx) / len(idx)),
            "accuracy": float(Fraction(sum(points[i][1] for i in idx), len(idx))),
            "count": len(idx),
            "members": idx,
        })
    return out


def main():
    points = []
    for row, label in zip(DIST, LABELS):
        best, r = ratio(row)
        points.append((r, best == label))
    doc = {
        "distances": DIST,
        "labels": LABELS,
        "ratios": [float(p[0]) for p in points],
        "correct": [p[1] for p in points],
        "buckets": {str(g): buckets(points, g) for g in (10, 4, 3)},
    }
    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "rpred_20.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
