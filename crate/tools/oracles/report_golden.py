"""Writes the report golden files for crates/core/tests/report_golden.rs.

Every number comes from numpy/scipy/statsmodels, not from the Rust code.
Run from the repository root: python3 tools/oracles/report_golden.py
"""
import csv
import io
import itertools
import json
import os

import numpy as np
from scipy import stats
from statsmodels.stats.multitest import multipletests

HERE = "crates/core/tests"
ALPHA = 0.05


def fmt(x):
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    metrics = [c for c in rows[0] if c not in ("block_id", "treatment_id", "repetition")]
    blocks = list(dict.fromkeys(r["block_id"] for r in rows))
    models = list(dict.fromkeys(r["treatment_id"] for r in rows))
    reps = max(int(r["repetition"]) for r in rows)
    data = {m: np.full((len(blocks), len(models), reps), np.nan) for m in metrics}
    for r in rows:
        b, t, k = blocks.index(r["block_id"]), models.index(r["treatment_id"]), int(r["repetition"]) - 1
        for m in metrics:
            data[m][b, t, k] = float(r[m])
    return metrics, blocks, models, data


def describe(v):
    v = np.asarray(v)
    q = np.percentile(v, [25, 50, 75])
    return [str(len(v)), fmt(v.mean()), fmt(v.std(ddof=1)), fmt(v.min()), fmt(q[0]), fmt(q[1]), fmt(q[2]), fmt(v.max())]


def write_csv(name, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    with open(os.path.join(HERE, "golden", name), "w", newline="") as f:
        f.write(buf.getvalue())


def main():
    metrics, blocks, models, data = load(os.path.join(HERE, "fixtures", "small_scores.csv"))
    k = len(models)

    rows = [["global", "", m] + describe(data[m].ravel()) for m in metrics]
    for t, model in enumerate(models):
        rows += [["model", model, m] + describe(data[m][:, t, :].ravel()) for m in metrics]
    write_csv("summaries.csv", ["scope", "model", "metric", "count", "mean", "std", "min", "q25", "median", "q75", "max"], rows)

    fried_rows, pair_rows = [], []
    for m in metrics:
        means = data[m].mean(axis=2)
        n = means.shape[0]
        chi, p = stats.friedmanchisquare(*means.T)
        fried_rows.append([m, str(n), fmt(chi), str(k - 1), fmt(p), "0", "0"])
        ranks = np.array([stats.rankdata(row) for row in means]).mean(axis=0)
        se = np.sqrt(k * (k + 1) / (6 * n))
        pairs = list(itertools.combinations(range(k), 2))
        zs = [(ranks[a] - ranks[b]) / se for a, b in pairs]
        raw = [min(1.0, 2 * stats.norm.sf(abs(z))) for z in zs]
        adj = multipletests(raw, method="fdr_bh")[1]
        for (a, b), z, r, ad in zip(pairs, zs, raw, adj):
            sig = p < ALPHA and ad < ALPHA
            diff = means[:, a].mean() - means[:, b].mean()
            pair_rows.append([m, models[a], models[b], fmt(diff), fmt(max(ad, r)), str(sig).lower(), fmt(z), fmt(r)])
    write_csv("friedman.csv", ["metric", "blocks", "statistic", "df", "p_value", "imputed_cells", "dropped_blocks"], fried_rows)
    header = ["metric", "model_a", "model_b", "mean_difference", "adjusted_p", "significant", "z", "raw_p"]
    write_csv("pairwise_tests.csv", header, pair_rows)
    write_csv("significant_pairs.csv", header, [r for r in pair_rows if r[5] == "true"])

    corr_rows, raw_p = [], []
    for a, b in itertools.combinations(metrics, 2):
        x, y = data[a].ravel(), data[b].ravel()
        res = stats.spearmanr(x, y)
        corr_rows.append([a, b, str(len(x)), res.statistic, res.pvalue])
        raw_p.append(res.pvalue)
    adj = multipletests(raw_p, method="fdr_bh")[1]
    write_csv(
        "correlations.csv",
        ["metric_a", "metric_b", "n", "rho", "p_value", "adjusted_p"],
        [[a, b, n, fmt(r), fmt(p), fmt(q)] for (a, b, n, r, p), q in zip(corr_rows, adj)],
    )

    boxplots = []
    for m in metrics:
        for t, model in enumerate(models):
            v = np.sort(data[m][:, t, :].ravel())
            q1, med, q3 = np.percentile(v, [25, 50, 75])
            lo, hi = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
            inside = v[(v >= lo) & (v <= hi)]
            boxplots.append({
                "metric": m, "model": model, "count": int(len(v)),
                "min": float(v[0]), "q25": float(q1), "median": float(med), "q75": float(q3), "max": float(v[-1]),
                "whisker_low": float(inside[0]), "whisker_high": float(inside[-1]),
                "outliers": [float(x) for x in v[(v < lo) | (v > hi)]],
            })
    scatter = []
    for (a, b), row, q in zip(itertools.combinations(metrics, 2), corr_rows, adj):
        pts = []
        for bi in range(len(blocks)):
            for t, model in enumerate(models):
                for r in range(data[a].shape[2]):
                    pts.append({"model": model, "x": float(data[a][bi, t, r]), "y": float(data[b][bi, t, r])})
        scatter.append({"metric_x": a, "metric_y": b, "rho": float(row[3]), "adjusted_p": float(q), "points": pts})
    bundle = {"metrics": metrics, "models": models, "boxplots": boxplots, "scatter": scatter}
    with open(os.path.join(HERE, "golden", "plot_bundle.json"), "w") as f:
        json.dump(bundle, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
