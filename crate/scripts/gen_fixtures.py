#!/usr/bin/env python3
"""Regenerate the bundled fixtures under data/ and crates/core/fixtures/.

Deterministic: rerunning produces byte-identical files.
"""
import json
import math
import os
import random

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SPECIALS = [-7, -8, -9]


def logit(p):
    return math.log(p / (1.0 - p))


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def r4(x):
    return float(f"{x:.10f}")


# ---------------------------------------------------------------------------
# Two-layer model reproducing the worked entity's scores and risks.
# (feature, entity value, active-bucket score, ranges, monotone)
TABLE = [
    ("ExternalRiskEstimate", 1.566, 0.8262, [
        ("ExternalRiskEstimate", 61, 2.9896,
         [[0, 63], [64, 70], [71, 75], [76, 80], [81, "inf"]], True)]),
    ("TradeOpenTime", 2.5249, 0.4690, [
        ("MSinceOldestTradeOpen", 198, 0.2453, [[0, 100], [101, 200], [201, 300], [301, "inf"]], True),
        ("MSinceMostRecentTradeOpen", 14, 0.0311, [[0, 5], [6, 11], [12, 23], [24, "inf"]], False),
        ("AverageMInFile", 96, 0.2960, [[0, 47], [48, 69], [70, 97], [98, "inf"]], True)]),
    ("NumSatisfactoryTrades", 2.156, 0.4513, [
        ("NumSatisfactoryTrades", 25, 0.0001, [[0, 11], [12, 21], [22, 33], [34, "inf"]], True)]),
    ("TradeFrequency", 0.359, 0.4425, [
        ("NumTrades60Ever2DerogPubRec", 0, 0.0003, [[0, 0], [1, 2], [3, "inf"]], True),
        ("NumTrades90Ever2DerogPubRec", 0, 0.1515, [[0, 0], [1, 2], [3, "inf"]], True),
        ("NumTotalTrades", 27, 0.2653, [[0, 9], [10, 19], [20, 29], [30, "inf"]], False),
        ("NumTradesOpeninLast12M", 0, 0.0000, [[0, 0], [1, 2], [3, 5], [6, "inf"]], True)]),
    ("Delinquency", 2.545, 0.6847, [
        ("PercentTradesNeverDelq", 89, 0.5686, [[0, 59], [60, 79], [80, 89], [90, 96], [97, "inf"]], True),
        ("MSinceMostRecentDelq", 1, 0.4015, [[0, 2], [3, 11], [12, 23], [24, "inf"]], True),
        ("MaxDelq2PublicRecLast12M", 4, 1.0046, [[0, 3], [4, 5], [6, 6], [7, "inf"]], True),
        ("MaxDelqEver", 6, 0.0000, [[0, 3], [4, 5], [6, 6], [7, "inf"]], True)]),
    ("Installment", 0.913, 0.5273, [
        ("PercentInstallTrades", 11, 0.0009, [[0, 19], [20, 39], [40, 59], [60, "inf"]], False),
        ("NetFractionInstallBurden", 75, 0.3706, [[0, 49], [50, 69], [70, 89], [90, "inf"]], True),
        ("NumInstallTradesWBalance", 2, 1.4898, [[0, 1], [2, 3], [4, 5], [6, "inf"]], True)]),
    ("Inquiry", 3.004, 0.3172, [
        ("MSinceMostRecentInqexcl7days", 11, 0.8318, [[0, 0], [1, 2], [3, 8], [9, 23], [24, "inf"]], True),
        ("NumInqLast6M", 0, 0.0002, [[0, 0], [1, 2], [3, 5], [6, "inf"]], True),
        ("NumInqLast6Mexcl7days", 0, 0.0000, [[0, 0], [1, 2], [3, 5], [6, "inf"]], True)]),
    ("RevolvingBalance", 1.924, 0.6500, [
        ("NetFractionRevolvingBurden", 67, 1.3938, [[0, 14], [15, 39], [40, 59], [60, 79], [80, "inf"]], True),
        ("NumRevolvingTradesWBalance", 7, 0.1176, [[0, 2], [3, 5], [6, 8], [9, "inf"]], True)]),
    ("Utilization", 0.987, 0.6490, [
        ("NumBank2NatlTradesWHighUtilization", 2, 0.8562, [[0, 0], [1, 1], [2, 3], [4, "inf"]], True)]),
    ("TradeWBalance", 0.296, 0.6113, [
        ("PercentTradesWBalance", 75, 0.4528, [[0, 49], [50, 69], [70, 84], [85, "inf"]], True)]),
]
GLOBAL_RISK = 0.6146


def bucket_index(value, ranges):
    for i, (lo, hi) in enumerate(ranges):
        hi = math.inf if hi == "inf" else hi
        if lo <= value <= hi:
            return i
    raise ValueError(value)


def fico_fixture():
    subscales = []
    layer2_sum = 0.0
    entity = []
    for name, weight, risk, feats in TABLE:
        out_feats = []
        active_sum = 0.0
        for fname, value, score, ranges, mono in feats:
            weights = [0.0] * (len(ranges) + len(SPECIALS))
            weights[bucket_index(value, ranges)] = score
            active_sum += score
            entity.append((fname, value))
            out_feats.append({
                "name": fname,
                "buckets": {"ranges": ranges, "specials": SPECIALS},
                "weights": weights,
                "monotone": mono,
            })
        bias = logit(risk) - active_sum
        layer2_sum += weight * risk
        subscales.append({"name": name, "weight": weight, "bias": r4(bias), "features": out_feats})
    layer2_bias = logit(GLOBAL_RISK) - layer2_sum
    model = {"subscales": subscales, "layer2_bias": r4(layer2_bias), "threshold": 0.5}
    with open(os.path.join(ROOT, "crates/core/fixtures/fico_fixture.json"), "w") as f:
        json.dump(model, f, indent=2)
        f.write("\n")
    with open(os.path.join(ROOT, "crates/core/fixtures/fico_entity.csv"), "w") as f:
        f.write(",".join(n for n, _ in entity) + "\n")
        f.write(",".join(str(v) for _, v in entity) + "\n")


# ---------------------------------------------------------------------------
# Synthetic credit data set with a small two-layer model.
SYN_FEATURES = [
    # name, generator(z, rng) -> int, ranges, weights for ranges
    ("ExternalRiskEstimate", lambda z, g: 5 * round(max(50, min(95, 75 - 9 * z + g.gauss(0, 6))) / 5),
     [[0, 59], [60, 69], [70, 79], [80, "inf"]], [1.6, 0.9, 0.3, -0.4]),
    ("MSinceMostRecentInqexcl7days", lambda z, g: int(max(0, min(11, round(5 - 2.5 * z + g.gauss(0, 2.5))))),
     [[0, 0], [1, 2], [3, 5], [6, "inf"]], [0.9, 0.5, 0.1, -0.3]),
    ("NumInqLast6M", lambda z, g: int(max(0, min(7, round(2 + 1.2 * z + g.gauss(0, 1.2))))),
     [[0, 0], [1, 2], [3, "inf"]], [-0.3, 0.3, 0.9]),
    ("PercentTradesNeverDelq", lambda z, g: 5 * round(max(60, min(100, 88 - 7 * z + g.gauss(0, 6))) / 5),
     [[0, 79], [80, 89], [90, "inf"]], [1.2, 0.5, -0.3]),
    ("MaxDelq2PublicRecLast12M", lambda z, g: int(max(0, min(7, round(5 - 1.3 * z + g.gauss(0, 1.3))))),
     [[0, 3], [4, 6], [7, "inf"]], [1.0, 0.4, -0.2]),
    ("NetFractionRevolvingBurden", lambda z, g: 10 * round(max(0, min(100, 40 + 18 * z + g.gauss(0, 15))) / 10),
     [[0, 29], [30, 59], [60, "inf"]], [-0.4, 0.3, 1.0]),
    ("NumRevolvingTradesWBalance", lambda z, g: int(max(0, min(9, round(4 + 1.5 * z + g.gauss(0, 1.8))))),
     [[0, 2], [3, 5], [6, "inf"]], [-0.2, 0.2, 0.7]),
    ("AverageMInFile", lambda z, g: 10 * round(max(10, min(120, 70 - 15 * z + g.gauss(0, 20))) / 10),
     [[0, 39], [40, 79], [80, "inf"]], [0.8, 0.2, -0.3]),
]
SYN_SUBSCALES = [
    ("ExternalRisk", 2.0, -0.2, [0]),
    ("Inquiry", 1.8, -0.3, [1, 2]),
    ("Delinquency", 2.2, -0.4, [3, 4]),
    ("RevolvingBalance", 1.5, -0.2, [5, 6]),
    ("TradeOpenTime", 1.0, 0.0, [7]),
]
SYN_ROWS = 600
SYN_MISSING_ROWS = 6


def syn_risk(row, layer2_bias):
    total = layer2_bias
    for _, weight, bias, members in SYN_SUBSCALES:
        acc = bias
        for j in members:
            _, _, ranges, ws = SYN_FEATURES[j]
            v = row[j]
            if v == -9:
                continue
            acc += ws[bucket_index(v, ranges)]
        total += weight * sigmoid(acc)
    return sigmoid(total)


def synthetic():
    g = random.Random(20200603)
    rows = []
    for _ in range(SYN_ROWS - SYN_MISSING_ROWS):
        z = g.gauss(0, 1)
        rows.append([int(gen(z, g)) for _, gen, _, _ in SYN_FEATURES])
    for _ in range(SYN_MISSING_ROWS):
        rows.append([-9] * len(SYN_FEATURES))
    g.shuffle(rows)
    # Choose the layer-2 bias so that roughly 40% of rows are labelled 1.
    raw = sorted(syn_risk(r, 0.0) for r in rows)
    target = raw[int(0.6 * len(raw))]
    layer2_bias = round(-logit(target), 3)
    subscales = []
    for name, weight, bias, members in SYN_SUBSCALES:
        feats = []
        for j in members:
            fname, _, ranges, ws = SYN_FEATURES[j]
            feats.append({
                "name": fname,
                "buckets": {"ranges": ranges, "specials": [-9]},
                "weights": ws + [0.0],
                "monotone": True,
            })
        subscales.append({"name": name, "weight": weight, "bias": bias, "features": feats})
    model = {"subscales": subscales, "layer2_bias": layer2_bias, "threshold": 0.5}
    with open(os.path.join(ROOT, "data/synthetic_credit_model.json"), "w") as f:
        json.dump(model, f, indent=2)
        f.write("\n")
    with open(os.path.join(ROOT, "data/synthetic_credit.csv"), "w") as f:
        f.write(",".join(n for n, _, _, _ in SYN_FEATURES) + "\n")
        for r in rows:
            f.write(",".join(str(v) for v in r) + "\n")
    labels = sum(1 for r in rows if syn_risk(r, layer2_bias) > 0.5)
    print(f"synthetic: {len(rows)} rows, {labels} labelled 1, layer2_bias={layer2_bias}")


if __name__ == "__main__":
    fico_fixture()
    synthetic()
