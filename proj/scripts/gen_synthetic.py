#!/usr/bin/env python3
"""Generate the bundled 30-region x 18-year synthetic dataset.

Scores follow the shape of a published provincial resilience series; the
indicator and driver values are drawn around that latent level with a fixed
seed, so the output is stable across runs.
"""

import csv
import json
import math
import pathlib
import random

SEED = 20240601
YEARS = list(range(2004, 2022))
ANCHOR_YEARS = [2004, 2007, 2010, 2013, 2016, 2019, 2021]

# region: (lon, lat, latent level at the anchor years)
REGIONS = {
    "Beijing": (116.4, 40.2, [0.57, 0.65, 0.69, 0.81, 0.85, 0.98, 1.02]),
    "Tianjin": (117.3, 39.3, [0.27, 0.38, 0.44, 0.56, 0.57, 0.57, 0.59]),
    "Hebei": (115.6, 38.9, [0.39, 0.51, 0.69, 1.00, 1.11, 1.24, 1.27]),
    "Shanxi": (112.3, 37.6, [0.39, 0.59, 0.74, 0.95, 0.95, 0.69, 0.65]),
    "Inner Mongolia": (113.9, 44.1, [0.37, 0.61, 0.88, 1.07, 1.09, 0.95, 0.95]),
    "Liaoning": (122.6, 41.3, [0.43, 0.59, 0.80, 0.92, 0.76, 0.82, 0.85]),
    "Jilin": (126.2, 43.7, [0.31, 0.39, 0.51, 0.52, 0.56, 0.54, 0.54]),
    "Heilongjiang": (127.7, 47.9, [0.39, 0.51, 0.62, 0.66, 0.56, 0.60, 0.65]),
    "Shanghai": (121.4, 31.2, [0.34, 0.46, 0.52, 0.57, 0.66, 0.71, 0.82]),
    "Jiangsu": (119.5, 33.0, [0.57, 0.68, 0.96, 1.30, 1.59, 1.80, 1.94]),
    "Zhejiang": (120.1, 29.2, [0.57, 0.74, 0.88, 1.15, 1.33, 1.63, 1.73]),
    "Anhui": (117.2, 31.8, [0.33, 0.47, 0.72, 1.08, 1.14, 1.26, 1.43]),
    "Fujian": (118.0, 26.1, [0.40, 0.48, 0.61, 0.80, 0.87, 0.93, 1.06]),
    "Jiangxi": (115.7, 27.6, [0.33, 0.38, 0.51, 0.60, 0.70, 0.83, 0.96]),
    "Shandong": (118.2, 36.3, [0.60, 0.79, 1.08, 1.44, 1.73, 1.88, 2.12]),
    "Henan": (113.6, 33.9, [0.42, 0.57, 0.77, 0.87, 1.13, 1.31, 1.41]),
    "Hubei": (112.3, 30.9, [0.38, 0.45, 0.63, 0.75, 0.87, 1.01, 1.16]),
    "Hunan": (111.7, 27.6, [0.39, 0.50, 0.67, 0.85, 0.88, 0.96, 1.12]),
    "Guangdong": (113.4, 23.4, [0.68, 0.88, 1.21, 1.63, 1.77, 2.21, 2.37]),
    "Guangxi": (108.8, 23.8, [0.33, 0.40, 0.53, 0.65, 0.73, 0.81, 0.96]),
    "Hainan": (109.8, 19.2, [0.18, 0.15, 0.22, 0.28, 0.28, 0.28, 0.31]),
    "Chongqing": (107.9, 30.1, [0.29, 0.37, 0.46, 0.55, 0.59, 0.62, 0.70]),
    "Sichuan": (102.7, 30.6, [0.45, 0.57, 0.74, 0.95, 0.99, 1.06, 1.10]),
    "Guizhou": (106.9, 26.8, [0.23, 0.29, 0.37, 0.48, 0.53, 0.57, 0.56]),
    "Yunnan": (101.5, 25.0, [0.27, 0.36, 0.44, 0.55, 0.54, 0.46, 0.44]),
    "Shaanxi": (108.9, 35.2, [0.37, 0.50, 0.73, 1.02, 1.02, 1.09, 1.12]),
    "Gansu": (102.5, 37.0, [0.14, 0.22, 0.35, 0.49, 0.44, 0.34, 0.37]),
    "Qinghai": (96.0, 35.7, [0.07, 0.11, 0.15, 0.23, 0.27, 0.27, 0.30]),
    "Ningxia": (106.2, 37.3, [0.07, 0.14, 0.24, 0.29, 0.36, 0.32, 0.34]),
    "Xinjiang": (85.2, 41.1, [0.19, 0.29, 0.42, 0.71, 0.68, 0.51, 0.47]),
}

# Shared land borders among the 30 regions; Hainan has none.
ADJACENCY = {
    "Beijing": ["Tianjin", "Hebei"],
    "Tianjin": ["Hebei"],
    "Hebei": ["Shanxi", "Inner Mongolia", "Liaoning", "Shandong", "Henan"],
    "Shanxi": ["Inner Mongolia", "Henan", "Shaanxi"],
    "Inner Mongolia": ["Liaoning", "Jilin", "Heilongjiang", "Shaanxi", "Ningxia", "Gansu"],
    "Liaoning": ["Jilin"],
    "Jilin": ["Heilongjiang"],
    "Shanghai": ["Jiangsu", "Zhejiang"],
    "Jiangsu": ["Zhejiang", "Anhui", "Shandong"],
    "Zhejiang": ["Anhui", "Fujian", "Jiangxi"],
    "Anhui": ["Shandong", "Henan", "Hubei", "Jiangxi"],
    "Fujian": ["Jiangxi", "Guangdong"],
    "Jiangxi": ["Hubei", "Hunan", "Guangdong"],
    "Shandong": ["Henan"],
    "Henan": ["Hubei", "Shaanxi"],
    "Hubei": ["Hunan", "Chongqing", "Shaanxi"],
    "Hunan": ["Guangdong", "Guangxi", "Guizhou", "Chongqing"],
    "Guangdong": ["Guangxi"],
    "Guangxi": ["Guizhou", "Yunnan"],
    "Chongqing": ["Sichuan", "Guizhou", "Shaanxi"],
    "Sichuan": ["Guizhou", "Yunnan", "Shaanxi", "Gansu", "Qinghai"],
    "Guizhou": ["Yunnan"],
    "Shaanxi": ["Gansu", "Ningxia"],
    "Gansu": ["Qinghai", "Ningxia", "Xinjiang"],
    "Qinghai": ["Xinjiang"],
}

# id, name, attribute, weight, scale, latent loading, noise sd
INDICATORS = [
    ("x1", "Energy intensity", "-", 0.084, 1.2, 0.55, 0.10),
    ("x2", "Energy production elasticity coefficient", "-", 0.002, 0.8, 0.20, 0.25),
    ("x3", "Energy industrial investment", "+", 0.126, 600.0, 0.90, 0.20),
    ("x4", "R&D intensity", "+", 0.092, 1.1, 0.80, 0.15),
    ("x5", "R&D full-time equivalent", "+", 0.185, 60000.0, 1.30, 0.20),
    ("x6", "Technology market development level", "+", 0.055, 0.9, 0.90, 0.30),
    ("x7", "Rail kilometers", "+", 0.041, 3000.0, 0.50, 0.12),
    ("x8", "Freight volume", "+", 0.212, 80000.0, 1.10, 0.18),
    ("x9", "Cell phone penetration", "+", 0.010, 55.0, 0.60, 0.08),
    ("x10", "Forest cover", "+", 0.124, 25.0, 0.30, 0.35),
    ("x11", "Carbon emission intensity", "-", 0.030, 2.5, 0.60, 0.12),
    ("x12", "Industrial pollution control investment completion", "+", 0.040, 9.0, 0.70, 0.35),
]

# id, scale, latent loading, noise sd
DRIVERS = [
    ("x1", 20000.0, 1.40, 0.15),
    ("x2", 4000.0, 0.80, 0.45),
    ("x3", 2500.0, 1.00, 0.35),
    ("x4", 1500.0, 1.20, 0.20),
    ("x5", 9000.0, 1.60, 0.30),
]

# Cells removed from the values file: (region, indicator, year, empty row?)
GAPS = [
    ("Hainan", "x6", 2004, True),
    ("Gansu", "x4", 2005, False),
    ("Qinghai", "x9", 2010, True),
    ("Ningxia", "x3", 2012, True),
    ("Ningxia", "x3", 2013, False),
    ("Xinjiang", "x12", 2021, True),
]


def latent(anchors, year):
    for (y0, v0), (y1, v1) in zip(zip(ANCHOR_YEARS, anchors), zip(ANCHOR_YEARS[1:], anchors[1:])):
        if y0 <= year <= y1:
            return v0 + (v1 - v0) * (year - y0) / (y1 - y0)
    raise ValueError(year)


def fmt(v):
    return f"{v:.6g}"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "data" / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)

    effects = {r: rng.gauss(0.0, 0.15) for r in REGIONS}
    gaps = {(r, j, y): empty for r, j, y, empty in GAPS}

    with open(out / "values.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region", "year", "indicator", "value"])
        for r, (_, _, anchors) in REGIONS.items():
            for y in YEARS:
                level = latent(anchors, y) + effects[r]
                for j, _, attr, _, scale, load, sd in INDICATORS:
                    sign = 1.0 if attr == "+" else -1.0
                    v = scale * math.exp(sign * load * level + rng.gauss(0.0, sd))
                    key = (r, j, y)
                    if key in gaps:
                        if gaps[key]:
                            w.writerow([r, y, j, ""])
                        continue
                    w.writerow([r, y, j, fmt(v)])

    with open(out / "drivers.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region", "year", "factor", "value"])
        for r, (_, _, anchors) in REGIONS.items():
            for y in YEARS:
                level = latent(anchors, y)
                for j, scale, load, sd in DRIVERS:
                    v = scale * math.exp(load * level + rng.gauss(0.0, sd))
                    w.writerow([r, y, j, fmt(v)])

    with open(out / "centroids.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region", "lon", "lat"])
        for r, (lon, lat, _) in REGIONS.items():
            w.writerow([r, lon, lat])

    with open(out / "adjacency.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region_a", "region_b"])
        for a, bs in ADJACENCY.items():
            for b in bs:
                w.writerow([a, b])

    spec = [{"id": j, "name": n, "attribute": a} for j, n, a, *_ in INDICATORS]
    with open(out / "spec.json", "w") as f:
        json.dump(spec, f, indent=2)
        f.write("\n")

    table1 = [{"id": j, "name": n, "attribute": a, "weight": wt} for j, n, a, wt, *_ in INDICATORS]
    (root / "data" / "table1").mkdir(parents=True, exist_ok=True)
    with open(root / "data" / "table1" / "spec.json", "w") as f:
        json.dump(table1, f, indent=2)
        f.write("\n")
    with open(root / "data" / "table1" / "weights.json", "w") as f:
        json.dump({j: wt for j, _, _, wt, *_ in INDICATORS}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
