#!/usr/bin/env python3
"""Reference oracle for the bundled fixture panel.

Evaluates the decomposition and mitigation pipeline in 40-digit arithmetic
(mpmath) and freezes the results into tests/data/fixture_expected.json.
Kept deliberately independent of the C++ code: everything below is a direct
transliteration of the defining formulas, with no shared helpers.

Run from the repository root:

    python3 tests/oracle/oracle.py

Regenerates tests/data/fixture_panel.csv, fixture_periods.csv,
fixture_targets.csv and fixture_expected.json.
"""

import json
import os
from mpmath import mp, mpf, log

mp.dps = 40

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.normpath(os.path.join(HERE, "..", "data"))

YEARS = [2000, 2001, 2002, 2003, 2004, 2005]
AGE_GROUPS = ["0-14", "15-64", "65+"]
CARRIERS = ["coal", "oil", "gas", "elec", "heat"]

# Base panel, canonical units: C MtCO2, E Mtce, H million households,
# P million persons, F million m2, I nominal currency, Pr currency per m2.
# Age populations sum exactly to P; carrier columns sum exactly to E and C.
PANEL = {
    "P":  ["100", "102", "104", "106", "108", "110"],
    "H":  ["40", "41", "42", "43", "44", "45"],
    "F":  ["1000", "1060", "1120", "1180", "1240", "1300"],
    "I":  ["5000", "5500", "6050", "6655", "7320", "8052"],
    "Pr": ["10", "10.8", "11.6", "12.4", "13.0", "13.5"],
    "P_age_0_14":  ["25", "25", "25", "25", "25", "25"],
    "P_age_15_64": ["65", "67", "69", "71", "73", "75"],
    "P_age_65p":   ["10", "10", "10", "10", "10", "10"],
    "E_coal": ["220", "212", "204", "194", "184", "174"],
    "E_oil":  ["60", "63", "66", "69", "72", "75"],
    "E_gas":  ["40", "44", "48", "52", "56", "60"],
    "E_elec": ["120", "132", "144", "158", "172", "186"],
    "E_heat": ["60", "63", "66", "69", "72", "75"],
    "C_coal": ["240", "228", "216", "202", "188", "174"],
    "C_oil":  ["55", "57", "59", "61", "63", "65"],
    "C_gas":  ["30", "32.5", "35", "37.5", "40", "42.5"],
    "C_elec": ["50", "54", "58", "63", "68", "73"],
    "C_heat": ["25", "26", "27", "28", "29", "30"],
}

PERIODS = [("P1", 2001, 2003), ("P2", 2004, 2005)]
TARGETS = [("P1", "12.0"), ("P2", "8.0")]

# report-scale conversion: MtCO2 per million households -> kgCO2 per household
KG_PER_HH = mpf(1000)


def col(sym):
    return [mpf(v) for v in PANEL[sym]]


def build():
    p = {sym: col(sym) for sym in PANEL}
    p["E"] = [p["E_coal"][t] + p["E_oil"][t] + p["E_gas"][t] + p["E_elec"][t] + p["E_heat"][t]
              for t in range(6)]
    p["C"] = [p["C_coal"][t] + p["C_oil"][t] + p["C_gas"][t] + p["C_elec"][t] + p["C_heat"][t]
              for t in range(6)]
    return p


def logmean(a, b):
    if a == b:
        return a
    return (a - b) / (log(a) - log(b))


def factor_values(p, t):
    """Common factor values and grouped member values at year index t."""
    common = {
        "p": p["P"][t] / p["H"][t],
        "r": p["F"][t] * p["Pr"][t] / p["I"][t],
        "i": p["I"][t] / p["P"][t],
        "d": 1 / p["Pr"][t],
        "e": p["E"][t] / p["F"][t],
    }
    s_members = {
        "0-14": p["P_age_0_14"][t] / p["P"][t],
        "15-64": p["P_age_15_64"][t] / p["P"][t],
        "65+": p["P_age_65p"][t] / p["P"][t],
    }
    k_members = {c: p["C_" + c][t] / p["E"][t] for c in CARRIERS}
    return common, s_members, k_members


FACTORS = ["p", "S", "r", "i", "d", "e", "K"]


def decompose_sectoral(p, t0, t1):
    """Multi-sector LMDI over age x carrier cells, report units (kg/household)."""
    eff = {m: mpf(0) for m in FACTORS}
    cells = {m: [] for m in FACTORS}
    for j in AGE_GROUPS:
        for l in CARRIERS:
            vals = {}
            for t in (t0, t1):
                common, s_m, k_m = factor_values(p, t)
                x = dict(common)
                x["S"] = s_m[j]
                x["K"] = k_m[l]
                c_s = KG_PER_HH
                for m in FACTORS:
                    c_s *= x[m]
                vals[t] = (x, c_s)
            L = logmean(vals[t1][1], vals[t0][1])
            for m in FACTORS:
                term = L * log(vals[t1][0][m] / vals[t0][0][m])
                eff[m] += term
                cells[m].append(term)
    return eff, cells


def decompose_aggregate(p, t0, t1):
    eff = {}
    ch0 = KG_PER_HH * p["C"][t0] / p["H"][t0]
    ch1 = KG_PER_HH * p["C"][t1] / p["H"][t1]
    L = logmean(ch1, ch0)
    for m in FACTORS:
        x0 = aggregate_factor(p, m, t0)
        x1 = aggregate_factor(p, m, t1)
        eff[m] = L * log(x1 / x0)
    return eff


def aggregate_factor(p, m, t):
    common, s_m, k_m = factor_values(p, t)
    if m == "S":
        return sum(s_m.values())
    if m == "K":
        return sum(k_m.values())
    return common[m]


def ols(xs, ys):
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    sst = sum((y - ybar) ** 2 for y in ys)
    ssr = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    r2 = mpf(1) if sst == 0 else 1 - ssr / sst
    return slope, intercept, r2


def num(x):
    return mp.nstr(x, 22)


def main():
    p = build()

    # --- fixture CSV ---------------------------------------------------
    header = ["year", "C", "E", "H", "P", "F", "I", "Pr",
              "P_age_0_14", "P_age_15_64", "P_age_65p",
              "E_coal", "E_oil", "E_gas", "E_elec", "E_heat",
              "C_coal", "C_oil", "C_gas", "C_elec", "C_heat"]
    lines = [",".join(header)]
    for t, year in enumerate(YEARS):
        row = [str(year), num(p["C"][t]), num(p["E"][t])]
        row += [PANEL[sym][t] for sym in header[3:]]
        lines.append(",".join(row))
    with open(os.path.join(DATA, "fixture_panel.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")

    with open(os.path.join(DATA, "fixture_periods.csv"), "w") as f:
        f.write("label,first_year,last_year\n")
        for label, a, b in PERIODS:
            f.write(f"{label},{a},{b}\n")
    with open(os.path.join(DATA, "fixture_targets.csv"), "w") as f:
        f.write("label,expected_mtce\n")
        for label, v in TARGETS:
            f.write(f"{label},{v}\n")

    out = {
        "years": YEARS,
        "age_groups": AGE_GROUPS,
        "carriers": CARRIERS,
        "sectors": [{"age": j, "carrier": l} for j in AGE_GROUPS for l in CARRIERS],
    }

    # --- derived intensity ---------------------------------------------
    c_h = {str(y): num(KG_PER_HH * p["C"][t] / p["H"][t]) for t, y in enumerate(YEARS)}
    out["c_h"] = c_h

    # --- annual decompositions ------------------------------------------
    sect, aggr = [], []
    records = []          # (interval, intensity, total) factor scope, end-H
    sector_scope = []
    for t in range(5):
        t0y, t1y = YEARS[t], YEARS[t + 1]
        eff, cells = decompose_sectoral(p, t, t + 1)
        delta = KG_PER_HH * (p["C"][t + 1] / p["H"][t + 1] - p["C"][t] / p["H"][t])
        sect.append({
            "t0": t0y, "t1": t1y,
            "delta": num(delta),
            "effects": {m: num(eff[m]) for m in FACTORS},
            "sector_effects": {m: [num(v) for v in cells[m]] for m in FACTORS},
        })
        eff_a = decompose_aggregate(p, t, t + 1)
        aggr.append({
            "t0": t0y, "t1": t1y,
            "delta": num(delta),
            "effects": {m: num(eff_a[m]) for m in FACTORS},
        })

        intensity = sum(abs(eff[m]) for m in FACTORS if eff[m] < 0)
        total = p["H"][t + 1] * intensity / KG_PER_HH  # MtCO2, end-year households
        records.append((t1y, intensity, total, p["H"][t + 1]))
        cell_intensity = sum(abs(v) for m in FACTORS for v in cells[m] if v < 0)
        sector_scope.append(num(cell_intensity))

    out["decompose_sectoral"] = sect
    out["decompose_aggregate"] = aggr
    out["chain_delta"] = num(KG_PER_HH * (p["C"][5] / p["H"][5] - p["C"][0] / p["H"][0]))
    out["mitigation"] = [
        {"year": y, "intensity": num(i), "total": num(tot), "households": num(h)}
        for y, i, tot, h in records
    ]
    out["mitigation_intensity_sector_scope"] = sector_scope

    # --- period aggregates ----------------------------------------------
    periods = []
    for label, a, b in PERIODS:
        rs = [r for r in records if a <= r[0] <= b]
        total = sum(r[2] for r in rs)
        mean_i = sum(r[1] for r in rs) / len(rs)
        periods.append({"label": label, "first_year": a, "last_year": b,
                        "total": num(total), "mean_intensity": num(mean_i)})
    out["periods"] = periods

    # --- rescaling, coal equivalent, comparison --------------------------
    scales, savings = [], []
    for (y, inten, total, h) in records:
        t = YEARS.index(y)
        scales.append({"year": y,
                       "per_capita": num(KG_PER_HH * total / p["P"][t]),
                       "per_floor": num(KG_PER_HH * total / p["F"][t])})
        f_t = p["C"][t] / p["E"][t]  # tCO2 per tce at the record's end year
        savings.append({"year": y, "mtce": num(total / f_t), "factor": num(f_t)})
    out["scales"] = scales
    out["savings"] = savings

    comparison = []
    for (label, a, b), (_, expect) in zip(PERIODS, TARGETS):
        assessed = sum(mpf(s["mtce"]) for s in savings if a <= s["year"] <= b)
        comparison.append({"label": label, "assessed": num(assessed),
                           "expected": expect,
                           "coverage": num(assessed / mpf(expect))})
    out["comparison"] = comparison

    # --- trend fits over the four reporting scales ------------------------
    xs = [mpf(r[0]) for r in records]
    series = {
        "intensity": [r[1] for r in records],
        "total": [r[2] for r in records],
        "per_capita": [mpf(s["per_capita"]) for s in scales],
        "per_floor": [mpf(s["per_floor"]) for s in scales],
    }
    out["trends"] = {}
    for name, ys in series.items():
        slope, intercept, r2 = ols(xs, ys)
        out["trends"][name] = {"slope": num(slope), "intercept": num(intercept),
                               "r2": num(r2)}

    # --- uncertainty bands (absolute half-widths) -------------------------
    band_i, band_t = mpf("50.0"), mpf("2.0")
    out["band"] = {
        "intensity_half_width": num(band_i),
        "total_half_width": num(band_t),
        "rows": [{"year": y,
                  "intensity_low": num(max(mpf(0), i - band_i)),
                  "intensity_high": num(i + band_i),
                  "total_low": num(max(mpf(0), tot - band_t)),
                  "total_high": num(tot + band_t)}
                 for y, i, tot, _ in records],
    }

    with open(os.path.join(DATA, "fixture_expected.json"), "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")

    # console summary for spot checks
    print("c_h:", {k: mp.nstr(mpf(v), 10) for k, v in c_h.items()})
    print("first interval effects:")
    for m in FACTORS:
        print("  ", m, mp.nstr(mpf(sect[0]["effects"][m]), 12))
    print("delta 2000->2001:", mp.nstr(mpf(sect[0]["delta"]), 12))
    print("sum effects:", mp.nstr(sum(mpf(sect[0]["effects"][m]) for m in FACTORS), 12))
    print("mitigation:", [(r["year"], mp.nstr(mpf(r["intensity"]), 10),
                           mp.nstr(mpf(r["total"]), 10)) for r in out["mitigation"]])
    print("periods:", [(q["label"], mp.nstr(mpf(q["total"]), 10)) for q in periods])


if __name__ == "__main__":
    main()
