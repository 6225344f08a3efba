"""Regenerate the synthetic stand-in datasets shipped in effortune/data/standin.

The nine public effort datasets could not be bundled, so each stand-in keeps
the real file's shape: same column names, same row count, and per-column
min/max/mean/std taken from the published descriptive statistics. Effort is
rank-coupled to a latent size score so the learners have something to find.

    python scripts/make_standins.py
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "effortune" / "data" / "standin"

# name -> (rows, [(column, min, max, mean, std, is_size_driver)], effort stats)
# Columns without published statistics (kemerer Language/Hardware, the two
# extra isbsg10 columns) get plausible small-integer codes.
TABLES = {
    "kemerer": (15, [
        ("Language", 1, 3, 1.3, 0.6, False),
        ("Hardware", 1, 6, 2.3, 1.5, False),
        ("Duration", 5, 31, 14.3, 7.5, False),
        ("KSLOC", 39, 450, 186.6, 136.8, True),
        ("AdjFP", 100, 2307, 999.1, 589.6, True),
        ("RAWFP", 97, 2284, 993.9, 597.4, True),
    ], (23, 1107, 219.2, 263.1)),
    "albrecht": (24, [
        ("Input", 7, 193, 40.2, 36.9, True),
        ("Output", 12, 150, 47.2, 35.2, True),
        ("Inquiry", 0, 75, 16.9, 19.3, False),
        ("File", 3, 60, 17.4, 15.5, True),
        ("FPAdj", 0.75, 1.2, 1.0, 0.1, False),
        ("RawFPs", 190, 1902, 638.5, 452.7, True),
        ("AdjFP", 199, 1902, 647.6, 488.0, True),
    ], (0.5, 105, 21.9, 28.4)),
    "isbsg10": (37, [
        ("Data_Quality", 1, 2, 1.2, 0.4, False),
        ("UFP", 1, 2, 1.2, 0.4, False),
        ("IS", 1, 10, 3.2, 3.0, False),
        ("DP", 1, 5, 2.6, 1.1, False),
        ("LT", 1, 3, 1.6, 0.8, False),
        ("PPL", 1, 14, 5.1, 4.1, False),
        ("CA", 1, 2, 1.1, 0.3, False),
        ("FS", 44, 1371, 343.8, 304.2, True),
        ("RS", 1, 4, 1.7, 0.9, False),
        ("Recording_Method", 1, 3, 1.4, 0.6, False),
        ("FPS", 1, 5, 3.5, 0.7, False),
    ], (87, 14453, 2959, 3518)),
    "finnish": (38, [
        ("hw", 1, 3, 1.3, 0.6, False),
        ("at", 1, 5, 2.2, 1.5, False),
        ("FP", 65, 1814, 763.6, 510.8, True),
        ("co", 2, 10, 6.3, 2.7, False),
        ("prod", 1, 29, 10.1, 7.1, False),
        ("lnsize", 4, 8, 6.4, 0.8, True),
        ("lneff", 6, 10, 8.4, 1.2, True),
    ], (460, 26670, 7678, 7135)),
    "miyazaki": (48, [
        ("KLOC", 7, 390, 63.4, 71.9, True),
        ("SCRN", 0, 150, 28.4, 30.4, True),
        ("FORM", 0, 76, 20.9, 18.1, False),
        ("FILE", 2, 100, 27.7, 20.4, True),
        ("ESCRN", 0, 2113, 473.0, 514.3, True),
        ("EFORM", 0, 1566, 447.1, 389.6, False),
        ("EFILE", 57, 3800, 936.6, 709.4, True),
    ], (6, 340, 55.6, 60.1)),
    "maxwell": (62, [
        ("App", 1, 5, 2.4, 1.0, False),
        ("Har", 1, 5, 2.6, 1.0, False),
        ("Dba", 0, 4, 1.0, 0.4, False),
        ("Ifc", 1, 2, 1.9, 0.2, False),
        ("Source", 1, 2, 1.9, 0.3, False),
        ("Telonuse", 0, 1, 0.2, 0.4, False),
        ("Nlan", 1, 4, 2.5, 1.0, False),
    ] + [
        (f"T{i:02d}", lo, 5, mu, sd, False)
        for i, (lo, mu, sd) in enumerate([
            (1, 3.0, 1.0), (1, 3.0, 0.7), (2, 3.0, 0.9), (2, 3.2, 0.7),
            (1, 3.0, 0.7), (1, 2.9, 0.7), (1, 3.2, 0.9), (2, 3.8, 1.0),
            (2, 4.1, 0.7), (2, 3.6, 0.9), (2, 3.4, 1.0), (2, 3.8, 0.7),
            (1, 3.1, 1.0), (1, 3.3, 1.0), (1, 3.3, 0.7),
        ], start=1)
    ] + [
        ("Duration", 4, 54, 17.2, 10.7, True),
        ("Size", 48, 3643, 673.3, 784.1, True),
        ("Time", 1, 9, 5.6, 2.1, False),
    ], (583, 63694, 8223, 10500)),
    "desharnais": (77, [
        ("TeamExp", 0, 4, 2.3, 1.3, False),
        ("ManagerExp", 0, 7, 2.6, 1.5, False),
        ("Length", 1, 36, 11.3, 6.8, True),
        ("Transactions", 9, 886, 177.5, 146.1, True),
        ("Entities", 7, 387, 120.5, 86.1, True),
        ("PointsAdjust", 73, 1127, 298.0, 182.3, True),
    ], (546, 23940, 4834, 4188)),
    "kitchenham": (145, [
        ("code", 1, 6, 2.1, 0.9, False),
        ("type", 0, 6, 2.4, 0.9, False),
        ("duration", 37, 946, 206.4, 134.1, True),
        ("fun_pts", 15, 18137, 527.7, 1522, True),
        ("estimate", 121, 79870, 2856, 6789, True),
        ("esti_mtd", 1, 5, 2.5, 0.9, False),
    ], (219, 113930, 3113, 9598)),
    "china": (499, [
        ("AFP", 9, 17518, 486.9, 1059, True),
        ("Input", 0, 9404, 167.1, 486.3, True),
        ("Output", 0, 2455, 113.6, 221.3, True),
        ("Enquiry", 0, 952, 61.6, 105.4, False),
        ("File", 0, 2955, 91.2, 210.3, True),
        ("Interface", 0, 1572, 24.2, 85.0, False),
        ("Added", 0, 13580, 360.4, 829.8, True),
        ("Changed", 0, 5193, 85.1, 290.9, False),
        ("Deleted", 0, 2657, 12.4, 124.2, False),
        ("PDR_AFP", 0, 84, 11.8, 12.1, False),
        ("PDR_UFP", 0, 97, 12.1, 12.8, False),
        ("NPDR_AFP", 0, 101, 13.3, 14.0, False),
        ("NPDU_UFP", 0, 108, 13.6, 14.8, False),
        ("Resource", 1, 4, 1.5, 0.8, False),
        ("Dev_Type", 0, 0, 0.0, 0.0, False),
        ("Duration", 1, 84, 8.7, 7.3, True),
    ], (26, 54620, 3921, 6481)),
}


def marginal(rng, n, lo, hi, mean, std):
    """Sample n values on [lo, hi] with roughly the given mean/std (scaled beta)."""
    if hi <= lo:
        return np.full(n, float(lo))
    m = np.clip((mean - lo) / (hi - lo), 0.02, 0.98)
    v = min((std / (hi - lo)) ** 2, m * (1 - m) * 0.95)
    k = m * (1 - m) / v - 1
    x = lo + (hi - lo) * rng.beta(m * k, (1 - m) * k, size=n)
    # pin the extremes so the published ranges are reproduced
    order = np.argsort(x)
    x[order[0]], x[order[-1]] = lo, hi
    return x


def make(name, rng):
    n, cols, (elo, ehi, emu, esd) = TABLES[name]
    latent = rng.normal(size=n)
    table = {}
    for col, lo, hi, mu, sd, driver in cols:
        x = marginal(rng, n, lo, hi, mu, sd)
        if driver:
            # couple size-like columns to the latent project size through ranks
            key = latent + 0.6 * rng.normal(size=n)
            x = np.sort(x)[np.argsort(np.argsort(key))]
        integral = float(lo).is_integer() and float(hi).is_integer() and sd >= 0.3
        table[col] = np.round(x) if integral else np.round(x, 2)
    effort = marginal(rng, n, elo, ehi, emu, esd)
    key = latent + 0.5 * rng.normal(size=n)
    effort = np.sort(effort)[np.argsort(np.argsort(key))]
    table["Effort"] = np.round(effort, 1)
    return table


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(TABLES):
        rng = np.random.default_rng(20190 + i)
        table = make(name, rng)
        names = list(table)
        with open(OUT / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for r in range(len(table["Effort"])):
                w.writerow([_fmt(table[c][r]) for c in names])
        print(f"{name}: {len(table['Effort'])} rows, {len(names) - 1} features")


def _fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


if __name__ == "__main__":
    main()
