#!/usr/bin/env python3
"""Regenerates the bound golden files with 50-digit arithmetic.

    python3 bounds_reference.py

Writes bound_sets.csv (direct formula checks on pinned inputs) and
scan_vary_tau.csv / scan_vary_w.csv (the annulus scenario end to end).
"""
import csv
import math
import random
from pathlib import Path

from mpmath import mp, mpf, sqrt, log, asin, acos, pi, ceil

mp.dps = 50
HERE = Path(__file__).resolve().parent


def fmt(x):
    return mp.nstr(x, 25, min_fixed=-5, max_fixed=5)


def split_confidence(delta):
    return 1 - sqrt(1 - delta)


def ceil_log2(n):
    return 0 if n <= 1 else (n - 1).bit_length()


def passive(p_y1, rho0, rho1, n_quarter, confidence):
    tail = log(2 * n_quarter) + log(1 / confidence)
    return max(tail / ((1 - p_y1) * rho0), tail / (p_y1 * rho1))


def active(beta, delta, n_tube, h_tube, n):
    first = log(1 / (beta * split_confidence(delta))) / log(1 / (1 - beta))
    return first + n * n_tube * h_tube * (ceil_log2(n) + 1)


def bound_sets():
    rng = random.Random(20240611)
    rows = []
    for _ in range(20):
        r = dict(
            p_y1=rng.uniform(0.01, 0.99),
            rho0=10 ** rng.uniform(-6, -0.5),
            rho1=10 ** rng.uniform(-6, -0.5),
            n_quarter=rng.randint(1, 5000),
            confidence=rng.uniform(0.001, 0.9),
            beta=rng.uniform(0.001, 0.9),
            delta=rng.uniform(0.001, 0.99),
            n_tube=rng.randint(1, 400),
            h_tube=10 ** rng.uniform(-8, -1),
            n_unlabeled=rng.randint(1, 10 ** 7),
        )
        m = {k: (mpf(v) if isinstance(v, float) else v) for k, v in r.items()}
        r["passive"] = fmt(passive(m["p_y1"], m["rho0"], m["rho1"], m["n_quarter"], m["confidence"]))
        r["active"] = fmt(active(m["beta"], m["delta"], m["n_tube"], m["h_tube"], m["n_unlabeled"]))
        rows.append(r)
    with open(HERE / "bound_sets.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def lens(r1, r2, d):
    if d >= r1 + r2:
        return mpf(0)
    if d <= abs(r1 - r2):
        return pi * min(r1, r2) ** 2
    a1 = acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    a2 = acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    k = sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    return r1 * r1 * a1 + r2 * r2 * a2 - k / 2


def cover(tau, r):
    if r >= 2 * tau:
        return 1
    return int(ceil(pi / (2 * asin(r / (2 * tau)))))


def scenario(tau_f, w_f, delta_f):
    tau, w, delta = mpf(tau_f), mpf(w_f), mpf(delta_f)
    gamma = (3 - sqrt(8)) * tau - w - mpf(1e-5)
    if gamma <= 0:
        return None
    area = mpf(25)
    p1 = pi * tau * tau / area
    d0 = 1 / (area - pi * (tau - w) ** 2)
    d1 = 1 / (pi * (tau + w) ** 2)
    in1 = lambda r: lens(r, tau + w, tau)
    in0 = lambda r: pi * r * r - lens(r, tau - w, tau)
    rt, rs = w + gamma, gamma / 4
    h = (1 - p1) * d0 * in0(rt) + p1 * d1 * in1(rt)
    rho0, rho1 = d0 * in0(rs), d1 * in1(rs)
    nq, nt = cover(tau, rs), cover(tau, rt)
    pas = passive(p1, rho0, rho1, nq, split_confidence(delta))
    pool = int(ceil(pas))
    act = active(p1, delta, nt, h, pool)
    return dict(gamma=gamma, N_quarter=nq, N_tube=nt, h=h, rho0=rho0, rho1=rho1,
                passive=pas, active=act, ratio=act / pas)


def linspace(start, stop, count):
    step = (stop - start) / (count - 1)
    return [stop if i + 1 == count else start + step * i for i in range(count)]


def scan(name, points):
    cols = ["param", "gamma", "N_quarter", "N_tube", "h", "rho0", "rho1", "passive", "active", "ratio", "feasible"]
    with open(HERE / name, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for param, (tau, wv) in points:
            s = scenario(tau, wv, 0.1)
            if s is None:
                w.writerow([repr(param)] + [""] * 9 + ["false"])
            else:
                w.writerow([repr(param)] + [s[c] if isinstance(s[c], int) else fmt(s[c]) for c in cols[1:-1]] + ["true"])


if __name__ == "__main__":
    bound_sets()
    scan("scan_vary_tau.csv", [(t, (t, 1e-10)) for t in linspace(0.1, 0.7, 7)])
    scan("scan_vary_w.csv", [(x, (0.1, x)) for x in linspace(1e-10, 1.75e-2, 7)])
