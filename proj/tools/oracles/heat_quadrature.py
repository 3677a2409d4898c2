#!/usr/bin/env python3
"""Regenerates the frozen closed-form values for the occupation-time functional of
one-dimensional Brownian motion used in tests/test_pricing.cpp.

The value at clock state b with remaining time s is

    v(b, x, s) = b + integral over [0, s] of P(|B_u + x| <= r) du,

evaluated with a dense trapezoid rule (the C++ implementation uses adaptive Simpson,
so agreement to ~1e-9 is an independent check, not a self-comparison).
"""
import numpy as np
from math import erf, sqrt


def occupancy_probability(x, u, r):
    if u <= 0.0:
        return 1.0 if abs(x) < r else (0.5 if abs(x) == r else 0.0)
    s = sqrt(2.0 * u)
    return 0.5 * (erf((r - x) / s) - erf((-r - x) / s))


def heat_value(b, x, s, r=1.0, n=1_000_000):
    u = np.linspace(0.0, s, n + 1)
    p = np.array([occupancy_probability(x, ui, r) for ui in u])
    return b + np.trapezoid(p, u)


def main():
    horizon = 1.0
    for b in (0.0, 0.3):
        for x in (0.0, 0.5, 2.0):
            v = heat_value(b, x, horizon - b)
            print(f"b={b:<4} x={x:<4} remaining={horizon - b:<5} v={v:.12f}")


if __name__ == "__main__":
    main()
