"""Exponential integral E1, evaluated without quadrature.

Kept independent of the adaptive integrator so it can serve as a check on it.
"""
from __future__ import annotations

import math

EULER_GAMMA = 0.57721566490153286060651209008240243


def exp1(x: float) -> float:
    """E1(x) = int_x^inf e^-t / t dt for x > 0.

    Power series for x <= 1, modified Lentz continued fraction beyond.
    """
    if not x > 0:
        raise ValueError("E1 is evaluated for x > 0 only")
    if x <= 1.0:
        total = 0.0
        term = 1.0
        k = 1
        while True:
            term *= -x / k
            inc = -term / k
            total += inc
            if abs(inc) < 1e-17 * abs(total):
                break
            k += 1
        return -EULER_GAMMA - math.log(x) + total
    # E1(x) = e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x)
