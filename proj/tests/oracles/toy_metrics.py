#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The fdbeam Authors
"""Exact NRMSE and SSIM for the 8x8 toy cases used by the metric tests.

SSIM is rational in the pixels, so it is evaluated with Fractions; NRMSE needs one square
root per line and is evaluated with mpmath at 50 digits. Prints the C++ header of frozen values.
"""
from fractions import Fraction

import mpmath

mpmath.mp.dps = 50
N = 8


def case_images():
    ramp = [[Fraction(8 * i + j, 63) for j in range(N)] for i in range(N)]
    bumped = [row[:] for row in ramp]
    bumped[3][4] += Fraction(1, 4)
    checker = [[Fraction((i + j) % 2) for j in range(N)] for i in range(N)]
    inverted = [[1 - v for v in row] for row in checker]
    prod = [[Fraction((j * j + i * j + 3 * i) % 5, 4) for j in range(N)] for i in range(N)]
    mix = [[Fraction((i + 2 * j) % 7, 6) for j in range(N)] for i in range(N)]
    return [("ramp_bump", ramp, bumped), ("checker_inverted", checker, inverted), ("modular_patterns", prod, mix)]


def ssim_exact(a, b, k1=Fraction(1, 100), k2=Fraction(3, 100)):
    count = N * N
    fa = [v for row in a for v in row]
    fb = [v for row in b for v in row]
    ma = sum(fa) / count
    mb = sum(fb) / count
    va = sum((x - ma) ** 2 for x in fa) / count
    vb = sum((y - mb) ** 2 for y in fb) / count
    cov = sum((x - ma) * (y - mb) for x, y in zip(fa, fb)) / count
    c1, c2 = k1 * k1, k2 * k2
    return (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2))


def nrmse_exact(reference, test):
    total = mpmath.mpf(0)
    for ref_row, test_row in zip(reference, test):
        sq = sum((r - t) ** 2 for r, t in zip(ref_row, test_row)) / len(ref_row)
        span = max(ref_row) - min(ref_row)
        total += mpmath.sqrt(mpmath.mpf(sq.numerator) / sq.denominator) / (mpmath.mpf(span.numerator) / span.denominator)
    return total / len(reference)


def main():
    print("// SPDX-License-Identifier: Apache-2.0")
    print("// Copyright (c) 2026 The fdbeam Authors")
    print("// Generated by tests/oracles/toy_metrics.py; do not edit.")
    print("#pragma once")
    print()
    print("namespace fdbeam::oracle {")
    print()
    print("struct ToyMetricCase {")
    print("  const char* name;")
    print("  double nrmse;")
    print("  double ssim;")
    print("};")
    print()
    print("inline constexpr ToyMetricCase kToyMetricCases[] = {")
    for name, a, b in case_images():
        s = ssim_exact(a, b)
        e = nrmse_exact(a, b)
        print(f'    {{"{name}", {mpmath.nstr(e, 17, strip_zeros=False)}, {mpmath.nstr(mpmath.mpf(s.numerator) / s.denominator, 17, strip_zeros=False)}}},')
    print("};")
    print()
    print("}  // namespace fdbeam::oracle")


if __name__ == "__main__":
    main()
