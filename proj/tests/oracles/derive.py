#!/usr/bin/env python3
"""Reference values for the unit and acceptance tests.

Each value is computed here independently of the C++ code (closed forms,
quadrature, a dense eigen-solver, a pure-Python copy of the RNG) and frozen
into oracle_values.hpp.  Re-run after changing any definition:

    python3 tests/oracles/derive.py > tests/oracle_values.hpp
"""
import math

import mpmath as mp
import numpy as np
from scipy.linalg import eig_banded

mp.mp.dps = 30
MASK = (1 << 64) - 1


def splitmix64(x):
    z = (x + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def derive_seed(master, index):
    return splitmix64(splitmix64(master) ^ splitmix64((index + 0x632BE59BD9B4E019) & MASK))


class Xoshiro:
    def __init__(self, seed):
        self.s = []
        x = seed
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
            self.s.append(z ^ (z >> 31))

    def next(self):
        rotl = lambda v, k: ((v << k) | (v >> (64 - k))) & MASK
        s = self.s
        result = (rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result


def circle_f(theta, m):
    c2, s2 = mp.cos(theta) ** 2, mp.sin(theta) ** 2
    return (m[0][0] * c2 * c2 + 2 * m[0][1] * c2 * s2 + m[1][1] * s2 * s2) / 2


def mean_exit_time(m, eps, a, b, x):
    """E_x[exit time] of d(theta) = F'/4 dt + eps dW from (a, b), by quadrature."""
    scale = lambda y: mp.exp(-circle_f(y, m) / (2 * eps**2))           # s'(y)
    speed = lambda y: 2 / (eps**2 * scale(y))                          # m(y)
    S = lambda y: mp.quad(scale, [a, y])
    sa, sb, sx = mp.mpf(0), S(b), S(x)
    left = mp.quad(lambda y: S(y) * speed(y), [a, x])
    right = mp.quad(lambda y: (sb - S(y)) * speed(y), [x, b])
    return ((sb - sx) * left + sx * right) / (sb - sa)


def principal_eigenvalue(m, eps, a, b, n=20000):
    """Smallest eigenvalue of -L on (a, b), Dirichlet, via the symmetrised
    (self-adjoint) form and a banded eigen-solver on a fine grid."""
    h = (b - a) / n
    t = a + h * np.arange(1, n)
    tm = a + h * (np.arange(0, n) + 0.5)
    f = lambda th: 0.5 * (m[0][0] * np.cos(th) ** 4 + 2 * m[0][1] * np.cos(th) ** 2 * np.sin(th) ** 2
                          + m[1][1] * np.sin(th) ** 4)
    # -L = -(eps^2/2) e^{-V} d/dx e^{V} d/dx with V = F/(2 eps^2); conjugate by e^{V/2}.
    V = lambda th: f(th) / (2 * eps**2)
    w = np.exp(V(tm))
    d = (eps**2 / 2) * (w[:-1] + w[1:]) / h**2 * np.exp(-V(t))
    off = -(eps**2 / 2) * w[1:-1] / h**2 * np.exp(-0.5 * (V(t[:-1]) + V(t[1:])))
    band = np.zeros((2, n - 1))
    band[0, 1:] = off
    band[1, :] = d
    vals = eig_banded(band, select="i", select_range=(0, 0), eigvals_only=True)
    return float(vals[0])


def emit(name, value, comment):
    if isinstance(value, int):
        print(f"// {comment}\ninline constexpr std::uint64_t {name} = {value}ULL;")
    else:
        print(f"// {comment}\ninline constexpr double {name} = {float(value)!r};")


def main():
    print("#pragma once\n")
    print("// Generated by tests/oracles/derive.py; do not edit by hand.\n")
    print("#include <cstdint>\n")
    print("namespace oracle {\n")

    rng = Xoshiro(42)
    for i in range(4):
        emit(f"kRng42Draw{i}", rng.next(), f"xoshiro256** output {i} for seed 42")
    emit("kDeriveSeed_1_0", derive_seed(1, 0), "derive_seed(1, 0)")
    emit("kDeriveSeed_7_3", derive_seed(7, 3), "derive_seed(7, 3)")

    r = 2 * math.log(100) / math.log(4)
    k = math.ceil(r)
    emit("kGnpLogRatio", r, "2 log(100) / log(4)")
    emit("kGnpExitBound", 0.5 * ((1 - 1 / (2 * k)) - 1 / 400), "bound for n = 100, k = 7")
    emit("kUniformTwoEdgeF", mp.mpf(11) / 36, "F at the barycentre of the two-edge simplex")

    half = [[0.5, 0.0], [0.0, 0.5]]
    emit("kHalfIdentityExitEps02", mean_exit_time(half, mp.mpf("0.2"), mp.pi / 4, 3 * mp.pi / 4, mp.pi / 2),
         "mean exit time from (pi/4, 3pi/4) at pi/2, M = I/2, eps = 0.2")
    emit("kHalfIdentityExitEps015", mean_exit_time(half, mp.mpf("0.15"), mp.pi / 4, 3 * mp.pi / 4, mp.pi / 2),
         "same at eps = 0.15")
    emit("kHalfIdentityLambdaEps015", principal_eigenvalue(half, 0.15, math.pi / 4, 3 * math.pi / 4),
         "principal Dirichlet eigenvalue on (pi/4, 3pi/4), M = I/2, eps = 0.15")
    emit("kZeroDriftLambdaEps03", 2 * 0.3**2, "(eps^2/2)(pi/(pi/2))^2 at eps = 0.3")
    print("\n}  // namespace oracle")


if __name__ == "__main__":
    main()
