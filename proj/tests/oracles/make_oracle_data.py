"""Regenerates oracle_data.hpp. Values are computed here, independently of the
C++ library, and frozen into the header the unit tests include.

    python3 tests/oracles/make_oracle_data.py > tests/oracles/oracle_data.hpp
"""

import math
import random

import mpmath

from philox_kat import philox4x32_10

mpmath.mp.dps = 50
MASK64 = (1 << 64) - 1


def glm_case(n, k, seed):
    rnd = random.Random(seed)
    x = [rnd.uniform(-3.0, 3.0) for _ in range(n * k)]
    beta = [rnd.uniform(-1.5, 1.5) for _ in range(k)]
    y = [float(rnd.random() < 0.5) for _ in range(n)]
    f = mpmath.mpf(0)
    g = [mpmath.mpf(0)] * k
    for i in range(n):
        t = mpmath.fsum(mpmath.mpf(x[i * k + j]) * mpmath.mpf(beta[j]) for j in range(k))
        f -= (1 - y[i]) * t + mpmath.log1p(mpmath.exp(-t))
        gf = y[i] - 1 / (1 + mpmath.exp(-t))
        g = [g[j] + gf * mpmath.mpf(x[i * k + j]) for j in range(k)]
    return x, beta, y, f, g


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_stream(parent, index):
    return mix64(parent ^ mix64((index + 0x9E3779B97F4A7C15) & MASK64))


def uniform(key, stream, i):
    b = i >> 1
    w = philox4x32_10((b & 0xFFFFFFFF, b >> 32, stream & 0xFFFFFFFF, stream >> 32),
                      (key & 0xFFFFFFFF, key >> 32))
    bits = (w[1] << 32 | w[0]) if i % 2 == 0 else (w[3] << 32 | w[2])
    return (bits >> 12) / 2.0**52 + 2.0**-53


def normals(key, stream, count):
    ns = derive_stream(stream, 0x4E4F524D414C)
    out = []
    for p in range((count + 1) // 2):
        u1, u2 = uniform(key, ns, 2 * p), uniform(key, ns, 2 * p + 1)
        r = math.sqrt(-2.0 * math.log(u1))
        out += [r * math.cos(2 * math.pi * u2), r * math.sin(2 * math.pi * u2)]
    return out[:count]


def lit(v):
    return repr(float(v))


def arr(name, vals):
    body = ",\n    ".join(", ".join(lit(v) for v in vals[i:i + 4]) for i in range(0, len(vals), 4))
    return f"inline constexpr double {name}[] = {{\n    {body}}};\n"


def main():
    n, k = 16, 3
    x, beta, y, f, g = glm_case(n, k, 20240611)
    print("#pragma once")
    print("// Generated by make_oracle_data.py; do not edit.\n")
    print("namespace oracle {\n")
    print(f"inline constexpr int kGlmN = {n};\ninline constexpr int kGlmK = {k};")
    print(arr("kGlmX", x))
    print(arr("kGlmBeta", beta))
    print(arr("kGlmY", y))
    print(f"inline constexpr double kGlmLoglike = {mpmath.nstr(f, 20)};")
    print(arr("kGlmGrad", [float(v) for v in g]))
    print("inline constexpr unsigned long long kStreamKey = 42;")
    print("inline constexpr unsigned long long kStreamId = 7;")
    print(arr("kUniforms", [uniform(42, 7, i) for i in range(9)]))
    print(arr("kNormals", normals(42, 7, 7)))
    print(f"inline constexpr unsigned long long kDerive_3_5 = {derive_stream(3, 5)}ULL;")
    print("\n}  // namespace oracle")


if __name__ == "__main__":
    main()
