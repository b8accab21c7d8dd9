"""High-precision reference values frozen into the test suite.

Run with ``python tools/oracles.py``; needs mpmath (``pip install .[test]``).
"""

import mpmath as mp

mp.mp.dps = 30


def bump(s):
    return mp.e ** (1 / (s * s - 1))


def sphere_area(m):
    return 2 * mp.pi ** (mp.mpf(m) / 2) / mp.gamma(mp.mpf(m) / 2)


def main():
    line_mass = mp.quad(bump, [-1, 0, 1])
    print("normalization constant, m = 1:", 1 / line_mass)
    for m in (2, 3):
        mass = sphere_area(m) * mp.quad(lambda r: r ** (m - 1) * bump(r), [0, 1])
        print(f"normalization constant, m = {m}:", 1 / mass)

    print("second moment, m = 1:", mp.quad(lambda s: s * s * bump(s), [-1, 0, 1]) / line_mass)
    radial = mp.quad(lambda r: r ** 3 * bump(r), [0, 1]) / mp.quad(lambda r: r * bump(r), [0, 1])
    print("second moment per coordinate, m = 2:", radial / 2)

    # w = sin(pi x) t, a = max(x, 0)^0.5, p = 2, q = 2.2 on (-1, 1) x (0, 1)
    q = mp.mpf("2.2")
    p_part = mp.quad(lambda x: (mp.pi * mp.cos(mp.pi * x)) ** 2, [-1, 1]) * mp.quad(lambda t: t ** 2, [0, 1])
    q_part = (mp.quad(lambda x: mp.sqrt(x) * abs(mp.pi * mp.cos(mp.pi * x)) ** q, [0, 0.5, 1])
              * mp.quad(lambda t: t ** q, [0, 1]))
    print("energy p-part:", p_part)
    print("energy q-part:", q_part)


if __name__ == "__main__":
    main()
