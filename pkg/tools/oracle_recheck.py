#!/usr/bin/env python3
"""High-precision recheck of the closed-form values frozen into the tests.

Every derived constant the test suite relies on is recomputed here with
mpmath at 50 significant digits, independently of the library code.  Run it
once after any change to the kernel algebra:

    python3 tools/oracle_recheck.py

Exit code 0 means every frozen value reproduced; nonzero lists the mismatches.
"""

import sys

import mpmath as mp

mp.mp.dps = 50

FAILURES = []


def check(name, got, want, tol):
    err = abs(mp.mpc(got) - mp.mpc(want))
    ok = err < tol
    print(f"[{'ok' if ok else 'FAIL'}] {name}: |delta| = {mp.nstr(err, 3)}")
    if not ok:
        FAILURES.append(name)


def main():
    # --- power-mean kernel transform: int_0^inf r e^{-ru} e^{-i x u} du ---
    for r in (mp.mpf("0.5"), mp.mpf(1), mp.mpf(2), mp.mpf(5)):
        for x in (mp.mpf("-7.3"), mp.mpf(0), mp.mpf("0.25"), mp.mpf(42)):
            integrand = lambda u: r * mp.e**(-r * u) * mp.e**(-1j * x * u)
            if abs(x) > 1:
                # oscillatory tail: integrate period by period
                got = mp.quadosc(integrand, [0, mp.inf],
                                 period=2 * mp.pi / abs(x))
            else:
                got = mp.quad(integrand, [0, mp.inf])
            check(f"transform r={r} x={x}", got, r / (r + 1j * x), mp.mpf("1e-30"))

    # --- exponential convolution identities -------------------------------
    for x in (mp.mpf("0.5"), mp.mpf(3), mp.mpf(12)):
        got = mp.quad(lambda t: mp.e**(-t) * 2 * mp.e**(-2 * (x - t)), [0, x])
        want = 2 * (mp.e**(-x) - mp.e**(-2 * x))
        check(f"Exp(1)*Exp(2) at {x}", got, want, mp.mpf("1e-30"))
        got = mp.quad(lambda t: mp.e**(-t) * mp.e**(-(x - t)), [0, x])
        check(f"Exp(1)*Exp(1) at {x}", got, x * mp.e**(-x), mp.mpf("1e-30"))

    # --- planted-zero kernel: unit mass and exact transform zero ----------
    for alpha in (mp.mpf("0.5"), mp.mpf(1), mp.mpf(2)):
        c = (1 + alpha**2) / alpha**2
        phi = lambda u: c * (mp.e**(-u) - mp.e**((-1 + 1j * alpha) * u)
                             / (1 + 1j * alpha))
        mass = mp.quad(phi, [0, mp.inf])
        check(f"planted-zero mass alpha={alpha}", mass, 1, mp.mpf("1e-25"))
        at_zero = mp.quad(lambda u: phi(u) * mp.e**(-1j * alpha * u), [0, mp.inf])
        check(f"planted-zero transform alpha={alpha}", at_zero, 0, mp.mpf("1e-25"))

    # --- smoothed sine: closed form of the additive Exp(1) average --------
    for x in (mp.mpf(3), mp.mpf(20)):
        got = mp.quad(lambda t: mp.sin(t) * mp.e**(-(x - t)), [0, x])
        want = (mp.sin(x) - mp.cos(x) + mp.e**(-x)) / 2
        check(f"smoothed sin at {x}", got, want, mp.mpf("1e-30"))

    # --- log-scale mean of a constant: M_1(1)(x) = 1 - 1/x ----------------
    for x in (mp.mpf(2), mp.mpf(100)):
        got = mp.quad(lambda t: (t / x) / t, [1, x])
        check(f"M_1 constant at {x}", got, 1 - 1 / x, mp.mpf("1e-30"))

    # --- dual mean of a constant: int_x^inf x t^{-2} dt = 1 ---------------
    got = mp.quad(lambda t: 7 / t**2, [7, mp.inf])
    check("dual mean of constant", got, 1, mp.mpf("1e-28"))

    # --- dual smoothing of e^{-t}: int_x^inf e^{-t} e^{-(t-x)} dt ---------
    for x in (mp.mpf(1), mp.mpf(5)):
        got = mp.quad(lambda t: mp.e**(-t) * mp.e**(-(t - x)), [x, mp.inf])
        check(f"dual smoothing at {x}", got, mp.e**(-x) / 2, mp.mpf("1e-30"))

    # --- continuity bound for Exp(1): 2 (1 - e^{-delta}) ------------------
    for d in (mp.mpf("0.1"), mp.mpf("0.01"), mp.mpf("0.001")):
        moved = mp.quad(lambda t: abs(mp.e**(-t) - mp.e**(-(t + d))), [0, mp.inf])
        head = mp.quad(lambda t: mp.e**(-t), [0, d])
        check(f"continuity bound delta={d}", moved + head,
              2 * (1 - mp.e**(-d)), mp.mpf("1e-28"))

    # --- triple iterate of Exp(1): u^2/2 e^{-u}, unit mass ----------------
    mass3 = mp.quad(lambda u: u**2 / 2 * mp.e**(-u), [0, mp.inf])
    check("third iterate mass", mass3, 1, mp.mpf("1e-30"))

    if FAILURES:
        print(f"\n{len(FAILURES)} mismatches: {', '.join(FAILURES)}")
        return 1
    print("\nall frozen values reproduced")
    return 0


if __name__ == "__main__":
    sys.exit(main())
