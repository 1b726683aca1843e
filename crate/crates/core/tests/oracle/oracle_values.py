"""Arbitrary-precision reference values frozen into the Rust tests.

Run with: python3 oracle_values.py
Requires mpmath. Every printed value is computed directly from the defining
formulas at 50 significant digits, independent of the Rust code paths.
"""
from mpmath import mp, mpf, loggamma, log, betainc, binomial, beta

mp.dps = 50


def lbeta(a, b):
    return loggamma(a) + loggamma(b) - loggamma(a + b)


def bb_logpmf(x, n, a, b):
    # Direct formula, pmf summed in linear space at 50 digits.
    return log(binomial(n, x) * beta(x + a, n - x + b) / beta(a, b))


def plateau(a, b, c, n):
    return a + b * mpf(n) ** (-c)


print("# ln Gamma")
for x in ["0.001", "0.5", "1", "1.5", "2", "3.7", "10", "100.5", "10000.25", "1000000"]:
    print(x, mp.nstr(loggamma(mpf(x)), 20))

print("# ln Beta")
for a, b in [("29.172", "200.005"), ("0.001", "1000000"), ("1000000", "1000000"), ("0.37", "12.5")]:
    print(a, b, mp.nstr(lbeta(mpf(a), mpf(b)), 20))

print("# beta-binomial log pmf")
for x, n, a, b in [(9, 208, "4", "50"), (25, 175, "4.172", "50.005"), (0, 60, "0.1", "100")]:
    print(x, n, a, b, mp.nstr(bb_logpmf(x, n, mpf(a), mpf(b)), 20))

print("# regularized incomplete beta")
for x, a, b in [("0.1", "29.172", "200.005"), ("0.13", "29.172", "200.005"), ("0.2", "0.5", "0.5"), ("0.999", "3", "80")]:
    print(x, a, b, mp.nstr(betainc(mpf(a), mpf(b), 0, mpf(x), regularized=True), 20))

print("# beta quantiles Beta(29.172, 200.005)")
a, b = mpf("29.172"), mpf("200.005")
for q in ["0.025", "0.25", "0.5", "0.75", "0.975"]:
    lo, hi = mpf(0), mpf(1)
    for _ in range(170):
        mid = (lo + hi) / 2
        if betainc(a, b, 0, mid, regularized=True) < mpf(q):
            lo = mid
        else:
            hi = mid
    r = (lo + hi) / 2
    print(q, mp.nstr(r, 20))

print("# NLL of the 57-operator fixed cohort at A=0.149 B=-0.00544 C=-0.5 sigma=0.0184")
A, B, C, S = mpf("0.149"), mpf("-0.00544"), mpf("-0.5"), mpf("0.0184")
eps = mpf("1e-6")
total = mpf(0)
for i in range(57):
    n = 15 + 7 * i
    x = n * (3 + (i * 7) % 11) // 100
    mu = plateau(A, B, C, n)
    mu = min(max(mu, eps), 1 - eps)
    total -= bb_logpmf(x, n, mu / S, (1 - mu) / S)
print(mp.nstr(total, 20))
