"""High-precision replay of the gain design recipe, used to freeze expected
values in the C++ tests. Run: python3 tests/oracles/replay_design.py"""

from mpmath import mp, mpf, matrix, inverse, sqrt, expm, quad, exp

mp.dps = 40


def limits(hbar, l2, lN, mu1, mu2):
    a = 2 * (mu2 - mu1) / (hbar * lN * (mu1 + mu2 + hbar))
    b = 4 / (lN * (hbar + max(hbar, 2 * mu1)))
    c = 4 / (l2 * (mu1 + mu2))
    d = 4 / (lN * (mu1 + mu2 + hbar))
    return a, b, c, d


def design(hbar, l2, lN):
    mu1 = hbar / 2
    mu2 = -mu1 + 2 * hbar * lN / l2 + 1
    a, b, c, d = limits(hbar, l2, lN, mu1, mu2)
    dk = mpf("0.9") * d
    k1 = (min(a, b - dk) + max(0, c - dk)) / 2
    k2 = k1 + dk
    T = matrix([[mu2 - mu1, -(mu2 + mu1)], [0, 2]])
    K = matrix([[k1, k2]]) * inverse(T)
    return dict(mu1=mu1, mu2=mu2, a=a, b=b, c=c, d=d, k1=k1, k2=k2, K1=K[0, 0], K2=K[0, 1])


def sigma_max(m):
    g = m.T * m
    tr = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    return sqrt(tr / 2 + sqrt((tr / 2) ** 2 - det))


def report(name, hbar, l2, lN):
    r = design(mpf(hbar), mpf(l2), mpf(lN))
    print(name)
    for k in ("mu1", "mu2", "a", "b", "c", "d", "k1", "k2", "K1", "K2"):
        print(f"  {k:4s} = {mp.nstr(r[k], 25)}")
    # closed loop in transformed coordinates at the (h, lambda) = (hbar, lambdaN) corner
    h, lam = mpf(hbar), mpf(lN)
    F = matrix([[1, h], [0, 1]])
    G = matrix([[h * h / 2], [h]])
    K = matrix([[r["K1"], r["K2"]]])
    T = matrix([[r["mu2"] - r["mu1"], -(r["mu2"] + r["mu1"])], [0, 2]])
    S = inverse(T) * (F - lam * G * K) * T
    print(f"  sigma(hbar, lambdaN) = {mp.nstr(sigma_max(S), 25)}")


report("example 1", "3", "0.3", "6")
report("example 2", "1", "5", "60")

print("scalar expm / integral oracles")
print("  exp(-1)        =", mp.nstr(exp(-1), 25))
print("  int_0^1 e^-t   =", mp.nstr(quad(lambda t: exp(-t), [0, 1]), 25))
A = matrix([[0, 1], [-2, -3]])
E = expm(A * mpf("0.7"))
print("  expm([[0,1],[-2,-3]]*0.7) =", [mp.nstr(E[i, j], 20) for i in range(2) for j in range(2)])
