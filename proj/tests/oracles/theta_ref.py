"""Independent reference values for Theta, the frozen constants in test_model.cpp.

Theta = (2 pi)^-d (nu/2)^(-d/alpha) S_{d-1} int_0^inf E^2_{beta,beta+gamma}(-r^alpha) r^(d-1) dr.

beta < 2: mpmath quadrature of ml_ref on [0, R] with nodes at the oscillation
half periods, plus the tail from the algebraic expansion of E squared.
beta = 2, gamma = 1: E_{2,3}(-r^2) = (1 - cos r)/r^2 in closed form, integrated
by quadosc. Those two integrals are also exact (sqrt 2 / 6 for d = 1, ln 2 / pi
for d = 2, after scaling) and the tests use the exact values; quadosc misses
the d = 2 value by about 1e-8. beta = 2, gamma = 0.3: body on [0, 100] plus the four tail pieces
(mean, fast oscillation, cross term, algebraic square) each to infinity.
Slow (minutes); run with `python3 theta_ref.py`.
"""
import mpmath as mp

from mlref import ml_ref


def _scale(alpha, d, nu):
    sphere = 2 * mp.pi ** (d / 2.0) / mp.gamma(d / 2.0)
    return (2 * mp.pi) ** (-d) * (nu / 2.0) ** (-d / alpha) * sphere


def theta_fractional(alpha, beta, gamma, d, nu, x_max=2000):
    b = beta + gamma
    f = lambda r: mp.mpf(ml_ref(beta, b, -(float(r) ** alpha))) ** 2 * r ** (d - 1)
    R = x_max ** (1.0 / alpha)
    sig = mp.sin(mp.pi / beta)
    nodes = {mp.mpf(0), mp.mpf(R)}
    nodes |= {mp.mpf(2) ** j for j in range(-6, int(mp.log(R, 2)) + 1)}
    nodes |= {(k * mp.pi / sig) ** (beta / alpha) for k in range(1, int(sig * x_max ** (1 / beta) / mp.pi) + 1)}
    body = mp.quad(f, sorted(p for p in nodes if p <= R))
    c = [0] + [(-1) ** (k + 1) * mp.rgamma(b - beta * k) for k in range(1, 8)]
    tail = 0
    for i in range(1, 8):
        for j in range(1, 8):
            e = (i + j) * alpha - d
            tail += c[i] * c[j] * R ** (-e) / e
    return _scale(alpha, d, nu) * (body + tail)


def theta_wave_gamma1(d, nu=1.0):
    f = lambda r: ((1 - mp.cos(r)) / r ** 2) ** 2 * r ** (d - 1)
    return _scale(2.0, d, nu) * mp.quadosc(f, [0, mp.inf], period=2 * mp.pi)


def theta_wave(gamma, R=100, nu=1.0):
    alpha, beta, d = 2.0, 2.0, 1
    b = beta + gamma
    q, phi = (1 - b) / 2, (1 - b) * mp.pi / 2
    f = lambda r: mp.mpf(ml_ref(beta, b, -(float(r) ** alpha))) ** 2
    body = mp.quad(f, [0] + [k * mp.pi for k in range(1, int(R / mp.pi) + 1)] + [R])
    B = lambda x: sum((-1) ** (k + 1) * mp.rgamma(b - beta * k) * x ** (-k) for k in range(1, 7))
    mean = mp.quad(lambda r: 0.5 * r ** (4 * q), [R, mp.inf])
    fast = mp.quadosc(lambda r: 0.5 * r ** (4 * q) * mp.cos(2 * r + 2 * phi), [R, mp.inf],
                      zeros=lambda n: (n * mp.pi + mp.pi / 2 - 2 * phi) / 2 if n > 0 else R)
    cross = mp.quadosc(lambda r: 2 * r ** (2 * q) * mp.cos(r + phi) * B(r * r), [R, mp.inf],
                       zeros=lambda n: n * mp.pi + mp.pi / 2 - phi)
    bsq = mp.quad(lambda r: B(r * r) ** 2, [R, mp.inf])
    return _scale(alpha, d, nu) * (body + mean + fast + cross + bsq)


if __name__ == "__main__":
    mp.mp.dps = 20
    print("(2, 1.5, 0.5, 1, nu=2)", mp.nstr(theta_fractional(2, 1.5, 0.5, 1, 2), 15))
    print("(3, 1.3, 0, 1, nu=1)  ", mp.nstr(theta_fractional(3, 1.3, 0, 1, 1), 15))
    print("(2, 2, 1, 1, nu=1)    ", mp.nstr(theta_wave_gamma1(1), 15))
    print("(2, 2, 1, 2, nu=1)    ", mp.nstr(theta_wave_gamma1(2), 15))
    print("(2, 2, 0.3, 1, nu=1)  ", mp.nstr(theta_wave(0.3), 15))
