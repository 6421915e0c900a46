"""Reference values for the test suite, computed with mpmath at 40 digits.

Run with `python3 tests/oracles/compute.py`; the printed numbers are the
literals frozen into the C++ tests.
"""
from mpmath import mp, mpf, sinh, cosh, sin, cos, pi, matrix, odefun, findroot

mp.dps = 40


def conic_F(k, g, tau, alpha, beta, a, b):
    # x = A cosh(k t) + B sinh(k t) - g/k^2 through both boundary points
    c = -g / k**2
    A, B = mp.lu_solve(matrix([[cosh(k * alpha), sinh(k * alpha)], [cosh(k * beta), sinh(k * beta)]]),
                       matrix([a - c, b - c]))
    return A * cosh(k * tau) + B * sinh(k * tau) + c


def conic_cauchy(k, g, tau, alpha, a, v):
    c = -g / k**2
    return (a - c) * cosh(k * (tau - alpha)) + v / k * sinh(k * (tau - alpha)) + c


def splitmix64(seed, count):
    mask = (1 << 64) - 1
    state = seed
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


def half_plane_shoot(a, b, rho):
    # geodesic ODE x'' = 2 x' y' / y, y'' = (y'^2 - x'^2) / y, shot from a to b
    # odefun needs a first-order system: state (x, y, x', y')
    def system(u, w):
        return odefun(lambda s, z: [z[2], z[3], 2 * z[2] * z[3] / z[1], (z[3]**2 - z[2]**2) / z[1]],
                      0, [mpf(a[0]), mpf(a[1]), u, w])
    def residual(u, w):
        z = system(u, w)(1)
        return [z[0] - b[0], z[1] - b[1]]
    u, w = findroot(residual, (mpf(b[0]) - a[0], mpf(b[1]) - a[1]))
    z = system(u, w)(rho)
    return z[0], z[1]


def show(name, value):
    print(f"{name} = {mp.nstr(value, 25)}")


if __name__ == "__main__":
    for args in [(1, 0, 0.5, 0, 1, 1, 2), (2, -2, 0.3, -0.7, 0.4, 1.5, -0.2),
                 (0.5, 2, 1.7, 0.2, -0.9, -1, 0.4), (1.1e-4, 2, 0.5, 0, 1, 0, 0),
                 (9e-5, 2, 0.5, 0, 1, 0.3, -1), (1e-5, 2, 0.5, 0, 1, 0, 0),
                 (0.3, 2, 0.9, 0, 1.3, 0.2, 0.7)]:
        show(f"conic_F{args}", conic_F(*[mpf(x) for x in args]))
    # extension off the diagonal: S(tau, alpha, beta, a, v) = F(tau, alpha, beta, a, a + v L)
    for case in [(1, 0, 0.4, 0.1, 0.9, 1.0, -0.5), (2, -2, -0.6, 0.3, -0.5, 0.7, 1.2)]:
        k, g, tau, alpha, beta, a, v = map(mpf, case)
        show(f"conic_S{case}", conic_F(k, g, tau, alpha, beta, a, a + v * (beta - alpha)))
    show("conic_S diagonal (k=1.5, g=1, tau=0.8, alpha=0.2, a=-0.4, v=0.9)",
         conic_cauchy(mpf(1.5), mpf(1), mpf(0.8), mpf(0.2), mpf(-0.4), mpf(0.9)))
    show("cos_sin F(1.1, 0.2, 2.5, 0.3, -0.8)",
         (lambda t, al, be, a, b: (a * sin(be - t) + b * sin(t - al)) / sin(be - al))(*map(mpf, (1.1, 0.2, 2.5, 0.3, -0.8))))
    show("sin(pi/4)", sin(pi / 4))
    x, y = half_plane_shoot((-0.3, 1), (0.3, 1), mpf(0.5))
    show("half_plane midpoint x", x)
    show("half_plane midpoint y", y)
    x, y = half_plane_shoot((-0.3, 1), (0.4, 1.5), mpf(0.25))
    show("half_plane (-0.3,1)->(0.4,1.5) rho=0.25 x", x)
    show("half_plane (-0.3,1)->(0.4,1.5) rho=0.25 y", y)
    print("splitmix64(42) =", [hex(v) for v in splitmix64(42, 4)])
    print("splitmix64(0) =", [hex(v) for v in splitmix64(0, 2)])
