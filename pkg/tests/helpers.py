"""Independent test oracles: finite differences and quadrature.

Nothing here calls the Christoffel or rolling-kernel code paths.
"""

import numpy as np
from scipy.integrate import quad


def fd_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        dx = np.zeros_like(x)
        dx[i] = h
        cols.append((np.asarray(f(x + dx)) - np.asarray(f(x - dx))) / (2 * h))
    return np.stack(cols, axis=-1)


def metric_fd(chart, x, h=1e-6):
    jac = fd_jacobian(chart.eval, x, h)
    return jac.T @ jac


def christoffel_from_metric(chart, x, h=1e-4):
    """Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk), metric derivatives by FD."""
    x = np.asarray(x, dtype=float)
    n = x.size
    g = metric_fd(chart, x)
    dg = np.empty((n, n, n))  # dg[m] = d_m g
    for m in range(n):
        dx = np.zeros(n)
        dx[m] = h
        dg[m] = (metric_fd(chart, x + dx) - metric_fd(chart, x - dx)) / (2 * h)
    first = 0.5 * (np.einsum("jlk->ljk", dg) + np.einsum("klj->ljk", dg) - dg)
    return np.einsum("il,ljk->ijk", np.linalg.inv(g), first)


def speed_quad(chart, curve, a, b):
    def speed(t):
        c = curve.eval(t)
        return np.linalg.norm(fd_jacobian(chart.eval, c) @ curve.d1(t))

    return quad(speed, a, b, limit=200, epsabs=1e-12, epsrel=1e-12)[0]


def central_diff(f, s, h):
    return (np.asarray(f(s + h)) - np.asarray(f(s - h))) / (2 * h)


def second_diff(f, s, h):
    return (np.asarray(f(s + h)) - 2 * np.asarray(f(s)) + np.asarray(f(s - h))) / h ** 2
