"""Ready-made charts and curves with closed-form ground truth.

All zoo charts and curves are vectorized: they accept stacked coordinates
``(..., n)`` or time arrays and broadcast.

Closed forms in ``reference_facts`` (derivations are standard; the
holonomy of a parallel ``c(t) = (level, t)`` on a surface of revolution
with profile radius ``rho`` follows from rotating the metric-orthonormal
frame at rate ``d rho / d level / sqrt(g_11)``):

* sphere, radius R, colatitude theta: metric ``diag(R^2, R^2 sin^2)``;
  ``Gamma^theta_phiphi = -sin cos``, ``Gamma^phi_thetaphi = cot``; the
  parallel at colatitude ``theta`` has holonomy ``-2 pi cos(theta)`` and
  develops onto a circle of radius ``R tan(theta)``.
* cone, half-angle alpha, slant coordinate r: metric
  ``diag(1, r^2 sin^2 alpha)``; holonomy of a parallel ``-2 pi sin(alpha)``;
  development radius ``r``.
* torus, radii R > r: holonomy of the parallel at ``theta`` is
  ``2 pi sin(theta)``; both equators are geodesics.
* cylinder and plane are flat: every holonomy vanishes, helices and lines
  are geodesics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, ParamError, UnknownManifoldError
from .geometry import Chart, ChartCurve
from .rolling import wrap_angle

SPHERE_EPS = 1e-3
CONE_EPS = 1e-3

MANIFOLDS = ("plane", "sphere", "cylinder", "cone", "torus", "graph")
CURVE_KINDS = ("coordinate_line", "latitude", "great_circle", "helix", "custom_polynomial")


@dataclass(frozen=True)
class ZooEntry:
    name: str
    params: Mapping[str, float]
    chart: Chart
    reference_facts: Mapping[str, Callable] = field(default_factory=dict)
    # (lo, hi) per coordinate; a safe box inside the domain guard
    sample_box: tuple = ()

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo = np.array([b[0] for b in self.sample_box])
        hi = np.array([b[1] for b in self.sample_box])
        return lo + (hi - lo) * rng.random((count, len(lo)))


def _vec(*comps):
    return np.stack(np.broadcast_arrays(*comps), axis=-1)


def _jac(col0, col1):
    return np.stack([col0, col1], axis=-1)


def _hess(h00, h01, h11):
    return np.stack([np.stack([h00, h01], axis=-1), np.stack([h01, h11], axis=-1)], axis=-2)


def _split(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


def _param(params, key, default, check=None, msg=""):
    value = params.get(key, default)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParamError(f"parameter {key!r} must be a number, got {value!r}") from None
    if not math.isfinite(value) or (check is not None and not check(value)):
        raise ParamError(f"parameter {key!r}={value}: {msg}")
    return value


def _plane(params):
    def ev(x):
        u, v = _split(x)
        return _vec(u, v, np.zeros_like(u))

    def jac(x):
        u, _ = _split(x)
        z, o = np.zeros_like(u), np.ones_like(u)
        return _jac(_vec(o, z, z), _vec(z, o, z))

    def hess(x):
        u, _ = _split(x)
        z = _vec(*(np.zeros_like(u),) * 3)
        return _hess(z, z, z)

    facts = {
        "metric": lambda x: np.eye(2),
        "christoffel": lambda x: np.zeros((2, 2, 2)),
    }
    chart = Chart(2, 3, ev, jac, hess, vectorized=True, name="plane")
    return chart, facts, ((-3.0, 3.0), (-3.0, 3.0))


def _sphere(params):
    R = _param(params, "radius", 1.0, lambda v: v > 0, "radius must be > 0")

    def ev(x):
        th, ph = _split(x)
        return R * _vec(np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th))

    def jac(x):
        th, ph = _split(x)
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        return R * _jac(_vec(ct * cp, ct * sp, -st), _vec(-st * sp, st * cp, np.zeros_like(th)))

    def hess(x):
        th, ph = _split(x)
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        z = np.zeros_like(th)
        return R * _hess(_vec(-st * cp, -st * sp, -ct), _vec(-ct * sp, ct * cp, z), _vec(-st * cp, -st * sp, z))

    def guard(x):
        th, _ = _split(x)
        return (th > SPHERE_EPS) & (th < math.pi - SPHERE_EPS)

    def christoffel(x):
        th = float(x[0])
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = -math.sin(th) * math.cos(th)
        g[1, 0, 1] = g[1, 1, 0] = math.cos(th) / math.sin(th)
        return g

    facts = {
        "metric": lambda x: np.diag([R ** 2, R ** 2 * math.sin(x[0]) ** 2]),
        "christoffel": christoffel,
        "latitude_holonomy": lambda level: wrap_angle(-2.0 * math.pi * math.cos(level)),
        "latitude_development_radius": lambda level: R * math.tan(level),
        "geodesic_latitudes": lambda: (math.pi / 2,),
    }
    chart = Chart(2, 3, ev, jac, hess, guard, vectorized=True, name="sphere")
    return chart, facts, ((0.15, math.pi - 0.15), (-math.pi, math.pi))


def _cylinder(params):
    r = _param(params, "radius", 1.0, lambda v: v > 0, "radius must be > 0")

    def ev(x):
        u, ph = _split(x)
        return _vec(r * np.cos(ph), r * np.sin(ph), u)

    def jac(x):
        u, ph = _split(x)
        z, o = np.zeros_like(u), np.ones_like(u)
        return _jac(_vec(z, z, o), _vec(-r * np.sin(ph), r * np.cos(ph), z))

    def hess(x):
        u, ph = _split(x)
        z = np.zeros_like(u)
        zero = _vec(z, z, z)
        return _hess(zero, zero, _vec(-r * np.cos(ph), -r * np.sin(ph), z))

    facts = {
        "metric": lambda x: np.diag([1.0, r ** 2]),
        "christoffel": lambda x: np.zeros((2, 2, 2)),
        "latitude_holonomy": lambda level: 0.0,
        "latitude_development_radius": lambda level: math.inf,
    }
    chart = Chart(2, 3, ev, jac, hess, vectorized=True, name="cylinder")
    return chart, facts, ((-2.0, 2.0), (-math.pi, math.pi))


def _cone(params):
    alpha = _param(params, "half_angle", math.pi / 6, lambda v: 0 < v < math.pi / 2,
                   "half_angle must lie in (0, pi/2)")
    sa, ca = math.sin(alpha), math.cos(alpha)

    def ev(x):
        r, ph = _split(x)
        return _vec(r * sa * np.cos(ph), r * sa * np.sin(ph), r * ca)

    def jac(x):
        r, ph = _split(x)
        cp, sp = np.cos(ph), np.sin(ph)
        return _jac(_vec(sa * cp, sa * sp, ca * np.ones_like(r)), _vec(-r * sa * sp, r * sa * cp, np.zeros_like(r)))

    def hess(x):
        r, ph = _split(x)
        cp, sp, z = np.cos(ph), np.sin(ph), np.zeros_like(r)
        return _hess(_vec(z, z, z), _vec(-sa * sp, sa * cp, z), _vec(-r * sa * cp, -r * sa * sp, z))

    def guard(x):
        r, _ = _split(x)
        return r > CONE_EPS

    def christoffel(x):
        r = float(x[0])
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = -r * sa ** 2
        g[1, 0, 1] = g[1, 1, 0] = 1.0 / r
        return g

    facts = {
        "metric": lambda x: np.diag([1.0, (x[0] * sa) ** 2]),
        "christoffel": christoffel,
        "latitude_holonomy": lambda level: wrap_angle(-2.0 * math.pi * sa),
        "latitude_development_radius": lambda level: level,
    }
    chart = Chart(2, 3, ev, jac, hess, guard, vectorized=True, name="cone")
    return chart, facts, ((0.2, 3.0), (-math.pi, math.pi))


def _torus(params):
    R = _param(params, "major_radius", 2.0, lambda v: v > 0, "major_radius must be > 0")
    r = _param(params, "minor_radius", 1.0, lambda v: 0 < v < R, "need 0 < minor_radius < major_radius")

    def ev(x):
        th, ph = _split(x)
        rho = R + r * np.cos(th)
        return _vec(rho * np.cos(ph), rho * np.sin(ph), r * np.sin(th))

    def jac(x):
        th, ph = _split(x)
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        rho = R + r * ct
        return _jac(_vec(-r * st * cp, -r * st * sp, r * ct), _vec(-rho * sp, rho * cp, np.zeros_like(th)))

    def hess(x):
        th, ph = _split(x)
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        rho = R + r * ct
        z = np.zeros_like(th)
        return _hess(_vec(-r * ct * cp, -r * ct * sp, -r * st), _vec(r * st * sp, -r * st * cp, z),
                     _vec(-rho * cp, -rho * sp, z))

    def christoffel(x):
        th = float(x[0])
        rho = R + r * math.cos(th)
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = rho * math.sin(th) / r
        g[1, 0, 1] = g[1, 1, 0] = -r * math.sin(th) / rho
        return g

    facts = {
        "metric": lambda x: np.diag([r ** 2, (R + r * math.cos(x[0])) ** 2]),
        "christoffel": christoffel,
        "latitude_holonomy": lambda level: wrap_angle(2.0 * math.pi * math.sin(level)),
        "geodesic_latitudes": lambda: (0.0, math.pi),
    }
    chart = Chart(2, 3, ev, jac, hess, vectorized=True, name="torus")
    return chart, facts, ((-math.pi, math.pi), (-math.pi, math.pi))


def _graph(params):
    a = _param(params, "a", 1.0)
    b = _param(params, "b", 1.0)

    def ev(x):
        u, v = _split(x)
        return _vec(u, v, a * u ** 2 + b * v ** 2)

    def jac(x):
        u, v = _split(x)
        z, o = np.zeros_like(u), np.ones_like(u)
        return _jac(_vec(o, z, 2 * a * u), _vec(z, o, 2 * b * v))

    def hess(x):
        u, _ = _split(x)
        z, o = np.zeros_like(u), np.ones_like(u)
        return _hess(_vec(z, z, 2 * a * o), _vec(z, z, z), _vec(z, z, 2 * b * o))

    def metric(x):
        grad = np.array([2 * a * x[0], 2 * b * x[1]])
        return np.eye(2) + np.outer(grad, grad)

    def christoffel(x):
        grad = np.array([2 * a * x[0], 2 * b * x[1]])
        hf = np.diag([2 * a, 2 * b])
        return np.einsum("i,jk->ijk", grad / (1.0 + grad @ grad), hf)

    facts = {"metric": metric, "christoffel": christoffel}
    chart = Chart(2, 3, ev, jac, hess, vectorized=True, name="graph")
    return chart, facts, ((-1.5, 1.5), (-1.5, 1.5))


_BUILDERS = {
    "plane": _plane,
    "sphere": _sphere,
    "cylinder": _cylinder,
    "cone": _cone,
    "torus": _torus,
    "graph": _graph,
}

_KNOWN_PARAMS = {
    "plane": (),
    "sphere": ("radius",),
    "cylinder": ("radius",),
    "cone": ("half_angle",),
    "torus": ("major_radius", "minor_radius"),
    "graph": ("a", "b"),
}


def make_chart(name: str, params: Mapping[str, float] | None = None) -> ZooEntry:
    """Build a named zoo chart. See ``MANIFOLDS`` for the names."""
    params = dict(params or {})
    if name not in _BUILDERS:
        raise UnknownManifoldError(f"unknown manifold {name!r}; known: {', '.join(MANIFOLDS)}")
    extra = sorted(set(params) - set(_KNOWN_PARAMS[name]))
    if extra:
        raise ParamError(f"unknown parameter(s) for {name}: {', '.join(extra)}")
    chart, facts, box = _BUILDERS[name](params)
    return ZooEntry(name=name, params=params, chart=chart, reference_facts=facts, sample_box=box)


# ---------------------------------------------------------------------------
# curves


def _polynomial_curve(polys, interval, name):
    d1 = [p.deriv() for p in polys]
    d2 = [p.deriv(2) for p in polys]

    def stack(ps):
        return lambda t: _vec(*(p(np.asarray(t, dtype=float)) for p in ps))

    return ChartCurve(tuple(interval), stack(polys), stack(d1), stack(d2), vectorized=True, name=name)


def _level(params, default):
    for key in ("level", "colatitude", "radius"):
        if key in params:
            return _param(params, key, default)
    return default


def make_curve(entry: ZooEntry, kind: str, params: Mapping | None = None, interval=None) -> ChartCurve:
    """Build a curve of the given kind in ``entry``'s chart coordinates.

    Kinds: ``coordinate_line`` (``origin + t * velocity``), ``latitude``
    (``(level, speed * t)``), ``great_circle`` (sphere equator),
    ``helix`` (``(offset + slope * t, t)``), ``custom_polynomial``
    (``coeffs``: per-coordinate ascending power coefficients).
    """
    params = dict(params or {})
    n = entry.chart.dim_domain
    mid = [0.5 * (lo + hi) for lo, hi in entry.sample_box]
    loop = (0.0, 2.0 * math.pi)

    if kind == "coordinate_line":
        origin = np.asarray(params.get("origin", mid), dtype=float)
        velocity = np.asarray(params.get("velocity", [1.0] + [0.0] * (n - 1)), dtype=float)
        if origin.shape != (n,) or velocity.shape != (n,):
            raise ParamError(f"origin and velocity need {n} components")
        polys = [Polynomial([o, v]) for o, v in zip(origin, velocity)]
        default = (0.0, 1.0)
    elif kind == "latitude":
        level = _level(params, mid[0])
        speed = _param(params, "speed", 1.0, lambda v: v != 0, "speed must be nonzero")
        polys = [Polynomial([level]), Polynomial([0.0, speed])]
        default = loop
    elif kind == "great_circle":
        if entry.name != "sphere":
            raise ParamError("great_circle is only defined on the sphere")
        speed = _param(params, "speed", 1.0, lambda v: v != 0, "speed must be nonzero")
        polys = [Polynomial([math.pi / 2]), Polynomial([0.0, speed])]
        default = loop
    elif kind == "helix":
        slope = _param(params, "slope", 1.0)
        offset = _param(params, "offset", 0.0)
        polys = [Polynomial([offset, slope]), Polynomial([0.0, 1.0])]
        default = (0.0, 1.0)
    elif kind == "custom_polynomial":
        coeffs = params.get("coeffs")
        if not isinstance(coeffs, (list, tuple)) or len(coeffs) != n:
            raise ParamError(f"custom_polynomial needs 'coeffs' with {n} coefficient lists")
        try:
            polys = [Polynomial(np.asarray(c, dtype=float).ravel()) for c in coeffs]
        except (TypeError, ValueError):
            raise ParamError("coefficients must be numbers") from None
        default = (0.0, 1.0)
    else:
        raise ParamError(f"unknown curve kind {kind!r}; known: {', '.join(CURVE_KINDS)}")

    if n != 2 and kind not in ("coordinate_line", "custom_polynomial"):
        raise ParamError(f"curve kind {kind!r} needs a 2-dimensional chart")

    interval = tuple(float(v) for v in (interval if interval is not None else default))
    if len(interval) != 2 or not interval[1] > interval[0]:
        raise ParamError(f"interval must be [t_min, t_max] with t_min < t_max, got {interval}")
    curve = _polynomial_curve(polys, interval, name=kind)
    ts = np.linspace(*interval, 257)
    cs = curve.eval(ts)
    ok = np.broadcast_to(np.asarray(entry.chart.domain_guard(cs), dtype=bool), ts.shape)
    if not np.all(ok):
        t_bad = ts[int(np.argmin(ok))]
        raise DomainError(f"{kind} curve leaves the {entry.name} chart domain at t={t_bad}")
    return curve


def standard_pairs() -> dict:
    """The (chart, curve) test set used by the acceptance suite."""
    sphere = make_chart("sphere")
    plane = make_chart("plane")
    cylinder = make_chart("cylinder")
    cone = make_chart("cone", {"half_angle": math.pi / 6})
    torus = make_chart("torus", {"major_radius": 2.0, "minor_radius": 1.0})
    graph = make_chart("graph", {"a": 0.5, "b": 0.25})
    return {
        "plane_line": (plane, make_curve(plane, "coordinate_line",
                                         {"origin": [0.3, -1.0], "velocity": [1.0, 2.0]})),
        "plane_parabola": (plane, make_curve(plane, "custom_polynomial",
                                             {"coeffs": [[0.0, 1.0], [0.0, 0.0, 1.0]]}, (-1.0, 1.0))),
        "sphere_equator": (sphere, make_curve(sphere, "great_circle")),
        "sphere_latitude": (sphere, make_curve(sphere, "latitude", {"colatitude": math.pi / 3})),
        "cylinder_helix": (cylinder, make_curve(cylinder, "helix", {"slope": 0.5}, (0.0, 2.0 * math.pi))),
        "cone_circle": (cone, make_curve(cone, "latitude", {"level": 1.0})),
        "torus_top": (torus, make_curve(torus, "latitude", {"colatitude": math.pi / 6})),
        "graph_line": (graph, make_curve(graph, "coordinate_line",
                                         {"origin": [-0.5, 0.2], "velocity": [1.0, 0.3]})),
    }
