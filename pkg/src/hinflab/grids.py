"""Quadrature grids for the measures underlying the square functions.

Grid kinds and their measures:

* ``interval``        -- [0, b] with dt, uniform nodes;
* ``line``            -- [-L, L] with dt, uniform nodes;
* ``ray-dt``          -- (0, oo) with dt, log-spaced nodes;
* ``ray-haar``        -- (0, oo) with dt/t, log-spaced nodes;
* ``sector-boundary`` -- two rays t e^{+-i omega} with arc length |dlambda|;
* ``strip-boundary``  -- two vertical lines Re = +-b with |dlambda|, log-spaced
                         in |Im lambda| (four branches, a symmetric window
                         around the real axis is excluded);
* ``h-strip-boundary``-- two horizontal lines Im = +-a (contour for operator
                         logarithms), log-spaced in |Re z|.

Log-spaced dt-measure weights are trapezoid weights in the log coordinate
(t_j * du).  For integrands decaying at both window ends in log coordinates
this rule converges exponentially in nodes per decade; the price is that the
weights reproduce the measure of the truncated window itself only to
O(du^2) relative (see ``measure_defect_tolerance``).  Uniform kinds and the
Haar kind telescope exactly.

Contour-type grids carry ``tangents``: unit complex d(lambda)/d(arclength)
oriented so that the curve surrounds the sector/strip interior counter
clockwise, i.e. sums w_j * tangent_j * G(lambda_j) approximate the oriented
contour integral of G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_EXACT_MEASURE_KINDS = ("interval", "line", "ray-haar")
KINDS = _EXACT_MEASURE_KINDS + ("ray-dt", "sector-boundary", "strip-boundary",
                                "h-strip-boundary")


@dataclass(frozen=True)
class GridSpec:
    kind: str
    points: np.ndarray            # complex evaluation points lambda_j
    weights: np.ndarray           # positive quadrature weights for the kind's measure
    branches: tuple               # slices, monotone parameter per branch
    params: dict = field(default_factory=dict)
    tangents: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        pts = np.asarray(self.points)
        w = np.asarray(self.weights, dtype=float)
        if pts.shape != w.shape or pts.ndim != 1:
            raise ValueError("points and weights must be matching 1-d arrays")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and positive")
        for br in self.branches:
            t = self.branch_parameter(br)
            if np.any(np.diff(t) <= 0):
                raise ValueError("nodes must be strictly monotone per branch")
        defect = abs(float(w.sum()) - self.window_measure)
        if defect > self.measure_defect_tolerance():
            raise ValueError(
                f"weight sum {w.sum():.12g} misses window measure "
                f"{self.window_measure:.12g} by {defect:.3g}")

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def window_measure(self) -> float:
        return float(self.params["window_measure"])

    def branch_parameter(self, br: slice) -> np.ndarray:
        pts = self.points[br]
        if self.kind in ("interval", "line"):
            return pts.real
        if self.kind in ("ray-dt", "ray-haar", "sector-boundary"):
            return np.abs(pts)  # rays may be rotated off the positive axis
        if self.kind == "strip-boundary":
            return pts.imag
        return pts.real  # h-strip-boundary

    def measure_defect_tolerance(self) -> float:
        if self.kind in _EXACT_MEASURE_KINDS:
            return 1e-10 * max(self.window_measure, 1.0)
        # trapezoid-in-log dt weights: defect is (du^2/12) * measure + tails
        du = float(self.params.get("du", 0.0))
        return (du ** 2 / 12.0 * 1.01 + 1e-10) * self.window_measure

    def fingerprint(self) -> tuple:
        p = self.params
        return (self.kind, self.size, len(self.branches), p.get("lo"),
                p.get("hi"), p.get("nodes"), p.get("per_decade"),
                p.get("angle"), p.get("offset"), p.get("negated"))


def _log_nodes(lo: float, hi: float, per_decade: int):
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    decades = math.log10(hi / lo)
    count = max(int(round(decades * per_decade)) + 1, 8)
    u = np.linspace(math.log(lo), math.log(hi), count)
    return np.exp(u), u[1] - u[0]


def _trapz_weights(count: int, spacing: float) -> np.ndarray:
    w = np.full(count, spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def interval_grid(b: float, nodes: int = 512) -> GridSpec:
    t = np.linspace(0.0, b, nodes)
    w = _trapz_weights(nodes, t[1] - t[0])
    return GridSpec("interval", t.astype(complex) + 0j, w, (slice(0, nodes),),
                    {"lo": 0.0, "hi": b, "nodes": nodes, "window_measure": b})


def line_grid(half_width: float, nodes: int = 1024) -> GridSpec:
    t = np.linspace(-half_width, half_width, nodes)
    w = _trapz_weights(nodes, t[1] - t[0])
    return GridSpec("line", t.astype(complex), w, (slice(0, nodes),),
                    {"lo": -half_width, "hi": half_width, "nodes": nodes,
                     "window_measure": 2 * half_width},
                    tangents=np.ones(nodes, dtype=complex))


def ray_grid(lo: float, hi: float, per_decade: int = 60, measure: str = "dt") -> GridSpec:
    t, du = _log_nodes(lo, hi, per_decade)
    if measure == "dt":
        w = t * _trapz_weights(t.size, du)
        kind, total = "ray-dt", hi - lo
    elif measure == "haar":
        w = _trapz_weights(t.size, du)
        kind, total = "ray-haar", math.log(hi / lo)
    else:
        raise ValueError("measure must be 'dt' or 'haar'")
    return GridSpec(kind, t.astype(complex), w, (slice(0, t.size),),
                    {"lo": lo, "hi": hi, "per_decade": per_decade, "du": du,
                     "window_measure": total})


def sector_boundary_grid(angle: float, lo: float, hi: float,
                         per_decade: int = 60) -> GridSpec:
    """Boundary of the sector |arg z| < angle, Dunford orientation.

    Lower ray t e^{-i angle} traversed outward, upper ray t e^{+i angle}
    traversed inward; a symmetric log window around the vertex is excluded
    (``lo`` is the vertex cutoff).
    """
    if not (0 < angle <= math.pi):
        raise ValueError("sector angle must lie in (0, pi]")
    t, du = _log_nodes(lo, hi, per_decade)
    wray = t * _trapz_weights(t.size, du)
    pts = np.concatenate([t * np.exp(-1j * angle), t * np.exp(1j * angle)])
    w = np.concatenate([wray, wray])
    tang = np.concatenate([np.full(t.size, np.exp(-1j * angle)),
                           np.full(t.size, -np.exp(1j * angle))])
    return GridSpec("sector-boundary", pts, w,
                    (slice(0, t.size), slice(t.size, 2 * t.size)),
                    {"angle": angle, "lo": lo, "hi": hi, "per_decade": per_decade,
                     "du": du, "window_measure": 2 * (hi - lo)},
                    tangents=tang)


def _two_line_grid(kind: str, offset: float, lo: float, hi: float, per_decade: int,
                   to_point, plus_tangent: complex) -> GridSpec:
    """Two parallel lines at +-offset, four log-spaced branches.

    ``to_point(side, s)`` maps the signed line parameter s to the complex node;
    the +offset line carries ``plus_tangent`` (traversal of increasing s),
    the -offset line the opposite orientation.
    """
    t, du = _log_nodes(lo, hi, per_decade)
    wray = t * _trapz_weights(t.size, du)
    seg_pts, seg_w, seg_tan, branches, pos = [], [], [], [], 0
    for side, tangent in ((+1, plus_tangent), (-1, -plus_tangent)):
        for s in (-t[::-1], t):
            seg_pts.append(to_point(side, s))
            seg_w.append(wray[::-1] if s[0] < 0 else wray)
            seg_tan.append(np.full(t.size, tangent))
            branches.append(slice(pos, pos + t.size))
            pos += t.size
    return GridSpec(kind, np.concatenate(seg_pts), np.concatenate(seg_w),
                    tuple(branches),
                    {"offset": offset, "lo": lo, "hi": hi, "per_decade": per_decade,
                     "du": du, "window_measure": 4 * (hi - lo)},
                    tangents=np.concatenate(seg_tan))


def strip_boundary_grid(half_width: float, lo: float, hi: float,
                        per_decade: int = 60) -> GridSpec:
    """Boundary of the vertical strip |Re z| < half_width, Dunford orientation."""
    return _two_line_grid("strip-boundary", half_width, lo, hi, per_decade,
                          lambda side, s: side * half_width + 1j * s, 1j)


def horizontal_strip_boundary_grid(half_width: float, lo: float, hi: float,
                                   per_decade: int = 60) -> GridSpec:
    """Boundary of the horizontal strip |Im z| < half_width (logarithm contours)."""
    return _two_line_grid("h-strip-boundary", half_width, lo, hi, per_decade,
                          lambda side, s: s - 1j * side * half_width, 1.0)


def refine(grid: GridSpec, factor: int = 2) -> GridSpec:
    """Same window, ``factor`` times the node density (consistency checks)."""
    p = grid.params
    if grid.kind in ("ray-dt", "ray-haar"):
        return ray_grid(p["lo"], p["hi"], p["per_decade"] * factor,
                        "dt" if grid.kind == "ray-dt" else "haar")
    if grid.kind == "interval":
        return interval_grid(p["hi"], (p["nodes"] - 1) * factor + 1)
    if grid.kind == "line":
        return line_grid(p["hi"], (p["nodes"] - 1) * factor + 1)
    if grid.kind == "sector-boundary":
        return sector_boundary_grid(p["angle"], p["lo"], p["hi"],
                                    p["per_decade"] * factor)
    if grid.kind == "strip-boundary":
        return strip_boundary_grid(p["offset"], p["lo"], p["hi"],
                                   p["per_decade"] * factor)
    return horizontal_strip_boundary_grid(p["offset"], p["lo"], p["hi"],
                                          p["per_decade"] * factor)
