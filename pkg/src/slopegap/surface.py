"""Transversals of general lattice surfaces described as data.

A surface is a list of pieces.  Each piece is the triangle
``{0 < a <= 1, (1 - x0 a)/y0 - n a <= b <= (1 - x0 a)/y0}`` (``n = alpha``, or
``2 alpha`` when ``-I`` is in the Veech group and the parabolic generator has
eigenvalue ``-1``), tiled by convex polygons.  On each polygon the return time
is ``y/(a(ax + by))`` for a fixed saddle connection vector ``(x, y)``.

Surfaces are read from JSON (schema tag ``"surface/1"``)::

    {"schema": "surface/1", "name": "...", "cm": 2.0,
     "pieces": [{"x0": 0, "y0": 1, "alpha": 1, "case": "minus-I-plus-eigen",
                 "polygons": [{"vertices": [[0, 1], [1, 0], [1, 1]],
                               "vector": [0, 1]}]}]}

``cm`` normalizes Lebesgue measure so the whole transversal has mass one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import shapely
from scipy import integrate
from shapely.geometry import LineString, MultiLineString, Polygon

__all__ = [
    "CASES",
    "SCHEMA",
    "PolygonPiece",
    "PieceSpec",
    "SurfaceSpec",
    "SurfaceValidationError",
    "CompactnessReport",
    "piece_return_time",
    "min_return_time",
    "surface_gap_cdf",
    "compactness_check",
    "validate_surface",
    "load_surface",
    "torus_spec",
]

CASES = ("no-minus-I", "minus-I-plus-eigen", "minus-I-minus-eigen")
TOL = 1e-9

SCHEMA = {
    "type": "object",
    "required": ["schema", "name", "cm", "pieces"],
    "properties": {
        "schema": {"const": "surface/1"},
        "name": {"type": "string"},
        "cm": {"type": "number", "exclusiveMinimum": 0},
        "pieces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["x0", "y0", "alpha", "case", "polygons"],
                "properties": {
                    "x0": {"type": "number", "minimum": 0},
                    "y0": {"type": "number", "exclusiveMinimum": 0},
                    "alpha": {"type": "number", "exclusiveMinimum": 0},
                    "case": {"enum": list(CASES)},
                    "polygons": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["vertices", "vector"],
                            "properties": {
                                "vertices": {
                                    "type": "array",
                                    "minItems": 3,
                                    "items": {
                                        "type": "array",
                                        "items": {"type": "number"},
                                        "minItems": 2,
                                        "maxItems": 2,
                                    },
                                },
                                "vector": {
                                    "type": "array",
                                    "items": {"type": "number"},
                                    "minItems": 2,
                                    "maxItems": 2,
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}


class SurfaceValidationError(ValueError):
    """Raised with the full list of problems found in a surface description."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid surface spec:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class PolygonPiece:
    vertices: tuple[tuple[float, float], ...]
    vector: tuple[float, float]

    @property
    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


@dataclass(frozen=True)
class PieceSpec:
    x0: float
    y0: float
    alpha: float
    case: str
    polygons: tuple[PolygonPiece, ...]

    @property
    def slope_width(self) -> float:
        return 2 * self.alpha if self.case == "minus-I-minus-eigen" else self.alpha

    @property
    def cusp(self) -> tuple[float, float]:
        return (0.0, 1.0 / self.y0)

    def triangle(self) -> Polygon:
        top = (1.0 - self.x0) / self.y0
        return Polygon([(0.0, 1.0 / self.y0), (1.0, top - self.slope_width), (1.0, top)])


@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    cm: float
    pieces: tuple[PieceSpec, ...]

    def polygons(self):
        for piece in self.pieces:
            yield from piece.polygons

    def to_dict(self) -> dict:
        return {
            "schema": "surface/1",
            "name": self.name,
            "cm": self.cm,
            "pieces": [
                {
                    "x0": p.x0,
                    "y0": p.y0,
                    "alpha": p.alpha,
                    "case": p.case,
                    "polygons": [
                        {"vertices": [list(v) for v in poly.vertices], "vector": list(poly.vector)}
                        for poly in p.polygons
                    ],
                }
                for p in self.pieces
            ],
        }


def piece_return_time(vector, a, b):
    """``y/(a(ax + by))`` for the saddle connection vector ``(x, y)``."""
    x, y = vector
    if y <= 0:
        raise ValueError("return vector needs y > 0")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lin = a * x + b * y
    if np.any(a <= 0) or np.any(lin <= 0):
        raise ValueError("point outside the validity region of this return vector (need a > 0, ax + by > 0)")
    r = y / (a * lin)
    return float(r) if r.ndim == 0 else r


def _max_denominator(poly: PolygonPiece) -> float:
    # phi = a(ax + by) has an indefinite Hessian, so its maximum over a convex
    # polygon sits on the boundary: at a vertex or at an edge's critical point.
    x, y = poly.vector

    def phi(a, b):
        return a * (a * x + b * y)

    best = max(phi(a, b) for a, b in poly.vertices)
    for (a1, b1), (a2, b2) in poly.edges():
        da, db = a2 - a1, b2 - b1
        # phi(a1 + u da, b1 + u db) = A u^2 + B u + C
        A = da * (da * x + db * y)
        B = da * (a1 * x + b1 * y) + a1 * (da * x + db * y)
        if A < 0:
            u = -B / (2 * A)
            if 0 < u < 1:
                best = max(best, phi(a1 + u * da, b1 + u * db))
    # the only interior critical point of phi lies on a = 0
    return best


def min_return_time(spec: SurfaceSpec) -> float:
    """Infimum of the return time over all pieces: ``min y/M`` with ``M = max a(ax+by)``."""
    best = math.inf
    for poly in spec.polygons():
        if poly.polygon.area <= 0:
            raise SurfaceValidationError(["degenerate polygon with zero area"])
        M = _max_denominator(poly)
        if M <= 0:
            raise SurfaceValidationError([f"return time unbounded on polygon {poly.vertices}"])
        best = min(best, poly.vector[1] / M)
    return best


def _slice_bounds(poly: PolygonPiece, a: float) -> tuple[float, float]:
    lo, hi = math.inf, -math.inf
    for (a1, b1), (a2, b2) in poly.edges():
        if a1 == a2:
            if abs(a - a1) <= 1e-15:
                lo, hi = min(lo, b1, b2), max(hi, b1, b2)
            continue
        if min(a1, a2) - 1e-15 <= a <= max(a1, a2) + 1e-15:
            b = b1 + (b2 - b1) * (a - a1) / (a2 - a1)
            lo, hi = min(lo, b), max(hi, b)
    return lo, hi


def _polygon_cdf_area(poly: PolygonPiece, X: float) -> float:
    """Area of ``{R <= X}`` inside one polygon, integrated over vertical slices."""
    xv, yv = poly.vector
    k = xv / yv

    # R <= X  <=>  a(a xv + b yv) >= yv/X  <=>  b >= 1/(X a) - k a
    def level(a):
        return 1.0 / (X * a) - k * a

    def extent(a):
        lo, hi = _slice_bounds(poly, a)
        return max(0.0, hi - max(lo, level(a)))

    a_vals = [v[0] for v in poly.vertices]
    a_min, a_max = max(min(a_vals), 0.0), max(a_vals)
    breaks = set(a_vals)
    for (a1, b1), (a2, b2) in poly.edges():
        if a1 == a2:
            continue
        m = (b2 - b1) / (a2 - a1)
        # level(a) = b1 + m (a - a1)  <=>  (m + k) a^2 + (b1 - m a1) a - 1/X = 0
        roots = np.roots([m + k, b1 - m * a1, -1.0 / X])
        for r in roots:
            if abs(r.imag) < 1e-14 and min(a1, a2) < r.real < max(a1, a2):
                breaks.add(float(r.real))
    edges = sorted(e for e in breaks if a_min <= e <= a_max)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        # the level curve diverges at a = 0; the integrand vanishes there for finite X
        lo = max(lo, 1e-300)
        val, _ = integrate.quad(extent, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def surface_gap_cdf(spec: SurfaceSpec, x: float) -> float:
    """Normalized measure of ``{R <= x}``: the cumulative slope-gap distribution."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if math.isinf(x):
        return 1.0
    if x == 0:
        return 0.0
    return spec.cm * math.fsum(_polygon_cdf_area(p, x) for p in spec.polygons())


@dataclass(frozen=True)
class CompactnessReport:
    compact: bool
    margin: float
    empty: bool


def _singular_set(poly: PolygonPiece):
    # closure points where the return time blows up: a = 0 or ax + by = 0
    P = poly.polygon
    x, y = poly.vector
    big = 10.0 * (1.0 + max(abs(c) for v in poly.vertices for c in v))
    lines = [LineString([(0.0, -big), (0.0, big)])]
    # ax + by = 0 through the origin, direction (y, -x)
    n = math.hypot(x, y)
    lines.append(LineString([(-big * y / n, big * x / n), (big * y / n, -big * x / n)]))
    return P.intersection(MultiLineString(lines))


def compactness_check(spec: SurfaceSpec, c: float, d: float, resolution: int = 400) -> CompactnessReport:
    """Check that ``{c <= R <= d}`` stays a positive distance from every cusp.

    The margin is the smallest distance between sample points of the region
    (a ``resolution``-square grid plus polygon boundaries) and the closure
    points where the return time is infinite; it is a numerical estimate.
    """
    if not (0 <= c < d) or math.isinf(d):
        raise ValueError("need 0 <= c < d < inf")
    margin = math.inf
    empty = True
    for poly in spec.polygons():
        P = poly.polygon
        sing = _singular_set(poly)
        minx, miny, maxx, maxy = P.bounds
        ga, gb = np.meshgrid(np.linspace(minx, maxx, resolution), np.linspace(miny, maxy, resolution))
        pts_a, pts_b = ga.ravel(), gb.ravel()
        bnd = np.asarray(P.exterior.segmentize((maxx - minx) / resolution).coords)
        pts_a = np.concatenate([pts_a, bnd[:, 0]])
        pts_b = np.concatenate([pts_b, bnd[:, 1]])
        inside = shapely.covers(P, shapely.points(pts_a, pts_b))
        pts_a, pts_b = pts_a[inside], pts_b[inside]
        x, y = poly.vector
        den = pts_a * (pts_a * x + pts_b * y)
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(den > 0, y / den, np.inf)
        keep = (R >= c) & (R <= d)
        if not keep.any():
            continue
        empty = False
        if sing.is_empty:
            continue
        dist = shapely.distance(shapely.points(pts_a[keep], pts_b[keep]), sing)
        margin = min(margin, float(dist.min()))
    return CompactnessReport(compact=margin > 0, margin=margin, empty=empty)


def _is_convex(P: Polygon) -> bool:
    return abs(P.convex_hull.area - P.area) <= TOL * max(1.0, P.area)


def validate_surface(data) -> list[str]:
    """Every problem with a surface description, as readable messages (empty if valid)."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [
        f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
        for e in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    ]
    if errors:
        return errors

    total = 0.0
    for i, piece in enumerate(data["pieces"]):
        spec_piece = _piece_from_dict(piece)
        tri = spec_piece.triangle()
        tri_tol = tri.buffer(1e-9)
        polys = []
        for j, raw in enumerate(piece["polygons"]):
            where = f"pieces/{i}/polygons/{j}"
            pp = spec_piece.polygons[j]
            P = pp.polygon
            x, y = pp.vector
            if not all(math.isfinite(c) for v in pp.vertices for c in v):
                errors.append(f"{where}: non-finite vertex")
                continue
            if y <= 0:
                errors.append(f"{where}: return vector must have y > 0, got {y}")
            if not P.is_valid or P.area <= TOL:
                errors.append(f"{where}: degenerate or self-intersecting polygon")
                continue
            if not _is_convex(P):
                errors.append(f"{where}: polygon is not convex")
            if not tri_tol.covers(P):
                errors.append(f"{where}: polygon leaves the piece triangle")
            if y > 0 and any(a * x + b * y < -TOL for a, b in pp.vertices):
                errors.append(f"{where}: ax + by < 0 on the polygon, return time undefined")
            polys.append((j, P))
        for u in range(len(polys)):
            for v in range(u + 1, len(polys)):
                overlap = polys[u][1].intersection(polys[v][1]).area
                if overlap > TOL:
                    errors.append(
                        f"pieces/{i}: polygons {polys[u][0]} and {polys[v][0]} overlap (area {overlap:.3g})"
                    )
        covered = sum(P.area for _, P in polys)
        if abs(covered - tri.area) > TOL:
            errors.append(f"pieces/{i}: polygons cover area {covered!r}, triangle has {tri.area!r}")
        total += covered
    mass = data["cm"] * total
    if abs(mass - 1.0) > TOL:
        errors.append(f"cm * total area = {mass!r}, expected 1")
    return errors


def _piece_from_dict(piece) -> PieceSpec:
    return PieceSpec(
        x0=float(piece["x0"]),
        y0=float(piece["y0"]),
        alpha=float(piece["alpha"]),
        case=piece["case"],
        polygons=tuple(
            PolygonPiece(
                vertices=tuple((float(a), float(b)) for a, b in poly["vertices"]),
                vector=(float(poly["vector"][0]), float(poly["vector"][1])),
            )
            for poly in piece["polygons"]
        ),
    )


def surface_from_dict(data) -> SurfaceSpec:
    errors = validate_surface(data)
    if errors:
        raise SurfaceValidationError(errors)
    return SurfaceSpec(
        name=data["name"],
        cm=float(data["cm"]),
        pieces=tuple(_piece_from_dict(p) for p in data["pieces"]),
    )


def load_surface(path) -> SurfaceSpec:
    """Load and validate a surface; ``"torus"`` gives the built-in square torus."""
    if str(path) == "torus":
        return torus_spec()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SurfaceValidationError([f"not valid JSON: {exc}"]) from exc
    return surface_from_dict(data)


TORUS = {
    "schema": "surface/1",
    "name": "square torus",
    "cm": 2.0,
    "pieces": [
        {
            "x0": 0.0,
            "y0": 1.0,
            "alpha": 1.0,
            "case": "minus-I-plus-eigen",
            "polygons": [{"vertices": [[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], "vector": [0.0, 1.0]}],
        }
    ],
}


def torus_spec() -> SurfaceSpec:
    return surface_from_dict(TORUS)
