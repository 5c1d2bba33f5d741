"""Exact Markov field of unit smoothness exponent on a metric graph.

The global field is built from independent per-edge fields with Neumann
boundary conditions, conditioned on being continuous at the vertices. On an
edge with constant parameters (kappa, a) the Neumann covariance is the
Green's function of tau^2 (kappa^2 - a d^2/dx^2) with zero endpoint
derivatives; writing kt = kappa / sqrt(a),

    N(s, t) = cosh(kt min) cosh(kt (L - max)) / (tau^2 kappa sqrt(a) sinh(kt L)).

Conditioning on continuity is a Schur complement on the 2|E|-dimensional
vector of edge endpoint values; interiors follow from the edge
representation u(t) = bridge(t) + G1(t) u(0) + G2(t) u(L), where G1, G2
span the homogeneous solutions of the edge operator with unit boundary
data and the bridge is the zero-boundary remainder, independent of all
endpoint values and of the other edges.

All formulas are overflow-safe for kt * L far beyond the ~700 range where
raw cosh/sinh overflow in double precision.

Loops and multiple edges are supported by the same continuity-kernel
conditioning: a loop contributes one constraint tying its two endpoint
values together, and a loop of length L reproduces the circle field of
length L exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    ConditioningError,
    MeshResolutionError,
    PointError,
    UnsupportedAlphaError,
    ValidationError,
)
from .graph import Edge, MetricGraph, PointOnGraph
from .models import CovMatrix, FieldModel
from .sampling import replicate_normals, safe_cholesky

__all__ = [
    "neumann_edge_cov",
    "EdgeBasis",
    "edge_basis",
    "bridge_cov",
    "continuity_constraints",
    "endpoint_prior_cov",
    "condition_on_constraints",
    "vertex_field_cov",
    "full_cov",
    "sample",
    "markov_check",
    "kirchhoff_residual",
]


def neumann_edge_cov(kappa: float, a: float, tau: float, ell: float, s, t):
    """Covariance of the Neumann edge field at arclengths s, t in [0, ell].

    Broadcasts over array-valued s, t. In the interior of a long edge
    (kt * ell >> 1) this approaches the stationary exponential covariance
    exp(-kt |s - t|) / (2 tau^2 kappa sqrt(a)).
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(s > ell) or np.any(t < 0) or np.any(t > ell):
        raise PointError(f"arclength outside [0, {ell}]")
    kt = kappa / np.sqrt(a)
    m = np.minimum(s, t)
    M = np.maximum(s, t)
    num = (
        np.exp(-kt * (M - m))
        + np.exp(-kt * (M + m))
        + np.exp(-kt * (2.0 * ell - M - m))
        + np.exp(-kt * (2.0 * ell - M + m))
    )
    den = 2.0 * tau**2 * kappa * np.sqrt(a) * (1.0 - np.exp(-2.0 * kt * ell))
    out = num / den
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EdgeBasis:
    """Homogeneous solutions G1, G2 of the edge operator with unit boundary data.

    G1(0) = 1, G1(L) = 0 and G2(0) = 0, G2(L) = 1; both solve
    a G'' = kappa^2 G on (0, L). Stored in the shifted-exponential form
    G1(x) = (e^{-kt x} - e^{-kt (2L - x)}) / (1 - e^{-2 kt L}), which never
    overflows however large kt * L gets.
    """

    kappa: float
    a: float
    length: float

    @property
    def kt(self) -> float:
        return self.kappa / np.sqrt(self.a)

    def matrix(self, x) -> np.ndarray:
        """Stack [G1(x), G2(x)] along the last axis; shape x.shape + (2,)."""
        x = np.asarray(x, dtype=float)
        kt, ell = self.kt, self.length
        den = 1.0 - np.exp(-2.0 * kt * ell)
        g1 = (np.exp(-kt * x) - np.exp(-kt * (2.0 * ell - x))) / den
        g2 = (np.exp(-kt * (ell - x)) - np.exp(-kt * (ell + x))) / den
        return np.stack([g1, g2], axis=-1)

    def __call__(self, x) -> np.ndarray:
        return self.matrix(x)


def edge_basis(m: FieldModel, e: Edge) -> EdgeBasis:
    """Boundary-data basis of the edge representation; needs alpha = 1."""
    _require_alpha_one(m)
    kappa, a = m.edge_params(e)
    return EdgeBasis(kappa=kappa, a=a, length=e.length)


def _require_alpha_one(m: FieldModel) -> None:
    if m.alpha != 1.0:
        raise UnsupportedAlphaError(
            f"exact construction requires alpha = 1, got {m.alpha}; "
            "use the spectral module for other exponents"
        )


def _edge_boundary_block(kappa, a, tau, ell) -> np.ndarray:
    n00 = neumann_edge_cov(kappa, a, tau, ell, 0.0, 0.0)
    n01 = neumann_edge_cov(kappa, a, tau, ell, 0.0, ell)
    n11 = neumann_edge_cov(kappa, a, tau, ell, ell, ell)
    return np.array([[n00, n01], [n01, n11]])


def _bridge_block(kappa, a, tau, ell, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Zero-boundary bridge covariance matrix over row points s, column points t."""
    basis = EdgeBasis(kappa=kappa, a=a, length=ell)
    block = neumann_edge_cov(kappa, a, tau, ell, s[:, None], t[None, :])
    block -= basis.matrix(s) @ _edge_boundary_block(kappa, a, tau, ell) @ basis.matrix(t).T
    # the bridge is exactly zero at the endpoints, not just to rounding
    ends_s = (s == 0.0) | (s == ell)
    ends_t = (t == 0.0) | (t == ell)
    block[ends_s, :] = 0.0
    block[:, ends_t] = 0.0
    return block


def bridge_cov(m: FieldModel, e: Edge, s, t):
    """Covariance of the zero-boundary edge bridge at arclengths s, t.

    Equals the Neumann covariance conditioned on zero values at both
    endpoints; vanishes identically when s or t is an endpoint. Broadcasts
    elementwise over arrays.
    """
    _require_alpha_one(m)
    kappa, a = m.edge_params(e)
    ell = e.length
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    basis = EdgeBasis(kappa=kappa, a=a, length=ell)
    out = neumann_edge_cov(kappa, a, m.tau, ell, s, t) - np.einsum(
        "...i,ij,...j->...",
        basis.matrix(s),
        _edge_boundary_block(kappa, a, m.tau, ell),
        basis.matrix(t),
    )
    at_end = (s == 0.0) | (s == ell) | (t == 0.0) | (t == ell)
    out = np.where(at_end, 0.0, out)
    return float(out) if out.ndim == 0 else out


def continuity_constraints(g: MetricGraph) -> np.ndarray:
    """Difference rows forcing all endpoint values at each vertex to agree.

    Endpoint coordinates are ordered (edge order, then t=0 end before
    t=length end): coordinates 2j and 2j+1 for edge j. For every vertex the
    incident endpoints are chained consecutively, giving degree(v) - 1 rows;
    a loop ties its own two endpoints together.
    """
    ne = g.edge_count
    rows = []
    for v in range(g.vertex_count):
        coords = [2 * j + end for j, end in g.incident(v)]
        for c1, c2 in zip(coords, coords[1:]):
            row = np.zeros(2 * ne)
            row[c1] = 1.0
            row[c2] = -1.0
            rows.append(row)
    if not rows:
        return np.zeros((0, 2 * ne))
    return np.vstack(rows)


def endpoint_prior_cov(g: MetricGraph, m: FieldModel) -> np.ndarray:
    """Block-diagonal covariance of all edge endpoint values before conditioning.

    Edges are independent Neumann fields, so the 2|E| x 2|E| matrix has one
    2x2 block per edge and zeros elsewhere.
    """
    _require_alpha_one(m)
    ne = g.edge_count
    sigma = np.zeros((2 * ne, 2 * ne))
    for j, e in enumerate(g.edges):
        kappa, a = m.edge_params(e)
        sigma[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = _edge_boundary_block(
            kappa, a, m.tau, e.length
        )
    return sigma


def condition_on_constraints(
    sigma: np.ndarray, constraints: np.ndarray, rcond: float = 1e-12
) -> np.ndarray:
    """Covariance of a Gaussian vector conditioned on K x = 0.

    Returns sigma - sigma K' (K sigma K')^+ K sigma, where the inverse drops
    eigenvalues below ``rcond`` times the largest (redundant constraint rows
    are fine). Raises ConditioningError when the constraint Gram matrix is
    entirely degenerate, which signals bad input.
    """
    K = np.asarray(constraints, dtype=float)
    if K.shape[0] == 0:
        return np.array(sigma, dtype=float)
    ks = K @ sigma
    gram = ks @ K.T
    gram = 0.5 * (gram + gram.T)
    vals, vecs = np.linalg.eigh(gram)
    if not np.all(np.isfinite(vals)) or vals[-1] <= 0.0:
        raise ConditioningError("constraint Gram matrix is singular")
    keep = vals > rcond * vals[-1]
    inv = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T
    out = sigma - ks.T @ inv @ ks
    return 0.5 * (out + out.T)


@lru_cache(maxsize=None)
def _vertex_cov(g: MetricGraph, m: FieldModel):
    """Conditioned vertex covariance and the endpoint -> vertex index map."""
    sigma = endpoint_prior_cov(g, m)
    conditioned = condition_on_constraints(sigma, continuity_constraints(g))
    reps = np.full(g.vertex_count, -1, dtype=int)
    end_vertex = np.empty(2 * g.edge_count, dtype=int)
    for j, e in enumerate(g.edges):
        end_vertex[2 * j] = e.u
        end_vertex[2 * j + 1] = e.v
        for coord, v in ((2 * j, e.u), (2 * j + 1, e.v)):
            if reps[v] < 0:
                reps[v] = coord
    sv = conditioned[np.ix_(reps, reps)]
    sv = 0.5 * (sv + sv.T)
    sv.flags.writeable = False
    end_vertex.flags.writeable = False
    return sv, end_vertex


def vertex_field_cov(g: MetricGraph, m: FieldModel) -> CovMatrix:
    """Exact covariance of the field's (deduplicated) vertex values.

    One representative endpoint per vertex is kept after conditioning the
    block-diagonal endpoint covariance on the continuity constraints; all
    endpoints at a vertex carry the same conditioned value.
    """
    sv, _ = _vertex_cov(g, m)
    points = tuple(g.vertex_point(v) for v in range(g.vertex_count))
    return CovMatrix(
        sv.copy(), points, "exact", info={"vertices": tuple(range(g.vertex_count))}
    )


def _conditioned_endpoint_cov(
    g: MetricGraph, m: FieldModel, constraints: np.ndarray | None
) -> np.ndarray:
    if constraints is None:
        sv, end_vertex = _vertex_cov(g, m)
        # every endpoint equals its vertex value exactly after conditioning
        return sv[np.ix_(end_vertex, end_vertex)]
    sigma = endpoint_prior_cov(g, m)
    return condition_on_constraints(sigma, constraints)


def full_cov(
    g: MetricGraph,
    m: FieldModel,
    pts: Sequence[PointOnGraph],
    constraints: np.ndarray | None = None,
) -> CovMatrix:
    """Exact covariance matrix of the alpha = 1 field at arbitrary points.

    Same-edge pairs combine the zero-boundary bridge with the boundary
    term G(s)' Cov(endpoints) G(t); cross-edge pairs only carry the
    boundary term, with endpoint covariances taken from the continuity
    conditioning. ``constraints`` overrides the default constraint matrix
    (any matrix with the same kernel yields the same covariance).
    """
    _require_alpha_one(m)
    pts = [g.point(p.edge, p.t) for p in pts]
    cond = _conditioned_endpoint_cov(g, m, constraints)
    n = len(pts)
    C = np.zeros((n, n))

    groups: dict[int, list[int]] = {}
    for i, p in enumerate(pts):
        groups.setdefault(g.edge_index(p.edge), []).append(i)

    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for j, idx in groups.items():
        e = g.edges[j]
        kappa, a = m.edge_params(e)
        t = np.array([pts[i].t for i in idx])
        cache[j] = (t, EdgeBasis(kappa, a, e.length).matrix(t))

    edge_ids = sorted(groups)
    for ja in edge_ids:
        ia = groups[ja]
        ta, ga = cache[ja]
        ea = g.edges[ja]
        for jb in edge_ids:
            if jb < ja:
                continue
            ib = groups[jb]
            tb, gb = cache[jb]
            block = ga @ cond[2 * ja : 2 * ja + 2, 2 * jb : 2 * jb + 2] @ gb.T
            if ja == jb:
                kappa, a = m.edge_params(ea)
                block = block + _bridge_block(kappa, a, m.tau, ea.length, ta, tb)
            C[np.ix_(ia, ib)] = block
            if jb > ja:
                C[np.ix_(ib, ia)] = block.T
    C = 0.5 * (C + C.T)
    return CovMatrix(C, tuple(pts), "exact")


def sample(
    g: MetricGraph,
    m: FieldModel,
    pts: Sequence[PointOnGraph],
    n: int,
    seed: int,
) -> np.ndarray:
    """n zero-mean draws of the exact field at the points, (n, len(pts)).

    Deterministic in ``seed``; replicate r is generated from substream
    (seed, r), so prefixes of a larger run coincide with a smaller run.
    """
    if n < 0:
        raise ValidationError(f"replicate count must be >= 0, got {n}")
    cov = full_cov(g, m, pts)
    if n == 0:
        return np.empty((0, len(cov.points)))
    chol, _ = safe_cholesky(cov.matrix)
    return replicate_normals(seed, n, len(cov.points)) @ chol.T


def markov_check(cov, set_a, set_b, set_s) -> float:
    """Largest conditional covariance between index sets A and B given S.

    Computes max |C_AB - C_AS C_SS^{-1} C_SB|; zero (to rounding) certifies
    conditional independence of A and B given S. The three index sets must
    be disjoint, and S must carry every separating boundary value for the
    certificate to be meaningful.
    """
    mat = cov.matrix if isinstance(cov, CovMatrix) else np.asarray(cov, dtype=float)
    a = list(set_a)
    b = list(set_b)
    s = list(set_s)
    if set(a) & set(b) or set(a) & set(s) or set(b) & set(s):
        raise ValidationError("index sets A, B, S must be disjoint")
    if not a or not b or not s:
        raise ValidationError("index sets A, B, S must be non-empty")
    try:
        css_inv_csb = np.linalg.solve(mat[np.ix_(s, s)], mat[np.ix_(s, b)])
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"separator covariance is singular: {exc}") from None
    resid = mat[np.ix_(a, b)] - mat[np.ix_(a, s)] @ css_inv_csb
    return float(np.max(np.abs(resid)))


def kirchhoff_residual(
    g: MetricGraph,
    m: FieldModel,
    cov: CovMatrix,
    vertex: int,
    probe: PointOnGraph,
) -> float:
    """Flux residual of a covariance column at a vertex.

    Estimates | sum over incident edges of a_e * (outward derivative of
    rho(., probe) at the vertex) | with one-sided second-order differences
    on the covariance mesh; decays like the squared mesh spacing for the
    exact field. The conductivity weight a_e makes this the natural vertex
    condition of the operator; with uniform a it reduces to the plain
    derivative sum (and at a degree-2 vertex, to derivative continuity).
    """
    probe = g.point(probe.edge, probe.t)
    if g.vertex_of(probe) == vertex:
        raise PointError("probe point must differ from the vertex under test")

    per_edge: dict[str, list[tuple[float, int]]] = {}
    vertex_col: dict[int, int] = {}
    col = None
    for i, p in enumerate(cov.points):
        per_edge.setdefault(p.edge, []).append((p.t, i))
        v = g.vertex_of(p)
        if v is not None:
            vertex_col.setdefault(v, i)
        if p.edge == probe.edge and abs(p.t - probe.t) <= 1e-12 * max(1.0, probe.t):
            col = i
    if col is None:
        raise PointError("probe point is not among the covariance points")
    if vertex not in vertex_col:
        raise MeshResolutionError(
            f"covariance mesh has no node at vertex {vertex}"
        )

    total = 0.0
    for j, end in g.incident(vertex):
        e = g.edges[j]
        t0 = 0.0 if end == 0 else e.length
        # interior stencil nodes live on this edge; the vertex node itself
        # may be addressed through any incident edge (deduplicated meshes)
        inward = sorted(
            (abs(t - t0), t, i)
            for t, i in per_edge.get(e.id, [])
            if abs(t - t0) > 1e-12 * max(1.0, e.length)
        )[:2]
        if len(inward) < 2:
            raise MeshResolutionError(
                f"need >= 2 interior mesh nodes on edge {e.id!r} near the vertex"
            )
        (d1, _, i1), (d2, _, i2) = inward
        delta = d1
        if abs(d2 - 2.0 * delta) > 1e-8 * delta:
            raise MeshResolutionError(
                f"stencil on edge {e.id!r} is not uniformly spaced"
            )
        f0 = cov.matrix[vertex_col[vertex], col]
        f1 = cov.matrix[i1, col]
        f2 = cov.matrix[i2, col]
        deriv = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * delta)
        total += m.a_on(e.id) * deriv
    return abs(total)
