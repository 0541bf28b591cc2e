"""Local-chart Riemannian tensor calculus in dimensions 2 and 4.

Everything is computed from a metric *jet*: the metric components together
with their exact first and second coordinate derivatives at a chart point.
Index conventions (fixed once, see CONVENTIONS.md):

    dg[..., c, a, b]      = d_c g_ab
    ddg[..., c, d, a, b]  = d_c d_d g_ab
    Gamma[..., a, b, c]   = G^a_bc  (Levi-Civita, symmetric in b, c)
    riem[..., a, b, c, d] = R^a_bcd = d_c G^a_db - d_d G^a_cb
                            + G^a_ce G^e_db - G^a_de G^e_cb
    ric[..., b, d]        = R^a_bad
    s                     = g^bd ric_bd
    laplacian f           = -g^ab (d_a d_b f - G^c_ab d_c f)

The Laplacian sign makes the operator positive (spectrum >= 0 on compact
charts), so a round 2-sphere has positive scalar curvature and the Darboux
surface dt^2/W + W dth^2 has s = -W''(t).

All functions accept arbitrary leading batch axes; tensor indices occupy the
trailing axes.  Operations are pure and never mutate their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets as j2
from .errors import DomainBoundary, SingularMetric

__all__ = [
    "ChartPoint",
    "Grid",
    "ChartDomain",
    "MetricJet",
    "CurvatureBundle",
    "MetricOracle",
    "FlatOracle",
    "CallableMetricOracle",
    "ProductMetricOracle",
    "ConformalOracle",
    "ScalarField",
    "CallableScalarField",
    "CoordinateScalarField",
    "VectorField",
    "CallableVectorField",
    "Sym2Field",
    "FDSym2Field",
    "christoffel",
    "christoffel_with_derivative",
    "curvature",
    "curvature_from_jet",
    "divergence_sym2",
    "divergence_sym2_from_arrays",
    "gradient",
    "hessian",
    "laplacian",
    "killing_residual",
    "inverse_metric",
    "norm_sym2",
    "norm_covector",
    "fd_first_derivatives",
    "fd_metric_jet",
]

# Relative finite-difference step (fraction of per-coordinate extent) and a
# single Richardson level; used only for cross-checks and quantities that
# depend on third metric derivatives.
FD_STEP_FRACTION = 1e-4


@dataclass(frozen=True)
class ChartPoint:
    """A point of a coordinate chart; product charts order coords (t, th, u, th2)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        if not all(np.isfinite(self.coords)):
            raise ValueError("chart point coordinates must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class Grid:
    """Flattened evaluation grid with its index layout (for slice comparisons)."""

    points: np.ndarray  # (N, 4)
    shape: tuple[int, ...]
    index: np.ndarray   # (N, 4) integer multi-index of each point

    def axis_mask(self, axis: int, value: int) -> np.ndarray:
        return self.index[:, axis] == value


@dataclass(frozen=True)
class ChartDomain:
    """Coordinate rectangle of a chart; ``None`` bounds mark 2 pi angles.

    ``margins`` give the strip near each bounded end that evaluation grids
    must avoid (pole closure is certified analytically, not by on-pole
    evaluation); angles carry no margin.
    """

    bounds: tuple  # per coordinate: (lo, hi) or None for a (0, 2 pi] angle
    margins: tuple

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def extents(self) -> tuple[float, ...]:
        return tuple(
            (b[1] - b[0]) if b is not None else 2.0 * np.pi for b in self.bounds
        )

    @property
    def fd_bounds(self) -> tuple:
        """Bounds enforced on finite-difference stencils (angles unrestricted)."""
        return self.bounds

    def grid(self, counts: Sequence[int]) -> Grid:
        axes = []
        for c, (bound, n) in enumerate(zip(self.bounds, counts)):
            if n < 1:
                raise ValueError("grid counts must be positive")
            if bound is None:
                axes.append(2.0 * np.pi * (np.arange(n) + 1.0) / n)
            else:
                lo, hi = bound[0] + self.margins[c], bound[1] - self.margins[c]
                axes.append(np.linspace(lo, hi, n))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        idx_mesh = np.meshgrid(*[np.arange(n) for n in counts], indexing="ij")
        idx = np.stack([m.reshape(-1) for m in idx_mesh], axis=-1)
        return Grid(points=pts, shape=tuple(counts), index=idx)

    def sample_interior(self, rng: np.random.Generator, n: int, pad: float = 0.02) -> np.ndarray:
        """Random points comfortably inside the rectangle (pad is relative)."""
        cols = []
        for c, bound in enumerate(self.bounds):
            if bound is None:
                cols.append(rng.uniform(0.0, 2.0 * np.pi, size=n))
            else:
                lo, hi = bound
                w = hi - lo
                m = max(self.margins[c], pad * w)
                cols.append(rng.uniform(lo + m, hi - m, size=n))
        return np.stack(cols, axis=-1)


def _as_points(p) -> np.ndarray:
    if isinstance(p, ChartPoint):
        return p.array
    return np.asarray(p, dtype=float)


class MetricJet:
    """Metric components with exact first and second coordinate derivatives."""

    __slots__ = ("g", "dg", "ddg", "_ginv")

    def __init__(self, g: np.ndarray, dg: np.ndarray, ddg: np.ndarray):
        self.g = np.asarray(g, dtype=float)
        self.dg = np.asarray(dg, dtype=float)
        self.ddg = np.asarray(ddg, dtype=float)
        self._ginv = None

    @property
    def dim(self) -> int:
        return self.g.shape[-1]

    @property
    def ginv(self) -> np.ndarray:
        if self._ginv is None:
            self._ginv = inverse_metric(self.g)
        return self._ginv

    def symmetrized(self) -> "MetricJet":
        """Enforce the structural symmetries (metric and derivative indices)."""
        g = 0.5 * (self.g + np.swapaxes(self.g, -1, -2))
        dg = 0.5 * (self.dg + np.swapaxes(self.dg, -1, -2))
        ddg = 0.5 * (self.ddg + np.swapaxes(self.ddg, -1, -2))
        ddg = 0.5 * (ddg + np.swapaxes(ddg, -4, -3))
        return MetricJet(g, dg, ddg)


def inverse_metric(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if not np.all(np.isfinite(det)) or np.any(det <= 0.0):
        raise SingularMetric("metric determinant is non-positive or non-finite")
    return np.linalg.inv(g)


@dataclass
class CurvatureBundle:
    """Connection and curvature of one metric jet (possibly batched)."""

    gamma: np.ndarray      # G^a_bc
    dgamma: np.ndarray     # d_e G^a_bc
    riem: np.ndarray       # R^a_bcd
    riem_low: np.ndarray   # R_abcd = g_ae R^e_bcd
    ric: np.ndarray        # r_bd
    ric0: np.ndarray       # trace-free part of r
    s: np.ndarray          # scalar curvature
    jet: MetricJet


def christoffel(jet: MetricJet) -> np.ndarray:
    """Levi-Civita connection G^a_bc = 1/2 g^ad (d_b g_dc + d_c g_bd - d_d g_bc)."""
    dg = jet.dg
    t = (
        np.einsum("...bdc->...dbc", dg)
        + np.einsum("...cbd->...dbc", dg)
        - dg
    )
    return 0.5 * np.einsum("...ad,...dbc->...abc", jet.ginv, t)


def christoffel_with_derivative(jet: MetricJet) -> tuple[np.ndarray, np.ndarray]:
    """Connection and its coordinate derivative d_e G^a_bc from a 2-jet."""
    ginv, dg, ddg = jet.ginv, jet.dg, jet.ddg
    t = (
        np.einsum("...bdc->...dbc", dg)
        + np.einsum("...cbd->...dbc", dg)
        - dg
    )
    gamma = 0.5 * np.einsum("...ad,...dbc->...abc", ginv, t)
    dginv = -np.einsum("...am,...emn,...nd->...ead", ginv, dg, ginv)
    dt = (
        np.einsum("...ebdc->...edbc", ddg)
        + np.einsum("...ecbd->...edbc", ddg)
        - ddg
    )
    dgamma = 0.5 * (
        np.einsum("...ead,...dbc->...eabc", dginv, t)
        + np.einsum("...ad,...edbc->...eabc", ginv, dt)
    )
    return gamma, dgamma


def curvature_from_jet(jet: MetricJet) -> CurvatureBundle:
    gamma, dgamma = christoffel_with_derivative(jet)
    riem = (
        np.einsum("...cadb->...abcd", dgamma)
        - np.einsum("...dacb->...abcd", dgamma)
        + np.einsum("...ace,...edb->...abcd", gamma, gamma)
        - np.einsum("...ade,...ecb->...abcd", gamma, gamma)
    )
    riem_low = np.einsum("...ae,...ebcd->...abcd", jet.g, riem)
    ric = np.einsum("...abad->...bd", riem)
    s = np.einsum("...bd,...bd->...", jet.ginv, ric)
    n = jet.dim
    ric0 = ric - (s / n)[..., None, None] * jet.g
    return CurvatureBundle(gamma, dgamma, riem, riem_low, ric, ric0, s, jet)


class MetricOracle:
    """Supplier of metric jets at chart points.

    Subclasses implement :meth:`jet`.  ``metric`` defaults to the jet's value
    slot; closed-form oracles may override it with a cheaper path.
    """

    dim: int = 4

    def jet(self, points) -> MetricJet:
        raise NotImplementedError

    def metric(self, points) -> np.ndarray:
        return self.jet(points).g


class FlatOracle(MetricOracle):
    def __init__(self, dim: int = 4):
        self.dim = dim

    def jet(self, points) -> MetricJet:
        pts = _as_points(points)
        batch = pts.shape[:-1]
        n = self.dim
        g = np.broadcast_to(np.eye(n), batch + (n, n)).copy()
        return MetricJet(g, np.zeros(batch + (n,) * 3), np.zeros(batch + (n,) * 4))


class CallableMetricOracle(MetricOracle):
    """Metric given as a formula; derivatives by second-order dual numbers.

    ``fn`` receives a list of ``dim`` seeded :class:`~emverify.jets.Jet2`
    coordinates and returns a ``dim x dim`` nested sequence whose entries are
    Jet2 values or plain constants.
    """

    def __init__(self, fn: Callable, dim: int = 4):
        self.fn = fn
        self.dim = dim

    def jet(self, points) -> MetricJet:
        pts = _as_points(points)
        batch = pts.shape[:-1]
        n = self.dim
        rows = self.fn(j2.seed(pts))
        g = np.zeros(batch + (n, n))
        dg = np.zeros(batch + (n, n, n))
        ddg = np.zeros(batch + (n, n, n, n))
        for a in range(n):
            for b in range(n):
                e = rows[a][b]
                if isinstance(e, j2.Jet2):
                    g[..., a, b] = e.v
                    dg[..., :, a, b] = e.g
                    ddg[..., :, :, a, b] = e.h
                else:
                    g[..., a, b] = e
        return MetricJet(g, dg, ddg)


class ProductMetricOracle(MetricOracle):
    """Block-diagonal product of two surface metrics.

    A dedicated constructor (not a generic tensor product) so the block
    structure is exact: factor one owns coordinates (0, 1), factor two owns
    (2, 3), and every cross-block jet entry is exactly zero.
    """

    def __init__(self, factor1: MetricOracle, factor2: MetricOracle):
        if factor1.dim != 2 or factor2.dim != 2:
            raise ValueError("product assembly expects two surface oracles")
        self.factor1 = factor1
        self.factor2 = factor2
        self.dim = 4

    def jet(self, points) -> MetricJet:
        pts = _as_points(points)
        batch = pts.shape[:-1]
        j1 = self.factor1.jet(pts[..., 0:2])
        j2_ = self.factor2.jet(pts[..., 2:4])
        g = np.zeros(batch + (4, 4))
        dg = np.zeros(batch + (4, 4, 4))
        ddg = np.zeros(batch + (4, 4, 4, 4))
        g[..., 0:2, 0:2] = j1.g
        g[..., 2:4, 2:4] = j2_.g
        dg[..., 0:2, 0:2, 0:2] = j1.dg
        dg[..., 2:4, 2:4, 2:4] = j2_.dg
        ddg[..., 0:2, 0:2, 0:2, 0:2] = j1.ddg
        ddg[..., 2:4, 2:4, 2:4, 2:4] = j2_.ddg
        return MetricJet(g, dg, ddg)


class ConformalOracle(MetricOracle):
    """Jets of h = f**-2 g from the jets of g and a positive scalar field f."""

    def __init__(self, base: MetricOracle, potential: "ScalarField"):
        self.base = base
        self.potential = potential
        self.dim = base.dim

    def jet(self, points) -> MetricJet:
        gj = self.base.jet(points)
        f, df, ddf = self.potential.jet(points)
        w = f**-2.0
        dw = -2.0 * f[..., None] ** -3.0 * df
        ddw = (
            6.0 * f[..., None, None] ** -4.0 * df[..., :, None] * df[..., None, :]
            - 2.0 * f[..., None, None] ** -3.0 * ddf
        )
        g = w[..., None, None] * gj.g
        dg = (
            dw[..., :, None, None] * gj.g[..., None, :, :]
            + w[..., None, None, None] * gj.dg
        )
        ddg = (
            ddw[..., :, :, None, None] * gj.g[..., None, None, :, :]
            + dw[..., :, None, None, None] * gj.dg[..., None, :, :, :]
            + dw[..., None, :, None, None] * gj.dg[..., :, None, :, :]
            + w[..., None, None, None, None] * gj.ddg
        )
        return MetricJet(g, dg, ddg)


def curvature(oracle: MetricOracle, p) -> CurvatureBundle:
    """Full curvature bundle of the oracle's metric at p (or a batch)."""
    return curvature_from_jet(oracle.jet(p))


# ---------------------------------------------------------------------------
# Fields over a chart


class ScalarField:
    def value(self, points) -> np.ndarray:
        raise NotImplementedError

    def jet(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (f, df, ddf) with df[...,c] = d_c f, ddf[...,c,d] = d_c d_d f."""
        raise NotImplementedError


class CallableScalarField(ScalarField):
    """Scalar formula evaluated on dual numbers for exact 2-jets."""

    def __init__(self, fn: Callable, dim: int = 4):
        self.fn = fn
        self.dim = dim

    def value(self, points):
        return np.asarray(self.fn(j2.seed(_as_points(points))).v)

    def jet(self, points):
        out = self.fn(j2.seed(_as_points(points)))
        if not isinstance(out, j2.Jet2):
            out = j2.constant(out, self.dim, _as_points(points).shape[:-1])
        return out.v, out.g, out.h


class CoordinateScalarField(ScalarField):
    """The field f(x) = x[index]; trivial exact jets."""

    def __init__(self, index: int, dim: int = 4):
        self.index = index
        self.dim = dim

    def value(self, points):
        return _as_points(points)[..., self.index]

    def jet(self, points):
        pts = _as_points(points)
        batch = pts.shape[:-1]
        df = np.zeros(batch + (self.dim,))
        df[..., self.index] = 1.0
        return pts[..., self.index], df, np.zeros(batch + (self.dim, self.dim))


class VectorField:
    def value(self, points) -> np.ndarray:
        raise NotImplementedError

    def jet(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, dX) with dX[...,c,a] = d_c X^a."""
        raise NotImplementedError


class CallableVectorField(VectorField):
    def __init__(self, fn: Callable, dim: int = 4):
        self.fn = fn
        self.dim = dim

    def value(self, points):
        comps = self.fn(j2.seed(_as_points(points)))
        return np.stack(
            [c.v if isinstance(c, j2.Jet2) else np.broadcast_to(float(c), _as_points(points).shape[:-1]) for c in comps],
            axis=-1,
        )

    def jet(self, points):
        pts = _as_points(points)
        batch = pts.shape[:-1]
        comps = self.fn(j2.seed(pts))
        x = np.zeros(batch + (self.dim,))
        dx = np.zeros(batch + (self.dim, self.dim))
        for a, c in enumerate(comps):
            if isinstance(c, j2.Jet2):
                x[..., a] = c.v
                dx[..., :, a] = c.g
            else:
                x[..., a] = c
        return x, dx


class Sym2Field:
    def value(self, points) -> np.ndarray:
        raise NotImplementedError

    def jet(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Return (S, dS) with dS[...,c,a,b] = d_c S_ab."""
        raise NotImplementedError


class FDSym2Field(Sym2Field):
    """Symmetric 2-tensor field with Richardson finite-difference jets.

    Used for curvature-derived fields (e.g. the trace-free Ricci tensor as a
    field), whose exact jets would need third metric derivatives.
    """

    def __init__(self, fn: Callable, extents: Sequence[float], bounds=None):
        self.fn = fn
        self.extents = np.asarray(extents, dtype=float)
        self.bounds = bounds

    def value(self, points):
        return self.fn(_as_points(points))

    def jet(self, points):
        pts = _as_points(points)
        ds = fd_first_derivatives(self.fn, pts, self.extents, self.bounds)
        return self.fn(pts), ds


# ---------------------------------------------------------------------------
# Derived operators


def gradient(df: np.ndarray, jet: MetricJet) -> np.ndarray:
    """Raise the differential: grad^a = g^ab d_b f."""
    return np.einsum("...ab,...b->...a", jet.ginv, df)


def hessian(df: np.ndarray, ddf: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Covariant Hessian (nabla df)_ab = d_a d_b f - G^c_ab d_c f."""
    return ddf - np.einsum("...cab,...c->...ab", gamma, df)


def laplacian(f: ScalarField, oracle: MetricOracle, p) -> np.ndarray:
    """Positive Laplacian -g^ab (Hess f)_ab (so s = lap log W on surfaces)."""
    jet = oracle.jet(p)
    _, df, ddf = f.jet(p)
    gamma = christoffel(jet)
    hess = hessian(df, ddf, gamma)
    return -np.einsum("...ab,...ab->...", jet.ginv, hess)


def divergence_sym2_from_arrays(
    s_val: np.ndarray, ds: np.ndarray, jet: MetricJet, gamma: np.ndarray
) -> np.ndarray:
    """(div S)_b = g^ac nabla_a S_cb for a symmetric 2-tensor."""
    nabla = (
        ds
        - np.einsum("...eac,...eb->...acb", gamma, s_val)
        - np.einsum("...eab,...ce->...acb", gamma, s_val)
    )
    return np.einsum("...ac,...acb->...b", jet.ginv, nabla)


def divergence_sym2(field: Sym2Field, oracle: MetricOracle, p) -> np.ndarray:
    jet = oracle.jet(p)
    gamma = christoffel(jet)
    s_val, ds = field.jet(p)
    return divergence_sym2_from_arrays(s_val, ds, jet, gamma)


def killing_residual(x_field: VectorField, oracle: MetricOracle, p) -> np.ndarray:
    """Norm of the Killing operator nabla_a X_b + nabla_b X_a at p.

    Zero iff the field is Killing at the point.  X is given contravariantly;
    the index is lowered with the oracle's metric before differentiating.
    """
    jet = oracle.jet(p)
    gamma = christoffel(jet)
    x, dx = x_field.jet(p)
    x_low = np.einsum("...ba,...a->...b", jet.g, x)
    dx_low = (
        np.einsum("...abc,...c->...ab", jet.dg, x)
        + np.einsum("...bc,...ac->...ab", jet.g, dx)
    )
    nabla = dx_low - np.einsum("...cab,...c->...ab", gamma, x_low)
    k = nabla + np.swapaxes(nabla, -1, -2)
    return norm_sym2(k, jet.ginv)


def norm_sym2(s_val: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    sq = np.einsum("...ab,...cd,...ac,...bd->...", s_val, s_val, ginv, ginv)
    return np.sqrt(np.maximum(sq, 0.0))


def norm_covector(v: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    sq = np.einsum("...a,...b,...ab->...", v, v, ginv)
    return np.sqrt(np.maximum(sq, 0.0))


# ---------------------------------------------------------------------------
# Finite differences (cross-checks and third-derivative quantities)


def fd_first_derivatives(
    fn: Callable,
    points: np.ndarray,
    extents: Sequence[float],
    bounds=None,
    step_fraction: float = FD_STEP_FRACTION,
) -> np.ndarray:
    """Richardson-extrapolated central first derivatives of a point function.

    ``fn`` maps (..., dim) points to arrays (..., *comp); the result has shape
    (..., dim, *comp).  Raises :class:`DomainBoundary` when a stencil point
    would leave ``bounds`` (a list of (lo, hi) or None per coordinate).
    """
    pts = np.asarray(points, dtype=float)
    dim = pts.shape[-1]
    extents = np.asarray(extents, dtype=float)
    out = None
    for c in range(dim):
        h = step_fraction * extents[c]
        if bounds is not None and bounds[c] is not None:
            lo, hi = bounds[c]
            if np.any(pts[..., c] - h < lo) or np.any(pts[..., c] + h > hi):
                raise DomainBoundary(
                    f"finite-difference stencil leaves the chart in coordinate {c}"
                )
        d_coarse = _central(fn, pts, c, h)
        d_fine = _central(fn, pts, c, 0.5 * h)
        d = (4.0 * d_fine - d_coarse) / 3.0
        if out is None:
            out = np.empty(pts.shape[:-1] + (dim,) + d.shape[pts.ndim - 1 :])
        out[(slice(None),) * (pts.ndim - 1) + (c,)] = d
    return out


def _central(fn, pts, c, h):
    up = pts.copy()
    dn = pts.copy()
    up[..., c] += h
    dn[..., c] -= h
    return (np.asarray(fn(up)) - np.asarray(fn(dn))) / (2.0 * h)


def fd_metric_jet(
    oracle: MetricOracle,
    points,
    extents,
    step_fraction: float = FD_STEP_FRACTION,
    second_step_fraction: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """First and second metric derivatives by Richardson central differences.

    Independent cross-check of an oracle's closed-form or dual-number jets.
    Second differences use a larger step than first ones: their roundoff
    floor scales as eps |g| / step^2, which at step 1e-4 already exceeds the
    1e-7 consistency budget no matter how exact the metric values are.
    """
    pts = _as_points(points)
    dim = pts.shape[-1]
    extents = np.asarray(extents, dtype=float)
    dg = fd_first_derivatives(oracle.metric, pts, extents, step_fraction=step_fraction)
    step_fraction = second_step_fraction
    batch = pts.shape[:-1]
    ddg = np.empty(batch + (dim, dim, dim, dim))
    g0 = oracle.metric(pts)

    def second(c, d, hc, hd):
        if c == d:
            up = pts.copy()
            dn = pts.copy()
            up[..., c] += hc
            dn[..., c] -= hc
            return (oracle.metric(up) - 2.0 * g0 + oracle.metric(dn)) / hc**2
        pp = pts.copy(); pm = pts.copy(); mp = pts.copy(); mm = pts.copy()
        pp[..., c] += hc; pp[..., d] += hd
        pm[..., c] += hc; pm[..., d] -= hd
        mp[..., c] -= hc; mp[..., d] += hd
        mm[..., c] -= hc; mm[..., d] -= hd
        return (
            oracle.metric(pp) - oracle.metric(pm)
            - oracle.metric(mp) + oracle.metric(mm)
        ) / (4.0 * hc * hd)

    for c in range(dim):
        hc = step_fraction * extents[c]
        for d in range(c, dim):
            hd = step_fraction * extents[d]
            coarse = second(c, d, hc, hd)
            fine = second(c, d, 0.5 * hc, 0.5 * hd)
            val = (4.0 * fine - coarse) / 3.0
            ddg[..., c, d, :, :] = val
            ddg[..., d, c, :, :] = val
    return dg, ddg
