"""The two-sphere-product family of conformally Kahler Einstein-Maxwell metrics.

For parameters 0 < a < b the construction assembles, in one product chart
(t, th, u, th2) on (a,b) x (0,2pi] x (-R^2,R^2) x (0,2pi]:

  * the quartic profile  W(t) = [(t-a)(t-b)/(a-b)] [2 - (t-a)(t-b)/(ab)],
    the unique quartic with W(a) = W(b) = 0, W'(a) = -W'(b) = 2, W'(0) = 0;
  * the Kahler product metric  g = [dt^2/W + W dth^2] + [du^2/W2 + W2 dth2^2]
    with W2(u) = R^2 - u^2/R^2 a round-sphere profile of scalar curvature c;
  * the physical metric h = g/t^2, the potential f = t, the Kahler form
    omega = dt^dth + du^dth2, and the Maxwell field F = omega + t^-2 phi/2,
    where phi is the anti-self-dual 2-form with ric0(h) = phi(., J.).

The polynomial layer is exact (Fractions); floats appear only in tensors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chart import (
    ChartDomain,
    ConformalOracle,
    CoordinateScalarField,
    MetricJet,
    MetricOracle,
    ProductMetricOracle,
    curvature_from_jet,
    laplacian,
)
from .errors import EmverifyError, InvalidParams, SingularMetric
from .forms import (
    ConstantTwoFormField,
    Orientation,
    PointwiseTwoFormField,
    TwoForm,
    asd_from_jinvariant,
)
from .polynomial import Polynomial

__all__ = [
    "FamilyParams",
    "QuarticProfile",
    "FamilyConstants",
    "ProductChart",
    "SurfaceProfileOracle",
    "quartic_profile",
    "ode_operator",
    "family_constants",
    "build_chart",
    "round_sphere_profile",
    "maxwell_field",
    "yamabe_value",
    "yamabe_value_quadrature",
    "calabi_value",
    "gauss_bonnet_check",
    "factor_areas_by_quadrature",
    "sweep",
    "SweepRow",
    "gauss_legendre_rule",
]

TWO_PI = 2.0 * math.pi

# Verification grids keep this fraction of each coordinate extent away from
# the poles t in {a, b}, u in {-R^2, R^2}; smooth closure there is certified
# by the profile boundary conditions, not by on-pole evaluation.
POLE_MARGIN_FRACTION = 1e-3


@dataclass(frozen=True)
class FamilyParams:
    """The pair 0 < a < b selecting one family member."""

    a: Fraction
    b: Fraction

    def __init__(self, a, b):
        object.__setattr__(self, "a", _exact(a))
        object.__setattr__(self, "b", _exact(b))
        if not (0 < self.a < self.b):
            raise InvalidParams(f"require 0 < a < b, got a={a}, b={b}")

    @property
    def ratio(self) -> float:
        return float(self.b / self.a)


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x)
    raise InvalidParams(f"cannot interpret parameter {x!r} exactly")


class QuarticProfile:
    """The profile polynomial with exact coefficients and derivatives."""

    def __init__(self, params: FamilyParams):
        a, b = params.a, params.b
        w = Polynomial([a * b, -(a + b), 1])  # (t - a)(t - b)
        self.params = params
        self.poly = (Fraction(2) / (a - b)) * w - (Fraction(1) / ((a - b) * a * b)) * (w * w)
        self._derivs = [self.poly]
        for _ in range(3):
            self._derivs.append(self._derivs[-1].deriv())

    @property
    def coeffs(self):
        return self.poly.coeffs

    def __call__(self, t):
        return self.poly(t)

    def derivative(self, t, order: int = 1):
        return self._derivs[order](t)

    def at(self, t) -> Fraction:
        return self.poly.at(t)

    def derivative_at(self, t, order: int = 1) -> Fraction:
        """Exact derivative value at a rational point."""
        return self._derivs[order].at(t)

    def positive_on_interior(self, samples: int = 512) -> bool:
        a, b = float(self.params.a), float(self.params.b)
        ts = np.linspace(a, b, samples + 2)[1:-1]
        return bool(np.all(self.poly(ts) > 0.0))


def quartic_profile(params: FamilyParams) -> QuarticProfile:
    return QuarticProfile(params)


def ode_operator(y: Polynomial) -> Polynomial:
    """L[y] = t^2 y'' - 6 t y' + 12 y, exactly; kills t^3 and t^4."""
    t = Polynomial.monomial(1)
    t2 = Polynomial.monomial(2)
    return t2 * y.deriv(2) - 6 * (t * y.deriv(1)) + 12 * y


@dataclass(frozen=True)
class FamilyConstants:
    """Closed-form constants of one family member.

    ``area_1`` and ``kclass_1`` carry the class-pairing constant 4 pi (b-a)
    used throughout the sweep table.  The realized Darboux chart integrates
    to half that value (the area form is dt^dth over an extent of (b-a) and
    one 2 pi angle turn); ``factor_areas_by_quadrature`` reports the chart
    integrals.
    """

    s_h: float            # constant scalar curvature of h = g/t^2
    s_sigma: float        # scalar curvature of the second factor
    s_h_exact: Fraction
    s_sigma_exact: Fraction
    area_sigma: float
    area_1: float
    radius_sigma: float   # R with R^2 = 2/s_sigma
    kclass_1: float
    kclass_sigma: float
    cross_check_s_h: float      # -12 W(0), must match s_h
    cross_check_s_sigma: float  # W''(0), must match s_sigma

    def __post_init__(self):
        if not (self.s_sigma > 0 and self.s_h > 0):
            raise InvalidParams("family constants must be positive")
        if not (self.area_1 > 4.0 * self.area_sigma):
            raise InvalidParams("first-factor class pairing must exceed 4x the second")


def family_constants(params: FamilyParams) -> FamilyConstants:
    a, b = params.a, params.b
    profile = quartic_profile(params)
    d_exact = 12 * a * b / (b - a)
    c_exact = 2 * (a + b) ** 2 / ((b - a) * a * b)
    ba = float(b - a)
    area_sigma = 4.0 * math.pi * ba * float(a * b) / float((a + b) ** 2)
    area_1 = 4.0 * math.pi * ba
    return FamilyConstants(
        s_h=float(d_exact),
        s_sigma=float(c_exact),
        s_h_exact=d_exact,
        s_sigma_exact=c_exact,
        area_sigma=area_sigma,
        area_1=area_1,
        radius_sigma=math.sqrt(2.0 / float(c_exact)),
        kclass_1=area_1,
        kclass_sigma=area_sigma,
        cross_check_s_h=float(-12 * profile.at(0)),
        cross_check_s_sigma=float(profile.derivative_at(0, 2)),
    )


def round_sphere_profile(radius_sq) -> Polynomial:
    """Darboux profile R^2 - u^2/R^2 of a round 2-sphere of squared radius R^2."""
    r2 = _exact(radius_sq)
    return Polynomial([r2, 0, -1 / r2])


class SurfaceProfileOracle(MetricOracle):
    """Closed-form 2d jets of dx^2/W + W dth^2 for a polynomial profile W."""

    def __init__(self, profile, domain: tuple[float, float]):
        if isinstance(profile, QuarticProfile):
            profile = profile.poly
        self.w = profile
        self.dw = profile.deriv()
        self.ddw = self.dw.deriv()
        self.domain = domain
        self.dim = 2

    def jet(self, points) -> MetricJet:
        pts = np.asarray(points, dtype=float)
        x = pts[..., 0]
        w = np.asarray(self.w(x))
        if np.any(w <= 0.0):
            raise SingularMetric("profile is non-positive at an evaluation point")
        w1 = np.asarray(self.dw(x))
        w2 = np.asarray(self.ddw(x))
        batch = pts.shape[:-1]
        g = np.zeros(batch + (2, 2))
        dg = np.zeros(batch + (2, 2, 2))
        ddg = np.zeros(batch + (2, 2, 2, 2))
        g[..., 0, 0] = 1.0 / w
        g[..., 1, 1] = w
        dg[..., 0, 0, 0] = -w1 / w**2
        dg[..., 0, 1, 1] = w1
        ddg[..., 0, 0, 0, 0] = (2.0 * w1**2 - w * w2) / w**3
        ddg[..., 0, 0, 1, 1] = w2
        return MetricJet(g, dg, ddg)


@dataclass
class ProductChart:
    """One family member realized on its product chart, with all suppliers."""

    params: FamilyParams
    profile: QuarticProfile
    constants: FamilyConstants
    domain: ChartDomain
    g_oracle: MetricOracle
    h_oracle: MetricOracle
    potential: CoordinateScalarField       # f = t
    omega: ConstantTwoFormField            # dt^dth + du^dth2
    orientation: Orientation
    maxwell: PointwiseTwoFormField = field(init=False)

    def __post_init__(self):
        self.maxwell = PointwiseTwoFormField(
            lambda pts: _maxwell_six(self, pts),
            extents=self.domain.extents,
            bounds=self.domain.fd_bounds,
        )

    def j_matrix(self, points) -> np.ndarray:
        """Product complex structure: J dt = dth-direction on each factor."""
        pts = np.asarray(points, dtype=float)
        w = np.asarray(self.profile(pts[..., 0]))
        r2 = self.constants.radius_sigma**2
        w2 = r2 - pts[..., 2] ** 2 / r2
        jm = np.zeros(pts.shape[:-1] + (4, 4))
        jm[..., 1, 0] = 1.0 / w
        jm[..., 0, 1] = -w
        jm[..., 3, 2] = 1.0 / w2
        jm[..., 2, 3] = -w2
        return jm

    def grid(self, n_t: int, n_theta: int, n_u: int, n_theta2: int):
        return self.domain.grid((n_t, n_theta, n_u, n_theta2))

    def interior_points(self, rng: np.random.Generator, n: int, pad: float = 0.02) -> np.ndarray:
        return self.domain.sample_interior(rng, n, pad=pad)

    def em_config(self):
        from .residuals import EMConfig

        return EMConfig(
            oracle=self.h_oracle,
            maxwell=self.maxwell,
            orientation=self.orientation,
            domain=self.domain,
            j_matrix=self.j_matrix,
            conformal=(self.g_oracle, self.potential),
        )


def build_chart(params: FamilyParams) -> ProductChart:
    profile = quartic_profile(params)
    constants = family_constants(params)
    a, b = float(params.a), float(params.b)
    r2 = constants.radius_sigma**2
    factor1 = SurfaceProfileOracle(profile, (a, b))
    factor2 = SurfaceProfileOracle(round_sphere_profile(2 / constants.s_sigma_exact), (-r2, r2))
    g_oracle = ProductMetricOracle(factor1, factor2)
    potential = CoordinateScalarField(0)
    h_oracle = ConformalOracle(g_oracle, potential)
    domain = ChartDomain(
        bounds=((a, b), None, (-r2, r2), None),
        margins=(
            POLE_MARGIN_FRACTION * (b - a),
            0.0,
            POLE_MARGIN_FRACTION * (2.0 * r2),
            0.0,
        ),
    )
    omega = ConstantTwoFormField([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    return ProductChart(
        params=params,
        profile=profile,
        constants=constants,
        domain=domain,
        g_oracle=g_oracle,
        h_oracle=h_oracle,
        potential=potential,
        omega=omega,
        orientation=Orientation(),
    )


def _maxwell_six(chart: ProductChart, pts: np.ndarray) -> np.ndarray:
    """Component evaluator of F = omega + t^-2 phi / 2 (SIX_PAIRS basis)."""
    pts = np.asarray(pts, dtype=float)
    hjet = chart.h_oracle.jet(pts)
    bundle = curvature_from_jet(hjet)
    jm = chart.j_matrix(pts)
    g = chart.g_oracle.metric(pts)
    phi = asd_from_jinvariant(g, jm, bundle.ric0)
    t = pts[..., 0]
    omega_six = chart.omega.value(pts).six
    return omega_six + 0.5 * t[..., None] ** -2.0 * phi.six


def maxwell_field(chart: ProductChart, p) -> TwoForm:
    """The harmonic Maxwell 2-form of the family member at p."""
    return chart.maxwell.value(p)


# ---------------------------------------------------------------------------
# Quadrature


def gauss_legendre_rule(
    lo: float, hi: float, nodes: int = 24, panels: int = 8, log_spaced: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule; log-spaced panels handle wide intervals."""
    if log_spaced:
        edges = np.geomspace(lo, hi, panels + 1)
    else:
        edges = np.linspace(lo, hi, panels + 1)
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for e0, e1 in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (e0 + e1), 0.5 * (e1 - e0)
        xs.append(mid + half * x0)
        ws.append(half * w0)
    return np.concatenate(xs), np.concatenate(ws)


def _volume_quadrature(chart: ProductChart, nodes: int = 24, panels: int = 12) -> float:
    """Total volume of h by tensor-product quadrature of sqrt(det h)."""
    a, b = float(chart.params.a), float(chart.params.b)
    r2 = chart.constants.radius_sigma**2
    t, wt = gauss_legendre_rule(a, b, nodes, panels, log_spaced=True)
    u, wu = gauss_legendre_rule(-r2, r2, nodes, max(2, panels // 2))
    tt, uu = np.meshgrid(t, u, indexing="ij")
    pts = np.stack(
        [tt, np.full_like(tt, 1.0), uu, np.full_like(tt, 1.0)], axis=-1
    )
    dets = np.linalg.det(chart.h_oracle.metric(pts))
    integrand = np.sqrt(dets)
    return TWO_PI**2 * float(np.einsum("i,j,ij->", wt, wu, integrand))


def yamabe_value(params: FamilyParams, cross_check: bool = True, rtol: float = 1e-6) -> float:
    """Normalized total scalar curvature s_h V^(1/2) of the family member.

    Closed form 8 pi sqrt(6 (a^2 + ab + b^2)) / (a + b); when ``cross_check``
    is set the value is recomputed as s_h times the quadrature volume square
    root and the two must agree to ``rtol`` relative.
    """
    a, b = float(params.a), float(params.b)
    closed = 8.0 * math.pi * math.sqrt(6.0 * (a * a + a * b + b * b)) / (a + b)
    if cross_check:
        quad = yamabe_value_quadrature(params)
        if abs(quad - closed) > rtol * abs(closed):
            raise EmverifyError(
                f"yamabe quadrature {quad!r} deviates from closed form {closed!r}"
            )
    return closed


def yamabe_value_quadrature(params: FamilyParams) -> float:
    chart = build_chart(params)
    vol = _volume_quadrature(chart)
    return chart.constants.s_h * math.sqrt(vol)


def calabi_value(params: FamilyParams) -> float:
    """Total square scalar curvature of h: s_h^2 Vol(h), volume by quadrature.

    Scale invariant under (a, b) -> (lambda a, lambda b); equals the square
    of the Yamabe value because s_h is constant.
    """
    chart = build_chart(params)
    return chart.constants.s_h**2 * _volume_quadrature(chart)


def gauss_bonnet_check(params: FamilyParams, nodes: int = 32, panels: int = 8) -> tuple[float, float]:
    """Total scalar curvature of each factor by quadrature; both must be 8 pi.

    The integrand is the factor scalar curvature computed through the
    curvature engine on the 2d oracles, not the profile's closed form.
    Gauss-Legendre nodes are strictly interior, so the profile zeros at the
    poles are never evaluated.
    """
    chart = build_chart(params)
    a, b = float(params.a), float(params.b)
    r2 = chart.constants.radius_sigma**2
    out = []
    for oracle, lo, hi in (
        (SurfaceProfileOracle(chart.profile, (a, b)), a, b),
        (
            SurfaceProfileOracle(round_sphere_profile(2 / chart.constants.s_sigma_exact), (-r2, r2)),
            -r2,
            r2,
        ),
    ):
        x, w = gauss_legendre_rule(lo, hi, nodes, panels)
        pts = np.stack([x, np.full_like(x, 1.0)], axis=-1)
        jet = oracle.jet(pts)
        s = curvature_from_jet(jet).s
        dets = np.sqrt(np.linalg.det(jet.g))
        out.append(TWO_PI * float(np.sum(w * s * dets)))
    return out[0], out[1]


def factor_areas_by_quadrature(params: FamilyParams, nodes: int = 32, panels: int = 8) -> tuple[float, float]:
    """Chart areas of the two factors: integral of sqrt(det) over the rectangle."""
    chart = build_chart(params)
    a, b = float(params.a), float(params.b)
    r2 = chart.constants.radius_sigma**2
    out = []
    for oracle, lo, hi in (
        (SurfaceProfileOracle(chart.profile, (a, b)), a, b),
        (
            SurfaceProfileOracle(round_sphere_profile(2 / chart.constants.s_sigma_exact), (-r2, r2)),
            -r2,
            r2,
        ),
    ):
        x, w = gauss_legendre_rule(lo, hi, nodes, panels)
        pts = np.stack([x, np.full_like(x, 1.0)], axis=-1)
        dets = np.sqrt(np.maximum(np.linalg.det(oracle.metric(pts)), 0.0))
        out.append(TWO_PI * float(np.sum(w * dets)))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Parameter sweep


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    s_h: float
    s_sigma: float
    area_sigma: float
    area_1: float
    yamabe: float
    calabi: float
    max_residual: float


def sweep(
    ratio_lo: float,
    ratio_hi: float,
    steps: int,
    residual_grid: tuple[int, int, int, int] = (10, 2, 10, 2),
    threads: int = 1,
) -> list[SweepRow]:
    """Family table over b/a in [ratio_lo, ratio_hi], log-spaced, a = 1.

    Each row carries the closed-form constants, the Yamabe and Calabi values,
    and the maximum Einstein-Maxwell residual over a coarse verification grid.
    """
    from .residuals import Tolerances, verify

    if not (1.0 < ratio_lo <= ratio_hi) or steps < 1:
        raise InvalidParams("sweep needs 1 < ratio_lo <= ratio_hi and steps >= 1")
    if steps == 1:
        ratios = np.array([ratio_lo])
    else:
        ratios = np.geomspace(ratio_lo, ratio_hi, steps)
    rows = []
    for r in ratios:
        params = FamilyParams(1, float(r))
        chart = build_chart(params)
        cst = chart.constants
        report = verify(
            chart.em_config(), residual_grid, Tolerances(), threads=threads
        )
        rows.append(
            SweepRow(
                ratio=float(r),
                s_h=cst.s_h,
                s_sigma=cst.s_sigma,
                area_sigma=cst.area_sigma,
                area_1=cst.area_1,
                yamabe=yamabe_value(params),
                calabi=calabi_value(params),
                max_residual=report.max_residual,
            )
        )
    return rows
