"""Residual verification of the Einstein-Maxwell system on a chart grid.

For a configuration (h, F) the checked equations are

    closed     : dF = 0
    coclosed   : d*F = 0
    energy     : trace-free part of  r + F o F  vanishes
    matter     : ric0 + 2 F+ o F- = 0
    agreement  : the energy and matter residuals coincide pointwise
    leibniz    : div(F+ o F-) = F-(div F+ sharp) + F+(div F- sharp)
    scalar     : the scalar curvature of h is constant over the grid

plus, when the optional data are present, the conformal trace-free-Ricci law
for h = f**-2 g, the J-invariance of Hess f, and the recovery of f from the
self-dual field strength.  All tensor norms are taken with respect to h.

Residuals split into two tolerance tiers: quantities exact at the jet level
(tier "jet") and quantities needing finite differences of curvature-derived
fields, i.e. third metric derivatives (tier "fd").
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chart import (
    ChartDomain,
    ConformalOracle,
    Grid,
    MetricOracle,
    ScalarField,
    christoffel,
    curvature_from_jet,
    divergence_sym2_from_arrays,
    hessian,
    norm_covector,
    norm_sym2,
)
from .errors import EmverifyError, NonPositivePotential, ZeroSelfDualPart
from .forms import (
    Orientation,
    TwoForm,
    TwoFormField,
    divergence_two_form,
    exterior_derivative_from_jet,
    norm as form_norm,
    sd_asd_split,
    star_field_jet,
    three_form_norm,
)

__all__ = [
    "Tolerances",
    "EMConfig",
    "EquationResult",
    "ResidualReport",
    "residual_harmonic",
    "residual_energy",
    "residual_matter",
    "residual_scalar_const",
    "leibniz_residual",
    "conformal_ricci_residual",
    "holomorphy_residual",
    "recover_potential",
    "verify",
]

# The energy and matter residuals are two evaluations of one algebraic
# quantity; they must agree far below either physical tolerance tier.
AGREEMENT_TOL = 1e-12

_CHUNK = 4096


@dataclass(frozen=True)
class Tolerances:
    jet: float = 1e-8
    fd: float = 1e-5

    def __post_init__(self):
        if self.jet <= 0 or self.fd <= 0:
            raise ValueError("tolerances must be positive")

    def for_tier(self, tier: str) -> float:
        return {"jet": self.jet, "fd": self.fd, "agreement": AGREEMENT_TOL}[tier]


@dataclass
class EMConfig:
    """Everything needed to verify one Einstein-Maxwell candidate pair."""

    oracle: MetricOracle               # the physical metric h
    maxwell: TwoFormField
    orientation: Orientation
    domain: ChartDomain
    j_matrix: Callable | None = None   # points -> J^a_b, optional
    conformal: tuple | None = None     # (g oracle, positive potential f), optional


@dataclass(frozen=True)
class EquationResult:
    name: str
    max: float
    mean: float
    tolerance: float
    tier: str
    passed: bool


@dataclass
class ResidualReport:
    equations: list[EquationResult]
    s_median: float
    s_spread: float
    scalar_tolerance: float
    isotropy_max: float | None
    grid_shape: tuple[int, ...]
    passed: bool = field(init=False)

    def __post_init__(self):
        scalar_ok = self.s_spread < self.scalar_tolerance
        self.passed = scalar_ok and all(e.passed for e in self.equations)

    @property
    def max_residual(self) -> float:
        vals = [e.max for e in self.equations] + [self.s_spread]
        return max(vals)

    def failing(self) -> list[str]:
        names = [e.name for e in self.equations if not e.passed]
        if not self.s_spread < self.scalar_tolerance:
            names.append("scalar_constancy")
        return names

    def to_text(self) -> str:
        lines = [
            f"{'equation':24s} {'max':>12s} {'mean':>12s} {'tolerance':>10s} {'tier':>9s}  status",
        ]
        for e in self.equations:
            lines.append(
                f"{e.name:24s} {e.max:12.3e} {e.mean:12.3e} {e.tolerance:10.1e}"
                f" {e.tier:>9s}  {'pass' if e.passed else 'FAIL'}"
            )
        lines.append(
            f"{'scalar_constancy':24s} {self.s_spread:12.3e} {'-':>12s}"
            f" {self.scalar_tolerance:10.1e} {'jet':>9s}"
            f"  {'pass' if self.s_spread < self.scalar_tolerance else 'FAIL'}"
        )
        lines.append(f"scalar curvature (median over grid): {self.s_median:.12g}")
        if self.isotropy_max is not None:
            lines.append(f"isotropy check (angle-slice residual delta): {self.isotropy_max:.3e}")
        lines.append(f"grid: {'x'.join(str(n) for n in self.grid_shape)}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_csv_rows(self) -> list[tuple]:
        rows = [
            (e.name, e.max, e.mean, e.tolerance, "pass" if e.passed else "fail")
            for e in self.equations
        ]
        scalar_ok = self.s_spread < self.scalar_tolerance
        rows.append(
            (
                "scalar_constancy",
                self.s_spread,
                self.s_spread,
                self.scalar_tolerance,
                "pass" if scalar_ok else "fail",
            )
        )
        return rows


# ---------------------------------------------------------------------------
# Shared per-point evaluation


def _raise_index(v: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    return np.einsum("...ab,...b->...a", ginv, v)


def _trace_free(x: np.ndarray, jet) -> np.ndarray:
    tr = np.einsum("...ab,...ab->...", jet.ginv, x)
    n = jet.dim
    return x - (tr / n)[..., None, None] * jet.g


def _point_block(cfg: EMConfig, pts: np.ndarray, flip_divergence_sign: bool = False) -> dict:
    """All per-point residuals at once; intermediates shared across equations."""
    hjet = cfg.oracle.jet(pts)
    bundle = curvature_from_jet(hjet)
    gamma = bundle.gamma

    f_form, dmat = cfg.maxwell.jet(pts)
    star_form, dstar = star_field_jet(hjet, cfg.orientation, f_form, dmat)

    res = {}
    res["closed"] = three_form_norm(exterior_derivative_from_jet(dmat), hjet)
    res["coclosed"] = three_form_norm(exterior_derivative_from_jet(dstar), hjet)

    ff = np.einsum("...jm,...ml,...lk->...jk", f_form.mat, hjet.ginv, f_form.mat)
    energy_tensor = _trace_free(bundle.ric + ff, hjet)
    res["energy"] = norm_sym2(energy_tensor, hjet.ginv)

    fp = TwoForm(0.5 * (f_form.six + star_form.six))
    fm = TwoForm(0.5 * (f_form.six - star_form.six))
    dfp = 0.5 * (dmat + dstar)
    dfm = 0.5 * (dmat - dstar)
    t_val = np.einsum("...jm,...ml,...lk->...jk", fp.mat, hjet.ginv, fm.mat)
    res["matter"] = norm_sym2(bundle.ric0 + 2.0 * t_val, hjet.ginv)
    res["energy_matter_agreement"] = np.abs(res["energy"] - res["matter"])

    res["leibniz"] = _leibniz_from_parts(
        hjet, gamma, fp, fm, dfp, dfm, t_val, flip_divergence_sign
    )

    res["_s"] = bundle.s

    if cfg.conformal is not None:
        g_oracle, f_scalar = cfg.conformal
        res["conformal_ricci"] = conformal_ricci_residual(g_oracle, f_scalar, pts)
        fval = f_scalar.value(pts)
        fp_norm = form_norm(fp, hjet)
        recovered = 2.0 ** (-0.25) * np.sqrt(fp_norm)
        res["potential_recovery"] = np.abs(recovered - fval)
        if cfg.j_matrix is not None:
            res["holomorphy"] = holomorphy_residual(g_oracle, cfg.j_matrix, f_scalar, pts)
    return res


_TIERS = {
    "closed": "fd",
    "coclosed": "fd",
    "energy": "jet",
    "matter": "jet",
    "energy_matter_agreement": "agreement",
    "leibniz": "fd",
    "conformal_ricci": "jet",
    "holomorphy": "jet",
    "potential_recovery": "jet",
}


# ---------------------------------------------------------------------------
# Point-level operations


def residual_harmonic(cfg: EMConfig, p) -> tuple[np.ndarray, np.ndarray]:
    """(|dF|, |d*F|) at p, norms with respect to h."""
    pts = np.asarray(p, dtype=float)
    hjet = cfg.oracle.jet(pts)
    f_form, dmat = cfg.maxwell.jet(pts)
    _, dstar = star_field_jet(hjet, cfg.orientation, f_form, dmat)
    return (
        three_form_norm(exterior_derivative_from_jet(dmat), hjet),
        three_form_norm(exterior_derivative_from_jet(dstar), hjet),
    )


def residual_energy(cfg: EMConfig, p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    hjet = cfg.oracle.jet(pts)
    bundle = curvature_from_jet(hjet)
    fm = cfg.maxwell.value(pts).mat
    ff = np.einsum("...jm,...ml,...lk->...jk", fm, hjet.ginv, fm)
    return norm_sym2(_trace_free(bundle.ric + ff, hjet), hjet.ginv)


def residual_matter(cfg: EMConfig, p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    hjet = cfg.oracle.jet(pts)
    bundle = curvature_from_jet(hjet)
    f_form = cfg.maxwell.value(pts)
    fp, fm = sd_asd_split(hjet, cfg.orientation, f_form)
    t_val = np.einsum("...jm,...ml,...lk->...jk", fp.mat, hjet.ginv, fm.mat)
    return norm_sym2(bundle.ric0 + 2.0 * t_val, hjet.ginv)


def residual_scalar_const(cfg: EMConfig, grid) -> tuple[float, float]:
    """(spread, median) of the scalar curvature of h over the grid."""
    pts = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=float)
    s = curvature_from_jet(cfg.oracle.jet(pts)).s
    med = float(np.median(s))
    return float(np.max(np.abs(s - med))), med


def _leibniz_from_parts(hjet, gamma, fp, fm, dfp, dfm, t_val, flip_sign) -> np.ndarray:
    """Both sides of the divergence Leibniz identity, computed independently.

    Left side: the composed field F+ o F- is differentiated by the product
    rule (through the metric inverse) and fed to the tensor divergence.
    Right side: each factor is contracted with the raised divergence of the
    other, (rhs)_b = (F-)_cb (div F+)^c + (F+)_cb (div F-)^c.
    """
    dginv = -np.einsum("...am,...emn,...nd->...ead", hjet.ginv, hjet.dg, hjet.ginv)
    dt_val = (
        np.einsum("...ejm,...ml,...lk->...ejk", dfp, hjet.ginv, fm.mat)
        + np.einsum("...jm,...eml,...lk->...ejk", fp.mat, dginv, fm.mat)
        + np.einsum("...jm,...ml,...elk->...ejk", fp.mat, hjet.ginv, dfm)
    )
    div_t = divergence_sym2_from_arrays(t_val, dt_val, hjet, gamma)
    sgn = -1.0 if flip_sign else 1.0
    div_fp = sgn * divergence_two_form(fp, dfp, hjet, gamma)
    div_fm = sgn * divergence_two_form(fm, dfm, hjet, gamma)
    rhs = (
        np.einsum("...cb,...c->...b", fm.mat, _raise_index(div_fp, hjet.ginv))
        + np.einsum("...cb,...c->...b", fp.mat, _raise_index(div_fm, hjet.ginv))
    )
    return norm_covector(div_t - rhs, hjet.ginv)


def leibniz_residual(
    maxwell: TwoFormField,
    oracle: MetricOracle,
    orientation: Orientation,
    p,
    flip_divergence_sign: bool = False,
) -> np.ndarray:
    """Residual of the divergence Leibniz identity for F+ o F- at p."""
    pts = np.asarray(p, dtype=float)
    hjet = oracle.jet(pts)
    gamma = christoffel(hjet)
    f_form, dmat = maxwell.jet(pts)
    star_form, dstar = star_field_jet(hjet, orientation, f_form, dmat)
    fp = TwoForm(0.5 * (f_form.six + star_form.six))
    fm = TwoForm(0.5 * (f_form.six - star_form.six))
    dfp = 0.5 * (dmat + dstar)
    dfm = 0.5 * (dmat - dstar)
    t_val = np.einsum("...jm,...ml,...lk->...jk", fp.mat, hjet.ginv, fm.mat)
    return _leibniz_from_parts(hjet, gamma, fp, fm, dfp, dfm, t_val, flip_divergence_sign)


def conformal_ricci_residual(g_oracle: MetricOracle, f: ScalarField, p) -> np.ndarray:
    """Residual of ric0(h) = ric0(g) + 2 f^-1 Hess0 f for h = f^-2 g (dim 4)."""
    pts = np.asarray(p, dtype=float)
    fval, df, ddf = f.jet(pts)
    if np.any(fval <= 0.0):
        raise NonPositivePotential("conformal potential must be positive")
    gjet = g_oracle.jet(pts)
    g_bundle = curvature_from_jet(gjet)
    hess = hessian(df, ddf, g_bundle.gamma)
    hess0 = _trace_free(hess, gjet)
    h_oracle = ConformalOracle(g_oracle, f)
    hjet = h_oracle.jet(pts)
    h_bundle = curvature_from_jet(hjet)
    resid = h_bundle.ric0 - g_bundle.ric0 - 2.0 / fval[..., None, None] * hess0
    return norm_sym2(resid, hjet.ginv)


def holomorphy_residual(g_oracle: MetricOracle, j_matrix, f: ScalarField, p) -> np.ndarray:
    """|Hess f - Hess f(J., J.)| with respect to g; zero iff f generates a
    holomorphic gradient (then J grad f is Killing)."""
    pts = np.asarray(p, dtype=float)
    _, df, ddf = f.jet(pts)
    gjet = g_oracle.jet(pts)
    bundle = curvature_from_jet(gjet)
    hess = hessian(df, ddf, bundle.gamma)
    jm = j_matrix(pts) if callable(j_matrix) else np.asarray(j_matrix, dtype=float)
    pulled = np.einsum("...cd,...ca,...db->...ab", hess, jm, jm)
    return norm_sym2(hess - pulled, gjet.ginv)


def recover_potential(
    maxwell: TwoFormField, oracle: MetricOracle, orientation: Orientation, p
) -> np.ndarray:
    """2**(-1/4) |F+|^(1/2) with respect to the oracle's metric at p."""
    pts = np.asarray(p, dtype=float)
    hjet = oracle.jet(pts)
    fp, _ = sd_asd_split(hjet, orientation, maxwell.value(pts))
    n = form_norm(fp, hjet)
    if np.any(n < 1e-14):
        raise ZeroSelfDualPart("self-dual part vanishes; no potential to recover")
    return 2.0 ** (-0.25) * np.sqrt(n)


# ---------------------------------------------------------------------------
# Grid verification


def verify(
    cfg: EMConfig,
    grid,
    tolerances: Tolerances = Tolerances(),
    threads: int = 1,
) -> ResidualReport:
    """Evaluate every residual over the grid and aggregate a report.

    ``grid`` is a :class:`~emverify.chart.Grid` or a tuple of per-axis counts
    resolved against ``cfg.domain``.  Aggregation (max/mean) is associative
    and commutative, so the result is independent of chunk scheduling.
    """
    if not isinstance(grid, Grid):
        grid = cfg.domain.grid(tuple(grid))
    pts = grid.points
    n = pts.shape[0]
    chunks = [(i, min(i + _CHUNK, n)) for i in range(0, n, _CHUNK)]

    results: dict[str, np.ndarray] = {}

    def run_chunk(span):
        i0, i1 = span
        try:
            return i0, _point_block(cfg, pts[i0:i1])
        except EmverifyError as exc:
            raise type(exc)(f"{exc} (grid points {i0}..{i1 - 1})") from exc

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run_chunk, chunks))
    else:
        blocks = [run_chunk(span) for span in chunks]

    for i0, block in blocks:
        for name, arr in block.items():
            if name not in results:
                results[name] = np.empty(n)
            results[name][i0 : i0 + np.size(arr)] = arr

    s = results.pop("_s")
    s_median = float(np.median(s))
    s_spread = float(np.max(np.abs(s - s_median)))
    scalar_tol = tolerances.jet * max(1.0, abs(s_median))

    equations = []
    for name, arr in results.items():
        tier = _TIERS[name]
        tol = tolerances.for_tier(tier)
        equations.append(
            EquationResult(
                name=name,
                max=float(np.max(arr)),
                mean=float(np.mean(arr)),
                tolerance=tol,
                tier=tier,
                passed=bool(np.max(arr) < tol),
            )
        )

    isotropy = _isotropy_delta(results, grid)
    return ResidualReport(
        equations=equations,
        s_median=s_median,
        s_spread=s_spread,
        scalar_tolerance=scalar_tol,
        isotropy_max=isotropy,
        grid_shape=grid.shape,
    )


def _isotropy_delta(results: dict, grid: Grid) -> float | None:
    """Largest per-equation residual difference between two angle slices."""
    deltas = []
    for axis in (1, 3):
        if len(grid.shape) <= axis or grid.shape[axis] < 2:
            continue
        m0 = grid.axis_mask(axis, 0)
        m1 = grid.axis_mask(axis, 1)
        for arr in results.values():
            deltas.append(abs(float(np.max(arr[m0])) - float(np.max(arr[m1]))))
    return max(deltas) if deltas else None
